//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by the implicitly shifted QL iteration.
//!
//! The reduction and QL sweeps follow the classic EISPACK `tred2`/`tql2`
//! pair (as popularised by JAMA). Eigenvalues are returned in ascending order.

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Relative asymmetry accepted on input.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigendecomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

impl Eigh {
    /// `V diag(μ) Vᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.values.len();
        SymMatrix::from_fn(n, |i, j| {
            self.values
                .iter()
                .zip(&self.vectors)
                .map(|(mu, v)| mu * v[i] * v[j])
                .sum()
        })
    }
}

fn check_symmetric(m: &SymMatrix) -> Result<()> {
    let scale = m
        .as_slice()
        .iter()
        .fold(0.0f64, |a, x| a.max(x.abs()))
        .max(1.0);
    let asym = m.max_asymmetry();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Domain(format!(
            "matrix is not symmetric: max |a_ij - a_ji| = {asym:e}"
        )));
    }
    if m.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Full eigendecomposition.
pub fn eigh(m: &SymMatrix) -> Result<Eigh> {
    check_symmetric(m)?;
    let n = m.dim();
    if n == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: vec![],
        });
    }
    let mut v = m.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e, true);
    ql_implicit(n, &mut d, &mut e, Some(&mut v))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|row| v[row * n + k]).collect())
        .collect();
    Ok(Eigh { values, vectors })
}

/// Eigenvalues only, ascending. Skips the accumulation of transforms.
pub fn eigvalsh(m: &SymMatrix) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let n = m.dim();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut v = m.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e, false);
    ql_implicit(n, &mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

// Householder reduction of the row-major matrix `v` (overwritten). On exit `d`
// holds the diagonal and `e[1..]` the sub-diagonal of the tridiagonal form;
// with `accumulate` set, `v` holds the orthogonal transform.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for (i, di) in d.iter_mut().enumerate() {
            *di = v[at(i, i)];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e); rotations are applied to `v` when given.
fn ql_implicit(n: usize, d: &mut [f64], e: &mut [f64], mut v: Option<&mut [f64]>) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let max_sweeps = 30 * n.max(1);
    let mut sweeps = 0usize;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(Error::Numerical(format!(
                        "QL iteration did not converge after {max_sweeps} sweeps"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let row = k * n;
                            let hk = v[row + i + 1];
                            v[row + i + 1] = s * v[row + i] + c * hk;
                            v[row + i] = c * v[row + i] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let r = eigh(&SymMatrix::identity(5)).unwrap();
        assert!(r.values.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let r = eigh(&SymMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(r.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(
            eigvalsh(&SymMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = SymMatrix::from_rows(2, vec![1.0, 2.0, 2.5, 1.0]).unwrap();
        let err = eigh(&m).unwrap_err();
        assert!(err.to_string().contains("5e-1"), "{err}");
    }

    #[test]
    fn one_by_one_and_empty() {
        let r = eigh(&SymMatrix::from_diag(&[-4.0])).unwrap();
        assert_eq!(r.values, vec![-4.0]);
        assert_eq!(r.vectors, vec![vec![1.0]]);
        assert!(eigvalsh(&SymMatrix::zeros(0)).unwrap().is_empty());
    }

    #[test]
    fn zero_matrix() {
        let r = eigvalsh(&SymMatrix::zeros(4)).unwrap();
        assert!(r.iter().all(|&x| x == 0.0));
    }
}
