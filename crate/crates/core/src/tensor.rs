//! Symmetric tensors stored by canonical (sorted) multi-index.
//!
//! An order-`d`, dimension-`N` symmetric tensor has one free value per orbit of
//! the permutation group acting on index tuples. Orbits are represented by
//! their non-decreasing tuple and stored contiguously in colexicographic
//! order, so the storage length is `binomial(N + d - 1, d)`.
//!
//! Indices are zero-based throughout: a valid index lies in `0..dim`.

use crate::error::{domain, Result};
use crate::linalg::SymMatrix;

/// Largest tensor order supported by the fixed-size index buffers.
pub const MAX_ORDER: usize = 6;

/// Tolerance on `‖x‖ - 1` accepted for vectors that must be unit norm.
pub const UNIT_NORM_TOL: f64 = 1e-12;

const FACTORIAL: [u64; MAX_ORDER + 1] = [1, 1, 2, 6, 24, 120, 720];

/// `binomial(n, k)` for the small `k` used by index ranking.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc * (n - t) as u128 / (t + 1) as u128;
    }
    acc as usize
}

/// Number of canonical entries of an order-`order`, dimension-`dim` tensor.
pub fn num_canonical(order: usize, dim: usize) -> usize {
    if dim == 0 {
        return usize::from(order == 0);
    }
    binomial(dim + order - 1, order)
}

/// Number of distinct permutations of a sorted index list.
pub fn multiplicity_of_sorted(sorted: &[usize]) -> u64 {
    let mut denom: u64 = 1;
    let mut run = 1usize;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            denom *= FACTORIAL[run];
            run = 1;
        }
    }
    if !sorted.is_empty() {
        denom *= FACTORIAL[run];
    }
    FACTORIAL[sorted.len()] / denom
}

/// Colexicographic rank of a non-decreasing tuple among all non-decreasing
/// tuples of the same length.
pub fn colex_rank(sorted: &[usize]) -> usize {
    sorted
        .iter()
        .enumerate()
        .map(|(k, &i)| binomial(i + k, k + 1))
        .sum()
}

/// A sorted multi-index together with the size of its permutation orbit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    indices: Vec<usize>,
    multiplicity: u64,
}

impl MultiIndex {
    /// Sorts `raw` and checks every entry against `dim`.
    pub fn new(raw: &[usize], dim: usize) -> Result<Self> {
        if raw.is_empty() || raw.len() > MAX_ORDER {
            return domain(format!(
                "multi-index length {} outside 1..={MAX_ORDER}",
                raw.len()
            ));
        }
        if let Some((pos, &i)) = raw.iter().enumerate().find(|(_, &i)| i >= dim) {
            return domain(format!(
                "index {i} at position {pos} out of range for dimension {dim}"
            ));
        }
        let mut indices = raw.to_vec();
        indices.sort_unstable();
        let multiplicity = multiplicity_of_sorted(&indices);
        Ok(Self {
            indices,
            multiplicity,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    pub fn multiplicity(&self) -> u64 {
        self.multiplicity
    }

    /// Variance of the matching entry of a GOE tensor: `1 / multiplicity`.
    pub fn variance(&self) -> f64 {
        1.0 / self.multiplicity as f64
    }

    pub fn rank(&self) -> usize {
        colex_rank(&self.indices)
    }

    /// Number of distinct index values.
    pub fn distinct(&self) -> usize {
        1 + self.indices.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// Sorts a raw index and returns it with its colexicographic storage position.
pub fn canonical_index(raw: &[usize], dim: usize) -> Result<(MultiIndex, usize)> {
    let idx = MultiIndex::new(raw, dim)?;
    let rank = idx.rank();
    Ok((idx, rank))
}

/// Visits every non-decreasing tuple of length `order` over `0..dim` in
/// colexicographic order, passing the storage rank and the tuple.
pub fn for_each_canonical(order: usize, dim: usize, mut f: impl FnMut(usize, &[usize])) {
    assert!(order <= MAX_ORDER);
    if dim == 0 {
        return;
    }
    let mut idx = [0usize; MAX_ORDER];
    let mut rank = 0usize;
    loop {
        f(rank, &idx[..order]);
        rank += 1;
        let mut k = 0;
        loop {
            if k == order {
                return;
            }
            let limit = if k + 1 < order { idx[k + 1] } else { dim - 1 };
            if idx[k] < limit {
                idx[k] += 1;
                for slot in idx.iter_mut().take(k) {
                    *slot = 0;
                }
                break;
            }
            k += 1;
        }
    }
}

fn check_unit(x: &[f64]) -> Result<()> {
    let norm = crate::linalg::norm(x);
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return domain(format!("vector must have unit norm, got ‖x‖ = {norm:.15}"));
    }
    Ok(())
}

/// Symmetric tensor with one stored value per permutation orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTensor {
    order: usize,
    dim: usize,
    data: Vec<f64>,
}

/// Result of a `p`-fold contraction, typed by the order of what remains.
#[derive(Debug, Clone, PartialEq)]
pub enum Contracted {
    Tensor(SymmetricTensor),
    Matrix(ContractionMatrix),
    Vector(Vec<f64>),
    Scalar(f64),
}

impl SymmetricTensor {
    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return domain(format!("tensor order {order} outside 1..={MAX_ORDER}"));
        }
        if dim == 0 {
            return domain("tensor dimension must be positive");
        }
        Ok(Self {
            order,
            dim,
            data: vec![0.0; num_canonical(order, dim)],
        })
    }

    /// Builds a tensor from values listed in canonical colexicographic order.
    pub fn from_canonical(order: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        let mut t = Self::zeros(order, dim)?;
        if data.len() != t.data.len() {
            return domain(format!(
                "expected {} canonical entries, got {}",
                t.data.len(),
                data.len()
            ));
        }
        t.data = data;
        Ok(t)
    }

    /// Builds a tensor by evaluating `f` on every sorted multi-index.
    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Self::zeros(order, dim)?;
        let data = &mut t.data;
        for_each_canonical(order, dim, |rank, idx| data[rank] = f(idx));
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Canonical values in colexicographic order.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Reads entry `raw` in any index order.
    pub fn get(&self, raw: &[usize]) -> Result<f64> {
        self.check_raw(raw)?;
        let mut buf = [0usize; MAX_ORDER];
        buf[..raw.len()].copy_from_slice(raw);
        buf[..raw.len()].sort_unstable();
        Ok(self.data[colex_rank(&buf[..raw.len()])])
    }

    /// Writes the orbit containing `raw`.
    pub fn set(&mut self, raw: &[usize], value: f64) -> Result<()> {
        let (_, rank) = self.checked_rank(raw)?;
        self.data[rank] = value;
        Ok(())
    }

    /// Adds `delta` to the orbit containing `raw` (every permutation at once).
    pub fn add_to(&mut self, raw: &[usize], delta: f64) -> Result<()> {
        let (_, rank) = self.checked_rank(raw)?;
        self.data[rank] += delta;
        Ok(())
    }

    fn checked_rank(&self, raw: &[usize]) -> Result<(MultiIndex, usize)> {
        self.check_raw(raw)?;
        canonical_index(raw, self.dim)
    }

    fn check_raw(&self, raw: &[usize]) -> Result<()> {
        if raw.len() != self.order {
            return domain(format!(
                "index of length {} for a tensor of order {}",
                raw.len(),
                self.order
            ));
        }
        if let Some((pos, &i)) = raw.iter().enumerate().find(|(_, &i)| i >= self.dim) {
            return domain(format!(
                "index {i} at position {pos} out of range for dimension {}",
                self.dim
            ));
        }
        Ok(())
    }

    /// Iterates `(sorted index, value)` pairs in storage order.
    pub fn for_each_entry(&self, mut f: impl FnMut(&[usize], f64)) {
        let data = &self.data;
        for_each_canonical(self.order, self.dim, |rank, idx| f(idx, data[rank]));
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            order: self.order,
            dim: self.dim,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            order: self.order,
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.order != other.order || self.dim != other.dim {
            return domain(format!(
                "shape mismatch: order {} dim {} vs order {} dim {}",
                self.order, self.dim, other.order, other.dim
            ));
        }
        Ok(())
    }

    fn check_vector(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return domain(format!(
                "vector of length {} for a tensor of dimension {}",
                v.len(),
                self.dim
            ));
        }
        Ok(())
    }

    /// Contracts `p` modes against `v`, returning an order-`d - p` object.
    ///
    /// Each canonical entry distributes its value over the distinct ways its
    /// index multiset splits into a contracted part (weighted by the number
    /// of arrangements of that part) and a free part.
    pub fn contract(&self, v: &[f64], p: usize) -> Result<Contracted> {
        self.check_vector(v)?;
        if p == 0 || p > self.order {
            return domain(format!(
                "contraction count {p} outside 1..={} for order {}",
                self.order, self.order
            ));
        }
        let rest = self.order - p;
        let out = self.contract_generic(v, p);
        Ok(match rest {
            0 => Contracted::Scalar(out[0]),
            1 => Contracted::Vector(out),
            2 => Contracted::Matrix(ContractionMatrix {
                matrix: SymMatrix::from_packed_colex(self.dim, &out),
                source: v.to_vec(),
            }),
            _ => Contracted::Tensor(SymmetricTensor::from_canonical(rest, self.dim, out)?),
        })
    }

    fn contract_generic(&self, v: &[f64], p: usize) -> Vec<f64> {
        let rest = self.order - p;
        let mut out = vec![0.0; num_canonical(rest, self.dim)];
        let data = &self.data;
        for_each_canonical(self.order, self.dim, |rank, idx| {
            let y = data[rank];
            if y == 0.0 {
                return;
            }
            let mut vals = [0usize; MAX_ORDER];
            let mut counts = [0usize; MAX_ORDER];
            let mut runs = 0;
            for &i in idx {
                if runs > 0 && vals[runs - 1] == i {
                    counts[runs - 1] += 1;
                } else {
                    vals[runs] = i;
                    counts[runs] = 1;
                    runs += 1;
                }
            }
            let mut kept = [0usize; MAX_ORDER];
            distribute(
                &vals[..runs],
                &counts[..runs],
                &mut kept[..runs],
                0,
                rest,
                &mut |kept| {
                    let mut coef = FACTORIAL[p] as f64;
                    let mut free = [0usize; MAX_ORDER];
                    let mut n_free = 0;
                    for t in 0..runs {
                        let removed = counts[t] - kept[t];
                        coef /= FACTORIAL[removed] as f64;
                        coef *= v[vals[t]].powi(removed as i32);
                        for _ in 0..kept[t] {
                            free[n_free] = vals[t];
                            n_free += 1;
                        }
                    }
                    out[colex_rank(&free[..n_free])] += y * coef;
                },
            );
        });
        out
    }

    /// Contracts a single mode: `(Y·v)_J = Σ_i Y[J ∪ {i}] v_i`.
    ///
    /// Repeated application reproduces [`SymmetricTensor::contract`] one
    /// vector at a time, without any multiplicity weights.
    pub fn contract_once(&self, v: &[f64]) -> Result<Contracted> {
        self.check_vector(v)?;
        let rest = self.order - 1;
        let mut out = vec![0.0; num_canonical(rest, self.dim)];
        let data = &self.data;
        for_each_canonical(self.order, self.dim, |rank, idx| {
            let y = data[rank];
            let mut reduced = [0usize; MAX_ORDER];
            for (pos, &a) in idx.iter().enumerate() {
                if pos > 0 && idx[pos - 1] == a {
                    continue;
                }
                let mut n = 0;
                for (q, &b) in idx.iter().enumerate() {
                    if q != pos {
                        reduced[n] = b;
                        n += 1;
                    }
                }
                out[colex_rank(&reduced[..n])] += y * v[a];
            }
        });
        Ok(match rest {
            0 => Contracted::Scalar(out[0]),
            1 => Contracted::Vector(out),
            2 => Contracted::Matrix(ContractionMatrix {
                matrix: SymMatrix::from_packed_colex(self.dim, &out),
                source: v.to_vec(),
            }),
            _ => Contracted::Tensor(SymmetricTensor::from_canonical(rest, self.dim, out)?),
        })
    }

    /// `Y·v^{d-1}`, the gradient direction used by power iteration.
    pub fn contract_to_vector(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_vector(v)?;
        if self.order < 2 {
            return domain("vector contraction needs order >= 2");
        }
        if self.order == 3 {
            return Ok(self.order3_vector(v));
        }
        Ok(self.contract_generic(v, self.order - 1))
    }

    /// `Y·v^{d-2}` as a dense symmetric matrix.
    pub fn contract_to_matrix(&self, v: &[f64]) -> Result<ContractionMatrix> {
        self.check_vector(v)?;
        if self.order < 3 {
            return domain("matrix contraction needs order >= 3");
        }
        let matrix = if self.order == 3 {
            self.order3_matrix(v)
        } else {
            SymMatrix::from_packed_colex(self.dim, &self.contract_generic(v, self.order - 2))
        };
        Ok(ContractionMatrix {
            matrix,
            source: v.to_vec(),
        })
    }

    /// `Y·v^d`.
    pub fn contract_to_scalar(&self, v: &[f64]) -> Result<f64> {
        let g = self.contract_to_vector(v)?;
        Ok(crate::linalg::dot(&g, v))
    }

    fn order3_vector(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut g = vec![0.0; n];
        let mut p = 0;
        for k in 0..n {
            let vk = v[k];
            for j in 0..=k {
                let vj = v[j];
                let mut gj = 0.0;
                let mut gk = 0.0;
                let vjk2 = 2.0 * vj * vk;
                // i < j
                if j < k {
                    for i in 0..j {
                        let y = self.data[p + i];
                        let vi = v[i];
                        g[i] += y * vjk2;
                        gj += 2.0 * y * vi;
                        gk += 2.0 * y * vi;
                    }
                    gj *= vk;
                    gk *= vj;
                    // i == j < k
                    let y = self.data[p + j];
                    gj += 2.0 * y * vj * vk;
                    gk += y * vj * vj;
                    g[j] += gj;
                    g[k] += gk;
                } else {
                    // i < j == k
                    for i in 0..j {
                        let y = self.data[p + i];
                        let vi = v[i];
                        g[i] += y * vj * vj;
                        gj += 2.0 * y * vi;
                    }
                    gj *= vj;
                    let y = self.data[p + j];
                    gj += y * vj * vj;
                    g[j] += gj;
                }
                p += j + 1;
            }
        }
        g
    }

    fn order3_matrix(&self, v: &[f64]) -> SymMatrix {
        let n = self.dim;
        let mut m = SymMatrix::zeros(n);
        let mut p = 0;
        for k in 0..n {
            let vk = v[k];
            for j in 0..=k {
                let vj = v[j];
                if j < k {
                    let mut cjk = 0.0;
                    for i in 0..j {
                        let y = self.data[p + i];
                        *m.at_mut(i, j) += y * vk;
                        *m.at_mut(i, k) += y * vj;
                        cjk += y * v[i];
                    }
                    let y = self.data[p + j];
                    *m.at_mut(j, j) += y * vk;
                    cjk += y * vj;
                    *m.at_mut(j, k) += cjk;
                } else {
                    for i in 0..j {
                        let y = self.data[p + i];
                        *m.at_mut(i, j) += y * vj;
                        *m.at_mut(j, j) += y * v[i];
                    }
                    *m.at_mut(j, j) += self.data[p + j] * vj;
                }
                p += j + 1;
            }
        }
        m.mirror_upper();
        m
    }

    /// Euclidean inner product over the full index hypercube.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        let mut acc = 0.0;
        let (a, b) = (&self.data, &other.data);
        for_each_canonical(self.order, self.dim, |rank, idx| {
            acc += multiplicity_of_sorted(idx) as f64 * a[rank] * b[rank];
        });
        Ok(acc)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).map(f64::sqrt).unwrap_or(0.0)
    }
}

// Enumerates every `kept` with `0 <= kept[t] <= counts[t]` summing to `remaining`.
fn distribute(
    vals: &[usize],
    counts: &[usize],
    kept: &mut [usize],
    t: usize,
    remaining: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if t == vals.len() {
        if remaining == 0 {
            f(kept);
        }
        return;
    }
    let tail: usize = counts[t + 1..].iter().sum();
    let lo = remaining.saturating_sub(tail);
    for k in lo..=counts[t].min(remaining) {
        kept[t] = k;
        distribute(vals, counts, kept, t + 1, remaining - k, f);
    }
    kept[t] = 0;
}

/// `scale · x^{⊗order}` for a unit vector `x`.
pub fn rank_one(scale: f64, x: &[f64], order: usize) -> Result<SymmetricTensor> {
    if order < 2 {
        return domain(format!("rank-one tensor order must be >= 2, got {order}"));
    }
    check_unit(x)?;
    SymmetricTensor::from_fn(order, x.len(), |idx| {
        scale * idx.iter().map(|&i| x[i]).product::<f64>()
    })
}

/// The matrix `Y·v^{d-2}` together with the vector that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionMatrix {
    pub matrix: SymMatrix,
    pub source: Vec<f64>,
}

impl ContractionMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}
