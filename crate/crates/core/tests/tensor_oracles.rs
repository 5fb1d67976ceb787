use proptest::prelude::*;
use stl_core::tensor::{
    for_each_canonical, multiplicity_of_sorted, num_canonical, rank_one, Contracted,
    SymmetricTensor,
};

const TOL: f64 = 1e-12;

fn raw_indices(order: usize, dim: usize) -> Vec<Vec<usize>> {
    let total = dim.pow(order as u32);
    (0..total)
        .map(|mut flat| {
            (0..order)
                .map(|_| {
                    let i = flat % dim;
                    flat /= dim;
                    i
                })
                .collect()
        })
        .collect()
}

// (Y·v^p)_J by looping over every raw index of the contracted slots.
fn brute_contract(t: &SymmetricTensor, v: &[f64], p: usize, free: &[usize]) -> f64 {
    raw_indices(p, t.dim())
        .into_iter()
        .map(|head| {
            let w: f64 = head.iter().map(|&i| v[i]).product();
            let mut full = head.clone();
            full.extend_from_slice(free);
            t.get(&full).unwrap() * w
        })
        .sum()
}

fn brute_inner(a: &SymmetricTensor, b: &SymmetricTensor) -> f64 {
    raw_indices(a.order(), a.dim())
        .iter()
        .map(|r| a.get(r).unwrap() * b.get(r).unwrap())
        .sum()
}

fn tensor_strategy(order: usize) -> impl Strategy<Value = SymmetricTensor> {
    (1usize..=4).prop_flat_map(move |n| {
        prop::collection::vec(-2.0f64..2.0, num_canonical(order, n))
            .prop_map(move |data| SymmetricTensor::from_canonical(order, n, data).unwrap())
    })
}

fn with_vector(order: usize) -> impl Strategy<Value = (SymmetricTensor, Vec<f64>)> {
    tensor_strategy(order).prop_flat_map(|t| {
        let n = t.dim();
        (Just(t), prop::collection::vec(-1.5f64..1.5, n))
    })
}

fn read_contracted(c: &Contracted, free: &[usize]) -> f64 {
    match c {
        Contracted::Scalar(s) => *s,
        Contracted::Vector(g) => g[free[0]],
        Contracted::Matrix(m) => m.matrix.at(free[0], free[1]),
        Contracted::Tensor(t) => t.get(free).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_contraction_matches_the_full_loop((t, v) in with_vector(3)) {
        for p in 1..=3 {
            let c = t.contract(&v, p).unwrap();
            for free in raw_indices(3 - p, t.dim()) {
                let want = brute_contract(&t, &v, p, &free);
                let got = read_contracted(&c, &free);
                prop_assert!((got - want).abs() < TOL, "p={p} free={free:?}: {got} vs {want}");
            }
        }
        let g = t.contract_to_vector(&v).unwrap();
        let m = t.contract_to_matrix(&v).unwrap().matrix;
        for i in 0..t.dim() {
            prop_assert!((g[i] - brute_contract(&t, &v, 2, &[i])).abs() < TOL);
            for j in 0..t.dim() {
                prop_assert!((m.at(i, j) - brute_contract(&t, &v, 1, &[i, j])).abs() < TOL);
            }
        }
        let s = t.contract_to_scalar(&v).unwrap();
        prop_assert!((s - brute_contract(&t, &v, 3, &[])).abs() < TOL);
    }

    #[test]
    fn inner_products_match_the_full_loop(a in tensor_strategy(3), seed in any::<u64>()) {
        let n = a.dim();
        let mut s = seed;
        let b = SymmetricTensor::from_fn(3, n, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .unwrap();
        prop_assert!((a.inner(&b).unwrap() - brute_inner(&a, &b)).abs() < TOL);
        prop_assert!((a.frobenius_norm().powi(2) - brute_inner(&a, &a)).abs() < TOL);
    }

    #[test]
    fn reads_ignore_index_order(t in tensor_strategy(4), a in 0usize..4, b in 0usize..4, c in 0usize..4, e in 0usize..4) {
        let n = t.dim();
        let raw = [a % n, b % n, c % n, e % n];
        let x = t.get(&raw).unwrap();
        for perm in [[1, 0, 2, 3], [3, 2, 1, 0], [2, 3, 0, 1], [0, 3, 1, 2]] {
            let p: Vec<usize> = perm.iter().map(|&k| raw[k]).collect();
            prop_assert_eq!(t.get(&p).unwrap(), x);
        }
    }

    #[test]
    fn one_mode_at_a_time_equals_single_shot((t, v) in with_vector(4)) {
        let mut cur = Contracted::Tensor(t.clone());
        for p in 1..=4 {
            cur = match cur {
                Contracted::Tensor(s) => s.contract_once(&v).unwrap(),
                Contracted::Matrix(m) => Contracted::Vector(m.matrix.matvec(&v)),
                Contracted::Vector(g) => Contracted::Scalar(g.iter().zip(&v).map(|(a, b)| a * b).sum()),
                Contracted::Scalar(_) => unreachable!(),
            };
            let shot = t.contract(&v, p).unwrap();
            for free in raw_indices(4 - p, t.dim()) {
                let (a, b) = (read_contracted(&cur, &free), read_contracted(&shot, &free));
                prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "p={p} {free:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn multiplicities_partition_the_hypercube() {
    for order in 3..=6 {
        for n in 1..=6 {
            let mut total = 0u64;
            let mut count = 0;
            for_each_canonical(order, n, |_, idx| {
                total += multiplicity_of_sorted(idx);
                count += 1;
            });
            assert_eq!(total, (n as u64).pow(order as u32));
            assert_eq!(count, num_canonical(order, n));
        }
    }
}

#[test]
fn rank_one_examples() {
    let t = rank_one(1.0, &[1.0, 0.0, 0.0], 3).unwrap();
    for r in raw_indices(3, 3) {
        let want = if r == [0, 0, 0] { 1.0 } else { 0.0 };
        assert_eq!(t.get(&r).unwrap(), want);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let t = rank_one(2.0, &[h, h], 3).unwrap();
    assert!((t.get(&[0, 0, 1]).unwrap() - h).abs() < 1e-15);
    let x = [0.6, 0.0, 0.8];
    let t = rank_one(2.5, &x, 5).unwrap();
    assert!((t.contract_to_scalar(&x).unwrap() - 2.5).abs() < TOL);
}
