//! Gaussian orthogonal tensor ensemble and the spiked rank-one model.
//!
//! Every sampler draws from a ChaCha8 stream selected by a [`SeedSpec`]:
//! the master seed keys the generator and the stream id picks one of its
//! 2^64 independent streams. Entries are drawn in canonical storage order,
//! so a sample depends only on `(master_seed, stream_id)` and never on how
//! trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};
use crate::linalg::{norm, SymMatrix};
use crate::tensor::{for_each_canonical, multiplicity_of_sorted, SymmetricTensor, MAX_ORDER};

/// Environment variable consulted for the master seed when no flag is given.
pub const SEED_ENV: &str = "STL_SEED";

const NOISE_TAG: u64 = 0x006e_6f69_7365;
const SPIKE_TAG: u64 = 0x0073_7069_6b65;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Selects one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// A stream derived from this one, disjoint for distinct tags.
    pub fn child(&self, tag: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(tag)),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn check_order_dim(d: usize, n: usize) -> Result<()> {
    if !(3..=MAX_ORDER).contains(&d) {
        return domain(format!("tensor order must lie in 3..={MAX_ORDER}, got {d}"));
    }
    if n < 2 {
        return domain(format!("dimension must be at least 2, got {n}"));
    }
    Ok(())
}

/// Samples `W` with independent canonical entries of variance `1/multiplicity`.
pub fn sample_goe_tensor(d: usize, n: usize, seed: SeedSpec) -> Result<SymmetricTensor> {
    check_order_dim(d, n)?;
    let mut rng = seed.rng();
    let mut t = SymmetricTensor::zeros(d, n)?;
    let data = t.values_mut();
    for_each_canonical(d, n, |rank, idx| {
        let z: f64 = StandardNormal.sample(&mut rng);
        data[rank] = z / (multiplicity_of_sorted(idx) as f64).sqrt();
    });
    Ok(t)
}

/// Uniform point on the unit sphere of `R^n`.
pub fn sample_unit_vector(n: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    if n < 2 {
        return domain(format!("dimension must be at least 2, got {n}"));
    }
    let mut rng = seed.rng();
    loop {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = norm(&g);
        if r > 0.0 {
            return Ok(g.into_iter().map(|v| v / r).collect());
        }
    }
}

/// `Y = λ x^{⊗d} + W / √N` with its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedModel {
    lambda: f64,
    x: Vec<f64>,
    noise: SymmetricTensor,
    observation: SymmetricTensor,
}

impl SpikedModel {
    /// Assembles the observation from a given spike and noise tensor.
    pub fn assemble(lambda: f64, x: Vec<f64>, noise: SymmetricTensor) -> Result<Self> {
        if !(lambda >= 0.0) {
            return domain(format!("signal strength must be >= 0, got {lambda}"));
        }
        if x.len() != noise.dim() {
            return domain(format!(
                "spike of length {} for noise of dimension {}",
                x.len(),
                noise.dim()
            ));
        }
        let r = norm(&x);
        if (r - 1.0).abs() > crate::tensor::UNIT_NORM_TOL {
            return domain(format!("spike must have unit norm, got ‖x‖ = {r:.15}"));
        }
        let inv_sqrt_n = 1.0 / (noise.dim() as f64).sqrt();
        let w = noise.values();
        let observation = SymmetricTensor::from_fn(noise.order(), noise.dim(), |idx| {
            let rank = crate::tensor::colex_rank(idx);
            lambda * idx.iter().map(|&i| x[i]).product::<f64>() + w[rank] * inv_sqrt_n
        })?;
        Ok(Self {
            lambda,
            x,
            noise,
            observation,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn spike(&self) -> &[f64] {
        &self.x
    }

    pub fn noise(&self) -> &SymmetricTensor {
        &self.noise
    }

    pub fn observation(&self) -> &SymmetricTensor {
        &self.observation
    }

    pub fn order(&self) -> usize {
        self.observation.order()
    }

    pub fn dim(&self) -> usize {
        self.observation.dim()
    }

    pub fn into_observation(self) -> SymmetricTensor {
        self.observation
    }
}

/// Samples a spiked model. Noise and spike use disjoint child streams of `seed`.
pub fn sample_spiked_model(
    lambda: f64,
    d: usize,
    n: usize,
    seed: SeedSpec,
    x: Option<Vec<f64>>,
) -> Result<SpikedModel> {
    check_order_dim(d, n)?;
    let x = match x {
        Some(x) => x,
        None => sample_unit_vector(n, seed.child(SPIKE_TAG))?,
    };
    let noise = sample_goe_tensor(d, n, seed.child(NOISE_TAG))?;
    SpikedModel::assemble(lambda, x, noise)
}

/// Largest dimension accepted by [`multilinear_transform`].
pub const MULTILINEAR_MAX_DIM: usize = 8;

/// `(W·U^d)_{i_1…i_d} = Σ_j W_{j_1…j_d} U_{j_1 i_1} ⋯ U_{j_d i_d}`.
///
/// Costs `O(N^{2d})`; only meant for small invariance checks.
pub fn multilinear_transform(t: &SymmetricTensor, u: &SymMatrix) -> Result<SymmetricTensor> {
    let (d, n) = (t.order(), t.dim());
    if u.dim() != n {
        return domain(format!("transform of size {} for dimension {n}", u.dim()));
    }
    if n > MULTILINEAR_MAX_DIM {
        return domain(format!(
            "multilinear transform limited to N <= {MULTILINEAR_MAX_DIM}, got {n}"
        ));
    }
    let total = n.pow(d as u32);
    SymmetricTensor::from_fn(d, n, |out| {
        let mut acc = 0.0;
        let mut j = [0usize; MAX_ORDER];
        for flat in 0..total {
            let mut rest = flat;
            for slot in j.iter_mut().take(d) {
                *slot = rest % n;
                rest /= n;
            }
            let w = t.get(&j[..d]).expect("index in range");
            let mut prod = w;
            for k in 0..d {
                prod *= u.at(j[k], out[k]);
            }
            acc += prod;
        }
        acc
    })
}
