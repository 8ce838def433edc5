//! Seeded randomness helpers.
//!
//! One ChaCha stream per run, consumed in deterministic event order, is the
//! whole reproducibility story: ChaCha output is specified independently of
//! platform, and every distribution below is derived from it with portable
//! arithmetic (`libm` only, no platform `libm` calls through `std`).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// The simulator's random stream. ChaCha8 keeps the stream portable and
/// cheap; the statistical quality is far beyond what the model needs.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer. Bijective on `u64`, good avalanche.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for replication `rep` of a batch started from `base_seed`.
///
/// A pure function of the pair, so replications are independent of the order
/// (or parallelism) in which they execute: `mix64(base ^ mix64(rep + 1))`.
pub fn replication_seed(base_seed: u64, rep: u32) -> u64 {
    mix64(base_seed ^ mix64(rep as u64 + 1))
}

/// Exponentially distributed waiting time with the given rate (events per
/// unit time). Returns `None` when the rate is zero (the event never fires).
pub fn exp_waiting_time(rate: f64, rng: &mut SimRng) -> Option<f64> {
    if rate <= 0.0 {
        return None;
    }
    let u: f64 = rng.gen(); // [0, 1)
    Some(-libm::log(1.0 - u) / rate)
}

const POISSON_CHUNK: f64 = 500.0;

/// Poisson-distributed count with mean `lambda`, by Knuth's product method.
///
/// The product method consumes ~`lambda + 1` uniforms; `lambda` is chunked so
/// `exp(-lambda)` never underflows for large means.
pub fn poisson(mut lambda: f64, rng: &mut SimRng) -> u64 {
    debug_assert!(lambda >= 0.0);
    let mut total = 0u64;
    while lambda > POISSON_CHUNK {
        total += knuth_with_floor(libm::exp(-POISSON_CHUNK), rng);
        lambda -= POISSON_CHUNK;
    }
    if lambda <= 0.0 {
        return total;
    }
    total + knuth_with_floor(libm::exp(-lambda), rng)
}

/// Repeated Poisson draws at a fixed mean, with `exp(-lambda)` computed
/// once. Consumes the same uniform stream positions as [`poisson`].
#[derive(Debug, Clone, Copy)]
pub struct PoissonSampler {
    lambda: f64,
    floor: f64,
}

impl PoissonSampler {
    pub fn new(lambda: f64) -> Self {
        debug_assert!(lambda >= 0.0);
        PoissonSampler {
            lambda,
            floor: libm::exp(-lambda.min(POISSON_CHUNK)),
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> u64 {
        if self.lambda <= 0.0 {
            0
        } else if self.lambda <= POISSON_CHUNK {
            knuth_with_floor(self.floor, rng)
        } else {
            poisson(self.lambda, rng)
        }
    }
}

fn knuth_with_floor(floor: f64, rng: &mut SimRng) -> u64 {
    let mut count = 0u64;
    let mut product: f64 = rng.gen();
    while product > floor {
        count += 1;
        product *= rng.gen::<f64>();
    }
    count
}

/// Index drawn with probability proportional to `weights[i]`.
///
/// Weights must be non-negative with a positive sum (validated at config
/// time); a single uniform is consumed per draw.
pub fn weighted_index(weights: &[f64], rng: &mut SimRng) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0);
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}
