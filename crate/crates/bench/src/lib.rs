//! Shared inputs for the criterion benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigauto_core::{Pipeline, PluginParams, Signal};

/// Uniform-step random walk in `d` dimensions.
pub fn random_walk(n: usize, d: usize, seed: u64) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; d];
    let mut s = Signal::new(d);
    for _ in 0..n {
        s.push(&x).expect("finite");
        for v in &mut x {
            *v += rng.random_range(-1.0..1.0);
        }
    }
    s
}

/// A discrete pipeline that has already consumed the first `n` observations.
pub fn warm_pipeline(params: &PluginParams, signal: &Signal, n: usize) -> Pipeline {
    let mut p = Pipeline::discrete(params.clone(), signal.dim()).expect("valid parameters");
    for r in signal.iter().take(n) {
        p.push(r).expect("valid observation");
    }
    p
}
