//! Timing harness for the update and build paths.
//!
//! Update cost is measured in batches while one pipeline streams a synthetic
//! random walk past each checkpoint size; build cost is measured by rebuilding
//! from scratch on prefixes. The first sample of every point is a discarded
//! warm-up.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sigauto_core::{build_isa, isa_to_hmm, EmaClassifier, Pipeline, PluginParams, Signal};

use crate::error::{CliError, CliResult};

pub const MIN_SAMPLES: usize = 30;
pub const MAX_CONSTANCY_RATIO: f64 = 3.0;
pub const SLOPE_RANGE: (f64, f64) = (0.8, 1.2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSizes {
    pub update: Vec<usize>,
    pub build: Vec<usize>,
    pub samples: usize,
    /// Observations per update sample.
    pub batch: usize,
}

impl Default for BenchSizes {
    fn default() -> Self {
        Self {
            update: vec![2_000, 20_000, 200_000],
            build: vec![1_000, 10_000, 100_000],
            samples: 61,
            batch: 16,
        }
    }
}

impl BenchSizes {
    pub fn validate(&self) -> CliResult<()> {
        if self.samples < MIN_SAMPLES {
            return Err(CliError::Config(format!("bench needs at least {MIN_SAMPLES} samples")));
        }
        let increasing = |v: &[usize]| v.len() >= 2 && v.windows(2).all(|w| w[0] < w[1]) && v[0] > 0;
        if !increasing(&self.update) || !increasing(&self.build) || self.batch == 0 {
            return Err(CliError::Config(
                "bench sizes must be at least two increasing positive values".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub n: usize,
    pub samples: usize,
    pub median_ns: f64,
    pub p99_ns: f64,
}

impl Timing {
    fn from_samples(n: usize, mut ns: Vec<f64>) -> Self {
        ns.sort_by(f64::total_cmp);
        let at = |q: f64| ns[((ns.len() - 1) as f64 * q).round() as usize];
        Self {
            n,
            samples: ns.len(),
            median_ns: at(0.5),
            p99_ns: at(0.99),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    /// Per-observation time of classifier step + automaton + model update.
    pub update: Vec<Timing>,
    pub build_isa: Vec<Timing>,
    pub build_hmm: Vec<Timing>,
    pub isa_slope: f64,
    pub hmm_slope: f64,
    pub constancy_ratio: f64,
}

impl BenchReport {
    /// Every violated bound, as text.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.constancy_ratio > MAX_CONSTANCY_RATIO {
            out.push(format!(
                "update constancy ratio {:.3} > {MAX_CONSTANCY_RATIO}",
                self.constancy_ratio
            ));
        }
        for (name, slope) in [("build_isa", self.isa_slope), ("isa_to_hmm", self.hmm_slope)] {
            if !(SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&slope) {
                out.push(format!(
                    "{name} log-log slope {slope:.3} outside [{}, {}]",
                    SLOPE_RANGE.0, SLOPE_RANGE.1
                ));
            }
        }
        for t in self.update.iter().chain(&self.build_isa).chain(&self.build_hmm) {
            if t.samples < MIN_SAMPLES {
                out.push(format!("only {} samples at n = {}", t.samples, t.n));
            }
        }
        out
    }

    pub fn check(&self) -> CliResult<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Check(v.join("; ")))
        }
    }
}

/// Least-squares slope of `ln t` against `ln n`.
pub fn log_log_slope(points: &[Timing]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|t| (t.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|t| t.median_ns.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn random_walk(len: usize, seed: u64) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    let mut s = Signal::new(1);
    for _ in 0..len {
        s.push(&[x]).expect("finite");
        x += rng.random_range(-1.0..1.0);
    }
    s
}

fn params() -> PluginParams {
    PluginParams::default()
}

fn time_updates(sizes: &BenchSizes, seed: u64) -> Vec<Timing> {
    let per_point = (sizes.samples + 1) * sizes.batch;
    let last = *sizes.update.last().expect("validated");
    let signal = random_walk(last + per_point, seed);
    let mut pipe = Pipeline::discrete(params(), 1).expect("default parameters are valid");
    let mut fed = 0;
    let mut out = Vec::new();
    for &n in &sizes.update {
        while fed < n {
            pipe.push(signal.get(fed)).expect("valid observation");
            fed += 1;
        }
        let mut ns = Vec::with_capacity(sizes.samples);
        for s in 0..=sizes.samples {
            let start = Instant::now();
            for _ in 0..sizes.batch {
                pipe.push(signal.get(fed)).expect("valid observation");
                fed += 1;
            }
            let elapsed = start.elapsed().as_nanos() as f64 / sizes.batch as f64;
            if s > 0 {
                ns.push(elapsed);
            }
        }
        black_box(&pipe);
        out.push(Timing::from_samples(n, ns));
    }
    out
}

fn time_builds(sizes: &BenchSizes, seed: u64) -> (Vec<Timing>, Vec<Timing>) {
    let p = params();
    let sigma = p.stat();
    let signal = random_walk(*sizes.build.last().expect("validated"), seed);
    let mut isa_t = Vec::new();
    let mut hmm_t = Vec::new();
    for &n in &sizes.build {
        let prefix = signal.prefix(n - 1);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for s in 0..=sizes.samples {
            let start = Instant::now();
            let isa = build_isa(&prefix, &mut EmaClassifier::new(&p)).expect("valid signal");
            let mid = Instant::now();
            let hmm = isa_to_hmm(&isa, &prefix, &sigma, &sigma, &p.grid_width).expect("valid model");
            let end = Instant::now();
            black_box(hmm);
            if s > 0 {
                a.push((mid - start).as_nanos() as f64);
                b.push((end - mid).as_nanos() as f64);
            }
        }
        isa_t.push(Timing::from_samples(n, a));
        hmm_t.push(Timing::from_samples(n, b));
    }
    (isa_t, hmm_t)
}

pub fn run_bench(sizes: &BenchSizes, seed: u64) -> CliResult<BenchReport> {
    sizes.validate()?;
    let update = time_updates(sizes, seed);
    let (build_isa, build_hmm) = time_builds(sizes, seed);
    let constancy_ratio = update.last().expect("validated").median_ns / update[0].median_ns;
    Ok(BenchReport {
        isa_slope: log_log_slope(&build_isa),
        hmm_slope: log_log_slope(&build_hmm),
        update,
        build_isa,
        build_hmm,
        constancy_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timing(n: usize, median_ns: f64) -> Timing {
        Timing {
            n,
            samples: 30,
            median_ns,
            p99_ns: median_ns,
        }
    }

    #[test]
    fn slope_of_exact_power_laws() {
        let linear = [timing(10, 5.0), timing(100, 50.0), timing(1000, 500.0)];
        assert!((log_log_slope(&linear) - 1.0).abs() < 1e-12);
        let quad = [timing(10, 1.0), timing(100, 100.0)];
        assert!((log_log_slope(&quad) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn violated_bounds_fail_the_check() {
        let report = BenchReport {
            update: vec![timing(10, 1.0), timing(100, 4.0)],
            build_isa: vec![timing(10, 1.0), timing(100, 10.0)],
            build_hmm: vec![timing(10, 1.0), timing(100, 100.0)],
            isa_slope: 1.0,
            hmm_slope: 2.0,
            constancy_ratio: 4.0,
        };
        let v = report.violations();
        assert_eq!(v.len(), 2);
        assert!(matches!(report.check(), Err(CliError::Check(_))));
    }

    #[test]
    fn quantiles_and_sample_counts() {
        let t = Timing::from_samples(5, (1..=101).map(f64::from).rev().collect());
        assert_eq!((t.samples, t.median_ns, t.p99_ns), (101, 51.0, 100.0));
        assert!(BenchSizes {
            samples: 10,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
