//! Horizon forecasting, sampling, lookahead models and parameter fitting.

mod fit;
mod lookahead;
mod sample;

use serde::{Deserialize, Serialize};

pub use fit::{fit, score, FitReport, DEFAULT_SCORE_FLOOR};
pub use lookahead::{lookahead_advance, lookahead_build, FrontierEntry, LookaheadFrontier, PoisonCause};
pub use sample::{derive_seed, sample_event, sample_observation};

use crate::error::{Error, Result};
use crate::hmm::{Hmm, HmmContinuous, DUMMY_STATE};
use crate::signal::Signal;
use crate::state::EventId;

/// `f_j = α·T^j·ℰ` for `j = 1..=h`, each step kept as its non-zero support in
/// event slot order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub horizon: usize,
    pub steps: Vec<Vec<(EventId, f64)>>,
    pub is_dummy: bool,
}

impl Forecast {
    /// `f_j(event)` for `1 ≤ j ≤ horizon`.
    pub fn prob(&self, j: usize, event: &EventId) -> f64 {
        self.steps[j - 1]
            .iter()
            .find(|(e, _)| e == event)
            .map_or(0.0, |(_, p)| *p)
    }

    /// The forecast made when no forecast is possible.
    pub fn dummy(horizon: usize) -> Self {
        Self {
            horizon,
            steps: vec![vec![(EventId::Dummy, 1.0)]; horizon],
            is_dummy: horizon > 0,
        }
    }
}

/// Dense event distributions `f_1 ..= f_h`, indexed by event slot.
pub fn forecast_slots(hmm: &Hmm, h: usize) -> Vec<Vec<f64>> {
    let mut v = hmm.initial();
    let mut out = Vec::with_capacity(h);
    for _ in 0..h {
        v = hmm.propagate(&v);
        out.push(hmm.emit(&v));
    }
    out
}

/// Forecast for horizon `h` from the model's current state.
pub fn forecast(hmm: &Hmm, h: usize) -> Forecast {
    let steps: Vec<Vec<(EventId, f64)>> = forecast_slots(hmm, h)
        .into_iter()
        .map(|dist| {
            dist.into_iter()
                .enumerate()
                .filter(|(_, p)| *p > 0.0)
                .map(|(e, p)| (hmm.event(e), p))
                .collect()
        })
        .collect();
    let is_dummy = h > 0 && steps.iter().all(|s| s.len() == 1 && s[0] == (EventId::Dummy, 1.0));
    Forecast {
        horizon: h,
        steps,
        is_dummy,
    }
}

/// Forecast density `Σ_q (α·T^j)(q) · ℰ(q, x)` at observation `x`, `j ≥ 1`.
/// The dummy state contributes nothing at any observation.
pub fn forecast_density_at(model: &HmmContinuous, signal: &Signal, j: usize, x: &[f64]) -> Result<f64> {
    if x.len() != model.kernel().dim() {
        return Err(Error::DimensionMismatch {
            expected: model.kernel().dim(),
            got: x.len(),
        });
    }
    if j == 0 {
        return Err(Error::RejectedInput("forecast step must be at least 1".into()));
    }
    let v = model.state_distribution(j);
    Ok(v.iter()
        .enumerate()
        .filter(|(q, w)| *q != DUMMY_STATE && **w > 0.0)
        .map(|(q, w)| w * model.density(q, signal, x))
        .sum())
}

/// Mass of `α·T^j` on real (non-dummy) states.
pub fn real_mass(model: &HmmContinuous, j: usize) -> f64 {
    let v = model.state_distribution(j);
    v.iter()
        .enumerate()
        .filter(|(q, _)| *q != DUMMY_STATE)
        .map(|(_, w)| w)
        .sum()
}

/// Expected observation `j` steps ahead conditioned on a real state, or `None`
/// if all mass sits on the dummy state.
pub fn forecast_mean(model: &HmmContinuous, signal: &Signal, j: usize) -> Option<Vec<f64>> {
    let v = model.state_distribution(j);
    let mut mean = vec![0.0; signal.dim()];
    let mut mass = 0.0;
    for (q, &w) in v.iter().enumerate() {
        let centers = model.mixture(q);
        if q == DUMMY_STATE || w == 0.0 || centers.is_empty() {
            continue;
        }
        mass += w;
        let share = w / centers.len() as f64;
        for &c in centers {
            for (m, x) in mean.iter_mut().zip(signal.get(c as usize)) {
                *m += share * x;
            }
        }
    }
    (mass > 0.0).then(|| mean.into_iter().map(|m| m / mass).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::Hmm;
    use crate::isa::Isa;
    use crate::plugins::{EmaClassifier, GridWidth, Kernel, PluginParams, StatFunction};
    use crate::state::CellId;
    use approx::assert_relative_eq;

    fn ev(k: i64) -> EventId {
        EventId::Cluster(CellId::new(&[k]))
    }

    fn model(values: &[f64]) -> Hmm {
        let s = Signal::from_scalars(values).unwrap();
        let isa = Isa::build(&s, &mut EmaClassifier::new(&PluginParams::default())).unwrap();
        let f = StatFunction::count();
        Hmm::from_isa(&isa, &s, &f, &f, &GridWidth::Uniform(1.0)).unwrap()
    }

    #[test]
    fn worked_example_two_steps() {
        let fc = forecast(&model(&[1.0, 1.0, 5.0, 1.0, 5.0]), 2);
        assert!(!fc.is_dummy);
        assert_eq!(fc.steps[0], vec![(ev(1), 1.0)]);
        assert_eq!(fc.prob(2, &ev(1)), 1.0 / 3.0);
        assert_eq!(fc.prob(2, &ev(5)), 2.0 / 3.0);
        assert_eq!(fc.prob(2, &EventId::Dummy), 0.0);
    }

    #[test]
    fn new_state_gives_dummy_forecast() {
        let fc = forecast(&model(&[1.0, 1.0, 5.0]), 3);
        assert!(fc.is_dummy);
        assert_eq!(fc, Forecast::dummy(3));
    }

    #[test]
    fn zero_horizon_is_empty() {
        let fc = forecast(&model(&[1.0, 1.0, 5.0]), 0);
        assert!(fc.steps.is_empty());
        assert!(!fc.is_dummy);
    }

    #[test]
    fn alternating_signal_is_deterministic() {
        let fc = forecast(&model(&[1.0, 5.0, 1.0, 5.0, 1.0, 5.0]), 1);
        assert_eq!(fc.steps[0], vec![(ev(1), 1.0)]);
        let fc = forecast(&model(&[1.0, 5.0, 1.0, 5.0, 1.0]), 2);
        assert_eq!(fc.steps[0], vec![(ev(5), 1.0)]);
        assert_eq!(fc.steps[1], vec![(ev(1), 1.0)]);
    }

    #[test]
    fn continuous_density_on_worked_example() {
        let s = Signal::from_scalars(&[1.0, 1.0, 5.0, 1.0, 5.0]).unwrap();
        let isa = Isa::build(&s, &mut EmaClassifier::new(&PluginParams::default())).unwrap();
        let k = Kernel::new(&[vec![1.0]]).unwrap();
        let m = HmmContinuous::from_isa(&isa, &s, &StatFunction::count(), k).unwrap();
        assert_relative_eq!(
            forecast_density_at(&m, &s, 1, &[1.0]).unwrap(),
            0.398_942_280_401_432_7,
            max_relative = 1e-12
        );
        assert!(forecast_density_at(&m, &s, 1, &[1.0, 2.0]).is_err());
        assert_eq!(forecast_mean(&m, &s, 1), Some(vec![1.0]));
        assert_relative_eq!(real_mass(&m, 3), 1.0, max_relative = 1e-12);

        let s2 = Signal::from_scalars(&[1.0, 1.0, 5.0]).unwrap();
        let isa2 = Isa::build(&s2, &mut EmaClassifier::new(&PluginParams::default())).unwrap();
        let m2 =
            HmmContinuous::from_isa(&isa2, &s2, &StatFunction::count(), Kernel::new(&[vec![1.0]]).unwrap()).unwrap();
        for x in [-3.0, 1.0, 5.0, 9.0] {
            assert_eq!(forecast_density_at(&m2, &s2, 1, &[x]).unwrap(), 0.0);
        }
        assert_eq!(forecast_mean(&m2, &s2, 1), None);
    }
}
