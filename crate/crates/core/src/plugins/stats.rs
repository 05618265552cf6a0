//! Statistical functions over instant sets and their constant-time accumulators.

use serde::{Deserialize, Serialize};

use super::params::{Region, StatVariant};
use crate::error::{Error, Result};
use crate::signal::Signal;

/// A configured statistical function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatFunction {
    pub variant: StatVariant,
    pub delta: f64,
    pub region: Option<Region>,
}

impl Default for StatFunction {
    fn default() -> Self {
        Self {
            variant: StatVariant::Count,
            delta: 0.0,
            region: None,
        }
    }
}

impl StatFunction {
    pub fn count() -> Self {
        Self::default()
    }

    pub fn discounted(delta: f64) -> Self {
        Self {
            variant: StatVariant::DiscountedSum,
            delta,
            region: None,
        }
    }

    fn in_region(&self, x: &[f64]) -> bool {
        self.region.as_ref().is_none_or(|r| r.contains(x))
    }

    fn decays(&self) -> bool {
        matches!(
            self.variant,
            StatVariant::DiscountedSum | StatVariant::DiscountedPaperLiteral
        )
    }

    fn decay(&self, gap: u64) -> f64 {
        if gap == 0 {
            1.0
        } else {
            self.delta.powf(gap as f64)
        }
    }

    /// Two functions may share one model only if their common parameters agree.
    pub fn check_compatible(&self, other: &StatFunction) -> Result<()> {
        if self.delta != other.delta || self.region != other.region {
            return Err(Error::Config(
                "transition and emission statistics use different parameters".into(),
            ));
        }
        Ok(())
    }

    /// Evaluates the statistic on `instants` at the current instant `now`.
    pub fn eval(&self, signal: &Signal, instants: &[u64], now: u64) -> Result<f64> {
        if let Some(&i) = instants.iter().find(|&&i| i > now) {
            return Err(Error::TemporalOrder { instant: i, now });
        }
        let in_region = |i: &&u64| self.in_region(signal.get(**i as usize));
        Ok(match self.variant {
            StatVariant::Count => instants.len() as f64,
            StatVariant::DiscountedSum => instants.iter().map(|&i| self.decay(now - i)).sum(),
            StatVariant::DiscountedPaperLiteral => {
                instants.len() as f64 - instants.iter().map(|&i| self.decay(now - i)).sum::<f64>()
            }
            StatVariant::RegionCount => instants.iter().filter(in_region).count() as f64,
            StatVariant::LatestOccurrence => instants.iter().filter(in_region).max().map_or(0.0, |&i| i as f64),
        })
    }
}

/// Free-function form of [`StatFunction::eval`].
pub fn stat_eval(f: &StatFunction, signal: &Signal, instants: &[u64], now: u64) -> Result<f64> {
    f.eval(signal, instants, now)
}

/// Running value of a statistic over a growing instant set.
///
/// Discounted variants are stored lazily: `value` holds `Σ δ^(last_now − i)` and
/// is rescaled when read at a later instant, so untouched accumulators need no
/// per-tick work.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StatAccumulator {
    pub raw_count: u64,
    pub value: f64,
    pub last_now: u64,
}

impl StatAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accumulator of `instants` built directly, anchored at its latest instant.
    pub fn from_instants(f: &StatFunction, signal: &Signal, instants: &[u64]) -> Self {
        let Some(&last) = instants.iter().max() else {
            return Self::default();
        };
        let in_region = |i: &&u64| f.in_region(signal.get(**i as usize));
        let value = match f.variant {
            StatVariant::Count => instants.len() as f64,
            StatVariant::DiscountedSum | StatVariant::DiscountedPaperLiteral => {
                instants.iter().map(|&i| f.decay(last - i)).sum()
            }
            StatVariant::RegionCount => instants.iter().filter(in_region).count() as f64,
            StatVariant::LatestOccurrence => instants.iter().filter(in_region).max().map_or(0.0, |&i| i as f64),
        };
        Self {
            raw_count: instants.len() as u64,
            value,
            last_now: last,
        }
    }

    fn advance_to(&mut self, f: &StatFunction, now: u64) {
        if now > self.last_now {
            if f.decays() {
                self.value *= f.decay(now - self.last_now);
            }
            self.last_now = now;
        }
    }

    /// Adds `instant` with observation `obs`. The instant must not precede the
    /// accumulator's current instant.
    pub fn push(&mut self, f: &StatFunction, obs: &[f64], instant: u64) -> Result<()> {
        if instant < self.last_now {
            return Err(Error::TemporalOrder {
                instant,
                now: self.last_now,
            });
        }
        self.advance_to(f, instant);
        self.raw_count += 1;
        match f.variant {
            StatVariant::Count => self.value = self.raw_count as f64,
            StatVariant::DiscountedSum | StatVariant::DiscountedPaperLiteral => self.value += 1.0,
            StatVariant::RegionCount => {
                if f.in_region(obs) {
                    self.value += 1.0;
                }
            }
            StatVariant::LatestOccurrence => {
                if f.in_region(obs) {
                    self.value = instant as f64;
                }
            }
        }
        Ok(())
    }

    /// Moves the current instant forward by one.
    pub fn tick(&mut self, f: &StatFunction) {
        self.advance_to(f, self.last_now + 1);
    }

    /// Value of the statistic at instant `now` (not earlier than `last_now`).
    pub fn read(&self, f: &StatFunction, now: u64) -> f64 {
        let gap = now.saturating_sub(self.last_now);
        match f.variant {
            StatVariant::Count => self.raw_count as f64,
            StatVariant::DiscountedSum => self.value * f.decay(gap),
            StatVariant::DiscountedPaperLiteral => self.raw_count as f64 - self.value * f.decay(gap),
            StatVariant::RegionCount | StatVariant::LatestOccurrence => self.value,
        }
    }

    /// Folds the change of one member accumulator (`before` → `after`, caused by
    /// adding `instant`) into this accumulator, which holds the row sum.
    pub(crate) fn absorb(
        &mut self,
        f: &StatFunction,
        before: &StatAccumulator,
        after: &StatAccumulator,
        obs: &[f64],
        instant: u64,
    ) -> Result<()> {
        match f.variant {
            // The sum of maxima is not the maximum of the union.
            StatVariant::LatestOccurrence => {
                self.raw_count += 1;
                self.value += after.value - before.value;
                self.last_now = self.last_now.max(instant);
                Ok(())
            }
            _ => self.push(f, obs, instant),
        }
    }

    /// Adds another accumulator's value to this one (sum over disjoint sets).
    pub(crate) fn merge(&mut self, f: &StatFunction, other: &StatAccumulator) {
        if other.raw_count == 0 {
            return;
        }
        let anchor = self.last_now.max(other.last_now);
        self.advance_to(f, anchor);
        let mut other = *other;
        other.advance_to(f, anchor);
        self.raw_count += other.raw_count;
        self.value = match f.variant {
            StatVariant::Count => self.raw_count as f64,
            _ => self.value + other.value,
        };
    }

    /// `num / den` at instant `now`, or `None` when the denominator vanishes.
    ///
    /// For the discounted sum the common factor `δ^(now − den.last_now)` cancels,
    /// so the ratio is taken at the denominator's anchor to avoid underflow.
    pub fn ratio(f: &StatFunction, num: &StatAccumulator, den: &StatAccumulator, now: u64) -> Option<f64> {
        let (n, d) = match f.variant {
            StatVariant::DiscountedSum => (
                num.value * f.decay(den.last_now.saturating_sub(num.last_now)),
                den.value,
            ),
            _ => (num.read(f, now), den.read(f, now)),
        };
        (d > 0.0).then(|| n / d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn e1() -> Signal {
        Signal::from_scalars(&[1.0, 1.0, 5.0, 1.0, 5.0]).unwrap()
    }

    fn with_variant(variant: StatVariant, delta: f64) -> StatFunction {
        StatFunction {
            variant,
            delta,
            region: None,
        }
    }

    #[test]
    fn eval_examples() {
        let s = e1();
        assert_eq!(StatFunction::count().eval(&s, &[2, 4], 4).unwrap(), 2.0);
        let d = StatFunction::discounted(0.5);
        assert_eq!(d.eval(&s, &[2, 4], 4).unwrap(), 1.25);
        let lit = with_variant(StatVariant::DiscountedPaperLiteral, 0.5);
        assert_eq!(lit.eval(&s, &[2, 4], 4).unwrap(), 0.75);
        for v in [
            StatVariant::Count,
            StatVariant::DiscountedSum,
            StatVariant::DiscountedPaperLiteral,
            StatVariant::RegionCount,
        ] {
            assert_eq!(with_variant(v, 0.5).eval(&s, &[], 4).unwrap(), 0.0);
        }
        assert!(matches!(
            StatFunction::count().eval(&s, &[5], 4),
            Err(Error::TemporalOrder { instant: 5, now: 4 })
        ));
    }

    #[test]
    fn region_statistics() {
        let s = e1();
        let f = StatFunction {
            variant: StatVariant::RegionCount,
            delta: 0.0,
            region: Some(Region {
                lo: vec![4.0],
                hi: vec![6.0],
            }),
        };
        assert_eq!(f.eval(&s, &[0, 1, 2, 3, 4], 4).unwrap(), 2.0);
        let latest = StatFunction {
            variant: StatVariant::LatestOccurrence,
            ..f.clone()
        };
        assert_eq!(latest.eval(&s, &[0, 1, 2, 3], 4).unwrap(), 2.0);
        assert_eq!(latest.eval(&s, &[0, 1], 4).unwrap(), 0.0);
    }

    #[test]
    fn step_and_tick_examples() {
        let s = e1();
        let count = StatFunction::count();
        let mut acc = StatAccumulator::new();
        acc.push(&count, s.get(2), 2).unwrap();
        acc.push(&count, s.get(4), 4).unwrap();
        assert_eq!(acc.read(&count, 4), 2.0);
        acc.push(&count, s.get(4), 4).unwrap();
        assert_eq!(acc.read(&count, 4), 3.0);
        acc.tick(&count);
        assert_eq!(acc.read(&count, 5), 3.0);

        let d = StatFunction::discounted(0.5);
        let mut acc = StatAccumulator::new();
        acc.push(&d, s.get(2), 2).unwrap();
        acc.tick(&d);
        acc.tick(&d);
        acc.push(&d, s.get(4), 4).unwrap();
        assert_eq!(acc.read(&d, 4), 1.25);
        let before = acc.read(&d, 4);
        let mut again = acc;
        again.push(&d, s.get(4), 4).unwrap();
        assert_eq!(again.read(&d, 4), before + 1.0);
        acc.tick(&d);
        assert_eq!(acc.read(&d, 5), 0.625);
        assert!(matches!(acc.push(&d, s.get(2), 2), Err(Error::TemporalOrder { .. })));
    }

    #[test]
    fn ratio_vanishing_denominator() {
        let f = StatFunction {
            variant: StatVariant::RegionCount,
            delta: 0.0,
            region: Some(Region {
                lo: vec![100.0],
                hi: vec![200.0],
            }),
        };
        let mut a = StatAccumulator::new();
        a.push(&f, &[1.0], 0).unwrap();
        assert_eq!(StatAccumulator::ratio(&f, &a, &a, 0), None);
    }

    fn variants() -> impl Strategy<Value = StatVariant> {
        prop_oneof![
            Just(StatVariant::Count),
            Just(StatVariant::DiscountedSum),
            Just(StatVariant::DiscountedPaperLiteral),
            Just(StatVariant::RegionCount),
            Just(StatVariant::LatestOccurrence),
        ]
    }

    proptest! {
        #[test]
        fn fold_equals_eval(
            xs in prop::collection::vec(-5.0f64..5.0, 1..40),
            mask in prop::collection::vec(any::<bool>(), 40),
            delta in 0.0f64..0.99,
            variant in variants(),
            extra_ticks in 0u64..5,
        ) {
            let s = Signal::from_scalars(&xs).unwrap();
            let f = StatFunction {
                variant,
                delta,
                region: Some(Region { lo: vec![-1.0], hi: vec![2.0] }),
            };
            let mut acc = StatAccumulator::new();
            let mut set = Vec::new();
            for i in 0..xs.len() as u64 {
                if i > 0 {
                    acc.tick(&f);
                }
                if mask[i as usize] {
                    acc.push(&f, s.get(i as usize), i).unwrap();
                    set.push(i);
                }
            }
            let mut now = xs.len() as u64 - 1;
            for _ in 0..extra_ticks {
                acc.tick(&f);
                now += 1;
            }
            let direct = f.eval(&s, &set, now).unwrap();
            assert_relative_eq!(acc.read(&f, now), direct, max_relative = 1e-9, epsilon = 1e-12);
            let scratch = StatAccumulator::from_instants(&f, &s, &set);
            assert_relative_eq!(scratch.read(&f, now), direct, max_relative = 1e-9, epsilon = 1e-12);
        }

        #[test]
        fn tick_recurrence(delta in 0.0f64..0.99, n in 1u64..30) {
            let s = Signal::from_scalars(&vec![0.0; n as usize + 2]).unwrap();
            let f = StatFunction::discounted(delta);
            let set: Vec<u64> = (0..=n).step_by(2).collect();
            let acc = StatAccumulator::from_instants(&f, &s, &set);
            let mut ticked = acc;
            ticked.tick(&f);
            let direct = f.eval(&s, &set, acc.last_now + 1).unwrap();
            assert_relative_eq!(ticked.read(&f, acc.last_now + 1), direct, max_relative = 1e-9);
        }
    }
}
