mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use sigauto_core::forecast::forecast_slots;
use sigauto_core::{forecast, EventId, GridWidth, Hmm, Pipeline, PluginParams, Signal, StatVariant, DUMMY_EVENT};

fn unit(discounted: bool) -> PluginParams {
    PluginParams {
        grid_width: GridWidth::Uniform(1.0),
        delta: if discounted { 0.8 } else { 0.0 },
        stat_variant: if discounted {
            StatVariant::DiscountedSum
        } else {
            StatVariant::Count
        },
        ..Default::default()
    }
}

fn run(values: &[f64], p: PluginParams) -> Vec<Pipeline> {
    let mut pipe = Pipeline::discrete(p, 1).unwrap();
    values
        .iter()
        .map(|x| {
            pipe.push(&[*x]).unwrap();
            pipe.clone()
        })
        .collect()
}

fn dense(hmm: &Hmm) -> (DMatrix<f64>, DMatrix<f64>) {
    let ns = hmm.states().len();
    let ne = hmm.event_count();
    let mut t = DMatrix::zeros(ns, ns);
    let mut e = DMatrix::zeros(ns, ne);
    for p in 0..ns {
        hmm.for_each_transition(p, |q, w| t[(p, q)] += w);
        hmm.for_each_emission(p, |c, w| e[(p, c)] += w);
    }
    (t, e)
}

fn small_signal() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u8..5, 1..40).prop_map(|v| v.into_iter().map(|k| f64::from(k) + 0.5).collect())
}

proptest! {
    #[test]
    fn iterative_equals_matrix_power(values in small_signal(), discounted in any::<bool>(), h in 1usize..6) {
        let pipe = run(&values, unit(discounted)).pop().unwrap();
        let hmm = pipe.hmm().unwrap();
        prop_assume!(hmm.states().len() <= 6);
        let (t, e) = dense(hmm);
        let mut alpha = DMatrix::zeros(1, hmm.states().len());
        alpha[(0, hmm.current())] = 1.0;
        let slots = forecast_slots(hmm, h);
        for j in 1..=h {
            let f = &alpha * t.pow(j as u32) * &e;
            for (c, p) in slots[j - 1].iter().enumerate() {
                prop_assert!((f[(0, c)] - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalization_and_dummy_iff_new(values in small_signal(), discounted in any::<bool>(), h in 1usize..5) {
        for pipe in run(&values, unit(discounted)) {
            let f = forecast(pipe.hmm().unwrap(), h);
            let new = pipe.isa().unwrap().is_new_state();
            prop_assert_eq!(f.is_dummy, new);
            for step in &f.steps {
                if f.is_dummy {
                    prop_assert_eq!(step, &vec![(EventId::Dummy, 1.0)]);
                } else {
                    let total: f64 = step.iter().map(|(_, p)| p).sum();
                    prop_assert!((total - 1.0).abs() < 1e-9);
                    // Only the current state can lack outgoing transitions.
                    prop_assert!(step.iter().all(|(e, _)| *e != EventId::Dummy));
                }
            }
            if !new {
                for step in forecast_slots(pipe.hmm().unwrap(), h) {
                    prop_assert_eq!(step[DUMMY_EVENT], 0.0);
                }
            }
        }
    }

    #[test]
    fn dummy_count_equals_distinct_states(seed in any::<u64>(), n in 1usize..300) {
        let s = common::random_walk(seed, n, 1, 0.7);
        let mut pipe = Pipeline::discrete(unit(false), 1).unwrap();
        let mut dummies = 0;
        for r in s.iter() {
            pipe.push(r).unwrap();
            dummies += usize::from(forecast(pipe.hmm().unwrap(), 1).is_dummy);
        }
        let real = pipe.isa().unwrap().states().iter().filter(|q| q.is_real()).count();
        prop_assert_eq!(dummies, real);
    }
}

#[test]
fn worked_example_forecasts() {
    let s = Signal::from_scalars(&[1.0, 1.0, 5.0, 1.0, 5.0]).unwrap();
    let pipe = run(&s.iter().map(|r| r[0]).collect::<Vec<_>>(), unit(false))
        .pop()
        .unwrap();
    let f = forecast(pipe.hmm().unwrap(), 2);
    let c1 = EventId::Cluster(common::cell_of(&[1.0], 1.0));
    let c5 = EventId::Cluster(common::cell_of(&[5.0], 1.0));
    assert!(!f.is_dummy);
    assert_eq!(f.steps[0], vec![(c1.clone(), 1.0)]);
    assert!((f.prob(2, &c1) - 1.0 / 3.0).abs() < 1e-12);
    assert!((f.prob(2, &c5) - 2.0 / 3.0).abs() < 1e-12);
}
