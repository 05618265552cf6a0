//! Signal automata and the hidden Markov models they induce.
//!
//! A classifier maps each prefix of a time series to a state; the sequence of
//! states forms an automaton whose instants matrix records when each
//! transition was taken. Weighting those instant sets gives a sparse HMM that
//! is updated in constant time per observation and forecasts by forward
//! propagation.
//!
//! ```
//! use sigauto_core::{forecast, EventId, GridWidth, Pipeline, PluginParams};
//!
//! let params = PluginParams { grid_width: GridWidth::Uniform(1.0), ..Default::default() };
//! let mut p = Pipeline::discrete(params, 1).unwrap();
//! for x in [1.0, 1.0, 5.0, 1.0, 5.0] {
//!     p.push(&[x]).unwrap();
//! }
//! let f = forecast(p.hmm().unwrap(), 2);
//! let c5 = EventId::Cluster(sigauto_core::CellId::new(&[5]));
//! assert!((f.prob(2, &c5) - 2.0 / 3.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod forecast;
pub mod hmm;
pub mod isa;
pub mod pipeline;
pub mod plugins;
pub mod signal;
pub mod snapshot;
pub mod state;

pub use error::{Error, Result};
pub use forecast::{
    derive_seed, fit, forecast, forecast_density_at, forecast_mean, lookahead_advance, lookahead_build, real_mass,
    sample_event, sample_observation, score, FitReport, Forecast, FrontierEntry, LookaheadFrontier,
    DEFAULT_SCORE_FLOOR,
};
pub use hmm::{
    isa_to_hmm, isa_to_hmm_continuous, next_hmm, next_hmm_continuous, Hmm, HmmContinuous, SparseStochasticMatrix,
    Transitions, DUMMY_EVENT, DUMMY_STATE,
};
pub use isa::{
    automaton_stats, build_isa, init_isa, is_new_state, next_isa, AutomatonStats, Cell, Isa, IsaStep, BOTTOM,
};
pub use pipeline::{Model, Pipeline};
pub use plugins::{
    default_bandwidth, Bandwidth, EmaClassifier, GridWidth, Kernel, LookaheadClassifier, PluginParams, Region,
    StatFunction, StatVariant, StepClassifier,
};
pub use signal::{Observation, Signal};
pub use snapshot::{load_snapshot, save_snapshot, Resumable, Snapshot, SNAPSHOT_VERSION};
pub use state::{CellId, EventId, StateId};
