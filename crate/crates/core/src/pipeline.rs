//! Streaming pipeline: observations in, automaton and model updated in place.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{forecast, Forecast};
use crate::hmm::{Hmm, HmmContinuous};
use crate::isa::Isa;
use crate::plugins::{EmaClassifier, Kernel, PluginParams, StepClassifier};
use crate::signal::Signal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Discrete(Hmm),
    Continuous(HmmContinuous),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    params: PluginParams,
    classifier: EmaClassifier,
    signal: Signal,
    /// Kernel for the continuous model; `None` selects the discrete model.
    kernel: Option<Kernel>,
    state: Option<(Isa, Model)>,
}

impl Pipeline {
    pub fn discrete(params: PluginParams, dim: usize) -> Result<Self> {
        params.validate()?;
        params.grid_width.check_dim(dim)?;
        Ok(Self {
            classifier: EmaClassifier::new(&params),
            params,
            signal: Signal::new(dim),
            kernel: None,
            state: None,
        })
    }

    pub fn continuous(params: PluginParams, kernel: Kernel) -> Result<Self> {
        params.validate()?;
        let dim = kernel.dim();
        params.grid_width.check_dim(dim)?;
        Ok(Self {
            classifier: EmaClassifier::new(&params),
            params,
            signal: Signal::new(dim),
            kernel: Some(kernel),
            state: None,
        })
    }

    /// Consumes the next observation `r_{n+1}`.
    pub fn push(&mut self, obs: &[f64]) -> Result<()> {
        self.signal.push(obs)?;
        // The signal already rejected malformed input, so the classifier cannot fail.
        let label = self.classifier.step(obs)?;
        match &mut self.state {
            None => {
                let (isa, _) = Isa::start(label)?;
                let sigma = self.params.stat();
                let model = match &self.kernel {
                    None => Model::Discrete(Hmm::from_isa(
                        &isa,
                        &self.signal,
                        &sigma,
                        &sigma,
                        &self.params.grid_width,
                    )?),
                    Some(k) => Model::Continuous(HmmContinuous::from_isa(&isa, &self.signal, &sigma, k.clone())?),
                };
                self.state = Some((isa, model));
            }
            Some((isa, model)) => {
                let step = isa.push_state(label.clone())?;
                match model {
                    Model::Discrete(m) => {
                        m.apply(&label, &step, obs)?;
                    }
                    Model::Continuous(m) => {
                        m.apply(&label, &step, obs)?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> &PluginParams {
        &self.params
    }

    pub fn signal(&self) -> &Signal {
        &self.signal
    }

    pub fn isa(&self) -> Option<&Isa> {
        self.state.as_ref().map(|(i, _)| i)
    }

    pub fn model(&self) -> Option<&Model> {
        self.state.as_ref().map(|(_, m)| m)
    }

    pub fn hmm(&self) -> Option<&Hmm> {
        match self.model()? {
            Model::Discrete(m) => Some(m),
            Model::Continuous(_) => None,
        }
    }

    pub fn hmm_continuous(&self) -> Option<&HmmContinuous> {
        match self.model()? {
            Model::Continuous(m) => Some(m),
            Model::Discrete(_) => None,
        }
    }

    pub fn classifier(&self) -> &EmaClassifier {
        &self.classifier
    }

    /// Discrete forecast from the present instant.
    pub fn forecast(&self, h: usize) -> Result<Forecast> {
        match self.model() {
            Some(Model::Discrete(m)) => Ok(forecast(m, h)),
            Some(Model::Continuous(_)) => Err(Error::Config("continuous pipeline has no discrete forecast".into())),
            None => Err(Error::EmptyInput),
        }
    }

    pub(crate) fn rebuild_index(&mut self) -> Result<()> {
        if let Some((isa, model)) = &mut self.state {
            isa.rebuild_indexes()?;
            match model {
                Model::Discrete(m) => m.rebuild_index(),
                Model::Continuous(m) => m.rebuild_index(),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::isa_to_hmm;
    use crate::plugins::GridWidth;

    #[test]
    fn streaming_matches_scratch() {
        let params = PluginParams {
            lambda: 0.5,
            grid_width: GridWidth::Uniform(1.0),
            ..Default::default()
        };
        let xs = [1.0, 3.0, 2.0, 3.0, 1.0, 2.0, 2.5];
        let mut p = Pipeline::discrete(params.clone(), 1).unwrap();
        for x in xs {
            p.push(&[x]).unwrap();
        }
        let s = Signal::from_scalars(&xs).unwrap();
        let isa = Isa::build(&s, &mut EmaClassifier::new(&params)).unwrap();
        assert_eq!(p.isa().unwrap(), &isa);
        let hmm = isa_to_hmm(&isa, &s, &params.stat(), &params.stat(), &params.grid_width).unwrap();
        assert_eq!(p.hmm().unwrap(), &hmm);
    }

    #[test]
    fn rejected_observation_leaves_state_untouched() {
        let mut p = Pipeline::discrete(PluginParams::default(), 1).unwrap();
        p.push(&[1.0]).unwrap();
        let before = p.clone();
        assert!(p.push(&[f64::NAN]).is_err());
        assert!(p.push(&[1.0, 2.0]).is_err());
        assert_eq!(p, before);
    }

    #[test]
    fn empty_pipeline_cannot_forecast() {
        let p = Pipeline::discrete(PluginParams::default(), 1).unwrap();
        assert!(matches!(p.forecast(1), Err(Error::EmptyInput)));
    }
}
