use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which statistic turns instant sets into weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatVariant {
    /// Cardinality of the instant set.
    #[default]
    Count,
    /// `Σ δ^(now − i)`: recent instants weigh more.
    DiscountedSum,
    /// `k − Σ δ^(now − i)`, the formula taken literally.
    DiscountedPaperLiteral,
    /// Number of instants whose observation falls in the region.
    RegionCount,
    /// Latest instant whose observation falls in the region, 0 if none.
    LatestOccurrence,
}

/// Axis-aligned box `lo ≤ x ≤ hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }
}

/// Grid cell width; a single value applies to every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridWidth {
    Uniform(f64),
    PerCoordinate(Vec<f64>),
}

impl GridWidth {
    pub fn get(&self, coord: usize) -> f64 {
        match self {
            GridWidth::Uniform(w) => *w,
            GridWidth::PerCoordinate(ws) => ws[coord],
        }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            GridWidth::PerCoordinate(ws) if ws.len() != dim => Err(Error::DimensionMismatch {
                expected: dim,
                got: ws.len(),
            }),
            _ => Ok(()),
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            GridWidth::Uniform(w) => std::slice::from_ref(w),
            GridWidth::PerCoordinate(ws) => ws,
        }
    }
}

impl Default for GridWidth {
    fn default() -> Self {
        GridWidth::Uniform(1.0)
    }
}

/// Kernel bandwidth: an explicit matrix, or Scott's rule computed from the signal.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "BandwidthRepr", into = "BandwidthRepr")]
pub enum Bandwidth {
    #[default]
    Scott,
    Matrix(Vec<Vec<f64>>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BandwidthRepr {
    Rule(String),
    Matrix(Vec<Vec<f64>>),
}

impl TryFrom<BandwidthRepr> for Bandwidth {
    type Error = String;

    fn try_from(repr: BandwidthRepr) -> Result<Self, String> {
        match repr {
            BandwidthRepr::Rule(r) if r == "scott" => Ok(Bandwidth::Scott),
            BandwidthRepr::Rule(r) => Err(format!("unknown bandwidth rule {r:?}")),
            BandwidthRepr::Matrix(m) => Ok(Bandwidth::Matrix(m)),
        }
    }
}

impl From<Bandwidth> for BandwidthRepr {
    fn from(b: Bandwidth) -> Self {
        match b {
            Bandwidth::Scott => BandwidthRepr::Rule("scott".into()),
            Bandwidth::Matrix(m) => BandwidthRepr::Matrix(m),
        }
    }
}

/// The parameter tuple shared by the classifier, the statistics and the kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PluginParams {
    pub lambda: f64,
    pub grid_width: GridWidth,
    pub delta: f64,
    pub bandwidth: Bandwidth,
    pub horizon: usize,
    pub region: Option<Region>,
    pub stat_variant: StatVariant,
}

impl Default for PluginParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            grid_width: GridWidth::default(),
            delta: 0.0,
            bandwidth: Bandwidth::Scott,
            horizon: 1,
            region: None,
            stat_variant: StatVariant::Count,
        }
    }
}

impl PluginParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::Config(format!("lambda must lie in (0, 1], got {}", self.lambda)));
        }
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in [0, 1), got {}", self.delta)));
        }
        let widths = self.grid_width.values();
        if widths.is_empty() || widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config("grid_width must be positive and finite".into()));
        }
        if let Some(region) = &self.region {
            if region.lo.len() != region.hi.len() || region.lo.is_empty() {
                return Err(Error::Config("region bounds must have equal, non-zero length".into()));
            }
        }
        if let Bandwidth::Matrix(m) = &self.bandwidth {
            crate::plugins::kernel::Kernel::new(m)?;
        }
        Ok(())
    }

    /// The statistic configured by these parameters.
    pub fn stat(&self) -> crate::plugins::stats::StatFunction {
        crate::plugins::stats::StatFunction {
            variant: self.stat_variant,
            delta: self.delta,
            region: self.region.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PluginParams::default().validate().unwrap();
    }

    #[test]
    fn range_errors() {
        let p = PluginParams {
            delta: 1.0,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::Config(_))));
        let p = PluginParams {
            lambda: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = PluginParams {
            grid_width: GridWidth::Uniform(-1.0),
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn bandwidth_accepts_scott_or_matrix() {
        let b: Bandwidth = serde_json::from_str("\"scott\"").unwrap();
        assert_eq!(b, Bandwidth::Scott);
        let b: Bandwidth = serde_json::from_str("[[2.0]]").unwrap();
        assert_eq!(b, Bandwidth::Matrix(vec![vec![2.0]]));
        assert!(serde_json::from_str::<Bandwidth>("\"silverman\"").is_err());
        assert_eq!(serde_json::to_string(&Bandwidth::Scott).unwrap(), "\"scott\"");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<PluginParams>(r#"{"lambada": 1}"#).is_err());
        let p: PluginParams = serde_json::from_str(r#"{"grid_width": [0.5, 2]}"#).unwrap();
        assert_eq!(p.grid_width.get(1), 2.0);
    }
}
