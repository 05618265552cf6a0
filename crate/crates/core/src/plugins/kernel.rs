//! Multivariate normal kernel and the default bandwidth rule.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Smallest per-coordinate scale produced by [`default_bandwidth`], before squaring.
pub const BANDWIDTH_FLOOR: f64 = 1e-6;

/// `φ_H(x) = (2π)^(−d/2) |H|^(−1/2) exp(−½ xᵀ H⁻¹ x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Kernel {
    bandwidth: Vec<Vec<f64>>,
    /// Cholesky factor of H, row-major lower triangle.
    lower: Vec<f64>,
    norm: f64,
}

impl Kernel {
    #[allow(clippy::needless_range_loop)]
    pub fn new(bandwidth: &[Vec<f64>]) -> Result<Self> {
        let d = bandwidth.len();
        if d == 0 || bandwidth.iter().any(|row| row.len() != d) {
            return Err(Error::Config("bandwidth must be a non-empty square matrix".into()));
        }
        if bandwidth.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("bandwidth has non-finite entries".into()));
        }
        for i in 0..d {
            for j in 0..i {
                let (a, b) = (bandwidth[i][j], bandwidth[j][i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Config("bandwidth must be symmetric".into()));
                }
            }
        }
        let h = DMatrix::from_fn(d, d, |i, j| bandwidth[i][j]);
        let chol = h
            .cholesky()
            .ok_or_else(|| Error::Config("bandwidth must be positive definite".into()))?;
        let l = chol.l();
        let det_sqrt: f64 = (0..d).map(|i| l[(i, i)]).product();
        let norm = (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0) / det_sqrt;
        let mut lower = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                lower[i * d + j] = l[(i, j)];
            }
        }
        Ok(Self {
            bandwidth: bandwidth.to_vec(),
            lower,
            norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.bandwidth.len()
    }

    pub fn bandwidth(&self) -> &[Vec<f64>] {
        &self.bandwidth
    }

    /// Largest diagonal entry of H.
    pub fn max_variance(&self) -> f64 {
        (0..self.dim()).map(|i| self.bandwidth[i][i]).fold(0.0, f64::max)
    }

    /// Kernel value at the difference vector `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        self.norm * (-0.5 * self.mahalanobis_sq(x)).exp()
    }

    /// Kernel value at `x − center`, without allocating.
    pub fn eval_centered(&self, x: &[f64], center: &[f64]) -> f64 {
        let d = self.dim();
        if d == 1 {
            let y = (x[0] - center[0]) / self.lower[0];
            return self.norm * (-0.5 * y * y).exp();
        }
        let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
        self.eval(&diff)
    }

    #[allow(clippy::needless_range_loop)]
    fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        // Forward substitution L y = x, then |y|².
        let d = self.dim();
        let mut y = [0.0f64; 8];
        let mut heap;
        let y: &mut [f64] = if d <= 8 {
            &mut y[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut acc = 0.0;
        for i in 0..d {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lower[i * d + j] * y[j];
            }
            y[i] = s / self.lower[i * d + i];
            acc += y[i] * y[i];
        }
        acc
    }

    /// Maps a standard normal vector `z` to a draw from `N(0, H)`.
    pub fn scale_noise(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..=i).map(|j| self.lower[i * d + j] * z[j]).sum())
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Kernel {
    type Error = Error;

    fn try_from(m: Vec<Vec<f64>>) -> Result<Self> {
        Kernel::new(&m)
    }
}

impl From<Kernel> for Vec<Vec<f64>> {
    fn from(k: Kernel) -> Self {
        k.bandwidth
    }
}

/// Diagonal Scott's-rule bandwidth: `H_jj = (n^(−1/(d+4)) · s_j)²`, with the
/// per-coordinate scale floored at [`BANDWIDTH_FLOOR`].
pub fn default_bandwidth(signal: &Signal) -> Result<Vec<Vec<f64>>> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::InsufficientHistory { needed: 2, have: n });
    }
    let d = signal.dim();
    let factor = (n as f64).powf(-1.0 / (d as f64 + 4.0));
    let mut h = vec![vec![0.0; d]; d];
    for j in 0..d {
        let mean = signal.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = signal.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let scale = (factor * var.sqrt()).max(BANDWIDTH_FLOOR);
        h[j][j] = scale * scale;
    }
    Ok(h)
}
