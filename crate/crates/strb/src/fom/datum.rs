//! Parametrized Dirichlet data. The datum on each inflow boundary separates
//! into a spatial coefficient vector against the multiplier basis and a
//! scalar temporal law: a T-periodic reference waveform scaled by a
//! per-boundary weight. The spatial part is a parabolic profile of unit flux
//! directed along the inward normal, so the weights have a flow-rate meaning
//! regardless of the boundary length.

use super::assemble::FomSpatialBlocks;
use super::quad::gauss_legendre;
use super::{FomError, Result};
use crate::DVec;
use serde::{Deserialize, Serialize};

/// Box of admissible parameters: frequency multiplier, amplitude, flow split.
pub const PARAMETER_DOMAIN: [[f64; 2]; 3] = [[4.0, 8.0], [0.1, 0.3], [0.2, 0.8]];

/// One query point (μ₀, μ₁, μ₂), all dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl ParameterVector {
    pub fn new(mu0: f64, mu1: f64, mu2: f64) -> Self {
        ParameterVector { mu0, mu1, mu2 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.mu0, self.mu1, self.mu2]
    }

    pub fn in_default_domain(&self) -> bool {
        self.as_array()
            .iter()
            .zip(&PARAMETER_DOMAIN)
            .all(|(v, r)| *v >= r[0] && *v <= r[1])
    }
}

/// Reference temporal waveform, T-periodic with zero value and slope at 0.
pub fn temporal_profile(t: f64, period: f64, mu: &ParameterVector) -> f64 {
    let tau = 2.0 * std::f64::consts::PI * t / period;
    1.0 - tau.cos() + mu.mu1 * (mu.mu0 * tau).sin()
}

/// How the reference waveform is distributed over the inflow boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLaw {
    /// One boundary carrying the full waveform.
    Single,
    /// Primary boundary at full strength, secondary scaled by μ₂.
    InletPlus,
    /// Unit total flow split μ₂ / (1 - μ₂) over two boundaries.
    Split,
}

impl WeightLaw {
    pub fn boundary_count(&self) -> usize {
        match self {
            WeightLaw::Single => 1,
            WeightLaw::InletPlus | WeightLaw::Split => 2,
        }
    }

    pub fn weights(&self, mu2: f64) -> Vec<f64> {
        match self {
            WeightLaw::Single => vec![1.0],
            WeightLaw::InletPlus => vec![1.0, mu2],
            WeightLaw::Split => vec![mu2, 1.0 - mu2],
        }
    }
}

/// Factorized Dirichlet datum: spatial coefficients per boundary plus the
/// weighted temporal law.
#[derive(Debug, Clone)]
pub struct DirichletDatum {
    /// Multiplier-space coefficients of the spatial profile, one vector per
    /// inflow boundary.
    pub spatial: Vec<DVec>,
    pub law: WeightLaw,
    pub period: f64,
}

impl DirichletDatum {
    /// Projects the unit-flux parabolic profile of each boundary onto its
    /// multiplier basis. The profile is (6/H³) s (H - s) along the inward
    /// normal, H the boundary length, so its flux is exactly one.
    pub fn build(blocks: &FomSpatialBlocks, law: WeightLaw, period: f64) -> Result<Self> {
        if period <= 0.0 {
            return Err(FomError::BadParameter("period must be positive".into()));
        }
        if law.boundary_count() != blocks.trace_bases.len() {
            return Err(FomError::BadParameter(format!(
                "weight law drives {} boundaries but the mesh has {}",
                law.boundary_count(),
                blocks.trace_bases.len()
            )));
        }
        let mut spatial = Vec::new();
        for (basis, &deg) in blocks.trace_bases.iter().zip(&blocks.degrees) {
            let len = basis.length();
            let inward = basis.inward();
            let (xs, ws) = gauss_legendre(deg + 3);
            // Scalar moments ∫ profile q_m ds on the reference interval.
            let mut moments = DVec::zeros(deg + 1);
            for (&x, &w) in xs.iter().zip(&ws) {
                let s = 0.5 * (x + 1.0) * len;
                let profile = 6.0 / len.powi(3) * s * (len - s);
                moments += 0.5 * len * w * profile * basis.values_at_param(x);
            }
            let mut g = DVec::zeros(2 * (deg + 1));
            for c in 0..2 {
                for mfun in 0..=deg {
                    g[c * (deg + 1) + mfun] = inward[c] * moments[mfun];
                }
            }
            spatial.push(g);
        }
        Ok(DirichletDatum { spatial, law, period })
    }

    /// Temporal factor of boundary `k` (1-based): weight times the waveform.
    pub fn g_t(&self, k: u8, t: f64, mu: &ParameterVector) -> f64 {
        self.law.weights(mu.mu2)[k as usize - 1] * temporal_profile(t, self.period, mu)
    }

    /// The stacked multiplier-space datum at time `t`.
    pub fn stacked(&self, t: f64, mu: &ParameterVector) -> DVec {
        let n: usize = self.spatial.iter().map(|g| g.len()).sum();
        let mut out = DVec::zeros(n);
        let mut at = 0;
        for (idx, g) in self.spatial.iter().enumerate() {
            let w = self.g_t((idx + 1) as u8, t, mu);
            out.rows_mut(at, g.len()).copy_from(&(g * w));
            at += g.len();
        }
        out
    }

    pub fn n_lambda(&self) -> usize {
        self.spatial.iter().map(|g| g.len()).sum()
    }
}
