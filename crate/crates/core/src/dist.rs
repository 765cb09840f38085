//! User-preference distributions on the unit interval.
//!
//! Buyers are indexed by a location in `[0, 1]`: the incumbent sits at `0`,
//! the entrant at `1`, and a buyer's distance to a seller is its preference
//! misalignment. The location law is one of three stock families — uniform,
//! Gaussian truncated to `[0, 1]`, or gamma truncated to `[0, 1]` — plus a
//! deliberately irregular two-lobe mixture used to exercise the hazard-rate
//! regularity check.
//!
//! Truncated variants are renormalized so the density integrates to one over
//! the support. Their CDFs are computed by adaptive quadrature (absolute
//! tolerance `1e-10`); no closed forms are assumed.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate;

/// Absolute tolerance for the CDF quadrature.
const CDF_TOL: f64 = 1e-10;

/// Guard band below `1` excluded from the hazard grid, where the hazard
/// `h/(1-H)` diverges.
const HAZARD_GUARD: f64 = 1e-4;

/// Distribution family and parameters, as written in scenario files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionKind {
    Uniform,
    TruncatedGaussian {
        mean: f64,
        sd: f64,
    },
    TruncatedGamma {
        shape: f64,
        scale: f64,
    },
    /// Two Gaussian lobes with a density valley between them. Fails the
    /// monotone-hazard regularity check by construction.
    ValleyMixture {
        low_mean: f64,
        high_mean: f64,
        sd: f64,
        low_weight: f64,
    },
}

/// A location law on `[0, 1]`, immutable after construction and safe to share
/// across threads. The truncation normalizer is computed once and memoized.
#[derive(Debug, Serialize, Deserialize)]
#[serde(from = "DistributionKind", into = "DistributionKind")]
pub struct PreferenceDistribution {
    kind: DistributionKind,
    norm: OnceLock<f64>,
}

impl Clone for PreferenceDistribution {
    fn clone(&self) -> Self {
        PreferenceDistribution {
            kind: self.kind.clone(),
            norm: OnceLock::new(),
        }
    }
}

impl PartialEq for PreferenceDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl From<DistributionKind> for PreferenceDistribution {
    fn from(kind: DistributionKind) -> Self {
        PreferenceDistribution {
            kind,
            norm: OnceLock::new(),
        }
    }
}

impl From<PreferenceDistribution> for DistributionKind {
    fn from(dist: PreferenceDistribution) -> Self {
        dist.kind
    }
}

/// Outcome of the monotone-hazard regularity check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HazardReport {
    /// True when `h(x)/(1-H(x))` is non-decreasing across the grid.
    pub monotone: bool,
    /// Location of the first decrease, when one exists.
    pub first_violation: Option<f64>,
    /// Number of decreases found.
    pub violations: usize,
    /// Grid points whose hazard was not finite (near the guard band);
    /// reported, not counted as failures.
    pub nonfinite_points: usize,
    /// Width of the excluded band below `1`.
    pub guard_band: f64,
    pub grid_points: usize,
}

impl PreferenceDistribution {
    pub fn new(kind: DistributionKind) -> Result<Self> {
        let dist = PreferenceDistribution::from(kind);
        dist.validate()?;
        Ok(dist)
    }

    pub fn uniform() -> Self {
        PreferenceDistribution::from(DistributionKind::Uniform)
    }

    pub fn truncated_gaussian(mean: f64, sd: f64) -> Result<Self> {
        PreferenceDistribution::new(DistributionKind::TruncatedGaussian { mean, sd })
    }

    pub fn truncated_gamma(shape: f64, scale: f64) -> Result<Self> {
        PreferenceDistribution::new(DistributionKind::TruncatedGamma { shape, scale })
    }

    /// The canonical irregular mixture: lobes at 0.15 and 0.85 with a deep
    /// valley in between.
    pub fn valley_mixture() -> Self {
        PreferenceDistribution::from(DistributionKind::ValleyMixture {
            low_mean: 0.15,
            high_mean: 0.85,
            sd: 0.08,
            low_weight: 0.5,
        })
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    /// Checks the parameter invariants. Called by scenario loading after
    /// deserialization, which bypasses [`PreferenceDistribution::new`].
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DistributionKind::Uniform => Ok(()),
            DistributionKind::TruncatedGaussian { mean, sd } => {
                if !mean.is_finite() {
                    return Err(Error::validation("distribution.mean", "must be finite"));
                }
                if !(sd > 0.0 && sd.is_finite()) {
                    return Err(Error::validation("distribution.sd", "must be positive"));
                }
                Ok(())
            }
            DistributionKind::TruncatedGamma { shape, scale } => {
                if !(shape >= 1.0 && shape.is_finite()) {
                    // shape < 1 has an unbounded density at 0, which breaks
                    // the continuity invariant on [0, 1].
                    return Err(Error::validation("distribution.shape", "must be >= 1"));
                }
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::validation("distribution.scale", "must be positive"));
                }
                Ok(())
            }
            DistributionKind::ValleyMixture {
                low_mean,
                high_mean,
                sd,
                low_weight,
            } => {
                if !(low_mean.is_finite() && high_mean.is_finite() && low_mean < high_mean) {
                    return Err(Error::validation(
                        "distribution.low_mean/high_mean",
                        "must be finite with low_mean < high_mean",
                    ));
                }
                if !(sd > 0.0 && sd.is_finite()) {
                    return Err(Error::validation("distribution.sd", "must be positive"));
                }
                if !(low_weight > 0.0 && low_weight < 1.0) {
                    return Err(Error::validation(
                        "distribution.low_weight",
                        "must lie strictly between 0 and 1",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Unnormalized density. Shared by the PDF, the CDF quadrature, and the
    /// normalizer, so constant factors cancel.
    fn raw_density(&self, x: f64) -> f64 {
        match self.kind {
            DistributionKind::Uniform => 1.0,
            DistributionKind::TruncatedGaussian { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp()
            }
            DistributionKind::TruncatedGamma { shape, scale } => {
                x.powf(shape - 1.0) * (-x / scale).exp()
            }
            DistributionKind::ValleyMixture {
                low_mean,
                high_mean,
                sd,
                low_weight,
            } => {
                let zl = (x - low_mean) / sd;
                let zh = (x - high_mean) / sd;
                low_weight * (-0.5 * zl * zl).exp() + (1.0 - low_weight) * (-0.5 * zh * zh).exp()
            }
        }
    }

    /// Mass of the unnormalized density over `[0, 1]`.
    fn normalizer(&self) -> f64 {
        *self
            .norm
            .get_or_init(|| integrate(&|x| self.raw_density(x), 0.0, 1.0, CDF_TOL))
    }

    /// Density `h(x)` at a location in `[0, 1]`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_unit_interval("location", x)?;
        match self.kind {
            DistributionKind::Uniform => Ok(1.0),
            _ => Ok(self.raw_density(x) / self.normalizer()),
        }
    }

    /// Cumulative mass `H(x)` at a location in `[0, 1]`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_unit_interval("location", x)?;
        Ok(self.cdf_clamped(x))
    }

    fn cdf_clamped(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self.kind {
            DistributionKind::Uniform => x,
            _ => {
                if x == 0.0 {
                    return 0.0;
                }
                if x == 1.0 {
                    return 1.0;
                }
                let raw = integrate(&|t| self.raw_density(t), 0.0, x, CDF_TOL);
                (raw / self.normalizer()).clamp(0.0, 1.0)
            }
        }
    }

    /// Mass of the interval `[a, b]` clamped to the support; zero when
    /// `b <= a`. Never errors: out-of-support endpoints are clamped.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        (self.cdf_clamped(b) - self.cdf_clamped(a)).max(0.0)
    }

    /// Checks that the hazard rate `h(x)/(1-H(x))` is non-decreasing on a
    /// grid over `[0, 1 - guard]`. Non-finite hazards near the guard band are
    /// noted, not treated as violations.
    pub fn hazard_monotone_check(&self, grid_points: usize) -> Result<HazardReport> {
        if grid_points < 10 {
            return Err(Error::validation("grid_points", "must be at least 10"));
        }
        let hi = 1.0 - HAZARD_GUARD;
        let mut prev: Option<f64> = None;
        let mut first_violation = None;
        let mut violations = 0;
        let mut nonfinite = 0;
        for k in 0..grid_points {
            let x = hi * k as f64 / (grid_points - 1) as f64;
            let h = self.raw_hazard(x);
            if !h.is_finite() {
                nonfinite += 1;
                continue;
            }
            if let Some(p) = prev {
                // Slack absorbs quadrature noise in the CDF.
                if h < p * (1.0 - 1e-9) - 1e-12 {
                    violations += 1;
                    if first_violation.is_none() {
                        first_violation = Some(x);
                    }
                }
            }
            prev = Some(h);
        }
        Ok(HazardReport {
            monotone: violations == 0,
            first_violation,
            violations,
            nonfinite_points: nonfinite,
            guard_band: HAZARD_GUARD,
            grid_points,
        })
    }

    fn raw_hazard(&self, x: f64) -> f64 {
        let survival = 1.0 - self.cdf_clamped(x);
        if survival <= 0.0 {
            return f64::INFINITY;
        }
        let density = match self.kind {
            DistributionKind::Uniform => 1.0,
            _ => self.raw_density(x) / self.normalizer(),
        };
        density / survival
    }
}

fn check_unit_interval(what: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            what,
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}
