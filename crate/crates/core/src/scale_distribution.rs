//! Placement of the intermediate temporal scale levels of a cascade.
//!
//! A cascade of `K` first-order integrators reaches a composed temporal
//! variance `tau_max` through intermediate levels `tau_1 < ... < tau_K`.
//! Two placements are supported: uniform in `tau`, and geometric
//! (uniform in `log tau`) with ratio `c^2` between neighbouring levels.
//!
//! All quantities here are dimensionless relative scales. Conversions from
//! seconds or degrees live in the discrete modules.

use crate::{Error, Result};

/// How the levels are spread between the finest level and `tau_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionKind {
    Uniform,
    /// Geometric spacing with distribution parameter `c > 1`.
    Logarithmic {
        c: f64,
    },
}

impl std::fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistributionKind::Uniform => write!(f, "uniform"),
            DistributionKind::Logarithmic { c } => write!(f, "log(c={c})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleDistribution {
    kind: DistributionKind,
    stages: usize,
    tau_max: f64,
}

impl ScaleDistribution {
    pub fn new(kind: DistributionKind, stages: usize, tau_max: f64) -> Result<Self> {
        validate_common(stages, tau_max)?;
        if let DistributionKind::Logarithmic { c } = kind {
            validate_c(c)?;
        }
        Ok(ScaleDistribution {
            kind,
            stages,
            tau_max,
        })
    }

    pub fn uniform(stages: usize, tau_max: f64) -> Result<Self> {
        Self::new(DistributionKind::Uniform, stages, tau_max)
    }

    pub fn logarithmic(stages: usize, c: f64, tau_max: f64) -> Result<Self> {
        Self::new(DistributionKind::Logarithmic { c }, stages, tau_max)
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    /// Same placement, different composed variance.
    pub fn with_tau_max(&self, tau_max: f64) -> Result<Self> {
        Self::new(self.kind, self.stages, tau_max)
    }

    /// Cumulative variances `tau_1 .. tau_K`.
    pub fn levels(&self) -> Vec<f64> {
        match self.kind {
            DistributionKind::Uniform => uniform_levels_unchecked(self.stages, self.tau_max),
            DistributionKind::Logarithmic { c } => {
                log_levels_unchecked(self.stages, c, self.tau_max)
            }
        }
    }

    /// Continuous-theory time constants, `sum mu_k^2 = tau_max`.
    pub fn time_constants(&self) -> TimeConstants {
        let mu = match self.kind {
            DistributionKind::Uniform => {
                vec![(self.tau_max / self.stages as f64).sqrt(); self.stages]
            }
            DistributionKind::Logarithmic { c } => log_mu_unchecked(self.stages, c, self.tau_max),
        };
        TimeConstants(mu)
    }
}

/// Per-stage time constants of a continuous cascade. All entries are
/// strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeConstants(Vec<f64>);

impl TimeConstants {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::invalid("time constant list is empty"));
        }
        if let Some(bad) = mu.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::invalid(format!(
                "time constants must be finite and positive, got {bad}"
            )));
        }
        Ok(TimeConstants(mu))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Temporal mean of the composed kernel.
    pub fn mean(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Temporal variance of the composed kernel.
    pub fn variance(&self) -> f64 {
        self.0.iter().map(|m| m * m).sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for TimeConstants {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn validate_common(stages: usize, tau_max: f64) -> Result<()> {
    if stages == 0 {
        return Err(Error::invalid("number of stages K must be at least 1"));
    }
    if !(tau_max.is_finite() && tau_max > 0.0) {
        return Err(Error::invalid(format!(
            "tau_max must be finite and positive, got {tau_max}"
        )));
    }
    Ok(())
}

fn validate_c(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 1.0) {
        return Err(Error::invalid(format!(
            "distribution parameter c must exceed 1, got {c}"
        )));
    }
    Ok(())
}

fn log_levels_unchecked(stages: usize, c: f64, tau_max: f64) -> Vec<f64> {
    let k_max = stages as i32;
    (1..=k_max)
        .map(|k| c.powi(2 * (k - k_max)) * tau_max)
        .collect()
}

fn uniform_levels_unchecked(stages: usize, tau_max: f64) -> Vec<f64> {
    (1..=stages)
        .map(|k| k as f64 / stages as f64 * tau_max)
        .collect()
}

fn log_mu_unchecked(stages: usize, c: f64, tau_max: f64) -> Vec<f64> {
    let k_max = stages as i32;
    let root_tau = tau_max.sqrt();
    let spread = (c * c - 1.0).sqrt();
    (1..=k_max)
        .map(|k| {
            if k == 1 {
                c.powi(1 - k_max) * root_tau
            } else {
                c.powi(k - k_max - 1) * spread * root_tau
            }
        })
        .collect()
}

/// Geometric levels `tau_k = c^(2(k-K)) tau_max`, `k = 1..=K`.
pub fn log_scale_levels(stages: usize, c: f64, tau_max: f64) -> Result<Vec<f64>> {
    validate_common(stages, tau_max)?;
    validate_c(c)?;
    Ok(log_levels_unchecked(stages, c, tau_max))
}

/// Uniform levels `tau_k = k/K tau_max`.
pub fn uniform_scale_levels(stages: usize, tau_max: f64) -> Result<Vec<f64>> {
    validate_common(stages, tau_max)?;
    Ok(uniform_levels_unchecked(stages, tau_max))
}

/// Time constants for the geometric placement:
/// `mu_1 = c^(1-K) sqrt(tau_max)`, `mu_k = c^(k-K-1) sqrt(c^2-1) sqrt(tau_max)`.
pub fn log_time_constants(stages: usize, c: f64, tau_max: f64) -> Result<TimeConstants> {
    Ok(ScaleDistribution::logarithmic(stages, c, tau_max)?.time_constants())
}

/// `K` equal time constants `sqrt(tau_max / K)`.
pub fn uniform_time_constants(stages: usize, tau_max: f64) -> Result<TimeConstants> {
    Ok(ScaleDistribution::uniform(stages, tau_max)?.time_constants())
}

/// The distribution parameter that puts the finest level exactly at `tau_min`.
pub fn distribution_param_from_range(tau_min: f64, tau_max: f64, stages: usize) -> Result<f64> {
    if stages < 2 {
        return Err(Error::invalid("a range needs at least K = 2 stages"));
    }
    if !(tau_min.is_finite() && tau_max.is_finite() && tau_min > 0.0 && tau_min < tau_max) {
        return Err(Error::invalid(format!(
            "need 0 < tau_min < tau_max, got tau_min = {tau_min}, tau_max = {tau_max}"
        )));
    }
    Ok((tau_max / tau_min).powf(1.0 / (2.0 * (stages as f64 - 1.0))))
}
