//! Time-recursive temporal scale-space over sampled time.
//!
//! Each stage is the first-order recursive filter
//!
//! ```text
//! y(t) = y(t-1) + (x(t) - y(t-1)) / (1 + mu)
//! ```
//!
//! whose impulse response is geometric with mean `mu` and variance
//! `mu^2 + mu`. Stage time constants are chosen so that the variance added by
//! stage `k` equals `tau_k - tau_{k-1}`; the cascade therefore reproduces the
//! continuous level variances exactly. The retained stage outputs are the
//! entire memory of the past.

use rayon::prelude::*;

use crate::scale_distribution::ScaleDistribution;
use crate::{Error, Frame, Result};

/// Pixel count above which stage updates are split across worker threads.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// `tau = r^2 sigma_t^2`: temporal variance in units of frames squared.
pub fn tau_from_seconds(sigma_t: f64, frame_rate: f64) -> Result<f64> {
    if !(sigma_t.is_finite() && sigma_t >= 0.0) {
        return Err(Error::invalid(format!(
            "sigma_t must be >= 0, got {sigma_t}"
        )));
    }
    if !(frame_rate.is_finite() && frame_rate > 0.0) {
        return Err(Error::invalid(format!(
            "frame rate must be positive, got {frame_rate}"
        )));
    }
    Ok(frame_rate * frame_rate * sigma_t * sigma_t)
}

/// Discrete time constant whose geometric kernel has variance `delta_tau`.
pub fn mu_from_variance_increment(delta_tau: f64) -> f64 {
    ((1.0 + 4.0 * delta_tau).sqrt() - 1.0) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCascadeSpec {
    mu: Vec<f64>,
    tau_levels: Vec<f64>,
}

impl DiscreteCascadeSpec {
    /// Cascade with explicit discrete time constants (`mu = 0` is an identity stage).
    pub fn from_mu(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::invalid("cascade needs at least one stage"));
        }
        if let Some(bad) = mu.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::invalid(format!(
                "discrete time constants must be >= 0, got {bad}"
            )));
        }
        let tau_levels = mu
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m * m + m;
                Some(*acc)
            })
            .collect();
        Ok(DiscreteCascadeSpec { mu, tau_levels })
    }

    /// Cascade reaching the given cumulative variances (sample^2 units).
    pub fn from_levels(levels: &[f64]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("cascade needs at least one level"));
        }
        let mut prev = 0.0;
        let mut mu = Vec::with_capacity(levels.len());
        for &tau in levels {
            if !(tau.is_finite() && tau >= prev) {
                return Err(Error::invalid(format!(
                    "scale levels must be finite and non-decreasing, got {tau} after {prev}"
                )));
            }
            mu.push(mu_from_variance_increment(tau - prev));
            prev = tau;
        }
        Ok(DiscreteCascadeSpec {
            mu,
            tau_levels: levels.to_vec(),
        })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn tau_levels(&self) -> &[f64] {
        &self.tau_levels
    }

    pub fn stages(&self) -> usize {
        self.mu.len()
    }

    /// Variance of the full cascade, `sum (mu_k^2 + mu_k)`.
    pub fn variance(&self) -> f64 {
        self.mu.iter().map(|m| m * m + m).sum()
    }

    /// Mean of the full cascade, `sum mu_k`.
    pub fn mean(&self) -> f64 {
        self.mu.iter().sum()
    }
}

/// Discrete cascade for a distribution whose `tau_max` is already in
/// sample^2 units.
pub fn build_cascade(dist: &ScaleDistribution) -> Result<DiscreteCascadeSpec> {
    DiscreteCascadeSpec::from_levels(&dist.levels())
}

/// How the cascade state is set before the first frame arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Startup {
    /// All levels start at zero.
    #[default]
    Zero,
    /// All levels start at the first frame, as if it had been shown forever.
    FirstFrame,
}

/// The `K` retained temporal levels for every pixel.
#[derive(Debug, Clone)]
pub struct RecursiveCascadeState {
    gains: Vec<f64>,
    levels: Vec<Frame>,
    startup: Startup,
    started: bool,
}

impl RecursiveCascadeState {
    pub fn new(spec: &DiscreteCascadeSpec, width: usize, height: usize, startup: Startup) -> Self {
        RecursiveCascadeState {
            gains: spec.mu.iter().map(|m| 1.0 / (1.0 + m)).collect(),
            levels: vec![Frame::zeros(width, height); spec.stages()],
            startup,
            started: false,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.levels[0].shape()
    }

    pub fn stages(&self) -> usize {
        self.levels.len()
    }

    /// Current levels, i.e. `L(t; tau_k)` after the most recent step.
    pub fn levels(&self) -> &[Frame] {
        &self.levels
    }

    /// Advances every level by one frame and returns the updated levels.
    pub fn step(&mut self, frame: &Frame) -> Result<&[Frame]> {
        frame.check_shape(self.shape())?;
        if !self.started && self.startup == Startup::FirstFrame {
            for level in &mut self.levels {
                level.as_mut_slice().copy_from_slice(frame.as_slice());
            }
        }
        self.started = true;

        let parallel = frame.len() >= PARALLEL_THRESHOLD;
        for k in 0..self.levels.len() {
            let gain = self.gains[k];
            let (done, rest) = self.levels.split_at_mut(k);
            let input = if k == 0 {
                frame.as_slice()
            } else {
                done[k - 1].as_slice()
            };
            let output = rest[0].as_mut_slice();
            let update = |(y, x): (&mut f64, &f64)| *y += (x - *y) * gain;
            if parallel {
                output.par_iter_mut().zip(input.par_iter()).for_each(update);
            } else {
                output.iter_mut().zip(input.iter()).for_each(update);
            }
        }
        Ok(&self.levels)
    }
}

/// Runs a 1-D signal through the cascade from zero state and returns the
/// output sequence of every stage.
pub fn filter_sequence(spec: &DiscreteCascadeSpec, signal: &[f64]) -> Vec<Vec<f64>> {
    let mut outputs = Vec::with_capacity(spec.stages());
    let mut input = signal.to_vec();
    for &m in &spec.mu {
        let gain = 1.0 / (1.0 + m);
        let mut y = 0.0;
        let out: Vec<f64> = input
            .iter()
            .map(|&x| {
                y += (x - y) * gain;
                y
            })
            .collect();
        input.clone_from(&out);
        outputs.push(out);
    }
    outputs
}

/// Per-stage responses to a unit impulse at sample 0, `n` samples long.
pub fn impulse_response(spec: &DiscreteCascadeSpec, n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::invalid("impulse response length must be >= 1"));
    }
    let mut impulse = vec![0.0; n];
    impulse[0] = 1.0;
    Ok(filter_sequence(spec, &impulse))
}

/// Causal backward differences. Entry `i` of the result belongs to sample
/// `i + order` of the input: `y(t) - y(t-1)` or `y(t) - 2 y(t-1) + y(t-2)`.
pub fn temporal_derivative(sequence: &[f64], order: u8) -> Result<Vec<f64>> {
    let needed = match order {
        1 | 2 => order as usize + 1,
        _ => {
            return Err(Error::invalid(format!(
                "temporal derivative order must be 1 or 2, got {order}"
            )))
        }
    };
    if sequence.len() < needed {
        return Err(Error::InsufficientHistory {
            needed,
            available: sequence.len(),
        });
    }
    Ok(match order {
        1 => sequence.windows(2).map(|w| w[1] - w[0]).collect(),
        _ => sequence
            .windows(3)
            .map(|w| w[2] - 2.0 * w[1] + w[0])
            .collect(),
    })
}

/// Sample mean and variance of a nonnegative sequence treated as a
/// distribution over sample indices.
pub fn sequence_moments(seq: &[f64]) -> (f64, f64, f64) {
    let mass: f64 = seq.iter().sum();
    let mean = seq
        .iter()
        .enumerate()
        .map(|(i, v)| i as f64 * v)
        .sum::<f64>()
        / mass;
    let var = seq
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64 - mean).powi(2) * v)
        .sum::<f64>()
        / mass;
    (mass, mean, var)
}
