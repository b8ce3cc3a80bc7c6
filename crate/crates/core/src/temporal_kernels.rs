//! Continuous time-causal kernels: truncated exponentials and their cascades.
//!
//! A cascade of `K` truncated exponentials with time constants `mu_k` has the
//! Laplace transform `prod 1 / (1 + mu_k q)`, temporal mean `sum mu_k` and
//! temporal variance `sum mu_k^2`. The time-domain kernel is evaluated along
//! one of three routes depending on how the time constants cluster:
//!
//! - all equal: `t^(K-1) e^(-t/mu) / (mu^K (K-1)!)`;
//! - all distinct: partial fractions `sum B_k e^(-t/mu_k)` with
//!   `B_k = mu_k^(K-2) / prod_{j != k} (mu_k - mu_j)`;
//! - mixed (some near-equal pairs): uniformization of the integrator chain,
//!   a Poisson-weighted series with nonnegative terms only.

use num_complex::Complex64;

use crate::scale_distribution::TimeConstants;
use crate::{Error, Result};

/// Relative gap below which two time constants are treated as identical.
const EQUAL_GAP: f64 = 1e-12;
/// Relative gap below which partial fractions are considered ill-conditioned.
const NEAR_EQUAL_GAP: f64 = 1e-6;
/// Hard floor for the explicit partial-fraction entry point.
const PARTIAL_FRACTION_MIN_GAP: f64 = 1e-9;
const POLE_TOLERANCE: f64 = 1e-14;

/// `(1/mu) e^(-t/mu)` for `t >= 0`, zero before the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedExponential {
    mu: f64,
}

impl TruncatedExponential {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::invalid(format!(
                "time constant must be positive, got {mu}"
            )));
        }
        Ok(TruncatedExponential { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            (-t / self.mu).exp() / self.mu
        }
    }
}

pub fn eval_trunc_exp(t: f64, mu: f64) -> Result<f64> {
    Ok(TruncatedExponential::new(mu)?.eval(t))
}

/// `prod_k 1 / (1 + mu_k q)`.
pub fn laplace_cascade(q: Complex64, mu: &[f64]) -> Result<Complex64> {
    let mut gain = Complex64::new(1.0, 0.0);
    for (stage, &m) in mu.iter().enumerate() {
        let denom = Complex64::new(1.0, 0.0) + q * m;
        if denom.norm() < POLE_TOLERANCE {
            return Err(Error::PoleEvaluation {
                stage,
                magnitude: denom.norm(),
            });
        }
        gain /= denom;
    }
    Ok(gain)
}

/// Temporal mean `sum mu_k` and variance `sum mu_k^2` of the composed kernel.
pub fn cascade_mean_variance(mu: &[f64]) -> Result<(f64, f64)> {
    if mu.is_empty() {
        return Err(Error::invalid("time constant list is empty"));
    }
    Ok((mu.iter().sum(), mu.iter().map(|m| m * m).sum()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CascadeClass {
    AllEqual,
    AllDistinct,
    Mixed,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.max(b)
}

/// Classifies a list of positive time constants by its tightest and
/// loosest pairwise relative gaps.
pub fn classify(mu: &[f64]) -> CascadeClass {
    let mut min_gap = f64::INFINITY;
    let mut max_gap: f64 = 0.0;
    for (i, &a) in mu.iter().enumerate() {
        for &b in &mu[i + 1..] {
            let gap = relative_gap(a, b);
            min_gap = min_gap.min(gap);
            max_gap = max_gap.max(gap);
        }
    }
    if max_gap < EQUAL_GAP {
        CascadeClass::AllEqual
    } else if min_gap >= NEAR_EQUAL_GAP {
        CascadeClass::AllDistinct
    } else {
        CascadeClass::Mixed
    }
}

#[derive(Debug, Clone)]
enum Route {
    Equal { mu: f64 },
    Distinct { coeffs: Vec<f64> },
    Uniformized,
}

/// The composed kernel of a cascade of truncated exponentials.
#[derive(Debug, Clone)]
pub struct KernelCascade {
    mu: TimeConstants,
    class: CascadeClass,
    route: Route,
}

impl KernelCascade {
    pub fn new(mu: TimeConstants) -> Self {
        let class = classify(&mu);
        let route = match class {
            CascadeClass::AllEqual => Route::Equal {
                mu: mu.mean() / mu.len() as f64,
            },
            CascadeClass::AllDistinct => Route::Distinct {
                coeffs: partial_fraction_coeffs(&mu),
            },
            CascadeClass::Mixed => Route::Uniformized,
        };
        KernelCascade { mu, class, route }
    }

    pub fn time_constants(&self) -> &TimeConstants {
        &self.mu
    }

    pub fn class(&self) -> CascadeClass {
        self.class
    }

    pub fn stages(&self) -> usize {
        self.mu.len()
    }

    pub fn mean(&self) -> f64 {
        self.mu.mean()
    }

    pub fn variance(&self) -> f64 {
        self.mu.variance()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_order(t, 0).max(0.0)
    }

    /// First or second time derivative of the kernel.
    pub fn derivative(&self, t: f64, order: u8) -> Result<f64> {
        if !(1..=2).contains(&order) {
            return Err(Error::invalid(format!(
                "derivative order must be 1 or 2, got {order}"
            )));
        }
        Ok(self.eval_order(t, order))
    }

    fn eval_order(&self, t: f64, order: u8) -> f64 {
        if t < 0.0 || !t.is_finite() {
            return 0.0;
        }
        match &self.route {
            Route::Equal { mu } => equal_mu_derivative(t, *mu, self.mu.len(), order),
            Route::Distinct { coeffs } => distinct_mu_derivative(t, &self.mu, coeffs, order),
            Route::Uniformized => uniformized_derivative(t, &self.mu, order),
        }
    }
}

pub fn eval_cascade(t: f64, mu: &TimeConstants) -> f64 {
    KernelCascade::new(mu.clone()).eval(t)
}

pub fn eval_cascade_derivative(t: f64, mu: &TimeConstants, order: u8) -> Result<f64> {
    KernelCascade::new(mu.clone()).derivative(t, order)
}

/// Evaluates the kernel or one of its first two derivatives through the
/// uniformized series, whatever the spacing of the time constants.
pub fn eval_uniformized(t: f64, mu: &TimeConstants, order: u8) -> Result<f64> {
    if order > 2 {
        return Err(Error::invalid(format!(
            "derivative order must be 0, 1 or 2, got {order}"
        )));
    }
    if t < 0.0 || !t.is_finite() {
        return Ok(0.0);
    }
    Ok(uniformized_derivative(t, mu, order))
}

/// Evaluates the kernel strictly through partial fractions. Fails when two
/// time constants are too close for the expansion to be trusted.
pub fn eval_partial_fractions(t: f64, mu: &TimeConstants) -> Result<f64> {
    for (i, &a) in mu.iter().enumerate() {
        for &b in &mu[i + 1..] {
            if relative_gap(a, b) < PARTIAL_FRACTION_MIN_GAP {
                return Err(Error::NumericInstability { a, b });
            }
        }
    }
    if t < 0.0 {
        return Ok(0.0);
    }
    let coeffs = partial_fraction_coeffs(mu);
    Ok(distinct_mu_derivative(t, mu, &coeffs, 0))
}

fn partial_fraction_coeffs(mu: &[f64]) -> Vec<f64> {
    let k = mu.len() as i32;
    mu.iter()
        .enumerate()
        .map(|(i, &mi)| {
            let denom: f64 = mu
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &mj)| mi - mj)
                .product();
            mi.powi(k - 2) / denom
        })
        .collect()
}

fn distinct_mu_derivative(t: f64, mu: &[f64], coeffs: &[f64], order: u8) -> f64 {
    mu.iter()
        .zip(coeffs)
        .map(|(&m, &b)| b * (-1.0 / m).powi(order as i32) * (-t / m).exp())
        .sum()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// n-th derivative of `t^(K-1) e^(-t/mu) / (mu^K (K-1)!)` via Leibniz.
fn equal_mu_derivative(t: f64, mu: f64, stages: usize, order: u8) -> f64 {
    let power = stages - 1;
    let ln_norm = -(stages as f64) * mu.ln() - ln_factorial(power);
    let decay = (ln_norm - t / mu).exp();
    let n = order as usize;
    let mut acc = 0.0;
    for j in 0..=n.min(power) {
        let binom = match (n, j) {
            (2, 1) => 2.0,
            _ => 1.0,
        };
        let falling: f64 = (0..j).map(|i| (power - i) as f64).product();
        let t_pow = t.powi((power - j) as i32);
        acc += binom * falling * t_pow * (-1.0 / mu).powi((n - j) as i32);
    }
    acc * decay
}

/// Integrates the chain `x_k' = (x_{k-1} - x_k) / mu_k` after an impulse into
/// the first stage, by uniformization: with `lambda = max 1/mu_k` and
/// `P = I + A/lambda` (entrywise nonnegative),
/// `exp(A t) = sum_n Poisson(n; lambda t) P^n`.
fn uniformized_state(t: f64, mu: &[f64]) -> Vec<f64> {
    let k = mu.len();
    let lambda = mu.iter().map(|m| 1.0 / m).fold(0.0, f64::max);
    let stay: Vec<f64> = mu.iter().map(|m| 1.0 - 1.0 / (m * lambda)).collect();
    let move_in: Vec<f64> = mu.iter().map(|m| 1.0 / (m * lambda)).collect();

    let mut v = vec![0.0; k];
    v[0] = 1.0 / mu[0];
    let rate = lambda * t;
    if rate == 0.0 {
        return v;
    }
    let terms = (rate + 12.0 * rate.sqrt() + 40.0).ceil() as usize;
    let ln_rate = rate.ln();
    let mut ln_weight = -rate;
    let mut acc: Vec<f64> = v.iter().map(|x| x * ln_weight.exp()).collect();
    for n in 1..=terms {
        for i in (1..k).rev() {
            v[i] = stay[i] * v[i] + move_in[i] * v[i - 1];
        }
        v[0] *= stay[0];
        ln_weight += ln_rate - (n as f64).ln();
        let w = ln_weight.exp();
        if w > 0.0 {
            for (a, x) in acc.iter_mut().zip(&v) {
                *a += w * x;
            }
        }
    }
    acc
}

fn uniformized_derivative(t: f64, mu: &[f64], order: u8) -> f64 {
    let x = uniformized_state(t, mu);
    let k = mu.len();
    // (A x)_i = (x_{i-1} - x_i) / mu_i with no input after the impulse.
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..k)
            .map(|i| {
                let upstream = if i == 0 { 0.0 } else { v[i - 1] };
                (upstream - v[i]) / mu[i]
            })
            .collect()
    };
    match order {
        0 => x[k - 1],
        1 => apply(&x)[k - 1],
        _ => apply(&apply(&x))[k - 1],
    }
}
