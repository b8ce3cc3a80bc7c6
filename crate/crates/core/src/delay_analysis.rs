//! Temporal delay of time-causal cascades.
//!
//! Two delay measures are provided: the temporal mean of the composed kernel
//! and the position of its maximum. The mean has closed forms for both
//! distributions; the maximum has a closed form only for equal time
//! constants and is otherwise located numerically.

use std::fmt::Write as _;

use crate::discrete_temporal::{filter_sequence, DiscreteCascadeSpec};
use crate::scale_distribution::{DistributionKind, ScaleDistribution, TimeConstants};
use crate::temporal_kernels::KernelCascade;
use crate::{Error, Result};

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

fn check_stages(stages: usize, min: usize) -> Result<()> {
    if stages < min {
        return Err(Error::invalid(format!(
            "number of stages K must be at least {min}, got {stages}"
        )));
    }
    Ok(())
}

fn check_c(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 1.0) {
        return Err(Error::invalid(format!(
            "distribution parameter c must exceed 1, got {c}"
        )));
    }
    Ok(())
}

/// `sqrt(K tau)`.
pub fn mean_delay_uniform(stages: usize, tau: f64) -> Result<f64> {
    check_stages(stages, 1)?;
    check_tau(tau)?;
    Ok((stages as f64 * tau).sqrt())
}

/// Closed-form temporal mean for the logarithmic distribution.
pub fn mean_delay_log(stages: usize, c: f64, tau: f64) -> Result<f64> {
    check_stages(stages, 2)?;
    check_c(c)?;
    check_tau(tau)?;
    let spread = (c * c - 1.0).sqrt();
    let k = stages as i32;
    let numer = c * c - (spread + 1.0) * c + spread * c.powi(k);
    Ok(c.powi(-k) * numer / (c - 1.0) * tau.sqrt())
}

/// `sqrt(c^2 - 1) / (c - 1) sqrt(tau)`, the mean delay as `K -> inf`.
pub fn mean_delay_log_limit(c: f64, tau: f64) -> Result<f64> {
    check_c(c)?;
    check_tau(tau)?;
    Ok((c * c - 1.0).sqrt() / (c - 1.0) * tau.sqrt())
}

/// `(K-1) / sqrt(K) sqrt(tau)`, the kernel maximum for equal time constants.
pub fn tmax_uniform(stages: usize, tau: f64) -> Result<f64> {
    check_stages(stages, 1)?;
    check_tau(tau)?;
    Ok((stages as f64 - 1.0) / (stages as f64).sqrt() * tau.sqrt())
}

/// Position of the maximum of the composed kernel.
///
/// The cascade density is log-concave, so its derivative changes sign once,
/// and the mode lies below the mean. The sign change of `h'` is located by
/// bisection on `[0, mean]`.
pub fn tmax_numeric(mu: &TimeConstants) -> Result<f64> {
    if mu.len() < 2 {
        return Ok(0.0);
    }
    let kernel = KernelCascade::new(mu.clone());
    let (mut lo, mut hi) = (0.0, kernel.mean());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kernel.derivative(mid, 1)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One cell of the delay tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayReport {
    pub stages: usize,
    pub distribution: DistributionKind,
    /// Temporal mean, in units of `sqrt(tau)`.
    pub mean_delay: f64,
    /// Position of the kernel maximum, in units of `sqrt(tau)`.
    pub tmax_delay: f64,
}

impl DelayReport {
    pub fn compute(stages: usize, distribution: DistributionKind) -> Result<Self> {
        let (mean_delay, tmax_delay) = match distribution {
            DistributionKind::Uniform => {
                (mean_delay_uniform(stages, 1.0)?, tmax_uniform(stages, 1.0)?)
            }
            DistributionKind::Logarithmic { c } => {
                // A single stage is the same kernel under either placement.
                let mean = if stages == 1 {
                    mean_delay_uniform(1, 1.0)?
                } else {
                    mean_delay_log(stages, c, 1.0)?
                };
                let mu = ScaleDistribution::logarithmic(stages, c, 1.0)?.time_constants();
                (mean, tmax_numeric(&mu)?)
            }
        };
        Ok(DelayReport {
            stages,
            distribution,
            mean_delay,
            tmax_delay,
        })
    }
}

/// Rows over `K`, columns uniform followed by each `c`.
#[derive(Debug, Clone)]
pub struct DelayTable {
    pub columns: Vec<DistributionKind>,
    pub rows: Vec<Vec<DelayReport>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayMeasure {
    Mean,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
}

/// Rounds half away from zero at three decimals, then formats.
pub fn format_3dp(x: f64) -> String {
    let scaled = x * 1000.0;
    let rounded = (scaled.abs() + 0.5 + 1e-9).floor().copysign(scaled) / 1000.0;
    format!("{rounded:.3}")
}

fn column_label(kind: DistributionKind, measure: DelayMeasure) -> String {
    let base = match measure {
        DelayMeasure::Mean => "m",
        DelayMeasure::Maximum => "t_max",
    };
    match kind {
        DistributionKind::Uniform => format!("{base}_uni"),
        DistributionKind::Logarithmic { c } => format!("{base}_log(c={})", format_c(c)),
    }
}

fn format_c(c: f64) -> String {
    if (c - 2f64.sqrt()).abs() < 1e-12 {
        "sqrt2".into()
    } else if (c - 2f64.powf(0.75)).abs() < 1e-12 {
        "2^0.75".into()
    } else {
        format!("{c}")
    }
}

impl DelayTable {
    pub fn value(&self, row: usize, col: usize, measure: DelayMeasure) -> f64 {
        let r = &self.rows[row][col];
        match measure {
            DelayMeasure::Mean => r.mean_delay,
            DelayMeasure::Maximum => r.tmax_delay,
        }
    }

    pub fn render(&self, measure: DelayMeasure, format: TableFormat) -> String {
        let mut header = vec!["K".to_string()];
        header.extend(self.columns.iter().map(|k| column_label(*k, measure)));
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut cells = vec![row[0].stages.to_string()];
                cells.extend((0..row.len()).map(|j| format_3dp(self.value(i, j, measure))));
                cells
            })
            .collect();

        let mut out = String::new();
        match format {
            TableFormat::Csv => {
                let _ = writeln!(out, "{}", header.join(","));
                for cells in &body {
                    let _ = writeln!(out, "{}", cells.join(","));
                }
            }
            TableFormat::Text => {
                let widths: Vec<usize> = (0..header.len())
                    .map(|j| {
                        body.iter()
                            .map(|c| c[j].len())
                            .chain(std::iter::once(header[j].len()))
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |cells: &[String]| -> String {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                let _ = writeln!(out, "{}", line(&header));
                for cells in &body {
                    let _ = writeln!(out, "{}", line(cells));
                }
            }
        }
        out
    }
}

/// Builds both delay tables for `K` in `stages` and the given `c` values.
/// Table cells are independent and computed in parallel.
pub fn render_delay_tables(stages: &[usize], c_list: &[f64]) -> Result<DelayTable> {
    use rayon::prelude::*;

    let mut columns = vec![DistributionKind::Uniform];
    columns.extend(c_list.iter().map(|&c| DistributionKind::Logarithmic { c }));
    let rows = stages
        .par_iter()
        .map(|&k| {
            columns
                .iter()
                .map(|&kind| DelayReport::compute(k, kind))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DelayTable { columns, rows })
}

/// Delay, in samples, of the maximum of the first-order temporal derivative
/// of the discrete cascade's response to a unit step at sample 0.
///
/// The peak index is refined by a parabola through its two neighbours.
pub fn step_response_delay(cascade: &DiscreteCascadeSpec, horizon: usize) -> Result<f64> {
    if horizon < 3 {
        return Err(Error::invalid("horizon must be at least 3 samples"));
    }
    let step = vec![1.0; horizon];
    let response = filter_sequence(cascade, &step)
        .pop()
        .expect("cascade has at least one stage");
    // Causal difference with the zero state before the onset.
    let rate: Vec<f64> = std::iter::once(response[0])
        .chain(response.windows(2).map(|w| w[1] - w[0]))
        .collect();
    let (peak, _) = rate
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    if peak + 1 >= horizon {
        return Err(Error::NoMaximumFound { horizon });
    }
    if peak == 0 {
        return Ok(0.0);
    }
    let (a, b, c) = (rate[peak - 1], rate[peak], rate[peak + 1]);
    let curvature = a - 2.0 * b + c;
    let offset = if curvature < 0.0 {
        0.5 * (a - c) / curvature
    } else {
        0.0
    };
    Ok(peak as f64 + offset)
}
