//! Physical receptive field descriptions and sampled kernels.
//!
//! A [`ReceptiveFieldSpec`] is given in visual-field units (degrees,
//! seconds, degrees per millisecond) and converted to pixel and frame units
//! with a sampling density `p` (pixels per degree) and frame rate `r`.

use crate::discrete_spatial::s_from_degrees;
use crate::discrete_temporal::{
    build_cascade, impulse_response, tau_from_seconds, DiscreteCascadeSpec,
};
use crate::engine::{DerivativeOp, Engine, EngineConfig, FeatureFrame, VelocityAdaptedEngine};
use crate::scale_distribution::{DistributionKind, ScaleDistribution};
use crate::warp::Interpolation;
use crate::{Error, Frame, Result};

pub const DEFAULT_PIXELS_PER_DEGREE: f64 = 10.0;
pub const DEFAULT_FRAME_RATE: f64 = 62.5;
pub const DEFAULT_STAGES: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct ReceptiveFieldSpec {
    pub op: DerivativeOp,
    /// Spatial standard deviation in degrees.
    pub sigma_x: f64,
    /// Temporal standard deviation in seconds.
    pub sigma_t: f64,
    /// Image velocity in degrees per millisecond.
    pub velocity: (f64, f64),
    pub distribution: DistributionKind,
    pub stages: usize,
    pub pixels_per_degree: f64,
    pub frame_rate: f64,
}

impl ReceptiveFieldSpec {
    pub fn new(op: DerivativeOp, sigma_x: f64, sigma_t: f64) -> Self {
        ReceptiveFieldSpec {
            op,
            sigma_x,
            sigma_t,
            velocity: (0.0, 0.0),
            distribution: DistributionKind::Logarithmic {
                c: std::f64::consts::SQRT_2,
            },
            stages: DEFAULT_STAGES,
            pixels_per_degree: DEFAULT_PIXELS_PER_DEGREE,
            frame_rate: DEFAULT_FRAME_RATE,
        }
    }

    pub fn with_velocity(mut self, v1: f64, v2: f64) -> Self {
        self.velocity = (v1, v2);
        self
    }

    pub fn validate(&self) -> Result<()> {
        DerivativeOp::new(self.op.x1, self.op.x2, self.op.t)?;
        if !(self.sigma_t.is_finite() && self.sigma_t > 0.0) {
            return Err(Error::invalid(format!(
                "sigma_t must be positive, got {}",
                self.sigma_t
            )));
        }
        if !(self.velocity.0.is_finite() && self.velocity.1.is_finite()) {
            return Err(Error::invalid("velocity must be finite"));
        }
        s_from_degrees(self.sigma_x, self.pixels_per_degree)?;
        tau_from_seconds(self.sigma_t, self.frame_rate)?;
        self.scale_distribution().map(|_| ())
    }

    /// `s` in pixel^2.
    pub fn spatial_variance(&self) -> Result<f64> {
        s_from_degrees(self.sigma_x, self.pixels_per_degree)
    }

    /// `tau` in frames^2.
    pub fn temporal_variance(&self) -> Result<f64> {
        tau_from_seconds(self.sigma_t, self.frame_rate)
    }

    pub fn velocity_pixels_per_frame(&self) -> (f64, f64) {
        let k = self.pixels_per_degree * 1000.0 / self.frame_rate;
        (self.velocity.0 * k, self.velocity.1 * k)
    }

    pub fn scale_distribution(&self) -> Result<ScaleDistribution> {
        ScaleDistribution::new(self.distribution, self.stages, self.temporal_variance()?)
    }

    pub fn cascade(&self) -> Result<DiscreteCascadeSpec> {
        build_cascade(&self.scale_distribution()?)
    }

    /// True when the field does not vary along x2 and can be sampled on a
    /// single row.
    pub fn is_one_dimensional(&self) -> bool {
        self.op.x2 == 0 && self.velocity.1 == 0.0
    }

    /// Half width (pixels) and frame count that capture the kernel support:
    /// all but `1e-9` of the temporal mass and five spatial standard
    /// deviations beyond the drift.
    pub fn default_extent(&self) -> Result<(usize, usize)> {
        let cascade = self.cascade()?;
        let horizon = (cascade.mean() + 50.0 * cascade.variance().sqrt()).ceil() as usize + 2;
        let response = impulse_response(&cascade, horizon)?;
        let top = response.last().expect("at least one stage");
        let mut mass = 0.0;
        let frames = top
            .iter()
            .position(|v| {
                mass += v;
                mass >= 1.0 - 1e-9
            })
            .map_or(horizon, |i| i + 1);
        let sigma = self.spatial_variance()?.sqrt();
        let (v1, v2) = self.velocity_pixels_per_frame();
        let drift = v1.abs().max(v2.abs()) * frames as f64;
        Ok(((5.0 * sigma + drift).ceil() as usize + 4, frames))
    }
}

/// Receptive field response to a unit impulse at the domain centre.
#[derive(Debug, Clone, PartialEq)]
pub struct RfKernel {
    pub half_width: usize,
    /// One grid per frame, `2 * half_width + 1` columns wide.
    pub volume: Vec<Frame>,
}

impl RfKernel {
    pub fn width(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Slice through the centre row: columns are `x1`, rows are frames.
    pub fn xt_map(&self) -> Frame {
        let w = self.width();
        let mut data = Vec::with_capacity(w * self.volume.len());
        for f in &self.volume {
            data.extend_from_slice(f.row(f.height() / 2));
        }
        Frame::from_vec(w, self.volume.len(), data).expect("rows share the width")
    }

    fn scaled(mut self, factor: f64) -> Self {
        if factor != 1.0 {
            for f in &mut self.volume {
                for v in f.as_mut_slice() {
                    *v *= factor;
                }
            }
        }
        self
    }
}

/// Samples the discrete kernel by feeding an impulse through the pipeline.
pub fn sample_rf_kernel(
    spec: &ReceptiveFieldSpec,
    half_width: usize,
    frames: usize,
) -> Result<RfKernel> {
    spec.validate()?;
    if frames == 0 {
        return Err(Error::invalid("frame count must be positive"));
    }
    let w = 2 * half_width + 1;
    let h = if spec.is_one_dimensional() { 1 } else { w };
    let cascade = spec.cascade()?;
    let config = EngineConfig::new(spec.spatial_variance()?, cascade).with_ops(vec![spec.op]);
    let v = spec.velocity_pixels_per_frame();

    let mut plain;
    let mut adapted;
    let step: &mut dyn FnMut(&Frame) -> Result<Vec<FeatureFrame>> = if v == (0.0, 0.0) {
        plain = Engine::new(config)?;
        &mut move |f| plain.process_frame(f)
    } else {
        adapted = VelocityAdaptedEngine::new(config, v, Interpolation::Linear)?;
        &mut move |f| adapted.process_frame(f)
    };

    let mut impulse = Frame::zeros(w, h);
    impulse.set(half_width, h / 2, 1.0);
    let blank = Frame::zeros(w, h);
    let mut volume = Vec::with_capacity(frames);
    for t in 0..frames {
        let mut out = step(if t == 0 { &impulse } else { &blank })?;
        volume.push(out.swap_remove(0).maps.swap_remove(0).map);
    }
    Ok(RfKernel { half_width, volume })
}

/// A named receptive field with a display sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub label: &'static str,
    pub sign: f64,
    pub spec: ReceptiveFieldSpec,
}

impl Preset {
    pub fn sample(&self, half_width: usize, frames: usize) -> Result<RfKernel> {
        Ok(sample_rf_kernel(&self.spec, half_width, frames)?.scaled(self.sign))
    }
}

pub const PRESET_NAMES: [&str; 4] = ["a", "b", "c", "d"];

/// Looks up one of the four example fields `a` to `d`.
pub fn preset(name: &str) -> Result<Preset> {
    let op = |s: &str| s.parse::<DerivativeOp>().expect("valid literal");
    let p = match name {
        "a" => Preset {
            name: "a",
            label: "h_xt",
            sign: 1.0,
            spec: ReceptiveFieldSpec::new(op("xt"), 0.6, 0.06),
        },
        "b" => Preset {
            name: "b",
            label: "-h_xxt",
            sign: -1.0,
            spec: ReceptiveFieldSpec::new(op("xxt"), 0.6, 0.08),
        },
        "c" => Preset {
            name: "c",
            label: "h_xx (velocity adapted)",
            sign: 1.0,
            spec: ReceptiveFieldSpec::new(op("xx"), 0.7, 0.05).with_velocity(0.007, 0.0),
        },
        "d" => Preset {
            name: "d",
            label: "-h_xxx (velocity adapted)",
            sign: -1.0,
            spec: ReceptiveFieldSpec::new(op("xxx"), 0.5, 0.08).with_velocity(0.004, 0.0),
        },
        other => {
            return Err(Error::invalid(format!(
                "unknown preset '{other}', expected one of a, b, c, d"
            )))
        }
    };
    Ok(p)
}
