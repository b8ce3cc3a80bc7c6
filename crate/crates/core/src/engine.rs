//! Frame-by-frame spatio-temporal receptive field responses.
//!
//! Each incoming frame is smoothed spatially with the discrete Gaussian,
//! pushed through the recursive temporal cascade, and differentiated with
//! `delta_t = (-1, 1)`, `delta_tt = (1, -2, 1)`, `delta_x = (-1/2, 0, 1/2)`
//! and `delta_xx = (1, -2, 1)`. Only the cascade levels and, for temporal
//! derivatives, one or two previous copies of each output level are kept.

use std::fmt;
use std::str::FromStr;

use crate::discrete_spatial::{convolve_separable, spatial_derivative, Axis, DiscreteGaussian1D};
use crate::discrete_temporal::{DiscreteCascadeSpec, RecursiveCascadeState, Startup};
use crate::warp::{warp_frame, Interpolation};
use crate::{Error, Frame, Result};

/// Mixed derivative orders of one receptive field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DerivativeOp {
    pub x1: u8,
    pub x2: u8,
    pub t: u8,
}

impl DerivativeOp {
    pub const SMOOTH: DerivativeOp = DerivativeOp { x1: 0, x2: 0, t: 0 };

    pub fn new(x1: u8, x2: u8, t: u8) -> Result<Self> {
        if x1 as u32 + x2 as u32 > 3 {
            return Err(Error::invalid(format!(
                "total spatial order must be <= 3, got {}",
                x1 as u32 + x2 as u32
            )));
        }
        if t > 2 {
            return Err(Error::invalid(format!(
                "temporal order must be <= 2, got {t}"
            )));
        }
        Ok(DerivativeOp { x1, x2, t })
    }
}

impl fmt::Display for DerivativeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::SMOOTH {
            return write!(f, "L");
        }
        write!(
            f,
            "L_{}{}{}",
            "x".repeat(self.x1 as usize),
            "y".repeat(self.x2 as usize),
            "t".repeat(self.t as usize)
        )
    }
}

/// Parses `L`, `L_xt`, `xxt`, `yy`, ... (`x` is axis x1, `y` is axis x2).
impl FromStr for DerivativeOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim();
        let body = body.strip_prefix("L_").unwrap_or(body);
        if body == "L" || body.is_empty() {
            return Ok(Self::SMOOTH);
        }
        let (mut x1, mut x2, mut t) = (0u8, 0u8, 0u8);
        for ch in body.chars() {
            let slot = match ch {
                'x' => &mut x1,
                'y' => &mut x2,
                't' => &mut t,
                _ => return Err(Error::invalid(format!("unknown derivative operator '{s}'"))),
            };
            *slot = slot.saturating_add(1);
        }
        Self::new(x1, x2, t)
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Spatial variance `s` in pixel^2.
    pub spatial_variance: f64,
    /// Lost 2-D mass allowed by kernel truncation.
    pub eps: f64,
    pub cascade: DiscreteCascadeSpec,
    pub ops: Vec<DerivativeOp>,
    /// Zero-based cascade levels to report.
    pub scales: Vec<usize>,
    pub startup: Startup,
}

impl EngineConfig {
    /// Reports the smoothed signal at the coarsest level.
    pub fn new(spatial_variance: f64, cascade: DiscreteCascadeSpec) -> Self {
        let top = cascade.stages() - 1;
        EngineConfig {
            spatial_variance,
            eps: 1e-8,
            cascade,
            ops: vec![DerivativeOp::SMOOTH],
            scales: vec![top],
            startup: Startup::Zero,
        }
    }

    pub fn with_ops(mut self, ops: Vec<DerivativeOp>) -> Self {
        self.ops = ops;
        self
    }

    pub fn with_scales(mut self, scales: Vec<usize>) -> Self {
        self.scales = scales;
        self
    }

    pub fn with_startup(mut self, startup: Startup) -> Self {
        self.startup = startup;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.ops.is_empty() {
            return Err(Error::invalid(
                "at least one derivative operator is required",
            ));
        }
        if self.scales.is_empty() {
            return Err(Error::invalid("at least one output scale is required"));
        }
        if let Some(bad) = self.scales.iter().find(|&&k| k >= self.cascade.stages()) {
            return Err(Error::invalid(format!(
                "scale index {bad} out of range for a {}-stage cascade",
                self.cascade.stages()
            )));
        }
        for op in &self.ops {
            DerivativeOp::new(op.x1, op.x2, op.t)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub op: DerivativeOp,
    pub map: Frame,
}

/// All requested receptive field responses at one scale and one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    pub frame_index: usize,
    pub scale_index: usize,
    /// Temporal variance of this level, in frames^2.
    pub tau: f64,
    /// False during warm-up, while temporal differences still reach back
    /// to the initial state.
    pub reliable: bool,
    pub maps: Vec<FeatureMap>,
}

#[derive(Debug, Clone)]
struct LevelHistory {
    prev: Frame,
    prev2: Frame,
}

/// Separable spatio-temporal pipeline for one stream.
#[derive(Debug, Clone)]
pub struct Engine {
    config: EngineConfig,
    kernel: DiscreteGaussian1D,
    state: Option<RecursiveCascadeState>,
    history: Vec<LevelHistory>,
    max_temporal_order: u8,
    frame_index: usize,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self> {
        config.validate()?;
        let kernel = DiscreteGaussian1D::new(config.spatial_variance, config.eps)?;
        let max_temporal_order = config.ops.iter().map(|op| op.t).max().unwrap_or(0);
        Ok(Engine {
            config,
            kernel,
            state: None,
            history: Vec::new(),
            max_temporal_order,
            frame_index: 0,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Number of frames processed so far.
    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn state(&self) -> Option<&RecursiveCascadeState> {
        self.state.as_ref()
    }

    pub fn warm_up_frames(&self) -> usize {
        (self.max_temporal_order as usize).max(2)
    }

    /// Smooths `frame` spatially; exposed for callers that compose stages.
    pub fn smooth(&self, frame: &Frame) -> Frame {
        convolve_separable(frame, &self.kernel)
    }

    pub fn process_frame(&mut self, frame: &Frame) -> Result<Vec<FeatureFrame>> {
        let smoothed = self.smooth(frame);
        if self.state.is_none() {
            let (w, h) = frame.shape();
            self.state = Some(RecursiveCascadeState::new(
                &self.config.cascade,
                w,
                h,
                self.config.startup,
            ));
            let seed = match self.config.startup {
                Startup::Zero => Frame::zeros(w, h),
                Startup::FirstFrame => smoothed.clone(),
            };
            let keep = if self.max_temporal_order > 0 {
                self.config.scales.len()
            } else {
                0
            };
            self.history = vec![
                LevelHistory {
                    prev: seed.clone(),
                    prev2: seed,
                };
                keep
            ];
        }
        let reliable = self.frame_index >= self.warm_up_frames();
        let state = self.state.as_mut().expect("initialized above");
        let levels = state.step(&smoothed)?;
        let mut out = Vec::with_capacity(self.config.scales.len());
        for (slot, &k) in self.config.scales.iter().enumerate() {
            let current = &levels[k];
            let history = self.history.get(slot);
            let maps = self
                .config
                .ops
                .iter()
                .map(|&op| {
                    let base = temporal_difference(current, history, op.t);
                    Ok(FeatureMap {
                        op,
                        map: apply_spatial(base, op)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(FeatureFrame {
                frame_index: self.frame_index,
                scale_index: k,
                tau: self.config.cascade.tau_levels()[k],
                reliable,
                maps,
            });
        }
        for (slot, &k) in self.config.scales.iter().enumerate() {
            if let Some(h) = self.history.get_mut(slot) {
                std::mem::swap(&mut h.prev, &mut h.prev2);
                h.prev.as_mut_slice().copy_from_slice(levels[k].as_slice());
            }
        }
        self.frame_index += 1;
        Ok(out)
    }
}

fn temporal_difference(current: &Frame, history: Option<&LevelHistory>, order: u8) -> Frame {
    let Some(h) = history.filter(|_| order > 0) else {
        return current.clone();
    };
    let (w, ht) = current.shape();
    let data = match order {
        1 => current
            .as_slice()
            .iter()
            .zip(h.prev.as_slice())
            .map(|(c, p)| c - p)
            .collect(),
        _ => current
            .as_slice()
            .iter()
            .zip(h.prev.as_slice())
            .zip(h.prev2.as_slice())
            .map(|((c, p), q)| c - 2.0 * p + q)
            .collect(),
    };
    Frame::from_vec(w, ht, data).expect("shape preserved")
}

fn apply_axis(mut map: Frame, axis: Axis, order: u8) -> Result<Frame> {
    match order {
        0 => {}
        1 | 2 => map = spatial_derivative(&map, axis, order)?,
        _ => {
            map = spatial_derivative(&map, axis, 2)?;
            map = spatial_derivative(&map, axis, 1)?;
        }
    }
    Ok(map)
}

fn apply_spatial(base: Frame, op: DerivativeOp) -> Result<Frame> {
    let map = apply_axis(base, Axis::X1, op.x1)?;
    apply_axis(map, Axis::X2, op.x2)
}

/// Max discrepancy between smoothing-then-cascade and cascade-then-smoothing
/// over every level of every frame.
pub fn commute_check(
    frames: &[Frame],
    spatial_variance: f64,
    eps: f64,
    cascade: &DiscreteCascadeSpec,
) -> Result<f64> {
    let Some(first) = frames.first() else {
        return Ok(0.0);
    };
    let kernel = DiscreteGaussian1D::new(spatial_variance, eps)?;
    let (w, h) = first.shape();
    let mut spatial_first = RecursiveCascadeState::new(cascade, w, h, Startup::Zero);
    let mut temporal_first = RecursiveCascadeState::new(cascade, w, h, Startup::Zero);
    let mut worst: f64 = 0.0;
    for frame in frames {
        let a = spatial_first.step(&convolve_separable(frame, &kernel))?;
        let b = temporal_first.step(frame)?;
        for (la, lb) in a.iter().zip(b) {
            worst = worst.max(la.max_abs_diff(&convolve_separable(lb, &kernel)));
        }
    }
    Ok(worst)
}

/// Evaluates receptive fields in coordinates co-moving with a constant image
/// velocity: warp by `v t`, run the separable pipeline, unwarp by `-v t`.
#[derive(Debug, Clone)]
pub struct VelocityAdaptedEngine {
    inner: Engine,
    velocity: (f64, f64),
    method: Interpolation,
}

impl VelocityAdaptedEngine {
    /// `velocity` is in pixels per frame.
    pub fn new(config: EngineConfig, velocity: (f64, f64), method: Interpolation) -> Result<Self> {
        if !(velocity.0.is_finite() && velocity.1.is_finite()) {
            return Err(Error::invalid("velocity must be finite"));
        }
        Ok(VelocityAdaptedEngine {
            inner: Engine::new(config)?,
            velocity,
            method,
        })
    }

    pub fn velocity(&self) -> (f64, f64) {
        self.velocity
    }

    pub fn frame_index(&self) -> usize {
        self.inner.frame_index()
    }

    pub fn process_frame(&mut self, frame: &Frame) -> Result<Vec<FeatureFrame>> {
        let t = self.inner.frame_index() as f64;
        let shift = (self.velocity.0 * t, self.velocity.1 * t);
        let warped = warp_frame(frame, shift, self.method);
        let mut out = self.inner.process_frame(&warped)?;
        for feature in &mut out {
            for fm in &mut feature.maps {
                fm.map = warp_frame(&fm.map, (-shift.0, -shift.1), self.method);
            }
        }
        Ok(out)
    }
}
