//! Discrete analogue of the Gaussian over the 2-D image plane.
//!
//! The 1-D kernel is `T(n; s) = e^(-s) I_n(s)`; the 2-D kernel is the outer
//! product `T(n1; s) T(n2; s)`. It solves the semi-discrete diffusion
//! equation `dL/ds = 1/2 (five-point Laplacian of L)` and forms a semigroup
//! over `s`. Kernels are truncated at the smallest radius that keeps
//! `1 - eps` of the 2-D mass, renormalized to unit sum, and applied with
//! whole-sample mirroring at the image borders.

use rayon::prelude::*;

use crate::{Error, Frame, Result};

/// Pixel count above which row passes are split across worker threads.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// `s = p^2 sigma_x^2`: spatial variance in pixel^2.
pub fn s_from_degrees(sigma_x: f64, pixels_per_degree: f64) -> Result<f64> {
    if !(sigma_x.is_finite() && sigma_x >= 0.0) {
        return Err(Error::invalid(format!(
            "sigma_x must be >= 0, got {sigma_x}"
        )));
    }
    if !(pixels_per_degree.is_finite() && pixels_per_degree > 0.0) {
        return Err(Error::invalid(format!(
            "pixels per degree must be positive, got {pixels_per_degree}"
        )));
    }
    Ok(pixels_per_degree * pixels_per_degree * sigma_x * sigma_x)
}

fn check_variance(s: f64) -> Result<()> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::invalid(format!(
            "spatial variance must be >= 0, got {s}"
        )));
    }
    Ok(())
}

/// Scaled modified Bessel values `e^(-s) I_n(s)` for `n = 0..=n_max`.
///
/// Miller's backward recurrence `I_{n-1} = (2n/s) I_n + I_{n+1}` is started
/// well above both `n_max` and the bulk of the distribution, then
/// normalized with `I_0 + 2 sum_{n>=1} I_n = e^s`.
pub fn bessel_ratio_weights(s: f64, n_max: usize) -> Result<Vec<f64>> {
    check_variance(s)?;
    let mut out = vec![0.0; n_max + 1];
    if s == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let start = n_max.max(s.ceil() as usize) + 10 * (s.sqrt().ceil() as usize) + 40;
    let mut values = vec![0.0; start + 2];
    values[start] = 1e-280;
    let mut upper = 0.0;
    let mut current = values[start];
    for n in (1..=start).rev() {
        let lower = 2.0 * n as f64 / s * current + upper;
        upper = current;
        current = lower;
        values[n - 1] = current;
        if current > 1e250 {
            for v in &mut values[n - 1..=start] {
                *v *= 1e-250;
            }
            upper *= 1e-250;
            current *= 1e-250;
        }
    }
    let norm = values[0] + 2.0 * values[1..=start].iter().sum::<f64>();
    for (o, v) in out.iter_mut().zip(&values) {
        *o = v / norm;
    }
    Ok(out)
}

/// Smallest `N` whose retained 1-D mass `m` satisfies `m^2 > 1 - eps`.
pub fn truncation_radius(s: f64, eps: f64) -> Result<usize> {
    check_variance(s)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if s == 0.0 {
        return Ok(0);
    }
    let mut cap = (12.0 * s.sqrt()).ceil() as usize + 16;
    loop {
        let w = bessel_ratio_weights(s, cap)?;
        let mut mass = w[0];
        for (n, wn) in w.iter().enumerate().skip(1) {
            if mass * mass > 1.0 - eps {
                return Ok(n - 1);
            }
            mass += 2.0 * wn;
        }
        if mass * mass > 1.0 - eps {
            return Ok(cap);
        }
        cap *= 2;
    }
}

/// Truncated, renormalized 1-D discrete Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGaussian1D {
    s: f64,
    radius: usize,
    retained_mass: f64,
    /// Half kernel `T(0..=radius)` after renormalization.
    half: Vec<f64>,
}

impl DiscreteGaussian1D {
    pub fn new(s: f64, eps: f64) -> Result<Self> {
        let radius = truncation_radius(s, eps)?;
        Self::with_radius(s, radius)
    }

    pub fn with_radius(s: f64, radius: usize) -> Result<Self> {
        let raw = bessel_ratio_weights(s, radius)?;
        let retained_mass = raw[0] + 2.0 * raw[1..].iter().sum::<f64>();
        let half = raw.iter().map(|w| w / retained_mass).collect();
        Ok(DiscreteGaussian1D {
            s,
            radius,
            retained_mass,
            half,
        })
    }

    pub fn variance(&self) -> f64 {
        self.s
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// 1-D mass kept before renormalization.
    pub fn retained_mass(&self) -> f64 {
        self.retained_mass
    }

    pub fn weight(&self, n: isize) -> f64 {
        self.half.get(n.unsigned_abs()).copied().unwrap_or(0.0)
    }

    /// Weights for offsets `-radius..=radius`.
    pub fn taps(&self) -> Vec<f64> {
        let r = self.radius as isize;
        (-r..=r).map(|n| self.weight(n)).collect()
    }

    /// `sum_n T(n) e^(-i n theta)`, real by symmetry.
    pub fn dft(&self, theta: f64) -> f64 {
        self.half[0]
            + 2.0
                * self.half[1..]
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * ((i + 1) as f64 * theta).cos())
                    .sum::<f64>()
    }

    /// Mirror-extended 1-D convolution.
    pub fn smooth_1d(&self, signal: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; signal.len()];
        convolve_line(signal, &self.half, &mut out);
        out
    }
}

/// Whole-sample symmetric reflection of `i` into `0..len` (the border sample
/// is not repeated). Handles offsets of any size by folding periodically.
pub fn mirror_index(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = i.rem_euclid(period);
    if m < len as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

fn convolve_line(input: &[f64], half: &[f64], out: &mut [f64]) {
    let len = input.len();
    let r = half.len() as isize - 1;
    for (i, o) in out.iter_mut().enumerate() {
        let i = i as isize;
        let mut acc = 0.0;
        for n in -r..=r {
            acc += half[n.unsigned_abs()] * input[mirror_index(i + n, len)];
        }
        *o = acc;
    }
}

/// Applies a symmetric kernel along rows and then along columns.
pub fn convolve_separable(image: &Frame, kernel: &DiscreteGaussian1D) -> Frame {
    if kernel.radius == 0 {
        return image.clone();
    }
    let (w, h) = image.shape();
    let parallel = image.len() >= PARALLEL_THRESHOLD;
    let half = &kernel.half;

    let mut rows = vec![0.0; w * h];
    let row_pass = |(src, dst): (&[f64], &mut [f64])| convolve_line(src, half, dst);
    if parallel {
        image
            .as_slice()
            .par_chunks_exact(w)
            .zip(rows.par_chunks_exact_mut(w))
            .for_each(row_pass);
    } else {
        image
            .as_slice()
            .chunks_exact(w)
            .zip(rows.chunks_exact_mut(w))
            .for_each(row_pass);
    }

    // Column pass on the transpose so that both passes stream through memory.
    let mut transposed = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            transposed[x * h + y] = rows[y * w + x];
        }
    }
    let mut cols = vec![0.0; w * h];
    if parallel {
        transposed
            .par_chunks_exact(h)
            .zip(cols.par_chunks_exact_mut(h))
            .for_each(row_pass);
    } else {
        transposed
            .chunks_exact(h)
            .zip(cols.chunks_exact_mut(h))
            .for_each(row_pass);
    }
    for x in 0..w {
        for y in 0..h {
            rows[y * w + x] = cols[x * h + y];
        }
    }
    Frame::from_vec(w, h, rows).expect("shape preserved")
}

/// Separable discrete Gaussian smoothing at variance `s`.
pub fn smooth_2d(image: &Frame, s: f64, eps: f64) -> Result<Frame> {
    if image.is_empty() {
        return Err(Error::invalid("image is empty"));
    }
    let kernel = DiscreteGaussian1D::new(s, eps)?;
    Ok(convolve_separable(image, &kernel))
}

/// Closed-form Fourier transform of the untruncated 2-D kernel.
pub fn dft_gaussian(theta1: f64, theta2: f64, s: f64) -> f64 {
    let a = (theta1 / 2.0).sin();
    let b = (theta2 / 2.0).sin();
    (-2.0 * s * (a * a + b * b)).exp()
}

/// Max-norm residual of the semi-discrete diffusion equation on the
/// impulse response: `(T(s + ds) - T(s)) / ds - 1/2 Laplacian T(s)`.
pub fn diffusion_check(s: f64, ds: f64) -> Result<f64> {
    check_variance(s)?;
    if !(ds.is_finite() && ds > 0.0) {
        return Err(Error::invalid(format!("ds must be positive, got {ds}")));
    }
    let radius = truncation_radius(s + ds, 1e-15)? + 2;
    let a = bessel_ratio_weights(s, radius)?;
    let b = bessel_ratio_weights(s + ds, radius)?;
    let at = |w: &[f64], n: isize| w.get(n.unsigned_abs()).copied().unwrap_or(0.0);
    let r = radius as isize;
    let mut worst: f64 = 0.0;
    for n1 in -r..=r {
        for n2 in -r..=r {
            let t = |w: &[f64], i: isize, j: isize| at(w, i) * at(w, j);
            let lap = t(&a, n1 - 1, n2) + t(&a, n1 + 1, n2) + t(&a, n1, n2 - 1) + t(&a, n1, n2 + 1)
                - 4.0 * t(&a, n1, n2);
            let forward = (t(&b, n1, n2) - t(&a, n1, n2)) / ds;
            worst = worst.max((forward - 0.5 * lap).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Along a row (column index).
    X1,
    /// Down a column (row index).
    X2,
}

/// Centered difference stencils with mirrored borders:
/// `(-1/2, 0, 1/2)` for order 1 and `(1, -2, 1)` for order 2.
pub fn spatial_derivative(image: &Frame, axis: Axis, order: u8) -> Result<Frame> {
    if !(1..=2).contains(&order) {
        return Err(Error::invalid(format!(
            "spatial derivative order must be 1 or 2, got {order}"
        )));
    }
    let (w, h) = image.shape();
    let extent = match axis {
        Axis::X1 => w,
        Axis::X2 => h,
    };
    if extent < 3 {
        return Err(Error::TooSmallImage { extent });
    }
    let sample = |x: isize, y: isize| image.get(mirror_index(x, w), mirror_index(y, h));
    Ok(Frame::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let (prev, next) = match axis {
            Axis::X1 => (sample(x - 1, y), sample(x + 1, y)),
            Axis::X2 => (sample(x, y - 1), sample(x, y + 1)),
        };
        match order {
            1 => 0.5 * (next - prev),
            _ => prev - 2.0 * sample(x, y) + next,
        }
    }))
}
