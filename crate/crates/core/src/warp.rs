//! Sub-pixel translation of frames, used for velocity adaptation.

use crate::discrete_spatial::mirror_index;
use crate::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Bilinear; exact on affine images.
    #[default]
    Linear,
    /// Separable Catmull-Rom cubic.
    Cubic,
}

/// Taps and weights for sampling at `pos` along one axis.
fn axis_weights(pos: f64, method: Interpolation) -> (isize, [f64; 4]) {
    let base = pos.floor();
    let f = pos - base;
    let base = base as isize;
    match method {
        Interpolation::Linear => (base, [0.0, 1.0 - f, f, 0.0]),
        Interpolation::Cubic => {
            let f2 = f * f;
            let f3 = f2 * f;
            (
                base,
                [
                    0.5 * (-f3 + 2.0 * f2 - f),
                    0.5 * (3.0 * f3 - 5.0 * f2 + 2.0),
                    0.5 * (-3.0 * f3 + 4.0 * f2 + f),
                    0.5 * (f3 - f2),
                ],
            )
        }
    }
}

fn resample_line(src: &[f64], dst: &mut [f64], shift: f64, method: Interpolation) {
    let len = src.len();
    for (i, d) in dst.iter_mut().enumerate() {
        let (base, w) = axis_weights(i as f64 + shift, method);
        let mut acc = 0.0;
        for (j, wj) in w.iter().enumerate() {
            if *wj != 0.0 {
                acc += wj * src[mirror_index(base + j as isize - 1, len)];
            }
        }
        *d = acc;
    }
}

/// Samples `out(x1, x2) = frame(x1 + d1, x2 + d2)`, mirroring outside the
/// domain. Integer displacements are exact shifts.
pub fn warp_frame(frame: &Frame, displacement: (f64, f64), method: Interpolation) -> Frame {
    let (d1, d2) = displacement;
    if d1 == 0.0 && d2 == 0.0 {
        return frame.clone();
    }
    let (w, h) = frame.shape();
    let mut rows = vec![0.0; w * h];
    if d1 == 0.0 {
        rows.copy_from_slice(frame.as_slice());
    } else {
        for (src, dst) in frame
            .as_slice()
            .chunks_exact(w)
            .zip(rows.chunks_exact_mut(w))
        {
            resample_line(src, dst, d1, method);
        }
    }
    if d2 == 0.0 {
        return Frame::from_vec(w, h, rows).expect("shape preserved");
    }
    let mut column = vec![0.0; h];
    let mut shifted = vec![0.0; h];
    let mut out = vec![0.0; w * h];
    for x in 0..w {
        for y in 0..h {
            column[y] = rows[y * w + x];
        }
        resample_line(&column, &mut shifted, d2, method);
        for y in 0..h {
            out[y * w + x] = shifted[y];
        }
    }
    Frame::from_vec(w, h, out).expect("shape preserved")
}
