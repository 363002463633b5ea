//! Undecimated ("à trous") wavelet decomposition with the B3-spline kernel.

use super::{Boundary, WaveletScheme, WaveletStack};
use crate::error::{Error, Result};
use crate::raster::Raster;

/// 1-D B3-spline smoothing taps; the 2-D kernel is their outer product.
pub const B3_SPLINE: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Separable B3 smoothing with `step - 1` holes between taps, symmetric boundary.
pub(crate) fn b3_smooth(r: &Raster, step: usize) -> Raster {
    let (w, h) = r.dims();
    let offsets: Vec<isize> = (-2..=2).map(|k| k * step as isize).collect();
    let bd = Boundary::Symmetric;

    let mut horiz = vec![0.0; w * h];
    for y in 0..h {
        let row = r.row(y);
        for x in 0..w {
            horiz[y * w + x] = offsets.iter().zip(B3_SPLINE).map(|(&o, t)| t * row[bd.index(x as isize + o, w)]).sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] =
                offsets.iter().zip(B3_SPLINE).map(|(&o, t)| t * horiz[bd.index(y as isize + o, h) * w + x]).sum();
        }
    }
    Raster::from_parts(w, h, out)
}

/// `plane[j] = smooth[j] - smooth[j+1]`, with `smooth[0] = r` and
/// `smooth[j+1]` the B3 smoothing of `smooth[j]` dilated by `2^j`.
pub fn atrous_decompose(r: &Raster, levels: usize) -> Result<WaveletStack> {
    if levels == 0 {
        return Err(Error::InvalidParameter("levels must be >= 1".into()));
    }
    let mut planes = Vec::with_capacity(levels);
    let mut current = r.clone();
    for j in 0..levels {
        let next = b3_smooth(&current, 1 << j);
        planes.push(current.zip_map(&next, |a, b| a - b)?);
        current = next;
    }
    WaveletStack::new(planes, current, WaveletScheme::Atrous)
}

/// Sum of all detail planes and the residual.
pub fn atrous_reconstruct(s: &WaveletStack) -> Result<Raster> {
    if s.scheme() != WaveletScheme::Atrous {
        return Err(Error::InvalidParameter(format!("expected an a-trous stack, got {:?}", s.scheme())));
    }
    let mut acc = s.residual().samples().to_vec();
    for p in s.detail_planes() {
        for (a, v) in acc.iter_mut().zip(p.samples()) {
            *a += v;
        }
    }
    Raster::new(s.residual().width(), s.residual().height(), acc)
}
