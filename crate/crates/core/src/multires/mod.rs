//! Numerical engines shared by the fusion methods: 2-D convolution,
//! wavelet decompositions and principal component analysis.

mod atrous;
mod mallat;
mod pca;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

pub use atrous::{atrous_decompose, atrous_reconstruct, B3_SPLINE};
pub use mallat::{mallat_decompose, mallat_reconstruct};
pub use pca::{pca_forward, pca_inverse, PcaModel};

/// How samples outside the raster are synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Nearest edge sample.
    Replicate,
    /// Half-sample mirror: `x[-1] = x[0]`, `x[-2] = x[1]`, ...
    Symmetric,
}

impl Boundary {
    #[inline]
    pub fn index(self, i: isize, len: usize) -> usize {
        let n = len as isize;
        if (0..n).contains(&i) {
            return i as usize;
        }
        match self {
            Boundary::Replicate => i.clamp(0, n - 1) as usize,
            Boundary::Symmetric => {
                let m = i.rem_euclid(2 * n);
                (if m < n { m } else { 2 * n - 1 - m }) as usize
            }
        }
    }
}

/// Odd-sized 2-D filter kernel, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Kernel2D {
    width: usize,
    height: usize,
    taps: Vec<f64>,
}

impl Kernel2D {
    pub fn new(width: usize, height: usize, taps: Vec<f64>) -> Result<Self> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("kernel must be odd-sized, got {width}x{height}")));
        }
        if taps.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "{width}x{height} kernel needs {} taps, got {}",
                width * height,
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("kernel taps must be finite".into()));
        }
        Ok(Self { width, height, taps })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidParameter("kernel rows differ in length".into()));
        }
        Self::new(width, height, rows.into_iter().flatten().collect())
    }

    pub fn identity() -> Self {
        Self::from_rows(vec![vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap()
    }

    /// 8-neighbour Laplacian `[[-1,-1,-1],[-1,8,-1],[-1,-1,-1]]`.
    pub fn laplacian() -> Self {
        let mut taps = vec![-1.0; 9];
        taps[4] = 8.0;
        Self::new(3, 3, taps).unwrap()
    }

    /// Default high-pass filter for detail injection: the Laplacian scaled by 1/9.
    pub fn default_high_pass() -> Self {
        let mut k = Self::laplacian();
        k.taps.iter_mut().for_each(|t| *t /= 9.0);
        k
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    #[inline]
    pub fn tap(&self, x: usize, y: usize) -> f64 {
        self.taps[y * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    pub fn is_zero_sum(&self) -> bool {
        let scale: f64 = self.taps.iter().map(|t| t.abs()).sum();
        self.sum().abs() <= 1e-12 * scale.max(1.0)
    }
}

impl TryFrom<Vec<Vec<f64>>> for Kernel2D {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<Kernel2D> for Vec<Vec<f64>> {
    fn from(k: Kernel2D) -> Self {
        k.taps.chunks(k.width).map(<[f64]>::to_vec).collect()
    }
}

/// Discrete 2-D convolution, output the same size as the input:
/// `out(x, y) = Σ k(i, j) · r(x - (i - cx), y - (j - cy))`.
pub fn convolve2d(r: &Raster, k: &Kernel2D, boundary: Boundary) -> Raster {
    let (w, h) = r.dims();
    let (cx, cy) = ((k.width / 2) as isize, (k.height / 2) as isize);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for j in 0..k.height {
                let sy = boundary.index(y as isize - (j as isize - cy), h);
                let row = r.row(sy);
                for i in 0..k.width {
                    let sx = boundary.index(x as isize - (i as isize - cx), w);
                    acc += k.tap(i, j) * row[sx];
                }
            }
            out[y * w + x] = acc;
        }
    }
    Raster::from_parts(w, h, out)
}

/// Which multiresolution transform produced a [`WaveletStack`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveletScheme {
    Atrous,
    MallatHaar,
}

/// Detail planes (finest first) plus the low-frequency residual.
///
/// For `Atrous` every plane has the input size. For `MallatHaar` level `j`
/// (1-based) contributes three planes `[LH, HL, HH]` of size `input / 2^j`,
/// and the residual is the coarsest LL band.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletStack {
    detail_planes: Vec<Raster>,
    residual: Raster,
    scheme: WaveletScheme,
}

impl WaveletStack {
    pub fn new(detail_planes: Vec<Raster>, residual: Raster, scheme: WaveletScheme) -> Result<Self> {
        match scheme {
            WaveletScheme::Atrous => {
                for p in &detail_planes {
                    p.ensure_same_dims(&residual)?;
                }
            }
            WaveletScheme::MallatHaar => {
                if detail_planes.is_empty() || !detail_planes.len().is_multiple_of(3) {
                    return Err(Error::InvalidParameter(format!(
                        "Haar stack needs 3 planes per level, got {}",
                        detail_planes.len()
                    )));
                }
                let levels = detail_planes.len() / 3;
                let (rw, rh) = residual.dims();
                for (i, p) in detail_planes.iter().enumerate() {
                    let up = levels - i / 3 - 1;
                    if p.dims() != (rw << up, rh << up) {
                        return Err(Error::DimensionMismatch(format!(
                            "Haar plane {i} is {}x{}, expected {}x{}",
                            p.width(),
                            p.height(),
                            rw << up,
                            rh << up
                        )));
                    }
                }
            }
        }
        Ok(Self { detail_planes, residual, scheme })
    }

    pub fn detail_planes(&self) -> &[Raster] {
        &self.detail_planes
    }

    pub fn residual(&self) -> &Raster {
        &self.residual
    }

    pub fn scheme(&self) -> WaveletScheme {
        self.scheme
    }

    /// Number of decomposition levels.
    pub fn levels(&self) -> usize {
        match self.scheme {
            WaveletScheme::Atrous => self.detail_planes.len(),
            WaveletScheme::MallatHaar => self.detail_planes.len() / 3,
        }
    }

    pub fn into_parts(self) -> (Vec<Raster>, Raster) {
        (self.detail_planes, self.residual)
    }
}

/// Decompose with either scheme.
pub fn decompose(r: &Raster, levels: usize, scheme: WaveletScheme) -> Result<WaveletStack> {
    match scheme {
        WaveletScheme::Atrous => atrous_decompose(r, levels),
        WaveletScheme::MallatHaar => mallat_decompose(r, levels),
    }
}

/// Inverse of [`decompose`], dispatching on the stack's scheme.
pub fn reconstruct(s: &WaveletStack) -> Result<Raster> {
    match s.scheme {
        WaveletScheme::Atrous => atrous_reconstruct(s),
        WaveletScheme::MallatHaar => mallat_reconstruct(s),
    }
}
