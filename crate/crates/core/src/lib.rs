//! Pansharpening toolkit.
//!
//! Fuses a high-resolution panchromatic (PAN) band with a lower-resolution
//! multispectral (MS) image and scores the result with spectral and spatial
//! quality indices.
//!
//! Module map:
//!
//! * [`raster`]: single- and multi-band image model plus file I/O.
//! * [`preprocess`]: resampling and histogram matching.
//! * [`multires`]: convolution, à trous and Haar wavelet transforms, PCA.
//! * [`nnls`]: non-negative least squares for adaptive intensity weights.
//! * [`fusion`]: Brovey, IHS, adaptive IHS, PCA, HPF and wavelet fusion.
//! * [`metrics`]: CC, RMSE, RASE, UQI, ERGAS and SCC.
//! * [`bench`]: synthetic datasets, the Wald protocol and report emission.

#![allow(clippy::needless_range_loop)]

pub mod bench;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod multires;
pub mod nnls;
pub mod preprocess;
pub mod raster;

pub use error::{Error, Result};
pub use fusion::{fuse, FusionMethod, FusionParams, FusionResult};
pub use metrics::{full_report, MetricReport};
pub use raster::{MultiBandImage, Raster};
