//! Raster file I/O.
//!
//! Supported containers: PNG (8/16-bit gray, gray+alpha, RGB, RGBA), baseline
//! TIFF (8/16-bit) and a raw little-endian `f64` format:
//!
//! ```text
//! "PSRW" | u32 width | u32 height | u32 bands | band-major f64 samples
//! ```
//!
//! Integer samples load without rescaling (255 loads as 255.0).

use std::fs;
use std::io::{BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use image::{DynamicImage, ImageBuffer, ImageFormat, ImageReader, Luma, Rgb};
use serde::{Deserialize, Serialize};

use super::{MultiBandImage, Raster};
use crate::error::{Error, Result};

pub const RAW_MAGIC: &[u8; 4] = b"PSRW";
const RAW_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileFormat {
    Png8,
    Png16,
    Tiff8,
    Tiff16,
    RawF64,
}

impl FileFormat {
    /// Integer bit depth, `None` for the raw float format.
    pub fn depth(self) -> Option<u32> {
        match self {
            FileFormat::Png8 | FileFormat::Tiff8 => Some(8),
            FileFormat::Png16 | FileFormat::Tiff16 => Some(16),
            FileFormat::RawF64 => None,
        }
    }

    fn container(self) -> Option<ImageFormat> {
        match self {
            FileFormat::Png8 | FileFormat::Png16 => Some(ImageFormat::Png),
            FileFormat::Tiff8 | FileFormat::Tiff16 => Some(ImageFormat::Tiff),
            FileFormat::RawF64 => None,
        }
    }

    /// Guess an output format from a file extension.
    pub fn from_extension(path: &Path) -> Option<FileFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(FileFormat::Png8),
            "tif" | "tiff" => Some(FileFormat::Tiff16),
            "psrw" | "raw" | "f64" => Some(FileFormat::RawF64),
            _ => None,
        }
    }

    /// Sniffs the container and bit depth of an existing file.
    pub fn detect(path: &Path) -> Result<FileFormat> {
        let mut head = [0u8; 4];
        let mut f = fs::File::open(path)?;
        f.read_exact(&mut head).map_err(|e| decode_err(path, e))?;
        if &head == RAW_MAGIC {
            return Ok(FileFormat::RawF64);
        }
        let reader = ImageReader::open(path)?.with_guessed_format().map_err(|e| decode_err(path, e))?;
        let container = reader.format();
        let decoder = reader.into_decoder().map_err(|e| decode_err(path, e))?;
        let bytes = image::ImageDecoder::color_type(&decoder).bytes_per_pixel()
            / image::ImageDecoder::color_type(&decoder).channel_count();
        match (container, bytes) {
            (Some(ImageFormat::Png), 1) => Ok(FileFormat::Png8),
            (Some(ImageFormat::Png), 2) => Ok(FileFormat::Png16),
            (Some(ImageFormat::Tiff), 1) => Ok(FileFormat::Tiff8),
            (Some(ImageFormat::Tiff), 2) => Ok(FileFormat::Tiff16),
            (c, b) => Err(Error::UnsupportedFormat(format!(
                "{}: container {c:?} with {} bits per sample",
                path.display(),
                b * 8
            ))),
        }
    }
}

impl FromStr for FileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "png8" | "png" => Ok(FileFormat::Png8),
            "png16" => Ok(FileFormat::Png16),
            "tiff8" => Ok(FileFormat::Tiff8),
            "tiff16" | "tiff" | "tif" => Ok(FileFormat::Tiff16),
            "raw-f64" | "raw" | "psrw" => Ok(FileFormat::RawF64),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Out-of-range policy for integer formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clamp {
    #[default]
    None,
    ClampToDepth,
}

fn decode_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Decode { path: path.to_path_buf(), reason: e.to_string() }
}

pub fn load_image(path: &Path, format: FileFormat) -> Result<MultiBandImage> {
    let Some(container) = format.container() else {
        return load_raw(path);
    };
    let file = fs::File::open(path)?;
    let img = ImageReader::with_format(BufReader::new(file), container).decode().map_err(|e| decode_err(path, e))?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions(format!("{} is empty", path.display())));
    }
    let (channels, depth, interleaved): (usize, u32, Vec<f64>) = match img {
        DynamicImage::ImageLuma8(b) => (1, 8, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageLumaA8(b) => (2, 8, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageRgb8(b) => (3, 8, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageRgba8(b) => (4, 8, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageLuma16(b) => (1, 16, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageLumaA16(b) => (2, 16, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageRgb16(b) => (3, 16, b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageRgba16(b) => (4, 16, b.into_raw().into_iter().map(f64::from).collect()),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: unsupported sample type {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    if Some(depth) != format.depth() {
        return Err(Error::UnsupportedFormat(format!(
            "{} holds {depth}-bit samples, declared {format:?}",
            path.display()
        )));
    }
    let bands = (0..channels)
        .map(|c| {
            let samples = interleaved.iter().skip(c).step_by(channels).copied().collect();
            Raster::new(width, height, samples)
        })
        .collect::<Result<Vec<_>>>()?;
    MultiBandImage::new(bands)
}

fn load_raw(path: &Path) -> Result<MultiBandImage> {
    let bytes = fs::read(path)?;
    decode_raw(&bytes).map_err(|e| match e {
        Error::InvalidDimensions(reason) | Error::UnsupportedFormat(reason) => decode_err(path, reason),
        other => other,
    })
}

/// Decodes the raw `f64` container from memory.
pub fn decode_raw(bytes: &[u8]) -> Result<MultiBandImage> {
    if bytes.len() < RAW_HEADER_LEN || &bytes[..4] != RAW_MAGIC {
        return Err(Error::UnsupportedFormat("missing PSRW header".into()));
    }
    let field = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (width, height, bands) = (field(0), field(1), field(2));
    if width == 0 || height == 0 || bands == 0 {
        return Err(Error::InvalidDimensions(format!("zero-sized raster {width}x{height}x{bands}")));
    }
    let count = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bands))
        .ok_or_else(|| Error::InvalidDimensions("header dimensions overflow".into()))?;
    let body = &bytes[RAW_HEADER_LEN..];
    if body.len() != count * 8 {
        return Err(Error::InvalidDimensions(format!(
            "expected {} payload bytes for {width}x{height}x{bands}, found {}",
            count * 8,
            body.len()
        )));
    }
    let samples: Vec<f64> = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    MultiBandImage::from_band_major(width, height, bands, &samples)
}

/// Encodes an image in the raw `f64` container.
pub fn encode_raw(img: &MultiBandImage) -> Result<Vec<u8>> {
    let dim = |v: usize| u32::try_from(v).map_err(|_| Error::InvalidDimensions(format!("{v} exceeds u32")));
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + img.band_count() * img.bands()[0].len() * 8);
    out.extend_from_slice(RAW_MAGIC);
    out.extend_from_slice(&dim(img.width())?.to_le_bytes());
    out.extend_from_slice(&dim(img.height())?.to_le_bytes());
    out.extend_from_slice(&dim(img.band_count())?.to_le_bytes());
    for band in img.bands() {
        for v in band.samples() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Rounds half up after optional clamping; fails if the result does not fit.
pub fn quantize(value: f64, depth: u32, clamp: Clamp) -> Result<u32> {
    let max = ((1u64 << depth) - 1) as f64;
    let v = match clamp {
        Clamp::None => value,
        Clamp::ClampToDepth => value.clamp(0.0, max),
    };
    let rounded = (v + 0.5).floor();
    if !(0.0..=max).contains(&rounded) {
        return Err(Error::OutOfRange { value, depth });
    }
    Ok(rounded as u32)
}

pub fn save_image(img: &MultiBandImage, path: &Path, format: FileFormat, clamp: Clamp) -> Result<()> {
    let (Some(container), Some(depth)) = (format.container(), format.depth()) else {
        fs::write(path, encode_raw(img)?)?;
        return Ok(());
    };
    let n = img.band_count();
    if n != 1 && n != 3 {
        return Err(Error::BandCount { found: n, reason: format!("{format:?} stores 1 or 3 bands") });
    }
    let (w, h) = (img.width() as u32, img.height() as u32);
    let pixels = img.bands()[0].len();
    let mut interleaved = Vec::with_capacity(pixels * n);
    for i in 0..pixels {
        for band in img.bands() {
            interleaved.push(quantize(band.samples()[i], depth, clamp)?);
        }
    }
    let dynamic = match (n, depth) {
        (1, 8) => DynamicImage::ImageLuma8(
            ImageBuffer::<Luma<u8>, _>::from_raw(w, h, interleaved.iter().map(|&v| v as u8).collect()).unwrap(),
        ),
        (3, 8) => DynamicImage::ImageRgb8(
            ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, interleaved.iter().map(|&v| v as u8).collect()).unwrap(),
        ),
        (1, _) => DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(w, h, interleaved.iter().map(|&v| v as u16).collect()).unwrap(),
        ),
        _ => DynamicImage::ImageRgb16(
            ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, interleaved.iter().map(|&v| v as u16).collect()).unwrap(),
        ),
    };
    dynamic.save_with_format(path, container).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::Decode { path: path.to_path_buf(), reason: other.to_string() },
    })
}
