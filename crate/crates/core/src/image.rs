//! Grayscale image container, binary PGM I/O, checkerboard site enumeration
//! and PSNR.

use crate::error::{Error, Result};

/// Width of the untouched border on every edge. Side cells reach two pixels
/// out from a target, so targets start two pixels in.
pub const MARGIN: usize = 2;

/// An 8-bit grayscale image stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedPgm(format!(
                "zero-sized image {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::MalformedPgm(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }
}

/// Read access to a rectangular grid of intensities.
///
/// Implemented by [`GrayImage`] and by the codec's signed work buffer, which
/// may briefly hold -1 or 256 while a pass is being fixed up.
pub trait Raster {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn value(&self, row: usize, col: usize) -> i32;
}

impl Raster for GrayImage {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    #[inline]
    fn value(&self, row: usize, col: usize) -> i32 {
        i32::from(self.get(row, col))
    }
}

/// Checkerboard color of a pixel. White pixels have an even `row + col`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorParity {
    White,
    Black,
}

impl ColorParity {
    pub fn of(row: usize, col: usize) -> Self {
        if (row + col).is_multiple_of(2) {
            ColorParity::White
        } else {
            ColorParity::Black
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            ColorParity::White => ColorParity::Black,
            ColorParity::Black => ColorParity::White,
        }
    }

    pub fn bit(self) -> bool {
        self == ColorParity::Black
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            ColorParity::Black
        } else {
            ColorParity::White
        }
    }
}

impl std::fmt::Display for ColorParity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColorParity::White => f.write_str("white"),
            ColorParity::Black => f.write_str("black"),
        }
    }
}

impl std::str::FromStr for ColorParity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "white" | "w" => Ok(ColorParity::White),
            "black" | "b" => Ok(ColorParity::Black),
            other => Err(Error::InvalidConfig(format!("unknown color {other:?}"))),
        }
    }
}

/// A pixel coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub row: usize,
    pub col: usize,
}

impl Site {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn raster(self, width: usize) -> usize {
        self.row * width + self.col
    }

    pub fn color(self) -> ColorParity {
        ColorParity::of(self.row, self.col)
    }

    /// True when all cells around the site fit inside a `width` x `height` image.
    pub fn is_interior(self, width: usize, height: usize) -> bool {
        width > 2 * MARGIN
            && height > 2 * MARGIN
            && (MARGIN..height - MARGIN).contains(&self.row)
            && (MARGIN..width - MARGIN).contains(&self.col)
    }
}

/// All interior coordinates of one color, in raster order.
pub fn enumerate_sites<R: Raster + ?Sized>(img: &R, color: ColorParity) -> Vec<Site> {
    let (w, h) = (img.width(), img.height());
    if w <= 2 * MARGIN || h <= 2 * MARGIN {
        return Vec::new();
    }
    let mut sites = Vec::with_capacity((w - 2 * MARGIN) * (h - 2 * MARGIN) / 2 + 1);
    for row in MARGIN..h - MARGIN {
        let first = if ColorParity::of(row, MARGIN) == color {
            MARGIN
        } else {
            MARGIN + 1
        };
        for col in (first..w - MARGIN).step_by(2) {
            sites.push(Site::new(row, col));
        }
    }
    sites
}

/// Parses a binary (P5) PGM with maxval 255.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cursor = 0usize;
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::MalformedPgm("missing magic number".into()));
    }
    match bytes[1] {
        b'5' => {}
        b'1'..=b'7' => {
            return Err(Error::UnsupportedFormat(format!(
                "P{} (only binary grayscale P5 is supported)",
                bytes[1] as char
            )))
        }
        _ => return Err(Error::MalformedPgm("bad magic number".into())),
    }
    cursor += 2;

    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        *field = read_header_number(bytes, &mut cursor)?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval} (only 255 is supported)"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor) {
        Some(b) if b.is_ascii_whitespace() => cursor += 1,
        _ => {
            return Err(Error::MalformedPgm(
                "missing whitespace after maxval".into(),
            ))
        }
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedPgm("dimensions overflow".into()))?;
    let data = bytes
        .get(cursor..cursor + count)
        .ok_or_else(|| Error::MalformedPgm(format!("truncated pixel data (need {count} bytes)")))?;
    GrayImage::new(width, height, data.to_vec())
}

fn read_header_number(bytes: &[u8], cursor: &mut usize) -> Result<usize> {
    // skip whitespace and comments
    loop {
        match bytes.get(*cursor) {
            Some(b) if b.is_ascii_whitespace() => *cursor += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*cursor) {
                    *cursor += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::MalformedPgm("truncated header".into())),
        }
    }
    let start = *cursor;
    while bytes.get(*cursor).is_some_and(u8::is_ascii_digit) {
        *cursor += 1;
    }
    if start == *cursor {
        return Err(Error::MalformedPgm("expected a number in header".into()));
    }
    std::str::from_utf8(&bytes[start..*cursor])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedPgm("header number out of range".into()))
}

/// Canonical P5 encoding: `P5\n<w> <h>\n255\n` followed by the raster.
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch(
            a.width, a.height, b.width, b.height,
        ));
    }
    let sum: u64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(&x, &y)| {
            let d = u64::from(x.abs_diff(y));
            d * d
        })
        .sum();
    Ok(sum as f64 / a.pixels.len() as f64)
}

/// Peak signal-to-noise ratio in dB; `f64::INFINITY` for identical images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    let mse = mse(a, b)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}
