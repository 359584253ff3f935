//! Reversible data hiding for 8-bit grayscale images.
//!
//! Pixels are split into two checkerboard colors. Each target pixel is
//! predicted from its four neighbors, targets are ranked by local smoothness
//! and the prediction-error histogram is shifted around an adaptively chosen
//! threshold pair to carry one bit per serviceable error. Extraction is blind
//! and restores the cover bit-exactly.

pub mod band;
pub mod bits;
pub mod codec;
pub mod config;
pub mod error;
pub mod header;
pub mod hia;
pub mod image;
pub mod ou;
pub mod predictor;
pub mod spep;

pub use codec::{
    capacity_scan, embed, extract, CapacityScan, EmbedReport, Embedded, Extracted, PassTrace,
    SegmentReport,
};
pub use config::{ConfigEcho, EmbedConfig};
pub use error::{Error, Result};
pub use image::{load_pgm, psnr, save_pgm, ColorParity, GrayImage};
