//! Bit-exact overhead header.
//!
//! Layout, MSB first (`W*` widths depend only on the image size, see
//! [`HeaderLayout`]):
//!
//! ```text
//! magic            16   0x5244
//! version           8   1
//! start_color       1   0 = white, 1 = black
//! echo_present      1   0 = default settings, 1 = echo follows
//!   thresholds    6x8   tenths
//!   bias            8   tenths
//!   l_ulcf_size    16
//!   subbands L      4
//!   f_thresholds  (L-1)x16   units of 1e-4, descending
//!   K               8
//!   poh_mode        1   0 = eq14, 1 = table2
//!   tau1, tau2    2x8
//! reserved_len     Wr   reserved LSB positions in use
//! total_len        Wt   bitstream length (reserved prefix + payload)
//! num_passes        8
//!   per pass:
//!     gamma(segment count), then per segment:
//!       gamma(slot gap), gamma(k - 1), whole_slot 1, [bits Ws if not whole]
//!     gamma(clamp count), then per clamped pixel in raster order:
//!       gamma(raster gap), direction 1 (0 = from 256, 1 = from -1)
//! crc16            16   CRC-16/CCITT-FALSE over all preceding bits
//! ```
//!
//! `gamma(n)` is the Elias-gamma code of `n + 1`. Slot gaps count skipped
//! slots since the previous segment of the pass. A whole-slot segment walks
//! every site of its slot; otherwise it stops after `bits`. A raster gap is the
//! distance to the previous clamped pixel of the same pass minus one (the
//! first gap is the raster index itself).

use crate::band::BandThresholds;
use crate::bits::{bit_width, crc16, BitReader, BitWriter};
use crate::config::ConfigEcho;
use crate::error::{Error, Result};
use crate::hia::PohMode;
use crate::image::{ColorParity, MARGIN};
use crate::ou::{OuDirection, OuEntry, TauConfig};
use crate::spep::SubbandThresholds;

pub const MAGIC: u16 = 0x5244;
pub const VERSION: u8 = 1;

/// Field widths derived from the image dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderLayout {
    pub segment_bits: u32,
    pub total_bits: u32,
    pub reserved_bits: u32,
}

impl HeaderLayout {
    pub fn for_image(width: usize, height: usize) -> Self {
        let pixels = (width * height) as u64;
        let interior =
            (width.saturating_sub(2 * MARGIN) * height.saturating_sub(2 * MARGIN)) as u64;
        let per_color = interior.div_ceil(2);
        let segment_bits = bit_width(per_color);
        Self {
            segment_bits,
            total_bits: segment_bits + 8,
            reserved_bits: bit_width(pixels),
        }
    }
}

/// One contiguous run of embedded bits: a slot of one pass with one
/// threshold pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub pass_index: u32,
    pub slot: u8,
    pub k: u8,
    /// Bit count when the segment stops early; `None` covers the whole slot.
    pub limit: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverheadHeader {
    pub start_color: ColorParity,
    pub config: ConfigEcho,
    pub reserved_len: u32,
    pub total_bitstream_len: u64,
    pub segments: Vec<Segment>,
    pub ou_entries: Vec<OuEntry>,
}

impl OverheadHeader {
    pub fn num_passes(&self) -> u32 {
        let seg = self.segments.iter().map(|s| s.pass_index + 1).max();
        let ou = self.ou_entries.iter().map(|e| e.pass_index + 1).max();
        seg.max(ou).unwrap_or(0)
    }
}

pub fn encode_header(h: &OverheadHeader, layout: &HeaderLayout) -> Result<Vec<bool>> {
    let mut w = BitWriter::new();
    w.write(u64::from(MAGIC), 16)?;
    w.write(u64::from(VERSION), 8)?;
    w.push(h.start_color.bit());

    let echo = &h.config;
    let present = *echo != ConfigEcho::default();
    w.push(present);
    if present {
        for t in echo.thresholds.tenths() {
            w.write(u64::from(t), 8)?;
        }
        w.write(u64::from(echo.thresholds.bias_tenths()), 8)?;
        w.write(u64::from(echo.l_ulcf_size), 16)?;
        w.write(echo.subbands.count() as u64, 4)?;
        for &f in echo.subbands.scaled() {
            w.write(u64::from(f), 16)?;
        }
        w.write(u64::from(echo.k_max), 8)?;
        w.push(echo.poh_mode.bit());
        w.write(u64::from(echo.tau.tau1), 8)?;
        w.write(u64::from(echo.tau.tau2), 8)?;
    }

    w.write(u64::from(h.reserved_len), layout.reserved_bits)?;
    w.write(h.total_bitstream_len, layout.total_bits)?;

    let passes = h.num_passes();
    w.write(u64::from(passes), 8)?;
    for pass in 0..passes {
        let segs: Vec<&Segment> = h.segments.iter().filter(|s| s.pass_index == pass).collect();
        w.write_gamma(segs.len() as u64)?;
        let mut next_slot = 0u64;
        for s in segs {
            let slot = u64::from(s.slot);
            if slot < next_slot || s.k == 0 {
                return Err(Error::InconsistentHeader("segments out of order".into()));
            }
            w.write_gamma(slot - next_slot)?;
            w.write_gamma(u64::from(s.k) - 1)?;
            w.push(s.limit.is_none());
            if let Some(bits) = s.limit {
                w.write(bits, layout.segment_bits)?;
            }
            next_slot = slot + 1;
        }
        let ous: Vec<&OuEntry> = h
            .ou_entries
            .iter()
            .filter(|e| e.pass_index == pass)
            .collect();
        w.write_gamma(ous.len() as u64)?;
        let mut next = 0u64;
        for e in ous {
            let raster = u64::from(e.raster_index);
            if raster < next {
                return Err(Error::InconsistentHeader(
                    "clamped pixels out of raster order".into(),
                ));
            }
            w.write_gamma(raster - next)?;
            w.push(e.direction.bit());
            next = raster + 1;
        }
    }

    let crc = crc16(w.bits());
    w.write(u64::from(crc), 16)?;
    Ok(w.into_bits())
}

/// Decodes a header from the front of `bits`, returning it with the number
/// of bits consumed.
pub fn decode_header(bits: &[bool], layout: &HeaderLayout) -> Result<(OverheadHeader, usize)> {
    let mut r = BitReader::new(bits);
    let magic = r.read(16)? as u16;
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = r.read(8)? as u8;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let start_color = ColorParity::from_bit(r.read_bit()?);

    let present = r.read_bit()?;
    let mut raw_echo = None;
    if present {
        let mut tenths = [0u32; 6];
        for t in tenths.iter_mut() {
            *t = r.read(8)? as u32;
        }
        let bias = r.read(8)? as u32;
        let l_ulcf_size = r.read(16)? as u32;
        let count = r.read(4)? as usize;
        let mut f = Vec::with_capacity(count.saturating_sub(1));
        for _ in 1..count {
            f.push(r.read(16)? as u32);
        }
        let k_max = r.read(8)? as u8;
        let poh_mode = PohMode::from_bit(r.read_bit()?);
        let tau1 = r.read(8)? as u8;
        let tau2 = r.read(8)? as u8;
        raw_echo = Some((
            tenths,
            bias,
            l_ulcf_size,
            count,
            f,
            k_max,
            poh_mode,
            tau1,
            tau2,
        ));
    }

    let reserved_len = r.read(layout.reserved_bits)? as u32;
    let total_bitstream_len = r.read(layout.total_bits)?;
    let passes = r.read(8)? as u32;

    let mut segments = Vec::new();
    let mut ou_entries = Vec::new();
    for pass_index in 0..passes {
        let n = r.read_gamma()?;
        let mut next_slot = 0u64;
        for _ in 0..n {
            let slot = next_slot.saturating_add(r.read_gamma()?);
            let k = r.read_gamma()?.saturating_add(1);
            let limit = if r.read_bit()? {
                None
            } else {
                Some(r.read(layout.segment_bits)?)
            };
            segments.push(Segment {
                pass_index,
                slot: u8::try_from(slot).unwrap_or(u8::MAX),
                k: u8::try_from(k).unwrap_or(u8::MAX),
                limit,
            });
            next_slot = slot.saturating_add(1);
        }
        let n = r.read_gamma()?;
        let mut next = 0u64;
        for _ in 0..n {
            let raster = next.saturating_add(r.read_gamma()?);
            let direction = OuDirection::from_bit(r.read_bit()?);
            ou_entries.push(OuEntry {
                pass_index,
                raster_index: u32::try_from(raster).unwrap_or(u32::MAX),
                direction,
            });
            next = raster.saturating_add(1);
        }
    }

    let computed = crc16(&bits[..r.position()]);
    let stored = r.read(16)? as u16;
    if stored != computed {
        return Err(Error::CrcMismatch { stored, computed });
    }

    let config = match raw_echo {
        None => ConfigEcho::default(),
        Some((tenths, bias, l_ulcf_size, count, f, k_max, poh_mode, tau1, tau2)) => {
            let inconsistent = |e: Error| Error::InconsistentHeader(e.to_string());
            if count == 0 {
                return Err(Error::InconsistentHeader("zero sub-bands".into()));
            }
            let echo = ConfigEcho {
                thresholds: BandThresholds::from_tenths(tenths, bias).map_err(inconsistent)?,
                l_ulcf_size,
                subbands: SubbandThresholds::new(f).map_err(inconsistent)?,
                k_max,
                poh_mode,
                tau: TauConfig::new(tau1, tau2),
            };
            echo.validate().map_err(inconsistent)?;
            echo
        }
    };

    let header = OverheadHeader {
        start_color,
        config,
        reserved_len,
        total_bitstream_len,
        segments,
        ou_entries,
    };
    validate(&header)?;
    Ok((header, r.position()))
}

fn validate(h: &OverheadHeader) -> Result<()> {
    let fail = |msg: String| Err(Error::InconsistentHeader(msg));
    if h.segments.is_empty() && h.total_bitstream_len != 0 {
        return fail(format!(
            "no segments but a {}-bit bitstream",
            h.total_bitstream_len
        ));
    }
    let partial: u64 = h.segments.iter().filter_map(|s| s.limit).sum();
    if partial > h.total_bitstream_len {
        return fail(format!(
            "segments carry at least {partial} bits, header says {}",
            h.total_bitstream_len
        ));
    }
    if u64::from(h.reserved_len) > h.total_bitstream_len {
        return fail("reserved prefix longer than the bitstream".into());
    }
    let slots = h.config.slot_count();
    for s in &h.segments {
        if s.limit == Some(0) {
            return fail("empty segment".into());
        }
        if usize::from(s.slot) >= slots {
            return fail(format!("slot {} out of range", s.slot));
        }
        if s.k == 0 || s.k > h.config.k_max {
            return fail(format!("candidate k = {} out of range", s.k));
        }
    }
    if h.segments
        .windows(2)
        .any(|w| (w[0].pass_index, w[0].slot) >= (w[1].pass_index, w[1].slot))
    {
        return fail("segments out of order".into());
    }
    Ok(())
}
