//! MSB-first bit packing, Elias-gamma integers and CRC-16/CCITT over bit
//! sequences.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitWriter {
    bits: Vec<bool>,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn write(&mut self, value: u64, width: u32) -> Result<()> {
        if width < 64 && value >> width != 0 {
            return Err(Error::FieldOverflow { value, width });
        }
        for i in (0..width).rev() {
            self.bits.push((value >> i) & 1 == 1);
        }
        Ok(())
    }

    /// Elias-gamma code of `value + 1`, so zero is representable.
    pub fn write_gamma(&mut self, value: u64) -> Result<()> {
        let v = value
            .checked_add(1)
            .ok_or(Error::FieldOverflow { value, width: 64 })?;
        let n = 63 - v.leading_zeros();
        for _ in 0..n {
            self.bits.push(false);
        }
        self.write(v, n + 1)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        Self { bits, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let b = *self.bits.get(self.pos).ok_or(Error::TruncatedHeader)?;
        self.pos += 1;
        Ok(b)
    }

    pub fn read(&mut self, width: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }

    pub fn read_gamma(&mut self) -> Result<u64> {
        let mut zeros = 0u32;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(Error::InconsistentHeader("gamma code too long".into()));
            }
        }
        let rest = self.read(zeros)?;
        Ok(((1u64 << zeros) | rest) - 1)
    }
}

/// Number of bits needed to write `max` in binary (at least 1).
pub fn bit_width(max: u64) -> u32 {
    (64 - max.leading_zeros()).max(1)
}

/// CRC-16/CCITT-FALSE (polynomial 0x1021, init 0xFFFF) over a bit sequence.
pub fn crc16(bits: &[bool]) -> u16 {
    let mut crc: u16 = 0xFFFF;
    for &b in bits {
        let top = (crc >> 15) & 1 == 1;
        crc <<= 1;
        if top ^ b {
            crc ^= 0x1021;
        }
    }
    crc
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1 == 1))
        .collect()
}

/// Packs bits MSB-first; a trailing partial byte is zero-padded.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i)))
        })
        .collect()
}
