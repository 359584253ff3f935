//! Overflow/underflow guard.
//!
//! Sites whose prediction sits near a bound and whose error points toward
//! it are marked yellow and skipped. Anything that still leaves [0, 255]
//! after a pass is clamped and logged so the receiver can undo the clamp.

use crate::error::{Error, Result};
use crate::image::{GrayImage, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OuClass {
    Green,
    Yellow,
}

/// Guard distances from the lower (`tau1`) and upper (`tau2`) bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TauConfig {
    pub tau1: u8,
    pub tau2: u8,
}

impl TauConfig {
    pub fn new(tau1: u8, tau2: u8) -> Self {
        Self { tau1, tau2 }
    }
}

/// Green sites may be embedded; yellow ones are left alone.
pub fn classify_pixel(h: i32, hp: i32, tau: TauConfig) -> OuClass {
    let near_top = 255 - hp < i32::from(tau.tau2) && h >= hp;
    let near_bottom = hp < i32::from(tau.tau1) && h < hp;
    if near_top || near_bottom {
        OuClass::Yellow
    } else {
        OuClass::Green
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OuDirection {
    ClampedFrom256,
    ClampedFromMinus1,
}

impl OuDirection {
    pub fn bit(self) -> bool {
        self == OuDirection::ClampedFromMinus1
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            OuDirection::ClampedFromMinus1
        } else {
            OuDirection::ClampedFrom256
        }
    }

    fn clamped(self) -> i32 {
        match self {
            OuDirection::ClampedFrom256 => 255,
            OuDirection::ClampedFromMinus1 => 0,
        }
    }

    fn original(self) -> i32 {
        match self {
            OuDirection::ClampedFrom256 => 256,
            OuDirection::ClampedFromMinus1 => -1,
        }
    }
}

/// One clamped pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OuEntry {
    pub pass_index: u32,
    pub raster_index: u32,
    pub direction: OuDirection,
}

/// Signed working copy of an image; values may leave [0, 255] by one level
/// between embedding a pass and fixing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkImage {
    width: usize,
    height: usize,
    data: Vec<i16>,
}

impl WorkImage {
    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            data: img.pixels().iter().map(|&p| i16::from(p)).collect(),
        }
    }

    pub fn from_values(width: usize, height: usize, data: Vec<i16>) -> Self {
        assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    /// Converts back, failing if any value is outside [0, 255].
    pub fn to_gray(&self) -> Result<GrayImage> {
        let mut pixels = Vec::with_capacity(self.data.len());
        for (index, &v) in self.data.iter().enumerate() {
            let v = u8::try_from(v).map_err(|_| Error::ValueOutOfRange {
                index,
                value: i32::from(v),
            })?;
            pixels.push(v);
        }
        GrayImage::new(self.width, self.height, pixels)
    }

    pub fn values(&self) -> &[i16] {
        &self.data
    }

    #[inline]
    pub fn get_index(&self, index: usize) -> i32 {
        i32::from(self.data[index])
    }

    #[inline]
    pub fn set_index(&mut self, index: usize, value: i32) {
        self.data[index] = value as i16;
    }
}

impl Raster for WorkImage {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    #[inline]
    fn value(&self, row: usize, col: usize) -> i32 {
        i32::from(self.data[row * self.width + col])
    }
}

/// Clamps 256 to 255 and -1 to 0, returning one entry per clamped pixel in
/// raster order.
pub fn fix_red(img: &mut WorkImage, pass_index: u32) -> Result<Vec<OuEntry>> {
    let mut entries = Vec::new();
    for (index, v) in img.data.iter_mut().enumerate() {
        let direction = match *v {
            0..=255 => continue,
            256 => OuDirection::ClampedFrom256,
            -1 => OuDirection::ClampedFromMinus1,
            other => {
                return Err(Error::ValueOutOfRange {
                    index,
                    value: i32::from(other),
                })
            }
        };
        *v = direction.clamped() as i16;
        entries.push(OuEntry {
            pass_index,
            raster_index: index as u32,
            direction,
        });
    }
    Ok(entries)
}

/// Undoes [`fix_red`] for the given entries.
pub fn restore_red(img: &mut WorkImage, entries: &[OuEntry]) -> Result<()> {
    for e in entries {
        let index = e.raster_index as usize;
        let found = img.data.get(index).map(|&v| i32::from(v)).ok_or_else(|| {
            Error::Corrupted(format!("overflow entry index {index} out of range"))
        })?;
        if found != e.direction.clamped() {
            return Err(Error::OuEntryMismatch {
                index,
                expected: e.direction.clamped(),
                found,
            });
        }
        img.data[index] = e.direction.original() as i16;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn classification_examples() {
        let tau = TauConfig::new(2, 2);
        assert_eq!(classify_pixel(253, 254, tau), OuClass::Green);
        assert_eq!(classify_pixel(1, 0, tau), OuClass::Green);
        assert_eq!(classify_pixel(255, 254, tau), OuClass::Yellow);
        assert_eq!(classify_pixel(0, 1, tau), OuClass::Yellow);
        assert_eq!(
            classify_pixel(255, 255, TauConfig::default()),
            OuClass::Green
        );
        assert_eq!(classify_pixel(0, 0, TauConfig::default()), OuClass::Green);
    }

    #[test]
    fn fix_examples() {
        let mut w = WorkImage::from_values(3, 1, vec![4, 5, 6]);
        assert!(fix_red(&mut w, 0).unwrap().is_empty());
        assert_eq!(w.values(), &[4, 5, 6]);

        let mut w = WorkImage::from_values(3, 1, vec![256, 5, 6]);
        let e = fix_red(&mut w, 3).unwrap();
        assert_eq!(w.values(), &[255, 5, 6]);
        assert_eq!(
            e,
            vec![OuEntry {
                pass_index: 3,
                raster_index: 0,
                direction: OuDirection::ClampedFrom256
            }]
        );

        let mut w = WorkImage::from_values(3, 1, vec![-1, 5, 256]);
        let e = fix_red(&mut w, 1).unwrap();
        assert_eq!(w.values(), &[0, 5, 255]);
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].direction, OuDirection::ClampedFromMinus1);

        let mut w = WorkImage::from_values(2, 1, vec![257, 0]);
        assert!(matches!(
            fix_red(&mut w, 0),
            Err(Error::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn restore_examples() {
        let mut w = WorkImage::from_values(2, 1, vec![255, 0]);
        restore_red(&mut w, &[]).unwrap();
        assert_eq!(w.values(), &[255, 0]);
        let entry = OuEntry {
            pass_index: 0,
            raster_index: 0,
            direction: OuDirection::ClampedFrom256,
        };
        restore_red(&mut w, &[entry]).unwrap();
        assert_eq!(w.values(), &[256, 0]);
        let bad = OuEntry {
            pass_index: 0,
            raster_index: 1,
            direction: OuDirection::ClampedFrom256,
        };
        assert!(matches!(
            restore_red(&mut w, &[bad]),
            Err(Error::OuEntryMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn restore_inverts_fix(vals in proptest::collection::vec(-1i16..=256, 1..100)) {
            let original = WorkImage::from_values(vals.len(), 1, vals);
            let mut w = original.clone();
            let entries = fix_red(&mut w, 0).unwrap();
            prop_assert!(w.to_gray().is_ok());
            restore_red(&mut w, &entries).unwrap();
            prop_assert_eq!(w, original);
        }

        #[test]
        fn zero_tau_is_all_green(h in 0i32..256, hp in 0i32..256) {
            prop_assert_eq!(classify_pixel(h, hp, TauConfig::default()), OuClass::Green);
        }

        #[test]
        fn class_survives_shift(h in 0i32..256, hp in 0i32..256, t1 in 0u8..40, t2 in 0u8..40, k in 1u8..6, bit in any::<bool>()) {
            use crate::predictor::{modify_error, SvPair};
            let tau = TauConfig::new(t1, t2);
            let e = h - hp;
            let m = hp + modify_error(e, SvPair::candidate(k), Some(bit)).unwrap();
            prop_assert_eq!(classify_pixel(h, hp, tau), classify_pixel(m.clamp(0, 255), hp, tau));
        }
    }
}
