//! Rhombus (chessboard) predictor and the histogram-shifting arithmetic on
//! prediction errors.

use crate::error::{Error, Result};
use crate::image::{Raster, Site};

/// Threshold pair selecting the serviceable prediction errors.
///
/// Errors equal to `sv_p` or `sv_n` carry one bit each; errors beyond them are
/// shifted outward by one to make room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SvPair {
    sv_p: i32,
    sv_n: i32,
}

impl SvPair {
    pub fn new(sv_p: i32, sv_n: i32) -> Result<Self> {
        if sv_p < 0 || sv_n > -1 {
            return Err(Error::InvalidConfig(format!(
                "threshold pair ({sv_p}, {sv_n}) needs sv_p >= 0 and sv_n <= -1"
            )));
        }
        Ok(Self { sv_p, sv_n })
    }

    /// The k-th symmetric candidate `(k - 1, -k)`, k starting at 1.
    pub fn candidate(k: u8) -> Self {
        assert!(k >= 1, "candidate index starts at 1");
        Self {
            sv_p: i32::from(k) - 1,
            sv_n: -i32::from(k),
        }
    }

    pub fn sv_p(self) -> i32 {
        self.sv_p
    }

    pub fn sv_n(self) -> i32 {
        self.sv_n
    }

    pub fn is_serviceable(self, e: i32) -> bool {
        e == self.sv_p || e == self.sv_n
    }
}

impl std::fmt::Display for SvPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{},{}}}", self.sv_n, self.sv_p)
    }
}

/// Mean of the four neighbors, rounded half up.
#[inline]
pub fn predict(up: i32, right: i32, down: i32, left: i32) -> i32 {
    (up + right + down + left + 2).div_euclid(4)
}

/// Prediction for an interior-or-edge site whose four direct neighbors exist.
#[inline]
pub fn predict_at<R: Raster + ?Sized>(img: &R, site: Site) -> i32 {
    let Site { row, col } = site;
    predict(
        img.value(row - 1, col),
        img.value(row, col + 1),
        img.value(row + 1, col),
        img.value(row, col - 1),
    )
}

#[inline]
pub fn prediction_error(h: i32, hp: i32) -> i32 {
    h - hp
}

/// Shifts or expands a prediction error. `bit` is consumed only when `e` is
/// serviceable; the positive threshold expands upward even when it is 0.
#[inline]
pub fn modify_error(e: i32, sv: SvPair, bit: Option<bool>) -> Result<i32> {
    if e > sv.sv_p {
        Ok(e + 1)
    } else if e < sv.sv_n {
        Ok(e - 1)
    } else if e == sv.sv_p {
        Ok(e + i32::from(bit.ok_or(Error::MissingBit)?))
    } else if e == sv.sv_n {
        Ok(e - i32::from(bit.ok_or(Error::MissingBit)?))
    } else {
        Ok(e)
    }
}

/// Exact inverse of [`modify_error`]: the original error and the carried bit,
/// if any.
#[inline]
pub fn recover_error(ep: i32, sv: SvPair) -> (i32, Option<bool>) {
    if ep == sv.sv_p || ep == sv.sv_n {
        (ep, Some(false))
    } else if ep == sv.sv_p + 1 {
        (sv.sv_p, Some(true))
    } else if ep == sv.sv_n - 1 {
        (sv.sv_n, Some(true))
    } else if ep > sv.sv_p + 1 {
        (ep - 1, None)
    } else if ep < sv.sv_n - 1 {
        (ep + 1, None)
    } else {
        (ep, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(p: i32, n: i32) -> SvPair {
        SvPair::new(p, n).unwrap()
    }

    #[test]
    fn prediction_examples() {
        assert_eq!(predict(10, 10, 10, 10), 10);
        assert_eq!(predict(1, 2, 3, 4), 3);
        assert_eq!(predict(250, 252, 253, 251), 252);
        assert_eq!(predict(0, 0, 0, 1), 0);
        assert_eq!(predict(255, 255, 255, 255), 255);
    }

    #[test]
    fn error_examples() {
        assert_eq!(prediction_error(100, 100), 0);
        assert_eq!(prediction_error(253, 254), -1);
        assert_eq!(prediction_error(255, 254), 1);
    }

    #[test]
    fn modify_examples() {
        let s = sv(0, -1);
        assert_eq!(modify_error(0, s, Some(false)).unwrap(), 0);
        assert_eq!(modify_error(0, s, Some(true)).unwrap(), 1);
        assert_eq!(modify_error(-1, s, Some(true)).unwrap(), -2);
        assert_eq!(modify_error(7, s, None).unwrap(), 8);
        assert_eq!(modify_error(-5, s, None).unwrap(), -6);
        assert_eq!(modify_error(1, sv(2, -3), None).unwrap(), 1);
        assert_eq!(modify_error(0, s, None), Err(Error::MissingBit));
    }

    #[test]
    fn recover_examples() {
        let s = sv(0, -1);
        assert_eq!(recover_error(1, s), (0, Some(true)));
        assert_eq!(recover_error(-2, s), (-1, Some(true)));
        assert_eq!(recover_error(8, s), (7, None));
        assert_eq!(recover_error(0, s), (0, Some(false)));
        assert_eq!(recover_error(-1, s), (-1, Some(false)));
    }

    #[test]
    fn invalid_pairs() {
        assert!(SvPair::new(-1, -1).is_err());
        assert!(SvPair::new(0, 0).is_err());
        assert_eq!(SvPair::candidate(3), sv(2, -3));
    }

    // brute-force inverse table: for each marked value, collect which
    // (e, bit) inputs map onto it
    #[test]
    fn modify_is_injective_and_recover_inverts() {
        for k in 1..=8u8 {
            let s = SvPair::candidate(k);
            let mut seen = std::collections::HashMap::new();
            for e in -260..=260 {
                let bits: &[Option<bool>] = if s.is_serviceable(e) {
                    &[Some(false), Some(true)]
                } else {
                    &[None]
                };
                for &b in bits {
                    let ep = modify_error(e, s, b).unwrap();
                    assert!((ep - e).abs() <= 1);
                    assert!(seen.insert(ep, (e, b)).is_none(), "collision at {ep}");
                    assert_eq!(recover_error(ep, s), (e, b));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn predict_permutation_invariant(a in 0i32..256, b in 0i32..256, c in 0i32..256, d in 0i32..256) {
            let p = predict(a, b, c, d);
            prop_assert_eq!(p, predict(d, c, b, a));
            prop_assert_eq!(p, predict(b, a, d, c));
            prop_assert_eq!(p, predict(c, d, a, b));
            prop_assert!((0..=255).contains(&p));
        }

        #[test]
        fn sign_preserved(e in -300i32..300, k in 1u8..10, bit in any::<bool>()) {
            let s = SvPair::candidate(k);
            let ep = modify_error(e, s, Some(bit)).unwrap();
            prop_assert_eq!(e >= 0, ep >= 0);
        }
    }
}
