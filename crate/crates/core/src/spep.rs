//! Sorting by pixel existence probability.
//!
//! The smoothest ULCF sites (`L_ULCF`) vote for the predicted intensities
//! they contain. An intensity that shows up mostly inside `L_ULCF` marks
//! smooth areas, so ULCF and VLCF sites are split into sub-bands by how
//! probable their predicted intensity is.

use crate::band::{Band, RatedSite};
use crate::error::{Error, Result};
use crate::image::{enumerate_sites, ColorParity, Raster, Site};
use crate::predictor::predict_at;

/// Scale of probability thresholds: 10_000 means 1.0.
pub const PROBABILITY_SCALE: u32 = 10_000;

/// Per-intensity counts behind the existence probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistenceProfile {
    /// Sites of the pass color predicting each intensity.
    pub total: [u32; 256],
    /// The same count restricted to `L_ULCF`.
    pub in_l_ulcf: [u32; 256],
    pub l_ulcf_size: usize,
}

impl ExistenceProfile {
    /// `f(h) = M_h / N_h`, or 0 when no site predicts `h`.
    pub fn probability(&self, intensity: u8) -> f64 {
        let n = self.total[intensity as usize];
        if n == 0 {
            0.0
        } else {
            f64::from(self.in_l_ulcf[intensity as usize]) / f64::from(n)
        }
    }

    /// Exact test of `f(h) >= threshold / PROBABILITY_SCALE`.
    pub fn reaches(&self, intensity: u8, threshold: u32) -> bool {
        let n = u64::from(self.total[intensity as usize]);
        if n == 0 {
            return threshold == 0;
        }
        let m = u64::from(self.in_l_ulcf[intensity as usize]);
        m * u64::from(PROBABILITY_SCALE) >= u64::from(threshold) * n
    }

    /// Intensities ordered by descending probability (ties by intensity).
    pub fn ranked(&self) -> Vec<u8> {
        let mut order: Vec<u8> = (0..=255).collect();
        // compare m1/n1 against m2/n2 exactly
        let ratio = |h: u8| {
            let n = u64::from(self.total[h as usize]);
            let m = if n == 0 {
                0
            } else {
                u64::from(self.in_l_ulcf[h as usize])
            };
            (m, n.max(1))
        };
        order.sort_by(|&a, &b| {
            let ((ma, na), (mb, nb)) = (ratio(a), ratio(b));
            (mb * na).cmp(&(ma * nb)).then(a.cmp(&b))
        });
        order
    }
}

/// The `size` ULCF sites with the smallest cell frequency.
pub fn select_l_ulcf(ulcf_sites: &[RatedSite], size: usize) -> Vec<RatedSite> {
    let mut sorted = ulcf_sites.to_vec();
    if sorted.len() > size {
        sorted.select_nth_unstable_by_key(size, |rs| rs.fc);
        sorted.truncate(size);
    }
    sorted.sort_unstable_by_key(|rs| rs.fc);
    sorted
}

/// Counts predicted intensities over all interior sites of `color` and over
/// `l_ulcf`.
pub fn existence_profile<R: Raster + ?Sized>(
    img: &R,
    color: ColorParity,
    l_ulcf: &[Site],
) -> ExistenceProfile {
    let mut total = [0u32; 256];
    for site in enumerate_sites(img, color) {
        total[predicted_index(img, site)] += 1;
    }
    let mut in_l_ulcf = [0u32; 256];
    for &site in l_ulcf {
        in_l_ulcf[predicted_index(img, site)] += 1;
    }
    ExistenceProfile {
        total,
        in_l_ulcf,
        l_ulcf_size: l_ulcf.len(),
    }
}

fn predicted_index<R: Raster + ?Sized>(img: &R, site: Site) -> usize {
    predict_at(img, site).clamp(0, 255) as usize
}

/// Descending probability thresholds splitting ULCF and VLCF into
/// `len() + 1` sub-bands. Stored in units of 1/10_000.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubbandThresholds(Vec<u32>);

impl SubbandThresholds {
    pub fn new(scaled: Vec<u32>) -> Result<Self> {
        if scaled.iter().any(|&t| t > PROBABILITY_SCALE) {
            return Err(Error::InvalidConfig(format!(
                "probability thresholds must lie in [0, 1], got {scaled:?}"
            )));
        }
        if scaled.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "probability thresholds must be strictly descending, got {scaled:?}"
            )));
        }
        Ok(Self(scaled))
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        let mut scaled = Vec::with_capacity(values.len());
        for &v in values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "probability threshold {v} outside [0, 1]"
                )));
            }
            scaled.push((v * f64::from(PROBABILITY_SCALE)).round() as u32);
        }
        Self::new(scaled)
    }

    /// No split: ULCF and VLCF stay whole.
    pub fn none() -> Self {
        Self(Vec::new())
    }

    pub fn scaled(&self) -> &[u32] {
        &self.0
    }

    /// Number of sub-bands, L.
    pub fn count(&self) -> usize {
        self.0.len() + 1
    }
}

/// Sub-band of a site: always 1 outside ULCF and VLCF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubBandAssignment {
    pub band: Band,
    pub sub_index: usize,
}

pub fn assign_subband(
    predicted: u8,
    band: Band,
    profile: &ExistenceProfile,
    thresholds: &SubbandThresholds,
) -> SubBandAssignment {
    let sub_index = match band {
        Band::Ulcf | Band::Vlcf => thresholds
            .0
            .iter()
            .position(|&t| profile.reaches(predicted, t))
            .map_or(thresholds.count(), |j| j + 1),
        _ => 1,
    };
    SubBandAssignment { band, sub_index }
}
