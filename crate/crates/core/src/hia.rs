//! Hiding intensity analysis: choosing the threshold pair for each band.
//!
//! For every symmetric candidate `(k-1, -k)` the band's prediction-error
//! histogram gives the number of bit-carrying errors (`n_sv`) and the number
//! of errors that must be shifted (`n_usv`). The hiding intensity
//! `n_sv / n_usv` and the power of hiding rank candidates.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::predictor::SvPair;

/// Prediction-error histogram of one band.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PeHistogram(BTreeMap<i32, u64>);

impl PeHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, e: i32) {
        *self.0.entry(e).or_default() += 1;
    }

    pub fn count(&self, e: i32) -> u64 {
        self.0.get(&e).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, u64)> + '_ {
        self.0.iter().map(|(&e, &c)| (e, c))
    }

    /// Standard deviation of the errors.
    pub fn std_dev(&self) -> f64 {
        let n = self.total() as f64;
        if n == 0.0 {
            return 0.0;
        }
        let mean = self.iter().map(|(e, c)| e as f64 * c as f64).sum::<f64>() / n;
        let var = self
            .iter()
            .map(|(e, c)| (e as f64 - mean).powi(2) * c as f64)
            .sum::<f64>()
            / n;
        var.sqrt()
    }
}

impl FromIterator<i32> for PeHistogram {
    fn from_iter<T: IntoIterator<Item = i32>>(iter: T) -> Self {
        let mut h = Self::new();
        for e in iter {
            h.add(e);
        }
        h
    }
}

impl<const N: usize> From<[(i32, u64); N]> for PeHistogram {
    fn from(pairs: [(i32, u64); N]) -> Self {
        Self(pairs.into_iter().filter(|&(_, c)| c > 0).collect())
    }
}

/// Serviceable and shifted counts for one threshold pair.
pub fn tally(hist: &PeHistogram, sv: SvPair) -> (u64, u64) {
    let n_sv = hist.count(sv.sv_p()) + hist.count(sv.sv_n());
    let n_usv = hist
        .iter()
        .filter(|&(e, _)| e > sv.sv_p() || e < sv.sv_n())
        .map(|(_, c)| c)
        .sum();
    (n_sv, n_usv)
}

/// Bits carried per shifted pixel; infinite when nothing has to shift.
pub fn hiding_intensity(n_sv: u64, n_usv: u64) -> Result<f64> {
    match (n_sv, n_usv) {
        (0, 0) => Err(Error::EmptyCounts),
        (_, 0) => Ok(f64::INFINITY),
        _ => Ok(n_sv as f64 / n_usv as f64),
    }
}

/// How the power of hiding weighs capacity against hiding intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PohMode {
    /// `n_sv^2 / n_usv`.
    Eq14,
    /// `n_sv * sqrt(n_sv / n_usv)`.
    #[default]
    Table2,
}

impl PohMode {
    pub fn bit(self) -> bool {
        self == PohMode::Table2
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            PohMode::Table2
        } else {
            PohMode::Eq14
        }
    }
}

impl std::str::FromStr for PohMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eq14" => Ok(PohMode::Eq14),
            "table2" => Ok(PohMode::Table2),
            other => Err(Error::InvalidConfig(format!("unknown PoH mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for PohMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PohMode::Eq14 => "eq14",
            PohMode::Table2 => "table2",
        })
    }
}

/// Power of hiding. Errors when `n_usv` is zero; rankings score that case
/// with `n_usv = 1`.
pub fn power_of_hiding(n_sv: u64, n_usv: u64, mode: PohMode) -> Result<f64> {
    if n_usv == 0 {
        return Err(Error::EmptyCounts);
    }
    let (s, u) = (n_sv as f64, n_usv as f64);
    Ok(match mode {
        PohMode::Eq14 => s * s / u,
        PohMode::Table2 => s * (s / u).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateRow {
    pub k: u8,
    pub sv: SvPair,
    pub n_sv: u64,
    pub n_usv: u64,
}

impl CandidateRow {
    pub fn hi(&self) -> f64 {
        hiding_intensity(self.n_sv, self.n_usv).unwrap_or(0.0)
    }

    pub fn poh(&self, mode: PohMode) -> f64 {
        power_of_hiding(self.n_sv, self.n_usv.max(1), mode).unwrap_or(0.0)
    }

    /// Exact comparison of `n_sv / n_usv`.
    fn cmp_hi(&self, other: &Self) -> Ordering {
        cmp_ratio(
            u128::from(self.n_sv),
            u128::from(self.n_usv),
            u128::from(other.n_sv),
            u128::from(other.n_usv),
        )
    }

    /// Exact comparison of the power of hiding (its square for Table2 mode).
    /// A pair that shifts nothing is scored as if it shifted one error, so
    /// it cannot outrank a far larger pair on a handful of bits.
    fn cmp_poh(&self, other: &Self, mode: PohMode) -> Ordering {
        let num = |r: &Self| {
            let s = u128::from(r.n_sv);
            match mode {
                PohMode::Eq14 => s * s,
                PohMode::Table2 => s * s * s,
            }
        };
        cmp_ratio(
            num(self),
            u128::from(self.n_usv.max(1)),
            num(other),
            u128::from(other.n_usv.max(1)),
        )
    }
}

/// Compares `a / b` with `c / d`, where a zero denominator is +infinity.
fn cmp_ratio(a: u128, b: u128, c: u128, d: u128) -> Ordering {
    match (b == 0, d == 0) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => (a * d).cmp(&(c * b)),
    }
}

/// One row per candidate `k = 1..=K`; rows with no serviceable and no
/// shifted errors are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvCandidateTable {
    rows: Vec<CandidateRow>,
}

impl SvCandidateTable {
    pub fn from_histogram(hist: &PeHistogram, k_max: u8) -> Self {
        let rows = (1..=k_max)
            .map(|k| {
                let sv = SvPair::candidate(k);
                let (n_sv, n_usv) = tally(hist, sv);
                CandidateRow { k, sv, n_sv, n_usv }
            })
            .filter(|r| r.n_sv > 0 || r.n_usv > 0)
            .collect();
        Self { rows }
    }

    /// Builds from `(k, n_sv, n_usv)` triples.
    pub fn from_counts(counts: &[(u8, u64, u64)]) -> Self {
        let rows = counts
            .iter()
            .filter(|&&(_, s, u)| s > 0 || u > 0)
            .map(|&(k, n_sv, n_usv)| CandidateRow {
                k,
                sv: SvPair::candidate(k),
                n_sv,
                n_usv,
            })
            .collect();
        Self { rows }
    }

    /// Rows in candidate order.
    pub fn rows(&self) -> &[CandidateRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows by descending hiding intensity; ties go to larger `n_sv`, then
    /// smaller `k`.
    pub fn sorted_by_hi(&self) -> Vec<CandidateRow> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| b.cmp_hi(a).then(b.n_sv.cmp(&a.n_sv)).then(a.k.cmp(&b.k)));
        rows
    }

    /// Row with the largest power of hiding; ties go to larger `n_sv`, then
    /// smaller `k`.
    pub fn max_poh(&self, mode: PohMode) -> Option<CandidateRow> {
        self.rows.iter().copied().max_by(|a, b| {
            a.cmp_poh(b, mode)
                .then(a.n_sv.cmp(&b.n_sv))
                .then(b.k.cmp(&a.k))
        })
    }

    pub fn max_serviceable(&self) -> u64 {
        self.rows.iter().map(|r| r.n_sv).max().unwrap_or(0)
    }
}

/// Threshold pair and bit budget for one band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentPlan {
    pub k: u8,
    pub sv: SvPair,
    pub bits_to_embed: u64,
    pub exhausts_band: bool,
}

/// Picks the candidate for `n_b` remaining bits.
///
/// If the best-PoH candidate cannot take them all, it fills the band.
/// Otherwise the first candidate in descending-HI order with enough
/// serviceable errors takes all `n_b` bits.
pub fn plan_segment(table: &SvCandidateTable, n_b: u64, mode: PohMode) -> Result<SegmentPlan> {
    let best = table.max_poh(mode).ok_or(Error::BandEmpty)?;
    if best.n_sv == 0 {
        return Err(Error::BandEmpty);
    }
    if n_b > best.n_sv {
        return Ok(SegmentPlan {
            k: best.k,
            sv: best.sv,
            bits_to_embed: best.n_sv,
            exhausts_band: true,
        });
    }
    let chosen = table
        .sorted_by_hi()
        .into_iter()
        .find(|r| n_b <= r.n_sv)
        .unwrap_or(best);
    let bits = n_b.min(chosen.n_sv);
    Ok(SegmentPlan {
        k: chosen.k,
        sv: chosen.sv,
        bits_to_embed: bits,
        exhausts_band: bits == chosen.n_sv,
    })
}
