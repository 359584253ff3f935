//! Local differences, cell frequency and the seven-band smoothness order.
//!
//! All quantities are kept as scaled integers: a local difference is stored
//! in sixths and a cell frequency in thirtieths, so the embedder and the
//! receiver classify every site identically on any platform.

use crate::error::{Error, Result};
use crate::image::{Raster, Site};

/// A local difference measured in sixths of an intensity level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sixths(pub u32);

impl Sixths {
    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / 6.0
    }
}

/// Local difference of a four-pixel center cell: `(S4-S1)/2 + (S3-S2)/6`
/// with `S1..S4` the sorted values.
pub fn ld_center(mut n4: [i32; 4]) -> Sixths {
    n4.sort_unstable();
    let [s1, s2, s3, s4] = n4;
    Sixths((3 * (s4 - s1) + (s3 - s2)) as u32)
}

/// Local difference of a three-pixel side cell: `2(I3-I1)/3`.
pub fn ld_side(n3: [i32; 3]) -> Sixths {
    let lo = n3.iter().min().unwrap();
    let hi = n3.iter().max().unwrap();
    Sixths((4 * (hi - lo)) as u32)
}

/// Mean local difference around a site, in thirtieths, plus its raster index
/// for tie-breaking. Orders by value, then raster index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellFrequency {
    pub thirtieths: u32,
    pub raster: usize,
}

impl CellFrequency {
    pub fn value(self) -> f64 {
        f64::from(self.thirtieths) / 30.0
    }
}

/// Offsets (row, col) of the five cells around a target.
const CENTER: [(isize, isize); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];
const SIDES: [[(isize, isize); 3]; 4] = [
    // right
    [(1, 2), (0, 1), (-1, 2)],
    // left
    [(0, -1), (1, -2), (-1, -2)],
    // up
    [(-2, -1), (-1, 0), (-2, 1)],
    // low
    [(2, -1), (1, 0), (2, 1)],
];

/// Every coordinate read by [`cell_frequency`] for `site`.
pub fn cell_coordinates(site: Site) -> impl Iterator<Item = Site> {
    CENTER
        .into_iter()
        .chain(SIDES.into_iter().flatten())
        .map(move |(dr, dc)| {
            Site::new(
                site.row.wrapping_add_signed(dr),
                site.col.wrapping_add_signed(dc),
            )
        })
}

#[inline]
fn at<R: Raster + ?Sized>(img: &R, site: Site, (dr, dc): (isize, isize)) -> i32 {
    img.value(
        site.row.wrapping_add_signed(dr),
        site.col.wrapping_add_signed(dc),
    )
}

/// Cell frequency: the mean of the center-cell and four side-cell local
/// differences. Reads only pixels of the opposite color to `site`.
pub fn cell_frequency<R: Raster + ?Sized>(img: &R, site: Site) -> Result<CellFrequency> {
    if !site.is_interior(img.width(), img.height()) {
        return Err(Error::SiteOutsideInterior {
            row: site.row,
            col: site.col,
        });
    }
    Ok(cell_frequency_unchecked(img, site))
}

pub(crate) fn cell_frequency_unchecked<R: Raster + ?Sized>(img: &R, site: Site) -> CellFrequency {
    let center = ld_center(CENTER.map(|o| at(img, site, o)));
    let sides: u32 = SIDES
        .iter()
        .map(|cell| ld_side(cell.map(|o| at(img, site, o))).0)
        .sum();
    // (sum of sixths) / 5 = sum / 30
    CellFrequency {
        thirtieths: center.0 + sides,
        raster: site.raster(img.width()),
    }
}

/// Smoothness classes, smoothest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Band {
    Ulcf,
    Vlcf,
    Lcf,
    Mcf,
    Hcf,
    Vhcf,
    Uhcf,
}

impl Band {
    pub const ALL: [Band; 7] = [
        Band::Ulcf,
        Band::Vlcf,
        Band::Lcf,
        Band::Mcf,
        Band::Hcf,
        Band::Vhcf,
        Band::Uhcf,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::Ulcf => "ULCF",
            Band::Vlcf => "VLCF",
            Band::Lcf => "LCF",
            Band::Mcf => "MCF",
            Band::Hcf => "HCF",
            Band::Vhcf => "VHCF",
            Band::Uhcf => "UHCF",
        }
    }

    /// The roughest band never carries data.
    pub fn is_embeddable(self) -> bool {
        self != Band::Uhcf
    }
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Upper bounds of the first six bands plus the per-pass bias, all in tenths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BandThresholds {
    tenths: [u32; 6],
    bias_tenths: u32,
}

impl Default for BandThresholds {
    fn default() -> Self {
        Self {
            tenths: [33, 45, 60, 90, 130, 180],
            bias_tenths: 3,
        }
    }
}

impl BandThresholds {
    pub fn from_tenths(tenths: [u32; 6], bias_tenths: u32) -> Result<Self> {
        if tenths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "band thresholds must be strictly increasing, got {tenths:?}"
            )));
        }
        Ok(Self {
            tenths,
            bias_tenths,
        })
    }

    /// Builds from real values, rounded to the nearest tenth.
    pub fn from_values(values: [f64; 6], bias: f64) -> Result<Self> {
        let to_tenths = |v: f64| -> Result<u32> {
            if !v.is_finite() || !(0.0..=1e6).contains(&v) {
                return Err(Error::InvalidConfig(format!("threshold {v} out of range")));
            }
            Ok((v * 10.0).round() as u32)
        };
        let mut tenths = [0u32; 6];
        for (t, v) in tenths.iter_mut().zip(values) {
            *t = to_tenths(v)?;
        }
        Self::from_tenths(tenths, to_tenths(bias)?)
    }

    pub fn tenths(&self) -> [u32; 6] {
        self.tenths
    }

    pub fn bias_tenths(&self) -> u32 {
        self.bias_tenths
    }

    pub fn values(&self) -> [f64; 6] {
        self.tenths.map(|t| f64::from(t) / 10.0)
    }

    pub fn bias(&self) -> f64 {
        f64::from(self.bias_tenths) / 10.0
    }

    /// Thresholds in force for the given 0-based pass: each pass after the
    /// first raises every bound by the bias.
    pub fn for_pass(&self, pass: usize) -> Self {
        let shift = self.bias_tenths * pass as u32;
        Self {
            tenths: self.tenths.map(|t| t + shift),
            bias_tenths: self.bias_tenths,
        }
    }
}

/// Band of a cell frequency. Upper bounds are inclusive.
pub fn classify_band(fc: CellFrequency, t: &BandThresholds) -> Band {
    // fc = thirtieths / 30 <= tenths / 10  <=>  thirtieths <= 3 * tenths
    t.tenths
        .iter()
        .position(|&bound| fc.thirtieths <= 3 * bound)
        .map_or(Band::Uhcf, |i| Band::ALL[i])
}

/// Same classification from a real-valued cell frequency.
pub fn classify_value(fc: f64, t: &BandThresholds) -> Band {
    t.values()
        .iter()
        .position(|&bound| fc <= bound)
        .map_or(Band::Uhcf, |i| Band::ALL[i])
}

/// A site with its cell frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatedSite {
    pub site: Site,
    pub fc: CellFrequency,
}

/// Sites grouped by band, each group in ascending cell frequency with raster
/// tie-break.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BandGroups {
    groups: [Vec<RatedSite>; 7],
}

impl BandGroups {
    pub fn group(&self, band: Band) -> &[RatedSite] {
        &self.groups[band.index()]
    }

    pub fn into_groups(self) -> [Vec<RatedSite>; 7] {
        self.groups
    }

    /// Embeddable sites in embedding order (UHCF excluded).
    pub fn embedding_order(&self) -> impl Iterator<Item = &RatedSite> {
        self.groups[..6].iter().flatten()
    }

    pub fn counts(&self) -> [usize; 7] {
        std::array::from_fn(|i| self.groups[i].len())
    }
}

pub fn order_sites(sites: impl IntoIterator<Item = RatedSite>, t: &BandThresholds) -> BandGroups {
    let mut out = BandGroups::default();
    for rs in sites {
        out.groups[classify_band(rs.fc, t).index()].push(rs);
    }
    for g in out.groups.iter_mut() {
        g.sort_unstable_by_key(|rs| rs.fc);
    }
    out
}
