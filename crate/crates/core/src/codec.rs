//! Multi-pass embedding and blind extraction.
//!
//! The bitstream is the original LSBs of the reserved region followed by the
//! payload. The first half goes into the start color, the second half into
//! the other color; each pass walks the slots smooth-to-rough and picks a
//! threshold pair per slot. After all passes the overhead header is written
//! into the reserved LSBs, which were zeroed beforehand so the receiver can
//! reproduce the exact state the passes ran on.

use crate::band::{cell_frequency_unchecked, order_sites, Band, RatedSite};
use crate::bits::crc16;
use crate::config::{ConfigEcho, EmbedConfig};
use crate::error::{Error, Result};
use crate::header::{decode_header, encode_header, HeaderLayout, OverheadHeader, Segment};
use crate::hia::{plan_segment, CandidateRow, PeHistogram, SvCandidateTable};
use crate::image::{enumerate_sites, psnr, ColorParity, GrayImage, Raster, Site, MARGIN};
use crate::ou::{classify_pixel, fix_red, restore_red, OuClass, OuEntry, WorkImage};
use crate::predictor::{modify_error, predict_at, recover_error, SvPair};
use crate::spep::{assign_subband, existence_profile, select_l_ulcf, ExistenceProfile};

/// Smallest side length the codec accepts.
pub const MIN_SIDE: usize = 8;

fn check_size(width: usize, height: usize) -> Result<()> {
    if width < MIN_SIDE || height < MIN_SIDE {
        return Err(Error::ImageTooSmall { width, height });
    }
    Ok(())
}

/// Raster indices of the reserved region in fill order: the bottom two
/// rows, the top two rows, the left and right two columns, then interior
/// rows from the bottom up. Only the first `max_reserved` entries are ever
/// used.
pub fn reserved_positions(width: usize, height: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(width * height);
    for row in [height - 1, height - 2, 0, 1] {
        out.extend((0..width).map(|c| row * width + c));
    }
    for row in MARGIN..height - MARGIN {
        for col in [0, 1, width - 2, width - 1] {
            out.push(row * width + col);
        }
    }
    for row in (MARGIN..height - MARGIN).rev() {
        out.extend((MARGIN..width - MARGIN).map(|c| row * width + c));
    }
    out.truncate(max_reserved(width, height));
    out
}

/// The border ring plus half of the interior.
pub fn max_reserved(width: usize, height: usize) -> usize {
    let interior = (width - 2 * MARGIN) * (height - 2 * MARGIN);
    width * height - interior + interior / 2
}

#[derive(Debug, Clone)]
struct SlotSite {
    index: usize,
    hp: i32,
}

/// Everything both sides derive identically for one pass.
struct PassPlan {
    slots: Vec<Vec<SlotSite>>,
    yellow: Vec<u32>,
    uhcf: usize,
    profile: ExistenceProfile,
}

/// Per-pass instrumentation, equal on both sides when extraction is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassTrace {
    pub pass_index: u32,
    pub color: ColorParity,
    pub yellow: Vec<u32>,
    pub order_digest: u16,
}

fn plan_pass(
    img: &WorkImage,
    color: ColorParity,
    pass_index: u32,
    echo: &ConfigEcho,
    excluded: &[bool],
) -> PassPlan {
    let width = img.width();
    let mut yellow = Vec::new();
    let mut green = Vec::new();
    for site in enumerate_sites(img, color) {
        let index = site.raster(width);
        if excluded[index] {
            continue;
        }
        let hp = predict_at(img, site);
        match classify_pixel(img.get_index(index), hp, echo.tau) {
            OuClass::Yellow => yellow.push(index as u32),
            OuClass::Green => green.push(RatedSite {
                site,
                fc: cell_frequency_unchecked(img, site),
            }),
        }
    }

    let thresholds = echo.thresholds.for_pass(pass_index as usize);
    let groups = order_sites(green, &thresholds);
    let l_ulcf: Vec<Site> = select_l_ulcf(groups.group(Band::Ulcf), echo.l_ulcf_size as usize)
        .into_iter()
        .map(|rs| rs.site)
        .collect();
    let profile = existence_profile(img, color, &l_ulcf);

    let mut slots = vec![Vec::new(); echo.slot_count()];
    for band in Band::ALL {
        if !band.is_embeddable() {
            continue;
        }
        for rs in groups.group(band) {
            let hp = predict_at(img, rs.site);
            let sub = assign_subband(hp as u8, band, &profile, &echo.subbands);
            let slot = echo
                .slot_of(band, sub.sub_index)
                .expect("embeddable band has a slot");
            slots[slot].push(SlotSite {
                index: rs.site.raster(width),
                hp,
            });
        }
    }
    PassPlan {
        slots,
        yellow,
        uhcf: groups.group(Band::Uhcf).len(),
        profile,
    }
}

impl PassPlan {
    fn trace(&self, pass_index: u32, color: ColorParity) -> PassTrace {
        let order: Vec<bool> = self
            .slots
            .iter()
            .flatten()
            .flat_map(|s| (0..32).map(move |i| (s.index >> i) & 1 == 1))
            .collect();
        PassTrace {
            pass_index,
            color,
            yellow: self.yellow.clone(),
            order_digest: crc16(&order),
        }
    }
}

fn histogram(img: &WorkImage, sites: &[SlotSite]) -> PeHistogram {
    sites
        .iter()
        .map(|s| img.get_index(s.index) - s.hp)
        .collect()
}

fn color_of(start: ColorParity, pass_index: u32) -> ColorParity {
    if pass_index.is_multiple_of(2) {
        start
    } else {
        start.opposite()
    }
}

/// A header segment with the number of bits it carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentReport {
    pub segment: Segment,
    pub bits: u64,
}

/// Summary of one embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedReport {
    pub payload_bits: usize,
    pub reserved_bits: usize,
    pub header_bits: usize,
    pub levels: usize,
    pub segments: Vec<SegmentReport>,
    pub ou_entries: usize,
    pub psnr: f64,
    pub traces: Vec<PassTrace>,
}

impl EmbedReport {
    /// Payload plus the embedded copy of the reserved LSBs.
    pub fn bitstream_bits(&self) -> usize {
        self.payload_bits + self.reserved_bits
    }
}

#[derive(Debug, Clone)]
pub struct Embedded {
    pub marked: GrayImage,
    pub report: EmbedReport,
}

struct Attempt {
    work: WorkImage,
    segments: Vec<SegmentReport>,
    ou_entries: Vec<OuEntry>,
    traces: Vec<PassTrace>,
    levels: usize,
}

fn excluded_mask(width: usize, height: usize, positions: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; width * height];
    for &p in positions {
        mask[p] = true;
    }
    mask
}

fn attempt(
    cover: &GrayImage,
    payload: &[bool],
    cfg: &EmbedConfig,
    reserved: &[usize],
) -> Result<Attempt> {
    let (width, height) = (cover.width(), cover.height());
    let mut work = WorkImage::from_gray(cover);
    let mut stream: Vec<bool> = reserved
        .iter()
        .map(|&p| work.get_index(p) & 1 == 1)
        .collect();
    stream.extend_from_slice(payload);
    for &p in reserved {
        work.set_index(p, work.get_index(p) & !1);
    }
    let excluded = excluded_mask(width, height, reserved);

    let split = stream.len().div_ceil(2);
    let ends = [split, stream.len()];
    let mut cursors = [0, split];
    let mut segments = Vec::new();
    let mut ou_entries = Vec::new();
    let mut traces = Vec::new();
    let mut levels = 0;
    let remaining = |c: &[usize; 2]| (ends[0] - c[0]) + (ends[1] - c[1]);

    while remaining(&cursors) > 0 {
        if levels == usize::from(cfg.max_levels) {
            return Err(Error::CapacityExceeded {
                requested: stream.len(),
                remaining: remaining(&cursors),
                levels,
            });
        }
        let before = remaining(&cursors);
        for c in 0..2 {
            if cursors[c] == ends[c] {
                continue;
            }
            let pass_index = (2 * levels + c) as u32;
            let color = color_of(cfg.start_color, pass_index);
            let plan = plan_pass(&work, color, pass_index, &cfg.echo, &excluded);
            traces.push(plan.trace(pass_index, color));
            for (slot, sites) in plan.slots.iter().enumerate() {
                let left = (ends[c] - cursors[c]) as u64;
                if left == 0 {
                    break;
                }
                if sites.is_empty() {
                    continue;
                }
                let table =
                    SvCandidateTable::from_histogram(&histogram(&work, sites), cfg.echo.k_max);
                let seg = match plan_segment(&table, left, cfg.echo.poh_mode) {
                    Ok(p) => p,
                    Err(Error::BandEmpty) => continue,
                    Err(e) => return Err(e),
                };
                let whole = seg.exhausts_band;
                let mut done = 0;
                for s in sites {
                    if !whole && done == seg.bits_to_embed {
                        break;
                    }
                    let e = work.get_index(s.index) - s.hp;
                    let bit = if seg.sv.is_serviceable(e) {
                        let b = stream[cursors[c]];
                        cursors[c] += 1;
                        done += 1;
                        Some(b)
                    } else {
                        None
                    };
                    work.set_index(s.index, s.hp + modify_error(e, seg.sv, bit)?);
                }
                segments.push(SegmentReport {
                    segment: Segment {
                        pass_index,
                        slot: slot as u8,
                        k: seg.k,
                        limit: (!whole).then_some(done),
                    },
                    bits: done,
                });
            }
            ou_entries.extend(fix_red(&mut work, pass_index)?);
        }
        levels += 1;
        if remaining(&cursors) == before {
            return Err(Error::CapacityExceeded {
                requested: stream.len(),
                remaining: before,
                levels,
            });
        }
    }
    traces.retain(|t| {
        segments
            .iter()
            .any(|s| s.segment.pass_index == t.pass_index)
    });
    Ok(Attempt {
        work,
        segments,
        ou_entries,
        traces,
        levels,
    })
}

/// Embeds `payload` into `cover`.
pub fn embed(cover: &GrayImage, payload: &[bool], cfg: &EmbedConfig) -> Result<Embedded> {
    cfg.validate()?;
    let (width, height) = (cover.width(), cover.height());
    check_size(width, height)?;
    let layout = HeaderLayout::for_image(width, height);
    let positions = reserved_positions(width, height);
    let cap = positions.len();

    let header_for = |a: &Attempt, reserved: usize| OverheadHeader {
        start_color: cfg.start_color,
        config: cfg.echo.clone(),
        reserved_len: reserved as u32,
        total_bitstream_len: (reserved + payload.len()) as u64,
        segments: a.segments.iter().map(|s| s.segment).collect(),
        ou_entries: a.ou_entries.clone(),
    };

    // Grow the reserved region until the header fits, then shrink it while
    // the smaller region still holds the resulting header.
    let mut reserved = initial_reserved(cfg, &layout).min(cap);
    let mut fitted: Option<(usize, Attempt, Vec<bool>)> = None;
    for _ in 0..64 {
        let a = match attempt(cover, payload, cfg, &positions[..reserved]) {
            Ok(a) => a,
            Err(_) if fitted.is_some() => break,
            Err(e) => return Err(e),
        };
        let bits = encode_header(&header_for(&a, reserved), &layout)?;
        if bits.len() <= reserved {
            let next = bits.len();
            fitted = Some((reserved, a, bits));
            if next == reserved {
                break;
            }
            reserved = next;
        } else if fitted.is_some() {
            break;
        } else if reserved == cap {
            return Err(Error::HeaderOverflow {
                needed: bits.len(),
                available: cap,
            });
        } else {
            reserved = bits.len().max(reserved + reserved / 8 + 1).min(cap);
        }
    }
    let (reserved, a, bits) = fitted.ok_or(Error::HeaderOverflow {
        needed: reserved,
        available: cap,
    })?;
    let mut work = a.work;
    for (&p, &b) in positions.iter().zip(&bits) {
        work.set_index(p, work.get_index(p) | i32::from(b));
    }
    let marked = work.to_gray()?;
    let report = EmbedReport {
        payload_bits: payload.len(),
        reserved_bits: reserved,
        header_bits: bits.len(),
        levels: a.levels,
        ou_entries: a.ou_entries.len(),
        segments: a.segments,
        psnr: psnr(cover, &marked)?,
        traces: a.traces,
    };
    Ok(Embedded { marked, report })
}

/// Header size with a config echo if needed and four short segments.
fn initial_reserved(cfg: &EmbedConfig, layout: &HeaderLayout) -> usize {
    let base = OverheadHeader {
        start_color: cfg.start_color,
        config: cfg.echo.clone(),
        reserved_len: 0,
        total_bitstream_len: 0,
        segments: (0..4)
            .map(|i| Segment {
                pass_index: i / 2,
                slot: (i % 2) as u8,
                k: 1,
                limit: Some(1),
            })
            .collect(),
        ou_entries: Vec::new(),
    };
    encode_header(&base, layout).map_or(64, |b| b.len())
}

#[derive(Debug, Clone)]
pub struct Extracted {
    pub cover: GrayImage,
    pub payload: Vec<bool>,
    pub header: OverheadHeader,
    pub segments: Vec<SegmentReport>,
    pub traces: Vec<PassTrace>,
}

/// Reads the header from `marked` and undoes every pass.
pub fn extract(marked: &GrayImage) -> Result<Extracted> {
    let (width, height) = (marked.width(), marked.height());
    check_size(width, height)?;
    let layout = HeaderLayout::for_image(width, height);
    let positions = reserved_positions(width, height);
    let lsbs: Vec<bool> = positions
        .iter()
        .map(|&p| marked.pixels()[p] & 1 == 1)
        .collect();
    let (header, _) = decode_header(&lsbs, &layout)?;

    let reserved = header.reserved_len as usize;
    if reserved > positions.len() {
        return Err(Error::InconsistentHeader(format!(
            "reserved length {reserved} exceeds {}",
            positions.len()
        )));
    }
    let pixels = (width * height) as u32;
    if let Some(e) = header.ou_entries.iter().find(|e| e.raster_index >= pixels) {
        return Err(Error::InconsistentHeader(format!(
            "overflow entry index {} outside the image",
            e.raster_index
        )));
    }
    let reserved_pos = &positions[..reserved];
    let mut work = WorkImage::from_gray(marked);
    for &p in reserved_pos {
        work.set_index(p, work.get_index(p) & !1);
    }
    let excluded = excluded_mask(width, height, reserved_pos);
    let echo = &header.config;

    let passes = header.num_passes();
    let mut per_segment: Vec<Vec<bool>> = vec![Vec::new(); header.segments.len()];
    let limit_reached = |seg: &Segment, n: usize| seg.limit.is_some_and(|l| n as u64 == l);
    let mut traces = Vec::new();
    for pass_index in (0..passes).rev() {
        let entries: Vec<OuEntry> = header
            .ou_entries
            .iter()
            .filter(|e| e.pass_index == pass_index)
            .copied()
            .collect();
        let seg_ids: Vec<usize> = (0..header.segments.len())
            .filter(|&i| header.segments[i].pass_index == pass_index)
            .collect();
        if seg_ids.is_empty() && entries.is_empty() {
            continue;
        }
        restore_red(&mut work, &entries).map_err(|e| Error::Corrupted(e.to_string()))?;
        let color = color_of(header.start_color, pass_index);
        let plan = plan_pass(&work, color, pass_index, echo, &excluded);
        traces.push(plan.trace(pass_index, color));
        for &id in seg_ids.iter().rev() {
            let seg = header.segments[id];
            let sv = SvPair::candidate(seg.k);
            let out = &mut per_segment[id];
            for s in &plan.slots[usize::from(seg.slot)] {
                if limit_reached(&seg, out.len()) {
                    break;
                }
                let (e, bit) = recover_error(work.get_index(s.index) - s.hp, sv);
                work.set_index(s.index, s.hp + e);
                out.extend(bit);
            }
            if out.is_empty() || seg.limit.is_some_and(|l| (out.len() as u64) < l) {
                return Err(Error::Corrupted(format!(
                    "pass {pass_index} slot {} yielded {} bits",
                    seg.slot,
                    out.len()
                )));
            }
        }
    }
    traces.reverse();

    let mut halves = [Vec::new(), Vec::new()];
    let mut segments = Vec::with_capacity(per_segment.len());
    for (seg, bits) in header.segments.iter().zip(per_segment) {
        segments.push(SegmentReport {
            segment: *seg,
            bits: bits.len() as u64,
        });
        halves[(seg.pass_index % 2) as usize].extend(bits);
    }
    let total = header.total_bitstream_len as usize;
    if halves[0].len() != total.div_ceil(2) || halves[0].len() + halves[1].len() != total {
        return Err(Error::Corrupted(
            "recovered bit count does not match the header".into(),
        ));
    }
    let [mut stream, second] = halves;
    stream.extend(second);

    for (&p, &b) in reserved_pos.iter().zip(&stream) {
        work.set_index(p, work.get_index(p) | i32::from(b));
    }
    let cover = work
        .to_gray()
        .map_err(|e| Error::Corrupted(e.to_string()))?;
    let payload = stream.split_off(reserved);
    Ok(Extracted {
        cover,
        payload,
        header,
        segments,
        traces,
    })
}

/// One slot of a capacity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotCapacity {
    pub slot: usize,
    pub label: String,
    pub sites: usize,
    pub candidates: Vec<CandidateRow>,
    pub chosen: Option<CandidateRow>,
}

#[derive(Debug, Clone)]
pub struct PassCapacity {
    pub pass_index: u32,
    pub color: ColorParity,
    pub slots: Vec<SlotCapacity>,
    pub yellow: usize,
    pub uhcf: usize,
    pub profile: ExistenceProfile,
}

impl PassCapacity {
    pub fn capacity(&self) -> u64 {
        self.slots
            .iter()
            .filter_map(|s| s.chosen)
            .map(|r| r.n_sv)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct CapacityScan {
    pub passes: Vec<PassCapacity>,
    /// Estimated header and reserved-copy bits at the best single-level fill.
    pub overhead_estimate: u64,
    payload: u64,
}

impl CapacityScan {
    /// Serviceable errors under the best-PoH pair of every slot, both colors,
    /// first level.
    pub fn gross(&self) -> u64 {
        self.passes.iter().map(PassCapacity::capacity).sum()
    }

    /// Estimated payload bits a single level carries after overhead.
    pub fn payload_capacity(&self) -> u64 {
        self.payload
    }
}

/// Dry run of the first level on the unmodified cover.
pub fn capacity_scan(cover: &GrayImage, cfg: &EmbedConfig) -> Result<CapacityScan> {
    cfg.validate()?;
    let (width, height) = (cover.width(), cover.height());
    check_size(width, height)?;
    let work = WorkImage::from_gray(cover);
    let excluded = vec![false; width * height];
    let mut passes = Vec::new();
    // per pass, chosen slots in embedding order as (bits, expected clamps x2)
    let mut fills: Vec<Vec<(u64, u64)>> = Vec::new();
    for pass_index in 0..2u32 {
        let color = color_of(cfg.start_color, pass_index);
        let plan = plan_pass(&work, color, pass_index, &cfg.echo, &excluded);
        let mut slots = Vec::new();
        let mut fill = Vec::new();
        for (slot, sites) in plan.slots.iter().enumerate() {
            let table = SvCandidateTable::from_histogram(&histogram(&work, sites), cfg.echo.k_max);
            let chosen = table.max_poh(cfg.echo.poh_mode).filter(|r| r.n_sv > 0);
            if let Some(row) = chosen {
                // sites at a bound pushed past it; carriers only on a 1 bit
                let clamps: u64 = sites
                    .iter()
                    .map(|s| {
                        let h = work.get_index(s.index);
                        let e = h - s.hp;
                        match (h, e) {
                            (255, e) if e > row.sv.sv_p() => 2,
                            (0, e) if e < row.sv.sv_n() => 2,
                            (255, e) if e == row.sv.sv_p() => 1,
                            (0, e) if e == row.sv.sv_n() => 1,
                            _ => 0,
                        }
                    })
                    .sum();
                fill.push((row.n_sv, clamps));
            }
            slots.push(SlotCapacity {
                slot,
                label: cfg.echo.slot_label(slot),
                sites: sites.len(),
                candidates: table.rows().to_vec(),
                chosen,
            });
        }
        fills.push(fill);
        passes.push(PassCapacity {
            pass_index,
            color,
            slots,
            yellow: plan.yellow.len(),
            uhcf: plan.uhcf,
            profile: plan.profile,
        });
    }
    let layout = HeaderLayout::for_image(width, height);
    let fixed = initial_reserved(cfg, &layout) as u64;
    let all_clamps: u64 = fills.iter().flatten().map(|f| f.1).sum::<u64>() / 2;
    let per_clamp = ((width * height) as u64)
        .checked_div(all_clamps)
        .map_or(0, |gap| 2 * u64::from(63 - (gap + 1).leading_zeros()) + 2);
    let per_segment = 6;
    // header cost of the slots a pass needs to carry t bits; a partly used
    // slot is charged for the share of its clamps it reaches
    let cost = |fill: &[(u64, u64)], t: u64| {
        let mut carried = 0;
        let mut bits = 0;
        for &(n, clamps) in fill {
            if carried >= t {
                break;
            }
            let used = n.min(t - carried);
            carried += used;
            bits += per_segment + (clamps * per_clamp * used).div_ceil(2 * n);
        }
        bits
    };
    let limit = fills
        .iter()
        .map(|f| f.iter().map(|x| x.0).sum::<u64>())
        .min()
        .unwrap_or(0);
    let mut best = (0, fixed);
    let breakpoints = fills.iter().flat_map(|f| {
        f.iter().scan(0u64, |acc, x| {
            *acc += x.0;
            Some(*acc)
        })
    });
    for t in breakpoints.map(|t| t.min(limit)) {
        let overhead = fixed + cost(&fills[0], t) + cost(&fills[1], t);
        let net = (2 * t).saturating_sub(overhead);
        if net > best.0 {
            best = (net, overhead);
        }
    }
    Ok(CapacityScan {
        passes,
        overhead_estimate: best.1,
        payload: best.0,
    })
}
