use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdh_core::band::BandThresholds;
use rdh_core::codec::PassCapacity;
use rdh_core::hia::{CandidateRow, PohMode, SvCandidateTable};
use rdh_core::{
    capacity_scan, embed, extract, load_pgm, save_pgm, ColorParity, EmbedConfig, Error, GrayImage,
};

#[derive(Parser)]
#[command(
    name = "rdh",
    version,
    about = "Reversible data hiding for 8-bit grayscale PGM images"
)]
struct Cli {
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a payload into a cover image.
    Embed {
        #[arg(long)]
        cover: PathBuf,
        /// Marked image to write.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        payload: PayloadSource,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Recover the cover image and payload from a marked image.
    Extract {
        #[arg(long)]
        marked: PathBuf,
        /// Recovered cover to write.
        #[arg(long)]
        out: PathBuf,
        /// Payload file to write, packed MSB-first [default: <out>.bin].
        #[arg(long)]
        payload: Option<PathBuf>,
    },
    /// Embed and extract in memory and compare.
    Verify {
        #[arg(long)]
        cover: PathBuf,
        #[command(flatten)]
        payload: PayloadSource,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Print candidate tables, band populations and the existence profile.
    Analyze {
        #[arg(long)]
        cover: PathBuf,
        /// Pass to analyze: 0 for the start color, 1 for the other.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=1))]
        pass: u32,
        /// Write the profile CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Print the single-level capacity table.
    Capacity {
        #[arg(long)]
        cover: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PayloadChoice {
    /// Payload file, read as bytes MSB-first.
    #[arg(long)]
    payload: Option<PathBuf>,
    /// Number of pseudo-random payload bits.
    #[arg(long)]
    bits: Option<usize>,
}

#[derive(Args)]
struct PayloadSource {
    #[command(flatten)]
    choice: PayloadChoice,
    /// Seed for the ChaCha8 payload generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Default)]
struct ConfigArgs {
    #[arg(long)]
    tau1: Option<u8>,
    #[arg(long)]
    tau2: Option<u8>,
    /// Sub-band probability thresholds, strictly descending; empty for one sub-band.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    f_threshold: Option<Vec<f64>>,
    #[arg(long)]
    l_ulcf_size: Option<u32>,
    /// Number of SV candidates.
    #[arg(long)]
    k: Option<u8>,
    #[arg(long, value_parser = ["eq14", "table2"])]
    poh_mode: Option<String>,
    /// Per-pass threshold increment.
    #[arg(long)]
    bias: Option<f64>,
    /// Six band thresholds t1..t6.
    #[arg(long, value_delimiter = ',', num_args = 6)]
    thresholds: Option<Vec<f64>>,
    #[arg(long)]
    max_levels: Option<u8>,
    #[arg(long, value_parser = ["white", "black"])]
    start_color: Option<String>,
}

macro_rules! emit {
    ($o:expr) => {
        $o.push('\n')
    };
    ($o:expr, $($arg:tt)*) => {{
        let _ = writeln!($o, $($arg)*);
    }};
}

/// CLI failure with its one-line code and exit status.
struct Failure {
    code: &'static str,
    status: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnsupportedFormat(_) | Error::MalformedPgm(_) | Error::DimensionMismatch(..) => {
                4
            }
            Error::CapacityExceeded { .. } | Error::ImageTooSmall { .. } => 5,
            Error::HeaderOverflow { .. } | Error::FieldOverflow { .. } => 6,
            Error::BadMagic(_) | Error::UnsupportedVersion(_) | Error::CrcMismatch { .. } => 7,
            Error::InvalidConfig(_) => 9,
            _ => 8,
        };
        Failure {
            code: e.code(),
            status,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: "E_IO",
        status: 3,
        message: format!("{}: {e}", path.display()),
    }
}

type Outcome = Result<(), Failure>;
type Report = Result<String, Failure>;

impl ConfigArgs {
    fn build(&self) -> Result<EmbedConfig, Error> {
        let mut cfg = EmbedConfig::default();
        if let Some(f) = &self.f_threshold {
            cfg = cfg.with_f_thresholds(f)?;
        }
        let tau = cfg.echo.tau;
        cfg = cfg.with_tau(self.tau1.unwrap_or(tau.tau1), self.tau2.unwrap_or(tau.tau2));
        if let Some(n) = self.l_ulcf_size {
            cfg.echo.l_ulcf_size = n;
        }
        if let Some(k) = self.k {
            cfg.echo.k_max = k;
        }
        if let Some(m) = &self.poh_mode {
            cfg.echo.poh_mode = m.parse::<PohMode>()?;
        }
        if self.thresholds.is_some() || self.bias.is_some() {
            let values = match &self.thresholds {
                Some(t) => t
                    .as_slice()
                    .try_into()
                    .map_err(|_| Error::InvalidConfig("expected six thresholds".into()))?,
                None => cfg.echo.thresholds.values(),
            };
            cfg.echo.thresholds = BandThresholds::from_values(
                values,
                self.bias.unwrap_or(cfg.echo.thresholds.bias()),
            )?;
        }
        if let Some(n) = self.max_levels {
            cfg.max_levels = n;
        }
        if let Some(c) = &self.start_color {
            cfg.start_color = c.parse::<ColorParity>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read_image(path: &Path) -> Result<GrayImage, Failure> {
    let bytes = std::fs::read(path).map_err(|e| io_failure(path, e))?;
    load_pgm(&bytes).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    std::fs::write(path, bytes).map_err(|e| io_failure(path, e))
}

fn unpack(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
        .collect()
}

fn pack(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i)))
        })
        .collect()
}

fn load_payload(src: &PayloadSource) -> Result<Vec<bool>, Failure> {
    match (&src.choice.payload, src.choice.bits) {
        (Some(path), _) => Ok(unpack(
            &std::fs::read(path).map_err(|e| io_failure(path, e))?,
        )),
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(src.seed);
            Ok((0..n).map(|_| rng.random()).collect())
        }
        (None, None) => unreachable!("clap enforces a payload source"),
    }
}

fn run_embed(cover: &Path, out: &Path, payload: &PayloadSource, cfg: &EmbedConfig) -> Report {
    let mut o = String::new();
    let image = read_image(cover)?;
    let bits = load_payload(payload)?;
    let result = embed(&image, &bits, cfg)?;
    write_file(out, &save_pgm(&result.marked))?;
    let r = &result.report;
    emit!(o, "embedded {} bits", r.payload_bits);
    emit!(o, "psnr {:.2} dB", r.psnr);
    emit!(o, "levels {}", r.levels);
    emit!(
        o,
        "header {} bits, reserved {} bits, overflow entries {}",
        r.header_bits,
        r.reserved_bits,
        r.ou_entries
    );
    emit!(o, "segments {}", r.segments.len());
    for s in &r.segments {
        emit!(
            o,
            "  pass {} {} k={} bits={}",
            s.segment.pass_index,
            cfg.echo.slot_label(s.segment.slot as usize),
            s.segment.k,
            s.bits
        );
    }
    Ok(o)
}

fn run_extract(marked: &Path, out: &Path, payload: Option<&Path>) -> Report {
    let mut o = String::new();
    let image = read_image(marked)?;
    let result = extract(&image)?;
    let payload_path = payload.map_or_else(|| out.with_extension("bin"), Path::to_path_buf);
    write_file(out, &save_pgm(&result.cover))?;
    write_file(&payload_path, &pack(&result.payload))?;
    emit!(
        o,
        "extracted {} bits to {}",
        result.payload.len(),
        payload_path.display()
    );
    emit!(o, "recovered cover written to {}", out.display());
    Ok(o)
}

fn run_verify(cover: &Path, payload: &PayloadSource, cfg: &EmbedConfig) -> Report {
    let mut o = String::new();
    let image = read_image(cover)?;
    let bits = load_payload(payload)?;
    let result = embed(&image, &bits, cfg)?;
    let back = extract(&result.marked)?;
    let ok = back.cover == image && back.payload == bits;
    emit!(
        o,
        "{} psnr {:.2} dB, {} bits, {} levels",
        if ok { "PASS" } else { "FAIL" },
        result.report.psnr,
        bits.len(),
        result.report.levels
    );
    if ok {
        Ok(o)
    } else {
        Err(Failure {
            code: "E_VERIFY",
            status: 10,
            message: "round trip mismatch".into(),
        })
    }
}

fn candidate_table(title: &str, rows: &[CandidateRow], mode: PohMode) -> String {
    let mut s = format!("{title}\nNumber,SV,N_sv,N_usv,HI,PoH\n");
    for (i, r) in rows.iter().enumerate() {
        emit!(
            s,
            "{},{},{},{},{:.2},{:.0}",
            i + 1,
            r.sv,
            r.n_sv,
            r.n_usv,
            r.hi(),
            r.poh(mode)
        );
    }
    s
}

fn profile_csv(pass: &PassCapacity) -> String {
    let mut s = String::from("h,N,M,f\n");
    for h in 0..=255u8 {
        let i = h as usize;
        emit!(
            s,
            "{h},{},{},{:.6}",
            pass.profile.total[i],
            pass.profile.in_l_ulcf[i],
            pass.profile.probability(h)
        );
    }
    s
}

fn run_analyze(cover: &Path, pass: u32, out: Option<&Path>, cfg: &EmbedConfig) -> Report {
    let mut o = String::new();
    let image = read_image(cover)?;
    let scan = capacity_scan(&image, cfg)?;
    let p = &scan.passes[pass as usize];
    let mode = cfg.echo.poh_mode;
    emit!(o, "pass {} ({})", p.pass_index, p.color);
    emit!(o, "band populations");
    for s in &p.slots {
        emit!(o, "  {:<6} {}", s.label, s.sites);
    }
    emit!(o, "  {:<6} {}", "UHCF", p.uhcf);
    emit!(o, "  {:<6} {}", "yellow", p.yellow);
    for s in &p.slots {
        if s.candidates.is_empty() {
            continue;
        }
        emit!(o);
        let table = SvCandidateTable::from_counts(
            &s.candidates
                .iter()
                .map(|r| (r.k, r.n_sv, r.n_usv))
                .collect::<Vec<_>>(),
        );
        o.push_str(&candidate_table(
            &format!("{} (a)", s.label),
            table.rows(),
            mode,
        ));
        o.push_str(&candidate_table(
            &format!("{} (b)", s.label),
            &table.sorted_by_hi(),
            mode,
        ));
        match s.chosen {
            Some(r) => emit!(o, "max PoH: SV {} PoH {:.0}", r.sv, r.poh(mode)),
            None => emit!(o, "max PoH: none"),
        }
    }
    let csv = profile_csv(p);
    match out {
        Some(path) => {
            write_file(path, csv.as_bytes())?;
            Ok(o)
        }
        None => {
            emit!(o);
            o.push_str(&csv);
            Ok(o)
        }
    }
}

fn run_capacity(cover: &Path, cfg: &EmbedConfig) -> Report {
    let mut o = String::new();
    let image = read_image(cover)?;
    let scan = capacity_scan(&image, cfg)?;
    emit!(o, "pass,color,slot,sites,k,sv,n_sv,n_usv");
    for p in &scan.passes {
        for s in &p.slots {
            match s.chosen {
                Some(r) => emit!(
                    o,
                    "{},{},{},{},{},{},{},{}",
                    p.pass_index,
                    p.color,
                    s.label,
                    s.sites,
                    r.k,
                    r.sv,
                    r.n_sv,
                    r.n_usv
                ),
                None => emit!(
                    o,
                    "{},{},{},{},,,0,0",
                    p.pass_index,
                    p.color,
                    s.label,
                    s.sites
                ),
            }
        }
    }
    emit!(o);
    emit!(o, "gross {} bits", scan.gross());
    emit!(o, "overhead estimate {} bits", scan.overhead_estimate);
    emit!(o, "payload capacity {} bits", scan.payload_capacity());
    Ok(o)
}

fn run(cli: Cli) -> Report {
    let config = match &cli.command {
        Some(Command::Embed { config, .. })
        | Some(Command::Verify { config, .. })
        | Some(Command::Analyze { config, .. })
        | Some(Command::Capacity { config, .. }) => config.build()?,
        Some(Command::Extract { .. }) | None => EmbedConfig::default(),
    };
    if cli.show_config {
        return Ok(config.describe());
    }
    match &cli.command {
        Some(Command::Embed {
            cover,
            out,
            payload,
            ..
        }) => run_embed(cover, out, payload, &config),
        Some(Command::Extract {
            marked,
            out,
            payload,
        }) => run_extract(marked, out, payload.as_deref()),
        Some(Command::Verify { cover, payload, .. }) => run_verify(cover, payload, &config),
        Some(Command::Analyze {
            cover, pass, out, ..
        }) => run_analyze(cover, *pass, out.as_deref(), &config),
        Some(Command::Capacity { cover, .. }) => run_capacity(cover, &config),
        None => Err(Failure {
            code: "E_USAGE",
            status: 2,
            message: "no command given; see --help".into(),
        }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            // a closed pipe downstream is not an error
            let _ = std::io::stdout().lock().write_all(report.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message);
            ExitCode::from(f.status)
        }
    }
}
