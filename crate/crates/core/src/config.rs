use crate::band::{Band, BandThresholds};
use crate::error::{Error, Result};
use crate::hia::PohMode;
use crate::image::ColorParity;
use crate::ou::TauConfig;
use crate::spep::SubbandThresholds;

/// Largest number of SV candidates; `k` is stored in four header bits.
pub const MAX_K: u8 = 15;
/// Largest number of ULCF/VLCF sub-bands.
pub const MAX_SUBBANDS: usize = 8;
/// Passes are indexed with eight bits, two per level.
pub const MAX_LEVELS: u8 = 127;

/// Settings the receiver needs to rebuild every pass. They travel in the
/// overhead header.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfigEcho {
    pub thresholds: BandThresholds,
    pub l_ulcf_size: u32,
    pub subbands: SubbandThresholds,
    pub k_max: u8,
    pub poh_mode: PohMode,
    pub tau: TauConfig,
}

impl Default for ConfigEcho {
    fn default() -> Self {
        Self {
            thresholds: BandThresholds::default(),
            l_ulcf_size: 3000,
            subbands: SubbandThresholds::new(vec![300]).expect("valid default"),
            k_max: 5,
            poh_mode: PohMode::Table2,
            tau: TauConfig::default(),
        }
    }
}

impl ConfigEcho {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if let Some(t) = self.thresholds.tenths().iter().find(|&&t| t > 255) {
            return bad(format!(
                "band threshold {} exceeds 25.5",
                f64::from(*t) / 10.0
            ));
        }
        if self.thresholds.bias_tenths() > 255 {
            return bad(format!("bias {} exceeds 25.5", self.thresholds.bias()));
        }
        if !(1..=65535).contains(&self.l_ulcf_size) {
            return bad(format!(
                "l_ulcf_size {} outside 1..=65535",
                self.l_ulcf_size
            ));
        }
        if self.subbands.count() > MAX_SUBBANDS {
            return bad(format!(
                "{} sub-bands requested, at most {MAX_SUBBANDS} supported",
                self.subbands.count()
            ));
        }
        if !(1..=MAX_K).contains(&self.k_max) {
            return bad(format!("K = {} outside 1..={MAX_K}", self.k_max));
        }
        Ok(())
    }

    /// Number of embedding slots per pass: L sub-bands each for ULCF and
    /// VLCF, then LCF, MCF, HCF and VHCF.
    pub fn slot_count(&self) -> usize {
        2 * self.subbands.count() + 4
    }

    pub fn slot_of(&self, band: Band, sub_index: usize) -> Option<usize> {
        let l = self.subbands.count();
        match band {
            Band::Ulcf => Some(sub_index - 1),
            Band::Vlcf => Some(l + sub_index - 1),
            Band::Uhcf => None,
            other => Some(2 * l + other.index() - 2),
        }
    }

    /// Human-readable slot name, e.g. `ULCF1` or `MCF`.
    pub fn slot_label(&self, slot: usize) -> String {
        let l = self.subbands.count();
        if slot < l {
            if l == 1 {
                "ULCF".into()
            } else {
                format!("ULCF{}", slot + 1)
            }
        } else if slot < 2 * l {
            if l == 1 {
                "VLCF".into()
            } else {
                format!("VLCF{}", slot - l + 1)
            }
        } else {
            Band::ALL[slot - 2 * l + 2].name().into()
        }
    }
}

/// Full embedding configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EmbedConfig {
    pub echo: ConfigEcho,
    pub max_levels: u8,
    pub start_color: ColorParity,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            echo: ConfigEcho::default(),
            max_levels: 8,
            start_color: ColorParity::White,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<()> {
        self.echo.validate()?;
        if !(1..=MAX_LEVELS).contains(&self.max_levels) {
            return Err(Error::InvalidConfig(format!(
                "max_levels {} outside 1..={MAX_LEVELS}",
                self.max_levels
            )));
        }
        Ok(())
    }

    pub fn with_f_thresholds(mut self, values: &[f64]) -> Result<Self> {
        self.echo.subbands = SubbandThresholds::from_values(values)?;
        Ok(self)
    }

    pub fn with_tau(mut self, tau1: u8, tau2: u8) -> Self {
        self.echo.tau = TauConfig::new(tau1, tau2);
        self
    }

    /// Multi-line dump of every setting.
    pub fn describe(&self) -> String {
        let e = &self.echo;
        let f: Vec<String> = e
            .subbands
            .scaled()
            .iter()
            .map(|&t| format!("{}", f64::from(t) / 10_000.0))
            .collect();
        let t: Vec<String> = e
            .thresholds
            .values()
            .iter()
            .map(|v| format!("{v}"))
            .collect();
        format!(
            "thresholds = {}\nbias = {}\nl_ulcf_size = {}\nsubbands = {}\nf_thresholds = {}\nk = {}\npoh_mode = {}\ntau1 = {}\ntau2 = {}\nmax_levels = {}\nstart_color = {}\n",
            t.join(","),
            e.thresholds.bias(),
            e.l_ulcf_size,
            e.subbands.count(),
            f.join(","),
            e.k_max,
            e.poh_mode,
            e.tau.tau1,
            e.tau.tau2,
            self.max_levels,
            self.start_color,
        )
    }
}
