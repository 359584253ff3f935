use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed PGM: {0}")]
    MalformedPgm(String),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("image too small: {width}x{height} (need at least 8x8)")]
    ImageTooSmall { width: usize, height: usize },
    #[error("site ({row}, {col}) is outside the interior margin")]
    SiteOutsideInterior { row: usize, col: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("a payload bit is required when the error equals a threshold")]
    MissingBit,
    #[error("hiding intensity is undefined when both counts are zero")]
    EmptyCounts,
    #[error("band has no serviceable values")]
    BandEmpty,
    #[error("pixel value {value} at index {index} is outside [-1, 256]")]
    ValueOutOfRange { index: usize, value: i32 },
    #[error("overflow entry at index {index} expects {expected}, found {found}")]
    OuEntryMismatch {
        index: usize,
        expected: i32,
        found: i32,
    },
    #[error("capacity exceeded: {remaining} of {requested} bits left after {levels} levels")]
    CapacityExceeded {
        requested: usize,
        remaining: usize,
        levels: usize,
    },
    #[error("overhead header needs {needed} bits but only {available} are reserved; raise tau1/tau2 or shrink the payload")]
    HeaderOverflow { needed: usize, available: usize },
    #[error("value {value} does not fit in {width} header bits")]
    FieldOverflow { value: u64, width: u32 },
    #[error("bad header magic {0:#06x}")]
    BadMagic(u16),
    #[error("unsupported header version {0}")]
    UnsupportedVersion(u8),
    #[error("header crc mismatch (stored {stored:#06x}, computed {computed:#06x})")]
    CrcMismatch { stored: u16, computed: u16 },
    #[error("inconsistent header: {0}")]
    InconsistentHeader(String),
    #[error("header truncated")]
    TruncatedHeader,
    #[error("corrupted image: {0}")]
    Corrupted(String),
}

impl Error {
    /// Stable machine-readable code, one per variant family.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnsupportedFormat(_) | Error::MalformedPgm(_) => "E_FORMAT",
            Error::DimensionMismatch(..) => "E_DIMENSIONS",
            Error::ImageTooSmall { .. } => "E_TOO_SMALL",
            Error::SiteOutsideInterior { .. } => "E_SITE",
            Error::InvalidConfig(_) => "E_CONFIG",
            Error::MissingBit => "E_MISSING_BIT",
            Error::EmptyCounts | Error::BandEmpty => "E_EMPTY",
            Error::ValueOutOfRange { .. } | Error::OuEntryMismatch { .. } => "E_OU",
            Error::CapacityExceeded { .. } => "E_CAPACITY",
            Error::HeaderOverflow { .. } | Error::FieldOverflow { .. } => "E_HEADER_OVERFLOW",
            Error::BadMagic(_) => "E_MAGIC",
            Error::UnsupportedVersion(_) => "E_VERSION",
            Error::CrcMismatch { .. } => "E_CRC",
            Error::InconsistentHeader(_) | Error::TruncatedHeader => "E_HEADER",
            Error::Corrupted(_) => "E_CORRUPTED",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
