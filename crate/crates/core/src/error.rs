use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bandwidth must be at least 1")]
    ZeroBandwidth,

    #[error("bandwidth mismatch: expected {expected}, found {found}")]
    BandwidthMismatch { expected: usize, found: usize },

    #[error("output bandwidth {out} exceeds input bandwidth {input}")]
    OutputBandwidth { out: usize, input: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("angle beta = {0} lies outside [0, pi]")]
    BetaOutOfRange(f64),

    #[error("estimated allocation of {required} bytes exceeds the cap of {cap} bytes")]
    MemoryCap { required: u64, cap: u64 },

    #[error("direct evaluation at bandwidth {b} exceeds the cost cap {cap}; pass force to override")]
    CostCap { b: usize, cap: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("imaginary residue {0:e} after synthesis exceeds 1e-6")]
    ImaginaryResidue(f64),

    #[error("singular potential: atom {atom} lies within 1e-9 of a sampling point")]
    SingularPotential { atom: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("bad magic")]
    BadMagic,

    #[error("unsupported container version {0}")]
    VersionMismatch(u32),

    #[error("truncated container: {0}")]
    Truncated(&'static str),

    #[error("checksum mismatch: stored {stored:016x}, computed {computed:016x}")]
    ChecksumMismatch { stored: u64, computed: u64 },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
