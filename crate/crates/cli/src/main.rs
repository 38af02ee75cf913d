mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use so3fft::harness::RotationSource;

/// Fast Fourier transforms and rotation-equivariant correlation on S² and SO(3).
#[derive(Debug, Parser)]
#[command(name = "so3fft", version, about)]
pub struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "SO3FFT_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward or inverse transform of a signal or spectrum file.
    Transform(TransformArgs),
    /// Correlate a signal with a filter bank, producing an SO(3) signal.
    Correlate(CorrelateArgs),
    /// Rotate a signal by ZYZ Euler angles.
    Rotate(RotateArgs),
    /// Measure the equivariance error of random correlation networks.
    Equivariance(EquivarianceArgs),
    /// Time the fast, dense and direct transform paths.
    Bench(BenchArgs),
    /// Project a planar PGM image onto the sphere.
    ProjectImage(ProjectImageArgs),
    /// Build per-charge potential channels for a molecule.
    ProjectMolecule(ProjectMoleculeArgs),
    /// Print the header of a container file as JSON.
    Info { input: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    S2,
    So3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Fast,
    /// Dense per-degree evaluation without FFTs.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RotationArg {
    Spectral,
    Resampling,
}

impl From<RotationArg> for RotationSource {
    fn from(r: RotationArg) -> Self {
        match r {
            RotationArg::Spectral => RotationSource::Spectral,
            RotationArg::Resampling => RotationSource::Resampling,
        }
    }
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, value_enum)]
    pub dir: Direction,
    #[arg(long, value_enum, default_value_t = PathArg::Fast)]
    pub path: PathArg,
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Signal to correlate (S² or SO(3)).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Filters of the same kind, stored as `out_channels * in_channels` channels,
    /// one contiguous group of input channels per output channel.
    #[arg(long)]
    pub filters: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub out_channels: usize,
    /// Output bandwidth; defaults to the input bandwidth.
    #[arg(long)]
    pub out_bandwidth: Option<usize>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct RotateArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = RotationArg::Spectral)]
    pub method: RotationArg,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EquivarianceArgs {
    /// Bandwidths to sweep (comma separated).
    #[arg(short, long, value_delimiter = ',', default_value = "8")]
    pub bandwidth: Vec<usize>,
    /// Layer counts to sweep (comma separated).
    #[arg(short = 'L', long, value_delimiter = ',', default_value = "1")]
    pub layers: Vec<usize>,
    #[arg(short = 'K', long, default_value_t = 10)]
    pub channels: usize,
    /// Number of random trials; use 500 for publication-grade estimates.
    #[arg(short = 'n', long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long)]
    pub relu: bool,
    #[arg(long, value_enum, default_value_t = RotationArg::Spectral)]
    pub rotation: RotationArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub zero_input: bool,
    /// Refuse configurations whose estimated footprint exceeds this many bytes.
    #[arg(long, default_value_t = so3fft::harness::DEFAULT_MEMORY_CAP)]
    pub memory_cap: u64,
    /// Also write the reports as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(short, long, value_delimiter = ',', default_value = "4,8,16")]
    pub bandwidth: Vec<usize>,
    #[arg(long, value_enum, default_value_t = KindArg::So3)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectImageArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long, default_value_t = 16)]
    pub bandwidth: usize,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectMoleculeArgs {
    /// Text file with one `charge x y z` line per atom.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long, default_value_t = so3fft::signals::molecule::DEFAULT_BANDWIDTH)]
    pub bandwidth: usize,
    /// Radius of the sphere placed around the center atom.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Index of the atom the sphere is centered on.
    #[arg(long, default_value_t = 0)]
    pub center: usize,
    #[arg(short, long)]
    pub output: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("so3fft: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
