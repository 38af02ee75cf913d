//! Equivariance-error experiment and fast-versus-direct timing.
//!
//! `run_equivariance` builds a stack of SO(3) correlation layers with random
//! filters, then measures
//! `Δ = mean_i std(L_{R_i} Φ(f_i) − Φ(L_{R_i} f_i)) / std(Φ(f_i))`
//! over random rotations and inputs. Every random draw comes from a ChaCha
//! stream keyed by `(seed, stream)`: stream 0 for the filters and stream
//! `i + 1` for trial `i`, so results do not depend on the thread count.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::correlation::{relu_spatial, rotate_so3_spectral, CorrelationPlan};
use crate::error::{Error, Result};
use crate::gft::{
    s2_dft_forward, s2_fft_forward, s2_fft_inverse, so3_dft_forward, so3_fft_forward, so3_fft_inverse, Kind, S2Signal, SO3Signal,
    SO3Spectrum,
};
use crate::grids::{Bandwidth, Rotation};
use crate::harmonics::WignerTables;
use crate::{oracle, par};

/// Memory budget for [`run_equivariance`] unless overridden.
pub const DEFAULT_MEMORY_CAP: u64 = 4 << 30;

/// How the rotation `L_R` is applied to feature maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationSource {
    /// Multiply each Fourier block by the Wigner matrix of `R`.
    Spectral,
    /// Synthesize the signal pointwise at the rotated grid points.
    Resampling,
}

impl fmt::Display for RotationSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RotationSource::Spectral => "spectral",
            RotationSource::Resampling => "resampling",
        })
    }
}

impl FromStr for RotationSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spectral" => Ok(RotationSource::Spectral),
            "resampling" => Ok(RotationSource::Resampling),
            other => Err(Error::Parse(format!("unknown rotation source '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceConfig {
    pub bandwidth: Bandwidth,
    pub layers: usize,
    pub channels: usize,
    pub trials: usize,
    pub with_relu: bool,
    pub rotation_source: RotationSource,
    pub seed: u64,
    /// Feed all-zero inputs; Δ is then 0 by convention.
    #[serde(default)]
    pub zero_input: bool,
}

impl EquivarianceConfig {
    /// Defaults: 10 channels, 20 trials, no ReLU, spectral rotation, seed 0.
    pub fn new(bandwidth: Bandwidth, layers: usize) -> Self {
        Self {
            bandwidth,
            layers,
            channels: 10,
            trials: 20,
            with_relu: false,
            rotation_source: RotationSource::Spectral,
            seed: 0,
            zero_input: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::Invalid("layers must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        if self.channels == 0 {
            return Err(Error::Invalid("channels must be at least 1".into()));
        }
        Ok(())
    }

    /// Short hex digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Rough peak memory: tables, filters, and the working set of each concurrent trial.
    pub fn estimated_bytes(&self) -> u64 {
        let b = self.bandwidth;
        let k = self.channels as u64;
        let points = (b.samples() as u64).pow(3);
        let coeffs = b.so3_coefficients() as u64;
        let filters = self.layers as u64 * k * k * (8 * points + 16 * coeffs);
        let per_trial = k * (8 * 8 * points + 4 * 16 * coeffs);
        let concurrent = (par::threads() as u64).min(self.trials as u64).max(1);
        WignerTables::estimated_bytes(b) + filters + concurrent * per_trial
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub setup_seconds: f64,
    pub trials_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub config_hash: String,
    pub config: EquivarianceConfig,
    pub delta: f64,
    pub p50: f64,
    pub p95: f64,
    pub per_trial: Vec<f64>,
    pub timings: Timings,
}

/// Flat record used for line-delimited output and CSV export.
#[derive(Debug, Clone, Serialize)]
struct Record<'a> {
    config_hash: &'a str,
    b: usize,
    layers: usize,
    channels: usize,
    relu: bool,
    rotation_source: RotationSource,
    n: usize,
    seed: u64,
    delta: f64,
    p50: f64,
    p95: f64,
    seconds: f64,
}

impl EquivarianceReport {
    fn record(&self) -> Record<'_> {
        let c = &self.config;
        Record {
            config_hash: &self.config_hash,
            b: c.bandwidth.get(),
            layers: c.layers,
            channels: c.channels,
            relu: c.with_relu,
            rotation_source: c.rotation_source,
            n: c.trials,
            seed: c.seed,
            delta: self.delta,
            p50: self.p50,
            p95: self.p95,
            seconds: self.timings.total_seconds,
        }
    }

    /// One JSON object on a single line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.record()).expect("record serializes")
    }

    pub const CSV_HEADER: &'static str = "config_hash,b,layers,channels,relu,rotation_source,n,seed,delta,p50,p95,seconds";

    pub fn to_csv_row(&self) -> String {
        let r = self.record();
        format!(
            "{},{},{},{},{},{},{},{},{:e},{:e},{:e},{:.6}",
            r.config_hash, r.b, r.layers, r.channels, r.relu, r.rotation_source, r.n, r.seed, r.delta, r.p50, r.p95, r.seconds
        )
    }
}

/// ChaCha stream `stream` under `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard normal grid samples projected onto degrees `< b` (forward, then inverse).
pub fn bandlimited_noise<R: Rng + ?Sized>(t: &WignerTables, channels: usize, rng: &mut R) -> Result<SO3Signal> {
    let b = t.bandwidth;
    let data: Vec<f64> = (0..channels * SO3Signal::points(b)).map(|_| rng.sample(StandardNormal)).collect();
    let raw = SO3Signal {
        bandwidth: b,
        channels,
        data,
    };
    so3_fft_inverse(&so3_fft_forward(&raw, t)?, t)
}

/// Sphere analogue of [`bandlimited_noise`].
pub fn bandlimited_noise_s2<R: Rng + ?Sized>(t: &WignerTables, channels: usize, rng: &mut R) -> Result<S2Signal> {
    let b = t.bandwidth;
    let data: Vec<f64> = (0..channels * S2Signal::points(b)).map(|_| rng.sample(StandardNormal)).collect();
    let raw = S2Signal {
        bandwidth: b,
        channels,
        data,
    };
    s2_fft_inverse(&s2_fft_forward(&raw, t)?, t)
}

/// Population standard deviation over every sample.
pub fn population_std(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Linear-interpolated quantile of unsorted data, `q` in `[0, 1]`.
pub fn quantile(x: &[f64], q: f64) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
}

/// The layer stack `Φ`: `L` correlations from `K` to `K` channels at fixed bandwidth.
pub struct Network {
    plan: CorrelationPlan,
    layers: Vec<Vec<SO3Spectrum>>,
    relu: bool,
}

impl Network {
    /// Draws every filter from `rng` as bandlimited standard normal noise.
    pub fn random<R: Rng + ?Sized>(tables: Arc<WignerTables>, layers: usize, channels: usize, relu: bool, rng: &mut R) -> Result<Self> {
        let plan = CorrelationPlan::with_tables(Arc::clone(&tables), tables, channels, channels)?;
        let mut stack = Vec::with_capacity(layers);
        for _ in 0..layers {
            let bank = (0..channels)
                .map(|_| bandlimited_noise(plan.tables_in(), channels, rng))
                .collect::<Result<Vec<_>>>()?;
            stack.push(plan.so3_filters(&bank)?);
        }
        Ok(Self { plan, layers: stack, relu })
    }

    pub fn apply(&self, f: &SO3Signal) -> Result<SO3Signal> {
        let mut x = f.clone();
        for filters in &self.layers {
            x = self.plan.so3_apply(filters, &x)?;
            if self.relu {
                x = relu_spatial(&x);
            }
        }
        Ok(x)
    }

    pub fn tables(&self) -> &WignerTables {
        self.plan.tables_in()
    }
}

fn rotate(source: RotationSource, f: &SO3Signal, r: &Rotation, t: &WignerTables) -> Result<SO3Signal> {
    match source {
        RotationSource::Spectral => rotate_so3_spectral(f, r, t),
        RotationSource::Resampling => Ok(oracle::resample_so3(&so3_fft_forward(f, t)?, r)),
    }
}

/// Runs the experiment with the default memory budget.
pub fn run_equivariance(cfg: &EquivarianceConfig) -> Result<EquivarianceReport> {
    run_equivariance_with_cap(cfg, DEFAULT_MEMORY_CAP)
}

pub fn run_equivariance_with_cap(cfg: &EquivarianceConfig, cap: u64) -> Result<EquivarianceReport> {
    cfg.validate()?;
    let required = cfg.estimated_bytes();
    if required > cap {
        return Err(Error::MemoryCap { required, cap });
    }
    let start = Instant::now();
    let tables = Arc::new(WignerTables::new(cfg.bandwidth)?);
    let net = Network::random(tables, cfg.layers, cfg.channels, cfg.with_relu, &mut substream(cfg.seed, 0))?;
    let setup = start.elapsed().as_secs_f64();

    let trials_start = Instant::now();
    let per_trial = par::map_range(cfg.trials, |i| -> Result<f64> {
        let mut rng = substream(cfg.seed, i as u64 + 1);
        let t = net.tables();
        let f = if cfg.zero_input {
            SO3Signal::zeros(cfg.bandwidth, cfg.channels)
        } else {
            bandlimited_noise(t, cfg.channels, &mut rng)?
        };
        let r = Rotation::random(&mut rng);
        let phi = net.apply(&f)?;
        let lhs = rotate(cfg.rotation_source, &phi, &r, t)?;
        let rhs = net.apply(&rotate(cfg.rotation_source, &f, &r, t)?)?;
        let scale = population_std(&phi.data);
        if scale < 1e-30 {
            return Ok(0.0);
        }
        let diff: Vec<f64> = lhs.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(population_std(&diff) / scale)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let trials_seconds = trials_start.elapsed().as_secs_f64();

    let delta = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
    if !delta.is_finite() {
        return Err(Error::NonFinite("equivariance error"));
    }
    Ok(EquivarianceReport {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        delta,
        p50: quantile(&per_trial, 0.5),
        p95: quantile(&per_trial, 0.95),
        per_trial,
        timings: Timings {
            setup_seconds: setup,
            trials_seconds,
            total_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

/// Bandwidth caps for the brute-force paths timed by [`run_bench`].
pub const BENCH_DIRECT_CAP_SO3: usize = 16;
pub const BENCH_DIRECT_CAP_S2: usize = 64;

/// Timing of one (bandwidth, operation, path) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub b: usize,
    pub kind: String,
    /// `forward` or `correlate`.
    pub op: String,
    /// `fast`, `dense` or `direct`.
    pub path: String,
    pub median_seconds: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub repetitions: usize,
    pub threads: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn median(&self, b: usize, op: &str, path: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.b == b && r.op == op && r.path == path)
            .and_then(|r| r.median_seconds)
    }

    pub const CSV_HEADER: &'static str = "b,kind,op,path,median_seconds,note";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let median = r.median_seconds.map(|s| format!("{s:e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.b,
                r.kind,
                r.op,
                r.path,
                median,
                r.note.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

/// Median wall-clock seconds of `reps` runs of `f`.
pub fn median_time<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t0 = Instant::now();
        std::hint::black_box(f()?);
        times.push(t0.elapsed().as_secs_f64());
    }
    Ok(quantile(&times, 0.5))
}

fn row(b: usize, kind: Kind, op: &str, path: &str, median: Option<f64>, note: Option<String>) -> BenchRow {
    BenchRow {
        b,
        kind: kind.to_string(),
        op: op.into(),
        path: path.into(),
        median_seconds: median,
        note,
    }
}

/// Times forward transforms (fast, dense, direct) and correlation (fast, direct)
/// at each bandwidth. Brute-force paths above their caps are skipped with a note.
pub fn run_bench(b_list: &[usize], kind: Kind, reps: usize) -> Result<BenchReport> {
    if reps == 0 {
        return Err(Error::Invalid("repetitions must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for &bv in b_list {
        let b = Bandwidth::new(bv)?;
        let t = WignerTables::new(b)?;
        let mut rng = substream(bv as u64, 0);
        let skip = |cap: usize| Some(format!("skipped: above brute-force cap b={cap}"));
        match kind {
            Kind::SO3 => {
                let f = bandlimited_noise(&t, 1, &mut rng)?;
                let psi = bandlimited_noise(&t, 1, &mut rng)?;
                rows.push(row(
                    bv,
                    kind,
                    "forward",
                    "fast",
                    Some(median_time(reps, || so3_fft_forward(&f, &t))?),
                    None,
                ));
                rows.push(row(
                    bv,
                    kind,
                    "forward",
                    "dense",
                    Some(median_time(reps, || so3_dft_forward(&f, &t))?),
                    None,
                ));
                if bv <= BENCH_DIRECT_CAP_SO3 {
                    let m = median_time(reps, || oracle::so3_direct_projection(&f, &t))?;
                    rows.push(row(bv, kind, "forward", "direct", Some(m), None));
                } else {
                    rows.push(row(bv, kind, "forward", "direct", None, skip(BENCH_DIRECT_CAP_SO3)));
                }
                let m = median_time(reps, || crate::correlation::so3_correlate(&psi, &f, b))?;
                rows.push(row(bv, kind, "correlate", "fast", Some(m), None));
                if bv <= oracle::SO3_CORRELATION_CAP {
                    let grid = crate::grids::SO3Grid::new(b);
                    let m = median_time(reps, || oracle::so3_correlate_direct(&psi, &f, &grid, false))?;
                    rows.push(row(bv, kind, "correlate", "direct", Some(m), None));
                } else {
                    rows.push(row(bv, kind, "correlate", "direct", None, skip(oracle::SO3_CORRELATION_CAP)));
                }
            }
            Kind::S2 => {
                let f = bandlimited_noise_s2(&t, 1, &mut rng)?;
                let psi = bandlimited_noise_s2(&t, 1, &mut rng)?;
                rows.push(row(
                    bv,
                    kind,
                    "forward",
                    "fast",
                    Some(median_time(reps, || s2_fft_forward(&f, &t))?),
                    None,
                ));
                rows.push(row(
                    bv,
                    kind,
                    "forward",
                    "dense",
                    Some(median_time(reps, || s2_dft_forward(&f, &t))?),
                    None,
                ));
                if bv <= BENCH_DIRECT_CAP_S2 {
                    let m = median_time(reps, || oracle::s2_direct_projection(&f, &t))?;
                    rows.push(row(bv, kind, "forward", "direct", Some(m), None));
                } else {
                    rows.push(row(bv, kind, "forward", "direct", None, skip(BENCH_DIRECT_CAP_S2)));
                }
                let m = median_time(reps, || crate::correlation::s2_correlate(&psi, &f, b))?;
                rows.push(row(bv, kind, "correlate", "fast", Some(m), None));
                if bv <= oracle::S2_CORRELATION_CAP {
                    let grid = crate::grids::SO3Grid::new(b);
                    let m = median_time(reps, || oracle::s2_correlate_direct(&psi, &f, &grid, false))?;
                    rows.push(row(bv, kind, "correlate", "direct", Some(m), None));
                } else {
                    rows.push(row(bv, kind, "correlate", "direct", None, skip(oracle::S2_CORRELATION_CAP)));
                }
            }
        }
    }
    Ok(BenchReport {
        repetitions: reps,
        threads: par::threads(),
        rows,
    })
}
