//! Generalized Fourier transforms on S² and SO(3).
//!
//! Forward transforms compute `f^l = ∫ f(x) conj(U^l(x)) dx` under the
//! normalized Haar measure; inverse transforms synthesize
//! `f(x) = Σ_l (2l+1) Σ f^l U^l(x)`. Each manifold has a fast path
//! ([`fast`]: FFT over alpha/gamma, then a contraction over beta) and a dense
//! path ([`dft`]: explicit sums against sampled basis functions, no FFT).

pub mod dft;
pub mod fast;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grids::{so3_block_offset, Bandwidth, S2Grid, SO3Grid};
use crate::harmonics::WignerTables;

pub use dft::{s2_dft_forward, s2_dft_inverse, so3_dft_forward, so3_dft_inverse};
pub use fast::{s2_fft_forward, s2_fft_inverse, so3_fft_forward, so3_fft_inverse};

/// Largest imaginary residue tolerated when synthesizing a real signal.
pub const RESIDUE_LIMIT: f64 = 1e-6;

/// Real samples on the `2b x 2b` sphere grid, laid out `[channel][beta][alpha]`.
#[derive(Debug, Clone, PartialEq)]
pub struct S2Signal {
    pub bandwidth: Bandwidth,
    pub channels: usize,
    pub data: Vec<f64>,
}

/// Real samples on the `(2b)^3` rotation grid, laid out `[channel][beta][alpha][gamma]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SO3Signal {
    pub bandwidth: Bandwidth,
    pub channels: usize,
    pub data: Vec<f64>,
}

fn check_samples(data: &[f64], expected: usize) -> Result<()> {
    if data.len() != expected {
        return Err(Error::Shape(format!("expected {expected} samples, found {}", data.len())));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("signal samples"));
    }
    Ok(())
}

impl S2Signal {
    pub fn new(bandwidth: Bandwidth, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_samples(&data, channels * Self::points(bandwidth))?;
        Ok(Self { bandwidth, channels, data })
    }

    pub fn zeros(bandwidth: Bandwidth, channels: usize) -> Self {
        Self {
            bandwidth,
            channels,
            data: vec![0.0; channels * Self::points(bandwidth)],
        }
    }

    /// Samples `f(channel, alpha, beta)` on the grid.
    pub fn from_fn(bandwidth: Bandwidth, channels: usize, f: impl Fn(usize, f64, f64) -> f64) -> Self {
        let g = S2Grid::new(bandwidth);
        let mut data = Vec::with_capacity(channels * g.len());
        for c in 0..channels {
            for &beta in &g.betas {
                for &alpha in &g.alphas {
                    data.push(f(c, alpha, beta));
                }
            }
        }
        Self { bandwidth, channels, data }
    }

    #[inline]
    pub fn points(b: Bandwidth) -> usize {
        b.samples() * b.samples()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = Self::points(self.bandwidth);
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = Self::points(self.bandwidth);
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, j: usize, i: usize) -> f64 {
        let n = self.bandwidth.samples();
        self.data[(c * n + j) * n + i]
    }

    /// Keeps only the listed channels, in the given order.
    pub fn select(&self, channels: &[usize]) -> Self {
        let data = channels.iter().flat_map(|&c| self.channel(c).iter().copied()).collect();
        Self {
            bandwidth: self.bandwidth,
            channels: channels.len(),
            data,
        }
    }

    /// Quadrature integral of each channel.
    pub fn integrate(&self) -> Vec<f64> {
        let g = S2Grid::new(self.bandwidth);
        (0..self.channels).map(|c| g.integrate(self.channel(c))).collect()
    }

    /// Quadrature inner product `Σ_k ∫ self_k other_k dx`.
    pub fn inner(&self, other: &S2Signal) -> f64 {
        let g = S2Grid::new(self.bandwidth);
        let prod: Vec<f64> = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        prod.chunks(Self::points(self.bandwidth)).map(|c| g.integrate(c)).sum()
    }
}

impl SO3Signal {
    pub fn new(bandwidth: Bandwidth, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_samples(&data, channels * Self::points(bandwidth))?;
        Ok(Self { bandwidth, channels, data })
    }

    pub fn zeros(bandwidth: Bandwidth, channels: usize) -> Self {
        Self {
            bandwidth,
            channels,
            data: vec![0.0; channels * Self::points(bandwidth)],
        }
    }

    /// Samples `f(channel, alpha, beta, gamma)` on the grid.
    pub fn from_fn(bandwidth: Bandwidth, channels: usize, f: impl Fn(usize, f64, f64, f64) -> f64) -> Self {
        let g = SO3Grid::new(bandwidth);
        let mut data = Vec::with_capacity(channels * g.len());
        for c in 0..channels {
            for &beta in &g.betas {
                for &alpha in &g.alphas {
                    for &gamma in &g.gammas {
                        data.push(f(c, alpha, beta, gamma));
                    }
                }
            }
        }
        Self { bandwidth, channels, data }
    }

    #[inline]
    pub fn points(b: Bandwidth) -> usize {
        b.samples() * b.samples() * b.samples()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = Self::points(self.bandwidth);
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = Self::points(self.bandwidth);
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, j: usize, i: usize, k: usize) -> f64 {
        let n = self.bandwidth.samples();
        self.data[((c * n + j) * n + i) * n + k]
    }

    pub fn select(&self, channels: &[usize]) -> Self {
        let data = channels.iter().flat_map(|&c| self.channel(c).iter().copied()).collect();
        Self {
            bandwidth: self.bandwidth,
            channels: channels.len(),
            data,
        }
    }

    pub fn integrate(&self) -> Vec<f64> {
        let g = SO3Grid::new(self.bandwidth);
        (0..self.channels).map(|c| g.integrate(self.channel(c))).collect()
    }

    pub fn inner(&self, other: &SO3Signal) -> f64 {
        let g = SO3Grid::new(self.bandwidth);
        let prod: Vec<f64> = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        prod.chunks(Self::points(self.bandwidth)).map(|c| g.integrate(c)).sum()
    }
}

/// Per-degree coefficient vectors `f^l_m`, channel-major, degree `l` at offset `l^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct S2Spectrum {
    pub bandwidth: Bandwidth,
    pub channels: usize,
    pub data: Vec<Complex64>,
}

/// Per-degree coefficient matrices `f^l_{mn}`, channel-major, row-major blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SO3Spectrum {
    pub bandwidth: Bandwidth,
    pub channels: usize,
    pub data: Vec<Complex64>,
}

fn check_coefficients(data: &[Complex64], expected: usize) -> Result<()> {
    if data.len() != expected {
        return Err(Error::Shape(format!("expected {expected} coefficients, found {}", data.len())));
    }
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("spectrum coefficients"));
    }
    Ok(())
}

fn normal_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

impl S2Spectrum {
    pub fn new(bandwidth: Bandwidth, channels: usize, data: Vec<Complex64>) -> Result<Self> {
        check_coefficients(&data, channels * bandwidth.s2_coefficients())?;
        Ok(Self { bandwidth, channels, data })
    }

    pub fn zeros(bandwidth: Bandwidth, channels: usize) -> Self {
        Self {
            bandwidth,
            channels,
            data: vec![Complex64::new(0.0, 0.0); channels * bandwidth.s2_coefficients()],
        }
    }

    /// Random spectrum of a real signal: standard normal coefficients obeying
    /// `f^l_{-m} = (-1)^m conj(f^l_m)`.
    pub fn random_real<R: Rng + ?Sized>(bandwidth: Bandwidth, channels: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(bandwidth, channels);
        for c in 0..channels {
            for l in 0..bandwidth.get() {
                let li = l as i64;
                let v: f64 = rng.sample(StandardNormal);
                *s.get_mut(c, l, 0) = Complex64::new(v, 0.0);
                for m in 1..=li {
                    let z = normal_complex(rng);
                    *s.get_mut(c, l, m) = z;
                    *s.get_mut(c, l, -m) = if m % 2 == 0 { z.conj() } else { -z.conj() };
                }
            }
        }
        s
    }

    fn index(&self, c: usize, l: usize, m: i64) -> usize {
        c * self.bandwidth.s2_coefficients() + l * l + (m + l as i64) as usize
    }

    pub fn get(&self, c: usize, l: usize, m: i64) -> Complex64 {
        self.data[self.index(c, l, m)]
    }

    pub fn get_mut(&mut self, c: usize, l: usize, m: i64) -> &mut Complex64 {
        let i = self.index(c, l, m);
        &mut self.data[i]
    }

    pub fn degree(&self, c: usize, l: usize) -> &[Complex64] {
        let base = c * self.bandwidth.s2_coefficients();
        &self.data[base + l * l..base + (l + 1) * (l + 1)]
    }

    pub fn channel(&self, c: usize) -> &[Complex64] {
        let n = self.bandwidth.s2_coefficients();
        &self.data[c * n..(c + 1) * n]
    }

    /// `Σ_l (2l+1) |f^l|^2` per channel; equals the quadrature `∫ f^2` for real signals.
    pub fn weighted_norm_sq(&self) -> Vec<f64> {
        (0..self.channels)
            .map(|c| {
                (0..self.bandwidth.get())
                    .map(|l| (2 * l + 1) as f64 * self.degree(c, l).iter().map(|z| z.norm_sqr()).sum::<f64>())
                    .sum()
            })
            .collect()
    }

    /// Largest violation of the reality condition.
    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..self.channels {
            for l in 0..self.bandwidth.get() {
                for m in 0..=l as i64 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    worst = worst.max((self.get(c, l, -m) - sign * self.get(c, l, m).conj()).norm());
                }
            }
        }
        worst
    }

    /// Keeps degrees `l < b_out`.
    pub fn truncate(&self, b_out: Bandwidth) -> Result<S2Spectrum> {
        if b_out > self.bandwidth {
            return Err(Error::OutputBandwidth {
                out: b_out.get(),
                input: self.bandwidth.get(),
            });
        }
        let n = b_out.s2_coefficients();
        let data = (0..self.channels).flat_map(|c| self.channel(c)[..n].iter().copied()).collect();
        Ok(S2Spectrum {
            bandwidth: b_out,
            channels: self.channels,
            data,
        })
    }
}

impl SO3Spectrum {
    pub fn new(bandwidth: Bandwidth, channels: usize, data: Vec<Complex64>) -> Result<Self> {
        check_coefficients(&data, channels * bandwidth.so3_coefficients())?;
        Ok(Self { bandwidth, channels, data })
    }

    pub fn zeros(bandwidth: Bandwidth, channels: usize) -> Self {
        Self {
            bandwidth,
            channels,
            data: vec![Complex64::new(0.0, 0.0); channels * bandwidth.so3_coefficients()],
        }
    }

    /// Random spectrum of a real signal, obeying `f^l_{-m,-n} = (-1)^{m-n} conj(f^l_{mn})`.
    pub fn random_real<R: Rng + ?Sized>(bandwidth: Bandwidth, channels: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(bandwidth, channels);
        for c in 0..channels {
            for l in 0..bandwidth.get() {
                let li = l as i64;
                for m in -li..=li {
                    for n in -li..=li {
                        if (m, n) == (0, 0) {
                            let v: f64 = rng.sample(StandardNormal);
                            *s.get_mut(c, l, 0, 0) = Complex64::new(v, 0.0);
                        } else if m > 0 || (m == 0 && n > 0) {
                            let z = normal_complex(rng);
                            *s.get_mut(c, l, m, n) = z;
                            let mirror = if (m - n).rem_euclid(2) == 0 { z.conj() } else { -z.conj() };
                            *s.get_mut(c, l, -m, -n) = mirror;
                        }
                    }
                }
            }
        }
        s
    }

    fn index(&self, c: usize, l: usize, m: i64, n: i64) -> usize {
        let li = l as i64;
        let w = 2 * li + 1;
        c * self.bandwidth.so3_coefficients() + so3_block_offset(l) + ((m + li) * w + n + li) as usize
    }

    pub fn get(&self, c: usize, l: usize, m: i64, n: i64) -> Complex64 {
        self.data[self.index(c, l, m, n)]
    }

    pub fn get_mut(&mut self, c: usize, l: usize, m: i64, n: i64) -> &mut Complex64 {
        let i = self.index(c, l, m, n);
        &mut self.data[i]
    }

    pub fn block(&self, c: usize, l: usize) -> &[Complex64] {
        let base = c * self.bandwidth.so3_coefficients();
        &self.data[base + so3_block_offset(l)..base + so3_block_offset(l + 1)]
    }

    pub fn block_mut(&mut self, c: usize, l: usize) -> &mut [Complex64] {
        let base = c * self.bandwidth.so3_coefficients();
        &mut self.data[base + so3_block_offset(l)..base + so3_block_offset(l + 1)]
    }

    pub fn channel(&self, c: usize) -> &[Complex64] {
        let n = self.bandwidth.so3_coefficients();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn weighted_norm_sq(&self) -> Vec<f64> {
        (0..self.channels)
            .map(|c| {
                (0..self.bandwidth.get())
                    .map(|l| (2 * l + 1) as f64 * self.block(c, l).iter().map(|z| z.norm_sqr()).sum::<f64>())
                    .sum()
            })
            .collect()
    }

    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..self.channels {
            for l in 0..self.bandwidth.get() {
                let li = l as i64;
                for m in -li..=li {
                    for n in -li..=li {
                        let sign = if (m - n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        worst = worst.max((self.get(c, l, -m, -n) - sign * self.get(c, l, m, n).conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// Keeps degrees `l < b_out`.
    pub fn truncate(&self, b_out: Bandwidth) -> Result<SO3Spectrum> {
        if b_out > self.bandwidth {
            return Err(Error::OutputBandwidth {
                out: b_out.get(),
                input: self.bandwidth.get(),
            });
        }
        let n = b_out.so3_coefficients();
        let data = (0..self.channels).flat_map(|c| self.channel(c)[..n].iter().copied()).collect();
        Ok(SO3Spectrum {
            bandwidth: b_out,
            channels: self.channels,
            data,
        })
    }
}

/// Either kind of grid signal.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    S2(S2Signal),
    SO3(SO3Signal),
}

/// Domain of a signal or filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    S2,
    SO3,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::S2 => "s2",
            Kind::SO3 => "so3",
        })
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s2" => Ok(Kind::S2),
            "so3" => Ok(Kind::SO3),
            other => Err(Error::Parse(format!("unknown signal kind '{other}' (expected s2 or so3)"))),
        }
    }
}

/// Access to the raw grid samples shared by both signal types.
pub trait GridSignal: Clone {
    fn bandwidth(&self) -> Bandwidth;
    fn channels(&self) -> usize;
    fn samples(&self) -> &[f64];
    fn samples_mut(&mut self) -> &mut [f64];
}

macro_rules! grid_signal {
    ($t:ty) => {
        impl GridSignal for $t {
            fn bandwidth(&self) -> Bandwidth {
                self.bandwidth
            }
            fn channels(&self) -> usize {
                self.channels
            }
            fn samples(&self) -> &[f64] {
                &self.data
            }
            fn samples_mut(&mut self) -> &mut [f64] {
                &mut self.data
            }
        }
    };
}

grid_signal!(S2Signal);
grid_signal!(SO3Signal);

impl GridSignal for Signal {
    fn bandwidth(&self) -> Bandwidth {
        match self {
            Signal::S2(s) => s.bandwidth,
            Signal::SO3(s) => s.bandwidth,
        }
    }
    fn channels(&self) -> usize {
        match self {
            Signal::S2(s) => s.channels,
            Signal::SO3(s) => s.channels,
        }
    }
    fn samples(&self) -> &[f64] {
        match self {
            Signal::S2(s) => &s.data,
            Signal::SO3(s) => &s.data,
        }
    }
    fn samples_mut(&mut self) -> &mut [f64] {
        match self {
            Signal::S2(s) => &mut s.data,
            Signal::SO3(s) => &mut s.data,
        }
    }
}

impl Signal {
    pub fn kind(&self) -> Kind {
        match self {
            Signal::S2(_) => Kind::S2,
            Signal::SO3(_) => Kind::SO3,
        }
    }
}

impl From<S2Signal> for Signal {
    fn from(s: S2Signal) -> Self {
        Signal::S2(s)
    }
}

impl From<SO3Signal> for Signal {
    fn from(s: SO3Signal) -> Self {
        Signal::SO3(s)
    }
}

pub(crate) fn check_tables(b: Bandwidth, t: &WignerTables) -> Result<()> {
    if b != t.bandwidth {
        return Err(Error::BandwidthMismatch {
            expected: t.bandwidth.get(),
            found: b.get(),
        });
    }
    Ok(())
}

/// Applies the imaginary-residue policy after synthesis.
pub(crate) fn accept_residue(max_im: f64) -> Result<()> {
    if max_im > RESIDUE_LIMIT || max_im.is_nan() {
        return Err(Error::ImaginaryResidue(max_im));
    }
    if max_im > 1e-10 {
        log::warn!("discarding imaginary residue {max_im:e} after synthesis");
    } else {
        log::debug!("discarding imaginary residue {max_im:e} after synthesis");
    }
    Ok(())
}

/// Views an S² signal as a gamma-invariant signal on SO(3).
pub fn lift_s2_to_so3(f: &S2Signal) -> SO3Signal {
    let n = f.bandwidth.samples();
    let mut data = Vec::with_capacity(f.channels * n * n * n);
    for v in &f.data {
        data.extend(std::iter::repeat_n(*v, n));
    }
    SO3Signal {
        bandwidth: f.bandwidth,
        channels: f.channels,
        data,
    }
}

/// `||a - b||_2 / ||b||_2` over raw samples (`||a||_2` when `b` is zero).
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if norm == 0.0 {
        diff
    } else {
        diff / norm
    }
}

/// Complex analogue of [`relative_l2`].
pub fn relative_l2_complex(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        diff
    } else {
        diff / norm
    }
}

/// Splits a channel-major stack of degree blocks into one mutable piece per
/// `(channel, degree)`, given the per-degree offset function.
pub(crate) fn degree_pieces<T>(data: &mut [T], channels: usize, b: usize, offset: fn(usize) -> usize) -> Vec<&mut [T]> {
    let mut out = Vec::with_capacity(channels * b);
    let mut rest = data;
    for _ in 0..channels {
        for l in 0..b {
            let (head, tail) = rest.split_at_mut(offset(l + 1) - offset(l));
            out.push(head);
            rest = tail;
        }
    }
    out
}

pub(crate) fn s2_offset(l: usize) -> usize {
    l * l
}
