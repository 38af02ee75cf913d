//! Spectral correlation, rotation and reductions.
//!
//! Correlations are computed per degree in the Fourier domain:
//! `(ψ ⋆ f)^l = Σ_k f_k^l (ψ_k^l)†`, an outer product of coefficient vectors
//! on S² and a matrix product on SO(3). Degrees at or above the output
//! bandwidth are dropped before the inverse transform.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gft::{
    degree_pieces, s2_fft_forward, s2_fft_inverse, so3_fft_forward, so3_fft_inverse, GridSignal, S2Signal, S2Spectrum, SO3Signal,
    SO3Spectrum, Signal,
};
use crate::grids::{so3_block_offset, Bandwidth, Rotation};
use crate::harmonics::{wigner_big_d_matrices, WignerTables};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shapes and Wigner tables for one correlation layer.
#[derive(Debug, Clone)]
pub struct CorrelationPlan {
    pub bandwidth_in: Bandwidth,
    pub bandwidth_out: Bandwidth,
    pub channels_in: usize,
    pub channels_out: usize,
    tables_in: Arc<WignerTables>,
    tables_out: Arc<WignerTables>,
}

impl CorrelationPlan {
    pub fn new(bandwidth_in: Bandwidth, bandwidth_out: Bandwidth, channels_in: usize, channels_out: usize) -> Result<Self> {
        if bandwidth_out > bandwidth_in {
            return Err(Error::OutputBandwidth {
                out: bandwidth_out.get(),
                input: bandwidth_in.get(),
            });
        }
        let tables_in = Arc::new(WignerTables::new(bandwidth_in)?);
        let tables_out = if bandwidth_out == bandwidth_in {
            Arc::clone(&tables_in)
        } else {
            Arc::new(WignerTables::new(bandwidth_out)?)
        };
        Self::with_tables(tables_in, tables_out, channels_in, channels_out)
    }

    /// Builds a plan around tables that are already in memory.
    pub fn with_tables(
        tables_in: Arc<WignerTables>,
        tables_out: Arc<WignerTables>,
        channels_in: usize,
        channels_out: usize,
    ) -> Result<Self> {
        let (bandwidth_in, bandwidth_out) = (tables_in.bandwidth, tables_out.bandwidth);
        if bandwidth_out > bandwidth_in {
            return Err(Error::OutputBandwidth {
                out: bandwidth_out.get(),
                input: bandwidth_in.get(),
            });
        }
        if channels_in == 0 || channels_out == 0 {
            return Err(Error::Shape("correlation needs at least one input and one output channel".into()));
        }
        Ok(Self {
            bandwidth_in,
            bandwidth_out,
            channels_in,
            channels_out,
            tables_in,
            tables_out,
        })
    }

    pub fn tables_in(&self) -> &WignerTables {
        &self.tables_in
    }

    pub fn tables_out(&self) -> &WignerTables {
        &self.tables_out
    }

    fn check_input<S: GridSignal>(&self, f: &S) -> Result<()> {
        if f.bandwidth() != self.bandwidth_in {
            return Err(Error::BandwidthMismatch {
                expected: self.bandwidth_in.get(),
                found: f.bandwidth().get(),
            });
        }
        if f.channels() != self.channels_in {
            return Err(Error::Shape(format!(
                "expected {} input channels, found {}",
                self.channels_in,
                f.channels()
            )));
        }
        Ok(())
    }

    fn check_bank<S: GridSignal>(&self, bank: &[S]) -> Result<()> {
        if bank.len() != self.channels_out {
            return Err(Error::Shape(format!(
                "expected {} filters, found {}",
                self.channels_out,
                bank.len()
            )));
        }
        bank.iter().try_for_each(|psi| self.check_input(psi))
    }

    /// Forward transforms of an S² filter bank, one spectrum per output channel.
    pub fn s2_filters(&self, bank: &[S2Signal]) -> Result<Vec<S2Spectrum>> {
        self.check_bank(bank)?;
        bank.iter().map(|psi| s2_fft_forward(psi, &self.tables_in)).collect()
    }

    /// Forward transforms of an SO(3) filter bank.
    pub fn so3_filters(&self, bank: &[SO3Signal]) -> Result<Vec<SO3Spectrum>> {
        self.check_bank(bank)?;
        bank.iter().map(|psi| so3_fft_forward(psi, &self.tables_in)).collect()
    }

    /// Output spectrum of an S² layer given transformed filters.
    pub fn s2_spectrum(&self, filters: &[S2Spectrum], f: &S2Signal) -> Result<SO3Spectrum> {
        self.check_input(f)?;
        let f_hat = s2_fft_forward(f, &self.tables_in)?;
        s2_product(filters, &f_hat, self.bandwidth_out)
    }

    /// Output spectrum of an SO(3) layer given transformed filters.
    pub fn so3_spectrum(&self, filters: &[SO3Spectrum], f: &SO3Signal) -> Result<SO3Spectrum> {
        self.check_input(f)?;
        let f_hat = so3_fft_forward(f, &self.tables_in)?;
        so3_product(filters, &f_hat, self.bandwidth_out)
    }

    pub fn s2_apply(&self, filters: &[S2Spectrum], f: &S2Signal) -> Result<SO3Signal> {
        so3_fft_inverse(&self.s2_spectrum(filters, f)?, &self.tables_out)
    }

    pub fn so3_apply(&self, filters: &[SO3Spectrum], f: &SO3Signal) -> Result<SO3Signal> {
        so3_fft_inverse(&self.so3_spectrum(filters, f)?, &self.tables_out)
    }
}

fn check_filter_shapes(shapes: impl Iterator<Item = (Bandwidth, usize)>, f: (Bandwidth, usize)) -> Result<()> {
    for (i, (b, k)) in shapes.enumerate() {
        if b != f.0 {
            return Err(Error::BandwidthMismatch {
                expected: f.0.get(),
                found: b.get(),
            });
        }
        if k != f.1 {
            return Err(Error::Shape(format!("filter {i} has {k} channels, signal has {}", f.1)));
        }
    }
    Ok(())
}

/// `h^l_{mn} = Σ_k f_k^l[m] conj(ψ_k^l[n])` for each filter, degrees `l < b_out`.
pub fn s2_product(filters: &[S2Spectrum], f: &S2Spectrum, b_out: Bandwidth) -> Result<SO3Spectrum> {
    check_filter_shapes(filters.iter().map(|p| (p.bandwidth, p.channels)), (f.bandwidth, f.channels))?;
    if b_out > f.bandwidth {
        return Err(Error::OutputBandwidth {
            out: b_out.get(),
            input: f.bandwidth.get(),
        });
    }
    let b = b_out.get();
    let mut out = SO3Spectrum::zeros(b_out, filters.len());
    let pieces = degree_pieces(&mut out.data, filters.len(), b, so3_block_offset);
    par::for_each_piece(pieces, |idx, block| {
        let (c, l) = (idx / b, idx % b);
        let w = 2 * l + 1;
        for k in 0..f.channels {
            let fv = f.degree(k, l);
            let pv = filters[c].degree(k, l);
            for (m, fm) in fv.iter().enumerate() {
                for (n, pn) in pv.iter().enumerate() {
                    block[m * w + n] += fm * pn.conj();
                }
            }
        }
    });
    Ok(out)
}

/// `h^l = Σ_k f_k^l (ψ_k^l)†` for each filter, degrees `l < b_out`.
pub fn so3_product(filters: &[SO3Spectrum], f: &SO3Spectrum, b_out: Bandwidth) -> Result<SO3Spectrum> {
    check_filter_shapes(filters.iter().map(|p| (p.bandwidth, p.channels)), (f.bandwidth, f.channels))?;
    if b_out > f.bandwidth {
        return Err(Error::OutputBandwidth {
            out: b_out.get(),
            input: f.bandwidth.get(),
        });
    }
    let b = b_out.get();
    let mut out = SO3Spectrum::zeros(b_out, filters.len());
    let pieces = degree_pieces(&mut out.data, filters.len(), b, so3_block_offset);
    par::for_each_piece(pieces, |idx, block| {
        let (c, l) = (idx / b, idx % b);
        let w = 2 * l + 1;
        for k in 0..f.channels {
            let fb = f.block(k, l);
            let pb = filters[c].block(k, l);
            for m in 0..w {
                let frow = &fb[m * w..(m + 1) * w];
                for n in 0..w {
                    let prow = &pb[n * w..(n + 1) * w];
                    let acc: Complex64 = frow.iter().zip(prow).map(|(a, p)| a * p.conj()).sum();
                    block[m * w + n] += acc;
                }
            }
        }
    });
    Ok(out)
}

/// `[ψ ⋆ f](R) = Σ_k ⟨L_R ψ_k, f_k⟩` on the SO(3) grid of bandwidth `b_out`.
pub fn s2_correlate(psi: &S2Signal, f: &S2Signal, b_out: Bandwidth) -> Result<SO3Signal> {
    let plan = CorrelationPlan::new(f.bandwidth, b_out, f.channels, 1)?;
    let filters = plan.s2_filters(std::slice::from_ref(psi))?;
    plan.s2_apply(&filters, f)
}

/// `[ψ ⋆ f](R) = Σ_k ⟨L_R ψ_k, f_k⟩` for signals on SO(3).
pub fn so3_correlate(psi: &SO3Signal, f: &SO3Signal, b_out: Bandwidth) -> Result<SO3Signal> {
    let plan = CorrelationPlan::new(f.bandwidth, b_out, f.channels, 1)?;
    let filters = plan.so3_filters(std::slice::from_ref(psi))?;
    plan.so3_apply(&filters, f)
}

/// Correlates `f` with every filter of a bank; output channel `c` uses `bank[c]`.
///
/// All filters must be of the same kind as `f` and share its bandwidth and
/// channel count.
pub fn multichannel_correlate(bank: &[Signal], f: &Signal, b_out: Bandwidth) -> Result<SO3Signal> {
    if bank.is_empty() {
        return Err(Error::Shape("empty filter bank".into()));
    }
    if let Some(i) = bank.iter().position(|p| p.kind() != f.kind()) {
        return Err(Error::Shape(format!("filter {i} is {}, signal is {}", bank[i].kind(), f.kind())));
    }
    let plan = CorrelationPlan::new(f.bandwidth(), b_out, f.channels(), bank.len())?;
    match f {
        Signal::S2(f) => {
            let bank: Vec<S2Signal> = bank
                .iter()
                .filter_map(|p| match p {
                    Signal::S2(s) => Some(s.clone()),
                    Signal::SO3(_) => None,
                })
                .collect();
            let filters = plan.s2_filters(&bank)?;
            plan.s2_apply(&filters, f)
        }
        Signal::SO3(f) => {
            let bank: Vec<SO3Signal> = bank
                .iter()
                .filter_map(|p| match p {
                    Signal::SO3(s) => Some(s.clone()),
                    Signal::S2(_) => None,
                })
                .collect();
            let filters = plan.so3_filters(&bank)?;
            plan.so3_apply(&filters, f)
        }
    }
}

/// `[L_R f]^l = conj(D^l(R)) f^l` for every channel.
pub fn rotate_s2_spectrum(s: &S2Spectrum, r: &Rotation) -> S2Spectrum {
    let b = s.bandwidth.get();
    let d = wigner_big_d_matrices(b - 1, r);
    let mut out = S2Spectrum::zeros(s.bandwidth, s.channels);
    let pieces = degree_pieces(&mut out.data, s.channels, b, |l| l * l);
    par::for_each_piece(pieces, |idx, v| {
        let (c, l) = (idx / b, idx % b);
        let w = 2 * l + 1;
        let dl = d.block(l);
        let f = s.degree(c, l);
        for p in 0..w {
            v[p] = dl[p * w..(p + 1) * w].iter().zip(f).map(|(a, x)| a.conj() * x).sum();
        }
    });
    out
}

/// `[L_R f]^l = conj(D^l(R)) f^l`, a left multiplication of each block.
pub fn rotate_so3_spectrum(s: &SO3Spectrum, r: &Rotation) -> SO3Spectrum {
    let b = s.bandwidth.get();
    let d = wigner_big_d_matrices(b - 1, r);
    let mut out = SO3Spectrum::zeros(s.bandwidth, s.channels);
    let pieces = degree_pieces(&mut out.data, s.channels, b, so3_block_offset);
    par::for_each_piece(pieces, |idx, block| {
        let (c, l) = (idx / b, idx % b);
        let w = 2 * l + 1;
        let dl = d.block(l);
        let f = s.block(c, l);
        for p in 0..w {
            for m in 0..w {
                let a = dl[p * w + m].conj();
                if a == ZERO {
                    continue;
                }
                for n in 0..w {
                    block[p * w + n] += a * f[m * w + n];
                }
            }
        }
    });
    out
}

/// `[L_R f](x) = f(R^{-1} x)` through the Fourier domain.
pub fn rotate_s2_spectral(f: &S2Signal, r: &Rotation, t: &WignerTables) -> Result<S2Signal> {
    let s = s2_fft_forward(f, t)?;
    s2_fft_inverse(&rotate_s2_spectrum(&s, r), t)
}

/// `[L_R f](Q) = f(R^{-1} Q)` through the Fourier domain.
pub fn rotate_so3_spectral(f: &SO3Signal, r: &Rotation, t: &WignerTables) -> Result<SO3Signal> {
    let s = so3_fft_forward(f, t)?;
    so3_fft_inverse(&rotate_so3_spectrum(&s, r), t)
}

/// Driscoll–Healy spherical convolution `∫ f(R n) ψ(R^{-1} x) dR`.
///
/// Only the `m = 0` coefficients of `ψ` enter: `(f * ψ)^l_m = f^l_m ψ^l_0`.
pub fn dh_convolve(f: &S2Signal, psi: &S2Signal, t: &WignerTables) -> Result<S2Signal> {
    if f.channels != 1 || psi.channels != 1 {
        return Err(Error::Shape("spherical convolution takes single-channel signals".into()));
    }
    if f.bandwidth != psi.bandwidth {
        return Err(Error::BandwidthMismatch {
            expected: f.bandwidth.get(),
            found: psi.bandwidth.get(),
        });
    }
    let mut g = s2_fft_forward(f, t)?;
    let p = s2_fft_forward(psi, t)?;
    for l in 0..f.bandwidth.get() {
        let li = l as i64;
        let zonal = p.get(0, l, 0);
        for m in -li..=li {
            *g.get_mut(0, l, m) *= zonal;
        }
    }
    s2_fft_inverse(&g, t)
}

/// Average of each ring over alpha: the rotationally symmetric part about the pole.
pub fn zonal_average(f: &S2Signal) -> S2Signal {
    let n = f.bandwidth.samples();
    let mut out = f.clone();
    for ring in out.data.chunks_mut(n) {
        let mean = ring.iter().sum::<f64>() / n as f64;
        ring.fill(mean);
    }
    out
}

/// Quadrature integral of each channel over SO(3).
pub fn so3_integrate(f: &SO3Signal) -> Vec<f64> {
    f.integrate()
}

/// Largest grid sample of each channel.
pub fn so3_max_pool(f: &SO3Signal) -> Vec<f64> {
    (0..f.channels)
        .map(|c| {
            f.channel(c)
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, |best, v| if v > best { v } else { best })
        })
        .collect()
}

/// Pointwise `max(0, x)` on grid samples.
pub fn relu_spatial<S: GridSignal>(f: &S) -> S {
    let mut out = f.clone();
    out.samples_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    out
}
