//! FFT-based transforms: a 1-D (S²) or 2-D (SO(3)) FFT over the equiangular
//! axes, then a contraction of the beta axis against the Wigner-d tables.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{accept_residue, check_tables, degree_pieces, s2_offset, S2Signal, S2Spectrum, SO3Signal, SO3Spectrum};
use crate::error::{Error, Result};
use crate::grids::so3_block_offset;
use crate::harmonics::WignerTables;
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
fn wrap(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// `Σ_x a[x] e^{+2πi kx/n}` (unnormalized) when `inverse`, `e^{-...}` otherwise.
fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

/// In-place 2-D FFT of a row-major `n x n` array.
fn fft2(fft: &dyn Fft<f64>, a: &mut [Complex64], n: usize, scratch: &mut Vec<Complex64>) {
    scratch.resize(fft.get_inplace_scratch_len().max(n), ZERO);
    fft.process_with_scratch(a, scratch);
    let mut col = vec![ZERO; n];
    for k in 0..n {
        for (i, c) in col.iter_mut().enumerate() {
            *c = a[i * n + k];
        }
        fft.process_with_scratch(&mut col, scratch);
        for (i, c) in col.iter().enumerate() {
            a[i * n + k] = *c;
        }
    }
}

/// Forward SO(3) transform: `f^l_{mn} = Σ w_j d^l_{mn}(β_j) Σ_{α,γ} f e^{i(mα + nγ)}`.
pub fn so3_fft_forward(f: &SO3Signal, t: &WignerTables) -> Result<SO3Spectrum> {
    check_tables(f.bandwidth, t)?;
    let b = f.bandwidth.get();
    let n = f.bandwidth.samples();
    let slab = n * n;

    // Step 1: 2-D inverse-direction FFT over (alpha, gamma) for each (channel, ring).
    let fft = plan(n, true);
    let mut ffted: Vec<Complex64> = f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    par::for_each_chunk(&mut ffted, slab, |_, a| {
        let mut scratch = Vec::new();
        fft2(fft.as_ref(), a, n, &mut scratch);
    });

    // Step 2: beta contraction, one task per (channel, degree) block.
    let mut out = SO3Spectrum::zeros(f.bandwidth, f.channels);
    let pieces = degree_pieces(&mut out.data, f.channels, b, so3_block_offset);
    let inv_n = 1.0 / n as f64;
    par::for_each_piece(pieces, |idx, block| {
        let (c, l) = (idx / b, idx % b);
        let li = l as i64;
        let w = 2 * l + 1;
        for j in 0..n {
            let wj = t.weights[j] * inv_n;
            let d = t.block(j, l);
            let plane = &ffted[(c * n + j) * slab..(c * n + j + 1) * slab];
            for (mi, m) in (-li..=li).enumerate() {
                let row = &plane[wrap(m, n) * n..wrap(m, n) * n + n];
                let drow = &d[mi * w..(mi + 1) * w];
                let orow = &mut block[mi * w..(mi + 1) * w];
                for (ni, nn) in (-li..=li).enumerate() {
                    orow[ni] += row[wrap(nn, n)] * (wj * drow[ni]);
                }
            }
        }
    });
    Ok(out)
}

/// Inverse SO(3) transform with the residue diagnostic: returns the signal and
/// the largest discarded imaginary part.
pub fn so3_fft_inverse_diag(s: &SO3Spectrum, t: &WignerTables) -> Result<(SO3Signal, f64)> {
    check_tables(s.bandwidth, t)?;
    if s.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("spectrum coefficients"));
    }
    let b = s.bandwidth.get();
    let n = s.bandwidth.samples();
    let slab = n * n;
    let fft = plan(n, false);
    let mut grid = vec![ZERO; s.channels * n * slab];
    par::for_each_chunk(&mut grid, slab, |idx, plane| {
        let (c, j) = (idx / n, idx % n);
        for l in 0..b {
            let li = l as i64;
            let w = 2 * l + 1;
            let scale = w as f64;
            let d = t.block(j, l);
            let coef = s.block(c, l);
            for (mi, m) in (-li..=li).enumerate() {
                let row = &mut plane[wrap(m, n) * n..wrap(m, n) * n + n];
                for (ni, nn) in (-li..=li).enumerate() {
                    row[wrap(nn, n)] += coef[mi * w + ni] * (scale * d[mi * w + ni]);
                }
            }
        }
        let mut scratch = Vec::new();
        fft2(fft.as_ref(), plane, n, &mut scratch);
    });
    let residue = grid.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
    let data = grid.into_iter().map(|z| z.re).collect();
    Ok((
        SO3Signal {
            bandwidth: s.bandwidth,
            channels: s.channels,
            data,
        },
        residue,
    ))
}

pub fn so3_fft_inverse(s: &SO3Spectrum, t: &WignerTables) -> Result<SO3Signal> {
    let (sig, residue) = so3_fft_inverse_diag(s, t)?;
    accept_residue(residue)?;
    Ok(sig)
}

/// Forward S² transform: `f^l_m = Σ_j w_j d^l_{m0}(β_j) Σ_α f e^{imα}`.
pub fn s2_fft_forward(f: &S2Signal, t: &WignerTables) -> Result<S2Spectrum> {
    check_tables(f.bandwidth, t)?;
    let b = f.bandwidth.get();
    let n = f.bandwidth.samples();
    let fft = plan(n, true);
    let mut ffted: Vec<Complex64> = f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    par::for_each_chunk(&mut ffted, n, |_, row| {
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        fft.process_with_scratch(row, &mut scratch);
    });

    let mut out = S2Spectrum::zeros(f.bandwidth, f.channels);
    let pieces = degree_pieces(&mut out.data, f.channels, b, s2_offset);
    par::for_each_piece(pieces, |idx, vec| {
        let (c, l) = (idx / b, idx % b);
        let li = l as i64;
        for j in 0..n {
            let wj = t.weights[j];
            let leg = &t.legendre_ring(j)[l * l..(l + 1) * (l + 1)];
            let row = &ffted[(c * n + j) * n..(c * n + j + 1) * n];
            for (mi, m) in (-li..=li).enumerate() {
                vec[mi] += row[wrap(m, n)] * (wj * leg[mi]);
            }
        }
    });
    Ok(out)
}

pub fn s2_fft_inverse_diag(s: &S2Spectrum, t: &WignerTables) -> Result<(S2Signal, f64)> {
    check_tables(s.bandwidth, t)?;
    if s.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("spectrum coefficients"));
    }
    let b = s.bandwidth.get();
    let n = s.bandwidth.samples();
    let fft = plan(n, false);
    let mut grid = vec![ZERO; s.channels * n * n];
    par::for_each_chunk(&mut grid, n, |idx, row| {
        let (c, j) = (idx / n, idx % n);
        let leg = t.legendre_ring(j);
        for l in 0..b {
            let li = l as i64;
            let scale = (2 * l + 1) as f64;
            let coef = s.degree(c, l);
            for (mi, m) in (-li..=li).enumerate() {
                row[wrap(m, n)] += coef[mi] * (scale * leg[l * l + mi]);
            }
        }
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        fft.process_with_scratch(row, &mut scratch);
    });
    let residue = grid.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
    let data = grid.into_iter().map(|z| z.re).collect();
    Ok((
        S2Signal {
            bandwidth: s.bandwidth,
            channels: s.channels,
            data,
        },
        residue,
    ))
}

pub fn s2_fft_inverse(s: &S2Spectrum, t: &WignerTables) -> Result<S2Signal> {
    let (sig, residue) = s2_fft_inverse_diag(s, t)?;
    accept_residue(residue)?;
    Ok(sig)
}
