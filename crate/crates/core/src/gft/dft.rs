//! Dense transforms: explicit weighted sums against sampled basis functions.
//!
//! The S² pair evaluates every `(l, m)` coefficient as a sum over all `4b²`
//! grid points. The SO(3) pair evaluates the same sums in factored order
//! (alpha, then gamma, then beta), multiplying by dense exponential matrices
//! instead of running an FFT, which keeps the cost at `O(b⁴)`. Neither path
//! shares numerical code with [`super::fast`]; only the Wigner tables are common.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{accept_residue, check_tables, degree_pieces, s2_offset, S2Signal, S2Spectrum, SO3Signal, SO3Spectrum};
use crate::error::{Error, Result};
use crate::grids::so3_block_offset;
use crate::harmonics::WignerTables;
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `e^{sign * i m x_p}` for `m = -(b-1)..=(b-1)` (rows) and grid index `p` (columns).
fn exponentials(b: usize, sign: f64) -> Vec<Complex64> {
    let n = 2 * b;
    let bi = b as i64;
    let mut out = Vec::with_capacity((2 * b - 1) * n);
    for m in -(bi - 1)..bi {
        for p in 0..n {
            let x = TAU * p as f64 / n as f64;
            out.push(Complex64::cis(sign * m as f64 * x));
        }
    }
    out
}

pub fn so3_dft_forward(f: &SO3Signal, t: &WignerTables) -> Result<SO3Spectrum> {
    check_tables(f.bandwidth, t)?;
    let b = f.bandwidth.get();
    let n = f.bandwidth.samples();
    let r = 2 * b - 1;
    let e = exponentials(b, 1.0);

    // partial[c][j][m][nn] = Σ_i Σ_k e^{imα_i} e^{inγ_k} f[c][j][i][k]
    let mut partial = vec![ZERO; f.channels * n * r * r];
    par::for_each_chunk(&mut partial, r * r, |idx, out| {
        let (c, j) = (idx / n, idx % n);
        let base = (c * n + j) * n * n;
        let samples = &f.data[base..base + n * n];
        let mut over_alpha = vec![ZERO; r * n];
        for mi in 0..r {
            for i in 0..n {
                let ph = e[mi * n + i];
                let row = &samples[i * n..(i + 1) * n];
                let acc = &mut over_alpha[mi * n..(mi + 1) * n];
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += ph * *v;
                }
            }
        }
        for mi in 0..r {
            for ni in 0..r {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += over_alpha[mi * n + k] * e[ni * n + k];
                }
                out[mi * r + ni] = acc;
            }
        }
    });

    let mut out = SO3Spectrum::zeros(f.bandwidth, f.channels);
    let pieces = degree_pieces(&mut out.data, f.channels, b, so3_block_offset);
    let inv_n = 1.0 / n as f64;
    par::for_each_piece(pieces, |idx, block| {
        let (c, l) = (idx / b, idx % b);
        let w = 2 * l + 1;
        let shift = b - 1 - l;
        for j in 0..n {
            let wj = t.weights[j] * inv_n;
            let p = &partial[(c * n + j) * r * r..(c * n + j + 1) * r * r];
            for a in 0..w {
                for bb in 0..w {
                    block[a * w + bb] += p[(a + shift) * r + bb + shift] * (wj * t.d(j, l, a as i64 - l as i64, bb as i64 - l as i64));
                }
            }
        }
    });
    Ok(out)
}

pub fn so3_dft_inverse(s: &SO3Spectrum, t: &WignerTables) -> Result<SO3Signal> {
    check_tables(s.bandwidth, t)?;
    if s.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("spectrum coefficients"));
    }
    let b = s.bandwidth.get();
    let n = s.bandwidth.samples();
    let r = 2 * b - 1;
    let e = exponentials(b, -1.0);
    let mut out = vec![ZERO; s.channels * n * n * n];
    par::for_each_chunk(&mut out, n * n, |idx, plane| {
        let (c, j) = (idx / n, idx % n);
        // g[m][nn] = Σ_l (2l+1) f^l_{mn} d^l_{mn}(β_j)
        let mut g = vec![ZERO; r * r];
        for l in 0..b {
            let li = l as i64;
            let scale = (2 * l + 1) as f64;
            let shift = b - 1 - l;
            for m in -li..=li {
                for nn in -li..=li {
                    let v = s.get(c, l, m, nn) * (scale * t.d(j, l, m, nn));
                    g[((m + li) as usize + shift) * r + (nn + li) as usize + shift] += v;
                }
            }
        }
        // h[m][k] = Σ_n g[m][n] e^{-inγ_k}
        let mut h = vec![ZERO; r * n];
        for mi in 0..r {
            for ni in 0..r {
                let gv = g[mi * r + ni];
                if gv == ZERO {
                    continue;
                }
                for k in 0..n {
                    h[mi * n + k] += gv * e[ni * n + k];
                }
            }
        }
        for i in 0..n {
            for mi in 0..r {
                let ph = e[mi * n + i];
                for k in 0..n {
                    plane[i * n + k] += ph * h[mi * n + k];
                }
            }
        }
    });
    let residue = out.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
    accept_residue(residue)?;
    Ok(SO3Signal {
        bandwidth: s.bandwidth,
        channels: s.channels,
        data: out.into_iter().map(|z| z.re).collect(),
    })
}

pub fn s2_dft_forward(f: &S2Signal, t: &WignerTables) -> Result<S2Spectrum> {
    check_tables(f.bandwidth, t)?;
    let b = f.bandwidth.get();
    let n = f.bandwidth.samples();
    let e = exponentials(b, 1.0);
    let mut out = S2Spectrum::zeros(f.bandwidth, f.channels);
    let pieces = degree_pieces(&mut out.data, f.channels, b, s2_offset);
    par::for_each_piece(pieces, |idx, vec| {
        let (c, l) = (idx / b, idx % b);
        let li = l as i64;
        let samples = f.channel(c);
        for (mi, m) in (-li..=li).enumerate() {
            let erow = &e[((m + b as i64 - 1) as usize) * n..((m + b as i64) as usize) * n];
            let mut acc = ZERO;
            for j in 0..n {
                let basis = t.weights[j] * t.legendre_ring(j)[l * l + mi];
                for i in 0..n {
                    acc += erow[i] * (basis * samples[j * n + i]);
                }
            }
            vec[mi] = acc;
        }
    });
    Ok(out)
}

pub fn s2_dft_inverse(s: &S2Spectrum, t: &WignerTables) -> Result<S2Signal> {
    check_tables(s.bandwidth, t)?;
    if s.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("spectrum coefficients"));
    }
    let b = s.bandwidth.get();
    let n = s.bandwidth.samples();
    let e = exponentials(b, -1.0);
    let mut out = vec![ZERO; s.channels * n * n];
    par::for_each_chunk(&mut out, 1, |idx, v| {
        let c = idx / (n * n);
        let (j, i) = ((idx / n) % n, idx % n);
        let leg = t.legendre_ring(j);
        let mut acc = ZERO;
        for l in 0..b {
            let li = l as i64;
            let scale = (2 * l + 1) as f64;
            for (mi, m) in (-li..=li).enumerate() {
                let ph = e[((m + b as i64 - 1) as usize) * n + i];
                acc += s.get(c, l, m) * ph * (scale * leg[l * l + mi]);
            }
        }
        v[0] = acc;
    });
    let residue = out.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
    accept_residue(residue)?;
    Ok(S2Signal {
        bandwidth: s.bandwidth,
        channels: s.channels,
        data: out.into_iter().map(|z| z.re).collect(),
    })
}
