//! Wigner-d and Wigner-D matrices, spherical harmonics, and the per-ring
//! basis tables consumed by the transforms.
//!
//! Convention: `D^l_{mn}(alpha, beta, gamma) = e^{-i m alpha} d^l_{mn}(beta) e^{-i n gamma}`
//! with the Condon-Shortley `d^l`, which makes `D^l` a unitary representation of
//! rotations `Z(alpha) Y(beta) Z(gamma)`. Spherical harmonics are the `n = 0`
//! column restricted to the sphere, `Y^l_m(alpha, beta) = D^l_{m0}(alpha, beta, 0)`.
//!
//! Blocks are stored row-major with rows `m` and columns `n` both running
//! from `-l` to `l`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grids::{so3_block_offset, Bandwidth, Rotation, S2Grid, S2Point};
use crate::par;

/// Allocation cap applied by [`WignerTables::new`].
pub const DEFAULT_TABLE_CAP: u64 = 2 << 30;

#[inline]
fn block_index(l: usize, m: i64, n: i64) -> usize {
    let w = 2 * l as i64 + 1;
    ((m + l as i64) * w + (n + l as i64)) as usize
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `sqrt(C(2l, k)) * cos(beta/2)^pc * sin(beta/2)^ps`, evaluated in log space
/// so large binomials times tiny powers neither overflow nor lose precision.
fn seed_magnitude(lnf: &[f64], l: usize, k: usize, pc: usize, ps: usize, c: f64, s: f64) -> f64 {
    let mut ln = 0.5 * (lnf[2 * l] - lnf[k] - lnf[2 * l - k]);
    if pc > 0 {
        if c == 0.0 {
            return 0.0;
        }
        ln += pc as f64 * c.ln();
    }
    if ps > 0 {
        if s == 0.0 {
            return 0.0;
        }
        ln += ps as f64 * s.ln();
    }
    ln.exp()
}

/// `d^{l0}_{mn}(beta)` at the lowest degree `l0 = max(|m|, |n|)`.
fn seed(lnf: &[f64], m: i64, n: i64, c: f64, s: f64) -> f64 {
    let l = m.abs().max(n.abs());
    let lu = l as usize;
    let odd = |e: i64| e.rem_euclid(2) == 1;
    if m.abs() >= n.abs() {
        if m >= 0 {
            // d_{l,n} = sqrt(C(2l, l+n)) c^{l+n} (-s)^{l-n}
            let v = seed_magnitude(lnf, lu, (l + n) as usize, (l + n) as usize, (l - n) as usize, c, s);
            if odd(l - n) {
                -v
            } else {
                v
            }
        } else {
            // d_{-l,n} = sqrt(C(2l, l-n)) c^{l-n} s^{l+n}
            seed_magnitude(lnf, lu, (l - n) as usize, (l - n) as usize, (l + n) as usize, c, s)
        }
    } else if n >= 0 {
        // d_{m,l} = sqrt(C(2l, l+m)) c^{l+m} s^{l-m}
        seed_magnitude(lnf, lu, (l + m) as usize, (l + m) as usize, (l - m) as usize, c, s)
    } else {
        // d_{m,-l} = sqrt(C(2l, l-m)) c^{l-m} (-s)^{l+m}
        let v = seed_magnitude(lnf, lu, (l - m) as usize, (l - m) as usize, (l + m) as usize, c, s);
        if odd(l + m) {
            -v
        } else {
            v
        }
    }
}

/// Evaluates `d^l_{mn}(beta)` for `l = max(|m|,|n|) ..= l_max` with the
/// three-term recurrence in `l`, calling `emit(l, value)` for each degree.
#[allow(clippy::too_many_arguments)]
fn d_column(lnf: &[f64], l_max: usize, m: i64, n: i64, cos_b: f64, c: f64, s: f64, mut emit: impl FnMut(usize, f64)) {
    let l0 = m.abs().max(n.abs()) as usize;
    if l0 > l_max {
        return;
    }
    let mut prev = 0.0;
    let mut cur = seed(lnf, m, n, c, s);
    emit(l0, cur);
    let (mf, nf) = (m as f64, n as f64);
    for l in l0..l_max {
        let lf = l as f64;
        let l1 = lf + 1.0;
        let a = l1 * (2.0 * lf + 1.0) / ((l1 * l1 - mf * mf) * (l1 * l1 - nf * nf)).sqrt();
        let (shift, back) = if l == 0 {
            (0.0, 0.0)
        } else {
            (
                mf * nf / (lf * l1),
                ((lf * lf - mf * mf) * (lf * lf - nf * nf)).sqrt() / (lf * (2.0 * lf + 1.0)),
            )
        };
        let next = a * ((cos_b - shift) * cur - back * prev);
        prev = cur;
        cur = next;
        emit(l + 1, cur);
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&beta) || beta.is_nan() {
        return Err(Error::BetaOutOfRange(beta));
    }
    Ok(())
}

/// Writes every block `d^l(beta)`, `l <= l_max`, into `out` (length
/// `so3_block_offset(l_max + 1)`), reusing a precomputed log-factorial table.
fn fill_small_d(lnf: &[f64], l_max: usize, beta: f64, out: &mut [f64]) {
    let (s, c) = (beta / 2.0).sin_cos();
    let cos_b = beta.cos();
    let lm = l_max as i64;
    for m in -lm..=lm {
        for n in -lm..=lm {
            d_column(lnf, l_max, m, n, cos_b, c, s, |l, v| {
                out[so3_block_offset(l) + block_index(l, m, n)] = v;
            });
        }
    }
}

/// Real Wigner-d blocks `d^0(beta) .. d^{l_max}(beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerSmallD {
    pub l_max: usize,
    pub data: Vec<f64>,
}

impl WignerSmallD {
    pub fn block(&self, l: usize) -> &[f64] {
        &self.data[so3_block_offset(l)..so3_block_offset(l + 1)]
    }

    pub fn get(&self, l: usize, m: i64, n: i64) -> f64 {
        self.data[so3_block_offset(l) + block_index(l, m, n)]
    }
}

/// Computes `d^l(beta)` for every `l <= l_max`.
pub fn wigner_d_matrices(l_max: usize, beta: f64) -> Result<WignerSmallD> {
    check_beta(beta)?;
    let lnf = ln_factorials(2 * l_max + 2);
    let mut data = vec![0.0; so3_block_offset(l_max + 1)];
    fill_small_d(&lnf, l_max, beta, &mut data);
    Ok(WignerSmallD { l_max, data })
}

/// Complex Wigner-D blocks `D^0(R) .. D^{l_max}(R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerDBlockStack {
    pub l_max: usize,
    pub data: Vec<Complex64>,
}

impl WignerDBlockStack {
    pub fn block(&self, l: usize) -> &[Complex64] {
        &self.data[so3_block_offset(l)..so3_block_offset(l + 1)]
    }

    pub fn get(&self, l: usize, m: i64, n: i64) -> Complex64 {
        self.data[so3_block_offset(l) + block_index(l, m, n)]
    }
}

/// Computes `D^l(r)` for every `l <= l_max`.
pub fn wigner_big_d_matrices(l_max: usize, r: &Rotation) -> WignerDBlockStack {
    let small = wigner_d_matrices(l_max, r.beta).expect("rotation beta is canonical");
    let lm = l_max as i64;
    let phase = |k: i64, angle: f64| Complex64::cis(-(k as f64) * angle);
    let ea: Vec<Complex64> = (-lm..=lm).map(|m| phase(m, r.alpha)).collect();
    let eg: Vec<Complex64> = (-lm..=lm).map(|n| phase(n, r.gamma)).collect();
    let mut data = vec![Complex64::new(0.0, 0.0); small.data.len()];
    for l in 0..=l_max {
        let li = l as i64;
        let off = so3_block_offset(l);
        for m in -li..=li {
            for n in -li..=li {
                let idx = off + block_index(l, m, n);
                data[idx] = ea[(m + lm) as usize] * small.data[idx] * eg[(n + lm) as usize];
            }
        }
    }
    WignerDBlockStack { l_max, data }
}

/// Spherical harmonics `Y^l_m(p)` for `l <= l_max`, flattened at offset `l^2 + m + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalHarmonics {
    pub l_max: usize,
    pub data: Vec<Complex64>,
}

impl SphericalHarmonics {
    pub fn degree(&self, l: usize) -> &[Complex64] {
        &self.data[l * l..(l + 1) * (l + 1)]
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.data[l * l + (m + l as i64) as usize]
    }
}

/// Evaluates `Y^l_m(p) = D^l_{m0}(alpha, beta, 0)` directly from the `n = 0` columns.
pub fn spherical_harmonics(l_max: usize, p: S2Point) -> SphericalHarmonics {
    let lnf = ln_factorials(2 * l_max + 2);
    let (s, c) = (p.beta / 2.0).sin_cos();
    let cos_b = p.beta.cos();
    let mut data = vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)];
    let lm = l_max as i64;
    for m in -lm..=lm {
        let e = Complex64::cis(-(m as f64) * p.alpha);
        d_column(&lnf, l_max, m, 0, cos_b, c, s, |l, v| {
            data[l * l + (m + l as i64) as usize] = e * v;
        });
    }
    SphericalHarmonics { l_max, data }
}

/// Precomputed `d^l(beta_j)` samples on every ring of the bandwidth-`b` grid,
/// plus the quadrature ring weights.
///
/// Layout is `(ring j, degree l, m, n)`: ring `j` occupies a contiguous span of
/// `b(2b-1)(2b+1)/3` values, so the beta contraction streams through memory.
/// The `n = 0` columns are duplicated into a compact `(ring, l, m)` table for
/// the sphere transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerTables {
    pub bandwidth: Bandwidth,
    pub d_samples: Vec<f64>,
    pub legendre: Vec<f64>,
    /// Per-point sphere quadrature weight of each ring.
    pub weights: Vec<f64>,
}

impl WignerTables {
    pub fn new(b: Bandwidth) -> Result<Self> {
        Self::with_cap(b, DEFAULT_TABLE_CAP)
    }

    /// Bytes needed for the tables at bandwidth `b`.
    pub fn estimated_bytes(b: Bandwidth) -> u64 {
        let rings = b.samples() as u64;
        let per_ring = (b.so3_coefficients() + b.s2_coefficients() + 1) as u64;
        8 * rings * per_ring
    }

    /// Builds the tables, refusing before allocation when the estimate exceeds `cap`.
    pub fn with_cap(b: Bandwidth, cap: u64) -> Result<Self> {
        let required = Self::estimated_bytes(b);
        if required > cap {
            return Err(Error::MemoryCap { required, cap });
        }
        let grid = S2Grid::new(b);
        let l_max = b.get() - 1;
        let stride = b.so3_coefficients();
        let lnf = ln_factorials(2 * l_max + 2);
        let mut d_samples = vec![0.0; stride * b.samples()];
        par::for_each_chunk(&mut d_samples, stride, |j, ring| {
            fill_small_d(&lnf, l_max, grid.betas[j], ring);
        });
        let nl = b.s2_coefficients();
        let mut legendre = vec![0.0; nl * b.samples()];
        for (j, out) in legendre.chunks_mut(nl).enumerate() {
            let ring = &d_samples[j * stride..(j + 1) * stride];
            for l in 0..b.get() {
                let li = l as i64;
                for m in -li..=li {
                    out[l * l + (m + li) as usize] = ring[so3_block_offset(l) + block_index(l, m, 0)];
                }
            }
        }
        Ok(Self {
            bandwidth: b,
            d_samples,
            legendre,
            weights: grid.weights,
        })
    }

    /// Reassembles tables from raw parts, validating their lengths.
    pub fn from_parts(b: Bandwidth, d_samples: Vec<f64>, legendre: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let rings = b.samples();
        if d_samples.len() != rings * b.so3_coefficients() || legendre.len() != rings * b.s2_coefficients() || weights.len() != rings {
            return Err(Error::Shape("wigner table part lengths do not match the bandwidth".into()));
        }
        Ok(Self {
            bandwidth: b,
            d_samples,
            legendre,
            weights,
        })
    }

    #[inline]
    pub fn ring_stride(&self) -> usize {
        self.bandwidth.so3_coefficients()
    }

    /// All blocks on ring `j`.
    pub fn ring(&self, j: usize) -> &[f64] {
        let s = self.ring_stride();
        &self.d_samples[j * s..(j + 1) * s]
    }

    /// `d^l(beta_j)`, row-major `(2l+1) x (2l+1)`.
    pub fn block(&self, j: usize, l: usize) -> &[f64] {
        &self.ring(j)[so3_block_offset(l)..so3_block_offset(l + 1)]
    }

    pub fn d(&self, j: usize, l: usize, m: i64, n: i64) -> f64 {
        self.ring(j)[so3_block_offset(l) + block_index(l, m, n)]
    }

    /// `d^l_{m0}(beta_j)` for all `(l, m)` at offset `l^2 + m + l`.
    pub fn legendre_ring(&self, j: usize) -> &[f64] {
        let s = self.bandwidth.s2_coefficients();
        &self.legendre[j * s..(j + 1) * s]
    }

    /// Total number of stored `d` coefficients.
    pub fn len(&self) -> usize {
        self.d_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d_samples.is_empty()
    }
}

pub fn build_tables(b: Bandwidth) -> Result<WignerTables> {
    WignerTables::new(b)
}
