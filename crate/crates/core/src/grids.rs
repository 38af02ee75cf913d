//! Equiangular sampling grids, quadrature weights and ZYZ rotations.
//!
//! Angles follow the ZYZ Euler convention `R = Z(alpha) Y(beta) Z(gamma)`,
//! and points on the sphere are `x(alpha, beta) = Z(alpha) Y(beta) n` with
//! `n` the north pole. Quadrature weights realize the normalized Haar
//! measures, so the constant function integrates to one on both manifolds.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

/// Below this `sin(beta)` the Euler extraction treats the rotation as gimbal
/// locked and sets `gamma = 0`.
const GIMBAL_EPS: f64 = 1e-9;

/// Harmonic bandwidth: degrees `0..b` are resolved by `2b` samples per angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Bandwidth(usize);

impl Bandwidth {
    pub fn new(b: usize) -> Result<Self> {
        if b == 0 {
            return Err(Error::ZeroBandwidth);
        }
        Ok(Self(b))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Samples per angle, `2b`.
    #[inline]
    pub fn samples(self) -> usize {
        2 * self.0
    }

    /// Number of `(l, m)` coefficients with `l < b`, i.e. `b^2`.
    #[inline]
    pub fn s2_coefficients(self) -> usize {
        self.0 * self.0
    }

    /// Number of `(l, m, n)` coefficients with `l < b`, i.e. `b(2b-1)(2b+1)/3`.
    #[inline]
    pub fn so3_coefficients(self) -> usize {
        so3_block_offset(self.0)
    }
}

impl TryFrom<usize> for Bandwidth {
    type Error = Error;
    fn try_from(b: usize) -> Result<Self> {
        Self::new(b)
    }
}

impl From<Bandwidth> for usize {
    fn from(b: Bandwidth) -> usize {
        b.0
    }
}

impl std::fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Offset of the degree-`l` block in a flattened stack of `(2l'+1)^2` blocks.
#[inline]
pub fn so3_block_offset(l: usize) -> usize {
    // sum_{l' < l} (2l'+1)^2 = l(2l-1)(2l+1)/3
    if l == 0 {
        0
    } else {
        l * (2 * l - 1) * (2 * l + 1) / 3
    }
}

/// Maps an angle into `[0, 2pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// A point on the unit sphere in `(alpha, beta)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S2Point {
    pub alpha: f64,
    pub beta: f64,
}

impl S2Point {
    pub const NORTH_POLE: S2Point = S2Point { alpha: 0.0, beta: 0.0 };

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&beta) {
            return Err(Error::BetaOutOfRange(beta));
        }
        Ok(Self {
            alpha: wrap_angle(alpha),
            beta,
        })
    }

    pub fn to_cartesian(self) -> [f64; 3] {
        let (sa, ca) = self.alpha.sin_cos();
        let (sb, cb) = self.beta.sin_cos();
        [sb * ca, sb * sa, cb]
    }

    /// Inverse of [`S2Point::to_cartesian`]; the input need not be normalized.
    pub fn from_cartesian(v: [f64; 3]) -> Self {
        let rho = v[0].hypot(v[1]);
        let beta = rho.atan2(v[2]);
        let alpha = if rho == 0.0 { 0.0 } else { wrap_angle(v[1].atan2(v[0])) };
        Self { alpha, beta }
    }
}

/// A rotation in ZYZ Euler angles, stored in canonical ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

pub fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

pub fn rot_y(b: f64) -> Mat3 {
    let (s, c) = b.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat_vec(a: &Mat3, v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
    }
    out
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = *v;
        }
    }
    out
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    /// Builds a rotation from arbitrary Euler angles, canonicalizing them.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        if (0.0..=PI).contains(&beta) {
            Self {
                alpha: wrap_angle(alpha),
                beta,
                gamma: wrap_angle(gamma),
            }
        } else {
            Self::from_matrix(&Self::raw_matrix(alpha, beta, gamma))
        }
    }

    fn raw_matrix(alpha: f64, beta: f64, gamma: f64) -> Mat3 {
        mat_mul(&mat_mul(&rot_z(alpha), &rot_y(beta)), &rot_z(gamma))
    }

    /// `Z(alpha) Y(beta) Z(gamma)`.
    pub fn matrix(&self) -> Mat3 {
        Self::raw_matrix(self.alpha, self.beta, self.gamma)
    }

    /// ZYZ extraction from a rotation matrix. Gimbal-locked inputs
    /// (`sin beta < 1e-9`) get `gamma = 0` with the Z rotation folded into alpha.
    pub fn from_matrix(m: &Mat3) -> Self {
        let sb = m[0][2].hypot(m[1][2]);
        let beta = sb.atan2(m[2][2]);
        if sb < GIMBAL_EPS {
            let alpha = if m[2][2] > 0.0 {
                m[1][0].atan2(m[0][0])
            } else {
                (-m[1][0]).atan2(-m[0][0])
            };
            let beta = if m[2][2] > 0.0 { 0.0 } else { PI };
            return Self {
                alpha: wrap_angle(alpha),
                beta,
                gamma: 0.0,
            };
        }
        let alpha = m[1][2].atan2(m[0][2]);
        let gamma = m[2][1].atan2(-m[2][0]);
        Self {
            alpha: wrap_angle(alpha),
            beta,
            gamma: wrap_angle(gamma),
        }
    }

    /// `self * other` as matrices: apply `other` first.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        Self::from_matrix(&mat_mul(&self.matrix(), &other.matrix()))
    }

    pub fn inverse(&self) -> Rotation {
        Self::from_matrix(&transpose(&self.matrix()))
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        mat_vec(&self.matrix(), v)
    }

    /// Rotates a point of the sphere.
    pub fn apply_point(&self, p: S2Point) -> S2Point {
        S2Point::from_cartesian(self.apply(p.to_cartesian()))
    }

    /// Haar-uniform random rotation.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Rotation {
        let alpha = rng.random::<f64>() * TAU;
        let gamma = rng.random::<f64>() * TAU;
        let beta = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
        Rotation::new(alpha, beta, gamma)
    }
}

/// Closed-form ring weights on the offset grid `beta_j = pi(2j+1)/(4b)`,
/// normalized so that `2b * sum_j w_j = 1`.
fn ring_weights(b: usize) -> Vec<f64> {
    let bf = b as f64;
    let raw: Vec<f64> = (0..2 * b)
        .map(|j| {
            let t = (2 * j + 1) as f64 * PI / (4.0 * bf);
            let series: f64 = (0..b)
                .map(|k| {
                    let odd = (2 * k + 1) as f64;
                    (odd * t).sin() / odd
                })
                .sum();
            (2.0 / bf) * t.sin() * series
        })
        .collect();
    let norm = 2.0 * bf * raw.iter().sum::<f64>();
    raw.into_iter().map(|w| w / norm).collect()
}

fn equiangular(b: usize) -> Vec<f64> {
    (0..2 * b).map(|i| TAU * i as f64 / (2 * b) as f64).collect()
}

fn offset_betas(b: usize) -> Vec<f64> {
    (0..2 * b).map(|j| PI * (2 * j + 1) as f64 / (4 * b) as f64).collect()
}

/// Equiangular `2b x 2b` grid on the sphere.
#[derive(Debug, Clone)]
pub struct S2Grid {
    pub bandwidth: Bandwidth,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Per-point quadrature weight of each beta ring.
    pub weights: Vec<f64>,
}

impl S2Grid {
    pub fn new(b: Bandwidth) -> Self {
        let n = b.get();
        Self {
            bandwidth: b,
            alphas: equiangular(n),
            betas: offset_betas(n),
            weights: ring_weights(n),
        }
    }

    pub fn len(&self) -> usize {
        self.alphas.len() * self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point at ring `j`, meridian `i`.
    pub fn point(&self, j: usize, i: usize) -> S2Point {
        S2Point {
            alpha: self.alphas[i],
            beta: self.betas[j],
        }
    }

    /// Quadrature of samples laid out `[beta][alpha]`.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        let n = self.alphas.len();
        samples
            .chunks_exact(n)
            .zip(&self.weights)
            .map(|(ring, w)| w * ring.iter().sum::<f64>())
            .sum()
    }
}

/// Equiangular `2b x 2b x 2b` grid on the rotation group.
#[derive(Debug, Clone)]
pub struct SO3Grid {
    pub bandwidth: Bandwidth,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Per-point quadrature weight of each beta ring (the sphere weight over `2b`).
    pub weights: Vec<f64>,
}

impl SO3Grid {
    pub fn new(b: Bandwidth) -> Self {
        let n = b.get();
        let gamma_factor = 1.0 / (2 * n) as f64;
        Self {
            bandwidth: b,
            alphas: equiangular(n),
            betas: offset_betas(n),
            gammas: equiangular(n),
            weights: ring_weights(n).into_iter().map(|w| w * gamma_factor).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.alphas.len() * self.betas.len() * self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rotation at ring `j`, alpha index `i`, gamma index `k`.
    pub fn rotation(&self, j: usize, i: usize, k: usize) -> Rotation {
        Rotation {
            alpha: self.alphas[i],
            beta: self.betas[j],
            gamma: self.gammas[k],
        }
    }

    /// Quadrature of samples laid out `[beta][alpha][gamma]`.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        let n = self.alphas.len() * self.gammas.len();
        samples
            .chunks_exact(n)
            .zip(&self.weights)
            .map(|(ring, w)| w * ring.iter().sum::<f64>())
            .sum()
    }
}

pub fn make_s2_grid(b: usize) -> Result<S2Grid> {
    Ok(S2Grid::new(Bandwidth::new(b)?))
}

pub fn make_so3_grid(b: usize) -> Result<SO3Grid> {
    Ok(SO3Grid::new(Bandwidth::new(b)?))
}
