//! Brute-force reference implementations.
//!
//! Everything here is evaluated literally from the defining integrals: dense
//! projections over every grid point, pointwise synthesis at arbitrary
//! rotated points, and quadrature of the correlation integrals. Nothing in
//! this module calls into [`crate::gft`] or [`crate::correlation`]; it uses
//! only grids, the Wigner tables, and pointwise basis evaluation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gft::{S2Signal, S2Spectrum, SO3Signal, SO3Spectrum};
use crate::grids::{so3_block_offset, Bandwidth, Rotation, S2Grid, S2Point, SO3Grid};
use crate::harmonics::{spherical_harmonics, wigner_big_d_matrices, WignerTables};
use crate::par;

/// Largest bandwidth the S² correlation oracle accepts without `force`.
pub const S2_CORRELATION_CAP: usize = 8;
/// Largest bandwidth the SO(3) correlation oracle accepts without `force`.
pub const SO3_CORRELATION_CAP: usize = 3;

fn cap(b: Bandwidth, limit: usize, force: bool) -> Result<()> {
    if b.get() > limit && !force {
        return Err(Error::CostCap { b: b.get(), cap: limit });
    }
    Ok(())
}

fn same_shape(a: (Bandwidth, usize), b: (Bandwidth, usize)) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!(
            "signals differ: bandwidth {} x {} channels vs {} x {}",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

/// `f^l_m = Σ_x w_x f(x) conj(Y^l_m(x))` summed over every grid point.
pub fn s2_direct_projection(f: &S2Signal, t: &WignerTables) -> Result<S2Spectrum> {
    if f.bandwidth != t.bandwidth {
        return Err(Error::BandwidthMismatch {
            expected: t.bandwidth.get(),
            found: f.bandwidth.get(),
        });
    }
    let b = f.bandwidth.get();
    let grid = S2Grid::new(f.bandwidth);
    let n = grid.alphas.len();
    let per = b * b;
    let mut data = vec![Complex64::new(0.0, 0.0); f.channels * per];
    par::for_each_chunk(&mut data, 1, |idx, out| {
        let (c, lm) = (idx / per, idx % per);
        let l = (lm as f64).sqrt() as usize;
        let m = (lm - l * l) as i64 - l as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let dj = t.legendre_ring(j)[lm] * grid.weights[j];
            for i in 0..n {
                acc += f.get(c, j, i) * dj * Complex64::cis(m as f64 * grid.alphas[i]);
            }
        }
        out[0] = acc;
    });
    Ok(S2Spectrum {
        bandwidth: f.bandwidth,
        channels: f.channels,
        data,
    })
}

/// `f^l_{mn} = Σ_R w_R f(R) conj(D^l_{mn}(R))` summed over every grid point.
pub fn so3_direct_projection(f: &SO3Signal, t: &WignerTables) -> Result<SO3Spectrum> {
    if f.bandwidth != t.bandwidth {
        return Err(Error::BandwidthMismatch {
            expected: t.bandwidth.get(),
            found: f.bandwidth.get(),
        });
    }
    let b = f.bandwidth.get();
    let grid = SO3Grid::new(f.bandwidth);
    let n = grid.alphas.len();
    let mut data = vec![Complex64::new(0.0, 0.0); f.channels * f.bandwidth.so3_coefficients()];
    let mut pieces = Vec::with_capacity(f.channels * b);
    let mut rest = data.as_mut_slice();
    for _ in 0..f.channels {
        for l in 0..b {
            let (head, tail) = rest.split_at_mut(so3_block_offset(l + 1) - so3_block_offset(l));
            pieces.push(head);
            rest = tail;
        }
    }
    par::for_each_piece(pieces, |idx, block| {
        let (c, l) = (idx / b, idx % b);
        let li = l as i64;
        let w = 2 * l + 1;
        let phases = |angles: &[f64]| -> Vec<Complex64> {
            angles
                .iter()
                .flat_map(|x| (-li..=li).map(move |m| Complex64::cis(m as f64 * x)))
                .collect()
        };
        let (ea, eg) = (phases(&grid.alphas), phases(&grid.gammas));
        for j in 0..n {
            let d = t.block(j, l);
            for i in 0..n {
                for k in 0..n {
                    let v = f.get(c, j, i, k) * grid.weights[j];
                    let g = &eg[k * w..(k + 1) * w];
                    for mi in 0..w {
                        let a = ea[i * w + mi] * v;
                        let drow = &d[mi * w..(mi + 1) * w];
                        let row = &mut block[mi * w..(mi + 1) * w];
                        for ni in 0..w {
                            row[ni] += a * (drow[ni] * g[ni]);
                        }
                    }
                }
            }
        }
    });
    Ok(SO3Spectrum {
        bandwidth: f.bandwidth,
        channels: f.channels,
        data,
    })
}

/// Real part of `Σ_l (2l+1) Σ_m f^l_m Y^l_m(p)` for one channel.
pub fn s2_synthesize_at(s: &S2Spectrum, c: usize, p: S2Point) -> f64 {
    let b = s.bandwidth.get();
    let y = spherical_harmonics(b - 1, p);
    let mut acc = 0.0;
    for l in 0..b {
        let deg: Complex64 = s.degree(c, l).iter().zip(y.degree(l)).map(|(a, b)| a * b).sum();
        acc += (2 * l + 1) as f64 * deg.re;
    }
    acc
}

/// Real part of `Σ_l (2l+1) Σ_{mn} f^l_{mn} D^l_{mn}(r)` for every channel.
pub fn so3_synthesize_at(s: &SO3Spectrum, r: &Rotation) -> Vec<f64> {
    let b = s.bandwidth.get();
    let d = wigner_big_d_matrices(b - 1, r);
    (0..s.channels)
        .map(|c| {
            (0..b)
                .map(|l| {
                    let dot: Complex64 = s.block(c, l).iter().zip(d.block(l)).map(|(a, b)| a * b).sum();
                    (2 * l + 1) as f64 * dot.re
                })
                .sum()
        })
        .collect()
}

/// `[L_R f](x) = f(R^{-1} x)`, evaluated by synthesis at the rotated points.
pub fn rotate_s2_by_resampling(f: &S2Signal, r: &Rotation, t: &WignerTables) -> Result<S2Signal> {
    let spec = s2_direct_projection(f, t)?;
    let grid = S2Grid::new(f.bandwidth);
    let n = grid.alphas.len();
    let inv = r.inverse();
    let mut data = vec![0.0; f.data.len()];
    par::for_each_chunk(&mut data, 1, |idx, out| {
        let c = idx / (n * n);
        let (j, i) = ((idx / n) % n, idx % n);
        out[0] = s2_synthesize_at(&spec, c, inv.apply_point(grid.point(j, i)));
    });
    Ok(S2Signal {
        bandwidth: f.bandwidth,
        channels: f.channels,
        data,
    })
}

/// `[L_R f](Q) = f(R^{-1} Q)`, evaluated by synthesis at the rotated points.
pub fn rotate_so3_by_resampling(f: &SO3Signal, r: &Rotation, t: &WignerTables) -> Result<SO3Signal> {
    Ok(resample_so3(&so3_direct_projection(f, t)?, r))
}

/// Synthesizes the signal with spectrum `s` at `R^{-1} Q` for every grid rotation `Q`.
pub fn resample_so3(s: &SO3Spectrum, r: &Rotation) -> SO3Signal {
    let grid = SO3Grid::new(s.bandwidth);
    let n = grid.alphas.len();
    let per = n * n * n;
    let inv = r.inverse();
    let values: Vec<Vec<f64>> = par::map_range(per, |p| {
        let (j, i, k) = (p / (n * n), (p / n) % n, p % n);
        so3_synthesize_at(s, &inv.compose(&grid.rotation(j, i, k)))
    });
    let mut data = vec![0.0; s.channels * per];
    for (p, vals) in values.iter().enumerate() {
        for (c, v) in vals.iter().enumerate() {
            data[c * per + p] = *v;
        }
    }
    SO3Signal {
        bandwidth: s.bandwidth,
        channels: s.channels,
        data,
    }
}

/// `[ψ ⋆ f](R) = Σ_k ∫ ψ_k(R^{-1} x) f_k(x) dx` by quadrature at every output rotation.
pub fn s2_correlate_direct(psi: &S2Signal, f: &S2Signal, out: &SO3Grid, force: bool) -> Result<SO3Signal> {
    same_shape((psi.bandwidth, psi.channels), (f.bandwidth, f.channels))?;
    cap(f.bandwidth, S2_CORRELATION_CAP, force)?;
    let t = WignerTables::new(f.bandwidth)?;
    let psi_hat = s2_direct_projection(psi, &t)?;
    let grid = S2Grid::new(f.bandwidth);
    let n = grid.alphas.len();
    let no = out.alphas.len();
    let mut data = vec![0.0; no * no * no];
    par::for_each_chunk(&mut data, 1, |p, v| {
        let r = out.rotation(p / (no * no), (p / no) % no, p % no);
        let inv = r.inverse();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                let x = inv.apply_point(grid.point(j, i));
                let w = grid.weights[j];
                for c in 0..f.channels {
                    acc += w * s2_synthesize_at(&psi_hat, c, x) * f.get(c, j, i);
                }
            }
        }
        v[0] = acc;
    });
    Ok(SO3Signal {
        bandwidth: out.bandwidth,
        channels: 1,
        data,
    })
}

/// `[ψ ⋆ f](R) = Σ_k ∫ ψ_k(R^{-1} Q) f_k(Q) dQ` by quadrature at every output rotation.
pub fn so3_correlate_direct(psi: &SO3Signal, f: &SO3Signal, out: &SO3Grid, force: bool) -> Result<SO3Signal> {
    same_shape((psi.bandwidth, psi.channels), (f.bandwidth, f.channels))?;
    cap(f.bandwidth, SO3_CORRELATION_CAP, force)?;
    let t = WignerTables::new(f.bandwidth)?;
    let psi_hat = so3_direct_projection(psi, &t)?;
    let grid = SO3Grid::new(f.bandwidth);
    let n = grid.alphas.len();
    let no = out.alphas.len();
    let mut data = vec![0.0; no * no * no];
    par::for_each_chunk(&mut data, 1, |p, v| {
        let r = out.rotation(p / (no * no), (p / no) % no, p % no);
        let inv = r.inverse();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    let shifted = so3_synthesize_at(&psi_hat, &inv.compose(&grid.rotation(j, i, k)));
                    let w = grid.weights[j];
                    for (c, s) in shifted.iter().enumerate() {
                        acc += w * s * f.get(c, j, i, k);
                    }
                }
            }
        }
        v[0] = acc;
    });
    Ok(SO3Signal {
        bandwidth: out.bandwidth,
        channels: 1,
        data,
    })
}

/// `[f * ψ](x) = ∫ f(R n) ψ(R^{-1} x) dR` by quadrature over the rotation grid.
pub fn dh_convolve_direct(f: &S2Signal, psi: &S2Signal, force: bool) -> Result<S2Signal> {
    same_shape((psi.bandwidth, psi.channels), (f.bandwidth, f.channels))?;
    if f.channels != 1 {
        return Err(Error::Shape("spherical convolution takes single-channel signals".into()));
    }
    cap(f.bandwidth, S2_CORRELATION_CAP, force)?;
    let t = WignerTables::new(f.bandwidth)?;
    let psi_hat = s2_direct_projection(psi, &t)?;
    let sgrid = S2Grid::new(f.bandwidth);
    let rgrid = SO3Grid::new(f.bandwidth);
    let n = sgrid.alphas.len();
    let mut data = vec![0.0; n * n];
    par::for_each_chunk(&mut data, 1, |p, v| {
        let x = sgrid.point(p / n, p % n);
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    let q = rgrid.rotation(j, i, k);
                    let y = q.inverse().apply_point(x);
                    // R n = x(alpha_i, beta_j), a grid point of f
                    acc += rgrid.weights[j] * f.get(0, j, i) * s2_synthesize_at(&psi_hat, 0, y);
                }
            }
        }
        v[0] = acc;
    });
    Ok(S2Signal {
        bandwidth: f.bandwidth,
        channels: 1,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gft::lift_s2_to_so3;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bw(b: usize) -> Bandwidth {
        Bandwidth::new(b).unwrap()
    }

    /// Bandlimited sphere signal built from explicit low-degree terms.
    fn smooth_s2(b: usize, channels: usize, seed: u64) -> S2Signal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coef: Vec<[f64; 4]> = (0..channels).map(|_| rng.random()).collect();
        S2Signal::from_fn(bw(b), channels, |c, a, beta| {
            let k = coef[c];
            k[0] + k[1] * beta.cos() + k[2] * beta.sin() * (a - k[3]).cos()
        })
    }

    #[test]
    fn caps_apply_without_force() {
        let f = S2Signal::zeros(bw(9), 1);
        let out = SO3Grid::new(bw(2));
        assert!(matches!(s2_correlate_direct(&f, &f, &out, false), Err(Error::CostCap { .. })));
        let g = SO3Signal::zeros(bw(4), 1);
        assert!(matches!(so3_correlate_direct(&g, &g, &out, false), Err(Error::CostCap { .. })));
    }

    #[test]
    fn zero_input_gives_zero() {
        let psi = smooth_s2(3, 2, 1);
        let out = SO3Grid::new(bw(3));
        let z = s2_correlate_direct(&psi, &S2Signal::zeros(bw(3), 2), &out, false).unwrap();
        assert!(z.data.iter().all(|v| v.abs() < 1e-15));
        let g = lift_s2_to_so3(&psi);
        let z = so3_correlate_direct(&g, &SO3Signal::zeros(bw(3), 2), &out, false).unwrap();
        assert!(z.data.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn self_correlation_is_bounded_by_squared_norm() {
        // |<L_R f, f>| <= ||f||^2 for every rotation
        let f = smooth_s2(3, 2, 2);
        let out = SO3Grid::new(bw(3));
        let c = s2_correlate_direct(&f, &f, &out, false).unwrap();
        let norm = f.inner(&f);
        assert!(c.data.iter().all(|v| v.abs() <= norm + 1e-10));
        let g = lift_s2_to_so3(&f);
        assert_abs_diff_eq!(g.inner(&g), norm, epsilon = 1e-12);
    }

    #[test]
    fn resampling_identity_and_constants() {
        let t = WignerTables::new(bw(4)).unwrap();
        let f = smooth_s2(4, 1, 3);
        let same = rotate_s2_by_resampling(&f, &Rotation::IDENTITY, &t).unwrap();
        assert!(crate::gft::relative_l2(&same.data, &f.data) < 1e-13);
        let one = S2Signal::from_fn(bw(4), 1, |_, _, _| 1.0);
        let r = Rotation::new(0.3, 1.2, 2.0);
        let rot = rotate_s2_by_resampling(&one, &r, &t).unwrap();
        assert!(rot.data.iter().all(|v| (v - 1.0).abs() < 1e-13));
        let one3 = SO3Signal::from_fn(bw(2), 1, |_, _, _, _| 1.0);
        let t2 = WignerTables::new(bw(2)).unwrap();
        let rot3 = rotate_so3_by_resampling(&one3, &r, &t2).unwrap();
        assert!(rot3.data.iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn resampling_moves_a_tilted_function() {
        // f(x) = x_z; [L_R f](x) = (R^{-1} x)_z.
        let t = WignerTables::new(bw(3)).unwrap();
        let f = S2Signal::from_fn(bw(3), 1, |_, _, beta| beta.cos());
        let r = Rotation::new(0.4, 0.9, 1.3);
        let inv = r.inverse();
        let want = S2Signal::from_fn(bw(3), 1, |_, a, beta| inv.apply(S2Point { alpha: a, beta }.to_cartesian())[2]);
        let got = rotate_s2_by_resampling(&f, &r, &t).unwrap();
        assert!(crate::gft::relative_l2(&got.data, &want.data) < 1e-12);
    }

    #[test]
    fn lifted_correlations_agree() {
        let psi = smooth_s2(3, 2, 4);
        let f = smooth_s2(3, 2, 5);
        let out = SO3Grid::new(bw(2));
        let a = s2_correlate_direct(&psi, &f, &out, false).unwrap();
        let b = so3_correlate_direct(&lift_s2_to_so3(&psi), &lift_s2_to_so3(&f), &out, false).unwrap();
        assert!(crate::gft::relative_l2(&a.data, &b.data) < 1e-9);
    }
}
