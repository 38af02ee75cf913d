use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use so3fft::correlation::*;
use so3fft::gft::*;
use so3fft::grids::{Bandwidth, Rotation, SO3Grid};
use so3fft::harmonics::WignerTables;
use so3fft::harness::{bandlimited_noise, population_std, substream};
use so3fft::oracle;

fn bw(b: usize) -> Bandwidth {
    Bandwidth::new(b).unwrap()
}

fn random_s2(t: &WignerTables, k: usize, rng: &mut ChaCha8Rng) -> S2Signal {
    s2_fft_inverse(&S2Spectrum::random_real(t.bandwidth, k, rng), t).unwrap()
}

fn random_so3(t: &WignerTables, k: usize, rng: &mut ChaCha8Rng) -> SO3Signal {
    so3_fft_inverse(&SO3Spectrum::random_real(t.bandwidth, k, rng), t).unwrap()
}

/// Largest `|max pool(L_R f) - max pool(f)| / std(f)` seen at b=8 over 20 seeded
/// trials was 1.084; the bound carries 20% headroom.
const MAX_POOL_DRIFT_BOUND: f64 = 1.30;

#[test]
fn fourier_theorem_matches_quadrature_up_to_b8() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for b in [1, 2, 3, 5, 8] {
        let t = WignerTables::new(bw(b)).unwrap();
        let psi = random_s2(&t, 2, &mut rng);
        let f = random_s2(&t, 2, &mut rng);
        let fast = s2_correlate(&psi, &f, bw(b)).unwrap();
        let direct = oracle::s2_correlate_direct(&psi, &f, &SO3Grid::new(bw(b)), false).unwrap();
        assert!(relative_l2(&fast.data, &direct.data) < 1e-9, "s2 b={b}");
    }
    for b in [1, 2, 3] {
        let t = WignerTables::new(bw(b)).unwrap();
        let psi = random_so3(&t, 2, &mut rng);
        let f = random_so3(&t, 2, &mut rng);
        let fast = so3_correlate(&psi, &f, bw(b)).unwrap();
        let direct = oracle::so3_correlate_direct(&psi, &f, &SO3Grid::new(bw(b)), false).unwrap();
        assert!(relative_l2(&fast.data, &direct.data) < 1e-9, "so3 b={b}");
    }
}

#[test]
fn linear_layers_are_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let t = WignerTables::new(bw(6)).unwrap();
    let r = Rotation::random(&mut rng);

    let psi = random_s2(&t, 3, &mut rng);
    let f = random_s2(&t, 3, &mut rng);
    let lhs = s2_correlate(&psi, &rotate_s2_spectral(&f, &r, &t).unwrap(), bw(6)).unwrap();
    let rhs = rotate_so3_spectral(&s2_correlate(&psi, &f, bw(6)).unwrap(), &r, &t).unwrap();
    assert!(relative_l2(&lhs.data, &rhs.data) < 1e-10);

    let psi = random_so3(&t, 2, &mut rng);
    let f = random_so3(&t, 2, &mut rng);
    let lhs = so3_correlate(&psi, &rotate_so3_spectral(&f, &r, &t).unwrap(), bw(6)).unwrap();
    let rhs = rotate_so3_spectral(&so3_correlate(&psi, &f, bw(6)).unwrap(), &r, &t).unwrap();
    assert!(relative_l2(&lhs.data, &rhs.data) < 1e-10);
}

#[test]
fn adjointness_under_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let t = WignerTables::new(bw(5)).unwrap();
    let r = Rotation::random(&mut rng);
    let psi = random_s2(&t, 1, &mut rng);
    let f = random_s2(&t, 1, &mut rng);
    let a = rotate_s2_spectral(&psi, &r, &t).unwrap().inner(&f);
    let b = psi.inner(&rotate_s2_spectral(&f, &r.inverse(), &t).unwrap());
    assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));

    let psi = random_so3(&t, 1, &mut rng);
    let f = random_so3(&t, 1, &mut rng);
    let a = rotate_so3_spectral(&psi, &r, &t).unwrap().inner(&f);
    let b = psi.inner(&rotate_so3_spectral(&f, &r.inverse(), &t).unwrap());
    assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
}

#[test]
fn haar_invariance_of_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let t = WignerTables::new(bw(6)).unwrap();
    let f = random_so3(&t, 2, &mut rng);
    let g = rotate_so3_spectral(&f, &Rotation::random(&mut rng), &t).unwrap();
    for (a, b) in so3_integrate(&f).iter().zip(so3_integrate(&g)) {
        assert!((a - b).abs() < 1e-10);
    }
    let spec = so3_fft_forward(&f, &t).unwrap();
    for (c, v) in so3_integrate(&f).iter().enumerate() {
        assert!((v - spec.get(c, 0, 0, 0).re).abs() < 1e-10);
    }
}

#[test]
fn restriction_witness() {
    let b = bw(4);
    let t = WignerTables::new(b).unwrap();
    let f = random_s2(&t, 1, &mut ChaCha8Rng::seed_from_u64(104));
    // zonal part plus a non-zonal degree-2 term
    let psi = S2Signal::from_fn(b, 1, |_, a, beta| beta.cos() + (2.0 * a).cos() * beta.sin().powi(2));
    let zonal = zonal_average(&psi);
    let dh_psi = dh_convolve(&f, &psi, &t).unwrap();
    let dh_zonal = dh_convolve(&f, &zonal, &t).unwrap();
    assert!(relative_l2(&dh_psi.data, &dh_zonal.data) < 1e-10);
    let c_psi = s2_correlate(&psi, &f, b).unwrap();
    let c_zonal = s2_correlate(&zonal, &f, b).unwrap();
    assert!(relative_l2(&c_psi.data, &c_zonal.data) > 1e-3);
}

#[test]
fn max_pool_drift_stays_bounded() {
    let t = WignerTables::new(bw(8)).unwrap();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let mut rng = substream(7, i);
        let f = bandlimited_noise(&t, 1, &mut rng).unwrap();
        let r = Rotation::random(&mut rng);
        let g = rotate_so3_spectral(&f, &r, &t).unwrap();
        let drift = (so3_max_pool(&f)[0] - so3_max_pool(&g)[0]).abs() / population_std(&f.data);
        worst = worst.max(drift);
    }
    assert!(worst > 0.0);
    assert!(worst <= MAX_POOL_DRIFT_BOUND, "max-pool drift {worst}");
}

#[test]
fn oracle_lift_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let t = WignerTables::new(bw(3)).unwrap();
    let psi = random_s2(&t, 2, &mut rng);
    let f = random_s2(&t, 2, &mut rng);
    let grid = SO3Grid::new(bw(3));
    let a = oracle::s2_correlate_direct(&psi, &f, &grid, false).unwrap();
    let b = oracle::so3_correlate_direct(&lift_s2_to_so3(&psi), &lift_s2_to_so3(&f), &grid, false).unwrap();
    assert!(relative_l2(&a.data, &b.data) < 1e-9);
}

#[test]
fn oracle_caps_can_be_forced() {
    let t = WignerTables::new(bw(4)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let psi = random_so3(&t, 1, &mut rng);
    let f = random_so3(&t, 1, &mut rng);
    let out = SO3Grid::new(bw(1));
    assert!(oracle::so3_correlate_direct(&psi, &f, &out, false).is_err());
    assert!(oracle::so3_correlate_direct(&psi, &f, &out, true).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn prop_rotation_is_unitary(b in 1usize..=6, seed in any::<u64>()) {
        let t = WignerTables::new(bw(b)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = Rotation::random(&mut rng);
        let f = random_s2(&t, 1, &mut rng);
        let g = rotate_s2_spectral(&f, &r, &t).unwrap();
        prop_assert!((g.inner(&g) - f.inner(&f)).abs() <= 1e-10 * f.inner(&f));
        let f = random_so3(&t, 1, &mut rng);
        let g = rotate_so3_spectral(&f, &r, &t).unwrap();
        prop_assert!((g.inner(&g) - f.inner(&f)).abs() <= 1e-10 * f.inner(&f));
    }

    #[test]
    fn prop_rotation_composes(b in 1usize..=5, seed in any::<u64>()) {
        let t = WignerTables::new(bw(b)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (r1, r2) = (Rotation::random(&mut rng), Rotation::random(&mut rng));
        let f = random_so3(&t, 1, &mut rng);
        let twice = rotate_so3_spectral(&rotate_so3_spectral(&f, &r2, &t).unwrap(), &r1, &t).unwrap();
        let once = rotate_so3_spectral(&f, &r1.compose(&r2), &t).unwrap();
        prop_assert!(relative_l2(&twice.data, &once.data) < 1e-10);
    }

    #[test]
    fn prop_multichannel_permutation_invariance(seed in any::<u64>()) {
        let t = WignerTables::new(bw(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_so3(&t, 3, &mut rng);
        let bank: Vec<Signal> = (0..2).map(|_| Signal::SO3(random_so3(&t, 3, &mut rng))).collect();
        let perm = [2, 0, 1];
        let permuted: Vec<Signal> = bank
            .iter()
            .map(|s| match s {
                Signal::SO3(s) => Signal::SO3(s.select(&perm)),
                Signal::S2(_) => unreachable!(),
            })
            .collect();
        let a = multichannel_correlate(&bank, &Signal::SO3(f.clone()), bw(3)).unwrap();
        let b = multichannel_correlate(&permuted, &Signal::SO3(f.select(&perm)), bw(3)).unwrap();
        prop_assert!(relative_l2(&a.data, &b.data) < 1e-12);
    }
}
