use super::*;
use crate::exec::Exec;
use crate::linalg::{dot, Mat2, Vec2};
use crate::phase_space::{Axis, WignerGrid};
use crate::plant::{PhotonKernels, PhotonMode};
use crate::simplecase::{fock_quadrature_wavefunction, wigner_from_wavefunction, WignerOptions};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn mode() -> PhotonMode {
    PhotonMode::new(0.8, 0.5).unwrap()
}

fn kernels(c_l: C64, gamma: [C64; 2]) -> PhotonKernels {
    PhotonKernels::from_parts(mode(), c_l, gamma)
}

fn with_v_l(v_l: Mat2, gamma: [C64; 2]) -> PhotonKernels {
    PhotonKernels {
        mode: mode(),
        c_l: C64::new(v_l.trace().sqrt(), 0.0),
        l_norm_sq: v_l.trace(),
        v_l,
        gamma,
    }
}

fn small_scale_like() -> (PhotonKernels, Mat2) {
    // only gamma_f / beta enters V_L
    let k = PhotonKernels::from_parts(
        PhotonMode::new(0.3, 0.1).unwrap(),
        C64::new(0.5905063953, 0.4437697423),
        [
            C64::new(0.40536399, -0.38183451),
            C64::new(0.65465897, 0.29788159),
        ],
    );
    (
        k,
        Mat2::new(0.958810114642, 0.585255274829, 0.585255274829, 1.6732868594),
    )
}

fn opts() -> WignerOptions {
    WignerOptions {
        exec: Exec::Sequential,
        ..default_grid()
    }
}

#[test]
fn decoupled_photon_gives_the_gaussian() {
    let v = Mat2::new(1.7, 0.4, 0.4, 2.1);
    let k = PhotonKernels::decoupled(mode());
    let out = MeasurementOutcome {
        x_c: [0.3, -1.2],
        ..MeasurementOutcome::explicit(C64::default())
    };
    let w = ConditionalWigner::new(&OpticalInput::SinglePhoton, &k, v, &out).unwrap();
    let ax = Axis::centered(0.3, 9.0, 256);
    let pa = Axis::centered(-1.2, 9.0, 256);
    let grid = w.sample_on(ax, pa, Exec::default());
    let g = Gaussian2::new(out.x_c, v).unwrap();
    let exact = WignerGrid::from_fn(ax, pa, |x, p| g.eval(x, p));
    assert!(grid.max_abs_difference(&exact) <= 1e-10);

    let vac = ConditionalWigner::new(&OpticalInput::Vacuum, &k, v, &out).unwrap();
    assert!(
        vac.sample_on(ax, pa, Exec::Sequential)
            .max_abs_difference(&grid)
            <= 1e-10
    );
}

#[test]
fn single_photon_is_the_p_representation_limit() {
    // e^{|zeta|^2} d^2/dzeta dzeta* delta(zeta) acting on the coherent kernel
    let (k, v) = small_scale_like();
    let z = [0.7, -0.2];
    let out = MeasurementOutcome::explicit(C64::new(z[0], z[1]));
    let sp = SinglePhotonWigner::new(&k, v, &out).unwrap();
    let env = Gaussian2::new([0.0, 0.0], v).unwrap();
    let g = k.gamma_matrix();
    let h = |zeta: Vec2, x: f64, p: f64| {
        let s = g.mul_vec(zeta);
        (dot(zeta, zeta) + 2.0 * dot(zeta, z) - 2.0 * k.v_l.quad(zeta)).exp()
            * env.eval(x - 2.0 * s[0], p - 2.0 * s[1])
    };
    let den = 1.0 - k.l_norm_sq + dot(z, z);
    let e = 1e-3;
    for &(x, p) in &[(0.0, 0.0), (0.5, -1.0), (-1.3, 0.8), (2.0, 2.5)] {
        let lap = (h([e, 0.0], x, p) + h([-e, 0.0], x, p) + h([0.0, e], x, p) + h([0.0, -e], x, p)
            - 4.0 * h([0.0, 0.0], x, p))
            / (e * e);
        let expect = sp.eval(x, p);
        assert!(
            (lap / 4.0 / den - expect).abs() < 1e-6 * (1.0 + expect.abs()),
            "{x} {p}"
        );
    }
}

#[test]
fn coherent_input_with_real_gamma_translates() {
    let v = Mat2::new(1.2, 0.1, 0.1, 0.9);
    let k = kernels(
        C64::new(0.3, 0.2),
        [C64::new(0.4, 0.0), C64::new(-0.7, 0.0)],
    );
    let zeta = C64::new(0.6, -0.9);
    let out = MeasurementOutcome::explicit(C64::new(0.2, 0.1));
    let w = ConditionalWigner::new(&OpticalInput::Coherent { zeta }, &k, v, &out).unwrap();
    let shifted = Gaussian2::new([2.0 * 0.6 * 0.4, 2.0 * 0.6 * -0.7], v).unwrap();
    for &(x, p) in &[(0.0, 0.0), (1.0, -2.0), (-0.4, 0.3)] {
        assert!((w.eval(x, p) - shifted.eval(x, p)).abs() < 1e-15);
    }
}

#[test]
fn symmetric_mixture_is_bimodal_and_positive() {
    let (k, v) = small_scale_like();
    let zeta = C64::new(1.5, 0.5);
    let input = OpticalInput::CoherentMixture {
        components: vec![(0.5, zeta), (0.5, -zeta)],
    };
    let out = MeasurementOutcome::explicit(C64::default());
    let w = ConditionalWigner::new(&input, &k, v, &out).unwrap();
    let grid = w.render(&opts()).unwrap();
    assert!(grid.min().value >= 0.0);
    let m = w.mean();
    assert!(m[0].abs() < 1e-14 && m[1].abs() < 1e-14);
    let s = k.gamma_matrix().mul_vec([zeta.re, zeta.im]);
    let peak = w.eval(2.0 * s[0], 2.0 * s[1]);
    assert!(peak > w.eval(0.0, 0.0));
}

#[test]
fn mixture_weights_match_brute_force_record_likelihood() {
    // n = 64 record samples z_j with mean 2 zeta . l_j per component
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 64;
    let mut l: Vec<Vec2> = (0..n)
        .map(|_| [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5])
        .collect();
    let total: f64 = l.iter().map(|v| dot(*v, *v)).sum();
    for v in &mut l {
        v[0] *= (0.7 / total).sqrt();
        v[1] *= (0.7 / total).sqrt();
    }
    let v_l = l
        .iter()
        .fold(Mat2::ZERO, |acc, v| acc + Mat2::outer(*v, *v));
    let k = with_v_l(v_l, [C64::new(0.3, 0.1), C64::new(-0.2, 0.5)]);
    let comps = vec![
        (0.2, C64::new(0.4, -0.3)),
        (0.5, C64::new(-1.1, 0.2)),
        (0.3, C64::new(0.0, 0.9)),
    ];
    let record: Vec<f64> = (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
    let z = l.iter().zip(&record).fold([0.0; 2], |acc, (v, r)| {
        [acc[0] + r * v[0], acc[1] + r * v[1]]
    });

    let brute: Vec<f64> = comps
        .iter()
        .map(|&(p, zeta)| {
            let s: f64 = l
                .iter()
                .zip(&record)
                .map(|(v, r)| (r - 2.0 * dot([zeta.re, zeta.im], *v)).powi(2))
                .sum();
            p * (-0.5 * s).exp()
        })
        .collect();
    let norm: f64 = brute.iter().sum();

    let input = OpticalInput::CoherentMixture { components: comps };
    let out = MeasurementOutcome::explicit(C64::new(z[0], z[1]));
    let w = MixtureWigner::new(&input, &k, Mat2::IDENTITY, &out).unwrap();
    for ((wk, _), b) in w.components.iter().zip(&brute) {
        assert!((wk - b / norm).abs() < 1e-12, "{wk} {}", b / norm);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let bad = OpticalInput::CoherentMixture {
        components: vec![(0.7, C64::default()), (0.4, C64::new(1.0, 0.0))],
    };
    assert!(bad.validate().is_err());
    let neg = OpticalInput::CoherentMixture {
        components: vec![(1.2, C64::default()), (-0.2, C64::new(1.0, 0.0))],
    };
    assert!(neg.validate().is_err());
    assert!(OpticalInput::SinglePhoton.components().is_err());

    let k = with_v_l(Mat2::diag(0.6, 0.4), [C64::default(); 2]);
    let out = MeasurementOutcome::explicit(C64::default());
    assert!(SinglePhotonWigner::new(&k, Mat2::IDENTITY, &out).is_err());
}

#[test]
fn far_outcome_of_a_mixture_keeps_finite_weights() {
    let (k, v) = small_scale_like();
    let input = OpticalInput::CoherentMixture {
        components: vec![(0.5, C64::new(30.0, 0.0)), (0.5, C64::new(-30.0, 0.0))],
    };
    let out = MeasurementOutcome::explicit(C64::new(400.0, 0.0));
    let w = MixtureWigner::new(&input, &k, v, &out).unwrap();
    assert!((w.components[0].0 - 1.0).abs() < 1e-12);
}

#[test]
fn single_photon_moments_match_grid() {
    let (k, v) = small_scale_like();
    let out = MeasurementOutcome::explicit(C64::new(0.69, 0.36));
    let w = ConditionalWigner::new(&OpticalInput::SinglePhoton, &k, v, &out).unwrap();
    let grid = w.render(&opts()).unwrap();
    let m = grid.mean();
    let exact = w.mean();
    assert!((m[0] - exact[0]).abs() < 1e-8 && (m[1] - exact[1]).abs() < 1e-8);
}

#[test]
fn small_scale_like_state_is_negative_at_the_mode() {
    let (k, v) = small_scale_like();
    let out = most_probable_outcome(&k).unwrap();
    assert!((out.z.re - 0.69083567).abs() < 1e-6 && (out.z.im - 0.36281446).abs() < 1e-6);
    let sp = SinglePhotonWigner::new(&k, v, &out).unwrap();
    assert!(sp.offset() < 0.0);
    let grid = ConditionalWigner::SinglePhoton(sp).render(&opts()).unwrap();
    let m = negativity_metrics(&grid);
    assert!(
        m.min_value < -0.013 && m.min_value > -0.01325,
        "{}",
        m.min_value
    );
    assert!(m.within_bound);
}

#[test]
fn translation_moves_extrema_only() {
    let (k, v) = small_scale_like();
    let base = MeasurementOutcome::explicit(C64::new(0.69, 0.36));
    let d = [0.75, -1.5];
    let moved = MeasurementOutcome { x_c: d, ..base };
    let a = ConditionalWigner::new(&OpticalInput::SinglePhoton, &k, v, &base).unwrap();
    let b = ConditionalWigner::new(&OpticalInput::SinglePhoton, &k, v, &moved).unwrap();
    // d is a whole number of cells
    let ax = Axis::centered(0.0, 6.0, 97);
    let bx = Axis {
        start: ax.start + d[0],
        ..ax
    };
    let pa = Axis::centered(0.0, 6.0, 97);
    let pb = Axis {
        start: pa.start + d[1],
        ..pa
    };
    let ga = a.sample_on(ax, pa, Exec::Sequential);
    let gb = b.sample_on(bx, pb, Exec::Sequential);
    let (ma, mb) = (ga.min(), gb.min());
    assert!((mb.x - ma.x - d[0]).abs() < 1e-8 && (mb.p - ma.p - d[1]).abs() < 1e-8);
    assert!((ma.value - mb.value).abs() < 1e-8);
    let (xa, xb) = (ga.argmax(), gb.argmax());
    assert!((xb.x - xa.x - d[0]).abs() < 1e-8 && (xb.p - xa.p - d[1]).abs() < 1e-8);
}

#[test]
fn isotropic_outcome_density_is_radial() {
    let n = 0.8;
    let k = with_v_l(Mat2::diag(n / 2.0, n / 2.0), [C64::default(); 2]);
    let d = outcome_density(&k).unwrap();
    // closed form: integral (a + r^2) exp(-r^2 / n) / (pi n) 2 pi r dr = a + n
    assert!((d.total_mass() - 1.0).abs() < 1e-10);
    // mode radius from a dense radial scan
    let radial = |r: f64| (1.0 - n + r * r) * (-r * r / n).exp();
    let best = (0..200_000)
        .map(|i| i as f64 * 1e-5)
        .max_by(|a, b| radial(*a).total_cmp(&radial(*b)))
        .unwrap();
    let out = most_probable_outcome(&k).unwrap();
    assert!(
        (out.z.norm() - best).abs() < 2e-5,
        "{} {best}",
        out.z.norm()
    );
}

#[test]
fn weak_photon_outcome_is_at_origin() {
    let k = with_v_l(Mat2::new(0.02, 0.005, 0.005, 0.01), [C64::default(); 2]);
    let out = most_probable_outcome(&k).unwrap();
    assert_eq!(out.z, C64::default());
    let d = outcome_density(&k).unwrap();
    assert!(search_most_probable(&d).iter().all(|v| v.abs() < 1e-6));

    let zero = PhotonKernels::decoupled(mode());
    assert_eq!(outcome_density(&zero).unwrap(), OutcomeDensity::Point);
    assert_eq!(most_probable_outcome(&zero).unwrap().z, C64::default());
    let s = OutcomeSampler::new(OutcomeDensity::Point).unwrap();
    assert!(s.sample(3, 100).unwrap().iter().all(|z| *z == [0.0, 0.0]));
}

#[test]
fn simplex_search_agrees_with_stationary_point() {
    let (k, _) = small_scale_like();
    let d = outcome_density(&k).unwrap();
    let s = search_most_probable(&d);
    let exact = most_probable_outcome(&k).unwrap();
    assert!((s[0] - exact.z.re).abs() < 1e-6 && (s[1] - exact.z.im).abs() < 1e-6);
}

#[test]
fn line_density_for_real_mode() {
    let m = PhotonMode::new(0.8, 0.0).unwrap();
    let k = PhotonKernels::from_parts(m, C64::new(0.6, -0.5), [C64::default(); 2]);
    let d = outcome_density(&k).unwrap();
    let OutcomeDensity::Line { dir, var, .. } = d else {
        panic!("expected a line density, got {d:?}");
    };
    assert!((var - k.l_norm_sq).abs() < 1e-12);
    assert!((d.total_mass() - 1.0).abs() < 1e-10);
    let out = most_probable_outcome(&k).unwrap();
    let t = (2.0 * var - (1.0 - var)).sqrt();
    assert!((out.z.re - dir[0] * t).abs() < 1e-9 && (out.z.im - dir[1] * t).abs() < 1e-9);

    let s = OutcomeSampler::new(d).unwrap();
    let zs = s.sample(11, 20_000).unwrap();
    let m2 = zs.iter().map(|z| dot(*z, *z)).sum::<f64>() / zs.len() as f64;
    let exact = var + 2.0 * var * var;
    assert!((m2 - exact).abs() < 0.05 * exact, "{m2} {exact}");
}

#[test]
fn samples_match_second_moments() {
    let (k, _) = small_scale_like();
    let d = outcome_density(&k).unwrap();
    let s = OutcomeSampler::new(d).unwrap();
    let n = 100_000;
    let zs = s.sample(2024, n).unwrap();
    let exact = d.second_moment();
    for i in 0..2 {
        for j in 0..2 {
            let v: Vec<f64> = zs.iter().map(|z| z[i] * z[j]).collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!(
                (mean - exact.get(i, j)).abs() < 3.0 * se,
                "{i}{j}: {mean} vs {}",
                exact.get(i, j)
            );
        }
    }
    assert_eq!(zs[..50], s.sample(2024, 50).unwrap()[..]);
    let one = sample_outcome(&k, 2024).unwrap();
    assert_eq!([one.z.re, one.z.im], zs[0]);
    assert_eq!(one.provenance, Provenance::Sampled { seed: 2024 });
}

#[test]
fn gaussian_metrics() {
    let ax = Axis::centered(0.0, 10.0, 401);
    let g = Gaussian2::new([0.0, 0.0], Mat2::IDENTITY).unwrap();
    let m = negativity_metrics(&WignerGrid::from_fn(ax, ax, |x, p| g.eval(x, p)));
    assert!(m.min_value >= 0.0 && m.min_value < 1e-10);
    assert_eq!(m.negative_volume, 0.0);
    assert!((m.purity - 1.0).abs() < 1e-10);

    let ax = Axis::centered(0.0, 16.0, 401);
    let g = Gaussian2::new([0.0, 0.0], Mat2::diag(3.0, 3.0)).unwrap();
    let m = negativity_metrics(&WignerGrid::from_fn(ax, ax, |x, p| g.eval(x, p)));
    assert!((m.purity - 1.0 / 3.0).abs() < 1e-10);
}

#[test]
fn fock_one_negative_volume() {
    let psi = fock_quadrature_wavefunction(1).unwrap();
    let w = wigner_from_wavefunction(&psi, WignerOptions::default()).unwrap();
    let m = negativity_metrics(&w);
    let exact = 2.0 * (-0.5f64).exp() - 1.0;
    assert!(
        (m.negative_volume - exact).abs() < 2e-3 * exact,
        "{}",
        m.negative_volume
    );
    assert!((m.min_value + 1.0 / (2.0 * PI)).abs() < 1e-3);
}

fn kernel_strategy() -> impl Strategy<Value = (PhotonKernels, Mat2, C64)> {
    (
        0.0..0.999f64,
        0.0..2.0 * PI,
        0.05..3.0f64,
        -3.0..3.0f64,
        prop::array::uniform4(-1.0..1.0f64),
        0.0..1.0f64,
        (0.3..3.0f64, 0.3..3.0f64, -0.9..0.9f64),
        (-2.0..2.0f64, -2.0..2.0f64),
    )
        .prop_map(|(n, arg, gf, wf, g, frac, (a, b, r), (zr, zi))| {
            let m = PhotonMode::new(gf, wf).unwrap();
            let c = r * (a * b).sqrt();
            let v = Mat2::new(a, c, c, b);
            // keep tr(G^T V^-1 G) + ||L||^2 <= 2, the single-photon limit
            let gm = Mat2::from_cols([g[0], g[1]], [g[2], g[3]]);
            let tr = (gm.transpose() * v.inverse().unwrap() * gm).trace();
            let s = if tr > 0.0 {
                (frac * (2.0 - n) / tr).sqrt()
            } else {
                0.0
            };
            let k = PhotonKernels::from_parts(
                m,
                C64::from_polar(n.sqrt(), arg),
                [C64::new(s * g[0], s * g[2]), C64::new(s * g[1], s * g[3])],
            );
            (k, v, C64::new(zr, zi))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn single_photon_grids_are_normalized((k, v, z) in kernel_strategy()) {
        let out = MeasurementOutcome::explicit(z);
        let w = ConditionalWigner::new(&OpticalInput::SinglePhoton, &k, v, &out).unwrap();
        let grid = w.render(&opts()).unwrap();
        prop_assert!((grid.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn outcome_density_is_normalized_and_nonnegative((k, _, _) in kernel_strategy()) {
        let d = outcome_density(&k).unwrap();
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-6);
        let s = 3.0 * k.l_norm_sq.sqrt() + 1.0;
        for i in 0..41 {
            for j in 0..41 {
                let z = [s * (i as f64 / 20.0 - 1.0), s * (j as f64 / 20.0 - 1.0)];
                prop_assert!(d.eval(z) >= 0.0);
            }
        }
    }

    #[test]
    fn mode_of_density_dominates_samples((k, _, _) in kernel_strategy(), seed in 0u64..1000) {
        let d = outcome_density(&k).unwrap();
        let best = most_probable_outcome(&k).unwrap();
        let top = match d {
            OutcomeDensity::Plane { .. } => d.eval([best.z.re, best.z.im]),
            _ => return Ok(()),
        };
        for z in OutcomeSampler::new(d).unwrap().sample(seed, 200).unwrap() {
            prop_assert!(d.eval(z) <= top * (1.0 + 1e-12));
        }
    }
}

#[test]
fn over_unit_norm_density_is_rejected() {
    let k = with_v_l(Mat2::diag(0.7, 0.4), [C64::default(); 2]);
    assert!(outcome_density(&k).is_err());
}
