mod common;

use common::{beta_matrix_form, beta_ref, deg};
use proptest::prelude::*;
use ris_decoy::bounds::{fi_closed, kappa};
use ris_decoy::deception::{decoy_score, rho_band_ok, rho_pointwise_ok};
use ris_decoy::radar_ml::{run_trials, TrialConfig};
use ris_decoy::{beta, AngleGrid, Cx, KernelBasis, NullingWindow, RisProfile, SceneConfig};

type Scene = SceneConfig<f64>;

fn phases(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-std::f64::consts::PI..std::f64::consts::PI, m)
}

fn profile_and_size() -> impl Strategy<Value = RisProfile<f64>> {
    (2usize..64)
        .prop_flat_map(phases)
        .prop_map(|p| RisProfile::from_phases(&p))
}

/// (window center, half-width, K, M, decoy) giving a buildable basis.
fn basis_inputs() -> impl Strategy<Value = (f64, f64, usize, usize, f64)> {
    (-50.0..50.0f64, 1.0..5.0f64, 1usize..8)
        .prop_flat_map(|(c, d, k)| (Just(c), Just(d), Just(k), (2 * k).max(16)..64usize, 10.0..30.0f64))
        .prop_map(|(c, d, k, m, off)| (c, d, k, m, if c > 0.0 { c - d - off } else { c + d + off }))
}

fn build((c, d, k, m, tf): (f64, f64, usize, usize, f64)) -> Option<KernelBasis<f64>> {
    let window = NullingWindow::new(deg(c), deg(d), k).ok()?;
    KernelBasis::build(&window, deg(tf), deg(c), m).ok()
}

fn max_abs(v: &[Cx<f64>]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kernel_matches_reciprocal_matrix_form(p in profile_and_size(), out in -80.0..80.0f64, inn in -80.0..80.0f64) {
        let lib = beta(deg(out), deg(inn), &p);
        let direct = beta_ref(out.to_radians(), inn.to_radians(), p.as_slice());
        let matrix = beta_matrix_form(out.to_radians(), inn.to_radians(), p.as_slice());
        let scale = p.len() as f64;
        prop_assert!((lib - direct).norm() <= 1e-12 * scale);
        prop_assert!((lib - matrix).norm() <= 1e-12 * scale);
    }

    #[test]
    fn projector_algebra(inputs in basis_inputs()) {
        let Some(b) = build(inputs) else { return Ok(()) };
        let p = b.projector();
        let m = b.m();
        for i in 0..m {
            for j in 0..m {
                let pp: Cx<f64> = (0..m).map(|k| p[(i, k)] * p[(k, j)]).sum();
                prop_assert!((pp - p[(i, j)]).norm() <= 1e-9);
                prop_assert!((p[(i, j)] - p[(j, i)].conj()).norm() <= 1e-9);
            }
        }
        let v = b.v();
        for c in 0..v.cols() {
            prop_assert!(max_abs(&b.project(v.column(c))) <= 1e-9);
        }
    }

    #[test]
    fn projection_lands_in_null_space(inputs in basis_inputs(), ph in phases(64)) {
        let Some(b) = build(inputs) else { return Ok(()) };
        let x: Vec<Cx<f64>> = ph[..b.m()].iter().map(|&t| Cx::from_polar(1.0, t)).collect();
        let y = b.project(&x);
        prop_assert!(max_abs(&b.window_responses(&y)) <= 1e-9 * b.m() as f64);
        // idempotent on its output
        let yy = b.project(&y);
        prop_assert!(y.iter().zip(&yy).all(|(a, c)| (a - c).norm() <= 1e-12 * b.m() as f64));
    }

    #[test]
    fn closed_form_fi_is_proportional_to_kernel_energy(ph in phases(32), th in -80.0..80.0f64) {
        let scene = Scene::reference();
        let model = scene.kernel_model().unwrap();
        let p = RisProfile::from_phases(&ph);
        let j = fi_closed(deg(th), &p, &scene, &model).unwrap();
        let b = model.beta_bar(deg(th), &p).unwrap().norm_sqr();
        let a = scene.a_ris().unwrap();
        let expect = 2.0 * scene.p_tx * scene.t as f64 / scene.sigma2 * a * a * b * kappa(deg(th), scene.n);
        prop_assert!((j - expect).abs() <= 1e-10 * expect.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn kappa_is_even(th in 0.0..89.9f64, n in 2usize..64) {
        prop_assert_eq!(kappa(deg(th), n), kappa(deg(-th), n));
    }

    #[test]
    fn fi_monotone_in_snr(ph in phases(32), th in -70.0..70.0f64, k in 1.01..10.0f64) {
        let base = Scene::reference();
        let model = base.kernel_model().unwrap();
        let p = RisProfile::from_phases(&ph);
        let j0 = fi_closed(deg(th), &p, &base, &model).unwrap();
        prop_assume!(j0 > 0.0);
        let more_power = Scene { p_tx: base.p_tx * k, ..base.clone() };
        let more_pilots = Scene { t: base.t * 2, ..base.clone() };
        let more_noise = Scene { sigma2: base.sigma2 * k, ..base.clone() };
        prop_assert!(fi_closed(deg(th), &p, &more_power, &model).unwrap() > j0);
        prop_assert!(fi_closed(deg(th), &p, &more_pilots, &model).unwrap() > j0);
        prop_assert!(fi_closed(deg(th), &p, &more_noise, &model).unwrap() < j0);
    }

    #[test]
    fn band_criterion_implies_pointwise(ph in phases(32), rho in 1.0..20.0f64) {
        let scene = Scene::reference();
        let model = scene.kernel_model().unwrap();
        let window = scene.window().unwrap();
        let p = RisProfile::from_phases(&ph);
        let band = rho_band_ok(&p, &window, scene.theta_fake, rho, &scene, &model).unwrap();
        if band.verdict.holds {
            for &th in window.angles() {
                prop_assert!(rho_pointwise_ok(&p, th, scene.theta_fake, rho, &scene, &model).unwrap().holds);
            }
        }
    }

    #[test]
    fn rho_ub_scales_as_inverse_square_cap(th in -89.0..89.0f64, cap in 1e-3..1e3f64, s in 1e-2..1e2f64) {
        let scene = Scene::reference();
        let b = scene.basis().unwrap();
        let r1 = decoy_score(deg(th), cap, &scene, &b).unwrap().rho_ub;
        let r2 = decoy_score(deg(th), cap * s, &scene, &b).unwrap().rho_ub;
        prop_assert!((r2 * s * s - r1).abs() <= 1e-12 * r1.max(f64::MIN_POSITIVE));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn classification_rates_sum_to_one(ph in phases(32), seed in any::<u64>(), n in 1usize..12) {
        let scene = Scene { rng_seed: seed, ..Scene::reference() };
        let model = scene.kernel_model().unwrap();
        let p = RisProfile::from_phases(&ph);
        let trials = TrialConfig {
            grid: AngleGrid::degrees_step(-60.0, 60.0, 0.5).unwrap(),
            ..TrialConfig::with_trials(n)
        };
        let agg = run_trials(&scene, &p, &model, &trials).unwrap();
        prop_assert_eq!(agg.decoyed + agg.revealed + agg.elsewhere, n);
        prop_assert!((agg.decoyed_rate + agg.revealed_rate + agg.elsewhere_rate - 1.0).abs() <= 1e-12);
    }
}
