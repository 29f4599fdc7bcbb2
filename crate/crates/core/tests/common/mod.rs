//! Independent reference implementations used as test oracles, plus the
//! randomized scenario generator shared by several test targets.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_decoy::{Angle, RisProfile, SceneConfig};

pub fn deg(x: f64) -> Angle<f64> {
    Angle::from_degrees(x)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `exp(jπ m sin θ)` computed with plain f64 arithmetic.
pub fn steer(n: usize, theta: f64) -> Vec<C> {
    (0..n)
        .map(|m| C::from_polar(1.0, PI * m as f64 * theta.sin()))
        .collect()
}

/// `Σ_m conj(υ_m) ω_m`, `υ_m = exp(jπ m (sin in − sin out))`.
pub fn beta_ref(out: f64, inn: f64, omega: &[C]) -> C {
    omega
        .iter()
        .enumerate()
        .map(|(m, w)| C::from_polar(1.0, -PI * m as f64 * (inn.sin() - out.sin())) * w)
        .sum()
}

/// Reciprocal matrix form `α_Mᴴ(in) · diag(ω) · α_M(out)`.
pub fn beta_matrix_form(out: f64, inn: f64, omega: &[C]) -> C {
    let a_in = steer(omega.len(), inn);
    let a_out = steer(omega.len(), out);
    a_in.iter()
        .zip(omega)
        .zip(&a_out)
        .map(|((ai, w), ao)| ai.conj() * w * ao)
        .sum()
}

/// Composite gain `a·β(θ, θ_true)·α_N(θ)·(fᴴα_N(θ))` with a fixed precoder.
pub fn gain_ref(theta: f64, theta_true: f64, omega: &[C], f: &[C], a: f64) -> Vec<C> {
    let alpha = steer(f.len(), theta);
    let v: C = f.iter().zip(&alpha).map(|(x, y)| x.conj() * y).sum();
    let b = beta_ref(theta, theta_true, omega) * v * a;
    alpha.into_iter().map(|z| z * b).collect()
}

/// FI from a central difference of the mean: `(2PT/σ²)‖(g(θ+h) − g(θ−h))/2h‖²`.
pub fn fi_finite_difference(theta: f64, cfg: &SceneConfig<f64>, omega: &[C], h: f64) -> f64 {
    let tt = cfg.theta_true().unwrap().radians();
    let f: Vec<C> = steer(cfg.n, theta)
        .into_iter()
        .map(|z| z / (cfg.n as f64).sqrt())
        .collect();
    let a = cfg.a_ris().unwrap();
    let gp = gain_ref(theta + h, tt, omega, &f, a);
    let gm = gain_ref(theta - h, tt, omega, &f, a);
    let d2: f64 = gp.iter().zip(&gm).map(|(p, q)| ((p - q) / (2.0 * h)).norm_sqr()).sum();
    2.0 * cfg.p_tx * cfg.t as f64 / cfg.sigma2 * d2
}

/// A randomized valid scene: θ_true ∈ (−60°, 60°), Δ ∈ [1°, 5°],
/// K ∈ [4, 10], M ∈ [max(24, 2K), 64], θ_fake ∈ (−80°, 80°) at least
/// Δ + 2° from θ_true.
pub fn random_scene(r: &mut ChaCha8Rng) -> SceneConfig<f64> {
    let k = r.random_range(4..=10usize);
    let m = r.random_range(24usize.max(2 * k)..=64);
    let delta = r.random_range(1.0..=5.0);
    let tt = r.random_range(-60.0..60.0);
    let tf = loop {
        let x = r.random_range(-80.0..80.0);
        if f64::abs(x - tt) > delta + 2.0 {
            break x;
        }
    };
    SceneConfig {
        m,
        k,
        half_width: deg(delta),
        theta_true_pinned: Some(deg(tt)),
        theta_fake: deg(tf),
        ..SceneConfig::reference()
    }
}

pub fn random_profile(m: usize, r: &mut ChaCha8Rng) -> RisProfile<f64> {
    RisProfile::random(m, r)
}

/// Least-squares line fit; returns (slope, intercept, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (slope, icpt, 1.0 - ss_res / ss_tot)
}
