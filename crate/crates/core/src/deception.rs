//! ρ-deception criteria, leakage statistics and decoy-angle selection.

use rayon::prelude::*;

use crate::bounds::kappa;
use crate::channel::SceneConfig;
use crate::error::{Error, Result};
use crate::geometry::{Angle, AngleGrid};
use crate::ris_kernel::{KernelBasis, KernelModel, NullingWindow, RisProfile};
use crate::scalar::Real;
use crate::solver::{solve_p3, SolverParams};

/// Default leakage caps for ρ_UB sweeps.
pub const DEFAULT_LEAKAGE_CAPS: [f64; 3] = [0.1, 1.0, 10.0];

/// Relative slack on the threshold comparison so exact boundary cases hold.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Worst-case leakage `max_k |β̄(θ_k; ω)|` over the window samples.
pub fn leakage_worst<T: Real>(profile: &RisProfile<T>, window: &NullingWindow<T>, model: &KernelModel<T>) -> Result<T> {
    if window.count() == 0 {
        return Err(Error::Empty("nulling window"));
    }
    window
        .angles()
        .iter()
        .try_fold(T::zero(), |acc, &th| Ok(acc.max(model.beta_bar(th, profile)?.norm())))
}

/// [`leakage_worst`] over a `factor×` oversampled copy of the band.
pub fn leakage_worst_dense<T: Real>(
    profile: &RisProfile<T>,
    window: &NullingWindow<T>,
    model: &KernelModel<T>,
    factor: usize,
) -> Result<T> {
    leakage_worst(profile, &window.dense(factor)?, model)
}

/// `min_k κ(θ_k)` over the window samples.
pub fn kappa_min<T: Real>(window: &NullingWindow<T>, n: usize) -> Result<T> {
    if window.count() == 0 {
        return Err(Error::Empty("nulling window"));
    }
    Ok(window
        .angles()
        .iter()
        .map(|&th| kappa(th, n))
        .fold(T::infinity(), T::min))
}

/// Outcome of a ρ test: `holds` iff `ratio ≤ threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict<T> {
    pub holds: bool,
    pub ratio: T,
    pub threshold: T,
    /// `threshold − ratio`.
    pub margin: T,
}

fn verdict<T: Real>(num: T, den: T, threshold: T) -> Verdict<T> {
    if !(den > T::zero()) {
        return Verdict {
            holds: false,
            ratio: T::infinity(),
            threshold,
            margin: T::neg_infinity(),
        };
    }
    let ratio = num / den;
    Verdict {
        holds: ratio <= threshold * (T::one() + T::lit(BOUNDARY_SLACK)),
        ratio,
        threshold,
        margin: threshold - ratio,
    }
}

fn check_rho<T: Real>(rho: T) -> Result<()> {
    if rho >= T::one() && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("ρ must be finite and ≥ 1, got {rho}")))
    }
}

/// Point-wise criterion `|β̄(θ_true)/β̄(θ_fake)| ≤ √(κ(θ_fake)/(ρ κ(θ_true)))`.
///
/// Equivalent to `CRB(θ_true) ≥ ρ·CRB(θ_fake)` under the closed-form FI. A
/// zero decoy response fails with an infinite ratio.
pub fn rho_pointwise_ok<T: Real>(
    profile: &RisProfile<T>,
    theta_true: Angle<T>,
    theta_fake: Angle<T>,
    rho: T,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
) -> Result<Verdict<T>> {
    check_rho(rho)?;
    theta_true.require_off_endfire()?;
    theta_fake.require_off_endfire()?;
    let bt = model.beta_bar(theta_true, profile)?.norm();
    let bf = model.beta_bar(theta_fake, profile)?.norm();
    let thr = (kappa(theta_fake, config.n) / (rho * kappa(theta_true, config.n))).sqrt();
    Ok(verdict(bt, bf, thr))
}

/// Band verdict plus the guarantee it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandVerdict<T> {
    pub verdict: Verdict<T>,
    pub leakage_worst: T,
    pub kappa_min: T,
    /// `CRB(θ) ≥ ρ·CRB(θ_fake)` for every window sample.
    pub guarantees_window: bool,
}

/// Band criterion `L_true / |β̄(θ_fake)| ≤ √(κ(θ_fake)/(ρ κ_min))`.
pub fn rho_band_ok<T: Real>(
    profile: &RisProfile<T>,
    window: &NullingWindow<T>,
    theta_fake: Angle<T>,
    rho: T,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
) -> Result<BandVerdict<T>> {
    check_rho(rho)?;
    theta_fake.require_off_endfire()?;
    let lt = leakage_worst(profile, window, model)?;
    let kmin = kappa_min(window, config.n)?;
    let bf = model.beta_bar(theta_fake, profile)?.norm();
    let v = verdict(lt, bf, (kappa(theta_fake, config.n) / (rho * kmin)).sqrt());
    Ok(BandVerdict {
        verdict: v,
        leakage_worst: lt,
        kappa_min: kmin,
        guarantees_window: v.holds,
    })
}

/// `η(θ) = ‖P_S υ(θ, θ_true)‖/√M`.
pub fn eta<T: Real>(theta: Angle<T>, basis: &KernelBasis<T>) -> T {
    basis.eta(theta)
}

/// `ρ_UB(θ; L̄) = M² η²(θ) κ(θ) / (κ_min L̄²)`.
pub fn rho_upper_bound<T: Real>(
    theta: Angle<T>,
    leakage_cap: T,
    config: &SceneConfig<T>,
    basis: &KernelBasis<T>,
) -> Result<T> {
    Ok(decoy_score(theta, leakage_cap, config, basis)?.rho_ub)
}

/// Placement score of one candidate decoy angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyScore<T> {
    pub theta: Angle<T>,
    pub eta: T,
    /// `η √κ`.
    pub phi: T,
    pub rho_ub: T,
}

pub fn decoy_score<T: Real>(
    theta: Angle<T>,
    leakage_cap: T,
    config: &SceneConfig<T>,
    basis: &KernelBasis<T>,
) -> Result<DecoyScore<T>> {
    if !(leakage_cap > T::zero()) {
        return Err(Error::InvalidArgument("leakage cap must be positive".into()));
    }
    let kmin = kappa_min(basis.window(), config.n)?;
    let e = basis.eta(theta);
    let k = kappa(theta, config.n);
    let m = T::from_usize_lossy(basis.m());
    Ok(DecoyScore {
        theta,
        eta: e,
        phi: e * k.sqrt(),
        rho_ub: m * m * e * e * k / (kmin * leakage_cap * leakage_cap),
    })
}

/// ρ_UB over a grid for several caps: `out[c][i]` is cap `c`, angle `i`.
pub fn rho_ub_sweep<T: Real>(
    grid: &AngleGrid<T>,
    caps: &[T],
    config: &SceneConfig<T>,
    basis: &KernelBasis<T>,
) -> Result<Vec<Vec<DecoyScore<T>>>> {
    caps.iter()
        .map(|&cap| {
            grid.values()
                .par_iter()
                .map(|&th| decoy_score(th, cap, config, basis))
                .collect()
        })
        .collect()
}

/// Index of the largest value, lowest index on ties.
pub fn argmax<T: Real>(values: impl IntoIterator<Item = T>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ if v.is_nan() => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// `CRB(θ_true)/CRB(θ_fake)` under the closed form, i.e.
/// `|β̄_f|²κ_f / (|β̄_t|²κ_t)`; `+∞` when the true response is zero.
pub fn realized_rho<T: Real>(
    profile: &RisProfile<T>,
    theta_true: Angle<T>,
    theta_fake: Angle<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
) -> Result<T> {
    theta_true.require_off_endfire()?;
    theta_fake.require_off_endfire()?;
    let bt = model.beta_bar(theta_true, profile)?.norm_sqr() * kappa(theta_true, config.n);
    let bf = model.beta_bar(theta_fake, profile)?.norm_sqr() * kappa(theta_fake, config.n);
    Ok(if bt > T::zero() { bf / bt } else { T::infinity() })
}

/// `CRB(θ_true)/CRB(θ_fake)` from the exact FI, reported as a diagnostic.
pub fn realized_rho_exact<T: Real>(
    profile: &RisProfile<T>,
    theta_true: Angle<T>,
    theta_fake: Angle<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
) -> Result<T> {
    let jt = crate::bounds::fi_exact(theta_true, profile, config, model)?;
    let jf = crate::bounds::fi_exact(theta_fake, profile, config, model)?;
    Ok(if jt > T::zero() { jf / jt } else { T::infinity() })
}

/// One shortlisted decoy.
#[derive(Debug, Clone)]
pub struct Candidate<T> {
    pub score: DecoyScore<T>,
    /// Present for candidates that were solved.
    pub realized_rho: Option<T>,
    pub decoy_gain: Option<T>,
    pub converged: Option<bool>,
}

/// Candidates ranked by ρ_UB, and the solved subset ranked by realized ρ.
#[derive(Debug, Clone)]
pub struct Shortlist<T> {
    pub by_bound: Vec<Candidate<T>>,
    pub by_realized: Vec<Candidate<T>>,
}

impl<T: Real> Shortlist<T> {
    /// Best realized ρ among the solved candidates.
    pub fn selected(&self) -> Option<&Candidate<T>> {
        self.by_realized.first()
    }
}

fn desc<T: Real>(a: T, b: T) -> std::cmp::Ordering {
    b.partial_cmp(&a).unwrap_or(std::cmp::Ordering::Equal)
}

/// Ranks admissible grid angles by ρ_UB, solves the top `top_n` and ranks
/// those by the realized ρ.
pub fn shortlist_decoys<T: Real>(
    grid: &AngleGrid<T>,
    config: &SceneConfig<T>,
    leakage_cap: T,
    top_n: usize,
    params: &SolverParams<T>,
) -> Result<Shortlist<T>> {
    let base = config.basis()?;
    let model = config.kernel_model()?;
    let theta_true = config.theta_true()?;
    let window = base.window().clone();
    let admissible = grid
        .filtered(|th| !window.contains(th))
        .map_err(|_| Error::Empty("admissible decoy grid"))?;
    let mut ranked: Vec<Candidate<T>> = admissible
        .values()
        .par_iter()
        .map(|&th| {
            Ok(Candidate {
                score: decoy_score(th, leakage_cap, config, &base)?,
                realized_rho: None,
                decoy_gain: None,
                converged: None,
            })
        })
        .collect::<Result<_>>()?;
    // stable sort keeps grid order among equal bounds
    ranked.sort_by(|a, b| desc(a.score.rho_ub, b.score.rho_ub));

    let solved: Vec<Candidate<T>> = ranked
        .par_iter()
        .take(top_n)
        .map(|cand| {
            let basis = base.with_decoy(cand.score.theta)?;
            let sol = solve_p3(&basis, params)?;
            let rho = realized_rho(&sol.profile, theta_true, cand.score.theta, config, &model)?;
            Ok(Candidate {
                realized_rho: Some(rho),
                decoy_gain: Some(sol.decoy_gain),
                converged: Some(sol.converged),
                ..cand.clone()
            })
        })
        .collect::<Result<_>>()?;
    for (dst, src) in ranked.iter_mut().zip(&solved) {
        *dst = src.clone();
    }
    let mut by_realized = solved;
    by_realized.sort_by(|a, b| desc(a.realized_rho.unwrap_or(T::zero()), b.realized_rho.unwrap_or(T::zero())));
    Ok(Shortlist {
        by_bound: ranked,
        by_realized,
    })
}

/// Deception summary of one profile.
#[derive(Debug, Clone)]
pub struct DeceptionReport<T> {
    pub leakage_worst: T,
    /// Leakage over a 10× oversampled band.
    pub leakage_dense: T,
    pub decoy_mag: T,
    pub leakage_ratio: T,
    pub realized_rho: T,
    pub realized_rho_exact: T,
    pub kappa_min: T,
    /// `(ρ, band threshold √(κ(θ_fake)/(ρ κ_min)))`.
    pub thresholds: Vec<(T, T)>,
}

pub fn deception_report<T: Real>(
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
    rhos: &[T],
) -> Result<DeceptionReport<T>> {
    let window = config.window()?;
    let theta_true = config.theta_true()?;
    let tf = config.theta_fake;
    let lt = leakage_worst(profile, &window, model)?;
    let bf = model.beta_bar(tf, profile)?.norm();
    let kmin = kappa_min(&window, config.n)?;
    let kf = kappa(tf, config.n);
    let thresholds = rhos
        .iter()
        .map(|&r| {
            check_rho(r)?;
            Ok((r, (kf / (r * kmin)).sqrt()))
        })
        .collect::<Result<_>>()?;
    Ok(DeceptionReport {
        leakage_worst: lt,
        leakage_dense: leakage_worst_dense(profile, &window, model, 10)?,
        decoy_mag: bf,
        leakage_ratio: if bf > T::zero() { lt / bf } else { T::infinity() },
        realized_rho: realized_rho(profile, theta_true, tf, config, model)?,
        realized_rho_exact: realized_rho_exact(profile, theta_true, tf, config, model)?,
        kappa_min: kmin,
        thresholds,
    })
}
