//! The radar's maximum-likelihood AoA estimator and a Monte-Carlo harness.
//!
//! Two observation models are provided:
//!
//! * [`EstimatorModel::Scanning`]: the radar illuminates and listens along
//!   each look direction θ in turn (MRT toward θ), so each look sees the
//!   channel `a_RIS · α_N(θ) β̄(θ) α_Nᴴ(θ)` of its own block and the spectrum
//!   traces the RIS kernel. Noise is independent between looks.
//! * [`EstimatorModel::PointReflector`]: one block with MRT toward θ_true
//!   through the rank-one round-trip channel. The echo always returns along
//!   `α_N(θ_true)`, so only its amplitude depends on the profile.

use rayon::prelude::*;

use crate::channel::{
    cascaded_channel, complex_gaussian, default_pilots, look_channel, mrt_precoder, noise_rng, synthesize_observation,
    synthesize_with_precoder, Observation, SceneConfig,
};
use crate::deception::argmax;
use crate::error::{Error, Result};
use crate::geometry::{steering, Angle, AngleGrid};
use crate::linalg::CMat;
use crate::ris_kernel::{KernelModel, RisProfile};
use crate::scalar::{dot_h, Real};

/// `R = Y Yᴴ / T`.
pub fn sample_covariance<T: Real>(obs: &Observation<T>) -> CMat<T> {
    let y = &obs.y;
    let (n, t) = (y.rows(), y.cols());
    let mut r = CMat::zeros(n, n);
    let inv_t = T::one() / T::from_usize_lossy(t.max(1));
    for k in 0..t {
        let col = y.column(k);
        for j in 0..n {
            let cj = col[j].conj().scale(inv_t);
            for i in 0..n {
                r[(i, j)] += col[i] * cj;
            }
        }
    }
    r
}

/// Grid spectrum `|α_Nᴴ(θ) R α_N(θ)|²` and its argmax.
#[derive(Debug, Clone)]
pub struct MlSpectrum<T> {
    pub grid: AngleGrid<T>,
    pub values: Vec<T>,
    pub peak_index: usize,
    pub peak_theta: Angle<T>,
    pub peak_value: T,
}

impl<T: Real> MlSpectrum<T> {
    fn from_values(grid: &AngleGrid<T>, values: Vec<T>) -> Result<Self> {
        let peak_index = argmax(values.iter().copied()).ok_or(Error::Empty("angle grid"))?;
        Ok(Self {
            grid: grid.clone(),
            peak_theta: grid.values()[peak_index],
            peak_value: values[peak_index],
            peak_index,
            values,
        })
    }

    /// Spectrum value at the grid point nearest `theta`.
    pub fn value_near(&self, theta: Angle<T>) -> T {
        let i = nearest_index(&self.grid, theta);
        self.values[i]
    }
}

fn nearest_index<T: Real>(grid: &AngleGrid<T>, theta: Angle<T>) -> usize {
    grid.values()
        .iter()
        .enumerate()
        .fold((0, T::infinity()), |(bi, bd), (i, a)| {
            let d = (a.radians() - theta.radians()).abs();
            if d < bd {
                (i, d)
            } else {
                (bi, bd)
            }
        })
        .0
}

/// Evaluates the ML objective of a covariance over `grid`.
pub fn ml_spectrum<T: Real>(r: &CMat<T>, grid: &AngleGrid<T>, n: usize) -> Result<MlSpectrum<T>> {
    if r.rows() != n || r.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r.rows(),
        });
    }
    if grid.is_empty() {
        return Err(Error::Empty("angle grid"));
    }
    let values = grid
        .values()
        .iter()
        .map(|&th| {
            let a = steering(n, th)?;
            Ok(dot_h(a.as_slice(), &r.mul_vec(a.as_slice())).norm_sqr())
        })
        .collect::<Result<Vec<T>>>()?;
    MlSpectrum::from_values(grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorModel {
    #[default]
    Scanning,
    PointReflector,
}

/// Scanning spectrum built from a full `N × T` observation per look.
pub fn scanning_spectrum_full<T: Real>(
    config: &SceneConfig<T>,
    profile: &RisProfile<T>,
    model: &KernelModel<T>,
    grid: &AngleGrid<T>,
    seed: u64,
    stream: u64,
) -> Result<MlSpectrum<T>> {
    let pilots = default_pilots(config.t);
    let values = grid
        .values()
        .iter()
        .enumerate()
        .map(|(i, &look)| {
            let ch = look_channel(config, profile, model, look)?;
            let f = mrt_precoder(look, config.n)?;
            // one substream per look
            let obs = synthesize_with_precoder(config, &ch.h, &f, &pilots, seed ^ stream.rotate_left(32), i as u64)?;
            let r = sample_covariance(&obs);
            let a = steering(config.n, look)?;
            Ok(dot_h(a.as_slice(), &r.mul_vec(a.as_slice())).norm_sqr())
        })
        .collect::<Result<Vec<T>>>()?;
    MlSpectrum::from_values(grid, values)
}

/// Scanning spectrum evaluated on the beamformer outputs directly.
///
/// With unit pilots, `α_Nᴴ(θ) y_t = √P·a_RIS·β̄(θ)·N^{3/2} + α_Nᴴ(θ) n_t`
/// and `α_Nᴴ(θ) n_t ~ CN(0, Nσ²)`, so `α_Nᴴ R α_N` is drawn from `T` scalar
/// samples per look instead of an `N × T` block. The distribution is the
/// same as [`scanning_spectrum_full`].
pub fn scanning_spectrum<T: Real>(
    config: &SceneConfig<T>,
    profile: &RisProfile<T>,
    model: &KernelModel<T>,
    grid: &AngleGrid<T>,
    seed: u64,
    stream: u64,
) -> Result<MlSpectrum<T>> {
    let nn = T::from_usize_lossy(config.n);
    let gain = config.p_tx.sqrt() * config.a_ris()? * nn * nn.sqrt();
    let beam_noise = nn * config.sigma2;
    let inv_t = T::one() / T::from_usize_lossy(config.t);
    let mut rng = noise_rng(seed, stream);
    let values = grid
        .values()
        .iter()
        .map(|&look| {
            let mu = model.beta_bar(look, profile)?.scale(gain);
            let mut q = T::zero();
            for _ in 0..config.t {
                let z = if beam_noise > T::zero() {
                    mu + complex_gaussian(&mut rng, beam_noise)
                } else {
                    mu
                };
                q += z.norm_sqr();
            }
            let q = q * inv_t;
            Ok(q * q)
        })
        .collect::<Result<Vec<T>>>()?;
    MlSpectrum::from_values(grid, values)
}

/// Point-reflector spectrum from one block toward θ_true.
pub fn point_reflector_spectrum<T: Real>(
    config: &SceneConfig<T>,
    profile: &RisProfile<T>,
    model: &KernelModel<T>,
    grid: &AngleGrid<T>,
    seed: u64,
    stream: u64,
) -> Result<MlSpectrum<T>> {
    let ch = cascaded_channel(config, profile, model)?;
    let obs = synthesize_observation(config, &ch, &default_pilots(config.t), seed, stream)?;
    ml_spectrum(&sample_covariance(&obs), grid, config.n)
}

/// Spectrum of one realisation under the chosen observation model.
pub fn estimate_spectrum<T: Real>(
    estimator: EstimatorModel,
    config: &SceneConfig<T>,
    profile: &RisProfile<T>,
    model: &KernelModel<T>,
    grid: &AngleGrid<T>,
    seed: u64,
    stream: u64,
) -> Result<MlSpectrum<T>> {
    match estimator {
        EstimatorModel::Scanning => scanning_spectrum(config, profile, model, grid, seed, stream),
        EstimatorModel::PointReflector => point_reflector_spectrum(config, profile, model, grid, seed, stream),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Decoyed,
    Revealed,
    Elsewhere,
}

/// Nearest of θ_true/θ_fake within `tol`; ties count as revealed.
pub fn classify<T: Real>(
    estimate: Angle<T>,
    theta_true: Angle<T>,
    theta_fake: Angle<T>,
    tol: Angle<T>,
) -> Classification {
    let dt = (estimate.radians() - theta_true.radians()).abs();
    let df = (estimate.radians() - theta_fake.radians()).abs();
    let tol = tol.radians();
    match (dt <= tol, df <= tol) {
        (true, true) if df < dt => Classification::Decoyed,
        (true, _) => Classification::Revealed,
        (false, true) => Classification::Decoyed,
        (false, false) => Classification::Elsewhere,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult<T> {
    pub estimated_theta: Angle<T>,
    pub true_theta: Angle<T>,
    pub fake_theta: Angle<T>,
    pub classified: Classification,
    pub seed: u64,
    pub stream: u64,
}

/// Monte-Carlo settings.
#[derive(Debug, Clone)]
pub struct TrialConfig<T> {
    pub n_trials: usize,
    pub grid: AngleGrid<T>,
    /// Classification half-width around θ_true and θ_fake.
    pub tolerance: Angle<T>,
    pub estimator: EstimatorModel,
}

impl<T: Real> TrialConfig<T> {
    /// 0.1° grid over [−89°, 89°], ±1° classification, scanning radar.
    pub fn with_trials(n_trials: usize) -> Self {
        Self {
            n_trials,
            grid: AngleGrid::estimator_default(),
            tolerance: Angle::from_degrees(T::one()),
            estimator: EstimatorModel::Scanning,
        }
    }
}

/// Rates and errors over all trials.
#[derive(Debug, Clone)]
pub struct TrialAggregate<T> {
    pub n_trials: usize,
    pub decoyed: usize,
    pub revealed: usize,
    pub elsewhere: usize,
    pub decoyed_rate: T,
    pub revealed_rate: T,
    pub elsewhere_rate: T,
    /// Root-mean-square of `θ★ − θ_fake`, radians.
    pub rmse_to_fake: T,
    /// Root-mean-square of `θ★ − θ_true`, radians.
    pub rmse_to_true: T,
    pub trials: Vec<TrialResult<T>>,
}

impl<T: Real> TrialAggregate<T> {
    pub fn estimates(&self) -> Vec<T> {
        self.trials.iter().map(|t| t.estimated_theta.radians()).collect()
    }

    /// Sample variance of the estimates, radians².
    pub fn variance(&self) -> T {
        let e = self.estimates();
        let n = T::from_usize_lossy(e.len());
        if e.len() < 2 {
            return T::zero();
        }
        let mean = e.iter().copied().sum::<T>() / n;
        e.iter().map(|x| (*x - mean) * (*x - mean)).sum::<T>() / (n - T::one())
    }
}

/// Runs `n_trials` independent estimates; trial `i` uses noise stream `i` of
/// `config.rng_seed`, so results do not depend on the thread count.
pub fn run_trials<T: Real>(
    config: &SceneConfig<T>,
    profile: &RisProfile<T>,
    model: &KernelModel<T>,
    trials: &TrialConfig<T>,
) -> Result<TrialAggregate<T>> {
    if trials.n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
    }
    let theta_true = config.theta_true()?;
    let theta_fake = config.theta_fake;
    let seed = config.rng_seed;
    let results: Vec<TrialResult<T>> = (0..trials.n_trials as u64)
        .into_par_iter()
        .map(|stream| {
            let spec = estimate_spectrum(trials.estimator, config, profile, model, &trials.grid, seed, stream)?;
            Ok(TrialResult {
                estimated_theta: spec.peak_theta,
                true_theta: theta_true,
                fake_theta: theta_fake,
                classified: classify(spec.peak_theta, theta_true, theta_fake, trials.tolerance),
                seed,
                stream,
            })
        })
        .collect::<Result<_>>()?;
    let count = |c: Classification| results.iter().filter(|r| r.classified == c).count();
    let (decoyed, revealed, elsewhere) = (
        count(Classification::Decoyed),
        count(Classification::Revealed),
        count(Classification::Elsewhere),
    );
    let n = T::from_usize_lossy(results.len());
    let rmse = |target: Angle<T>| {
        (results
            .iter()
            .map(|r| {
                let d = r.estimated_theta.radians() - target.radians();
                d * d
            })
            .sum::<T>()
            / n)
            .sqrt()
    };
    Ok(TrialAggregate {
        n_trials: results.len(),
        decoyed,
        revealed,
        elsewhere,
        decoyed_rate: T::from_usize_lossy(decoyed) / n,
        revealed_rate: T::from_usize_lossy(revealed) / n,
        elsewhere_rate: T::from_usize_lossy(elsewhere) / n,
        rmse_to_fake: rmse(theta_fake),
        rmse_to_true: rmse(theta_true),
        trials: results,
    })
}

/// Convenience: noiseless spectrum under the chosen model.
pub fn noiseless_spectrum<T: Real>(
    estimator: EstimatorModel,
    config: &SceneConfig<T>,
    profile: &RisProfile<T>,
    model: &KernelModel<T>,
    grid: &AngleGrid<T>,
) -> Result<MlSpectrum<T>> {
    let quiet = SceneConfig {
        sigma2: T::zero(),
        ..config.clone()
    };
    estimate_spectrum(estimator, &quiet, profile, model, grid, 0, 0)
}
