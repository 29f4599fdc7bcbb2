//! Scene description, cascaded BS→RIS→BS channel and pilot observations.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{atan2_angle, steering, Angle};
use crate::linalg::CMat;
use crate::ris_kernel::{KernelBasis, KernelConvention, KernelModel, NullingWindow, RisProfile};
use crate::scalar::{dbm_to_watts, Cx, Real};

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Physical scenario shared by every experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig<T> {
    pub carrier_hz: T,
    /// BS antennas.
    pub n: usize,
    /// RIS elements.
    pub m: usize,
    /// RIS position relative to the BS, meters.
    pub p_ris: [T; 2],
    /// Pilot count per coherent block.
    pub t: usize,
    /// Transmit power, watts.
    pub p_tx: T,
    /// Noise power per antenna, watts.
    pub sigma2: T,
    pub theta_fake: Angle<T>,
    /// Explicitly pinned true angle; `None` derives it from `p_ris`.
    pub theta_true_pinned: Option<Angle<T>>,
    /// Nulling window half-width Δ.
    pub half_width: Angle<T>,
    /// Nulling window sample count K.
    pub k: usize,
    pub convention: KernelConvention,
    pub rng_seed: u64,
}

impl<T: Real> SceneConfig<T> {
    /// The 20 GHz reference scene: N = 16, M = 32, RIS at [48, 17] m, T = 50,
    /// P = 20 dBm, σ² = −80 dBm, θ_fake = −48°, θ_true pinned to 20°,
    /// Δ = 3°, K = 10.
    pub fn reference() -> Self {
        Self {
            carrier_hz: T::lit(20e9),
            n: 16,
            m: 32,
            p_ris: [T::lit(48.0), T::lit(17.0)],
            t: 50,
            p_tx: T::lit(dbm_to_watts(20.0)),
            sigma2: T::lit(dbm_to_watts(-80.0)),
            theta_fake: Angle::from_degrees(T::lit(-48.0)),
            theta_true_pinned: Some(Angle::from_degrees(T::lit(20.0))),
            half_width: Angle::from_degrees(T::lit(3.0)),
            k: 10,
            convention: KernelConvention::FixedIncidence,
            rng_seed: 0,
        }
    }

    /// Checks the scalar invariants (positive powers, `N ≥ 2`, `T ≥ 1`, ...).
    pub fn validate(&self) -> Result<()> {
        let pos = |v: T, what: &str| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{what} must be positive and finite")))
            }
        };
        pos(self.carrier_hz, "carrier frequency")?;
        pos(self.p_tx, "transmit power")?;
        pos(self.sigma2, "noise power")?;
        if self.n < 2 {
            return Err(Error::InvalidArgument("N must be at least 2".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidArgument("M must be positive".into()));
        }
        if self.t == 0 {
            return Err(Error::InvalidArgument("T must be at least 1".into()));
        }
        if !(self.half_width.radians() >= T::zero()) {
            return Err(Error::InvalidArgument("window half-width must be non-negative".into()));
        }
        for a in [self.theta_fake, self.theta_true()?] {
            if !(a.radians().abs() < T::FRAC_PI_2()) {
                return Err(Error::EndfireAngle(a.radians().to_f64_lossy()));
            }
        }
        Ok(())
    }

    /// `atan2(p_y, p_x)` of the RIS position.
    pub fn derived_theta_true(&self) -> Result<Angle<T>> {
        atan2_angle(self.p_ris)
    }

    /// Pinned true angle if present, otherwise the derived one.
    pub fn theta_true(&self) -> Result<Angle<T>> {
        match self.theta_true_pinned {
            Some(a) => Ok(a),
            None => self.derived_theta_true(),
        }
    }

    pub fn wavelength(&self) -> T {
        T::lit(SPEED_OF_LIGHT) / self.carrier_hz
    }

    /// `a_RIS` at the configured RIS range.
    pub fn a_ris(&self) -> Result<T> {
        attenuation(self.p_ris, self.carrier_hz)
    }

    pub fn window(&self) -> Result<NullingWindow<T>> {
        NullingWindow::new(self.theta_true()?, self.half_width, self.k)
    }

    pub fn basis(&self) -> Result<KernelBasis<T>> {
        KernelBasis::build(&self.window()?, self.theta_fake, self.theta_true()?, self.m)
    }

    /// Kernel convention with θ_true attached.
    pub fn kernel_model(&self) -> Result<KernelModel<T>> {
        Ok(KernelModel {
            convention: self.convention,
            theta_true: Some(self.theta_true()?),
        })
    }

    /// `2PT/σ²`, the factor in front of every Fisher information.
    pub fn snr_factor(&self) -> T {
        T::lit(2.0) * self.p_tx * T::from_usize_lossy(self.t) / self.sigma2
    }
}

/// `a_RIS = (λ / (4π‖p‖))²`.
pub fn attenuation<T: Real>(p_ris: [T; 2], carrier_hz: T) -> Result<T> {
    if !(carrier_hz > T::zero()) {
        return Err(Error::InvalidArgument("carrier frequency must be positive".into()));
    }
    let r = p_ris[0].hypot(p_ris[1]);
    if r == T::zero() {
        return Err(Error::OriginPosition);
    }
    Ok(attenuation_at_range(r, carrier_hz))
}

pub(crate) fn attenuation_at_range<T: Real>(range: T, carrier_hz: T) -> T {
    let lambda = T::lit(SPEED_OF_LIGHT) / carrier_hz;
    let x = lambda / (T::lit(4.0) * T::PI() * range);
    x * x
}

/// Maximum-ratio transmit precoder `α_N(θ)/√N`.
pub fn mrt_precoder<T: Real>(theta: Angle<T>, n: usize) -> Result<Vec<Cx<T>>> {
    let s = T::from_usize_lossy(n).sqrt();
    Ok(steering(n, theta)?
        .into_vec()
        .into_iter()
        .map(|z| z.unscale(s))
        .collect())
}

/// Rank-one round-trip channel `a_RIS · α_N(θ) · β̄ · α_Nᴴ(θ)`.
#[derive(Debug, Clone)]
pub struct CascadedChannel<T> {
    pub h: CMat<T>,
    pub a_ris: T,
    pub theta_true: Angle<T>,
    /// Kernel value that scales the outer product.
    pub beta: Cx<T>,
}

/// Builds the round-trip channel toward `theta` with the given attenuation.
fn rank_one_channel<T: Real>(n: usize, theta: Angle<T>, a_ris: T, beta: Cx<T>) -> Result<CMat<T>> {
    let alpha = steering(n, theta)?;
    let mut h = CMat::zeros(n, n);
    for j in 0..n {
        let c = alpha[j].conj() * beta.scale(a_ris);
        for i in 0..n {
            h[(i, j)] = alpha[i] * c;
        }
    }
    Ok(h)
}

/// Cascaded channel of the RIS-coated target at θ_true.
///
/// The kernel is `β̄(θ_true)` under `model`: for `FixedIncidence` that is
/// `β(θ_true, θ_true)`, for `SpecularPlusPi` it is `β(θ_true + π, θ_true)`.
pub fn cascaded_channel<T: Real>(
    config: &SceneConfig<T>,
    profile: &RisProfile<T>,
    model: &KernelModel<T>,
) -> Result<CascadedChannel<T>> {
    if profile.len() != config.m {
        return Err(Error::DimensionMismatch {
            expected: config.m,
            got: profile.len(),
        });
    }
    let theta_true = config.theta_true()?;
    let a_ris = config.a_ris()?;
    let beta = model.beta_bar(theta_true, profile)?;
    Ok(CascadedChannel {
        h: rank_one_channel(config.n, theta_true, a_ris, beta)?,
        a_ris,
        theta_true,
        beta,
    })
}

/// Channel seen when the radar illuminates and listens along `look`:
/// `a_RIS · α_N(look) · β̄(look) · α_Nᴴ(look)`.
///
/// At `look = θ_true` this is [`cascaded_channel`].
pub fn look_channel<T: Real>(
    config: &SceneConfig<T>,
    profile: &RisProfile<T>,
    model: &KernelModel<T>,
    look: Angle<T>,
) -> Result<CascadedChannel<T>> {
    if profile.len() != config.m {
        return Err(Error::DimensionMismatch {
            expected: config.m,
            got: profile.len(),
        });
    }
    let a_ris = config.a_ris()?;
    let beta = model.beta_bar(look, profile)?;
    Ok(CascadedChannel {
        h: rank_one_channel(config.n, look, a_ris, beta)?,
        a_ris,
        theta_true: config.theta_true()?,
        beta,
    })
}

/// Received pilot block `Y` (N × T).
#[derive(Debug, Clone)]
pub struct Observation<T> {
    pub y: CMat<T>,
    pub seed: u64,
    pub stream: u64,
}

/// Constant unit pilots `s_t = 1`.
pub fn default_pilots<T: Real>(t: usize) -> Vec<Cx<T>> {
    vec![Cx::new(T::one(), T::zero()); t]
}

/// Counter-based noise stream: `(seed, stream)` fully determines the draws.
pub fn noise_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One `CN(0, σ²)` sample.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, sigma2: T) -> Cx<T> {
    let s = (sigma2 / T::lit(2.0)).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cx::new(T::lit(re) * s, T::lit(im) * s)
}

/// `Y = √P · H · f_TX · sᵀ + N` with MRT toward θ_true and white
/// `CN(0, σ²)` noise drawn from `noise_rng(seed, stream)`.
pub fn synthesize_observation<T: Real>(
    config: &SceneConfig<T>,
    channel: &CascadedChannel<T>,
    pilots: &[Cx<T>],
    seed: u64,
    stream: u64,
) -> Result<Observation<T>> {
    let f = mrt_precoder(channel.theta_true, config.n)?;
    synthesize_with_precoder(config, &channel.h, &f, pilots, seed, stream)
}

/// As [`synthesize_observation`] with an explicit precoder.
pub fn synthesize_with_precoder<T: Real>(
    config: &SceneConfig<T>,
    h: &CMat<T>,
    f: &[Cx<T>],
    pilots: &[Cx<T>],
    seed: u64,
    stream: u64,
) -> Result<Observation<T>> {
    if pilots.is_empty() {
        return Err(Error::Empty("pilot sequence"));
    }
    if h.rows() != config.n || h.cols() != config.n {
        return Err(Error::DimensionMismatch {
            expected: config.n,
            got: h.rows(),
        });
    }
    let power = crate::scalar::norm_sqr(pilots) / T::from_usize_lossy(pilots.len());
    if (power - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(64.0)) {
        return Err(Error::UnnormalizedPilots(power.to_f64_lossy()));
    }
    let hf: Vec<Cx<T>> = h.mul_vec(f).into_iter().map(|z| z.scale(config.p_tx.sqrt())).collect();
    let mut rng = noise_rng(seed, stream);
    let mut y = CMat::zeros(config.n, pilots.len());
    for (t, s) in pilots.iter().enumerate() {
        let col = y.column_mut(t);
        for (yi, hi) in col.iter_mut().zip(&hf) {
            *yi = hi * s;
        }
        if config.sigma2 > T::zero() {
            for yi in col.iter_mut() {
                *yi += complex_gaussian(&mut rng, config.sigma2);
            }
        }
    }
    Ok(Observation { y, seed, stream })
}
