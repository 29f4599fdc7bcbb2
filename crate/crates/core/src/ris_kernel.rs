//! RIS phase profiles, the scalar reflection response and the nulling basis.
//!
//! The per-element kernel is `υ(out, in) = conj(α_M(out)) ⊙ α_M(in)` and the
//! scalar response is `β(out, in; ω) = υᴴ ω`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{steering_raw, Angle, AngleGrid};
use crate::linalg::{left_svd, CMat};
use crate::scalar::{cis, dot_h, norm, Cx, Real};
use crate::solver::zero_phase_element;

/// Condition-number limit above which the nulling kernels are rejected.
pub const RANK_COND_LIMIT: f64 = 1e12;

/// Unit-modulus tolerance accepted by [`RisProfile::new`].
const UNIT_TOL: f64 = 1e-9;

/// Length-M unit-modulus phase vector ω.
#[derive(Debug, Clone, PartialEq)]
pub struct RisProfile<T> {
    omega: Vec<Cx<T>>,
}

impl<T: Real> RisProfile<T> {
    /// Validates `|ω_m| = 1`.
    pub fn new(omega: Vec<Cx<T>>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Empty("RIS profile"));
        }
        let tol = T::lit(UNIT_TOL).max(T::epsilon() * T::lit(16.0));
        if let Some(bad) = omega.iter().find(|z| !((z.norm() - T::one()).abs() <= tol)) {
            return Err(Error::InvalidArgument(format!(
                "RIS entries must be unit modulus, found |ω| = {}",
                bad.norm()
            )));
        }
        Ok(Self { omega })
    }

    /// All-ones profile (specular reflector).
    pub fn uniform(m: usize) -> Self {
        Self {
            omega: vec![Cx::new(T::one(), T::zero()); m],
        }
    }

    pub fn from_phases(phases: &[T]) -> Self {
        Self {
            omega: phases.iter().map(|&p| cis(p)).collect(),
        }
    }

    /// Element-wise phase normalisation of an arbitrary vector.
    pub fn phase_aligned(x: &[Cx<T>]) -> Self {
        Self {
            omega: x.iter().map(|&z| zero_phase_element(z)).collect(),
        }
    }

    /// Independent uniform phases in `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let two_pi = T::TAU();
        Self {
            omega: (0..m).map(|_| cis(T::lit(rng.random::<f64>()) * two_pi)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.omega
    }

    pub fn into_vec(self) -> Vec<Cx<T>> {
        self.omega
    }

    pub fn phases(&self) -> Vec<T> {
        self.omega.iter().map(|z| z.arg()).collect()
    }
}

/// `υ(out, in)` with the angles it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelVector<T> {
    pub upsilon: Vec<Cx<T>>,
    pub out_angle: Angle<T>,
    pub in_angle: Angle<T>,
}

/// Per-element kernel vector, entries `exp(j·π·m·(sin in − sin out))`.
pub fn kernel_vector<T: Real>(out_angle: Angle<T>, in_angle: Angle<T>, m: usize) -> Result<KernelVector<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("RIS size must be positive".into()));
    }
    Ok(KernelVector {
        upsilon: steering_raw(m, in_angle.sin() - out_angle.sin()),
        out_angle,
        in_angle,
    })
}

/// `Σ_m exp(−j·π·m·s)·ω_m`, i.e. `υᴴω` for `s = sin in − sin out`.
fn response<T: Real>(s: T, omega: &[Cx<T>]) -> Cx<T> {
    let step = -T::PI() * s;
    omega
        .iter()
        .enumerate()
        .fold(Cx::new(T::zero(), T::zero()), |acc, (m, w)| {
            acc + cis(step * T::from_usize_lossy(m)) * w
        })
}

/// Scalar response `β(out, in; ω) = υ(out, in)ᴴ ω`.
pub fn beta<T: Real>(out_angle: Angle<T>, in_angle: Angle<T>, profile: &RisProfile<T>) -> Cx<T> {
    response(in_angle.sin() - out_angle.sin(), profile.as_slice())
}

/// How the monostatic kernel `β̄(θ)` picks its outgoing and incident angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelConvention {
    /// `β(θ + π, θ)`: both angles sweep together.
    SpecularPlusPi,
    /// `β(θ, θ_true)`: incidence pinned at the true angle.
    #[default]
    FixedIncidence,
}

/// A convention bound to the context it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelModel<T> {
    pub convention: KernelConvention,
    pub theta_true: Option<Angle<T>>,
}

impl<T: Real> KernelModel<T> {
    pub fn fixed(theta_true: Angle<T>) -> Self {
        Self {
            convention: KernelConvention::FixedIncidence,
            theta_true: Some(theta_true),
        }
    }

    pub fn specular() -> Self {
        Self {
            convention: KernelConvention::SpecularPlusPi,
            theta_true: None,
        }
    }

    /// Fails early when the convention lacks its context.
    pub fn validate(&self) -> Result<()> {
        match (self.convention, self.theta_true) {
            (KernelConvention::FixedIncidence, None) => Err(Error::MissingTrueAngle),
            _ => Ok(()),
        }
    }

    /// `β̄(θ; ω)`.
    pub fn beta_bar(&self, theta: Angle<T>, profile: &RisProfile<T>) -> Result<Cx<T>> {
        beta_bar(theta, profile, self.convention, self.theta_true)
    }

    /// `∂β̄/∂θ` by central difference with step `h`.
    pub fn beta_bar_derivative(&self, theta: Angle<T>, profile: &RisProfile<T>, h: T) -> Result<Cx<T>> {
        let hi = self.beta_bar(Angle::from_radians(theta.radians() + h), profile)?;
        let lo = self.beta_bar(Angle::from_radians(theta.radians() - h), profile)?;
        Ok((hi - lo).unscale(T::lit(2.0) * h))
    }
}

/// Monostatic kernel `β̄(θ; ω)` under the given convention.
pub fn beta_bar<T: Real>(
    theta: Angle<T>,
    profile: &RisProfile<T>,
    convention: KernelConvention,
    theta_true: Option<Angle<T>>,
) -> Result<Cx<T>> {
    match convention {
        // sin(θ + π) = −sin θ
        KernelConvention::SpecularPlusPi => Ok(response(T::lit(2.0) * theta.sin(), profile.as_slice())),
        KernelConvention::FixedIncidence => {
            let tt = theta_true.ok_or(Error::MissingTrueAngle)?;
            Ok(beta(theta, tt, profile))
        }
    }
}

/// Angular band around θ_true sampled at K points.
#[derive(Debug, Clone, PartialEq)]
pub struct NullingWindow<T> {
    center: Angle<T>,
    half_width: Angle<T>,
    angles: Vec<Angle<T>>,
}

impl<T: Real> NullingWindow<T> {
    /// K angles uniformly spaced over `[center − Δ, center + Δ]`, endpoints
    /// included. `K = 1` samples only the centre and `K = 0` is an empty
    /// window (no nulling constraint).
    pub fn new(center: Angle<T>, half_width: Angle<T>, count: usize) -> Result<Self> {
        if !(half_width.radians() >= T::zero()) || !half_width.radians().is_finite() {
            return Err(Error::InvalidArgument("window half-width must be non-negative".into()));
        }
        let angles = match count {
            0 => Vec::new(),
            1 => vec![center],
            _ if half_width.radians() == T::zero() => {
                return Err(Error::RankDeficient {
                    cond: f64::INFINITY,
                    limit: RANK_COND_LIMIT,
                })
            }
            _ => AngleGrid::linspace(center - half_width, center + half_width, count)?
                .values()
                .to_vec(),
        };
        Ok(Self {
            center,
            half_width,
            angles,
        })
    }

    /// Explicit sample angles; used to exercise aliasing checks.
    pub fn from_angles(center: Angle<T>, half_width: Angle<T>, angles: Vec<Angle<T>>) -> Result<Self> {
        let slack = T::lit(1e-12);
        if angles
            .iter()
            .any(|a| (a.radians() - center.radians()).abs() > half_width.radians() + slack)
        {
            return Err(Error::InvalidArgument("window sample outside [θ−Δ, θ+Δ]".into()));
        }
        Ok(Self {
            center,
            half_width,
            angles,
        })
    }

    pub fn center(&self) -> Angle<T> {
        self.center
    }

    pub fn half_width(&self) -> Angle<T> {
        self.half_width
    }

    pub fn count(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[Angle<T>] {
        &self.angles
    }

    /// Whether `theta` lies in the closed band `[center − Δ, center + Δ]`.
    pub fn contains(&self, theta: Angle<T>) -> bool {
        (theta.radians() - self.center.radians()).abs() <= self.half_width.radians() + T::lit(1e-12)
    }

    /// `10×`-oversampled copy of the band, for robustness reporting.
    pub fn dense(&self, factor: usize) -> Result<Self> {
        let count = (self.count().max(1) * factor.max(1)).max(2);
        if self.half_width.radians() == T::zero() {
            return Ok(self.clone());
        }
        Self::new(self.center, self.half_width, count)
    }
}

/// Decoy kernel `w`, nulling kernels `V` and the projector onto `null(Vᴴ)`.
///
/// The projector is held as `P_S = I − Q Qᴴ` with `Q` an orthonormal basis of
/// `span(V)`, so applying it costs `O(MK)`.
#[derive(Debug, Clone)]
pub struct KernelBasis<T> {
    m: usize,
    theta_true: Angle<T>,
    theta_fake: Angle<T>,
    window: NullingWindow<T>,
    w: KernelVector<T>,
    v: CMat<T>,
    q: CMat<T>,
    sigma: Vec<T>,
}

impl<T: Real> KernelBasis<T> {
    /// Assembles `w = υ(θ_fake, θ_true)` and `V = [υ(θ_k, θ_true)]` and checks
    /// the feasibility conditions: `M ≥ 2K`, the decoy outside the window,
    /// full column rank and `w ∉ span(V)`.
    pub fn build(window: &NullingWindow<T>, theta_fake: Angle<T>, theta_true: Angle<T>, m: usize) -> Result<Self> {
        let k = window.count();
        if m == 0 {
            return Err(Error::InvalidArgument("RIS size must be positive".into()));
        }
        if m < 2 * k {
            return Err(Error::TooFewElements { m, k });
        }
        if k > 0 && window.contains(theta_fake) {
            return Err(Error::DecoyInWindow {
                theta_fake_deg: theta_fake.degrees().to_f64_lossy(),
            });
        }
        let columns: Vec<Vec<Cx<T>>> = window
            .angles()
            .iter()
            .map(|&a| kernel_vector(a, theta_true, m).map(|kv| kv.upsilon))
            .collect::<Result<_>>()?;
        let v = CMat::from_columns(m, &columns);
        let (q, sigma) = if k == 0 {
            (CMat::zeros(m, 0), Vec::new())
        } else {
            let svd = left_svd(&v);
            let cond = svd.condition_number().to_f64_lossy();
            if !(cond <= RANK_COND_LIMIT) {
                return Err(Error::RankDeficient {
                    cond,
                    limit: RANK_COND_LIMIT,
                });
            }
            (svd.u, svd.sigma)
        };
        let w = kernel_vector(theta_fake, theta_true, m)?;
        let basis = Self {
            m,
            theta_true,
            theta_fake,
            window: window.clone(),
            w,
            v,
            q,
            sigma,
        };
        if k > 0 {
            let ratio = norm(&basis.project(&basis.w.upsilon)) / norm(&basis.w.upsilon);
            if !(ratio.to_f64_lossy() > 1e-9) {
                return Err(Error::DecoyInSpan {
                    ratio: ratio.to_f64_lossy(),
                });
            }
        }
        Ok(basis)
    }

    /// Same window and projector with a different decoy angle.
    pub fn with_decoy(&self, theta_fake: Angle<T>) -> Result<Self> {
        if self.k() > 0 && self.window.contains(theta_fake) {
            return Err(Error::DecoyInWindow {
                theta_fake_deg: theta_fake.degrees().to_f64_lossy(),
            });
        }
        let w = kernel_vector(theta_fake, self.theta_true, self.m)?;
        let basis = Self {
            theta_fake,
            w,
            ..self.clone()
        };
        if basis.k() > 0 {
            let ratio = norm(&basis.project(&basis.w.upsilon)) / norm(&basis.w.upsilon);
            if !(ratio.to_f64_lossy() > 1e-9) {
                return Err(Error::DecoyInSpan {
                    ratio: ratio.to_f64_lossy(),
                });
            }
        }
        Ok(basis)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.v.cols()
    }

    pub fn theta_true(&self) -> Angle<T> {
        self.theta_true
    }

    pub fn theta_fake(&self) -> Angle<T> {
        self.theta_fake
    }

    pub fn window(&self) -> &NullingWindow<T> {
        &self.window
    }

    pub fn w(&self) -> &[Cx<T>] {
        &self.w.upsilon
    }

    pub fn kernel(&self) -> &KernelVector<T> {
        &self.w
    }

    pub fn v(&self) -> &CMat<T> {
        &self.v
    }

    /// Orthonormal basis of `span(V)`.
    pub fn q(&self) -> &CMat<T> {
        &self.q
    }

    /// Singular values of `V`, descending.
    pub fn singular_values(&self) -> &[T] {
        &self.sigma
    }

    /// `σ_max/σ_min` of `V` (1 for an empty window).
    pub fn condition_number(&self) -> T {
        match (self.sigma.first(), self.sigma.last()) {
            (Some(&hi), Some(&lo)) => hi / lo,
            _ => T::one(),
        }
    }

    /// `P_S x`.
    pub fn project(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        let mut out = x.to_vec();
        self.project_in_place(&mut out);
        out
    }

    pub fn project_in_place(&self, x: &mut [Cx<T>]) {
        assert_eq!(x.len(), self.m, "vector length must equal M");
        for j in 0..self.q.cols() {
            let qj = self.q.column(j);
            let c = dot_h(qj, x);
            for (xi, qi) in x.iter_mut().zip(qj) {
                *xi -= qi * c;
            }
        }
    }

    /// Materialised `M × M` projector.
    pub fn projector(&self) -> CMat<T> {
        let eye = CMat::identity(self.m);
        if self.q.cols() == 0 {
            return eye;
        }
        eye.sub(&self.q.mul(&self.q.adjoint()))
    }

    /// `Vᴴ x`: the responses at the window angles.
    pub fn window_responses(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        self.v.adjoint_mul_vec(x)
    }

    /// Nulling residual `‖Vᴴ x‖²`.
    pub fn residual(&self, x: &[Cx<T>]) -> T {
        self.window_responses(x).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Decoy response `wᴴ x`.
    pub fn decoy_response(&self, x: &[Cx<T>]) -> Cx<T> {
        dot_h(&self.w.upsilon, x)
    }

    /// `η(θ) = ‖P_S υ(θ, θ_true)‖/√M` for an arbitrary candidate decoy.
    pub fn eta(&self, theta: Angle<T>) -> T {
        let u = steering_raw(self.m, self.theta_true.sin() - theta.sin());
        norm(&self.project(&u)) / T::from_usize_lossy(self.m).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn deg(x: f64) -> Angle<f64> {
        Angle::from_degrees(x)
    }

    fn sec5_window() -> NullingWindow<f64> {
        NullingWindow::new(deg(20.0), deg(3.0), 10).unwrap()
    }

    #[test]
    fn kernel_vector_cases() {
        let k = kernel_vector(deg(12.0), deg(12.0), 9).unwrap();
        assert!(k.upsilon.iter().all(|z| (z - Cx::new(1.0, 0.0)).norm() < 1e-15));

        let th = deg(25.0);
        let k = kernel_vector(Angle::from_radians(th.radians() + std::f64::consts::PI), th, 8).unwrap();
        for (m, z) in k.upsilon.iter().enumerate() {
            let want = cis(2.0 * std::f64::consts::PI * m as f64 * th.sin());
            assert!((z - want).norm() < 1e-12);
        }

        let k = kernel_vector(deg(-48.0), deg(20.0), 32).unwrap();
        let phase = std::f64::consts::PI * (deg(20.0).sin() - deg(-48.0).sin());
        assert!((k.upsilon[1] - cis(phase)).norm() < 1e-12);
        assert!((phase / std::f64::consts::PI - 1.0852).abs() < 1e-4);
        assert!(kernel_vector::<f64>(deg(0.0), deg(0.0), 0).is_err());
    }

    #[test]
    fn beta_cases() {
        let ones = RisProfile::<f64>::uniform(32);
        let b = beta(deg(7.0), deg(7.0), &ones);
        assert!((b - Cx::new(32.0, 0.0)).norm() < 1e-12);

        let kv = kernel_vector(deg(-30.0), deg(10.0), 32).unwrap();
        let aligned = RisProfile::phase_aligned(&kv.upsilon);
        assert!((beta(deg(-30.0), deg(10.0), &aligned).norm() - 32.0).abs() < 1e-12);
    }

    #[test]
    fn beta_bar_conventions() {
        let ones = RisProfile::<f64>::uniform(16);
        let th = deg(11.0);
        let b = beta_bar(th, &ones, KernelConvention::SpecularPlusPi, None).unwrap();
        let direct: Cx<f64> = (0..16)
            .map(|m| cis(-2.0 * std::f64::consts::PI * m as f64 * th.sin()))
            .sum();
        assert!((b - direct).norm() < 1e-12);
        let b0 = beta_bar(deg(0.0), &ones, KernelConvention::SpecularPlusPi, None).unwrap();
        assert!((b0 - Cx::new(16.0, 0.0)).norm() < 1e-12);

        assert_eq!(
            beta_bar(th, &ones, KernelConvention::FixedIncidence, None),
            Err(Error::MissingTrueAngle)
        );
        let fixed = KernelModel::fixed(deg(20.0));
        assert!((fixed.beta_bar(deg(20.0), &ones).unwrap() - Cx::new(16.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn profile_validation() {
        assert!(RisProfile::new(vec![Cx::new(1.0, 0.0), Cx::new(0.5, 0.0)]).is_err());
        assert!(RisProfile::<f64>::new(vec![]).is_err());
        let p = RisProfile::new(vec![Cx::new(0.0, 1.0), cis(0.3)]).unwrap();
        assert_eq!(p.len(), 2);
        let zero = RisProfile::phase_aligned(&[Cx::new(0.0, 0.0), Cx::new(0.0, -2.0)]);
        assert_eq!(zero.as_slice()[0], Cx::new(1.0, 0.0));
        assert!((zero.as_slice()[1] - Cx::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn window_sampling() {
        let w = sec5_window();
        assert_eq!(w.count(), 10);
        assert!((w.angles()[0].degrees() - 17.0).abs() < 1e-12);
        assert!((w.angles()[9].degrees() - 23.0).abs() < 1e-12);
        assert!(w.contains(deg(23.0)) && !w.contains(deg(23.1)));
        let one = NullingWindow::new(deg(20.0), deg(3.0), 1).unwrap();
        assert_eq!(one.angles(), &[deg(20.0)]);
        assert_eq!(w.dense(10).unwrap().count(), 100);
    }

    #[test]
    fn rank_one_projector() {
        // single window angle equal to the incidence: υ = all-ones
        let win = NullingWindow::new(deg(0.0), deg(0.0), 1).unwrap();
        let b = KernelBasis::build(&win, deg(30.0), deg(0.0), 8).unwrap();
        let p = b.projector();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 - 1.0 / 8.0 } else { -1.0 / 8.0 };
                assert!((p[(i, j)] - Cx::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn feasibility_errors() {
        let win = sec5_window();
        assert_eq!(
            KernelBasis::build(&win, deg(-48.0), deg(20.0), 16).unwrap_err(),
            Error::TooFewElements { m: 16, k: 10 }
        );
        assert!(matches!(
            KernelBasis::build(&win, deg(20.0), deg(20.0), 32),
            Err(Error::DecoyInWindow { .. })
        ));
        let dup = NullingWindow::from_angles(deg(20.0), deg(3.0), vec![deg(19.0), deg(19.0), deg(21.0)]).unwrap();
        assert!(matches!(
            KernelBasis::build(&dup, deg(-48.0), deg(20.0), 32),
            Err(Error::RankDeficient { .. })
        ));
        assert!(NullingWindow::new(deg(20.0), deg(0.0), 3).is_err());
    }

    #[test]
    fn sec5_basis_projector_identities() {
        let b = KernelBasis::build(&sec5_window(), deg(-48.0), deg(20.0), 32).unwrap();
        assert_eq!(b.k(), 10);
        assert!(b.condition_number() < 1e12);
        let p = b.projector();
        assert!(p.mul(&p).sub(&p).frobenius_norm() < 1e-9);
        assert!(p.adjoint().sub(&p).frobenius_norm() < 1e-9);
        assert!(p.mul(b.v()).frobenius_norm() < 1e-9);
        let pw = b.project(b.w());
        assert!(norm(&pw) <= norm(b.w()) + 1e-12);
        assert!((norm(b.w()) - 32f64.sqrt()).abs() < 1e-12);
        let eta = b.eta(deg(-48.0));
        assert!(eta > 0.0 && eta < 1.0);
    }

    #[test]
    fn empty_window_basis_is_identity() {
        let win = NullingWindow::new(deg(20.0), deg(3.0), 0).unwrap();
        let b = KernelBasis::build(&win, deg(-48.0), deg(20.0), 32).unwrap();
        assert_eq!(b.k(), 0);
        let x: Vec<_> = (0..32).map(|m| cis(0.1 * m as f64)).collect();
        assert_eq!(b.project(&x), x);
        assert_eq!(b.residual(&x), 0.0);
        assert!((b.eta(deg(-48.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn null_space_membership() {
        let b = KernelBasis::build(&sec5_window(), deg(-48.0), deg(20.0), 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = RisProfile::<f64>::random(32, &mut rng);
            let px = b.project(x.as_slice());
            let r: f64 = b.residual(&px).sqrt();
            assert!(r <= 1e-9 * norm(x.as_slice()), "residual {r}");
        }
    }

    #[test]
    fn f32_basis_builds() {
        let win = NullingWindow::<f32>::new(Angle::from_degrees(20.0), Angle::from_degrees(3.0), 4).unwrap();
        let b = KernelBasis::build(&win, Angle::from_degrees(-48.0), Angle::from_degrees(20.0), 32).unwrap();
        let p = b.projector();
        assert!(p.mul(b.v()).frobenius_norm() < 1e-3);
    }
}
