//! Fisher information, CRB and PEB of the radar's AoA estimate.
//!
//! The composite gain is `g(θ) = a_RIS · β̄(θ) · α_N(θ) · v(θ)` with
//! `v(θ) = f_TXᴴ α_N(θ)` the transmit array factor, and the angular FI is
//! `J(θ) = (2PT/σ²)·‖∂g/∂θ‖²`. The precoder is MRT toward the evaluated
//! angle and is held fixed while differentiating.

use rayon::prelude::*;

use crate::channel::{attenuation_at_range, mrt_precoder, SceneConfig};
use crate::error::{Error, Result};
use crate::geometry::{steering, steering_derivative, Angle, AngleGrid};
use crate::ris_kernel::{KernelModel, RisProfile};
use crate::scalar::{dot_h, norm_sqr, Cx, Real};

/// Central-difference step for `∂β̄/∂θ`, radians.
pub const BETA_DIFF_STEP: f64 = 1e-5;

/// Which Fisher information a bound is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundVariant {
    /// Full product rule with the kernel derivative.
    Exact,
    /// Flat-kernel closed form.
    #[default]
    ClosedForm,
}

/// `κ(θ) = π² cos²θ · N²(N−1)²`.
pub fn kappa<T: Real>(theta: Angle<T>, n: usize) -> T {
    let nn = T::from_usize_lossy(n);
    let c = T::PI() * theta.cos() * nn * (nn - T::one());
    c * c
}

/// `g(θ)` for a fixed precoder and attenuation.
pub fn composite_gain<T: Real>(
    theta: Angle<T>,
    profile: &RisProfile<T>,
    model: &KernelModel<T>,
    precoder: &[Cx<T>],
    a_ris: T,
) -> Result<Vec<Cx<T>>> {
    let alpha = steering(precoder.len(), theta)?;
    let v = dot_h(precoder, alpha.as_slice());
    let b = model.beta_bar(theta, profile)? * v.scale(a_ris);
    Ok(alpha.into_vec().into_iter().map(|z| z * b).collect())
}

/// `∂g/∂θ` by the product rule: analytic steering and array-factor
/// derivatives, central difference for the kernel.
pub fn composite_gain_derivative<T: Real>(
    theta: Angle<T>,
    profile: &RisProfile<T>,
    model: &KernelModel<T>,
    precoder: &[Cx<T>],
    a_ris: T,
) -> Result<Vec<Cx<T>>> {
    let n = precoder.len();
    let alpha = steering(n, theta)?;
    let d_alpha = steering_derivative(n, theta)?;
    let v = dot_h(precoder, alpha.as_slice());
    let dv = dot_h(precoder, &d_alpha);
    let b = model.beta_bar(theta, profile)?;
    let db = model.beta_bar_derivative(theta, profile, T::lit(BETA_DIFF_STEP))?;
    Ok((0..n)
        .map(|i| (alpha[i] * (db * v + b * dv) + d_alpha[i] * (b * v)).scale(a_ris))
        .collect())
}

fn fi_exact_with<T: Real>(
    theta: Angle<T>,
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
    a_ris: T,
) -> Result<T> {
    let f = mrt_precoder(theta, config.n)?;
    let dg = composite_gain_derivative(theta, profile, model, &f, a_ris)?;
    Ok(config.snr_factor() * norm_sqr(&dg))
}

fn fi_closed_with<T: Real>(
    theta: Angle<T>,
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
    a_ris: T,
) -> Result<T> {
    theta.require_off_endfire()?;
    let b = model.beta_bar(theta, profile)?;
    Ok(config.snr_factor() * a_ris * a_ris * b.norm_sqr() * kappa(theta, config.n))
}

/// Angular FI from the full derivative of the composite gain.
pub fn fi_exact<T: Real>(
    theta: Angle<T>,
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
) -> Result<T> {
    fi_exact_with(theta, profile, config, model, config.a_ris()?)
}

/// Closed-form FI `2PT·a²_RIS·|β̄(θ)|²·κ(θ)/σ²`; rejects `|θ| ≥ π/2`.
pub fn fi_closed<T: Real>(
    theta: Angle<T>,
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
) -> Result<T> {
    fi_closed_with(theta, profile, config, model, config.a_ris()?)
}

pub fn fisher_information<T: Real>(
    theta: Angle<T>,
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
    variant: BoundVariant,
) -> Result<T> {
    match variant {
        BoundVariant::Exact => fi_exact(theta, profile, config, model),
        BoundVariant::ClosedForm => fi_closed(theta, profile, config, model),
    }
}

/// `1/J`, or `+∞` when `J = 0`.
pub fn crb_from_fi<T: Real>(fi: T) -> T {
    if fi > T::zero() {
        T::one() / fi
    } else {
        T::infinity()
    }
}

pub fn crb<T: Real>(
    theta: Angle<T>,
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
    variant: BoundVariant,
) -> Result<T> {
    Ok(crb_from_fi(fisher_information(theta, profile, config, model, variant)?))
}

/// `√CRB`.
pub fn peb<T: Real>(
    theta: Angle<T>,
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
    variant: BoundVariant,
) -> Result<T> {
    Ok(crb(theta, profile, config, model, variant)?.sqrt())
}

/// FI/CRB/PEB over an angle grid.
#[derive(Debug, Clone)]
pub struct BoundReport<T> {
    pub grid: AngleGrid<T>,
    pub fi_exact: Vec<T>,
    pub fi_closed: Vec<T>,
    pub crb_exact: Vec<T>,
    pub crb_closed: Vec<T>,
    pub peb_exact: Vec<T>,
    pub peb_closed: Vec<T>,
    pub kappa: Vec<T>,
}

/// Evaluates both FI variants at every grid angle. Grid angles at `±π/2`
/// get a closed-form FI of zero (`κ = 0`) rather than an error.
pub fn bound_report<T: Real>(
    grid: &AngleGrid<T>,
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
) -> Result<BoundReport<T>> {
    let rows: Vec<(T, T, T)> = grid
        .values()
        .par_iter()
        .map(|&th| {
            let ex = fi_exact(th, profile, config, model)?;
            let cl = match fi_closed(th, profile, config, model) {
                Err(Error::EndfireAngle(_)) => T::zero(),
                other => other?,
            };
            Ok((ex, cl, kappa(th, config.n)))
        })
        .collect::<Result<_>>()?;
    let fi_exact: Vec<T> = rows.iter().map(|r| r.0).collect();
    let fi_closed: Vec<T> = rows.iter().map(|r| r.1).collect();
    let crb_exact: Vec<T> = fi_exact.iter().map(|&j| crb_from_fi(j)).collect();
    let crb_closed: Vec<T> = fi_closed.iter().map(|&j| crb_from_fi(j)).collect();
    Ok(BoundReport {
        grid: grid.clone(),
        peb_exact: crb_exact.iter().map(|c| c.sqrt()).collect(),
        peb_closed: crb_closed.iter().map(|c| c.sqrt()).collect(),
        fi_exact,
        fi_closed,
        crb_exact,
        crb_closed,
        kappa: rows.iter().map(|r| r.2).collect(),
    })
}

/// Rectangular grid of candidate target positions, meters.
///
/// Cell centres are `nx × ny` points spaced uniformly over the closed
/// ranges; `peb` is filled row-major (`y` outer, `x` inner).
#[derive(Debug, Clone)]
pub struct PositionGrid<T> {
    pub x_range: (T, T),
    pub y_range: (T, T),
    pub nx: usize,
    pub ny: usize,
    pub peb: Vec<T>,
}

impl<T: Real> PositionGrid<T> {
    pub fn new(x_range: (T, T), y_range: (T, T), nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument("position grid needs at least 2×2 cells".into()));
        }
        if !(x_range.1 > x_range.0) || !(y_range.1 > y_range.0) {
            return Err(Error::InvalidArgument("position grid ranges must be increasing".into()));
        }
        Ok(Self {
            x_range,
            y_range,
            nx,
            ny,
            peb: Vec::new(),
        })
    }

    fn axis(range: (T, T), n: usize, i: usize) -> T {
        range.0 + (range.1 - range.0) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)
    }

    pub fn x(&self, i: usize) -> T {
        Self::axis(self.x_range, self.nx, i)
    }

    pub fn y(&self, j: usize) -> T {
        Self::axis(self.y_range, self.ny, j)
    }

    /// Cell position for a flat row-major index.
    pub fn position(&self, idx: usize) -> [T; 2] {
        [self.x(idx % self.nx), self.y(idx / self.nx)]
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Index, position and PEB of the smallest finite PEB.
    pub fn finite_minimum(&self) -> Option<(usize, [T; 2], T)> {
        self.peb
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_finite())
            .fold(None, |best: Option<(usize, T)>, (i, &p)| match best {
                Some((_, b)) if b <= p => best,
                _ => Some((i, p)),
            })
            .map(|(i, p)| (i, self.position(i), p))
    }
}

/// PEB of one cell: `√trace(pinv(J(θ)·t tᵀ))` with `t = ∂θ/∂ξ`.
///
/// For a rank-one FIM `c·t tᵀ` the pseudo-inverse is `t tᵀ/(c‖t‖⁴)`, whose
/// trace is `1/(c‖t‖²) = r²/J(θ)`.
fn cell_peb<T: Real>(
    xi: [T; 2],
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
    variant: BoundVariant,
) -> Result<T> {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    if r2 == T::zero() {
        return Err(Error::OriginPosition);
    }
    let theta = Angle::from_radians(xi[1].atan2(xi[0]));
    if theta.radians().abs() >= T::FRAC_PI_2() {
        return Ok(T::infinity());
    }
    let a = attenuation_at_range(r2.sqrt(), config.carrier_hz);
    let j_theta = match variant {
        BoundVariant::Exact => fi_exact_with(theta, profile, config, model, a)?,
        BoundVariant::ClosedForm => fi_closed_with(theta, profile, config, model, a)?,
    };
    if !(j_theta > T::zero()) {
        return Ok(T::infinity());
    }
    let t = [-xi[1] / r2, xi[0] / r2];
    let t2 = t[0] * t[0] + t[1] * t[1];
    Ok((T::one() / (j_theta * t2)).sqrt())
}

/// Fills `grid.peb` with the position error bound at every cell.
///
/// The hypothesised cell sets both the angle and the range used for
/// `a_RIS`. Cells on the array axis (`θ = ±90°`) or with zero FI get `+∞`.
pub fn position_peb_map<T: Real>(
    grid: &PositionGrid<T>,
    profile: &RisProfile<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
    variant: BoundVariant,
) -> Result<PositionGrid<T>> {
    let peb = (0..grid.cells())
        .into_par_iter()
        .map(|i| cell_peb(grid.position(i), profile, config, model, variant))
        .collect::<Result<Vec<_>>>()?;
    Ok(PositionGrid { peb, ..grid.clone() })
}
