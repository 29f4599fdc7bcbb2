//! Half-wavelength ULA steering vectors and the angle types shared by the
//! rest of the crate.
//!
//! Angles are radians everywhere inside the library; degrees only appear at
//! configuration boundaries through [`Angle::from_degrees`] and
//! [`Angle::degrees`].

use crate::error::{Error, Result};
use crate::scalar::{cis, deg_to_rad, rad_to_deg, Cx, Real};

/// Azimuth angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle<T>(T);

impl<T: Real> Angle<T> {
    /// Wraps a finite radian value.
    pub fn new(radians: T) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite angle {radians}")));
        }
        Ok(Self(radians))
    }

    /// Unchecked constructor for values already known to be finite.
    pub const fn from_radians(radians: T) -> Self {
        Self(radians)
    }

    pub fn from_degrees(deg: T) -> Self {
        Self(deg_to_rad(deg))
    }

    pub fn radians(self) -> T {
        self.0
    }

    pub fn degrees(self) -> T {
        rad_to_deg(self.0)
    }

    pub fn sin(self) -> T {
        self.0.sin()
    }

    pub fn cos(self) -> T {
        self.0.cos()
    }

    /// Rejects `|θ| = π/2` (and beyond), where `cos θ` vanishes.
    pub fn require_off_endfire(self) -> Result<Self> {
        if self.0.abs() >= T::FRAC_PI_2() {
            Err(Error::EndfireAngle(self.0.to_f64_lossy()))
        } else {
            Ok(self)
        }
    }
}

impl<T: Real> std::ops::Add for Angle<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl<T: Real> std::ops::Sub for Angle<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl<T: Real> std::ops::Neg for Angle<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// `α_L(θ)`: entries `exp(j·π·m·sin θ)`, `m = 0..L-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector<T>(Vec<Cx<T>>);

impl<T: Real> SteeringVector<T> {
    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Cx<T>> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<T> std::ops::Index<usize> for SteeringVector<T> {
    type Output = Cx<T>;
    fn index(&self, i: usize) -> &Cx<T> {
        &self.0[i]
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 {
        Err(Error::InvalidArgument("array length must be positive".into()))
    } else {
        Ok(())
    }
}

/// Steering vector of an `len`-element half-wavelength ULA.
pub fn steering<T: Real>(len: usize, theta: Angle<T>) -> Result<SteeringVector<T>> {
    check_len(len)?;
    Ok(SteeringVector(steering_raw(len, theta.sin())))
}

/// Steering entries for a given `sin θ`; also used for kernel vectors.
pub(crate) fn steering_raw<T: Real>(len: usize, sin_theta: T) -> Vec<Cx<T>> {
    let step = T::PI() * sin_theta;
    (0..len).map(|m| cis(step * T::from_usize_lossy(m))).collect()
}

/// `∂α_L(θ)/∂θ`: entries `j·π·m·cos θ·exp(j·π·m·sin θ)`.
pub fn steering_derivative<T: Real>(len: usize, theta: Angle<T>) -> Result<Vec<Cx<T>>> {
    check_len(len)?;
    let pc = T::PI() * theta.cos();
    Ok(steering_raw(len, theta.sin())
        .into_iter()
        .enumerate()
        .map(|(m, a)| a * Cx::new(T::zero(), pc * T::from_usize_lossy(m)))
        .collect())
}

/// Azimuth of a planar point, `atan2(p_y, p_x)`.
pub fn atan2_angle<T: Real>(p: [T; 2]) -> Result<Angle<T>> {
    if p[0] == T::zero() && p[1] == T::zero() {
        return Err(Error::OriginPosition);
    }
    Ok(Angle(p[1].atan2(p[0])))
}

/// Sorted set of sweep angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid<T> {
    values: Vec<Angle<T>>,
}

impl<T: Real> AngleGrid<T> {
    /// `count` points spaced uniformly over `[start, stop]`, endpoints
    /// included. A single point requires `start == stop`.
    pub fn linspace(start: Angle<T>, stop: Angle<T>, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::Empty("angle grid")),
            1 if start == stop => Ok(Self { values: vec![start] }),
            1 => Err(Error::InvalidArgument("a single-point grid needs start == stop".into())),
            _ if !(stop.radians() > start.radians()) => {
                Err(Error::InvalidArgument("grid stop must exceed start".into()))
            }
            _ => {
                let span = stop.radians() - start.radians();
                let den = T::from_usize_lossy(count - 1);
                let values = (0..count)
                    .map(|i| Angle(start.radians() + span * T::from_usize_lossy(i) / den))
                    .collect();
                Ok(Self { values })
            }
        }
    }

    /// Uniform grid in degrees, stepping `step_deg` from `start_deg` and
    /// including `stop_deg` when it falls on the lattice.
    pub fn degrees_step(start_deg: T, stop_deg: T, step_deg: T) -> Result<Self> {
        if !(step_deg > T::zero()) {
            return Err(Error::InvalidArgument("grid step must be positive".into()));
        }
        let n = ((stop_deg - start_deg) / step_deg + T::lit(1e-9))
            .floor()
            .to_usize()
            .ok_or_else(|| Error::InvalidArgument("grid stop must not precede start".into()))?;
        let values: Vec<_> = (0..=n)
            .map(|i| Angle::from_degrees(start_deg + step_deg * T::from_usize_lossy(i)))
            .collect();
        Self::from_angles(values)
    }

    /// Wraps explicit angles; they must be strictly increasing.
    pub fn from_angles(values: Vec<Angle<T>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("angle grid"));
        }
        if values.windows(2).any(|w| !(w[1].radians() > w[0].radians())) {
            return Err(Error::InvalidArgument("grid angles must be strictly increasing".into()));
        }
        Ok(Self { values })
    }

    /// Default ML estimator grid: 0.1° over [−89°, 89°].
    pub fn estimator_default() -> Self {
        Self::degrees_step(T::lit(-89.0), T::lit(89.0), T::lit(0.1)).expect("static grid")
    }

    /// Default decoy sweep grid: 1° over [−89°, 89°].
    pub fn decoy_default() -> Self {
        Self::degrees_step(T::lit(-89.0), T::lit(89.0), T::one()).expect("static grid")
    }

    pub fn values(&self) -> &[Angle<T>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Angle<T>> + '_ {
        self.values.iter().copied()
    }

    /// Keeps the angles for which `keep` holds.
    pub fn filtered(&self, mut keep: impl FnMut(Angle<T>) -> bool) -> Result<Self> {
        Self::from_angles(self.values.iter().copied().filter(|a| keep(*a)).collect())
    }
}
