use thiserror::Error;

/// Failures surfaced by the library.
///
/// Feasibility variants name the violated condition so callers (the CLI in
/// particular) can report it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("angle {0} rad is at ±π/2 where cos θ = 0")]
    EndfireAngle(f64),

    #[error("position at the origin has no defined angle")]
    OriginPosition,

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("infeasible: M ≥ 2K violated (M = {m}, K = {k})")]
    TooFewElements { m: usize, k: usize },

    #[error("infeasible: nulling kernels are rank deficient, cond(V) = {cond:.3e} exceeds {limit:.1e} (aliased or duplicated window samples)")]
    RankDeficient { cond: f64, limit: f64 },

    #[error("infeasible: decoy angle {theta_fake_deg:.2}° lies inside the nulling window, w ∉ span(V) precondition violated")]
    DecoyInWindow { theta_fake_deg: f64 },

    #[error("infeasible: decoy kernel lies in span(V) (‖P_S w‖/‖w‖ = {ratio:.3e}), w ∉ span(V) precondition violated")]
    DecoyInSpan { ratio: f64 },

    #[error("pilot sequence not normalised: (1/T)‖s‖² = {0}")]
    UnnormalizedPilots(f64),

    #[error("FixedIncidence kernel convention requires the true angle")]
    MissingTrueAngle,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for the feasibility-precondition family.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::TooFewElements { .. }
                | Error::RankDeficient { .. }
                | Error::DecoyInWindow { .. }
                | Error::DecoyInSpan { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
