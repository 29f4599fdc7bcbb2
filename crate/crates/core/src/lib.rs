//! RIS phase-profile design for spoofing a monostatic radar.
//!
//! A surface of `M` unit-modulus elements coats the target. Its profile is
//! chosen so that the radar's echo is nulled across a window around the true
//! angle of arrival while a decoy echo is synthesised at another angle. The
//! crate covers the kernel model, the synthesis itself, Fisher-information
//! bounds at the radar, deception criteria and a Monte-Carlo harness for the
//! radar's maximum-likelihood estimator.
//!
//! All numerics are generic over [`Real`] (`f32`, `f64`); the `…F64` aliases
//! below fix the common double-precision case.
//!
//! ```
//! use ris_decoy::{solve_p3, SceneConfigF64, SolverParamsF64};
//!
//! let scene = SceneConfigF64::reference();
//! let basis = scene.basis().unwrap();
//! let sol = solve_p3(&basis, &SolverParamsF64::default()).unwrap();
//! assert!(sol.converged);
//! ```

// `!(x > 0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod deception;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod radar_ml;
pub mod ris_kernel;
pub mod scalar;
pub mod solver;

pub use bounds::{
    bound_report, crb, fi_closed, fi_exact, kappa, peb, position_peb_map, BoundReport, BoundVariant, PositionGrid,
};
pub use channel::{
    attenuation, cascaded_channel, look_channel, mrt_precoder, synthesize_observation, CascadedChannel, Observation,
    SceneConfig,
};
pub use deception::{
    deception_report, eta, kappa_min, leakage_worst, leakage_worst_dense, realized_rho, rho_band_ok, rho_pointwise_ok,
    rho_ub_sweep, rho_upper_bound, shortlist_decoys, DeceptionReport, DecoyScore, Shortlist, Verdict,
};
pub use error::{Error, Result};
pub use geometry::{atan2_angle, steering, steering_derivative, Angle, AngleGrid, SteeringVector};
pub use radar_ml::{
    ml_spectrum, run_trials, sample_covariance, Classification, EstimatorModel, MlSpectrum, TrialAggregate,
    TrialConfig, TrialResult,
};
pub use ris_kernel::{
    beta, beta_bar, kernel_vector, KernelBasis, KernelConvention, KernelModel, KernelVector, NullingWindow, RisProfile,
};
pub use scalar::{Cx, Real};
pub use solver::{
    alternating_projections, objective_p1, objective_p2, solve_p3, zero_phase_element, SolveResult, SolverParams,
};

pub type AngleF64 = Angle<f64>;
pub type AngleGridF64 = AngleGrid<f64>;
pub type RisProfileF64 = RisProfile<f64>;
pub type KernelBasisF64 = KernelBasis<f64>;
pub type KernelModelF64 = KernelModel<f64>;
pub type NullingWindowF64 = NullingWindow<f64>;
pub type SceneConfigF64 = SceneConfig<f64>;
pub type SolverParamsF64 = SolverParams<f64>;
pub type SolveResultF64 = SolveResult<f64>;
pub type BoundReportF64 = BoundReport<f64>;
pub type PositionGridF64 = PositionGrid<f64>;
pub type DeceptionReportF64 = DeceptionReport<f64>;
pub type MlSpectrumF64 = MlSpectrum<f64>;
pub type TrialAggregateF64 = TrialAggregate<f64>;
pub type Complex64 = Cx<f64>;

pub type AngleF32 = Angle<f32>;
pub type RisProfileF32 = RisProfile<f32>;
pub type SceneConfigF32 = SceneConfig<f32>;
pub type SolverParamsF32 = SolverParams<f32>;
