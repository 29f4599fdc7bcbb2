//! Scenario files: TOML with `[scene]`, `[solver]`, `[sweeps]` and `[output]`.
//! Angles are in degrees, powers in dBm, distances in meters. Missing keys
//! take the reference-scene defaults, except that an absent `theta_true_deg`
//! means the true angle is derived from `ris_position_m`. Unknown keys are
//! rejected.

use std::fmt;
use std::str::FromStr;

use ris_decoy::scalar::dbm_to_watts;
use ris_decoy::{
    AngleF64, AngleGridF64, BoundVariant, EstimatorModel, KernelConvention, PositionGridF64, SceneConfigF64,
    SolverParamsF64,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: String,
    pub scene: SceneSection,
    pub solver: SolverSection,
    pub sweeps: SweepsSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSection {
    pub carrier_hz: f64,
    pub bs_antennas: usize,
    pub ris_elements: usize,
    pub ris_position_m: [f64; 2],
    pub pilots: usize,
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub theta_fake_deg: f64,
    /// Overrides the angle derived from `ris_position_m`; absent means derived.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_true_deg: Option<f64>,
    pub window_half_width_deg: f64,
    pub window_samples: usize,
    pub kernel: KernelKind,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    FixedIncidence,
    SpecularPlusPi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub gamma: f64,
    pub max_iterations: usize,
    pub eps_null: f64,
    pub eps_reg: f64,
    pub polish_iterations: usize,
}

/// Inclusive `start..=stop` in steps of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// `count` points spanning `start..=stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    ClosedForm,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Scanning,
    PointReflector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepsSection {
    pub beampattern_deg: StepGrid,
    pub estimator_deg: StepGrid,
    pub decoy_deg: StepGrid,
    pub peb_x_m: CountGrid,
    pub peb_y_m: CountGrid,
    pub peb_bound: BoundKind,
    pub leakage_caps: Vec<f64>,
    pub rho_levels: Vec<f64>,
    pub trials: usize,
    pub estimator: EstimatorKind,
    pub tolerance_deg: f64,
    pub shortlist_size: usize,
    pub shortlist_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub experiments: Vec<Experiment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Beampattern,
    MlSpectrum,
    PebMap,
    LeakageRatio,
    RhoUbSweep,
    Shortlist,
    Trials,
    All,
}

impl Experiment {
    pub const EACH: [Experiment; 7] = [
        Experiment::Beampattern,
        Experiment::MlSpectrum,
        Experiment::PebMap,
        Experiment::LeakageRatio,
        Experiment::RhoUbSweep,
        Experiment::Shortlist,
        Experiment::Trials,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Beampattern => "beampattern",
            Experiment::MlSpectrum => "ml_spectrum",
            Experiment::PebMap => "peb_map",
            Experiment::LeakageRatio => "leakage_ratio",
            Experiment::RhoUbSweep => "rho_ub_sweep",
            Experiment::Shortlist => "shortlist",
            Experiment::Trials => "trials",
            Experiment::All => "all",
        }
    }

    /// Expands `All` and drops duplicates, keeping the canonical order.
    pub fn expand(list: &[Experiment]) -> Vec<Experiment> {
        let want = |e: Experiment| list.contains(&Experiment::All) || list.contains(&e);
        Self::EACH.into_iter().filter(|&e| want(e)).collect()
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = String;

    /// Case-insensitive; `-` and `_` are ignored, so `MlSpectrum`,
    /// `ml-spectrum` and `ml_spectrum` are the same.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .collect::<String>()
            .to_lowercase();
        Experiment::EACH
            .into_iter()
            .chain([Experiment::All])
            .find(|e| e.as_str().replace('_', "") == key)
            .ok_or_else(|| {
                format!(
                    "unknown experiment `{s}`; expected one of beampattern, ml_spectrum, peb_map, leakage_ratio, \
                     rho_ub_sweep, shortlist, trials, all, none"
                )
            })
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "unnamed".into(),
            scene: SceneSection::default(),
            solver: SolverSection::default(),
            sweeps: SweepsSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl Default for SceneSection {
    fn default() -> Self {
        Self {
            carrier_hz: 20e9,
            bs_antennas: 16,
            ris_elements: 32,
            ris_position_m: [48.0, 17.0],
            pilots: 50,
            tx_power_dbm: 20.0,
            noise_power_dbm: -80.0,
            theta_fake_deg: -48.0,
            theta_true_deg: None,
            window_half_width_deg: 3.0,
            window_samples: 10,
            kernel: KernelKind::FixedIncidence,
            seed: 0,
        }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        let p = SolverParamsF64::default();
        Self {
            gamma: p.gamma,
            max_iterations: p.i_max,
            eps_null: p.eps_null,
            eps_reg: p.eps_reg,
            polish_iterations: p.polish_iters,
        }
    }
}

impl Default for SweepsSection {
    fn default() -> Self {
        Self {
            beampattern_deg: StepGrid {
                start: -90.0,
                stop: 90.0,
                step: 0.1,
            },
            estimator_deg: StepGrid {
                start: -89.0,
                stop: 89.0,
                step: 0.1,
            },
            decoy_deg: StepGrid {
                start: -89.0,
                stop: 89.0,
                step: 1.0,
            },
            peb_x_m: CountGrid {
                start: 0.0,
                stop: 100.0,
                count: 200,
            },
            peb_y_m: CountGrid {
                start: -80.0,
                stop: 80.0,
                count: 200,
            },
            peb_bound: BoundKind::ClosedForm,
            leakage_caps: vec![0.1, 1.0, 10.0],
            rho_levels: vec![2.0, 5.0, 10.0],
            trials: 500,
            estimator: EstimatorKind::Scanning,
            tolerance_deg: 1.0,
            shortlist_size: 5,
            shortlist_cap: 1.0,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            experiments: vec![Experiment::All],
        }
    }
}

/// The part of a scenario that determines the numbers in every output.
#[derive(Serialize)]
struct Physics<'a> {
    scene: &'a SceneSection,
    solver: &'a SolverSection,
    sweeps: &'a SweepsSection,
}

fn schema<E: fmt::Display>(e: E) -> CliError {
    CliError::Schema(e.to_string())
}

impl Scenario {
    /// Parses and schema-checks a scenario.
    pub fn parse(text: &str) -> CliResult<Self> {
        let s: Scenario = toml::from_str(text).map_err(schema)?;
        s.check()?;
        Ok(s)
    }

    /// Canonical TOML: every key present, fixed order.
    pub fn to_canonical(&self) -> CliResult<String> {
        toml::to_string(self).map_err(schema)
    }

    /// SHA-256 of the canonical `[scene]`, `[solver]` and `[sweeps]`; the
    /// name and `[output]` do not affect any number and are excluded.
    pub fn config_hash(&self) -> CliResult<String> {
        let body = toml::to_string(&Physics {
            scene: &self.scene,
            solver: &self.solver,
            sweeps: &self.sweeps,
        })
        .map_err(schema)?;
        Ok(hex::encode(Sha256::digest(body.as_bytes())))
    }

    /// Range and consistency checks that need no basis construction.
    pub fn check(&self) -> CliResult<()> {
        if self.scene.seed > i64::MAX as u64 {
            return Err(CliError::Schema(
                "scene.seed must fit in a signed 64-bit integer".into(),
            ));
        }
        self.scene_config()?.validate().map_err(CliError::from_config)?;
        self.solver_params().validate().map_err(CliError::from_config)?;
        let sw = &self.sweeps;
        for (name, g) in [
            ("beampattern_deg", sw.beampattern_deg),
            ("estimator_deg", sw.estimator_deg),
            ("decoy_deg", sw.decoy_deg),
        ] {
            step_grid(g).map_err(|e| CliError::Schema(format!("sweeps.{name}: {e}")))?;
        }
        self.position_grid()?;
        positive_list("leakage_caps", &sw.leakage_caps, 0.0)?;
        if sw.rho_levels.iter().any(|r| !(r.is_finite() && *r >= 1.0)) {
            return Err(CliError::Schema(
                "sweeps.rho_levels: every ρ must be finite and ≥ 1".into(),
            ));
        }
        if sw.trials == 0 {
            return Err(CliError::Schema("sweeps.trials must be at least 1".into()));
        }
        if !(sw.tolerance_deg > 0.0 && sw.tolerance_deg.is_finite()) {
            return Err(CliError::Schema("sweeps.tolerance_deg must be positive".into()));
        }
        if sw.shortlist_size == 0 {
            return Err(CliError::Schema("sweeps.shortlist_size must be at least 1".into()));
        }
        if !(sw.shortlist_cap > 0.0 && sw.shortlist_cap.is_finite()) {
            return Err(CliError::Schema("sweeps.shortlist_cap must be positive".into()));
        }
        if self.output.dir.is_empty() {
            return Err(CliError::Schema("output.dir must not be empty".into()));
        }
        Ok(())
    }

    pub fn scene_config(&self) -> CliResult<SceneConfigF64> {
        let s = &self.scene;
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Schema(format!("scene.{what} must be finite")))
            }
        };
        Ok(SceneConfigF64 {
            carrier_hz: finite(s.carrier_hz, "carrier_hz")?,
            n: s.bs_antennas,
            m: s.ris_elements,
            p_ris: [
                finite(s.ris_position_m[0], "ris_position_m")?,
                finite(s.ris_position_m[1], "ris_position_m")?,
            ],
            t: s.pilots,
            p_tx: dbm_to_watts(finite(s.tx_power_dbm, "tx_power_dbm")?),
            sigma2: dbm_to_watts(finite(s.noise_power_dbm, "noise_power_dbm")?),
            theta_fake: AngleF64::from_degrees(finite(s.theta_fake_deg, "theta_fake_deg")?),
            theta_true_pinned: s
                .theta_true_deg
                .map(|d| finite(d, "theta_true_deg").map(AngleF64::from_degrees))
                .transpose()?,
            half_width: AngleF64::from_degrees(finite(s.window_half_width_deg, "window_half_width_deg")?),
            k: s.window_samples,
            convention: match s.kernel {
                KernelKind::FixedIncidence => KernelConvention::FixedIncidence,
                KernelKind::SpecularPlusPi => KernelConvention::SpecularPlusPi,
            },
            rng_seed: s.seed,
        })
    }

    pub fn solver_params(&self) -> SolverParamsF64 {
        let s = &self.solver;
        SolverParamsF64 {
            gamma: s.gamma,
            i_max: s.max_iterations,
            eps_null: s.eps_null,
            eps_reg: s.eps_reg,
            polish_iters: s.polish_iterations,
        }
    }

    pub fn beampattern_grid(&self) -> CliResult<AngleGridF64> {
        step_grid(self.sweeps.beampattern_deg).map_err(CliError::Schema)
    }

    pub fn estimator_grid(&self) -> CliResult<AngleGridF64> {
        step_grid(self.sweeps.estimator_deg).map_err(CliError::Schema)
    }

    pub fn decoy_grid(&self) -> CliResult<AngleGridF64> {
        step_grid(self.sweeps.decoy_deg).map_err(CliError::Schema)
    }

    /// Position grid, rejected if a cell sits exactly on the BS.
    pub fn position_grid(&self) -> CliResult<PositionGridF64> {
        let (x, y) = (self.sweeps.peb_x_m, self.sweeps.peb_y_m);
        let g = PositionGridF64::new((x.start, x.stop), (y.start, y.stop), x.count, y.count)
            .map_err(|e| CliError::Schema(format!("sweeps.peb_x_m/peb_y_m: {e}")))?;
        if (0..g.cells()).any(|i| g.position(i) == [0.0, 0.0]) {
            return Err(CliError::Schema(
                "sweeps.peb_x_m/peb_y_m: grid contains the origin".into(),
            ));
        }
        Ok(g)
    }

    pub fn bound_variant(&self) -> BoundVariant {
        match self.sweeps.peb_bound {
            BoundKind::ClosedForm => BoundVariant::ClosedForm,
            BoundKind::Exact => BoundVariant::Exact,
        }
    }

    pub fn estimator(&self) -> EstimatorModel {
        match self.sweeps.estimator {
            EstimatorKind::Scanning => EstimatorModel::Scanning,
            EstimatorKind::PointReflector => EstimatorModel::PointReflector,
        }
    }
}

fn step_grid(g: StepGrid) -> Result<AngleGridF64, String> {
    if !(g.start.is_finite() && g.stop.is_finite() && g.step > 0.0 && g.step.is_finite() && g.start <= g.stop) {
        return Err("need finite start ≤ stop and a positive step".into());
    }
    if g.start < -90.0 || g.stop > 90.0 {
        return Err("angles must lie in [-90, 90] degrees".into());
    }
    AngleGridF64::degrees_step(g.start, g.stop, g.step).map_err(|e| e.to_string())
}

fn positive_list(name: &str, v: &[f64], floor: f64) -> CliResult<()> {
    if v.iter().any(|x| !(x.is_finite() && *x > floor)) {
        return Err(CliError::Schema(format!(
            "sweeps.{name}: every entry must be positive and finite"
        )));
    }
    Ok(())
}
