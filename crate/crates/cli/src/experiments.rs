use rayon::prelude::*;
use ris_decoy::bounds::{kappa, position_peb_map};
use ris_decoy::deception::{kappa_min, realized_rho, rho_ub_sweep, shortlist_decoys};
use ris_decoy::radar_ml::{estimate_spectrum, noiseless_spectrum};
use ris_decoy::{
    atan2_angle, leakage_worst, run_trials, solve_p3, AngleF64, Classification, KernelBasisF64, KernelModelF64,
    RisProfileF64, SceneConfigF64, SolveResultF64, SolverParamsF64, TrialConfig,
};

use crate::error::{CliError, CliResult};
use crate::output::{angle, db_amplitude, db_power, num, Manifest, Table};
use crate::scenario::{Experiment, Scenario};

/// Everything an experiment needs, built once per run.
pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub scene: SceneConfigF64,
    pub model: KernelModelF64,
    pub basis: KernelBasisF64,
    pub params: SolverParamsF64,
    pub solution: Option<SolveResultF64>,
}

fn needs_solution(e: Experiment) -> bool {
    matches!(
        e,
        Experiment::Beampattern | Experiment::MlSpectrum | Experiment::PebMap | Experiment::Trials
    )
}

impl<'a> Context<'a> {
    pub fn new(scenario: &'a Scenario, experiments: &[Experiment]) -> CliResult<Self> {
        let scene = scenario.scene_config()?;
        let model = scene.kernel_model().map_err(CliError::from_config)?;
        let basis = scene.basis().map_err(CliError::from_config)?;
        let params = scenario.solver_params();
        let solution = if experiments.iter().any(|&e| needs_solution(e)) {
            let sol = solve_p3(&basis, &params)?;
            if !sol
                .profile
                .as_slice()
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite())
            {
                return Err(CliError::Numerical("solver returned a non-finite profile".into()));
            }
            Some(sol)
        } else {
            None
        };
        Ok(Self {
            scenario,
            scene,
            model,
            basis,
            params,
            solution,
        })
    }

    fn optimized(&self) -> &RisProfileF64 {
        &self
            .solution
            .as_ref()
            .expect("solution computed for this experiment")
            .profile
    }

    fn uniform(&self) -> RisProfileF64 {
        RisProfileF64::uniform(self.scene.m)
    }

    pub fn describe_solution(&self, manifest: &mut Manifest) -> CliResult<()> {
        let Some(sol) = &self.solution else { return Ok(()) };
        manifest.set("solver.iterations", sol.iterations);
        manifest.set("solver.polish_iterations", sol.polish_iterations);
        manifest.set("solver.converged", sol.converged);
        manifest.set("solver.residual", num(sol.residual));
        manifest.set("solver.decoy_gain", num(sol.decoy_gain));
        let leak = leakage_worst(&sol.profile, self.basis.window(), &self.model)?;
        manifest.set("solver.leakage_worst", num(leak));
        manifest.set("basis.condition_number", num(self.basis.condition_number()));
        Ok(())
    }

    pub fn run(&self, e: Experiment, manifest: &mut Manifest) -> CliResult<Table> {
        match e {
            Experiment::Beampattern => self.beampattern(),
            Experiment::MlSpectrum => self.ml_spectrum(),
            Experiment::PebMap => self.peb_map(),
            Experiment::LeakageRatio => self.leakage_ratio(manifest),
            Experiment::RhoUbSweep => self.rho_ub_sweep(),
            Experiment::Shortlist => self.shortlist(),
            Experiment::Trials => self.trials(manifest),
            Experiment::All => unreachable!("expanded before dispatch"),
        }
    }

    /// `|β̄(θ)|` of both profiles in dB relative to `M`.
    fn beampattern(&self) -> CliResult<Table> {
        let grid = self.scenario.beampattern_grid()?;
        let m = self.scene.m as f64;
        let (uni, opt) = (self.uniform(), self.optimized());
        let mut t = Table::new([
            "angle_deg",
            "uniform_normalized_gain_db",
            "optimized_normalized_gain_db",
        ]);
        for th in grid.iter() {
            let u = self.model.beta_bar(th, &uni)?.norm();
            let o = self.model.beta_bar(th, opt)?.norm();
            t.row(&[angle(th.degrees()), num(db_amplitude(u, m)), num(db_amplitude(o, m))]);
        }
        Ok(t)
    }

    /// Noiseless and one noisy spectrum of the optimized profile, each in dB
    /// relative to its own peak.
    fn ml_spectrum(&self) -> CliResult<Table> {
        let grid = self.scenario.estimator_grid()?;
        let est = self.scenario.estimator();
        let opt = self.optimized();
        let quiet = noiseless_spectrum(est, &self.scene, opt, &self.model, &grid)?;
        let noisy = estimate_spectrum(est, &self.scene, opt, &self.model, &grid, self.scene.rng_seed, 0)?;
        let mut t = Table::new(["angle_deg", "noiseless_spectrum_db", "noisy_spectrum_db"]);
        for (i, th) in grid.iter().enumerate() {
            t.row(&[
                angle(th.degrees()),
                num(db_power(quiet.values[i], quiet.peak_value)),
                num(db_power(noisy.values[i], noisy.peak_value)),
            ]);
        }
        Ok(t)
    }

    fn peb_map(&self) -> CliResult<Table> {
        let grid = self.scenario.position_grid()?;
        let variant = self.scenario.bound_variant();
        let before = position_peb_map(&grid, &self.uniform(), &self.scene, &self.model, variant)?;
        let after = position_peb_map(&grid, self.optimized(), &self.scene, &self.model, variant)?;
        let mut t = Table::new(["x_m", "y_m", "angle_deg", "peb_uniform_m", "peb_optimized_m"]);
        for i in 0..grid.cells() {
            let p = grid.position(i);
            let th = atan2_angle(p)?;
            t.row(&[
                num(p[0]),
                num(p[1]),
                angle(th.degrees()),
                num(before.peb[i]),
                num(after.peb[i]),
            ]);
        }
        Ok(t)
    }

    /// Re-solves for every admissible decoy angle and reports
    /// `L_true/|β̄(θ_fake)|` next to the band thresholds `√(κ(θ_fake)/(ρ κ_min))`.
    fn leakage_ratio(&self, manifest: &mut Manifest) -> CliResult<Table> {
        let grid = self.scenario.decoy_grid()?;
        let rhos = &self.scenario.sweeps.rho_levels;
        let window = self.basis.window();
        let kmin = kappa_min(window, self.scene.n)?;
        let theta_true = self.scene.theta_true()?;
        let candidates: Vec<AngleF64> = grid.iter().filter(|&th| !window.contains(th)).collect();
        let rows: Vec<Option<Vec<String>>> = candidates
            .par_iter()
            .map(|&th| {
                let basis = match self.basis.with_decoy(th) {
                    Ok(b) => b,
                    Err(e) if e.is_infeasible() => return Ok(None),
                    Err(e) => return Err(e),
                };
                let sol = solve_p3(&basis, &self.params)?;
                let leak = leakage_worst(&sol.profile, window, &self.model)?;
                let bf = self.model.beta_bar(th, &sol.profile)?.norm();
                let rho = realized_rho(&sol.profile, theta_true, th, &self.scene, &self.model)?;
                let mut row = vec![
                    angle(th.degrees()),
                    num(leak),
                    num(bf),
                    num(leak / bf),
                    num(rho),
                    sol.converged.to_string(),
                ];
                let kf = kappa(th, self.scene.n);
                row.extend(rhos.iter().map(|r| num((kf / (r * kmin)).sqrt())));
                Ok(Some(row))
            })
            .collect::<ris_decoy::Result<_>>()?;
        let mut header: Vec<String> = [
            "theta_fake_deg",
            "leakage_worst",
            "decoy_response",
            "leakage_ratio",
            "realized_rho",
            "converged",
        ]
        .map(String::from)
        .into();
        header.extend(rhos.iter().map(|r| format!("threshold_rho_{r}")));
        let mut t = Table::new(header);
        let mut skipped = 0;
        for row in rows {
            match row {
                Some(r) => t.row(&r),
                None => skipped += 1,
            }
        }
        manifest.set("leakage_ratio.skipped_in_span", skipped);
        Ok(t)
    }

    fn rho_ub_sweep(&self) -> CliResult<Table> {
        let grid = self.scenario.decoy_grid()?;
        let caps = &self.scenario.sweeps.leakage_caps;
        let sweep = rho_ub_sweep(&grid, caps, &self.scene, &self.basis)?;
        let mut header: Vec<String> = ["theta_deg", "in_window", "eta", "phi"].map(String::from).into();
        header.extend(caps.iter().map(|c| format!("rho_ub_cap_{c}")));
        let mut t = Table::new(header);
        for (i, th) in grid.iter().enumerate() {
            let s = &sweep[0][i];
            let mut row = vec![
                angle(th.degrees()),
                self.basis.window().contains(th).to_string(),
                num(s.eta),
                num(s.phi),
            ];
            row.extend(sweep.iter().map(|per_cap| num(per_cap[i].rho_ub)));
            t.row(&row);
        }
        Ok(t)
    }

    fn shortlist(&self) -> CliResult<Table> {
        let sw = &self.scenario.sweeps;
        let list = shortlist_decoys(
            &self.scenario.decoy_grid()?,
            &self.scene,
            sw.shortlist_cap,
            sw.shortlist_size,
            &self.params,
        )?;
        let mut t = Table::new([
            "rank",
            "bound_rank",
            "theta_deg",
            "eta",
            "rho_ub",
            "realized_rho",
            "decoy_gain",
            "converged",
        ]);
        for (rank, c) in list.by_realized.iter().enumerate() {
            let bound_rank = list
                .by_bound
                .iter()
                .position(|b| b.score.theta == c.score.theta)
                .expect("solved candidates come from the ranked list");
            t.row(&[
                (rank + 1).to_string(),
                (bound_rank + 1).to_string(),
                angle(c.score.theta.degrees()),
                num(c.score.eta),
                num(c.score.rho_ub),
                num(c.realized_rho.unwrap_or(f64::NAN)),
                num(c.decoy_gain.unwrap_or(f64::NAN)),
                c.converged.unwrap_or(false).to_string(),
            ]);
        }
        Ok(t)
    }

    fn trials(&self, manifest: &mut Manifest) -> CliResult<Table> {
        let sw = &self.scenario.sweeps;
        let cfg = TrialConfig {
            n_trials: sw.trials,
            grid: self.scenario.estimator_grid()?,
            tolerance: AngleF64::from_degrees(sw.tolerance_deg),
            estimator: self.scenario.estimator(),
        };
        let agg = run_trials(&self.scene, self.optimized(), &self.model, &cfg)?;
        manifest.set("trials.count", agg.n_trials);
        manifest.set("trials.decoyed_rate", num(agg.decoyed_rate));
        manifest.set("trials.revealed_rate", num(agg.revealed_rate));
        manifest.set("trials.elsewhere_rate", num(agg.elsewhere_rate));
        manifest.set("trials.rmse_to_fake_deg", num(agg.rmse_to_fake.to_degrees()));
        manifest.set("trials.rmse_to_true_deg", num(agg.rmse_to_true.to_degrees()));
        let mut t = Table::new(["trial", "seed", "stream", "estimate_deg", "classification"]);
        for (i, r) in agg.trials.iter().enumerate() {
            let class = match r.classified {
                Classification::Decoyed => "decoyed",
                Classification::Revealed => "revealed",
                Classification::Elsewhere => "elsewhere",
            };
            t.row(&[
                i.to_string(),
                r.seed.to_string(),
                r.stream.to_string(),
                angle(r.estimated_theta.degrees()),
                class.to_string(),
            ]);
        }
        Ok(t)
    }
}
