//! Decoy synthesis under hard nulls.
//!
//! [`alternating_projections`] is the relaxed projection loop between the
//! unit-modulus set and `null(Vᴴ)`. On its own it stalls at a few tens of dB
//! of rejection for closely spaced nulls, so [`solve_p3`] follows it with a
//! phase-domain L-BFGS refinement of the regularised ratio
//! `|wᴴω|² / (ε + ‖Vᴴω‖²)` that stops on the same nulling residual.

use crate::bounds::fi_closed;
use crate::channel::SceneConfig;
use crate::error::{Error, Result};
use crate::geometry::Angle;
use crate::ris_kernel::{KernelBasis, KernelModel, NullingWindow, RisProfile};
use crate::scalar::{cis, dot_h, Cx, Real};

/// `exp(j∠x)`, with `0 ↦ 1`.
pub fn zero_phase_element<T: Real>(x: Cx<T>) -> Cx<T> {
    let r = x.norm();
    if r > T::zero() && r.is_finite() {
        x.unscale(r)
    } else if x.re.is_finite() && x.im.is_finite() {
        Cx::new(T::one(), T::zero())
    } else {
        x
    }
}

fn project_unit<T: Real>(x: &mut [Cx<T>]) {
    for z in x.iter_mut() {
        *z = zero_phase_element(*z);
    }
}

/// Knobs of the synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams<T> {
    /// Relaxation toward the decoy kernel, in (0, 1).
    pub gamma: T,
    /// Projection iterations.
    pub i_max: usize,
    /// Nulling tolerance relative to `M²`: stop once `‖Vᴴx‖² ≤ eps_null·M²`.
    pub eps_null: T,
    /// Regulariser ε of the ratio objectives.
    pub eps_reg: T,
    /// Refinement iterations after the projection loop; 0 disables it.
    pub polish_iters: usize,
}

impl<T: Real> Default for SolverParams<T> {
    fn default() -> Self {
        Self {
            gamma: T::lit(0.5),
            i_max: 500,
            eps_null: T::lit(1e-6),
            eps_reg: T::lit(1e-9),
            polish_iters: 2000,
        }
    }
}

impl<T: Real> SolverParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > T::zero() && self.gamma < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if self.i_max == 0 {
            return Err(Error::InvalidArgument("i_max must be at least 1".into()));
        }
        if !(self.eps_null > T::zero()) {
            return Err(Error::InvalidArgument("eps_null must be positive".into()));
        }
        if !(self.eps_reg > T::zero()) {
            return Err(Error::InvalidArgument("eps_reg must be positive".into()));
        }
        Ok(())
    }

    /// Absolute residual threshold for an `m`-element surface.
    pub fn threshold(&self, m: usize) -> T {
        let mm = T::from_usize_lossy(m);
        self.eps_null * mm * mm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Initial,
    Projection,
    Polish,
}

/// One recorded iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry<T> {
    pub iteration: usize,
    pub stage: Stage,
    /// `‖Vᴴx‖²` of the iterate.
    pub residual: T,
    /// `|wᴴx|`.
    pub decoy_gain: T,
    /// `‖Vᴴu‖²` right after the null-space projection (projection stage).
    pub projected_residual: Option<T>,
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub profile: RisProfile<T>,
    /// Projection iterations used.
    pub iterations: usize,
    /// Refinement iterations used.
    pub polish_iterations: usize,
    /// `‖Vᴴω★‖²`.
    pub residual: T,
    /// `|wᴴω★|`.
    pub decoy_gain: T,
    pub trace: Vec<TraceEntry<T>>,
    pub converged: bool,
}

fn check_finite<T: Real>(x: &[Cx<T>], what: &str) -> Result<()> {
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("non-finite {what}")))
    }
}

/// Outcome of the bare projection loop.
#[derive(Debug, Clone)]
pub struct ProjectionOutcome<T> {
    pub x: Vec<Cx<T>>,
    pub iterations: usize,
    pub converged: bool,
}

/// Relaxed alternating projections.
///
/// Starting from `x = Π_T(w)`, each iteration forms `u = (1−γ)x + γw`,
/// applies `Π_T`, projects onto `null(Vᴴ)`, applies `Π_T` again and stops once
/// `‖Vᴴx‖² ≤ eps_null·M²`. When `trace` is given every iterate is recorded.
pub fn alternating_projections<T: Real>(
    basis: &KernelBasis<T>,
    params: &SolverParams<T>,
    mut trace: Option<&mut Vec<TraceEntry<T>>>,
) -> Result<ProjectionOutcome<T>> {
    params.validate()?;
    let w = basis.w();
    let thr = params.threshold(basis.m());
    let mut x: Vec<Cx<T>> = w.iter().map(|&z| zero_phase_element(z)).collect();
    let r0 = basis.residual(&x);
    if let Some(t) = trace.as_deref_mut() {
        t.push(TraceEntry {
            iteration: 0,
            stage: Stage::Initial,
            residual: r0,
            decoy_gain: basis.decoy_response(&x).norm(),
            projected_residual: None,
        });
    }
    if r0 <= thr {
        return Ok(ProjectionOutcome {
            x,
            iterations: 0,
            converged: true,
        });
    }
    let one_minus = T::one() - params.gamma;
    let mut u = vec![Cx::new(T::zero(), T::zero()); basis.m()];
    for it in 1..=params.i_max {
        for ((ui, xi), wi) in u.iter_mut().zip(&x).zip(w) {
            *ui = zero_phase_element(xi.scale(one_minus) + wi.scale(params.gamma));
        }
        basis.project_in_place(&mut u);
        let projected = trace.as_ref().map(|_| basis.residual(&u));
        x.copy_from_slice(&u);
        project_unit(&mut x);
        check_finite(&x, "projection iterate")?;
        let r = basis.residual(&x);
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceEntry {
                iteration: it,
                stage: Stage::Projection,
                residual: r,
                decoy_gain: basis.decoy_response(&x).norm(),
                projected_residual: projected,
            });
        }
        if r <= thr {
            return Ok(ProjectionOutcome {
                x,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(ProjectionOutcome {
        x,
        iterations: params.i_max,
        converged: false,
    })
}

/// `−log|wᴴω|² + log(ε + ‖Vᴴω‖²)` and its gradient in the phases.
struct PhaseObjective<'a, T> {
    basis: &'a KernelBasis<T>,
    eps: T,
}

struct Eval<T> {
    value: T,
    grad: Vec<T>,
    residual: T,
}

impl<T: Real> PhaseObjective<'_, T> {
    fn eval(&self, phi: &[T]) -> Eval<T> {
        let om: Vec<Cx<T>> = phi.iter().map(|&p| cis(p)).collect();
        let a = dot_h(self.basis.w(), &om);
        let r = self.basis.window_responses(&om);
        let residual: T = r.iter().map(|z| z.norm_sqr()).sum();
        let num = a.norm_sqr();
        let den = self.eps + residual;
        let vr = self.basis.v().mul_vec(&r);
        let j = Cx::new(T::zero(), T::one());
        let two = T::lit(2.0);
        let grad = (0..om.len())
            .map(|m| {
                let jw = j * om[m];
                let d_num = two * (a.conj() * self.basis.w()[m].conj() * jw).re;
                let d_den = two * (vr[m].conj() * jw).re;
                -(d_num / num) + d_den / den
            })
            .collect();
        Eval {
            value: -num.ln() + den.ln(),
            grad,
            residual,
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Limited-memory BFGS with Armijo backtracking, stopping on the residual.
fn polish<T: Real>(
    basis: &KernelBasis<T>,
    start: &[Cx<T>],
    params: &SolverParams<T>,
    trace: &mut Vec<TraceEntry<T>>,
    first_iteration: usize,
) -> Result<(Vec<Cx<T>>, usize, bool)> {
    const MEMORY: usize = 8;
    let thr = params.threshold(basis.m());
    let obj = PhaseObjective {
        basis,
        eps: params.eps_reg,
    };
    let mut phi: Vec<T> = start.iter().map(|z| z.arg()).collect();
    let mut cur = obj.eval(&phi);
    let mut s_hist: Vec<Vec<T>> = Vec::new();
    let mut y_hist: Vec<Vec<T>> = Vec::new();
    let c1 = T::lit(1e-4);
    let min_step = T::lit(1e-20);

    for it in 0..params.polish_iters {
        if cur.residual <= thr {
            return Ok((phi.iter().map(|&p| cis(p)).collect(), it, true));
        }
        // two-loop recursion
        let mut q = cur.grad.clone();
        let mut alphas = Vec::with_capacity(s_hist.len());
        for (s, y) in s_hist.iter().zip(&y_hist).rev() {
            let a = dot(s, &q) / dot(y, s);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * *yi;
            }
            alphas.push(a);
        }
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            let scale = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= scale);
        }
        for ((s, y), a) in s_hist.iter().zip(&y_hist).zip(alphas.iter().rev()) {
            let b = dot(y, &q) / dot(y, s);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += *si * (*a - b);
            }
        }
        let mut d: Vec<T> = q.iter().map(|v| -*v).collect();
        let mut slope = dot(&d, &cur.grad);
        if !(slope < T::zero()) {
            d = cur.grad.iter().map(|v| -*v).collect();
            slope = dot(&d, &cur.grad);
            s_hist.clear();
            y_hist.clear();
        }

        let mut step = T::one();
        let (trial_phi, next) = loop {
            let p: Vec<T> = phi.iter().zip(&d).map(|(a, b)| *a + step * *b).collect();
            let e = obj.eval(&p);
            if e.value <= cur.value + c1 * step * slope || step < min_step {
                break (p, e);
            }
            step *= T::lit(0.5);
        };
        if !next.value.is_finite() {
            return Err(Error::Numerical("refinement objective diverged".into()));
        }
        let s: Vec<T> = trial_phi.iter().zip(&phi).map(|(a, b)| *a - *b).collect();
        let y: Vec<T> = next.grad.iter().zip(&cur.grad).map(|(a, b)| *a - *b).collect();
        if dot(&y, &s) > T::min_positive_value() {
            s_hist.push(s);
            y_hist.push(y);
            if s_hist.len() > MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
            }
        }
        phi = trial_phi;
        cur = next;
        let om: Vec<Cx<T>> = phi.iter().map(|&p| cis(p)).collect();
        trace.push(TraceEntry {
            iteration: first_iteration + it + 1,
            stage: Stage::Polish,
            residual: cur.residual,
            decoy_gain: basis.decoy_response(&om).norm(),
            projected_residual: None,
        });
    }
    let converged = cur.residual <= thr;
    Ok((phi.iter().map(|&p| cis(p)).collect(), params.polish_iters, converged))
}

/// Synthesises ω★ maximising the decoy response subject to the nulls.
///
/// The final iterate is returned even when the residual threshold was never
/// reached; `converged` and `residual` report the outcome.
pub fn solve_p3<T: Real>(basis: &KernelBasis<T>, params: &SolverParams<T>) -> Result<SolveResult<T>> {
    let mut trace = Vec::new();
    let ap = alternating_projections(basis, params, Some(&mut trace))?;
    let (omega, polish_iterations, converged) = if ap.converged || params.polish_iters == 0 {
        (ap.x, 0, ap.converged)
    } else {
        polish(basis, &ap.x, params, &mut trace, ap.iterations)?
    };
    let mut omega = omega;
    project_unit(&mut omega);
    check_finite(&omega, "solution")?;
    let residual = basis.residual(&omega);
    let decoy_gain = basis.decoy_response(&omega).norm();
    Ok(SolveResult {
        profile: RisProfile::phase_aligned(&omega),
        iterations: ap.iterations,
        polish_iterations,
        residual,
        decoy_gain,
        trace,
        converged,
    })
}

/// FI ratio `J(θ_fake) / (ε + Σ_k J(θ_k))` with closed-form FI.
pub fn objective_p1<T: Real>(
    profile: &RisProfile<T>,
    theta_fake: Angle<T>,
    window: &NullingWindow<T>,
    config: &SceneConfig<T>,
    model: &KernelModel<T>,
    eps_reg: T,
) -> Result<T> {
    let num = fi_closed(theta_fake, profile, config, model)?;
    let mut den = eps_reg;
    for &th in window.angles() {
        den += fi_closed(th, profile, config, model)?;
    }
    Ok(num / den)
}

/// Kernel ratio `|wᴴω|² / (ε + Σ_k |υ_kᴴω|²)`.
pub fn objective_p2<T: Real>(profile: &RisProfile<T>, basis: &KernelBasis<T>, eps_reg: T) -> Result<T> {
    if profile.len() != basis.m() {
        return Err(Error::DimensionMismatch {
            expected: basis.m(),
            got: profile.len(),
        });
    }
    let om = profile.as_slice();
    Ok(basis.decoy_response(om).norm_sqr() / (eps_reg + basis.residual(om)))
}
