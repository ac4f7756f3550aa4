//! Steepest descent on the reduced variables with a backtracking Armijo line
//! search.
//!
//! Trial steps that land on a collision, where the action is undefined, count
//! as failed Armijo trials and are shrunk like any other. Accepted action
//! values therefore never increase.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::{action, discrete_energy, residual_n1};
use crate::error::{Error, Result};
use crate::symmetry::{ReducedVector, Reduction, SymmetrySpec};
use crate::types::{PairSeparation, ProblemSpec, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Relative gradient tolerance; the descent stops once the reduced
    /// gradient norm drops below `grad_tol * max(1, |J_0|)`.
    pub grad_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub step_floor: f64,
    pub seed: u64,
    pub init_radius: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            grad_tol: 1e-8,
            step_init: 1.0,
            armijo_c: 1e-4,
            backtrack: 0.5,
            step_floor: 1e-16,
            seed: 0,
            init_radius: 1.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Optimizer(what.to_string()));
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return bad("grad_tol must be positive");
        }
        if !(self.step_init.is_finite() && self.step_init > 0.0) {
            return bad("step_init must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.step_floor.is_finite() && self.step_floor > 0.0) {
            return bad("step_floor must be positive");
        }
        if !(self.init_radius.is_finite() && self.init_radius >= 0.0) {
            return bad("init_radius must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIters,
    StepFloor,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::MaxIters => "max_iters",
            StopReason::StepFloor => "step_floor",
        })
    }
}

/// Something to minimize over full trajectories: value and full gradient.
pub trait Objective {
    fn evaluate(&self, traj: &Trajectory) -> Result<(f64, Vec<f64>)>;
}

/// The discrete action (regularized when the problem has `delta > 0`).
#[derive(Debug, Clone, Copy, Default)]
pub struct ActionObjective;

impl Objective for ActionObjective {
    fn evaluate(&self, traj: &Trajectory) -> Result<(f64, Vec<f64>)> {
        let rep = action(traj)?;
        Ok((rep.j, rep.grad))
    }
}

/// State handed to an observer after every accepted step (and for the start).
#[derive(Debug)]
pub struct Iterate<'a> {
    pub iter: usize,
    pub j: f64,
    pub grad_norm: f64,
    pub reduced: &'a ReducedVector,
    pub trajectory: &'a Trajectory,
}

#[derive(Debug, Clone)]
pub struct Descent {
    pub reduced: ReducedVector,
    pub trajectory: Trajectory,
    pub j: f64,
    pub grad_norm: f64,
    /// Absolute tolerance actually used.
    pub grad_tol: f64,
    pub iters: usize,
    pub stop: StopReason,
    /// Objective value of the start and of every accepted iterate.
    pub history: Vec<f64>,
}

/// Plain steepest descent with backtracking on `objective`, from `red0`.
pub fn descend<O: Objective>(
    objective: &O,
    reduction: &Reduction,
    red0: ReducedVector,
    config: &OptimizerConfig,
    mut observer: impl FnMut(&Iterate<'_>),
) -> Result<Descent> {
    config.validate()?;
    let mut red = red0;
    let mut traj = reduction.reconstruct(&red)?;
    let (mut j, mut full_grad) = objective.evaluate(&traj)?;
    if !j.is_finite() {
        return Err(Error::NonFinite(format!("initial objective is {j}")));
    }
    let tol = config.grad_tol * j.abs().max(1.0);
    let mut grad = reduction.reduce_gradient(&full_grad)?;
    let mut grad_norm = grad.norm();
    let mut history = vec![j];
    let mut iters = 0;
    observer(&Iterate {
        iter: 0,
        j,
        grad_norm,
        reduced: &red,
        trajectory: &traj,
    });

    let stop = loop {
        if grad_norm < tol {
            break StopReason::Converged;
        }
        if iters >= config.max_iters {
            break StopReason::MaxIters;
        }
        let slope = grad_norm * grad_norm;
        let mut step = config.step_init;
        let accepted = loop {
            let trial = ReducedVector(red.0.iter().zip(&grad.0).map(|(x, g)| x - step * g).collect());
            let trial_traj = reduction.reconstruct(&trial)?;
            match objective.evaluate(&trial_traj) {
                Ok((jt, gt)) => {
                    if !jt.is_finite() {
                        return Err(Error::NonFinite(format!(
                            "objective is {jt} at iteration {iters}, step {step:e}"
                        )));
                    }
                    if jt <= j - config.armijo_c * step * slope {
                        break Some((trial, trial_traj, jt, gt));
                    }
                }
                Err(Error::Singularity(_)) => {}
                Err(e) => return Err(e),
            }
            step *= config.backtrack;
            if step < config.step_floor {
                break None;
            }
        };
        let Some((trial, trial_traj, jt, gt)) = accepted else {
            break StopReason::StepFloor;
        };
        red = trial;
        traj = trial_traj;
        j = jt;
        full_grad = gt;
        grad = reduction.reduce_gradient(&full_grad)?;
        grad_norm = grad.norm();
        iters += 1;
        history.push(j);
        observer(&Iterate {
            iter: iters,
            j,
            grad_norm,
            reduced: &red,
            trajectory: &traj,
        });
    };

    Ok(Descent {
        reduced: red,
        trajectory: traj,
        j,
        grad_norm,
        grad_tol: tol,
        iters,
        stop,
        history,
    })
}

/// Everything reported about one minimization.
#[derive(Debug, Clone)]
pub struct OrbitReport {
    pub j: f64,
    pub grad_norm: f64,
    pub grad_tol: f64,
    pub iters: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub min_sep: PairSeparation,
    pub energy_mean: f64,
    pub energy_max_dev: f64,
    pub residual_norm: f64,
    pub problem: ProblemSpec,
    pub symmetry: SymmetrySpec,
    pub config: OptimizerConfig,
}

impl OrbitReport {
    /// Diagnostics of a trajectory that is already known, e.g. loaded from disk.
    pub fn assess(traj: &Trajectory, symmetry: &SymmetrySpec, config: &OptimizerConfig) -> Result<Self> {
        let reduction = Reduction::new(traj.spec_arc().clone(), symmetry.clone())?;
        let rep = action(traj)?;
        let grad_norm = reduction.reduce_gradient(&rep.grad)?.norm();
        let grad_tol = config.grad_tol * rep.j.abs().max(1.0);
        Self::build(
            traj,
            symmetry,
            config,
            rep.j,
            grad_norm,
            grad_tol,
            0,
            if grad_norm < grad_tol {
                StopReason::Converged
            } else {
                StopReason::MaxIters
            },
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        traj: &Trajectory,
        symmetry: &SymmetrySpec,
        config: &OptimizerConfig,
        j: f64,
        grad_norm: f64,
        grad_tol: f64,
        iters: usize,
        stop: StopReason,
    ) -> Result<Self> {
        let energy = discrete_energy(traj)?;
        Ok(Self {
            j,
            grad_norm,
            grad_tol,
            iters,
            converged: stop == StopReason::Converged,
            stop,
            min_sep: traj.min_separation()?,
            energy_mean: energy.mean,
            energy_max_dev: energy.max_dev,
            residual_norm: residual_n1(traj)?.norm,
            problem: traj.spec().clone(),
            symmetry: symmetry.clone(),
            config: config.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Minimized {
    pub reduced: ReducedVector,
    pub trajectory: Trajectory,
    pub report: OrbitReport,
    pub history: Vec<f64>,
}

/// Re-solves a converged orbit on a grid of `k` nodes, starting from its
/// piecewise-linear resampling.
///
/// The absolute gradient tolerance is the coarse one times
/// `sqrt(k_coarse / k)`, the factor by which the Euclidean gradient norm of a
/// fixed force residual shrinks when the grid is refined; `config.grad_tol`
/// is not used.
pub fn refine(coarse: &Minimized, k: usize, config: &OptimizerConfig) -> Result<Minimized> {
    refine_with(coarse, k, config, |_| {})
}

/// [`refine`] with an observer on every accepted iterate.
pub fn refine_with(
    coarse: &Minimized,
    k: usize,
    config: &OptimizerConfig,
    observer: impl FnMut(&Iterate<'_>),
) -> Result<Minimized> {
    let fine = coarse.trajectory.resampled(k)?;
    let reduction = Reduction::new(fine.spec_arc().clone(), coarse.report.symmetry.clone())?;
    let red0 = reduction.restrict(&fine)?;
    let j0 = action(&reduction.reconstruct(&red0)?)?.j;
    let tol = coarse.report.grad_tol * (coarse.trajectory.k() as f64 / k as f64).sqrt();
    let config = OptimizerConfig {
        grad_tol: tol / j0.abs().max(1.0),
        ..config.clone()
    };
    minimize_with(&reduction, red0, &config, observer)
}

/// i.i.d. uniform entries on `[-init_radius, init_radius)`.
///
/// The generator is ChaCha8 (`rand_chacha` 0.3) seeded with
/// `seed_from_u64(seed)`; each entry is `init_radius * (2u - 1)` with
/// `u = gen::<f64>()`. Identical seeds and shapes give identical vectors.
pub fn random_init(
    problem: &Arc<ProblemSpec>,
    spec: &SymmetrySpec,
    seed: u64,
    init_radius: f64,
) -> Result<ReducedVector> {
    let reduction = Reduction::new(problem.clone(), spec.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ReducedVector(
        (0..reduction.len())
            .map(|_| init_radius * (2.0 * rng.gen::<f64>() - 1.0))
            .collect(),
    ))
}

/// Minimizes the action over the symmetry class, starting from `red0`.
pub fn minimize(
    red0: ReducedVector,
    problem: &Arc<ProblemSpec>,
    spec: &SymmetrySpec,
    config: &OptimizerConfig,
) -> Result<(ReducedVector, OrbitReport)> {
    let reduction = Reduction::new(problem.clone(), spec.clone())?;
    let out = minimize_with(&reduction, red0, config, |_| {})?;
    Ok((out.reduced, out.report))
}

/// [`minimize`] with an observer on every accepted iterate, returning the
/// full descent history.
pub fn minimize_with(
    reduction: &Reduction,
    red0: ReducedVector,
    config: &OptimizerConfig,
    observer: impl FnMut(&Iterate<'_>),
) -> Result<Minimized> {
    let start = reduction.reconstruct(&red0)?;
    let sep = start.min_separation()?;
    if sep.r == 0.0 {
        return Err(Error::Singularity(sep));
    }
    let d = descend(&ActionObjective, reduction, red0, config, observer)?;
    let report = OrbitReport::build(
        &d.trajectory,
        reduction.symmetry(),
        config,
        d.j,
        d.grad_norm,
        d.grad_tol,
        d.iters,
        d.stop,
    )?;
    Ok(Minimized {
        reduced: d.reduced,
        trajectory: d.trajectory,
        report,
        history: d.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::kinetic;
    use crate::symmetry::Block;

    fn planar(n: usize, k: usize, period: f64, delta: f64) -> Arc<ProblemSpec> {
        Arc::new(ProblemSpec::new(vec![1.0; n], 2, 1.0, period, k, delta).unwrap())
    }

    struct KineticOnly;

    impl Objective for KineticOnly {
        fn evaluate(&self, traj: &Trajectory) -> Result<(f64, Vec<f64>)> {
            Ok((kinetic(traj), crate::action::kinetic_gradient(traj)))
        }
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        for broken in [
            OptimizerConfig {
                armijo_c: 1.0,
                ..Default::default()
            },
            OptimizerConfig {
                backtrack: 0.0,
                ..Default::default()
            },
            OptimizerConfig {
                grad_tol: 0.0,
                ..Default::default()
            },
            OptimizerConfig {
                max_iters: 0,
                ..Default::default()
            },
            OptimizerConfig {
                step_floor: -1.0,
                ..Default::default()
            },
        ] {
            assert!(broken.validate().is_err(), "{broken:?}");
        }
    }

    #[test]
    fn random_init_is_deterministic() {
        let p = planar(3, 12, 1.0, 0.0);
        let sym = SymmetrySpec::radial(2, 2);
        let a = random_init(&p, &sym, 17, 1.0).unwrap();
        let b = random_init(&p, &sym, 17, 1.0).unwrap();
        let c = random_init(&p, &sym, 18, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 6 * 3 * 2);
        assert!(a.0.iter().all(|x| (-1.0..1.0).contains(x)));
        let zero = random_init(&p, &sym, 17, 0.0).unwrap();
        assert!(zero.0.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn kinetic_only_descends_to_zero() {
        let p = planar(3, 12, 1.0, 0.0);
        let sym = SymmetrySpec::radial(2, 2);
        let reduction = Reduction::new(p.clone(), sym.clone()).unwrap();
        let red0 = random_init(&p, &sym, 5, 1.0).unwrap();
        let cfg = OptimizerConfig::default();
        let d = descend(&KineticOnly, &reduction, red0, &cfg, |_| {}).unwrap();
        assert_eq!(d.stop, StopReason::Converged);
        assert!(d.j < 1e-12, "j={}", d.j);
        assert!(d.reduced.norm() < 1e-6);
        assert!(d.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn starting_at_critical_point_takes_no_steps() {
        // the kinetic form has its minimum at zero
        let p = planar(2, 8, 1.0, 0.0);
        let reduction = Reduction::new(p, SymmetrySpec::radial(2, 2)).unwrap();
        let d = descend(
            &KineticOnly,
            &reduction,
            ReducedVector(vec![0.0; reduction.len()]),
            &OptimizerConfig::default(),
            |_| {},
        )
        .unwrap();
        assert_eq!((d.iters, d.stop), (0, StopReason::Converged));
    }

    #[test]
    fn rejects_colliding_start() {
        let p = planar(2, 8, 1.0, 0.0);
        let sym = SymmetrySpec::radial(2, 2);
        let red0 = random_init(&p, &sym, 1, 0.0).unwrap();
        assert!(matches!(
            minimize(red0, &p, &sym, &OptimizerConfig::default()),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn two_body_relaxes_to_circular_relative_orbit() {
        // equal masses on a circle of radius R: omega^2 = 1 / (4 R^3); pick T = 2 pi, R = 4^(-1/3)
        let k = 32;
        let p = planar(2, k, 2.0 * std::f64::consts::PI, 0.0);
        let sym = SymmetrySpec::radial(2, 2);
        let reduction = Reduction::new(p.clone(), sym.clone()).unwrap();
        let red0 = reduction
            .restrict(
                &Trajectory::from_fn(p.clone(), |s, i, c| {
                    let th = 2.0 * std::f64::consts::PI * s as f64 / k as f64 + std::f64::consts::PI * i as f64;
                    let r = 0.8 + 0.1 * (3.0 * th).cos();
                    r * if c == 0 { th.cos() } else { th.sin() }
                })
                .unwrap(),
            )
            .unwrap();
        let cfg = OptimizerConfig::default();
        let mut iterates = 0;
        let out = minimize_with(&reduction, red0, &cfg, |it| {
            iterates += 1;
            assert_eq!(reduction.check_symmetry(it.trajectory).unwrap(), 0.0);
        })
        .unwrap();
        assert!(out.report.converged, "{:?}", out.report);
        assert_eq!(iterates, out.report.iters + 1);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        let radius = 0.25f64.powf(1.0 / 3.0);
        for s in 0..k as i64 {
            let r0 = out.trajectory.body(s, 0).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((r0 - radius).abs() < 0.02 * radius, "s={s} r={r0}");
        }
        assert!(out.report.min_sep.r > 0.0);
        assert!(out.report.residual_norm < 1e-5);
    }

    #[test]
    fn refinement_tightens_energy() {
        let p = Arc::new(ProblemSpec::new(vec![1.0; 3], 2, 1.0, 2.0 * std::f64::consts::PI, 30, 0.1).unwrap());
        let sym = SymmetrySpec::radial(2, 2);
        let reduction = Reduction::new(p.clone(), sym.clone()).unwrap();
        let cfg = OptimizerConfig::default();
        let coarse = minimize_with(&reduction, random_init(&p, &sym, 1, 1.0).unwrap(), &cfg, |_| {}).unwrap();
        assert!(coarse.report.converged);
        let fine = refine(&coarse, 60, &cfg).unwrap();
        assert!(fine.report.converged, "{:?}", fine.report);
        assert_eq!(fine.trajectory.k(), 60);
        assert!((fine.report.grad_tol - coarse.report.grad_tol / 2f64.sqrt()).abs() < 1e-12 * coarse.report.grad_tol);
        assert!(fine.report.energy_max_dev < 0.6 * coarse.report.energy_max_dev);
        assert!((fine.report.j - coarse.report.j).abs() < 0.01 * coarse.report.j.abs());
    }

    #[test]
    fn spatial_class_keeps_block_periods() {
        let p = Arc::new(ProblemSpec::new(vec![1.0; 3], 3, 1.0, 2.0 * std::f64::consts::PI, 16, 0.1).unwrap());
        let sym = SymmetrySpec::new(vec![Block { width: 2, divisor: 4 }, Block { width: 1, divisor: 2 }]);
        let reduction = Reduction::new(p.clone(), sym.clone()).unwrap();
        let red0 = random_init(&p, &sym, 3, 1.0).unwrap();
        let cfg = OptimizerConfig {
            max_iters: 200,
            ..Default::default()
        };
        let out = minimize_with(&reduction, red0, &cfg, |it| {
            assert_eq!(reduction.check_symmetry(it.trajectory).unwrap(), 0.0);
        })
        .unwrap();
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
