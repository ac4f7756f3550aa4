//! Reference solutions: the equilateral Lagrange orbit and an RK4 integrator
//! of the continuous equations of motion, used to check that discrete
//! critical points approach true periodic orbits as `h -> 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::{accumulate_configuration, PairLaw};
use crate::types::{distance, ProblemSpec, Trajectory};

/// Minimum separation below which [`rk4_flow`] gives up.
pub const FLOW_COLLISION_RADIUS: f64 = 1e-9;

/// Fine-grid steps used by [`compare_to_flow`], at least.
pub const FLOW_MIN_STEPS: usize = 4096;

/// Three equal masses on an equilateral triangle rotating rigidly about its
/// centre, with `omega^2 a^3 = 3 G m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeOrbit {
    pub mass: f64,
    pub side: f64,
    pub omega: f64,
}

impl LagrangeOrbit {
    pub fn new(mass: f64, side: f64) -> Result<Self> {
        if !(mass > 0.0 && side > 0.0) {
            return Err(Error::Domain(format!(
                "mass and side must be positive, got {mass}, {side}"
            )));
        }
        Ok(Self {
            mass,
            side,
            omega: (3.0 * mass / side.powi(3)).sqrt(),
        })
    }

    pub fn n_bodies(&self) -> usize {
        3
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn circumradius(&self) -> f64 {
        self.side / 3f64.sqrt()
    }

    /// Problem this orbit solves, on a grid of `k` nodes.
    pub fn problem(&self, k: usize) -> Result<ProblemSpec> {
        ProblemSpec::new(vec![self.mass; 3], 2, 1.0, self.period(), k, 0.0)
    }

    fn angle(&self, t: f64, body: usize) -> f64 {
        self.omega * t + 2.0 * PI * body as f64 / 3.0
    }

    /// Exact positions at time `t`, `3 x 2`.
    pub fn positions(&self, t: f64) -> Vec<f64> {
        let r = self.circumradius();
        (0..3)
            .flat_map(|i| {
                let th = self.angle(t, i);
                [r * th.cos(), r * th.sin()]
            })
            .collect()
    }

    /// Exact velocities at time `t`, `3 x 2`.
    pub fn velocities(&self, t: f64) -> Vec<f64> {
        let v = self.omega * self.circumradius();
        (0..3)
            .flat_map(|i| {
                let th = self.angle(t, i);
                [-v * th.sin(), v * th.cos()]
            })
            .collect()
    }
}

/// The Lagrange orbit sampled at `k` uniform nodes over one period. Body `i`
/// sits at angle `2 pi s / k + 2 pi i / 3`.
pub fn sample_lagrange(orbit: &LagrangeOrbit, k: usize) -> Result<Trajectory> {
    let spec = Arc::new(orbit.problem(k)?);
    let r = orbit.circumradius();
    Trajectory::from_fn(spec, |s, i, c| {
        let th = 2.0 * PI * s as f64 / k as f64 + 2.0 * PI * i as f64 / 3.0;
        r * if c == 0 { th.cos() } else { th.sin() }
    })
}

/// Positions and velocities after every RK4 step, `steps + 1` samples.
#[derive(Debug, Clone)]
pub struct FlowSeries {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

fn acceleration(
    q: &[f64],
    problem: &ProblemSpec,
    law: PairLaw,
    out: &mut [f64],
) -> std::result::Result<(), (usize, usize)> {
    out.iter_mut().for_each(|a| *a = 0.0);
    accumulate_configuration(q, problem.masses(), problem.dim(), law, out)?;
    let d = problem.dim();
    for (i, m) in problem.masses().iter().enumerate() {
        for a in &mut out[i * d..(i + 1) * d] {
            *a = -*a / m;
        }
    }
    Ok(())
}

fn closest_pair(q: &[f64], n: usize, d: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..n {
        for l in i + 1..n {
            best = best.min(distance(&q[i * d..(i + 1) * d], &q[l * d..(l + 1) * d]));
        }
    }
    best
}

/// Classical fourth-order Runge-Kutta for `m_i q_i'' = -grad_i U` with a
/// fixed step `t_end / steps`.
pub fn rk4_flow(q0: &[f64], v0: &[f64], problem: &ProblemSpec, steps: usize, t_end: f64) -> Result<FlowSeries> {
    let w = problem.node_len();
    if q0.len() != w || v0.len() != w {
        return Err(Error::Domain(format!(
            "initial state needs {w} positions and velocities"
        )));
    }
    if steps == 0 || !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Domain("need positive steps and t_end".into()));
    }
    let (n, d) = (problem.n_bodies(), problem.dim());
    let law = PairLaw::of(problem);
    let dt = t_end / steps as f64;

    let mut q = q0.to_vec();
    let mut v = v0.to_vec();
    let mut series = FlowSeries {
        times: Vec::with_capacity(steps + 1),
        positions: Vec::with_capacity(steps + 1),
        velocities: Vec::with_capacity(steps + 1),
    };
    series.times.push(0.0);
    series.positions.push(q.clone());
    series.velocities.push(v.clone());

    let (mut a1, mut a2, mut a3, mut a4) = (vec![0.0; w], vec![0.0; w], vec![0.0; w], vec![0.0; w]);
    let mut tmp = vec![0.0; w];
    let abort = |t: f64, why: String| Error::FlowAbort { t, reason: why };
    let collide = |t: f64, (i, l): (usize, usize)| Error::FlowAbort {
        t,
        reason: format!("bodies {i} and {l} collided"),
    };

    for step in 0..steps {
        let t = step as f64 * dt;
        let sep = closest_pair(&q, n, d);
        if sep < FLOW_COLLISION_RADIUS {
            return Err(abort(t, format!("separation {sep:e} below collision radius")));
        }
        acceleration(&q, problem, law, &mut a1).map_err(|p| collide(t, p))?;
        for x in 0..w {
            tmp[x] = q[x] + 0.5 * dt * v[x];
        }
        // k2: position q + dt/2 v, velocity v + dt/2 a1
        acceleration(&tmp, problem, law, &mut a2).map_err(|p| collide(t, p))?;
        for x in 0..w {
            tmp[x] = q[x] + 0.5 * dt * (v[x] + 0.5 * dt * a1[x]);
        }
        acceleration(&tmp, problem, law, &mut a3).map_err(|p| collide(t, p))?;
        for x in 0..w {
            tmp[x] = q[x] + dt * (v[x] + 0.5 * dt * a2[x]);
        }
        acceleration(&tmp, problem, law, &mut a4).map_err(|p| collide(t, p))?;
        for x in 0..w {
            // k-stages for position are v, v + dt/2 a1, v + dt/2 a2, v + dt a3
            q[x] += dt / 6.0
                * (v[x] + 2.0 * (v[x] + 0.5 * dt * a1[x]) + 2.0 * (v[x] + 0.5 * dt * a2[x]) + (v[x] + dt * a3[x]));
            v[x] += dt / 6.0 * (a1[x] + 2.0 * a2[x] + 2.0 * a3[x] + a4[x]);
        }
        if q.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(abort(t + dt, "state became non-finite".into()));
        }
        series.times.push((step + 1) as f64 * dt);
        series.positions.push(q.clone());
        series.velocities.push(v.clone());
    }
    Ok(series)
}

/// Largest distance between a body on the discrete path and the same body on
/// the continuous flow started from the path's node 0.
///
/// The start velocity is the centred slope `(q(1) - q(-1)) / 2h`, which is
/// second-order accurate.
pub fn compare_to_flow(traj: &Trajectory) -> Result<f64> {
    let problem = traj.spec();
    let (k, n, d) = (problem.k(), problem.n_bodies(), problem.dim());
    let h = problem.step();
    let q0 = traj.node(0).to_vec();
    let v0: Vec<f64> = traj
        .node(1)
        .iter()
        .zip(traj.node(-1))
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();
    let sub = FLOW_MIN_STEPS.div_ceil(k);
    let flow = rk4_flow(&q0, &v0, problem, k * sub, problem.period())?;
    let mut worst = 0.0f64;
    for s in 0..k {
        let fq = &flow.positions[s * sub];
        for i in 0..n {
            worst = worst.max(distance(&fq[i * d..(i + 1) * d], traj.body(s as i64, i)));
        }
    }
    Ok(worst)
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn fitted_order(steps: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let nx = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nx;
    let my = ys.iter().sum::<f64>() / nx;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
