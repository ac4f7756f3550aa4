//! Power-law pair potential `U_il = -m_i m_l / r^alpha`, its sums over
//! configurations and trajectories, and the strong-force regularized variant
//! `U_il - phi(r) / r^2` that stiffens the singularity near collision.

use crate::error::{Error, Result};
use crate::types::{PairSeparation, ProblemSpec, Trajectory};

/// Pair potential between masses `m_i` and `m_l` at distance `r`.
pub fn pair_potential(r: f64, m_i: f64, m_l: f64, alpha: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    Ok(-m_i * m_l / r.powf(alpha))
}

/// Gradient of the pair potential with respect to `q_i`, where `diff = q_i - q_l`.
pub fn pair_force(diff: &[f64], m_i: f64, m_l: f64, alpha: f64) -> Result<Vec<f64>> {
    let r = norm(diff);
    if r == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    let scale = alpha * m_i * m_l / r.powf(alpha + 2.0);
    Ok(diff.iter().map(|x| scale * x).collect())
}

/// Value and radial derivative of the collision cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub value: f64,
    pub derivative: f64,
}

/// One inside `r <= delta/2`, zero from `delta` on, C1 smoothstep in between.
pub fn cutoff_phi(r: f64, delta: f64) -> Cutoff {
    let half = 0.5 * delta;
    if r <= half {
        Cutoff {
            value: 1.0,
            derivative: 0.0,
        }
    } else if r >= delta {
        Cutoff {
            value: 0.0,
            derivative: 0.0,
        }
    } else {
        let u = (r - half) / half;
        Cutoff {
            value: 1.0 - u * u * (3.0 - 2.0 * u),
            derivative: -6.0 * u * (1.0 - u) / half,
        }
    }
}

/// `U_il(r) - phi(r) / r^2`.
pub fn regularized_pair_potential(r: f64, m_i: f64, m_l: f64, alpha: f64, delta: f64) -> Result<f64> {
    let base = pair_potential(r, m_i, m_l, alpha)?;
    Ok(base - cutoff_phi(r, delta).value / (r * r))
}

/// The pair interaction a problem uses: plain power law when `delta == 0`,
/// regularized otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairLaw {
    pub alpha: f64,
    pub delta: f64,
}

impl PairLaw {
    pub fn of(problem: &ProblemSpec) -> Self {
        Self {
            alpha: problem.alpha(),
            delta: problem.delta(),
        }
    }

    /// Pair value at `r > 0`.
    #[inline]
    pub fn value(&self, r: f64, mm: f64) -> f64 {
        let mut v = -mm / r.powf(self.alpha);
        if self.delta > 0.0 && r < self.delta {
            v -= cutoff_phi(r, self.delta).value / (r * r);
        }
        v
    }

    /// `dV/dr` at `r > 0`.
    #[inline]
    pub fn radial_derivative(&self, r: f64, mm: f64) -> f64 {
        let mut dv = self.alpha * mm / r.powf(self.alpha + 1.0);
        if self.delta > 0.0 && r < self.delta {
            let phi = cutoff_phi(r, self.delta);
            dv += 2.0 * phi.value / (r * r * r) - phi.derivative / (r * r);
        }
        dv
    }
}

/// Potential of a single configuration and its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialValue {
    pub u: f64,
    /// `N * d`, body-major.
    pub grad: Vec<f64>,
}

/// Potential of a whole trajectory, `sum_s U(q(s))`, and its gradient per node.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalPotential {
    pub u_hat: f64,
    /// `k * N * d`, same layout as the trajectory.
    pub grad: Vec<f64>,
}

/// Adds the potential of one configuration to `grad` and returns its value.
/// On coincident bodies returns `Err((i, l))`.
pub(crate) fn accumulate_configuration(
    positions: &[f64],
    masses: &[f64],
    dim: usize,
    law: PairLaw,
    grad: &mut [f64],
) -> std::result::Result<f64, (usize, usize)> {
    let n = masses.len();
    let mut u = 0.0;
    let mut diff = [0.0f64; 8];
    let mut heap_diff;
    let diff: &mut [f64] = if dim <= diff.len() {
        &mut diff[..dim]
    } else {
        heap_diff = vec![0.0; dim];
        &mut heap_diff
    };
    for i in 0..n {
        for l in i + 1..n {
            let qi = &positions[i * dim..(i + 1) * dim];
            let ql = &positions[l * dim..(l + 1) * dim];
            let mut r2 = 0.0;
            for c in 0..dim {
                diff[c] = qi[c] - ql[c];
                r2 += diff[c] * diff[c];
            }
            if r2 == 0.0 {
                return Err((i, l));
            }
            let r = r2.sqrt();
            let mm = masses[i] * masses[l];
            u += law.value(r, mm);
            let scale = law.radial_derivative(r, mm) / r;
            for c in 0..dim {
                let f = scale * diff[c];
                grad[i * dim + c] += f;
                grad[l * dim + c] -= f;
            }
        }
    }
    Ok(u)
}

/// Potential and gradient of a single configuration (`N * d` positions).
pub fn configuration_potential(positions: &[f64], problem: &ProblemSpec) -> Result<PotentialValue> {
    if positions.len() != problem.node_len() {
        return Err(Error::Domain(format!(
            "configuration needs {} values, got {}",
            problem.node_len(),
            positions.len()
        )));
    }
    let mut grad = vec![0.0; positions.len()];
    let u = accumulate_configuration(
        positions,
        problem.masses(),
        problem.dim(),
        PairLaw::of(problem),
        &mut grad,
    )
    .map_err(|(i, l)| Error::Singularity(PairSeparation { s: 0, i, l, r: 0.0 }))?;
    Ok(PotentialValue { u, grad })
}

/// Potential summed over all nodes, with the gradient with respect to every
/// node value. Each unordered pair is counted once.
pub fn total_potential(traj: &Trajectory) -> Result<TotalPotential> {
    let problem = traj.spec();
    let law = PairLaw::of(problem);
    let w = problem.node_len();
    let mut grad = vec![0.0; problem.len()];
    let mut u_hat = 0.0;
    for s in 0..problem.k() {
        let u = accumulate_configuration(
            traj.node(s as i64),
            problem.masses(),
            problem.dim(),
            law,
            &mut grad[s * w..(s + 1) * w],
        )
        .map_err(|(i, l)| Error::Singularity(PairSeparation { s, i, l, r: 0.0 }))?;
        u_hat += u;
    }
    Ok(TotalPotential { u_hat, grad })
}

/// Potential value of each node, `U(q(s))`.
pub fn node_potentials(traj: &Trajectory) -> Result<Vec<f64>> {
    let problem = traj.spec();
    let law = PairLaw::of(problem);
    let mut scratch = vec![0.0; problem.node_len()];
    (0..problem.k())
        .map(|s| {
            accumulate_configuration(traj.node(s as i64), problem.masses(), problem.dim(), law, &mut scratch)
                .map_err(|(i, l)| Error::Singularity(PairSeparation { s, i, l, r: 0.0 }))
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
