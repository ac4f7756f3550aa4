//! Discrete action
//!
//! `J = (1/2h) sum_s sum_i m_i |q_i(s+1) - q_i(s)|^2 - h * sum_s U(q(s))`
//!
//! The periodic second-difference matrix is never built; the quadratic form
//! and its gradient are assembled from neighbour differences. Sums run over
//! nodes ascending, then bodies, then pairs in lexicographic order.

use crate::error::Result;
use crate::potential::{node_potentials, total_potential};
use crate::types::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct ActionReport {
    pub j: f64,
    /// `dJ/dq_i(s)`, trajectory layout.
    pub grad: Vec<f64>,
    pub grad_norm: f64,
    pub kinetic: f64,
    pub u_hat: f64,
}

/// Entrywise residual of the discrete Euler-Lagrange equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub res: Vec<f64>,
    /// Euclidean norm of `res`.
    pub norm: f64,
    /// `norm / sqrt(h)`: the time-integrated L2 norm of the force balance
    /// `m q'' + grad U`, which is what converges at second order in `h`.
    pub l2_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    /// Energy on each segment `[t_s, t_{s+1}]`.
    pub e: Vec<f64>,
    pub mean: f64,
    /// `max_s |e[s] - mean|`.
    pub max_dev: f64,
}

/// `(1/2h) <M q, q>`.
pub fn kinetic(traj: &Trajectory) -> f64 {
    let problem = traj.spec();
    let (n, d) = (problem.n_bodies(), problem.dim());
    let mut sum = 0.0;
    for s in 0..problem.k() as i64 {
        for i in 0..n {
            let a = traj.body(s, i);
            let b = traj.body(s + 1, i);
            let sq: f64 = (0..d).map(|c| (b[c] - a[c]) * (b[c] - a[c])).sum();
            sum += problem.masses()[i] * sq;
        }
    }
    sum / (2.0 * problem.step())
}

/// Gradient of the kinetic term, `(m_i/h) (2 q(s) - q(s+1) - q(s-1))`.
pub(crate) fn kinetic_gradient(traj: &Trajectory) -> Vec<f64> {
    let problem = traj.spec();
    let (n, d) = (problem.n_bodies(), problem.dim());
    let h = problem.step();
    let mut grad = Vec::with_capacity(problem.len());
    for s in 0..problem.k() as i64 {
        for i in 0..n {
            let w = problem.masses()[i] / h;
            let prev = traj.body(s - 1, i);
            let here = traj.body(s, i);
            let next = traj.body(s + 1, i);
            for c in 0..d {
                grad.push(w * (2.0 * here[c] - next[c] - prev[c]));
            }
        }
    }
    grad
}

/// Action value and exact gradient. Uses the regularized potential when the
/// problem has `delta > 0`.
pub fn action(traj: &Trajectory) -> Result<ActionReport> {
    let h = traj.spec().step();
    let pot = total_potential(traj)?;
    let kinetic = kinetic(traj);
    let mut grad = kinetic_gradient(traj);
    for (g, du) in grad.iter_mut().zip(&pot.grad) {
        *g -= h * du;
    }
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    Ok(ActionReport {
        j: kinetic - pot.u_hat * h,
        grad,
        grad_norm,
        kinetic,
        u_hat: pot.u_hat,
    })
}

/// `(1/h) M q - h grad U`, node by node.
pub fn residual_n1(traj: &Trajectory) -> Result<Residual> {
    let problem = traj.spec();
    let (n, d) = (problem.n_bodies(), problem.dim());
    let h = problem.step();
    let pot = total_potential(traj)?;
    let mut res = Vec::with_capacity(problem.len());
    for s in 0..problem.k() as i64 {
        for i in 0..n {
            let m = problem.masses()[i];
            let prev = traj.body(s - 1, i);
            let here = traj.body(s, i);
            let next = traj.body(s + 1, i);
            let base = (s as usize * n + i) * d;
            for c in 0..d {
                let second = 2.0 * here[c] - next[c] - prev[c];
                res.push(m / h * second - h * pot.grad[base + c]);
            }
        }
    }
    let norm = res.iter().map(|r| r * r).sum::<f64>().sqrt();
    Ok(Residual {
        res,
        norm,
        l2_norm: norm / h.sqrt(),
    })
}

/// Kinetic energy of each segment slope plus the potential averaged over the
/// segment's two endpoints. Constant along exact solutions up to `O(h^2)`.
pub fn discrete_energy(traj: &Trajectory) -> Result<EnergySeries> {
    let problem = traj.spec();
    let (n, d, k) = (problem.n_bodies(), problem.dim(), problem.k());
    let h = problem.step();
    let u = node_potentials(traj)?;
    let e: Vec<f64> = (0..k)
        .map(|s| {
            let mut kin = 0.0;
            for i in 0..n {
                let a = traj.body(s as i64, i);
                let b = traj.body(s as i64 + 1, i);
                let v2: f64 = (0..d).map(|c| ((b[c] - a[c]) / h).powi(2)).sum();
                kin += 0.5 * problem.masses()[i] * v2;
            }
            kin + 0.5 * (u[s] + u[(s + 1) % k])
        })
        .collect();
    let mean = e.iter().sum::<f64>() / k as f64;
    let max_dev = e.iter().fold(0.0f64, |acc, x| acc.max((x - mean).abs()));
    Ok(EnergySeries { e, mean, max_dev })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::error::Error;
    use crate::types::ProblemSpec;

    fn spec(masses: Vec<f64>, d: usize, period: f64, k: usize, delta: f64) -> Arc<ProblemSpec> {
        Arc::new(ProblemSpec::new(masses, d, 1.0, period, k, delta).unwrap())
    }

    fn random_traj(p: &Arc<ProblemSpec>, seed: u64) -> Trajectory {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Trajectory::from_fn(p.clone(), |_, i, _| i as f64 * 1.5 + rng.gen_range(-0.5..0.5)).unwrap()
    }

    #[test]
    fn constant_two_body() {
        let p = spec(vec![1.0, 1.0], 2, 10.0, 10, 0.0);
        let tr = Trajectory::from_fn(p, |_, i, c| if c == 0 { i as f64 } else { 0.0 }).unwrap();
        let rep = action(&tr).unwrap();
        assert_eq!(rep.kinetic, 0.0);
        assert_eq!(rep.j, 10.0);
        assert_eq!(rep.j, rep.kinetic - rep.u_hat * 1.0);
    }

    #[test]
    fn kinetic_gradient_vanishes_on_constants() {
        let p = spec(vec![1.0, 2.0, 3.0], 3, 1.0, 9, 0.0);
        let tr = Trajectory::from_fn(p, |_, i, c| (i * 3 + c) as f64 * 0.37).unwrap();
        assert!(kinetic_gradient(&tr).iter().all(|g| *g == 0.0));
        assert_eq!(kinetic(&tr), 0.0);
    }

    #[test]
    fn residual_of_constant_two_body_is_force() {
        let p = spec(vec![1.0, 2.0], 2, 5.0, 10, 0.0);
        let tr = Trajectory::from_fn(p, |_, i, c| if c == 0 { 2.0 * i as f64 } else { 0.0 }).unwrap();
        let res = residual_n1(&tr).unwrap();
        // grad_{q_0} U = 1*2*(q0 - q1)/|q0-q1|^3 = (-0.5, 0); residual = -h * that
        for s in 0..10 {
            let at = s * 4;
            assert_eq!(&res.res[at..at + 4], &[0.25, 0.0, -0.25, 0.0]);
        }
    }

    #[test]
    fn residual_equals_gradient() {
        let p = spec(vec![1.0, 0.5, 2.0], 2, 3.0, 16, 0.0);
        for seed in 0..10 {
            let tr = random_traj(&p, seed);
            let rep = action(&tr).unwrap();
            let res = residual_n1(&tr).unwrap();
            for (a, b) in rep.grad.iter().zip(&res.res) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + rep.grad_norm));
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        for delta in [0.0, 0.3] {
            let p = spec(vec![1.0, 0.5, 2.0], 2, 3.0, 16, delta);
            let tr = random_traj(&p, 7);
            let rep = action(&tr).unwrap();
            let x = tr.values().to_vec();
            let j_at = |j: usize, dx: f64| {
                let mut v = x.clone();
                v[j] += dx;
                action(&Trajectory::new(p.clone(), v).unwrap()).unwrap().j
            };
            for j in 0..x.len() {
                // Richardson-extrapolated central difference
                let eps = 1e-4;
                let d1 = (j_at(j, eps) - j_at(j, -eps)) / (2.0 * eps);
                let d2 = (j_at(j, 2.0 * eps) - j_at(j, -2.0 * eps)) / (4.0 * eps);
                let fd = (4.0 * d1 - d2) / 3.0;
                let denom = rep.grad[j].abs().max(1e-6 * rep.grad_norm);
                assert!(
                    (fd - rep.grad[j]).abs() <= 1e-6 * denom,
                    "delta={delta} j={j} fd={fd} an={}",
                    rep.grad[j]
                );
            }
        }
    }

    #[test]
    fn errors_on_collision() {
        let p = spec(vec![1.0, 1.0], 1, 1.0, 4, 0.0);
        let tr = Trajectory::new(p, vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(action(&tr), Err(Error::Singularity(_))));
        assert!(matches!(residual_n1(&tr), Err(Error::Singularity(_))));
        assert!(matches!(discrete_energy(&tr), Err(Error::Singularity(_))));
    }

    #[test]
    fn constant_energy() {
        let p = spec(vec![1.0, 1.0], 2, 1.0, 6, 0.0);
        let tr = Trajectory::from_fn(p, |_, i, c| if c == 0 { 4.0 * i as f64 } else { 0.0 }).unwrap();
        let en = discrete_energy(&tr).unwrap();
        assert!(en.e.iter().all(|e| *e == -0.25));
        assert_eq!(en.max_dev, 0.0);
    }

    // Two equal masses on opposite ends of a diameter, rotating at the
    // circular rate: omega^2 R = m / (2R)^2 -> omega^2 = 1/(4 R^3).
    fn circular_pair(k: usize) -> Trajectory {
        let radius: f64 = 1.0;
        let omega = (1.0 / (4.0 * radius.powi(3))).sqrt();
        let period = 2.0 * std::f64::consts::PI / omega;
        let p = spec(vec![1.0, 1.0], 2, period, k, 0.0);
        Trajectory::from_fn(p, |s, i, c| {
            let th = 2.0 * std::f64::consts::PI * s as f64 / k as f64 + std::f64::consts::PI * i as f64;
            radius * if c == 0 { th.cos() } else { th.sin() }
        })
        .unwrap()
    }

    #[test]
    fn circular_energy_is_flat() {
        for k in [16, 32, 64] {
            let en = discrete_energy(&circular_pair(k)).unwrap();
            assert!(en.max_dev < 1e-13, "k={k} max_dev={}", en.max_dev);
        }
    }

    #[test]
    fn residual_converges_at_second_order() {
        let r64 = residual_n1(&circular_pair(64)).unwrap();
        let r128 = residual_n1(&circular_pair(128)).unwrap();
        let ratio = r64.l2_norm / r128.l2_norm;
        assert!((3.4..4.6).contains(&ratio), "ratio={ratio}");
    }

    // An eccentric orbit, where kinetic and potential energy trade off.
    #[test]
    fn energy_deviation_shrinks_on_eccentric_orbit() {
        let flow_dev = |k: usize| {
            let p = spec(vec![1.0, 1.0], 2, 1.0, k, 0.0);
            // sampled from an RK4 solution of a bound, eccentric pair
            let q0 = [1.0, 0.0, -1.0, 0.0];
            let v0 = [0.0, 0.25, 0.0, -0.25];
            let per = 4 * k;
            let flow = crate::reference::rk4_flow(&q0, &v0, &p, per, 1.0).unwrap();
            let tr = Trajectory::from_fn(p.clone(), |s, i, c| flow.positions[s * 4][i * 2 + c]).unwrap();
            // aperiodic sample, so drop the closing segment
            let en = discrete_energy(&tr).unwrap();
            let e = &en.e[..k - 1];
            let mean = e.iter().sum::<f64>() / e.len() as f64;
            e.iter().fold(0.0f64, |a, x| a.max((x - mean).abs()))
        };
        let coarse = flow_dev(64);
        let fine = flow_dev(128);
        assert!(fine < 0.3 * coarse, "coarse={coarse} fine={fine}");
    }

    proptest! {
        #[test]
        fn translation_and_time_shift_invariance(seed in 0u64..1000, dx in -10.0f64..10.0, dy in -10.0f64..10.0, by in -20i64..20) {
            let p = spec(vec![1.0, 0.5, 2.0], 2, 3.0, 12, 0.2);
            let tr = random_traj(&p, seed);
            let base = action(&tr).unwrap();
            let moved = action(&tr.translated(&[dx, dy]).unwrap()).unwrap();
            prop_assert!((moved.kinetic - base.kinetic).abs() <= 1e-12 * base.kinetic.max(1.0) * (1.0 + dx.abs() + dy.abs()));
            prop_assert!((moved.u_hat - base.u_hat).abs() <= 1e-12 * base.u_hat.abs() * (1.0 + dx.abs() + dy.abs()));
            let rolled = action(&tr.time_shifted(by)).unwrap();
            prop_assert!((rolled.j - base.j).abs() <= 1e-12 * base.j.abs());
            prop_assert!(base.j >= 0.0);
            prop_assert!(base.kinetic >= 0.0);
        }
    }
}
