//! Problem definition and the discrete periodic trajectory shared by every
//! other module.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Gravitational constant. Fixed to one throughout.
pub const GRAVITATIONAL_CONSTANT: f64 = 1.0;

/// Parameters of an N-body type problem with power-law pair potential.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    masses: Vec<f64>,
    dim: usize,
    alpha: f64,
    period: f64,
    k: usize,
    delta: f64,
}

impl ProblemSpec {
    pub fn new(masses: Vec<f64>, dim: usize, alpha: f64, period: f64, k: usize, delta: f64) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Problem("at least one body is required".into()));
        }
        if let Some((i, m)) = masses.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::Problem(format!("mass of body {i} must be positive, got {m}")));
        }
        if dim == 0 {
            return Err(Error::Problem("dimension must be positive".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Problem(format!("alpha must be positive, got {alpha}")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Problem(format!("period must be positive, got {period}")));
        }
        if k < 3 {
            return Err(Error::Problem(format!("k must be at least 3, got {k}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::Problem(format!("delta must be nonnegative, got {delta}")));
        }
        Ok(Self {
            masses,
            dim,
            alpha,
            period,
            k,
            delta,
        })
    }

    /// Same problem on a different time grid.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.masses.clone(), self.dim, self.alpha, self.period, k, self.delta)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.masses.clone(), self.dim, self.alpha, self.period, self.k, delta)
    }

    pub fn n_bodies(&self) -> usize {
        self.masses.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn g_const(&self) -> f64 {
        GRAVITATIONAL_CONSTANT
    }

    /// Time step `period / k`.
    pub fn step(&self) -> f64 {
        self.period / self.k as f64
    }

    /// Number of reals in one node (`N * d`).
    pub fn node_len(&self) -> usize {
        self.masses.len() * self.dim
    }

    /// Number of reals in a full trajectory (`k * N * d`).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.k * self.node_len()
    }
}

/// Distance between bodies `i < l` at node `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSeparation {
    pub s: usize,
    pub i: usize,
    pub l: usize,
    pub r: f64,
}

/// Periodic piecewise-linear path sampled at `k` uniform nodes.
///
/// Node `s` holds the positions at `t_s = s * h` for `s = 0..k`; node indices
/// wrap modulo `k`, so `t_k` is node 0 again. Storage is time-major:
/// `values[(s * N + i) * d + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    spec: Arc<ProblemSpec>,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn new(spec: Arc<ProblemSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Domain(format!(
                "trajectory needs {} values (k={} N={} d={}), got {}",
                spec.len(),
                spec.k(),
                spec.n_bodies(),
                spec.dim(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("trajectory entry {pos} is {}", values[pos])));
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: Arc<ProblemSpec>) -> Self {
        let values = vec![0.0; spec.len()];
        Self { spec, values }
    }

    /// Builds a trajectory from `f(s, i, c)`.
    pub fn from_fn(spec: Arc<ProblemSpec>, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let (k, n, d) = (spec.k(), spec.n_bodies(), spec.dim());
        let mut values = Vec::with_capacity(spec.len());
        for s in 0..k {
            for i in 0..n {
                for c in 0..d {
                    values.push(f(s, i, c));
                }
            }
        }
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn spec_arc(&self) -> &Arc<ProblemSpec> {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn k(&self) -> usize {
        self.spec.k()
    }

    /// Wraps any integer node index into `0..k`.
    pub fn wrap(&self, s: i64) -> usize {
        s.rem_euclid(self.spec.k() as i64) as usize
    }

    /// All bodies at node `s` (wrapped), `N * d` reals.
    pub fn node(&self, s: i64) -> &[f64] {
        let w = self.spec.node_len();
        let s = self.wrap(s);
        &self.values[s * w..(s + 1) * w]
    }

    /// Position of body `i` at node `s` (wrapped).
    pub fn body(&self, s: i64, i: usize) -> &[f64] {
        let d = self.spec.dim();
        &self.node(s)[i * d..(i + 1) * d]
    }

    /// Adds `shift` to every body at every node.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        let d = self.spec.dim();
        if shift.len() != d {
            return Err(Error::Domain(format!(
                "shift has {} components, expected {d}",
                shift.len()
            )));
        }
        let values = self.values.iter().enumerate().map(|(p, v)| v + shift[p % d]).collect();
        Self::new(self.spec.clone(), values)
    }

    /// Cyclic relabelling of nodes: node `s` of the result is node `s + by` here.
    pub fn time_shifted(&self, by: i64) -> Self {
        let k = self.k() as i64;
        let values = (0..k).flat_map(|s| self.node(s + by).iter().copied()).collect();
        Self {
            spec: self.spec.clone(),
            values,
        }
    }

    /// Piecewise-linear value `q(t)` for `t` in `[0, T]`; `t = T` gives node 0.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        let period = self.spec.period();
        if !(0.0..=period).contains(&t) {
            return Err(Error::Domain(format!("t={t} outside [0, {period}]")));
        }
        let h = self.spec.step();
        let x = t / h;
        let nearest = x.round();
        if (x - nearest).abs() <= 8.0 * f64::EPSILON * nearest.max(1.0) {
            return Ok(self.node(nearest as i64).to_vec());
        }
        let seg = (x.floor() as usize).min(self.k() - 1);
        let frac = (t - seg as f64 * h) / h;
        let a = self.node(seg as i64);
        let b = self.node(seg as i64 + 1);
        Ok(a.iter().zip(b).map(|(qa, qb)| (1.0 - frac) * qa + frac * qb).collect())
    }

    /// Samples this path on a different uniform grid with the same period.
    pub fn resampled(&self, k: usize) -> Result<Self> {
        let spec = Arc::new(self.spec.with_k(k)?);
        let h = spec.step();
        let mut values = Vec::with_capacity(spec.len());
        for s in 0..k {
            let t = (s as f64 * h).min(self.spec.period());
            values.extend(self.interpolate(t)?);
        }
        Self::new(spec, values)
    }

    /// Closest pair over all nodes; ties go to the smallest `(s, i, l)`.
    pub fn min_separation(&self) -> Result<PairSeparation> {
        let n = self.spec.n_bodies();
        if n < 2 {
            return Err(Error::Domain("separation needs at least two bodies".into()));
        }
        let mut best = PairSeparation {
            s: 0,
            i: 0,
            l: 1,
            r: f64::INFINITY,
        };
        for s in 0..self.k() {
            for i in 0..n {
                for l in i + 1..n {
                    let r = distance(self.body(s as i64, i), self.body(s as i64, l));
                    if r < best.r {
                        best = PairSeparation { s, i, l, r };
                    }
                }
            }
        }
        Ok(best)
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt()
}
