//! Multi-radial symmetry as a linear reduction.
//!
//! The coordinates are split into blocks; block `j` (width `b_j`, divisor
//! `A_j`) satisfies `q^(j)(s + k/A_j) = -q^(j)(s)`. Only the first `k/A_j`
//! nodes of each block are free. Those free values form a [`ReducedVector`],
//! and the full trajectory is rebuilt from them by sign flips.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ProblemSpec, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub width: usize,
    pub divisor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrySpec {
    pub blocks: Vec<Block>,
}

impl fmt::Display for SymmetrySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (n, b) in self.blocks.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{width={},divisor={}}}", b.width, b.divisor)?;
        }
        write!(f, "]")
    }
}

impl SymmetrySpec {
    pub fn new(blocks: Vec<Block>) -> Self {
        Self { blocks }
    }

    /// One block covering all `dim` coordinates.
    pub fn radial(dim: usize, divisor: usize) -> Self {
        Self::new(vec![Block { width: dim, divisor }])
    }

    /// Checks the blocks against a problem: widths sum to `d`, every divisor
    /// is even and divides `k`.
    pub fn validate(&self, problem: &ProblemSpec) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Symmetry("no blocks given".into()));
        }
        for (j, b) in self.blocks.iter().enumerate() {
            if b.width == 0 {
                return Err(Error::Symmetry(format!("block {j} has zero width")));
            }
            if b.divisor == 0 || b.divisor % 2 != 0 {
                return Err(Error::Symmetry(format!(
                    "block {j} has divisor {}, which must be positive and even",
                    b.divisor
                )));
            }
            if !problem.k().is_multiple_of(b.divisor) {
                return Err(Error::Symmetry(format!(
                    "block {j} divisor {} does not divide k={}",
                    b.divisor,
                    problem.k()
                )));
            }
        }
        let total: usize = self.blocks.iter().map(|b| b.width).sum();
        if total != problem.dim() {
            return Err(Error::Symmetry(format!(
                "block widths sum to {total}, dimension is {}",
                problem.dim()
            )));
        }
        Ok(())
    }
}

/// Free variables of the fundamental domain, concatenated block by block;
/// block `j` is a `(k/A_j) x N x b_j` array.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedVector(pub Vec<f64>);

impl ReducedVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &ReducedVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct BlockLayout {
    /// first coordinate of the block
    coord: usize,
    width: usize,
    /// nodes in the fundamental domain, `k / A_j`
    span: usize,
    divisor: usize,
    /// start of the block inside the reduced vector
    offset: usize,
}

/// A validated (problem, symmetry) pair with precomputed block offsets.
#[derive(Debug, Clone)]
pub struct Reduction {
    problem: Arc<ProblemSpec>,
    spec: SymmetrySpec,
    layout: Vec<BlockLayout>,
    len: usize,
}

impl Reduction {
    pub fn new(problem: Arc<ProblemSpec>, spec: SymmetrySpec) -> Result<Self> {
        spec.validate(&problem)?;
        let n = problem.n_bodies();
        let mut layout = Vec::with_capacity(spec.blocks.len());
        let (mut coord, mut offset) = (0, 0);
        for b in &spec.blocks {
            let span = problem.k() / b.divisor;
            layout.push(BlockLayout {
                coord,
                width: b.width,
                span,
                divisor: b.divisor,
                offset,
            });
            coord += b.width;
            offset += span * n * b.width;
        }
        Ok(Self {
            problem,
            spec,
            layout,
            len: offset,
        })
    }

    pub fn problem(&self) -> &Arc<ProblemSpec> {
        &self.problem
    }

    pub fn symmetry(&self) -> &SymmetrySpec {
        &self.spec
    }

    /// Length of a reduced vector.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn check_len(&self, got: usize, expected: usize, what: &str) -> Result<()> {
        if got != expected {
            return Err(Error::Symmetry(format!("{what} has length {got}, expected {expected}")));
        }
        Ok(())
    }

    /// Rebuilds the full trajectory; every block satisfies its antiperiod
    /// exactly.
    pub fn reconstruct(&self, red: &ReducedVector) -> Result<Trajectory> {
        self.check_len(red.len(), self.len, "reduced vector")?;
        let (k, n, d) = (self.problem.k(), self.problem.n_bodies(), self.problem.dim());
        let mut values = vec![0.0; self.problem.len()];
        for b in &self.layout {
            for s in 0..k {
                let flip = (s / b.span) % 2 == 1;
                let s0 = s % b.span;
                for i in 0..n {
                    let src = b.offset + (s0 * n + i) * b.width;
                    let dst = (s * n + i) * d + b.coord;
                    for c in 0..b.width {
                        let x = red.0[src + c];
                        values[dst + c] = if flip { -x } else { x };
                    }
                }
            }
        }
        Trajectory::new(self.problem.clone(), values)
    }

    /// Adjoint of [`Reduction::reconstruct`]: pulls a full-trajectory gradient
    /// back to the reduced variables.
    pub fn reduce_gradient(&self, full_grad: &[f64]) -> Result<ReducedVector> {
        self.check_len(full_grad.len(), self.problem.len(), "full gradient")?;
        let (n, d) = (self.problem.n_bodies(), self.problem.dim());
        let mut out = vec![0.0; self.len];
        for b in &self.layout {
            for s0 in 0..b.span {
                for i in 0..n {
                    let dst = b.offset + (s0 * n + i) * b.width;
                    for c in 0..b.width {
                        let mut acc = 0.0;
                        for m in 0..b.divisor {
                            let s = s0 + m * b.span;
                            let g = full_grad[(s * n + i) * d + b.coord + c];
                            if m % 2 == 0 {
                                acc += g;
                            } else {
                                acc -= g;
                            }
                        }
                        out[dst + c] = acc;
                    }
                }
            }
        }
        Ok(ReducedVector(out))
    }

    /// Fundamental-domain values of a trajectory (no symmetry check).
    pub fn restrict(&self, traj: &Trajectory) -> Result<ReducedVector> {
        self.check_len(traj.values().len(), self.problem.len(), "trajectory")?;
        let (n, d) = (self.problem.n_bodies(), self.problem.dim());
        let values = traj.values();
        let mut out = vec![0.0; self.len];
        for b in &self.layout {
            for s0 in 0..b.span {
                for i in 0..n {
                    let dst = b.offset + (s0 * n + i) * b.width;
                    let src = (s0 * n + i) * d + b.coord;
                    out[dst..dst + b.width].copy_from_slice(&values[src..src + b.width]);
                }
            }
        }
        Ok(ReducedVector(out))
    }

    /// Largest `|q^(j)(s + k/A_j) + q^(j)(s)|` over blocks, nodes, bodies
    /// and coordinates.
    pub fn check_symmetry(&self, traj: &Trajectory) -> Result<f64> {
        self.check_len(traj.values().len(), self.problem.len(), "trajectory")?;
        let (k, n) = (self.problem.k(), self.problem.n_bodies());
        let mut worst = 0.0f64;
        for b in &self.layout {
            for s in 0..k as i64 {
                for i in 0..n {
                    let a = &traj.body(s, i)[b.coord..b.coord + b.width];
                    let z = &traj.body(s + b.span as i64, i)[b.coord..b.coord + b.width];
                    for c in 0..b.width {
                        worst = worst.max((a[c] + z[c]).abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}

pub fn reconstruct(red: &ReducedVector, spec: &SymmetrySpec, problem: &Arc<ProblemSpec>) -> Result<Trajectory> {
    Reduction::new(problem.clone(), spec.clone())?.reconstruct(red)
}

pub fn reduce_gradient(full_grad: &[f64], spec: &SymmetrySpec, problem: &Arc<ProblemSpec>) -> Result<ReducedVector> {
    Reduction::new(problem.clone(), spec.clone())?.reduce_gradient(full_grad)
}

pub fn check_symmetry(traj: &Trajectory, spec: &SymmetrySpec) -> Result<f64> {
    Reduction::new(traj.spec_arc().clone(), spec.clone())?.check_symmetry(traj)
}
