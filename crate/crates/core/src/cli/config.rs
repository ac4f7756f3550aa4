//! Run configuration: a flat TOML file.
//!
//! ```toml
//! n_bodies = 3
//! dim = 2
//! masses = [1.0, 1.0, 1.0]
//! period = 6.283185307179586
//! k = 60
//! delta = 0.05
//! blocks = [{ width = 2, divisor = 2 }]
//! runs = 4
//! output_dir = "out"
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::optimizer::OptimizerConfig;
use crate::symmetry::{Block, SymmetrySpec};
use crate::types::ProblemSpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_bodies: usize,
    dim: usize,
    masses: Vec<f64>,
    #[serde(default = "one")]
    alpha: f64,
    period: f64,
    k: usize,
    #[serde(default)]
    delta: f64,
    blocks: Vec<Block>,
    max_iters: Option<usize>,
    grad_tol: Option<f64>,
    step_init: Option<f64>,
    armijo_c: Option<f64>,
    backtrack: Option<f64>,
    step_floor: Option<f64>,
    seed: Option<u64>,
    init_radius: Option<f64>,
    #[serde(default = "one_run")]
    runs: usize,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    emit_svg: bool,
}

fn one() -> f64 {
    1.0
}

fn one_run() -> usize {
    1
}

/// A validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Arc<ProblemSpec>,
    pub symmetry: SymmetrySpec,
    pub optimizer: OptimizerConfig,
    pub runs: usize,
    /// Resolved against the config file's directory when relative.
    pub output_dir: PathBuf,
    pub emit_svg: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|msg| Error::Config {
            path: path.to_path_buf(),
            msg,
        })
    }

    /// Parses config text; relative `output_dir` is joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> std::result::Result<Self, String> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        if raw.masses.len() != raw.n_bodies {
            return Err(format!(
                "field `masses` has {} entries but `n_bodies` is {}",
                raw.masses.len(),
                raw.n_bodies
            ));
        }
        let problem = ProblemSpec::new(raw.masses, raw.dim, raw.alpha, raw.period, raw.k, raw.delta)
            .map_err(|e| e.to_string())?;
        let symmetry = SymmetrySpec::new(raw.blocks);
        symmetry
            .validate(&problem)
            .map_err(|e| format!("field `blocks`: {e}"))?;
        let d = OptimizerConfig::default();
        let optimizer = OptimizerConfig {
            max_iters: raw.max_iters.unwrap_or(d.max_iters),
            grad_tol: raw.grad_tol.unwrap_or(d.grad_tol),
            step_init: raw.step_init.unwrap_or(d.step_init),
            armijo_c: raw.armijo_c.unwrap_or(d.armijo_c),
            backtrack: raw.backtrack.unwrap_or(d.backtrack),
            step_floor: raw.step_floor.unwrap_or(d.step_floor),
            seed: raw.seed.unwrap_or(d.seed),
            init_radius: raw.init_radius.unwrap_or(d.init_radius),
        };
        optimizer.validate().map_err(|e| e.to_string())?;
        if raw.runs == 0 {
            return Err("field `runs` must be at least 1".into());
        }
        let output_dir = raw.output_dir.unwrap_or_else(|| PathBuf::from("out"));
        let output_dir = if output_dir.is_absolute() {
            output_dir
        } else {
            base.join(output_dir)
        };
        Ok(Self {
            problem: Arc::new(problem),
            symmetry,
            optimizer,
            runs: raw.runs,
            output_dir,
            emit_svg: raw.emit_svg,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
n_bodies = 3
dim = 2
masses = [1.0, 1.0, 1.0]
period = 6.0
k = 12
blocks = [{ width = 2, divisor = 2 }]
"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse(MINIMAL, Path::new("/tmp/x")).unwrap();
        assert_eq!(c.problem.alpha(), 1.0);
        assert_eq!(c.problem.delta(), 0.0);
        assert_eq!(c.optimizer, OptimizerConfig::default());
        assert_eq!(c.runs, 1);
        assert_eq!(c.output_dir, PathBuf::from("/tmp/x/out"));
        assert!(!c.emit_svg);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = format!("{MINIMAL}\nmax_iter = 5\n");
        let err = RunConfig::parse(&text, Path::new(".")).unwrap_err();
        assert!(err.contains("max_iter"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn odd_divisor_names_the_block() {
        let text = MINIMAL.replace("divisor = 2", "divisor = 3");
        let err = RunConfig::parse(&text, Path::new(".")).unwrap_err();
        assert!(err.contains("blocks") && err.contains("block 0"), "{err}");
    }

    #[test]
    fn mass_count_must_match() {
        let text = MINIMAL.replace("n_bodies = 3", "n_bodies = 4");
        assert!(RunConfig::parse(&text, Path::new(".")).unwrap_err().contains("masses"));
    }

    #[test]
    fn bad_optimizer_setting() {
        let text = format!("{MINIMAL}\nbacktrack = 1.5\n");
        assert!(RunConfig::parse(&text, Path::new("."))
            .unwrap_err()
            .contains("backtrack"));
    }
}
