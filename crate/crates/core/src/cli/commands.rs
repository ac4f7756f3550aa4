//! The four CLI verbs. Each returns the process exit status; errors map to
//! status 1 in `main`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::RunConfig;
use super::csv::{parse_csv, to_csv};
use super::plot::{caption, render_svg, PlotData};
use super::report::{format_report, parse_list, parse_report};
use crate::action::{action, discrete_energy, residual_n1};
use crate::error::Result;
use crate::optimizer::{minimize_with, random_init, refine, OrbitReport};
use crate::reference::{compare_to_flow, fitted_order, sample_lagrange, LagrangeOrbit};
use crate::symmetry::Reduction;
use crate::types::Trajectory;

/// Exit status when no run converged or a check failed.
pub const STATUS_UNMET: u8 = 2;

/// Outcome of one multi-start run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub result: std::result::Result<OrbitReport, String>,
}

impl RunOutcome {
    fn j(&self) -> f64 {
        self.result.as_ref().map(|r| r.j).unwrap_or(f64::INFINITY)
    }

    pub fn converged(&self) -> bool {
        self.result.as_ref().map(|r| r.converged).unwrap_or(false)
    }
}

pub fn run_file_stem(run: usize) -> String {
    format!("run_{run:04}")
}

fn single_run(cfg: &RunConfig, run: usize) -> RunOutcome {
    let seed = cfg.optimizer.seed.wrapping_add(run as u64);
    let result = (|| -> Result<OrbitReport> {
        let reduction = Reduction::new(cfg.problem.clone(), cfg.symmetry.clone())?;
        let red0 = random_init(&cfg.problem, &cfg.symmetry, seed, cfg.optimizer.init_radius)?;
        let opt = crate::optimizer::OptimizerConfig {
            seed,
            ..cfg.optimizer.clone()
        };
        let out = minimize_with(&reduction, red0, &opt, |_| {})?;
        let stem = cfg.output_dir.join(run_file_stem(run));
        fs::write(stem.with_extension("csv"), to_csv(&out.trajectory))?;
        fs::write(stem.with_extension("report"), format_report(&out.report))?;
        if cfg.emit_svg && matches!(cfg.problem.dim(), 2 | 3) {
            let svg = svg_for(&out.trajectory, &caption(cfg.problem.masses(), out.report.j))?;
            fs::write(stem.with_extension("svg"), svg)?;
        }
        Ok(out.report)
    })();
    RunOutcome {
        run,
        seed,
        result: result.map_err(|e| e.to_string()),
    }
}

/// Runs every start of a config in parallel and returns the outcomes sorted
/// by action (ties by seed), failures last.
pub fn execute(cfg: &RunConfig) -> Result<Vec<RunOutcome>> {
    fs::create_dir_all(&cfg.output_dir)?;
    let mut outcomes: Vec<RunOutcome> = (0..cfg.runs).into_par_iter().map(|r| single_run(cfg, r)).collect();
    outcomes.sort_by(|a, b| a.j().total_cmp(&b.j()).then(a.seed.cmp(&b.seed)));
    let mut index = String::from("rank,run,seed,j,grad_norm,converged,stop,min_sep,file\n");
    for (rank, o) in outcomes.iter().enumerate() {
        let file = format!("{}.csv", run_file_stem(o.run));
        match &o.result {
            Ok(r) => index.push_str(&format!(
                "{rank},{},{},{},{},{},{},{},{file}\n",
                o.run, o.seed, r.j, r.grad_norm, r.converged, r.stop, r.min_sep.r
            )),
            Err(e) => index.push_str(&format!(
                "{rank},{},{},,,false,error: {},,\n",
                o.run,
                o.seed,
                e.replace(',', ";")
            )),
        }
    }
    fs::write(cfg.output_dir.join("index.csv"), index)?;
    Ok(outcomes)
}

pub fn run(config_path: &Path, out: &mut impl Write) -> Result<u8> {
    let cfg = RunConfig::load(config_path)?;
    let outcomes = execute(&cfg)?;
    for o in &outcomes {
        match &o.result {
            Ok(r) => writeln!(
                out,
                "run {:>4} seed {:>6}  J={:.6}  |grad|={:.3e}  {}  min_sep={:.4}",
                o.run, o.seed, r.j, r.grad_norm, r.stop, r.min_sep.r
            )?,
            Err(e) => writeln!(out, "run {:>4} seed {:>6}  failed: {e}", o.run, o.seed)?,
        }
    }
    let converged = outcomes.iter().filter(|o| o.converged()).count();
    writeln!(
        out,
        "{converged}/{} runs converged; index at {}",
        outcomes.len(),
        cfg.output_dir.join("index.csv").display()
    )?;
    Ok(if converged > 0 { 0 } else { STATUS_UNMET })
}

/// One row of the `check` table.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: &'static str,
    pub value: f64,
    pub limit: String,
    /// `None` for informational rows.
    pub pass: Option<bool>,
}

/// Recomputes the diagnostics of a trajectory under a config.
///
/// `grad_tol_abs` is the absolute gradient tolerance the trajectory was
/// solved to; without it the config's `grad_tol` is scaled by the
/// trajectory's own action.
pub fn check_trajectory(traj: &Trajectory, cfg: &RunConfig, grad_tol_abs: Option<f64>) -> Result<Vec<CheckRow>> {
    let reduction = Reduction::new(cfg.problem.clone(), cfg.symmetry.clone())?;
    let rep = action(traj)?;
    let reduced = reduction.reduce_gradient(&rep.grad)?;
    let tol = grad_tol_abs.unwrap_or(cfg.optimizer.grad_tol * rep.j.abs().max(1.0));
    let res = residual_n1(traj)?;
    let identity_gap = rep
        .grad
        .iter()
        .zip(&res.res)
        .fold(0.0f64, |a, (g, r)| a.max((g - r).abs()));
    let energy = discrete_energy(traj)?;
    let sep = traj.min_separation()?;
    let scale = traj.values().iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let sym = reduction.check_symmetry(traj)?;

    // central differences of J along a few fixed random directions
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut fd_err = 0.0f64;
    let eps = 1e-6 * scale;
    let fd_floor = 1e-3 * rep.j.abs().max(1.0);
    for _ in 0..3 {
        let dir: Vec<f64> = (0..traj.values().len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let shifted = |sign: f64| -> Result<f64> {
            let v = traj
                .values()
                .iter()
                .zip(&dir)
                .map(|(x, d)| x + sign * eps * d)
                .collect();
            Ok(action(&Trajectory::new(traj.spec_arc().clone(), v)?)?.j)
        };
        let fd = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * eps);
        let an: f64 = rep.grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        let dnorm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        fd_err = fd_err.max((fd - an).abs() / (rep.grad_norm * dnorm).max(fd_floor));
    }

    Ok(vec![
        CheckRow {
            name: "action",
            value: rep.j,
            limit: "finite".into(),
            pass: Some(rep.j.is_finite()),
        },
        CheckRow {
            name: "reduced_grad_norm",
            value: reduced.norm(),
            limit: format!("< {tol:e}"),
            pass: Some(reduced.norm() < tol),
        },
        CheckRow {
            name: "residual_norm",
            value: res.norm,
            limit: "info".into(),
            pass: None,
        },
        CheckRow {
            name: "residual_vs_gradient",
            value: identity_gap,
            limit: format!("<= {:e}", 1e-12 * (1.0 + rep.grad_norm)),
            pass: Some(identity_gap <= 1e-12 * (1.0 + rep.grad_norm)),
        },
        CheckRow {
            name: "gradient_fd",
            value: fd_err,
            limit: "< 1e-6".into(),
            pass: Some(fd_err < 1e-6),
        },
        CheckRow {
            name: "min_separation",
            value: sep.r,
            limit: "> 0".into(),
            pass: Some(sep.r > 0.0),
        },
        CheckRow {
            name: "symmetry_violation",
            value: sym,
            limit: format!("<= {:e}", 1e-12 * scale),
            pass: Some(sym <= 1e-12 * scale),
        },
        CheckRow {
            name: "energy_mean",
            value: energy.mean,
            limit: "info".into(),
            pass: None,
        },
        CheckRow {
            name: "energy_max_dev",
            value: energy.max_dev,
            limit: "info".into(),
            pass: None,
        },
    ])
}

pub fn check(csv_path: &Path, config_path: &Path, out: &mut impl Write) -> Result<u8> {
    let cfg = RunConfig::load(config_path)?;
    let raw = parse_csv(&fs::read_to_string(csv_path)?)?;
    let traj = raw.into_trajectory(cfg.problem.clone())?;
    let run_tol = read_report(csv_path).and_then(|m| m.get("grad_tol_abs")?.parse().ok());
    let rows = check_trajectory(&traj, &cfg, run_tol)?;
    writeln!(out, "{:<22} {:>24}  {:<26} result", "check", "value", "limit")?;
    for r in &rows {
        let verdict = match r.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "-",
        };
        writeln!(out, "{:<22} {:>24.16e}  {:<26} {verdict}", r.name, r.value, r.limit)?;
    }
    Ok(if rows.iter().all(|r| r.pass != Some(false)) {
        0
    } else {
        STATUS_UNMET
    })
}

fn svg_for(traj: &Trajectory, caption: &str) -> Result<String> {
    let p = traj.spec();
    render_svg(
        &PlotData {
            k: p.k(),
            n_bodies: p.n_bodies(),
            dim: p.dim(),
            values: traj.values(),
        },
        caption,
    )
}

fn read_report(csv_path: &Path) -> Option<BTreeMap<String, String>> {
    let report: PathBuf = csv_path.with_extension("report");
    parse_report(&fs::read_to_string(report).ok()?).ok()
}

fn sibling_report(csv_path: &Path) -> Option<(Vec<f64>, f64)> {
    let map = read_report(csv_path)?;
    Some((parse_list(map.get("masses")?)?, map.get("j")?.parse().ok()?))
}

pub fn plot(csv_path: &Path, out_svg: &Path, config: Option<&Path>, out: &mut impl Write) -> Result<u8> {
    let raw = parse_csv(&fs::read_to_string(csv_path)?)?;
    let text = match config {
        Some(cfg_path) => {
            let cfg = RunConfig::load(cfg_path)?;
            let traj = raw.clone().into_trajectory(cfg.problem.clone())?;
            caption(cfg.problem.masses(), action(&traj)?.j)
        }
        None => match sibling_report(csv_path) {
            Some((masses, j)) => caption(&masses, j),
            None => format!("N={}, k={}", raw.n_bodies, raw.k),
        },
    };
    let svg = render_svg(
        &PlotData {
            k: raw.k,
            n_bodies: raw.n_bodies,
            dim: raw.dim,
            values: &raw.values,
        },
        &text,
    )?;
    fs::write(out_svg, svg)?;
    writeln!(out, "wrote {} ({text})", out_svg.display())?;
    Ok(0)
}

/// Lagrange-orbit order study and a grid-doubling study of the configured
/// problem.
pub fn convergence(config_path: &Path, out: &mut impl Write) -> Result<u8> {
    let cfg = RunConfig::load(config_path)?;

    let orbit = LagrangeOrbit::new(1.0, 1.0)?;
    let ks = [64usize, 128, 256];
    let mut hs = Vec::new();
    let mut residuals = Vec::new();
    let mut devs = Vec::new();
    writeln!(out, "lagrange orbit m=1 a=1 omega=sqrt(3)")?;
    for &k in &ks {
        let tr = sample_lagrange(&orbit, k)?;
        let res = residual_n1(&tr)?;
        let dev = compare_to_flow(&tr)?;
        writeln!(
            out,
            "  k={k:<4} residual_l2={:.6e} residual_norm={:.6e} flow_dev={dev:.6e}",
            res.l2_norm, res.norm
        )?;
        hs.push(tr.spec().step());
        residuals.push(res.l2_norm);
        devs.push(dev);
    }
    writeln!(
        out,
        "  fitted order: residual {:.3}, flow deviation {:.3}",
        fitted_order(&hs, &residuals),
        fitted_order(&hs, &devs)
    )?;

    let k = cfg.problem.k();
    let reduction = Reduction::new(cfg.problem.clone(), cfg.symmetry.clone())?;
    let red0 = random_init(
        &cfg.problem,
        &cfg.symmetry,
        cfg.optimizer.seed,
        cfg.optimizer.init_radius,
    )?;
    let coarse = minimize_with(&reduction, red0, &cfg.optimizer, |_| {})?;
    if !coarse.report.converged {
        writeln!(out, "minimizer at k={k} did not converge ({})", coarse.report.stop)?;
        return Ok(STATUS_UNMET);
    }
    let fine = refine(&coarse, 2 * k, &cfg.optimizer)?;
    writeln!(out, "configured problem, seed {}", cfg.optimizer.seed)?;
    for m in [&coarse, &fine] {
        let dev = compare_to_flow(&m.trajectory)
            .map(|d| format!("{d:.6e}"))
            .unwrap_or_else(|e| e.to_string());
        writeln!(
            out,
            "  k={:<4} J={:.8} converged={} energy_max_dev={:.6e} flow_dev={dev}",
            m.trajectory.k(),
            m.report.j,
            m.report.converged,
            m.report.energy_max_dev
        )?;
    }
    writeln!(
        out,
        "  energy max_dev ratio (2k/k): {:.4}",
        fine.report.energy_max_dev / coarse.report.energy_max_dev
    )?;
    Ok(0)
}
