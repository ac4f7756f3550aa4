//! `key=value` report files, one field per line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::optimizer::OrbitReport;

fn list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(","))
}

pub fn format_report(r: &OrbitReport) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    kv("j", r.j.to_string());
    kv("grad_norm", r.grad_norm.to_string());
    kv("grad_tol_abs", r.grad_tol.to_string());
    kv("iters", r.iters.to_string());
    kv("converged", r.converged.to_string());
    kv("stop", r.stop.to_string());
    kv("min_sep_r", r.min_sep.r.to_string());
    kv("min_sep_s", r.min_sep.s.to_string());
    kv("min_sep_i", r.min_sep.i.to_string());
    kv("min_sep_l", r.min_sep.l.to_string());
    kv("energy_mean", r.energy_mean.to_string());
    kv("energy_max_dev", r.energy_max_dev.to_string());
    kv("residual_norm", r.residual_norm.to_string());
    let p = &r.problem;
    kv("n_bodies", p.n_bodies().to_string());
    kv("dim", p.dim().to_string());
    kv("masses", list(p.masses()));
    kv("alpha", p.alpha().to_string());
    kv("period", p.period().to_string());
    kv("k", p.k().to_string());
    kv("delta", p.delta().to_string());
    kv("g_const", p.g_const().to_string());
    kv("blocks", r.symmetry.to_string());
    let c = &r.config;
    kv("max_iters", c.max_iters.to_string());
    kv("grad_tol", c.grad_tol.to_string());
    kv("step_init", c.step_init.to_string());
    kv("armijo_c", c.armijo_c.to_string());
    kv("backtrack", c.backtrack.to_string());
    kv("step_floor", c.step_floor.to_string());
    kv("seed", c.seed.to_string());
    kv("init_radius", c.init_radius.to_string());
    out
}

pub fn parse_report(text: &str) -> Result<BTreeMap<String, String>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Csv(format!("report line {}: missing `=`", n + 1)))
        })
        .collect()
}

/// Parses a `[a,b,c]` list of floats as written by [`format_report`].
pub fn parse_list(v: &str) -> Option<Vec<f64>> {
    let inner = v.trim().strip_prefix('[')?.strip_suffix(']')?;
    if inner.trim().is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(|x| x.trim().parse().ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::OptimizerConfig;
    use crate::reference::{sample_lagrange, LagrangeOrbit};
    use crate::symmetry::SymmetrySpec;

    #[test]
    fn report_fields_parse_back() {
        let tr = sample_lagrange(&LagrangeOrbit::new(1.0, 1.0).unwrap(), 12).unwrap();
        let rep = OrbitReport::assess(&tr, &SymmetrySpec::radial(2, 2), &OptimizerConfig::default()).unwrap();
        let map = parse_report(&format_report(&rep)).unwrap();
        assert_eq!(map["j"].parse::<f64>().unwrap(), rep.j);
        assert_eq!(parse_list(&map["masses"]).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(map["blocks"], "[{width=2,divisor=2}]");
        assert_eq!(map["k"], "12");
        assert_eq!(map["seed"], "0");
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("[1,0.5,1.5]"), Some(vec![1.0, 0.5, 1.5]));
        assert_eq!(parse_list("[]"), Some(vec![]));
        assert_eq!(parse_list("1,2"), None);
        assert!(parse_report("a=1\nnonsense\n").is_err());
    }
}
