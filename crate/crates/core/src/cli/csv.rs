//! Trajectory CSV: header `s,t,body,c0[,c1[,c2...]]`, one row per node and
//! body, every number written with 17 significant digits.

use std::sync::Arc;

use csv::{ReaderBuilder, Trim, WriterBuilder};

use crate::error::{Error, Result};
use crate::types::{ProblemSpec, Trajectory};

/// Formats a float with 17 significant digits, which round-trips binary64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Csv(e.to_string())
}

pub fn to_csv(traj: &Trajectory) -> String {
    let p = traj.spec();
    let (k, n, d) = (p.k(), p.n_bodies(), p.dim());
    let h = p.step();
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    let header: Vec<String> = ["s", "t", "body"]
        .into_iter()
        .map(String::from)
        .chain((0..d).map(|c| format!("c{c}")))
        .collect();
    w.write_record(&header).expect("in-memory write");
    for s in 0..k {
        let t = fmt17(s as f64 * h);
        for i in 0..n {
            let mut row = vec![s.to_string(), t.clone(), i.to_string()];
            row.extend(traj.body(s as i64, i).iter().map(|x| fmt17(*x)));
            w.write_record(&row).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Contents of a trajectory CSV before it is tied to a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTrajectory {
    pub k: usize,
    pub n_bodies: usize,
    pub dim: usize,
    /// Time of each node.
    pub times: Vec<f64>,
    /// Time-major values, as in [`Trajectory`].
    pub values: Vec<f64>,
}

impl CsvTrajectory {
    /// Binds the values to `problem`, which must agree on `k`, `N` and `d`.
    pub fn into_trajectory(self, problem: Arc<ProblemSpec>) -> Result<Trajectory> {
        if (self.k, self.n_bodies, self.dim) != (problem.k(), problem.n_bodies(), problem.dim()) {
            return Err(Error::Csv(format!(
                "csv has k={} N={} d={}, config has k={} N={} d={}",
                self.k,
                self.n_bodies,
                self.dim,
                problem.k(),
                problem.n_bodies(),
                problem.dim()
            )));
        }
        Trajectory::new(problem, self.values)
    }
}

pub fn parse_csv(text: &str) -> Result<CsvTrajectory> {
    let mut reader = ReaderBuilder::new().trim(Trim::All).from_reader(text.as_bytes());
    let cols: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(String::from).collect();
    if cols.len() < 4 || cols[..3] != ["s", "t", "body"] {
        return Err(Error::Csv(format!("unexpected header `{}`", cols.join(","))));
    }
    let dim = cols.len() - 3;
    for (c, name) in cols[3..].iter().enumerate() {
        if *name != format!("c{c}") {
            return Err(Error::Csv(format!("unexpected column `{name}`, expected c{c}")));
        }
    }

    let mut rows: Vec<(usize, f64, usize, Vec<f64>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let ln = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::Csv(format!("line {ln}: {what}"));
        let s: usize = record[0].parse().map_err(|_| bad("bad node index"))?;
        let t: f64 = record[1].parse().map_err(|_| bad("bad time"))?;
        let body: usize = record[2].parse().map_err(|_| bad("bad body index"))?;
        let coords = record
            .iter()
            .skip(3)
            .map(|f| f.parse::<f64>().map_err(|_| bad(&format!("bad number `{f}`"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push((s, t, body, coords));
    }
    if rows.is_empty() {
        return Err(Error::Csv("no trajectory rows".into()));
    }

    let n_bodies = rows.iter().map(|r| r.2).max().unwrap_or(0) + 1;
    if !rows.len().is_multiple_of(n_bodies) {
        return Err(Error::Csv(format!(
            "{} rows is not a multiple of {n_bodies} bodies",
            rows.len()
        )));
    }
    let k = rows.len() / n_bodies;
    let mut times = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(rows.len() * dim);
    for (n, (s, t, body, coords)) in rows.into_iter().enumerate() {
        if s != n / n_bodies || body != n % n_bodies {
            return Err(Error::Csv(format!(
                "row {} is (s={s}, body={body}), expected (s={}, body={})",
                n + 1,
                n / n_bodies,
                n % n_bodies
            )));
        }
        if body == 0 {
            times.push(t);
        }
        values.extend(coords);
    }
    Ok(CsvTrajectory {
        k,
        n_bodies,
        dim,
        times,
        values,
    })
}
