//! Static SVG drawings of a trajectory: one panel for planar orbits, and for
//! spatial ones a 2x2 grid with the x-y, y-z and z-x projections plus an
//! oblique view of the orbit in space (bottom right).

use std::fmt::Write as _;

use crate::error::{Error, Result};

const PANEL: f64 = 320.0;
const MARGIN: f64 = 16.0;
const CAPTION: f64 = 28.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Points to draw: `k` nodes of `n_bodies` bodies in `dim` coordinates,
/// time-major.
pub struct PlotData<'a> {
    pub k: usize,
    pub n_bodies: usize,
    pub dim: usize,
    pub values: &'a [f64],
}

/// `m=[1,1,1], J=0.493`
pub fn caption(masses: &[f64], j: f64) -> String {
    let ms: Vec<String> = masses.iter().map(|m| m.to_string()).collect();
    format!("m=[{}], J={j:.3}", ms.join(","))
}

type Projection = fn(&[f64]) -> (f64, f64);

fn oblique(q: &[f64]) -> (f64, f64) {
    // 30-degree axonometric view
    let (c, s) = (0.866_025_403_784_438_6, 0.5);
    (c * (q[0] - q[1]), q[2] + s * (q[0] + q[1]))
}

fn panel(out: &mut String, data: &PlotData<'_>, proj: Projection, x0: f64, y0: f64, label: &str) {
    let pts: Vec<(f64, f64)> = data.values.chunks(data.dim).map(proj).collect();
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &pts {
        lo_x = lo_x.min(*x);
        hi_x = hi_x.max(*x);
        lo_y = lo_y.min(*y);
        hi_y = hi_y.max(*y);
    }
    // equal aspect: one scale for both axes
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-12);
    let inner = PANEL - 2.0 * MARGIN;
    let scale = inner / span;
    let cx = 0.5 * (lo_x + hi_x);
    let cy = 0.5 * (lo_y + hi_y);
    let to_px = |(x, y): (f64, f64)| (x0 + PANEL / 2.0 + (x - cx) * scale, y0 + PANEL / 2.0 - (y - cy) * scale);

    let _ = writeln!(
        out,
        r##"<rect x="{x0}" y="{y0}" width="{PANEL}" height="{PANEL}" fill="none" stroke="#cccccc"/>"##
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-size="11" fill="#555555">{label}</text>"##,
        x0 + 4.0,
        y0 + 12.0
    );
    for i in 0..data.n_bodies {
        let mut path = String::new();
        for s in 0..=data.k {
            let (px, py) = to_px(pts[(s % data.k) * data.n_bodies + i]);
            let _ = write!(path, "{}{px:.2},{py:.2}", if s == 0 { "" } else { " " });
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{path}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            COLORS[i % COLORS.len()]
        );
    }
}

pub fn render_svg(data: &PlotData<'_>, caption: &str) -> Result<String> {
    if data.k == 0 || data.n_bodies == 0 || data.values.is_empty() {
        return Err(Error::Plot("empty trajectory".into()));
    }
    if data.values.len() != data.k * data.n_bodies * data.dim {
        return Err(Error::Plot("value count does not match k x N x d".into()));
    }
    let panels: Vec<(Projection, &str)> = match data.dim {
        2 => vec![(|q| (q[0], q[1]), "x-y")],
        3 => vec![
            (|q| (q[0], q[1]), "x-y"),
            (|q| (q[1], q[2]), "y-z"),
            (|q| (q[2], q[0]), "z-x"),
            (oblique, "space"),
        ],
        d => return Err(Error::Plot(format!("cannot draw dimension {d}, only 2 or 3"))),
    };
    let cols = if panels.len() == 1 { 1 } else { 2 };
    let rows = panels.len().div_ceil(cols);
    let width = cols as f64 * PANEL;
    let height = rows as f64 * PANEL + CAPTION;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (n, (proj, label)) in panels.into_iter().enumerate() {
        let x0 = (n % cols) as f64 * PANEL;
        let y0 = (n / cols) as f64 * PANEL;
        panel(&mut out, data, proj, x0, y0, label);
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle" font-family="sans-serif">{}</text>"#,
        width / 2.0,
        height - 9.0,
        caption
    );
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{sample_lagrange, LagrangeOrbit};

    #[test]
    fn caption_style() {
        assert_eq!(caption(&[1.0, 1.0, 1.0], 0.4931), "m=[1,1,1], J=0.493");
        assert_eq!(caption(&[1.0, 0.5, 1.5], 0.805), "m=[1,0.5,1.5], J=0.805");
    }

    #[test]
    fn planar_single_panel() {
        let tr = sample_lagrange(&LagrangeOrbit::new(1.0, 1.0).unwrap(), 24).unwrap();
        let svg = render_svg(
            &PlotData {
                k: 24,
                n_bodies: 3,
                dim: 2,
                values: tr.values(),
            },
            "m=[1,1,1], J=1.000",
        )
        .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches(r##"stroke="#cccccc""##).count(), 1);
        assert!(svg.contains("m=[1,1,1], J=1.000"));
        // closed: each polyline has k + 1 points
        let first = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(first.split(' ').filter(|t| t.contains(',')).count(), 25);
    }

    #[test]
    fn spatial_four_panels() {
        let values: Vec<f64> = (0..8 * 2 * 3).map(|x| (x as f64).sin()).collect();
        let svg = render_svg(
            &PlotData {
                k: 8,
                n_bodies: 2,
                dim: 3,
                values: &values,
            },
            "c",
        )
        .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 8);
        for label in ["x-y", "y-z", "z-x", "space"] {
            assert!(svg.contains(&format!(">{label}<")));
        }
    }

    #[test]
    fn rejects_unsupported() {
        let v = vec![0.0; 4 * 4];
        assert!(render_svg(
            &PlotData {
                k: 4,
                n_bodies: 1,
                dim: 4,
                values: &v
            },
            ""
        )
        .is_err());
        assert!(render_svg(
            &PlotData {
                k: 0,
                n_bodies: 1,
                dim: 2,
                values: &[]
            },
            ""
        )
        .is_err());
    }
}
