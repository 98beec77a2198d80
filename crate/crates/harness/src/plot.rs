//! Log-log SVG plots of the decay series with predicted-slope guides.
//! Output is a pure function of the input numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::pipeline::Series;
use crate::report::ReportError;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;

/// One curve with an optional guide `value ~ t^-exponent` through the first
/// point at or after `anchor_t`.
pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub points: Vec<(f64, f64)>,
    pub guide: Option<(f64, f64)>,
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

/// `None` when no point is positive on both axes.
pub fn render_svg(spec: &PlotSpec) -> Option<String> {
    let pts: Vec<(f64, f64)> = spec
        .points
        .iter()
        .filter(|(t, v)| *t > 0.0 && *v > 0.0 && v.is_finite())
        .map(|(t, v)| (t.log10(), v.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let (x0, x1, y0, y1) = (x0.floor(), x1.ceil(), y0.floor(), y1.ceil());
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle">{}</text>"#, W / 2.0, spec.title);
    for d in x0 as i64..=x1 as i64 {
        let x = num(sx(d as f64));
        let _ = writeln!(s, r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#ddd"/>"##, PAD, H - PAD);
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">1e{d}</text>"#, H - PAD + 18.0);
    }
    let step = ((y1 - y0) / 8.0).ceil().max(1.0) as i64;
    for d in (y0 as i64..=y1 as i64).step_by(step as usize) {
        let y = num(sy(d as f64));
        let _ = writeln!(s, r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/>"##, PAD, W - PAD);
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" dy="4">1e{d}</text>"#, PAD - 6.0);
    }
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let path: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", num(sx(*x)), num(sy(*y)))).collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.5" points="{}"/>"##,
        path.join(" ")
    );
    if let Some((anchor_t, exponent)) = spec.guide {
        let anchor = anchor_t.log10();
        if let Some(&(ax, ay)) = pts.iter().find(|(x, _)| *x >= anchor) {
            // clip the guide to the plot box
            let mut bx = x1;
            let mut by = ay - exponent * (bx - ax);
            if by < y0 {
                by = y0;
                bx = ax + (ay - y0) / exponent;
            }
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c0392b" stroke-dasharray="6 4"/>"##,
                num(sx(ax)),
                num(sy(ay)),
                num(sx(bx)),
                num(sy(by))
            );
            let _ = writeln!(
                s,
                r##"<text x="{}" y="40" text-anchor="end" fill="#c0392b">guide t^-{exponent:.3}</text>"##,
                W - PAD
            );
        }
    }
    s.push_str("</svg>\n");
    Some(s)
}

/// One SVG per energy order plus damping and L-infinity, into `dir`.
/// `predicted(name)` gives the guide exponent. Returns warnings for
/// series that could not be drawn.
pub fn emit_plots(
    dir: &Path,
    series: &Series,
    anchor_t: f64,
    predicted: impl Fn(&str) -> Option<f64>,
) -> Result<Vec<String>, ReportError> {
    let mut warnings = Vec::new();
    if series.t.len() < 2 {
        warnings.push(format!("{} snapshot(s): nothing to plot", series.t.len()));
        return Ok(warnings);
    }
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let names: Vec<&String> = series
        .names
        .iter()
        .filter(|n| n.starts_with('E') || *n == "damping" || *n == "linf_sq")
        .collect();
    for name in names {
        let spec = PlotSpec {
            title: name,
            points: series.pairs(name).unwrap_or_default(),
            guide: predicted(name).map(|p| (anchor_t, p)),
        };
        match render_svg(&spec) {
            Some(svg) => {
                let path = dir.join(format!("{name}.svg"));
                fs::write(&path, svg).map_err(|source| ReportError::Io { path, source })?;
            }
            None => warnings.push(format!("{name}: no positive values, plot skipped")),
        }
    }
    Ok(warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(n: usize) -> Series {
        let t: Vec<f64> = (1..=n).map(|j| j as f64).collect();
        Series {
            names: vec!["E0".into(), "damping".into()],
            columns: vec![t.iter().map(|t| t.powi(-2)).collect(), t.iter().map(|t| t.powi(-3)).collect()],
            t,
        }
    }

    #[test]
    fn deterministic_and_one_file_per_series() {
        let dir = tempfile::tempdir().unwrap();
        let w = emit_plots(dir.path(), &series(50), 2.0, |_| Some(2.0)).unwrap();
        assert!(w.is_empty());
        let a = fs::read(dir.path().join("E0.svg")).unwrap();
        assert!(dir.path().join("damping.svg").exists());
        let b = render_svg(&PlotSpec {
            title: "E0",
            points: series(50).pairs("E0").unwrap(),
            guide: Some((2.0, 2.0)),
        })
        .unwrap();
        assert_eq!(a, b.into_bytes());
    }

    #[test]
    fn single_snapshot_warns() {
        let dir = tempfile::tempdir().unwrap();
        let w = emit_plots(dir.path(), &series(1), 2.0, |_| None).unwrap();
        assert_eq!(w.len(), 1);
        assert!(!dir.path().join("E0.svg").exists());
    }
}
