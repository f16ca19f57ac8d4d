//! CSV, SVG and JSON output for reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::json;

use super::{ExperimentError, Report, Series, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Svg,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            "json" | "json-summary" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// One row per `(parameter, branch)`; diverged cells carry status `DIVERGED`.
pub fn to_csv(series: &Series) -> String {
    let mut out = format!("{},branch,value,status\n", series.param);
    for (p, row) in series.points.iter().zip(&series.cells) {
        for (n, cell) in row.iter().enumerate() {
            let value = cell.value.map(|v| v.to_string()).unwrap_or_default();
            let status = match cell.status {
                Status::Ok => "ok",
                Status::Diverged => "DIVERGED",
                Status::Failed => "FAILED",
            };
            let _ = writeln!(out, "{p},{},{value},{status}", n + 1);
        }
    }
    out
}

/// Line plot of all branches; diverged samples are drawn as crosses on the lower edge.
pub fn to_svg(series: &Series, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    let log_x = series.points.iter().all(|&p| p > 0.0)
        && series.points.iter().cloned().fold(f64::INFINITY, f64::min) * 16.0
            < series.points.iter().cloned().fold(0.0, f64::max);
    let xf = |p: f64| if log_x { p.log2() } else { p };
    let xs: Vec<f64> = series.points.iter().map(|&p| xf(p)).collect();
    let ys: Vec<f64> = series.cells.iter().flatten().filter(|c| c.status == Status::Ok).filter_map(|c| c.value).collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" stroke="black" fill="none"/>"#,
        H - PAD,
        W - PAD
    );
    let xlabel = if log_x { format!("log2 {}", series.param) } else { series.param.clone() };
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(&xlabel));
    let _ = writeln!(s, r#"<text x="8" y="{PAD}" font-size="10">{y1:.4e}</text>"#);
    let _ = writeln!(s, r#"<text x="8" y="{}" font-size="10">{y0:.4e}</text>"#, H - PAD);
    let colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];
    let branches = series.cells.iter().map(|r| r.len()).max().unwrap_or(0);
    for n in 0..branches {
        let colour = colours[n % colours.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (i, row) in series.cells.iter().enumerate() {
            match row.get(n) {
                Some(c) if c.status == Status::Ok && c.value.is_some() => {
                    let (x, y) = (px(xs[i]), py(c.value.unwrap_or_default()));
                    let _ = write!(d, "{}{x:.2} {y:.2} ", if pen_down { "L" } else { "M" });
                    pen_down = true;
                }
                Some(c) if c.status == Status::Diverged => {
                    let (x, y) = (px(xs[i]), H - PAD + 10.0);
                    let _ = writeln!(
                        s,
                        r#"<path d="M{} {} L{} {} M{} {} L{} {}" stroke="{colour}"/>"#,
                        x - 4.0,
                        y - 4.0,
                        x + 4.0,
                        y + 4.0,
                        x - 4.0,
                        y + 4.0,
                        x + 4.0,
                        y - 4.0
                    );
                    pen_down = false;
                }
                _ => pen_down = false,
            }
        }
        if !d.is_empty() {
            let _ = writeln!(s, r#"<path d="{}" stroke="{colour}" fill="none"/>"#, d.trim_end());
        }
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `{"experiment", "pass", "assertions": [{"name", "pass", "detail"}], "data"}`.
pub fn to_json_summary(report: &dyn Report) -> String {
    let v = json!({
        "experiment": report.name(),
        "pass": report.passed(),
        "assertions": report.assertions(),
        "data": report.extra(),
    });
    serde_json::to_string_pretty(&v).expect("summary serializes")
}

fn write(path: PathBuf, text: &str, written: &mut Vec<PathBuf>) -> Result<(), ExperimentError> {
    std::fs::write(&path, text).map_err(|e| ExperimentError::Io { path: path.display().to_string(), source: e })?;
    written.push(path);
    Ok(())
}

/// Writes `<stem>.csv` / `.svg` (one per series, suffixed by label when several) and `<stem>.json`.
pub fn emit(report: &dyn Report, formats: &[Format], dir: &Path, stem: &str) -> Result<Vec<PathBuf>, ExperimentError> {
    std::fs::create_dir_all(dir).map_err(|e| ExperimentError::Io { path: dir.display().to_string(), source: e })?;
    let series = report.series();
    let name = |s: &Series, ext: &str| {
        if series.len() > 1 {
            dir.join(format!("{stem}_{}.{ext}", s.label))
        } else {
            dir.join(format!("{stem}.{ext}"))
        }
    };
    let mut written = Vec::new();
    for f in formats {
        match f {
            Format::Csv => {
                for s in &series {
                    write(name(s, "csv"), &to_csv(s), &mut written)?;
                }
            }
            Format::Svg => {
                for s in &series {
                    write(name(s, "svg"), &to_svg(s, report.name()), &mut written)?;
                }
            }
            Format::Json => write(dir.join(format!("{stem}.json")), &to_json_summary(report), &mut written)?,
        }
    }
    Ok(written)
}
