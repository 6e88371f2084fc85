//! CSV, SVG and manifest writers. Everything is rendered to strings first so
//! a run either writes all of its files or none.

use crate::experiments::{NamedSeries, Report};
use mieflow_core::estimator::SeriesResult;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str = "abscissa,mean,stderr,n_samples";

pub fn csv(series: &SeriesResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (x, r) in &series.points {
        let _ = writeln!(out, "{x:.16e},{:.16e},{:.16e},{}", r.mean, r.stderr, r.n_samples);
    }
    out
}

/// Parses a file written by [`csv`] back into `(abscissa, mean, stderr, n)`.
pub fn parse_csv(text: &str) -> Option<Vec<(f64, f64, f64, usize)>> {
    let mut lines = text.lines();
    if lines.next()? != CSV_HEADER {
        return None;
    }
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 4 {
                return None;
            }
            Some((f[0].parse().ok()?, f[1].parse().ok()?, f[2].parse().ok()?, f[3].parse().ok()?))
        })
        .collect()
}

/// Log-log scatter with error bars and the fitted curve, if any. Points with
/// non-positive coordinates are left out.
pub fn svg(series: &NamedSeries) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 60.0;
    let pts: Vec<(f64, f64, f64)> =
        series.data.points.iter().filter(|(x, r)| *x > 0.0 && r.mean > 0.0).map(|(x, r)| (*x, r.mean, r.stderr)).collect();
    let mut out = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n");
    let _ = writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(out, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>", W / 2.0, series.name);
    if pts.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (mut x0, mut x1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0.ln()), b.max(p.0.ln())));
    let (mut y0, mut y1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1.ln()), b.max(p.1.ln())));
    for (lo, hi) in [(&mut x0, &mut x1), (&mut y0, &mut y1)] {
        let pad = ((*hi - *lo) * 0.05).max(0.1);
        *lo -= pad;
        *hi += pad;
    }
    let px = |x: f64| PAD + (x.ln() - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y.ln() - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let _ = writeln!(
        out,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for (axis, lo, hi) in [("x", x0, x1), ("y", y0, y1)] {
        for e in (lo / std::f64::consts::LN_10).ceil() as i32..=(hi / std::f64::consts::LN_10).floor() as i32 {
            let v = 10f64.powi(e);
            let _ = if axis == "x" {
                writeln!(out, "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e{e}</text>", px(v), H - PAD + 18.0)
            } else {
                writeln!(out, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e{e}</text>", PAD - 6.0, py(v) + 4.0)
            };
        }
    }
    if let Some(f) = &series.fit {
        let (a, b) = (f.window.0.max(pts[0].0), f.window.1.min(pts[pts.len() - 1].0));
        let curve: Vec<String> = (0..=64)
            .map(|k| (a.ln() + (b.ln() - a.ln()) * k as f64 / 64.0).exp())
            .map(|x| (x, f.kind.predict(&f.fit, x)))
            .filter(|(_, y)| *y > 0.0)
            .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"crimson\" stroke-width=\"1.5\"/>", curve.join(" "));
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"crimson\">{} fit slope {:.4} ± {:.4}</text>",
            PAD + 8.0,
            PAD + 16.0,
            f.kind.name(),
            f.fit.slope,
            f.fit.stderr
        );
    }
    for &(x, y, e) in &pts {
        if e > 0.0 && y - e > 0.0 {
            let _ = writeln!(out, "<line x1=\"{0:.2}\" x2=\"{0:.2}\" y1=\"{1:.2}\" y2=\"{2:.2}\" stroke=\"steelblue\"/>", px(x), py(y - e), py(y + e));
        }
        let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>", px(x), py(y));
    }
    out.push_str("</svg>\n");
    out
}

/// Run metadata written next to the data files.
#[derive(Clone, Debug)]
pub struct Manifest {
    pub name: String,
    pub kind: String,
    pub config_path: String,
    pub config_text: String,
    pub seed: u64,
    pub threads: usize,
    pub n_samples: usize,
    pub started_unix: u64,
    pub wall_time_s: f64,
}

impl Manifest {
    pub fn render(&self, report: &Report, files: &[(String, String)]) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("mieflow_version", &env!("CARGO_PKG_VERSION"));
        kv("kind", &self.kind);
        kv("name", &self.name);
        kv("config_path", &self.config_path);
        kv("seed", &self.seed);
        kv("threads", &self.threads);
        kv("n_samples", &self.n_samples);
        kv("started_unix", &self.started_unix);
        kv("wall_time_s", &format!("{:.3}", self.wall_time_s));
        for s in &report.series {
            let p = format!("series.{}", s.name);
            if let Some((_, file)) = files.iter().find(|(n, _)| n == &s.name) {
                kv(&format!("{p}.file"), file);
            }
            kv(&format!("{p}.points"), &s.data.points.len());
            if let Some(f) = &s.fit {
                kv(&format!("{p}.fit"), &f.kind.name());
                kv(&format!("{p}.fit_window"), &format!("{} {}", f.window.0, f.window.1));
                kv(&format!("{p}.fit_points"), &f.fit.n_points);
                kv(&format!("{p}.slope"), &format!("{:.16e}", f.fit.slope));
                kv(&format!("{p}.slope_stderr"), &format!("{:.16e}", f.fit.stderr));
                kv(&format!("{p}.r_squared"), &format!("{:.16e}", f.fit.r_squared));
            }
        }
        for (k, v) in &report.summary {
            kv(&format!("result.{k}"), v);
        }
        for (i, line) in self.config_text.lines().enumerate() {
            kv(&format!("config.{:03}", i + 1), &line);
        }
        out
    }
}

/// Renders every artifact, then creates `dir` and writes them. Returns the
/// written paths.
pub fn write_all(dir: &Path, report: &Report, manifest: &Manifest, with_svg: bool) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<(String, String, String)> = Vec::new();
    for s in &report.series {
        // a custom run name keeps runs of the same kind apart in one directory
        let stem = if manifest.name == manifest.kind { s.name.clone() } else { format!("{}_{}", manifest.name, s.name) };
        files.push((s.name.clone(), format!("{stem}.csv"), csv(&s.data)));
        if with_svg {
            files.push((String::new(), format!("{stem}.svg"), svg(s)));
        }
    }
    let index: Vec<(String, String)> = files.iter().filter(|f| !f.0.is_empty()).map(|f| (f.0.clone(), f.1.clone())).collect();
    files.push((String::new(), format!("{}.manifest", manifest.name), manifest.render(report, &index)));
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (_, name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
