//! Deterministic CSV and JSON emission.
//!
//! Identical inputs must produce byte-identical files: fixed field order,
//! floats printed with 17 significant digits, `\n` line endings, and
//! atomic writes (temp file then rename).

use std::fs;
use std::io;
use std::path::Path;

use crate::analysis::{BoundsReport, ConvergenceReport};
use crate::collocation::Snapshot2d;
use crate::evolve::Snapshot;

/// 17-significant-digit decimal float, round-trip safe for f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `contents` atomically: to a dot-temp sibling first, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let tmp = dir.join(format!(".tmp-{name}"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

/// snapshots.csv for 1D runs: header `t,x,u`, rows grouped by time
/// ascending then x.
pub fn snapshots_csv(snaps: &[Snapshot]) -> String {
    let mut out = String::from("t,x,u\n");
    for s in snaps {
        for (&x, &u) in s.xs.iter().zip(&s.us) {
            out.push_str(&fmt_float(s.t));
            out.push(',');
            out.push_str(&fmt_float(x));
            out.push(',');
            out.push_str(&fmt_float(u));
            out.push('\n');
        }
    }
    out
}

/// snapshots.csv for 2D runs: header `t,x,y,u`, rows grouped by time
/// ascending, then x, then y.
pub fn snapshots_csv_2d(snaps: &[Snapshot2d]) -> String {
    let mut out = String::from("t,x,y,u\n");
    for s in snaps {
        for (i, &x) in s.xs.iter().enumerate() {
            for (j, &y) in s.ys.iter().enumerate() {
                out.push_str(&fmt_float(s.t));
                out.push(',');
                out.push_str(&fmt_float(x));
                out.push(',');
                out.push_str(&fmt_float(y));
                out.push(',');
                out.push_str(&fmt_float(s.us[[i, j]]));
                out.push('\n');
            }
        }
    }
    out
}

/// convergence.csv: one row per sweep sample plus a fitted-order summary
/// line for the temporal axis.
pub fn convergence_csv(reports: &[&ConvergenceReport]) -> String {
    let mut out = String::from("axis,resolution,errL2,errLinf\n");
    for rep in reports {
        for s in &rep.samples {
            out.push_str(rep.axis.name());
            out.push(',');
            out.push_str(&fmt_float(s.resolution));
            out.push(',');
            out.push_str(&fmt_float(s.err_l2));
            out.push(',');
            out.push_str(&fmt_float(s.err_linf));
            out.push('\n');
        }
    }
    for rep in reports {
        if let Some(order) = rep.fitted_order {
            out.push_str(&format!("# fitted order ({}) = {}\n", rep.axis.name(), fmt_float(order)));
        }
    }
    out
}

/// One stability.csv row.
pub struct StabilityRow {
    pub scheme: &'static str,
    pub degree: usize,
    pub dt: f64,
    pub radius: f64,
    /// PASS/FAIL for the unconditionally stable schemes, INFO for rows where
    /// a radius above 1 is expected behavior rather than a defect.
    pub status: &'static str,
}

pub fn stability_csv(rows: &[StabilityRow], overall_pass: bool) -> String {
    let mut out = String::from("scheme,N,dt,radius,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.scheme,
            r.degree,
            fmt_float(r.dt),
            fmt_float(r.radius),
            r.status
        ));
    }
    out.push_str(if overall_pass { "# summary: PASS\n" } else { "# summary: FAIL\n" });
    out
}

/// compare.csv: per-snapshot disagreement norms.
pub fn compare_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("t,errL2,errLinf\n");
    for &(t, l2, linf) in rows {
        out.push_str(&fmt_float(t));
        out.push(',');
        out.push_str(&fmt_float(l2));
        out.push(',');
        out.push_str(&fmt_float(linf));
        out.push('\n');
    }
    out
}

/// Everything a reader needs to reproduce a run: the resolved defaults and
/// the health reports. Serialized as meta.json with a stable field order.
#[derive(serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunMeta {
    pub command: String,
    pub solver: String,
    pub resolved: ResolvedParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_report: Option<KernelReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsReport>,
    pub warnings: Vec<String>,
}

#[derive(serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolvedParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_panels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    pub kernel_scale: f64,
    pub kernel_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wrap_radius: Option<usize>,
    pub rho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a2_mode: Option<String>,
    pub dt: f64,
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_points: Option<usize>,
}

/// Kernel normalization over the run's domain: the mass at the domain
/// center detects domains too narrow for the kernel; the node extremes
/// record the boundary deficit.
#[derive(serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelReport {
    pub mass_at_center: f64,
    pub mass_min: f64,
    pub mass_max: f64,
    pub truncation_warning: bool,
}

pub fn meta_json(meta: &RunMeta) -> String {
    let mut s = serde_json::to_string_pretty(meta).expect("meta serializes");
    s.push('\n');
    s
}
