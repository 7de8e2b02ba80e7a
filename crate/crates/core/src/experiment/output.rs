use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::OutputError;
use crate::field::ScalarField;
use crate::vortex::SweepReport;

pub const CSV_HEADER: &str =
    "epsilon,point_index,curvature_mass,sup_deviation,bradlow_residual,identity_residual,sup_f,sup_grad_f,order_fit";

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    let name = path
        .file_name()
        .ok_or_else(|| OutputError::new(path, std::io::Error::other("not a file path")))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| OutputError::new(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| OutputError::new(path, e))
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// One CSV line per (ε, singular point); a single line with empty point
/// columns when the divisor is empty.
pub fn csv_text(report: &SweepReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        let common = |point: Option<usize>, mass: Option<f64>, fit: Option<f64>| {
            format!(
                "{},{},{},{},{},{},{},{},{}\n",
                cell(Some(row.epsilon)),
                point.map(|k| k.to_string()).unwrap_or_default(),
                cell(mass),
                cell(Some(row.sup_deviation)),
                cell(Some(row.bradlow_residual)),
                cell(Some(row.chern_residual)),
                cell(Some(row.probe.sup_f)),
                cell(Some(row.probe.sup_grad_f)),
                cell(fit),
            )
        };
        if row.curvature_masses.is_empty() {
            out.push_str(&common(None, None, None));
        }
        for (k, &mass) in row.curvature_masses.iter().enumerate() {
            out.push_str(&common(
                Some(k),
                Some(mass),
                row.order_fits.get(k).copied().flatten(),
            ));
        }
    }
    out
}

pub fn emit_csv(report: &SweepReport, path: &Path) -> Result<(), OutputError> {
    write_atomic(path, csv_text(report).as_bytes())
}

/// Value range and layout of a heatmap, stored next to the image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapSidecar {
    pub min: f64,
    pub max: f64,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    /// Image row 0 is the largest `y`; column 0 is `x = 0`.
    pub orientation: String,
}

/// 16-bit binary PGM of `field`, linearly mapping `[min, max]` to
/// `[0, 65535]`, plus `<path>.json` with the range. Returns the sidecar path.
pub fn emit_heatmap(field: &ScalarField, path: &Path) -> Result<PathBuf, OutputError> {
    let (nx, ny) = (field.grid().nx(), field.grid().ny());
    let (min, max) = (field.min(), field.max());
    let span = max - min;
    let mut bytes = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    bytes.reserve(2 * nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            let v = field.get(i, j);
            let level = if span > 0.0 && span.is_finite() {
                ((v - min) / span * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            bytes.extend_from_slice(&level.to_be_bytes());
        }
    }
    write_atomic(path, &bytes)?;
    let sidecar = HeatmapSidecar {
        min,
        max,
        nx,
        ny,
        lx: field.geometry().length_x(),
        ly: field.geometry().length_y(),
        orientation: "row 0 is the top (largest y), column 0 is x = 0".into(),
    };
    let side_path = path.with_file_name(format!(
        "{}.json",
        path.file_name().unwrap_or_default().to_string_lossy()
    ));
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_atomic(&side_path, json.as_bytes())?;
    Ok(side_path)
}

/// Decoded 16-bit PGM: width, height and levels in image order.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u16>), OutputError> {
    let bytes = fs::read(path).map_err(|e| OutputError::new(path, e))?;
    let bad = || OutputError::new(path, std::io::Error::other("not a 16-bit binary PGM"));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    if fields[0] != "P5" || num(&fields[3])? != 65535 {
        return Err(bad());
    }
    let (w, h) = (num(&fields[1])?, num(&fields[2])?);
    let data = bytes.get(pos..pos + 2 * w * h).ok_or_else(bad)?;
    let levels = data
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok((w, h, levels))
}

/// Log-log line plot of the sup deviation against ε.
pub fn svg_text(report: &SweepReport) -> String {
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.epsilon > 0.0 && r.sup_deviation > 0.0)
        .map(|r| (r.epsilon.log10(), r.sup_deviation.log10()))
        .collect();
    let (w, h, pad) = (480.0, 320.0, 40.0);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">log10 epsilon</text>\n\
         <text x=\"12\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">log10 sup deviation</text>\n",
        w / 2.0,
        h - 8.0,
        h / 2.0,
        h / 2.0
    );
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let bounds = |sel: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(sel).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let map = |p: &(f64, f64)| {
        (
            pad + (p.0 - x0) / (x1 - x0) * (w - 2.0 * pad),
            h - pad - (p.1 - y0) / (y1 - y0) * (h - 2.0 * pad),
        )
    };
    let _ = writeln!(
        svg,
        "<rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let line: Vec<String> = pts
        .iter()
        .map(map)
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    let _ = writeln!(
        svg,
        "<polyline fill=\"none\" stroke=\"black\" points=\"{}\"/>",
        line.join(" ")
    );
    for (x, y) in pts.iter().map(map) {
        let _ = writeln!(svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\"/>");
    }
    svg.push_str("</svg>\n");
    svg
}
