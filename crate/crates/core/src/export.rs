//! Plain-format views of a height field.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{HeightField, TrajectoryRecord};
use crate::roughness::{areal_metrics, ArealMetrics, CellRange, LineProfile};
use crate::surface_io::write_atomic;

/// Level used for every machined cell when they all share one height.
pub const DEGENERATE_GRAY: u16 = 32768;

fn machined_extent(field: &HeightField, roi: &CellRange) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in roi.j0..=roi.j1 {
        for i in roi.i0..=roi.i1 {
            if !field.is_uncut(i, j) {
                let h = field.get(i, j)?;
                lo = lo.min(h);
                hi = hi.max(h);
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

fn check_roi(field: &HeightField, roi: &CellRange) -> Result<()> {
    let spec = field.spec();
    if roi.i0 > roi.i1 || roi.j0 > roi.j1 || roi.i1 > spec.m() || roi.j1 > spec.n() {
        return Err(Error::config("roi", "cell range outside the grid"));
    }
    if machined_extent(field, roi).is_none() {
        return Err(Error::config("roi", "every cell in the region is uncut"));
    }
    Ok(())
}

/// Heights in µm. The header row holds the x positions (mm); each following
/// row is one grid row from `j0` upward. Uncut cells are left empty.
pub fn heights_csv(field: &HeightField, roi: &CellRange) -> Result<String> {
    check_roi(field, roi)?;
    let spec = field.spec();
    let mut out = String::new();
    let xs: Vec<String> = (roi.i0..=roi.i1).map(|i| format!("{}", spec.x(i))).collect();
    out.push_str(&xs.join(","));
    out.push('\n');
    for j in roi.j0..=roi.j1 {
        for i in roi.i0..=roi.i1 {
            if i > roi.i0 {
                out.push(',');
            }
            if !field.is_uncut(i, j) {
                let _ = write!(out, "{}", field.get(i, j).expect("checked range") * 1000.0);
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Binary 16-bit P5 graymap, big-endian samples, top image row = largest y.
/// Machined cells are min-max scaled to `0..=65535`; uncut cells are 0.
pub fn graymap(field: &HeightField, roi: &CellRange) -> Result<Vec<u8>> {
    check_roi(field, roi)?;
    let (lo, hi) = machined_extent(field, roi).expect("checked");
    let mut out = format!("P5\n{} {}\n65535\n", roi.columns(), roi.rows()).into_bytes();
    out.reserve(2 * roi.len());
    for j in (roi.j0..=roi.j1).rev() {
        for i in roi.i0..=roi.i1 {
            let level = if field.is_uncut(i, j) {
                0
            } else if hi == lo {
                DEGENERATE_GRAY
            } else {
                let h = field.get(i, j).expect("checked range");
                ((h - lo) / (hi - lo) * 65535.0).round() as u16
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub roi: CellRange,
    pub metrics: Option<ArealMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl MetricsReport {
    pub fn new(field: &HeightField, roi: &CellRange) -> Self {
        match areal_metrics(field, roi) {
            Ok(m) => Self {
                roi: *roi,
                metrics: Some(m),
                error: None,
            },
            Err(e) => Self {
                roi: *roi,
                metrics: None,
                error: Some(e.to_string()),
            },
        }
    }

    pub fn to_json(&self) -> String {
        crate::config::to_json(self) + "\n"
    }
}

/// Two columns: position along the profile (mm), height (µm).
pub fn profile_csv(profile: &LineProfile) -> String {
    let mut out = String::from("position_mm,height_um\n");
    for (s, h) in profile.positions().zip(&profile.samples) {
        let _ = writeln!(out, "{},{}", s, h * 1000.0);
    }
    out
}

pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let mut out = String::from("t_s,tooth,x_mm,y_mm,z_mm\n");
    for e in record.entries() {
        let _ = writeln!(out, "{},{},{},{},{}", e.t, e.tooth, e.x, e.y, e.z);
    }
    out
}

/// Which views [`export_views`] writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViewSelection {
    pub heights_csv: bool,
    pub graymap: bool,
    pub metrics: bool,
}

impl Default for ViewSelection {
    fn default() -> Self {
        Self {
            heights_csv: true,
            graymap: true,
            metrics: true,
        }
    }
}

/// Writes `heights.csv`, `surface.pgm` and `metrics.json` into `dir`.
pub fn export_views(
    field: &HeightField,
    roi: &CellRange,
    dir: &Path,
    views: ViewSelection,
) -> Result<Vec<PathBuf>> {
    check_roi(field, roi)?;
    let mut written = Vec::new();
    if views.heights_csv {
        let p = dir.join("heights.csv");
        write_atomic(&p, heights_csv(field, roi)?.as_bytes())?;
        written.push(p);
    }
    if views.graymap {
        let p = dir.join("surface.pgm");
        write_atomic(&p, &graymap(field, roi)?)?;
        written.push(p);
    }
    if views.metrics {
        let p = dir.join("metrics.json");
        write_atomic(&p, MetricsReport::new(field, roi).to_json().as_bytes())?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn field(m: usize, n: usize, f: impl Fn(usize, usize) -> f64) -> HeightField {
        let spec = GridSpec::from_counts(0.25, (0.0, 0.0), m, n).unwrap();
        let h = (0..=n).flat_map(|j| (0..=m).map(move |i| (i, j))).map(|(i, j)| f(i, j)).collect();
        HeightField::from_heights(spec, 0.5, h).unwrap()
    }

    #[test]
    fn csv_shape() {
        let f = field(4, 4, |i, j| 0.001 * (i + j) as f64);
        let csv = heights_csv(&f, &CellRange::full(f.spec())).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines.iter().all(|l| l.split(',').count() == 5));
        assert_eq!(lines[0], "0,0.25,0.5,0.75,1");
        assert_eq!(lines[1].split(',').nth(2), Some("2"));
    }

    #[test]
    fn flat_graymap_is_mid_gray() {
        let f = field(2, 1, |_, _| 0.1);
        let g = graymap(&f, &CellRange::full(f.spec())).unwrap();
        let header = b"P5\n3 2\n65535\n";
        assert_eq!(&g[..header.len()], header);
        let body = &g[header.len()..];
        assert_eq!(body.len(), 12);
        assert!(body.chunks(2).all(|c| u16::from_be_bytes([c[0], c[1]]) == DEGENERATE_GRAY));
    }

    #[test]
    fn graymap_scales_and_marks_uncut() {
        let f = field(2, 1, |i, j| if j == 1 && i == 2 { 0.5 } else { 0.1 * i as f64 });
        let g = graymap(&f, &CellRange::full(f.spec())).unwrap();
        let body: Vec<u16> = g[13..].chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
        // first image row is j = 1
        assert_eq!(body, vec![0, 32768, 0, 0, 32768, 65535]);
    }

    #[test]
    fn all_uncut_roi_is_rejected() {
        let f = field(2, 2, |i, _| if i == 0 { 0.5 } else { 0.1 });
        let roi = CellRange { i0: 0, j0: 0, i1: 0, j1: 2 };
        assert!(heights_csv(&f, &roi).is_err());
        assert!(graymap(&f, &roi).is_err());
        let dir = tempfile::tempdir().unwrap();
        assert!(export_views(&f, &roi, dir.path(), ViewSelection::default()).is_err());
        let files = export_views(&f, &CellRange::full(f.spec()), dir.path(), ViewSelection::default()).unwrap();
        assert_eq!(files.len(), 3);
        let metrics = std::fs::read_to_string(dir.path().join("metrics.json")).unwrap();
        assert!(metrics.contains("unmachined"), "{metrics}");
    }
}
