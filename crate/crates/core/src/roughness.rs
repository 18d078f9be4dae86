//! Areal (ISO 25178-2) and profile roughness over a height field.
//!
//! Heights are stored in mm; every reported metric is in µm. Moments are
//! population moments of the leveled deviations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, HeightField};

const UM_PER_MM: f64 = 1000.0;

/// Inclusive rectangle of cells `[i0, i1] × [j0, j1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRange {
    pub i0: usize,
    pub j0: usize,
    pub i1: usize,
    pub j1: usize,
}

impl CellRange {
    pub fn full(spec: &GridSpec) -> Self {
        Self {
            i0: 0,
            j0: 0,
            i1: spec.m(),
            j1: spec.n(),
        }
    }

    /// Cells whose centers lie inside the rectangle `[x0, x1] × [y0, y1]` (mm).
    pub fn from_mm(spec: &GridSpec, x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) || x1 < x0 || y1 < y0 {
            return Err(Error::config(
                "roi",
                format!("need x0 <= x1 and y0 <= y1, got {x0},{y0},{x1},{y1}"),
            ));
        }
        let d = spec.spacing();
        let lo = |v: f64, min: f64| ((v - min) / d - 1e-9).ceil().max(0.0);
        let hi = |v: f64, min: f64, top: usize| ((v - min) / d + 1e-9).floor().min(top as f64);
        let i0 = lo(x0, spec.x_min());
        let i1 = hi(x1, spec.x_min(), spec.m());
        let j0 = lo(y0, spec.y_min());
        let j1 = hi(y1, spec.y_min(), spec.n());
        if i1 < i0 || j1 < j0 {
            return Err(Error::config("roi", "rectangle contains no cell centers"));
        }
        Ok(Self {
            i0: i0 as usize,
            j0: j0 as usize,
            i1: i1 as usize,
            j1: j1 as usize,
        })
    }

    pub fn columns(&self) -> usize {
        self.i1 - self.i0 + 1
    }

    pub fn rows(&self) -> usize {
        self.j1 - self.j0 + 1
    }

    pub fn len(&self) -> usize {
        self.columns() * self.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self, spec: &GridSpec) -> Result<()> {
        if self.i0 > self.i1 || self.j0 > self.j1 {
            return Err(Error::config("roi", "empty cell range"));
        }
        if self.i1 > spec.m() || self.j1 > spec.n() {
            return Err(Error::OutOfBounds {
                i: self.i1,
                j: self.j1,
                columns: spec.columns(),
                rows: spec.rows(),
            });
        }
        Ok(())
    }
}

/// Reference plane removed before computing moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leveling {
    #[default]
    Mean,
    /// Least-squares plane `a + b·x + c·y`, for tilted data.
    Plane,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArealMetrics {
    #[serde(rename = "S_a_um")]
    pub sa: f64,
    #[serde(rename = "S_q_um")]
    pub sq: f64,
    #[serde(rename = "S_p_um")]
    pub sp: f64,
    #[serde(rename = "S_v_um")]
    pub sv: f64,
    #[serde(rename = "S_z_um")]
    pub sz: f64,
    /// `None` when `S_q` is zero.
    #[serde(rename = "S_sk")]
    pub ssk: Option<f64>,
    #[serde(rename = "S_ku")]
    pub sku: Option<f64>,
    pub cells: usize,
}

impl ArealMetrics {
    pub fn to_table(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
        format!(
            "S_a  {:>12.4} um\nS_q  {:>12.4} um\nS_p  {:>12.4} um\nS_v  {:>12.4} um\nS_z  {:>12.4} um\nS_sk {:>12}\nS_ku {:>12}\ncells {:>11}\n",
            self.sa,
            self.sq,
            self.sp,
            self.sv,
            self.sz,
            opt(self.ssk),
            opt(self.sku),
            self.cells
        )
    }
}

/// Metrics over already-leveled deviations given in µm.
fn moments(dev: &[f64]) -> ArealMetrics {
    let n = dev.len() as f64;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &d in dev {
        let d2 = d * d;
        s1 += d.abs();
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let sq = (s2 / n).sqrt();
    let (ssk, sku) = if sq > 0.0 {
        (Some(s3 / n / sq.powi(3)), Some(s4 / n / sq.powi(4)))
    } else {
        (None, None)
    };
    ArealMetrics {
        sa: s1 / n,
        sq,
        sp: hi,
        sv: -lo,
        sz: hi - lo,
        ssk,
        sku,
        cells: dev.len(),
    }
}

/// Mean-leveled metrics of raw heights in mm.
pub fn metrics_from_heights(heights: &[f64]) -> Result<ArealMetrics> {
    if heights.is_empty() {
        return Err(Error::domain("roughness needs at least one sample"));
    }
    if heights.iter().any(|h| !h.is_finite()) {
        return Err(Error::domain("non-finite height"));
    }
    Ok(moments(&mean_deviations(heights)))
}

// Shifting by the first sample keeps a constant surface exactly zero.
fn mean_deviations(heights: &[f64]) -> Vec<f64> {
    let base = heights[0];
    let shifted: Vec<f64> = heights.iter().map(|h| h - base).collect();
    let mean = shifted.iter().sum::<f64>() / shifted.len() as f64;
    shifted.iter().map(|s| (s - mean) * UM_PER_MM).collect()
}

fn roi_samples(field: &HeightField, roi: &CellRange) -> Result<Vec<(usize, usize, f64)>> {
    roi.check(field.spec())?;
    let mut out = Vec::with_capacity(roi.len());
    for j in roi.j0..=roi.j1 {
        for i in roi.i0..=roi.i1 {
            if field.is_uncut(i, j) {
                return Err(Error::Uncut { i, j });
            }
            out.push((i, j, field.get(i, j).expect("checked range")));
        }
    }
    Ok(out)
}

/// Areal parameters over `roi` with mean leveling.
pub fn areal_metrics(field: &HeightField, roi: &CellRange) -> Result<ArealMetrics> {
    areal_metrics_with(field, roi, Leveling::Mean)
}

pub fn areal_metrics_with(
    field: &HeightField,
    roi: &CellRange,
    leveling: Leveling,
) -> Result<ArealMetrics> {
    let samples = roi_samples(field, roi)?;
    let heights: Vec<f64> = samples.iter().map(|s| s.2).collect();
    match leveling {
        Leveling::Mean => Ok(moments(&mean_deviations(&heights))),
        Leveling::Plane => {
            let spec = field.spec();
            let xy: Vec<(f64, f64)> = samples
                .iter()
                .map(|&(i, j, _)| (spec.x(i), spec.y(j)))
                .collect();
            Ok(moments(&plane_deviations(&xy, &heights)))
        }
    }
}

fn plane_deviations(xy: &[(f64, f64)], z: &[f64]) -> Vec<f64> {
    let n = z.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let base = z[0];
    let mz = z.iter().map(|v| v - base).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&(x, y), &v) in xy.iter().zip(z) {
        let (dx, dy, dz) = (x - mx, y - my, v - base - mz);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxz += dx * dz;
        syz += dy * dz;
    }
    let det = sxx * syy - sxy * sxy;
    let (b, c) = if det.abs() > 1e-300 {
        ((sxz * syy - syz * sxy) / det, (syz * sxx - sxz * sxy) / det)
    } else if sxx > 0.0 {
        (sxz / sxx, 0.0)
    } else if syy > 0.0 {
        (0.0, syz / syy)
    } else {
        (0.0, 0.0)
    };
    xy.iter()
        .zip(z)
        .map(|(&(x, y), &v)| (v - base - mz - b * (x - mx) - c * (y - my)) * UM_PER_MM)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Along `Y_W`; the profile is a grid column.
    Feed,
    /// Along `X_W`; the profile is a grid row.
    PickFeed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineProfile {
    pub direction: Direction,
    /// Column (feed) or row (pick-feed) index.
    pub index: usize,
    /// Position of the first sample along the profile, mm.
    pub start: f64,
    pub spacing: f64,
    /// Heights in mm.
    pub samples: Vec<f64>,
}

impl LineProfile {
    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|k| self.start + k as f64 * self.spacing)
    }
}

/// Extracts one grid column (feed) or row (pick-feed) restricted to `roi`.
/// `index = None` picks the center of the roi, which for the full grid is
/// column `round(m/2)` or row `round(n/2)`.
pub fn extract_profile(
    field: &HeightField,
    direction: Direction,
    index: Option<usize>,
    roi: Option<&CellRange>,
) -> Result<LineProfile> {
    let spec = field.spec();
    let roi = roi.copied().unwrap_or_else(|| CellRange::full(spec));
    roi.check(spec)?;
    let center = |lo: usize, hi: usize| lo + ((hi - lo) as f64 / 2.0).round() as usize;
    let (index, cells): (usize, Vec<(usize, usize)>) = match direction {
        Direction::Feed => {
            let i = index.unwrap_or_else(|| center(roi.i0, roi.i1));
            (i, (roi.j0..=roi.j1).map(|j| (i, j)).collect())
        }
        Direction::PickFeed => {
            let j = index.unwrap_or_else(|| center(roi.j0, roi.j1));
            (j, (roi.i0..=roi.i1).map(|i| (i, j)).collect())
        }
    };
    let limit = match direction {
        Direction::Feed => spec.m(),
        Direction::PickFeed => spec.n(),
    };
    if index > limit {
        return Err(Error::config(
            "profile.index",
            format!("{index} is beyond the last grid line {limit}"),
        ));
    }
    let mut samples = Vec::with_capacity(cells.len());
    for &(i, j) in &cells {
        if field.is_uncut(i, j) {
            return Err(Error::Uncut { i, j });
        }
        samples.push(field.get(i, j).expect("checked range"));
    }
    let start = match direction {
        Direction::Feed => spec.y(roi.j0),
        Direction::PickFeed => spec.x(roi.i0),
    };
    Ok(LineProfile {
        direction,
        index,
        start,
        spacing: spec.spacing(),
        samples,
    })
}

/// Arithmetic mean roughness `R_a` in µm.
pub fn line_roughness(profile: &LineProfile) -> Result<f64> {
    if profile.samples.len() < 2 {
        return Err(Error::domain("line roughness needs at least 2 samples"));
    }
    let dev = mean_deviations(&profile.samples);
    Ok(dev.iter().map(|d| d.abs()).sum::<f64>() / dev.len() as f64)
}

/// Normalized autocorrelation `r(k)` of the mean-removed samples for lags
/// `0..=len/2`, using the biased estimator so `r(0) = 1`.
pub fn autocorrelation(samples: &[f64]) -> Vec<f64> {
    if samples.len() < 2 {
        return vec![];
    }
    let dev = mean_deviations(samples);
    let energy: f64 = dev.iter().map(|d| d * d).sum();
    let max_lag = samples.len() / 2;
    if energy == 0.0 {
        return vec![0.0; max_lag + 1];
    }
    (0..=max_lag)
        .map(|k| dev.iter().zip(&dev[k..]).map(|(a, b)| a * b).sum::<f64>() / energy)
        .collect()
}

/// Lag (in samples) of the dominant repetition: the smallest local maximum
/// of the autocorrelation that reaches 90% of the largest one.
pub fn dominant_period(samples: &[f64]) -> Option<usize> {
    let r = autocorrelation(samples);
    let peaks: Vec<usize> = (1..r.len().saturating_sub(1))
        .filter(|&k| r[k] > 0.0 && r[k] >= r[k - 1] && r[k] > r[k + 1])
        .collect();
    let best = peaks.iter().map(|&k| r[k]).fold(f64::NEG_INFINITY, f64::max);
    peaks.into_iter().find(|&k| r[k] >= 0.9 * best)
}
