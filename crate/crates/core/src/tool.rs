//! Cutter geometry and cutting-edge discretization for indexable face mills
//! with circular inserts.
//!
//! The active edge is the lower half of the insert circle. In the edge frame
//! a point at signed arc abscissa `l` sits at `(l, 0, R - sqrt(R^2 - l^2))`,
//! so the lowest point of the insert is the frame origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial and axial mounting deviation of one insert (mm).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Runout {
    pub radial: f64,
    pub axial: f64,
}

/// Geometry of an indexable face mill. Lengths in mm, angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolDefinition {
    diameter: f64,
    insert_radius: f64,
    teeth: usize,
    radial_rake: f64,
    axial_rake: f64,
    runouts: Vec<Runout>,
}

impl ToolDefinition {
    /// Validates and builds a tool. `runouts` must hold one entry per tooth;
    /// pass an empty vector for an ideal cutter.
    pub fn new(
        diameter: f64,
        insert_radius: f64,
        teeth: usize,
        radial_rake: f64,
        axial_rake: f64,
        runouts: Vec<Runout>,
    ) -> Result<Self> {
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(Error::domain(format!("cutting diameter must be > 0, got {diameter}")));
        }
        if !(insert_radius.is_finite() && insert_radius > 0.0) {
            return Err(Error::domain(format!("insert radius must be > 0, got {insert_radius}")));
        }
        if teeth == 0 {
            return Err(Error::domain("tooth count must be at least 1"));
        }
        for (name, rake) in [("radial", radial_rake), ("axial", axial_rake)] {
            if !(rake.is_finite() && rake.abs() < std::f64::consts::FRAC_PI_2) {
                return Err(Error::domain(format!("{name} rake must lie in (-90, 90) degrees")));
            }
        }
        let runouts = if runouts.is_empty() {
            vec![Runout::default(); teeth]
        } else {
            runouts
        };
        if runouts.len() != teeth {
            return Err(Error::domain(format!(
                "{} run-out entries for {teeth} teeth",
                runouts.len()
            )));
        }
        for (k, r) in runouts.iter().enumerate() {
            if !(r.radial.is_finite() && r.axial.is_finite())
                || r.radial.abs() >= insert_radius
                || r.axial.abs() >= insert_radius
            {
                return Err(Error::domain(format!(
                    "run-out of tooth {} must be smaller than the insert radius",
                    k + 1
                )));
            }
        }
        Ok(Self {
            diameter,
            insert_radius,
            teeth,
            radial_rake,
            axial_rake,
            runouts,
        })
    }

    /// Ideal cutter: no rake, no run-out.
    pub fn ideal(diameter: f64, insert_radius: f64, teeth: usize) -> Result<Self> {
        Self::new(diameter, insert_radius, teeth, 0.0, 0.0, Vec::new())
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn insert_radius(&self) -> f64 {
        self.insert_radius
    }

    pub fn teeth(&self) -> usize {
        self.teeth
    }

    pub fn radial_rake(&self) -> f64 {
        self.radial_rake
    }

    pub fn axial_rake(&self) -> f64 {
        self.axial_rake
    }

    pub fn runouts(&self) -> &[Runout] {
        &self.runouts
    }

    /// Run-out of tooth `k` (1-based).
    pub fn runout(&self, k: usize) -> Option<Runout> {
        k.checked_sub(1).and_then(|i| self.runouts.get(i).copied())
    }

    /// Largest distance of any edge point from the spindle axis, used for
    /// span margins and sweep-coverage bounds.
    pub fn reach(&self, half_length: f64) -> f64 {
        let max_offset = self
            .runouts
            .iter()
            .enumerate()
            .map(|(i, r)| i as f64 * r.radial.abs())
            .fold(0.0, f64::max);
        self.diameter / 2.0 + max_offset + half_length
    }
}

/// A point on the cutting edge in the edge frame, homogeneous form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuttingEdgePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CuttingEdgePoint {
    pub fn homogeneous(&self) -> [f64; 4] {
        [self.x, self.y, self.z, 1.0]
    }
}

/// Point-generation interface for an edge profile. Only circular inserts are
/// provided; other shapes plug in here.
pub trait EdgeProfile {
    fn point(&self, l: f64) -> Result<CuttingEdgePoint>;
}

/// Lower semicircle of a round insert.
#[derive(Debug, Clone, Copy)]
pub struct CircularInsert {
    pub radius: f64,
}

impl EdgeProfile for CircularInsert {
    fn point(&self, l: f64) -> Result<CuttingEdgePoint> {
        edge_point(l, self.radius)
    }
}

/// Point at arc abscissa `l` on a circular insert of radius `radius`.
pub fn edge_point(l: f64, radius: f64) -> Result<CuttingEdgePoint> {
    if !l.is_finite() || !radius.is_finite() || l.abs() > radius {
        return Err(Error::domain(format!(
            "point off the insert arc: |l| = {} exceeds R = {radius}",
            l.abs()
        )));
    }
    Ok(CuttingEdgePoint {
        x: l,
        y: 0.0,
        z: radius - (radius * radius - l * l).sqrt(),
    })
}

/// Half-length of the engaged edge: the larger of the depth-of-cut half chord
/// and the feed-per-tooth minimum `f_z / (2 cos γ_f)`.
pub fn effective_half_length(
    radius: f64,
    depth_of_cut: f64,
    feed_per_tooth: f64,
    radial_rake: f64,
) -> Result<f64> {
    if !(depth_of_cut.is_finite() && depth_of_cut > 0.0) {
        return Err(Error::domain(format!("depth of cut must be > 0, got {depth_of_cut}")));
    }
    if depth_of_cut > radius {
        return Err(Error::domain(format!(
            "depth of cut {depth_of_cut} exceeds the insert radius {radius}"
        )));
    }
    if !(feed_per_tooth.is_finite() && feed_per_tooth > 0.0) {
        return Err(Error::domain(format!("feed per tooth must be > 0, got {feed_per_tooth}")));
    }
    if !(radial_rake.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain("radial rake must lie in (-90, 90) degrees"));
    }
    let chord = (radius * radius - (radius - depth_of_cut).powi(2)).sqrt();
    let feed = feed_per_tooth / (2.0 * radial_rake.cos());
    let half = chord.max(feed);
    if half > radius {
        return Err(Error::domain(format!(
            "feed per tooth {feed_per_tooth} needs an edge half-length {half} beyond the insert radius {radius}"
        )));
    }
    Ok(half)
}

/// Smallest edge point count whose spacing is at most half the grid spacing.
pub fn default_edge_points(half_length: f64, grid_spacing: f64) -> usize {
    let mut n = ((4.0 * half_length / grid_spacing).ceil() as usize).max(1) + 1;
    while 2.0 * half_length / (n - 1) as f64 > grid_spacing / 2.0 {
        n += 1;
    }
    n
}

/// Abscissa of edge point `p` out of `n` uniformly spread over
/// `[-half, half]`. Endpoints are exact.
#[inline]
pub fn edge_abscissa(half: f64, n: usize, p: usize) -> f64 {
    if p + 1 == n {
        half
    } else {
        -half + 2.0 * half * p as f64 / (n - 1) as f64
    }
}

/// Uniform sampling of the engaged edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDiscretization {
    half_length: f64,
    points: Vec<CuttingEdgePoint>,
}

impl EdgeDiscretization {
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[CuttingEdgePoint] {
        &self.points
    }

    /// Largest `z_P` over the sampled edge.
    pub fn max_height(&self) -> f64 {
        self.points.iter().map(|p| p.z).fold(0.0, f64::max)
    }
}

/// Samples `n` points of the engaged edge of `tool` for the given depth of
/// cut and feed per tooth.
pub fn discretize_edge(
    tool: &ToolDefinition,
    depth_of_cut: f64,
    feed_per_tooth: f64,
    n: usize,
) -> Result<EdgeDiscretization> {
    let half = effective_half_length(
        tool.insert_radius(),
        depth_of_cut,
        feed_per_tooth,
        tool.radial_rake(),
    )?;
    discretize_half_length(&CircularInsert { radius: tool.insert_radius() }, half, n)
}

/// Samples `n` points over `[-half, half]` of an arbitrary profile.
pub fn discretize_half_length(
    profile: &impl EdgeProfile,
    half: f64,
    n: usize,
) -> Result<EdgeDiscretization> {
    if n < 2 {
        return Err(Error::domain(format!("edge needs at least 2 points, got {n}")));
    }
    let mut points = Vec::with_capacity(n);
    for p in 0..n {
        points.push(profile.point(edge_abscissa(half, n, p))?);
    }
    Ok(EdgeDiscretization {
        half_length: half,
        points,
    })
}
