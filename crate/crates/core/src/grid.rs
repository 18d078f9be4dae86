//! Workpiece height field with point-to-cell mapping and min-z retention.

use crate::error::{Error, Result};
use crate::kinematics::WorkpiecePoint;

/// Regular grid of `(m+1) x (n+1)` nodes spaced `spacing` mm apart, node
/// `(i, j)` at `(x_min + i*spacing, y_min + j*spacing)`. `i` runs along
/// `X_W` (pick-feed), `j` along `Y_W` (feed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    spacing: f64,
    x_min: f64,
    y_min: f64,
    m: usize,
    n: usize,
}

/// Cell `(i, j)` of a [`GridSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridIndex {
    pub i: usize,
    pub j: usize,
}

/// Outcome of [`GridSpec::locate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Cell(GridIndex),
    OutOfRange,
}

/// Largest node count a grid may have.
pub const MAX_NODES: usize = 1 << 28;

impl GridSpec {
    /// Grid covering `[x_range.0, x_range.1] x [y_range.0, y_range.1]`.
    pub fn new(spacing: f64, x_range: (f64, f64), y_range: (f64, f64)) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::domain(format!("grid spacing must be > 0, got {spacing}")));
        }
        let count = |lo: f64, hi: f64, axis: &str| -> Result<usize> {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::domain(format!("{axis} extent must be finite")));
            }
            let cells = ((hi - lo) / spacing).round();
            if !(cells >= 1.0) {
                return Err(Error::domain(format!(
                    "{axis} extent [{lo}, {hi}] holds less than one cell of {spacing} mm"
                )));
            }
            if cells > MAX_NODES as f64 {
                return Err(Error::domain(format!("{axis} extent needs too many cells")));
            }
            Ok(cells as usize)
        };
        let m = count(x_range.0, x_range.1, "x")?;
        let n = count(y_range.0, y_range.1, "y")?;
        Self::from_counts(spacing, (x_range.0, y_range.0), m, n)
    }

    /// Grid with `m` cells along x and `n` along y from `origin`.
    pub fn from_counts(spacing: f64, origin: (f64, f64), m: usize, n: usize) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::domain(format!("grid spacing must be > 0, got {spacing}")));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(Error::domain("grid origin must be finite"));
        }
        if m == 0 || n == 0 {
            return Err(Error::domain("grid needs at least one cell in each direction"));
        }
        match (m + 1).checked_mul(n + 1) {
            Some(nodes) if nodes <= MAX_NODES => {}
            _ => return Err(Error::domain(format!("grid of {m}x{n} cells is too large"))),
        }
        Ok(Self {
            spacing,
            x_min: origin.0,
            y_min: origin.1,
            m,
            n,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.m as f64 * self.spacing
    }

    pub fn y_max(&self) -> f64 {
        self.y_min + self.n as f64 * self.spacing
    }

    /// Cell count `m` along x (nodes = m + 1).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Cell count `n` along y (nodes = n + 1).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> usize {
        self.m + 1
    }

    pub fn rows(&self) -> usize {
        self.n + 1
    }

    pub fn len(&self) -> usize {
        self.columns() * self.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.spacing
    }

    /// Flat row-major offset of node `(i, j)`; rows run along x.
    #[inline(always)]
    pub fn offset(&self, i: usize, j: usize) -> usize {
        j * (self.m + 1) + i
    }

    /// Branch-light cell lookup shared by both simulation kernels. Boundaries
    /// are half-open: `x_i + spacing/2` belongs to cell `i + 1`.
    #[inline(always)]
    pub fn cell_of(&self, x: f64, y: f64) -> Option<GridIndex> {
        let fi = ((x - self.x_min) / self.spacing + 0.5).floor();
        let fj = ((y - self.y_min) / self.spacing + 0.5).floor();
        if fi >= 0.0 && fi <= self.m as f64 && fj >= 0.0 && fj <= self.n as f64 {
            Some(GridIndex {
                i: fi as usize,
                j: fj as usize,
            })
        } else {
            None
        }
    }

    /// Cell containing workpiece point `p`.
    pub fn locate(&self, p: &WorkpiecePoint) -> Result<Location> {
        self.locate_xy(p.x, p.y)
    }

    pub fn locate_xy(&self, x: f64, y: f64) -> Result<Location> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::domain(format!("cannot locate non-finite point ({x}, {y})")));
        }
        Ok(self.cell_of(x, y).map_or(Location::OutOfRange, Location::Cell))
    }
}

/// Height field over a [`GridSpec`]. Untouched cells hold the stock height,
/// which doubles as the "uncut" sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    spec: GridSpec,
    stock: f64,
    heights: Vec<f64>,
}

impl HeightField {
    /// Fresh field, every cell at `stock`.
    pub fn new(spec: GridSpec, stock: f64) -> Result<Self> {
        if !stock.is_finite() {
            return Err(Error::domain("stock height must be finite"));
        }
        Ok(Self {
            spec,
            stock,
            heights: vec![stock; spec.len()],
        })
    }

    /// Rebuilds a field from stored heights (e.g. a surface file).
    pub fn from_heights(spec: GridSpec, stock: f64, heights: Vec<f64>) -> Result<Self> {
        if heights.len() != spec.len() {
            return Err(Error::domain(format!(
                "{} heights for a grid of {} nodes",
                heights.len(),
                spec.len()
            )));
        }
        if !stock.is_finite() {
            return Err(Error::domain("stock height must be finite"));
        }
        if let Some(k) = heights.iter().position(|h| !(h.is_finite() && *h <= stock)) {
            return Err(Error::domain(format!(
                "height {} at index {k} is not a finite value below the stock height {stock}",
                heights[k]
            )));
        }
        Ok(Self { spec, stock, heights })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn stock(&self) -> f64 {
        self.stock
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        if i <= self.spec.m && j <= self.spec.n {
            Some(self.heights[self.spec.offset(i, j)])
        } else {
            None
        }
    }

    pub fn is_uncut(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_some_and(|h| h >= self.stock)
    }

    /// Number of cells the cutter has lowered below the stock.
    pub fn machined_cells(&self) -> usize {
        self.heights.iter().filter(|&&h| h < self.stock).count()
    }

    /// Lowers cell `idx` to `z` if `z` is strictly below the current height.
    pub fn update_min(&mut self, idx: GridIndex, z: f64) -> Result<bool> {
        if idx.i > self.spec.m || idx.j > self.spec.n {
            return Err(Error::OutOfBounds {
                i: idx.i,
                j: idx.j,
                columns: self.spec.columns(),
                rows: self.spec.rows(),
            });
        }
        let h = &mut self.heights[self.spec.offset(idx.i, idx.j)];
        if z < *h {
            *h = z;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Unchecked-by-contract variant for the hot loop: `idx` comes from
    /// [`GridSpec::cell_of`] on the same spec, so it is always in range.
    #[inline(always)]
    pub(crate) fn lower(&mut self, idx: GridIndex, z: f64) {
        let off = self.spec.offset(idx.i, idx.j);
        let h = &mut self.heights[off];
        *h = if z < *h { z } else { *h };
    }

    /// Elementwise minimum with another field over the same grid.
    pub fn merge_min(&mut self, other: &HeightField) -> Result<()> {
        if self.spec != other.spec || self.stock != other.stock {
            return Err(Error::domain("cannot merge height fields over different grids"));
        }
        for (a, b) in self.heights.iter_mut().zip(&other.heights) {
            if *b < *a {
                *a = *b;
            }
        }
        Ok(())
    }
}

/// Lowest edge point of one tooth at one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryEntry {
    pub t: f64,
    pub tooth: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Per-step, per-tooth trajectory minima in time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryRecord {
    entries: Vec<TrajectoryEntry>,
}

impl TrajectoryRecord {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            entries: Vec::with_capacity(n),
        }
    }

    pub fn entries(&self) -> &[TrajectoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends the minimum-z point of `points` (first one wins on ties).
    pub fn record(&mut self, t: f64, tooth: usize, points: &[WorkpiecePoint]) -> Result<()> {
        let (first, rest) = points
            .split_first()
            .ok_or_else(|| Error::domain("no edge points to record"))?;
        let mut best = first;
        for p in rest {
            if p.z < best.z {
                best = p;
            }
        }
        self.push(TrajectoryEntry {
            t,
            tooth,
            x: best.x,
            y: best.y,
            z: best.z,
        });
        Ok(())
    }

    pub(crate) fn push(&mut self, e: TrajectoryEntry) {
        self.entries.push(e);
    }

    pub(crate) fn extend(&mut self, other: TrajectoryRecord) {
        self.entries.extend(other.entries);
    }
}
