//! Uniform 2D grid, scalar fields sampled at cell centers, and boolean masks.
//!
//! Values are stored row-major: index `j * nx + i` for column `i`, row `j`.
//! Cell `(i, j)` has center `origin + (i, j) * spacing`. Fields are negative
//! inside the sets they describe.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point in grid coordinates (length units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Uniform 2D grid of cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    /// Cell edge length.
    pub spacing: f64,
    /// Coordinates of the center of cell (0, 0).
    pub origin: (f64, f64),
}

impl Grid2 {
    pub fn new(nx: usize, ny: usize, spacing: f64, origin: (f64, f64)) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4x4 cells, got {nx}x{ny}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be > 0, got {spacing}")));
        }
        if !origin.0.is_finite() || !origin.1.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Grid2 { nx, ny, spacing, origin })
    }

    /// Square grid covering `[0, extent]^2` with cells centered inside.
    pub fn square(n: usize, extent: f64) -> Result<Self> {
        let spacing = extent / n as f64;
        Grid2::new(n, n, spacing, (0.5 * spacing, 0.5 * spacing))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// Center of cell (i, j).
    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.0 + i as f64 * self.spacing,
            self.origin.1 + j as f64 * self.spacing,
        )
    }

    /// Full area covered by the cells.
    pub fn area(&self) -> f64 {
        self.nx as f64 * self.ny as f64 * self.spacing * self.spacing
    }

    /// Diagonal of the covered rectangle; used as the "uncapped" distance cap.
    pub fn diameter(&self) -> f64 {
        let w = self.nx as f64 * self.spacing;
        let h = self.ny as f64 * self.spacing;
        w.hypot(h)
    }

    pub fn same_as(&self, other: &Grid2) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
            && (self.origin.0 - other.origin.0).abs() <= 1e-9 * self.spacing
            && (self.origin.1 - other.origin.1).abs() <= 1e-9 * self.spacing
    }
}

/// Real-valued function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid2,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "value count {} does not match grid {}x{}",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("cell {k}")));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: Grid2, value: f64) -> Self {
        ScalarField { grid, values: vec![value; grid.len()] }
    }

    /// Sample an analytic function at every cell center.
    pub fn from_fn(grid: Grid2, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let p = grid.center(i, j);
                values.push(f(p.x, p.y));
            }
        }
        ScalarField { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation at an arbitrary point; clamps to the sampled
    /// rectangle so boundary queries stay defined.
    pub fn interp(&self, p: Point) -> f64 {
        let g = &self.grid;
        let fx = ((p.x - g.origin.0) / g.spacing).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((p.y - g.origin.1) / g.spacing).clamp(0.0, (g.ny - 1) as f64);
        let i0 = (fx.floor() as usize).min(g.nx - 2);
        let j0 = (fy.floor() as usize).min(g.ny - 2);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let v00 = self.at(i0, j0);
        let v10 = self.at(i0 + 1, j0);
        let v01 = self.at(i0, j0 + 1);
        let v11 = self.at(i0 + 1, j0 + 1);
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty + v11 * tx * ty
    }

    /// Strict sublevel mask `{ field < level }`.
    pub fn sublevel_mask(&self, level: f64) -> RegionMask {
        RegionMask {
            grid: self.grid,
            inside: self.values.iter().map(|&v| v < level).collect(),
        }
    }
}

/// Per-cell set membership; the discrete stand-in for the evolving sets.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    pub grid: Grid2,
    pub inside: Vec<bool>,
}

impl RegionMask {
    pub fn new(grid: Grid2, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "mask length {} does not match grid {}x{}",
                inside.len(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(RegionMask { grid, inside })
    }

    pub fn empty(grid: Grid2) -> Self {
        RegionMask { grid, inside: vec![false; grid.len()] }
    }

    pub fn full(grid: Grid2) -> Self {
        RegionMask { grid, inside: vec![true; grid.len()] }
    }

    pub fn from_fn(grid: Grid2, mut f: impl FnMut(f64, f64) -> bool) -> Self {
        let mut inside = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let p = grid.center(i, j);
                inside.push(f(p.x, p.y));
            }
        }
        RegionMask { grid, inside }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> bool {
        self.inside[self.grid.idx(i, j)]
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_empty_set(&self) -> bool {
        self.inside.iter().all(|&b| !b)
    }

    pub fn is_full_set(&self) -> bool {
        self.inside.iter().all(|&b| b)
    }

    /// Cell area of the set.
    pub fn area(&self) -> f64 {
        self.count() as f64 * self.grid.spacing * self.grid.spacing
    }

    /// Cellwise subset test, ignoring the listed ambiguous cells.
    pub fn subset_of(&self, other: &RegionMask, ambiguous: &[usize]) -> bool {
        if !self.grid.same_as(&other.grid) {
            return false;
        }
        let mut skip = vec![false; self.inside.len()];
        for &k in ambiguous {
            if k < skip.len() {
                skip[k] = true;
            }
        }
        self.inside
            .iter()
            .zip(other.inside.iter())
            .zip(skip.iter())
            .all(|((&a, &b), &s)| s || !a || b)
    }

    /// Cells inside the set that touch an outside 4-neighbor (or the hull).
    pub fn front_cells(&self) -> Vec<usize> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if !self.at(i, j) {
                    continue;
                }
                let boundary = i == 0
                    || j == 0
                    || i == nx - 1
                    || j == ny - 1
                    || !self.at(i - 1, j)
                    || !self.at(i + 1, j)
                    || !self.at(i, j - 1)
                    || !self.at(i, j + 1);
                if boundary {
                    out.push(self.grid.idx(i, j));
                }
            }
        }
        out
    }
}

/// Area of the exact symmetric difference of two masks.
pub fn symmetric_difference_area(a: &RegionMask, b: &RegionMask) -> Result<f64> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch("symmetric_difference_area".into()));
    }
    let n = a
        .inside
        .iter()
        .zip(b.inside.iter())
        .filter(|(&x, &y)| x != y)
        .count();
    Ok(n as f64 * a.grid.spacing * a.grid.spacing)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_degenerate_shapes() {
        assert!(Grid2::new(3, 8, 0.1, (0.0, 0.0)).is_err());
        assert!(Grid2::new(8, 8, 0.0, (0.0, 0.0)).is_err());
        assert!(Grid2::new(8, 8, -1.0, (0.0, 0.0)).is_err());
        assert!(Grid2::new(8, 8, 0.1, (f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn square_grid_covers_unit_box() {
        let g = Grid2::square(64, 1.0).unwrap();
        assert_eq!(g.spacing, 1.0 / 64.0);
        assert!((g.area() - 1.0).abs() < 1e-12);
        let c = g.center(63, 63);
        assert!((c.x - (1.0 - g.spacing / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn field_rejects_nan_and_bad_len() {
        let g = Grid2::square(4, 1.0).unwrap();
        assert!(ScalarField::new(g, vec![0.0; 15]).is_err());
        let mut v = vec![0.0; 16];
        v[7] = f64::NAN;
        assert!(ScalarField::new(g, v).is_err());
    }

    #[test]
    fn interp_matches_samples_and_center_values() {
        let g = Grid2::square(8, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| 2.0 * x - y);
        for j in 0..8 {
            for i in 0..8 {
                let p = g.center(i, j);
                assert!((f.interp(p) - (2.0 * p.x - p.y)).abs() < 1e-12);
            }
        }
        // Bilinear is exact on affine fields between samples too.
        let p = Point::new(0.41, 0.57);
        assert!((f.interp(p) - (2.0 * p.x - p.y)).abs() < 1e-12);
    }

    #[test]
    fn symdiff_identical_and_disjoint() {
        let g = Grid2::square(16, 1.0).unwrap();
        let a = RegionMask::from_fn(g, |x, _| x < 0.25);
        let b = RegionMask::from_fn(g, |x, _| x > 0.75);
        assert_eq!(symmetric_difference_area(&a, &a).unwrap(), 0.0);
        let expect = a.area() + b.area();
        assert!((symmetric_difference_area(&a, &b).unwrap() - expect).abs() < 1e-12);
        let g2 = Grid2::square(8, 1.0).unwrap();
        let c = RegionMask::empty(g2);
        assert!(symmetric_difference_area(&a, &c).is_err());
    }

    #[test]
    fn subset_respects_ambiguous_cells() {
        let g = Grid2::square(4, 1.0).unwrap();
        let mut a = RegionMask::empty(g);
        let b = RegionMask::empty(g);
        a.inside[5] = true;
        assert!(!a.subset_of(&b, &[]));
        assert!(a.subset_of(&b, &[5]));
    }
}
