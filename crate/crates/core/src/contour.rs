//! Sub-cell contour extraction and geometric measurements.
//!
//! Level sets are reconstructed by marching squares on the lattice of cell
//! centers with linear interpolation along lattice edges. Saddle squares are
//! resolved by the sign of the center sample (mean of the four corners), which
//! keeps the extraction deterministic and orientation-consistent. Polylines
//! are oriented with the inside (`field < level`) on the left, so a disk's
//! contour runs counterclockwise.

use crate::error::{Error, Result};
use crate::grid::{Point, RegionMask, ScalarField};

/// An ordered vertex chain; closed chains repeat their first point at the end.
#[derive(Debug, Clone)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }
}

/// A level-set contour: zero or more polylines, inside on the left.
#[derive(Debug, Clone, Default)]
pub struct Contour {
    pub polylines: Vec<Polyline>,
}

impl Contour {
    pub fn is_empty(&self) -> bool {
        self.polylines.iter().all(|p| p.points.len() < 2)
    }

    pub fn total_length(&self) -> f64 {
        self.polylines.iter().map(|p| p.length()).sum()
    }

    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(|p| p.points.len()).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Point> {
        self.polylines.iter().flat_map(|p| p.points.iter())
    }

    /// Directed segments of every polyline.
    pub fn segments(&self) -> Vec<(Point, Point)> {
        let mut out = Vec::new();
        for pl in &self.polylines {
            for w in pl.points.windows(2) {
                out.push((w[0], w[1]));
            }
        }
        out
    }
}

/// Lattice edge identifier: horizontal edges join (i,j)-(i+1,j), vertical
/// edges join (i,j)-(i,j+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKey {
    H(usize, usize),
    V(usize, usize),
}

struct CrossTables {
    nx: usize,
    /// Crossing point on H(i,j), index i + j*(nx-1).
    h: Vec<Option<Point>>,
    /// Crossing point on V(i,j), index i + j*nx.
    v: Vec<Option<Point>>,
}

impl CrossTables {
    fn get(&self, key: EdgeKey) -> Point {
        match key {
            EdgeKey::H(i, j) => self.h[i + j * (self.nx - 1)].expect("missing H crossing"),
            EdgeKey::V(i, j) => self.v[i + j * self.nx].expect("missing V crossing"),
        }
    }
}

/// Extract the sub-cell contour of `{field = level}` with inside-on-left
/// orientation.
///
/// Returns an empty contour when the level set is empty. Errors when every
/// sample equals the level exactly (the contour is then ambiguous).
pub fn extract_contour(field: &ScalarField, level: f64) -> Result<Contour> {
    let g = &field.grid;
    let (nx, ny) = (g.nx, g.ny);
    let s = g.spacing;
    if field.values.iter().all(|&v| v == level) {
        return Err(Error::AmbiguousContour);
    }

    let inside = |v: f64| v < level;
    // One crossing per lattice edge, computed once so that both adjacent
    // squares reference bit-identical vertices.
    let mut tables = CrossTables {
        nx,
        h: vec![None; (nx - 1) * ny],
        v: vec![None; nx * (ny - 1)],
    };
    for j in 0..ny {
        for i in 0..nx - 1 {
            let va = field.at(i, j);
            let vb = field.at(i + 1, j);
            if inside(va) != inside(vb) {
                let t = (level - va) / (vb - va);
                let c = g.center(i, j);
                tables.h[i + j * (nx - 1)] = Some(Point::new(c.x + t * s, c.y));
            }
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            let va = field.at(i, j);
            let vd = field.at(i, j + 1);
            if inside(va) != inside(vd) {
                let t = (level - va) / (vd - va);
                let c = g.center(i, j);
                tables.v[i + j * nx] = Some(Point::new(c.x, c.y + t * s));
            }
        }
    }

    // Directed segments per dual square, encoded as (start edge, end edge).
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = inside(field.at(i, j));
            let b = inside(field.at(i + 1, j));
            let c = inside(field.at(i + 1, j + 1));
            let d = inside(field.at(i, j + 1));
            let code = (a as u8) | (b as u8) << 1 | (c as u8) << 2 | (d as u8) << 3;
            let bot = EdgeKey::H(i, j);
            let top = EdgeKey::H(i, j + 1);
            let left = EdgeKey::V(i, j);
            let right = EdgeKey::V(i + 1, j);
            match code {
                0b0000 | 0b1111 => {}
                0b0001 => segments.push((bot, left)),
                0b0010 => segments.push((right, bot)),
                0b0011 => segments.push((right, left)),
                0b0100 => segments.push((top, right)),
                0b0110 => segments.push((top, bot)),
                0b0111 => segments.push((top, left)),
                0b1000 => segments.push((left, top)),
                0b1001 => segments.push((bot, top)),
                0b1011 => segments.push((right, top)),
                0b1100 => segments.push((left, right)),
                0b1101 => segments.push((bot, right)),
                0b1110 => segments.push((left, bot)),
                0b0101 => {
                    let m = 0.25
                        * (field.at(i, j)
                            + field.at(i + 1, j)
                            + field.at(i + 1, j + 1)
                            + field.at(i, j + 1));
                    if inside(m) {
                        segments.push((bot, right));
                        segments.push((top, left));
                    } else {
                        segments.push((bot, left));
                        segments.push((top, right));
                    }
                }
                0b1010 => {
                    let m = 0.25
                        * (field.at(i, j)
                            + field.at(i + 1, j)
                            + field.at(i + 1, j + 1)
                            + field.at(i, j + 1));
                    if inside(m) {
                        segments.push((left, bot));
                        segments.push((right, top));
                    } else {
                        segments.push((right, bot));
                        segments.push((left, top));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    Ok(assemble(segments, &tables))
}

/// Chain directed segments into polylines. Every lattice edge carries at most
/// one crossing, so each edge key starts at most one segment and ends at most
/// one; chains are therefore unique.
fn assemble(segments: Vec<(EdgeKey, EdgeKey)>, tables: &CrossTables) -> Contour {
    use std::collections::HashMap;
    let mut by_start: HashMap<EdgeKey, usize> = HashMap::with_capacity(segments.len());
    let mut has_end: HashMap<EdgeKey, bool> = HashMap::with_capacity(segments.len());
    for (k, seg) in segments.iter().enumerate() {
        by_start.insert(seg.0, k);
        has_end.insert(seg.1, true);
    }
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();

    let walk = |start_idx: usize, used: &mut Vec<bool>| -> (Vec<Point>, bool) {
        let mut pts = Vec::new();
        let first_key = segments[start_idx].0;
        pts.push(tables.get(first_key));
        let mut idx = start_idx;
        let mut closed = false;
        loop {
            used[idx] = true;
            let end_key = segments[idx].1;
            let p = tables.get(end_key);
            if *pts.last().unwrap() != p {
                pts.push(p);
            }
            if end_key == first_key {
                closed = true;
                break;
            }
            match by_start.get(&end_key) {
                Some(&next) if !used[next] => idx = next,
                _ => break,
            }
        }
        (pts, closed)
    };

    // Open chains first: heads are segments nothing flows into.
    for k in 0..segments.len() {
        if used[k] || has_end.contains_key(&segments[k].0) {
            continue;
        }
        let (pts, closed) = walk(k, &mut used);
        if pts.len() >= 2 {
            polylines.push(Polyline { points: pts, closed });
        }
    }
    // Remaining segments belong to closed loops.
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let (pts, closed) = walk(k, &mut used);
        if pts.len() >= 2 {
            polylines.push(Polyline { points: pts, closed });
        }
    }
    Contour { polylines }
}

/// Area of `{field < level}` with sub-cell resolution.
///
/// Interior dual squares contribute the polygon area of the marching-squares
/// clip; the half-cell band around the lattice hull is filled by linear edge
/// fractions so a fully inside field measures the exact total grid area.
pub fn area_sublevel(field: &ScalarField, level: f64) -> f64 {
    let g = &field.grid;
    let (nx, ny) = (g.nx, g.ny);
    let s = g.spacing;
    let inside = |v: f64| v < level;

    // Fraction of an edge lying inside, by linear interpolation.
    let frac = |va: f64, vb: f64| -> f64 {
        match (inside(va), inside(vb)) {
            (true, true) => 1.0,
            (false, false) => 0.0,
            (true, false) => (level - va) / (vb - va),
            (false, true) => 1.0 - (level - va) / (vb - va),
        }
    };

    let mut area = 0.0;
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let va = field.at(i, j);
            let vb = field.at(i + 1, j);
            let vc = field.at(i + 1, j + 1);
            let vd = field.at(i, j + 1);
            area += square_inside_area(va, vb, vc, vd, level) * s * s;
        }
    }
    // Hull band: strips of width s/2 along each side plus quarter squares at
    // the four corners.
    let half = 0.5 * s * s;
    for i in 0..nx - 1 {
        area += frac(field.at(i, 0), field.at(i + 1, 0)) * half;
        area += frac(field.at(i, ny - 1), field.at(i + 1, ny - 1)) * half;
    }
    for j in 0..ny - 1 {
        area += frac(field.at(0, j), field.at(0, j + 1)) * half;
        area += frac(field.at(nx - 1, j), field.at(nx - 1, j + 1)) * half;
    }
    let quarter = 0.25 * s * s;
    for (i, j) in [(0, 0), (nx - 1, 0), (0, ny - 1), (nx - 1, ny - 1)] {
        if inside(field.at(i, j)) {
            area += quarter;
        }
    }
    area
}

/// Inside-region area of one marching square in units of the square's area.
fn square_inside_area(va: f64, vb: f64, vc: f64, vd: f64, level: f64) -> f64 {
    let inside = |v: f64| v < level;
    let code = (inside(va) as u8)
        | (inside(vb) as u8) << 1
        | (inside(vc) as u8) << 2
        | (inside(vd) as u8) << 3;
    if code == 0 {
        return 0.0;
    }
    if code == 0b1111 {
        return 1.0;
    }
    let t = |p: f64, q: f64| (level - p) / (q - p);
    let tb = if inside(va) != inside(vb) { t(va, vb) } else { 0.0 };
    let tr = if inside(vb) != inside(vc) { t(vb, vc) } else { 0.0 };
    let tt = if inside(vd) != inside(vc) { t(vd, vc) } else { 0.0 };
    let tl = if inside(va) != inside(vd) { t(va, vd) } else { 0.0 };

    let shoelace = |pts: &[(f64, f64)]| -> f64 {
        let mut acc = 0.0;
        for k in 0..pts.len() {
            let (x0, y0) = pts[k];
            let (x1, y1) = pts[(k + 1) % pts.len()];
            acc += x0 * y1 - x1 * y0;
        }
        0.5 * acc
    };

    match code {
        0b0001 => shoelace(&[(0.0, 0.0), (tb, 0.0), (0.0, tl)]),
        0b0010 => shoelace(&[(tb, 0.0), (1.0, 0.0), (1.0, tr)]),
        0b0011 => shoelace(&[(0.0, 0.0), (1.0, 0.0), (1.0, tr), (0.0, tl)]),
        0b0100 => shoelace(&[(1.0, tr), (1.0, 1.0), (tt, 1.0)]),
        0b0110 => shoelace(&[(tb, 0.0), (1.0, 0.0), (1.0, 1.0), (tt, 1.0)]),
        0b0111 => shoelace(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (tt, 1.0), (0.0, tl)]),
        0b1000 => shoelace(&[(0.0, tl), (tt, 1.0), (0.0, 1.0)]),
        0b1001 => shoelace(&[(0.0, 0.0), (tb, 0.0), (tt, 1.0), (0.0, 1.0)]),
        0b1011 => shoelace(&[(0.0, 0.0), (1.0, 0.0), (1.0, tr), (tt, 1.0), (0.0, 1.0)]),
        0b1100 => shoelace(&[(0.0, tl), (1.0, tr), (1.0, 1.0), (0.0, 1.0)]),
        0b1101 => shoelace(&[(0.0, 0.0), (tb, 0.0), (1.0, tr), (1.0, 1.0), (0.0, 1.0)]),
        0b1110 => shoelace(&[(tb, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, tl)]),
        0b0101 => {
            let m = 0.25 * (va + vb + vc + vd);
            if inside(m) {
                shoelace(&[(0.0, 0.0), (tb, 0.0), (1.0, tr), (1.0, 1.0), (tt, 1.0), (0.0, tl)])
            } else {
                shoelace(&[(0.0, 0.0), (tb, 0.0), (0.0, tl)])
                    + shoelace(&[(1.0, tr), (1.0, 1.0), (tt, 1.0)])
            }
        }
        0b1010 => {
            let m = 0.25 * (va + vb + vc + vd);
            if inside(m) {
                shoelace(&[(tb, 0.0), (1.0, 0.0), (1.0, tr), (tt, 1.0), (0.0, 1.0), (0.0, tl)])
            } else {
                shoelace(&[(tb, 0.0), (1.0, 0.0), (1.0, tr)])
                    + shoelace(&[(0.0, tl), (tt, 1.0), (0.0, 1.0)])
            }
        }
        _ => unreachable!(),
    }
}

/// Length of the sub-cell contour of `{field < level}`.
pub fn perimeter_sublevel(field: &ScalarField, level: f64) -> Result<f64> {
    Ok(extract_contour(field, level)?.total_length())
}

/// Discrete-TV perimeter surrogate: the forward-difference total variation of
/// the set indicator. Differs from contour length by an anisotropy factor;
/// reported alongside it in diagnostics.
pub fn perimeter_tv(mask: &RegionMask) -> f64 {
    let g = &mask.grid;
    let s = g.spacing;
    let mut total = 0.0f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let c = mask.at(i, j) as i32;
            let dx = if i + 1 < g.nx { (mask.at(i + 1, j) as i32 - c).abs() } else { 0 };
            let dy = if j + 1 < g.ny { (mask.at(i, j + 1) as i32 - c).abs() } else { 0 };
            total += ((dx * dx + dy * dy) as f64).sqrt();
        }
    }
    total * s
}

/// Curvature samples along a contour with a skip count for degenerate
/// gradient stencils.
#[derive(Debug, Clone)]
pub struct CurvatureSamples {
    pub samples: Vec<(Point, f64)>,
    pub skipped: usize,
}

impl CurvatureSamples {
    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return f64::NAN;
        }
        self.samples.iter().map(|(_, k)| k).sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, (_, k)| m.max(k.abs()))
    }
}

/// Curvature `div(grad u / |grad u|)` of the level sets of `field`, sampled at
/// the contour vertices. Positive on the boundary of a convex set when the
/// field is negative inside. Vertices within `2 * spacing` of the sampled
/// hull are excluded; vanishing-gradient stencils are skipped and counted.
pub fn curvature_on_contour(field: &ScalarField, contour: &Contour) -> CurvatureSamples {
    let g = &field.grid;
    let (nx, ny) = (g.nx, g.ny);
    let s = g.spacing;
    let eps = 1e-12 * (1.0 + field.max_abs() / s);

    // Unit normals by central differences; interior cells only.
    let mut nx_f = vec![f64::NAN; g.len()];
    let mut ny_f = vec![f64::NAN; g.len()];
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let gx = (field.at(i + 1, j) - field.at(i - 1, j)) / (2.0 * s);
            let gy = (field.at(i, j + 1) - field.at(i, j - 1)) / (2.0 * s);
            let norm = gx.hypot(gy);
            if norm > eps {
                let k = g.idx(i, j);
                nx_f[k] = gx / norm;
                ny_f[k] = gy / norm;
            }
        }
    }
    // Divergence of the normal field, again by central differences.
    let mut kappa = vec![f64::NAN; g.len()];
    for j in 2..ny - 2 {
        for i in 2..nx - 2 {
            let xs = [nx_f[g.idx(i + 1, j)], nx_f[g.idx(i - 1, j)]];
            let ys = [ny_f[g.idx(i, j + 1)], ny_f[g.idx(i, j - 1)]];
            if xs.iter().chain(ys.iter()).all(|v| v.is_finite()) {
                kappa[g.idx(i, j)] = (xs[0] - xs[1]) / (2.0 * s) + (ys[0] - ys[1]) / (2.0 * s);
            }
        }
    }

    let x_lo = g.origin.0 + 2.0 * s;
    let x_hi = g.origin.0 + (nx - 1) as f64 * s - 2.0 * s;
    let y_lo = g.origin.1 + 2.0 * s;
    let y_hi = g.origin.1 + (ny - 1) as f64 * s - 2.0 * s;

    let mut samples = Vec::new();
    let mut skipped = 0usize;
    for pl in &contour.polylines {
        let n_pts = if pl.closed { pl.points.len() - 1 } else { pl.points.len() };
        for p in &pl.points[..n_pts] {
            if p.x < x_lo || p.x > x_hi || p.y < y_lo || p.y > y_hi {
                continue;
            }
            // Bilinear interpolation over the kappa grid.
            let fx = (p.x - g.origin.0) / s;
            let fy = (p.y - g.origin.1) / s;
            let i0 = (fx.floor() as usize).min(nx - 2);
            let j0 = (fy.floor() as usize).min(ny - 2);
            let tx = fx - i0 as f64;
            let ty = fy - j0 as f64;
            let k00 = kappa[g.idx(i0, j0)];
            let k10 = kappa[g.idx(i0 + 1, j0)];
            let k01 = kappa[g.idx(i0, j0 + 1)];
            let k11 = kappa[g.idx(i0 + 1, j0 + 1)];
            if [k00, k10, k01, k11].iter().all(|v| v.is_finite()) {
                let k = k00 * (1.0 - tx) * (1.0 - ty)
                    + k10 * tx * (1.0 - ty)
                    + k01 * (1.0 - tx) * ty
                    + k11 * tx * ty;
                samples.push((*p, k));
            } else {
                skipped += 1;
            }
        }
    }
    CurvatureSamples { samples, skipped }
}

fn point_segment_dist(p: &Point, a: &Point, b: &Point) -> f64 {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / len2).clamp(0.0, 1.0);
    let qx = a.x + t * abx;
    let qy = a.y + t * aby;
    (p.x - qx).hypot(p.y - qy)
}

fn directed_hausdorff(from: &Contour, to_segs: &[(Point, Point)]) -> f64 {
    let mut worst = 0.0f64;
    for p in from.vertices() {
        let mut best = f64::INFINITY;
        for (a, b) in to_segs {
            let d = point_segment_dist(p, a, b);
            if d < best {
                best = d;
            }
        }
        worst = worst.max(best);
    }
    worst
}

/// Symmetric Hausdorff distance between two contours: vertex sets against the
/// other contour's segments.
pub fn hausdorff(a: &Contour, b: &Contour) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyContour("hausdorff of empty contour".into()));
    }
    let sa = a.segments();
    let sb = b.segments();
    Ok(directed_hausdorff(a, &sb).max(directed_hausdorff(b, &sa)))
}

/// Minimum distance between the vertex set of one polyline and the segments
/// of another; used for component separation estimates.
pub fn polyline_min_distance(a: &Polyline, b: &Polyline) -> f64 {
    let mut best = f64::INFINITY;
    for p in &a.points {
        for w in b.points.windows(2) {
            best = best.min(point_segment_dist(p, &w[0], &w[1]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2;

    fn disk_field(n: usize, cx: f64, cy: f64, r: f64) -> ScalarField {
        let g = Grid2::square(n, 1.0).unwrap();
        ScalarField::from_fn(g, |x, y| (x - cx).hypot(y - cy) - r)
    }

    #[test]
    fn planar_interface_is_single_vertical_line() {
        let g = Grid2::square(32, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, _| x - 0.5);
        let c = extract_contour(&f, 0.0).unwrap();
        assert_eq!(c.polylines.len(), 1);
        assert!(!c.polylines[0].closed);
        for p in c.vertices() {
            assert!((p.x - 0.5).abs() < 1e-12, "vertex x = {}", p.x);
        }
    }

    #[test]
    fn disk_contour_is_one_closed_loop_on_radius() {
        let f = disk_field(64, 0.5, 0.5, 0.25);
        let s = f.grid.spacing;
        let c = extract_contour(&f, 0.0).unwrap();
        assert_eq!(c.polylines.len(), 1);
        assert!(c.polylines[0].closed);
        let first = c.polylines[0].points[0];
        let last = *c.polylines[0].points.last().unwrap();
        assert_eq!(first, last);
        for p in c.vertices() {
            let r = (p.x - 0.5).hypot(p.y - 0.5);
            assert!((r - 0.25).abs() < s, "radius deviation {}", (r - 0.25).abs());
        }
    }

    #[test]
    fn constant_field_has_empty_contour() {
        let g = Grid2::square(8, 1.0).unwrap();
        let f = ScalarField::constant(g, 1.0);
        let c = extract_contour(&f, 0.0).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn all_equal_level_is_ambiguous() {
        let g = Grid2::square(8, 1.0).unwrap();
        let f = ScalarField::constant(g, 0.0);
        assert!(matches!(extract_contour(&f, 0.0), Err(Error::AmbiguousContour)));
    }

    #[test]
    fn contour_vertices_sit_on_the_level() {
        let g = Grid2::square(48, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| {
            (x - 0.45).hypot(y - 0.55) - 0.3 + 0.05 * (7.0 * x).sin() * (5.0 * y).cos()
        });
        let range = f.max() - f.min();
        let c = extract_contour(&f, 0.1).unwrap();
        assert!(c.vertex_count() > 0);
        for p in c.vertices() {
            assert!((f.interp(*p) - 0.1).abs() <= 1e-9 * range);
        }
    }

    #[test]
    fn half_plane_area() {
        let g = Grid2::square(64, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, _| x - 0.5);
        let a = area_sublevel(&f, 0.0);
        assert!((a - 0.5).abs() <= g.spacing * g.spacing, "area {}", a);
    }

    #[test]
    fn disk_area_matches_analytic() {
        let f = disk_field(128, 0.5, 0.5, 0.25);
        let a = area_sublevel(&f, 0.0);
        let expect = std::f64::consts::PI * 0.0625;
        let tol = 2.0 * f.grid.spacing * (2.0 * std::f64::consts::PI * 0.25);
        assert!((a - expect).abs() < tol, "area {a} vs {expect}");
    }

    #[test]
    fn full_field_area_is_exact() {
        let g = Grid2::square(16, 1.0).unwrap();
        let f = ScalarField::constant(g, -1.0);
        let a = area_sublevel(&f, 0.0);
        assert!((a - g.area()).abs() < 1e-12);
    }

    #[test]
    fn area_monotone_in_level() {
        let g = Grid2::square(24, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| ((9.0 * x).sin() + (7.0 * y + 1.0).cos()) * 0.5);
        let mut prev = f64::NEG_INFINITY;
        let lo = f.min() - 0.1;
        let hi = f.max() + 0.1;
        for k in 0..=40 {
            let level = lo + (hi - lo) * k as f64 / 40.0;
            let a = area_sublevel(&f, level);
            assert!(a >= prev - 1e-12, "area not monotone at level {level}");
            prev = a;
        }
        assert!((prev - g.area()).abs() < 1e-12);
    }

    #[test]
    fn disk_perimeter_within_3_percent() {
        let f = disk_field(256, 0.5, 0.5, 0.25);
        let p = perimeter_sublevel(&f, 0.0).unwrap();
        let expect = 2.0 * std::f64::consts::PI * 0.25;
        assert!((p - expect).abs() / expect < 0.03, "perimeter {p} vs {expect}");
    }

    #[test]
    fn square_perimeter_within_3_percent() {
        let g = Grid2::square(256, 1.0).unwrap();
        // Max-norm distance to a square of half-side 0.2.
        let f = ScalarField::from_fn(g, |x, y| (x - 0.5).abs().max((y - 0.5).abs()) - 0.2);
        let p = perimeter_sublevel(&f, 0.0).unwrap();
        assert!((p - 1.6).abs() / 1.6 < 0.03, "perimeter {p}");
    }

    #[test]
    fn empty_set_perimeter_zero() {
        let g = Grid2::square(8, 1.0).unwrap();
        let f = ScalarField::constant(g, 1.0);
        assert_eq!(perimeter_sublevel(&f, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn disk_curvature_near_inverse_radius() {
        let f = disk_field(128, 0.5, 0.5, 0.25);
        let c = extract_contour(&f, 0.0).unwrap();
        let ks = curvature_on_contour(&f, &c);
        assert!(ks.skipped == 0);
        assert!(!ks.samples.is_empty());
        for (_, k) in &ks.samples {
            assert!((k - 4.0).abs() < 0.4, "kappa {k}");
        }
        let mean = ks.mean();
        assert!((mean - 4.0).abs() / 4.0 < 0.05, "mean kappa {mean}");
    }

    #[test]
    fn negated_disk_flips_curvature_sign() {
        let mut f = disk_field(128, 0.5, 0.5, 0.25);
        for v in &mut f.values {
            *v = -*v;
        }
        let c = extract_contour(&f, 0.0).unwrap();
        let ks = curvature_on_contour(&f, &c);
        for (_, k) in &ks.samples {
            assert!((k + 4.0).abs() < 0.4, "kappa {k}");
        }
    }

    #[test]
    fn planar_curvature_is_machine_zero() {
        let g = Grid2::square(64, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, _| x - 0.5);
        let c = extract_contour(&f, 0.0).unwrap();
        let ks = curvature_on_contour(&f, &c);
        let tol = 0.05 / g.spacing * f64::EPSILON;
        for (_, k) in &ks.samples {
            assert!(k.abs() <= tol.max(1e-13), "kappa {k}");
        }
    }

    #[test]
    fn hausdorff_concentric_and_translated_circles() {
        let s = 1.0 / 128.0;
        let f1 = disk_field(128, 0.5, 0.5, 0.2);
        let f2 = disk_field(128, 0.5, 0.5, 0.3);
        let c1 = extract_contour(&f1, 0.0).unwrap();
        let c2 = extract_contour(&f2, 0.0).unwrap();
        let d = hausdorff(&c1, &c2).unwrap();
        assert!((d - 0.1).abs() < s, "hausdorff {d}");
        assert_eq!(hausdorff(&c1, &c1).unwrap(), 0.0);

        let f3 = disk_field(128, 0.55, 0.5, 0.2);
        let c3 = extract_contour(&f3, 0.0).unwrap();
        let d3 = hausdorff(&c1, &c3).unwrap();
        assert!((d3 - 0.05).abs() < s, "hausdorff {d3}");
    }

    #[test]
    fn hausdorff_empty_is_error() {
        let g = Grid2::square(8, 1.0).unwrap();
        let f = ScalarField::constant(g, 1.0);
        let empty = extract_contour(&f, 0.0).unwrap();
        let c = extract_contour(&disk_field(32, 0.5, 0.5, 0.25), 0.0).unwrap();
        assert!(hausdorff(&empty, &c).is_err());
    }
}
