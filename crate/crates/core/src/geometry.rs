//! Planar region algebra: kinematic sectors, swept rectangles, polygon
//! booleans and area-uniform point sampling.
//!
//! All coordinates live in a single planar meter frame. Regions are sets of
//! simple polygons (holes allowed internally); every operation is a pure
//! function of its inputs.

use geo::{
    Area, BooleanOps, Contains, ConvexHull, Coord, LineString, MultiPoint,
    MultiPolygon, Polygon, TriangulateEarcut,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Polygons below this area are treated as numerical noise and dropped.
pub const MIN_POLY_AREA: f64 = 1e-9;
/// Vertices are snapped to this grid before boolean operations.
const SNAP_GRID: f64 = 1e-7;
/// Number of chords used to approximate a sector arc.
const SECTOR_CHORDS: usize = 48;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("cannot sample a point from an empty region")]
    EmptyRegion,
}

/// A point in the planar meter frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Normalize an angle to (-pi, pi].
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Position plus heading; heading is normalized to (-pi, pi] on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point2,
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Point2, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }
}

/// Rectangular vehicle/obstacle extent, centered on its pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub length_m: f64,
    pub width_m: f64,
}

impl Footprint {
    pub fn new(length_m: f64, width_m: f64) -> Self {
        assert!(length_m > 0.0 && width_m > 0.0, "footprint must be positive");
        Self { length_m, width_m }
    }

    /// Radius of the circumscribed circle around the footprint rectangle.
    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.length_m.hypot(self.width_m)
    }

    /// Corners of the footprint placed at `pose`, counter-clockwise.
    pub fn corners(&self, pose: &Pose) -> [Point2; 4] {
        oriented_rect_corners(pose, self.length_m, self.width_m)
    }
}

fn oriented_rect_corners(pose: &Pose, length: f64, width: f64) -> [Point2; 4] {
    let (s, c) = pose.heading.sin_cos();
    let hl = 0.5 * length;
    let hw = 0.5 * width;
    let at = |dl: f64, dw: f64| Point2 {
        x: pose.position.x + dl * c - dw * s,
        y: pose.position.y + dl * s + dw * c,
    };
    [at(hl, hw), at(-hl, hw), at(-hl, -hw), at(hl, -hw)]
}

/// Closed planar area as a set of interior-disjoint simple polygons.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    mp: MultiPolygon<f64>,
}

fn snap(v: f64) -> f64 {
    (v / SNAP_GRID).round() * SNAP_GRID
}

fn snap_mp(mp: &MultiPolygon<f64>) -> MultiPolygon<f64> {
    use geo::MapCoords;
    mp.map_coords(|c| Coord {
        x: snap(c.x),
        y: snap(c.y),
    })
}

fn ring_to_linestring(ring: &[Point2]) -> LineString<f64> {
    LineString::from(
        ring.iter()
            .map(|p| Coord { x: p.x, y: p.y })
            .collect::<Vec<_>>(),
    )
}

impl Region {
    pub fn empty() -> Self {
        Self {
            mp: MultiPolygon::new(vec![]),
        }
    }

    /// Build a region from outer rings (no holes). Degenerate rings are dropped.
    pub fn from_rings(rings: Vec<Vec<Point2>>) -> Self {
        let polys = rings
            .into_iter()
            .filter(|r| r.len() >= 3)
            .map(|r| Polygon::new(ring_to_linestring(&r), vec![]))
            .collect::<Vec<_>>();
        Self::from_multipolygon(MultiPolygon::new(polys))
    }

    pub(crate) fn from_multipolygon(mp: MultiPolygon<f64>) -> Self {
        use geo::orient::{Direction, Orient};
        let polys = mp
            .0
            .into_iter()
            .filter(|p| p.unsigned_area() > MIN_POLY_AREA)
            .map(|p| p.orient(Direction::Default))
            .collect();
        Self {
            mp: MultiPolygon::new(polys),
        }
    }

    pub(crate) fn multipolygon(&self) -> &MultiPolygon<f64> {
        &self.mp
    }

    /// Outer rings of the constituent polygons, counter-clockwise, without the
    /// closing vertex.
    pub fn rings(&self) -> Vec<Vec<Point2>> {
        self.mp
            .0
            .iter()
            .map(|p| {
                let coords = p.exterior().0.as_slice();
                let n = coords.len().saturating_sub(1);
                coords[..n].iter().map(|c| Point2::new(c.x, c.y)).collect()
            })
            .collect()
    }

    pub fn area(&self) -> f64 {
        self.mp.unsigned_area()
    }

    pub fn is_empty(&self) -> bool {
        self.mp.0.is_empty()
    }

    pub fn contains(&self, p: &Point2) -> bool {
        self.mp.contains(&geo::Point::new(p.x, p.y))
    }

    /// Axis-aligned bounding box as (min, max), or None when empty.
    pub fn bounding_box(&self) -> Option<(Point2, Point2)> {
        use geo::BoundingRect;
        self.mp.bounding_rect().map(|r| {
            (
                Point2::new(r.min().x, r.min().y),
                Point2::new(r.max().x, r.max().y),
            )
        })
    }
}

/// Reachable-set over-approximation for a participant at `pose`: a circular
/// sector bisected by the heading with half-angle `steer_max` and radius
/// `speed_max * dt`.
pub fn sector_from_state(pose: &Pose, speed_max: f64, steer_max: f64, dt: f64) -> Region {
    debug_assert!(speed_max >= 0.0 && dt > 0.0);
    debug_assert!(steer_max > 0.0 && steer_max <= PI / 2.0 + 1e-12);
    let radius = speed_max * dt;
    if radius <= 0.0 {
        return Region::empty();
    }
    let mut ring = Vec::with_capacity(SECTOR_CHORDS + 2);
    ring.push(pose.position);
    for i in 0..=SECTOR_CHORDS {
        let a = pose.heading - steer_max + 2.0 * steer_max * (i as f64) / (SECTOR_CHORDS as f64);
        ring.push(Point2::new(
            pose.position.x + radius * a.cos(),
            pose.position.y + radius * a.sin(),
        ));
    }
    Region::from_rings(vec![ring])
}

fn inflated_rect(pose: &Pose, footprint: &Footprint, inflation: f64) -> [Point2; 4] {
    oriented_rect_corners(
        pose,
        footprint.length_m + 2.0 * inflation,
        footprint.width_m + 2.0 * inflation,
    )
}

/// Area covered by a footprint moving through `poses`: the union of the
/// oriented rectangles at each pose and the convex hulls of consecutive
/// rectangle pairs, all inflated by `inflation`.
pub fn swept_region(poses: &[Pose], footprint: &Footprint, inflation: f64) -> Region {
    assert!(!poses.is_empty(), "swept_region requires at least one pose");
    assert!(inflation >= 0.0);
    if poses.len() == 1 {
        let ring = inflated_rect(&poses[0], footprint, inflation);
        return Region::from_rings(vec![ring.to_vec()]);
    }
    let mut acc: Option<MultiPolygon<f64>> = None;
    for pair in poses.windows(2) {
        let a = inflated_rect(&pair[0], footprint, inflation);
        let b = inflated_rect(&pair[1], footprint, inflation);
        let pts: MultiPoint<f64> = a
            .iter()
            .chain(b.iter())
            .map(|p| geo::Point::new(p.x, p.y))
            .collect();
        let hull = pts.convex_hull();
        let hull = MultiPolygon::new(vec![hull]);
        acc = Some(match acc {
            None => hull,
            Some(prev) => snap_mp(&prev).union(&snap_mp(&hull)),
        });
    }
    Region::from_multipolygon(acc.unwrap())
}

/// Set difference `a \ b`.
pub fn region_difference(a: &Region, b: &Region) -> Region {
    if a.is_empty() {
        return Region::empty();
    }
    if b.is_empty() {
        return a.clone();
    }
    Region::from_multipolygon(snap_mp(&a.mp).difference(&snap_mp(&b.mp)))
}

/// Intersection of all given regions. An empty slice yields an empty region.
pub fn region_intersection(regions: &[Region]) -> Region {
    let mut iter = regions.iter();
    let first = match iter.next() {
        None => return Region::empty(),
        Some(r) => r,
    };
    let mut acc = snap_mp(&first.mp);
    for r in iter {
        if acc.0.is_empty() {
            break;
        }
        acc = acc.intersection(&snap_mp(&r.mp));
    }
    Region::from_multipolygon(acc)
}

/// Area-uniform sample strictly inside `region`: triangulate, pick a triangle
/// proportionally to area, then draw uniform barycentric coordinates.
pub fn sample_point<R: Rng + ?Sized>(region: &Region, rng: &mut R) -> Result<Point2, GeometryError> {
    if region.is_empty() || region.area() <= MIN_POLY_AREA {
        return Err(GeometryError::EmptyRegion);
    }
    let mut tris: Vec<([Point2; 3], f64)> = Vec::new();
    for poly in &region.mp {
        let raw = poly.earcut_triangles_raw();
        for idx in raw.triangle_indices.chunks(3) {
            let v = |i: usize| {
                let p = raw.vertices[idx[i]];
                Point2::new(p[0], p[1])
            };
            let (a, b, c) = (v(0), v(1), v(2));
            let area = 0.5
                * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)).abs();
            if area > MIN_POLY_AREA {
                tris.push(([a, b, c], area));
            }
        }
    }
    if tris.is_empty() {
        return Err(GeometryError::EmptyRegion);
    }
    let total: f64 = tris.iter().map(|(_, a)| a).sum();
    for _ in 0..100 {
        let mut pick = rng.random_range(0.0..total);
        let mut chosen = &tris[tris.len() - 1].0;
        for (tri, area) in &tris {
            if pick < *area {
                chosen = tri;
                break;
            }
            pick -= area;
        }
        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
        let sq = r1.sqrt();
        let (a, b, c) = (chosen[0], chosen[1], chosen[2]);
        let p = Point2::new(
            (1.0 - sq) * a.x + sq * (1.0 - r2) * b.x + sq * r2 * c.x,
            (1.0 - sq) * a.y + sq * (1.0 - r2) * b.y + sq * r2 * c.y,
        );
        if region.contains(&p) {
            return Ok(p);
        }
    }
    // Pathological slivers only; fall back to the centroid of the largest triangle.
    let largest = tris
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t, _)| t)
        .unwrap();
    Ok(Point2::new(
        (largest[0].x + largest[1].x + largest[2].x) / 3.0,
        (largest[0].y + largest[1].y + largest[2].y) / 3.0,
    ))
}

/// Separating-axis overlap test for two convex quadrilaterals.
pub fn rects_overlap(a: &[Point2; 4], b: &[Point2; 4]) -> bool {
    fn axes(r: &[Point2; 4]) -> [(f64, f64); 2] {
        let e0 = (r[1].x - r[0].x, r[1].y - r[0].y);
        let e1 = (r[3].x - r[0].x, r[3].y - r[0].y);
        [(-e0.1, e0.0), (-e1.1, e1.0)]
    }
    for axis in axes(a).into_iter().chain(axes(b)) {
        let proj = |r: &[Point2; 4]| {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for p in r {
                let d = p.x * axis.0 + p.y * axis.1;
                min = min.min(d);
                max = max.max(d);
            }
            (min, max)
        };
        let (amin, amax) = proj(a);
        let (bmin, bmax) = proj(b);
        if amax < bmin || bmax < amin {
            return false;
        }
    }
    true
}

fn point_segment_distance(p: &Point2, a: &Point2, b: &Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 <= 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    p.distance(&Point2::new(a.x + t * dx, a.y + t * dy))
}

/// Minimum distance between two convex quadrilaterals; zero when they overlap.
pub fn rect_clearance(a: &[Point2; 4], b: &[Point2; 4]) -> f64 {
    if rects_overlap(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..4 {
        for j in 0..4 {
            best = best.min(point_segment_distance(&a[i], &b[j], &b[(j + 1) % 4]));
            best = best.min(point_segment_distance(&b[i], &a[j], &a[(j + 1) % 4]));
        }
    }
    best
}
