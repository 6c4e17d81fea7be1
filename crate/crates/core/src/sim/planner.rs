//! Built-in reference planner: A* over a square lattice of the drivable
//! area, with obstacle blocking/inflation and a lane-change penalty.
//!
//! The planner is deliberately simple but carries a concrete non-optimality
//! mechanism: the `Timid` preset inflates the blocking radius around
//! obstacles, so gaps that are physically passable are treated as blocked
//! and the planner detours even though the original path stays available.

use super::{PlanError, PlannedPath, PlannerInterface, PathPoint, WorldView};
use crate::geometry::Point2;
use crate::scenario::{ego_footprint, RoadMap};
use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PlannerPreset {
    #[default]
    Default,
    /// Blocking radius inflated by 0.8 m: seeds discoverable non-optimal
    /// detours around gaps that are in fact wide enough.
    Timid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub cell_size: f64,
    pub rho_block: f64,
    pub rho_infl: f64,
    pub lambda_obs: f64,
    pub lambda_lc: f64,
    /// How far into the future NPC positions are swept into the cost grid.
    pub prediction_horizon: f64,
    pub cruise_speed: f64,
}

impl PlannerParams {
    pub fn preset(preset: PlannerPreset) -> Self {
        let base_block = 0.5 * ego_footprint().width_m + 0.3;
        let rho_block = match preset {
            PlannerPreset::Default => base_block,
            PlannerPreset::Timid => base_block + 0.8,
        };
        Self {
            cell_size: 0.5,
            rho_block,
            rho_infl: rho_block + 1.2,
            lambda_obs: 5.0,
            lambda_lc: 8.0,
            prediction_horizon: 3.0,
            cruise_speed: 8.0,
        }
    }
}

/// Static per-map lattice data, built once and reused across replans.
struct MapGrid {
    map_id: String,
    origin: Point2,
    nx: usize,
    ny: usize,
    cell: f64,
    drivable: Vec<bool>,
    lane_label: Vec<u16>,
    /// lane_link[a * n + b] is true when lanes a and b are successor-linked
    /// (either direction); crossing such a boundary is not a lane change.
    lane_link: Vec<bool>,
    lane_count: usize,
}

impl MapGrid {
    fn build(map: &RoadMap, cell: f64) -> Self {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for lane in &map.lanes {
            let half = 0.5 * lane.width_m;
            for p in &lane.centerline {
                min.x = min.x.min(p.x - half);
                min.y = min.y.min(p.y - half);
                max.x = max.x.max(p.x + half);
                max.y = max.y.max(p.y + half);
            }
        }
        let margin = 2.0;
        let origin = Point2::new(min.x - margin, min.y - margin);
        let nx = (((max.x - min.x) + 2.0 * margin) / cell).ceil() as usize + 1;
        let ny = (((max.y - min.y) + 2.0 * margin) / cell).ceil() as usize + 1;
        let mut drivable = vec![false; nx * ny];
        let mut lane_label = vec![0u16; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let p = Point2::new(
                    origin.x + (i as f64 + 0.5) * cell,
                    origin.y + (j as f64 + 0.5) * cell,
                );
                let mut best = usize::MAX;
                let mut best_d = f64::INFINITY;
                for (li, lane) in map.lanes.iter().enumerate() {
                    let d = lane.distance_to_centerline(&p);
                    if d < best_d {
                        best_d = d;
                        best = li;
                    }
                }
                if best != usize::MAX && best_d <= 0.5 * map.lanes[best].width_m {
                    drivable[j * nx + i] = true;
                    lane_label[j * nx + i] = best as u16;
                }
            }
        }
        let n = map.lanes.len();
        let mut lane_link = vec![false; n * n];
        for (a, lane) in map.lanes.iter().enumerate() {
            for succ in &lane.successors {
                if let Some(b) = map.lanes.iter().position(|l| &l.id == succ) {
                    lane_link[a * n + b] = true;
                    lane_link[b * n + a] = true;
                }
            }
        }
        Self {
            map_id: map.id.clone(),
            origin,
            nx,
            ny,
            cell,
            drivable,
            lane_label,
            lane_link,
            lane_count: n,
        }
    }

    fn cell_of(&self, p: &Point2) -> Option<(usize, usize)> {
        let i = ((p.x - self.origin.x) / self.cell).floor();
        let j = ((p.y - self.origin.y) / self.cell).floor();
        if i < 0.0 || j < 0.0 {
            return None;
        }
        let (i, j) = (i as usize, j as usize);
        if i >= self.nx || j >= self.ny {
            return None;
        }
        Some((i, j))
    }

    fn center(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            self.origin.x + (i as f64 + 0.5) * self.cell,
            self.origin.y + (j as f64 + 0.5) * self.cell,
        )
    }
}

fn point_quad_distance(p: &Point2, q: &[Point2; 4]) -> f64 {
    // inside test via cross products (quad is convex, CCW or CW consistent)
    let mut pos = false;
    let mut neg = false;
    for k in 0..4 {
        let a = q[k];
        let b = q[(k + 1) % 4];
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if cross > 0.0 {
            pos = true;
        }
        if cross < 0.0 {
            neg = true;
        }
    }
    if !(pos && neg) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for k in 0..4 {
        let a = q[k];
        let b = q[(k + 1) % 4];
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let len2 = dx * dx + dy * dy;
        let t = if len2 <= 0.0 {
            0.0
        } else {
            (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
        };
        best = best.min(p.distance(&Point2::new(a.x + t * dx, a.y + t * dy)));
    }
    best
}

/// Grid A* reference planner. Deterministic: ties break on (lower f, lower
/// y index, lower x index).
pub struct GridPlanner {
    pub params: PlannerParams,
    grid: Option<MapGrid>,
}

impl GridPlanner {
    pub fn new(preset: PlannerPreset) -> Self {
        Self {
            params: PlannerParams::preset(preset),
            grid: None,
        }
    }

    pub fn with_params(params: PlannerParams) -> Self {
        Self { params, grid: None }
    }

    fn ensure_grid(&mut self, map: &RoadMap) -> &MapGrid {
        let rebuild = match &self.grid {
            Some(g) => g.map_id != map.id,
            None => true,
        };
        if rebuild {
            self.grid = Some(MapGrid::build(map, self.params.cell_size));
        }
        self.grid.as_ref().unwrap()
    }
}

impl PlannerInterface for GridPlanner {
    fn plan(&mut self, view: &WorldView) -> Result<PlannedPath, PlanError> {
        let params = self.params;
        let grid = self.ensure_grid(view.map);
        let nx = grid.nx;
        let ny = grid.ny;

        // obstacle costs: blocked cells and proximity penalties
        let mut blocked = vec![false; nx * ny];
        let mut penalty = vec![0.0f64; nx * ny];
        let mut quads: Vec<[Point2; 4]> = Vec::new();
        for p in &view.participants {
            quads.push(p.footprint.corners(&p.current.pose()));
            for w in &p.predicted {
                if w.t - view.time <= params.prediction_horizon {
                    quads.push(p.footprint.corners(&w.pose()));
                }
            }
        }
        for quad in &quads {
            let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
            let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
            for c in quad {
                min.x = min.x.min(c.x);
                min.y = min.y.min(c.y);
                max.x = max.x.max(c.x);
                max.y = max.y.max(c.y);
            }
            let reach = params.rho_infl + grid.cell;
            let lo = grid
                .cell_of(&Point2::new(min.x - reach, min.y - reach))
                .unwrap_or((0, 0));
            let hi = grid
                .cell_of(&Point2::new(max.x + reach, max.y + reach))
                .unwrap_or((nx - 1, ny - 1));
            for j in lo.1..=hi.1.min(ny - 1) {
                for i in lo.0..=hi.0.min(nx - 1) {
                    let d = point_quad_distance(&grid.center(i, j), quad);
                    if d <= params.rho_block {
                        blocked[j * nx + i] = true;
                    } else if d <= params.rho_infl {
                        let pen = params.lambda_obs * (params.rho_infl - d) * grid.cell;
                        let slot = &mut penalty[j * nx + i];
                        *slot = slot.max(pen);
                    }
                }
            }
        }

        let start = grid
            .cell_of(&view.ego.position)
            .ok_or(PlanError::NoRoute)?;
        let goal = grid
            .cell_of(&view.destination)
            .ok_or(PlanError::NoRoute)?;
        if !grid.drivable[goal.1 * nx + goal.0] {
            return Err(PlanError::NoRoute);
        }

        // A* with deterministic tie-breaking
        let idx = |i: usize, j: usize| j * nx + i;
        let mut g = vec![f64::INFINITY; nx * ny];
        let mut parent = vec![usize::MAX; nx * ny];
        let mut closed = vec![false; nx * ny];
        let mut open: BinaryHeap<Reverse<(OrderedFloat<f64>, usize, usize)>> = BinaryHeap::new();
        let h = |i: usize, j: usize| grid.center(i, j).distance(&view.destination);
        g[idx(start.0, start.1)] = 0.0;
        open.push(Reverse((
            OrderedFloat(h(start.0, start.1)),
            start.1,
            start.0,
        )));
        let mut found = false;
        while let Some(Reverse((_, j, i))) = open.pop() {
            let cur = idx(i, j);
            if closed[cur] {
                continue;
            }
            closed[cur] = true;
            if (i, j) == goal {
                found = true;
                break;
            }
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni as usize >= nx || nj as usize >= ny {
                        continue;
                    }
                    let (ni, nj) = (ni as usize, nj as usize);
                    let nid = idx(ni, nj);
                    if closed[nid] || !grid.drivable[nid] {
                        continue;
                    }
                    // start cell may sit inside an inflated obstacle; allow
                    // leaving it, never entering blocked cells
                    if blocked[nid] && (ni, nj) != goal {
                        continue;
                    }
                    let step = grid.cell * ((di * di + dj * dj) as f64).sqrt();
                    let mut cost = step + penalty[nid];
                    let (la, lb) = (grid.lane_label[cur] as usize, grid.lane_label[nid] as usize);
                    if la != lb && !grid.lane_link[la * grid.lane_count + lb] {
                        cost += params.lambda_lc;
                    }
                    let ng = g[cur] + cost;
                    if ng < g[nid] - 1e-12 {
                        g[nid] = ng;
                        parent[nid] = cur;
                        open.push(Reverse((OrderedFloat(ng + h(ni, nj)), nj, ni)));
                    }
                }
            }
        }
        if !found {
            return Err(PlanError::NoRoute);
        }

        // backtrack to cell-center waypoints
        let mut cells = Vec::new();
        let mut cur = idx(goal.0, goal.1);
        while cur != usize::MAX {
            cells.push(cur);
            cur = parent[cur];
        }
        cells.reverse();
        let mut points: Vec<Point2> = cells
            .iter()
            .map(|&c| grid.center(c % nx, c / nx))
            .collect();
        points.push(view.destination);
        smooth_in_place(&mut points);

        // target speeds: cruise, capped by path curvature, ramping down
        // toward the destination, with a backward deceleration pass
        let mut remaining = vec![0.0f64; points.len()];
        for k in (0..points.len() - 1).rev() {
            remaining[k] = remaining[k + 1] + points[k].distance(&points[k + 1]);
        }
        let mut speeds: Vec<f64> = (0..points.len())
            .map(|k| {
                params
                    .cruise_speed
                    .min(curvature_speed(&points, k))
                    .min((2.0 * 1.5 * remaining[k]).sqrt().max(1.5))
            })
            .collect();
        for k in (0..speeds.len().saturating_sub(1)).rev() {
            let ds = points[k].distance(&points[k + 1]);
            let reachable = (speeds[k + 1] * speeds[k + 1] + 2.0 * 1.5 * ds).sqrt();
            speeds[k] = speeds[k].min(reachable);
        }
        let pts = points
            .iter()
            .zip(speeds.iter())
            .map(|(p, v)| PathPoint {
                position: *p,
                speed: *v,
            })
            .collect();
        Ok(PlannedPath { points: pts })
    }
}

/// Moving-average smoothing of the interior points: removes the lattice
/// staircase so pure-pursuit tracking stays inside the corridor. Endpoints
/// are pinned.
fn smooth_in_place(points: &mut [Point2]) {
    if points.len() < 5 {
        return;
    }
    let orig = points.to_vec();
    for k in 2..points.len() - 2 {
        let mut x = 0.0;
        let mut y = 0.0;
        for p in &orig[k - 2..=k + 2] {
            x += p.x;
            y += p.y;
        }
        points[k] = Point2::new(x / 5.0, y / 5.0);
    }
}

/// Comfortable speed through the local curvature at point `k`
/// (`v = sqrt(a_lat / kappa)` with a 2 m/s^2 lateral budget).
fn curvature_speed(points: &[Point2], k: usize) -> f64 {
    if k == 0 || k + 1 >= points.len() {
        return f64::INFINITY;
    }
    let (a, b, c) = (points[k - 1], points[k], points[k + 1]);
    let d_in = a.distance(&b);
    let d_out = b.distance(&c);
    if d_in < 1e-9 || d_out < 1e-9 {
        return f64::INFINITY;
    }
    let h_in = (b.y - a.y).atan2(b.x - a.x);
    let h_out = (c.y - b.y).atan2(c.x - b.x);
    let dtheta = crate::geometry::normalize_angle(h_out - h_in).abs();
    let ds = 0.5 * (d_in + d_out);
    if dtheta < 1e-9 {
        return f64::INFINITY;
    }
    let kappa = dtheta / ds;
    (2.0 / kappa).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{ego_footprint, Lane, ParticipantKind, Waypoint};
    use crate::geometry::Footprint;

    fn two_lane_map() -> RoadMap {
        RoadMap {
            id: "m2".into(),
            lanes: vec![
                Lane {
                    id: "l0".into(),
                    centerline: vec![Point2::new(0.0, 0.0), Point2::new(100.0, 0.0)],
                    width_m: 3.5,
                    successors: vec![],
                    left_neighbor: Some("l1".into()),
                    right_neighbor: None,
                },
                Lane {
                    id: "l1".into(),
                    centerline: vec![Point2::new(0.0, 3.5), Point2::new(100.0, 3.5)],
                    width_m: 3.5,
                    successors: vec![],
                    left_neighbor: None,
                    right_neighbor: Some("l0".into()),
                },
            ],
        }
    }

    fn view<'a>(map: &'a RoadMap, participants: Vec<super::super::ParticipantView>) -> WorldView<'a> {
        WorldView {
            time: 0.0,
            ego: Waypoint {
                t: 0.0,
                position: Point2::new(5.0, 0.0),
                heading: 0.0,
                v: 0.0,
                a: 0.0,
            },
            participants,
            map,
            destination: Point2::new(95.0, 0.0),
            goal_radius: 3.0,
        }
    }

    fn cone_view(x: f64, y: f64) -> super::super::ParticipantView {
        super::super::ParticipantView {
            id: format!("c-{x}-{y}"),
            kind: ParticipantKind::StaticObstacle,
            footprint: Footprint::new(0.4, 0.4),
            current: Waypoint {
                t: 0.0,
                position: Point2::new(x, y),
                heading: 0.0,
                v: 0.0,
                a: 0.0,
            },
            predicted: vec![],
        }
    }

    fn lane_changes(map: &RoadMap, path: &PlannedPath) -> usize {
        let labels: Vec<usize> = path
            .points
            .iter()
            .map(|p| map.nearest_lane_index(&p.position))
            .collect();
        labels
            .windows(2)
            .filter(|w| {
                w[0] != w[1]
                    && !map.lanes[w[0]].successors.contains(&map.lanes[w[1]].id)
                    && !map.lanes[w[1]].successors.contains(&map.lanes[w[0]].id)
            })
            .count()
    }

    #[test]
    fn empty_road_follows_centerline() {
        let map = two_lane_map();
        let mut planner = GridPlanner::new(PlannerPreset::Default);
        let path = planner.plan(&view(&map, vec![])).unwrap();
        assert_eq!(lane_changes(&map, &path), 0);
        for pp in &path.points {
            assert!(pp.position.y.abs() < 1.0, "off centerline at {:?}", pp.position);
        }
    }

    #[test]
    fn blocked_lane_forces_single_lane_change() {
        let map = two_lane_map();
        let mut planner = GridPlanner::new(PlannerPreset::Default);
        // wall of cones across lane l0 at x=50
        let cones: Vec<_> = (0..5).map(|k| cone_view(50.0, -1.6 + 0.8 * k as f64)).collect();
        let path = planner.plan(&view(&map, cones)).unwrap();
        assert_eq!(lane_changes(&map, &path), 2); // out and back
        assert!(path.points.iter().any(|p| p.position.y > 2.0));
    }

    #[test]
    fn timid_preset_detours_where_default_passes() {
        let map = two_lane_map();
        // two cones leaving a gap centered on the lane; gap width chosen to
        // exceed ego width + 2 * default rho_block but not the timid one
        let ego_w = ego_footprint().width_m;
        let default_block = 0.5 * ego_w + 0.3;
        let gap = ego_w.max(2.0 * default_block) + 0.9;
        let cones = vec![cone_view(50.0, -gap / 2.0 - 0.2), cone_view(50.0, gap / 2.0 + 0.2)];

        let mut relaxed = GridPlanner::new(PlannerPreset::Default);
        let p1 = relaxed.plan(&view(&map, cones.clone())).unwrap();
        assert_eq!(lane_changes(&map, &p1), 0, "default preset should pass the gap");

        let mut timid = GridPlanner::new(PlannerPreset::Timid);
        let p2 = timid.plan(&view(&map, cones)).unwrap();
        assert!(lane_changes(&map, &p2) >= 2, "timid preset should detour");
    }

    #[test]
    fn fully_blocked_road_is_no_route() {
        let map = two_lane_map();
        let mut planner = GridPlanner::new(PlannerPreset::Default);
        let cones: Vec<_> = (0..12)
            .map(|k| cone_view(50.0, -1.7 + 0.65 * k as f64))
            .collect();
        assert!(matches!(
            planner.plan(&view(&map, cones)),
            Err(PlanError::NoRoute)
        ));
    }

    #[test]
    fn adding_an_obstacle_never_lowers_cost() {
        // monotonicity probe: compare path lengths with and without a cone
        let map = two_lane_map();
        let mut planner = GridPlanner::new(PlannerPreset::Default);
        let free = planner.plan(&view(&map, vec![])).unwrap();
        let with_cone = planner
            .plan(&view(&map, vec![cone_view(50.0, 0.0)]))
            .unwrap();
        let len = |p: &PlannedPath| -> f64 {
            p.points
                .windows(2)
                .map(|w| w[0].position.distance(&w[1].position))
                .sum()
        };
        assert!(len(&with_cone) >= len(&free) - 1e-9);
    }
}
