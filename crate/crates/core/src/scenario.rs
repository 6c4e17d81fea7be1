//! Data model and JSON serialization for maps, scenarios, observations and
//! driving paths.
//!
//! File schemas (`map.json`, `scenario.json`, `observation.json`) carry SI
//! units in their field names; the Rust types keep plain names and convert
//! through serde shadows.

use crate::geometry::{self, Footprint, Point2, Pose};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

/// Extent of the ego vehicle. Fixed for the whole artifact so that scenario
/// validity does not depend on simulator configuration.
pub fn ego_footprint() -> Footprint {
    Footprint::new(4.7, 2.1)
}

/// Lateral margin beyond the lane edge that still counts as "on map"
/// (roadside shoulder where static obstacles may stand).
pub const SHOULDER_M: f64 = 2.5;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

// ---------------------------------------------------------------------------
// serde shadows matching the published file schemas
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PoseDoc {
    x: f64,
    y: f64,
    heading_rad: f64,
}

mod pose_doc {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(pose: &Pose, s: S) -> Result<S::Ok, S::Error> {
        PoseDoc {
            x: pose.position.x,
            y: pose.position.y,
            heading_rad: pose.heading,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Pose, D::Error> {
        let doc = PoseDoc::deserialize(d)?;
        Ok(Pose::new(Point2::new(doc.x, doc.y), doc.heading_rad))
    }
}

#[derive(Serialize, Deserialize)]
struct WaypointDoc {
    t_s: f64,
    x: f64,
    y: f64,
    heading_rad: f64,
    v_mps: f64,
    a_mps2: f64,
}

/// Time-stamped kinematic state of one participant or the ego vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "WaypointDoc", into = "WaypointDoc")]
pub struct Waypoint {
    pub t: f64,
    pub position: Point2,
    pub heading: f64,
    pub v: f64,
    pub a: f64,
}

impl Waypoint {
    pub fn pose(&self) -> Pose {
        Pose::new(self.position, self.heading)
    }
}

impl From<WaypointDoc> for Waypoint {
    fn from(d: WaypointDoc) -> Self {
        Waypoint {
            t: d.t_s,
            position: Point2::new(d.x, d.y),
            heading: geometry::normalize_angle(d.heading_rad),
            v: d.v_mps,
            a: d.a_mps2,
        }
    }
}

impl From<Waypoint> for WaypointDoc {
    fn from(w: Waypoint) -> Self {
        WaypointDoc {
            t_s: w.t,
            x: w.position.x,
            y: w.position.y,
            heading_rad: w.heading,
            v_mps: w.v,
            a_mps2: w.a,
        }
    }
}

// ---------------------------------------------------------------------------
// map
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub id: String,
    pub centerline: Vec<Point2>,
    pub width_m: f64,
    #[serde(default)]
    pub successors: Vec<String>,
    #[serde(default)]
    pub left_neighbor: Option<String>,
    #[serde(default)]
    pub right_neighbor: Option<String>,
}

impl Lane {
    /// Distance from `p` to the lane centerline polyline.
    pub fn distance_to_centerline(&self, p: &Point2) -> f64 {
        self.centerline
            .windows(2)
            .map(|seg| point_segment_distance(p, &seg[0], &seg[1]))
            .fold(f64::INFINITY, f64::min)
    }
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadMap {
    pub id: String,
    pub lanes: Vec<Lane>,
}

impl RoadMap {
    pub fn lane(&self, id: &str) -> Option<&Lane> {
        self.lanes.iter().find(|l| l.id == id)
    }

    /// Index of the lane whose centerline is closest to `p`; ties broken by
    /// lane order in the map.
    pub fn nearest_lane_index(&self, p: &Point2) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, lane) in self.lanes.iter().enumerate() {
            let d = lane.distance_to_centerline(p);
            if d < best_d - 1e-12 {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Whether `p` lies on the drivable surface of some lane.
    pub fn drivable_contains(&self, p: &Point2) -> bool {
        self.lanes
            .iter()
            .any(|l| l.distance_to_centerline(p) <= 0.5 * l.width_m)
    }

    /// Whether `p` lies on a lane or its roadside shoulder.
    pub fn on_map(&self, p: &Point2) -> bool {
        self.lanes
            .iter()
            .any(|l| l.distance_to_centerline(p) <= 0.5 * l.width_m + SHOULDER_M)
    }

    /// Union of all lane corridors as a polygonal region.
    pub fn drivable_region(&self) -> geometry::Region {
        let mut acc = geometry::Region::empty();
        for lane in &self.lanes {
            let poses: Vec<Pose> = lane
                .centerline
                .windows(2)
                .flat_map(|seg| {
                    let h = (seg[1].y - seg[0].y).atan2(seg[1].x - seg[0].x);
                    [Pose::new(seg[0], h), Pose::new(seg[1], h)]
                })
                .collect();
            let corridor =
                geometry::swept_region(&poses, &Footprint::new(1e-3, lane.width_m), 0.0);
            acc = if acc.is_empty() {
                corridor
            } else {
                geometry::Region::from_multipolygon(
                    geo::BooleanOps::union(acc.multipolygon(), corridor.multipolygon()),
                )
            };
        }
        acc
    }

    /// Minimum corner of the bounding box around all lane corridors. Fixed
    /// grid origin for the consistency check.
    pub fn bounding_box_min(&self) -> Point2 {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        for lane in &self.lanes {
            let half = 0.5 * lane.width_m;
            for p in &lane.centerline {
                min.x = min.x.min(p.x - half);
                min.y = min.y.min(p.y - half);
            }
        }
        min
    }
}

// ---------------------------------------------------------------------------
// scenario
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionTask {
    #[serde(with = "pose_doc")]
    pub start: Pose,
    pub destination: Point2,
    #[serde(rename = "goal_radius_m")]
    pub goal_radius: f64,
    #[serde(rename = "time_limit_s")]
    pub time_limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParticipantKind {
    StaticObstacle,
    NpcVehicle,
}

/// Whether a participant belongs to the seed scenario or was introduced by a
/// mutation. Only `Added` participants may be removed by the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParticipantOrigin {
    Seed,
    Added,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub id: String,
    pub kind: ParticipantKind,
    pub footprint: Footprint,
    pub origin: ParticipantOrigin,
    pub trajectory: Vec<Waypoint>,
}

impl Participant {
    pub fn initial(&self) -> &Waypoint {
        &self.trajectory[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub map_id: String,
    pub task: MotionTask,
    pub participants: Vec<Participant>,
}

impl Scenario {
    pub fn participant(&self, id: &str) -> Option<&Participant> {
        self.participants.iter().find(|p| p.id == id)
    }

    pub fn added_participants(&self) -> impl Iterator<Item = &Participant> {
        self.participants
            .iter()
            .filter(|p| p.origin == ParticipantOrigin::Added)
    }
}

// ---------------------------------------------------------------------------
// observation
// ---------------------------------------------------------------------------

/// One simulation frame: the ego state plus every participant's state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    #[serde(rename = "t_s")]
    pub t: f64,
    pub ego: Waypoint,
    pub participants: BTreeMap<String, Waypoint>,
}

/// Time-indexed record of a simulated scenario, sampled at a uniform step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    #[serde(rename = "dt_s")]
    pub dt: f64,
    pub scenes: Vec<Scene>,
}

impl Observation {
    pub fn duration(&self) -> f64 {
        self.scenes.last().map(|s| s.t).unwrap_or(0.0)
    }

    /// Ego poses covering the time window `[t0, t1]`, clamped to the recorded
    /// horizon. Always returns at least one pose.
    pub fn ego_poses_between(&self, t0: f64, t1: f64) -> Vec<Pose> {
        self.poses_between(t0, t1, |s| Some(s.ego))
    }

    /// Poses of participant `id` over `[t0, t1]`; empty when the participant
    /// never appears.
    pub fn participant_poses_between(&self, id: &str, t0: f64, t1: f64) -> Vec<Pose> {
        self.poses_between(t0, t1, |s| s.participants.get(id).copied())
    }

    fn poses_between<F>(&self, t0: f64, t1: f64, get: F) -> Vec<Pose>
    where
        F: Fn(&Scene) -> Option<Waypoint>,
    {
        let mut out = Vec::new();
        for scene in &self.scenes {
            if scene.t >= t0 - 1e-9 && scene.t <= t1 + 1e-9 {
                if let Some(w) = get(scene) {
                    out.push(w.pose());
                }
            }
        }
        if out.is_empty() {
            // window beyond the horizon: clamp to the nearest recorded state
            let scene = if t0 >= self.duration() {
                self.scenes.last()
            } else {
                self.scenes.first()
            };
            if let Some(w) = scene.and_then(|s| get(s)) {
                out.push(w.pose());
            }
        }
        out
    }
}

/// Ordered ego positions extracted from an observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingPath {
    pub points: Vec<Point2>,
}

impl DrivingPath {
    pub fn new(points: Vec<Point2>) -> Self {
        assert!(points.len() >= 2, "a driving path needs at least two points");
        Self { points }
    }
}

/// Positions of the ego entry of each scene, in time order.
pub fn ego_path(obs: &Observation) -> DrivingPath {
    DrivingPath::new(obs.scenes.iter().map(|s| s.ego.position).collect())
}

// ---------------------------------------------------------------------------
// load / save / validate
// ---------------------------------------------------------------------------

pub fn load_map(text: &str) -> Result<RoadMap, ScenarioError> {
    let map: RoadMap =
        serde_json::from_str(text).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    let mut seen = HashSet::new();
    for lane in &map.lanes {
        if !seen.insert(lane.id.clone()) {
            return Err(ScenarioError::Invariant(format!(
                "duplicate lane id {}",
                lane.id
            )));
        }
        if lane.centerline.len() < 2 {
            return Err(ScenarioError::Invariant(format!(
                "lane {} needs >=2 centerline points",
                lane.id
            )));
        }
        if lane.width_m <= 0.0 {
            return Err(ScenarioError::Invariant(format!(
                "lane {} has non-positive width",
                lane.id
            )));
        }
    }
    for lane in &map.lanes {
        for s in lane
            .successors
            .iter()
            .chain(lane.left_neighbor.iter())
            .chain(lane.right_neighbor.iter())
        {
            if map.lane(s).is_none() {
                return Err(ScenarioError::Invariant(format!(
                    "lane {} references unknown lane {}",
                    lane.id, s
                )));
            }
        }
    }
    Ok(map)
}

pub fn save_map(map: &RoadMap) -> String {
    let mut s = serde_json::to_string_pretty(map).expect("map serialization");
    s.push('\n');
    s
}

pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario =
        serde_json::from_str(text).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    check_scenario_invariants(&scenario).map_err(ScenarioError::Invariant)?;
    Ok(scenario)
}

pub fn save_scenario(scenario: &Scenario) -> String {
    let mut s = serde_json::to_string_pretty(scenario).expect("scenario serialization");
    s.push('\n');
    s
}

fn check_scenario_invariants(s: &Scenario) -> Result<(), String> {
    if s.task.goal_radius <= 0.0 {
        return Err("goal_radius_m must be positive".into());
    }
    if s.task.time_limit <= 0.0 {
        return Err("time_limit_s must be positive".into());
    }
    let mut ids = HashSet::new();
    for p in &s.participants {
        if !ids.insert(p.id.clone()) {
            return Err(format!("duplicate participant id {}", p.id));
        }
        if p.trajectory.is_empty() {
            return Err(format!("participant {} has an empty trajectory", p.id));
        }
        match p.kind {
            ParticipantKind::StaticObstacle => {
                if p.trajectory.len() != 1 {
                    return Err(format!(
                        "static obstacle {} must have exactly one waypoint",
                        p.id
                    ));
                }
                let w = &p.trajectory[0];
                if w.v != 0.0 || w.a != 0.0 {
                    return Err(format!("static obstacle {} must have v=0, a=0", p.id));
                }
            }
            ParticipantKind::NpcVehicle => {
                if p.trajectory.len() >= 2 {
                    let step = p.trajectory[1].t - p.trajectory[0].t;
                    for pair in p.trajectory.windows(2) {
                        let dt = pair[1].t - pair[0].t;
                        if dt <= 0.0 {
                            return Err(format!(
                                "participant {} timestamps must strictly increase",
                                p.id
                            ));
                        }
                        if (dt - step).abs() > 1e-6 {
                            return Err(format!(
                                "participant {} trajectory step is not uniform",
                                p.id
                            ));
                        }
                    }
                }
            }
        }
        for w in &p.trajectory {
            if w.v < 0.0 {
                return Err(format!("participant {} has negative speed", p.id));
            }
        }
    }
    // pairwise non-overlap at t=0, including the ego start pose
    let ego = ego_footprint().corners(&s.task.start);
    for (i, a) in s.participants.iter().enumerate() {
        let ra = a.footprint.corners(&a.initial().pose());
        if geometry::rects_overlap(&ego, &ra) {
            return Err(format!("participant {} overlaps the ego start pose", a.id));
        }
        for b in &s.participants[i + 1..] {
            let rb = b.footprint.corners(&b.initial().pose());
            if geometry::rects_overlap(&ra, &rb) {
                return Err(format!("participants {} and {} overlap at t=0", a.id, b.id));
            }
        }
    }
    Ok(())
}

/// A single validation finding; `participant` names the offender when one
/// exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub participant: Option<String>,
    pub message: String,
}

/// Check every scenario invariant plus on-map containment of all initial
/// positions against `map`. Returns an empty list for a valid scenario.
pub fn validate_scenario(s: &Scenario, map: &RoadMap) -> Vec<Violation> {
    let mut out = Vec::new();
    if let Err(msg) = check_scenario_invariants(s) {
        // attribute to a participant when the message names one
        let participant = s
            .participants
            .iter()
            .find(|p| msg.contains(&format!(" {}", p.id)) || msg.contains(&format!("{} ", p.id)))
            .map(|p| p.id.clone());
        out.push(Violation {
            participant,
            message: msg,
        });
    }
    if s.map_id != map.id {
        out.push(Violation {
            participant: None,
            message: format!("scenario references map {} but got {}", s.map_id, map.id),
        });
    }
    if !map.drivable_contains(&s.task.start.position) {
        out.push(Violation {
            participant: None,
            message: "ego start position is off the drivable area".into(),
        });
    }
    if !map.drivable_contains(&s.task.destination) {
        out.push(Violation {
            participant: None,
            message: "destination is off the drivable area".into(),
        });
    }
    for p in &s.participants {
        let pos = p.initial().position;
        let ok = match p.kind {
            // static obstacles may stand on the roadside shoulder
            ParticipantKind::StaticObstacle => map.on_map(&pos),
            ParticipantKind::NpcVehicle => map.on_map(&pos),
        };
        if !ok {
            out.push(Violation {
                participant: Some(p.id.clone()),
                message: format!("participant {} starts off the map", p.id),
            });
        }
    }
    out
}
