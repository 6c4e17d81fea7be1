//! Deterministic closed-loop scenario execution: the ego vehicle tracks the
//! plan of a pluggable planner with pure pursuit, NPCs replay authored
//! trajectories, collisions and task outcome are detected every step.

mod bicycle;
mod planner;

pub use bicycle::step_ego;
pub use planner::{GridPlanner, PlannerParams, PlannerPreset};

use crate::geometry::{self, Footprint, Point2};
use crate::scenario::{
    ego_footprint, DrivingPath, Observation, Participant, ParticipantKind, RoadMap, Scenario,
    Scene, Waypoint,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulator configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("no route to the destination on the lattice")]
    NoRoute,
}

/// A planned path point with its target speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub position: Point2,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPath {
    pub points: Vec<PathPoint>,
}

/// Everything a planner sees at a replanning instant: perfect perception of
/// the current scene plus ground-truth predicted participant motion.
pub struct WorldView<'a> {
    pub time: f64,
    pub ego: Waypoint,
    pub participants: Vec<ParticipantView>,
    pub map: &'a RoadMap,
    pub destination: Point2,
    pub goal_radius: f64,
}

#[derive(Debug, Clone)]
pub struct ParticipantView {
    pub id: String,
    pub kind: ParticipantKind,
    pub footprint: Footprint,
    pub current: Waypoint,
    pub predicted: Vec<Waypoint>,
}

/// The ADS under test, reduced to its planning decision.
pub trait PlannerInterface {
    fn plan(&mut self, view: &WorldView) -> Result<PlannedPath, PlanError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskStatus {
    Completed,
    Collision,
    Timeout,
    Stuck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub status: TaskStatus,
    pub elapsed: f64,
    pub collision_pair: Option<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoParams {
    pub wheelbase: f64,
    pub accel_max: f64,
    pub brake_max: f64,
    pub speed_max: f64,
    pub steer_max: f64,
}

impl Default for EgoParams {
    fn default() -> Self {
        Self {
            wheelbase: 2.8,
            accel_max: 3.0,
            brake_max: 5.0,
            speed_max: 10.0,
            steer_max: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub sim_dt: f64,
    pub max_steps: usize,
    pub replan_period: f64,
    #[serde(default)]
    pub ego: EgoParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            sim_dt: 0.1,
            max_steps: 2000,
            replan_period: 0.5,
            ego: EgoParams::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.sim_dt <= 0.0 {
            return Err(SimError::Config("sim_dt must be positive".into()));
        }
        if self.replan_period < self.sim_dt {
            return Err(SimError::Config("replan_period must be >= sim_dt".into()));
        }
        if self.max_steps == 0 {
            return Err(SimError::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// State of participant `p` at time `t`: linear interpolation between
/// authored waypoints, clamped at the trajectory ends.
pub fn replay_npc(p: &Participant, t: f64) -> Waypoint {
    let traj = &p.trajectory;
    if t <= traj[0].t {
        return Waypoint { t, ..traj[0] };
    }
    if t >= traj[traj.len() - 1].t {
        return Waypoint {
            t,
            ..traj[traj.len() - 1]
        };
    }
    let hi = traj.partition_point(|w| w.t <= t).min(traj.len() - 1);
    let (a, b) = (&traj[hi - 1], &traj[hi]);
    let u = (t - a.t) / (b.t - a.t);
    let lerp = |x: f64, y: f64| x + u * (y - x);
    // shortest-arc heading interpolation
    let dh = geometry::normalize_angle(b.heading - a.heading);
    Waypoint {
        t,
        position: Point2::new(lerp(a.position.x, b.position.x), lerp(a.position.y, b.position.y)),
        heading: geometry::normalize_angle(a.heading + u * dh),
        v: lerp(a.v, b.v),
        a: lerp(a.a, b.a),
    }
}

/// First colliding pair in the scene, if any: ego against every participant,
/// then pairs involving at least one moving participant.
pub fn collision_check(
    ego: &Waypoint,
    participants: &[(String, ParticipantKind, Footprint, Waypoint)],
) -> Option<(String, String)> {
    let ego_rect = ego_footprint().corners(&ego.pose());
    for (id, _, fp, w) in participants {
        if geometry::rects_overlap(&ego_rect, &fp.corners(&w.pose())) {
            return Some(("ego".to_string(), id.clone()));
        }
    }
    for i in 0..participants.len() {
        for j in i + 1..participants.len() {
            let (ida, ka, fa, wa) = &participants[i];
            let (idb, kb, fb, wb) = &participants[j];
            if *ka == ParticipantKind::StaticObstacle && *kb == ParticipantKind::StaticObstacle {
                continue;
            }
            if geometry::rects_overlap(&fa.corners(&wa.pose()), &fb.corners(&wb.pose())) {
                return Some((ida.clone(), idb.clone()));
            }
        }
    }
    None
}

fn bearing(a: &Point2, b: &Point2) -> f64 {
    (b.y - a.y).atan2(b.x - a.x)
}

/// Pure-pursuit steering plus proportional speed control toward `path`.
fn track_path(ego: &Waypoint, path: &PlannedPath, params: &EgoParams) -> (f64, f64) {
    let pts = &path.points;
    let nearest = pts
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            ego.position
                .distance(&a.position)
                .total_cmp(&ego.position.distance(&b.position))
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lookahead = (1.0 + 0.8 * ego.v).clamp(3.0, 8.0);
    let mut target = pts[pts.len() - 1].position;
    let mut acc = 0.0;
    for k in nearest..pts.len() - 1 {
        acc += pts[k].position.distance(&pts[k + 1].position);
        if acc >= lookahead {
            target = pts[k + 1].position;
            break;
        }
    }
    let alpha = geometry::normalize_angle(bearing(&ego.position, &target) - ego.heading);
    let ld = ego.position.distance(&target).max(1e-6);
    let steer = (2.0 * params.wheelbase * alpha.sin() / ld)
        .atan()
        .clamp(-params.steer_max, params.steer_max);
    let v_target = pts[nearest].speed.min(params.speed_max);
    let accel = (1.5 * (v_target - ego.v)).clamp(-params.brake_max, params.accel_max);
    (accel, steer)
}

fn participant_states(
    scenario: &Scenario,
    t: f64,
) -> Vec<(String, ParticipantKind, Footprint, Waypoint)> {
    scenario
        .participants
        .iter()
        .map(|p| (p.id.clone(), p.kind, p.footprint, replay_npc(p, t)))
        .collect()
}

fn scene_from(t: f64, ego: Waypoint, states: &[(String, ParticipantKind, Footprint, Waypoint)]) -> Scene {
    Scene {
        t,
        ego,
        participants: states
            .iter()
            .map(|(id, _, _, w)| (id.clone(), *w))
            .collect::<BTreeMap<_, _>>(),
    }
}

/// Closed-loop execution of `scenario` with `planner` in charge of the ego.
/// Fully deterministic: identical inputs produce bit-identical observations;
/// `_rng_seed` is part of the signature for planners that want stochastic
/// behavior, the embedded pipeline ignores it.
pub fn simulate(
    scenario: &Scenario,
    map: &RoadMap,
    planner: &mut dyn PlannerInterface,
    cfg: &SimConfig,
    _rng_seed: u64,
) -> Result<(Observation, TaskOutcome), SimError> {
    cfg.validate()?;
    let dt = cfg.sim_dt;
    let replan_steps = (cfg.replan_period / dt).round().max(1.0) as usize;
    let stuck_window = (10.0 / dt).round() as usize;

    let mut ego = Waypoint {
        t: 0.0,
        position: scenario.task.start.position,
        heading: scenario.task.start.heading,
        v: 0.0,
        a: 0.0,
    };
    let mut scenes: Vec<Scene> = Vec::new();
    let mut current_path: Option<PlannedPath> = None;
    let mut history: Vec<Point2> = Vec::new();

    let finish = |scenes: &mut Vec<Scene>, status, elapsed, pair: Option<(String, String)>| {
        if scenes.len() < 2 {
            if let Some(last) = scenes.last().cloned() {
                scenes.push(last);
            }
        }
        TaskOutcome {
            status,
            elapsed,
            collision_pair: pair,
        }
    };

    for step in 0..=cfg.max_steps {
        let t = step as f64 * dt;
        let states = participant_states(scenario, t);
        scenes.push(scene_from(t, ego, &states));
        history.push(ego.position);

        if let Some(pair) = collision_check(&ego, &states) {
            let outcome = finish(&mut scenes, TaskStatus::Collision, t, Some(pair));
            return Ok((Observation { dt, scenes }, outcome));
        }
        if ego.position.distance(&scenario.task.destination) <= scenario.task.goal_radius {
            let outcome = finish(&mut scenes, TaskStatus::Completed, t, None);
            return Ok((Observation { dt, scenes }, outcome));
        }
        if t > scenario.task.time_limit || step == cfg.max_steps {
            let outcome = finish(&mut scenes, TaskStatus::Timeout, t, None);
            return Ok((Observation { dt, scenes }, outcome));
        }
        if history.len() > stuck_window {
            let past = history[history.len() - 1 - stuck_window];
            if ego.position.distance(&past) < 0.2 {
                let outcome = finish(&mut scenes, TaskStatus::Stuck, t, None);
                return Ok((Observation { dt, scenes }, outcome));
            }
        }

        if step % replan_steps == 0 {
            let view = WorldView {
                time: t,
                ego,
                participants: scenario
                    .participants
                    .iter()
                    .map(|p| ParticipantView {
                        id: p.id.clone(),
                        kind: p.kind,
                        footprint: p.footprint,
                        current: replay_npc(p, t),
                        predicted: p
                            .trajectory
                            .iter()
                            .filter(|w| w.t > t)
                            .copied()
                            .collect(),
                    })
                    .collect(),
                map,
                destination: scenario.task.destination,
                goal_radius: scenario.task.goal_radius,
            };
            current_path = planner.plan(&view).ok();
        }

        let (accel, steer) = match &current_path {
            Some(path) => track_path(&ego, path, &cfg.ego),
            // no route: brake to a stop and let the stuck detector fire
            None => ((-cfg.ego.brake_max).max(-ego.v / dt), 0.0),
        };
        ego = step_ego(&ego, accel, steer, cfg.ego.wheelbase, dt);
    }
    unreachable!("loop terminates via timeout at max_steps");
}

/// Open-loop replay of the seed's recorded ego path through a mutated
/// scenario: true when the path reaches the destination without ever coming
/// closer than `MIN_CLEARANCE_M` to any participant.
pub const MIN_CLEARANCE_M: f64 = 0.5;

pub fn replay_validation(
    mutated: &Scenario,
    original_path: &DrivingPath,
    _map: &RoadMap,
    cfg: &SimConfig,
) -> bool {
    let pts = &original_path.points;
    let fp = ego_footprint();
    for (i, pos) in pts.iter().enumerate() {
        let t = i as f64 * cfg.sim_dt;
        let heading = if i + 1 < pts.len() {
            if pts[i + 1].distance(pos) > 1e-6 {
                bearing(pos, &pts[i + 1])
            } else if i > 0 {
                bearing(&pts[i - 1], pos)
            } else {
                0.0
            }
        } else if i > 0 {
            bearing(&pts[i - 1], pos)
        } else {
            0.0
        };
        let ego_rect = fp.corners(&geometry::Pose::new(*pos, heading));
        for p in &mutated.participants {
            let w = replay_npc(p, t);
            let rect = p.footprint.corners(&w.pose());
            if geometry::rect_clearance(&ego_rect, &rect) < MIN_CLEARANCE_M {
                return false;
            }
        }
    }
    pts.last()
        .map(|p| p.distance(&mutated.task.destination) <= mutated.task.goal_radius)
        .unwrap_or(false)
}
