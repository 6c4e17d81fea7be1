//! Non-invasive mutation operators plus the unconstrained random mutation
//! used by baselines.
//!
//! A mutation is non-invasive when every waypoint of an added participant is
//! sampled from the feasible area of its time window: the kinematic sector
//! reachable from the previous waypoint, minus the swept regions of the
//! ego's original optimal path and of every unchanged participant. Sweeps
//! are inflated by the new participant's circumradius (plus the ego
//! clearance margin), so a feasible center point implies footprint
//! disjointness, and each accepted step is re-checked exactly against the
//! uninflated sweeps.

use crate::geometry::{
    self, sample_point, sector_from_state, swept_region, Footprint, Point2, Pose, Region,
};
use crate::scenario::{
    Observation, Participant, ParticipantKind, ParticipantOrigin, RoadMap, Scenario,
};
use crate::sim::{replay_npc, MIN_CLEARANCE_M};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Pose spacing used when discretizing a trajectory into swept rectangles.
const SWEEP_STRIDE_S: f64 = 0.5;
/// Extra inflation margin absorbing discretization error of the sweeps.
const SWEEP_MARGIN_M: f64 = 0.1;
/// Sampling retries per window before the mutation aborts.
const SAMPLE_RETRIES: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MutationError {
    #[error("the add operator is saturated (max_added reached)")]
    Saturated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationOp {
    Add,
    Remove,
    Change,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationConfig {
    pub delta_t: f64,
    pub max_added: usize,
    pub npc_speed_max: f64,
    pub npc_steer_max: f64,
    /// Probability that an added participant is a static obstacle.
    pub static_fraction: f64,
    /// Probabilities of (Add, Remove, Change); must sum to 1.
    pub op_weights: [f64; 3],
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self {
            delta_t: 2.0,
            max_added: 6,
            npc_speed_max: 8.0,
            npc_steer_max: 0.5,
            static_fraction: 0.8,
            op_weights: [0.5, 0.25, 0.25],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutationOutcome {
    pub scenario: Scenario,
    pub op_used: MutationOp,
    pub aborted: bool,
}

impl MutationOutcome {
    fn aborted(current: &Scenario, op: MutationOp) -> Self {
        Self {
            scenario: current.clone(),
            op_used: op,
            aborted: true,
        }
    }
}

/// Footprints for added participants.
pub fn added_static_footprint() -> Footprint {
    Footprint::new(0.4, 0.4)
}

pub fn added_npc_footprint() -> Footprint {
    Footprint::new(4.6, 2.0)
}

/// Ego swept regions per mutation window, precomputed from the seed
/// observation: the ego path is fixed for a whole campaign, so these are
/// by far the hottest geometry inputs.
#[derive(Debug, Clone)]
struct EgoSweepCache {
    delta_t: f64,
    /// Uninflated sweeps (exact disjointness checks).
    raw: Vec<Region>,
    /// Inflated for the added-NPC footprint.
    npc: Vec<Region>,
    /// Inflated for the added-static footprint; `stat_full` is their union
    /// over the whole horizon (a static obstacle occupies its spot forever).
    stat: Vec<Region>,
    stat_full: Region,
}

impl EgoSweepCache {
    fn build(seed_obs: &Observation, delta_t: f64) -> Self {
        let horizon = seed_obs.duration().max(delta_t);
        let windows = (horizon / delta_t).ceil() as usize;
        let ego_fp = crate::scenario::ego_footprint();
        let infl_npc = added_npc_footprint().half_diagonal() + SWEEP_MARGIN_M + MIN_CLEARANCE_M;
        let infl_stat =
            added_static_footprint().half_diagonal() + SWEEP_MARGIN_M + MIN_CLEARANCE_M;
        let mut raw = Vec::with_capacity(windows);
        let mut npc = Vec::with_capacity(windows);
        let mut stat = Vec::with_capacity(windows);
        let mut stat_full = Region::empty();
        for k in 0..windows {
            let t0 = k as f64 * delta_t;
            let t1 = (t0 + delta_t).min(horizon);
            let poses = ego_window_poses(seed_obs, t0, t1);
            raw.push(swept_region(&poses, &ego_fp, 0.0));
            npc.push(swept_region(&poses, &ego_fp, infl_npc));
            let s = swept_region(&poses, &ego_fp, infl_stat);
            stat_full = if stat_full.is_empty() {
                s.clone()
            } else {
                Region::from_multipolygon(geo::BooleanOps::union(
                    stat_full.multipolygon(),
                    s.multipolygon(),
                ))
            };
            stat.push(s);
        }
        Self {
            delta_t,
            raw,
            npc,
            stat,
            stat_full,
        }
    }

    /// Window index for a query starting at `t0`; queries beyond the seed
    /// horizon clamp to the last window (the ego is parked there, and the
    /// final pose is part of that sweep), which is conservative.
    fn window(&self, t0: f64) -> usize {
        ((t0 / self.delta_t).round() as usize).min(self.raw.len() - 1)
    }
}

/// Per-map regions and per-campaign caches used by the mutation operators.
#[derive(Debug, Clone)]
pub struct MutationContext {
    /// Union of the lane corridors: where NPC vehicles may be placed.
    pub drivable: Region,
    /// Lane corridors widened by the roadside shoulder: where static
    /// obstacles may be placed.
    pub placeable: Region,
    ego: Option<EgoSweepCache>,
}

impl MutationContext {
    /// Context with the per-window ego sweeps precomputed for `seed_obs`.
    pub fn with_seed(map: &RoadMap, seed_obs: &Observation, cfg: &MutationConfig) -> Self {
        let mut ctx = Self::new(map);
        ctx.ego = Some(EgoSweepCache::build(seed_obs, cfg.delta_t));
        ctx
    }

    /// Ego sweep for `[t0, t1]` at `inflation`, from the cache when the
    /// query matches the window grid, recomputed otherwise.
    fn ego_sweep(&self, seed_obs: &Observation, t0: f64, t1: f64, inflation: f64) -> Region {
        if let Some(cache) = &self.ego {
            if (t1 - t0 - cache.delta_t).abs() < 1e-9 || t1 >= seed_obs.duration() {
                let k = cache.window(t0);
                let infl_npc =
                    added_npc_footprint().half_diagonal() + SWEEP_MARGIN_M + MIN_CLEARANCE_M;
                let infl_stat =
                    added_static_footprint().half_diagonal() + SWEEP_MARGIN_M + MIN_CLEARANCE_M;
                if inflation == 0.0 {
                    return cache.raw[k].clone();
                } else if (inflation - infl_npc).abs() < 1e-9 {
                    return cache.npc[k].clone();
                } else if (inflation - infl_stat).abs() < 1e-9 {
                    return cache.stat[k].clone();
                }
            }
        }
        swept_region(
            &ego_window_poses(seed_obs, t0, t1),
            &crate::scenario::ego_footprint(),
            inflation,
        )
    }

    /// Full-horizon ego obstruction for static placement.
    fn ego_sweep_full(&self, seed_obs: &Observation, horizon: f64, inflation: f64) -> Region {
        if let Some(cache) = &self.ego {
            let infl_stat =
                added_static_footprint().half_diagonal() + SWEEP_MARGIN_M + MIN_CLEARANCE_M;
            if (inflation - infl_stat).abs() < 1e-9 {
                return cache.stat_full.clone();
            }
        }
        swept_region(
            &ego_window_poses(seed_obs, 0.0, horizon),
            &crate::scenario::ego_footprint(),
            inflation,
        )
    }

    pub fn new(map: &RoadMap) -> Self {
        let drivable = map.drivable_region();
        let mut acc = Region::empty();
        for lane in map.lanes.iter() {
            let poses: Vec<Pose> = lane
                .centerline
                .windows(2)
                .flat_map(|seg| {
                    let h = (seg[1].y - seg[0].y).atan2(seg[1].x - seg[0].x);
                    [Pose::new(seg[0], h), Pose::new(seg[1], h)]
                })
                .collect();
            // keep a margin inside the shoulder so sampled points stay on-map
            let width = lane.width_m + 2.0 * (crate::scenario::SHOULDER_M - 0.3);
            let corridor = swept_region(&poses, &Footprint::new(1e-3, width), 0.0);
            acc = if acc.is_empty() {
                corridor
            } else {
                Region::from_multipolygon(geo::BooleanOps::union(
                    acc.multipolygon(),
                    corridor.multipolygon(),
                ))
            };
        }
        Self {
            drivable,
            placeable: acc,
            ego: None,
        }
    }
}

fn regions_overlap(a: &Region, b: &Region) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    geometry::region_intersection(&[a.clone(), b.clone()]).area() > 1e-9
}

/// Poses of a trajectory window at the sweep stride, taken from the
/// observation when the participant appears there, otherwise replayed from
/// the authored trajectory.
fn window_poses(
    obs: &Observation,
    participant: Option<&Participant>,
    id: &str,
    t0: f64,
    t1: f64,
) -> Vec<Pose> {
    let mut poses = Vec::new();
    let mut t = t0;
    while t <= t1 + 1e-9 {
        let from_obs = obs
            .scenes
            .iter()
            .find(|s| (s.t - t).abs() < 1e-6)
            .and_then(|s| s.participants.get(id))
            .map(|w| w.pose());
        let pose = from_obs.or_else(|| participant.map(|p| replay_npc(p, t).pose()));
        if let Some(p) = pose {
            poses.push(p);
        }
        t += SWEEP_STRIDE_S;
    }
    if poses.is_empty() {
        if let Some(p) = participant {
            poses.push(replay_npc(p, t0.min(t1)).pose());
        }
    }
    poses
}

fn ego_window_poses(seed_obs: &Observation, t0: f64, t1: f64) -> Vec<Pose> {
    let all = seed_obs.ego_poses_between(t0, t1);
    if all.len() <= 2 {
        return all;
    }
    let stride = ((SWEEP_STRIDE_S / seed_obs.dt).round() as usize).max(1);
    let mut out: Vec<Pose> = all.iter().copied().step_by(stride).collect();
    if (all.len() - 1) % stride != 0 {
        out.push(*all.last().unwrap());
    }
    out
}

fn is_effectively_static(poses: &[Pose]) -> bool {
    poses
        .windows(2)
        .all(|w| w[0].position.distance(&w[1].position) < 1e-6)
}

/// Swept regions (inflated by `inflation`) of every current participant's
/// segment during `[t0, t1]` — the non-ego part of what an added
/// participant must avoid.
fn participant_sweeps(
    current: &Scenario,
    current_obs: &Observation,
    exclude: Option<&str>,
    t0: f64,
    t1: f64,
    inflation: f64,
) -> Vec<Region> {
    let mut others = Vec::new();
    for p in &current.participants {
        if Some(p.id.as_str()) == exclude {
            continue;
        }
        let poses = window_poses(current_obs, Some(p), &p.id, t0, t1);
        if poses.is_empty() {
            continue;
        }
        let poses = if is_effectively_static(&poses) {
            vec![poses[0]]
        } else {
            poses
        };
        others.push(swept_region(&poses, &p.footprint, inflation));
    }
    others
}

/// The non-invasive feasible area for one window: the kinematic sector from
/// `y_t`, restricted to the drivable area, minus every obstruction sweep.
#[allow(clippy::too_many_arguments)]
pub fn non_invasive_area(
    y_t: &Pose,
    seed_obs: &Observation,
    current: &Scenario,
    current_obs: &Observation,
    exclude: Option<&str>,
    ctx: &MutationContext,
    t: f64,
    new_footprint: &Footprint,
    cfg: &MutationConfig,
    steer_limit: f64,
) -> Region {
    let sector = sector_from_state(y_t, cfg.npc_speed_max, steer_limit, cfg.delta_t);
    let mut area = geometry::region_intersection(&[sector, ctx.drivable.clone()]);
    if area.is_empty() {
        return area;
    }
    let inflation = new_footprint.half_diagonal() + SWEEP_MARGIN_M;
    let ego_sweep = ctx.ego_sweep(seed_obs, t, t + cfg.delta_t, inflation + MIN_CLEARANCE_M);
    let others = participant_sweeps(current, current_obs, exclude, t, t + cfg.delta_t, inflation);
    area = geometry::region_difference(&area, &ego_sweep);
    for o in &others {
        if area.is_empty() {
            break;
        }
        area = geometry::region_difference(&area, o);
    }
    area
}

fn next_added_id(current: &Scenario) -> String {
    let mut n = 0usize;
    for p in &current.participants {
        if let Some(num) = p.id.strip_prefix("added-").and_then(|s| s.parse::<usize>().ok()) {
            n = n.max(num + 1);
        }
    }
    format!("added-{n}")
}

/// Exact per-window disjointness: the sweep of the new segment must not
/// intersect the uninflated ego sweep or any participant sweep.
#[allow(clippy::too_many_arguments)]
fn segment_is_disjoint(
    from: &Pose,
    to: &Pose,
    footprint: &Footprint,
    seed_obs: &Observation,
    current: &Scenario,
    current_obs: &Observation,
    exclude: Option<&str>,
    ctx: &MutationContext,
    t0: f64,
    t1: f64,
) -> bool {
    // interpolate exactly like trajectory replay does (linear position,
    // shortest-arc heading) so the checked sweep covers the replayed motion
    let steps = (((t1 - t0) / SWEEP_STRIDE_S).ceil() as usize).max(1);
    let dh = crate::geometry::normalize_angle(to.heading - from.heading);
    let poses: Vec<Pose> = (0..=steps)
        .map(|k| {
            let a = k as f64 / steps as f64;
            Pose::new(
                Point2::new(
                    from.position.x + a * (to.position.x - from.position.x),
                    from.position.y + a * (to.position.y - from.position.y),
                ),
                crate::geometry::normalize_angle(from.heading + a * dh),
            )
        })
        .collect();
    let segment_sweep = swept_region(&poses, footprint, 0.0);
    let ego_sweep = ctx.ego_sweep(seed_obs, t0, t1, 0.0);
    if regions_overlap(&segment_sweep, &ego_sweep) {
        return false;
    }
    let others = participant_sweeps(current, current_obs, exclude, t0, t1, 0.0);
    !others.iter().any(|o| regions_overlap(&segment_sweep, o))
}

fn make_static(id: String, at: Point2) -> Participant {
    Participant {
        id,
        kind: ParticipantKind::StaticObstacle,
        footprint: added_static_footprint(),
        origin: ParticipantOrigin::Added,
        trajectory: vec![crate::scenario::Waypoint {
            t: 0.0,
            position: at,
            heading: 0.0,
            v: 0.0,
            a: 0.0,
        }],
    }
}

/// Authored trajectory from sampled positions. `step_headings[k]` is the
/// heading of the segment `k -> k+1` as accepted by the disjointness check;
/// waypoint `i` carries the heading of its incoming segment (the first
/// waypoint that of the outgoing one), so linear replay interpolation
/// reproduces exactly the poses the check swept.
fn npc_from_positions(
    id: String,
    positions: &[Point2],
    step_headings: &[f64],
    delta_t: f64,
) -> Participant {
    let n = positions.len();
    debug_assert_eq!(step_headings.len() + 1, n);
    let mut speeds = Vec::with_capacity(n);
    let mut headings = Vec::with_capacity(n);
    for i in 0..n {
        headings.push(if i == 0 {
            step_headings.first().copied().unwrap_or(0.0)
        } else {
            step_headings[i - 1]
        });
        if i + 1 < n {
            speeds.push(positions[i].distance(&positions[i + 1]) / delta_t);
        } else {
            speeds.push(speeds.last().copied().unwrap_or(0.0));
        }
    }
    let trajectory = (0..n)
        .map(|i| crate::scenario::Waypoint {
            t: i as f64 * delta_t,
            position: positions[i],
            heading: headings[i],
            v: speeds[i],
            a: if i + 1 < n {
                (speeds[i + 1] - speeds[i]) / delta_t
            } else {
                0.0
            },
        })
        .collect();
    Participant {
        id,
        kind: ParticipantKind::NpcVehicle,
        footprint: added_npc_footprint(),
        origin: ParticipantOrigin::Added,
        trajectory,
    }
}

/// Adding operator: introduce one participant whose every window stays
/// inside the non-invasive feasible area. Aborts (scenario unchanged) when
/// a window's feasible area is empty.
pub fn mutate_add<R: Rng + ?Sized>(
    seed_obs: &Observation,
    current: &Scenario,
    current_obs: &Observation,
    ctx: &MutationContext,
    cfg: &MutationConfig,
    rng: &mut R,
) -> Result<MutationOutcome, MutationError> {
    mutate_add_excluding(seed_obs, current, current_obs, None, None, ctx, cfg, rng)
}

#[allow(clippy::too_many_arguments)]
fn mutate_add_excluding<R: Rng + ?Sized>(
    seed_obs: &Observation,
    current: &Scenario,
    current_obs: &Observation,
    exclude: Option<&str>,
    forced_id: Option<String>,
    ctx: &MutationContext,
    cfg: &MutationConfig,
    rng: &mut R,
) -> Result<MutationOutcome, MutationError> {
    let added = current
        .added_participants()
        .filter(|p| Some(p.id.as_str()) != exclude)
        .count();
    if added >= cfg.max_added {
        return Err(MutationError::Saturated);
    }
    let id = forced_id.unwrap_or_else(|| next_added_id(current));
    let horizon = current_obs.duration().max(cfg.delta_t);
    let is_static = rng.random::<f64>() < cfg.static_fraction;

    if is_static {
        let fp = added_static_footprint();
        let inflation = fp.half_diagonal() + SWEEP_MARGIN_M;
        // a static obstacle occupies its spot for the whole horizon: its
        // feasible area is the placeable region minus every window's sweeps
        let ego_sweep = ctx.ego_sweep_full(seed_obs, horizon, inflation + MIN_CLEARANCE_M);
        let others = participant_sweeps(
            current,
            current_obs,
            exclude,
            0.0,
            horizon,
            inflation,
        );
        let mut area = geometry::region_difference(&ctx.placeable, &ego_sweep);
        for o in &others {
            if area.is_empty() {
                break;
            }
            area = geometry::region_difference(&area, o);
        }
        match sample_point(&area, rng) {
            Err(_) => Ok(MutationOutcome::aborted(current, MutationOp::Add)),
            Ok(at) => {
                let mut scenario = current.clone();
                scenario.participants.push(make_static(id, at));
                Ok(MutationOutcome {
                    scenario,
                    op_used: MutationOp::Add,
                    aborted: false,
                })
            }
        }
    } else {
        let fp = added_npc_footprint();
        // cap the waypoint count so tiny windows don't explode the
        // trajectory length; beyond the cap the vehicle parks
        let steps = ((horizon / cfg.delta_t).floor() as usize).clamp(1, 60);
        let mut positions: Vec<Point2> = Vec::with_capacity(steps + 1);
        // initial waypoint: anywhere on the drivable area clear of the first
        // window's sweeps
        let inflation = fp.half_diagonal() + SWEEP_MARGIN_M;
        let ego0 = ctx.ego_sweep(seed_obs, 0.0, cfg.delta_t, inflation + MIN_CLEARANCE_M);
        let others0 =
            participant_sweeps(current, current_obs, exclude, 0.0, cfg.delta_t, inflation);
        let mut area0 = geometry::region_difference(&ctx.drivable, &ego0);
        for o in &others0 {
            if area0.is_empty() {
                break;
            }
            area0 = geometry::region_difference(&area0, o);
        }
        let y0 = match sample_point(&area0, rng) {
            Err(_) => return Ok(MutationOutcome::aborted(current, MutationOp::Add)),
            Ok(p) => p,
        };
        positions.push(y0);
        let mut step_headings: Vec<f64> = Vec::with_capacity(steps);
        let mut heading = rng.random_range(-PI..PI);
        for k in 0..steps {
            let t = k as f64 * cfg.delta_t;
            // first step is unconstrained in direction; later steps obey the
            // steering range around the current bearing
            let steer_limit = if k == 0 { PI / 2.0 } else { cfg.npc_steer_max };
            let pose = Pose::new(positions[k], heading);
            let area = non_invasive_area(
                &pose, seed_obs, current, current_obs, exclude, ctx, t, &fp, cfg, steer_limit,
            );
            if area.is_empty() {
                return Ok(MutationOutcome::aborted(current, MutationOp::Add));
            }
            let mut accepted: Option<Point2> = None;
            for _ in 0..SAMPLE_RETRIES {
                let cand = match sample_point(&area, rng) {
                    Err(_) => break,
                    Ok(p) => p,
                };
                let to_heading = if cand.distance(&positions[k]) > 1e-9 {
                    (cand.y - positions[k].y).atan2(cand.x - positions[k].x)
                } else {
                    heading
                };
                // the authored first waypoint carries the first segment's
                // heading, so check the first segment with that heading too
                let from_pose = if k == 0 {
                    Pose::new(positions[0], to_heading)
                } else {
                    pose
                };
                let ok = segment_is_disjoint(
                    &from_pose,
                    &Pose::new(cand, to_heading),
                    &fp,
                    seed_obs,
                    current,
                    current_obs,
                    exclude,
                    ctx,
                    t,
                    t + cfg.delta_t,
                );
                if ok {
                    accepted = Some(cand);
                    heading = to_heading;
                    break;
                }
            }
            match accepted {
                None => return Ok(MutationOutcome::aborted(current, MutationOp::Add)),
                Some(p) => {
                    positions.push(p);
                    step_headings.push(heading);
                }
            }
        }
        let mut scenario = current.clone();
        scenario
            .participants
            .push(npc_from_positions(id, &positions, &step_headings, cfg.delta_t));
        Ok(MutationOutcome {
            scenario,
            op_used: MutationOp::Add,
            aborted: false,
        })
    }
}

/// Removing operator: drop one uniformly chosen `Added` participant. Seed
/// participants are never removed.
pub fn mutate_remove<R: Rng + ?Sized>(current: &Scenario, rng: &mut R) -> MutationOutcome {
    let candidates: Vec<usize> = current
        .participants
        .iter()
        .enumerate()
        .filter(|(_, p)| p.origin == ParticipantOrigin::Added)
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return MutationOutcome::aborted(current, MutationOp::Remove);
    }
    let victim = candidates[rng.random_range(0..candidates.len())];
    let mut scenario = current.clone();
    scenario.participants.remove(victim);
    MutationOutcome {
        scenario,
        op_used: MutationOp::Remove,
        aborted: false,
    }
}

/// Changing operator: remove one `Added` participant, then add a new one
/// with the removed participant's observation excluded from the feasible
/// area computation.
pub fn mutate_change<R: Rng + ?Sized>(
    seed_obs: &Observation,
    current: &Scenario,
    current_obs: &Observation,
    ctx: &MutationContext,
    cfg: &MutationConfig,
    rng: &mut R,
) -> MutationOutcome {
    let candidates: Vec<&str> = current
        .added_participants()
        .map(|p| p.id.as_str())
        .collect();
    if candidates.is_empty() {
        return MutationOutcome::aborted(current, MutationOp::Change);
    }
    let removed_id = candidates[rng.random_range(0..candidates.len())].to_string();
    let mut without = current.clone();
    without.participants.retain(|p| p.id != removed_id);
    // keep the id counter moving past the removed participant
    let new_id = next_added_id(current);
    match mutate_add_excluding(
        seed_obs,
        &without,
        current_obs,
        Some(&removed_id),
        Some(new_id),
        ctx,
        cfg,
        rng,
    ) {
        Ok(outcome) if !outcome.aborted => MutationOutcome {
            scenario: outcome.scenario,
            op_used: MutationOp::Change,
            aborted: false,
        },
        _ => MutationOutcome::aborted(current, MutationOp::Change),
    }
}

/// Draw an operator by `op_weights` and apply it; on abort or saturation try
/// a different operator, at most three attempts in total.
pub fn mutate<R: Rng + ?Sized>(
    seed_obs: &Observation,
    current: &Scenario,
    current_obs: &Observation,
    ctx: &MutationContext,
    cfg: &MutationConfig,
    rng: &mut R,
) -> MutationOutcome {
    let mut tried = [false; 3];
    let mut last = MutationOutcome::aborted(current, MutationOp::Add);
    for _ in 0..3 {
        let pick = {
            let mut weights = cfg.op_weights;
            for (i, t) in tried.iter().enumerate() {
                if *t {
                    weights[i] = 0.0;
                }
            }
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                break;
            }
            let mut draw = rng.random_range(0.0..total);
            let mut idx = 2;
            for (i, w) in weights.iter().enumerate() {
                if draw < *w {
                    idx = i;
                    break;
                }
                draw -= w;
            }
            idx
        };
        tried[pick] = true;
        let outcome = match pick {
            0 => match mutate_add(seed_obs, current, current_obs, ctx, cfg, rng) {
                Ok(o) => o,
                Err(MutationError::Saturated) => MutationOutcome::aborted(current, MutationOp::Add),
            },
            1 => mutate_remove(current, rng),
            _ => mutate_change(seed_obs, current, current_obs, ctx, cfg, rng),
        };
        if !outcome.aborted {
            return outcome;
        }
        last = outcome;
    }
    last
}

/// Unconstrained mutation for the Random baseline: add a participant
/// anywhere on the drivable (or placeable) area with only t=0 non-overlap
/// enforced, or remove an added one.
pub fn random_mutate<R: Rng + ?Sized>(
    current: &Scenario,
    ctx: &MutationContext,
    cfg: &MutationConfig,
    rng: &mut R,
) -> MutationOutcome {
    let added = current.added_participants().count();
    let add_w = cfg.op_weights[0];
    let rem_w = cfg.op_weights[1] + cfg.op_weights[2];
    let do_add = added == 0
        || added < cfg.max_added && rng.random_range(0.0..add_w + rem_w) < add_w;
    if !do_add {
        return MutationOutcome {
            op_used: MutationOp::Remove,
            ..mutate_remove(current, rng)
        };
    }
    let id = next_added_id(current);
    let is_static = rng.random::<f64>() < cfg.static_fraction;
    let (fp, base) = if is_static {
        (added_static_footprint(), &ctx.placeable)
    } else {
        (added_npc_footprint(), &ctx.drivable)
    };
    let ego_rect = crate::scenario::ego_footprint().corners(&current.task.start);
    for _ in 0..SAMPLE_RETRIES {
        let at = match sample_point(base, rng) {
            Err(_) => return MutationOutcome::aborted(current, MutationOp::Add),
            Ok(p) => p,
        };
        let heading = rng.random_range(-PI..PI);
        let rect = fp.corners(&Pose::new(at, heading));
        let clear = !geometry::rects_overlap(&rect, &ego_rect)
            && current.participants.iter().all(|p| {
                !geometry::rects_overlap(&rect, &p.footprint.corners(&p.initial().pose()))
            });
        if !clear {
            continue;
        }
        let participant = if is_static {
            make_static(id, at)
        } else {
            // random kinematically-plausible drive: successive sector samples
            // without any non-invasiveness constraint
            let steps = ((current.task.time_limit.min(40.0) / cfg.delta_t) as usize).max(1);
            let mut positions = vec![at];
            let mut step_headings: Vec<f64> = Vec::with_capacity(steps);
            let mut h = heading;
            for k in 0..steps {
                let sector = sector_from_state(
                    &Pose::new(positions[k], h),
                    cfg.npc_speed_max,
                    cfg.npc_steer_max,
                    cfg.delta_t,
                );
                let on_road = geometry::region_intersection(&[sector, ctx.drivable.clone()]);
                match sample_point(&on_road, rng) {
                    Err(_) => break,
                    Ok(p) => {
                        if p.distance(&positions[k]) > 1e-9 {
                            h = (p.y - positions[k].y).atan2(p.x - positions[k].x);
                        }
                        positions.push(p);
                        step_headings.push(h);
                    }
                }
            }
            if positions.len() == 1 {
                step_headings.push(h);
                positions.push(at);
            }
            npc_from_positions(id, &positions, &step_headings, cfg.delta_t)
        };
        let mut scenario = current.clone();
        scenario.participants.push(participant);
        return MutationOutcome {
            scenario,
            op_used: MutationOp::Add,
            aborted: false,
        };
    }
    MutationOutcome::aborted(current, MutationOp::Add)
}
