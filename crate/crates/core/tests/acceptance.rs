//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them). Campaign-heavy
//! criteria share their results through a `OnceLock`.

use pathdrift_core::engine::{self, Budget, EngineConfig, Strategy};
use pathdrift_core::feedback::{mmd, path_feedback, Bandwidth, BehaviorSeries, KernelSpec};
use pathdrift_core::geometry::{
    region_difference, region_intersection, sector_from_state, swept_region, Footprint, Point2,
    Pose,
};
use pathdrift_core::mutation::{mutate, MutationConfig, MutationContext};
use pathdrift_core::oracle::{consistency_from_cells, grid_similarity, GridCellSet};
use pathdrift_core::scenario::{
    ego_footprint, ego_path, load_map, load_scenario, DrivingPath, Observation, Participant,
    RoadMap, Scenario, Waypoint,
};
use pathdrift_core::sim::{
    replay_npc, replay_validation, simulate, step_ego, GridPlanner, PlannerPreset, SimConfig,
    TaskStatus,
};
use pathdrift_core::stats::mann_whitney_one_sided;
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

/// Prints the per-criterion verdict line; a panic before `pass()` leaves the
/// guard armed and the Drop impl reports FAIL.
struct Criterion {
    n: usize,
    name: &'static str,
    passed: bool,
}

impl Criterion {
    fn start(n: usize, name: &'static str) -> Self {
        Self {
            n,
            name,
            passed: false,
        }
    }

    fn pass(mut self, detail: &str) {
        self.passed = true;
        println!("criterion {} ({}): PASS — {}", self.n, self.name, detail);
    }
}

impl Drop for Criterion {
    fn drop(&mut self) {
        if !self.passed {
            println!("criterion {} ({}): FAIL", self.n, self.name);
        }
    }
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load_seed(name: &str) -> (RoadMap, Scenario) {
    let dir = corpus_dir();
    let seed = load_scenario(
        &std::fs::read_to_string(dir.join("seeds").join(format!("{name}.json"))).unwrap(),
    )
    .unwrap();
    let map = load_map(
        &std::fs::read_to_string(dir.join("maps").join(format!("{}.json", seed.map_id))).unwrap(),
    )
    .unwrap();
    (map, seed)
}

// ---------------------------------------------------------------------------
// criterion 1: polygon booleans vs an analytic membership oracle
// ---------------------------------------------------------------------------

/// Independent rectangle corners (not via `Footprint::corners`).
fn rect_pts(pose: &Pose, length: f64, width: f64) -> Vec<Point2> {
    let (s, c) = pose.heading.sin_cos();
    let (hl, hw) = (0.5 * length, 0.5 * width);
    [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
        .iter()
        .map(|&(dl, dw)| {
            Point2::new(
                pose.position.x + dl * c - dw * s,
                pose.position.y + dl * s + dw * c,
            )
        })
        .collect()
}

/// Monotone-chain convex hull (independent of the geo crate).
fn convex_hull(mut pts: Vec<Point2>) -> Vec<Point2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &Point2, a: &Point2, b: &Point2| {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for p in pts.iter().chain(pts.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

fn in_convex(hull: &[Point2], p: &Point2) -> bool {
    if hull.len() < 3 {
        return false;
    }
    for i in 0..hull.len() {
        let a = &hull[i];
        let b = &hull[(i + 1) % hull.len()];
        if (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) < 0.0 {
            return false;
        }
    }
    true
}

#[test]
fn criterion_1_geometry_oracle() {
    let c = Criterion::start(1, "geometry oracle equivalence");
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let (mut agree, mut total) = (0u64, 0u64);
    for _ in 0..500 {
        let center = Point2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let heading = rng.random_range(-PI..PI);
        let pose = Pose::new(center, heading);
        let speed = rng.random_range(0.5..1.5);
        let steer = rng.random_range(0.3..1.3);
        let dt = 2.0;
        let radius = speed * dt;
        let sector = sector_from_state(&pose, speed, steer, dt);

        // random swept obstacle overlapping the sector area
        let fp = Footprint::new(rng.random_range(0.5..2.0), rng.random_range(0.3..1.0));
        let inflation = rng.random_range(0.0..0.3);
        let n_poses = rng.random_range(1..=4usize);
        let mut poses = vec![Pose::new(
            Point2::new(
                center.x + rng.random_range(-radius..radius),
                center.y + rng.random_range(-radius..radius),
            ),
            rng.random_range(-PI..PI),
        )];
        for k in 1..n_poses {
            let prev = poses[k - 1].position;
            poses.push(Pose::new(
                Point2::new(
                    prev.x + rng.random_range(-1.5..1.5),
                    prev.y + rng.random_range(-1.5..1.5),
                ),
                rng.random_range(-PI..PI),
            ));
        }
        let swept = swept_region(&poses, &fp, inflation);
        let feasible = region_difference(&sector, &swept);

        // analytic oracle: sector membership by distance + angle, swept
        // membership by point-in-convex-hull of consecutive inflated rects
        let (il, iw) = (fp.length_m + 2.0 * inflation, fp.width_m + 2.0 * inflation);
        let hulls: Vec<Vec<Point2>> = if poses.len() == 1 {
            vec![convex_hull(rect_pts(&poses[0], il, iw))]
        } else {
            poses
                .windows(2)
                .map(|w| {
                    let mut pts = rect_pts(&w[0], il, iw);
                    pts.extend(rect_pts(&w[1], il, iw));
                    convex_hull(pts)
                })
                .collect()
        };
        let in_sector = |p: &Point2| {
            let d = center.distance(p);
            if d > radius {
                return false;
            }
            if d < 1e-12 {
                return true;
            }
            let ang = pathdrift_core::geometry::normalize_angle(
                (p.y - center.y).atan2(p.x - center.x) - heading,
            );
            ang.abs() <= steer
        };

        let cell = 0.05;
        let reach = radius + 0.2;
        let n = (2.0 * reach / cell).ceil() as i64;
        for i in 0..n {
            for j in 0..n {
                let p = Point2::new(
                    center.x - reach + (i as f64 + 0.5) * cell,
                    center.y - reach + (j as f64 + 0.5) * cell,
                );
                let lib = feasible.contains(&p);
                let orc = in_sector(&p) && !hulls.iter().any(|h| in_convex(h, &p));
                total += 1;
                if lib == orc {
                    agree += 1;
                }
            }
        }
    }
    let ratio = agree as f64 / total as f64;
    let secs = started.elapsed().as_secs_f64();
    assert!(
        ratio >= 0.99,
        "rasterized agreement {ratio:.5} below 0.99 ({agree}/{total})"
    );
    assert!(secs < 30.0, "criterion 1 took {secs:.1}s (budget 30s)");
    c.pass(&format!(
        "{agree}/{total} cells agree ({:.3}%) in {secs:.1}s",
        100.0 * ratio
    ));
}

// ---------------------------------------------------------------------------
// criterion 2: non-invasiveness of the constrained mutation operators
// ---------------------------------------------------------------------------

/// Exact per-window disjointness of a participant's replayed sweep from the
/// ego's seed-path sweep, at the documented 0.5 s pose stride.
fn windows_disjoint(seed_obs: &Observation, p: &Participant, delta_t: f64) -> bool {
    let horizon = seed_obs.duration().max(delta_t);
    let fp_ego = ego_footprint();
    let mut k = 0usize;
    loop {
        let t0 = k as f64 * delta_t;
        if t0 >= horizon {
            return true;
        }
        let t1 = (t0 + delta_t).min(horizon);
        let all = seed_obs.ego_poses_between(t0, t1);
        let stride = ((0.5 / seed_obs.dt).round() as usize).max(1);
        let mut ego_poses: Vec<Pose> = all.iter().copied().step_by(stride).collect();
        if all.len() > 1 && (all.len() - 1) % stride != 0 {
            ego_poses.push(*all.last().unwrap());
        }
        if ego_poses.is_empty() {
            return true;
        }
        let ego_sweep = swept_region(&ego_poses, &fp_ego, 0.0);
        let mut pposes = Vec::new();
        let mut t = t0;
        while t <= t1 + 1e-9 {
            pposes.push(replay_npc(p, t).pose());
            t += 0.5;
        }
        if (t - 0.5 - t1).abs() > 1e-9 {
            pposes.push(replay_npc(p, t1).pose());
        }
        let sweep = swept_region(&pposes, &p.footprint, 0.0);
        if region_intersection(&[ego_sweep, sweep]).area() > 1e-9 {
            return false;
        }
        k += 1;
    }
}

#[test]
fn criterion_2_non_invasive_mutations() {
    let c = Criterion::start(2, "non-invasiveness");
    let started = Instant::now();
    let seeds = ["S1", "S2", "S3", "S4", "S5", "S6"];
    let quota = [34usize, 34, 33, 33, 33, 33];
    let cfg = MutationConfig::default();
    let sim_cfg = SimConfig::default();
    let (mut accepted_total, mut replay_ok, mut disjoint_bad) = (0usize, 0usize, 0usize);
    for (i, name) in seeds.iter().enumerate() {
        let (map, seed) = load_seed(name);
        let mut planner = GridPlanner::new(PlannerPreset::Default);
        let (seed_obs, outcome) = simulate(&seed, &map, &mut planner, &sim_cfg, 0).unwrap();
        assert_eq!(outcome.status, TaskStatus::Completed, "{name} must complete");
        let seed_path = ego_path(&seed_obs);
        let ctx = MutationContext::with_seed(&map, &seed_obs, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(0xC2_00 + i as u64);
        let mut current = seed.clone();
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        while accepted < quota[i] {
            attempts += 1;
            assert!(
                attempts <= quota[i] * 10,
                "{name}: too many aborted mutations ({attempts})"
            );
            let out = mutate(&seed_obs, &current, &seed_obs, &ctx, &cfg, &mut rng);
            if out.aborted {
                continue;
            }
            let prev: BTreeSet<&str> =
                current.participants.iter().map(|p| p.id.as_str()).collect();
            for p in &out.scenario.participants {
                if !prev.contains(p.id.as_str()) && !windows_disjoint(&seed_obs, p, cfg.delta_t) {
                    disjoint_bad += 1;
                }
            }
            if replay_validation(&out.scenario, &seed_path, &map, &sim_cfg) {
                replay_ok += 1;
            }
            accepted += 1;
            accepted_total += 1;
            current = out.scenario;
        }
    }
    let replay_pct = 100.0 * replay_ok as f64 / accepted_total as f64;
    let secs = started.elapsed().as_secs_f64();
    assert_eq!(accepted_total, 200);
    assert_eq!(
        disjoint_bad, 0,
        "{disjoint_bad} mutation(s) violated per-window disjointness"
    );
    assert!(
        replay_pct >= 90.0,
        "replay validation {replay_pct:.1}% below 90%"
    );
    assert!(secs < 300.0, "criterion 2 took {secs:.1}s (budget 300s)");
    c.pass(&format!(
        "200/200 window-disjoint, replay validation {replay_pct:.1}% in {secs:.1}s"
    ));
}

// ---------------------------------------------------------------------------
// criteria 3 + 4: strategy ordering (campaigns shared via OnceLock)
// ---------------------------------------------------------------------------

const RNG_SEEDS: std::ops::Range<u64> = 100..110;
const ITERATIONS: usize = 150;

struct Campaigns {
    /// NoDS counts per strategy, one entry per rng seed.
    counts: Vec<(Strategy, Vec<f64>)>,
    baseline_secs: f64,
    ablation_secs: f64,
}

impl Campaigns {
    fn of(&self, s: Strategy) -> &[f64] {
        &self.counts.iter().find(|(k, _)| *k == s).unwrap().1
    }
}

fn run_strategy(s: Strategy, map: &RoadMap, seed: &Scenario) -> Vec<f64> {
    RNG_SEEDS
        .map(|rng_seed| {
            let cfg = EngineConfig {
                strategy: s,
                budget: Budget::Iterations(ITERATIONS),
                rng_seed,
                ..EngineConfig::default()
            };
            let mut planner = GridPlanner::new(PlannerPreset::Timid);
            let result = engine::run_campaign(seed, map, &mut planner, &cfg).unwrap();
            result.nods_count() as f64
        })
        .collect()
}

fn campaigns() -> &'static Campaigns {
    static CAMPAIGNS: OnceLock<Campaigns> = OnceLock::new();
    CAMPAIGNS.get_or_init(|| {
        let (map, seed) = load_seed("S3");
        let mut counts = Vec::new();
        let t0 = Instant::now();
        for s in [Strategy::Guided, Strategy::RandomDelta, Strategy::Random] {
            counts.push((s, run_strategy(s, &map, &seed)));
        }
        let baseline_secs = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        for s in [
            Strategy::FRandom,
            Strategy::FCon,
            Strategy::FPath,
            Strategy::FBehavior,
            Strategy::WithoutCons,
            Strategy::WithoutMot,
            Strategy::WithoutRem,
        ] {
            counts.push((s, run_strategy(s, &map, &seed)));
        }
        Campaigns {
            counts,
            baseline_secs,
            ablation_secs: t1.elapsed().as_secs_f64(),
        }
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn criterion_3_baseline_ordering() {
    let c = Criterion::start(3, "baseline ordering");
    let data = campaigns();
    let guided = data.of(Strategy::Guided);
    let delta = data.of(Strategy::RandomDelta);
    let random = data.of(Strategy::Random);
    let (mg, md, mr) = (mean(guided), mean(delta), mean(random));
    let p_gd = mann_whitney_one_sided(guided, delta);
    let p_dr = mann_whitney_one_sided(delta, random);
    assert!(mg > md && md > mr, "means not ordered: {mg:.1} / {md:.1} / {mr:.1}");
    assert!(p_gd < 0.05, "guided vs random-delta p = {p_gd:.4}");
    assert!(p_dr < 0.05, "random-delta vs random p = {p_dr:.4}");
    assert!(
        data.baseline_secs < 1800.0,
        "baselines took {:.0}s (budget 1800s)",
        data.baseline_secs
    );
    c.pass(&format!(
        "means {mg:.1} > {md:.1} > {mr:.1}, p = {p_gd:.4} / {p_dr:.4}, {:.0}s",
        data.baseline_secs
    ));
}

#[test]
fn criterion_4_ablation_ordering() {
    let c = Criterion::start(4, "ablation ordering");
    let data = campaigns();
    let mg = mean(data.of(Strategy::Guided));
    let ablations = [
        Strategy::FRandom,
        Strategy::FCon,
        Strategy::FPath,
        Strategy::FBehavior,
        Strategy::WithoutCons,
        Strategy::WithoutMot,
        Strategy::WithoutRem,
    ];
    let mut details = Vec::new();
    for s in ablations {
        let m = mean(data.of(s));
        assert!(
            mg > m,
            "guided mean {mg:.1} does not exceed {} mean {m:.1}",
            s.name()
        );
        details.push(format!("{} {m:.1}", s.name()));
    }
    let total = data.baseline_secs + data.ablation_secs;
    assert!(total < 3600.0, "campaign bundle took {total:.0}s (budget 3600s)");
    c.pass(&format!(
        "guided {mg:.1} > {}; bundle {total:.0}s",
        details.join(", ")
    ));
}

// ---------------------------------------------------------------------------
// criterion 5: metric axioms as property tests
// ---------------------------------------------------------------------------

fn prop_config() -> PropConfig {
    PropConfig {
        cases: 1000,
        failure_persistence: None,
        ..PropConfig::default()
    }
}

fn cellset(v: &[(i8, i8)]) -> GridCellSet {
    GridCellSet {
        cells: v.iter().map(|&(i, j)| (i as i64, j as i64)).collect(),
    }
}

#[test]
fn criterion_5_metric_axioms() {
    let c = Criterion::start(5, "metric axioms");
    let started = Instant::now();

    // Jaccard: symmetry, bounds, identity
    let cells = prop::collection::vec((any::<i8>(), any::<i8>()), 0..40);
    TestRunner::new(prop_config())
        .run(&(cells.clone(), cells), |(a, b)| {
            let (a, b) = (cellset(&a), cellset(&b));
            match (grid_similarity(&a, &b), grid_similarity(&b, &a)) {
                (Ok(ab), Ok(ba)) => {
                    prop_assert_eq!(ab, ba);
                    prop_assert!((0.0..=1.0).contains(&ab));
                }
                (Err(_), Err(_)) => {
                    prop_assert!(a.cells.is_empty() && b.cells.is_empty());
                }
                _ => prop_assert!(false, "asymmetric error"),
            }
            if !a.cells.is_empty() {
                prop_assert_eq!(grid_similarity(&a, &a).unwrap(), 1.0);
            }
            Ok(())
        })
        .unwrap();

    // path feedback: non-negative, zero on identical paths
    let pts = prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 2..20);
    TestRunner::new(prop_config())
        .run(&(pts.clone(), pts), |(a, b)| {
            let to_path = |v: &[(f64, f64)]| {
                DrivingPath::new(v.iter().map(|&(x, y)| Point2::new(x, y)).collect())
            };
            let (pa, pb) = (to_path(&a), to_path(&b));
            prop_assert!(path_feedback(&pa, &pb) >= 0.0);
            prop_assert_eq!(path_feedback(&pa, &pa), 0.0);
            Ok(())
        })
        .unwrap();
    // hand cases
    let origin = DrivingPath::new(vec![Point2::new(0.0, 0.0), Point2::new(0.0, 0.0)]);
    let unit = DrivingPath::new(vec![Point2::new(0.0, 1.0), Point2::new(0.0, 1.0)]);
    assert!((path_feedback(&origin, &unit) - 1.0).abs() < 1e-12);
    let mixed = DrivingPath::new(vec![Point2::new(0.0, 1.0), Point2::new(0.0, 3.0)]);
    assert!((path_feedback(&origin, &mixed) - 2.0).abs() < 1e-12);

    // MMD: non-negative, zero on identical, symmetric, equals the
    // brute-force double sum at a fixed bandwidth
    let rows = prop::collection::vec([-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64], 2..8);
    TestRunner::new(prop_config())
        .run(&(rows.clone(), rows, 0.2..3.0f64), |(xs, ys, sigma)| {
            let x = BehaviorSeries { rows: xs.clone() };
            let y = BehaviorSeries { rows: ys.clone() };
            let k = KernelSpec {
                bandwidth: Bandwidth::Fixed(sigma),
            };
            let got = mmd(&x, &y, &k);
            prop_assert!(got >= 0.0);
            prop_assert!(mmd(&x, &x, &k) < 1e-7);
            prop_assert!((got - mmd(&y, &x, &k)).abs() < 1e-12);
            // independent double-sum oracle
            let kern = |a: &[f64; 3], b: &[f64; 3]| {
                let d2: f64 = (0..3).map(|d| (a[d] - b[d]).powi(2)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            };
            let block = |u: &[[f64; 3]], w: &[[f64; 3]]| {
                let mut s = 0.0;
                for a in u {
                    for b in w {
                        s += kern(a, b);
                    }
                }
                s / (u.len() * w.len()) as f64
            };
            let expected = (block(&xs, &xs) + block(&ys, &ys) - 2.0 * block(&xs, &ys))
                .max(0.0)
                .sqrt();
            prop_assert!((got - expected).abs() < 1e-12);
            Ok(())
        })
        .unwrap();

    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 60.0, "criterion 5 took {secs:.1}s (budget 60s)");
    c.pass(&format!("3000 property cases + hand cases in {secs:.1}s"));
}

// ---------------------------------------------------------------------------
// criterion 6: byte-identical campaign artifacts
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_deterministic_campaigns() {
    let c = Criterion::start(6, "deterministic campaigns");
    let started = Instant::now();
    let (map, seed) = load_seed("S3");
    let run = || {
        let cfg = EngineConfig {
            strategy: Strategy::Guided,
            budget: Budget::Iterations(40),
            rng_seed: 7,
            ..EngineConfig::default()
        };
        let mut planner = GridPlanner::new(PlannerPreset::Timid);
        let result = engine::run_campaign(&seed, &map, &mut planner, &cfg).unwrap();
        serde_json::to_vec_pretty(&result).unwrap()
    };
    let (a, b) = (run(), run());
    let secs = started.elapsed().as_secs_f64();
    assert_eq!(a, b, "result.json bytes differ between identical campaigns");
    assert!(secs < 300.0, "criterion 6 took {secs:.1}s (budget 300s)");
    c.pass(&format!(
        "two campaigns, identical {} result bytes in {secs:.1}s",
        a.len()
    ));
}

// ---------------------------------------------------------------------------
// criterion 7: the consistency threshold is strict
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_threshold_is_strict() {
    let c = Criterion::start(7, "strict threshold");
    // |intersection| = 3, |union| = 5 -> similarity exactly 0.6
    let a = cellset(&[(0, 0), (1, 0), (2, 0)]);
    let b = cellset(&[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]);
    let verdict = consistency_from_cells(&a, &b, 0.6).unwrap();
    assert_eq!(verdict.similarity, 0.6);
    assert!(
        !verdict.consistent,
        "similarity exactly at epsilon must be a violation"
    );
    c.pass("similarity 0.6 at epsilon 0.6 is inconsistent");
}

// ---------------------------------------------------------------------------
// criterion 8: vehicle model closed forms
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_vehicle_closed_forms() {
    let c = Criterion::start(8, "vehicle model closed forms");
    let n = 1000usize;
    let dt = 0.01;
    let wheelbase = 2.8;

    // straight line under constant acceleration (explicit Euler):
    // x_n = n v0 dt + a dt^2 n(n-1)/2
    let (v0, accel) = (2.0, 0.5);
    let mut s = Waypoint {
        t: 0.0,
        position: Point2::new(0.0, 0.0),
        heading: 0.0,
        v: v0,
        a: 0.0,
    };
    for _ in 0..n {
        s = step_ego(&s, accel, 0.0, wheelbase, dt);
    }
    let expected_x = n as f64 * v0 * dt + accel * dt * dt * (n * (n - 1)) as f64 / 2.0;
    assert!(
        (s.position.x - expected_x).abs() < 1e-9,
        "straight: {} vs {expected_x}",
        s.position.x
    );
    assert!(s.position.y.abs() < 1e-9);
    assert!((s.v - (v0 + accel * n as f64 * dt)).abs() < 1e-9);

    // constant steer at constant speed: heading grows by a fixed increment,
    // positions follow the Dirichlet-kernel sums of cos/sin
    let (v, steer, theta0) = (5.0, 0.05f64, 0.3);
    let omega = (v / wheelbase) * steer.tan() * dt;
    let mut s = Waypoint {
        t: 0.0,
        position: Point2::new(1.0, -2.0),
        heading: theta0,
        v,
        a: 0.0,
    };
    for _ in 0..n {
        s = step_ego(&s, 0.0, steer, wheelbase, dt);
    }
    let nf = n as f64;
    let kernel = (nf * omega / 2.0).sin() / (omega / 2.0).sin();
    let mid = theta0 + (nf - 1.0) * omega / 2.0;
    let expected = Point2::new(
        1.0 + v * dt * mid.cos() * kernel,
        -2.0 + v * dt * mid.sin() * kernel,
    );
    assert!(
        (s.position.x - expected.x).abs() < 1e-9
            && (s.position.y - expected.y).abs() < 1e-9,
        "arc endpoint ({}, {}) vs ({}, {})",
        s.position.x,
        s.position.y,
        expected.x,
        expected.y
    );
    assert!((s.heading - (theta0 + nf * omega)).abs() < 1e-9);
    c.pass("straight and constant-steer runs match closed forms to 1e-9 over 1000 steps");
}
