//! Regenerates the seed corpus under `corpus/`. The generated files are
//! checked in; run this only when the scenario formats or the corpus
//! layouts change:
//!
//! ```sh
//! cargo run -p pathdrift-core --example gen_corpus
//! ```

use pathdrift_core::geometry::{Footprint, Point2, Pose};
use pathdrift_core::scenario::{
    save_map, save_scenario, Lane, MotionTask, Participant, ParticipantKind, ParticipantOrigin,
    RoadMap, Scenario, Waypoint,
};
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

fn pt(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

/// Arc sampled every ~10 degrees from `a0` to `a1` around `center`.
fn arc(center: Point2, r: f64, a0: f64, a1: f64) -> Vec<Point2> {
    let steps = ((a1 - a0).abs() / (10.0_f64.to_radians())).ceil() as usize;
    (0..=steps)
        .map(|k| {
            let a = a0 + (a1 - a0) * k as f64 / steps as f64;
            pt(center.x + r * a.cos(), center.y + r * a.sin())
        })
        .collect()
}

fn lane(id: &str, centerline: Vec<Point2>, width_m: f64, successors: &[&str]) -> Lane {
    Lane {
        id: id.into(),
        centerline,
        width_m,
        successors: successors.iter().map(|s| s.to_string()).collect(),
        left_neighbor: None,
        right_neighbor: None,
    }
}

fn cone(id: &str, x: f64, y: f64) -> Participant {
    Participant {
        id: id.into(),
        kind: ParticipantKind::StaticObstacle,
        footprint: Footprint::new(0.4, 0.4),
        origin: ParticipantOrigin::Seed,
        trajectory: vec![Waypoint {
            t: 0.0,
            position: pt(x, y),
            heading: 0.0,
            v: 0.0,
            a: 0.0,
        }],
    }
}

fn npc_line(id: &str, from: Point2, heading: f64, v: f64, secs: usize) -> Participant {
    let trajectory = (0..=secs)
        .map(|k| {
            let t = k as f64;
            Waypoint {
                t,
                position: pt(from.x + v * t * heading.cos(), from.y + v * t * heading.sin()),
                heading,
                v,
                a: 0.0,
            }
        })
        .collect();
    Participant {
        id: id.into(),
        kind: ParticipantKind::NpcVehicle,
        footprint: Footprint::new(4.6, 2.0),
        origin: ParticipantOrigin::Seed,
        trajectory,
    }
}

fn task(start: Point2, heading: f64, dest: Point2, time_limit: f64) -> MotionTask {
    MotionTask {
        start: Pose::new(start, heading),
        destination: dest,
        goal_radius: 3.0,
        time_limit,
    }
}

struct Entry {
    map: RoadMap,
    seed_file: &'static str,
    scenario: Scenario,
}

fn corpus() -> Vec<Entry> {
    let w = 3.5;
    let mut out = Vec::new();

    // tee junction: approach road splitting into left and right turns
    let tee = RoadMap {
        id: "tee".into(),
        lanes: vec![
            lane("main-in", vec![pt(0.0, 0.0), pt(40.0, 0.0)], w, &["turn-left", "turn-right"]),
            lane(
                "turn-left",
                {
                    let mut c = arc(pt(40.0, 12.0), 12.0, -PI / 2.0, 0.0);
                    c.push(pt(52.0, 40.0));
                    c
                },
                w,
                &[],
            ),
            lane(
                "turn-right",
                {
                    let mut c = arc(pt(40.0, -12.0), 12.0, PI / 2.0, 0.0);
                    c.push(pt(52.0, -40.0));
                    c
                },
                w,
                &[],
            ),
        ],
    };
    out.push(Entry {
        map: tee.clone(),
        seed_file: "S1.json",
        scenario: Scenario {
            id: "s1-left-turn".into(),
            map_id: "tee".into(),
            task: task(pt(3.0, 0.0), 0.0, pt(52.0, 36.0), 40.0),
            participants: vec![cone("edge-cone", 20.0, -2.6)],
        },
    });
    out.push(Entry {
        map: tee,
        seed_file: "S2.json",
        scenario: Scenario {
            id: "s2-right-turn".into(),
            map_id: "tee".into(),
            task: task(pt(3.0, 0.0), 0.0, pt(52.0, -36.0), 40.0),
            participants: vec![cone("edge-cone", 20.0, 2.6)],
        },
    });

    // straight two-lane road with roadside cones
    let straight = RoadMap {
        id: "straight-2".into(),
        lanes: vec![
            lane("l0", vec![pt(0.0, 0.0), pt(120.0, 0.0)], w, &[]),
            lane("l1", vec![pt(0.0, 3.5), pt(120.0, 3.5)], w, &[]),
        ],
    };
    out.push(Entry {
        map: straight,
        seed_file: "S3.json",
        scenario: Scenario {
            id: "s3-lane-follow".into(),
            map_id: "straight-2".into(),
            task: task(pt(4.0, 0.0), 0.0, pt(112.0, 0.0), 60.0),
            participants: vec![
                cone("shoulder-0", 30.0, -2.6),
                cone("shoulder-1", 50.0, -2.6),
                cone("shoulder-2", 70.0, -2.6),
            ],
        },
    });

    // out-and-back road joined by a half-circle loop
    let uturn = RoadMap {
        id: "uturn".into(),
        lanes: vec![
            lane("out", vec![pt(0.0, 0.0), pt(60.0, 0.0)], w, &["loop"]),
            lane("loop", arc(pt(60.0, 8.0), 8.0, -PI / 2.0, PI / 2.0), w, &["back"]),
            lane("back", vec![pt(60.0, 16.0), pt(0.0, 16.0)], w, &[]),
        ],
    };
    out.push(Entry {
        map: uturn,
        seed_file: "S4.json",
        scenario: Scenario {
            id: "s4-u-turn".into(),
            map_id: "uturn".into(),
            task: task(pt(4.0, 0.0), 0.0, pt(6.0, 16.0), 60.0),
            participants: vec![cone("edge-cone", 30.0, -2.6)],
        },
    });

    // crossing roads; an NPC clears the junction before the ego arrives
    let cross = RoadMap {
        id: "cross".into(),
        lanes: vec![
            lane("ew", vec![pt(0.0, 0.0), pt(100.0, 0.0)], w, &[]),
            lane("ns", vec![pt(50.0, -30.0), pt(50.0, 30.0)], w, &[]),
        ],
    };
    out.push(Entry {
        map: cross,
        seed_file: "S5.json",
        scenario: Scenario {
            id: "s5-crossing".into(),
            map_id: "cross".into(),
            task: task(pt(4.0, 0.0), 0.0, pt(94.0, 0.0), 40.0),
            participants: vec![npc_line("crosser", pt(50.0, -25.0), PI / 2.0, 5.0, 10)],
        },
    });

    // driveway joining a main road through a tangent arc
    let driveway = RoadMap {
        id: "driveway".into(),
        lanes: vec![
            lane("main", vec![pt(0.0, 0.0), pt(80.0, 0.0)], w, &[]),
            lane(
                "drive",
                {
                    let mut c = vec![pt(10.0, -10.0)];
                    c.extend(arc(pt(15.0, -5.0), 5.0, PI, PI / 2.0));
                    c
                },
                4.0,
                &["main"],
            ),
        ],
    };
    out.push(Entry {
        map: driveway,
        seed_file: "S6.json",
        scenario: Scenario {
            id: "s6-driveway-exit".into(),
            map_id: "driveway".into(),
            task: task(pt(10.0, -8.0), PI / 2.0, pt(72.0, 0.0), 40.0),
            participants: vec![cone("curb-cone", 30.0, 2.6)],
        },
    });

    out
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let maps = root.join("corpus/maps");
    let seeds = root.join("corpus/seeds");
    fs::create_dir_all(&maps).unwrap();
    fs::create_dir_all(&seeds).unwrap();
    for entry in corpus() {
        let map_path = maps.join(format!("{}.json", entry.map.id));
        fs::write(&map_path, save_map(&entry.map)).unwrap();
        let seed_path = seeds.join(entry.seed_file);
        fs::write(&seed_path, save_scenario(&entry.scenario)).unwrap();
        println!("wrote {} + {}", map_path.display(), seed_path.display());
    }
}
