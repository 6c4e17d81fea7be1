//! The checked-in seed corpus must load, validate, and complete its motion
//! task under both reference-planner presets.

use pathdrift_core::scenario::{load_map, load_scenario, validate_scenario, RoadMap, Scenario};
use pathdrift_core::sim::{simulate, GridPlanner, PlannerPreset, SimConfig, TaskStatus};
use std::fs;
use std::path::PathBuf;

fn corpus_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn load_corpus() -> Vec<(Scenario, RoadMap)> {
    let root = corpus_root();
    let mut out = Vec::new();
    for k in 1..=6 {
        let seed_text = fs::read_to_string(root.join(format!("seeds/S{k}.json"))).unwrap();
        let seed = load_scenario(&seed_text).unwrap();
        let map_text = fs::read_to_string(root.join(format!("maps/{}.json", seed.map_id))).unwrap();
        let map = load_map(&map_text).unwrap();
        out.push((seed, map));
    }
    out
}

#[test]
fn corpus_loads_and_validates() {
    let corpus = load_corpus();
    assert_eq!(corpus.len(), 6);
    for (seed, map) in &corpus {
        let violations = validate_scenario(seed, map);
        assert!(violations.is_empty(), "{}: {violations:?}", seed.id);
    }
}

#[test]
fn corpus_round_trips_losslessly() {
    for (seed, map) in &load_corpus() {
        let seed2 = load_scenario(&pathdrift_core::scenario::save_scenario(seed)).unwrap();
        assert_eq!(&seed2, seed);
        let map2 = load_map(&pathdrift_core::scenario::save_map(map)).unwrap();
        assert_eq!(&map2, map);
    }
}

#[test]
fn corpus_completes_under_both_presets() {
    for preset in [PlannerPreset::Default, PlannerPreset::Timid] {
        for (seed, map) in &load_corpus() {
            let mut planner = GridPlanner::new(preset);
            let (obs, outcome) =
                simulate(seed, map, &mut planner, &SimConfig::default(), 0).unwrap();
            assert_eq!(
                outcome.status,
                TaskStatus::Completed,
                "{} under {preset:?}: {outcome:?} after {:.1}s",
                seed.id,
                obs.duration()
            );
        }
    }
}
