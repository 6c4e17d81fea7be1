#!/usr/bin/env python3
"""Smoke test for the pathdrift Python bindings.

Builds expect `cargo build -p pathdrift-py` to have produced the cdylib in
target/debug; the script stages it under a temp directory as `pathdrift.so`
and exercises the main entry points against the checked-in corpus.

Usage: python3 python/smoke_test.py
"""

import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def stage_module(tmp: pathlib.Path) -> None:
    candidates = [
        ROOT / "target" / "debug" / "libpathdrift.so",
        ROOT / "target" / "release" / "libpathdrift.so",
        ROOT / "target" / "debug" / "libpathdrift.dylib",
        ROOT / "target" / "release" / "libpathdrift.dylib",
    ]
    for cand in candidates:
        if cand.exists():
            shutil.copy(cand, tmp / "pathdrift.so")
            return
    sys.exit("build the bindings first: cargo build -p pathdrift-py")


def main() -> None:
    with tempfile.TemporaryDirectory() as tmpdir:
        tmp = pathlib.Path(tmpdir)
        stage_module(tmp)
        sys.path.insert(0, str(tmp))
        import pathdrift as pd

        map_text = (ROOT / "corpus" / "maps" / "straight-2.json").read_text()
        seed_text = (ROOT / "corpus" / "seeds" / "S3.json").read_text()
        road = pd.RoadMap.from_json(map_text)
        seed = pd.Scenario.from_json(seed_text)

        assert road.id == "straight-2"
        assert seed.map_id == road.id
        assert seed.validate(road) == [], "corpus seed should validate cleanly"

        obs = pd.simulate(seed, road, preset="timid")
        assert pd.is_completed(obs.status), f"unexpected status {obs.status}"
        path = obs.ego_path()
        assert len(path) > 10

        assert pd.replay_validation(seed, road, path)

        sim, consistent = pd.path_consistency(path, path)
        assert sim == 1.0 and consistent
        assert pd.covered_cell_count(path) > 10

        result = pd.run_campaign(seed, road, strategy="guided", iterations=10, rng_seed=1)
        assert result.iterations_run == 10
        assert 0.0 <= result.mutation_valid_pct <= 100.0
        for text in result.nods_scenarios():
            pd.Scenario.from_json(text)  # NoDS scenarios round-trip

        # serialization round-trips
        assert pd.Scenario.from_json(seed.to_json()).id == seed.id
        assert pd.RoadMap.from_json(road.to_json()).id == road.id

        print(
            f"ok: simulate {obs.elapsed:.1f}s, campaign found "
            f"{result.nods_count} NoDS over {result.iterations_run} iterations"
        )


if __name__ == "__main__":
    main()
