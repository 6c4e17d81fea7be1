//! Python bindings: scenario I/O, validation, simulation, replay checking,
//! consistency metrics, and search campaigns.

use pathdrift_core::engine::{self, Budget, EngineConfig, Strategy};
use pathdrift_core::oracle::{consistency_check, covered_grids, GridSpec};
use pathdrift_core::scenario::{self, DrivingPath, Observation, RoadMap, Scenario};
use pathdrift_core::sim::{GridPlanner, PlannerPreset, SimConfig, TaskStatus};
use pathdrift_core::Point2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn preset_from(name: &str) -> PyResult<PlannerPreset> {
    match name {
        "default" => Ok(PlannerPreset::Default),
        "timid" => Ok(PlannerPreset::Timid),
        other => Err(PyValueError::new_err(format!(
            "unknown planner preset `{other}`"
        ))),
    }
}

#[pyclass(name = "RoadMap", frozen)]
struct PyRoadMap {
    inner: RoadMap,
}

#[pymethods]
impl PyRoadMap {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: scenario::load_map(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        scenario::save_map(&self.inner)
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id.clone()
    }

    #[getter]
    fn lane_ids(&self) -> Vec<String> {
        self.inner.lanes.iter().map(|l| l.id.clone()).collect()
    }
}

#[pyclass(name = "Scenario", frozen)]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: scenario::load_scenario(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        scenario::save_scenario(&self.inner)
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id.clone()
    }

    #[getter]
    fn map_id(&self) -> String {
        self.inner.map_id.clone()
    }

    #[getter]
    fn participant_ids(&self) -> Vec<String> {
        self.inner
            .participants
            .iter()
            .map(|p| p.id.clone())
            .collect()
    }

    /// Validate against a map; returns (participant_or_None, message) pairs.
    fn validate(&self, map: &PyRoadMap) -> Vec<(Option<String>, String)> {
        scenario::validate_scenario(&self.inner, &map.inner)
            .into_iter()
            .map(|v| (v.participant, v.message))
            .collect()
    }
}

#[pyclass(name = "Observation", frozen)]
struct PyObservation {
    inner: Observation,
    status: String,
    elapsed: f64,
}

#[pymethods]
impl PyObservation {
    #[getter]
    fn status(&self) -> String {
        self.status.clone()
    }

    #[getter]
    fn elapsed(&self) -> f64 {
        self.elapsed
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    /// The recorded ego path as (x, y) tuples.
    fn ego_path(&self) -> Vec<(f64, f64)> {
        scenario::ego_path(&self.inner)
            .points
            .iter()
            .map(|p| (p.x, p.y))
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(err)
    }
}

#[pyclass(name = "CampaignResult", frozen)]
struct PyCampaignResult {
    inner: engine::CampaignResult,
}

#[pymethods]
impl PyCampaignResult {
    #[getter]
    fn strategy(&self) -> String {
        self.inner.strategy.name().to_string()
    }

    #[getter]
    fn nods_count(&self) -> usize {
        self.inner.nods_count()
    }

    #[getter]
    fn iterations_run(&self) -> usize {
        self.inner.iterations_run
    }

    #[getter]
    fn mutation_valid_pct(&self) -> f64 {
        self.inner.mutation_valid_pct()
    }

    /// Scenario JSON of every detected non-optimal decision scenario.
    fn nods_scenarios(&self) -> Vec<String> {
        self.inner
            .nods
            .iter()
            .map(|r| scenario::save_scenario(&r.scenario))
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(err)
    }
}

/// Closed-loop simulation of a scenario with the built-in grid planner.
#[pyfunction]
#[pyo3(signature = (scenario, map, preset = "default", rng_seed = 0))]
fn simulate(
    scenario: &PyScenario,
    map: &PyRoadMap,
    preset: &str,
    rng_seed: u64,
) -> PyResult<PyObservation> {
    let mut planner = GridPlanner::new(preset_from(preset)?);
    let (obs, outcome) = pathdrift_core::sim::simulate(
        &scenario.inner,
        &map.inner,
        &mut planner,
        &SimConfig::default(),
        rng_seed,
    )
    .map_err(err)?;
    Ok(PyObservation {
        inner: obs,
        status: format!("{:?}", outcome.status),
        elapsed: outcome.elapsed,
    })
}

/// Open-loop replay: does `path` (a list of (x, y) points) stay traversable
/// in `scenario` and reach its destination?
#[pyfunction]
fn replay_validation(
    scenario: &PyScenario,
    map: &PyRoadMap,
    path: Vec<(f64, f64)>,
) -> PyResult<bool> {
    if path.len() < 2 {
        return Err(PyValueError::new_err("path needs at least two points"));
    }
    let path = DrivingPath::new(path.iter().map(|&(x, y)| Point2::new(x, y)).collect());
    Ok(pathdrift_core::sim::replay_validation(
        &scenario.inner,
        &path,
        &map.inner,
        &SimConfig::default(),
    ))
}

/// Grid-based path similarity and the consistency verdict
/// (similarity, consistent).
#[pyfunction]
#[pyo3(signature = (path_a, path_b, cell_size = 2.0, epsilon = 0.6))]
fn path_consistency(
    path_a: Vec<(f64, f64)>,
    path_b: Vec<(f64, f64)>,
    cell_size: f64,
    epsilon: f64,
) -> PyResult<(f64, bool)> {
    if path_a.len() < 2 || path_b.len() < 2 {
        return Err(PyValueError::new_err("paths need at least two points"));
    }
    let to_path =
        |pts: &[(f64, f64)]| DrivingPath::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect());
    let spec = GridSpec::new(cell_size, Point2::new(0.0, 0.0));
    let verdict = consistency_check(&to_path(&path_a), &to_path(&path_b), &spec, epsilon)
        .map_err(err)?;
    Ok((verdict.similarity, verdict.consistent))
}

/// Number of grid cells covered by a path.
#[pyfunction]
#[pyo3(signature = (path, cell_size = 2.0))]
fn covered_cell_count(path: Vec<(f64, f64)>, cell_size: f64) -> PyResult<usize> {
    if path.len() < 2 {
        return Err(PyValueError::new_err("path needs at least two points"));
    }
    let path = DrivingPath::new(path.iter().map(|&(x, y)| Point2::new(x, y)).collect());
    let spec = GridSpec::new(cell_size, Point2::new(0.0, 0.0));
    Ok(covered_grids(&path, &spec).cells.len())
}

/// Run one search campaign.
#[pyfunction]
#[pyo3(signature = (
    scenario,
    map,
    strategy = "guided",
    iterations = 50,
    preset = "timid",
    rng_seed = 0,
    population = 4,
    epsilon = 0.6
))]
#[allow(clippy::too_many_arguments)]
fn run_campaign(
    scenario: &PyScenario,
    map: &PyRoadMap,
    strategy: &str,
    iterations: usize,
    preset: &str,
    rng_seed: u64,
    population: usize,
    epsilon: f64,
) -> PyResult<PyCampaignResult> {
    let cfg = EngineConfig {
        strategy: strategy.parse::<Strategy>().map_err(err)?,
        budget: Budget::Iterations(iterations),
        population_n: population,
        epsilon,
        rng_seed,
        ..EngineConfig::default()
    };
    let mut planner = GridPlanner::new(preset_from(preset)?);
    let result = engine::run_campaign(&scenario.inner, &map.inner, &mut planner, &cfg)
        .map_err(err)?;
    Ok(PyCampaignResult { inner: result })
}

/// True when the task completed (convenience for observation statuses).
#[pyfunction]
fn is_completed(status: &str) -> bool {
    status == format!("{:?}", TaskStatus::Completed)
}

#[pymodule]
fn pathdrift(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRoadMap>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyObservation>()?;
    m.add_class::<PyCampaignResult>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(replay_validation, m)?)?;
    m.add_function(wrap_pyfunction!(path_consistency, m)?)?;
    m.add_function(wrap_pyfunction!(covered_cell_count, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    m.add_function(wrap_pyfunction!(is_completed, m)?)?;
    m.add(
        "STRATEGIES",
        Strategy::ALL.iter().map(|s| s.name()).collect::<Vec<_>>(),
    )?;
    Ok(())
}
