//! Grid-abstraction consistency check: map driving paths to covered grid
//! cells, compare with the Jaccard index, and gate on the task outcome.

use crate::geometry::Point2;
use crate::scenario::DrivingPath;
use crate::sim::{TaskOutcome, TaskStatus};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("both grid cell sets are empty")]
    BothEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cell_size: f64,
    pub origin: Point2,
}

impl GridSpec {
    pub fn new(cell_size: f64, origin: Point2) -> Self {
        assert!(cell_size > 0.0);
        Self { cell_size, origin }
    }

    pub fn cell_of(&self, p: &Point2) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.cell_size).floor() as i64,
            ((p.y - self.origin.y) / self.cell_size).floor() as i64,
        )
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            cell_size: 2.0,
            origin: Point2::new(0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GridCellSet {
    pub cells: BTreeSet<(i64, i64)>,
}

/// Cells covered by the path: every path point plus every cell crossed by the
/// segments between consecutive points (supercover traversal, so the result
/// does not depend on the sampling rate of the path).
pub fn covered_grids(path: &DrivingPath, spec: &GridSpec) -> GridCellSet {
    let mut cells = BTreeSet::new();
    for p in &path.points {
        cells.insert(spec.cell_of(p));
    }
    for seg in path.points.windows(2) {
        supercover(&seg[0], &seg[1], spec, &mut cells);
    }
    GridCellSet { cells }
}

/// Amanatides-Woo style voxel traversal between two points.
fn supercover(a: &Point2, b: &Point2, spec: &GridSpec, out: &mut BTreeSet<(i64, i64)>) {
    let (mut i, mut j) = spec.cell_of(a);
    let (ti, tj) = spec.cell_of(b);
    out.insert((i, j));
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let step_i: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_j: i64 = if dy > 0.0 { 1 } else { -1 };
    // parametric distance to the next vertical/horizontal cell boundary
    let next_boundary = |cell: i64, step: i64, origin: f64| -> f64 {
        let edge = if step > 0 { cell + 1 } else { cell };
        origin + edge as f64 * spec.cell_size
    };
    let mut t_max_x = if dx != 0.0 {
        (next_boundary(i, step_i, spec.origin.x) - a.x) / dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy != 0.0 {
        (next_boundary(j, step_j, spec.origin.y) - a.y) / dy
    } else {
        f64::INFINITY
    };
    let t_delta_x = if dx != 0.0 {
        spec.cell_size / dx.abs()
    } else {
        f64::INFINITY
    };
    let t_delta_y = if dy != 0.0 {
        spec.cell_size / dy.abs()
    } else {
        f64::INFINITY
    };
    // bounded by the Manhattan cell distance; avoids FP edge-case loops
    let max_steps = (ti - i).abs() + (tj - j).abs();
    for _ in 0..max_steps {
        if t_max_x < t_max_y {
            t_max_x += t_delta_x;
            i += step_i;
        } else {
            t_max_y += t_delta_y;
            j += step_j;
        }
        out.insert((i, j));
        if i == ti && j == tj {
            break;
        }
    }
    out.insert((ti, tj));
}

/// Jaccard index of two covered-grid sets.
pub fn grid_similarity(a: &GridCellSet, b: &GridCellSet) -> Result<f64, OracleError> {
    let union = a.cells.union(&b.cells).count();
    if union == 0 {
        return Err(OracleError::BothEmpty);
    }
    let inter = a.cells.intersection(&b.cells).count();
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyVerdict {
    pub similarity: f64,
    pub consistent: bool,
    pub threshold: f64,
}

/// Compare two driving paths on the grid abstraction. The verdict is
/// consistent only when similarity is strictly greater than `epsilon`.
pub fn consistency_check(
    tau_star: &DrivingPath,
    tau_prime: &DrivingPath,
    spec: &GridSpec,
    epsilon: f64,
) -> Result<ConsistencyVerdict, OracleError> {
    let a = covered_grids(tau_star, spec);
    let b = covered_grids(tau_prime, spec);
    consistency_from_cells(&a, &b, epsilon)
}

/// Same verdict from precomputed cell sets (lets callers cache the seed's).
pub fn consistency_from_cells(
    a: &GridCellSet,
    b: &GridCellSet,
    epsilon: f64,
) -> Result<ConsistencyVerdict, OracleError> {
    let similarity = grid_similarity(a, b)?;
    Ok(ConsistencyVerdict {
        similarity,
        consistent: similarity > epsilon,
        threshold: epsilon,
    })
}

/// A mutated scenario is a non-optimal decision scenario exactly when the
/// task completed but the driving path is inconsistent with the seed's.
pub fn is_nods(outcome: &TaskOutcome, verdict: &ConsistencyVerdict) -> bool {
    outcome.status == TaskStatus::Completed && !verdict.consistent
}
