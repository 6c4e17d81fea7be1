//! Search feedback: average point-wise path distance, kernel two-sample
//! behavior distance (MMD), and top-N selection.

use crate::scenario::{ego_path, DrivingPath, Observation};
use serde::{Deserialize, Serialize};

/// Per-frame (heading, speed, acceleration) rows of the ego vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorSeries {
    pub rows: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// Median pairwise distance of the pooled samples (1.0 when the median
    /// degenerates to zero).
    MedianHeuristic,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub bandwidth: Bandwidth,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::MedianHeuristic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fitness {
    pub f_p: f64,
    pub f_b: f64,
    pub total: f64,
}

impl Fitness {
    pub fn new(f_p: f64, f_b: f64) -> Self {
        Self {
            f_p,
            f_b,
            total: f_p + f_b,
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0)
    }
}

/// Average over the points of `tau_prime` of the distance to the nearest
/// point of `tau_star`. Asymmetric on purpose.
pub fn path_feedback(tau_star: &DrivingPath, tau_prime: &DrivingPath) -> f64 {
    let sum: f64 = tau_prime
        .points
        .iter()
        .map(|p| {
            tau_star
                .points
                .iter()
                .map(|q| p.distance(q))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    sum / tau_prime.points.len() as f64
}

/// Raw (heading, v, a) rows of the ego across all scenes.
pub fn raw_behavior_rows(obs: &Observation) -> Vec<[f64; 3]> {
    obs.scenes
        .iter()
        .map(|s| [s.ego.heading, s.ego.v, s.ego.a])
        .collect()
}

/// Per-dimension mean and standard deviation (clamped to 1e-6) of a row set.
fn row_stats(rows: &[[f64; 3]]) -> ([f64; 3], [f64; 3]) {
    let n = rows.len() as f64;
    let mut mean = [0.0; 3];
    for r in rows {
        for d in 0..3 {
            mean[d] += r[d];
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = [0.0; 3];
    for r in rows {
        for d in 0..3 {
            var[d] += (r[d] - mean[d]).powi(2);
        }
    }
    let mut std = [0.0; 3];
    for d in 0..3 {
        std[d] = (var[d] / n).sqrt().max(1e-6);
    }
    (mean, std)
}

/// Behavior rows of `obs`, standardized per dimension with the mean/std of
/// the seed observation's rows (so the seed series itself maps to mean 0,
/// std 1).
pub fn behavior_series(obs: &Observation, seed_obs: &Observation) -> BehaviorSeries {
    let seed_rows = raw_behavior_rows(seed_obs);
    let (mean, std) = row_stats(&seed_rows);
    let rows = raw_behavior_rows(obs)
        .into_iter()
        .map(|r| {
            let mut z = [0.0; 3];
            for d in 0..3 {
                z[d] = (r[d] - mean[d]) / std[d];
            }
            z
        })
        .collect();
    BehaviorSeries { rows }
}

fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|d| (a[d] - b[d]).powi(2)).sum()
}

fn rbf_bandwidth(x: &BehaviorSeries, y: &BehaviorSeries, k: &KernelSpec) -> f64 {
    match k.bandwidth {
        Bandwidth::Fixed(s) => {
            assert!(s > 0.0, "fixed bandwidth must be positive");
            s
        }
        Bandwidth::MedianHeuristic => {
            let pooled: Vec<&[f64; 3]> = x.rows.iter().chain(y.rows.iter()).collect();
            let mut dists = Vec::with_capacity(pooled.len() * (pooled.len() - 1) / 2);
            for i in 0..pooled.len() {
                for j in i + 1..pooled.len() {
                    dists.push(sq_dist(pooled[i], pooled[j]).sqrt());
                }
            }
            let median = if dists.is_empty() {
                0.0
            } else {
                let mid = dists.len() / 2;
                *dists.select_nth_unstable_by(mid, f64::total_cmp).1
            };
            if median > 0.0 {
                median
            } else {
                1.0
            }
        }
    }
}

/// Square root of the biased V-statistic MMD^2 with an RBF kernel:
/// `mean k(x,x) + mean k(y,y) - 2 mean k(x,y)`.
pub fn mmd(x: &BehaviorSeries, y: &BehaviorSeries, k: &KernelSpec) -> f64 {
    assert!(x.rows.len() >= 2 && y.rows.len() >= 2, "mmd needs >=2 rows");
    let sigma = rbf_bandwidth(x, y, k);
    let kernel = |a: &[f64; 3], b: &[f64; 3]| (-sq_dist(a, b) / (2.0 * sigma * sigma)).exp();
    let block = |a: &[[f64; 3]], b: &[[f64; 3]]| -> f64 {
        let mut sum = 0.0;
        for u in a {
            for w in b {
                sum += kernel(u, w);
            }
        }
        sum / (a.len() * b.len()) as f64
    };
    let v = block(&x.rows, &x.rows) + block(&y.rows, &y.rows) - 2.0 * block(&x.rows, &y.rows);
    v.max(0.0).sqrt()
}

/// Combined fitness: path term plus behavior term, unweighted.
pub fn fitness(seed_obs: &Observation, cand_obs: &Observation, k: &KernelSpec) -> Fitness {
    let f_p = path_feedback(&ego_path(seed_obs), &ego_path(cand_obs));
    let f_b = mmd(
        &behavior_series(seed_obs, seed_obs),
        &behavior_series(cand_obs, seed_obs),
        k,
    );
    Fitness::new(f_p, f_b)
}

/// The `n` highest-total candidates, stable under ties; returns all (sorted)
/// when fewer than `n` exist. Returns indices into `candidates`.
pub fn select_top_n_indices(totals: &[f64], n: usize) -> Vec<usize> {
    assert!(n >= 1);
    let mut idx: Vec<usize> = (0..totals.len()).collect();
    idx.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}

/// Convenience wrapper over [`select_top_n_indices`] for owned candidates.
pub fn select_top_n<T: Clone>(candidates: &[(T, Fitness)], n: usize) -> Vec<T> {
    let totals: Vec<f64> = candidates.iter().map(|(_, f)| f.total).collect();
    select_top_n_indices(&totals, n)
        .into_iter()
        .map(|i| candidates[i].0.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use approx::assert_relative_eq;

    fn path(pts: &[(f64, f64)]) -> DrivingPath {
        DrivingPath::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect())
    }

    fn series(rows: &[[f64; 3]]) -> BehaviorSeries {
        BehaviorSeries {
            rows: rows.to_vec(),
        }
    }

    #[test]
    fn path_feedback_hand_cases() {
        let p = path(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(path_feedback(&p, &p), 0.0);
        let star = path(&[(0.0, 0.0), (0.0, 0.0)]);
        let one = path(&[(0.0, 1.0), (0.0, 1.0)]);
        assert_relative_eq!(path_feedback(&star, &one), 1.0);
        let two = path(&[(0.0, 1.0), (0.0, 3.0)]);
        assert_relative_eq!(path_feedback(&star, &two), 2.0);
    }

    #[test]
    fn mmd_identical_is_zero() {
        let x = series(&[[0.0, 1.0, 0.2], [0.1, 1.1, 0.3], [0.2, 0.9, 0.1]]);
        assert!(mmd(&x, &x, &KernelSpec::default()) < 1e-7);
    }

    #[test]
    fn mmd_symmetry() {
        let x = series(&[[0.0, 1.0, 0.2], [0.1, 1.1, 0.3], [0.2, 0.9, 0.1]]);
        let y = series(&[[1.0, 2.0, 0.0], [0.9, 2.2, 0.4], [1.3, 1.8, 0.2]]);
        let k = KernelSpec::default();
        assert_relative_eq!(mmd(&x, &y, &k), mmd(&y, &x, &k), epsilon = 1e-14);
        assert!(mmd(&x, &y, &k) > 0.0);
    }

    #[test]
    fn mmd_matches_double_sum_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<[f64; 3]> {
                (0..5)
                    .map(|_| {
                        [
                            rng.random_range(-1.0..1.0),
                            rng.random_range(0.0..10.0),
                            rng.random_range(-3.0..3.0),
                        ]
                    })
                    .collect()
            };
            let xr = draw(&mut rng);
            let yr = draw(&mut rng);
            let sigma = 1.7;
            let x = series(&xr);
            let y = series(&yr);
            let got = mmd(
                &x,
                &y,
                &KernelSpec {
                    bandwidth: Bandwidth::Fixed(sigma),
                },
            );
            // independent brute-force double sum
            let k = |a: &[f64; 3], b: &[f64; 3]| {
                let d2: f64 = (0..3).map(|d| (a[d] - b[d]).powi(2)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            };
            let n = xr.len() as f64;
            let m = yr.len() as f64;
            let mut xx = 0.0;
            let mut yy = 0.0;
            let mut xy = 0.0;
            for a in &xr {
                for b in &xr {
                    xx += k(a, b);
                }
            }
            for a in &yr {
                for b in &yr {
                    yy += k(a, b);
                }
            }
            for a in &xr {
                for b in &yr {
                    xy += k(a, b);
                }
            }
            let expected = (xx / (n * n) + yy / (m * m) - 2.0 * xy / (n * m))
                .max(0.0)
                .sqrt();
            assert!((got - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn select_top_n_behavior() {
        let cands: Vec<(u32, Fitness)> = vec![
            (0, Fitness::new(3.0, 0.0)),
            (1, Fitness::new(1.0, 0.0)),
            (2, Fitness::new(2.0, 0.0)),
        ];
        assert_eq!(select_top_n(&cands, 2), vec![0, 2]);
        assert_eq!(select_top_n(&cands, 10), vec![0, 2, 1]);
        let ties: Vec<(u32, Fitness)> = vec![
            (7, Fitness::new(1.0, 0.0)),
            (8, Fitness::new(1.0, 0.0)),
            (9, Fitness::new(1.0, 0.0)),
        ];
        assert_eq!(select_top_n(&ties, 2), vec![7, 8]);
    }
}
