//! Population-based search loop over scenario mutations, the strategy
//! variants, and campaign result types.

use crate::feedback::{self, Fitness, KernelSpec};
use crate::mutation::{self, MutationConfig, MutationContext, MutationOutcome};
use crate::oracle::{consistency_from_cells, covered_grids, ConsistencyVerdict, GridSpec};
use crate::scenario::{ego_path, Observation, RoadMap, Scenario, Violation};
use crate::sim::{
    replay_validation, simulate, PlannerInterface, SimConfig, SimError, TaskStatus,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("seed scenario rejected: {0:?}")]
    SeedRejected(Vec<Violation>),
    #[error("seed scenario does not complete its task ({0:?})")]
    SeedNotCompleted(TaskStatus),
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Search strategy. `Guided` is the full approach; the rest are baselines
/// and ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Non-invasive mutation + fitness-guided selection.
    #[serde(rename = "guided")]
    Guided,
    /// Unconstrained mutation + random selection.
    #[serde(rename = "random")]
    Random,
    /// Non-invasive mutation + random selection.
    #[serde(rename = "random-delta")]
    RandomDelta,
    /// Guided but fitness replaced by a uniform random value.
    #[serde(rename = "f-random")]
    FRandom,
    /// Guided but fitness replaced by path inconsistency (1 - similarity).
    #[serde(rename = "f-con")]
    FCon,
    /// Guided with the behavior term removed (path term only).
    #[serde(rename = "f-path")]
    FPath,
    /// Guided with the path term removed (behavior term only).
    #[serde(rename = "f-behavior")]
    FBehavior,
    /// Ablation: non-invasiveness constraint removed.
    #[serde(rename = "wo-cons")]
    WithoutCons,
    /// Ablation: the mutation window shrinks to one simulation step.
    #[serde(rename = "wo-mot")]
    WithoutMot,
    /// Ablation: only the adding operator is available.
    #[serde(rename = "wo-rem")]
    WithoutRem,
}

impl Strategy {
    pub const ALL: [Strategy; 10] = [
        Strategy::Guided,
        Strategy::Random,
        Strategy::RandomDelta,
        Strategy::FRandom,
        Strategy::FCon,
        Strategy::FPath,
        Strategy::FBehavior,
        Strategy::WithoutCons,
        Strategy::WithoutMot,
        Strategy::WithoutRem,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Guided => "guided",
            Strategy::Random => "random",
            Strategy::RandomDelta => "random-delta",
            Strategy::FRandom => "f-random",
            Strategy::FCon => "f-con",
            Strategy::FPath => "f-path",
            Strategy::FBehavior => "f-behavior",
            Strategy::WithoutCons => "wo-cons",
            Strategy::WithoutMot => "wo-mot",
            Strategy::WithoutRem => "wo-rem",
        }
    }

    fn uses_random_selection(&self) -> bool {
        matches!(
            self,
            Strategy::Random | Strategy::RandomDelta | Strategy::FRandom
        )
    }

    fn uses_unconstrained_mutation(&self) -> bool {
        matches!(self, Strategy::Random | Strategy::WithoutCons)
    }
}

impl FromStr for Strategy {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .iter()
            .find(|v| v.name() == s)
            .copied()
            .ok_or_else(|| EngineError::UnknownStrategy(s.to_string()))
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Budget {
    Iterations(usize),
    WallClockSecs(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub strategy: Strategy,
    pub budget: Budget,
    pub population_n: usize,
    /// Path-consistency threshold: similarity strictly above it passes.
    pub epsilon: f64,
    /// Grid cell size for the consistency check, meters.
    pub grid_cell: f64,
    pub mutation: MutationConfig,
    pub sim: SimConfig,
    pub kernel: KernelSpec,
    pub rng_seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Guided,
            budget: Budget::Iterations(100),
            population_n: 4,
            epsilon: 0.6,
            grid_cell: 2.0,
            mutation: MutationConfig::default(),
            sim: SimConfig::default(),
            kernel: KernelSpec::default(),
            rng_seed: 0,
        }
    }
}

/// One detected non-optimal decision: the planner completed the task but
/// abandoned the still-available original path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoDSRecord {
    pub iteration: usize,
    pub member: usize,
    pub scenario: Scenario,
    pub observation: Observation,
    pub verdict: ConsistencyVerdict,
    pub fitness: Fitness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub nods_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub strategy: Strategy,
    pub seed_id: String,
    pub rng_seed: u64,
    pub iterations_run: usize,
    /// Non-aborted mutations produced during the campaign.
    pub mutation_attempts: usize,
    /// How many of those kept the original path drivable (replay check).
    pub mutation_valid: usize,
    pub nods: Vec<NoDSRecord>,
    pub iteration_log: Vec<IterationStats>,
    #[serde(skip)]
    pub wall_s: f64,
}

impl CampaignResult {
    pub fn nods_count(&self) -> usize {
        self.nods.len()
    }

    /// Fraction of non-aborted mutations that passed replay validation.
    pub fn mutation_valid_pct(&self) -> f64 {
        if self.mutation_attempts == 0 {
            0.0
        } else {
            100.0 * self.mutation_valid as f64 / self.mutation_attempts as f64
        }
    }
}

/// splitmix64-style stream derivation so each (iteration, member) pair gets
/// an independent deterministic generator.
fn derive_rng(seed: u64, iteration: u64, member: u64) -> ChaCha8Rng {
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(iteration.wrapping_add(1)))
        .wrapping_add(0xbf58476d1ce4e5b9u64.wrapping_mul(member.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

struct Member {
    scenario: Scenario,
    obs: Observation,
    fitness: f64,
}

fn strategy_fitness(
    strategy: Strategy,
    seed_obs: &Observation,
    cand_obs: &Observation,
    verdict: &ConsistencyVerdict,
    kernel: &KernelSpec,
    rng: &mut ChaCha8Rng,
) -> (f64, Fitness) {
    match strategy {
        Strategy::Random | Strategy::RandomDelta => (0.0, Fitness::zero()),
        Strategy::FRandom => (rng.random::<f64>(), Fitness::zero()),
        Strategy::FCon => {
            let score = 1.0 - verdict.similarity;
            (score, Fitness::new(score, 0.0))
        }
        Strategy::FPath => {
            let f = feedback::fitness(seed_obs, cand_obs, kernel);
            (f.f_p, Fitness::new(f.f_p, 0.0))
        }
        Strategy::FBehavior => {
            let f = feedback::fitness(seed_obs, cand_obs, kernel);
            (f.f_b, Fitness::new(0.0, f.f_b))
        }
        _ => {
            let f = feedback::fitness(seed_obs, cand_obs, kernel);
            (f.total, f)
        }
    }
}

/// Run one search campaign over a validated seed scenario.
pub fn run_campaign(
    seed: &Scenario,
    map: &RoadMap,
    planner: &mut dyn PlannerInterface,
    cfg: &EngineConfig,
) -> Result<CampaignResult, EngineError> {
    let started = std::time::Instant::now();
    let violations = crate::scenario::validate_scenario(seed, map);
    if !violations.is_empty() {
        return Err(EngineError::SeedRejected(violations));
    }
    let (seed_obs, seed_outcome) = simulate(seed, map, planner, &cfg.sim, cfg.rng_seed)?;
    if seed_outcome.status != TaskStatus::Completed {
        return Err(EngineError::SeedNotCompleted(seed_outcome.status));
    }
    let seed_path = ego_path(&seed_obs);
    let grid = GridSpec::new(cfg.grid_cell, map.bounding_box_min());
    let seed_cells = covered_grids(&seed_path, &grid);

    let mut mcfg = cfg.mutation;
    match cfg.strategy {
        Strategy::WithoutMot => mcfg.delta_t = cfg.sim.sim_dt,
        Strategy::WithoutRem => mcfg.op_weights = [1.0, 0.0, 0.0],
        _ => {}
    }
    let ctx = MutationContext::with_seed(map, &seed_obs, &mcfg);

    let mut population: Vec<Member> = (0..cfg.population_n)
        .map(|_| Member {
            scenario: seed.clone(),
            obs: seed_obs.clone(),
            fitness: 0.0,
        })
        .collect();
    let mut result = CampaignResult {
        strategy: cfg.strategy,
        seed_id: seed.id.clone(),
        rng_seed: cfg.rng_seed,
        iterations_run: 0,
        mutation_attempts: 0,
        mutation_valid: 0,
        nods: Vec::new(),
        iteration_log: Vec::new(),
        wall_s: 0.0,
    };

    let mut iteration = 0usize;
    loop {
        match cfg.budget {
            Budget::Iterations(n) => {
                if iteration >= n {
                    break;
                }
            }
            Budget::WallClockSecs(s) => {
                if started.elapsed().as_secs_f64() >= s {
                    break;
                }
            }
        }

        let mut offspring: Vec<Member> = Vec::new();
        for m in 0..population.len() {
            let mut rng = derive_rng(cfg.rng_seed, iteration as u64, m as u64);
            let member = &population[m];
            let MutationOutcome {
                scenario: mutated,
                aborted,
                ..
            } = if cfg.strategy.uses_unconstrained_mutation() {
                mutation::random_mutate(&member.scenario, &ctx, &mcfg, &mut rng)
            } else {
                mutation::mutate(
                    &seed_obs,
                    &member.scenario,
                    &member.obs,
                    &ctx,
                    &mcfg,
                    &mut rng,
                )
            };
            if aborted {
                continue;
            }
            result.mutation_attempts += 1;
            let original_path_available = replay_validation(&mutated, &seed_path, map, &cfg.sim);
            if original_path_available {
                result.mutation_valid += 1;
            }
            let (obs, outcome) = simulate(&mutated, map, planner, &cfg.sim, cfg.rng_seed)?;
            if outcome.status != TaskStatus::Completed {
                continue;
            }
            let cand_path = ego_path(&obs);
            let cand_cells = covered_grids(&cand_path, &grid);
            let verdict = match consistency_from_cells(&seed_cells, &cand_cells, cfg.epsilon) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let (score, fitness) = strategy_fitness(
                cfg.strategy,
                &seed_obs,
                &obs,
                &verdict,
                &cfg.kernel,
                &mut rng,
            );
            if !verdict.consistent {
                // a path change only demonstrates a non-optimal decision if
                // the original path is still available in the mutated scene
                if !original_path_available {
                    continue;
                }
                result.nods.push(NoDSRecord {
                    iteration,
                    member: m,
                    scenario: mutated,
                    observation: obs,
                    verdict,
                    fitness,
                });
            } else {
                offspring.push(Member {
                    scenario: mutated,
                    obs,
                    fitness: score,
                });
            }
        }

        population.extend(offspring);
        if cfg.strategy.uses_random_selection() {
            let mut rng = derive_rng(cfg.rng_seed, iteration as u64, u64::MAX);
            // partial Fisher-Yates keeps exactly population_n members
            let keep = cfg.population_n.min(population.len());
            for i in 0..keep {
                let j = rng.random_range(i..population.len());
                population.swap(i, j);
            }
            population.truncate(keep);
        } else {
            let scores: Vec<f64> = population.iter().map(|m| m.fitness).collect();
            let keep = feedback::select_top_n_indices(&scores, cfg.population_n);
            let mut picked: Vec<Member> = Vec::with_capacity(keep.len());
            // drain in descending index order so earlier indices stay valid
            let mut order = keep.clone();
            order.sort_unstable_by(|a, b| b.cmp(a));
            let mut taken: Vec<(usize, Member)> = Vec::with_capacity(order.len());
            for idx in order {
                taken.push((idx, population.swap_remove(idx)));
            }
            // swap_remove disturbs order; restore the selection's order
            taken.sort_by_key(|(idx, _)| keep.iter().position(|k| k == idx).unwrap());
            for (_, m) in taken {
                picked.push(m);
            }
            population = picked;
        }

        let best = population
            .iter()
            .map(|m| m.fitness)
            .fold(f64::NEG_INFINITY, f64::max);
        let mean = if population.is_empty() {
            0.0
        } else {
            population.iter().map(|m| m.fitness).sum::<f64>() / population.len() as f64
        };
        result.iteration_log.push(IterationStats {
            iteration,
            best_fitness: if best.is_finite() { best } else { 0.0 },
            mean_fitness: mean,
            nods_total: result.nods.len(),
        });
        iteration += 1;
    }

    result.iterations_run = iteration;
    result.wall_s = started.elapsed().as_secs_f64();
    Ok(result)
}

/// One row of a strategy comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CampaignJob {
    pub strategy: Strategy,
    pub rng_seed: u64,
}

/// Run a batch of campaigns in parallel (campaigns are independent; each is
/// internally sequential and deterministic). `make_planner` builds a fresh
/// planner per campaign.
pub fn compare_strategies<F>(
    seed: &Scenario,
    map: &RoadMap,
    make_planner: F,
    jobs: &[CampaignJob],
    base: &EngineConfig,
) -> Result<Vec<CampaignResult>, EngineError>
where
    F: Fn() -> Box<dyn PlannerInterface + Send> + Sync,
{
    jobs.par_iter()
        .map(|job| {
            let mut cfg = base.clone();
            cfg.strategy = job.strategy;
            cfg.rng_seed = job.rng_seed;
            let mut planner = make_planner();
            run_campaign(seed, map, planner.as_mut(), &cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{GridPlanner, PlannerPreset};

    fn short_cfg(strategy: Strategy, rng_seed: u64) -> EngineConfig {
        EngineConfig {
            strategy,
            budget: Budget::Iterations(3),
            rng_seed,
            ..Default::default()
        }
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!(matches!(
            "bogus".parse::<Strategy>(),
            Err(EngineError::UnknownStrategy(_))
        ));
    }

    #[test]
    fn invalid_seed_is_rejected() {
        let map = crate::sim::tests::straight_map();
        let mut seed = crate::sim::tests::straight_scenario();
        seed.map_id = "other-map".into();
        let mut planner = GridPlanner::new(PlannerPreset::Default);
        let err = run_campaign(&seed, &map, &mut planner, &short_cfg(Strategy::Guided, 0));
        assert!(matches!(err, Err(EngineError::SeedRejected(_))));
    }

    #[test]
    fn campaign_runs_and_population_stays_bounded() {
        let map = crate::sim::tests::straight_map();
        let seed = crate::sim::tests::straight_scenario();
        let mut planner = GridPlanner::new(PlannerPreset::Default);
        let cfg = short_cfg(Strategy::Guided, 7);
        let result = run_campaign(&seed, &map, &mut planner, &cfg).unwrap();
        assert_eq!(result.iterations_run, 3);
        assert_eq!(result.iteration_log.len(), 3);
        assert!(result.mutation_attempts > 0);
        assert!(result.mutation_valid <= result.mutation_attempts);
        for rec in &result.nods {
            assert!(!rec.verdict.consistent);
        }
    }

    #[test]
    fn campaigns_are_deterministic() {
        let map = crate::sim::tests::straight_map();
        let seed = crate::sim::tests::straight_scenario();
        let cfg = short_cfg(Strategy::Guided, 11);
        let run = || {
            let mut planner = GridPlanner::new(PlannerPreset::Default);
            serde_json::to_string(&run_campaign(&seed, &map, &mut planner, &cfg).unwrap()).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn all_strategies_execute() {
        let map = crate::sim::tests::straight_map();
        let seed = crate::sim::tests::straight_scenario();
        for strategy in Strategy::ALL {
            let mut planner = GridPlanner::new(PlannerPreset::Default);
            let cfg = EngineConfig {
                budget: Budget::Iterations(1),
                ..short_cfg(strategy, 1)
            };
            let result = run_campaign(&seed, &map, &mut planner, &cfg).unwrap();
            assert_eq!(result.strategy, strategy, "strategy {strategy} failed");
        }
    }

    #[test]
    fn compare_runs_jobs_in_order() {
        let map = crate::sim::tests::straight_map();
        let seed = crate::sim::tests::straight_scenario();
        let jobs = [
            CampaignJob {
                strategy: Strategy::Guided,
                rng_seed: 1,
            },
            CampaignJob {
                strategy: Strategy::Random,
                rng_seed: 2,
            },
        ];
        let base = EngineConfig {
            budget: Budget::Iterations(2),
            ..EngineConfig::default()
        };
        let results = compare_strategies(
            &seed,
            &map,
            || Box::new(GridPlanner::new(PlannerPreset::Default)),
            &jobs,
            &base,
        )
        .unwrap();
        assert_eq!(results.len(), 2);
        assert_eq!(results[0].strategy, Strategy::Guided);
        assert_eq!(results[1].strategy, Strategy::Random);
        assert_eq!(results[1].rng_seed, 2);
    }
}
