//! Command-line interface: campaign runs, seed validation, path replay,
//! rendering, and strategy comparison.

mod render;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pathdrift_core::engine::{
    compare_strategies, run_campaign, Budget, CampaignJob, EngineConfig, Strategy,
};
use pathdrift_core::oracle::{covered_grids, GridSpec};
use pathdrift_core::scenario::{
    ego_path, load_map, load_scenario, validate_scenario, DrivingPath, Observation, RoadMap,
    Scenario,
};
use pathdrift_core::sim::{
    replay_validation, simulate, GridPlanner, PlannerPreset, TaskStatus,
};
use render::{render_svg, RenderOptions};
use serde::Deserialize;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "pathdrift", about = "Search-based testing of path-planning decisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one search campaign and write result.json
    Run(CommonArgs),
    /// Simulate a candidate seed scenario and report whether it qualifies
    ValidateSeed(CommonArgs),
    /// Replay a recorded driving path through a (mutated) scenario
    Replay(ReplayArgs),
    /// Render a scenario (and optional observations) to SVG
    Render(RenderArgs),
    /// Run several strategies over several rng seeds and write a CSV table
    Compare(CompareArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Road map JSON file
    #[arg(long)]
    map: Option<PathBuf>,
    /// Seed scenario JSON file
    #[arg(long)]
    seed_scenario: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Search strategy (guided, random, random-delta, f-random, f-con,
    /// f-path, f-behavior, wo-cons, wo-mot, wo-rem)
    #[arg(long)]
    strategy: Option<String>,
    /// Iteration budget
    #[arg(long)]
    iterations: Option<usize>,
    /// Population size
    #[arg(long)]
    population: Option<usize>,
    /// Path-consistency threshold
    #[arg(long)]
    epsilon: Option<f64>,
    /// Consistency grid cell size, meters
    #[arg(long)]
    grid_size: Option<f64>,
    /// Mutation window length, seconds
    #[arg(long)]
    delta_t: Option<f64>,
    /// RNG seed
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Planner preset: default | timid
    #[arg(long)]
    planner_preset: Option<String>,
    /// Worker threads for parallel comparisons
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON config file; command-line flags take precedence over it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Recorded driving path JSON (as written by validate-seed)
    #[arg(long)]
    path: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Observation JSON files whose ego paths are drawn (at most 3)
    #[arg(long)]
    observation: Vec<PathBuf>,
    /// Draw the covered-grid overlay of each path
    #[arg(long)]
    grid_overlay: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Strategies to compare; defaults to all of them
    #[arg(long)]
    strategies: Vec<String>,
    /// Campaign repetitions per strategy (rng seeds rng_seed..rng_seed+N)
    #[arg(long, default_value_t = 5)]
    repeats: u64,
}

/// File-backed defaults; every field optional, flags win.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    map: Option<PathBuf>,
    seed_scenario: Option<PathBuf>,
    out: Option<PathBuf>,
    strategy: Option<String>,
    iterations: Option<usize>,
    population: Option<usize>,
    epsilon: Option<f64>,
    grid_size: Option<f64>,
    delta_t: Option<f64>,
    rng_seed: Option<u64>,
    planner_preset: Option<String>,
    jobs: Option<usize>,
}

/// Fully resolved configuration (CLI > file > defaults).
struct Resolved {
    map: PathBuf,
    seed_scenario: PathBuf,
    out: PathBuf,
    engine: EngineConfig,
    preset: PlannerPreset,
    jobs: usize,
}

impl CommonArgs {
    fn resolve(&self) -> Result<Resolved> {
        let file: FileConfig = match &self.config {
            Some(path) => serde_json::from_str(
                &fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?,
            )
            .with_context(|| format!("parsing config {}", path.display()))?,
            None => FileConfig::default(),
        };
        let map = self
            .map
            .clone()
            .or(file.map)
            .context("--map is required")?;
        let seed_scenario = self
            .seed_scenario
            .clone()
            .or(file.seed_scenario)
            .context("--seed-scenario is required")?;
        let out = self
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("out"));
        let defaults = EngineConfig::default();
        let strategy = match self.strategy.clone().or(file.strategy) {
            Some(s) => s.parse::<Strategy>()?,
            None => defaults.strategy,
        };
        let preset = match self
            .planner_preset
            .clone()
            .or(file.planner_preset)
            .as_deref()
        {
            None | Some("default") => PlannerPreset::Default,
            Some("timid") => PlannerPreset::Timid,
            Some(other) => bail!("unknown planner preset `{other}`"),
        };
        let mut engine = EngineConfig {
            strategy,
            budget: Budget::Iterations(
                self.iterations.or(file.iterations).unwrap_or(match defaults.budget {
                    Budget::Iterations(n) => n,
                    Budget::WallClockSecs(_) => 100,
                }),
            ),
            population_n: self.population.or(file.population).unwrap_or(defaults.population_n),
            epsilon: self.epsilon.or(file.epsilon).unwrap_or(defaults.epsilon),
            grid_cell: self.grid_size.or(file.grid_size).unwrap_or(defaults.grid_cell),
            rng_seed: self.rng_seed.or(file.rng_seed).unwrap_or(defaults.rng_seed),
            ..defaults
        };
        if let Some(dt) = self.delta_t.or(file.delta_t) {
            engine.mutation.delta_t = dt;
        }
        Ok(Resolved {
            map,
            seed_scenario,
            out,
            engine,
            preset,
            jobs: self.jobs.or(file.jobs).unwrap_or(1),
        })
    }
}

fn load_inputs(cfg: &Resolved) -> Result<(Scenario, RoadMap)> {
    let seed = load_scenario(
        &fs::read_to_string(&cfg.seed_scenario)
            .with_context(|| format!("reading {}", cfg.seed_scenario.display()))?,
    )?;
    let map = load_map(
        &fs::read_to_string(&cfg.map).with_context(|| format!("reading {}", cfg.map.display()))?,
    )?;
    Ok((seed, map))
}

fn ensure_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_run(args: &CommonArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let (seed, map) = load_inputs(&cfg)?;
    ensure_out(&cfg.out)?;
    let mut planner = GridPlanner::new(cfg.preset);
    let result = run_campaign(&seed, &map, &mut planner, &cfg.engine)?;
    let path = cfg.out.join("result.json");
    fs::write(&path, serde_json::to_string_pretty(&result)? + "\n")?;
    println!(
        "campaign: {} iterations, {} NoDS, %mutation {:.1}, wrote {}",
        result.iterations_run,
        result.nods_count(),
        result.mutation_valid_pct(),
        path.display()
    );
    Ok(())
}

fn cmd_validate_seed(args: &CommonArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let (seed, map) = load_inputs(&cfg)?;
    ensure_out(&cfg.out)?;
    let violations = validate_scenario(&seed, &map);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!(
                "violation [{}]: {}",
                v.participant.as_deref().unwrap_or("scenario"),
                v.message
            );
        }
        bail!("{} violation(s)", violations.len());
    }
    let mut planner = GridPlanner::new(cfg.preset);
    let (obs, outcome) = simulate(&seed, &map, &mut planner, &cfg.engine.sim, cfg.engine.rng_seed)?;
    let path = ego_path(&obs);
    let spec = GridSpec::new(cfg.engine.grid_cell, map.bounding_box_min());
    let cells = covered_grids(&path, &spec);
    fs::write(
        cfg.out.join("path.json"),
        serde_json::to_string_pretty(&path)? + "\n",
    )?;
    fs::write(
        cfg.out.join("observation.json"),
        serde_json::to_string_pretty(&obs)? + "\n",
    )?;
    let svg = render_svg(
        &map,
        Some(&seed),
        &[("#3b82f6", &path)],
        &RenderOptions {
            grid_overlay: true,
            grid_cell: cfg.engine.grid_cell,
        },
    );
    fs::write(cfg.out.join("seed.svg"), svg)?;
    println!(
        "outcome: {:?} after {:.1}s; {} covered grid cells; artifacts in {}",
        outcome.status,
        outcome.elapsed,
        cells.cells.len(),
        cfg.out.display()
    );
    if outcome.status != TaskStatus::Completed {
        bail!("seed did not complete its task");
    }
    Ok(())
}

fn cmd_replay(args: &ReplayArgs) -> Result<()> {
    let cfg = args.common.resolve()?;
    let (scenario, map) = load_inputs(&cfg)?;
    let path: DrivingPath = serde_json::from_str(
        &fs::read_to_string(&args.path)
            .with_context(|| format!("reading {}", args.path.display()))?,
    )?;
    let ok = replay_validation(&scenario, &path, &map, &cfg.engine.sim);
    println!(
        "original path {} traversable in `{}`",
        if ok { "remains" } else { "is NOT" },
        scenario.id
    );
    if !ok {
        bail!("replay validation failed");
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> Result<()> {
    let cfg = args.common.resolve()?;
    let (scenario, map) = load_inputs(&cfg)?;
    ensure_out(&cfg.out)?;
    let mut paths_owned: Vec<DrivingPath> = Vec::new();
    for obs_file in &args.observation {
        let obs: Observation = serde_json::from_str(
            &fs::read_to_string(obs_file)
                .with_context(|| format!("reading {}", obs_file.display()))?,
        )?;
        paths_owned.push(ego_path(&obs));
    }
    let colors = ["#3b82f6", "#ef4444", "#10b981"];
    let paths: Vec<(&str, &DrivingPath)> = paths_owned
        .iter()
        .enumerate()
        .map(|(k, p)| (colors[k % colors.len()], p))
        .collect();
    let svg = render_svg(
        &map,
        Some(&scenario),
        &paths,
        &RenderOptions {
            grid_overlay: args.grid_overlay,
            grid_cell: cfg.engine.grid_cell,
        },
    );
    let out = cfg.out.join(format!("{}.svg", scenario.id));
    fs::write(&out, svg)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let cfg = args.common.resolve()?;
    let (seed, map) = load_inputs(&cfg)?;
    ensure_out(&cfg.out)?;
    let strategies: Vec<Strategy> = if args.strategies.is_empty() {
        Strategy::ALL.to_vec()
    } else {
        args.strategies
            .iter()
            .map(|s| s.parse::<Strategy>().map_err(Into::into))
            .collect::<Result<_>>()?
    };
    let jobs: Vec<CampaignJob> = strategies
        .iter()
        .flat_map(|&strategy| {
            (0..args.repeats).map(move |r| CampaignJob {
                strategy,
                rng_seed: cfg.engine.rng_seed + r,
            })
        })
        .collect();
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()?
        .install(|| -> Result<()> {
            let preset = cfg.preset;
            let results = compare_strategies(
                &seed,
                &map,
                || Box::new(GridPlanner::new(preset)),
                &jobs,
                &cfg.engine,
            )?;
            let csv_path = cfg.out.join("compare.csv");
            let mut w = csv::Writer::from_path(&csv_path)?;
            w.write_record([
                "strategy",
                "seed_id",
                "rng_seed",
                "nods_count",
                "mutation_valid_pct",
                "wall_s",
            ])?;
            for r in &results {
                w.write_record([
                    r.strategy.name().to_string(),
                    r.seed_id.clone(),
                    r.rng_seed.to_string(),
                    r.nods_count().to_string(),
                    format!("{:.2}", r.mutation_valid_pct()),
                    format!("{:.2}", r.wall_s),
                ])?;
            }
            w.flush()?;
            println!("wrote {}", csv_path.display());
            Ok(())
        })
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(&args),
        Command::ValidateSeed(args) => cmd_validate_seed(&args),
        Command::Replay(args) => cmd_replay(&args),
        Command::Render(args) => cmd_render(&args),
        Command::Compare(args) => cmd_compare(&args),
    }
}
