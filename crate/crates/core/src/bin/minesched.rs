//! Command-line front end. Data goes to files and standard output, progress
//! to standard error. Exit codes: 0 success, 1 data error, 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use minesched::block_model::{
    derive_precedence, generate_synthetic_deposit, load_block_model, load_calendar, load_economics, load_samples,
    save_block_model, save_calendar, save_economics, save_samples, BlockModel, Dims, SlopePattern, SyntheticConfig,
};
use minesched::grade_ensemble::{
    aggregate, build_ensemble, load_ensemble, load_uncertainty, save_ensemble, save_uncertainty, uncertainty_field,
    InterpolationMethod, InterpolatorConfig,
};
use minesched::pipeline::{self, PipelineConfig, StrategyRun};
use minesched::pit::{default_revenue_factors, load_shells, nested_shells, save_shells};
use minesched::scheduler::{
    brute_force_best, evolve, load_mining_plan, save_chromosome, save_schedule, save_trace, validate, EaConfig,
    SchedulingProblem, BRUTE_FORCE_LIMIT,
};
use minesched::staging::{
    lazy_staging, levelled_staging, load_staging, save_staging, worst_case_staging, Staging, StagingStrategy,
    DEFAULT_STAGES, DEFAULT_STD_THRESHOLD,
};
use minesched::uncertainty::{format_money, summary_statement, write_reports};

#[derive(Parser)]
#[command(name = "minesched", version, about = "Open-pit scheduling under grade uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic deposit, drill samples, calendar and economics.
    Gen(GenArgs),
    /// Interpolate an ensemble of block models from drill samples.
    Ensemble(EnsembleArgs),
    /// Nested pit shells on a block model.
    Pit(PitArgs),
    /// Partition the ultimate pit into stages.
    Stage(StageArgs),
    /// Optimise a stage/bench extraction order.
    Schedule(ScheduleArgs),
    /// Replay a schedule on every ensemble member and write the reports.
    Evaluate(EvaluateArgs),
    /// Run the whole pipeline for every staging strategy.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        matches!(self, Switch::On)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Slope {
    Five,
    Nine,
}

impl From<Slope> for SlopePattern {
    fn from(s: Slope) -> Self {
        match s {
            Slope::Five => SlopePattern::FivePoint,
            Slope::Nine => SlopePattern::NinePoint,
        }
    }
}

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if parts.len() != 3 {
        return Err(format!("expected NXxNYxNZ, found `{s}`"));
    }
    let mut v = [0usize; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse().map_err(|_| format!("`{p}` is not a dimension"))?;
        if *slot == 0 {
            return Err("every dimension must be at least 1".to_string());
        }
    }
    Ok(Dims::new(v[0], v[1], v[2]))
}

fn parse_strategy(s: &str) -> std::result::Result<StagingStrategy, String> {
    s.parse().map_err(|e: minesched::Error| e.to_string())
}

fn parse_factors(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number")))
        .collect()
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_parser = parse_dims, default_value = "20x20x10")]
    dims: Dims,
    #[arg(long, default_value_t = 25)]
    drillholes: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Block model supplying the grid geometry.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    members: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "idw")]
    method: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PitArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    economics: PathBuf,
    /// Comma-separated, strictly increasing revenue factors.
    #[arg(long, value_parser = parse_factors)]
    factors: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "nine")]
    slope: Slope,
    /// Output shells CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StageArgs {
    #[arg(long, value_parser = parse_strategy)]
    strategy: StagingStrategy,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    shells: PathBuf,
    #[arg(long)]
    uncertainty: Option<PathBuf>,
    #[arg(long)]
    economics: Option<PathBuf>,
    /// Existing staging, for `--strategy file`.
    #[arg(long)]
    staging: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STAGES)]
    stages: usize,
    #[arg(long, default_value_t = DEFAULT_STD_THRESHOLD)]
    std_threshold: f64,
    /// Output staging CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct EaArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    generations: usize,
    #[arg(long, default_value_t = 50)]
    population: usize,
}

impl EaArgs {
    fn config(&self) -> EaConfig {
        EaConfig {
            population_size: self.population,
            generations: self.generations,
            seed: self.seed,
            ..EaConfig::default()
        }
    }
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long)]
    staging: PathBuf,
    #[arg(long)]
    calendar: PathBuf,
    #[arg(long)]
    economics: PathBuf,
    #[arg(long, value_enum, default_value = "nine")]
    slope: Slope,
    #[arg(long, value_enum, default_value = "on")]
    stockpile: Switch,
}

impl ProblemArgs {
    fn load(&self, model: &BlockModel) -> Result<SchedulingProblem> {
        let econ = load_economics(&self.economics)?;
        let calendar = load_calendar(&self.calendar)?;
        let staging = load_staging(&self.staging, model, None)?;
        let precedence = derive_precedence(model, self.slope.into());
        Ok(SchedulingProblem::new(model, &staging, &precedence, &calendar, &econ, self.stockpile.on())?)
    }
}

#[derive(Args)]
struct ScheduleArgs {
    /// Aggregate block model to optimise on.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    ea: EaArgs,
    /// Also enumerate every order (small instances only) and report the optimum.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    schedule: PathBuf,
    /// Ensemble directory; its aggregate defines the units.
    #[arg(long)]
    ensemble: PathBuf,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_parser = parse_dims, default_value = "20x20x10")]
    dims: Dims,
    #[arg(long, default_value_t = 25)]
    drillholes: usize,
    #[arg(long, default_value_t = 10)]
    members: usize,
    #[arg(long, default_value_t = DEFAULT_STAGES)]
    stages: usize,
    #[arg(long, default_value_t = DEFAULT_STD_THRESHOLD)]
    std_threshold: f64,
    #[arg(long, default_value_t = 200)]
    generations: usize,
    #[arg(long, default_value_t = 50)]
    population: usize,
    #[arg(long, value_enum, default_value = "on")]
    stockpile: Switch,
    /// Staging file for the expected strategy; omitted means it is skipped.
    #[arg(long)]
    staging: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn gen(args: &GenArgs) -> Result<()> {
    let deposit = generate_synthetic_deposit(&SyntheticConfig::new(args.seed, args.dims, args.drillholes))?;
    let econ = pipeline::synthetic_economics(&deposit.truth.domains());
    let calendar = pipeline::synthetic_calendar(&deposit.truth)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    save_block_model(&deposit.truth, &args.out.join("truth.csv"))?;
    save_samples(&deposit.samples, &args.out.join("samples.csv"))?;
    save_calendar(&calendar, &args.out.join("calendar.csv"))?;
    save_economics(&econ, &args.out.join("economics.txt"))?;
    info!(
        "deposit {} with {} samples written to {}",
        args.dims,
        deposit.samples.len(),
        args.out.display()
    );
    Ok(())
}

fn ensemble(args: &EnsembleArgs) -> Result<()> {
    let samples = load_samples(&args.samples)?;
    let geometry = load_block_model(&args.model)?;
    let config = InterpolatorConfig {
        method: args.method.parse::<InterpolationMethod>()?,
        ..InterpolatorConfig::default()
    };
    info!("interpolating {} members from {} samples", args.members, samples.len());
    let e = build_ensemble(&samples, &config, args.members, args.seed, &geometry)?;
    let agg = aggregate(&e);
    save_ensemble(&e, &agg, &args.out)?;
    save_uncertainty(&uncertainty_field(&e, &agg), &agg, &args.out.join("uncertainty.csv"))?;
    Ok(())
}

fn pit(args: &PitArgs) -> Result<()> {
    let model = load_block_model(&args.model)?;
    let econ = load_economics(&args.economics)?;
    let factors = args.factors.clone().unwrap_or_else(default_revenue_factors);
    let precedence = derive_precedence(&model, args.slope.into());
    let shells = nested_shells(&model, &econ, &precedence, &factors)?;
    let pit = shells.pit_blocks();
    if pit.is_empty() {
        warn!("the ultimate pit is empty: no block pays for its overburden");
    }
    info!("ultimate pit of {} blocks in {} shells", pit.len(), shells.n_shells());
    save_shells(&shells, &model, &args.out)?;
    println!("pit_blocks={}", pit.len());
    Ok(())
}

fn stage(args: &StageArgs) -> Result<()> {
    let model = load_block_model(&args.model)?;
    let shells = load_shells(&args.shells, &model)?;
    let pit = shells.up_to(shells.n_shells());
    let needs = |what: &Option<PathBuf>, flag: &str| -> Result<PathBuf> {
        match what {
            Some(p) => Ok(p.clone()),
            None => bail!("strategy {} needs --{flag}", args.strategy),
        }
    };
    let staging = match args.strategy {
        StagingStrategy::Expected => load_staging(&needs(&args.staging, "staging")?, &model, Some(&pit))?,
        StagingStrategy::Lazy => lazy_staging(&shells, &model, args.stages)?,
        s => {
            let uncertainty = load_uncertainty(&needs(&args.uncertainty, "uncertainty")?, &model)?;
            let econ = load_economics(&needs(&args.economics, "economics")?)?;
            if s == StagingStrategy::WorstCase {
                worst_case_staging(&shells, &model, &uncertainty, &econ, args.stages, args.std_threshold)?
            } else {
                levelled_staging(&shells, &model, &uncertainty, &econ, args.stages)?
            }
        }
    };
    if staging.fallback {
        warn!("too little uncertain ore to isolate; staged lazily");
    }
    info!("{} staging: stage tonnages {:?}", args.strategy, staging.stage_tonnages(&model));
    save_staging(&staging, &model, &args.out)?;
    Ok(())
}

fn schedule(args: &ScheduleArgs) -> Result<()> {
    let model = load_block_model(&args.model)?;
    let problem = args.problem.load(&model)?;
    info!("evolving an order over {} units", problem.units.len());
    let evolution = evolve(&problem, &args.ea.config())?;
    let violations = validate(&evolution.schedule, &problem);
    if !violations.is_empty() {
        bail!("optimised schedule violates {} constraints, first: {:?}", violations.len(), violations[0]);
    }
    write_schedule_files(&args.out, &evolution, &problem)?;
    println!("npv={}", evolution.npv);
    if args.oracle {
        let (best, npv) = brute_force_best(&problem, BRUTE_FORCE_LIMIT)?;
        save_chromosome(&best, &args.out.join("oracle_chromosome.csv"))?;
        println!("oracle_npv={npv}");
        let gap = (npv - evolution.npv).abs() / npv.abs().max(1.0);
        println!("oracle_match={}", gap <= 1e-9);
    }
    Ok(())
}

fn write_schedule_files(dir: &Path, evolution: &minesched::scheduler::Evolution, problem: &SchedulingProblem) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    save_schedule(&evolution.schedule, &problem.units, &problem.economics, &dir.join("schedule.csv"))?;
    save_chromosome(&evolution.best, &dir.join("chromosome.csv"))?;
    save_trace(&evolution.trace, &dir.join("trace.csv"))?;
    Ok(())
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let (e, agg) = load_ensemble(&args.ensemble)?;
    let problem = args.problem.load(&agg)?;
    let econ = load_economics(&args.problem.economics)?;
    let plan = load_mining_plan(&args.schedule, &problem.units, &problem.calendar)?;
    info!("replaying on the aggregate and {} members", e.len());
    let ev = pipeline::evaluate(&plan, &problem, &agg, &e.members, &econ)?;
    write_reports(&args.out, &ev.aggregate, &ev.result, &ev.stats, &ev.remaining, &ev.summary)?;
    println!("{}", summary_statement(&ev.summary));
    Ok(())
}

fn write_run(dir: &Path, run: &StrategyRun, model: &BlockModel) -> Result<()> {
    write_schedule_files(dir, &run.evolution, &run.problem)?;
    save_staging(&run.staging, model, &dir.join("staging.csv"))?;
    let ev = &run.evaluation;
    write_reports(dir, &ev.aggregate, &ev.result, &ev.stats, &ev.remaining, &ev.summary)?;
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<()> {
    let mut config = PipelineConfig::new(args.seed, args.dims);
    config.drillholes = args.drillholes;
    config.members = args.members;
    config.stages = args.stages;
    config.std_threshold = args.std_threshold;
    config.ea.generations = args.generations;
    config.ea.population_size = args.population;
    config.stockpiling = args.stockpile.on();
    info!("preparing seed {} on {}", args.seed, args.dims);
    let prepared = pipeline::prepare(&config)?;
    let expected: Option<Staging> = match &args.staging {
        Some(p) => Some(load_staging(p, &prepared.aggregate, Some(&prepared.shells.up_to(prepared.shells.n_shells())))?),
        None => None,
    };
    let runs = pipeline::compare(&prepared, &config, expected.as_ref())?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for run in &runs {
        write_run(&args.out.join(run.strategy.name()), run, &prepared.aggregate)?;
        info!("{}: optimiser NPV {}", run.strategy, format_money(run.evolution.npv));
    }
    let text = pipeline::comparison_text(&runs);
    std::fs::write(args.out.join("comparison.txt"), &text)
        .with_context(|| format!("writing {}", args.out.join("comparison.txt").display()))?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Ensemble(a) => ensemble(a),
        Command::Pit(a) => pit(a),
        Command::Stage(a) => stage(a),
        Command::Schedule(a) => schedule(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
