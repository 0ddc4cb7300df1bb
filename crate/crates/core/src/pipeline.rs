//! End-to-end runs: synthetic deposit, ensemble, pit, staging, schedule
//! and replay, in process. The CLI composes the same steps through files.

use std::collections::BTreeMap;

use crate::block_model::{
    derive_precedence, generate_synthetic_deposit, BlockModel, Calendar, DrillSample, EconomicModel,
    PrecedenceGraph, SlopePattern, SyntheticConfig,
};
use crate::error::{Error, Result};
use crate::grade_ensemble::{aggregate, build_ensemble, uncertainty_field, Ensemble, InterpolatorConfig, UncertaintyField};
use crate::pit::{default_revenue_factors, nested_shells, ShellAssignment};
use crate::scheduler::{evolve, EaConfig, Evolution, MiningPlan, SchedulingProblem};
use crate::staging::{lazy_staging, levelled_staging, worst_case_staging, Staging, StagingStrategy};
use crate::uncertainty::{
    period_stats, remaining_npv, replay_ensemble, summary, PeriodStats, RemainingNpv, ReplayResult, Summary,
};

/// Discount rate used for generated data sets.
pub const SYNTHETIC_DISCOUNT_RATE: f64 = 0.10;

/// Copper economics with recoveries falling linearly from 0.92 in the
/// first domain to 0.75 in the last.
pub fn synthetic_economics(domains: &[u32]) -> EconomicModel {
    let n = domains.len();
    let recoveries: BTreeMap<u32, f64> = domains
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let share = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            (d, 0.92 - 0.17 * share)
        })
        .collect();
    EconomicModel::copper(recoveries, SYNTHETIC_DISCOUNT_RATE)
}

/// Twenty periods mining a twenty-fifth of the model each; the plant
/// takes a fifth of that, rising to 36% from period 9.
pub fn synthetic_calendar(model: &BlockModel) -> Result<Calendar> {
    let mining = model.total_tonnage() / 25.0;
    Calendar::stepped(20, mining, 0.2 * mining, 0.36 * mining, 9)
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub seed: u64,
    pub dims: crate::block_model::Dims,
    pub drillholes: usize,
    pub members: usize,
    pub interpolator: InterpolatorConfig,
    pub revenue_factors: Vec<f64>,
    pub stages: usize,
    pub std_threshold: f64,
    pub slope: SlopePattern,
    pub ea: EaConfig,
    pub stockpiling: bool,
}

impl PipelineConfig {
    pub fn new(seed: u64, dims: crate::block_model::Dims) -> Self {
        PipelineConfig {
            seed,
            dims,
            drillholes: 25,
            members: 10,
            interpolator: InterpolatorConfig::default(),
            revenue_factors: default_revenue_factors(),
            stages: crate::staging::DEFAULT_STAGES,
            std_threshold: crate::staging::DEFAULT_STD_THRESHOLD,
            slope: SlopePattern::NinePoint,
            ea: EaConfig {
                seed,
                ..EaConfig::default()
            },
            stockpiling: true,
        }
    }
}

/// Everything up to and including the pit shells.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub truth: BlockModel,
    pub samples: Vec<DrillSample>,
    pub ensemble: Ensemble,
    pub aggregate: BlockModel,
    pub uncertainty: UncertaintyField,
    pub econ: EconomicModel,
    pub calendar: Calendar,
    pub precedence: PrecedenceGraph,
    pub shells: ShellAssignment,
}

pub fn prepare(config: &PipelineConfig) -> Result<Prepared> {
    let deposit = generate_synthetic_deposit(&SyntheticConfig::new(config.seed, config.dims, config.drillholes))?;
    let econ = synthetic_economics(&deposit.truth.domains());
    let calendar = synthetic_calendar(&deposit.truth)?;
    let ensemble = build_ensemble(&deposit.samples, &config.interpolator, config.members, config.seed, &deposit.truth)?;
    let agg = aggregate(&ensemble);
    let uncertainty = uncertainty_field(&ensemble, &agg);
    let precedence = derive_precedence(&agg, config.slope);
    let shells = nested_shells(&agg, &econ, &precedence, &config.revenue_factors)?;
    Ok(Prepared {
        truth: deposit.truth,
        samples: deposit.samples,
        ensemble,
        aggregate: agg,
        uncertainty,
        econ,
        calendar,
        precedence,
        shells,
    })
}

/// Stages the pit with one of the generated strategies; `Expected` needs
/// the staging supplied by the caller.
pub fn stage_pit(
    strategy: StagingStrategy,
    prepared: &Prepared,
    k: usize,
    std_threshold: f64,
    expected: Option<&Staging>,
) -> Result<Staging> {
    let p = prepared;
    match strategy {
        StagingStrategy::Expected => expected
            .cloned()
            .ok_or_else(|| Error::Staging("the expected strategy needs a staging file".to_string())),
        StagingStrategy::Lazy => lazy_staging(&p.shells, &p.aggregate, k),
        StagingStrategy::WorstCase => worst_case_staging(&p.shells, &p.aggregate, &p.uncertainty, &p.econ, k, std_threshold),
        StagingStrategy::Levelled => levelled_staging(&p.shells, &p.aggregate, &p.uncertainty, &p.econ, k),
    }
}

/// Replay of one plan on the aggregate and on every member, with reports.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub aggregate: Vec<f64>,
    pub result: ReplayResult,
    pub stats: Vec<PeriodStats>,
    pub remaining: RemainingNpv,
    pub summary: Summary,
}

pub fn evaluate(
    plan: &MiningPlan,
    problem: &SchedulingProblem,
    aggregate_model: &BlockModel,
    members: &[BlockModel],
    econ: &EconomicModel,
) -> Result<Evaluation> {
    let aggregate = crate::uncertainty::replay(plan, problem, aggregate_model, econ)?.cashflows();
    let result = replay_ensemble(plan, problem, members, econ)?;
    let stats = period_stats(&result);
    let remaining = remaining_npv(&result, econ.discount_rate);
    let summary = summary(&result);
    Ok(Evaluation {
        aggregate,
        result,
        stats,
        remaining,
        summary,
    })
}

#[derive(Debug, Clone)]
pub struct StrategyRun {
    pub strategy: StagingStrategy,
    pub staging: Staging,
    pub problem: SchedulingProblem,
    pub evolution: Evolution,
    pub evaluation: Evaluation,
}

pub fn run_strategy(
    prepared: &Prepared,
    config: &PipelineConfig,
    strategy: StagingStrategy,
    expected: Option<&Staging>,
) -> Result<StrategyRun> {
    let staging = stage_pit(strategy, prepared, config.stages, config.std_threshold, expected)?;
    let problem = SchedulingProblem::new(
        &prepared.aggregate,
        &staging,
        &prepared.precedence,
        &prepared.calendar,
        &prepared.econ,
        config.stockpiling,
    )?;
    log::info!("{strategy}: {} units, evolving", problem.units.len());
    let evolution = evolve(&problem, &config.ea)?;
    let evaluation = evaluate(
        &evolution.schedule.plan(),
        &problem,
        &prepared.aggregate,
        &prepared.ensemble.members,
        &prepared.econ,
    )?;
    Ok(StrategyRun {
        strategy,
        staging,
        problem,
        evolution,
        evaluation,
    })
}

/// Runs the generated strategies, plus `Expected` when a staging is given.
pub fn compare(prepared: &Prepared, config: &PipelineConfig, expected: Option<&Staging>) -> Result<Vec<StrategyRun>> {
    StagingStrategy::ALL
        .iter()
        .filter(|s| **s != StagingStrategy::Expected || expected.is_some())
        .map(|&s| run_strategy(prepared, config, s, expected))
        .collect()
}

fn title(strategy: StagingStrategy) -> &'static str {
    match strategy {
        StagingStrategy::Expected => "Expected staging",
        StagingStrategy::Lazy => "Lazy staging",
        StagingStrategy::WorstCase => "Worst-case staging",
        StagingStrategy::Levelled => "Levelled staging",
    }
}

/// One bullet per strategy, e.g. `- Lazy staging: average NPV of $1.585B, total profit range of $1.84B`.
pub fn comparison_text(runs: &[StrategyRun]) -> String {
    let mut out = String::new();
    for run in runs {
        let note = if run.staging.fallback { " (staged lazily: too little uncertain ore)" } else { "" };
        out.push_str(&format!(
            "- {}: {}{note}\n",
            title(run.strategy),
            crate::uncertainty::summary_statement(&run.evaluation.summary)
        ));
    }
    out
}
