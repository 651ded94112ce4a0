//! Seeded sweep experiments over generated deployments.
//!
//! Scenario `k` of a run uses seed `base_seed + k` for every sweep value, so
//! each sweep point sees the same deployments and rates. Within a sweep point
//! scenarios may be solved in parallel; aggregation always walks scenarios in
//! index order.

use std::fmt;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{build_instance, ChannelEnv, ChannelError};
use crate::exact::{solve_bnb_exact, solve_lp_relaxation, BnbConfig, ExactError, LpSolution, LpSolveStatus};
use crate::gap_bound::solve_relaxed_bnb_with;
use crate::greedy::{solve_cmdms, solve_mdmds};
use crate::model::{Limits, ModelError, ProblemInstance, Solution, SolveStatus};
use crate::scenario::{
    build_scenario, derive_seed, HardCoreRule, NfpCount, PlacementParams, Region, Scenario, ScenarioConfig,
    ScenarioError,
};

/// Version tag written into every JSON document.
pub const DOCUMENT_VERSION: u32 = 1;

/// Limits the experiments use when a resource must not bind.
pub const SLACK_BACKHAUL_BPS: f64 = 5e9;
pub const SLACK_BANDWIDTH_HZ: f64 = 5e9;
pub const SLACK_LINKS: usize = 30;

/// Relative tolerance of the inline bound-chain checks.
pub const CHAIN_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Deployment and geometry parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeploymentConfig {
    pub region_width_m: f64,
    pub region_height_m: f64,
    /// λ, points per m², shared by SCs and NFPs.
    pub density_per_m2: f64,
    pub sc_min_separation_m: f64,
    pub n_sc: usize,
    /// 0 selects the minimum NFP count from bandwidth and link limits.
    pub n_d: usize,
    pub nfp_height_m: f64,
    pub pl_max_db: f64,
    pub max_parent_draws: u32,
    pub sc_rule: HardCoreRule,
    pub nfp_rule: HardCoreRule,
}

impl Default for DeploymentConfig {
    fn default() -> Self {
        Self {
            region_width_m: 4000.0,
            region_height_m: 4000.0,
            density_per_m2: 5e-6,
            sc_min_separation_m: 300.0,
            n_sc: 30,
            n_d: 3,
            nfp_height_m: 300.0,
            pl_max_db: 115.0,
            max_parent_draws: 1000,
            sc_rule: HardCoreRule::MutualDeletion,
            nfp_rule: HardCoreRule::SequentialInhibition,
        }
    }
}

/// Resource limits used by `solve`, `bench` and the timing experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitConfig {
    pub backhaul_rate_bps: f64,
    pub nfp_bandwidth_hz: f64,
    pub nfp_links: usize,
    pub sinr_min_db: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            backhaul_rate_bps: 2.3e9,
            nfp_bandwidth_hz: 0.6e9,
            nfp_links: 8,
            sinr_min_db: -5.0,
        }
    }
}

impl LimitConfig {
    pub fn sinr_min_linear(&self) -> f64 {
        10f64.powf(self.sinr_min_db / 10.0)
    }

    pub fn to_limits(&self, n_d: usize) -> Limits {
        Limits::uniform(
            n_d,
            self.backhaul_rate_bps,
            self.nfp_bandwidth_hz,
            self.nfp_links,
            self.sinr_min_linear(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenarios_per_point: usize,
    pub base_seed: u64,
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenarios_per_point: 100,
            base_seed: 1,
            parallel: true,
        }
    }
}

/// Everything a run needs; every field has the standard simulation default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub channel: ChannelEnv,
    pub deployment: DeploymentConfig,
    pub limits: LimitConfig,
    pub rates_mbps: Vec<f64>,
    pub bnb: BnbConfig,
    pub run: RunConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            channel: ChannelEnv::default(),
            deployment: DeploymentConfig::default(),
            limits: LimitConfig::default(),
            rates_mbps: vec![30.0, 60.0, 90.0, 120.0, 150.0],
            bnb: BnbConfig::default(),
            run: RunConfig::default(),
        }
    }
}

impl HarnessConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.channel.validate()?;
        if self.rates_mbps.is_empty() || self.rates_mbps.iter().any(|r| r.is_nan() || *r <= 0.0) {
            return Err(HarnessError::InvalidSpec("rates_mbps must be nonempty and positive".into()));
        }
        if self.deployment.n_sc == 0 {
            return Err(HarnessError::InvalidSpec("n_sc must be positive".into()));
        }
        if self.run.scenarios_per_point == 0 {
            return Err(HarnessError::InvalidSpec("scenarios_per_point must be at least 1".into()));
        }
        self.bnb.validate()?;
        Ok(())
    }
}

/// Generated deployment plus per-SC rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub version: u32,
    pub seed: u64,
    pub scenario: Scenario,
    pub rates_bps: Vec<f64>,
    pub nfp_min_separation_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub version: u32,
    pub instance: ProblemInstance,
}

/// Builds the deployment and rates of one seed.
pub fn generate_scenario(config: &HarnessConfig, seed: u64) -> Result<ScenarioDocument, HarnessError> {
    let d = &config.deployment;
    let mut sc = PlacementParams::new(d.density_per_m2, d.sc_min_separation_m, derive_seed(seed, 0));
    sc.max_parent_draws = d.max_parent_draws;
    sc.rule = d.sc_rule;
    let mut nfp = PlacementParams::new(d.density_per_m2, 0.0, derive_seed(seed, 1));
    nfp.max_parent_draws = d.max_parent_draws;
    nfp.rule = d.nfp_rule;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
    let rates_bps: Vec<f64> = (0..d.n_sc)
        .map(|_| config.rates_mbps[rng.random_range(0..config.rates_mbps.len())] * 1e6)
        .collect();

    let nfp_count = if d.n_d > 0 {
        NfpCount::Fixed(d.n_d)
    } else {
        // Demand at the SINR threshold: a conservative per-SC estimate
        // available before any NFP is placed.
        let spectral = (1.0 + config.limits.sinr_min_linear()).log2();
        NfpCount::Auto {
            bandwidth_estimates: rates_bps.iter().map(|r| r / spectral).collect(),
            nfp_bandwidth: config.limits.nfp_bandwidth_hz,
            nfp_links: config.limits.nfp_links,
        }
    };
    let scenario_config = ScenarioConfig {
        region: Region {
            width: d.region_width_m,
            height: d.region_height_m,
        },
        sc_placement: sc,
        nfp_placement: nfp,
        n_sc: d.n_sc,
        nfp_count,
        h_max: d.nfp_height_m,
        pl_max_db: d.pl_max_db,
    };
    let built = build_scenario(&scenario_config, &config.channel)?;
    Ok(ScenarioDocument {
        version: DOCUMENT_VERSION,
        seed,
        scenario: built.scenario,
        rates_bps,
        nfp_min_separation_m: built.nfp_min_separation,
    })
}

/// Problem instance of a generated scenario under `limits`.
pub fn instance_for(
    config: &HarnessConfig,
    doc: &ScenarioDocument,
    limits: Limits,
) -> Result<ProblemInstance, HarnessError> {
    Ok(build_instance(&doc.scenario, &config.channel, &doc.rates_bps, limits)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Sweep value: R_r, the backhaul limit over the total demanded rate.
    RateSweep,
    /// Sweep value: per-NFP bandwidth, Hz.
    BandwidthSweep,
    /// Sweep value: per-NFP link count.
    LinksSweep,
    /// Sweep value: backhaul limit, bps; bandwidth and links from the config.
    Timing,
}

impl ExperimentKind {
    pub fn default_values(self) -> Vec<f64> {
        match self {
            Self::RateSweep => (1..=7).map(|k| k as f64 / 5.0).collect(),
            Self::BandwidthSweep => vec![0.1e9, 0.2e9, 0.4e9, 0.6e9, 0.8e9, 1.0e9, 1.5e9, 2.0e9],
            Self::LinksSweep => (2..=30).step_by(2).map(|k| k as f64).collect(),
            Self::Timing => vec![2.3e9],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::RateSweep => "rate_sweep",
            Self::BandwidthSweep => "bandwidth_sweep",
            Self::LinksSweep => "links_sweep",
            Self::Timing => "timing",
        }
    }

    pub fn sweep_label(self) -> &'static str {
        match self {
            Self::RateSweep => "rate_ratio",
            Self::BandwidthSweep => "nfp_bandwidth_hz",
            Self::LinksSweep => "nfp_links",
            Self::Timing => "backhaul_rate_bps",
        }
    }

    /// Limits of one sweep point for a scenario with demand `total_rate`.
    pub fn limits(self, value: f64, total_rate: f64, n_d: usize, config: &HarnessConfig) -> Limits {
        let sinr_min = config.limits.sinr_min_linear();
        match self {
            Self::RateSweep => Limits::uniform(n_d, value * total_rate, SLACK_BANDWIDTH_HZ, SLACK_LINKS, sinr_min),
            Self::BandwidthSweep => Limits::uniform(n_d, SLACK_BACKHAUL_BPS, value, SLACK_LINKS, sinr_min),
            Self::LinksSweep => Limits::uniform(
                n_d,
                SLACK_BACKHAUL_BPS,
                SLACK_BANDWIDTH_HZ,
                value.round() as usize,
                sinr_min,
            ),
            Self::Timing => Limits::uniform(
                n_d,
                value,
                config.limits.nfp_bandwidth_hz,
                config.limits.nfp_links,
                sinr_min,
            ),
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rate_sweep" | "rate" => Ok(Self::RateSweep),
            "bandwidth_sweep" | "bandwidth" => Ok(Self::BandwidthSweep),
            "links_sweep" | "links" => Ok(Self::LinksSweep),
            "timing" => Ok(Self::Timing),
            other => Err(HarnessError::InvalidSpec(format!("unknown experiment {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Mdmds,
    Cmdms,
    Bnb,
    Lp,
    GapBnb,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [Self::Mdmds, Self::Cmdms, Self::Bnb, Self::Lp, Self::GapBnb];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mdmds => "mdmds",
            Self::Cmdms => "cmdms",
            Self::Bnb => "bnb",
            Self::Lp => "lp",
            Self::GapBnb => "gap_bnb",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::InvalidSpec(format!("unknown solver {s:?}")))
    }
}

/// One solver run on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub solver: SolverKind,
    pub sum_rate: f64,
    pub associated: usize,
    pub wall_time: f64,
    pub nodes: u64,
    /// False for heuristics, node-capped searches and failed LPs.
    pub proven: bool,
}

/// Output of one solver: binary for everything except the LP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolverOutput {
    Binary(Solution),
    Fractional(LpSolution),
}

pub fn solve_with(kind: SolverKind, instance: &ProblemInstance, bnb: &BnbConfig) -> Result<SolverOutput, HarnessError> {
    Ok(match kind {
        SolverKind::Mdmds => SolverOutput::Binary(solve_mdmds(instance)),
        SolverKind::Cmdms => SolverOutput::Binary(solve_cmdms(instance)),
        SolverKind::Bnb => SolverOutput::Binary(solve_bnb_exact(instance, bnb)?),
        SolverKind::GapBnb => SolverOutput::Binary(solve_relaxed_bnb_with(instance, bnb.node_cap)),
        SolverKind::Lp => SolverOutput::Fractional(solve_lp_relaxation(instance)),
    })
}

/// Runs one solver. The LP counts an SC as associated when any of its
/// entries is positive.
pub fn run_solver(kind: SolverKind, instance: &ProblemInstance, bnb: &BnbConfig) -> Result<SolverRecord, HarnessError> {
    Ok(match solve_with(kind, instance, bnb)? {
        SolverOutput::Binary(s) => SolverRecord {
            solver: kind,
            sum_rate: s.sum_rate,
            associated: s.associated_count(),
            wall_time: s.wall_time,
            nodes: s.nodes_explored,
            proven: s.status == SolveStatus::Optimal,
        },
        SolverOutput::Fractional(lp) => SolverRecord {
            solver: kind,
            sum_rate: lp.objective,
            associated: lp.assignment.associated_count(),
            wall_time: lp.wall_time,
            nodes: 0,
            proven: lp.status == LpSolveStatus::Optimal,
        },
    })
}

/// Bound-chain violations among the records of one instance: LP ≥ exact,
/// relaxed optimum ≥ exact, exact ≥ each greedy. Only proven values take part
/// as upper bounds.
pub fn chain_violations(records: &[SolverRecord]) -> Vec<String> {
    let get = |k: SolverKind| records.iter().find(|r| r.solver == k);
    let above = |hi: f64, lo: f64| hi >= lo - CHAIN_TOL * lo.abs().max(1.0);
    let mut out = Vec::new();
    let Some(exact) = get(SolverKind::Bnb) else {
        return out;
    };
    if exact.proven {
        for upper in [SolverKind::Lp, SolverKind::GapBnb] {
            if let Some(u) = get(upper).filter(|u| u.proven) {
                if !above(u.sum_rate, exact.sum_rate) {
                    out.push(format!("{upper} {} < bnb {}", u.sum_rate, exact.sum_rate));
                }
            }
        }
        for greedy in [SolverKind::Mdmds, SolverKind::Cmdms] {
            if let Some(g) = get(greedy) {
                if !above(exact.sum_rate, g.sum_rate) {
                    out.push(format!("bnb {} < {greedy} {}", exact.sum_rate, g.sum_rate));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub sweep_values: Vec<f64>,
    pub scenarios_per_point: usize,
    pub base_seed: u64,
    pub base_config: HarnessConfig,
    pub solver_set: Vec<SolverKind>,
    /// CSV path; sibling metadata, per-scenario and failure files are written
    /// next to it. `None` skips file output.
    pub output_path: Option<PathBuf>,
    pub parallel: bool,
}

impl ExperimentSpec {
    /// Default sweep of `experiment` for `config`, all solvers.
    pub fn new(experiment: ExperimentKind, config: &HarnessConfig) -> Self {
        Self {
            experiment,
            sweep_values: experiment.default_values(),
            scenarios_per_point: config.run.scenarios_per_point,
            base_seed: config.run.base_seed,
            base_config: config.clone(),
            solver_set: SolverKind::ALL.to_vec(),
            output_path: None,
            parallel: config.run.parallel && experiment != ExperimentKind::Timing,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.sweep_values.is_empty() {
            return Err(HarnessError::InvalidSpec("sweep_values is empty".into()));
        }
        if self.scenarios_per_point == 0 {
            return Err(HarnessError::InvalidSpec("scenarios_per_point must be at least 1".into()));
        }
        if self.solver_set.is_empty() {
            return Err(HarnessError::InvalidSpec("solver_set is empty".into()));
        }
        self.base_config.validate()
    }

    pub fn seed(&self, scenario_index: usize) -> u64 {
        self.base_seed.wrapping_add(scenario_index as u64)
    }
}

/// One averaged data point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub solver_name: String,
    pub mean_sum_rate: f64,
    pub mean_associated_count: f64,
    pub mean_wall_time: f64,
    pub mean_nodes: f64,
    /// Mean of (exact − solver) / exact over scenarios with a proven exact
    /// value; empty when the exact solver is not part of the run.
    pub mean_gap_to_exact: Option<f64>,
    pub scenario_count: usize,
    pub failed_count: usize,
    /// Set when any scenario at this point failed or broke the bound chain.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub sweep_value: f64,
    pub scenario_index: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub sum_rate: f64,
    pub associated: usize,
    pub wall_time: f64,
    pub nodes: u64,
    pub proven: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    /// `None` when the scenario itself could not be generated.
    pub sweep_value: Option<f64>,
    pub scenario_index: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub rows: Vec<ResultRow>,
    pub records: Vec<ScenarioRecord>,
    pub failures: Vec<FailureRecord>,
    pub chain_violations: Vec<FailureRecord>,
}

impl ExperimentOutcome {
    /// Per-scenario values of one solver at one sweep point, by scenario index.
    pub fn values(&self, sweep_value: f64, solver: SolverKind) -> Vec<&ScenarioRecord> {
        let mut v: Vec<&ScenarioRecord> = self
            .records
            .iter()
            .filter(|r| r.solver == solver && r.sweep_value == sweep_value)
            .collect();
        v.sort_by_key(|r| r.scenario_index);
        v
    }

    pub fn row(&self, sweep_value: f64, solver: SolverKind) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.solver_name == solver.name())
    }
}

type PointResult = Result<Vec<SolverRecord>, String>;

/// Runs every sweep point on every scenario and aggregates per solver.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome, HarnessError> {
    spec.validate()?;
    let config = &spec.base_config;
    let indices: Vec<usize> = (0..spec.scenarios_per_point).collect();

    let generate = |k: &usize| generate_scenario(config, spec.seed(*k)).map_err(|e| e.to_string());
    let scenarios: Vec<Result<ScenarioDocument, String>> = if spec.parallel {
        indices.par_iter().map(generate).collect()
    } else {
        indices.iter().map(generate).collect()
    };

    let mut outcome = ExperimentOutcome::default();
    for (k, s) in scenarios.iter().enumerate() {
        if let Err(message) = s {
            outcome.failures.push(FailureRecord {
                sweep_value: None,
                scenario_index: k,
                seed: spec.seed(k),
                message: message.clone(),
            });
        }
    }

    for &value in &spec.sweep_values {
        let solve_one = |k: &usize| -> Option<PointResult> {
            let doc = scenarios[*k].as_ref().ok()?;
            Some(solve_point(spec, doc, value))
        };
        let results: Vec<Option<PointResult>> = if spec.parallel {
            indices.par_iter().map(solve_one).collect()
        } else {
            indices.iter().map(solve_one).collect()
        };

        let mut point_failed = outcome.failures.iter().any(|f| f.sweep_value.is_none());
        for (k, result) in results.into_iter().enumerate() {
            let Some(result) = result else { continue };
            match result {
                Ok(records) => {
                    for message in chain_violations(&records) {
                        point_failed = true;
                        outcome.chain_violations.push(FailureRecord {
                            sweep_value: Some(value),
                            scenario_index: k,
                            seed: spec.seed(k),
                            message,
                        });
                    }
                    outcome.records.extend(records.into_iter().map(|r| ScenarioRecord {
                        sweep_value: value,
                        scenario_index: k,
                        seed: spec.seed(k),
                        solver: r.solver,
                        sum_rate: r.sum_rate,
                        associated: r.associated,
                        wall_time: r.wall_time,
                        nodes: r.nodes,
                        proven: r.proven,
                    }));
                }
                Err(message) => {
                    point_failed = true;
                    outcome.failures.push(FailureRecord {
                        sweep_value: Some(value),
                        scenario_index: k,
                        seed: spec.seed(k),
                        message,
                    });
                }
            }
        }

        for &solver in &spec.solver_set {
            outcome.rows.push(aggregate(&outcome, spec, value, solver, point_failed));
        }
    }

    if let Some(path) = &spec.output_path {
        write_outputs(spec, &outcome, path)?;
    }
    Ok(outcome)
}

fn solve_point(spec: &ExperimentSpec, doc: &ScenarioDocument, value: f64) -> PointResult {
    let config = &spec.base_config;
    let total: f64 = doc.rates_bps.iter().sum();
    let n_d = doc.scenario.nfp_positions.len();
    let limits = spec.experiment.limits(value, total, n_d, config);
    let instance = instance_for(config, doc, limits).map_err(|e| e.to_string())?;
    spec.solver_set
        .iter()
        .map(|&kind| run_solver(kind, &instance, &config.bnb).map_err(|e| format!("{kind}: {e}")))
        .collect()
}

fn aggregate(outcome: &ExperimentOutcome, spec: &ExperimentSpec, value: f64, solver: SolverKind, flagged: bool) -> ResultRow {
    let recs = outcome.values(value, solver);
    let n = recs.len();
    let mean = |f: &dyn Fn(&ScenarioRecord) -> f64| {
        if n == 0 {
            f64::NAN
        } else {
            recs.iter().map(|r| f(r)).sum::<f64>() / n as f64
        }
    };
    let exact = outcome.values(value, SolverKind::Bnb);
    let gaps: Vec<f64> = recs
        .iter()
        .filter_map(|r| {
            let e = exact.iter().find(|e| e.scenario_index == r.scenario_index && e.proven)?;
            Some(if e.sum_rate > 0.0 {
                (e.sum_rate - r.sum_rate) / e.sum_rate
            } else {
                0.0
            })
        })
        .collect();
    let failed_count = outcome
        .failures
        .iter()
        .filter(|f| f.sweep_value.is_none_or(|v| v == value))
        .count();
    ResultRow {
        sweep_value: value,
        solver_name: solver.name().to_string(),
        mean_sum_rate: mean(&|r| r.sum_rate),
        mean_associated_count: mean(&|r| r.associated as f64),
        mean_wall_time: mean(&|r| r.wall_time),
        mean_nodes: mean(&|r| r.nodes as f64),
        mean_gap_to_exact: (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64),
        scenario_count: n,
        failed_count,
        flagged: flagged || n != spec.scenarios_per_point,
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    path.with_file_name(format!("{stem}{suffix}"))
}

#[derive(Serialize)]
struct Metadata<'a> {
    version: u32,
    experiment: ExperimentKind,
    sweep_value: &'static str,
    units: [(&'static str, &'static str); 7],
    scenarios_per_point: usize,
    base_seed: u64,
    solvers: &'a [SolverKind],
    config: &'a HarnessConfig,
}

fn write_outputs(spec: &ExperimentSpec, outcome: &ExperimentOutcome, path: &Path) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for row in &outcome.rows {
        w.serialize(row)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(sibling(path, ".scenarios.csv"))?;
    for rec in &outcome.records {
        w.serialize(rec)?;
    }
    w.flush()?;

    let meta = Metadata {
        version: DOCUMENT_VERSION,
        experiment: spec.experiment,
        sweep_value: spec.experiment.sweep_label(),
        units: [
            ("mean_sum_rate", "bit/s"),
            ("mean_associated_count", "SCs"),
            ("mean_wall_time", "s"),
            ("mean_nodes", "search nodes"),
            ("mean_gap_to_exact", "fraction of the exact sum rate"),
            ("nfp_bandwidth_hz", "Hz"),
            ("backhaul_rate_bps", "bit/s"),
        ],
        scenarios_per_point: spec.scenarios_per_point,
        base_seed: spec.base_seed,
        solvers: &spec.solver_set,
        config: &spec.base_config,
    };
    fs::write(sibling(path, ".meta.json"), serde_json::to_string_pretty(&meta)?)?;

    let mut log = File::create(sibling(path, ".failures.log"))?;
    for f in &outcome.failures {
        writeln!(log, "failure value={:?} scenario={} seed={}: {}", f.sweep_value, f.scenario_index, f.seed, f.message)?;
    }
    for f in &outcome.chain_violations {
        writeln!(log, "bound-chain value={:?} scenario={} seed={}: {}", f.sweep_value, f.scenario_index, f.seed, f.message)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub solver_name: String,
    pub mean_wall_time: f64,
    pub mean_nodes: f64,
    pub scenario_count: usize,
}

/// Sequential timing run; one row per solver averaged over all sweep points.
pub fn timing_benchmark(spec: &ExperimentSpec) -> Result<Vec<TimingRow>, HarnessError> {
    let mut sequential = spec.clone();
    sequential.parallel = false;
    let out_path = sequential.output_path.take();
    let outcome = run_experiment(&sequential)?;
    let rows: Vec<TimingRow> = spec
        .solver_set
        .iter()
        .map(|&solver| {
            let recs: Vec<&ScenarioRecord> = outcome.records.iter().filter(|r| r.solver == solver).collect();
            let n = recs.len().max(1) as f64;
            TimingRow {
                solver_name: solver.name().to_string(),
                mean_wall_time: recs.iter().map(|r| r.wall_time).sum::<f64>() / n,
                mean_nodes: recs.iter().map(|r| r.nodes as f64).sum::<f64>() / n,
                scenario_count: recs.len(),
            }
        })
        .collect();
    if let Some(path) = out_path {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut w = csv::Writer::from_path(&path)?;
        for row in &rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub n_sc: usize,
    pub solver_name: String,
    pub mean_wall_time: f64,
}

/// Deployment for `n_sc` SCs: the region grows with the SC count so the
/// hard-core placement keeps the same headroom.
pub fn ladder_config(base: &HarnessConfig, n_sc: usize) -> HarnessConfig {
    let mut cfg = base.clone();
    let scale = (2.0 * n_sc as f64 / 30.0).sqrt().max(1.0);
    cfg.deployment.region_width_m = base.deployment.region_width_m * scale;
    cfg.deployment.region_height_m = base.deployment.region_height_m * scale;
    cfg.deployment.n_sc = n_sc;
    cfg
}

/// Mean per-solve wall time of each solver over a size ladder. Each instance
/// is solved `repeats` times and the total time divided out.
pub fn complexity_ladder(
    base: &HarnessConfig,
    sizes: &[usize],
    scenarios: usize,
    repeats: usize,
    solvers: &[SolverKind],
) -> Result<Vec<LadderPoint>, HarnessError> {
    let repeats = repeats.max(1);
    let mut out = Vec::new();
    for &n in sizes {
        let cfg = ladder_config(base, n);
        let mut instances = Vec::new();
        for k in 0..scenarios {
            let doc = generate_scenario(&cfg, cfg.run.base_seed.wrapping_add(k as u64))?;
            let n_d = doc.scenario.nfp_positions.len();
            instances.push(instance_for(&cfg, &doc, cfg.limits.to_limits(n_d))?);
        }
        for &solver in solvers {
            let mut total = 0.0;
            for inst in &instances {
                let start = Instant::now();
                for _ in 0..repeats {
                    std::hint::black_box(run_solver(solver, std::hint::black_box(inst), &cfg.bnb)?);
                }
                total += start.elapsed().as_secs_f64() / repeats as f64;
            }
            out.push(LadderPoint {
                n_sc: n,
                solver_name: solver.name().to_string(),
                mean_wall_time: total / instances.len().max(1) as f64,
            });
        }
    }
    Ok(out)
}

/// Least-squares slope of log(y) against log(x).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
