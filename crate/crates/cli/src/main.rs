use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use nfpassoc::harness::{
    complexity_ladder, generate_scenario, instance_for, loglog_slope, run_experiment, solve_with, timing_benchmark,
    ExperimentKind, ExperimentSpec, HarnessConfig, InstanceDocument, SolverKind, SolverOutput, DOCUMENT_VERSION,
};
use nfpassoc::model::check_feasible;
use nfpassoc::ProblemInstance;

#[derive(Parser, Debug)]
#[command(name = "nfpassoc", version, about = "SC-to-NFP association solvers and experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML configuration; missing keys take the standard simulation values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed (overrides `run.base_seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate scenarios and their instances as JSON.
    Gen {
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Solve one instance with one solver and write the result as JSON.
    Solve {
        /// mdmds, cmdms, bnb, lp or gap_bnb.
        #[arg(long, default_value = "cmdms")]
        solver: String,
        /// Instance JSON from `gen`; generated from the seed when absent.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Run a sweep and write CSV.
    Experiment {
        /// rate_sweep, bandwidth_sweep, links_sweep or timing.
        kind: String,
        /// Comma-separated sweep values; the standard sweep when absent.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        scenarios: Option<usize>,
        /// Comma-separated solver names; all when absent.
        #[arg(long, value_delimiter = ',')]
        solvers: Option<Vec<String>>,
    },
    /// Timing table at the configured limits, plus an optional size ladder.
    Bench {
        #[arg(long)]
        scenarios: Option<usize>,
        /// SC counts of the greedy complexity ladder.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
    },
    /// Print the effective configuration as TOML.
    Config,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut config = match &cli.global.config {
        Some(path) => HarnessConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => HarnessConfig::default(),
    };
    if let Some(seed) = cli.global.seed {
        config.run.base_seed = seed;
    }
    let out = &cli.global.out_dir;

    match cli.command {
        Command::Config => print!("{}", config.to_toml_string()),
        Command::Gen { count } => gen(&config, out, count)?,
        Command::Solve { solver, instance } => solve(&config, out, &solver, instance.as_deref())?,
        Command::Experiment {
            kind,
            values,
            scenarios,
            solvers,
        } => {
            let kind: ExperimentKind = kind.parse()?;
            let mut spec = ExperimentSpec::new(kind, &config);
            if let Some(v) = values {
                spec.sweep_values = v;
            }
            if let Some(n) = scenarios {
                spec.scenarios_per_point = n;
            }
            if let Some(names) = solvers {
                spec.solver_set = parse_solvers(&names)?;
            }
            let path = out.join(format!("{}.csv", kind.name()));
            spec.output_path = Some(path.clone());
            let outcome = run_experiment(&spec)?;
            for row in &outcome.rows {
                println!(
                    "{:>14} {:8} sum_rate={:.6e} associated={:.2} time={:.3e}s{}",
                    row.sweep_value,
                    row.solver_name,
                    row.mean_sum_rate,
                    row.mean_associated_count,
                    row.mean_wall_time,
                    if row.flagged { " FLAGGED" } else { "" }
                );
            }
            eprintln!(
                "wrote {} ({} failures, {} bound-chain violations)",
                path.display(),
                outcome.failures.len(),
                outcome.chain_violations.len()
            );
        }
        Command::Bench { scenarios, ladder } => {
            let mut spec = ExperimentSpec::new(ExperimentKind::Timing, &config);
            spec.sweep_values = vec![config.limits.backhaul_rate_bps];
            if let Some(n) = scenarios {
                spec.scenarios_per_point = n;
            }
            let path = out.join("timing.csv");
            spec.output_path = Some(path.clone());
            for row in timing_benchmark(&spec)? {
                println!(
                    "{:8} mean_time={:.3e}s mean_nodes={:.1} scenarios={}",
                    row.solver_name, row.mean_wall_time, row.mean_nodes, row.scenario_count
                );
            }
            eprintln!("wrote {}", path.display());
            if let Some(sizes) = ladder {
                let greedy = [SolverKind::Mdmds, SolverKind::Cmdms];
                let points = complexity_ladder(&config, &sizes, spec.scenarios_per_point.min(20), 50, &greedy)?;
                for solver in greedy {
                    let (xs, ys): (Vec<f64>, Vec<f64>) = points
                        .iter()
                        .filter(|p| p.solver_name == solver.name())
                        .map(|p| (p.n_sc as f64, p.mean_wall_time))
                        .unzip();
                    for (x, y) in xs.iter().zip(&ys) {
                        println!("{solver:8} n_sc={x:>4} mean_time={y:.3e}s");
                    }
                    if xs.len() >= 2 {
                        println!("{solver:8} log-log slope {:.3}", loglog_slope(&xs, &ys));
                    }
                }
            }
        }
    }
    Ok(())
}

fn parse_solvers(names: &[String]) -> Result<Vec<SolverKind>> {
    names.iter().map(|n| Ok(n.trim().parse::<SolverKind>()?)).collect()
}

fn gen(config: &HarnessConfig, out: &Path, count: usize) -> Result<()> {
    fs::create_dir_all(out)?;
    for k in 0..count {
        let seed = config.run.base_seed.wrapping_add(k as u64);
        let doc = generate_scenario(config, seed)?;
        let n_d = doc.scenario.nfp_positions.len();
        let instance = instance_for(config, &doc, config.limits.to_limits(n_d))?;
        let scenario_path = out.join(format!("scenario_{seed}.json"));
        let instance_path = out.join(format!("instance_{seed}.json"));
        fs::write(&scenario_path, serde_json::to_string_pretty(&doc)?)?;
        let inst_doc = InstanceDocument {
            version: DOCUMENT_VERSION,
            instance,
        };
        fs::write(&instance_path, serde_json::to_string_pretty(&inst_doc)?)?;
        println!("{} {}", scenario_path.display(), instance_path.display());
    }
    Ok(())
}

fn load_instance(config: &HarnessConfig, path: Option<&Path>) -> Result<ProblemInstance> {
    match path {
        Some(p) => {
            let doc: InstanceDocument =
                serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?;
            if doc.version != DOCUMENT_VERSION {
                bail!("unsupported instance document version {}", doc.version);
            }
            Ok(doc.instance)
        }
        None => {
            let doc = generate_scenario(config, config.run.base_seed)?;
            let n_d = doc.scenario.nfp_positions.len();
            Ok(instance_for(config, &doc, config.limits.to_limits(n_d))?)
        }
    }
}

fn solve(config: &HarnessConfig, out: &Path, solver: &str, instance: Option<&Path>) -> Result<()> {
    let kind: SolverKind = solver.parse()?;
    let inst = load_instance(config, instance)?;
    fs::create_dir_all(out)?;
    let path = out.join(format!("solution_{}_{}.json", kind.name(), config.run.base_seed));
    let output = solve_with(kind, &inst, &config.bnb)?;
    let report = match &output {
        SolverOutput::Binary(s) => {
            println!(
                "{} sum_rate={:.6e} associated={} nodes={} status={:?} time={:.3e}s",
                kind,
                s.sum_rate,
                s.associated_count(),
                s.nodes_explored,
                s.status,
                s.wall_time
            );
            check_feasible(&inst, &s.assignment)?
        }
        SolverOutput::Fractional(lp) => {
            println!("{} objective={:.6e} status={:?} time={:.3e}s", kind, lp.objective, lp.status, lp.wall_time);
            check_feasible(&inst, &lp.assignment)?
        }
    };
    println!("{report}");
    let json = serde_json::to_string_pretty(&output)?;
    fs::write(&path, json)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
