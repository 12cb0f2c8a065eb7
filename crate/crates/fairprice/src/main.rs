use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fairprice::compare::compare_lower_bound;
use fairprice::config::{AgentKind, ExperimentSpec, Preset};
use fairprice::experiment::{run_cells, sweep};
use fairprice::io::{create_file, write_cells, write_curve_csv, write_json};
use fairprice::validate::CRITERIA;
use fairprice_core::fpa::ConstantsMode;
use fairprice_core::oracle::{closed_form_example_optimum, solve_fair_optimal, OracleConfig, ParamPoint, SUPPORTED_EPS_MAX};
use fairprice_core::pricing::{procedural_unfairness, substantive_unfairness};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fairprice", version, about = "Doubly-fair dynamic pricing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the fair optimal policy of an environment.
    Solve(Common),
    /// Run one episode per (horizon, seed) and write traces and summaries.
    Run(Common),
    /// Run a horizon x seed grid and fit log-log slopes.
    Sweep(Common),
    /// Compare the example against its perturbation with paired seeds.
    CompareLb(Common),
    /// Run the acceptance suite; exits nonzero on any failure.
    Validate {
        /// Only run these criteria (comma separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Scaled,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Example1,
    ExampleEps,
    Lowerbound,
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentArg {
    Fpa,
    BestFixedOracle,
    UcbFixed,
    GroupwiseUnconstrainedOracle,
    FairOracle,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment spec; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Perturbation for example-eps, or the comparison arm for compare-lb.
    #[arg(long)]
    eps: Option<f64>,
    /// Horizons, comma separated.
    #[arg(short = 'T', long = "horizon", value_delimiter = ',')]
    horizons: Vec<u64>,
    /// A seed count, or a comma-separated list of seeds.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long, value_enum)]
    agent: Option<AgentArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    scale_factor: Option<f64>,
    /// Error probability of the agent.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "relaxation-L")]
    relaxation: Option<f64>,
    /// Keep every n-th round in traces (0 = none).
    #[arg(long)]
    record_every: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::from_path(path)?,
            None => ExperimentSpec::default(),
        };
        if let Some(p) = self.preset {
            spec.environment.preset = match p {
                PresetArg::Example1 => Preset::Example1,
                PresetArg::ExampleEps => Preset::ExampleEps,
                PresetArg::Lowerbound => Preset::Lowerbound,
            };
        }
        if let Some(eps) = self.eps {
            spec.environment.eps = eps;
        }
        if !self.horizons.is_empty() {
            spec.sweep.horizons = self.horizons.clone();
        }
        if let Some(seeds) = &self.seeds {
            if seeds.contains(',') {
                let list = seeds
                    .split(',')
                    .map(|s| s.trim().parse::<u64>())
                    .collect::<Result<Vec<_>, _>>()
                    .with_context(|| format!("--seeds: cannot parse {seeds:?}"))?;
                spec.sweep.seeds = Some(list);
            } else {
                spec.sweep.count = seeds.trim().parse().with_context(|| format!("--seeds: cannot parse {seeds:?}"))?;
                spec.sweep.seeds = None;
            }
        }
        if let Some(b) = self.base_seed {
            spec.sweep.base_seed = b;
        }
        if let Some(a) = self.agent {
            spec.agent.kind = match a {
                AgentArg::Fpa => AgentKind::Fpa,
                AgentArg::BestFixedOracle => AgentKind::BestFixedOracle,
                AgentArg::UcbFixed => AgentKind::UcbFixed,
                AgentArg::GroupwiseUnconstrainedOracle => AgentKind::GroupwiseUnconstrainedOracle,
                AgentArg::FairOracle => AgentKind::FairOracle,
            };
        }
        if let Some(m) = self.mode {
            spec.agent.mode = match m {
                ModeArg::Paper => ConstantsMode::Paper,
                ModeArg::Scaled => ConstantsMode::Scaled,
            };
        }
        if let Some(c) = self.scale_factor {
            spec.agent.scale_factor = c;
        }
        if let Some(e) = self.epsilon {
            spec.agent.error_prob = e;
        }
        if let Some(l) = self.relaxation {
            spec.agent.relaxation = l;
        }
        if let Some(r) = self.record_every {
            spec.output.record_every = r;
        }
        if let Some(out) = &self.out {
            spec.output.dir = out.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Serialize)]
struct SolveReport {
    policy_group1: Vec<f64>,
    policy_group2: Vec<f64>,
    revenue: f64,
    accepted_price: f64,
    proposed_price: f64,
    procedural_gap: f64,
    substantive_gap: f64,
    closed_form_revenue: Option<f64>,
    closed_form_policy_gap: Option<f64>,
}

fn fmt_weights(w: &[f64]) -> String {
    let parts: Vec<String> = w.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn solve(common: &Common) -> Result<()> {
    let spec = common.spec()?;
    let market = spec.environment.market(spec.sweep.horizons[0])?;
    let sol = solve_fair_optimal(&market, &OracleConfig::default())?;
    let point = ParamPoint::of(&sol.policy, &market.model, &market.grid)?;
    let closed = spec
        .environment
        .in_example_family()
        .filter(|eps| *eps <= SUPPORTED_EPS_MAX)
        .map(closed_form_example_optimum)
        .transpose()?;
    let report = SolveReport {
        policy_group1: sol.policy.group1.weights().to_vec(),
        policy_group2: sol.policy.group2.weights().to_vec(),
        revenue: sol.revenue,
        accepted_price: point.accepted_price,
        proposed_price: point.proposed_price(),
        procedural_gap: procedural_unfairness(&sol.policy, &market.grid)?,
        substantive_gap: substantive_unfairness(&sol.policy, &market)?,
        closed_form_revenue: closed.as_ref().map(|c| c.revenue),
        closed_form_policy_gap: closed.as_ref().map(|c| sol.policy.distance(&c.policy)),
    };
    println!("policy group 1   {}", fmt_weights(&report.policy_group1));
    println!("policy group 2   {}", fmt_weights(&report.policy_group2));
    println!("revenue          {:.6}", report.revenue);
    println!("V_s (accepted)   {:.6}", report.accepted_price);
    println!("V_r (proposed)   {:.6}", report.proposed_price);
    println!("U, S             {:.1e}, {:.1e}", report.procedural_gap, report.substantive_gap);
    if let (Some(r), Some(g)) = (report.closed_form_revenue, report.closed_form_policy_gap) {
        println!("closed form      revenue {r:.6}, |revenue diff| {:.1e}, policy L-inf {g:.1e}", (r - report.revenue).abs());
    }
    if let Some(out) = &common.out {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        write_json(&out.join("solve.json"), &report)?;
    }
    Ok(())
}

fn run(common: &Common) -> Result<()> {
    let spec = common.spec()?;
    let cells = run_cells(&spec)?;
    write_cells(&spec, &cells, &spec.output.dir)?;
    for c in &cells {
        match (&c.trace, &c.error) {
            (Some(t), _) => println!(
                "T={} seed={}  regret {:.3}  S {:.3}  U {:.1e}",
                c.horizon, c.seed, t.cumulative_regret, t.cumulative_s, t.cumulative_u
            ),
            (None, Some(e)) => println!("T={} seed={}  failed: {e}", c.horizon, c.seed),
            (None, None) => {}
        }
    }
    println!("wrote {}", spec.output.dir.display());
    Ok(())
}

fn run_sweep(common: &Common) -> Result<()> {
    let mut spec = common.spec()?;
    if common.record_every.is_none() {
        spec.output.record_every = 0;
    }
    let (cells, report) = sweep(&spec)?;
    let dir = &spec.output.dir;
    write_cells(&spec, &cells, dir)?;
    if spec.output.curve_csv {
        let path = dir.join("curve.csv");
        write_curve_csv(&report.points, create_file(&path)?).with_context(|| format!("writing {}", path.display()))?;
    }
    write_json(&dir.join("sweep.json"), &report)?;
    println!("{:>10} {:>5} {:>14} {:>12} {:>14} {:>12}", "T", "runs", "regret", "stderr", "S", "stderr");
    for p in &report.points {
        println!(
            "{:>10} {:>5} {:>14.3} {:>12.3} {:>14.3} {:>12.3}",
            p.horizon, p.runs, p.mean_regret, p.stderr_regret, p.mean_s, p.stderr_s
        );
    }
    let show = |s: Option<f64>| s.map_or("undefined".to_string(), |v| format!("{v:.3}"));
    println!("log-log slope: regret {}, S {}", show(report.regret_slope), show(report.s_slope));
    Ok(())
}

fn compare_lb(common: &Common) -> Result<()> {
    let mut spec = common.spec()?;
    spec.output.record_every = 0;
    let eps = common.eps.unwrap_or(0.01);
    if !(eps >= 0.0) {
        bail!("--eps must be nonnegative");
    }
    let horizon = spec.sweep.horizons[0];
    let (report, _, _) = compare_lower_bound(&spec, eps, horizon)?;
    for arm in [&report.base, &report.perturbed] {
        println!(
            "eps={:<8} oracle revenue {:.6}  V_r {:.6}  regret {:.3} (se {:.3})  S {:.3} (se {:.3})",
            arm.eps, arm.oracle_revenue, arm.oracle_proposed_mean, arm.mean_regret, arm.stderr_regret, arm.mean_s, arm.stderr_s
        );
    }
    println!("proposed-mean gap {:.6e} (predicted {:.6e})", report.proposed_mean_gap, report.predicted_gap);
    if let Some(out) = &common.out {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        write_json(&out.join("compare_lb.json"), &report)?;
    }
    Ok(())
}

fn validate(only: &[u8]) -> bool {
    let mut ok = true;
    for (id, _, check) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let c = check();
        println!("{c}");
        ok &= c.passed;
    }
    ok
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(c) => solve(c),
        Command::Run(c) => run(c),
        Command::Sweep(c) => run_sweep(c),
        Command::CompareLb(c) => compare_lb(c),
        Command::Validate { only } => {
            return if validate(only) { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<fairprice::Error>() {
                Some(fairprice::Error::Usage(_) | fairprice::Error::Config(_)) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
