//! Command-line front end: simulation campaigns, parameter sweeps, table
//! inspection and the session server.

pub mod server;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use scaffold_core::simulation::{
    self, make_user, DynamicParams, Execution, OutcomeRule, RunConfig, TripleSampling, UserModel,
    UserType,
};
use scaffold_core::{Config, GroundTruthMap, QTable, ScoringTable, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "scaffold",
    version,
    about = "Adaptive scaffolding decision engine"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "SCAFFOLD_CONFIG")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte-Carlo campaign against one simulated user.
    Simulate(SimulateArgs),
    /// Run the 12-point learning parameter grid.
    Sweep(SweepArgs),
    /// Serve sessions over newline-delimited JSON on TCP.
    Serve(ServeArgs),
    /// Print the scoring table, the state reduction and the initial Q-table.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Sampling {
    Uniform,
    Dynamic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Rule {
    NegationRules,
    TableTruth,
}

impl From<Rule> for OutcomeRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::NegationRules => OutcomeRule::NegationRules,
            Rule::TableTruth => OutcomeRule::TableTruth,
        }
    }
}

#[derive(Debug, Args)]
pub struct UserArgs {
    /// Simulated user type.
    #[arg(long, default_value = "A", value_parser = parse_user)]
    pub user: UserType,
    #[arg(long, value_enum, default_value = "negation-rules")]
    pub outcome_rule: Rule,
    /// Probability that an outcome is flipped.
    #[arg(long)]
    pub deviation: Option<f64>,
    /// Independent runs per campaign.
    #[arg(long, default_value_t = 500)]
    pub runs: usize,
    /// Episodes per run.
    #[arg(long, default_value_t = 100)]
    pub horizon: usize,
    /// Base seed; run i uses seed + i. Defaults to the configured base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run seeds one after another instead of in parallel.
    #[arg(long)]
    pub serial: bool,
    #[arg(long, value_enum, default_value = "uniform")]
    pub sampling: Sampling,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub user: UserArgs,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Seed the Q-table from the scoring table.
    #[arg(long, action = clap::ArgAction::Set)]
    pub preconfigured: Option<bool>,
    /// Per-run CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Mean cumulative-reward curve CSV.
    #[arg(long)]
    pub series: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub user: UserArgs,
    /// Sweep CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub bind: String,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Scoring table CSV, overriding the configuration.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Print this Q-table snapshot instead of the initial one.
    #[arg(long)]
    pub qtable: Option<PathBuf>,
    /// Write the initial Q-table snapshot here.
    #[arg(long)]
    pub export_qtable: Option<PathBuf>,
    #[arg(long, action = clap::ArgAction::Set)]
    pub preconfigured: Option<bool>,
}

fn parse_user(s: &str) -> Result<UserType, String> {
    s.parse().map_err(|e: scaffold_core::Error| e.to_string())
}

pub fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(Config::default()),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(args) => simulate(&config, args),
        Command::Sweep(args) => sweep(&config, args),
        Command::Serve(args) => server::run_blocking(config, &args.bind),
        Command::Inspect(args) => inspect(&config, args),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn user_model(args: &UserArgs) -> Result<UserModel> {
    let mut user = make_user(args.user).with_rule(args.outcome_rule.into());
    if let Some(rate) = args.deviation {
        user = user.with_deviation(rate)?;
    }
    Ok(user)
}

fn run_config(config: &Config, args: &UserArgs) -> Result<RunConfig> {
    Ok(RunConfig {
        policy: config.policy.clone(),
        preconfigured: config.service.preconfigured,
        horizon: args.horizon,
        sampling: match args.sampling {
            Sampling::Uniform => TripleSampling::Uniform,
            Sampling::Dynamic => TripleSampling::Dynamic(DynamicParams::default()),
        },
        reward: config.reward.clone(),
        partner: config.partner_model.clone(),
        agent_table: Arc::new(config.load_table()?),
    })
}

fn execution(args: &UserArgs) -> Execution {
    if args.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    }
}

fn simulate(config: &Config, args: SimulateArgs) -> Result<()> {
    let user = user_model(&args.user)?;
    let mut cfg = run_config(config, &args.user)?;
    if let Some(a) = args.alpha {
        cfg.policy.alpha = a;
    }
    if let Some(g) = args.gamma {
        cfg.policy.gamma = g;
    }
    if let Some(e) = args.epsilon {
        cfg.policy.epsilon = e;
    }
    if let Some(p) = args.preconfigured {
        cfg.preconfigured = p;
    }
    cfg.policy.validate()?;
    let seed = args.user.seed.unwrap_or(config.service.base_seed);
    let c = simulation::campaign(&user, &cfg, args.user.runs, seed, execution(&args.user))?;

    let mut out = output(args.out.as_deref())?;
    c.write_runs_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &args.series {
        let mut w = output(Some(path))?;
        c.write_series_csv(&mut w)?;
        w.flush()?;
    }
    let s = &c.summary;
    eprintln!(
        "user {} H_S={} runs={} horizon={}: Z_m={:.2} Z_sd={:.2} R_m={:.2} R_sd={:.2} recovered={:.3} never_recovered={:.3}",
        c.user,
        if cfg.preconfigured { "T" } else { "F" },
        s.runs,
        s.horizon,
        s.z_mean,
        s.z_sd,
        s.r_mean,
        s.r_sd,
        s.recovered_rate,
        s.non_recovery_rate,
    );
    Ok(())
}

fn sweep(config: &Config, args: SweepArgs) -> Result<()> {
    let user = user_model(&args.user)?;
    let cfg = run_config(config, &args.user)?;
    let seed = args.user.seed.unwrap_or(config.service.base_seed);
    let rows = simulation::sweep(
        &user,
        &cfg,
        &simulation::parameter_grid(),
        args.user.runs,
        seed,
        execution(&args.user),
    )?;
    let mut out = output(args.out.as_deref())?;
    simulation::write_sweep_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn inspect(config: &Config, args: InspectArgs) -> Result<()> {
    let table = match &args.table {
        Some(p) => ScoringTable::from_csv(
            File::open(p).with_context(|| format!("opening {}", p.display()))?,
        )?,
        None => config.load_table()?,
    };
    let mut out = io::stdout().lock();
    writeln!(out, "# scoring table")?;
    table.write_csv(&mut out)?;

    let map = table.ground_truth_map();
    writeln!(out, "\n# state reduction")?;
    writeln!(
        out,
        "capacity,gaze,task,negation_score,hesitation_score,state,action"
    )?;
    for (triple, state, action) in map.iter() {
        let [c, g, t] = triple.labels();
        writeln!(
            out,
            "{c},{g},{t},{:.4},{:.4},{},{}",
            table.scaffolding_score(triple, &Strategy::negation())?,
            table.scaffolding_score(triple, &Strategy::hesitation())?,
            state.as_str(),
            action,
        )?;
    }
    let image: Vec<&str> = map.image().into_iter().map(|s| s.as_str()).collect();
    writeln!(
        out,
        "# {} triples, {} distinct states: {}",
        map.len(),
        image.len(),
        image.join(" ")
    )?;

    let q = match &args.qtable {
        Some(p) => QTable::read_snapshot(
            File::open(p).with_context(|| format!("opening {}", p.display()))?,
            config.policy.clone(),
        )?,
        None => initial_qtable(config, &map, args.preconfigured)?,
    };
    writeln!(out, "\n# q-table")?;
    q.write_snapshot(&mut out)?;
    if let Some(p) = &args.export_qtable {
        let q = initial_qtable(config, &map, args.preconfigured)?;
        let mut w = output(Some(p))?;
        q.write_snapshot(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn initial_qtable(
    config: &Config,
    map: &GroundTruthMap,
    preconfigured: Option<bool>,
) -> Result<QTable> {
    let params = config.policy.clone();
    Ok(if preconfigured.unwrap_or(config.service.preconfigured) {
        QTable::from_ground_truth(map, params)?
    } else {
        QTable::zeros(params)?
    })
}
