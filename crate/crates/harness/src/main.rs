use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rfd::agent::RfdAgent;
use rfd::env::{AnyEnv, CourierEnv, EnvKind, TaxiEnv};
use rfd_harness::curves::{build_curve, convergence, mean_curve, read_csv, write_csv, Criterion};
use rfd_harness::demos::{self, load_demo};
use rfd_harness::experiment::{agent_seed, env_seed};
use rfd_harness::{run_experiment, write_outputs, AgentKind, Demos, ExperimentSpec, LabConfig};

#[derive(Parser)]
#[command(name = "rfd-lab", version, about = "Train and evaluate reasoning-from-demonstration agents and baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Record or check demonstration files.
    #[command(subcommand)]
    Demo(DemoCommand),
    /// Run an N-agent experiment and write curves and a summary.
    Train(TrainArgs),
    /// Re-smooth the per-agent curves of a finished run.
    Curves(CurvesArgs),
    /// Print an RfD agent's theory after a demonstration and optional training.
    #[command(subcommand)]
    Theory(DumpCommand),
    /// Print an RfD agent's region map after a demonstration and optional training.
    #[command(subcommand)]
    Map(DumpCommand),
    /// Print the default configuration file.
    Config,
}

#[derive(Subcommand)]
enum DemoCommand {
    /// Record one successful episode of a policy as a demonstration file.
    RecordPolicy(RecordArgs),
    /// Parse and validate a demonstration file.
    Validate {
        file: PathBuf,
        /// Environment the file must belong to.
        #[arg(long)]
        env: Option<EnvKind>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicySource {
    /// The built-in human-like demonstrator.
    Scripted,
    /// A Taxi Q-learner trained from scratch first.
    Qlearner,
}

#[derive(Args)]
struct RecordArgs {
    #[arg(long, default_value = "taxi")]
    env: EnvKind,
    #[arg(long, value_enum, default_value = "scripted")]
    policy: PolicySource,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Training actions for the Q-learner demonstrator.
    #[arg(long, default_value_t = demos::TEACHER_ACTIONS)]
    train_actions: u64,
    #[arg(long, default_value_t = demos::TEACHER_SEED)]
    teacher_seed: u64,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Demonstration file to write; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the episode's feature-state/action pairs (Q-learner only).
    #[arg(long)]
    policy_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    env: EnvKind,
    #[arg(long)]
    agent: AgentKind,
    #[arg(long, default_value_t = 10)]
    agents: usize,
    /// Attempts (rfd) or episodes (baselines) per agent.
    #[arg(long, default_value_t = 300)]
    budget: usize,
    #[arg(long, default_value_t = 30)]
    window: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_actions: Option<u64>,
    /// Demonstration files (rfd) or demo-policy files (baselines).
    #[arg(long = "demo")]
    demos: Vec<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CurvesArgs {
    /// Output directory of `train`.
    run: PathBuf,
    #[arg(long)]
    window: usize,
    /// Where to write the averaged curve; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DumpCommand {
    Dump(DumpArgs),
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    env: EnvKind,
    #[arg(long = "demo")]
    demos: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    attempts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn config(path: Option<&Path>) -> anyhow::Result<LabConfig> {
    path.map_or_else(|| Ok(LabConfig::default()), LabConfig::load)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn record(args: RecordArgs) -> anyhow::Result<()> {
    let cfg = config(args.config.as_deref())?;
    let text = match args.policy {
        PolicySource::Scripted => {
            if args.policy_out.is_some() {
                bail!("--policy-out needs --policy qlearner");
            }
            demos::record_scripted(args.env, &cfg.courier, args.seed)?
        }
        PolicySource::Qlearner => {
            if args.env != EnvKind::Taxi {
                bail!("the Q-learner demonstrator only exists for taxi");
            }
            let teacher = demos::train_teacher(args.train_actions, args.teacher_seed);
            let text = demos::record_teacher_demo(&teacher, args.seed)?;
            if let Some(p) = &args.policy_out {
                let (pairs, _, _) = teacher.greedy_trajectory(args.seed);
                emit(Some(p), &demos::policy_text(&pairs))?;
            }
            text
        }
    };
    emit(args.out.as_deref(), &text)
}

fn validate(file: &Path, env: Option<EnvKind>) -> anyhow::Result<()> {
    let demo = load_demo(file, env)?;
    let mut agent = RfdAgent::<f64>::new(demo.env(), 0, Default::default());
    agent.ingest_demonstration(&demo)?;
    println!("{}: {} demonstration, {} states", file.display(), demo.env(), demo.len());
    println!("induced {} hypotheses:", agent.theory().len());
    print!("{}", agent.theory().dump());
    Ok(())
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let spec = ExperimentSpec {
        env: args.env,
        agent: args.agent,
        agents: args.agents,
        budget: args.budget,
        window: args.window,
        seed: args.seed,
        demos: Demos::Files(args.demos),
        config: config(args.config.as_deref())?,
        max_actions: args.max_actions,
    };
    let result = run_experiment(&spec)?;
    write_outputs(&result, &args.out)?;
    let s = &result.summary;
    println!("{} agents converged of {}", s.converged, s.agents);
    for a in &s.per_agent {
        match (a.convergence_attempt, a.convergence_actions) {
            (Some(at), Some(n)) => println!("agent {:02}: converged at attempt {at} after {n} actions", a.index),
            _ => println!("agent {:02}: not converged in {} attempts ({} actions)", a.index, a.attempts, a.total_actions),
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn curves(args: CurvesArgs) -> anyhow::Result<()> {
    let cfg = config(args.config.as_deref())?;
    let mut files: Vec<PathBuf> = fs::read_dir(&args.run)
        .with_context(|| format!("reading {}", args.run.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("agent_") && n.ends_with(".csv")))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no agent curves in {}", args.run.display());
    }
    let mut curves = Vec::new();
    for f in &files {
        let points = read_csv(fs::File::open(f)?).with_context(|| format!("in {}", f.display()))?;
        let raw: Vec<f64> = points.iter().map(|p| p.raw_metric).collect();
        let actions: Vec<u64> = points.iter().map(|p| p.cumulative_actions as u64).collect();
        let steps: Vec<u64> = points.iter().map(|p| p.steps as u64).collect();
        let greedy: Option<Vec<f64>> = points.iter().map(|p| p.greedy_metric).collect();
        let optimal: Option<Vec<f64>> = points.iter().map(|p| p.optimal_metric).collect();
        let g = greedy.as_deref().zip(optimal.as_deref());
        curves.push(build_curve(&raw, &actions, &steps, g, args.window));
    }
    let mean = mean_curve(&curves);
    let criterion = if mean.first().is_some_and(|p| p.greedy_metric.is_some()) {
        Criterion::WithinOptimal(cfg.convergence.return_tolerance)
    } else {
        Criterion::SuccessRate(cfg.convergence.success_rate)
    };
    for (f, c) in files.iter().zip(&curves) {
        eprintln!("{}: {:?}", f.display(), convergence(c, args.window, criterion));
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &mean)?;
    emit(args.out.as_deref(), std::str::from_utf8(&buf)?)
}

fn dump(args: DumpArgs, map: bool) -> anyhow::Result<()> {
    let cfg = config(args.config.as_deref())?;
    let mut env = match args.env {
        EnvKind::Taxi => AnyEnv::Taxi(TaxiEnv::new()),
        EnvKind::Courier => AnyEnv::Courier(CourierEnv::new(cfg.courier.clone())),
    };
    let mut agent = RfdAgent::<f64>::for_env(&env, cfg.rfd.agent_config());
    for path in &args.demos {
        agent.ingest_demonstration(&load_demo(path, Some(args.env))?)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(agent_seed(args.seed, 0));
    for k in 0..args.attempts {
        agent.run_attempt(&mut env, env_seed(args.seed, 0, k), &mut rng);
    }
    print!("{}", if map { agent.map().dump() } else { agent.theory().dump() });
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Demo(DemoCommand::RecordPolicy(a)) => record(a),
        Command::Demo(DemoCommand::Validate { file, env }) => validate(&file, env),
        Command::Train(a) => train(a),
        Command::Curves(a) => curves(a),
        Command::Theory(DumpCommand::Dump(a)) => dump(a, false),
        Command::Map(DumpCommand::Dump(a)) => dump(a, true),
        Command::Config => {
            print!("{}", LabConfig::default().to_toml());
            Ok(())
        }
    }
}
