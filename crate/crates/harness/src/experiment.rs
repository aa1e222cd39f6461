//! N-agent experiments: independent seeded agents run in parallel, each
//! producing a curve and a convergence point.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rfd::agent::{Demonstration, RfdAgent};
use rfd::baselines::{BaselineAgent, BaselineKind, DemoPolicy, OptimalReturns};
use rfd::env::{AnyEnv, CourierEnv, EnvKind, TaxiEnv};
use rfd::theory::Theory;

use crate::config::LabConfig;
use crate::curves::{build_curve, convergence, mean_curve, write_csv, Convergence, Criterion, CurvePoint};
use crate::demos::{load_demo, load_demo_policy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Rfd,
    QLearning,
    Imitation,
    Decomposition,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Rfd => "rfd",
            AgentKind::QLearning => "qlearning",
            AgentKind::Imitation => "imitation",
            AgentKind::Decomposition => "decomposition",
        }
    }

    fn baseline(self) -> Option<BaselineKind> {
        match self {
            AgentKind::Rfd => None,
            AgentKind::QLearning => Some(BaselineKind::QLearning),
            AgentKind::Imitation => Some(BaselineKind::Imitation),
            AgentKind::Decomposition => Some(BaselineKind::Decomposition),
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [AgentKind::Rfd, AgentKind::QLearning, AgentKind::Imitation, AgentKind::Decomposition]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown agent `{s}` (expected rfd, qlearning, imitation or decomposition)"))
    }
}

/// What the agents learn from.
#[derive(Debug, Clone, Default)]
pub enum Demos {
    #[default]
    None,
    /// Demonstration files for RfD, or demo-policy files for baselines.
    Files(Vec<PathBuf>),
    /// Already loaded.
    Perceived(Vec<Demonstration>),
    Policy(DemoPolicy),
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub env: EnvKind,
    pub agent: AgentKind,
    pub agents: usize,
    /// Attempts (RfD) or episodes (baselines) per agent.
    pub budget: usize,
    pub window: usize,
    pub seed: u64,
    pub demos: Demos,
    pub config: LabConfig,
    /// Stop an agent early once it has taken this many actions.
    pub max_actions: Option<u64>,
}

impl ExperimentSpec {
    pub fn new(env: EnvKind, agent: AgentKind) -> Self {
        ExperimentSpec {
            env,
            agent,
            agents: 10,
            budget: 300,
            window: 30,
            seed: 0,
            demos: Demos::None,
            config: LabConfig::default(),
            max_actions: None,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.agents == 0 {
            bail!("agent count must be at least 1");
        }
        if self.window == 0 {
            bail!("smoothing window must be positive");
        }
        if self.budget > 0 && self.window > self.budget {
            bail!("smoothing window {} exceeds the budget {}", self.window, self.budget);
        }
        if self.agent != AgentKind::Rfd && self.env != EnvKind::Taxi {
            bail!("the {} baseline only runs on taxi", self.agent);
        }
        self.config.rfd.agent_config().validate().map_err(anyhow::Error::msg)?;
        Ok(())
    }

    pub fn criterion(&self) -> Criterion {
        match self.agent {
            AgentKind::Rfd => Criterion::SuccessRate(self.config.convergence.success_rate),
            _ => Criterion::WithinOptimal(self.config.convergence.return_tolerance),
        }
    }
}

/// Seed of agent `i`'s own random stream. Agents with the same index share
/// it across agent kinds.
pub fn agent_seed(base: u64, i: usize) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((i as u64) << 32) ^ 0x5EED
}

/// Environment seed of attempt `k` of agent `i`.
pub fn env_seed(base: u64, i: usize, k: usize) -> u64 {
    base.wrapping_mul(0xD1B5_4A32_D192_ED03)
        .wrapping_add((i as u64) << 24)
        .wrapping_add(k as u64)
}

#[derive(Debug, Clone)]
pub struct AgentRun {
    pub index: usize,
    pub curve: Vec<CurvePoint>,
    pub convergence: Option<Convergence>,
    pub total_actions: u64,
    pub wall_time: f64,
    /// Final theory of an RfD agent.
    pub theory: Option<Theory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub index: usize,
    pub attempts: usize,
    pub total_actions: u64,
    pub convergence_attempt: Option<usize>,
    pub convergence_actions: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub env: EnvKind,
    pub agent: AgentKind,
    pub agents: usize,
    pub budget: usize,
    pub window: usize,
    pub seed: u64,
    pub criterion: Criterion,
    pub converged: usize,
    /// Mean over converged agents.
    pub mean_convergence_actions: Option<f64>,
    pub mean_curve_convergence: Option<Convergence>,
    pub per_agent: Vec<AgentSummary>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub runs: Vec<AgentRun>,
    pub mean: Vec<CurvePoint>,
    pub summary: Summary,
}

enum Loaded {
    Perceived(Vec<Demonstration>),
    Policy(DemoPolicy),
}

fn load(spec: &ExperimentSpec) -> anyhow::Result<Loaded> {
    Ok(match (&spec.demos, spec.agent) {
        (Demos::None, AgentKind::Rfd) => Loaded::Perceived(Vec::new()),
        (Demos::None, _) => Loaded::Policy(DemoPolicy::new()),
        (Demos::Files(paths), AgentKind::Rfd) => Loaded::Perceived(
            paths
                .iter()
                .map(|p| load_demo(p, Some(spec.env)))
                .collect::<anyhow::Result<_>>()?,
        ),
        (Demos::Files(paths), _) => Loaded::Policy(load_demo_policy(paths)?),
        (Demos::Perceived(d), AgentKind::Rfd) => Loaded::Perceived(d.clone()),
        (Demos::Policy(p), kind) if kind != AgentKind::Rfd => Loaded::Policy(p.clone()),
        _ => bail!("demonstrations do not match the {} agent", spec.agent),
    })
}

pub fn run_experiment(spec: &ExperimentSpec) -> anyhow::Result<ExperimentResult> {
    spec.validate()?;
    let demos = load(spec)?;
    let oracle = match demos {
        Loaded::Policy(_) => Some(OptimalReturns::compute()),
        Loaded::Perceived(_) => None,
    };
    let runs: Vec<AgentRun> = (0..spec.agents)
        .into_par_iter()
        .map(|i| match &demos {
            Loaded::Perceived(d) => run_rfd(spec, i, d),
            Loaded::Policy(p) => Ok(run_baseline(spec, i, p, oracle.as_ref().expect("oracle for baselines"))),
        })
        .collect::<anyhow::Result<_>>()?;

    let mean = mean_curve(&runs.iter().map(|r| r.curve.clone()).collect::<Vec<_>>());
    let converged: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.convergence.map(|c| c.cumulative_actions))
        .collect();
    let summary = Summary {
        env: spec.env,
        agent: spec.agent,
        agents: spec.agents,
        budget: spec.budget,
        window: spec.window,
        seed: spec.seed,
        criterion: spec.criterion(),
        converged: converged.len(),
        mean_convergence_actions: (!converged.is_empty())
            .then(|| converged.iter().sum::<f64>() / converged.len() as f64),
        mean_curve_convergence: convergence(&mean, spec.window, spec.criterion()),
        per_agent: runs
            .iter()
            .map(|r| AgentSummary {
                index: r.index,
                attempts: r.curve.len(),
                total_actions: r.total_actions,
                convergence_attempt: r.convergence.map(|c| c.attempt),
                convergence_actions: r.convergence.map(|c| c.cumulative_actions),
            })
            .collect(),
    };
    Ok(ExperimentResult { runs, mean, summary })
}

fn make_env(spec: &ExperimentSpec) -> AnyEnv {
    match spec.env {
        EnvKind::Taxi => AnyEnv::Taxi(TaxiEnv::new()),
        EnvKind::Courier => AnyEnv::Courier(CourierEnv::new(spec.config.courier.clone())),
    }
}

fn run_rfd(spec: &ExperimentSpec, i: usize, demos: &[Demonstration]) -> anyhow::Result<AgentRun> {
    let started = Instant::now();
    let mut env = make_env(spec);
    let mut agent = RfdAgent::<f64>::for_env(&env, spec.config.rfd.agent_config());
    for d in demos {
        agent
            .ingest_demonstration(d)
            .with_context(|| format!("agent {i} rejected a demonstration"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(agent_seed(spec.seed, i));
    let (mut raw, mut actions, mut steps) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..spec.budget {
        if spec.max_actions.is_some_and(|m| agent.total_actions() >= m) {
            break;
        }
        let record = agent.run_attempt(&mut env, env_seed(spec.seed, i, k), &mut rng);
        raw.push(if record.success() { 1.0 } else { 0.0 });
        actions.push(record.cumulative_actions);
        steps.push(record.steps);
    }
    let curve = build_curve(&raw, &actions, &steps, None, spec.window);
    Ok(AgentRun {
        index: i,
        convergence: convergence(&curve, spec.window, spec.criterion()),
        curve,
        total_actions: agent.total_actions(),
        wall_time: started.elapsed().as_secs_f64(),
        theory: Some(agent.theory().clone()),
    })
}

fn run_baseline(spec: &ExperimentSpec, i: usize, demos: &DemoPolicy, oracle: &OptimalReturns) -> AgentRun {
    let started = Instant::now();
    let kind = spec.agent.baseline().expect("baseline agent");
    let mut cfg = spec.config.baseline.clone();
    cfg.evaluate = true;
    let mut agent = BaselineAgent::<f64>::new(kind, cfg, demos);
    let mut env = TaxiEnv::new();
    let mut rng = ChaCha8Rng::seed_from_u64(agent_seed(spec.seed, i));
    let (mut raw, mut actions, mut steps, mut greedy, mut optimal) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..spec.budget {
        if spec.max_actions.is_some_and(|m| agent.total_actions() >= m) {
            break;
        }
        let r = agent.run_episode(&mut env, env_seed(spec.seed, i, k), &mut rng);
        raw.push(r.episode_return);
        actions.push(r.cumulative_actions);
        steps.push(r.steps as u64);
        greedy.push(r.greedy_return.expect("evaluation is on"));
        optimal.push(oracle.optimal_return(r.start_state()).expect("reset states are live"));
    }
    let curve = build_curve(&raw, &actions, &steps, Some((&greedy, &optimal)), spec.window);
    AgentRun {
        index: i,
        convergence: convergence(&curve, spec.window, spec.criterion()),
        curve,
        total_actions: agent.total_actions(),
        wall_time: started.elapsed().as_secs_f64(),
        theory: None,
    }
}

/// `agent_NN.csv` per agent, `mean.csv`, `summary.json`, and for RfD the
/// final theories as `theory_NN.txt`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for run in &result.runs {
        let f = fs::File::create(dir.join(format!("agent_{:02}.csv", run.index)))?;
        write_csv(f, &run.curve)?;
        if let Some(theory) = &run.theory {
            fs::write(dir.join(format!("theory_{:02}.txt", run.index)), theory.dump())?;
        }
    }
    write_csv(fs::File::create(dir.join("mean.csv"))?, &result.mean)?;
    let json = serde_json::to_string_pretty(&result.summary)?;
    fs::write(dir.join("summary.json"), json + "\n")?;
    Ok(())
}
