//! `beamho`: train, evaluate and compare handover policies.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use beamho_core::harness::output::{write_episodes, write_gains, write_histograms, write_trace};
use beamho_core::{
    parse_scenario, scenario_source, train, AgentConfig, BaselinePolicy, CmabAgent, ComparisonResult, EpisodeRun,
    Error, GeniePolicy, HandoverPolicy, QTable, RandomPolicy, ScenarioBundle,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use manifest::{now_ms, Job, RunManifest, MANIFEST_VERSION};

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "beamho", version, about = "Beam-aware handover simulator")]
struct Cli {
    /// Worker threads for episode-level parallelism (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Q-table by random exploration and save it.
    Train(TrainArgs),
    /// Run evaluation episodes of one policy.
    Eval(EvalArgs),
    /// Paired episodes of the bandit agent against the access-beam baseline.
    Compare(CompareArgs),
    /// Load a scenario, run all checks and print the resolved document.
    ValidateScenario {
        /// Built-in name (env1, env2, env3, fig4) or path to a scenario file.
        scenario: String,
    },
    /// Summarise a saved Q-table.
    ShowQtable {
        path: PathBuf,
        /// Also print the first N entries.
        #[arg(long, default_value_t = 0)]
        entries: usize,
    },
    /// Re-run the command recorded in a run manifest.
    Replay {
        manifest: PathBuf,
        /// Write artifacts under this directory instead of the recorded paths.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Built-in name (env1, env2, env3, fig4) or path to a scenario file.
    #[arg(long)]
    scenario: String,
    /// Master seed of the run.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Treat a Q-table trained on another scenario as an error.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Exploration steps (default: the scenario's budget).
    #[arg(long)]
    steps: Option<u64>,
    /// Probability of a random action, in [0, 1] (default: the scenario's).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value = "qtable.json")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyName {
    Baseline,
    Cmab,
    Genie,
    Random,
}

impl PolicyName {
    fn label(self) -> &'static str {
        match self {
            PolicyName::Baseline => "baseline",
            PolicyName::Cmab => "cmab",
            PolicyName::Genie => "genie",
            PolicyName::Random => "random",
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    policy: PolicyName,
    /// Q-table for the cmab policy.
    #[arg(long, required_if_eq("policy", "cmab"))]
    qtable: Option<PathBuf>,
    /// Number of episodes (default: the scenario's).
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Also write per-step traces.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    qtable: PathBuf,
    /// Number of episodes (default: the scenario's).
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Also write per-step traces.
    #[arg(long)]
    trace: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BEAMHO_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Validation problems and I/O failures get distinct exit codes.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return if e.is_validation() { EXIT_VALIDATION } else { EXIT_IO };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
        if cause.is::<serde_json::Error>() {
            return EXIT_VALIDATION;
        }
    }
    EXIT_FAILURE
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!(Error::InvalidConfig("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Train(a) => {
            let ctx = RunContext::new(&a.common)?;
            let agent = ctx.bundle.training.agent;
            let epsilon = a.epsilon.unwrap_or(agent.epsilon);
            AgentConfig { epsilon, ..agent }.check()?;
            let steps = a.steps.unwrap_or(agent.max_steps);
            ctx.execute(Job::Train {
                steps,
                epsilon,
                out: a.out,
            })
        }
        Command::Eval(a) => {
            let ctx = RunContext::new(&a.common)?;
            let episodes = a.episodes.unwrap_or(ctx.bundle.evaluation.episodes);
            ctx.execute(Job::Eval {
                policy: a.policy.label().into(),
                qtable: a.qtable,
                episodes,
                out_dir: a.out_dir,
                trace: a.trace,
            })
        }
        Command::Compare(a) => {
            let ctx = RunContext::new(&a.common)?;
            let episodes = a.episodes.unwrap_or(ctx.bundle.evaluation.episodes);
            ctx.execute(Job::Compare {
                qtable: a.qtable,
                episodes,
                out_dir: a.out_dir,
                trace: a.trace,
            })
        }
        Command::ValidateScenario { scenario } => {
            let bundle = parse_scenario(&scenario_source(&scenario)?)?;
            println!("{}", bundle.resolved_json()?);
            eprintln!(
                "scenario '{}' is valid: {} stations, deployment {}",
                bundle.name,
                bundle.deployment.num_stations(),
                bundle.deployment.fingerprint()
            );
            Ok(())
        }
        Command::ShowQtable { path, entries } => show_qtable(&path, entries),
        Command::Replay { manifest, out_dir } => {
            let m = RunManifest::read(&manifest)?;
            let text = serde_json::to_string(&m.scenario)?;
            let ctx = RunContext {
                bundle: parse_scenario(&text)?,
                scenario_ref: m.scenario_ref.clone(),
                scenario_doc: m.scenario.clone(),
                seed: m.seed,
                strict: m.strict,
            };
            let job = match &out_dir {
                Some(dir) => m.job.relocated(dir),
                None => m.job.clone(),
            };
            ctx.execute(job)
        }
    }
}

struct RunContext {
    bundle: ScenarioBundle,
    scenario_ref: String,
    scenario_doc: serde_json::Value,
    seed: u64,
    strict: bool,
}

impl RunContext {
    fn new(common: &Common) -> Result<Self> {
        let text = scenario_source(&common.scenario)?;
        let bundle = parse_scenario(&text)?;
        Ok(Self {
            bundle,
            scenario_ref: common.scenario.clone(),
            scenario_doc: serde_json::from_str(&text)?,
            seed: common.seed,
            strict: common.strict,
        })
    }

    /// Write the manifest, run the job, then stamp the manifest as finished.
    fn execute(self, job: Job) -> Result<()> {
        match &job {
            Job::Train { out, .. } => {
                if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                }
            }
            Job::Eval { out_dir, .. } | Job::Compare { out_dir, .. } => {
                fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            }
        }
        let manifest_path = job.manifest_path();
        let mut manifest = RunManifest {
            manifest_version: MANIFEST_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: self.seed,
            strict: self.strict,
            job: job.clone(),
            scenario_ref: self.scenario_ref.clone(),
            deployment_hash: self.bundle.deployment.fingerprint(),
            scenario: self.scenario_doc.clone(),
            artifacts: artifacts(&job),
            started_unix_ms: now_ms(),
            finished_unix_ms: None,
        };
        manifest.write(&manifest_path)?;
        log::info!("{} started, manifest {}", job.name(), manifest_path.display());

        match &job {
            Job::Train { steps, epsilon, out } => self.train(*steps, *epsilon, out)?,
            Job::Eval {
                policy,
                qtable,
                episodes,
                out_dir,
                trace,
            } => self.eval(policy, qtable.as_deref(), *episodes, out_dir, *trace)?,
            Job::Compare {
                qtable,
                episodes,
                out_dir,
                trace,
            } => self.compare(qtable, *episodes, out_dir, *trace)?,
        }

        manifest.finished_unix_ms = Some(now_ms());
        manifest.write(&manifest_path)
    }

    fn train(&self, steps: u64, epsilon: f64, out: &Path) -> Result<()> {
        let mut cfg = self.bundle.training;
        cfg.agent.epsilon = epsilon;
        let table = train(&self.bundle.deployment, &cfg, self.seed, steps)?;
        table.save(out)?;
        let n = table.num_actions();
        let full = table.iter().filter(|(_, acts)| acts.len() == n).count();
        println!("wrote {}", out.display());
        println!("steps             {steps}");
        println!("contexts          {}", table.len());
        println!("records           {}", table.num_records());
        println!(
            "actions/context   {:.2} of {n}",
            table.num_records() as f64 / table.len().max(1) as f64
        );
        println!(
            "fully explored    {full} ({:.1}%)",
            100.0 * full as f64 / table.len().max(1) as f64
        );
        Ok(())
    }

    fn load_agent(&self, path: &Path) -> Result<CmabAgent> {
        let d = &self.bundle.deployment;
        let (table, _) = QTable::load(path, Some(&d.fingerprint()), self.strict)?;
        if table.num_actions() != d.num_stations() {
            bail!(Error::InvalidConfig(format!(
                "{} has {} actions but the scenario has {} stations",
                path.display(),
                table.num_actions(),
                d.num_stations()
            )));
        }
        if table.is_empty() {
            bail!(Error::UntrainedAgent);
        }
        Ok(CmabAgent::new(table))
    }

    fn eval_config(&self, episodes: usize) -> beamho_core::EvalConfig {
        beamho_core::EvalConfig {
            episodes,
            ..self.bundle.evaluation
        }
    }

    fn eval(&self, policy: &str, qtable: Option<&Path>, episodes: usize, out_dir: &Path, trace: bool) -> Result<()> {
        let agent;
        let baseline = BaselinePolicy(self.bundle.baseline);
        let p: &dyn HandoverPolicy = match policy {
            "baseline" => &baseline,
            "genie" => &GeniePolicy,
            "random" => &RandomPolicy,
            "cmab" => {
                let Some(path) = qtable else {
                    bail!(Error::InvalidConfig("the cmab policy needs --qtable".into()));
                };
                agent = self.load_agent(path)?;
                &agent
            }
            other => bail!(Error::InvalidConfig(format!("unknown policy '{other}'"))),
        };
        let eval = self.eval_config(episodes);
        let runs = beamho_core::run_episodes(&self.bundle.deployment, p, &eval, self.seed, trace)?;
        write_episodes(&out_dir.join("episodes.csv"), runs.iter().map(|r| &r.metrics))?;
        let metrics: Vec<_> = runs.iter().map(|r| r.metrics.clone()).collect();
        let pooled = ComparisonResult::pooled_histogram(&metrics).expect("at least one episode");
        write_histograms(&out_dir.join("histogram.csv"), [(p.label(), &pooled)])?;
        if trace {
            write_traces(out_dir, p.label(), &runs)?;
        }
        let mean = metrics.iter().map(|m| m.mean_link_rsrp_dbm).sum::<f64>() / metrics.len() as f64;
        println!("{} over {episodes} episodes: mean link RSRP {mean:.3} dBm", p.label());
        Ok(())
    }

    fn compare(&self, qtable: &Path, episodes: usize, out_dir: &Path, trace: bool) -> Result<()> {
        let agent = self.load_agent(qtable)?;
        let baseline = BaselinePolicy(self.bundle.baseline);
        let eval = self.eval_config(episodes);
        let d = &self.bundle.deployment;
        let (result, traces) = if trace {
            let r = beamho_core::run_episodes(d, &baseline, &eval, self.seed, true)?;
            let c = beamho_core::run_episodes(d, &agent, &eval, self.seed, true)?;
            let result = ComparisonResult::new(
                r.iter().map(|x| x.metrics.clone()).collect(),
                c.iter().map(|x| x.metrics.clone()).collect(),
            );
            (result, Some((r, c)))
        } else {
            (beamho_core::compare(d, &agent, &self.bundle.baseline, &eval, self.seed)?, None)
        };
        write_gains(&out_dir.join("gain.csv"), &result)?;
        write_episodes(
            &out_dir.join("episodes.csv"),
            result.reference.iter().chain(&result.candidate),
        )?;
        let r = ComparisonResult::pooled_histogram(&result.reference).expect("at least one episode");
        let c = ComparisonResult::pooled_histogram(&result.candidate).expect("at least one episode");
        write_histograms(&out_dir.join("histogram.csv"), [("baseline", &r), ("cmab", &c)])?;
        if let Some((r, c)) = traces {
            write_traces(out_dir, "baseline", &r)?;
            write_traces(out_dir, "cmab", &c)?;
        }
        for (i, g) in result.gains_db.iter().enumerate() {
            println!("episode {i:>3}  gain {g:+.3} dB");
        }
        println!(
            "gain mean {:+.3} dB, min {:+.3} dB, max {:+.3} dB",
            result.mean_gain(),
            result.min_gain(),
            result.max_gain()
        );
        Ok(())
    }
}

fn trace_name(policy: &str, episode: usize) -> String {
    format!("trace_{policy}_{episode}.csv")
}

fn write_traces(dir: &Path, policy: &str, runs: &[EpisodeRun]) -> Result<()> {
    for (i, run) in runs.iter().enumerate() {
        let rows = run.trace.as_deref().unwrap_or_default();
        write_trace(&dir.join(trace_name(policy, i)), policy, rows)?;
    }
    Ok(())
}

/// Output files a job will produce.
fn artifacts(job: &Job) -> Vec<PathBuf> {
    match job {
        Job::Train { out, .. } => vec![out.clone()],
        Job::Eval {
            policy,
            episodes,
            out_dir,
            trace,
            ..
        } => {
            let mut v = vec![out_dir.join("episodes.csv"), out_dir.join("histogram.csv")];
            if *trace {
                v.extend((0..*episodes).map(|e| out_dir.join(trace_name(policy, e))));
            }
            v
        }
        Job::Compare {
            episodes,
            out_dir,
            trace,
            ..
        } => {
            let mut v = vec![
                out_dir.join("gain.csv"),
                out_dir.join("episodes.csv"),
                out_dir.join("histogram.csv"),
            ];
            if *trace {
                for p in ["baseline", "cmab"] {
                    v.extend((0..*episodes).map(|e| out_dir.join(trace_name(p, e))));
                }
            }
            v
        }
    }
}

fn show_qtable(path: &Path, entries: usize) -> Result<()> {
    let (table, _) = QTable::load(path, None, false)?;
    let m = &table.metadata;
    println!("file              {}", path.display());
    println!("scenario hash     {}", m.scenario_hash);
    println!("training seed     {}", m.training_seed);
    println!("bin width         {} dB", table.bin_width_db());
    println!("actions           {}", table.num_actions());
    println!("contexts          {}", table.len());
    println!("records           {}", table.num_records());
    println!("visits            {}", table.total_visits());
    for (ctx, acts) in table.iter().take(entries) {
        let best = beamho_core::cmab::greedy_action(acts, ctx.serving_bs);
        let list: Vec<String> = acts
            .iter()
            .map(|(a, s)| format!("{a}:{:.2}/{}", s.mean_reward, s.visit_count))
            .collect();
        println!(
            "serving {} bins {:?} -> {:?}  [{}]",
            ctx.serving_bs,
            ctx.bins,
            best,
            list.join(" ")
        );
    }
    Ok(())
}
