use aeropush::agents::MppiPlanner;
use aeropush::batch::{BatchConfig, BatchEnv};
use aeropush::config::RunConfig;
use aeropush::episode::GoalMode;
use aeropush::harness::{
    export_csv, export_trajectory, run_episode, run_eval, Agent, AgentKind, EvalConfig,
    ProtocolSession,
};
use aeropush::rng::env_stream;
use aeropush::SimError;
use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "aeropush", about = "Batched aerial pushing simulator and evaluation harness")]
struct Cli {
    /// Optional TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an agent across friction values and export a CSV summary.
    Eval {
        #[arg(long, value_enum, default_value = "scripted")]
        agent: AgentKind,
        /// Friction values to evaluate (repeatable).
        #[arg(long = "friction", num_args = 1..)]
        friction: Option<Vec<f64>>,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, value_enum, default_value = "alternating")]
        goal_mode: CliGoalMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a single episode and export its trajectory CSV.
    Rollout {
        #[arg(long, value_enum, default_value = "scripted")]
        agent: AgentKind,
        #[arg(long, default_value_t = 0.4)]
        friction: f64,
        #[arg(long, value_enum, default_value = "alternating")]
        goal_mode: CliGoalMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the NDJSON protocol over stdio or TCP for external agents.
    Serve {
        /// TCP address to listen on; stdio when omitted.
        #[arg(long)]
        tcp: Option<String>,
        #[arg(long, default_value_t = 32)]
        n_envs: usize,
        /// Include base64 depth images in responses.
        #[arg(long)]
        include_depth: bool,
        #[arg(long, value_enum, default_value = "alternating")]
        goal_mode: CliGoalMode,
        /// Enable training-mode collision resets.
        #[arg(long)]
        training: bool,
    },
    /// Measure aggregate environment throughput.
    Bench {
        #[arg(long, default_value_t = 32)]
        n_envs: usize,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Render 64x64 depth images each step.
        #[arg(long)]
        depth: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CliGoalMode {
    Alternating,
    Random,
}

impl From<CliGoalMode> for GoalMode {
    fn from(m: CliGoalMode) -> GoalMode {
        match m {
            CliGoalMode::Alternating => GoalMode::Alternating,
            CliGoalMode::Random => GoalMode::Random,
        }
    }
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), SimError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> Result<(), SimError> {
    let cli = Cli::parse();
    let run = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };

    match cli.command {
        Command::Eval { agent, friction, episodes, goal_mode, seed, out } => {
            let mut cfg = EvalConfig {
                agent,
                episodes_per_value: episodes,
                goal_mode: goal_mode.into(),
                seed,
                ..Default::default()
            };
            if let Some(f) = friction {
                cfg.friction_values = f;
            }
            let rows = run_eval(&cfg, &run);
            write_out(&out, &export_csv(&rows)?)?;
        }
        Command::Rollout { agent, friction, goal_mode, seed, out } => {
            let mut scene = run.scene.clone();
            scene.friction_mu = friction;
            let mut ep_cfg = run.episode;
            ep_cfg.goal_mode = goal_mode.into();
            ep_cfg.training_mode = false;
            let mut episode = aeropush::episode::Episode::new(
                scene,
                run.geometry.clone(),
                ep_cfg,
                run.camera.clone(),
                run.bounds,
                run.reward,
                env_stream(seed, 0),
            );
            let mut driver = match agent {
                AgentKind::Zero => Agent::Zero,
                AgentKind::Scripted => Agent::Scripted(run.scripted),
                AgentKind::Mppi => {
                    Agent::Mppi(Box::new(MppiPlanner::new(run.mppi)), env_stream(seed, u64::MAX))
                }
            };
            let (stats, log) = run_episode(&mut episode, &mut driver, true);
            eprintln!(
                "episode done: steps={} goals={} reward={:.3} reason={:?}",
                stats.steps, stats.goals_completed, stats.total_reward, stats.reset_reason
            );
            write_out(&out, &export_trajectory(&log))?;
        }
        Command::Serve { tcp, n_envs, include_depth, goal_mode, training } => {
            let mut batch_cfg = BatchConfig {
                n_envs,
                scene: run.scene.clone(),
                geometry: run.geometry.clone(),
                episode: run.episode,
                camera: run.camera.clone(),
                bounds: run.bounds,
                reward: run.reward,
                ..Default::default()
            };
            batch_cfg.episode.goal_mode = goal_mode.into();
            batch_cfg.episode.training_mode = training;
            let mut session = ProtocolSession::new(batch_cfg, include_depth);
            match tcp {
                Some(addr) => {
                    let listener = std::net::TcpListener::bind(&addr)?;
                    eprintln!("listening on {addr}");
                    let (stream, peer) = listener.accept()?;
                    eprintln!("client connected: {peer}");
                    let reader = std::io::BufReader::new(stream.try_clone()?);
                    session.serve(reader, stream)?;
                }
                None => {
                    let stdin = std::io::stdin();
                    let stdout = std::io::stdout();
                    session.serve(stdin.lock(), stdout.lock())?;
                }
            }
        }
        Command::Bench { n_envs, steps, depth } => {
            let mut cfg = BatchConfig { n_envs, ..Default::default() };
            if n_envs % 2 != 0 {
                cfg.friction_override = Some(0.4);
            }
            cfg.episode.render_depth = depth;
            let mut batch = BatchEnv::new(cfg)?;
            batch.reset();
            let actions = vec![aeropush::action::Action([0.5, 0.1, 0.0, 0.0]); n_envs];
            let start = std::time::Instant::now();
            for _ in 0..steps {
                batch.step(&actions)?;
            }
            let elapsed = start.elapsed().as_secs_f64();
            let total = (n_envs * steps) as f64;
            println!(
                "{} env-steps in {:.3} s: {:.0} steps/s (depth: {})",
                total, elapsed, total / elapsed, depth
            );
            std::io::stdout().flush()?;
        }
    }
    Ok(())
}
