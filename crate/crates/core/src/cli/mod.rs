//! Command-line driver. Each subcommand builds an [`ExperimentConfig`]; `run`
//! replays one from a file. With `--out`, every run writes its config,
//! summary, data files and a digest manifest into that directory.

mod commands;
mod config;
mod manifest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::json;

pub use commands::{execute, RunOutput, Table};
pub use config::*;
pub use manifest::{sha256_hex, FileDigest, RunManifest, MANIFEST_FILE};

use crate::error::{Error, Result};
use crate::game::{DetectionMode, GameMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "locclab", version, about = "LOCC state-discrimination laboratory")]
pub struct Cli {
    /// Root seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for artifacts and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Format of the report printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

/// Parses a kebab-case enum through its serde representation.
fn kebab<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(json!(s)).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// Operator JSON file for ρ₀.
    #[arg(long, requires = "rho1", conflicts_with = "family")]
    pub rho0: Option<PathBuf>,
    #[arg(long, requires = "rho0")]
    pub rho1: Option<PathBuf>,
    /// werner (σ pair) or rho (σ ⊗ ψ pair).
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub d2: Option<usize>,
}

impl StateArgs {
    fn source(&self) -> Result<StateSource> {
        if let (Some(a), Some(b)) = (&self.rho0, &self.rho1) {
            return Ok(StateSource::Files {
                rho0: a.clone(),
                rho1: b.clone(),
            });
        }
        let need = |what: &str| Error::Config(format!("--{what} is required for this family"));
        match self.family.as_deref() {
            Some("werner") => Ok(StateSource::Werner {
                d: self.d.ok_or_else(|| need("d"))?,
            }),
            Some("rho") => Ok(StateSource::Rho {
                d: self.d.ok_or_else(|| need("d"))?,
                lambda: self.lambda.ok_or_else(|| need("lambda"))?,
                d2: self.d2.ok_or_else(|| need("d2"))?,
            }),
            Some(other) => Err(Error::Config(format!("unknown family {other:?}"))),
            None => Err(Error::Config("give --rho0/--rho1 or --family".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    /// oracle, capped-oracle, memory-block or teleport-measure.
    #[arg(long)]
    pub protocol: String,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub d1: usize,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub d2: Option<usize>,
    #[arg(long)]
    pub n_block: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub eps_target: f64,
    /// Dimension of the σ pair (teleport-measure).
    #[arg(long)]
    pub d: Option<usize>,
}

impl ProtocolArgs {
    fn spec(&self) -> Result<ProtocolSpec> {
        let need = |what: &str| Error::Config(format!("--{what} is required for protocol {}", self.protocol));
        Ok(match self.protocol.as_str() {
            "oracle" => ProtocolSpec::Oracle {
                p: self.p.ok_or_else(|| need("p"))?,
            },
            "capped-oracle" => ProtocolSpec::CappedOracle {
                p: self.p.ok_or_else(|| need("p"))?,
                penalty: self.penalty.ok_or_else(|| need("penalty"))?,
            },
            "memory-block" => ProtocolSpec::MemoryBlock {
                d1: self.d1,
                lambda: self.lambda.ok_or_else(|| need("lambda"))?,
                d2: self.d2.ok_or_else(|| need("d2"))?,
                n_block: self.n_block,
                eps_target: self.eps_target,
            },
            "teleport-measure" => ProtocolSpec::TeleportMeasure {
                d: self.d.ok_or_else(|| need("d"))?,
            },
            other => return Err(Error::Config(format!("unknown protocol {other:?}"))),
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal global success probability of a state pair.
    Helstrom(StateArgs),
    /// LOCC lower bound, PPT upper bound and Helstrom value.
    Bounds {
        #[command(flatten)]
        states: StateArgs,
        #[arg(long, default_value_t = 8)]
        random_bases: u32,
    },
    /// Entanglement entropy and closeness to product of ψ.
    Entropy {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        d2: usize,
        #[arg(long, default_value_t = 2)]
        d1: usize,
        #[arg(long)]
        eps_prime: Option<f64>,
    },
    /// Writes state families as operator JSON.
    Construct {
        /// pair, psi or max-entangled.
        #[arg(long, value_parser = kebab::<ConstructWhat>)]
        what: ConstructWhat,
        #[command(flatten)]
        states: StateArgs,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Multi-round discrimination game over independent trials.
    Simulate {
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// memory or catalytic.
        #[arg(long, value_parser = kebab::<GameMode>, default_value = "memory")]
        mode: GameMode,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        transcript_trials: Option<usize>,
    },
    /// Threshold detection protocol against synthetic round oracles.
    Detect {
        #[arg(long)]
        p_tau: f64,
        #[arg(long)]
        p_locc: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trace_distance: Option<f64>,
        /// catalyst-threshold or memory-threshold.
        #[arg(long, value_parser = kebab::<DetectionMode>, default_value = "catalyst-threshold")]
        mode: DetectionMode,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0.1)]
        penalty: f64,
    },
    /// Schmidt-type concentration of n copies of ψ.
    Concentrate {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        d2: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d1: usize,
        #[arg(long)]
        target: Option<f64>,
        /// exact, sampled or auto.
        #[arg(long, value_parser = kebab::<EnumerationMode>, default_value = "auto")]
        mode: EnumerationMode,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Empirical Pr(S_n ≥ r·n) at checkpoints.
    Rate {
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        blocks_list: Option<Vec<usize>>,
    },
    /// Replays an experiment config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-checks the digests recorded in a run manifest.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
    },
}

impl Command {
    fn params(&self) -> Result<CommandParams> {
        Ok(match self {
            Command::Helstrom(s) => CommandParams::Helstrom(StateParams { states: s.source()? }),
            Command::Bounds { states, random_bases } => CommandParams::Bounds(BoundsParams {
                states: states.source()?,
                random_bases: *random_bases,
            }),
            Command::Entropy {
                lambda,
                d2,
                d1,
                eps_prime,
            } => CommandParams::Entropy(EntropyParams {
                lambda: *lambda,
                d2: *d2,
                d1: *d1,
                eps_prime: *eps_prime,
            }),
            Command::Construct { what, states, dim } => CommandParams::Construct(ConstructParams {
                what: *what,
                states: match what {
                    ConstructWhat::Pair => Some(states.source()?),
                    _ => None,
                },
                lambda: states.lambda,
                d2: states.d2,
                dim: *dim,
            }),
            Command::Simulate {
                protocol,
                n,
                blocks,
                trials,
                mode,
                r,
                transcript_trials,
            } => CommandParams::Simulate(SimulateParams {
                protocol: protocol.spec()?,
                n: *n,
                blocks: *blocks,
                trials: *trials,
                mode: *mode,
                r: *r,
                transcript_trials: *transcript_trials,
            }),
            Command::Detect {
                p_tau,
                p_locc,
                delta,
                n,
                trace_distance,
                mode,
                trials,
                penalty,
            } => CommandParams::Detect(DetectParams {
                p_tau: *p_tau,
                p_locc: *p_locc,
                delta: *delta,
                n: *n,
                trace_distance: *trace_distance,
                mode: *mode,
                trials: *trials,
                penalty: *penalty,
            }),
            Command::Concentrate {
                lambda,
                d2,
                n,
                d1,
                target,
                mode,
                samples,
            } => CommandParams::Concentrate(ConcentrateParams {
                lambda: *lambda,
                d2: *d2,
                n: *n,
                d1: *d1,
                target: *target,
                mode: *mode,
                samples: *samples,
            }),
            Command::Rate {
                protocol,
                r,
                trials,
                n_list,
                blocks_list,
            } => CommandParams::Rate(RateParams {
                protocol: protocol.spec()?,
                r: *r,
                trials: *trials,
                n_list: n_list.clone(),
                blocks_list: blocks_list.clone(),
            }),
            Command::Run { .. } | Command::Verify { .. } => unreachable!("handled by run"),
        })
    }
}

/// Structured error report for standard error.
pub fn error_json(e: &Error) -> String {
    let mut v = json!({ "error": e.kind(), "message": e.to_string() });
    match e {
        Error::Parse { offset, .. } => v["offset"] = json!(offset),
        Error::Solver { iterations, lower, upper } => {
            v["iterations"] = json!(iterations);
            v["lower"] = json!(lower);
            v["upper"] = json!(upper);
        }
        Error::CatalystViolation { round, .. } => v["round"] = json!(round),
        _ => {}
    }
    v.to_string()
}

fn now_utc() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], digests: &mut Vec<FileDigest>) -> Result<()> {
    fs::write(dir.join(name), bytes)?;
    digests.push(FileDigest::of_bytes(name, bytes));
    Ok(())
}

/// Runs a config and persists its artifacts under `config.out`, if set.
/// Returns the command output.
pub fn run_config(config: &ExperimentConfig, threads: usize) -> Result<RunOutput> {
    let started = now_utc();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let output = pool.install(|| execute(&config.params, config.seed))?;
    if let Some(dir) = &config.out {
        fs::create_dir_all(dir)?;
        let config_text = config.to_json()?;
        let mut outputs = Vec::new();
        write_file(dir, "config.json", config_text.as_bytes(), &mut outputs)?;
        let summary = serde_json::to_string_pretty(&output.summary).map_err(|e| Error::Config(e.to_string()))?;
        write_file(dir, "summary.json", summary.as_bytes(), &mut outputs)?;
        if let Some(t) = &output.table {
            write_file(dir, output.table_name.unwrap_or("summary.csv"), &t.to_csv()?, &mut outputs)?;
        }
        for (name, bytes) in &output.files {
            write_file(dir, name, bytes, &mut outputs)?;
        }
        let inputs = output
            .inputs
            .iter()
            .map(|p| FileDigest::of_file(p))
            .collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: config.params.name().to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed: config.seed,
            seed_streams: output.seed_streams.clone(),
            started_utc: started,
            finished_utc: now_utc(),
            inputs,
            outputs,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(dir.join(MANIFEST_FILE), text)?;
    }
    Ok(output)
}

/// Entry point used by the binary.
pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.command {
        Command::Verify { manifest } => {
            let m = RunManifest::load(manifest)?;
            let dir = manifest.parent().unwrap_or(Path::new("."));
            m.verify(dir)?;
            println!("{}", json!({ "verified": true, "outputs": m.outputs.len(), "inputs": m.inputs.len() }));
            return Ok(());
        }
        Command::Run { config } => {
            let mut c = ExperimentConfig::from_json(&fs::read_to_string(config)?)?;
            if let Some(s) = cli.seed {
                c.seed = s;
            }
            if cli.out.is_some() {
                c.out = cli.out.clone();
            }
            c
        }
        cmd => ExperimentConfig {
            seed: cli.seed.unwrap_or(0),
            out: cli.out.clone(),
            params: cmd.params()?,
        },
    };
    let output = run_config(&config, cli.threads)?;
    let mut stdout = std::io::stdout().lock();
    match cli.format {
        Format::Json => writeln!(stdout, "{}", output.summary)?,
        Format::Csv => {
            if let Some(t) = output.stdout_table() {
                stdout.write_all(&t.to_csv()?)?;
            }
        }
    }
    Ok(())
}
