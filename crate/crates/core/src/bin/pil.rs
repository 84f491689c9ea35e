use clap::{Args, Parser, Subcommand};
use pil::scenario::{load_config, resume, run_scenario, sweep_alpha, verify_identities, RunOptions, ScenarioConfig};
use pil::PilError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pil", version, about = "Plasma-vacuum interface laboratory")]
struct Cli {
    /// Worker threads (falls back to PIL_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario file.
    config_pos: Option<PathBuf>,
    #[arg(long = "config")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Diagnostics every this many steps.
    #[arg(long)]
    cadence: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write series, checkpoints and a summary.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check geometric and operator identities on the initial interface.
    VerifyIdentities {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Repeat a run over several surface tension values.
    SweepAlpha {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Comma-separated values, e.g. 1,0.5,0.25,0.1.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
    },
    /// Continue a run from a checkpoint.
    Restore {
        checkpoint: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let j = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{j}");
    ExitCode::from(code)
}

fn fail_with(e: PilError) -> ExitCode {
    let code = match e {
        PilError::ParseError(_) | PilError::ValidationError { .. } => 2,
        _ => 1,
    };
    let mut j = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    if let PilError::ValidationError { path, .. } = &e {
        j["path"] = serde_json::json!(path);
    }
    eprintln!("{j}");
    ExitCode::from(code)
}

fn config(a: &ConfigArgs, out: Option<&OutArgs>) -> Result<ScenarioConfig, PilError> {
    let path = a
        .config
        .as_ref()
        .or(a.config_pos.as_ref())
        .ok_or_else(|| PilError::ParseError("no config path given".into()))?;
    let mut c = load_config(path)?;
    if let Some(o) = out {
        if let Some(d) = &o.out_dir {
            c.output.dir = d.display().to_string();
        }
        if let Some(k) = o.cadence {
            c.diagnostics.cadence = k;
        }
    }
    c.validate()?;
    Ok(c)
}

fn threads(cli: Option<usize>) -> Result<(), PilError> {
    let n = match cli {
        Some(n) => Some(n),
        None => match std::env::var("PIL_THREADS") {
            Ok(s) => Some(s.parse().map_err(|_| PilError::ValidationError {
                path: "PIL_THREADS".into(),
                message: format!("not a thread count: `{s}`"),
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| PilError::ValidationError { path: "threads".into(), message: e.to_string() })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("UsageError", e.to_string().trim(), 2),
    };
    if let Err(e) = threads(cli.threads) {
        return fail_with(e);
    }
    let result = match cli.cmd {
        Cmd::Run { cfg, out } => config(&cfg, Some(&out)).and_then(|c| {
            let opts = RunOptions { out_dir: PathBuf::from(&c.output.dir), halt_at: None };
            let s = run_scenario(&c, &opts)?;
            println!("config_sha256 {}", s.config_hash);
            println!("t_end {:.6} steps {} rows {}", s.final_state.t, s.final_state.step, s.rows);
            println!("series {}", s.series.display());
            for f in &s.flags {
                println!("flag {} at t = {:.4} (value {:.4e})", f.kind, f.t, f.value);
            }
            Ok(true)
        }),
        Cmd::VerifyIdentities { cfg } => config(&cfg, None).and_then(|c| {
            let lines = verify_identities(&c)?;
            lines.iter().for_each(|l| println!("{l}"));
            Ok(lines.iter().all(|l| l.pass))
        }),
        Cmd::SweepAlpha { cfg, out, alphas } => config(&cfg, Some(&out)).and_then(|c| {
            let r = sweep_alpha(&c, &alphas, &PathBuf::from(&c.output.dir))?;
            println!("alpha_a      alpha_b      l2_distance");
            for (i, d) in r.distances.iter().enumerate() {
                println!("{:<12} {:<12} {:.6e}", r.alphas[i], r.alphas[i + 1], d);
            }
            let trend = if r.monotone_decreasing { "monotone decreasing" } else { "not monotone" };
            println!("trend {trend}");
            Ok(true)
        }),
        Cmd::Restore { checkpoint, out_dir } => {
            let dir = out_dir.unwrap_or_else(|| checkpoint.parent().map(PathBuf::from).unwrap_or_default());
            resume(&checkpoint, &RunOptions { out_dir: dir, halt_at: None }).map(|s| {
                println!("t_end {:.6} steps {} rows {}", s.final_state.t, s.final_state.step, s.rows);
                true
            })
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => fail("IdentityCheckFailed", "at least one identity check failed", 1),
        Err(e) => fail_with(e),
    }
}
