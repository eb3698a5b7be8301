//! `arboreal`: build tree-action systems, diagnose their stabilizer and
//! centralizer chains, and run the verification suites.
//!
//! Exit codes: 0 all checks pass, 1 check failure, 2 usage or
//! configuration error, 3 certification failure.

mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use arboreal_core::chains::{LevelGroupSystem, SystemJson};
use arboreal_core::classify::{chain_report, enum_cap_from_env};
use arboreal_core::constructions::{preset, BuildConfig};
use arboreal_core::tree::PathPrefix;
use arboreal_core::Error;

#[derive(Parser)]
#[command(
    name = "arboreal",
    version,
    about = "finite-depth tree actions: build, diagnose, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a system from a config file or preset and write its JSON.
    Build(BuildArgs),
    /// Compute the K/Z chain report for a built system.
    Diagnose(DiagnoseArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Convert a chain report between JSON and CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Config file path, or a preset name: theorem1-default, alt-wreath,
    /// cyclic-wreath-<m>.
    #[arg(long)]
    config: String,
    /// Output path for the system JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Depth for presets that take one.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Path to a system JSON produced by `build`.
    #[arg(long)]
    config: PathBuf,
    /// Base path digits, comma-separated (default: all zeros).
    #[arg(long)]
    path: Option<String>,
    /// Largest chain level to analyze.
    #[arg(long, default_value_t = 1)]
    n_max: usize,
    /// Analysis depth (default: the system's own depth).
    #[arg(long)]
    depth: Option<usize>,
    /// Levels kept between n_max and the truncation boundary.
    #[arg(long, default_value_t = 2)]
    buffer: usize,
    /// Output path for the report JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name: lemma41, prop46, primitivity, wreath-kn,
    /// wreath-z-kernel, nonhausdorff, product-witness, metric.
    #[arg(long)]
    suite: String,
    /// Output path for the run manifest JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Path to a chain report JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output format.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Report(args) => cmd_report(args),
    };
    match code {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn from_core(err: Error) -> Failure {
    let code = match err {
        Error::Certification(_) => 3,
        _ => 2,
    };
    Failure {
        code,
        message: err.to_string(),
    }
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn load_system(path: &Path) -> Result<LevelGroupSystem, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let parsed: SystemJson =
        serde_json::from_str(&text).map_err(|e| usage(format!("bad system JSON: {e}")))?;
    parsed.unpack().map_err(from_core)
}

fn cmd_build(args: BuildArgs) -> Result<ExitCode, Failure> {
    let path = Path::new(&args.config);
    let config: BuildConfig = if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("bad config JSON: {e}")))?
    } else {
        preset(&args.config, args.depth).map_err(from_core)?
    };
    let sys = config.build().map_err(from_core)?;

    println!("depth {}", sys.depth());
    for n in 0..=sys.depth() {
        let order = sys.level_group(n).map_err(from_core)?.order().clone();
        println!("level {n}: {order}");
    }
    let json = serde_json::to_string_pretty(&SystemJson::pack(&sys)).unwrap();
    if let Some(out) = &args.out {
        std::fs::write(out, json)
            .map_err(|e| usage(format!("cannot write {}: {e}", out.display())))?;
        println!("wrote {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<ExitCode, Failure> {
    let sys = load_system(&args.config)?;
    let sys = match args.depth {
        Some(d) if d != sys.depth() => sys.truncated(d).map_err(from_core)?,
        _ => sys,
    };
    let digits = match &args.path {
        Some(text) => text
            .split(',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| usage(format!("bad path digit {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![0; sys.depth()],
    };
    let x = PathPrefix::new(sys.index(), digits).map_err(from_core)?;
    let report =
        chain_report(&sys, &x, args.n_max, args.buffer, enum_cap_from_env()).map_err(from_core)?;
    write_or_print(&args.out, &report.to_json_string())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let start = Instant::now();
    let checks = suites::run_suite(&args.suite).map_err(from_core)?;
    let mut all_pass = true;
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.detail
        );
        all_pass &= c.pass;
    }
    println!(
        "suite {}: {}",
        args.suite,
        if all_pass { "pass" } else { "FAIL" }
    );

    let manifest = json!({
        "config_digest": hex_digest(args.suite.as_bytes()),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "suite": args.suite,
        "depth": suites::suite_depth(&args.suite),
        "outcomes": checks.iter().map(|c| json!({
            "check": c.name,
            "pass": c.pass,
            "detail": c.detail,
        })).collect::<Vec<Value>>(),
        "wall_ms": start.elapsed().as_millis() as u64,
    });
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string_pretty(&manifest).unwrap())
            .map_err(|e| usage(format!("cannot write {}: {e}", out.display())))?;
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode, Failure> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.config.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("bad report JSON: {e}")))?;
    match args.format.as_str() {
        "json" => write_or_print(&args.out, &serde_json::to_string_pretty(&value).unwrap())?,
        "csv" => {
            let rows = value["rows"]
                .as_array()
                .ok_or_else(|| usage("report JSON has no rows"))?;
            let mut csv = String::from(
                "n,k_order,z_upper_order,z_depth_order,z_equals_k,z_bottom_kernel_certified\n",
            );
            for row in rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row["n"],
                    row["k_order"].as_str().unwrap_or("?"),
                    row["z_upper_order"].as_str().unwrap_or("?"),
                    row["z_depth_order"].as_str().unwrap_or("?"),
                    row["flags"]["z_equals_k"],
                    row["flags"]["z_bottom_kernel_certified"],
                ));
            }
            write_or_print(&args.out, csv.trim_end())?;
        }
        other => {
            return Err(usage(format!(
                "unknown format {other:?}; expected json|csv"
            )))
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
