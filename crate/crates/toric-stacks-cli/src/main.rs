//! Command-line interface for the toric-stacks library.
//!
//! Exit codes: 0 success, 1 validation/computation failure, 2 usage error
//! (including malformed JSON).

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::process::ExitCode;
use std::str::FromStr;
use toric_stacks::counting::{count_points, CountReport};
use toric_stacks::exact_math::Rat;
use toric_stacks::fan_io::{emit_fan_file, load_fan, FanIoError};
use toric_stacks::predict_report::{fit, predict, PredictedAsymptotics};
use toric_stacks::raised_heights::{anticanonical, lambda_contains, RaisedVector};
use toric_stacks::stacky_fan::StackyFan;
use toric_stacks::zeta_local::{gamma_factor, local_transform};

#[derive(Parser)]
#[command(
    name = "toric-stacks",
    about = "Heights, zeta functions, and point counts on split toric stacks over Q"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fan file inspection and validation.
    Fan {
        #[command(subcommand)]
        action: FanAction,
    },
    /// Count rational points of height ≤ B.
    Count(CountArgs),
    /// Count at several bounds, emitting a CSV sweep.
    CountSweep(SweepArgs),
    /// Local height zeta data at one prime.
    Zeta {
        #[command(subcommand)]
        action: ZetaAction,
    },
    /// Predicted asymptotic exponent and constant.
    Predict(PredictArgs),
    /// Count sweep + prediction + fit in one comparison table.
    Compare(CompareArgs),
}

#[derive(Subcommand)]
enum FanAction {
    /// Run the geometric validity checks.
    Validate { file: String },
    /// List sectors (Box(Σ) × G^D), ages, and −K_X.
    Sectors { file: String },
    /// Re-emit the fan file in canonical JSON.
    Normalize { file: String },
}

#[derive(Subcommand)]
enum ZetaAction {
    /// Evaluate the local transform R_Σ(p^{−Ξ(s)}) at one prime.
    Local {
        #[arg(long)]
        fan: String,
        #[arg(long)]
        prime: u64,
        /// Raised vector as JSON {"ray": [...], "sector": [...]} with
        /// rational entries; defaults to −K_X.
        #[arg(long)]
        s: Option<String>,
    },
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    fan: String,
    #[arg(long)]
    bound: f64,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write a B,N CSV row to this file.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    fan: String,
    /// Comma-separated bounds, e.g. 10,100,1000.
    #[arg(long)]
    bounds: String,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    fan: String,
    /// Euler-product truncation bound.
    #[arg(long, default_value_t = 10_000)]
    prime_bound: u64,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    fan: String,
    #[arg(long)]
    bounds: String,
    #[arg(long, default_value_t = 10_000)]
    prime_bound: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<String>,
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
    fn invalid(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<FanIoError> for Failure {
    fn from(e: FanIoError) -> Failure {
        match e {
            // Malformed JSON (with serde position diagnostics) and missing
            // files are usage errors; structural fan errors are validation
            // failures.
            FanIoError::Io { .. } | FanIoError::Json(_) => Failure::usage(e.to_string()),
            FanIoError::Fan(_) => Failure::invalid(e.to_string()),
        }
    }
}

/// Format with 12 significant decimal digits.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Trim trailing zeros but keep at least one fractional digit.
    if s.contains('.') {
        let t = s.trim_end_matches('0');
        let t = t.strip_suffix('.').unwrap_or(t);
        t.to_string()
    } else {
        s
    }
}

fn parse_raised(fan: &StackyFan, text: Option<&str>) -> Result<RaisedVector, Failure> {
    let Some(text) = text else {
        return Ok(anticanonical(fan));
    };
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Failure::usage(format!("bad --s JSON: {e}")))?;
    let field = |name: &str| -> Result<Vec<Rat>, Failure> {
        value
            .get(name)
            .and_then(|v| v.as_array())
            .ok_or_else(|| Failure::usage(format!("--s must have array field '{name}'")))?
            .iter()
            .map(|v| {
                let s = v
                    .as_str()
                    .map(str::to_string)
                    .or_else(|| v.as_i64().map(|n| n.to_string()))
                    .ok_or_else(|| Failure::usage("--s entries must be rational strings"))?;
                Rat::from_str(&s).map_err(|e| Failure::usage(format!("bad rational '{s}': {e}")))
            })
            .collect()
    };
    let s = RaisedVector {
        ray: field("ray")?,
        sector: field("sector")?,
    };
    if s.ray.len() != fan.rays().len() || s.sector.len() != fan.twisted_sectors().len() {
        return Err(Failure::usage(format!(
            "--s needs {} ray and {} sector entries",
            fan.rays().len(),
            fan.twisted_sectors().len()
        )));
    }
    Ok(s)
}

fn load_valid_fan(path: &str) -> Result<(String, StackyFan), Failure> {
    let (file, fan) = load_fan(path)?;
    let diag = fan.validate();
    if !diag.all_pass() {
        return Err(Failure::invalid(format!(
            "fan '{}' failed validation:\n{}",
            file.name,
            diag.summary()
        )));
    }
    Ok((file.name, fan))
}

fn parse_bounds(text: &str) -> Result<Vec<f64>, Failure> {
    let bounds: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let bounds = bounds.map_err(|e| Failure::usage(format!("bad --bounds: {e}")))?;
    if bounds.is_empty() {
        return Err(Failure::usage("--bounds must be nonempty"));
    }
    Ok(bounds)
}

fn sectors_json(name: &str, fan: &StackyFan) -> serde_json::Value {
    let k = anticanonical(fan);
    json!({
        "name": name,
        "sectors": fan.sectors().iter().map(|s| json!({
            "y": s.y.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "g": s.g,
            "coords": s.coords.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "age": s.age.to_string(),
            "untwisted": s.untwisted,
            "label": s.label(),
        })).collect::<Vec<_>>(),
        "minus_k": {
            "ray": k.ray.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "sector": k.sector.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        }
    })
}

fn print_count_report(r: &CountReport) {
    println!("N_H = {}", r.n_h);
    println!("B = {}", sig12(r.bound));
    println!("skeletons = {}", r.skeletons);
    println!("unit_multiplicity = {}", r.unit_multiplicity);
    println!("wall_time_ms = {}", r.wall_time_ms);
    for (label, count) in &r.sector_tally {
        println!("sector {label} : {count}");
    }
}

fn write_or_print(out: Option<&str>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::invalid(format!("cannot write {path}: {e}"))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn predict_json(p: &PredictedAsymptotics) -> serde_json::Value {
    json!({
        "b": p.b,
        "x_value": sig12(p.x_value),
        "gamma": sig12(p.gamma),
        "gamma_tail": format!("{:e}", p.gamma_tail),
        "h_inf": sig12(p.h_inf),
        "gd_order": p.gd_order,
        "sha_order": p.sha_order,
        "b_group_order": p.b_group_order,
        "justification": p.justification,
        "unit_multiplicity": p.unit_multiplicity,
        "C": sig12(p.c),
        "normalization_tag": p.normalization_tag,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Fan { action } => match action {
            FanAction::Validate { file } => {
                let (fan_file, fan) = load_fan(&file)?;
                let diag = fan.validate();
                println!("fan '{}':", fan_file.name);
                print!("{}", diag.summary());
                if diag.all_pass() {
                    println!("VALID");
                    Ok(())
                } else {
                    Err(Failure::invalid("fan failed validation".to_string()))
                }
            }
            FanAction::Sectors { file } => {
                let (name, fan) = load_valid_fan(&file)?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&sectors_json(&name, &fan)).unwrap()
                );
                Ok(())
            }
            FanAction::Normalize { file } => {
                let (fan_file, fan) = load_fan(&file)?;
                let normalized =
                    toric_stacks::fan_io::FanFile::from_fan(&fan_file.name, &fan);
                println!("{}", emit_fan_file(&normalized));
                Ok(())
            }
        },
        Command::Count(args) => {
            let (_, fan) = load_valid_fan(&args.fan)?;
            let s = parse_raised(&fan, args.s.as_deref())?;
            if !lambda_contains(&fan, &s, true) {
                return Err(Failure::usage("--s is not in the interior of Lambda"));
            }
            let report = count_points(&fan, &s, args.bound, args.threads)
                .map_err(|e| Failure::invalid(e.to_string()))?;
            print_count_report(&report);
            if let Some(out) = &args.out {
                let csv = format!("B,N\n{},{}\n", sig12(report.bound), report.n_h);
                write_or_print(Some(out), &csv)?;
            }
            Ok(())
        }
        Command::CountSweep(args) => {
            let (_, fan) = load_valid_fan(&args.fan)?;
            let s = parse_raised(&fan, args.s.as_deref())?;
            let bounds = parse_bounds(&args.bounds)?;
            let mut csv = String::from("B,N\n");
            for &b in &bounds {
                let report = count_points(&fan, &s, b, args.threads)
                    .map_err(|e| Failure::invalid(e.to_string()))?;
                csv.push_str(&format!("{},{}\n", sig12(b), report.n_h));
            }
            write_or_print(args.out.as_deref(), &csv)
        }
        Command::Zeta { action } => match action {
            ZetaAction::Local { fan, prime, s } => {
                let (_, fan) = load_valid_fan(&fan)?;
                let sv = parse_raised(&fan, s.as_deref())?;
                let value = local_transform(&fan, &sv, prime)
                    .map_err(|e| Failure::invalid(e.to_string()))?;
                let gamma = gamma_factor(&fan, &sv, prime)
                    .map_err(|e| Failure::invalid(e.to_string()))?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "prime": prime,
                        "local_transform": sig12(value),
                        "gamma_factor": sig12(gamma),
                    }))
                    .unwrap()
                );
                Ok(())
            }
        },
        Command::Predict(args) => {
            let (_, fan) = load_valid_fan(&args.fan)?;
            let pred =
                predict(&fan, args.prime_bound).map_err(|e| Failure::invalid(e.to_string()))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&predict_json(&pred)).unwrap()
            );
            Ok(())
        }
        Command::Compare(args) => {
            let (_, fan) = load_valid_fan(&args.fan)?;
            let bounds = parse_bounds(&args.bounds)?;
            let s = anticanonical(&fan);
            let pred =
                predict(&fan, args.prime_bound).map_err(|e| Failure::invalid(e.to_string()))?;
            let mut samples: Vec<(f64, u64)> = Vec::new();
            for &b in &bounds {
                let report = count_points(&fan, &s, b, args.threads)
                    .map_err(|e| Failure::invalid(e.to_string()))?;
                samples.push((b, report.n_h));
            }
            let fit_report = fit(&samples, pred.b).map_err(|e| Failure::invalid(e.to_string()))?;
            let mut csv = String::from("B,N,predicted_C,predicted_b,C_hat,exponent_hat\n");
            for &(b, n) in &samples {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    sig12(b),
                    n,
                    sig12(pred.c),
                    pred.b,
                    sig12(fit_report.c_hat),
                    sig12(fit_report.exponent_hat),
                ));
            }
            write_or_print(args.out.as_deref(), &csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
