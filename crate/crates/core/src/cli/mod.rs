//! Command-line front end. Every command renders either a CSV table or a
//! JSON envelope with sorted keys; see [`output`].
//!
//! Exit codes are a stable contract: 0 success, 1 a mathematical check
//! failed, 2 usage or parse error, 3 feasibility or resource limit.

pub mod output;

use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms;
use crate::numerics::SummationMode;
use crate::optimality::{self, WitnessOptions, DEFAULT_FEASIBILITY_THRESHOLD};
use crate::sequences::{parse_builtin, parse_sequence_text, Sequence, SupportCap};
use crate::spectral::{self, DEFAULT_EIGEN_TOL};
use crate::weights::{self, WeightKind, WeightTable};

pub use output::{Envelope, Format};

/// Environment variable overriding the default support cap.
pub const SUPPORT_CAP_ENV: &str = "HARDYLAB_SUPPORT_CAP";

pub const MAX_WEIGHT_INDEX: u64 = 10_000_000;
pub const MAX_SPECTRUM_SIZE: usize = 100_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hardylab",
    version,
    about = "Check the sharp discrete Hardy inequality, its remainder identity and optimality"
)]
pub struct Cli {
    /// Summation policy used by every reduction.
    #[arg(long, value_enum, global = true, default_value_t = ModeArg::Compensated)]
    pub mode: ModeArg,

    /// Working precision of `--mode extended`, in bits.
    #[arg(long, global = true)]
    pub bits: Option<u32>,

    /// Output format; tables default to csv, single results to json.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Naive,
    Compensated,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Kpp,
    Classical,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the improved and classical weights and their gap.
    Weights {
        #[arg(long, default_value_t = 1)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// Add a `perturbed` column with the improved weight raised by EPS at K.
        #[arg(long, value_name = "K:EPS")]
        perturb: Option<String>,
    },
    /// Evaluate D, W, R for a sequence and check D = W + R.
    Verify {
        /// Builtin name (`e1`, `e:K`, `step:M`, `sqrt:M`, `probe:N=L`) or a
        /// file of `n,re,im` lines.
        source: String,
    },
    /// Remainder of the regularized ground state against `4 / log N`.
    Probe {
        level: u64,
        /// Include all five bound stages.
        #[arg(long)]
        chain: bool,
    },
    /// Show that raising the weight by EPS at K breaks the inequality.
    Witness {
        site: u64,
        epsilon: f64,
        /// Use this cutoff level instead of the smallest sufficient one.
        #[arg(long)]
        level: Option<u64>,
        /// Smallest `EPS * K` attempted without `--level`.
        #[arg(long, default_value_t = DEFAULT_FEASIBILITY_THRESHOLD)]
        threshold: f64,
    },
    /// Smallest eigenvalue of the truncated form `D - W` on `1..=M`.
    Spectrum {
        size: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Kpp)]
        kind: KindArg,
        #[arg(long, value_name = "K:EPS")]
        perturb: Option<String>,
        /// Absolute accuracy of the eigenvalue.
        #[arg(long, default_value_t = DEFAULT_EIGEN_TOL)]
        tol: f64,
    },
}

/// Map an error onto the exit-code contract.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Input(_)
        | Error::Configuration(_)
        | Error::Index(_)
        | Error::Validation(_)
        | Error::Parse { .. } => EXIT_USAGE,
        Error::IdentityViolation(_) | Error::InternalConsistency(_) | Error::Assertion(_) => {
            EXIT_CHECK_FAILED
        }
        Error::Resource { .. } | Error::Feasibility(_) => EXIT_INFEASIBLE,
    }
}

/// `K:EPS` with `K >= 1` and finite `EPS > 0`.
pub fn parse_perturbation(text: &str) -> Result<(u64, f64)> {
    let bad = || Error::Input(format!("perturbation must look like K:EPS, got `{text}`"));
    let (site, eps) = text.trim().split_once(':').ok_or_else(bad)?;
    let site: u64 = site.trim().parse().map_err(|_| bad())?;
    let eps: f64 = eps.trim().parse().map_err(|_| bad())?;
    WeightKind::perturbed(WeightKind::Kpp, site, eps)?;
    Ok((site, eps))
}

/// A positive integer, as accepted in the support-cap variable.
pub fn parse_support_cap(text: &str) -> Result<SupportCap> {
    match text.trim().parse::<u64>() {
        Ok(cap) if cap >= 1 => Ok(SupportCap(cap)),
        _ => Err(Error::Configuration(format!(
            "{SUPPORT_CAP_ENV} must be a positive integer, got `{text}`"
        ))),
    }
}

pub fn resolve_mode(mode: ModeArg, bits: Option<u32>) -> Result<SummationMode> {
    match (mode, bits) {
        (ModeArg::Naive, None) => Ok(SummationMode::Naive),
        (ModeArg::Compensated, None) => Ok(SummationMode::Compensated),
        (ModeArg::Extended, None) => Ok(SummationMode::default_extended()),
        (ModeArg::Extended, Some(bits)) => SummationMode::extended(bits),
        (_, Some(_)) => Err(Error::Configuration(
            "--bits only applies to --mode extended".into(),
        )),
    }
}

/// Resolved settings shared by all commands.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub mode: SummationMode,
    pub cap: SupportCap,
}

impl Settings {
    /// Settings from the flags and the process environment.
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let cap = match std::env::var(SUPPORT_CAP_ENV) {
            Ok(text) => parse_support_cap(&text)?,
            Err(std::env::VarError::NotPresent) => SupportCap::DEFAULT,
            Err(std::env::VarError::NotUnicode(_)) => {
                return Err(Error::Configuration(format!(
                    "{SUPPORT_CAP_ENV} is not valid unicode"
                )))
            }
        };
        Ok(Self {
            mode: resolve_mode(cli.mode, cli.bits)?,
            cap,
        })
    }
}

/// Run a parsed command, writing its output to `out`. Returns the exit code
/// for outcomes that completed but failed their check; errors carry their
/// own code via [`exit_code`].
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let settings = Settings::from_cli(cli)?;
    run_with(cli, settings, out)
}

pub fn run_with(cli: &Cli, settings: Settings, out: &mut dyn Write) -> Result<i32> {
    let mode = settings.mode;
    match &cli.command {
        Command::Weights { from, to, perturb } => {
            let format = cli.format.unwrap_or(Format::Csv);
            cmd_weights(*from, *to, perturb.as_deref(), mode, format, out)
        }
        Command::Verify { source } => {
            let u = load_sequence(source, settings.cap)?;
            let report = forms::identity_report(&u, mode)?;
            let pass = report.passes();
            let mut results = serde_json::to_value(&report).expect("serializable report");
            strip_mode(&mut results);
            results["pass"] = json!(pass);
            let env = Envelope::new("verify", mode, results).param("source", source.as_str());
            emit(&env, cli.format, out)?;
            Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Probe { level, chain } => {
            if *level < 2 {
                return Err(Error::Validation(format!("N must be ≥ 2, got {level}")));
            }
            let probe = optimality::probe_remainder(*level, mode, settings.cap)?;
            let mut results = json!({
                "level": probe.level,
                "remainder": probe.remainder,
                "closed_form": probe.closed_form,
                "bound": probe.bound,
                "margin": probe.margin,
                "terms": probe.terms,
                "within_bound": probe.within_bound(),
            });
            if *chain {
                let stages: serde_json::Map<String, Value> = probe
                    .chain_entries()
                    .into_iter()
                    .map(|(label, value)| (label.to_string(), json!(value)))
                    .collect();
                results["chain"] = Value::Object(stages);
            }
            let env = Envelope::new("probe", mode, results)
                .param("level", *level)
                .param("chain", *chain);
            emit(&env, cli.format, out)?;
            Ok(if probe.within_bound() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Witness {
            site,
            epsilon,
            level,
            threshold,
        } => {
            let opts = WitnessOptions {
                level: *level,
                threshold: *threshold,
                cap: settings.cap,
                mode,
            };
            let witness = optimality::find_witness(*site, *epsilon, opts)?;
            let mut results = serde_json::to_value(&witness).expect("serializable witness");
            strip_mode(&mut results);
            results["verdict"] = json!("inequality violated for w+ε·δ_k");
            let mut env = Envelope::new("witness", mode, results)
                .param("site", *site)
                .param("epsilon", *epsilon)
                .param("threshold", *threshold);
            if let Some(level) = level {
                env = env.param("level", *level);
            }
            emit(&env, cli.format, out)?;
            Ok(EXIT_OK)
        }
        Command::Spectrum {
            size,
            kind,
            perturb,
            tol,
        } => cmd_spectrum(*size, *kind, perturb.as_deref(), *tol, mode, cli.format, out),
    }
}

fn strip_mode(results: &mut Value) {
    if let Value::Object(map) = results {
        map.remove("mode");
    }
}

fn emit(env: &Envelope, format: Option<Format>, out: &mut dyn Write) -> Result<()> {
    match format.unwrap_or(Format::Json) {
        Format::Json => env.write_json(out),
        Format::Csv => env.write_flat_csv(out),
    }
}

/// A builtin name, or else a path to a sequence file.
pub fn load_sequence(source: &str, cap: SupportCap) -> Result<Sequence> {
    if let Some(builtin) = parse_builtin(source)? {
        return builtin.build(cap);
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read `{source}`: {e}")))?;
    parse_sequence_text(&text)
}

fn cmd_weights(
    from: u64,
    to: u64,
    perturb: Option<&str>,
    mode: SummationMode,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32> {
    if from < 1 || from > to || to > MAX_WEIGHT_INDEX {
        return Err(Error::Validation(format!(
            "range must satisfy 1 ≤ from ≤ to ≤ {MAX_WEIGHT_INDEX}, got {from}..{to}"
        )));
    }
    let perturbed = perturb
        .map(parse_perturbation)
        .transpose()?
        .map(|(site, eps)| WeightKind::perturbed(WeightKind::Kpp, site, eps))
        .transpose()?
        .map(WeightTable::new);

    let mut header = vec!["n", "kpp", "classical", "gap", "scaled_gap"];
    if perturbed.is_some() {
        header.push("perturbed");
    }
    let row = |n: u64| -> Result<Vec<Value>> {
        let gap = weights::weight_gap(n)?;
        let n4 = (n as f64).powi(4);
        let mut row = vec![
            json!(n),
            json!(weights::kpp_weight(n)?),
            json!(weights::classical_weight(n)?),
            json!(gap),
            json!(n4 * gap),
        ];
        if let Some(table) = &perturbed {
            row.push(json!(table.value(n)?));
        }
        Ok(row)
    };

    match format {
        Format::Csv => {
            let mut table = output::CsvTable::new(out, &header)?;
            for n in from..=to {
                table.row(&row(n)?)?;
            }
            table.finish()?;
        }
        Format::Json => {
            let rows = (from..=to)
                .map(|n| {
                    let values = row(n)?;
                    Ok(Value::Object(
                        header
                            .iter()
                            .map(|h| h.to_string())
                            .zip(values)
                            .collect(),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut env = Envelope::new("weights", mode, Value::Array(rows))
                .param("from", from)
                .param("to", to);
            if let Some(p) = perturb {
                env = env.param("perturb", p);
            }
            env.write_json(out)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_spectrum(
    size: usize,
    kind: KindArg,
    perturb: Option<&str>,
    tol: f64,
    mode: SummationMode,
    format: Option<Format>,
    out: &mut dyn Write,
) -> Result<i32> {
    if !(1..=MAX_SPECTRUM_SIZE).contains(&size) {
        return Err(Error::Validation(format!(
            "matrix size must satisfy 1 ≤ M ≤ {MAX_SPECTRUM_SIZE}, got {size}"
        )));
    }
    let base = match kind {
        KindArg::Kpp => WeightKind::Kpp,
        KindArg::Classical => WeightKind::Classical,
    };
    let kind = match perturb.map(parse_perturbation).transpose()? {
        Some((site, eps)) => WeightKind::perturbed(base, site, eps)?,
        None => base,
    };
    let perturbed = matches!(kind, WeightKind::Perturbed { .. });
    let form = spectral::build_form(size, &WeightTable::new(kind.clone()))?;
    let lambda_min = spectral::smallest_eigenvalue(&form, tol)?;
    let negative = spectral::negative_eigenvalue_count(&form);
    let residual = spectral::factorization_residual(size)?;
    let psd = lambda_min >= -1e-10 && negative == 0;

    let results = json!({
        "lambda_min": lambda_min,
        "negative_eigenvalues": negative,
        "factorization_residual": residual,
        "verdict": if psd { "PSD" } else { "not PSD" },
    });
    let mut env = Envelope::new("spectrum", mode, results)
        .param("size", size)
        .param("kind", kind.name())
        .param("tol", tol);
    if let Some(p) = perturb {
        env = env.param("perturb", p);
    }
    emit(&env, format, out)?;
    // An unperturbed form that is not PSD contradicts the inequality itself.
    Ok(if psd || perturbed { EXIT_OK } else { EXIT_CHECK_FAILED })
}
