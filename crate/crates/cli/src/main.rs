//! `fdsim`: run forward-link campaigns, sweeps, limit probes and oracle
//! checks from the command line.
//!
//! Exit status: 0 on success, 1 on invalid input or I/O failure, 2 when a
//! numerical check fails.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fdsim::asymptotics::{convergence_probe, LimitRegime};
use fdsim::hardening::{empirical_sqinr, verify_corollary1, Corollary1Report};
use fdsim::montecarlo::{breakdowns_of, drop_realization, CampaignSummary, SUMMARY_PERCENTILES};
use fdsim::{
    assemble_link_budget, default_scenario, run_campaign, sqinr_theorem6, with_workers, DropStatistics,
    Execution, LinkBudget, Scenario,
};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "fdsim", version, about = "Forward-link simulator for full-duplex massive MIMO with low-resolution converters")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file of `key = value` lines applied over the defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one scenario field; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output file (output directory for `simulate`); stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for the data-parallel loops.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo campaign and write per-drop samples and a summary.
    Simulate {
        /// Also write the SQINR breakdown of every user of drop 0.
        #[arg(long)]
        audit: bool,
    },
    /// One campaign per value of a scenario field.
    Sweep {
        #[arg(long)]
        axis: String,
        /// Comma-separated values; integer ranges as `a..b` (inclusive).
        #[arg(long)]
        values: String,
    },
    /// Probe convergence of the general SE toward a large-system limit.
    Limits {
        /// lemma2 | lemma3 | lemma4 | lemma5
        #[arg(long)]
        regime: String,
        /// Comma-separated increasing schedule; regime default when omitted.
        #[arg(long)]
        schedule: Option<String>,
        /// Power exponent γ in P = E / N_a^γ for lemma4.
        #[arg(long)]
        power_exponent: Option<f64>,
        /// Relative gap the final point must reach (1e-3 for lemma2, 1e-2 otherwise).
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, default_value_t = 0)]
        drop: u64,
        #[arg(long, default_value_t = 0)]
        user: usize,
    },
    /// Check precoder moments and the signal-level SQINR against the closed form.
    Verify {
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Fading draws for the signal-level SQINR; 0 skips it.
        #[arg(long, default_value_t = 10_000)]
        oracle_samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        drop: u64,
        #[arg(long, default_value_t = 0)]
        user: usize,
    },
    /// Write the user positions (CSV) or the full realization (JSON) of one drop.
    DumpRealization {
        #[arg(long, default_value_t = 0)]
        drop: u64,
    },
}

enum Outcome {
    Done,
    CheckFailed(String),
}

fn load_scenario(common: &Common) -> Result<Scenario> {
    let mut s = default_scenario();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        s.apply_config(&text).with_context(|| format!("in config {}", path.display()))?;
    }
    for item in &common.overrides {
        let (k, v) = item
            .split_once('=')
            .with_context(|| format!("override `{item}` is not KEY=VALUE"))?;
        s.set(k, v)?;
    }
    s.validate()?;
    Ok(s)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn campaign(s: &Scenario) -> Result<DropStatistics> {
    Ok(run_campaign(s, Execution::Parallel)?)
}

#[derive(Serialize)]
struct DropRow {
    drop_index: usize,
    avg_sqinr_db: f64,
    gross_se: f64,
    effective_se: f64,
}

fn simulate(s: &Scenario, common: &Common, audit: bool) -> Result<Outcome> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let stats = campaign(s)?;
    match common.format {
        Format::Csv => emit(Some(&dir.join("campaign.csv")), &stats.to_csv())?,
        Format::Json => {
            let rows: Vec<DropRow> = (0..stats.n_drops)
                .map(|i| DropRow {
                    drop_index: i,
                    avg_sqinr_db: stats.samples[i],
                    gross_se: stats.gross_se_samples[i],
                    effective_se: stats.effective_se_samples[i],
                })
                .collect();
            emit(Some(&dir.join("campaign.json")), &to_json(&rows)?)?;
        }
    }
    let summary: CampaignSummary = stats.summary()?;
    emit(Some(&dir.join("summary.json")), &to_json(&summary)?)?;
    if audit {
        let realization = drop_realization(s, 0)?;
        for (k, b) in breakdowns_of(&realization, s)?.iter().enumerate() {
            emit(Some(&dir.join(format!("audit_drop0_user{k}.json"))), &to_json(b)?)?;
        }
    }
    Ok(Outcome::Done)
}

/// Expands `1..5,inf` into `1,2,3,4,5,inf`.
fn expand_values(spec: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: i64 = a.trim().parse().with_context(|| format!("bad range `{part}`"))?;
                let b: i64 = b.trim().parse().with_context(|| format!("bad range `{part}`"))?;
                if b < a {
                    bail!("empty range `{part}`");
                }
                out.extend((a..=b).map(|v| v.to_string()));
            }
            None => out.push(part.to_string()),
        }
    }
    if out.is_empty() {
        bail!("no sweep values given");
    }
    Ok(out)
}

fn sweep(s: &Scenario, common: &Common, axis: &str, values: &str) -> Result<Outcome> {
    let values = expand_values(values)?;
    let mut scenarios = Vec::with_capacity(values.len());
    for v in &values {
        let mut point = s.clone();
        point.set(axis, v)?;
        point.validate()?;
        scenarios.push(point);
    }
    let mut rows = Vec::with_capacity(values.len());
    for (v, point) in values.iter().zip(&scenarios) {
        rows.push((v.clone(), campaign(point)?.summary()?));
    }
    let text = match common.format {
        Format::Csv => {
            let mut out = String::from("axis,axis_value,n_drops");
            for p in SUMMARY_PERCENTILES {
                let _ = write!(out, ",q{p:02}_sqinr_db");
            }
            out.push_str(",mean_sqinr_db,mean_gross_se,mean_effective_se\n");
            for (v, r) in &rows {
                let _ = write!(out, "{axis},{v},{}", r.n_drops);
                for (_, q) in &r.sqinr_db_quantiles {
                    let _ = write!(out, ",{q}");
                }
                let _ = writeln!(out, ",{},{},{}", r.mean_sqinr_db, r.mean_gross_se, r.mean_effective_se);
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                axis: &'a str,
                axis_value: &'a str,
                summary: &'a CampaignSummary,
            }
            let rows: Vec<Row> = rows
                .iter()
                .map(|(v, r)| Row { axis, axis_value: v, summary: r })
                .collect();
            to_json(&rows)?
        }
    };
    emit(common.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

fn drop_budget(s: &Scenario, drop: u64, user: usize) -> Result<LinkBudget> {
    let realization = drop_realization(s, drop)?;
    Ok(assemble_link_budget(&realization, s, user)?)
}

fn parse_schedule(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad schedule value `{v}`")))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn limits(
    s: &Scenario,
    common: &Common,
    regime: &str,
    schedule: Option<&str>,
    power_exponent: Option<f64>,
    tolerance: Option<f64>,
    drop: u64,
    user: usize,
) -> Result<Outcome> {
    let mut regime = LimitRegime::from_name(regime)
        .with_context(|| format!("unknown regime `{regime}` (lemma2, lemma3, lemma4, lemma5)"))?;
    if let Some(g) = power_exponent {
        match regime {
            LimitRegime::PowerScaling { .. } => regime = LimitRegime::PowerScaling { power_exponent: g },
            _ => bail!("--power-exponent only applies to lemma4"),
        }
    }
    let schedule = match schedule {
        Some(spec) => parse_schedule(spec)?,
        None => regime.default_schedule(),
    };
    let budget = drop_budget(s, drop, user)?;
    let points = convergence_probe(regime, &budget, &schedule)?;
    let text = match common.format {
        Format::Csv => {
            let mut out = String::from("regime,scale,se_bits,limit_bits,gap,relative_gap\n");
            for p in &points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    regime.name(),
                    p.scale,
                    p.se_bits,
                    p.limit_bits,
                    p.gap,
                    p.relative_gap()
                );
            }
            out
        }
        Format::Json => to_json(&points)?,
    };
    emit(common.out.as_deref(), &text)?;
    let tolerance = tolerance.unwrap_or(match regime {
        LimitRegime::FullResolution => 1e-3,
        _ => 1e-2,
    });
    let last = points.last().expect("probe has at least three points");
    if last.relative_gap() < tolerance {
        Ok(Outcome::Done)
    } else {
        Ok(Outcome::CheckFailed(format!(
            "{}: relative gap {:.3e} at scale {} exceeds {tolerance}",
            regime.name(),
            last.relative_gap(),
            last.scale
        )))
    }
}

#[derive(Serialize)]
struct OracleCheck {
    closed_form_sqinr: f64,
    empirical_sqinr: f64,
    gap_db: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    corollary1: Corollary1Report,
    oracle: Option<OracleCheck>,
    pass: bool,
}

fn verify(
    s: &Scenario,
    common: &Common,
    samples: u64,
    oracle_samples: u64,
    seed: Option<u64>,
    drop: u64,
    user: usize,
) -> Result<Outcome> {
    let budget = drop_budget(s, drop, user)?;
    let seed = seed.unwrap_or(s.base_seed);
    let corollary1 = verify_corollary1(&budget, samples, seed, Execution::Parallel)?;
    let oracle = if oracle_samples > 0 {
        let closed = sqinr_theorem6(&budget)?.sqinr;
        let measured = empirical_sqinr(&budget, oracle_samples, seed, Execution::Parallel)?.sqinr;
        let gap_db = 10.0 * (measured / closed).log10();
        Some(OracleCheck {
            closed_form_sqinr: closed,
            empirical_sqinr: measured,
            gap_db,
            pass: gap_db.abs() < 0.5,
        })
    } else {
        None
    };
    let pass = corollary1.all_pass && oracle.as_ref().is_none_or(|o| o.pass);
    let report = VerifyReport { corollary1, oracle, pass };
    emit(common.out.as_deref(), &to_json(&report)?)?;
    if pass {
        Ok(Outcome::Done)
    } else {
        Ok(Outcome::CheckFailed("verification checks failed".into()))
    }
}

fn dump_realization(s: &Scenario, common: &Common, drop: u64) -> Result<Outcome> {
    let realization = drop_realization(s, drop)?;
    let text = match common.format {
        Format::Csv => fdsim::geometry::positions_csv(realization.positions()),
        Format::Json => to_json(&realization)?,
    };
    emit(common.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

fn run(cli: &Cli) -> Result<Outcome> {
    let s = load_scenario(&cli.common)?;
    let c = &cli.common;
    match &cli.command {
        Command::Simulate { audit } => simulate(&s, c, *audit),
        Command::Sweep { axis, values } => sweep(&s, c, axis, values),
        Command::Limits { regime, schedule, power_exponent, tolerance, drop, user } => {
            limits(&s, c, regime, schedule.as_deref(), *power_exponent, *tolerance, *drop, *user)
        }
        Command::Verify { samples, oracle_samples, seed, drop, user } => {
            verify(&s, c, *samples, *oracle_samples, *seed, *drop, *user)
        }
        Command::DumpRealization { drop } => dump_realization(&s, c, *drop),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.common.workers {
        Some(n) => with_workers(n, || run(&cli)).map_err(anyhow::Error::from).and_then(|r| r),
        None => run(&cli),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
