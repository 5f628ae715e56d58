//! `ftsc` command line. Exit codes: 0 success, 1 usage or validation error,
//! 2 verification failure.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use super::dimacs::{emit_dimacs, parse_dimacs};
use super::report::{render_text, verify_report, InstanceRecord, Report};
use super::tptp::{emit_tptp, emit_tptp_problem, TptpMode};
use crate::explain::{load_scenario_file, ExternalModelClient, FixtureClient, HttpModelClient, RankingPolicy, Scenario};
use crate::generator::{enumerate_window, factorial, permutation_at, Ftsc, FtscEnumerator, DEFAULT_ENUMERATION_CAP};
use crate::logic::{validate_input, NamedLiteral, Signature};
use crate::pipeline::{analyze_scenario, analyze_signature, certify_ftsc, rank_runs, run_scenario, CertifiedInstance, Selection};
use crate::verifier::check_mus;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_UNVERIFIED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ftsc", version, about = "Build, certify, explain and export FTSC clause sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one FTSC and certify its n+1 theorems.
    Generate(GenerateArgs),
    /// Stream the FTSC of every permutation as JSON lines, then a summary.
    Enumerate(EnumerateArgs),
    /// Re-derive and check a JSON report or a DIMACS file.
    Verify(VerifyArgs),
    /// Explain and rank the theorems of one or more scenarios.
    Explain(ExplainArgs),
    /// Write an FTSC as DIMACS, TPTP or a JSON report.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Input literals (`Fever`, `¬Fever`, `~Fever`) or one scenario file.
    #[arg(required = true, value_name = "LITERALS|SCENARIO")]
    inputs: Vec<String>,
    /// Treat the single input as a scenario file.
    #[arg(long)]
    scenario: bool,
    /// Lexicographic permutation rank fixing the chain order.
    #[arg(long, value_name = "IDX")]
    permutation: Option<u128>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    /// Input literals.
    #[arg(required = true)]
    literals: Vec<String>,
    /// Refuse inputs longer than this.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    n_cap: usize,
    /// First permutation rank (inclusive).
    #[arg(long)]
    start: Option<u128>,
    /// Last permutation rank (exclusive).
    #[arg(long)]
    end: Option<u128>,
    /// Skip certifying each FTSC.
    #[arg(long)]
    skip_verify: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// JSON report or DIMACS file; `-` reads stdin.
    input: PathBuf,
}

#[derive(Debug, Args)]
struct ExplainArgs {
    /// Scenario files, or directories of `*.toml` scenarios.
    #[arg(required = true)]
    scenarios: Vec<PathBuf>,
    /// External model endpoint; overrides FTSC_MODEL_ENDPOINT.
    #[arg(long, value_name = "URL")]
    model_endpoint: Option<String>,
    /// Replay recorded model replies from a JSON fixture.
    #[arg(long, value_name = "FILE", conflicts_with = "model_endpoint")]
    fixture: Option<PathBuf>,
    /// Explain only the clause indices each scenario flags.
    #[arg(long)]
    flagged_only: bool,
    #[arg(long, value_name = "IDX")]
    permutation: Option<u128>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Dimacs,
    Tptp,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Cnf,
    Fof,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    format: ExportFormat,
    /// TPTP flavour.
    #[arg(long, value_enum, default_value_t = ModeArg::Cnf)]
    mode: ModeArg,
    /// Ground instance to export (0-based) for multi-instance scenarios.
    #[arg(long, default_value_t = 0)]
    instance: usize,
    /// Emit a standalone TPTP problem for theorem i only.
    #[arg(long, value_name = "I")]
    problem: Option<usize>,
}

/// Runs the CLI; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Enumerate(a) => enumerate(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Explain(a) => explain(a, out, err),
        Command::Export(a) => export(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INVALID
        }
    }
}

enum Input {
    Literals(Signature),
    Scenario(Box<Scenario>),
}

fn parse_signature(literals: &[String]) -> anyhow::Result<Signature> {
    let named = literals
        .iter()
        .map(|s| s.parse::<NamedLiteral>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(validate_input(&named)?)
}

fn read_input(args: &InputArgs) -> anyhow::Result<Input> {
    let as_scenario = args.scenario
        || (args.inputs.len() == 1 && (args.inputs[0].ends_with(".toml") || Path::new(&args.inputs[0]).is_file()));
    if as_scenario {
        if args.inputs.len() != 1 {
            bail!("expected exactly one scenario file");
        }
        let s = load_scenario_file(&args.inputs[0]).with_context(|| format!("scenario {}", args.inputs[0]))?;
        Ok(Input::Scenario(Box::new(s)))
    } else {
        Ok(Input::Literals(parse_signature(&args.inputs)?))
    }
}

fn permutation(n: usize, rank: Option<u128>) -> anyhow::Result<Option<Vec<usize>>> {
    rank.map(|r| permutation_at(n, r)).transpose().map_err(Into::into)
}

/// Certified instances paired with their scenario.
fn analyze(input: &Input, rank: Option<u128>) -> anyhow::Result<Vec<CertifiedInstance>> {
    match input {
        Input::Literals(sig) => {
            let p = permutation(sig.len(), rank)?;
            Ok(vec![analyze_signature(sig, p.as_deref())?])
        }
        Input::Scenario(s) => {
            let p = permutation(s.n(), rank)?;
            Ok(analyze_scenario(s, p.as_deref())?)
        }
    }
}

fn status(instances: &[CertifiedInstance]) -> i32 {
    if instances.iter().all(CertifiedInstance::all_verified) {
        EXIT_OK
    } else {
        EXIT_UNVERIFIED
    }
}

fn generate(args: GenerateArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let input = read_input(&args.input)?;
    let instances = analyze(&input, args.input.permutation)?;
    let name = match &input {
        Input::Scenario(s) => Some(s.name.as_str()),
        Input::Literals(_) => None,
    };
    let pairs: Vec<_> = instances.iter().map(|i| (name, i)).collect();
    let report = Report::build("generate", &pairs, Vec::new(), None);
    match args.format {
        OutputFormat::Json => writeln!(out, "{}", report.to_json())?,
        OutputFormat::Text => write!(out, "{}", render_text(&report))?,
    }
    Ok(status(&instances))
}

const ENUMERATION_CHUNK: usize = 512;
/// Above this `n` pairwise distinctness is not tracked.
const DISTINCTNESS_LIMIT: usize = 8;

fn enumerate(args: EnumerateArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let sig = parse_signature(&args.literals)?;
    let n = sig.len();
    let total = factorial(n).ok_or_else(|| anyhow!("{n}! overflows"))?;
    let start = args.start.unwrap_or(0);
    let end = args.end.unwrap_or(total);
    let mut stream: FtscEnumerator = enumerate_window(&sig, args.n_cap, start, end)?;
    let mut seen = (n <= DISTINCTNESS_LIMIT).then(HashSet::new);
    let (mut count, mut theorems, mut certified_all, mut distinct) = (0u128, 0u128, true, true);
    loop {
        let chunk: Vec<Ftsc> = stream.by_ref().take(ENUMERATION_CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let verdicts: Vec<Option<bool>> = chunk
            .par_iter()
            .map(|f| (!args.skip_verify).then(|| certify_ftsc(f.clone(), "").all_verified()))
            .collect();
        for (f, verdict) in chunk.iter().zip(verdicts) {
            if let Some(seen) = seen.as_mut() {
                distinct &= seen.insert(f.canonical_key());
            }
            count += 1;
            theorems += n as u128 + 1;
            certified_all &= verdict.unwrap_or(true);
            let clauses: Vec<Vec<String>> = (1..=n + 1)
                .map(|i| f.schema_literals(i).iter().map(|&l| f.symbols().literal_name(l)).collect())
                .collect();
            let line = json!({
                "rank": f.rank(),
                "permutation": f.permutation(),
                "clauses": clauses,
                "certified": verdict,
            });
            writeln!(out, "{line}")?;
        }
    }
    let (family, family_theorems) = FtscEnumerator::family_counts(n);
    let summary = json!({
        "summary": {
            "n": n,
            "ftscs": count,
            "theorems": theorems,
            "family_ftscs": family,
            "family_theorems": family_theorems,
            "window": [start, end],
            "all_certified": if args.skip_verify { None } else { Some(certified_all) },
            "pairwise_distinct": seen.as_ref().map(|_| distinct),
            "permutation_ops": stream.permutation_ops(),
            "build_ops": stream.build_ops().total(),
        }
    });
    writeln!(out, "{summary}")?;
    Ok(if certified_all && distinct { EXIT_OK } else { EXIT_UNVERIFIED })
}

fn verify(args: VerifyArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let text = if args.input.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?
    };
    if text.trim_start().starts_with('{') {
        let report = Report::from_json(&text)?;
        let v = verify_report(&report)?;
        for line in &v.lines {
            writeln!(out, "{line}")?;
        }
        writeln!(out, "{} failure(s), {} warning(s)", v.failures, v.warnings)?;
        return Ok(if v.passed() { EXIT_OK } else { EXIT_UNVERIFIED });
    }

    let set = parse_dimacs(&text)?;
    match Ftsc::recognize(&set) {
        Ok(ftsc) => {
            let inst = certify_ftsc(ftsc, "");
            let record = InstanceRecord::from_certified(None, &inst);
            writeln!(out, "FTSC with n = {}, minimal = {}", inst.ftsc.n(), inst.mus.is_mus)?;
            for t in &record.theorems {
                writeln!(out, "{} {}", if t.certified == "verified" { "ok  " } else { "FAIL" }, t.statement)?;
            }
            Ok(status(&[inst]))
        }
        Err(reason) => {
            let mus = check_mus(&set);
            writeln!(out, "not an FTSC ({reason}); unsatisfiable = {}, minimal = {}", mus.is_unsatisfiable, mus.is_mus)?;
            Ok(if mus.is_mus { EXIT_OK } else { EXIT_UNVERIFIED })
        }
    }
}

fn scenario_files(paths: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "toml"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no scenario files found");
    }
    Ok(files)
}

fn explain(args: ExplainArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let client: Option<Box<dyn ExternalModelClient>> = if let Some(path) = &args.fixture {
        Some(Box::new(FixtureClient::from_file(path)?))
    } else if let Some(url) = &args.model_endpoint {
        let key = std::env::var(HttpModelClient::KEY_VAR).ok();
        Some(Box::new(HttpModelClient::new(url.clone(), key, Duration::from_secs(30))))
    } else {
        HttpModelClient::from_env().map(|c| Box::new(c) as Box<dyn ExternalModelClient>)
    };
    let selection = if args.flagged_only { Selection::Flagged } else { Selection::All };

    let mut runs = Vec::new();
    for file in scenario_files(&args.scenarios)? {
        let scenario = load_scenario_file(&file).with_context(|| format!("scenario {}", file.display()))?;
        let p = permutation(scenario.n(), args.permutation)?;
        runs.push(run_scenario(scenario, p.as_deref(), selection, client.as_deref())?);
    }
    for e in runs.iter().flat_map(|r| &r.explanations) {
        for d in &e.diagnostics {
            writeln!(err, "warning: {} {}: {d}", e.scenario, e.statement)?;
        }
    }
    let policy = if client.is_some() { RankingPolicy::ModelScores } else { RankingPolicy::Default };
    let ranking = rank_runs(&runs, &policy);
    let pairs: Vec<_> = runs
        .iter()
        .flat_map(|r| r.instances.iter().map(move |i| (Some(r.scenario.name.as_str()), i)))
        .collect();
    let explanations = runs.iter().flat_map(|r| r.explanations.iter().cloned()).collect();
    let report = Report::build("explain", &pairs, explanations, ranking.as_ref());
    match args.format {
        OutputFormat::Json => writeln!(out, "{}", report.to_json())?,
        OutputFormat::Text => write!(out, "{}", render_text(&report))?,
    }
    let instances: Vec<CertifiedInstance> = runs.into_iter().flat_map(|r| r.instances).collect();
    Ok(status(&instances))
}

fn export(args: ExportArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let input = read_input(&args.input)?;
    let instances = analyze(&input, args.input.permutation)?;
    let scenario = match &input {
        Input::Scenario(s) => Some(s.as_ref()),
        Input::Literals(_) => None,
    };
    let inst = instances
        .get(args.instance)
        .ok_or_else(|| anyhow!("instance {} out of range ({} instances)", args.instance, instances.len()))?;
    match args.format {
        ExportFormat::Dimacs => write!(out, "{}", emit_dimacs(inst.ftsc.clause_set()))?,
        ExportFormat::Json => {
            let report = Report::build("export", &[(scenario.map(|s| s.name.as_str()), inst)], Vec::new(), None);
            writeln!(out, "{}", report.to_json())?
        }
        ExportFormat::Tptp => {
            let mode = match args.mode {
                ModeArg::Cnf => TptpMode::Cnf,
                ModeArg::Fof => TptpMode::Fof,
            };
            let theorems: Vec<_> = inst.theorems.iter().map(|t| t.theorem.clone()).collect();
            let text = match args.problem {
                Some(i) => {
                    let t = theorems
                        .iter()
                        .find(|t| t.removed_index == i)
                        .ok_or_else(|| anyhow!("no theorem D{i}; expected 1..={}", theorems.len()))?;
                    emit_tptp_problem(t, mode, scenario)?
                }
                None => emit_tptp(&inst.ftsc, &theorems, mode, scenario)?,
            };
            write!(out, "{text}")?
        }
    }
    Ok(status(std::slice::from_ref(inst)))
}
