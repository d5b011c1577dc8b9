//! Command-line front end: analysis reports, engine benchmarks, the
//! shortest-distance demo and the SLD soundness check.

pub mod report;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use tabplai::baseline::{check_soundness, naive_analyze, SldConfig};
use tabplai::domain::{Groundness, ShareFree};
use tabplai::ir::{parse_program, Program};
use tabplai::lattice::Domain;
use tabplai::plai::{analyze, AnalysisError, AnalysisOptions, AnalysisRequest, AnalysisResult};
use tabplai::tabling::min::{shortest_distances, IntGraph, MinError};
use tabplai::tabling::{EngineOptions, ResumeOrder, DEFAULT_STEP_BUDGET};

use report::{entry_report, render_text, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Contract(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Resource(_) => 2,
            CliError::Contract(_) => 3,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::UnknownEntry(_) => CliError::Input(e.to_string()),
            e if e.is_resource() => CliError::Resource(e.to_string()),
            e => CliError::Contract(e.to_string()),
        }
    }
}

impl From<MinError> for CliError {
    fn from(e: MinError) -> Self {
        match &e {
            MinError::Malformed(_) => CliError::Input(e.to_string()),
            MinError::Engine(inner) if inner.is_resource() => CliError::Resource(e.to_string()),
            MinError::NegativeWeight { .. } | MinError::Engine(_) => CliError::Contract(e.to_string()),
        }
    }
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::Input(format!("write failed: {e}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainFlag {
    Gr,
    Shfr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineFlag {
    Tabled,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Resume {
    Lifo,
    Fifo,
}

#[derive(Clone, Copy, Debug, clap::Args)]
pub struct Schedule {
    #[arg(long, value_enum, default_value = "on")]
    pub seed_nonrec: OnOff,
    #[arg(long, value_enum, default_value = "lifo")]
    pub resume: Resume,
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
    pub step_budget: u64,
}

impl Schedule {
    fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            resume: self.resume(),
            seed_nonrec: self.seed_nonrec == OnOff::On,
            step_budget: self.step_budget,
            more_general: false,
        }
    }

    fn resume(&self) -> ResumeOrder {
        match self.resume {
            Resume::Lifo => ResumeOrder::Lifo,
            Resume::Fifo => ResumeOrder::Fifo,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tabplai", version, about = "Abstract interpretation of pure Prolog with a tabling engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze every entry declaration of a program.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "gr")]
        domain: DomainFlag,
        #[arg(long, value_enum, default_value = "tabled")]
        engine: EngineFlag,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        schedule: Schedule,
    },
    /// Time both engines on every program of a corpus directory.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 40)]
        repetitions: usize,
        /// Slowest repetitions dropped before averaging.
        #[arg(long, default_value_t = 10)]
        discard: usize,
        /// Restrict to one domain; both by default.
        #[arg(long, value_enum)]
        domain: Option<DomainFlag>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        schedule: Schedule,
    },
    /// Shortest distances from a source over `edge(From, To, Weight).` facts.
    Dist {
        file: PathBuf,
        #[arg(long, default_value = "a")]
        source: String,
        #[arg(long, value_enum, default_value = "lifo")]
        resume: Resume,
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        step_budget: u64,
    },
    /// Check each entry's success substitution against depth-bounded SLD.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Restrict to one domain; both by default.
        #[arg(long, value_enum)]
        domain: Option<DomainFlag>,
    },
}

pub fn load(path: &Path) -> Result<Program, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_program(&src).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn run_engine<D: Domain + Clone>(
    d: &D,
    req: &AnalysisRequest<'_>,
    engine: EngineFlag,
) -> Result<AnalysisResult<D::Subst>, AnalysisError> {
    match engine {
        EngineFlag::Tabled => analyze(d, req),
        EngineFlag::Naive => naive_analyze(d, req),
    }
}

fn run_report<D: Domain + Clone>(
    d: &D,
    path: &Path,
    program: &Program,
    engine: EngineFlag,
    options: AnalysisOptions,
) -> Result<RunReport, CliError> {
    let mut entries = Vec::new();
    for entry in &program.entries {
        let req = AnalysisRequest {
            program,
            entry,
            options,
        };
        let r = run_engine(d, &req, engine).map_err(|e| CliError::from(e).with_context(&format!("entry {entry}")))?;
        entries.push(entry_report(d, program, &r));
    }
    Ok(RunReport {
        program: path.display().to_string(),
        domain: d.name().to_string(),
        engine: match engine {
            EngineFlag::Tabled => "tabled",
            EngineFlag::Naive => "naive",
        }
        .to_string(),
        entries,
    })
}

impl CliError {
    fn with_context(self, ctx: &str) -> CliError {
        match self {
            CliError::Input(m) => CliError::Input(format!("{ctx}: {m}")),
            CliError::Resource(m) => CliError::Resource(format!("{ctx}: {m}")),
            CliError::Contract(m) => CliError::Contract(format!("{ctx}: {m}")),
        }
    }
}

/// Builds the report for `analyze`.
pub fn analyze_report(
    path: &Path,
    domain: DomainFlag,
    engine: EngineFlag,
    options: AnalysisOptions,
) -> Result<RunReport, CliError> {
    let program = load(path)?;
    if program.entries.is_empty() {
        return Err(CliError::Input(format!("{}: no entry declarations", path.display())));
    }
    match domain {
        DomainFlag::Gr => run_report(&Groundness, path, &program, engine, options),
        DomainFlag::Shfr => run_report(&ShareFree::default(), path, &program, engine, options),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub program: String,
    pub domain: String,
    pub recursive: bool,
    pub tabled_ms: f64,
    pub naive_ms: f64,
    pub tabled_evals: u64,
    pub naive_evals: u64,
    pub tabled_resumptions: u64,
    pub naive_restarts: u64,
}

impl BenchRow {
    /// naive_ms / tabled_ms
    pub fn ratio(&self) -> f64 {
        self.naive_ms / self.tabled_ms.max(1e-9)
    }

    pub fn eval_ratio(&self) -> f64 {
        self.naive_evals as f64 / self.tabled_evals.max(1) as f64
    }
}

/// Mean after dropping the `discard` slowest samples.
pub fn trimmed_mean(mut samples: Vec<f64>, discard: usize) -> f64 {
    samples.sort_by(f64::total_cmp);
    samples.truncate(samples.len().saturating_sub(discard).max(1));
    samples.iter().sum::<f64>() / samples.len() as f64
}

fn bench_cell<D: Domain + Clone>(
    d: &D,
    name: &str,
    program: &Program,
    repetitions: usize,
    discard: usize,
    options: AnalysisOptions,
) -> Result<BenchRow, CliError> {
    let mut times = [Vec::new(), Vec::new()];
    let mut counters = [Default::default(), Default::default()];
    for (i, engine) in [EngineFlag::Tabled, EngineFlag::Naive].into_iter().enumerate() {
        for rep in 0..repetitions {
            let mut total = 0.0;
            let mut sum = tabplai::tabling::Counters::default();
            for entry in &program.entries {
                let req = AnalysisRequest {
                    program,
                    entry,
                    options,
                };
                let r = run_engine(d, &req, engine).map_err(|e| CliError::from(e).with_context(&format!("{name} {entry}")))?;
                total += r.elapsed.as_secs_f64() * 1e3;
                sum.body_evals += r.counters.body_evals;
                sum.resumptions += r.counters.resumptions;
                sum.restarts += r.counters.restarts;
            }
            times[i].push(total);
            if rep == 0 {
                counters[i] = sum;
            }
        }
    }
    let [tabled, naive] = times;
    Ok(BenchRow {
        program: name.to_string(),
        domain: d.name().to_string(),
        recursive: program.predicates().any(|k| program.is_recursive(k)),
        tabled_ms: trimmed_mean(tabled, discard),
        naive_ms: trimmed_mean(naive, discard),
        tabled_evals: counters[0].body_evals,
        naive_evals: counters[1].body_evals,
        tabled_resumptions: counters[0].resumptions,
        naive_restarts: counters[1].restarts,
    })
}

pub struct Bench {
    pub rows: Vec<BenchRow>,
    pub failures: Vec<String>,
    pub skipped: Vec<String>,
}

pub fn bench(
    dir: &Path,
    repetitions: usize,
    discard: usize,
    domain: Option<DomainFlag>,
    options: AnalysisOptions,
) -> Result<Bench, CliError> {
    if repetitions == 0 {
        return Err(CliError::Input("--repetitions must be positive".into()));
    }
    if discard >= repetitions {
        return Err(CliError::Input("--discard must be smaller than --repetitions".into()));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pl"))
        .collect();
    files.sort();
    let mut out = Bench {
        rows: Vec::new(),
        failures: Vec::new(),
        skipped: Vec::new(),
    };
    for path in files {
        let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let program = match load(&path) {
            Ok(p) if !p.entries.is_empty() => p,
            Ok(_) => {
                out.skipped.push(format!("{}: no entry declarations", path.display()));
                continue;
            }
            Err(e) => {
                out.skipped.push(e.to_string());
                continue;
            }
        };
        let domains = match domain {
            Some(d) => vec![d],
            None => vec![DomainFlag::Gr, DomainFlag::Shfr],
        };
        for d in domains {
            let cell = match d {
                DomainFlag::Gr => bench_cell(&Groundness, &name, &program, repetitions, discard, options),
                DomainFlag::Shfr => bench_cell(&ShareFree::default(), &name, &program, repetitions, discard, options),
            };
            match cell {
                Ok(row) => out.rows.push(row),
                Err(CliError::Contract(m)) => return Err(CliError::Contract(m)),
                Err(e) => out.failures.push(e.to_string()),
            }
        }
    }
    Ok(out)
}

const BENCH_COLUMNS: [&str; 10] = [
    "program",
    "domain",
    "recursive",
    "tabled_ms",
    "naive_ms",
    "ratio",
    "tabled_evals",
    "naive_evals",
    "eval_ratio",
    "naive_restarts",
];

fn bench_fields(r: &BenchRow) -> [String; 10] {
    [
        r.program.clone(),
        r.domain.clone(),
        r.recursive.to_string(),
        format!("{:.4}", r.tabled_ms),
        format!("{:.4}", r.naive_ms),
        format!("{:.2}", r.ratio()),
        r.tabled_evals.to_string(),
        r.naive_evals.to_string(),
        format!("{:.2}", r.eval_ratio()),
        r.naive_restarts.to_string(),
    ]
}

pub fn bench_table(b: &Bench, repetitions: usize, discard: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "% analysis time only (monotonic clock, parsing excluded); {repetitions} runs, slowest {discard} dropped, rest averaged"
    );
    let _ = writeln!(
        out,
        "% the naive engine re-evaluates whole entries on any stale dependency, so its counts are an upper bound"
    );
    let rows: Vec<[String; 10]> = b.rows.iter().map(bench_fields).collect();
    let widths: Vec<usize> = (0..BENCH_COLUMNS.len())
        .map(|i| rows.iter().map(|r| r[i].len()).chain([BENCH_COLUMNS[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i < 3 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let header: Vec<String> = BENCH_COLUMNS.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{}", line(&header).trim_end());
    for r in &rows {
        let _ = writeln!(out, "{}", line(r).trim_end());
    }
    for f in &b.failures {
        let _ = writeln!(out, "% failed: {f}");
    }
    for s in &b.skipped {
        let _ = writeln!(out, "% skipped: {s}");
    }
    out
}

pub fn bench_csv(b: &Bench) -> String {
    let mut out = BENCH_COLUMNS.join(",");
    out.push('\n');
    for r in &b.rows {
        out.push_str(&bench_fields(r).join(","));
        out.push('\n');
    }
    out
}

fn check_domain<D: Domain + Clone>(
    d: &D,
    program: &Program,
    depth: usize,
    out: &mut String,
    violations: &mut usize,
) -> Result<(), CliError> {
    let config = SldConfig {
        depth,
        ..SldConfig::default()
    };
    for entry in &program.entries {
        let req = AnalysisRequest {
            program,
            entry,
            options: AnalysisOptions::default(),
        };
        let r = analyze(d, &req)?;
        let success = &r.completes[0].success;
        let report = check_soundness(d, program, entry, success, config, 6).map_err(AnalysisError::from)?;
        let _ = writeln!(
            out,
            "{entry} [{}]: {} instances, {} solutions, {} violations{}",
            d.name(),
            report.instances,
            report.solutions,
            report.violations.len(),
            if report.truncated > 0 {
                format!(" ({} searches truncated)", report.truncated)
            } else {
                String::new()
            }
        );
        for v in &report.violations {
            let _ = writeln!(out, "  violation: {v}");
        }
        *violations += report.violations.len();
    }
    Ok(())
}

/// Executes one command, writing its normal output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze {
            file,
            domain,
            engine,
            format,
            schedule,
        } => {
            let report = analyze_report(&file, domain, engine, schedule.options())?;
            let text = match format {
                Format::Text => render_text(&report),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
                    s.push('\n');
                    s
                }
            };
            out.write_all(text.as_bytes()).map_err(io_error)
        }
        Command::Bench {
            dir,
            repetitions,
            discard,
            domain,
            csv,
            schedule,
        } => {
            let b = bench(&dir, repetitions, discard, domain, schedule.options())?;
            if let Some(path) = csv {
                std::fs::write(&path, bench_csv(&b)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            }
            out.write_all(bench_table(&b, repetitions, discard).as_bytes()).map_err(io_error)
        }
        Command::Dist {
            file,
            source,
            resume,
            step_budget,
        } => {
            let text = std::fs::read_to_string(&file).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
            let graph = IntGraph::parse(&text).map_err(|e| CliError::from(e).with_context(&file.display().to_string()))?;
            let options = EngineOptions {
                resume: Schedule {
                    seed_nonrec: OnOff::On,
                    resume,
                    step_budget,
                }
                .resume(),
                step_budget,
                ..EngineOptions::default()
            };
            let r = shortest_distances(&graph, &source, options)?;
            let mut s = String::new();
            for (node, d) in &r.distances {
                let _ = writeln!(s, "{node}: {d}");
            }
            out.write_all(s.as_bytes()).map_err(io_error)
        }
        Command::Check { file, depth, domain } => {
            if depth == 0 {
                return Err(CliError::Input("--depth must be positive".into()));
            }
            let program = load(&file)?;
            let mut text = String::new();
            let mut violations = 0;
            if domain != Some(DomainFlag::Shfr) {
                check_domain(&Groundness, &program, depth, &mut text, &mut violations)?;
            }
            if domain != Some(DomainFlag::Gr) {
                check_domain(&ShareFree::default(), &program, depth, &mut text, &mut violations)?;
            }
            out.write_all(text.as_bytes()).map_err(io_error)?;
            if violations > 0 {
                return Err(CliError::Contract(format!("{violations} concrete solutions outside their success substitution")));
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use report::completes_text;

    fn corpus(name: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
    }

    #[test]
    fn trimmed_mean_drops_the_slowest() {
        assert_eq!(trimmed_mean(vec![5.0, 1.0, 3.0, 100.0], 1), 3.0);
        assert_eq!(trimmed_mean(vec![2.0], 0), 2.0);
    }

    #[test]
    fn json_round_trips_to_the_same_text() {
        for domain in [DomainFlag::Gr, DomainFlag::Shfr] {
            let r = analyze_report(&corpus("qsort.pl"), domain, EngineFlag::Tabled, AnalysisOptions::default()).unwrap();
            let json = serde_json::to_string(&r).unwrap();
            let back: RunReport = serde_json::from_str(&json).unwrap();
            assert_eq!(render_text(&back), render_text(&r));
            assert_eq!(back.entries[0].completes, r.entries[0].completes);
        }
    }

    #[test]
    fn engines_agree_on_completes() {
        for domain in [DomainFlag::Gr, DomainFlag::Shfr] {
            let t = analyze_report(&corpus("mutual.pl"), domain, EngineFlag::Tabled, AnalysisOptions::default()).unwrap();
            let n = analyze_report(&corpus("mutual.pl"), domain, EngineFlag::Naive, AnalysisOptions::default()).unwrap();
            let text = |r: &RunReport| r.entries.iter().map(completes_text).collect::<String>();
            assert_eq!(text(&t), text(&n));
        }
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(AnalysisError::NaiveBudget(3)).exit_code(), 2);
        let unknown = AnalysisError::UnknownEntry(tabplai::ir::PredKey::new("p", 1));
        assert_eq!(CliError::from(unknown).exit_code(), 1);
        let contract = AnalysisError::Domain(tabplai::lattice::DomainError::NotRenamedApart { op: "extend" });
        assert_eq!(CliError::from(contract).exit_code(), 3);
        let negative = IntGraph::parse("edge(a,b,-2).").and_then(|g| shortest_distances(&g, "a", EngineOptions::default()));
        assert_eq!(CliError::from(negative.unwrap_err()).exit_code(), 3);
        assert_eq!(CliError::from(MinError::Malformed("x".into())).exit_code(), 1);
    }
}
