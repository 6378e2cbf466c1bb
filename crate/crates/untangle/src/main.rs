//! Command line front end: categorize changed lines per commit, compute
//! metric vectors, label bug-inducing commits, pre-filter pure-refactoring
//! commits, and evaluate a defect predictor.
//!
//! Exit codes: 0 success, 1 completed with per-commit/per-line failures
//! logged, 2 configuration error.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use untangle::categorize::{pure_refactoring_filter, reorder_changes, LineChangeRecord, Side};
use untangle::error::PipelineError;
use untangle::metrics::{
    compute_basic_metrics, feature_names, load_kamei_csv, merge_external_metrics, ram_names,
};
use untangle::pipeline::{analyze_commit, commit_rams, Analyzer, CommitAnalysis, PipelineConfig};
use untangle::predict::{
    classification_metrics, effort_metrics, predict, train, EffortUnit, TrainConfig,
};
use untangle::refactoring::{load_report, RefactoringInstance};
use untangle::szz::{group_annotations, label_dataset, AnnotationRow, SzzOptions};
use untangle::vcs::{CommitId, RepoHandle};

#[derive(Parser)]
#[command(
    name = "untangle",
    version,
    about = "Untangle refactoring from other code changes, compute refactoring-aware \
             change metrics, and label bug-inducing commits"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Categorize every changed line of the selected commits.
    Categorize(CategorizeCmd),
    /// Compute per-commit metric vectors (66 columns, 80 with `--kamei`).
    Metrics(MetricsCmd),
    /// Trace annotated fix lines to bug-inducing commits.
    Label(LabelCmd),
    /// Pre-label pure-refactoring commits as clean.
    Filter(FilterCmd),
    /// Train and evaluate the logistic-regression defect predictor.
    Eval(EvalCmd),
}

#[derive(Args)]
struct RepoOpts {
    /// Git repository directory, or a synthetic-history JSON descriptor.
    #[arg(long)]
    repo: PathBuf,
    /// Commit selection: a file of ids (one per line, `#` comments), a
    /// comma-separated list, or `A..B` for the first-parent span after A up
    /// to B. Default: every commit, first-parent topological order.
    #[arg(long)]
    commits: Option<String>,
    /// Refactoring report JSON for the analyzed commits.
    #[arg(long)]
    refactorings: Option<PathBuf>,
    /// Statement-matching similarity threshold (strict lower bound).
    #[arg(long, default_value_t = 0.8)]
    threshold: f64,
    /// Worker threads for per-commit analysis.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CategorizeCmd {
    #[command(flatten)]
    repo: RepoOpts,
}

#[derive(Args)]
struct MetricsCmd {
    #[command(flatten)]
    repo: RepoOpts,
    /// CSV of imported change metrics keyed by commit_id.
    #[arg(long)]
    kamei: Option<PathBuf>,
    /// Overwrite the imported NS, ND, NF, Entropy, LA, LD columns with
    /// locally computed values.
    #[arg(long, requires = "kamei")]
    prefer_computed: bool,
}

#[derive(Args)]
struct LabelCmd {
    #[command(flatten)]
    repo: RepoOpts,
    /// JSONL of fix lines: {"fix_commit":…, "path":…, "line":…} per row.
    #[arg(long)]
    annotations: PathBuf,
    /// Disable the refactoring skip set (plain SZZ).
    #[arg(long)]
    naive: bool,
    /// Mark inducing commits changing more lines than this as excluded.
    #[arg(long)]
    max_commit_churn: Option<usize>,
    /// Prior verdicts CSV to diff against (commit,buggy).
    #[arg(long)]
    prior: Option<PathBuf>,
}

#[derive(Args)]
struct FilterCmd {
    #[command(flatten)]
    repo: RepoOpts,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EffortUnitArg {
    /// Each buggy commit counts 1 toward defect mass.
    Commit,
    /// Each buggy commit counts its churn in lines.
    Line,
}

#[derive(Args)]
struct EvalCmd {
    /// Feature CSV produced by `metrics` (66 or 80 value columns).
    #[arg(long)]
    features: PathBuf,
    /// Verdict CSV (commit,buggy) produced by `label`.
    #[arg(long)]
    labels: PathBuf,
    /// Split CSV (commit,set) with set in {train,test}; must cover every
    /// feature row.
    #[arg(long)]
    split: PathBuf,
    /// Filter CSV from `filter`; commits pre-labeled clean get score 0.
    #[arg(long)]
    prefilter: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EffortUnitArg::Commit)]
    effort_unit: EffortUnitArg,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Categorize(args) => cmd_categorize(args),
        Cmd::Metrics(args) => cmd_metrics(args),
        Cmd::Label(args) => cmd_label(args),
        Cmd::Filter(args) => cmd_filter(args),
        Cmd::Eval(args) => cmd_eval(args),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

struct Ctx {
    repo: RepoHandle,
    report: BTreeMap<String, Vec<RefactoringInstance>>,
    commits: Vec<CommitId>,
    config: PipelineConfig,
    workers: usize,
    out: PathBuf,
}

fn prepare(opts: &RepoOpts) -> Result<Ctx, String> {
    if !(opts.threshold > 0.0 && opts.threshold <= 1.0) {
        return Err(format!(
            "--threshold must be in (0, 1], got {}",
            opts.threshold
        ));
    }
    if opts.workers < 1 {
        return Err("--workers must be at least 1".into());
    }
    let repo = RepoHandle::open(&opts.repo)
        .map_err(|e| format!("cannot open {}: {e}", opts.repo.display()))?;
    let report = match &opts.refactorings {
        Some(path) => {
            let text = read_text(path)?;
            load_report(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => BTreeMap::new(),
    };
    let commits = resolve_commits(&repo, opts.commits.as_deref())?;
    fs::create_dir_all(&opts.out)
        .map_err(|e| format!("cannot create {}: {e}", opts.out.display()))?;
    Ok(Ctx {
        repo,
        report,
        commits,
        config: PipelineConfig {
            threshold: opts.threshold,
            ..PipelineConfig::default()
        },
        workers: opts.workers,
        out: opts.out.clone(),
    })
}

fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn write_text(path: &Path, content: &str) -> Result<(), String> {
    fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Maps a commit selection spec to ids in first-parent topological order.
fn resolve_commits(repo: &RepoHandle, spec: Option<&str>) -> Result<Vec<CommitId>, String> {
    let all = repo.commits().map_err(|e| format!("cannot list commits: {e}"))?;
    let Some(spec) = spec else { return Ok(all) };
    let position = |token: &str| -> Result<usize, String> {
        if let Some(i) = all.iter().position(|c| c.as_str() == token) {
            return Ok(i);
        }
        let prefixed: Vec<usize> = (0..all.len())
            .filter(|&i| all[i].as_str().starts_with(token))
            .collect();
        match prefixed[..] {
            [i] => Ok(i),
            [] => Err(format!("unknown commit {token}")),
            _ => Err(format!("ambiguous commit prefix {token}")),
        }
    };
    if let Some((a, b)) = spec.split_once("..") {
        let ia = position(a.trim())?;
        let ib = position(b.trim())?;
        if ia > ib {
            return Err(format!("range {spec} runs backward"));
        }
        return Ok(all[ia + 1..=ib].to_vec());
    }
    let tokens: Vec<String> = if Path::new(spec).is_file() {
        read_text(Path::new(spec))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect()
    } else {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    };
    let mut indices = tokens
        .iter()
        .map(|t| position(t))
        .collect::<Result<Vec<usize>, String>>()?;
    indices.sort_unstable();
    indices.dedup();
    Ok(indices.into_iter().map(|i| all[i].clone()).collect())
}

/// Analyzes the selected commits on a worker pool. Results come back in the
/// commits' order regardless of worker count.
fn analyze_all(ctx: &Ctx) -> Vec<(CommitId, Result<CommitAnalysis, PipelineError>)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.workers)
        .build()
        .expect("thread pool");
    pool.install(|| {
        ctx.commits
            .par_iter()
            .map(|commit| {
                // One handle per worker task, per the repository contract.
                let repo = ctx.repo.clone();
                let external = ctx
                    .report
                    .get(commit.as_str())
                    .map(Vec::as_slice)
                    .unwrap_or_default();
                (
                    commit.clone(),
                    analyze_commit(&repo, commit, external, &ctx.config),
                )
            })
            .collect()
    })
}

fn file_stem(commit: &str) -> String {
    commit
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable value")
}

#[derive(Default)]
struct Summary {
    commits: u64,
    add: u64,
    edit: u64,
    refactored: u64,
    propagated: u64,
    tangled: u64,
    refactored_commits: u64,
}

impl Summary {
    /// Tallies added lines by category group and whether the commit touches
    /// any refactoring at all.
    fn absorb(&mut self, records: &[LineChangeRecord]) {
        self.commits += 1;
        for r in records {
            if r.side != Side::Add {
                continue;
            }
            match r.category.as_str() {
                "Add" => self.add += 1,
                "Add_Edit" => self.edit += 1,
                "Add_Move" | "Add_Refactoring" => self.refactored += 1,
                "Add_Propagation" | "Add_Refactoring_Propagation" => self.propagated += 1,
                _ => self.tangled += 1,
            }
        }
        if records
            .iter()
            .any(|r| r.flags.mv || r.flags.refactoring || r.flags.propagation)
        {
            self.refactored_commits += 1;
        }
    }
}

fn cmd_categorize(args: &CategorizeCmd) -> Result<bool, String> {
    let ctx = prepare(&args.repo)?;
    let results = analyze_all(&ctx);
    let commits_dir = ctx.out.join("commits");
    fs::create_dir_all(&commits_dir)
        .map_err(|e| format!("cannot create {}: {e}", commits_dir.display()))?;

    let mut failures = 0u64;
    let mut skipped = String::new();
    let mut summary = Summary::default();
    for (commit, result) in &results {
        let analysis = match result {
            Ok(a) => a,
            Err(e) => {
                eprintln!("warning: {}: {e}", commit.as_str());
                failures += 1;
                continue;
            }
        };
        let mut body = String::new();
        for group in reorder_changes(&analysis.records) {
            for record in &group {
                body.push_str(&to_json(record));
                body.push('\n');
            }
        }
        write_text(&commits_dir.join(format!("{}.jsonl", file_stem(commit.as_str()))), &body)?;
        for fd in &analysis.skipped {
            skipped.push_str(&to_json(&serde_json::json!({
                "commit": commit.as_str(),
                "path_before": fd.path_before,
                "path_after": fd.path_after,
            })));
            skipped.push('\n');
        }
        summary.absorb(&analysis.records);
    }
    write_text(&ctx.out.join("skipped.jsonl"), &skipped)?;
    write_text(
        &ctx.out.join("summary.csv"),
        &format!(
            "commits,add,edit,refactored,propagated,tangled,refactored_commits\n{},{},{},{},{},{},{}\n",
            summary.commits,
            summary.add,
            summary.edit,
            summary.refactored,
            summary.propagated,
            summary.tangled,
            summary.refactored_commits,
        ),
    )?;
    println!("added-line categories over {} commits", summary.commits);
    for (name, count) in [
        ("Add", summary.add),
        ("Edit", summary.edit),
        ("Refactored", summary.refactored),
        ("Propagated", summary.propagated),
        ("Tangled", summary.tangled),
    ] {
        println!("  {name:<12} {count:>8}");
    }
    println!(
        "  {:<12} {:>8}",
        "Ref.Commits", summary.refactored_commits
    );
    if failures > 0 {
        eprintln!("{failures} commit(s) failed");
    }
    Ok(failures > 0)
}

fn cmd_metrics(args: &MetricsCmd) -> Result<bool, String> {
    let ctx = prepare(&args.repo)?;
    let kamei = match &args.kamei {
        Some(path) => Some(
            load_kamei_csv(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))?,
        ),
        None => None,
    };
    let results = analyze_all(&ctx);

    let names: Vec<String> = if kamei.is_some() {
        feature_names()
    } else {
        ram_names()
    };
    let mut csv_text = String::from("commit");
    for name in &names {
        csv_text.push(',');
        csv_text.push_str(name);
    }
    csv_text.push('\n');

    let mut failures = 0u64;
    for (commit, result) in &results {
        let analysis = match result {
            Ok(a) => a,
            Err(e) => {
                eprintln!("warning: {}: {e}", commit.as_str());
                failures += 1;
                continue;
            }
        };
        if analysis.records.is_empty() {
            continue;
        }
        let values = commit_rams(analysis)
            .map_err(|e| e.to_string())
            .and_then(|ram| match &kamei {
                Some(rows) => {
                    let computed = if args.prefer_computed {
                        Some(compute_basic_metrics(&analysis.diffs))
                    } else {
                        None
                    };
                    merge_external_metrics(commit.as_str(), &ram, rows, computed.as_ref())
                        .map_err(|e| e.to_string())
                }
                None => Ok(ram.values()),
            });
        match values {
            Ok(values) => {
                csv_text.push_str(commit.as_str());
                for v in values {
                    csv_text.push(',');
                    csv_text.push_str(&format_metric(v));
                }
                csv_text.push('\n');
            }
            Err(e) => {
                eprintln!("warning: {}: {e}", commit.as_str());
                failures += 1;
            }
        }
    }
    write_text(&ctx.out.join("metrics.csv"), &csv_text)?;
    if failures > 0 {
        eprintln!("{failures} commit(s) failed");
    }
    Ok(failures > 0)
}

/// Shortest decimal that round-trips, so outputs are byte-stable.
fn format_metric(v: f64) -> String {
    let mut buf = ryu_like(v);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_like(v: f64) -> String {
    // Rust's Display for f64 already prints the shortest round-trip form.
    format!("{v}")
}

fn cmd_filter(args: &FilterCmd) -> Result<bool, String> {
    let ctx = prepare(&args.repo)?;
    let results = analyze_all(&ctx);
    let mut csv_text = String::from("commit,verdict\n");
    let mut failures = 0u64;
    let mut clean = 0u64;
    for (commit, result) in &results {
        let verdict = result
            .as_ref()
            .map_err(|e| e.to_string())
            .and_then(|a| pure_refactoring_filter(&a.records).map_err(|e| e.to_string()));
        match verdict {
            Ok(v) => {
                csv_text.push_str(&format!("{},{v}\n", commit.as_str()));
                if v == untangle::categorize::Verdict::Clean {
                    clean += 1;
                }
            }
            Err(e) => {
                eprintln!("warning: {}: {e}", commit.as_str());
                failures += 1;
            }
        }
    }
    write_text(&ctx.out.join("filter.csv"), &csv_text)?;
    println!(
        "{clean} of {} commits pre-labeled clean",
        results.len() as u64 - failures
    );
    if failures > 0 {
        eprintln!("{failures} commit(s) failed");
    }
    Ok(failures > 0)
}

fn parse_annotations(text: &str) -> Result<Vec<AnnotationRow>, String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str::<AnnotationRow>(line)
                .map_err(|e| format!("annotations line {}: {e}", i + 1))
        })
        .collect()
}

fn parse_verdicts(text: &str, what: &str) -> Result<BTreeMap<String, bool>, String> {
    let mut out = BTreeMap::new();
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| format!("{what}: empty file"))?;
    if !header.to_ascii_lowercase().starts_with("commit") {
        return Err(format!("{what}: expected a commit,buggy header"));
    }
    for (i, line) in lines.enumerate() {
        let (commit, value) = line
            .split_once(',')
            .ok_or_else(|| format!("{what} row {}: expected commit,buggy", i + 2))?;
        let buggy = match value.trim().to_ascii_lowercase().as_str() {
            "1" | "true" | "buggy" => true,
            "0" | "false" | "clean" => false,
            other => return Err(format!("{what} row {}: bad flag {other:?}", i + 2)),
        };
        out.insert(commit.trim().to_string(), buggy);
    }
    Ok(out)
}

fn cmd_label(args: &LabelCmd) -> Result<bool, String> {
    let ctx = prepare(&args.repo)?;
    let rows = parse_annotations(&read_text(&args.annotations)?)?;
    let annotations = group_annotations(&rows);
    let opts = SzzOptions {
        skip_refactorings: !args.naive,
        max_commit_churn: args.max_commit_churn,
        ..SzzOptions::default()
    };
    // Tracing walks history sequentially; the analyzer caches per commit.
    let mut analyzer = Analyzer::new(ctx.repo.clone(), ctx.report.clone(), ctx.config.clone());
    let outcome = label_dataset(&ctx.repo, &mut analyzer, &annotations, &ctx.commits, &opts);

    let mut labels_text = String::new();
    for label in &outcome.labels {
        labels_text.push_str(&to_json(label));
        labels_text.push('\n');
    }
    write_text(&ctx.out.join("labels.jsonl"), &labels_text)?;

    let mut verdicts_text = String::from("commit,buggy\n");
    for (commit, buggy) in &outcome.verdicts {
        verdicts_text.push_str(&format!("{},{}\n", commit.as_str(), u8::from(*buggy)));
    }
    write_text(&ctx.out.join("verdicts.csv"), &verdicts_text)?;

    let mut failures_text = String::new();
    for failure in &outcome.failures {
        failures_text.push_str(&to_json(failure));
        failures_text.push('\n');
        eprintln!(
            "warning: {} {}:{}: {}",
            failure.fix_commit.as_str(),
            failure.path,
            failure.line,
            failure.error
        );
    }
    write_text(&ctx.out.join("label_failures.jsonl"), &failures_text)?;

    let buggy_count = outcome.verdicts.iter().filter(|(_, b)| *b).count();
    println!(
        "{} labels; {} buggy / {} clean commits; {} failures",
        outcome.labels.len(),
        buggy_count,
        outcome.verdicts.len() - buggy_count,
        outcome.failures.len()
    );

    if let Some(prior_path) = &args.prior {
        let prior = parse_verdicts(&read_text(prior_path)?, "prior labeling")?;
        let mut diff_text = String::from("commit,prior,current\n");
        let (mut to_clean, mut to_buggy) = (0u64, 0u64);
        for (commit, buggy) in &outcome.verdicts {
            let Some(before) = prior.get(commit.as_str()) else {
                continue;
            };
            if before != buggy {
                if *buggy {
                    to_buggy += 1;
                } else {
                    to_clean += 1;
                }
                diff_text.push_str(&format!(
                    "{},{},{}\n",
                    commit.as_str(),
                    u8::from(*before),
                    u8::from(*buggy)
                ));
            }
        }
        write_text(&ctx.out.join("prior_diff.csv"), &diff_text)?;
        println!(
            "prior diff: {} flipped ({to_clean} buggy->clean, {to_buggy} clean->buggy)",
            to_clean + to_buggy
        );
    }
    Ok(!outcome.failures.is_empty())
}

struct FeatureTable {
    commits: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn parse_features(text: &str) -> Result<FeatureTable, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("features: empty file")?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.is_empty() || !columns[0].eq_ignore_ascii_case("commit") {
        return Err("features: first column must be commit".into());
    }
    let width = columns.len() - 1;
    if width < 18 {
        return Err(format!(
            "features: expected at least 18 value columns, found {width}"
        ));
    }
    let mut table = FeatureTable {
        commits: Vec::new(),
        rows: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let mut cells = line.split(',');
        let commit = cells.next().unwrap_or_default().trim().to_string();
        let row = cells
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("features row {}: non-numeric cell {c:?}", i + 2))
            })
            .collect::<Result<Vec<f64>, String>>()?;
        if row.len() != width {
            return Err(format!(
                "features row {}: {} cells, header has {width}",
                i + 2,
                row.len()
            ));
        }
        table.commits.push(commit);
        table.rows.push(row);
    }
    Ok(table)
}

fn parse_split(text: &str) -> Result<BTreeMap<String, bool>, String> {
    let mut out = BTreeMap::new();
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or("split: empty file")?;
    if !header.to_ascii_lowercase().starts_with("commit") {
        return Err("split: expected a commit,set header".into());
    }
    for (i, line) in lines.enumerate() {
        let (commit, set) = line
            .split_once(',')
            .ok_or_else(|| format!("split row {}: expected commit,set", i + 2))?;
        let is_train = match set.trim().to_ascii_lowercase().as_str() {
            "train" => true,
            "test" => false,
            other => return Err(format!("split row {}: bad set {other:?}", i + 2)),
        };
        out.insert(commit.trim().to_string(), is_train);
    }
    Ok(out)
}

/// Commits pre-labeled clean by the pure-refactoring filter.
fn parse_prefilter(text: &str) -> Result<BTreeSet<String>, String> {
    let mut out = BTreeSet::new();
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or("prefilter: empty file")?;
    if !header.to_ascii_lowercase().starts_with("commit") {
        return Err("prefilter: expected a commit,verdict header".into());
    }
    for line in lines {
        if let Some((commit, verdict)) = line.split_once(',') {
            if verdict.trim().eq_ignore_ascii_case("clean") {
                out.insert(commit.trim().to_string());
            }
        }
    }
    Ok(out)
}

fn cmd_eval(args: &EvalCmd) -> Result<bool, String> {
    let features = parse_features(&read_text(&args.features)?)?;
    let labels = parse_verdicts(&read_text(&args.labels)?, "labels")?;
    let split = parse_split(&read_text(&args.split)?)?;
    let prefilter = match &args.prefilter {
        Some(path) => parse_prefilter(&read_text(path)?)?,
        None => BTreeSet::new(),
    };

    let mut train_x = Vec::new();
    let mut train_y = Vec::new();
    let mut test_x = Vec::new();
    let mut test_y = Vec::new();
    let mut test_commits = Vec::new();
    let mut test_churn = Vec::new();
    for (commit, row) in features.commits.iter().zip(features.rows.iter()) {
        let buggy = *labels
            .get(commit)
            .ok_or_else(|| format!("labels: no verdict for commit {commit}"))?;
        let is_train = *split
            .get(commit)
            .ok_or_else(|| format!("split: no assignment for commit {commit}"))?;
        if is_train {
            train_x.push(row.clone());
            train_y.push(buggy);
        } else {
            // Churn is the sum of the 18 per-category line counts.
            let churn: f64 = row[..18].iter().sum();
            test_churn.push(churn.round() as u64);
            test_x.push(row.clone());
            test_y.push(buggy);
            test_commits.push(commit.clone());
        }
    }
    if test_x.is_empty() {
        return Err("split assigns no commit to the test set".into());
    }

    let model = train(&train_x, &train_y, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let mut scores = predict(&model, &test_x);
    for (score, commit) in scores.iter_mut().zip(test_commits.iter()) {
        if prefilter.contains(commit) {
            *score = 0.0;
        }
    }

    let class = classification_metrics(&scores, &test_y, 0.5);
    let unit = match args.effort_unit {
        EffortUnitArg::Commit => EffortUnit::Commit,
        EffortUnitArg::Line => EffortUnit::Line,
    };
    let effort = effort_metrics(&scores, &test_y, &test_churn, unit).map_err(|e| e.to_string())?;

    fs::create_dir_all(&args.out)
        .map_err(|e| format!("cannot create {}: {e}", args.out.display()))?;
    let report = serde_json::json!({
        "precision": class.precision,
        "recall": class.recall,
        "f1": class.f1,
        "auc": class.auc,
        "recall_at_20_effort": effort.recall_at_20_effort,
        "effort_at_20_recall": effort.effort_at_20_recall,
        "p_opt": effort.p_opt,
    });
    write_text(
        &args.out.join("eval.json"),
        &format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable")),
    )?;
    for (name, value) in [
        ("precision", class.precision),
        ("recall", class.recall),
        ("f1", class.f1),
        ("auc", class.auc),
        ("recall@20%effort", effort.recall_at_20_effort),
        ("effort@20%recall", effort.effort_at_20_recall),
        ("p_opt", effort.p_opt),
    ] {
        println!("{name:<18} {value:>8.4}");
    }
    Ok(false)
}
