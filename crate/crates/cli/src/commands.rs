use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use causalrel::graph::Dag;
use causalrel::pipeline::{
    group_aggregate, render_table, run_analysis, CausalReport, GroupDecision, RelevanceDecision, RuleId, Side,
};
use causalrel::synth::Sem;

use crate::config::RunConfig;
use crate::error::{io_error, CliError, Result};
use crate::ingest::{read_cohort, read_matrix};

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn set(names: &[String]) -> String {
    format!("{{{}}}", names.join(", "))
}

#[derive(Debug, Default, Clone)]
pub struct AnalyzeArgs {
    pub config: Option<PathBuf>,
    pub files: Vec<PathBuf>,
    pub output_json: Option<PathBuf>,
    pub output_text: Option<PathBuf>,
}

/// Runs the full analysis and writes the JSON and text reports.
pub fn analyze(args: &AnalyzeArgs) -> Result<CausalReport> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(p) = &args.output_json {
        cfg.output_json = p.clone();
    }
    if let Some(p) = &args.output_text {
        cfg.output_text = p.clone();
    }
    let (files, labels) = read_cohort(&args.files)?;
    let d = files[0].data.d();
    eprintln!("read {} subject files, {d} features", files.len());
    let cohort: Vec<_> = files.iter().map(|f| f.data.clone()).collect();
    let start = Instant::now();
    let mut report = run_analysis(&cohort, &cfg.analysis)?;
    eprintln!("analysis finished in {:.1}s", start.elapsed().as_secs_f64());

    let inputs = &mut report.inputs;
    inputs.insert(
        "config".into(),
        args.config.as_ref().map_or("(defaults)".into(), |p| p.display().to_string()),
    );
    let names: Vec<String> = files.iter().map(|f| f.path.display().to_string()).collect();
    inputs.insert("subject_files".into(), names.join(", "));
    inputs.insert("condition_labels".into(), labels.describe().unwrap_or_else(|| "0/1".into()));
    inputs.insert("output_json".into(), cfg.output_json.display().to_string());
    inputs.insert("output_text".into(), cfg.output_text.display().to_string());

    write(&cfg.output_json, &report.to_json())?;
    write(&cfg.output_text, &report.to_text())?;
    eprintln!("wrote {} and {}", cfg.output_json.display(), cfg.output_text.display());
    Ok(report)
}

fn mark(b: bool) -> &'static str {
    if b {
        "relevant"
    } else {
        "irrelevant"
    }
}

/// Writes one CSV per subject and returns the oracle table of the fixture.
pub fn simulate(fixture: &Path, n_subjects: usize, n: usize, seed: u64, out_dir: &Path) -> Result<String> {
    let sem = Sem::parse(&read(fixture)?).map_err(|e| CliError::from(e).context(fixture.display()))?;
    let cohort = sem.subject_cohort(n_subjects, n, seed)?;
    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let width = n_subjects.to_string().len().max(2);
    for (k, ds) in cohort.iter().enumerate() {
        write(&out_dir.join(format!("subject_{:0width$}.csv", k + 1)), &ds.to_csv())?;
    }
    eprintln!("wrote {n_subjects} files to {}", out_dir.display());

    let features = sem.feature_names();
    let oracle = sem.dag().oracle_relevance(sem.condition(), &features)?;
    let w = features.iter().map(String::len).max().unwrap_or(0).max(7);
    let mut out = String::new();
    let _ = writeln!(out, "condition: {}  paradigm: {}", sem.condition(), sem.paradigm());
    let _ = writeln!(out, "{:<w$}  {:<10}  {:<10}  rule", "feature", "encoding", "decoding");
    for o in &oracle {
        let rule = RuleId::combined_rule(sem.paradigm(), o.encoding, o.decoding);
        let _ = writeln!(out, "{:<w$}  {:<10}  {:<10}  {rule}", o.feature, mark(o.encoding), mark(o.decoding));
    }
    Ok(out)
}

/// Decides whether `given` d-separates `a` and `b`.
pub fn dsep(dag: &Path, a: &str, b: &str, given: &[String]) -> Result<String> {
    let g = Dag::parse(&read(dag)?).map_err(|e| CliError::from(e).context(dag.display()))?;
    let separated = g.is_d_separated(a, b, given)?;
    let z = set(given);
    Ok(if separated {
        format!("d-separated\n{a} _||_ {b} | {z}: independent given {z} in every distribution Markov to the graph\n")
    } else {
        format!("d-connected\n{a} and {b} given {z}: dependent in every distribution faithful to the graph\n")
    })
}

/// Group aggregation of a transcribed p-value matrix.
pub fn replay(matrix: &Path, side: Side, config: Option<&Path>) -> Result<(Vec<GroupDecision>, String)> {
    let cfg = load_config(config)?.analysis;
    let m = read_matrix(matrix, side)?;
    let group = group_aggregate(&m, cfg.thresholds, cfg.n_mc_ks, cfg.seed, cfg.smoothing)?;
    let mut out = render_table(&m, &group);
    out.push('\n');
    let _ = writeln!(out, "{:<10} {:>8} {:>10}  decision", "feature", "D", "KSp");
    for g in &group {
        let _ = writeln!(out, "{:<10} {:>8.4} {:>10.6}  {:?}", g.feature, g.ks_statistic, g.p.value, g.decision);
    }
    for (label, d) in [
        ("relevant", RelevanceDecision::Relevant),
        ("irrelevant", RelevanceDecision::Irrelevant),
        ("indeterminate", RelevanceDecision::Indeterminate),
    ] {
        let names: Vec<String> = group.iter().filter(|g| g.decision == d).map(|g| g.feature.clone()).collect();
        let _ = writeln!(out, "{label}: {}", set(&names));
    }
    Ok((group, out))
}
