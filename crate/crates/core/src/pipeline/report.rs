use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::partition::{partition, FeaturePartition};
use super::relevance::{
    check_cohort, decoding_relevance, encoding_relevance, group_aggregate, GroupDecision, RelevanceDecision,
    RelevanceMatrix, Thresholds,
};
use super::rules::{interpret, Interpretation};
use super::Paradigm;
use crate::error::{Error, Result};
use crate::learn::ForestConfig;
use crate::stats::{wilcoxon_signed_rank, Smoothing, WilcoxonResult};
use crate::synth::Dataset;

pub const SCHEMA_VERSION: u32 = 1;

/// Chance level, in percent, for the group test on decoding accuracy.
pub const CHANCE_PE: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub paradigm: Paradigm,
    pub thresholds: Thresholds,
    pub n_perm_hsic: usize,
    pub n_perm_importance: usize,
    pub n_mc_ks: usize,
    pub forest: ForestConfig,
    pub smoothing: Smoothing,
    pub seed: u64,
    /// Treat decoding decisions as indeterminate unless group decoding
    /// accuracy is significantly above chance.
    pub gate_decoding: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            paradigm: Paradigm::Stimulus,
            thresholds: Thresholds::default(),
            n_perm_hsic: 1000,
            n_perm_importance: 1000,
            n_mc_ks: 100_000,
            forest: ForestConfig::default(),
            smoothing: Smoothing::AddOne,
            seed: 0,
            gate_decoding: true,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        Thresholds::new(self.thresholds.alpha, self.thresholds.beta)?;
        for (name, v) in [
            ("n_perm_hsic", self.n_perm_hsic),
            ("n_perm_importance", self.n_perm_importance),
            ("n_mc_ks", self.n_mc_ks),
            ("n_trees", self.forest.n_trees),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        if self.forest.mtry == Some(0) {
            return Err(Error::invalid("mtry must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideResult {
    pub matrix: RelevanceMatrix,
    pub group: Vec<GroupDecision>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum DecodingGate {
    Disabled,
    /// Too few subjects for the signed-rank test.
    Skipped { n_subjects: usize },
    Passed { test: WilcoxonResult },
    Failed { test: Option<WilcoxonResult> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalReport {
    pub schema_version: u32,
    pub config: AnalysisConfig,
    /// Free-form provenance added by the caller, e.g. input files.
    pub inputs: BTreeMap<String, String>,
    pub features: Vec<String>,
    pub n_subjects: usize,
    pub encoding: SideResult,
    pub decoding: SideResult,
    pub pe_star: Vec<f64>,
    pub decoding_gate: DecodingGate,
    pub partition: FeaturePartition,
    pub interpretation: Interpretation,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

fn decisions(group: &[GroupDecision]) -> Vec<(String, RelevanceDecision)> {
    group.iter().map(|g| (g.feature.clone(), g.decision)).collect()
}

/// Runs encoding and decoding relevance on every subject, aggregates both
/// sides, partitions the features and applies the interpretation rules.
/// Errors carry the name of the stage that raised them.
pub fn run_analysis(cohort: &[Dataset], config: &AnalysisConfig) -> Result<CausalReport> {
    config.validate().map_err(|e| e.in_stage("ingestion"))?;
    check_cohort(cohort).map_err(|e| e.in_stage("ingestion"))?;
    let seed = config.seed;

    let enc_matrix =
        encoding_relevance(cohort, config.n_perm_hsic, seed, config.smoothing).map_err(|e| e.in_stage("encoding"))?;
    let dec = decoding_relevance(
        cohort,
        &config.forest,
        config.n_perm_importance,
        seed,
        config.smoothing,
    )
    .map_err(|e| e.in_stage("decoding"))?;

    let aggregate = |m: &RelevanceMatrix| {
        group_aggregate(m, config.thresholds, config.n_mc_ks, seed, config.smoothing).map_err(|e| e.in_stage("aggregation"))
    };
    let enc_group = aggregate(&enc_matrix)?;
    let dec_group = aggregate(&dec.matrix)?;

    let mut warnings = dec.warnings.clone();
    let mut notes = Vec::new();
    let n = cohort.len();
    let gate = if !config.gate_decoding {
        DecodingGate::Disabled
    } else if n < 6 {
        notes.push(format!(
            "decoding accuracy not tested against chance: {n} subjects, the signed-rank test needs 6"
        ));
        DecodingGate::Skipped { n_subjects: n }
    } else {
        match wilcoxon_signed_rank(&dec.pe_star, CHANCE_PE) {
            Ok(t) if t.p.value < 0.05 && t.w_plus > (t.n * (t.n + 1)) as f64 / 4.0 => DecodingGate::Passed { test: t },
            Ok(t) => DecodingGate::Failed { test: Some(t) },
            Err(Error::Degenerate(_)) => DecodingGate::Failed { test: None },
            Err(e) => return Err(e.in_stage("aggregation")),
        }
    };
    let mut dec_decisions = decisions(&dec_group);
    if let DecodingGate::Failed { test } = &gate {
        let p = test.map_or("n/a".to_string(), |t| format!("{:.4e}", t.p.value));
        notes.push(format!(
            "decoding accuracy is not significantly above chance (signed-rank p = {p}); decoding decisions treated as indeterminate"
        ));
        for d in &mut dec_decisions {
            d.1 = RelevanceDecision::Indeterminate;
        }
    }

    let part = partition(&decisions(&enc_group), &dec_decisions).map_err(|e| e.in_stage("interpretation"))?;
    let interpretation = interpret(config.paradigm, &part);
    warnings.extend(interpretation.warnings.iter().cloned());

    Ok(CausalReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        inputs: BTreeMap::new(),
        features: cohort[0].feature_names().to_vec(),
        n_subjects: n,
        encoding: SideResult {
            matrix: enc_matrix,
            group: enc_group,
        },
        decoding: SideResult {
            matrix: dec.matrix,
            group: dec_group,
        },
        pe_star: dec.pe_star,
        decoding_gate: gate,
        partition: part,
        interpretation,
        warnings,
        notes,
    })
}

impl CausalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "paradigm: {}", self.config.paradigm);
        let _ = writeln!(out, "subjects: {}  seed: {}", self.n_subjects, self.config.seed);
        for (k, v) in &self.inputs {
            let _ = writeln!(out, "{k}: {v}");
        }
        out.push('\n');
        out.push_str(&render_table(&self.encoding.matrix, &self.encoding.group));
        out.push('\n');
        out.push_str(&render_table(&self.decoding.matrix, &self.decoding.group));
        let pe: Vec<String> = self.pe_star.iter().map(|v| format!("{v:.2}")).collect();
        let _ = writeln!(out, "PE*: {}", pe.join(" "));
        match &self.decoding_gate {
            DecodingGate::Passed { test } | DecodingGate::Failed { test: Some(test) } => {
                let _ = writeln!(out, "PE* vs {CHANCE_PE}: W+ = {}, z = {:.4}, p = {:.4e}", test.w_plus, test.z, test.p.value);
            }
            _ => {}
        }
        out.push('\n');
        let p = &self.partition;
        for (label, set) in [
            ("X+enc+dec", &p.enc_dec),
            ("X+enc-dec", &p.enc_only),
            ("X-enc+dec", &p.dec_only),
            ("X-enc-dec", &p.neither),
            ("indeterminate", &p.indeterminate),
        ] {
            let _ = writeln!(out, "{label:<14} {{{}}}", set.join(", "));
        }
        out.push('\n');
        for f in &self.interpretation.features {
            for s in &f.statements {
                let _ = writeln!(out, "[{}] {}", s.rule, s.text);
            }
            for n in &f.notes {
                let _ = writeln!(out, "[--] {}: {n}", f.feature);
            }
        }
        for c in &self.interpretation.combined {
            let tag = c.rule.map_or("**".to_string(), |r| r.to_string());
            let _ = writeln!(out, "[{tag}] {}", c.text);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for n in self.notes.iter().chain(&self.interpretation.notes) {
            let _ = writeln!(out, "note: {n}");
        }
        for c in &self.interpretation.caveats {
            let _ = writeln!(out, "caveat: {c}");
        }
        out
    }
}

fn decision_mark(d: RelevanceDecision) -> &'static str {
    match d {
        RelevanceDecision::Relevant => "rel",
        RelevanceDecision::Irrelevant => "irr",
        RelevanceDecision::Indeterminate => "ind",
    }
}

/// Subjects as rows, features as columns, with the group `KSp` row and the
/// decision row underneath.
pub fn render_table(matrix: &RelevanceMatrix, group: &[GroupDecision]) -> String {
    let width = matrix.features().iter().map(|f| f.len()).max().unwrap_or(0).max(7);
    let label_width = matrix.subjects().iter().map(|s| s.len()).max().unwrap_or(0).max(8);
    let mut out = String::new();
    let _ = write!(out, "{:<label_width$}", matrix.side());
    for f in matrix.features() {
        let _ = write!(out, " {f:>width$}");
    }
    out.push('\n');
    for (s, row) in matrix.subjects().iter().zip(matrix.rows()) {
        let _ = write!(out, "{s:<label_width$}");
        for v in row {
            let _ = write!(out, " {v:>width$.3}");
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<label_width$}", "KSp");
    for g in group {
        let _ = write!(out, " {:>width$.3}", g.p.value);
    }
    out.push('\n');
    let _ = write!(out, "{:<label_width$}", "decision");
    for g in group {
        let _ = write!(out, " {:>width$}", decision_mark(g.decision));
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::CvScheme;
    use crate::synth::Sem;

    fn quick() -> AnalysisConfig {
        AnalysisConfig {
            n_perm_hsic: 50,
            n_perm_importance: 50,
            n_mc_ks: 2000,
            forest: ForestConfig {
                n_trees: 20,
                mtry: None,
                cv: CvScheme::KFold(4),
            },
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn empty_cohort_names_ingestion_stage() {
        match run_analysis(&[], &quick()) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "ingestion"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn report_is_deterministic_and_complete() {
        let sem = Sem::parse("S -> X1\nmech: X1 = linear(S:0.9)\ncondition: S\n").unwrap();
        let cohort = sem.subject_cohort(6, 120, 4).unwrap();
        let a = run_analysis(&cohort, &quick()).unwrap();
        let b = run_analysis(&cohort, &quick()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.schema_version, SCHEMA_VERSION);
        assert_eq!(a.encoding.matrix.n_subjects(), 6);
        assert_eq!(a.pe_star.len(), 6);
        let text = a.to_text();
        assert!(text.contains("KSp"));
        assert!(text.contains("X+enc+dec"));
    }

    #[test]
    fn invalid_config_rejected() {
        let mut c = quick();
        c.n_mc_ks = 0;
        assert!(c.validate().is_err());
        c = quick();
        c.thresholds = Thresholds { alpha: 0.2, beta: 0.1 };
        assert!(c.validate().is_err());
    }
}
