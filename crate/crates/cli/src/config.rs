//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use causalrel::learn::CvScheme;
use causalrel::pipeline::{AnalysisConfig, Paradigm, Thresholds};
use causalrel::stats::Smoothing;

use crate::error::{io_error, CliError, Result};

pub const KEYS: [&str; 14] = [
    "paradigm",
    "alpha",
    "beta",
    "n_perm_hsic",
    "n_perm_importance",
    "n_mc_ks",
    "n_trees",
    "mtry",
    "cv",
    "seed",
    "smoothing",
    "gate_decoding",
    "output_json",
    "output_text",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub analysis: AnalysisConfig,
    pub output_json: PathBuf,
    pub output_text: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            analysis: AnalysisConfig::default(),
            output_json: PathBuf::from("report.json"),
            output_text: PathBuf::from("report.txt"),
        }
    }
}

fn value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| CliError::input(format!("line {line}: `{key}`: cannot parse `{v}`: {e}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let (mut alpha, mut beta) = (cfg.analysis.thresholds.alpha, cfg.analysis.thresholds.beta);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, v) = body
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("line {line}: expected `key = value`, found `{body}`")))?;
            let (key, v) = (key.trim(), v.trim());
            let Some(&key) = KEYS.iter().find(|k| **k == key) else {
                return Err(CliError::input(format!(
                    "line {line}: unknown key `{key}` (known keys: {})",
                    KEYS.join(", ")
                )));
            };
            if seen.contains(&key) {
                return Err(CliError::input(format!("line {line}: `{key}` set twice")));
            }
            seen.push(key);
            let a = &mut cfg.analysis;
            match key {
                "paradigm" => a.paradigm = value::<Paradigm>(line, key, v)?,
                "alpha" => alpha = value(line, key, v)?,
                "beta" => beta = value(line, key, v)?,
                "n_perm_hsic" => a.n_perm_hsic = value(line, key, v)?,
                "n_perm_importance" => a.n_perm_importance = value(line, key, v)?,
                "n_mc_ks" => a.n_mc_ks = value(line, key, v)?,
                "n_trees" => a.forest.n_trees = value(line, key, v)?,
                "mtry" => {
                    a.forest.mtry = if v == "auto" { None } else { Some(value(line, key, v)?) };
                }
                "cv" => a.forest.cv = value::<CvScheme>(line, key, v)?,
                "seed" => a.seed = value(line, key, v)?,
                "smoothing" => a.smoothing = value::<Smoothing>(line, key, v)?,
                "gate_decoding" => a.gate_decoding = value(line, key, v)?,
                "output_json" => cfg.output_json = PathBuf::from(v),
                _ => cfg.output_text = PathBuf::from(v),
            }
        }
        cfg.analysis.thresholds = Thresholds::new(alpha, beta)?;
        cfg.analysis.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        RunConfig::parse(&text).map_err(|e| e.context(path.display()))
    }

    /// Canonical text form; parsing it back gives the same configuration.
    pub fn to_text(&self) -> String {
        let a = &self.analysis;
        let mtry = a.forest.mtry.map_or("auto".to_string(), |m| m.to_string());
        let values = [
            a.paradigm.to_string(),
            a.thresholds.alpha.to_string(),
            a.thresholds.beta.to_string(),
            a.n_perm_hsic.to_string(),
            a.n_perm_importance.to_string(),
            a.n_mc_ks.to_string(),
            a.forest.n_trees.to_string(),
            mtry,
            a.forest.cv.to_string(),
            a.seed.to_string(),
            a.smoothing.to_string(),
            a.gate_decoding.to_string(),
            self.output_json.display().to_string(),
            self.output_text.display().to_string(),
        ];
        KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
