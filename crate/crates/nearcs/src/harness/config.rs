//! Line-oriented experiment config format with `[section]` headers and
//! `key = value` pairs, shared by config files and run manifests.
//!
//! Unknown keys are hard errors. `dump_config` emits the canonical form:
//! fixed section and key order, so `parse(dump(x))` is the identity and a
//! manifest re-run reproduces its sweep byte for byte.

use super::{ExperimentConfig, HarnessError, Result, SweepAxis};
use crate::channel::GridMode;
use crate::estimators::{EstimatorKind, KRule};
use crate::sideinfo::DMode;
use std::path::{Path, PathBuf};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

fn perr(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse { line, message: message.into() }
}

fn parse_f64(line: usize, key: &str, val: &str) -> Result<f64> {
    val.parse::<f64>().map_err(|_| perr(line, format!("{key}: invalid number '{val}'")))
}

fn parse_usize(line: usize, key: &str, val: &str) -> Result<usize> {
    val.parse::<usize>().map_err(|_| perr(line, format!("{key}: invalid integer '{val}'")))
}

fn parse_list_f64(line: usize, key: &str, val: &str) -> Result<Vec<f64>> {
    val.split(',')
        .map(|s| parse_f64(line, key, s.trim()))
        .collect()
}

fn parse_list_usize(line: usize, key: &str, val: &str) -> Result<Vec<usize>> {
    val.split(',')
        .map(|s| parse_usize(line, key, s.trim()))
        .collect()
}

/// Parses config text over the Table-I defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::defaults();
    let mut section = String::new();
    let mut sweep_name: Option<(usize, String)> = None;
    let mut sweep_values: Option<(usize, String)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(perr(line_no, "unterminated section header"));
            }
            section = line[1..line.len() - 1].trim().to_string();
            match section.as_str() {
                "experiment" | "system" | "manifest" => {}
                other => return Err(perr(line_no, format!("unknown section '[{other}]'"))),
            }
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(perr(line_no, "expected 'key = value'"));
        };
        let key = line[..eq].trim();
        let val = line[eq + 1..].trim();
        match (section.as_str(), key) {
            ("experiment", "sweep") => sweep_name = Some((line_no, val.to_string())),
            ("experiment", "values") => sweep_values = Some((line_no, val.to_string())),
            ("experiment", "trials") => cfg.trials = parse_usize(line_no, key, val)?,
            ("experiment", "seed") => {
                cfg.master_seed =
                    val.parse::<u64>().map_err(|_| perr(line_no, "seed: invalid u64"))?
            }
            ("experiment", "theta") => cfg.theta = parse_f64(line_no, key, val)?,
            ("experiment", "workers") => cfg.workers = parse_usize(line_no, key, val)?,
            ("experiment", "out") => cfg.out_dir = Some(PathBuf::from(val)),
            ("experiment", "estimators") => {
                let mut kinds = Vec::new();
                for name in val.split(',') {
                    let name = name.trim();
                    let kind = EstimatorKind::parse(name)
                        .ok_or_else(|| perr(line_no, format!("unknown estimator '{name}'")))?;
                    kinds.push(kind);
                }
                cfg.estimators = kinds;
            }
            ("experiment", "d_mode") => {
                cfg.d_mode = match val {
                    "exact" => DMode::Exact,
                    "simplified" => DMode::Simplified,
                    other => return Err(perr(line_no, format!("unknown d_mode '{other}'"))),
                }
            }
            ("experiment", "k_rule") => {
                cfg.k_rule = match val {
                    "paper_literal" => KRule::PaperLiteral,
                    "sparsity_decrement" => KRule::SparsityDecrement,
                    "fixed" => KRule::Fixed,
                    other => return Err(perr(line_no, format!("unknown k_rule '{other}'"))),
                }
            }
            ("system", "n") => cfg.base.n = parse_usize(line_no, key, val)?,
            ("system", "n_sub") => cfg.base.n_sub = parse_usize(line_no, key, val)?,
            ("system", "k") => cfg.base.k = parse_usize(line_no, key, val)?,
            ("system", "m") => cfg.base.m = parse_usize(line_no, key, val)?,
            ("system", "d") => cfg.base.d = parse_usize(line_no, key, val)?,
            ("system", "s_taps") => cfg.base.s_taps = parse_usize(line_no, key, val)?,
            ("system", "g") => cfg.base.g = parse_f64(line_no, key, val)?,
            ("system", "snr_db") => cfg.base.snr_db = parse_f64(line_no, key, val)?,
            ("system", "f_m") => cfg.base.f_m = parse_f64(line_no, key, val)?,
            ("system", "f_s") => cfg.base.f_s = parse_f64(line_no, key, val)?,
            ("system", "c") => cfg.base.c_ratio = parse_f64(line_no, key, val)?,
            ("system", "grid") => {
                cfg.base.grid_mode = match val {
                    "on" => GridMode::OnGrid,
                    "off" => GridMode::OffGrid,
                    other => return Err(perr(line_no, format!("grid must be on|off, got '{other}'"))),
                }
            }
            ("manifest", "version") | ("manifest", "artifact") => {}
            ("", k) => return Err(perr(line_no, format!("key '{k}' outside any section"))),
            (s, k) => return Err(perr(line_no, format!("unknown key '{k}' in section [{s}]"))),
        }
    }

    match (sweep_name, sweep_values) {
        (None, None) => {}
        (Some((line, name)), values) => {
            let default_vals = cfg.sweep.values();
            let axis = match name.as_str() {
                "snr" => {
                    let v = match values {
                        Some((vl, text)) => parse_list_f64(vl, "values", &text)?,
                        None => default_vals,
                    };
                    SweepAxis::Snr(v)
                }
                "sparsity_blocks" => {
                    let (vl, text) = values
                        .ok_or_else(|| perr(line, "sparsity_blocks sweep requires 'values'"))?;
                    SweepAxis::SparsityBlocks(parse_list_usize(vl, "values", &text)?)
                }
                "compression_m" => {
                    let (vl, text) = values
                        .ok_or_else(|| perr(line, "compression_m sweep requires 'values'"))?;
                    SweepAxis::CompressionM(parse_list_usize(vl, "values", &text)?)
                }
                "amplitude_ratio_c" => {
                    let (vl, text) = values
                        .ok_or_else(|| perr(line, "amplitude_ratio_c sweep requires 'values'"))?;
                    SweepAxis::AmplitudeRatioC(parse_list_f64(vl, "values", &text)?)
                }
                other => return Err(perr(line, format!("unknown sweep axis '{other}'"))),
            };
            cfg.sweep = axis;
        }
        (None, Some((line, text))) => {
            // Values for the default (snr) axis.
            cfg.sweep = SweepAxis::Snr(parse_list_f64(line, "values", &text)?);
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

fn fmt_values(axis: &SweepAxis) -> String {
    match axis {
        SweepAxis::Snr(v) | SweepAxis::AmplitudeRatioC(v) => {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        SweepAxis::SparsityBlocks(v) | SweepAxis::CompressionM(v) => {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
    }
}

/// Canonical text form of a config.
pub fn dump_config(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    s.push_str("[experiment]\n");
    s.push_str(&format!("sweep = {}\n", cfg.sweep.name()));
    s.push_str(&format!("values = {}\n", fmt_values(&cfg.sweep)));
    s.push_str(&format!("trials = {}\n", cfg.trials));
    s.push_str(&format!("seed = {}\n", cfg.master_seed));
    s.push_str(&format!("theta = {}\n", cfg.theta));
    s.push_str(&format!("workers = {}\n", cfg.workers));
    s.push_str(&format!(
        "estimators = {}\n",
        cfg.estimators.iter().map(|e| e.name()).collect::<Vec<_>>().join(",")
    ));
    s.push_str(&format!(
        "d_mode = {}\n",
        match cfg.d_mode {
            DMode::Exact => "exact",
            DMode::Simplified => "simplified",
        }
    ));
    s.push_str(&format!(
        "k_rule = {}\n",
        match cfg.k_rule {
            KRule::PaperLiteral => "paper_literal",
            KRule::SparsityDecrement => "sparsity_decrement",
            KRule::Fixed => "fixed",
        }
    ));
    if let Some(out) = &cfg.out_dir {
        s.push_str(&format!("out = {}\n", out.display()));
    }
    s.push('\n');
    s.push_str("[system]\n");
    let b = &cfg.base;
    s.push_str(&format!("n = {}\n", b.n));
    s.push_str(&format!("n_sub = {}\n", b.n_sub));
    s.push_str(&format!("k = {}\n", b.k));
    s.push_str(&format!("m = {}\n", b.m));
    s.push_str(&format!("d = {}\n", b.d));
    s.push_str(&format!("s_taps = {}\n", b.s_taps));
    s.push_str(&format!("g = {}\n", b.g));
    s.push_str(&format!("snr_db = {}\n", b.snr_db));
    s.push_str(&format!("f_m = {}\n", b.f_m));
    s.push_str(&format!("f_s = {}\n", b.f_s));
    s.push_str(&format!("c = {}\n", b.c_ratio));
    s.push_str(&format!(
        "grid = {}\n",
        match b.grid_mode {
            GridMode::OnGrid => "on",
            GridMode::OffGrid => "off",
        }
    ));
    s
}

/// Writes the run manifest: the canonical config snapshot plus the artifact
/// version.
pub fn write_manifest(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    let mut text = dump_config(cfg);
    text.push('\n');
    text.push_str("[manifest]\n");
    text.push_str(&format!("version = {ARTIFACT_VERSION}\n"));
    std::fs::write(path, text)
        .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}
