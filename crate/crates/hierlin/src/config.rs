//! Plain-text experiment configuration files.
//!
//! The format is a small INI-style document with four sections. Unknown
//! keys are rejected so typos surface immediately; parse errors carry line
//! numbers and validation errors name the violated invariant.
//!
//! ```text
//! [design]
//! n = 200
//! p = 12
//! family = gaussian_ar1     # or uniform01
//! rho = 0.5                 # gaussian_ar1 only
//! seed = 0
//!
//! [truth]
//! p = 12
//! beta0 = 0
//! beta = 2, 0, 2, 0, 2, 0, 2, 0, 2, 0, 0, 0
//! gamma = 1 3 1.5, 1 7 1.7, 5 7 1.9, 7 9 2.1
//! sigma = 2
//! centered = true
//!
//! [method]
//! name = iform              # two_stage_fs | iform | two_stage_lasso |
//!                           # iform_lasso | oracle
//!
//! [criterion]
//! kind = ebic               # bic | ebic
//! gamma_e = 0.5
//!
//! [run]
//! replicates = 100
//! base_seed = 42
//! test_size = 200
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::criteria::{Criterion, DEFAULT_EBIC_GAMMA};
use crate::data::{DesignConfig, DesignFamily};
use crate::evaluation::{ExperimentConfig, Method};
use crate::model::QuadraticModelSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for {field}: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        message: message.into(),
    }
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

/// Raw key/value table: `(section, key) -> (line, value)`.
struct RawConfig {
    entries: BTreeMap<(String, String), (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line_no, "unterminated section header"))?;
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(parse_err(
                    line_no,
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            if section.is_empty() {
                return Err(parse_err(line_no, "key outside of any [section]"));
            }
            let key = key.trim().to_string();
            if entries
                .insert(
                    (section.clone(), key.clone()),
                    (line_no, value.trim().to_string()),
                )
                .is_some()
            {
                return Err(parse_err(
                    line_no,
                    format!("duplicate key `{section}.{key}`"),
                ));
            }
        }
        Ok(RawConfig { entries })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }

    fn require(&mut self, section: &str, key: &str) -> Result<(usize, String), ConfigError> {
        self.take(section, key)
            .ok_or_else(|| invalid(&format!("{section}.{key}"), "missing required key"))
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some(((section, key), (line, _))) = self.entries.into_iter().next() {
            return Err(parse_err(line, format!("unknown key `{section}.{key}`")));
        }
        Ok(())
    }
}

fn parse_scalar<T: std::str::FromStr>(
    (line, value): (usize, String),
    what: &str,
) -> Result<T, ConfigError> {
    value
        .parse::<T>()
        .map_err(|_| parse_err(line, format!("cannot parse `{value}` as {what}")))
}

/// Parses an experiment configuration from text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = RawConfig::parse(text)?;

    // [design]
    let n: usize = parse_scalar(raw.require("design", "n")?, "an integer")?;
    let p: usize = parse_scalar(raw.require("design", "p")?, "an integer")?;
    let family_entry = raw.require("design", "family")?;
    let rho_entry = raw.take("design", "rho");
    let family = match family_entry.1.as_str() {
        "gaussian_ar1" => {
            let rho: f64 = parse_scalar(
                rho_entry.ok_or_else(|| invalid("design.rho", "required for gaussian_ar1"))?,
                "a real number",
            )?;
            if !(rho.abs() < 1.0) {
                return Err(invalid(
                    "design.rho",
                    format!("|rho| < 1 required, got {rho}"),
                ));
            }
            DesignFamily::GaussianAr1 { rho }
        }
        "uniform01" => {
            if rho_entry.is_some() {
                return Err(invalid("design.rho", "only meaningful for gaussian_ar1"));
            }
            DesignFamily::Uniform01
        }
        other => {
            return Err(parse_err(
                family_entry.0,
                format!("unknown family `{other}` (expected gaussian_ar1 or uniform01)"),
            ))
        }
    };
    let seed: u64 = match raw.take("design", "seed") {
        Some(e) => parse_scalar(e, "an integer")?,
        None => 0,
    };
    let design = DesignConfig { n, p, family, seed };
    if n < 2 {
        return Err(invalid("design.n", "n >= 2 required"));
    }
    if p < 1 {
        return Err(invalid("design.p", "p >= 1 required"));
    }

    // [truth]
    let truth_p: usize = parse_scalar(raw.require("truth", "p")?, "an integer")?;
    if truth_p != p {
        return Err(invalid(
            "truth.p",
            format!("truth.p = {truth_p} must equal design.p = {p}"),
        ));
    }
    let beta0: f64 = parse_scalar(raw.require("truth", "beta0")?, "a real number")?;
    let (beta_line, beta_text) = raw.require("truth", "beta")?;
    let beta: Vec<f64> = beta_text
        .split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| {
                parse_err(beta_line, format!("cannot parse beta entry `{}`", t.trim()))
            })
        })
        .collect::<Result<_, _>>()?;
    if beta.len() != p {
        return Err(invalid(
            "truth.beta",
            format!("expected a dense list of {p} values, got {}", beta.len()),
        ));
    }
    let sigma: f64 = parse_scalar(raw.require("truth", "sigma")?, "a real number")?;
    if !(sigma > 0.0) {
        return Err(invalid(
            "truth.sigma",
            format!("sigma > 0 required, got {sigma}"),
        ));
    }
    let centered = match raw.take("truth", "centered") {
        Some(e) => parse_scalar::<bool>(e, "a boolean")?,
        None => false,
    };
    let mut truth = QuadraticModelSpec::new(p, beta0, beta, sigma, centered);
    if let Some((gamma_line, gamma_text)) = raw.take("truth", "gamma") {
        for triple in gamma_text.split(',') {
            let triple = triple.trim();
            if triple.is_empty() {
                continue;
            }
            let parts: Vec<&str> = triple.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(parse_err(
                    gamma_line,
                    format!("gamma entries are `j k value` triples, got `{triple}`"),
                ));
            }
            let j: usize = parts[0]
                .parse()
                .map_err(|_| parse_err(gamma_line, format!("bad index `{}`", parts[0])))?;
            let k: usize = parts[1]
                .parse()
                .map_err(|_| parse_err(gamma_line, format!("bad index `{}`", parts[1])))?;
            let v: f64 = parts[2]
                .parse()
                .map_err(|_| parse_err(gamma_line, format!("bad value `{}`", parts[2])))?;
            if j < 1 || j > p || k < 1 || k > p {
                return Err(invalid(
                    "truth.gamma",
                    format!("indices ({j},{k}) outside 1..={p}"),
                ));
            }
            // j > k is accepted and normalized to canonical order.
            truth.set_gamma(j, k, v);
        }
    }

    // [method]
    let (method_line, method_name) = raw.require("method", "name")?;
    let method = Method::parse(&method_name).ok_or_else(|| {
        parse_err(
            method_line,
            format!(
                "unknown method `{method_name}` (expected one of {})",
                Method::ALL.map(|m| m.name()).join(", ")
            ),
        )
    })?;

    // [criterion]
    let (kind_line, kind) = raw.require("criterion", "kind")?;
    let gamma_e_entry = raw.take("criterion", "gamma_e");
    let criterion = match kind.as_str() {
        "bic" => {
            if gamma_e_entry.is_some() {
                return Err(invalid("criterion.gamma_e", "only meaningful for ebic"));
            }
            Criterion::Bic
        }
        "ebic" => {
            let gamma_e = match gamma_e_entry {
                Some(e) => parse_scalar(e, "a real number")?,
                None => DEFAULT_EBIC_GAMMA,
            };
            if !(0.0..=1.0).contains(&gamma_e) {
                return Err(invalid(
                    "criterion.gamma_e",
                    format!("gamma_e in [0, 1] required, got {gamma_e}"),
                ));
            }
            Criterion::Ebic { gamma_e }
        }
        other => return Err(parse_err(kind_line, format!("unknown criterion `{other}`"))),
    };

    // [run]
    let replicates: usize = parse_scalar(raw.require("run", "replicates")?, "an integer")?;
    if replicates < 1 {
        return Err(invalid("run.replicates", "replicates >= 1 required"));
    }
    let base_seed: u64 = parse_scalar(raw.require("run", "base_seed")?, "an integer")?;
    let test_size: usize = match raw.take("run", "test_size") {
        Some(e) => parse_scalar(e, "an integer")?,
        None => n,
    };
    if test_size < 2 {
        return Err(invalid("run.test_size", "test_size >= 2 required"));
    }

    raw.finish()?;

    let cfg = ExperimentConfig {
        design,
        truth,
        method,
        criterion,
        replicates,
        base_seed,
        test_size,
    };
    cfg.validate()
        .map_err(|e| invalid("config", e.to_string()))?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Renders a configuration in the same format [`parse_config`] reads;
/// floats are written with shortest-round-trip precision, so
/// `parse_config(serialize_config(cfg))` reproduces `cfg` exactly.
pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    out.push_str("[design]\n");
    out.push_str(&format!("n = {}\n", cfg.design.n));
    out.push_str(&format!("p = {}\n", cfg.design.p));
    match cfg.design.family {
        DesignFamily::GaussianAr1 { rho } => {
            out.push_str("family = gaussian_ar1\n");
            out.push_str(&format!("rho = {rho}\n"));
        }
        DesignFamily::Uniform01 => out.push_str("family = uniform01\n"),
    }
    out.push_str(&format!("seed = {}\n\n", cfg.design.seed));

    out.push_str("[truth]\n");
    out.push_str(&format!("p = {}\n", cfg.truth.p));
    out.push_str(&format!("beta0 = {}\n", cfg.truth.beta0));
    let beta: Vec<String> = cfg.truth.beta.iter().map(|b| b.to_string()).collect();
    out.push_str(&format!("beta = {}\n", beta.join(", ")));
    if !cfg.truth.gamma.is_empty() {
        let gamma: Vec<String> = cfg
            .truth
            .gamma
            .iter()
            .map(|(&(j, k), &v)| format!("{j} {k} {v}"))
            .collect();
        out.push_str(&format!("gamma = {}\n", gamma.join(", ")));
    }
    out.push_str(&format!("sigma = {}\n", cfg.truth.sigma));
    out.push_str(&format!("centered = {}\n\n", cfg.truth.centered));

    out.push_str("[method]\n");
    out.push_str(&format!("name = {}\n\n", cfg.method.name()));

    out.push_str("[criterion]\n");
    match cfg.criterion {
        Criterion::Bic => out.push_str("kind = bic\n\n"),
        Criterion::Ebic { gamma_e } => {
            out.push_str("kind = ebic\n");
            out.push_str(&format!("gamma_e = {gamma_e}\n\n"));
        }
    }

    out.push_str("[run]\n");
    out.push_str(&format!("replicates = {}\n", cfg.replicates));
    out.push_str(&format!("base_seed = {}\n", cfg.base_seed));
    out.push_str(&format!("test_size = {}\n", cfg.test_size));
    out
}

/// The built-in configuration behind `hierlin table1`: `n = 200`,
/// `p = 1000`, AR(1) correlation 0.5, the benchmark truth with
/// `sigma = 2`, and EBIC tuning.
pub fn table1_config(method: Method, replicates: usize, base_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        design: DesignConfig {
            n: 200,
            p: 1000,
            family: DesignFamily::GaussianAr1 { rho: 0.5 },
            seed: 0,
        },
        truth: crate::data::table1_spec(),
        method,
        // gamma_e = 1: with a thousand candidate mains, the fully
        // consistent weight is what keeps spurious effects out at n = 200.
        criterion: Criterion::Ebic { gamma_e: 1.0 },
        replicates,
        base_seed,
        test_size: 200,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn table1_preset_matches_the_benchmark_design() {
        let cfg = table1_config(Method::Iform, 100, 42);
        assert_eq!(cfg.design.n, 200);
        assert_eq!(cfg.design.p, 1000);
        assert_eq!(cfg.truth.sigma, 2.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn preset_round_trips_through_text() {
        let cfg = table1_config(Method::TwoStageFs, 100, 42);
        let text = serialize_config(&cfg);
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn random_configs_round_trip() {
        let mut rng = rng_from_seed(8);
        for _ in 0..25 {
            let p = rng.random_range(2..12_usize);
            let n = rng.random_range(10..200_usize);
            let family = if rng.random::<bool>() {
                DesignFamily::GaussianAr1 {
                    rho: rng.random::<f64>() * 1.8 - 0.9,
                }
            } else {
                DesignFamily::Uniform01
            };
            let beta: Vec<f64> = (0..p)
                .map(|_| (rng.random::<f64>() * 4.0 - 2.0) * 0.5)
                .collect();
            let mut truth = QuadraticModelSpec::new(
                p,
                rng.random::<f64>(),
                beta,
                rng.random::<f64>() + 0.1,
                rng.random::<bool>(),
            );
            for _ in 0..rng.random_range(0..4_usize) {
                let j = rng.random_range(1..=p);
                let k = rng.random_range(1..=p);
                truth.set_gamma(j, k, rng.random::<f64>() * 2.0 - 1.0);
            }
            let method = Method::ALL[rng.random_range(0..Method::ALL.len())];
            let criterion = if rng.random::<bool>() {
                Criterion::Bic
            } else {
                Criterion::Ebic {
                    gamma_e: rng.random::<f64>(),
                }
            };
            let cfg = ExperimentConfig {
                design: DesignConfig {
                    n,
                    p,
                    family,
                    seed: rng.random(),
                },
                truth,
                method,
                criterion,
                replicates: rng.random_range(1..50),
                base_seed: rng.random(),
                test_size: rng.random_range(2..100),
            };
            let text = serialize_config(&cfg);
            let parsed = parse_config(&text).unwrap_or_else(|e| panic!("{e}\n---\n{text}"));
            assert_eq!(parsed, cfg, "round trip changed the config:\n{text}");
        }
    }

    #[test]
    fn out_of_range_rho_names_the_invariant() {
        let cfg = table1_config(Method::Iform, 10, 1);
        let text = serialize_config(&cfg).replace("rho = 0.5", "rho = 1.5");
        match parse_config(&text) {
            Err(ConfigError::Validation { field, message }) => {
                assert_eq!(field, "design.rho");
                assert!(message.contains("|rho| < 1"), "message: {message}");
            }
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn gamma_triples_are_canonicalized() {
        let cfg = table1_config(Method::Iform, 10, 1);
        // Swap an index pair: 1 3 1.5 -> 3 1 1.5.
        let text = serialize_config(&cfg).replace("gamma = 1 3 1.5", "gamma = 3 1 1.5");
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed.truth.gamma_at(1, 3), 1.5);
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line_number() {
        let cfg = table1_config(Method::Iform, 10, 1);
        let mut text = serialize_config(&cfg);
        text.push_str("\n[design]\nwarp_factor = 9\n");
        match parse_config(&text) {
            Err(ConfigError::Parse { line, message }) => {
                assert!(message.contains("warp_factor"));
                assert!(line > 0);
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn beta_length_must_match_p() {
        let text = "\
[design]
n = 20
p = 3
family = uniform01
seed = 1

[truth]
p = 3
beta0 = 0
beta = 1, 2
sigma = 1

[method]
name = oracle

[criterion]
kind = bic

[run]
replicates = 2
base_seed = 7
";
        match parse_config(text) {
            Err(ConfigError::Validation { field, .. }) => assert_eq!(field, "truth.beta"),
            other => panic!("expected a validation error, got {other:?}"),
        }
    }
}
