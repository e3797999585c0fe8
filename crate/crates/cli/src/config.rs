//! Configuration documents.
//!
//! A config is a JSON object mirroring [`CbxConfig`] plus the objective
//! selection and output paths. Only `objective` and `dimension` are required;
//! unknown keys are rejected. Parsing fills in every default, and
//! [`Resolved::echo`] writes the fully populated document back out so a run
//! can be reproduced from its own output.

use std::path::PathBuf;

use cbx::{
    make_objective, CbsMode, CbxConfig, CbxError, InitSpec, NamedObjective, NoiseModel, StallSpec,
    TerminationSpec, Variant,
};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub objective: String,
    pub dimension: usize,
    pub variant: Option<Variant>,
    pub n_particles: Option<usize>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub sigma: Option<f64>,
    pub dt: Option<f64>,
    pub noise: Option<NoiseModel>,
    pub batch_size: Option<usize>,
    /// A number, or `"inf"` for a constant kernel.
    #[serde(default, with = "number_or_inf")]
    pub kernel_width: Option<f64>,
    pub memory_drift: Option<f64>,
    pub memory_sigma: Option<f64>,
    pub cbs_mode: Option<CbsMode>,
    pub init: Option<InitSpec>,
    pub termination: Option<TerminationFile>,
    pub seed: Option<u64>,
    pub parallel: Option<bool>,
    pub output: Option<OutputSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminationFile {
    pub max_iterations: Option<u64>,
    pub max_evals: Option<u64>,
    pub diameter_tol: Option<f64>,
    pub consensus_stall: Option<StallSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// JSON Lines trace of a single run.
    pub trace: Option<PathBuf>,
    /// Benchmark report.
    pub report: Option<PathBuf>,
}

/// A validated configuration with defaults applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub config: CbxConfig,
    pub objective: NamedObjective,
    pub output: OutputSpec,
}

impl Resolved {
    /// The effective configuration as a fully populated document.
    pub fn echo(&self) -> ConfigFile {
        let c = &self.config;
        ConfigFile {
            objective: self.objective.name().to_owned(),
            dimension: c.dimension,
            variant: Some(c.variant),
            n_particles: Some(c.n_particles),
            alpha: Some(c.alpha),
            lambda: Some(c.lambda),
            sigma: Some(c.sigma),
            dt: Some(c.dt),
            noise: Some(c.noise),
            batch_size: c.batch_size,
            kernel_width: Some(c.kernel_width),
            memory_drift: Some(c.memory_drift),
            memory_sigma: Some(c.memory_sigma),
            cbs_mode: Some(c.cbs_mode),
            init: Some(c.init.clone()),
            termination: Some(TerminationFile {
                max_iterations: Some(c.termination.max_iterations),
                max_evals: c.termination.max_evals,
                diameter_tol: c.termination.diameter_tol,
                consensus_stall: c.termination.consensus_stall,
            }),
            seed: Some(c.seed),
            parallel: Some(c.parallel),
            output: Some(self.output.clone()),
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<Resolved, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        let line = (inner.line() > 0).then_some(inner.line());
        ConfigError {
            key,
            line,
            reason: strip_position(&inner.to_string()),
        }
    })?;
    resolve(file).map_err(|e| match e {
        CbxError::Config { key, reason } => {
            let line = line_of_key(text, &key);
            ConfigError { key, line, reason }
        }
        other => ConfigError {
            key: ".".into(),
            line: None,
            reason: other.to_string(),
        },
    })
}

fn resolve(file: ConfigFile) -> Result<Resolved, CbxError> {
    let objective = make_objective(&file.objective, file.dimension)?;
    let mut config = CbxConfig::new(file.dimension);
    if let Some(v) = file.variant {
        config.variant = v;
    }
    if let Some(n) = file.n_particles {
        config.n_particles = n;
    }
    if let Some(v) = file.alpha {
        config.alpha = v;
    }
    if let Some(v) = file.lambda {
        config.lambda = v;
    }
    if let Some(v) = file.sigma {
        config.sigma = v;
    }
    if let Some(v) = file.dt {
        config.dt = v;
    }
    if let Some(v) = file.noise {
        config.noise = v;
    }
    config.batch_size = file.batch_size;
    if let Some(v) = file.kernel_width {
        config.kernel_width = v;
    }
    config.memory_drift = file
        .memory_drift
        .unwrap_or(cbx::config::DEFAULT_MEMORY_DRIFT_RATIO * config.lambda);
    config.memory_sigma = file.memory_sigma.unwrap_or(config.sigma);
    if let Some(v) = file.cbs_mode {
        config.cbs_mode = v;
    }
    if let Some(init) = file.init {
        config.init = init;
    }
    if let Some(t) = file.termination {
        config.termination = TerminationSpec {
            max_iterations: t
                .max_iterations
                .unwrap_or(cbx::config::DEFAULT_MAX_ITERATIONS),
            max_evals: t.max_evals,
            diameter_tol: t.diameter_tol,
            consensus_stall: t.consensus_stall,
        };
    }
    if let Some(v) = file.seed {
        config.seed = v;
    }
    if let Some(v) = file.parallel {
        config.parallel = v;
    }
    config.validate()?;
    Ok(Resolved {
        config,
        objective,
        output: file.output.unwrap_or_default(),
    })
}

/// First line mentioning the last segment of a dotted key as a JSON key.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let leaf = key.rsplit('.').next().unwrap_or(key);
    let needle = format!("\"{leaf}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_owned(),
        None => msg.to_owned(),
    }
}

/// `Option<f64>` that also accepts and emits `"inf"` / `"-inf"`.
mod number_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_finite() => s.serialize_f64(*x),
            Some(x) if *x > 0.0 => s.serialize_str("inf"),
            Some(x) if *x < 0.0 => s.serialize_str("-inf"),
            Some(_) => s.serialize_str("nan"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Number(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) => match t.as_str() {
                "inf" | "infinity" | "+inf" => Ok(Some(f64::INFINITY)),
                "-inf" | "-infinity" => Ok(Some(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number or \"inf\", got \"{other}\""
                ))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let r = parse_config(r#"{"objective": "sphere", "dimension": 2}"#).unwrap();
        assert_eq!(r.config, CbxConfig::new(2));
        assert_eq!(r.objective.name(), "sphere");
        assert_eq!(r.config.memory_drift, 0.4 * r.config.lambda);
    }

    #[test]
    fn memory_defaults_follow_lambda_and_sigma() {
        let r =
            parse_config(r#"{"objective": "sphere", "dimension": 2, "lambda": 2.0, "sigma": 0.3}"#)
                .unwrap();
        assert_eq!(r.config.memory_drift, 0.8);
        assert_eq!(r.config.memory_sigma, 0.3);
    }

    #[test]
    fn batch_size_violation_names_key_and_line() {
        let text = "{\n  \"objective\": \"sphere\",\n  \"dimension\": 2,\n  \"n_particles\": 10,\n  \"batch_size\": 11\n}";
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.key, "batch_size");
        assert_eq!(e.line, Some(5));
        assert!(e.to_string().contains("batch_size"));
    }

    #[test]
    fn unknown_key_is_named() {
        let text = "{\n  \"objective\": \"sphere\",\n  \"dimension\": 2,\n  \"sigmaa\": 1.0\n}";
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.key, "sigmaa");
        assert_eq!(e.line, Some(4));
    }

    #[test]
    fn nested_unknown_key_is_named() {
        let text = r#"{"objective": "sphere", "dimension": 2, "termination": {"max_iter": 5}}"#;
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.key, "termination.max_iter");
    }

    #[test]
    fn type_mismatch_is_named() {
        let text = "{\n  \"objective\": \"sphere\",\n  \"dimension\": 2,\n  \"alpha\": \"big\"\n}";
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.key, "alpha");
        assert_eq!(e.line, Some(4));
    }

    #[test]
    fn unknown_objective() {
        let e = parse_config(r#"{"objective": "bogus", "dimension": 2}"#).unwrap_err();
        assert_eq!(e.key, "objective");
        assert_eq!(e.line, Some(1));
    }

    #[test]
    fn infinite_kernel_width_round_trips() {
        let r = parse_config(
            r#"{"objective": "ackley", "dimension": 3, "variant": "polarized_cbo", "kernel_width": "inf"}"#,
        )
        .unwrap();
        assert_eq!(r.config.kernel_width, f64::INFINITY);
        let echoed = serde_json::to_string(&r.echo()).unwrap();
        assert_eq!(parse_config(&echoed).unwrap(), r);
    }

    #[test]
    fn echo_round_trip() {
        let text = r#"{
            "objective": "rastrigin", "dimension": 3, "variant": "memory_cbo",
            "n_particles": 40, "alpha": 30.5, "sigma": 0.81, "noise": "anisotropic",
            "batch_size": 7,
            "init": {"kind": "gaussian", "mean": [1.0, 2.0, 3.0], "stddev": 0.5},
            "termination": {"max_iterations": 12, "consensus_stall": {"window": 3, "tol": 1e-9}},
            "seed": 99, "output": {"trace": "t.jsonl"}
        }"#;
        let r = parse_config(text).unwrap();
        let echoed = serde_json::to_string_pretty(&r.echo()).unwrap();
        let again = parse_config(&echoed).unwrap();
        assert_eq!(again, r);
        assert_eq!(again.echo(), r.echo());
    }

    #[test]
    fn init_with_unknown_field_is_rejected() {
        let text = r#"{"objective": "sphere", "dimension": 1, "init": {"kind": "gaussian", "mean": [0.0], "stddev": 1.0, "lower": [0.0]}}"#;
        assert!(parse_config(text).is_err());
    }

    #[test]
    fn dimension_mismatch_in_init() {
        let text = r#"{"objective": "sphere", "dimension": 2, "init": {"kind": "uniform_box", "lower": [0.0], "upper": [1.0]}}"#;
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.key, "init.lower");
    }
}
