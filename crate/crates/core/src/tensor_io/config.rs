use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::ExportFormat;
use crate::error::{Error, Result};
use crate::quanv::{CircuitKind, QuanvConfig};

pub const CONFIG_SCHEMA: &str = "quanvkit-config/1";

/// A validated pipeline description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub layers: Vec<QuanvConfig>,
    pub normalize: bool,
    pub workers: usize,
    pub format: ExportFormat,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfigDoc {
    schema: String,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    layers: Vec<LayerDoc>,
    #[serde(default)]
    normalize: bool,
    workers: Option<usize>,
    #[serde(default)]
    format: ExportFormat,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    kernel_size: usize,
    stride: Option<usize>,
    n_qubits: Option<usize>,
    out_channels: Option<usize>,
    circuit_kind: Option<CircuitKind>,
    seed: Option<u64>,
    n_rotations: Option<usize>,
    n_entanglers: Option<usize>,
    ansatz_width: Option<usize>,
}

impl LayerDoc {
    fn into_config(self) -> QuanvConfig {
        let k = self.kernel_size;
        let n = self.n_qubits.unwrap_or(k * k);
        QuanvConfig {
            kernel_size: k,
            stride: self.stride.unwrap_or(1),
            n_qubits: n,
            out_channels: self.out_channels.unwrap_or(k * k),
            circuit_kind: self.circuit_kind.unwrap_or_default(),
            seed: self.seed.unwrap_or(0),
            n_rotations: self.n_rotations.unwrap_or(2 * n),
            n_entanglers: self.n_entanglers.unwrap_or(n),
            ansatz_width: self.ansatz_width,
        }
    }
}

/// Parses and validates a `quanvkit-config/1` document.
///
/// Layer defaults: `stride = 1`, `n_qubits = K²`, `out_channels = K²`,
/// `circuit_kind = RandomLayer`, `seed = 0`, `n_rotations = 2n`, `n_entanglers = n`.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: RunConfigDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    if doc.schema != CONFIG_SCHEMA {
        return Err(Error::Schema {
            path: "schema".into(),
            message: format!("expected \"{CONFIG_SCHEMA}\", found \"{}\"", doc.schema),
        });
    }
    if doc.layers.is_empty() {
        return Err(Error::InvariantViolation {
            path: "layers".into(),
            message: "at least one layer is required".into(),
        });
    }
    let workers = doc.workers.unwrap_or(1);
    if workers < 1 {
        return Err(Error::InvariantViolation {
            path: "workers".into(),
            message: "workers must be >= 1".into(),
        });
    }
    let layers: Vec<QuanvConfig> = doc.layers.into_iter().map(LayerDoc::into_config).collect();
    for (i, layer) in layers.iter().enumerate() {
        layer.validate().map_err(|e| match e {
            Error::InvariantViolation { path, message } => Error::InvariantViolation {
                path: format!("layers[{i}].{path}"),
                message,
            },
            other => other,
        })?;
    }
    Ok(RunConfig {
        input: doc.input,
        output: doc.output,
        layers,
        normalize: doc.normalize,
        workers,
        format: doc.format,
    })
}

pub fn load_run_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_run_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg =
            parse_run_config(r#"{"schema": "quanvkit-config/1", "layers": [{"kernel_size": 2}]}"#)
                .unwrap();
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.format, ExportFormat::Npy);
        assert!(!cfg.normalize);
        assert_eq!(cfg.layers, vec![QuanvConfig::new(2)]);
        let l = &cfg.layers[0];
        assert_eq!(
            (l.stride, l.out_channels, l.circuit_kind),
            (1, 4, CircuitKind::RandomLayer)
        );
    }

    #[test]
    fn too_few_qubits_is_an_invariant_violation() {
        let err = parse_run_config(
            r#"{"schema": "quanvkit-config/1", "layers": [{"kernel_size": 2}, {"kernel_size": 3, "n_qubits": 4}]}"#,
        )
        .unwrap_err();
        match err {
            Error::InvariantViolation { path, message } => {
                assert_eq!(path, "layers[1].n_qubits");
                assert!(message.contains("n_qubits < kernel_size²"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_field_paths() {
        let err = parse_run_config(
            r#"{"schema": "quanvkit-config/1", "layers": [{"kernel_size": "two"}]}"#,
        )
        .unwrap_err();
        assert!(
            matches!(&err, Error::Schema { path, .. } if path == "layers[0].kernel_size"),
            "{err}"
        );
        let err = parse_run_config(
            r#"{"schema": "quanvkit-config/1", "layers": [{"kernel_size": 2, "strid": 1}]}"#,
        )
        .unwrap_err();
        assert!(
            matches!(&err, Error::Schema { path, .. } if path.starts_with("layers[0]")),
            "{err}"
        );
        let err = parse_run_config(r#"{"schema": "other/2", "layers": [{"kernel_size": 2}]}"#)
            .unwrap_err();
        assert!(matches!(&err, Error::Schema { path, .. } if path == "schema"));
        let err = parse_run_config(
            r#"{"schema": "quanvkit-config/1", "layers": [{"kernel_size": 2, "out_channels": 9}]}"#,
        )
        .unwrap_err();
        assert!(
            matches!(&err, Error::InvariantViolation { path, .. } if path == "layers[0].out_channels")
        );
        let err = parse_run_config(r#"{"schema": "quanvkit-config/1", "layers": []}"#).unwrap_err();
        assert!(matches!(&err, Error::InvariantViolation { path, .. } if path == "layers"));
    }
}
