//! Circuit families used by the quanvolution kernel: the angle encoder, the
//! seeded random layer and the ring-entangled variant.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Gate, MAX_QUBITS};

/// An immutable, validated gate list on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitDoc", into = "CircuitDoc")]
pub struct CircuitSpec {
    n_qubits: usize,
    gates: Vec<Gate>,
    param_indices: Vec<usize>,
    seeds: Vec<u64>,
}

/// JSON form: `{n_qubits, seed, gates: [{kind, target, control, angle}]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    n_qubits: usize,
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    seeds: Vec<u64>,
    gates: Vec<Gate>,
}

impl TryFrom<CircuitDoc> for CircuitSpec {
    type Error = Error;

    fn try_from(doc: CircuitDoc) -> Result<Self> {
        let mut seeds = doc.seeds;
        if seeds.is_empty() {
            seeds.extend(doc.seed);
        }
        CircuitSpec::with_seeds(doc.n_qubits, doc.gates, seeds)
    }
}

impl From<CircuitSpec> for CircuitDoc {
    fn from(spec: CircuitSpec) -> Self {
        CircuitDoc {
            n_qubits: spec.n_qubits,
            seed: spec.seeds.first().copied(),
            seeds: if spec.seeds.len() > 1 {
                spec.seeds
            } else {
                Vec::new()
            },
            gates: spec.gates,
        }
    }
}

impl CircuitSpec {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        Self::with_seeds(n_qubits, gates, Vec::new())
    }

    fn with_seeds(n_qubits: usize, gates: Vec<Gate>, seeds: Vec<u64>) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::QubitCountOutOfRange(n_qubits));
        }
        for gate in &gates {
            gate.validate(n_qubits)?;
        }
        let param_indices = gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_rotation())
            .map(|(i, _)| i)
            .collect();
        Ok(CircuitSpec {
            n_qubits,
            gates,
            param_indices,
            seeds,
        })
    }

    pub fn empty(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gate-list positions of the rotation gates, i.e. the trainable angles.
    pub fn param_indices(&self) -> &[usize] {
        &self.param_indices
    }

    pub fn n_params(&self) -> usize {
        self.param_indices.len()
    }

    /// Seeds of every generated circuit this spec was composed from.
    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn touches(&self, qubit: usize) -> bool {
        self.gates.iter().any(|g| g.touches(qubit))
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &CircuitSpec) -> Result<CircuitSpec> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        let offset = self.gates.len();
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&other.gates);
        let mut param_indices = self.param_indices.clone();
        param_indices.extend(other.param_indices.iter().map(|i| i + offset));
        let mut seeds = self.seeds.clone();
        seeds.extend_from_slice(&other.seeds);
        Ok(CircuitSpec {
            n_qubits: self.n_qubits,
            gates,
            param_indices,
            seeds,
        })
    }

    /// Copy with rotation parameter `param_idx` shifted by `delta` radians.
    pub fn shift_parameter(&self, param_idx: usize, delta: f64) -> Result<CircuitSpec> {
        let &gate_idx = self
            .param_indices
            .get(param_idx)
            .ok_or(Error::ParamIndexOutOfRange {
                index: param_idx,
                count: self.n_params(),
            })?;
        if !delta.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite shift {delta}")));
        }
        let mut out = self.clone();
        out.gates[gate_idx] = out.gates[gate_idx].shifted(delta);
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<CircuitSpec> {
        serde_json::from_str(text).map_err(|e| Error::Schema {
            path: "circuit".into(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ScanOrder {
    #[default]
    RasterRowMajor,
}

/// A flattened `K x K` image patch with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchVector {
    values: Vec<f64>,
    kernel_size: usize,
    scan_order: ScanOrder,
}

impl PatchVector {
    pub fn new(values: Vec<f64>, kernel_size: usize) -> Result<Self> {
        if kernel_size == 0 || values.len() != kernel_size * kernel_size {
            return Err(Error::ShapeMismatch(format!(
                "patch of {} values for kernel size {kernel_size}",
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::ValueOutOfRange {
                value: bad,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(PatchVector {
            values,
            kernel_size,
            scan_order: ScanOrder::RasterRowMajor,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel_size
    }

    pub fn scan_order(&self) -> ScanOrder {
        self.scan_order
    }
}

/// Encoding angle for a pixel value.
#[inline]
pub fn encoding_angle(x: f64) -> f64 {
    PI * x.clamp(0.0, 1.0)
}

/// `Ry(pi * x_j)` on qubit `j` for each patch value; qubits past `K^2` are left as ancillas.
pub fn encode_patch(patch: &PatchVector, n_qubits: usize) -> Result<CircuitSpec> {
    let needed = patch.values.len();
    if n_qubits < needed {
        return Err(Error::TooFewQubits {
            needed,
            got: n_qubits,
        });
    }
    let gates = patch
        .values
        .iter()
        .enumerate()
        .map(|(j, &x)| Gate::Ry {
            target: j,
            angle: encoding_angle(x),
        })
        .collect();
    CircuitSpec::new(n_qubits, gates)
}

/// Seeded random layer over all qubits. See [`random_layer_within`].
pub fn random_layer(
    seed: u64,
    n_qubits: usize,
    n_rotations: usize,
    n_entanglers: usize,
) -> Result<CircuitSpec> {
    random_layer_within(seed, n_qubits, n_qubits, n_rotations, n_entanglers)
}

/// Seeded random layer whose gates only touch qubits `0..width`.
///
/// Draws come from one ChaCha8 stream seeded with `seed`. Each step first picks
/// the gate class, a rotation with probability `r / (r + e)` for `r` rotations
/// and `e` entanglers still to place, so both counts are exact and the classes
/// interleave in draw order. A rotation draws its axis uniformly from
/// {X, Y, Z}, its target uniformly from `0..width` and its angle uniformly from
/// `[0, 2pi)`. An entangler draws an ordered (control, target) pair not used
/// before in this layer; once all `width * (width - 1)` pairs are used, pairs may
/// repeat. With `width < 2` no CNOT can be placed and entanglers are dropped.
pub fn random_layer_within(
    seed: u64,
    n_qubits: usize,
    width: usize,
    n_rotations: usize,
    n_entanglers: usize,
) -> Result<CircuitSpec> {
    if width == 0 || width > n_qubits {
        return Err(Error::InvalidArgument(format!(
            "ansatz width {width} must lie in 1..={n_qubits}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_entanglers = if width < 2 { 0 } else { n_entanglers };
    let n_pairs = width * (width - 1);
    let mut used = vec![false; width * width];
    let mut used_count = 0;
    let (mut rot_left, mut ent_left) = (n_rotations, n_entanglers);
    let mut gates = Vec::with_capacity(n_rotations + n_entanglers);

    while rot_left + ent_left > 0 {
        if rng.random_range(0..rot_left + ent_left) < rot_left {
            rot_left -= 1;
            let axis = rng.random_range(0..3u8);
            let target = rng.random_range(0..width);
            let mut angle = rng.random::<f64>() * TAU;
            if angle >= TAU {
                angle = 0.0;
            }
            gates.push(match axis {
                0 => Gate::Rx { target, angle },
                1 => Gate::Ry { target, angle },
                _ => Gate::Rz { target, angle },
            });
        } else {
            ent_left -= 1;
            let (control, target) = loop {
                let control = rng.random_range(0..width);
                let mut target = rng.random_range(0..width - 1);
                if target >= control {
                    target += 1;
                }
                let slot = control * width + target;
                if !used[slot] || used_count == n_pairs {
                    if !used[slot] {
                        used[slot] = true;
                        used_count += 1;
                    }
                    break (control, target);
                }
            };
            gates.push(Gate::Cnot { control, target });
        }
    }
    CircuitSpec::with_seeds(n_qubits, gates, vec![seed])
}

/// Ring of CNOTs `CNOT(q, q+1 mod n)` for every qubit, then a rotation-only random layer.
pub fn entangled_circuit(seed: u64, n_qubits: usize, n_rotations: usize) -> Result<CircuitSpec> {
    if n_qubits < 2 {
        return Err(Error::TooFewQubits {
            needed: 2,
            got: n_qubits,
        });
    }
    let ring: Vec<Gate> = (0..n_qubits)
        .map(|q| Gate::Cnot {
            control: q,
            target: (q + 1) % n_qubits,
        })
        .collect();
    let ring = CircuitSpec::new(n_qubits, ring)?;
    ring.concat(&random_layer(seed, n_qubits, n_rotations, 0)?)
}
