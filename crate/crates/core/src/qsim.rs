//! Dense statevector simulator over the gate set {Rx, Ry, Rz, CNOT}.
//!
//! Conventions: qubit 0 is the least-significant bit of the basis index, and
//! rotations use the half-angle form `R_a(theta) = exp(-i theta a / 2)`.
//! Expectations are exact; there is no shot sampling.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuits::CircuitSpec;
use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 16;

/// A single gate of the supported set.
///
/// Serialized as `{"kind": "Rx", "target": 0, "angle": 0.5}` or
/// `{"kind": "CNOT", "control": 0, "target": 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Gate {
    Rx {
        target: usize,
        angle: f64,
    },
    Ry {
        target: usize,
        angle: f64,
    },
    Rz {
        target: usize,
        angle: f64,
    },
    #[serde(rename = "CNOT")]
    Cnot {
        control: usize,
        target: usize,
    },
}

impl Gate {
    pub fn target(&self) -> usize {
        match *self {
            Gate::Rx { target, .. } | Gate::Ry { target, .. } | Gate::Rz { target, .. } => target,
            Gate::Cnot { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cnot { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx { angle, .. } | Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            Gate::Cnot { .. } => None,
        }
    }

    pub fn is_rotation(&self) -> bool {
        !matches!(self, Gate::Cnot { .. })
    }

    /// Does the gate act on qubit `q` (as target or control)?
    pub fn touches(&self, q: usize) -> bool {
        self.target() == q || self.control() == Some(q)
    }

    /// Same gate with its rotation angle increased by `delta`. CNOT is returned unchanged.
    pub fn shifted(self, delta: f64) -> Gate {
        match self {
            Gate::Rx { target, angle } => Gate::Rx {
                target,
                angle: angle + delta,
            },
            Gate::Ry { target, angle } => Gate::Ry {
                target,
                angle: angle + delta,
            },
            Gate::Rz { target, angle } => Gate::Rz {
                target,
                angle: angle + delta,
            },
            cnot => cnot,
        }
    }

    /// Checks index validity against a register of `n_qubits`.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let target = self.target();
        if target >= n_qubits {
            return Err(Error::IndexOutOfRange {
                index: target,
                len: n_qubits,
            });
        }
        if let Some(control) = self.control() {
            if control >= n_qubits {
                return Err(Error::IndexOutOfRange {
                    index: control,
                    len: n_qubits,
                });
            }
            if control == target {
                return Err(Error::InvalidArgument(format!(
                    "CNOT control and target are both qubit {control}"
                )));
            }
        }
        if let Some(angle) = self.angle() {
            if !angle.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite rotation angle {angle}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Rx { target, angle } => write!(f, "RX  q{target:<2}        {angle:+.6}"),
            Gate::Ry { target, angle } => write!(f, "RY  q{target:<2}        {angle:+.6}"),
            Gate::Rz { target, angle } => write!(f, "RZ  q{target:<2}        {angle:+.6}"),
            Gate::Cnot { control, target } => write!(f, "CNOT q{control:<2} -> q{target:<2}"),
        }
    }
}

/// Pauli-Z on one qubit; the only observable the quanvolution readout needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliZ(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::QubitCountOutOfRange(n_qubits));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two and the norm 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not 2^n, n >= 1"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::QubitCountOutOfRange(n_qubits));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "state norm^2 {norm} is not 1"
            )));
        }
        Ok(Statevector { n_qubits, amps })
    }

    /// Resets to `|0...0>` without reallocating.
    pub fn reset(&mut self) {
        self.amps.fill(Complex64::new(0.0, 0.0));
        self.amps[0] = Complex64::new(1.0, 0.0);
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    /// Applies a gate that has already been validated for this register size.
    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        match *gate {
            Gate::Rx { target, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                let m = Complex64::new(0.0, -s);
                let c = Complex64::new(c, 0.0);
                apply_single(&mut self.amps, target, [[c, m], [m, c]]);
            }
            Gate::Ry { target, angle } => apply_ry(&mut self.amps, target, angle),
            Gate::Rz { target, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                let stride = 1 << target;
                for chunk in self.amps.chunks_exact_mut(2 * stride) {
                    let (a, b) = chunk.split_at_mut(stride);
                    a.iter_mut().for_each(|x| *x *= lo);
                    b.iter_mut().for_each(|x| *x *= hi);
                }
            }
            Gate::Cnot { control, target } => {
                let cmask = 1usize << control;
                let tmask = 1usize << target;
                for i in 0..self.amps.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amps.swap(i, i | tmask);
                    }
                }
            }
        }
    }

    /// Runs a gate sequence in order.
    pub fn run(&mut self, gates: &[Gate]) -> Result<()> {
        for gate in gates {
            self.apply(gate)?;
        }
        Ok(())
    }

    /// Exact `<psi| Z_q |psi>`, clamped to `[-1, 1]` against rounding drift.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::IndexOutOfRange {
                index: qubit,
                len: self.n_qubits,
            });
        }
        Ok(self.expectation_z_unchecked(qubit))
    }

    pub(crate) fn expectation_z_unchecked(&self, qubit: usize) -> f64 {
        let stride = 1 << qubit;
        let mut acc = 0.0;
        for chunk in self.amps.chunks_exact(2 * stride) {
            let (zero, one) = chunk.split_at(stride);
            acc += zero.iter().map(|a| a.norm_sqr()).sum::<f64>();
            acc -= one.iter().map(|a| a.norm_sqr()).sum::<f64>();
        }
        acc.clamp(-1.0, 1.0)
    }

    pub fn expectation(&self, obs: PauliZ) -> Result<f64> {
        self.expectation_z(obs.0)
    }
}

fn apply_single(amps: &mut [Complex64], target: usize, m: [[Complex64; 2]; 2]) {
    let stride = 1 << target;
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        }
    }
}

// Ry is real, so it avoids full complex products.
fn apply_ry(amps: &mut [Complex64], target: usize, angle: f64) {
    let (s, c) = (angle / 2.0).sin_cos();
    let stride = 1 << target;
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x * c - y * s;
            *b = x * s + y * c;
        }
    }
}

/// Applies `spec` to `init` and returns the final state.
pub fn run_circuit(spec: &CircuitSpec, mut init: Statevector) -> Result<Statevector> {
    if spec.n_qubits() != init.n_qubits {
        return Err(Error::QubitMismatch {
            expected: spec.n_qubits(),
            got: init.n_qubits,
        });
    }
    // CircuitSpec validates its gates at construction.
    for gate in spec.gates() {
        init.apply_unchecked(gate);
    }
    Ok(init)
}
