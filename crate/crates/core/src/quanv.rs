//! The quanvolution operator: every `K x K` patch of every input channel is
//! angle-encoded, pushed through a frozen ansatz, and read out as Pauli-Z
//! expectations on the first `F` qubits.

use std::f64::consts::FRAC_PI_2;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::circuits::{
    encode_patch, encoding_angle, entangled_circuit, random_layer_within, CircuitSpec, PatchVector,
};
use crate::error::{Error, Result};
use crate::qsim::{Gate, Statevector, MAX_QUBITS};
use crate::tensor::{FeatureMap, ImageTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitKind {
    #[default]
    RandomLayer,
    Entangled,
}

/// Geometry and ansatz of one quanvolutional layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuanvConfig {
    pub kernel_size: usize,
    pub stride: usize,
    pub n_qubits: usize,
    /// Output channels produced per input channel (`F`).
    pub out_channels: usize,
    pub circuit_kind: CircuitKind,
    pub seed: u64,
    pub n_rotations: usize,
    pub n_entanglers: usize,
    /// Restricts a `RandomLayer` ansatz to qubits `0..width`. `None` means all qubits.
    pub ansatz_width: Option<usize>,
}

impl QuanvConfig {
    /// Defaults: stride 1, `n = K^2`, `F = K^2`, random layer with `2n`
    /// rotations and `n` entanglers, seed 0.
    pub fn new(kernel_size: usize) -> Self {
        let n = kernel_size * kernel_size;
        QuanvConfig {
            kernel_size,
            stride: 1,
            n_qubits: n,
            out_channels: n,
            circuit_kind: CircuitKind::RandomLayer,
            seed: 0,
            n_rotations: 2 * n,
            n_entanglers: n,
            ansatz_width: None,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    /// Sets the qubit count and resets the ansatz shape to its defaults for `n`.
    pub fn with_qubits(mut self, n_qubits: usize) -> Self {
        self.n_qubits = n_qubits;
        self.n_rotations = 2 * n_qubits;
        self.n_entanglers = n_qubits;
        self
    }

    pub fn with_out_channels(mut self, f: usize) -> Self {
        self.out_channels = f;
        self
    }

    pub fn with_kind(mut self, kind: CircuitKind) -> Self {
        self.circuit_kind = kind;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ansatz_shape(mut self, n_rotations: usize, n_entanglers: usize) -> Self {
        self.n_rotations = n_rotations;
        self.n_entanglers = n_entanglers;
        self
    }

    pub fn with_ansatz_width(mut self, width: usize) -> Self {
        self.ansatz_width = Some(width);
        self
    }

    /// Checks the layer invariants. Errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let fail = |path: &str, message: String| {
            Err(Error::InvariantViolation {
                path: path.to_string(),
                message,
            })
        };
        if self.kernel_size < 1 {
            return fail("kernel_size", "kernel_size must be >= 1".into());
        }
        if self.stride < 1 {
            return fail("stride", "stride must be >= 1".into());
        }
        if !(1..=MAX_QUBITS).contains(&self.n_qubits) {
            return fail(
                "n_qubits",
                format!("n_qubits {} outside [1, {MAX_QUBITS}]", self.n_qubits),
            );
        }
        let k2 = self.kernel_size * self.kernel_size;
        if self.n_qubits < k2 {
            return fail(
                "n_qubits",
                format!("n_qubits < kernel_size² ({} < {k2})", self.n_qubits),
            );
        }
        if self.out_channels < 1 || self.out_channels > self.n_qubits {
            return fail(
                "out_channels",
                format!(
                    "out_channels must lie in 1..=n_qubits ({} vs {})",
                    self.out_channels, self.n_qubits
                ),
            );
        }
        if self.circuit_kind == CircuitKind::Entangled && self.n_qubits < 2 {
            return fail(
                "circuit_kind",
                "Entangled circuits need at least 2 qubits".into(),
            );
        }
        if let Some(w) = self.ansatz_width {
            if w < 1 || w > self.n_qubits {
                return fail(
                    "ansatz_width",
                    format!("ansatz_width {w} outside 1..={}", self.n_qubits),
                );
            }
        }
        Ok(())
    }

    /// The frozen ansatz this configuration describes.
    pub fn build_ansatz(&self) -> Result<CircuitSpec> {
        self.validate()?;
        match self.circuit_kind {
            CircuitKind::RandomLayer => random_layer_within(
                self.seed,
                self.n_qubits,
                self.ansatz_width.unwrap_or(self.n_qubits),
                self.n_rotations,
                self.n_entanglers,
            ),
            CircuitKind::Entangled => entangled_circuit(self.seed, self.n_qubits, self.n_rotations),
        }
    }

    /// `(H', W')` for an `H x W` input under valid padding.
    pub fn output_dims(&self, height: usize, width: usize) -> Result<(usize, usize)> {
        let k = self.kernel_size;
        if height < k || width < k {
            return Err(Error::ImageSmallerThanKernel {
                height,
                width,
                kernel: k,
            });
        }
        Ok((
            (height - k) / self.stride + 1,
            (width - k) / self.stride + 1,
        ))
    }

    /// Number of kernel evaluations needed for an `H x W x C` input.
    pub fn circuit_evals(&self, height: usize, width: usize, channels: usize) -> Result<u64> {
        let (h, w) = self.output_dims(height, width)?;
        Ok((h * w * channels) as u64)
    }
}

/// A quanvolutional layer with its ansatz built once and frozen.
///
/// Keeps a running count of kernel evaluations.
#[derive(Debug)]
pub struct Quanvolver {
    config: QuanvConfig,
    ansatz: CircuitSpec,
    evals: AtomicU64,
}

impl Quanvolver {
    pub fn new(config: QuanvConfig) -> Result<Self> {
        let ansatz = config.build_ansatz()?;
        Ok(Quanvolver {
            config,
            ansatz,
            evals: AtomicU64::new(0),
        })
    }

    /// Uses a caller-supplied ansatz instead of generating one from the config.
    pub fn with_ansatz(config: QuanvConfig, ansatz: CircuitSpec) -> Result<Self> {
        config.validate()?;
        if ansatz.n_qubits() != config.n_qubits {
            return Err(Error::QubitMismatch {
                expected: config.n_qubits,
                got: ansatz.n_qubits(),
            });
        }
        Ok(Quanvolver {
            config,
            ansatz,
            evals: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &QuanvConfig {
        &self.config
    }

    pub fn ansatz(&self) -> &CircuitSpec {
        &self.ansatz
    }

    /// Kernel evaluations performed so far.
    pub fn circuit_evals(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    /// Full circuit for one patch: encoder followed by the ansatz.
    pub fn patch_circuit(&self, patch: &PatchVector) -> Result<CircuitSpec> {
        encode_patch(patch, self.config.n_qubits)?.concat(&self.ansatz)
    }

    /// Z-expectations on qubits `0..F` for one patch.
    pub fn kernel_eval(&self, patch: &PatchVector) -> Result<Vec<f64>> {
        self.check_patch(patch)?;
        let mut state = Statevector::zero(self.config.n_qubits)?;
        let mut out = vec![0.0; self.config.out_channels];
        self.eval_into(&self.ansatz, patch.values(), &mut state, &mut out);
        Ok(out)
    }

    fn check_patch(&self, patch: &PatchVector) -> Result<()> {
        if patch.kernel_size() != self.config.kernel_size {
            return Err(Error::ShapeMismatch(format!(
                "patch kernel size {} but layer uses {}",
                patch.kernel_size(),
                self.config.kernel_size
            )));
        }
        Ok(())
    }

    // Encoding gates are swapped per patch; the ansatz stays fixed.
    fn eval_into(
        &self,
        ansatz: &CircuitSpec,
        pixels: &[f64],
        state: &mut Statevector,
        out: &mut [f64],
    ) {
        state.reset();
        for (q, &x) in pixels.iter().enumerate() {
            state.apply_unchecked(&Gate::Ry {
                target: q,
                angle: encoding_angle(x),
            });
        }
        for gate in ansatz.gates() {
            state.apply_unchecked(gate);
        }
        for (q, slot) in out.iter_mut().enumerate() {
            *slot = state.expectation_z_unchecked(q);
        }
        self.evals.fetch_add(1, Ordering::Relaxed);
    }

    /// Serial quanvolution with valid padding. Channel `c` of the input feeds
    /// output channels `c*F .. c*F + F`.
    pub fn quanvolve(&self, image: &ImageTensor) -> Result<FeatureMap> {
        self.quanvolve_parallel(image, 1)
    }

    /// Quanvolution with output rows split over `workers` threads.
    ///
    /// Each output value is computed by exactly the same operation sequence as
    /// in the serial path, so results are bit-identical for any worker count.
    pub fn quanvolve_parallel(&self, image: &ImageTensor, workers: usize) -> Result<FeatureMap> {
        if workers == 0 {
            return Err(Error::InvalidArgument("workers must be >= 1".into()));
        }
        let (out_h, out_w) = self.config.output_dims(image.height(), image.width())?;
        let f = self.config.out_channels;
        let out_c = image.channels() * f;
        let row_len = out_w * out_c;
        let mut data = vec![0.0; out_h * row_len];

        let workers = workers.min(out_h);
        if workers == 1 {
            self.fill_rows(image, 0, &mut data, out_w)?;
        } else {
            let rows_per_worker = out_h.div_ceil(workers);
            std::thread::scope(|scope| -> Result<()> {
                let handles: Vec<_> = data
                    .chunks_mut(rows_per_worker * row_len)
                    .enumerate()
                    .map(|(i, chunk)| {
                        scope
                            .spawn(move || self.fill_rows(image, i * rows_per_worker, chunk, out_w))
                    })
                    .collect();
                for h in handles {
                    h.join().expect("quanvolution worker panicked")?;
                }
                Ok(())
            })?;
        }
        FeatureMap::new(out_h, out_w, out_c, data)
    }

    /// Fills output rows starting at `first_row`; `out` holds whole rows.
    fn fill_rows(
        &self,
        image: &ImageTensor,
        first_row: usize,
        out: &mut [f64],
        out_w: usize,
    ) -> Result<()> {
        let k = self.config.kernel_size;
        let s = self.config.stride;
        let f = self.config.out_channels;
        let channels = image.channels();
        let row_len = out_w * channels * f;
        let mut state = Statevector::zero(self.config.n_qubits)?;
        let mut pixels = vec![0.0; k * k];

        for (r, row) in out.chunks_mut(row_len).enumerate() {
            let top = (first_row + r) * s;
            for col in 0..out_w {
                let left = col * s;
                for c in 0..channels {
                    for i in 0..k {
                        for j in 0..k {
                            pixels[i * k + j] = image.get(top + i, left + j, c);
                        }
                    }
                    let base = (col * channels + c) * f;
                    self.eval_into(&self.ansatz, &pixels, &mut state, &mut row[base..base + f]);
                }
            }
        }
        Ok(())
    }

    /// Parameter-shift derivative of output channel `out_channel` with respect
    /// to ansatz rotation `param_idx`: `(f(theta + pi/2) - f(theta - pi/2)) / 2`.
    pub fn parameter_shift_gradient(
        &self,
        patch: &PatchVector,
        param_idx: usize,
        out_channel: usize,
    ) -> Result<f64> {
        self.check_patch(patch)?;
        if out_channel >= self.config.out_channels {
            return Err(Error::IndexOutOfRange {
                index: out_channel,
                len: self.config.out_channels,
            });
        }
        let plus = self.ansatz.shift_parameter(param_idx, FRAC_PI_2)?;
        let minus = self.ansatz.shift_parameter(param_idx, -FRAC_PI_2)?;
        let f_plus = self.eval_with(&plus, patch)?[out_channel];
        let f_minus = self.eval_with(&minus, patch)?[out_channel];
        Ok(0.5 * (f_plus - f_minus))
    }

    /// Kernel evaluation under a substitute ansatz on the same register.
    pub fn eval_with(&self, ansatz: &CircuitSpec, patch: &PatchVector) -> Result<Vec<f64>> {
        self.check_patch(patch)?;
        if ansatz.n_qubits() != self.config.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.config.n_qubits,
                got: ansatz.n_qubits(),
            });
        }
        let mut state = Statevector::zero(self.config.n_qubits)?;
        let mut out = vec![0.0; self.config.out_channels];
        self.eval_into(ansatz, patch.values(), &mut state, &mut out);
        Ok(out)
    }
}

pub fn kernel_eval(patch: &PatchVector, config: &QuanvConfig) -> Result<Vec<f64>> {
    Quanvolver::new(config.clone())?.kernel_eval(patch)
}

pub fn quanvolve(image: &ImageTensor, config: &QuanvConfig) -> Result<FeatureMap> {
    Quanvolver::new(config.clone())?.quanvolve(image)
}

pub fn quanvolve_parallel(
    image: &ImageTensor,
    config: &QuanvConfig,
    workers: usize,
) -> Result<FeatureMap> {
    Quanvolver::new(config.clone())?.quanvolve_parallel(image, workers)
}

pub fn parameter_shift_gradient(
    patch: &PatchVector,
    config: &QuanvConfig,
    param_idx: usize,
    out_channel: usize,
) -> Result<f64> {
    Quanvolver::new(config.clone())?.parameter_shift_gradient(patch, param_idx, out_channel)
}

/// Sequential quanvolutional layers. Between layers the `[-1, 1]` expectations
/// are mapped to `[0, 1]` by `v -> (v + 1) / 2` so the next encoder accepts them.
#[derive(Debug)]
pub struct LayerStack {
    layers: Vec<Quanvolver>,
}

impl LayerStack {
    pub fn new(configs: &[QuanvConfig]) -> Result<Self> {
        if configs.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one layer is required".into(),
            ));
        }
        let layers = configs
            .iter()
            .cloned()
            .map(Quanvolver::new)
            .collect::<Result<_>>()?;
        Ok(LayerStack { layers })
    }

    pub fn layers(&self) -> &[Quanvolver] {
        &self.layers
    }

    pub fn run(&self, image: &ImageTensor, workers: usize) -> Result<FeatureMap> {
        let mut map = self.layers[0].quanvolve_parallel(image, workers)?;
        for (i, layer) in self.layers.iter().enumerate().skip(1) {
            let k = layer.config().kernel_size;
            if map.height() < k || map.width() < k {
                return Err(Error::LayerShapeUnderflow {
                    layer: i,
                    height: map.height(),
                    width: map.width(),
                    kernel: k,
                });
            }
            map = layer.quanvolve_parallel(&map.rescaled_to_unit(), workers)?;
        }
        Ok(map)
    }

    /// Evaluations across all layers.
    pub fn circuit_evals(&self) -> u64 {
        self.layers.iter().map(Quanvolver::circuit_evals).sum()
    }

    /// Output shape for an `H x W x C` input, checking every layer fits.
    pub fn output_shape(&self, height: usize, width: usize, channels: usize) -> Result<[usize; 3]> {
        let (mut h, mut w, mut c) = (height, width, channels);
        for (i, layer) in self.layers.iter().enumerate() {
            let cfg = layer.config();
            if i > 0 && (h < cfg.kernel_size || w < cfg.kernel_size) {
                return Err(Error::LayerShapeUnderflow {
                    layer: i,
                    height: h,
                    width: w,
                    kernel: cfg.kernel_size,
                });
            }
            (h, w) = cfg.output_dims(h, w)?;
            c *= cfg.out_channels;
        }
        Ok([h, w, c])
    }
}

pub fn stack_layers(
    image: &ImageTensor,
    configs: &[QuanvConfig],
    workers: usize,
) -> Result<FeatureMap> {
    LayerStack::new(configs)?.run(image, workers)
}
