//! Processing-time sweeps over image size, kernel size, stride, qubit count,
//! output channels and worker count, plus monotone-trend checks on the results.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quanv::{QuanvConfig, Quanvolver};
use crate::synth::uniform_noise;

/// Column order of the CSV output.
pub const CSV_COLUMNS: [&str; 10] = [
    "image_size",
    "kernel_size",
    "stride",
    "n_qubits",
    "out_channels",
    "workers",
    "median_s",
    "stddev_s",
    "circuit_evals",
    "repeats",
];

pub const DEFAULT_REPEATS: usize = 5;

/// One timed grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub image_size: usize,
    pub kernel_size: usize,
    pub stride: usize,
    pub n_qubits: usize,
    pub out_channels: usize,
    pub workers: usize,
    #[serde(rename = "median_s")]
    pub wall_time: f64,
    #[serde(rename = "stddev_s")]
    pub time_stddev: f64,
    pub circuit_evals: u64,
    pub repeats: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridPoint {
    pub image_size: usize,
    pub kernel_size: usize,
    pub stride: usize,
    pub n_qubits: usize,
    pub out_channels: usize,
    pub workers: usize,
}

impl GridPoint {
    pub fn config(&self, seed: u64) -> QuanvConfig {
        QuanvConfig::new(self.kernel_size)
            .with_stride(self.stride)
            .with_qubits(self.n_qubits)
            .with_out_channels(self.out_channels)
            .with_seed(seed)
    }

    fn validate(&self, seed: u64) -> Result<()> {
        let cfg = self.config(seed);
        cfg.validate()
            .map_err(|e| Error::InvalidGridPoint(format!("{self}: {e}")))?;
        cfg.output_dims(self.image_size, self.image_size)
            .map_err(|e| Error::InvalidGridPoint(format!("{self}: {e}")))?;
        if self.workers == 0 {
            return Err(Error::InvalidGridPoint(format!(
                "{self}: workers must be >= 1"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "size={} K={} S={} n={} F={} workers={}",
            self.image_size,
            self.kernel_size,
            self.stride,
            self.n_qubits,
            self.out_channels,
            self.workers
        )
    }
}

/// A cartesian block of the sweep; every axis is a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub image_size: Vec<usize>,
    pub kernel_size: Vec<usize>,
    pub stride: Vec<usize>,
    pub n_qubits: Vec<usize>,
    pub out_channels: Vec<usize>,
    #[serde(default = "one")]
    pub workers: Vec<usize>,
}

fn one() -> Vec<usize> {
    vec![1]
}

fn default_channels() -> usize {
    3
}

/// Sweep specification: the union of its blocks, deduplicated in first-seen order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default = "default_channels")]
    pub channels: usize,
    #[serde(default)]
    pub seed: u64,
    pub blocks: Vec<GridBlock>,
}

impl SweepGrid {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// The built-in grid: one block per swept axis around a small base point.
    pub fn default_grid() -> Self {
        let block =
            |size: &[usize], k: &[usize], s: &[usize], n: &[usize], f: &[usize], w: &[usize]| {
                GridBlock {
                    image_size: size.to_vec(),
                    kernel_size: k.to_vec(),
                    stride: s.to_vec(),
                    n_qubits: n.to_vec(),
                    out_channels: f.to_vec(),
                    workers: w.to_vec(),
                }
            };
        SweepGrid {
            channels: 3,
            seed: 7,
            blocks: vec![
                block(&[32], &[2], &[1, 2, 4], &[4], &[4], &[1]),
                block(&[8, 16, 32, 64], &[2], &[2], &[4], &[4], &[1]),
                block(&[32], &[1, 2, 3], &[1], &[9], &[1], &[1]),
                block(&[16], &[2], &[2], &[4, 8, 12, 16], &[4], &[1]),
                block(&[32], &[2], &[2], &[8], &[1, 2, 4, 8], &[1]),
                block(&[64], &[2], &[2], &[4], &[4], &[1, 2, 4]),
            ],
        }
    }

    /// Expands the blocks, validating each point. Invalid points are logged and dropped.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for b in &self.blocks {
            for &image_size in &b.image_size {
                for &kernel_size in &b.kernel_size {
                    for &stride in &b.stride {
                        for &n_qubits in &b.n_qubits {
                            for &out_channels in &b.out_channels {
                                for &workers in &b.workers {
                                    let p = GridPoint {
                                        image_size,
                                        kernel_size,
                                        stride,
                                        n_qubits,
                                        out_channels,
                                        workers,
                                    };
                                    if let Err(e) = p.validate(self.seed) {
                                        log::warn!("skipping grid point: {e}");
                                        continue;
                                    }
                                    if seen.insert(p) {
                                        out.push(p);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sample standard deviation; zero for fewer than two values.
pub fn stddev(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Times one point `repeats` times on a seeded uniform-noise image.
pub fn time_point(
    point: &GridPoint,
    channels: usize,
    seed: u64,
    repeats: usize,
) -> Result<BenchRecord> {
    let image = uniform_noise(point.image_size, point.image_size, channels, seed);
    let quanv = Quanvolver::new(point.config(seed))?;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        let map = quanv.quanvolve_parallel(&image, point.workers)?;
        times.push(start.elapsed().as_secs_f64().max(1e-9));
        std::hint::black_box(map);
    }
    let evals = quanv.circuit_evals() / repeats as u64;
    debug_assert_eq!(
        evals,
        quanv
            .config()
            .circuit_evals(point.image_size, point.image_size, channels)?
    );
    Ok(BenchRecord {
        image_size: point.image_size,
        kernel_size: point.kernel_size,
        stride: point.stride,
        n_qubits: point.n_qubits,
        out_channels: point.out_channels,
        workers: point.workers,
        wall_time: median(&times),
        time_stddev: stddev(&times),
        circuit_evals: evals,
        repeats,
    })
}

/// Runs every grid point in order, one point at a time.
pub fn run_sweep(grid: &SweepGrid, repeats: usize) -> Result<Vec<BenchRecord>> {
    if repeats < 3 {
        return Err(Error::InvalidArgument(format!(
            "repeats must be >= 3, got {repeats}"
        )));
    }
    let points = grid.points();
    let mut records = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        log::info!("[{}/{}] {p}", i + 1, points.len());
        records.push(time_point(p, grid.channels, grid.seed, repeats)?);
    }
    Ok(records)
}

pub fn write_csv(records: &[BenchRecord], path: &Path) -> Result<()> {
    let to_err = |e: csv::Error| Error::io(path, std::io::Error::other(e.to_string()));
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    for r in records {
        w.serialize(r).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    let headers = r
        .headers()
        .map_err(|e| Error::corrupt(path, e.to_string()))?
        .clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::corrupt(
            path,
            format!("unexpected header {headers:?}"),
        ));
    }
    r.deserialize()
        .collect::<std::result::Result<Vec<BenchRecord>, _>>()
        .map_err(|e| Error::corrupt(path, e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axis {
    Stride,
    ImageSize,
    KernelSize,
    NQubits,
}

impl Axis {
    pub const ALL: [Axis; 4] = [
        Axis::Stride,
        Axis::ImageSize,
        Axis::KernelSize,
        Axis::NQubits,
    ];

    fn value(self, r: &BenchRecord) -> usize {
        match self {
            Axis::Stride => r.stride,
            Axis::ImageSize => r.image_size,
            Axis::KernelSize => r.kernel_size,
            Axis::NQubits => r.n_qubits,
        }
    }

    /// Record key with this axis blanked out.
    fn rest(self, r: &BenchRecord) -> [usize; 6] {
        let mut key = [
            r.image_size,
            r.kernel_size,
            r.stride,
            r.n_qubits,
            r.out_channels,
            r.workers,
        ];
        let slot = match self {
            Axis::ImageSize => 0,
            Axis::KernelSize => 1,
            Axis::Stride => 2,
            Axis::NQubits => 3,
        };
        key[slot] = usize::MAX;
        key
    }

    /// Stride should make things faster; every other axis slower.
    pub fn expects_increase(self) -> bool {
        self != Axis::Stride
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Stride => "stride",
            Axis::ImageSize => "image_size",
            Axis::KernelSize => "kernel_size",
            Axis::NQubits => "n_qubits",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrendStatus {
    Pass {
        pairs_checked: usize,
    },
    /// The first pair, in axis order, whose times move the wrong way beyond the noise band.
    Fail {
        from: BenchRecord,
        to: BenchRecord,
        band: f64,
    },
    NotCovered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub axes: Vec<(Axis, TrendStatus)>,
}

impl TrendReport {
    pub fn passed(&self) -> bool {
        !self
            .axes
            .iter()
            .any(|(_, s)| matches!(s, TrendStatus::Fail { .. }))
    }

    pub fn status(&self, axis: Axis) -> &TrendStatus {
        &self
            .axes
            .iter()
            .find(|(a, _)| *a == axis)
            .expect("report covers every axis")
            .1
    }
}

impl fmt::Display for TrendReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (axis, status) in &self.axes {
            match status {
                TrendStatus::Pass { pairs_checked } => {
                    writeln!(f, "PASS {axis} ({pairs_checked} pairs)")?
                }
                TrendStatus::NotCovered => writeln!(f, "SKIP {axis} (not swept)")?,
                TrendStatus::Fail { from, to, band } => writeln!(
                    f,
                    "FAIL {axis}: {}={} took {:.6}s but {}={} took {:.6}s (band {:.6}s)",
                    axis,
                    axis.value(from),
                    from.wall_time,
                    axis,
                    axis.value(to),
                    to.wall_time,
                    band
                )?,
            }
        }
        Ok(())
    }
}

/// Checks timing monotonicity along each axis with all other axes fixed.
///
/// Consecutive pairs are compared against a noise band of twice the pooled
/// standard deviation `sqrt((s_a^2 + s_b^2) / 2)`.
pub fn check_trends(records: &[BenchRecord]) -> Result<TrendReport> {
    let mut axes = Vec::new();
    for axis in Axis::ALL {
        let mut groups: BTreeMap<[usize; 6], Vec<&BenchRecord>> = BTreeMap::new();
        for r in records {
            groups.entry(axis.rest(r)).or_default().push(r);
        }
        let mut pairs_checked = 0;
        let mut failure = None;
        for group in groups.values_mut().filter(|g| g.len() >= 2) {
            group.sort_by_key(|r| axis.value(r));
            if group
                .windows(2)
                .any(|w| axis.value(w[0]) == axis.value(w[1]))
            {
                return Err(Error::InsufficientData(format!(
                    "duplicate {axis} value {} among otherwise identical records",
                    axis.value(group[0])
                )));
            }
            for w in group.windows(2) {
                let (a, b) = (w[0], w[1]);
                pairs_checked += 1;
                let band = 2.0 * ((a.time_stddev.powi(2) + b.time_stddev.powi(2)) / 2.0).sqrt();
                let violated = if axis.expects_increase() {
                    b.wall_time < a.wall_time - band
                } else {
                    b.wall_time > a.wall_time + band
                };
                if violated && failure.is_none() {
                    failure = Some(TrendStatus::Fail {
                        from: a.clone(),
                        to: b.clone(),
                        band,
                    });
                }
            }
        }
        let status = match (failure, pairs_checked) {
            (Some(f), _) => f,
            (None, 0) => TrendStatus::NotCovered,
            (None, n) => TrendStatus::Pass { pairs_checked: n },
        };
        axes.push((axis, status));
    }
    if axes.iter().all(|(_, s)| *s == TrendStatus::NotCovered) {
        return Err(Error::InsufficientData(
            "no axis varies with the others held fixed".into(),
        ));
    }
    Ok(TrendReport { axes })
}

/// Median time at `workers = 1` divided by median time at `workers = n` for matching points.
pub fn speedups(records: &[BenchRecord]) -> Vec<(BenchRecord, f64)> {
    let key = |r: &BenchRecord| {
        (
            r.image_size,
            r.kernel_size,
            r.stride,
            r.n_qubits,
            r.out_channels,
        )
    };
    records
        .iter()
        .filter(|r| r.workers > 1)
        .filter_map(|r| {
            records
                .iter()
                .find(|b| b.workers == 1 && key(b) == key(r))
                .map(|base| (r.clone(), base.wall_time / r.wall_time))
        })
        .collect()
}

/// A gnuplot script plotting median time against each swept axis from `csv_name`.
pub fn gnuplot_script(csv_name: &str) -> String {
    let mut s = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset ylabel 'median time [s]'\nset terminal pngcairo size 900,600\n",
    );
    for (col, name) in [
        (1, "image_size"),
        (2, "kernel_size"),
        (3, "stride"),
        (4, "n_qubits"),
        (5, "out_channels"),
        (6, "workers"),
    ] {
        s.push_str(&format!(
            "set output 'time_vs_{name}.png'\nset xlabel '{name}'\nplot '{csv_name}' using {col}:7:8 with yerrorbars title 'median ± sd'\n"
        ));
    }
    s
}
