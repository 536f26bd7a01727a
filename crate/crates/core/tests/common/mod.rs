//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use quanvkit::qsim::Gate;
use rand::Rng;

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
                .collect()
        })
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..inner).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

/// Single-qubit matrix for a rotation, written out from the textbook definitions.
pub fn rotation_matrix(gate: &Gate) -> Matrix {
    match *gate {
        Gate::Rx { angle, .. } => {
            let (s, co) = (angle / 2.0).sin_cos();
            vec![vec![c(co, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(co, 0.0)]]
        }
        Gate::Ry { angle, .. } => {
            let (s, co) = (angle / 2.0).sin_cos();
            vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
        }
        Gate::Rz { angle, .. } => vec![
            vec![Complex64::from_polar(1.0, -angle / 2.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), Complex64::from_polar(1.0, angle / 2.0)],
        ],
        Gate::Cnot { .. } => panic!("not a single-qubit gate"),
    }
}

/// Tensor product over qubits `n-1 .. 0` (qubit 0 is the least significant
/// bit of the basis index), with `ops[q]` on qubit `q` and identity elsewhere.
fn embed(n: usize, ops: &[(usize, Matrix)]) -> Matrix {
    let mut out = vec![vec![c(1.0, 0.0)]];
    for q in (0..n).rev() {
        let factor = ops
            .iter()
            .find(|(t, _)| *t == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| identity(2));
        out = kron(&out, &factor);
    }
    out
}

/// Full `2^n x 2^n` unitary of one gate.
pub fn gate_unitary(gate: &Gate, n: usize) -> Matrix {
    match *gate {
        Gate::Cnot { control, target } => {
            let p0 = vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0)],
            ];
            let p1 = vec![
                vec![c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0)],
            ];
            let x = vec![
                vec![c(0.0, 0.0), c(1.0, 0.0)],
                vec![c(1.0, 0.0), c(0.0, 0.0)],
            ];
            add(
                &embed(n, &[(control, p0)]),
                &embed(n, &[(control, p1), (target, x)]),
            )
        }
        _ => embed(n, &[(gate.target(), rotation_matrix(gate))]),
    }
}

pub fn circuit_unitary(gates: &[Gate], n: usize) -> Matrix {
    gates
        .iter()
        .fold(identity(1 << n), |acc, g| matmul(&gate_unitary(g, n), &acc))
}

/// `U |0...0>`.
pub fn oracle_state(gates: &[Gate], n: usize) -> Vec<Complex64> {
    circuit_unitary(gates, n)
        .into_iter()
        .map(|row| row[0])
        .collect()
}

/// `<Z_q>` of a dense state.
pub fn oracle_z(state: &[Complex64], q: usize) -> f64 {
    state
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if i >> q & 1 == 0 {
                a.norm_sqr()
            } else {
                -a.norm_sqr()
            }
        })
        .sum()
}

pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> Gate {
    let target = rng.random_range(0..n);
    let angle = rng.random_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI);
    match rng.random_range(0..4) {
        0 => Gate::Rx { target, angle },
        1 => Gate::Ry { target, angle },
        2 => Gate::Rz { target, angle },
        _ => {
            let mut control = rng.random_range(0..n);
            while control == target {
                control = rng.random_range(0..n);
            }
            Gate::Cnot { control, target }
        }
    }
}

/// Valid-padding cross-correlation written as the plain nested loop, output
/// channel `ch * F + o` for input channel `ch` and kernel `o`.
pub fn naive_conv(
    img: &quanvkit::Tensor3,
    weights: &[f64],
    k: usize,
    s: usize,
    f: usize,
) -> Vec<f64> {
    let (h, w, ch) = (img.height(), img.width(), img.channels());
    let (oh, ow) = ((h - k) / s + 1, (w - k) / s + 1);
    let mut out = Vec::new();
    for m in 0..oh {
        for n in 0..ow {
            for c in 0..ch {
                for o in 0..f {
                    let mut acc = 0.0;
                    for i in 0..k {
                        for j in 0..k {
                            acc +=
                                weights[o * k * k + i * k + j] * img.get(m * s + i, n * s + j, c);
                        }
                    }
                    out.push(acc);
                }
            }
        }
    }
    out
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Returns
/// eigenvalues (descending) and the matching eigenvectors as columns.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].powi(2))
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i].powi(2)).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = cs * akp - sn * akq;
                    row[q] = sn * akp + cs * akq;
                }
                let (rp, rq) = (a[p].clone(), a[q].clone());
                for k in 0..n {
                    a[p][k] = cs * rp[k] - sn * rq[k];
                    a[q][k] = sn * rp[k] + cs * rq[k];
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = cs * vp - sn * vq;
                    row[q] = sn * vp + cs * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| v.iter().map(|row| row[i]).collect())
        .collect();
    (values, vectors)
}

/// Ward clustering by brute force: repeatedly merge the pair with the smallest
/// increase in within-cluster sum of squares. Returns the final clusters as
/// sorted member lists.
pub fn naive_ward(points: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    let centroid = |c: &[usize]| -> Vec<f64> {
        let d = points[0].len();
        (0..d)
            .map(|j| c.iter().map(|&i| points[i][j]).sum::<f64>() / c.len() as f64)
            .collect()
    };
    while clusters.len() > k {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (ca, cb) = (centroid(&clusters[a]), centroid(&clusters[b]));
                let (na, nb) = (clusters[a].len() as f64, clusters[b].len() as f64);
                let d2: f64 = ca.iter().zip(&cb).map(|(x, y)| (x - y).powi(2)).sum();
                let cost = na * nb / (na + nb) * d2;
                if cost < best.0 {
                    best = (cost, a, b);
                }
            }
        }
        let merged = clusters.remove(best.2);
        clusters[best.1].extend(merged);
        clusters[best.1].sort_unstable();
    }
    clusters.sort();
    clusters
}

/// Writes an 8-bit RGB (or gray when `channels == 1`) PNG of an image in [0, 1].
pub fn write_png(path: &std::path::Path, img: &quanvkit::ImageTensor) {
    let [h, w, c] = img.shape();
    let color = if c == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    };
    let file = std::fs::File::create(path).unwrap();
    let mut enc = png::Encoder::new(std::io::BufWriter::new(file), w as u32, h as u32);
    enc.set_color(color);
    enc.set_depth(png::BitDepth::Eight);
    let bytes: Vec<u8> = img
        .data()
        .iter()
        .map(|v| (v * 255.0).round() as u8)
        .collect();
    enc.write_header()
        .unwrap()
        .write_image_data(&bytes)
        .unwrap();
}

pub fn repo_path(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}
