//! Seeded synthetic images for benchmarks and tests.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::ImageTensor;

/// Independent uniform `[0, 1)` pixels.
pub fn uniform_noise(height: usize, width: usize, channels: usize, seed: u64) -> ImageTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..height * width * channels)
        .map(|_| rng.random::<f64>())
        .collect();
    ImageTensor::new(height, width, channels, data).expect("uniform samples lie in [0, 1)")
}

/// A smooth, natural-looking texture: a few random plane waves per channel plus
/// a little pixel noise, min-max scaled into `[0, 1]` per channel.
pub fn texture(height: usize, width: usize, channels: usize, seed: u64) -> ImageTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0; height * width * channels];
    for c in 0..channels {
        let waves: Vec<(f64, f64, f64, f64)> = (0..4)
            .map(|_| {
                let theta = rng.random::<f64>() * TAU;
                let freq = 0.05 + rng.random::<f64>() * 0.35;
                let phase = rng.random::<f64>() * TAU;
                let amp = 0.5 + rng.random::<f64>();
                (freq * theta.cos(), freq * theta.sin(), phase, amp)
            })
            .collect();
        let mut channel = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                let v: f64 = waves
                    .iter()
                    .map(|(fx, fy, ph, a)| a * (fx * x as f64 + fy * y as f64 + ph).sin())
                    .sum();
                channel.push(v + 0.15 * (rng.random::<f64>() - 0.5));
            }
        }
        let lo = channel.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = channel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (i, v) in channel.into_iter().enumerate() {
            data[i * channels + c] = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
        }
    }
    ImageTensor::new(height, width, channels, data).expect("texture is scaled into [0, 1]")
}
