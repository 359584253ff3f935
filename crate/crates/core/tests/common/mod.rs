#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rdh_core::GrayImage;

pub fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random()).collect()
}

/// Smooth waves with a noisy left part and a calmer right part.
pub fn texture(rng: &mut ChaCha8Rng, width: usize, height: usize) -> GrayImage {
    let noise = [0i32, 1, 2, 3, 5, 8][rng.random_range(0..6)];
    let base = rng.random_range(60..190) as f64;
    let fx: f64 = rng.random_range(0.0..0.3);
    let fy: f64 = rng.random_range(0.0..0.3);
    let split = rng.random_range(0..width);
    GrayImage::from_fn(width, height, |r, c| {
        let v = base + 25.0 * (r as f64 * fx).sin() + 25.0 * (c as f64 * fy).cos();
        let n = if c < split { noise } else { noise / 3 };
        (v as i32 + rng.random_range(-n..=n)).clamp(0, 255) as u8
    })
    .unwrap()
}

/// Mid-gray ramps with clipped highlight and shadow patches.
pub fn saturating(rng: &mut ChaCha8Rng, width: usize, height: usize) -> GrayImage {
    let slope: i32 = rng.random_range(1..4);
    let base = rng.random_range(70..120);
    let noise = rng.random_range(0..3);
    let patches: Vec<(i32, i32, i32, bool)> = (0..rng.random_range(2..5))
        .map(|_| {
            let r = rng.random_range(0..height as i32);
            let c = rng.random_range(0..width as i32);
            (r, c, rng.random_range(4..12), rng.random())
        })
        .collect();
    GrayImage::from_fn(width, height, |r, c| {
        let (r, c) = (r as i32, c as i32);
        let mut v = base + (r + c) * slope / 4 + c % 3;
        for &(pr, pc, radius, bright) in &patches {
            let d = (r - pr).abs().max((c - pc).abs());
            if d < radius {
                v += if bright { 250 - 8 * d } else { -250 + 8 * d };
            }
        }
        (v + rng.random_range(-noise..=noise)).clamp(0, 255) as u8
    })
    .unwrap()
}
