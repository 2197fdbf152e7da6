//! Deterministic token feature provider.
//!
//! Features are a pure function of (token text, position, seed), so
//! training-loop and gradient tests run without any pretrained encoder
//! and reproduce bit-identically across runs and platforms.

use crate::model::Mat;

fn fnv1a(text: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in text.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100000001b3);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// n x width feature matrix with entries in (-1, 1), seeded per
/// (lower-cased token, position).
pub fn deterministic_features(tokens: &[String], width: usize, seed: u64) -> Mat {
    let mut out = Mat::zeros(tokens.len(), width);
    for (pos, token) in tokens.iter().enumerate() {
        let mut state = splitmix(seed ^ fnv1a(&token.to_lowercase()) ^ (pos as u64) << 17) | 1;
        for c in 0..width {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let unit = (state >> 11) as f64 / (1u64 << 53) as f64;
            *out.at_mut(pos, c) = unit * 2.0 - 1.0;
        }
    }
    out
}
