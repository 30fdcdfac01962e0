//! Seeded simulators for the deletion, BSC, deletion-substitution,
//! deletion-AWGN and Gallager insertion channels.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`). An [`RngState`] is the pair
//! `(seed, stream)`: the generator is seeded with `seed_from_u64(seed)` and
//! then positioned on `stream` via `set_stream`, so distinct streams of one
//! seed never overlap. Gaussian draws use the ziggurat `StandardNormal` of
//! `rand_distr`.

pub mod stats;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{check_probability, Error, Result};

/// Deterministic generator state for one stream of one seed.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngState { seed, stream, rng }
    }

    /// A fresh generator on another stream of the same seed.
    pub fn split(&self, stream: u64) -> RngState {
        Self::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Real-valued channel observations on the unit-energy BPSK scale.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for RealVector {
    fn from(v: Vec<f64>) -> Self {
        RealVector(v)
    }
}

fn check_bits(bits: &[u8]) -> Result<()> {
    match bits.iter().find(|&&b| b > 1) {
        Some(b) => Err(Error::domain(format!(
            "input contains non-binary symbol {b}"
        ))),
        None => Ok(()),
    }
}

/// Removes each bit independently with probability `p_d`.
pub fn simulate_deletion(bits: &[u8], p_d: f64, rng: &mut RngState) -> Result<Vec<u8>> {
    check_probability("p_d", p_d)?;
    check_bits(bits)?;
    Ok(bits
        .iter()
        .copied()
        .filter(|_| !rng.random_bool(p_d))
        .collect())
}

/// Flips each bit independently with probability `p_e`.
pub fn simulate_bsc(bits: &[u8], p_e: f64, rng: &mut RngState) -> Result<Vec<u8>> {
    check_probability("p_e", p_e)?;
    check_bits(bits)?;
    Ok(bits
        .iter()
        .map(|&b| b ^ rng.random_bool(p_e) as u8)
        .collect())
}

/// Deletion followed by a BSC.
pub fn simulate_deletion_substitution(
    bits: &[u8],
    p_d: f64,
    p_e: f64,
    rng: &mut RngState,
) -> Result<Vec<u8>> {
    check_probability("p_e", p_e)?;
    let survivors = simulate_deletion(bits, p_d, rng)?;
    simulate_bsc(&survivors, p_e, rng)
}

/// Deletion, then BPSK (`0 -> +1`, `1 -> -1`) plus `N(0, σ²)` noise on each
/// survivor.
pub fn simulate_deletion_awgn(
    bits: &[u8],
    p_d: f64,
    sigma: f64,
    rng: &mut RngState,
) -> Result<RealVector> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!(
            "sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    let survivors = simulate_deletion(bits, p_d, rng)?;
    Ok(RealVector(
        survivors
            .into_iter()
            .map(|b| {
                let z: f64 = rng.sample(StandardNormal);
                1.0 - 2.0 * b as f64 + sigma * z
            })
            .collect(),
    ))
}

/// Each bit is, with probability `p_i`, replaced by two fresh uniform bits;
/// otherwise it passes intact.
pub fn simulate_gallager_insertion(bits: &[u8], p_i: f64, rng: &mut RngState) -> Result<Vec<u8>> {
    check_probability("p_i", p_i)?;
    check_bits(bits)?;
    let mut out = Vec::with_capacity(bits.len() + bits.len() / 4 + 1);
    for &b in bits {
        if rng.random_bool(p_i) {
            let pair = rng.next_u32() & 3;
            out.push((pair >> 1) as u8);
            out.push((pair & 1) as u8);
        } else {
            out.push(b);
        }
    }
    Ok(out)
}

/// `n` i.u.d. bits.
pub fn random_bits(n: usize, rng: &mut RngState) -> Vec<u8> {
    (0..n).map(|_| (rng.next_u32() & 1) as u8).collect()
}
