//! Monte-Carlo estimates for the deletion-AWGN channel. Samples are split
//! into fixed chunks, each on its own stream of the seed, and merged in
//! chunk order, so results do not depend on the thread count.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::deletion::{embedding_counts, DELETION_LAW_MAX_N};
use super::word::Word;
use crate::bounds::w_term;
use crate::channels::RngState;
use crate::combinatorics::{enumerate_deletion_patterns, RunLengthSequence};
use crate::error::{check_probability, Error, Result};
use crate::numerics::{
    awgn_expectation, binary_entropy, block_entropy, exact_binomial, CompensatedSum,
};

/// Minimum sample count for the entropy checks.
pub const MIN_SAMPLES: usize = 100_000;
/// Largest block length of the conditional-mixture check.
pub const MIXTURE_MAX_N: usize = 4;
/// Verdicts allow this many standard errors.
pub const Z_LIMIT: f64 = 4.0;

const CHUNKS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: usize,
}

/// Outcome of comparing an estimate with a reference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McVerdict {
    pub estimate: f64,
    pub reference: f64,
    pub standard_error: f64,
    /// `(estimate - reference) / standard_error`.
    pub z: f64,
    pub passed: bool,
}

impl McVerdict {
    fn two_sided(est: McEstimate, reference: f64) -> Self {
        let z = (est.mean - reference) / est.standard_error;
        McVerdict {
            estimate: est.mean,
            reference,
            standard_error: est.standard_error,
            z,
            passed: z.abs() <= Z_LIMIT,
        }
    }

    fn at_most(estimate: f64, standard_error: f64, reference: f64) -> Self {
        let z = (estimate - reference) / standard_error;
        McVerdict {
            estimate,
            reference,
            standard_error,
            z,
            passed: z <= Z_LIMIT,
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

/// Sample mean and standard error of `f(rng)` over `samples` draws.
fn estimate<F>(samples: usize, seed: u64, stream_base: u64, f: F) -> McEstimate
where
    F: Fn(&mut RngState) -> f64 + Sync,
{
    let sums: Vec<(f64, f64)> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let count = samples / CHUNKS + usize::from(c < samples % CHUNKS);
            let mut rng = RngState::with_stream(seed, stream_base + c as u64);
            let (mut s, mut s2) = (CompensatedSum::default(), CompensatedSum::default());
            for _ in 0..count {
                let v = f(&mut rng);
                s.add(v);
                s2.add(v * v);
            }
            (s.total(), s2.total())
        })
        .collect();
    let (mut s, mut s2) = (CompensatedSum::default(), CompensatedSum::default());
    for (a, b) in sums {
        s.add(a);
        s2.add(b);
    }
    let nf = samples as f64;
    let mean = s.total() / nf;
    let var = ((s2.total() - nf * mean * mean) / (nf - 1.0)).max(0.0);
    McEstimate {
        mean,
        standard_error: (var / nf).sqrt(),
        samples,
    }
}

/// `log2(1 + e^{-u})` without overflow.
fn softplus2(u: f64) -> f64 {
    ((-u).max(0.0) + (-u.abs()).exp().ln_1p()) / LN_2
}

/// Direct sampling of `E[log2(1 + e^{-2y/σ²})]`, `y = 1 + σ g`.
pub fn awgn_expectation_mc(sigma: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    check_sigma(sigma)?;
    if samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let s2 = sigma * sigma;
    Ok(estimate(samples, seed, 1, |rng| {
        let g: f64 = rng.sample(StandardNormal);
        softplus2(2.0 * (1.0 + sigma * g) / s2)
    }))
}

/// Estimates the differential entropy of one received symbol,
/// `½N(1, σ²) + ½N(-1, σ²)`, as `-E log2 f(ỹ)` and compares it with
/// `log2(2σ√(2πe)) - E(σ)`, `E` from quadrature.
pub fn mc_awgn_entropy_check(sigma: f64, samples: usize, seed: u64) -> Result<McVerdict> {
    check_sigma(sigma)?;
    if samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "the entropy check needs at least {MIN_SAMPLES} samples"
        )));
    }
    let s2 = sigma * sigma;
    let log_norm = (sigma * (2.0 * PI).sqrt()).log2();
    let est = estimate(samples, seed, 1, |rng| {
        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let g: f64 = rng.sample(StandardNormal);
        let y = s + sigma * g;
        let a = -(y - 1.0).powi(2) / (2.0 * s2);
        let b = -(y + 1.0).powi(2) / (2.0 * s2);
        let m = a.max(b);
        let log_mix = m + ((a - m).exp() + (b - m).exp()).ln() - 2f64.ln();
        log_norm - log_mix / LN_2
    });
    let closed =
        (2.0 * sigma * (2.0 * PI * std::f64::consts::E).sqrt()).log2() - awgn_expectation(sigma)?;
    Ok(McVerdict::two_sided(est, closed))
}

/// Conditional differential entropy `h(Ỹ | x, d)` for one input and
/// deletion count against its distinct-pattern bound
/// `(n-d) log2(σ√(2πe)) + log2 C(n,d) - Σ_D (Π C(n_k,d_k) / C(n,d)) log2 Π C(n_k,d_k)`.
#[derive(Debug, Clone, Serialize)]
pub struct MixtureCheck {
    pub input: Word,
    pub deletions: usize,
    pub estimate: f64,
    pub standard_error: f64,
    pub bound: f64,
    pub passed: bool,
}

fn mixture_case(
    x: Word,
    d: usize,
    sigma: f64,
    samples: usize,
    seed: u64,
    stream: u64,
) -> MixtureCheck {
    let n = x.len();
    let m = n - d;
    let total = exact_binomial(n as u64, d as u64) as f64;
    let centres: Vec<(Vec<f64>, f64)> = embedding_counts(x)[m]
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(y, &c)| {
            let w = Word::from_raw(m, y as u64);
            (
                (0..m).map(|i| 1.0 - 2.0 * w.bit(i) as f64).collect(),
                c as f64 / total,
            )
        })
        .collect();
    let s2 = sigma * sigma;
    let log_norm = m as f64 * (sigma * (2.0 * PI).sqrt()).log2();
    // Streams are spaced so cases never share one.
    let est = estimate(samples, seed, stream * CHUNKS as u64 + 1, |rng| {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let pick = centres
            .iter()
            .position(|(_, w)| {
                acc += w;
                u < acc
            })
            .unwrap_or(centres.len() - 1);
        let y: Vec<f64> = centres[pick]
            .0
            .iter()
            .map(|&c| c + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let logs: Vec<f64> = centres
            .iter()
            .map(|(c, w)| {
                w.ln() - c.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (2.0 * s2)
            })
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_f = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
        log_norm - log_f / LN_2
    });
    let rl = RunLengthSequence::encode(&x.to_bits()).expect("non-empty input");
    let pattern: f64 = enumerate_deletion_patterns(rl.runs(), d)
        .map(|p| {
            let c = p.multiplicity(rl.runs()) as f64;
            c / total * c.log2()
        })
        .sum();
    let bound = m as f64 * (sigma * (2.0 * PI * std::f64::consts::E).sqrt()).log2() + total.log2()
        - pattern;
    let verdict = McVerdict::at_most(est.mean, est.standard_error, bound);
    MixtureCheck {
        input: x,
        deletions: d,
        estimate: est.mean,
        standard_error: est.standard_error,
        bound,
        passed: verdict.passed,
    }
}

/// Checks the distinct-pattern bound on `h(Ỹ | x, d)` for every input of
/// length `n <= 4` and every `d < n`.
pub fn conditional_mixture_check(
    n: usize,
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<MixtureCheck>> {
    check_sigma(sigma)?;
    if n == 0 || n > MIXTURE_MAX_N {
        return Err(Error::domain(format!(
            "the mixture check covers 1 <= n <= {MIXTURE_MAX_N}, got {n}"
        )));
    }
    if samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let cases: Vec<(Word, usize)> = Word::all(n)
        .flat_map(|x| (0..n).map(move |d| (x, d)))
        .collect();
    Ok(cases
        .iter()
        .enumerate()
        .map(|(k, &(x, d))| mixture_case(x, d, sigma, samples, seed, k as u64))
        .collect())
}

/// `h(Ỹ | X)` for i.u.d. inputs, `H(T) + Σ_d P(T=d) avg_x h(Ỹ | x, d)`,
/// estimated from the mixture cases, against
/// `n H_b(p_d) - Σ_j W_j(n) P(T=j) + n(1-p_d) log2(σ√(2πe))`.
pub fn deletion_awgn_conditional_check(
    n: usize,
    p_d: f64,
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<McVerdict> {
    check_probability("p_d", p_d)?;
    if n > DELETION_LAW_MAX_N {
        return Err(Error::Resource(format!(
            "n = {n} is beyond the enumeration limit"
        )));
    }
    let cases = conditional_mixture_check(n, sigma, samples, seed)?;
    let inv = (-(n as f64)).exp2();
    let (mut mean, mut var) = (CompensatedSum::default(), 0.0);
    for c in &cases {
        let pmf = exact_binomial(n as u64, c.deletions as u64) as f64
            * super::mono(p_d, c.deletions, n - c.deletions);
        mean.add(pmf * inv * c.estimate);
        var += (pmf * inv * c.standard_error).powi(2);
    }
    let estimate = mean.total() + block_entropy(n as u64, p_d)?;
    let nf = n as f64;
    let bound = nf * binary_entropy(p_d)? - nf * w_term(n, p_d)?
        + nf * (1.0 - p_d) * (sigma * (2.0 * PI * std::f64::consts::E).sqrt()).log2();
    Ok(McVerdict::at_most(estimate, var.sqrt(), bound))
}
