//! Goodness-of-fit tests and the pre-registered statistical checks of the
//! simulators.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::{
    random_bits, simulate_bsc, simulate_deletion, simulate_deletion_awgn,
    simulate_deletion_substitution, simulate_gallager_insertion, RngState,
};
use crate::error::{Error, Result};
use crate::numerics::binomial_log_pmf;

/// Significance level of every statistical check.
pub const SIGNIFICANCE: f64 = 1e-3;

/// Minimum expected count per chi-square bin after pooling.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom (chi-square) or sample size (KS).
    pub dof: usize,
}

impl TestOutcome {
    pub fn passes(&self) -> bool {
        self.p_value >= SIGNIFICANCE
    }
}

/// Pearson chi-square of `observed` counts against cell probabilities.
/// Adjacent cells are pooled left to right until each expected count is at
/// least 5; a short remainder joins the last pooled cell.
pub fn chi_square_test(observed: &[u64], probs: &[f64]) -> Result<TestOutcome> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::domain(
            "chi-square needs matching, non-empty observed and probability vectors",
        ));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::domain("chi-square needs at least one observation"));
    }
    let mass: f64 = probs.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&obs, &p) in observed.iter().zip(probs) {
        o += obs as f64;
        e += p / mass * total as f64;
        if e >= MIN_EXPECTED {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::domain(
            "chi-square needs at least two cells after pooling",
        ));
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::domain(e.to_string()))?;
    Ok(TestOutcome {
        statistic,
        p_value: 1.0 - dist.cdf(statistic),
        dof,
    })
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF, p-value
/// from the asymptotic Kolmogorov law with Stephens' small-sample factor.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<TestOutcome> {
    if samples.is_empty() {
        return Err(Error::domain("KS test needs samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok(TestOutcome {
        statistic: d,
        p_value: kolmogorov_q(lambda),
        dof: sorted.len(),
    })
}

/// `Q(λ) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2k²λ²)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Standardised deviation `|observed - mean| / sd`.
pub fn z_score(observed: f64, mean: f64, sd: f64) -> f64 {
    (observed - mean).abs() / sd
}

/// Verdict of one pre-registered statistical check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl StatCheck {
    fn from_test(name: &str, t: &TestOutcome) -> Self {
        StatCheck {
            name: name.to_string(),
            passed: t.passes(),
            detail: format!(
                "statistic {:.6}, p-value {:.4e}, dof {}",
                t.statistic, t.p_value, t.dof
            ),
        }
    }

    fn from_z(name: &str, z: f64, limit: f64) -> Self {
        StatCheck {
            name: name.to_string(),
            passed: z <= limit,
            detail: format!("|z| = {z:.4} (limit {limit})"),
        }
    }
}

fn binomial_probs(n: usize, p: f64) -> Result<Vec<f64>> {
    (0..=n)
        .map(|j| binomial_log_pmf(n as u64, j as u64, p).map(|w| w.value()))
        .collect()
}

/// The simulator checks with `trials` repetitions each, on streams
/// `1, 2, ...` of `seed`.
pub fn statistical_suite(seed: u64, trials: usize) -> Result<Vec<StatCheck>> {
    if trials < 1000 {
        return Err(Error::domain(format!(
            "statistical suite needs at least 1000 trials, got {trials}"
        )));
    }
    let root = RngState::new(seed);
    let mut checks = Vec::new();

    // Survivor count of a 20-bit block ~ Binomial(20, 0.9).
    let (n, p_d) = (20usize, 0.1);
    let mut rng = root.split(1);
    let mut counts = vec![0u64; n + 1];
    for _ in 0..trials {
        let bits = random_bits(n, &mut rng);
        counts[simulate_deletion(&bits, p_d, &mut rng)?.len()] += 1;
    }
    let t = chi_square_test(&counts, &binomial_probs(n, 1.0 - p_d)?)?;
    checks.push(StatCheck::from_test(
        "deletion survivor count ~ Binomial(20, 0.9)",
        &t,
    ));

    // BSC flip rate.
    let p_e = 0.05;
    let mut rng = root.split(2);
    let zeros = vec![0u8; trials];
    let flips = simulate_bsc(&zeros, p_e, &mut rng)?
        .iter()
        .filter(|&&b| b == 1)
        .count() as f64;
    let m = trials as f64;
    let z = z_score(flips / m, p_e, (p_e * (1.0 - p_e) / m).sqrt());
    checks.push(StatCheck::from_z("BSC flip rate = 0.05", z, 3.0));

    // Joint (survivors, flips) law of the cascade on an all-zero block.
    let (n, p_d, p_e) = (12usize, 0.2, 0.1);
    let mut rng = root.split(3);
    let zeros = vec![0u8; n];
    let mut joint = vec![0u64; (n + 1) * (n + 1)];
    let mut probs = vec![0.0; (n + 1) * (n + 1)];
    for _ in 0..trials {
        let out = simulate_deletion_substitution(&zeros, p_d, p_e, &mut rng)?;
        let e = out.iter().filter(|&&b| b == 1).count();
        joint[out.len() * (n + 1) + e] += 1;
    }
    for len in 0..=n {
        let pl = binomial_log_pmf(n as u64, len as u64, 1.0 - p_d)?.value();
        for e in 0..=len {
            probs[len * (n + 1) + e] = pl * binomial_log_pmf(len as u64, e as u64, p_e)?.value();
        }
    }
    let t = chi_square_test(&joint, &probs)?;
    checks.push(StatCheck::from_test(
        "deletion-substitution joint (length, flips) law",
        &t,
    ));

    // AWGN noise moments on an all-zero input without deletions.
    let sigma = 0.7;
    let mut rng = root.split(4);
    let zeros = vec![0u8; trials];
    let y = simulate_deletion_awgn(&zeros, 0.0, sigma, &mut rng)?;
    let noise: Vec<f64> = y.as_slice().iter().map(|v| v - 1.0).collect();
    let mean = noise.iter().sum::<f64>() / m;
    let var = noise.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (m - 1.0);
    checks.push(StatCheck::from_z(
        "AWGN noise mean = 0",
        z_score(mean, 0.0, sigma / m.sqrt()),
        3.0,
    ));
    // Var of the sample variance of a normal sample is 2σ⁴/(m-1).
    let var_sd = (2.0 * sigma.powi(4) / (m - 1.0)).sqrt();
    checks.push(StatCheck::from_z(
        "AWGN noise variance = sigma^2",
        z_score(var, sigma * sigma, var_sd),
        3.0,
    ));

    // Marginal of a received symbol under i.u.d. input: ½N(1,σ²) + ½N(-1,σ²).
    let mut rng = root.split(5);
    let bits = random_bits(trials, &mut rng);
    let y = simulate_deletion_awgn(&bits, 0.3, sigma, &mut rng)?;
    let std = Normal::new(0.0, 1.0).map_err(|e| Error::domain(e.to_string()))?;
    let cdf = |v: f64| 0.5 * std.cdf((v - 1.0) / sigma) + 0.5 * std.cdf((v + 1.0) / sigma);
    let t = ks_test(y.as_slice(), cdf)?;
    checks.push(StatCheck::from_test(
        "deletion-AWGN marginal is the BPSK Gaussian mixture (KS)",
        &t,
    ));

    // Insertion event count ~ Binomial(16, 0.15).
    let (n, p_i) = (16usize, 0.15);
    let mut rng = root.split(6);
    let mut counts = vec![0u64; n + 1];
    for _ in 0..trials {
        let bits = random_bits(n, &mut rng);
        counts[simulate_gallager_insertion(&bits, p_i, &mut rng)?.len() - n] += 1;
    }
    let t = chi_square_test(&counts, &binomial_probs(n, p_i)?)?;
    checks.push(StatCheck::from_test(
        "insertion event count ~ Binomial(16, 0.15)",
        &t,
    ));

    // n = 1, conditioned on an insertion: the pair is uniform on 4 patterns.
    let mut rng = root.split(7);
    let mut pairs = [0u64; 4];
    for _ in 0..trials {
        let out = simulate_gallager_insertion(&[1], 0.5, &mut rng)?;
        if out.len() == 2 {
            pairs[(out[0] * 2 + out[1]) as usize] += 1;
        }
    }
    let t = chi_square_test(&pairs, &[0.25; 4])?;
    checks.push(StatCheck::from_test(
        "inserted pair uniform over {00,01,10,11}",
        &t,
    ));

    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_pools_small_cells() {
        let t = chi_square_test(&[50, 50, 0, 0], &[0.5, 0.5 - 1e-9, 5e-10, 5e-10]).unwrap();
        assert_eq!(t.dof, 1);
        assert!(t.statistic < 1e-6 && t.passes());
        let bad = chi_square_test(&[90, 10], &[0.5, 0.5]).unwrap();
        assert!(!bad.passes());
        assert!(chi_square_test(&[1], &[1.0]).is_err());
        assert!(chi_square_test(&[1, 2], &[1.0]).is_err());
    }

    #[test]
    fn chi_square_p_value_reference() {
        // statistic 3.841 at 1 dof is the 5% point.
        let t = chi_square_test(&[5980, 4020], &[0.6, 0.4]).unwrap();
        let expected = (20.0f64 * 20.0 / 6000.0) + (20.0 * 20.0 / 4000.0);
        assert!((t.statistic - expected).abs() < 1e-9);
        let t = chi_square_test(&[598, 402], &[0.6, 0.4]).unwrap();
        assert!(t.p_value > 0.8);
    }

    #[test]
    fn kolmogorov_q_values() {
        assert_eq!(kolmogorov_q(0.0), 1.0);
        // Q(1.36) is the classical 5% critical value.
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.949) - 0.001).abs() < 1e-4);
    }

    #[test]
    fn ks_detects_shift() {
        let mut rng = RngState::new(11);
        let y = simulate_deletion_awgn(&vec![0u8; 5000], 0.0, 1.0, &mut rng).unwrap();
        let std = Normal::new(0.0, 1.0).unwrap();
        assert!(ks_test(y.as_slice(), |v| std.cdf(v - 1.0))
            .unwrap()
            .passes());
        assert!(!ks_test(y.as_slice(), |v| std.cdf(v - 1.2))
            .unwrap()
            .passes());
    }

    #[test]
    fn suite_passes_with_fixed_seed() {
        let checks = statistical_suite(42, 200_000).unwrap();
        assert_eq!(checks.len(), 8);
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert_eq!(checks, statistical_suite(42, 200_000).unwrap());
        assert!(statistical_suite(42, 10).is_err());
    }
}
