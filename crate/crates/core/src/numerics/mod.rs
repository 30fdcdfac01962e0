//! Scalar building blocks: binary and block entropies, log-domain binomial
//! weights, compensated summation and the Gaussian expectation that enters
//! the deletion-AWGN bound.

mod quadrature;

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{check_probability, Error, Result};

pub use quadrature::{
    awgn_expectation, awgn_expectation_with, awgn_integrand, GaussHermite, QuadratureSpec,
};

/// Base-2 logarithm of a nonnegative quantity, with an explicit exact zero.
///
/// `LogWeight::ZERO` stands for the quantity 0; every other value carries a
/// finite logarithm, so [`LogWeight::value`] of a non-zero weight is
/// strictly positive (possibly subnormal or flushed to zero by `exp2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogWeight(Option<f64>);

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight(None);
    pub const ONE: LogWeight = LogWeight(Some(0.0));

    /// Wraps a finite base-2 logarithm. `-inf` maps to [`LogWeight::ZERO`].
    pub fn from_log2(log2: f64) -> Self {
        if log2 == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        assert!(
            log2.is_finite(),
            "LogWeight requires a finite logarithm, got {log2}"
        );
        LogWeight(Some(log2))
    }

    pub fn from_value(x: f64) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::domain(format!("cannot take the logarithm of {x}")));
        }
        Ok(if x == 0.0 {
            Self::ZERO
        } else {
            LogWeight(Some(x.log2()))
        })
    }

    pub fn is_zero(self) -> bool {
        self.0.is_none()
    }

    /// The logarithm, or `None` for an exact zero.
    pub fn log2(self) -> Option<f64> {
        self.0
    }

    /// The logarithm with the zero mapped to `-inf`.
    pub fn log2_or_neg_inf(self) -> f64 {
        self.0.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn value(self) -> f64 {
        self.0.map_or(0.0, f64::exp2)
    }

    pub fn times(self, other: LogWeight) -> LogWeight {
        match (self.0, other.0) {
            (Some(a), Some(b)) => LogWeight(Some(a + b)),
            _ => Self::ZERO,
        }
    }

    /// `-w log2 w`, the entropy contribution of this weight (0 for zero).
    pub fn entropy_term(self) -> f64 {
        self.0.map_or(0.0, |l| -l.exp2() * l)
    }
}

/// Neumaier's compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(terms);
    acc.total()
}

/// Sorts by decreasing magnitude, then sums with compensation.
pub fn sum_by_magnitude(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap_or(Ordering::Equal));
    compensated_sum(terms.iter().copied())
}

/// `x log2 x` with `0 log 0 = 0`.
pub fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy `H_b(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    let q_log = (-p).ln_1p() / LN_2;
    Ok(-p * p.log2() - (1.0 - p) * q_log)
}

/// `log2 C(n, k)` via log-gamma.
pub fn log_binomial(n: u64, k: u64) -> Result<LogWeight> {
    if k > n {
        return Err(Error::domain(format!(
            "binomial coefficient C({n}, {k}) needs k <= n"
        )));
    }
    if k == 0 || k == n {
        return Ok(LogWeight::ONE);
    }
    if n <= EXACT_BINOMIAL_MAX {
        return Ok(LogWeight::from_log2((exact_binomial(n, k) as f64).log2()));
    }
    let v = (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))
        / LN_2;
    Ok(LogWeight::from_log2(v))
}

/// Largest `n` for which every `C(n, k)` and the intermediate products of
/// [`exact_binomial`] fit in a `u128`.
pub(crate) const EXACT_BINOMIAL_MAX: u64 = 120;

/// `C(n, k)` as an integer; `0` when `k > n`. Caller keeps `n <= 120`.
pub(crate) fn exact_binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `log2 [C(n, j) p^j (1-p)^(n-j)]`.
pub fn binomial_log_pmf(n: u64, j: u64, p: f64) -> Result<LogWeight> {
    check_probability("p", p)?;
    let coeff = log_binomial(n, j)?;
    if p == 0.0 {
        return Ok(if j == 0 {
            LogWeight::ONE
        } else {
            LogWeight::ZERO
        });
    }
    if p == 1.0 {
        return Ok(if j == n {
            LogWeight::ONE
        } else {
            LogWeight::ZERO
        });
    }
    let log_p = p.log2();
    let log_q = (-p).ln_1p() / LN_2;
    Ok(coeff.times(LogWeight::from_log2(
        j as f64 * log_p + (n - j) as f64 * log_q,
    )))
}

/// Entropy `H(T)` of `T ~ Binomial(n, p)`.
pub fn block_entropy(n: u64, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if n == 0 {
        return Err(Error::domain("block entropy needs n >= 1"));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    let logs = LogFactorials::new(n as usize);
    let log_p = p.log2();
    let log_q = (-p).ln_1p() / LN_2;
    let mut terms: Vec<f64> = (0..=n as usize)
        .map(|j| {
            let l = logs.log2_binomial(n as usize, j)
                + j as f64 * log_p
                + (n as usize - j) as f64 * log_q;
            -l.exp2() * l
        })
        .collect();
    Ok(sum_by_magnitude(&mut terms).max(0.0))
}

/// `log2` of the sum of the represented values, shifted by the maximum.
pub fn log_sum(terms: &[LogWeight]) -> LogWeight {
    let max = terms
        .iter()
        .filter_map(|w| w.log2())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogWeight::ZERO;
    }
    let shifted = compensated_sum(
        terms
            .iter()
            .filter_map(|w| w.log2())
            .map(|l| (l - max).exp2()),
    );
    LogWeight::from_log2(max + shifted.log2())
}

/// Table of `log2 k!` for `k <= max`, one log-gamma evaluation per entry.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(max: usize) -> Self {
        let table = (0..=max)
            .map(|k| {
                if k < 2 {
                    0.0
                } else {
                    ln_gamma(k as f64 + 1.0) / LN_2
                }
            })
            .collect();
        LogFactorials { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn log2_factorial(&self, k: usize) -> f64 {
        self.table[k]
    }

    /// `log2 C(n, k)`; caller guarantees `k <= n <= max`.
    #[inline]
    pub fn log2_binomial(&self, n: usize, k: usize) -> f64 {
        debug_assert!(k <= n);
        if k == 0 || k == n {
            return 0.0;
        }
        // Differences of large table entries cancel; exact below the limit.
        if n as u64 <= EXACT_BINOMIAL_MAX {
            return (exact_binomial(n as u64, k as u64) as f64).log2();
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }
}
