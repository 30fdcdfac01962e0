//! Capacity lower bounds for the deletion-substitution, deletion-AWGN and
//! random insertion channels, their small-p simplifications, the Gallager
//! baseline and the block-length search.

use std::collections::HashMap;
use std::f64::consts::{E, LN_2};
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{s3_closed_form, s3_coefficient, w_coefficient, w_with_table};
use crate::error::{check_probability, Error, Result};
use crate::numerics::{
    awgn_expectation, binary_entropy, compensated_sum, exact_binomial, sum_by_magnitude, xlog2x,
    LogFactorials,
};

/// Error probabilities and noise scale of the channel family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    p_d: f64,
    p_e: f64,
    p_i: f64,
    sigma: f64,
}

impl ChannelParams {
    pub fn new(p_d: f64, p_e: f64, p_i: f64, sigma: f64) -> Result<Self> {
        check_probability("p_d", p_d)?;
        check_probability("p_e", p_e)?;
        check_probability("p_i", p_i)?;
        if p_d + p_i > 1.0 {
            return Err(Error::domain(format!(
                "p_d + p_i must not exceed 1, got {}",
                p_d + p_i
            )));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!(
                "sigma must be finite and nonnegative, got {sigma}"
            )));
        }
        Ok(ChannelParams {
            p_d,
            p_e,
            p_i,
            sigma,
        })
    }

    pub fn deletion(p_d: f64) -> Result<Self> {
        Self::new(p_d, 0.0, 0.0, 0.0)
    }

    pub fn deletion_substitution(p_d: f64, p_e: f64) -> Result<Self> {
        Self::new(p_d, p_e, 0.0, 0.0)
    }

    pub fn deletion_awgn(p_d: f64, sigma: f64) -> Result<Self> {
        Self::new(p_d, 0.0, 0.0, sigma)
    }

    pub fn insertion(p_i: f64) -> Result<Self> {
        Self::new(0.0, 0.0, p_i, 0.0)
    }

    pub fn p_d(&self) -> f64 {
        self.p_d
    }

    pub fn p_e(&self) -> f64 {
        self.p_e
    }

    pub fn p_i(&self) -> f64 {
        self.p_i
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gallager,
    DeletionSubstitution,
    DeletionOnly,
    DeletionSmallP,
    DeletionAwgn,
    RandomInsertion,
    RandomInsertionCorrected,
    RandomInsertionSmallP,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Gallager,
        Method::DeletionSubstitution,
        Method::DeletionOnly,
        Method::DeletionSmallP,
        Method::DeletionAwgn,
        Method::RandomInsertion,
        Method::RandomInsertionCorrected,
        Method::RandomInsertionSmallP,
    ];

    /// Stable snake_case tag used in JSON and CSV output.
    pub fn tag(self) -> &'static str {
        match self {
            Method::Gallager => "gallager",
            Method::DeletionSubstitution => "deletion_substitution",
            Method::DeletionOnly => "deletion_only",
            Method::DeletionSmallP => "deletion_small_p",
            Method::DeletionAwgn => "deletion_awgn",
            Method::RandomInsertion => "random_insertion",
            Method::RandomInsertionCorrected => "random_insertion_corrected",
            Method::RandomInsertionSmallP => "random_insertion_small_p",
        }
    }

    /// Short name accepted on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            Method::Gallager => "gallager",
            Method::DeletionSubstitution => "del-sub",
            Method::DeletionOnly => "deletion",
            Method::DeletionSmallP => "deletion-small-p",
            Method::DeletionAwgn => "del-awgn",
            Method::RandomInsertion => "insertion",
            Method::RandomInsertionCorrected => "insertion-corrected",
            Method::RandomInsertionSmallP => "insertion-small-p",
        }
    }

    /// Whether the bound depends on a block length `n`.
    pub fn uses_block_length(self) -> bool {
        self != Method::Gallager
    }

    /// Smallest `n` at which the bound is defined.
    pub fn min_block_length(self) -> usize {
        match self {
            Method::Gallager
            | Method::DeletionSubstitution
            | Method::DeletionOnly
            | Method::DeletionAwgn => 1,
            Method::RandomInsertion | Method::RandomInsertionCorrected => 3,
            Method::DeletionSmallP | Method::RandomInsertionSmallP => 4,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let m = match key.as_str() {
            "gallager" => Method::Gallager,
            "del-sub" | "deletion-substitution" => Method::DeletionSubstitution,
            "del" | "deletion" | "deletion-only" => Method::DeletionOnly,
            "del-small-p" | "deletion-small-p" => Method::DeletionSmallP,
            "del-awgn" | "deletion-awgn" => Method::DeletionAwgn,
            "ins" | "insertion" | "random-insertion" => Method::RandomInsertion,
            "ins-corrected" | "insertion-corrected" | "random-insertion-corrected" => {
                Method::RandomInsertionCorrected
            }
            "ins-small-p" | "insertion-small-p" | "random-insertion-small-p" => {
                Method::RandomInsertionSmallP
            }
            _ => return Err(Error::domain(format!("unknown method '{s}'"))),
        };
        Ok(m)
    }
}

/// One named additive term of a bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Component {
    pub name: &'static str,
    pub value: f64,
}

/// A bound value in bits per channel use with its additive breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub rate: f64,
    pub block_length: Option<usize>,
    pub method: Method,
    pub components: Vec<Component>,
}

impl BoundResult {
    fn from_components(
        method: Method,
        block_length: Option<usize>,
        components: Vec<Component>,
    ) -> Self {
        let rate = compensated_sum(components.iter().map(|c| c.value));
        BoundResult {
            rate,
            block_length,
            method,
            components,
        }
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.value)
    }
}

fn component(name: &'static str, value: f64) -> Component {
    Component { name, value }
}

/// Evaluates `method` at block length `n`; `n` is ignored for the Gallager
/// baseline.
pub fn evaluate(method: Method, n: usize, params: &ChannelParams) -> Result<BoundResult> {
    match method {
        Method::Gallager => gallager_bound(params),
        Method::DeletionSubstitution => deletion_substitution_bound(n, params.p_d, params.p_e),
        Method::DeletionOnly => deletion_bound(n, params.p_d),
        Method::DeletionSmallP => deletion_bound_small_p(n, params.p_d),
        Method::DeletionAwgn => deletion_awgn_bound(n, params.p_d, params.sigma),
        Method::RandomInsertion => random_insertion_bound(n, params.p_i),
        Method::RandomInsertionCorrected => random_insertion_bound_corrected(n, params.p_i),
        Method::RandomInsertionSmallP => random_insertion_bound_small_p(n, params.p_i),
    }
}

/// `1 + p_d log p_d + p_i log p_i + p_c log p_c + p_s log p_s` with
/// `p_c = (1-p_d-p_i)(1-p_e)` and `p_s = (1-p_d-p_i)p_e`.
pub fn gallager_bound(params: &ChannelParams) -> Result<BoundResult> {
    let ChannelParams { p_d, p_e, p_i, .. } = *params;
    let survive = 1.0 - p_d - p_i;
    let p_c = survive * (1.0 - p_e);
    let p_s = survive * p_e;
    Ok(BoundResult::from_components(
        Method::Gallager,
        None,
        vec![
            component("base", 1.0),
            component("deletion_term", xlog2x(p_d)),
            component("insertion_term", xlog2x(p_i)),
            component("correct_term", xlog2x(p_c)),
            component("substitution_term", xlog2x(p_s)),
        ],
    ))
}

fn check_block_length(method: Method, n: usize) -> Result<()> {
    let min = method.min_block_length();
    if n < min {
        return Err(Error::domain(format!(
            "{method} needs block length n >= {min}, got {n}"
        )));
    }
    Ok(())
}

static W_CACHE: OnceLock<RwLock<HashMap<(usize, usize), f64>>> = OnceLock::new();

/// `W_j(n)` for each `j`, through a process-wide cache. Values are pure
/// functions of `(n, j)`, so fill order does not matter.
fn cached_w(n: usize, js: &[usize], logs: &LogFactorials) -> Vec<f64> {
    let cache = W_CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let missing: Vec<usize> = {
        let map = cache.read().unwrap_or_else(|e| e.into_inner());
        js.iter()
            .copied()
            .filter(|&j| !map.contains_key(&(n, j)))
            .collect()
    };
    if !missing.is_empty() {
        let fresh: Vec<(usize, f64)> = missing
            .par_iter()
            .map(|&j| (j, w_with_table(logs, n, j)))
            .collect();
        let mut map = cache.write().unwrap_or_else(|e| e.into_inner());
        for (j, w) in fresh {
            map.insert((n, j), w);
        }
    }
    let map = cache.read().unwrap_or_else(|e| e.into_inner());
    js.iter().map(|&j| map[&(n, j)]).collect()
}

/// log2 of the pmf window below the mode that is still counted.
const PMF_WINDOW_LOG2: f64 = 50.0;

/// `(1/n) Σ_j W_j(n) C(n,j) p^j (1-p)^{n-j}`, restricted to the `j` whose pmf
/// is within `2^-50` of the modal pmf.
pub fn w_term(n: usize, p: f64) -> Result<f64> {
    check_probability("p_d", p)?;
    if n == 0 {
        return Err(Error::domain("block length must be positive"));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let logs = LogFactorials::new(n);
    if p == 1.0 {
        return Ok(cached_w(n, &[n], &logs)[0] / n as f64);
    }
    let lp = p.log2();
    let lq = (-p).ln_1p() / LN_2;
    let log_pmf = |j: usize| logs.log2_binomial(n, j) + j as f64 * lp + (n - j) as f64 * lq;
    let mode = (((n + 1) as f64 * p).floor() as usize).min(n);
    let floor = log_pmf(mode) - PMF_WINDOW_LOG2;
    let mut lo = mode;
    while lo > 1 && log_pmf(lo - 1) >= floor {
        lo -= 1;
    }
    let mut hi = mode;
    while hi < n && log_pmf(hi + 1) >= floor {
        hi += 1;
    }
    let lo = lo.max(1);
    if lo > hi {
        return Ok(0.0);
    }
    let js: Vec<usize> = (lo..=hi).collect();
    let ws = cached_w(n, &js, &logs);
    let mut terms: Vec<f64> = js
        .iter()
        .zip(&ws)
        .map(|(&j, &w)| w * log_pmf(j).exp2())
        .collect();
    Ok(sum_by_magnitude(&mut terms) / n as f64)
}

/// `1 - p_d - H_b(p_d) + (1/n) Σ_j W_j(n) pmf(j) - (1-p_d) H_b(p_e)`.
pub fn deletion_substitution_bound(n: usize, p_d: f64, p_e: f64) -> Result<BoundResult> {
    deletion_family(Method::DeletionSubstitution, n, p_d, p_e)
}

/// The deletion-substitution bound at `p_e = 0`.
pub fn deletion_bound(n: usize, p_d: f64) -> Result<BoundResult> {
    deletion_family(Method::DeletionOnly, n, p_d, 0.0)
}

fn deletion_family(method: Method, n: usize, p_d: f64, p_e: f64) -> Result<BoundResult> {
    check_probability("p_d", p_d)?;
    check_probability("p_e", p_e)?;
    check_block_length(method, n)?;
    let mut components = vec![
        component("base", 1.0 - p_d),
        component("binary_entropy_penalty", -binary_entropy(p_d)?),
        component("w_term", w_term(n, p_d)?),
    ];
    if method == Method::DeletionSubstitution {
        components.push(component(
            "substitution_penalty",
            -(1.0 - p_d) * binary_entropy(p_e)?,
        ));
    }
    Ok(BoundResult::from_components(method, Some(n), components))
}

/// Quartic simplification of the deletion bound, valid for `n >= 4`:
/// `1 - H_b(p) + p(W1-1) + p²((n-1)/2)(W2-2W1) + p³C(n-1,2)(W1-W2) - p⁴C(n-1,3)W1`.
pub fn deletion_bound_small_p(n: usize, p_d: f64) -> Result<BoundResult> {
    check_probability("p_d", p_d)?;
    check_block_length(Method::DeletionSmallP, n)?;
    let w1 = w_coefficient(n, 1)?;
    let w2 = w_coefficient(n, 2)?;
    let nf = n as f64;
    let c2 = (nf - 1.0) * (nf - 2.0) / 2.0;
    let c3 = (nf - 1.0) * (nf - 2.0) * (nf - 3.0) / 6.0;
    let p = p_d;
    Ok(BoundResult::from_components(
        Method::DeletionSmallP,
        Some(n),
        vec![
            component("base", 1.0),
            component("binary_entropy_penalty", -binary_entropy(p)?),
            component("order1", p * (w1 - 1.0)),
            component("order2", p * p * (nf - 1.0) / 2.0 * (w2 - 2.0 * w1)),
            component("order3", p.powi(3) * c2 * (w1 - w2)),
            component("order4", -p.powi(4) * c3 * w1),
        ],
    ))
}

/// Deletion bound minus `(1-p_d) E[log2(1+e^{-2y/σ²})]`; the AWGN term
/// vanishes at `σ = 0`.
pub fn deletion_awgn_bound(n: usize, p_d: f64, sigma: f64) -> Result<BoundResult> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!(
            "sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    let mut result = deletion_bound(n, p_d)?;
    let e = if sigma == 0.0 {
        0.0
    } else {
        awgn_expectation(sigma)?
    };
    result
        .components
        .push(component("awgn_penalty", -(1.0 - p_d) * e));
    Ok(BoundResult::from_components(
        Method::DeletionAwgn,
        Some(n),
        result.components,
    ))
}

/// The random insertion bound as stated (`n >= 3`):
/// `(1-p)^n - H_b(p) + (S3 - (3n+1)/(4n) + n) p(1-p)^{n-1}
///  + (1/n) P(2 <= T <= n-2) log2(n(n-1)/2) + p^{n-1}(1-p) log2 n`,
/// with `S3` from its closed-form rewrite.
pub fn random_insertion_bound(n: usize, p_i: f64) -> Result<BoundResult> {
    check_block_length(Method::RandomInsertion, n)?;
    insertion_bound_with(Method::RandomInsertion, n, p_i, s3_closed_form(n)?)
}

/// The same expression with `S3` from its defining sum, which keeps the
/// conditional-entropy step an upper bound.
pub fn random_insertion_bound_corrected(n: usize, p_i: f64) -> Result<BoundResult> {
    check_block_length(Method::RandomInsertionCorrected, n)?;
    insertion_bound_with(Method::RandomInsertionCorrected, n, p_i, s3_coefficient(n)?)
}

pub(crate) fn insertion_bound_with(
    method: Method,
    n: usize,
    p: f64,
    s3: f64,
) -> Result<BoundResult> {
    check_probability("p_i", p)?;
    let nf = n as f64;
    let (lp, lq) = if p == 0.0 || p == 1.0 {
        (p.log2(), (1.0 - p).log2())
    } else {
        (p.log2(), (-p).ln_1p() / LN_2)
    };
    // p^a q^b with 0 * log 0 = 0.
    let mono = |a: usize, b: usize| -> f64 {
        let l = match (a, b) {
            (0, 0) => 0.0,
            (0, _) => b as f64 * lq,
            (_, 0) => a as f64 * lp,
            _ => a as f64 * lp + b as f64 * lq,
        };
        l.exp2()
    };
    let logs = LogFactorials::new(n);
    let middle = if p == 0.0 || p == 1.0 {
        0.0
    } else {
        let mut terms: Vec<f64> = (2..=n - 2)
            .map(|j| (logs.log2_binomial(n, j) + j as f64 * lp + (n - j) as f64 * lq).exp2())
            .collect();
        sum_by_magnitude(&mut terms)
    };
    let single = mono(1, n - 1);
    Ok(BoundResult::from_components(
        method,
        Some(n),
        vec![
            component("no_insertion", mono(0, n)),
            component("binary_entropy_penalty", -binary_entropy(p)?),
            component(
                "single_insertion_term",
                (s3 - (3.0 * nf + 1.0) / (4.0 * nf) + nf) * single,
            ),
            component(
                "multi_insertion_term",
                middle * (nf * (nf - 1.0) / 2.0).log2() / nf,
            ),
            component("near_full_insertion_term", mono(n - 1, 1) * nf.log2()),
        ],
    ))
}

/// Coefficients `(a1, a2, a3, a4)` of `p, p², p³, p⁴` in the small-p
/// insertion polynomial, built from the closed-form `S3(n)`.
pub fn insertion_small_p_coefficients(n: usize) -> Result<[f64; 4]> {
    check_block_length(Method::RandomInsertionSmallP, n)?;
    let s = s3_closed_form(n)?;
    let nf = n as f64;
    let c = (3.0 * nf + 1.0) / (4.0 * nf);
    let l = (exact_binomial(n as u64, 2) as f64).log2();
    let c2 = nf * (nf - 1.0) / 2.0;
    let c3 = nf * (nf - 1.0) * (nf - 2.0) / 6.0;
    Ok([
        s - c,
        -(nf - 1.0) / 2.0 * (2.0 * s - 2.0 * c + nf - l),
        -c2 * (l - s - 2.0 * nf / 3.0 + c),
        -c3 * (s + nf - c),
    ])
}

/// `1 - H_b(p) + a1 p + a2 p² + a3 p³ + a4 p⁴`.
pub fn random_insertion_bound_small_p(n: usize, p_i: f64) -> Result<BoundResult> {
    check_probability("p_i", p_i)?;
    let a = insertion_small_p_coefficients(n)?;
    let p = p_i;
    Ok(BoundResult::from_components(
        Method::RandomInsertionSmallP,
        Some(n),
        vec![
            component("base", 1.0),
            component("binary_entropy_penalty", -binary_entropy(p)?),
            component("order1", a[0] * p),
            component("order2", a[1] * p * p),
            component("order3", a[2] * p.powi(3)),
            component("order4", a[3] * p.powi(4)),
        ],
    ))
}

/// Exhaustive scan of `n` from the larger of 2 and the method's minimum
/// up to `n_max`; ties go to the smaller `n`.
pub fn optimize_block_length(
    method: Method,
    params: &ChannelParams,
    n_max: usize,
) -> Result<(usize, BoundResult)> {
    if !method.uses_block_length() {
        return Err(Error::domain(format!(
            "{method} has no block length to optimise"
        )));
    }
    let start = method.min_block_length().max(2);
    if n_max < start {
        return Err(Error::domain(format!(
            "{method} needs n_max >= {start}, got {n_max}"
        )));
    }
    let results: Vec<BoundResult> = (start..=n_max)
        .into_par_iter()
        .map(|n| evaluate(method, n, params))
        .collect::<Result<_>>()?;
    let mut best = &results[0];
    for r in &results[1..] {
        if r.rate > best.rate {
            best = r;
        }
    }
    Ok((best.block_length.unwrap_or(start), best.clone()))
}

/// Partial sum `Σ_{l=1}^{terms} 2^{-l-1} l log2 l`.
pub fn run_length_series(terms: usize) -> f64 {
    compensated_sum((1..=terms).map(|l| {
        let lf = l as f64;
        (-lf - 1.0).exp2() * lf * lf.log2()
    }))
}

/// Number of series terms used for `A1`; the tail after 200 terms is below
/// `2^-190`.
pub const A1_TERMS: usize = 200;

/// `A1 = log2(2e) - Σ_{l>=1} 2^{-l-1} l log2 l`.
pub fn asymptotic_a1() -> f64 {
    (2.0 * E).log2() - run_length_series(A1_TERMS)
}

/// `1 + p log2 p - A1 p`: the leading terms of the small-p deletion capacity
/// expansion. A comparison curve, not a bound.
pub fn capacity_expansion_deletion(p_d: f64) -> Result<f64> {
    if !(p_d > 0.0 && p_d < 1.0) {
        return Err(Error::domain(format!(
            "expansion needs 0 < p_d < 1, got {p_d}"
        )));
    }
    Ok(1.0 + xlog2x(p_d) - asymptotic_a1() * p_d)
}
