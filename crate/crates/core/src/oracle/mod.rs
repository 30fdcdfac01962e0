//! Independent oracles: exhaustive enumeration of the deletion,
//! deletion-substitution and random insertion channels for small block
//! lengths, high-precision block entropies and Monte-Carlo checks of the
//! Gaussian terms. Everything here is computed from the channel definitions,
//! never from the closed forms it is used to check.

pub mod awgn;
pub mod deletion;
pub mod insertion;
pub mod precise;
mod word;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::bounds::{self, ChannelParams, Method};
use crate::combinatorics::{s3_closed_form, s3_coefficient};
use crate::error::{Error, Result};
use crate::numerics::{binary_entropy, xlog2x};

pub use awgn::{
    awgn_expectation_mc, conditional_mixture_check, deletion_awgn_conditional_check,
    mc_awgn_entropy_check, McEstimate, McVerdict, MixtureCheck,
};
pub use deletion::{
    deletion_closed_form_probability, exact_deletion_conditional, exact_deletion_law,
    exact_deletion_substitution_entropies, pattern_entropy, DELETION_LAW_MAX_N,
    DELETION_SUBSTITUTION_MAX_N,
};
pub use insertion::{
    exact_insertion_conditional, exact_insertion_entropies, exact_insertion_law,
    single_insertion_law, SingleInsertionCase, SingleInsertionOutcome, INSERTION_MAX_N,
};
pub use precise::{exact_binomial_log2_pmf, exact_block_entropy, PRECISE_MAX_N};
pub use word::{Arithmetic, ExactDistribution, Word};

/// Laws are kept as exact rationals up to this block length.
pub const RATIONAL_MAX_N: usize = 10;

/// Absolute tolerance, in bits, for identities between an exact entropy and
/// its closed form.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;
/// Slack, in bits, allowed on the wrong side of an inequality.
pub const INEQUALITY_SLACK: f64 = 1e-10;

/// `p^a (1-p)^b` with `0^0 = 1`.
pub(crate) fn mono(p: f64, a: usize, b: usize) -> f64 {
    let q = 1.0 - p;
    let pa = if a == 0 { 1.0 } else { p.powi(a as i32) };
    let qb = if b == 0 { 1.0 } else { q.powi(b as i32) };
    pa * qb
}

/// `p^a (1-p)^b 2^{-shift}` as an exact rational of the binary value of `p`.
pub(crate) fn rational_mono(p: f64, a: usize, b: usize, shift: usize) -> BigRational {
    let p = BigRational::from_float(p).expect("probabilities are finite");
    let q = BigRational::one() - &p;
    let denom = BigRational::from_integer(BigInt::one() << shift);
    num_traits::pow(p, a) * num_traits::pow(q, b) / denom
}

pub(crate) fn rational_probability(
    count: u128,
    p: f64,
    a: usize,
    b: usize,
    shift: usize,
) -> BigRational {
    rational_mono(p, a, b, shift) * BigRational::from_integer(BigInt::from(count))
}

/// The channel an [`EntropyReport`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "channel", rename_all = "snake_case")]
pub enum Channel {
    DeletionSubstitution { p_d: f64, p_e: f64 },
    Insertion { p_i: f64 },
}

/// Pieces of the exact insertion conditional entropy, averaged over inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InsertionParts {
    /// Entropy contribution of outputs with zero or one insertion.
    pub single_part: f64,
    /// Entropy contribution of outputs with two or more insertions.
    pub multi_part: f64,
    /// `Σ_{i>=2} -ε_i log(ε_i / |(x, i)|)` with the true support sizes.
    pub equiprobable_actual: f64,
    /// The same with `|(x, i)|` replaced by `2^{n+i}`.
    pub equiprobable_full: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    AtMost,
}

/// One link `lhs = rhs` or `lhs <= rhs` of a bound chain. `margin` is
/// `rhs - lhs` for inequalities and `-|lhs - rhs|` for equalities, so a
/// negative margin beyond the tolerance is a violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    pub name: &'static str,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
}

impl ChainCheck {
    fn new(name: &'static str, relation: Relation, lhs: f64, rhs: f64) -> Self {
        let (margin, passed) = match relation {
            Relation::Equal => (-(lhs - rhs).abs(), (lhs - rhs).abs() <= EQUALITY_TOLERANCE),
            Relation::AtMost => (rhs - lhs, rhs - lhs >= -INEQUALITY_SLACK),
        };
        ChainCheck {
            name,
            relation,
            lhs,
            rhs,
            margin,
            passed: passed && lhs.is_finite() && rhs.is_finite(),
        }
    }
}

/// Closed-form entropy expressions checked by the chain. The defaults are
/// the formulas the bounds use; tests swap in wrong ones to make sure the chain
/// notices.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForm {
    /// `H(Y')` of the deletion-substitution channel: `n(1-p_d) + H(T)`.
    pub deletion_output_entropy: fn(usize, f64) -> Result<f64>,
    /// Upper bound on `H(Y'|X)`:
    /// `n H_b(p_d) - Σ_j W_j(n) P(T=j) + n(1-p_d) H_b(p_e)`.
    pub deletion_conditional_bound: fn(usize, f64, f64) -> Result<f64>,
    /// `H(Y)` of the insertion channel: `n(1+p_i) + H(T)`.
    pub insertion_output_entropy: fn(usize, f64) -> Result<f64>,
    /// Zero/one-insertion part of `H(Y|X)` for a given `S3`.
    pub insertion_single_part: fn(usize, f64, f64) -> Result<f64>,
    /// Closed-form bound on the multi-insertion part.
    pub insertion_multi_bound: fn(usize, f64) -> Result<f64>,
}

impl Default for ClosedForm {
    fn default() -> Self {
        ClosedForm {
            deletion_output_entropy,
            deletion_conditional_bound,
            insertion_output_entropy,
            insertion_single_part,
            insertion_multi_bound,
        }
    }
}

fn deletion_output_entropy(n: usize, p_d: f64) -> Result<f64> {
    Ok(n as f64 * (1.0 - p_d) + exact_block_entropy(n as u64, p_d)?)
}

fn deletion_conditional_bound(n: usize, p_d: f64, p_e: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(nf * binary_entropy(p_d)? - nf * bounds::w_term(n, p_d)?
        + nf * (1.0 - p_d) * binary_entropy(p_e)?)
}

fn insertion_output_entropy(n: usize, p_i: f64) -> Result<f64> {
    Ok(n as f64 * (1.0 + p_i) + exact_block_entropy(n as u64, p_i)?)
}

fn insertion_single_part(n: usize, p: f64, s3: f64) -> Result<f64> {
    let nf = n as f64;
    let single = mono(p, 1, n - 1);
    let log_single = if single > 0.0 { single.log2() } else { 0.0 };
    Ok(-xlog2x(mono(p, 0, n)) - nf * single * (log_single - (7.0 * nf + 1.0) / (4.0 * nf) + s3))
}

fn insertion_multi_bound(n: usize, p: f64) -> Result<f64> {
    let nf = n as f64;
    let q_n = mono(p, 0, n);
    let single = mono(p, 1, n - 1);
    let near_full = mono(p, n - 1, 1);
    let middle = 1.0 - mono(p, n, 0) - q_n - nf * single - nf * near_full;
    Ok(
        nf * (1.0 + p) + nf * binary_entropy(p)? - nf * q_n - (nf + 1.0) * nf * single
            + xlog2x(q_n)
            + nf * xlog2x(single)
            - nf * near_full * nf.log2()
            - middle * (nf * (nf - 1.0) / 2.0).log2(),
    )
}

/// Exact entropies of one channel and block length with the checks that
/// tie them to the closed forms.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub channel: Channel,
    pub n: usize,
    pub output_entropy: f64,
    pub conditional_entropy: f64,
    pub mutual_information: f64,
    /// `H(T)` of the number of deletions or insertions.
    pub block_entropy: f64,
    pub support_size: usize,
    /// Entropy of the distinct-pattern device (deletion channels).
    pub pattern_entropy: Option<f64>,
    pub insertion_parts: Option<InsertionParts>,
    pub bound_chain: Vec<ChainCheck>,
}

impl EntropyReport {
    pub(crate) fn build(
        channel: Channel,
        n: usize,
        output_entropy: f64,
        conditional_entropy: f64,
        support_size: usize,
        pattern_entropy: Option<f64>,
        insertion_parts: Option<InsertionParts>,
    ) -> Result<Self> {
        let p = match channel {
            Channel::DeletionSubstitution { p_d, .. } => p_d,
            Channel::Insertion { p_i } => p_i,
        };
        let mut report = EntropyReport {
            channel,
            n,
            output_entropy,
            conditional_entropy,
            mutual_information: output_entropy - conditional_entropy,
            block_entropy: exact_block_entropy(n as u64, p)?,
            support_size,
            pattern_entropy,
            insertion_parts,
            bound_chain: Vec::new(),
        };
        let method = match channel {
            Channel::DeletionSubstitution { .. } => Method::DeletionSubstitution,
            Channel::Insertion { .. } => Method::RandomInsertion,
        };
        report.bound_chain = report.chain(method, &ClosedForm::default())?;
        Ok(report)
    }

    /// `(I - H(T)) / n`, the quantity every lemma bounds from below.
    pub fn rate_lower_target(&self) -> f64 {
        (self.mutual_information - self.block_entropy) / self.n as f64
    }

    pub fn all_passed(&self) -> bool {
        self.bound_chain.iter().all(|c| c.passed)
    }

    /// Rebuilds the chain for `method` against the given closed forms.
    pub fn chain(&self, method: Method, closed: &ClosedForm) -> Result<Vec<ChainCheck>> {
        let n = self.n;
        let nf = n as f64;
        let mut out = Vec::new();
        match (self.channel, method) {
            (
                Channel::DeletionSubstitution { p_d, p_e },
                Method::DeletionSubstitution | Method::DeletionOnly,
            ) => {
                let ub = (closed.deletion_conditional_bound)(n, p_d, p_e)?;
                out.push(ChainCheck::new(
                    "output entropy equals n(1-p_d) + H(T)",
                    Relation::Equal,
                    self.output_entropy,
                    (closed.deletion_output_entropy)(n, p_d)?,
                ));
                if let Some(device) = self.pattern_entropy {
                    out.push(ChainCheck::new(
                        "distinct-pattern entropy equals the conditional upper bound",
                        Relation::Equal,
                        device,
                        ub,
                    ));
                }
                out.push(ChainCheck::new(
                    "conditional entropy at most its upper bound",
                    Relation::AtMost,
                    self.conditional_entropy,
                    ub,
                ));
                let lemma = bounds::deletion_substitution_bound(n, p_d, p_e)?.rate;
                out.push(ChainCheck::new(
                    "lemma at most (I - H(T)) / n",
                    Relation::AtMost,
                    lemma,
                    self.rate_lower_target(),
                ));
            }
            (
                Channel::Insertion { p_i },
                Method::RandomInsertion | Method::RandomInsertionCorrected,
            ) => {
                let parts = self.insertion_parts.ok_or_else(|| {
                    Error::Verification("insertion report without its entropy split".into())
                })?;
                let s3_defining = s3_coefficient(n)?;
                let s3_method = if method == Method::RandomInsertion {
                    s3_closed_form(n)?
                } else {
                    s3_defining
                };
                let multi = (closed.insertion_multi_bound)(n, p_i)?;
                let ub = (closed.insertion_single_part)(n, p_i, s3_defining)? + multi;
                let ub_method = (closed.insertion_single_part)(n, p_i, s3_method)? + multi;
                out.push(ChainCheck::new(
                    "output entropy equals n(1+p_i) + H(T)",
                    Relation::Equal,
                    self.output_entropy,
                    (closed.insertion_output_entropy)(n, p_i)?,
                ));
                // A single symbol has no insertion split; only the output
                // entropy identity applies.
                if n >= 2 {
                    out.push(ChainCheck::new(
                        "zero/one-insertion entropy equals its closed form",
                        Relation::Equal,
                        parts.single_part,
                        (closed.insertion_single_part)(n, p_i, s3_defining)?,
                    ));
                    out.push(ChainCheck::new(
                        "multi-insertion entropy at most the equiprobable value on its support",
                        Relation::AtMost,
                        parts.multi_part,
                        parts.equiprobable_actual,
                    ));
                    out.push(ChainCheck::new(
                        "equiprobable value on the support at most the value on all words",
                        Relation::AtMost,
                        parts.equiprobable_actual,
                        parts.equiprobable_full,
                    ));
                    out.push(ChainCheck::new(
                        "equiprobable value on all words at most its closed form",
                        Relation::AtMost,
                        parts.equiprobable_full,
                        multi,
                    ));
                    out.push(ChainCheck::new(
                        "conditional entropy at most its upper bound",
                        Relation::AtMost,
                        self.conditional_entropy,
                        ub,
                    ));
                    if method == Method::RandomInsertion {
                        out.push(ChainCheck::new(
                            "conditional entropy at most the upper bound with the rewritten S3",
                            Relation::AtMost,
                            self.conditional_entropy,
                            ub_method,
                        ));
                    }
                    let lemma = bounds::insertion_bound_with(method, n, p_i, s3_method)?.rate;
                    out.push(ChainCheck::new(
                        "lemma equals (closed-form H(Y) - upper bound - H(T)) / n",
                        Relation::Equal,
                        lemma,
                        ((closed.insertion_output_entropy)(n, p_i)?
                            - ub_method
                            - self.block_entropy)
                            / nf,
                    ));
                    out.push(ChainCheck::new(
                        "lemma at most (I - H(T)) / n",
                        Relation::AtMost,
                        lemma,
                        self.rate_lower_target(),
                    ));
                }
            }
            _ => {
                return Err(Error::domain(format!(
                    "no exact chain for {method} on this channel"
                )));
            }
        }
        out.push(ChainCheck::new(
            "(I - H(T)) / n at most I / n",
            Relation::AtMost,
            self.rate_lower_target(),
            self.mutual_information / nf,
        ));
        out.push(ChainCheck::new(
            "mutual information is nonnegative",
            Relation::AtMost,
            0.0,
            self.mutual_information,
        ));
        out.push(ChainCheck::new(
            "mutual information at most min(n, log2 |support|)",
            Relation::AtMost,
            self.mutual_information,
            nf.min((self.support_size as f64).log2()),
        ));
        Ok(out)
    }
}

/// Exact report for `method` at `(n, params)` with the chain built against
/// `closed`.
pub fn exact_report(
    method: Method,
    n: usize,
    params: &ChannelParams,
    closed: &ClosedForm,
) -> Result<EntropyReport> {
    let mut report = match method {
        Method::DeletionSubstitution => {
            exact_deletion_substitution_entropies(n, params.p_d(), params.p_e())?
        }
        Method::DeletionOnly => exact_deletion_substitution_entropies(n, params.p_d(), 0.0)?,
        Method::RandomInsertion | Method::RandomInsertionCorrected => {
            exact_insertion_entropies(n, params.p_i())?
        }
        _ => return Err(Error::domain(format!("no exact oracle for {method}"))),
    };
    report.bound_chain = report.chain(method, closed)?;
    Ok(report)
}

/// Runs the bound chain for `method` and fails with the offending tuple on
/// the first violated link.
pub fn bound_chain_check(
    method: Method,
    n: usize,
    params: &ChannelParams,
) -> Result<Vec<ChainCheck>> {
    let report = exact_report(method, n, params, &ClosedForm::default())?;
    if let Some(bad) = report.bound_chain.iter().find(|c| !c.passed) {
        return Err(Error::Verification(format!(
            "{method} n={n} p_d={} p_e={} p_i={}: '{}' violated (lhs {:.12}, rhs {:.12}, margin {:.3e})",
            params.p_d(),
            params.p_e(),
            params.p_i(),
            bad.name,
            bad.lhs,
            bad.rhs,
            bad.margin
        )));
    }
    Ok(report.bound_chain)
}

#[cfg(test)]
mod tests;
