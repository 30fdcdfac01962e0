use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, xlog2x};

/// A binary word of length at most 64, packed MSB-first: symbol `i` is bit
/// `len - 1 - i` of `bits`. Ordered by length, then lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Word {
    len: u8,
    bits: u64,
}

impl Word {
    pub const EMPTY: Word = Word { len: 0, bits: 0 };

    pub fn new(len: usize, bits: u64) -> Result<Self> {
        if len > 64 {
            return Err(Error::domain(format!(
                "words are limited to 64 symbols, got {len}"
            )));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::domain(format!(
                "value {bits:#x} does not fit in {len} bits"
            )));
        }
        Ok(Word {
            len: len as u8,
            bits,
        })
    }

    pub(crate) fn from_raw(len: usize, bits: u64) -> Self {
        debug_assert!(len <= 64 && (len == 64 || bits >> len == 0));
        Word {
            len: len as u8,
            bits,
        }
    }

    pub fn from_bits(symbols: &[u8]) -> Result<Self> {
        if symbols.len() > 64 {
            return Err(Error::domain(format!(
                "words are limited to 64 symbols, got {}",
                symbols.len()
            )));
        }
        let mut bits = 0u64;
        for &s in symbols {
            if s > 1 {
                return Err(Error::domain(format!("binary word contains symbol {s}")));
            }
            bits = bits << 1 | s as u64;
        }
        Ok(Word {
            len: symbols.len() as u8,
            bits,
        })
    }

    pub fn to_bits(self) -> Vec<u8> {
        (0..self.len()).map(|i| self.bit(i)).collect()
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    /// Symbol at position `i`, counted from the left.
    pub fn bit(self, i: usize) -> u8 {
        (self.bits >> (self.len() - 1 - i) & 1) as u8
    }

    /// All `2^len` words of one length, in increasing order.
    pub fn all(len: usize) -> impl Iterator<Item = Word> {
        assert!(len < 64);
        (0..1u64 << len).map(move |b| Word::from_raw(len, b))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("(empty)");
        }
        for i in 0..self.len() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    /// Probabilities are integer counts times an exact rational per length.
    Rational,
    /// Double precision with compensated summation.
    Float,
}

/// Exact rational part of a distribution: `P(y) = count(y) * scale[|y|]`.
#[derive(Debug, Clone)]
struct RationalLaw {
    counts: Vec<u128>,
    scales: BTreeMap<usize, BigRational>,
}

/// A finite law over binary words, sorted by word.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    words: Vec<Word>,
    probs: Vec<f64>,
    rational: Option<RationalLaw>,
    residual: f64,
}

impl ExactDistribution {
    /// Builds a float law; entries with zero probability are dropped.
    #[cfg(test)]
    pub(crate) fn from_float(mut entries: Vec<(Word, f64)>) -> Self {
        entries.retain(|e| e.1 > 0.0);
        entries.sort_by_key(|e| e.0);
        let (words, probs): (Vec<Word>, Vec<f64>) = entries.into_iter().unzip();
        let residual = (compensated_sum(probs.iter().copied()) - 1.0).abs();
        ExactDistribution {
            words,
            probs,
            rational: None,
            residual,
        }
    }

    /// Builds a law from integer counts and a rational scale per output
    /// length; `float_scale` holds the same scales in double precision.
    pub(crate) fn from_counts(
        mut entries: Vec<(Word, u128)>,
        scales: BTreeMap<usize, BigRational>,
        float_scale: &BTreeMap<usize, f64>,
        keep_rational: bool,
    ) -> Self {
        entries.retain(|e| e.1 > 0);
        entries.sort_by_key(|e| e.0);
        let probs: Vec<f64> = entries
            .iter()
            .map(|&(w, c)| c as f64 * float_scale[&w.len()])
            .collect();
        let residual = (compensated_sum(probs.iter().copied()) - 1.0).abs();
        let (words, counts): (Vec<Word>, Vec<u128>) = entries.into_iter().unzip();
        let rational = keep_rational.then_some(RationalLaw { counts, scales });
        ExactDistribution {
            words,
            probs,
            rational,
            residual,
        }
    }

    pub fn arithmetic(&self) -> Arithmetic {
        if self.rational.is_some() {
            Arithmetic::Rational
        } else {
            Arithmetic::Float
        }
    }

    /// Number of words with positive probability.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        self.words.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn probability(&self, w: &Word) -> f64 {
        self.words
            .binary_search(w)
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }

    /// The exact probability in rational mode.
    pub fn exact_probability(&self, w: &Word) -> Option<BigRational> {
        let law = self.rational.as_ref()?;
        Some(match self.words.binary_search(w) {
            Ok(i) => {
                law.scales[&w.len()].clone()
                    * BigRational::from_integer(BigInt::from(law.counts[i]))
            }
            Err(_) => BigRational::zero(),
        })
    }

    /// Exact total mass in rational mode.
    pub fn exact_total(&self) -> Option<BigRational> {
        let law = self.rational.as_ref()?;
        let mut per_len: BTreeMap<usize, u128> = BTreeMap::new();
        for (w, &c) in self.words.iter().zip(&law.counts) {
            *per_len.entry(w.len()).or_default() += c;
        }
        let mut total = BigRational::zero();
        for (len, c) in per_len {
            total += law.scales[&len].clone() * BigRational::from_integer(BigInt::from(c));
        }
        Some(total)
    }

    /// `|Σ P - 1|` in floating point.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Whether the mass is exactly one; `None` in float mode.
    pub fn is_exactly_normalized(&self) -> Option<bool> {
        self.exact_total().map(|t| t.is_one())
    }

    pub fn entropy(&self) -> f64 {
        -compensated_sum(self.probs.iter().map(|&p| xlog2x(p)))
    }

    /// Total probability of each output length.
    pub fn length_masses(&self) -> BTreeMap<usize, f64> {
        let mut out: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (w, p) in self.iter() {
            out.entry(w.len()).or_default().push(p);
        }
        out.into_iter()
            .map(|(k, v)| (k, compensated_sum(v)))
            .collect()
    }

    /// Checks that every word of length `m` has probability
    /// `2^{-m} mass(m)`, i.e. the law is uniform within each length class and
    /// supported on all words of that length. Exact in rational mode;
    /// otherwise to `rel_tol`.
    pub fn uniform_within_lengths(&self, rel_tol: f64) -> bool {
        let mut by_len: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, w) in self.words.iter().enumerate() {
            by_len.entry(w.len()).or_default().push(i);
        }
        by_len.into_iter().all(|(len, idx)| {
            if idx.len() as u128 != 1u128 << len {
                return false;
            }
            match &self.rational {
                Some(law) => idx.iter().all(|&i| law.counts[i] == law.counts[idx[0]]),
                None => {
                    let p0 = self.probs[idx[0]];
                    idx.iter()
                        .all(|&i| (self.probs[i] - p0).abs() <= rel_tol * p0)
                }
            }
        })
    }
}
