//! Binomial block entropies in 320-bit fixed point, independent of the
//! log-gamma and log-sum-exp machinery used by the bounds.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{check_probability, Error, Result};

/// Largest `n` accepted by [`exact_block_entropy`].
pub const PRECISE_MAX_N: u64 = 64;

/// Fractional bits of the fixed-point logarithms.
const FRAC_BITS: u64 = 320;

/// `floor(log2(x) * 2^FRAC_BITS)` up to a few units in the last place,
/// by repeated squaring of the mantissa.
fn log2_fixed(x: &BigUint) -> BigInt {
    debug_assert!(!x.is_zero());
    let e = x.bits() - 1;
    let mut m = if e >= FRAC_BITS {
        x >> (e - FRAC_BITS)
    } else {
        x << (FRAC_BITS - e)
    };
    let two = BigUint::one() << (FRAC_BITS + 1);
    let mut out = BigInt::from(e) << FRAC_BITS;
    for bit in (0..FRAC_BITS).rev() {
        m = (&m * &m) >> FRAC_BITS;
        if m >= two {
            m >>= 1;
            out += BigInt::one() << bit;
        }
    }
    out
}

fn fixed_to_f64(x: &BigInt) -> f64 {
    // Keep 64 fractional bits so the conversion stays in range.
    let shifted: BigInt = x >> (FRAC_BITS - 64);
    shifted.to_f64().unwrap_or(f64::NAN) / 2f64.powi(64)
}

fn exact_rational(p: f64) -> Result<BigRational> {
    check_probability("p", p)?;
    BigRational::from_float(p)
        .ok_or_else(|| Error::domain(format!("{p} is not a finite probability")))
}

fn binomial(n: u64, k: u64) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// `(numerator, denominator)` of `C(n, j) p^j (1-p)^{n-j}` for the exact
/// binary value of `p`.
fn pmf_parts(n: u64, j: u64, p: &BigRational) -> (BigUint, BigUint) {
    let q = BigRational::one() - p;
    let value = BigRational::from_integer(BigInt::from(binomial(n, j)))
        * num_traits::pow(p.clone(), j as usize)
        * num_traits::pow(q, (n - j) as usize);
    let (num, den) = value.into_raw();
    (num.magnitude().clone(), den.magnitude().clone())
}

/// `log2 P(T = j)` for `T ~ Binomial(n, p)`, from the exact rational pmf.
pub fn exact_binomial_log2_pmf(n: u64, j: u64, p: f64) -> Result<f64> {
    if j > n {
        return Err(Error::domain(format!("j = {j} exceeds n = {n}")));
    }
    let (num, den) = pmf_parts(n, j, &exact_rational(p)?);
    if num.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(fixed_to_f64(&(log2_fixed(&num) - log2_fixed(&den))))
}

/// `H(T)` for `T ~ Binomial(n, p)`, `n <= 64`, summed in fixed point with
/// the pmf taken as an exact rational; accurate to well below `1e-15`
/// relative before the final rounding.
pub fn exact_block_entropy(n: u64, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("block entropy needs n >= 1"));
    }
    if n > PRECISE_MAX_N {
        return Err(Error::Resource(format!(
            "high-precision block entropy is limited to n = {PRECISE_MAX_N}"
        )));
    }
    let p = exact_rational(p)?;
    let mut total = BigInt::zero();
    for j in 0..=n {
        let (num, den) = pmf_parts(n, j, &p);
        if num.is_zero() {
            continue;
        }
        let log = log2_fixed(&num) - log2_fixed(&den);
        let (prob, _) = (num << FRAC_BITS).div_rem(&den);
        total -= (BigInt::from(prob) * log) >> FRAC_BITS;
    }
    Ok(fixed_to_f64(&total.max(BigInt::zero())))
}
