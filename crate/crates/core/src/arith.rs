//! Exact scalar helpers: p-adic valuations, primality, factorials and the
//! `"num/den"` string form used by every serialized coefficient.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A p-adic valuation; `Infinite` is the valuation of zero.
///
/// Variant order makes every finite value compare below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// `self - other`, with `inf - inf = 0` and `inf - finite = inf`.
    /// Returns `None` for `finite - inf`.
    pub fn checked_sub(self, other: Valuation) -> Option<Valuation> {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Some(Valuation::Finite(0)),
            (Valuation::Infinite, Valuation::Finite(_)) => Some(Valuation::Infinite),
            (Valuation::Finite(_), Valuation::Infinite) => None,
            (Valuation::Finite(a), Valuation::Finite(b)) => Some(Valuation::Finite(a - b)),
        }
    }

    pub fn plus(self, k: i64) -> Valuation {
        match self {
            Valuation::Finite(a) => Valuation::Finite(a + k),
            Valuation::Infinite => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// v_p of a nonzero unsigned integer; `Infinite` for zero. `p` must be prime.
pub fn valuation_uint(n: &BigUint, p: u64) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let p = BigUint::from(p);
    let mut n = n.clone();
    let mut v = 0i64;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        n = q;
        v += 1;
    }
}

pub fn valuation_int(n: &BigInt, p: u64) -> Valuation {
    valuation_uint(n.magnitude(), p)
}

pub fn valuation_u64(n: u64, p: u64) -> Valuation {
    if n == 0 {
        return Valuation::Infinite;
    }
    let (mut n, mut v) = (n, 0i64);
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Valuation::Finite(v)
}

/// v_p(c) = v_p(numerator) - v_p(denominator); `Infinite` for 0.
pub fn p_valuation(c: &BigRational, p: u64) -> Result<Valuation> {
    require_prime(p)?;
    if c.is_zero() {
        return Ok(Valuation::Infinite);
    }
    let num = valuation_int(c.numer(), p).finite().unwrap_or(0);
    let den = valuation_int(c.denom(), p).finite().unwrap_or(0);
    Ok(Valuation::Finite(num - den))
}

/// `0!, 1!, ..., n!`.
pub fn factorials(n: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = BigUint::one();
    out.push(acc.clone());
    for i in 1..=n {
        acc *= BigUint::from(i);
        out.push(acc.clone());
    }
    out
}

pub fn rational_string(c: &BigRational) -> String {
    c.to_string()
}

/// Parses `"a"` or `"a/b"` with decimal integers; rejects zero denominators.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

pub fn is_integral(c: &BigRational) -> bool {
    c.denom().is_one()
}

pub fn int_rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales a nonzero rational vector to the primitive integer vector on the same ray.
pub fn primitive_integer_ray(values: &[BigRational]) -> Vec<BigInt> {
    let den = common_denominator(values);
    let ints: Vec<BigInt> = values.iter().map(|v| (v * &den).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|v| v / &g).collect()
}
