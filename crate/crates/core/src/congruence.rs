//! Divisibility of multinomial coefficients:
//!
//! * `p^(a-b)` divides `(e; e_1..e_N)`, where `p^a || e` and `p^b` is the
//!   largest power dividing every `e_i`;
//! * `p^(a+1)` divides `(pe; pe_1..pe_N) - (e; e_1..e_N)`.

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{factorials, require_prime, valuation_int, valuation_u64, valuation_uint, Valuation};
use crate::error::Result;
use crate::report::{Report, Verdict, Witness};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    parts: Vec<u64>,
}

impl MultiIndex {
    pub fn new(parts: Vec<u64>) -> Self {
        MultiIndex { parts }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn total(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn scaled(&self, p: u64) -> MultiIndex {
        MultiIndex::new(self.parts.iter().map(|e| e * p).collect())
    }

    /// `a = v_p(e)`.
    pub fn total_valuation(&self, p: u64) -> Valuation {
        valuation_u64(self.total(), p)
    }

    /// `b = min_i v_p(e_i)`; zero parts impose no constraint.
    pub fn common_valuation(&self, p: u64) -> Valuation {
        self.parts
            .iter()
            .map(|&e| valuation_u64(e, p))
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    fn as_i64(&self) -> Vec<i64> {
        self.parts.iter().map(|&e| e as i64).collect()
    }
}

/// `C(n, k)` by the running product `prod_{i=1..k} (n-k+i)/i`, exact at every step.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= BigUint::from(n - k + i);
        acc /= BigUint::from(i);
    }
    acc
}

/// `e! / prod e_i!` as a product of binomials `C(e_1 + .. + e_i, e_i)`.
pub fn multinomial(m: &MultiIndex) -> BigUint {
    let mut running = 0u64;
    let mut acc = BigUint::one();
    for &e in m.parts() {
        running += e;
        acc *= binomial(running, e);
    }
    acc
}

/// `e! / prod e_i!` from full factorials; an independent route to [`multinomial`].
pub fn multinomial_by_factorials(m: &MultiIndex) -> BigUint {
    let fact = factorials(m.total() as usize);
    let den = m
        .parts()
        .iter()
        .fold(BigUint::one(), |acc, &e| acc * &fact[e as usize]);
    &fact[m.total() as usize] / den
}

/// Checks `v_p(multinomial) >= a - b` (with `inf - inf = 0`).
pub fn check_prop31(m: &MultiIndex, p: u64) -> Result<Report> {
    require_prime(p)?;
    let target = format!("{:?} p={p}", m.parts());
    let a = m.total_valuation(p);
    let b = m.common_valuation(p);
    let needed = a.checked_sub(b).expect("a >= b since e is the sum of the parts");
    let v = valuation_uint(&multinomial(m), p);
    let ok = v >= needed;
    let mut r = Report::new("multinomial-divisibility", target, Verdict::from_bool(ok))
        .stat("a", a)
        .stat("b", b);
    if !ok {
        r.witness = Some(
            Witness::new(m.as_i64(), multinomial(m).to_string())
                .with_valuation(v)
                .with_note(format!("needs v_p >= {needed}")),
        );
    }
    Ok(r)
}

/// Checks `v_p(multinomial(p m) - multinomial(m)) >= a + 1`.
pub fn check_prop32(m: &MultiIndex, p: u64) -> Result<Report> {
    require_prime(p)?;
    let target = format!("{:?} p={p}", m.parts());
    let a = m.total_valuation(p);
    let diff = BigInt::from(multinomial(&m.scaled(p))) - BigInt::from(multinomial(m));
    let v = valuation_int(&diff, p);
    let needed = a.plus(1);
    let ok = v == Valuation::Infinite || v >= needed;
    let mut r = Report::new("multinomial-frobenius", target, Verdict::from_bool(ok)).stat("a", a);
    if !ok {
        r.witness = Some(
            Witness::new(m.as_i64(), diff.to_string())
                .with_valuation(v)
                .with_note(format!("needs v_p >= {needed}")),
        );
    }
    Ok(r)
}

/// Calls `f` on every multi-index with `1 <= N <= n_max` parts and total
/// `<= e_max`, ordered by total, then N, then lexicographically.
pub fn for_each_multi_index(n_max: usize, e_max: u64, mut f: impl FnMut(&MultiIndex) -> Result<bool>) -> Result<()> {
    fn rec(
        parts: &mut Vec<u64>,
        slots: usize,
        remaining: u64,
        f: &mut dyn FnMut(&MultiIndex) -> Result<bool>,
    ) -> Result<bool> {
        if slots == 1 {
            parts.push(remaining);
            let go = f(&MultiIndex::new(parts.clone()))?;
            parts.pop();
            return Ok(go);
        }
        for v in 0..=remaining {
            parts.push(v);
            let go = rec(parts, slots - 1, remaining - v, f)?;
            parts.pop();
            if !go {
                return Ok(false);
            }
        }
        Ok(true)
    }
    for total in 0..=e_max {
        for n in 1..=n_max {
            if !rec(&mut Vec::new(), n, total, &mut f)? {
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Exhaustive self-test of both divisibility statements and of the two
/// multinomial routes. Stops at the first (hence minimal) counterexample.
pub fn scan_congruences(n_max: usize, e_max: u64, primes: &[u64]) -> Result<Report> {
    for &p in primes {
        require_prime(p)?;
    }
    let mut cases = 0u64;
    let mut failure: Option<Report> = None;
    for_each_multi_index(n_max, e_max, |m| {
        if multinomial(m) != multinomial_by_factorials(m) {
            failure = Some(
                Report::new("multinomial-oracle", format!("{:?}", m.parts()), Verdict::Fail).with_witness(Some(
                    Witness::new(m.as_i64(), multinomial(m).to_string())
                        .with_note(format!("factorial route gives {}", multinomial_by_factorials(m))),
                )),
            );
            return Ok(false);
        }
        for &p in primes {
            cases += 1;
            for r in [check_prop31(m, p)?, check_prop32(m, p)?] {
                if r.failed() {
                    failure = Some(r);
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })?;
    let primes_s: Vec<String> = primes.iter().map(u64::to_string).collect();
    let mut report = Report::pass(
        "congruence-scan",
        format!("N<={n_max} total<={e_max} primes={{{}}}", primes_s.join(",")),
    )
    .stat("cases", cases);
    if let Some(f) = failure {
        report.push(f);
    }
    Ok(report)
}
