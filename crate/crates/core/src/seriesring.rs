//! Sparse Laurent series supported in a pointed cone, truncated by a rational
//! level functional, and their extensions by powers of `log lambda_j`.
//!
//! A [`ConeSeries`] carries a grading `w` and a bound `B`. The contract is:
//! every coefficient of level `w . u <= B` is exact, and nothing above `B` is
//! stored. Operations keep that contract, lowering or raising `B` as needed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{int_rational, parse_rational, rational_string};
use crate::config::{IntTuple, Relation};
use crate::error::{Error, Result};

pub use crate::arith::{p_valuation, Valuation};

pub type Exponent = Vec<i64>;

/// Level of `u` under `grading`.
pub fn level_of(grading: &[BigRational], u: &[i64]) -> BigRational {
    grading
        .iter()
        .zip(u)
        .filter(|(_, &x)| x != 0)
        .fold(BigRational::zero(), |acc, (w, &x)| acc + w * int_rational(x))
}

fn add_exp(a: &[i64], b: &[i64]) -> Exponent {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_exp(a: &[i64], b: &[i64]) -> Exponent {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSeries {
    grading: Vec<BigRational>,
    bound: BigRational,
    terms: BTreeMap<Exponent, BigRational>,
}

impl ConeSeries {
    pub fn zero(grading: Vec<BigRational>, bound: BigRational) -> Self {
        ConeSeries {
            grading,
            bound,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(grading: Vec<BigRational>, bound: BigRational) -> Self {
        let mut s = Self::zero(grading, bound);
        s.add_term_raw(vec![0; s.nvars()], BigRational::one());
        s
    }

    /// The single-term series `c * lambda^u`, checked against the cone.
    pub fn monomial(grading: Vec<BigRational>, bound: BigRational, u: Exponent, c: BigRational) -> Result<Self> {
        let mut s = Self::zero(grading, bound);
        s.insert(u, c)?;
        Ok(s)
    }

    /// The grading `-e_k / 1`, under which `lambda^l` has level `-l_k`.
    pub fn orthant_grading(nvars: usize, k: usize) -> Vec<BigRational> {
        (1..=nvars)
            .map(|j| if j == k { int_rational(-1) } else { BigRational::zero() })
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.grading.len()
    }

    pub fn grading(&self) -> &[BigRational] {
        &self.grading
    }

    pub fn bound(&self) -> &BigRational {
        &self.bound
    }

    pub fn level(&self, u: &[i64]) -> BigRational {
        level_of(&self.grading, u)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    /// Terms sorted by level, then lexicographically.
    pub fn terms_by_level(&self) -> Vec<(BigRational, &Exponent, &BigRational)> {
        let mut v: Vec<_> = self
            .terms
            .iter()
            .map(|(u, c)| (self.level(u), u, c))
            .collect();
        v.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
        v
    }

    pub fn coefficient(&self, u: &[i64]) -> BigRational {
        self.terms.get(u).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coefficient(&vec![0; self.nvars()])
    }

    /// Adds `c * lambda^u`. Terms above the bound are dropped; exponents
    /// outside the pointed cone are rejected.
    pub fn insert(&mut self, u: Exponent, c: BigRational) -> Result<()> {
        if u.len() != self.nvars() {
            return Err(Error::GradingMismatch);
        }
        let level = self.level(&u);
        let is_origin = u.iter().all(|&x| x == 0);
        if !is_origin && !level.is_positive() {
            return Err(Error::OutsideCone {
                exponent: u,
                level: rational_string(&level),
            });
        }
        if level <= self.bound {
            self.add_term_raw(u, c);
        }
        Ok(())
    }

    /// Adds a term without any cone or bound check. Used for operator
    /// outputs, whose support is a shifted cone.
    pub(crate) fn add_term_raw(&mut self, u: Exponent, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(u) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// True when every stored exponent other than the origin has positive level.
    pub fn has_pointed_support(&self) -> bool {
        self.terms
            .keys()
            .all(|u| u.iter().all(|&x| x == 0) || self.level(u).is_positive())
    }

    fn same_frame(&self, other: &Self) -> Result<()> {
        if self.grading != other.grading || self.bound != other.bound {
            Err(Error::GradingMismatch)
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_frame(other)?;
        let mut out = self.clone();
        for (u, c) in &other.terms {
            out.add_term_raw(u.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.grading.clone(), self.bound.clone());
        }
        ConeSeries {
            grading: self.grading.clone(),
            bound: self.bound.clone(),
            terms: self.terms.iter().map(|(u, x)| (u.clone(), x * c)).collect(),
        }
    }

    /// Product truncated at the shared bound.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_frame(other)?;
        let mut out = Self::zero(self.grading.clone(), self.bound.clone());
        let rhs: Vec<(&Exponent, &BigRational, BigRational)> = other
            .terms
            .iter()
            .map(|(u, c)| (u, c, other.level(u)))
            .collect();
        for (u, a) in &self.terms {
            let lu = self.level(u);
            for (v, b, lv) in &rhs {
                if &lu + lv <= self.bound {
                    out.add_term_raw(add_exp(u, v), a * *b);
                }
            }
        }
        Ok(out)
    }

    /// Exponents reachable from the origin by adding elements of `steps`,
    /// staying at level `<= bound`, sorted by level then lexicographically.
    fn additive_closure(&self, steps: &[(Exponent, BigRational)]) -> Vec<(Exponent, BigRational)> {
        let origin = vec![0i64; self.nvars()];
        let mut seen: BTreeSet<Exponent> = BTreeSet::new();
        let mut out = vec![(origin.clone(), BigRational::zero())];
        seen.insert(origin);
        let mut frontier = 0;
        while frontier < out.len() {
            let (u, lu) = out[frontier].clone();
            frontier += 1;
            for (s, ls) in steps {
                let l = &lu + ls;
                if l > self.bound {
                    continue;
                }
                let v = add_exp(&u, s);
                if seen.insert(v.clone()) {
                    out.push((v, l));
                }
            }
        }
        out.sort_by(|a, b| (&a.1, &a.0).cmp(&(&b.1, &b.0)));
        out
    }

    fn positive_steps(&self) -> Result<Vec<(Exponent, BigRational, BigRational)>> {
        let mut steps = Vec::new();
        for (u, c) in &self.terms {
            if u.iter().all(|&x| x == 0) {
                continue;
            }
            let l = self.level(u);
            if !l.is_positive() {
                return Err(Error::OutsideCone {
                    exponent: u.clone(),
                    level: rational_string(&l),
                });
            }
            steps.push((u.clone(), l, c.clone()));
        }
        Ok(steps)
    }

    /// `exp(f)` for `f` without constant term.
    ///
    /// With `D` the level-weighted Euler derivation, `D(exp f) = D(f) exp f`
    /// gives `level(u) E_u = sum_v level(v) f_v E_{u - v}`, solved in level order.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let steps = self.positive_steps()?;
        let order = self.additive_closure(
            &steps.iter().map(|(u, l, _)| (u.clone(), l.clone())).collect::<Vec<_>>(),
        );
        let weighted: Vec<(&Exponent, BigRational)> =
            steps.iter().map(|(u, l, c)| (u, l * c)).collect();
        let mut coeffs: BTreeMap<Exponent, BigRational> = BTreeMap::new();
        let mut out = Self::zero(self.grading.clone(), self.bound.clone());
        for (u, lu) in order {
            let c = if lu.is_zero() {
                BigRational::one()
            } else {
                let mut acc = BigRational::zero();
                for (v, wv) in &weighted {
                    if let Some(e) = coeffs.get(&sub_exp(&u, v)) {
                        acc += wv * e;
                    }
                }
                acc / lu
            };
            if !c.is_zero() {
                coeffs.insert(u.clone(), c.clone());
                out.add_term_raw(u, c);
            }
        }
        Ok(out)
    }

    /// Multiplicative inverse of a series with nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NotInvertible);
        }
        let steps = self.positive_steps()?;
        let order = self.additive_closure(
            &steps.iter().map(|(u, l, _)| (u.clone(), l.clone())).collect::<Vec<_>>(),
        );
        let inv0 = c0.recip();
        let mut coeffs: BTreeMap<Exponent, BigRational> = BTreeMap::new();
        let mut out = Self::zero(self.grading.clone(), self.bound.clone());
        for (u, lu) in order {
            let c = if lu.is_zero() {
                inv0.clone()
            } else {
                let mut acc = BigRational::zero();
                for (v, _, fv) in &steps {
                    if let Some(g) = coeffs.get(&sub_exp(&u, v)) {
                        acc += fv * g;
                    }
                }
                -acc * &inv0
            };
            if !c.is_zero() {
                coeffs.insert(u.clone(), c.clone());
                out.add_term_raw(u, c);
            }
        }
        Ok(out)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Self::one(self.grading.clone(), self.bound.clone());
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc)
    }

    /// `f(lambda^p)`: exponents scaled by `p`, bound scaled by `p`.
    pub fn substitute_power(&self, p: u32) -> Self {
        let p = p as i64;
        ConeSeries {
            grading: self.grading.clone(),
            bound: &self.bound * int_rational(p),
            terms: self
                .terms
                .iter()
                .map(|(u, c)| (u.iter().map(|x| x * p).collect(), c.clone()))
                .collect(),
        }
    }

    /// Drops terms above `bound`. The new bound must not exceed the old one.
    pub fn truncate(&self, bound: &BigRational) -> Result<Self> {
        if bound > &self.bound {
            return Err(Error::InsufficientTruncation {
                have: rational_string(&self.bound),
                need: rational_string(bound),
            });
        }
        Ok(ConeSeries {
            grading: self.grading.clone(),
            bound: bound.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(u, _)| &self.level(u) <= bound)
                .map(|(u, c)| (u.clone(), c.clone()))
                .collect(),
        })
    }

    /// Re-expresses the series under another grading. The caller asserts that
    /// every coefficient of new level `<= bound` is already present.
    pub fn regrade(&self, grading: Vec<BigRational>, bound: BigRational) -> Result<Self> {
        if grading.len() != self.nvars() {
            return Err(Error::GradingMismatch);
        }
        let mut out = Self::zero(grading, bound);
        for (u, c) in &self.terms {
            out.insert(u.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            grading: self.grading.iter().map(rational_string).collect(),
            bound: rational_string(&self.bound),
            terms: self
                .terms_by_level()
                .into_iter()
                .map(|(_, u, c)| TermJson {
                    u: u.clone(),
                    c: rational_string(c),
                })
                .collect(),
        }
    }

    /// Rebuilds a series from its JSON form, re-checking every invariant.
    pub fn from_json(json: &SeriesJson) -> Result<Self> {
        let grading = json
            .grading
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        let bound = parse_rational(&json.bound)?;
        let mut out = Self::zero(grading, bound);
        for t in &json.terms {
            let c = parse_rational(&t.c)?;
            if c.is_zero() {
                return Err(Error::Parse(format!("zero coefficient stored at {:?}", t.u)));
            }
            if out.terms.contains_key(&t.u) {
                return Err(Error::Parse(format!("duplicate exponent {:?}", t.u)));
            }
            if out.level(&t.u) > out.bound {
                return Err(Error::Parse(format!("exponent {:?} above bound", t.u)));
            }
            out.insert(t.u.clone(), c)?;
        }
        Ok(out)
    }
}

impl fmt::Display for ConeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms_by_level();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (_, u, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let origin = u.iter().all(|&x| x == 0);
            if origin {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "λ^{}", IntTuple(u))?;
            } else {
                write!(f, "{mag}·λ^{}", IntTuple(u))?;
            }
        }
        Ok(())
    }
}

/// `{"grading": [rat], "bound": rat, "terms": [{"u": [int], "c": "num/den"}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    pub grading: Vec<String>,
    pub bound: String,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub u: Vec<i64>,
    pub c: String,
}

/// Log-multidegree: exponent of each `log lambda_j`.
pub type LogDegree = Vec<u32>;

/// `sum_alpha prod_j (log lambda_j)^{alpha_j} * S_alpha(lambda)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogSeries {
    grading: Vec<BigRational>,
    bound: BigRational,
    parts: BTreeMap<LogDegree, ConeSeries>,
}

impl LogSeries {
    pub fn zero(grading: Vec<BigRational>, bound: BigRational) -> Self {
        LogSeries {
            grading,
            bound,
            parts: BTreeMap::new(),
        }
    }

    pub fn from_series(s: ConeSeries) -> Self {
        let mut out = Self::zero(s.grading.clone(), s.bound.clone());
        if !s.is_zero() {
            out.parts.insert(vec![0; s.nvars()], s);
        }
        out
    }

    /// `c * log lambda_j` (1-based `j`).
    pub fn log_monomial(grading: Vec<BigRational>, bound: BigRational, j: usize, c: BigRational) -> Self {
        let n = grading.len();
        let mut out = Self::zero(grading.clone(), bound.clone());
        if !c.is_zero() {
            let mut alpha = vec![0; n];
            alpha[j - 1] = 1;
            let mut s = ConeSeries::zero(grading, bound);
            s.add_term_raw(vec![0; n], c);
            out.parts.insert(alpha, s);
        }
        out
    }

    /// `log lambda^l = sum_j l_j log lambda_j`.
    pub fn log_of_monomial(grading: Vec<BigRational>, bound: BigRational, l: &[i64]) -> Self {
        let mut out = Self::zero(grading.clone(), bound.clone());
        for (j, &lj) in l.iter().enumerate() {
            if lj != 0 {
                let t = Self::log_monomial(grading.clone(), bound.clone(), j + 1, int_rational(lj));
                out = out.add(&t).expect("same frame");
            }
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.grading.len()
    }

    pub fn grading(&self) -> &[BigRational] {
        &self.grading
    }

    pub fn bound(&self) -> &BigRational {
        &self.bound
    }

    pub fn parts(&self) -> impl Iterator<Item = (&LogDegree, &ConeSeries)> {
        self.parts.iter()
    }

    pub fn part(&self, alpha: &[u32]) -> Option<&ConeSeries> {
        self.parts.get(alpha)
    }

    /// The log-free part.
    pub fn series_part(&self) -> ConeSeries {
        self.parts
            .get(&vec![0; self.nvars()])
            .cloned()
            .unwrap_or_else(|| ConeSeries::zero(self.grading.clone(), self.bound.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.parts.values().all(ConeSeries::is_zero)
    }

    pub fn log_degree(&self) -> u32 {
        self.parts
            .keys()
            .map(|a| a.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn part_mut(&mut self, alpha: LogDegree) -> &mut ConeSeries {
        let (g, b) = (self.grading.clone(), self.bound.clone());
        self.parts
            .entry(alpha)
            .or_insert_with(|| ConeSeries::zero(g, b))
    }

    fn prune(&mut self) {
        self.parts.retain(|_, s| !s.is_zero());
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grading != other.grading || self.bound != other.bound {
            return Err(Error::GradingMismatch);
        }
        let mut out = self.clone();
        for (alpha, s) in &other.parts {
            let p = out.part_mut(alpha.clone());
            for (u, c) in &s.terms {
                p.add_term_raw(u.clone(), c.clone());
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.grading.clone(), self.bound.clone());
        if !c.is_zero() {
            out.parts = self
                .parts
                .iter()
                .map(|(a, s)| (a.clone(), s.scale(c)))
                .collect();
        }
        out
    }

    pub fn truncate(&self, bound: &BigRational) -> Result<Self> {
        let mut out = Self::zero(self.grading.clone(), bound.clone());
        for (a, s) in &self.parts {
            out.parts.insert(a.clone(), s.truncate(bound)?);
        }
        out.prune();
        Ok(out)
    }

    /// `d/d lambda_j` (1-based). Exponents shift by `-e_j`, so the bound
    /// shifts by `-w_j`.
    pub fn derivative(&self, j: usize) -> Self {
        let idx = j - 1;
        let bound = &self.bound - &self.grading[idx];
        let mut out = Self::zero(self.grading.clone(), bound);
        for (alpha, s) in &self.parts {
            let a = alpha[idx];
            for (u, c) in &s.terms {
                let mut v = u.clone();
                v[idx] -= 1;
                if u[idx] != 0 {
                    out.part_mut(alpha.clone())
                        .add_term_raw(v.clone(), c * int_rational(u[idx]));
                }
                if a > 0 {
                    let mut lower = alpha.clone();
                    lower[idx] -= 1;
                    out.part_mut(lower)
                        .add_term_raw(v, c * int_rational(a as i64));
                }
            }
        }
        out.prune();
        out
    }

    /// `prod_j (d/d lambda_j)^{orders_j}`.
    pub fn derivative_multi(&self, orders: &[i64]) -> Self {
        let mut out = self.clone();
        for (j, &o) in orders.iter().enumerate() {
            for _ in 0..o {
                out = out.derivative(j + 1);
            }
        }
        out
    }

    /// `box_l f = prod_{l_j > 0} d_j^{l_j} f - prod_{l_j < 0} d_j^{-l_j} f`,
    /// valid up to the smaller of the two shifted bounds.
    pub fn apply_box(&self, l: &Relation) -> Self {
        let plus = self.derivative_multi(&l.positive_part());
        let minus = self.derivative_multi(&l.negative_part());
        let bound = plus.bound.clone().min(minus.bound.clone());
        let plus = plus.truncate(&bound).expect("bound is the minimum");
        let minus = minus.truncate(&bound).expect("bound is the minimum");
        plus.sub(&minus).expect("same frame")
    }

    /// `theta_j = lambda_j d/d lambda_j` (1-based); preserves exponents.
    pub fn theta(&self, j: usize) -> Self {
        let idx = j - 1;
        let mut out = Self::zero(self.grading.clone(), self.bound.clone());
        for (alpha, s) in &self.parts {
            let a = alpha[idx];
            for (u, c) in &s.terms {
                if u[idx] != 0 {
                    out.part_mut(alpha.clone())
                        .add_term_raw(u.clone(), c * int_rational(u[idx]));
                }
                if a > 0 {
                    let mut lower = alpha.clone();
                    lower[idx] -= 1;
                    out.part_mut(lower)
                        .add_term_raw(u.clone(), c * int_rational(a as i64));
                }
            }
        }
        out.prune();
        out
    }

    /// `sum_j coeffs_j theta_j`.
    pub fn euler_combination(&self, coeffs: &[i64]) -> Self {
        let mut out = Self::zero(self.grading.clone(), self.bound.clone());
        for (j, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                out = out
                    .add(&self.theta(j + 1).scale(&int_rational(c)))
                    .expect("same frame");
            }
        }
        out
    }

    /// First nonzero coefficient in (log degree, level, exponent) order.
    pub fn first_term(&self) -> Option<(LogDegree, Exponent, BigRational)> {
        self.parts.iter().find_map(|(a, s)| {
            s.terms_by_level()
                .first()
                .map(|(_, u, c)| (a.clone(), (*u).clone(), (*c).clone()))
        })
    }
}

impl fmt::Display for LogSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (alpha, s)) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let logs: Vec<String> = alpha
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(j, &a)| {
                    if a == 1 {
                        format!("log λ{}", j + 1)
                    } else {
                        format!("(log λ{})^{a}", j + 1)
                    }
                })
                .collect();
            if logs.is_empty() {
                write!(f, "[{s}]")?;
            } else {
                write!(f, "[{s}]·{}", logs.join("·"))?;
            }
        }
        Ok(())
    }
}

/// `true` when `c` is an integer.
pub fn has_unit_denominator(c: &BigRational) -> bool {
    c.denom() == &BigInt::one()
}
