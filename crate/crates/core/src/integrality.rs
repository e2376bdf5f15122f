//! Integrality of `exp G_k` and of mirror maps.
//!
//! Two routes are provided for the p-integrality of `exp G_k`: the series
//! route forms `p G_k(lambda) - G_k(lambda^p)` and reads off valuations; the
//! congruence route evaluates the equivalent coefficient conditions term by
//! term from factorials and multinomials, without any series arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{int_rational, is_integral, p_valuation, rational_string, require_prime, Valuation};
use crate::config::{enumerate_orthant, AConfiguration, Relation, SearchLimits};
use crate::congruence::{multinomial, MultiIndex};
use crate::error::{Error, Result};
use crate::report::{Report, Verdict, Witness};
use crate::seriesring::ConeSeries;
use crate::solutions::{build_all_gk, combined_series, common_frame, gk_coefficient, GkSeries};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeVerdict {
    pub prime: u64,
    pub verdict: Verdict,
    pub terms_checked: usize,
    /// Term with the smallest margin `v_p(c) - 1`.
    pub worst_witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralityReport {
    pub target: String,
    pub levels_checked: String,
    pub primes: Vec<u64>,
    pub per_prime: Vec<PrimeVerdict>,
    pub verdict: Verdict,
    pub worst_witness: Option<Witness>,
}

impl IntegralityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_report(&self, check: &str) -> Report {
        let mut r = Report::new(check, self.target.clone(), self.verdict)
            .with_witness(self.worst_witness.clone())
            .with_valid_level(&self.levels_checked);
        for pv in &self.per_prime {
            let child = Report::new(check, format!("{} p={}", self.target, pv.prime), pv.verdict)
                .with_witness(pv.worst_witness.clone())
                .with_valid_level(&self.levels_checked)
                .stat("terms", pv.terms_checked);
            r.details.push(child);
        }
        r
    }
}

fn require_level(gk: &GkSeries, m_max: u32) -> Result<()> {
    if gk.m_max < m_max {
        Err(Error::InsufficientTruncation {
            have: gk.m_max.to_string(),
            need: m_max.to_string(),
        })
    } else {
        Ok(())
    }
}

fn gk_target(gk: &GkSeries) -> String {
    format!("G_{}", gk.k)
}

/// `p G_k(lambda) - G_k(lambda^p)` up to level `m_max`.
pub fn frobenius_difference(gk: &GkSeries, p: u64, m_max: u32) -> Result<ConeSeries> {
    require_level(gk, m_max)?;
    let bound = int_rational(m_max as i64);
    let g = gk.series.truncate(&bound)?;
    let frob = g.substitute_power(p as u32).truncate(&bound)?;
    g.scale(&int_rational(p as i64)).sub(&frob)
}

fn dwork_one_prime(gk: &GkSeries, p: u64, m_max: u32) -> Result<PrimeVerdict> {
    require_prime(p)?;
    let diff = frobenius_difference(gk, p, m_max)?;
    let mut worst: Option<(Valuation, Witness)> = None;
    for (_, u, c) in diff.terms_by_level() {
        let v = p_valuation(c, p)?;
        if worst.as_ref().is_none_or(|(wv, _)| v < *wv) {
            let margin = v.plus(-1);
            let w = Witness::new(u.clone(), rational_string(c))
                .with_valuation(v)
                .with_note(format!("margin {margin}"));
            worst = Some((v, w));
        }
    }
    let ok = worst.as_ref().is_none_or(|(v, _)| *v >= Valuation::Finite(1));
    Ok(PrimeVerdict {
        prime: p,
        verdict: Verdict::from_bool(ok),
        terms_checked: diff.len(),
        worst_witness: worst.map(|(_, w)| w),
    })
}

/// Every coefficient of `p G_k(lambda) - G_k(lambda^p)` of level `<= m_max`
/// must lie in `p Z_p`.
pub fn dwork_criterion(gk: &GkSeries, p: u64, m_max: u32) -> Result<IntegralityReport> {
    dwork_criterion_primes(gk, &[p], m_max)
}

pub fn dwork_criterion_primes(gk: &GkSeries, primes: &[u64], m_max: u32) -> Result<IntegralityReport> {
    let per_prime = primes
        .iter()
        .map(|&p| dwork_one_prime(gk, p, m_max))
        .collect::<Result<Vec<_>>>()?;
    let verdict = Verdict::from_bool(per_prime.iter().all(|v| v.verdict == Verdict::Pass));
    let worst_witness = per_prime
        .iter()
        .find(|v| v.verdict.is_fail())
        .and_then(|v| v.worst_witness.clone());
    Ok(IntegralityReport {
        target: gk_target(gk),
        levels_checked: m_max.to_string(),
        primes: primes.to_vec(),
        per_prime,
        verdict,
        worst_witness,
    })
}

fn denominator_report(target: String, levels: String, s: &ConeSeries) -> IntegralityReport {
    let bad = s
        .terms_by_level()
        .into_iter()
        .find(|(_, _, c)| !is_integral(c))
        .map(|(_, u, c)| Witness::new(u.clone(), rational_string(c)).with_note("non-integral coefficient"));
    IntegralityReport {
        target,
        levels_checked: levels,
        primes: Vec::new(),
        per_prime: Vec::new(),
        verdict: Verdict::from_bool(bad.is_none()),
        worst_witness: bad,
    }
}

/// `exp G_k` to level `m_max`, and whether every coefficient is an integer.
pub fn exp_integrality(gk: &GkSeries, m_max: u32) -> Result<(ConeSeries, IntegralityReport)> {
    require_level(gk, m_max)?;
    let e = gk.series.truncate(&int_rational(m_max as i64))?.exp()?;
    let report = denominator_report(format!("exp G_{}", gk.k), m_max.to_string(), &e);
    Ok((e, report))
}

/// The mirror map for `relation`, as the series `q / lambda^l = exp(sum_k l_k G_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirrorMap {
    pub relation: Relation,
    pub series: ConeSeries,
    /// `prod_k (exp G_k)^{l_k}`, computed independently of `series`.
    pub product_form: ConeSeries,
    pub report: IntegralityReport,
}

impl MirrorMap {
    pub fn forms_agree(&self) -> bool {
        self.series == self.product_form
    }
}

/// Builds `q / lambda^l` with `G_k` enumerated to `-l_k <= m_max`, cross-checks
/// the exponential of the sum against the product of powers, and tests every
/// coefficient for integrality.
pub fn mirror_map(cfg: &AConfiguration, relation: &Relation, m_max: u32, limits: SearchLimits) -> Result<MirrorMap> {
    if !cfg.is_relation(relation.entries()) {
        return Err(Error::NotARelation(relation.entries().to_vec()));
    }
    let gks = build_all_gk(cfg, m_max, limits)?;
    mirror_map_from(cfg, relation, &gks)
}

pub fn mirror_map_from(cfg: &AConfiguration, relation: &Relation, gks: &[GkSeries]) -> Result<MirrorMap> {
    let frame = common_frame(cfg, relation, gks)?;
    let sum = combined_series(relation, gks, &frame)?;
    let series = sum.exp()?;
    let mut product_form = ConeSeries::one(frame.grading.clone(), frame.bound.clone());
    for &k in &frame.active {
        let g = gks[k - 1]
            .series
            .regrade(frame.grading.clone(), frame.bound.clone())?;
        product_form = product_form.mul(&g.exp()?.pow(relation.get(k))?)?;
    }
    let target = format!("q/λ^{relation}");
    let mut report = denominator_report(target, rational_string(&frame.bound), &series);
    if series != product_form {
        report.verdict = Verdict::Fail;
        report.worst_witness = Some(
            Witness::new(relation.entries().to_vec(), "0")
                .with_note("exp of the sum differs from the product of powers"),
        );
    }
    Ok(MirrorMap {
        relation: relation.clone(),
        series,
        product_form,
        report,
    })
}

fn m_of(l: &Relation, k: usize) -> u64 {
    (-l.get(k)) as u64
}

fn other_parts(l: &Relation, k: usize) -> MultiIndex {
    MultiIndex::new(
        l.entries()
            .iter()
            .enumerate()
            .filter(|(j, _)| j + 1 != k)
            .map(|(_, &x)| x as u64)
            .collect(),
    )
}

fn in_p_zp(c: &BigRational, p: u64) -> Result<(bool, Valuation)> {
    let v = p_valuation(c, p)?;
    Ok((v >= Valuation::Finite(1), v))
}

fn in_zp(c: &BigRational, p: u64) -> Result<(bool, Valuation)> {
    let v = p_valuation(c, p)?;
    Ok((v >= Valuation::Finite(0), v))
}

/// Term-by-term conditions equivalent to the Frobenius criterion for `G_k`,
/// evaluated from closed-form coefficients.
///
/// For each enumerated `l in L_k` and prime `p`:
/// * if `p` does not divide every `l_j`: `p c(l) in p Z_p`, equivalently
///   `(1/m) (m; l_j) in Z_p` with `m = -l_k`;
/// * always: `p c(pl) - c(l) in p Z_p`, equivalently
///   `(1/m) ((pm; pl_j) - (m; l_j)) in p Z_p`; when `p = 2` and `m` is odd
///   the signs differ and the sum form `(1/m) ((2m; 2l_j) + (m; l_j))` is
///   checked as well.
pub fn verify_orthant_congruences(
    cfg: &AConfiguration,
    k: usize,
    m_max: u32,
    primes: &[u64],
    limits: SearchLimits,
) -> Result<Report> {
    for &p in primes {
        require_prime(p)?;
    }
    let set = enumerate_orthant(cfg, k, m_max, limits)?;
    let mut report = Report::pass("orthant-congruences", format!("G_{k}"))
        .with_valid_level(m_max)
        .stat("relations", set.relations.len());
    for &p in primes {
        let mut child = Report::pass("orthant-congruences", format!("G_{k} p={p}")).with_valid_level(m_max);
        let mut counts = [0usize; 3];
        let mut first_failure: Option<Witness> = None;
        let mut record = |label: &str, l: &Relation, c: &BigRational, (ok, v): (bool, Valuation)| {
            if !ok && first_failure.is_none() {
                first_failure = Some(
                    Witness::new(l.entries().to_vec(), rational_string(c))
                        .with_valuation(v)
                        .with_note(label.to_string()),
                );
            }
        };
        for l in &set.relations {
            let m = m_of(l, k);
            let parts = other_parts(l, k);
            let inv_m = BigRational::new(BigInt::one(), BigInt::from(m));
            let mult = BigInt::from(multinomial(&parts));
            let c_l = gk_coefficient(l, k);
            let pl = l.scaled(p as i64);

            if l.gcd() % p != 0 {
                counts[0] += 1;
                let scaled = &c_l * int_rational(p as i64);
                record("primitive-term", l, &scaled, in_p_zp(&scaled, p)?);
                let reduced = BigRational::from_integer(mult.clone()) * &inv_m;
                record("primitive-term-multinomial", l, &reduced, in_zp(&reduced, p)?);
            }

            counts[1] += 1;
            let c_pl = gk_coefficient(&pl, k);
            let frob = c_pl * int_rational(p as i64) - &c_l;
            record("frobenius-term", l, &frob, in_p_zp(&frob, p)?);

            let mult_p = BigInt::from(multinomial(&parts.scaled(p)));
            let diff = BigRational::from_integer(&mult_p - &mult) * &inv_m;
            record("frobenius-term-multinomial", l, &diff, in_p_zp(&diff, p)?);
            if p == 2 && m % 2 == 1 {
                counts[2] += 1;
                let sum = BigRational::from_integer(&mult_p + &mult) * &inv_m;
                record("frobenius-term-sign-flip", l, &sum, in_p_zp(&sum, p)?);
            }
        }
        child = child
            .stat("primitive_terms", counts[0])
            .stat("frobenius_terms", counts[1])
            .stat("sign_flip_terms", counts[2]);
        if let Some(w) = first_failure {
            child.verdict = Verdict::Fail;
            child.witness = Some(w);
        }
        report.push(child);
    }
    Ok(report)
}

/// `true` when `c` is zero or has nonnegative valuation at every prime in `primes`.
pub fn p_integral_for(c: &BigRational, primes: &[u64]) -> Result<bool> {
    if c.is_zero() {
        return Ok(true);
    }
    for &p in primes {
        if p_valuation(c, p)? < Valuation::Finite(0) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_configuration;
    use crate::solutions::build_gk;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn e1() -> AConfiguration {
        validate_configuration(1, vec![vec![1], vec![1]]).unwrap()
    }

    fn e2() -> AConfiguration {
        validate_configuration(2, vec![vec![1, 0], vec![0, 1], vec![2, -1]]).unwrap()
    }

    fn lim() -> SearchLimits {
        SearchLimits::default()
    }

    #[test]
    fn dwork_e1_p3() {
        let g = build_gk(&e1(), 2, 9, lim()).unwrap();
        let r = dwork_criterion(&g, 3, 9).unwrap();
        assert!(r.passed());
        let w = r.per_prime[0].worst_witness.as_ref().unwrap();
        // first term of minimal valuation: m = 1, coefficient 3.
        assert_eq!(w.u, vec![1, -1]);
        assert_eq!(w.valuation.as_deref(), Some("1"));
        assert_eq!(w.note.as_deref(), Some("margin 0"));
    }

    #[test]
    fn dwork_e2_p2_and_zero() {
        let g = build_gk(&e2(), 1, 10, lim()).unwrap();
        assert!(dwork_criterion(&g, 2, 10).unwrap().passed());
        let z = build_gk(&e2(), 2, 10, lim()).unwrap();
        let r = dwork_criterion(&z, 5, 10).unwrap();
        assert!(r.passed());
        assert_eq!(r.per_prime[0].terms_checked, 0);
    }

    #[test]
    fn dwork_needs_enough_terms() {
        let g = build_gk(&e1(), 2, 4, lim()).unwrap();
        assert!(matches!(dwork_criterion(&g, 2, 8), Err(Error::InsufficientTruncation { .. })));
        assert_eq!(dwork_criterion(&g, 6, 4), Err(Error::NotPrime(6)));
    }

    #[test]
    fn dwork_flags_non_integral_series() {
        // G_2 / 2 = log(1 + x) / 2, whose exponential sqrt(1 + x) is not 2-integral.
        let mut g = build_gk(&e1(), 2, 8, lim()).unwrap();
        g.series = g.series.scale(&q(1, 2));
        assert!(!dwork_criterion(&g, 2, 8).unwrap().passed());
        assert!(!exp_integrality(&g, 8).unwrap().1.passed());
    }

    #[test]
    fn exp_e1_is_binomial() {
        let g = build_gk(&e1(), 2, 10, lim()).unwrap();
        let (e, r) = exp_integrality(&g, 10).unwrap();
        assert!(r.passed());
        assert_eq!(e.len(), 2);
        assert_eq!(e.constant_term(), q(1, 1));
        assert_eq!(e.coefficient(&[1, -1]), q(1, 1));
    }

    #[test]
    fn exp_e2_catalan() {
        let g = build_gk(&e2(), 1, 12, lim()).unwrap();
        let (e, r) = exp_integrality(&g, 12).unwrap();
        assert!(r.passed());
        let expect = [1, -1, -1, -2, -5, -14, -42];
        for (t, &c) in expect.iter().enumerate() {
            let t = t as i64;
            assert_eq!(e.coefficient(&[-2 * t, t, t]), q(c, 1));
        }
    }

    #[test]
    fn exp_of_zero_gk_is_one() {
        let g = build_gk(&e2(), 3, 6, lim()).unwrap();
        let (e, r) = exp_integrality(&g, 6).unwrap();
        assert!(r.passed());
        assert_eq!(e, ConeSeries::one(g.series.grading().to_vec(), int_rational(6)));
    }

    #[test]
    fn mirror_examples() {
        let cfg = e2();
        let mm = mirror_map(&cfg, &Relation::from_entries(vec![-2, 1, 1]), 12, lim()).unwrap();
        assert!(mm.report.passed() && mm.forms_agree());
        // exp G_1 = 1/c(x) with c the Catalan series, so q / x = c(x)^2 = sum C_{t+1} x^t.
        let expect = [1, 2, 5, 14, 42, 132, 429];
        for (t, &c) in expect.iter().enumerate() {
            let t = t as i64;
            assert_eq!(mm.series.coefficient(&[-2 * t, t, t]), q(c, 1));
        }

        let zero = mirror_map(&cfg, &Relation::from_entries(vec![0, 0, 0]), 6, lim()).unwrap();
        assert!(zero.report.passed());
        assert_eq!(zero.series.len(), 1);
        assert_eq!(zero.series.constant_term(), q(1, 1));

        assert!(matches!(
            mirror_map(&e1(), &Relation::from_entries(vec![1, -1]), 6, lim()),
            Err(Error::NotPointed { .. })
        ));
    }

    #[test]
    fn congruence_examples() {
        let r = verify_orthant_congruences(&e2(), 1, 4, &[2, 3], lim()).unwrap();
        assert!(r.passed(), "{r}");
        let r = verify_orthant_congruences(&e1(), 2, 1, &[2], lim()).unwrap();
        assert!(r.passed());
        assert_eq!(r.details[0].stats["sign_flip_terms"], "1");
    }

    #[test]
    fn congruence_multinomial_values() {
        // E2, l = (-2,1,1), p = 3: (1/2)((6;3,3) - (2;1,1)) = 9.
        let parts = MultiIndex::new(vec![1, 1]);
        let d = BigInt::from(multinomial(&parts.scaled(3))) - BigInt::from(multinomial(&parts));
        assert_eq!(BigRational::from_integer(d) / int_rational(2), q(9, 1));
    }
}
