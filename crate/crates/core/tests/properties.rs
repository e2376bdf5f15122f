//! Randomized invariants, each compared against an independent route.

use gkz_core::arith::{int_rational, valuation_uint, Valuation};
use gkz_core::config::{
    enumerate_orthant, kernel_basis, lattice_coordinates, validate_configuration, Relation, SearchLimits,
};
use gkz_core::congruence::{check_prop31, check_prop32, multinomial, multinomial_by_factorials, MultiIndex};
use gkz_core::seriesring::SeriesJson;
use gkz_core::{ConeSeries, LogSeries};
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Two variables graded by total degree.
fn frame(bound: i64) -> (Vec<BigRational>, BigRational) {
    (vec![int_rational(1), int_rational(1)], int_rational(bound))
}

fn series_from(terms: &[((i64, i64), (i64, i64))], bound: i64, constant: Option<(i64, i64)>) -> ConeSeries {
    let (w, b) = frame(bound);
    let mut s = ConeSeries::zero(w, b);
    for &((a, c), (n, d)) in terms {
        if a == 0 && c == 0 {
            continue;
        }
        s.insert(vec![a, c], q(n, d)).unwrap();
    }
    if let Some((n, d)) = constant {
        s.insert(vec![0, 0], q(n, d)).unwrap();
    }
    s
}

fn term() -> impl Strategy<Value = ((i64, i64), (i64, i64))> {
    ((0i64..4, 0i64..4), (-6i64..7, 1i64..5))
}

fn terms() -> impl Strategy<Value = Vec<((i64, i64), (i64, i64))>> {
    prop::collection::vec(term(), 0..6)
}

/// `sum_{n <= bound} f^n / n!`: the defining power sum, valid because every
/// nonconstant term of `f` has level at least 1.
fn exp_by_power_sum(f: &ConeSeries, bound: i64) -> ConeSeries {
    let (w, b) = frame(bound);
    let mut acc = ConeSeries::one(w.clone(), b.clone());
    let mut power = ConeSeries::one(w, b);
    let mut fact = BigRational::one();
    for n in 1..=bound {
        power = power.mul(f).unwrap();
        fact *= int_rational(n);
        acc = acc.add(&power.scale(&fact.recip())).unwrap();
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in terms(), b in terms(), c in terms(), bound in 2i64..7) {
        let f = series_from(&a, bound, Some((1, 2)));
        let g = series_from(&b, bound, None);
        let h = series_from(&c, bound, Some((-3, 1)));
        prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
        prop_assert_eq!(f.mul(&g).unwrap().mul(&h).unwrap(), f.mul(&g.mul(&h).unwrap()).unwrap());
        prop_assert_eq!(
            f.add(&g).unwrap().mul(&h).unwrap(),
            f.mul(&h).unwrap().add(&g.mul(&h).unwrap()).unwrap()
        );
        let (w, bd) = frame(bound);
        prop_assert_eq!(f.mul(&ConeSeries::one(w, bd)).unwrap(), f.clone());
        prop_assert!(f.sub(&f).unwrap().is_zero());
    }

    #[test]
    fn exp_matches_power_sum(a in terms(), bound in 1i64..7) {
        let f = series_from(&a, bound, None);
        prop_assert_eq!(f.exp().unwrap(), exp_by_power_sum(&f, bound));
    }

    #[test]
    fn exp_is_a_homomorphism(a in terms(), b in terms(), bound in 1i64..7) {
        let f = series_from(&a, bound, None);
        let g = series_from(&b, bound, None);
        let lhs = f.add(&g).unwrap().exp().unwrap();
        let rhs = f.exp().unwrap().mul(&g.exp().unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_and_negative_powers(a in terms(), c0 in prop_oneof![-3i64..0, 1i64..4], e in 1i64..4, bound in 1i64..7) {
        let f = series_from(&a, bound, Some((c0, 1)));
        let (w, bd) = frame(bound);
        let one = ConeSeries::one(w, bd);
        let inv = f.inverse().unwrap();
        prop_assert_eq!(f.mul(&inv).unwrap(), one.clone());
        prop_assert_eq!(f.pow(-e).unwrap().mul(&f.pow(e).unwrap()).unwrap(), one);
        prop_assert_eq!(f.pow(-e).unwrap(), f.pow(e).unwrap().inverse().unwrap());
    }

    #[test]
    fn frobenius_substitution_is_multiplicative(a in terms(), b in terms(), p in prop::sample::select(vec![2u32, 3, 5]), bound in 1i64..5) {
        let f = series_from(&a, bound, Some((1, 1)));
        let g = series_from(&b, bound, None);
        let lhs = f.mul(&g).unwrap().substitute_power(p);
        let rhs = f.substitute_power(p).mul(&g.substitute_power(p)).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(
            f.add(&g).unwrap().substitute_power(p),
            f.substitute_power(p).add(&g.substitute_power(p)).unwrap()
        );
    }

    #[test]
    fn json_round_trip(a in terms(), bound in 1i64..7) {
        let f = series_from(&a, bound, Some((5, 3)));
        let text = serde_json::to_string(&f.to_json()).unwrap();
        let back: SeriesJson = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(ConeSeries::from_json(&back).unwrap(), f);
    }

    #[test]
    fn derivatives_commute(a in terms(), i in 1usize..3, j in 1usize..3, bound in 2i64..7) {
        let (w, bd) = frame(bound);
        let f = LogSeries::from_series(series_from(&a, bound, Some((1, 1))))
            .add(&LogSeries::log_monomial(w, bd, 1, q(2, 1)))
            .unwrap();
        let ij = f.derivative(i).derivative(j);
        let ji = f.derivative(j).derivative(i);
        prop_assert_eq!(ij.bound(), ji.bound());
        prop_assert_eq!(ij.sub(&ji).unwrap().is_zero(), true);
    }
}

/// Random configurations with `n <= 3`, `2 <= N <= 5`: vectors `(1, x)` with
/// small `x`, then a shear mixing the first coordinate into the others, so a
/// unit form always exists but is not always `e_1`.
fn configuration() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1usize..4).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(prop::collection::vec(-2i64..3, n - 1), 2..6),
            prop::collection::vec(-2i64..3, n - 1),
        )
            .prop_map(|(n, tails, shear)| {
                let vectors = tails
                    .into_iter()
                    .map(|t| {
                        let mut v = vec![1i64];
                        v.extend(t.iter().zip(&shear).map(|(x, s)| x + s));
                        v
                    })
                    .collect();
                (n, vectors)
            })
    })
}

/// All `l` with `l_k = -m`, the other entries nonnegative and summing to `m`
/// (forced by the unit form), filtered by the relation condition.
fn brute_force_orthant(vectors: &[Vec<i64>], k: usize, m_max: i64) -> Vec<Vec<i64>> {
    fn compositions(slots: usize, total: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if slots == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=total {
            prefix.push(v);
            compositions(slots - 1, total - v, prefix, out);
            prefix.pop();
        }
    }
    let big_n = vectors.len();
    let dim = vectors[0].len();
    let mut found = Vec::new();
    for m in 1..=m_max {
        let mut comps = Vec::new();
        compositions(big_n - 1, m, &mut Vec::new(), &mut comps);
        for c in comps {
            let mut l = Vec::with_capacity(big_n);
            let mut it = c.into_iter();
            for j in 0..big_n {
                l.push(if j == k - 1 { -m } else { it.next().unwrap() });
            }
            let zero = (0..dim).all(|i| (0..big_n).map(|j| l[j] * vectors[j][i]).sum::<i64>() == 0);
            if zero {
                found.push(l);
            }
        }
    }
    found.sort_by(|x, y| (-x[k - 1], x).cmp(&(-y[k - 1], y)));
    found
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn orthant_enumeration_matches_brute_force((n, vectors) in configuration(), m_max in 1u32..7) {
        let cfg = validate_configuration(n, vectors.clone()).unwrap();
        for k in 1..=cfg.len() {
            let set = enumerate_orthant(&cfg, k, m_max, SearchLimits::default()).unwrap();
            prop_assert!(set.complete);
            let got: Vec<Vec<i64>> = set.relations.iter().map(|l| l.entries().to_vec()).collect();
            prop_assert_eq!(got, brute_force_orthant(&vectors, k, m_max as i64));
        }
    }

    #[test]
    fn orthant_members_lie_in_the_kernel_lattice((n, vectors) in configuration(), m_max in 1u32..6) {
        let cfg = validate_configuration(n, vectors).unwrap();
        let basis = kernel_basis(&cfg).unwrap();
        for b in &basis {
            prop_assert!(cfg.is_relation(b.entries()));
        }
        for k in 1..=cfg.len() {
            for l in enumerate_orthant(&cfg, k, m_max, SearchLimits::default()).unwrap().relations {
                prop_assert!(lattice_coordinates(&basis, l.entries()).is_some(), "{} not in span", l);
            }
        }
    }

    #[test]
    fn kernel_coordinates_recover_combinations((n, vectors) in configuration(), coeffs in prop::collection::vec(-3i64..4, 4)) {
        let cfg = validate_configuration(n, vectors).unwrap();
        let basis = kernel_basis(&cfg).unwrap();
        prop_assume!(!basis.is_empty());
        let mut l = vec![0i64; cfg.len()];
        for (b, &c) in basis.iter().zip(coeffs.iter().cycle()) {
            for (x, y) in l.iter_mut().zip(b.entries()) {
                *x += c * y;
            }
        }
        let coords = lattice_coordinates(&basis, &l).unwrap();
        for (got, &want) in coords.iter().zip(coeffs.iter().cycle()) {
            prop_assert_eq!(got.clone(), want.into());
        }
        prop_assert!(cfg.is_relation(Relation::from_entries(l).entries()));
    }
}

fn digit_sum(mut n: u64, p: u64) -> u64 {
    let mut s = 0;
    while n > 0 {
        s += n % p;
        n /= p;
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Legendre: `v_p(e! / prod e_i!) = (sum_i s_p(e_i) - s_p(e)) / (p - 1)`.
    #[test]
    fn multinomial_valuation_matches_digit_sums(
        parts in prop::collection::vec(0u64..40, 1..5),
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
    ) {
        let m = MultiIndex::new(parts.clone());
        let value = multinomial(&m);
        prop_assert_eq!(&value, &multinomial_by_factorials(&m));
        let carries = parts.iter().map(|&e| digit_sum(e, p)).sum::<u64>() - digit_sum(m.total(), p);
        prop_assert_eq!(carries % (p - 1), 0);
        prop_assert_eq!(valuation_uint(&value, p), Valuation::Finite((carries / (p - 1)) as i64));
    }

    #[test]
    fn divisibility_statements_hold_beyond_the_scan(
        parts in prop::collection::vec(0u64..30, 1..5),
        p in prop::sample::select(vec![2u64, 3, 5, 7]),
    ) {
        let m = MultiIndex::new(parts);
        prop_assert!(check_prop31(&m, p).unwrap().passed());
        prop_assert!(check_prop32(&m, p).unwrap().passed());
    }
}

#[test]
fn zero_series_is_additive_identity() {
    let f = series_from(&[((1, 0), (1, 1))], 3, None);
    let (w, b) = frame(3);
    assert_eq!(f.add(&ConeSeries::zero(w, b)).unwrap(), f);
}
