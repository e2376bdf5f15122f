//! Pointedness of the cone generated by the orthant relations, decided by
//! exact linear programming. Either side of the answer carries a certificate
//! that is re-verified in exact arithmetic.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{int_rational, primitive_integer_ray, rational_string};
use crate::config::{enumerate_orthant, AConfiguration, Relation, SearchLimits};
use crate::error::{Error, Result};
use crate::report::{Report, Verdict, Witness};
use crate::simplex::{minimize, LpOutcome};

/// A functional `w` with `w . g >= 1` on every certified generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointednessCertificate {
    #[serde(with = "rational_vec")]
    pub w: Vec<BigRational>,
    pub generators: Vec<Relation>,
    #[serde(with = "rational_vec")]
    pub margins: Vec<BigRational>,
}

impl PointednessCertificate {
    /// Recomputes every margin from scratch.
    pub fn verify(&self) -> bool {
        self.generators.len() == self.margins.len()
            && self.generators.iter().zip(&self.margins).all(|(g, m)| {
                let exact = dot(&self.w, g.entries());
                &exact == m && exact >= BigRational::one()
            })
    }
}

/// Nonnegative integers `c_g`, not all zero, with `sum_g c_g g = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonPointedWitness {
    pub generators: Vec<Relation>,
    pub multipliers: Vec<i64>,
}

impl NonPointedWitness {
    pub fn verify(&self) -> bool {
        if self.generators.len() != self.multipliers.len()
            || self.multipliers.iter().any(|&c| c < 0)
            || self.multipliers.iter().all(|&c| c == 0)
        {
            return false;
        }
        let n = self.generators.first().map_or(0, Relation::len);
        (0..n).all(|j| {
            self.generators
                .iter()
                .zip(&self.multipliers)
                .map(|(g, &c)| g.entries()[j] as i128 * c as i128)
                .sum::<i128>()
                == 0
        })
    }

    /// Only the generators with positive multiplier, paired with it.
    pub fn support(&self) -> Vec<(&Relation, i64)> {
        self.generators
            .iter()
            .zip(&self.multipliers)
            .filter(|(_, &c)| c > 0)
            .map(|(g, &c)| (g, c))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeCertificate {
    Pointed(PointednessCertificate),
    NotPointed(NonPointedWitness),
}

impl ConeCertificate {
    pub fn verify(&self) -> bool {
        match self {
            ConeCertificate::Pointed(c) => c.verify(),
            ConeCertificate::NotPointed(w) => w.verify(),
        }
    }

    pub fn is_pointed(&self) -> bool {
        matches!(self, ConeCertificate::Pointed(_))
    }
}

fn dot(w: &[BigRational], g: &[i64]) -> BigRational {
    w.iter()
        .zip(g)
        .filter(|(_, &x)| x != 0)
        .fold(BigRational::zero(), |acc, (wi, &x)| acc + wi * int_rational(x))
}

/// `min |w|_1` subject to `w . g >= 1` for `g` in `gens`, or `None` if infeasible.
fn min_norm_grading(gens: &[&Relation], nvars: usize) -> Option<Vec<BigRational>> {
    let m = gens.len();
    // Columns: w+ (nvars), w- (nvars), surplus (m).
    let width = 2 * nvars + m;
    let a: Vec<Vec<BigRational>> = gens
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut row = vec![BigRational::zero(); width];
            for (j, &x) in g.entries().iter().enumerate() {
                row[j] = int_rational(x);
                row[nvars + j] = int_rational(-x);
            }
            row[2 * nvars + i] = int_rational(-1);
            row
        })
        .collect();
    let b = vec![BigRational::one(); m];
    let mut cost = vec![BigRational::one(); 2 * nvars];
    cost.extend((0..m).map(|_| BigRational::zero()));
    match minimize(&a, &b, &cost) {
        LpOutcome::Optimal { x, .. } => Some((0..nvars).map(|j| &x[j] - &x[nvars + j]).collect()),
        _ => None,
    }
}

/// Nonnegative `y` with `sum y_g g = 0`, `sum y_g = 1`, scaled to primitive integers.
fn gordan_dependency(gens: &[&Relation], nvars: usize) -> Vec<i64> {
    let m = gens.len();
    let mut a: Vec<Vec<BigRational>> = (0..nvars)
        .map(|j| gens.iter().map(|g| int_rational(g.entries()[j])).collect())
        .collect();
    a.push(vec![BigRational::one(); m]);
    let mut b = vec![BigRational::zero(); nvars];
    b.push(BigRational::one());
    let cost = vec![BigRational::zero(); m];
    match minimize(&a, &b, &cost) {
        LpOutcome::Optimal { x, .. } => primitive_integer_ray(&x)
            .iter()
            .map(|c| c.to_i64().expect("multiplier fits in i64"))
            .collect(),
        other => unreachable!("both Gordan alternatives failed: {other:?}"),
    }
}

/// Finds `w` with `w . g >= 1` for all generators (minimizing `|w|_1`), or a
/// nonnegative dependency `sum c_g g = 0` showing none exists.
///
/// The program is solved on a growing subset of the generators: after each
/// solve the margins are checked exactly on all of them and the most violated
/// ones are added. A solution feasible for every generator is optimal for the
/// full program, since the subset program is a relaxation of it.
pub fn pointedness_certificate(gens: &[Relation]) -> ConeCertificate {
    let nvars = gens.first().map_or(0, Relation::len);
    if gens.is_empty() {
        return ConeCertificate::Pointed(PointednessCertificate {
            w: Vec::new(),
            generators: Vec::new(),
            margins: Vec::new(),
        });
    }
    let batch = 2 * nvars + 1;
    let mut order: Vec<usize> = (0..gens.len()).collect();
    order.sort_by_key(|&i| (gens[i].entries().iter().map(|x| x.unsigned_abs()).sum::<u64>(), i));
    let mut active: Vec<usize> = order.into_iter().take(batch).collect();
    loop {
        active.sort_unstable();
        let subset: Vec<&Relation> = active.iter().map(|&i| &gens[i]).collect();
        let Some(w) = min_norm_grading(&subset, nvars) else {
            let local = gordan_dependency(&subset, nvars);
            let mut multipliers = vec![0i64; gens.len()];
            for (&i, c) in active.iter().zip(local) {
                multipliers[i] = c;
            }
            return ConeCertificate::NotPointed(NonPointedWitness {
                generators: gens.to_vec(),
                multipliers,
            });
        };
        let margins: Vec<BigRational> = gens.iter().map(|g| dot(&w, g.entries())).collect();
        let mut violated: Vec<usize> = (0..gens.len()).filter(|&i| margins[i] < BigRational::one()).collect();
        if violated.is_empty() {
            return ConeCertificate::Pointed(PointednessCertificate {
                w,
                generators: gens.to_vec(),
                margins,
            });
        }
        violated.sort_by(|&i, &j| margins[i].cmp(&margins[j]).then(i.cmp(&j)));
        active.extend(violated.into_iter().take(batch));
    }
}

/// Union of the enumerated `L_k`, `k = 1..N`, to `level`, in k order.
pub fn orthant_generators(cfg: &AConfiguration, level: u32, limits: SearchLimits) -> Result<Vec<Relation>> {
    let mut gens = Vec::new();
    for k in 1..=cfg.len() {
        gens.extend(enumerate_orthant(cfg, k, level, limits)?.relations);
    }
    Ok(gens)
}

/// A common grading for the given generators, or `NotPointed`.
pub fn common_grading(gens: &[Relation]) -> Result<PointednessCertificate> {
    match pointedness_certificate(gens) {
        ConeCertificate::Pointed(c) => Ok(c),
        ConeCertificate::NotPointed(w) => Err(Error::NotPointed {
            witness: Some(w.multipliers),
        }),
    }
}

/// `min { w . p : p in R^N, sum_j p_j a_j = 0, p_k = -1, p_j >= 0 (j != k) }`,
/// the smallest `w`-level per unit of `-l_k` on the real cone over `L_k`.
/// `None` when `L_k = {0}`.
pub fn orthant_min_level(cfg: &AConfiguration, k: usize, w: &[BigRational]) -> Option<BigRational> {
    let free: Vec<usize> = (1..=cfg.len()).filter(|&j| j != k).collect();
    let a: Vec<Vec<BigRational>> = (0..cfg.dim())
        .map(|i| free.iter().map(|&j| int_rational(cfg.vector(j)[i])).collect())
        .collect();
    let b: Vec<BigRational> = cfg.vector(k).iter().map(|&x| int_rational(x)).collect();
    let cost: Vec<BigRational> = free.iter().map(|&j| w[j - 1].clone()).collect();
    match minimize(&a, &b, &cost) {
        LpOutcome::Optimal { value, .. } => Some(value - &w[k - 1]),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("the unit form bounds the orthant slice"),
    }
}

/// Reports pairs `a_i = a_j`; such configurations fall outside the
/// distinct-vector hypothesis under which the orthant cone is pointed.
pub fn duplicate_vector_check(cfg: &AConfiguration) -> Report {
    let pairs = cfg.duplicate_pairs();
    let listed: Vec<String> = pairs.iter().map(|(i, j)| format!("({i},{j})")).collect();
    let listed = if listed.is_empty() { "none".to_string() } else { listed.join(" ") };
    let mut r = Report::pass("duplicate-vectors", cfg.to_string()).stat("duplicates", listed);
    if let Some(&(i, j)) = pairs.first() {
        r.witness = Some(
            Witness::new(vec![i as i64, j as i64], "0")
                .with_note("repeated vector: pointedness not guaranteed"),
        );
    }
    r
}

/// Runs the certificate search on generators to `level` and checks the answer
/// against the expectation (pointed iff the vectors are distinct).
pub fn cone_check(cfg: &AConfiguration, level: u32, limits: SearchLimits) -> Result<(ConeCertificate, Report)> {
    let gens = orthant_generators(cfg, level, limits)?;
    let cert = match pointedness_certificate(&gens) {
        // No generators: the zero functional on R^N certifies the trivial cone.
        ConeCertificate::Pointed(c) if gens.is_empty() => ConeCertificate::Pointed(PointednessCertificate {
            w: vec![BigRational::zero(); cfg.len()],
            ..c
        }),
        other => other,
    };
    let verified = cert.verify();
    let distinct = cfg.duplicate_pairs().is_empty();
    let consistent = cert.is_pointed() || !distinct;
    let mut r = Report::new("cone-pointedness", cfg.to_string(), Verdict::from_bool(verified && consistent))
        .with_valid_level(level)
        .stat("generators", gens.len())
        .stat("pointed", cert.is_pointed())
        .stat("certificate_verified", verified);
    match &cert {
        ConeCertificate::Pointed(c) => {
            r = r.stat("w", fmt_rationals(&c.w));
            if let Some((g, m)) = c.generators.iter().zip(&c.margins).min_by(|a, b| a.1.cmp(b.1)) {
                r.witness = Some(
                    Witness::new(g.entries().to_vec(), rational_string(m)).with_note("minimal margin w.g"),
                );
            }
        }
        ConeCertificate::NotPointed(w) => {
            let support = w.support();
            let desc: Vec<String> = support.iter().map(|(g, c)| format!("{c}*{g}")).collect();
            r = r.stat("dependency", desc.join(" + "));
            if let Some((g, c)) = support.first() {
                let note = if distinct {
                    "nonnegative dependency among generators of distinct vectors"
                } else {
                    "nonnegative dependency; configuration has repeated vectors"
                };
                r.witness = Some(Witness::new(g.entries().to_vec(), c.to_string()).with_note(note));
            }
        }
    }
    Ok((cert, r))
}

pub(crate) fn fmt_rationals(v: &[BigRational]) -> String {
    let parts: Vec<String> = v.iter().map(rational_string).collect();
    format!("({})", parts.join(","))
}

/// True when `w . g > 0` for every generator.
pub fn strictly_positive_on(w: &[BigRational], gens: &[Relation]) -> bool {
    gens.iter().all(|g| dot(w, g.entries()).is_positive())
}

mod rational_vec {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::arith::{parse_rational, rational_string};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(rational_string).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_configuration;

    fn rels(v: &[&[i64]]) -> Vec<Relation> {
        v.iter().map(|x| Relation::from_entries(x.to_vec())).collect()
    }

    #[test]
    fn single_ray_is_pointed() {
        match pointedness_certificate(&rels(&[&[-2, 1, 1]])) {
            ConeCertificate::Pointed(c) => {
                assert!(c.verify());
                assert!(c.margins[0] >= BigRational::one());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn opposite_rays_are_not_pointed() {
        match pointedness_certificate(&rels(&[&[1, -1], &[-1, 1]])) {
            ConeCertificate::NotPointed(w) => {
                assert!(w.verify());
                assert_eq!(w.multipliers, vec![1, 1]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_generators_are_pointed() {
        let c = pointedness_certificate(&[]);
        assert!(c.is_pointed() && c.verify());
    }

    #[test]
    fn duplicate_examples() {
        let e1 = validate_configuration(1, vec![vec![1], vec![1]]).unwrap();
        assert_eq!(duplicate_vector_check(&e1).stats["duplicates"], "(1,2)");
        let e2 = validate_configuration(2, vec![vec![1, 0], vec![0, 1], vec![2, -1]]).unwrap();
        assert!(duplicate_vector_check(&e2).witness.is_none());
    }

    #[test]
    fn orthant_min_level_e5() {
        let e5 = validate_configuration(2, vec![vec![1, 0], vec![0, 1], vec![2, -1], vec![-1, 2]])
            .unwrap();
        // Under w = -e_1 every element of L_1 has level exactly -l_1.
        let w = vec![int_rational(-1), BigRational::zero(), BigRational::zero(), BigRational::zero()];
        assert_eq!(orthant_min_level(&e5, 1, &w), Some(int_rational(1)));
        assert_eq!(orthant_min_level(&e5, 3, &w), None);
    }

    #[test]
    fn certificate_serializes() {
        let c = pointedness_certificate(&rels(&[&[-2, 1, 1]]));
        let text = serde_json::to_string(&c).unwrap();
        let back: ConeCertificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
