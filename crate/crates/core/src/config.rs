//! A-configurations, their relation lattice, and bounded enumeration of the
//! orthant pieces `L_k = { l in L : l_k <= 0, l_j >= 0 for j != k }`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith::{int_rational, rational_string};
use crate::error::{Error, Result};
use crate::linalg::{integer_kernel, solve_affine, AffineSolution};

/// Default cap on search nodes for lattice enumeration.
pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

/// Vectors `a_1..a_N` in `Z^n` together with the unit form `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct AConfiguration {
    name: Option<String>,
    dim: usize,
    vectors: Vec<Vec<i64>>,
    unit_form: Vec<BigRational>,
}

/// On-disk configuration: `{"name": str, "n": int, "vectors": [[int, ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub vectors: Vec<Vec<i64>>,
}

impl ConfigFile {
    pub fn into_configuration(self) -> Result<AConfiguration> {
        let mut cfg = validate_configuration(self.n, self.vectors)?;
        cfg.name = self.name;
        Ok(cfg)
    }
}

/// Checks the shape of `vectors` and solves `h . a_j = 1` exactly.
///
/// The returned form is the echelon solution with free variables set to 0.
pub fn validate_configuration(n: usize, vectors: Vec<Vec<i64>>) -> Result<AConfiguration> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if vectors.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    if let Some((index, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != n) {
        return Err(Error::DimensionMismatch {
            index: index + 1,
            expected: n,
            found: v.len(),
        });
    }
    let rows: Vec<Vec<BigRational>> = vectors
        .iter()
        .map(|a| a.iter().map(|&x| int_rational(x)).collect())
        .collect();
    let ones = vec![int_rational(1); vectors.len()];
    match solve_affine(&rows, &ones, n) {
        AffineSolution::Solution(h) => Ok(AConfiguration {
            name: None,
            dim: n,
            vectors,
            unit_form: h,
        }),
        AffineSolution::Infeasible(y) => Err(Error::NoUnitForm {
            witness: y.iter().map(rational_string).collect(),
        }),
    }
}

impl AConfiguration {
    pub fn new(n: usize, vectors: Vec<Vec<i64>>) -> Result<Self> {
        validate_configuration(n, vectors)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors `N`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<i64>] {
        &self.vectors
    }

    /// The vector `a_j`, 1-based.
    pub fn vector(&self, j: usize) -> &[i64] {
        &self.vectors[j - 1]
    }

    pub fn unit_form(&self) -> &[BigRational] {
        &self.unit_form
    }

    pub fn to_file(&self) -> ConfigFile {
        ConfigFile {
            name: self.name.clone(),
            n: self.dim,
            vectors: self.vectors.clone(),
        }
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            Err(Error::IndexOutOfRange {
                index: k,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }

    /// 1-based index pairs `(i, j)`, `i < j`, with `a_i = a_j`.
    pub fn duplicate_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.vectors[i] == self.vectors[j] {
                    out.push((i + 1, j + 1));
                }
            }
        }
        out
    }

    /// `sum_j l_j a_j`, computed in i128.
    pub fn apply(&self, l: &[i64]) -> Vec<i128> {
        let mut acc = vec![0i128; self.dim];
        for (a, &lj) in self.vectors.iter().zip(l) {
            for (s, &x) in acc.iter_mut().zip(a) {
                *s += lj as i128 * x as i128;
            }
        }
        acc
    }

    pub fn is_relation(&self, l: &[i64]) -> bool {
        l.len() == self.len() && self.apply(l).iter().all(|&x| x == 0)
    }

    pub fn relation(&self, entries: Vec<i64>) -> Result<Relation> {
        if self.is_relation(&entries) {
            Ok(Relation(entries))
        } else {
            Err(Error::NotARelation(entries))
        }
    }
}

impl fmt::Display for AConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.name {
            write!(f, "{name} ")?;
        }
        f.write_str("[")?;
        for (i, v) in self.vectors.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", IntTuple(v))?;
        }
        f.write_str("]")
    }
}

pub(crate) struct IntTuple<'a>(pub &'a [i64]);

impl fmt::Display for IntTuple<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// An integer vector `l` with `sum_j l_j a_j = 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Relation(Vec<i64>);

impl Relation {
    /// Wraps `entries` without checking membership in any lattice.
    pub fn from_entries(entries: Vec<i64>) -> Self {
        Relation(entries)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<i64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Entry `l_j`, 1-based.
    pub fn get(&self, j: usize) -> i64 {
        self.0[j - 1]
    }

    pub fn coordinate_sum(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Componentwise positive part.
    pub fn positive_part(&self) -> Vec<i64> {
        self.0.iter().map(|&x| x.max(0)).collect()
    }

    /// Componentwise magnitude of the negative part.
    pub fn negative_part(&self) -> Vec<i64> {
        self.0.iter().map(|&x| (-x).max(0)).collect()
    }

    pub fn gcd(&self) -> u64 {
        self.0
            .iter()
            .fold(0u64, |g, &x| num_integer::gcd(g, x.unsigned_abs()))
    }

    pub fn scaled(&self, c: i64) -> Relation {
        Relation(self.0.iter().map(|&x| x * c).collect())
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        IntTuple(&self.0).fmt(f)
    }
}

/// Integer basis of `L`, in the canonical Hermite form of [`integer_kernel`].
pub fn kernel_basis(cfg: &AConfiguration) -> Result<Vec<Relation>> {
    integer_kernel(cfg.vectors(), cfg.dim())
        .into_iter()
        .map(|v| {
            v.iter()
                .map(|x| x.to_i64().ok_or(Error::Overflow("computing the kernel basis")))
                .collect::<Result<Vec<i64>>>()
                .map(Relation)
        })
        .collect()
}

/// Coordinates of `l` in `basis`, if `l` is an integer combination of it.
pub fn lattice_coordinates(basis: &[Relation], l: &[i64]) -> Option<Vec<BigInt>> {
    let nvars = l.len();
    if basis.is_empty() {
        return l.iter().all(|&x| x == 0).then(Vec::new);
    }
    // Equations: one per coordinate j, unknowns = basis coefficients.
    let rows: Vec<Vec<BigRational>> = (0..nvars)
        .map(|j| basis.iter().map(|b| int_rational(b.0[j])).collect())
        .collect();
    let rhs: Vec<BigRational> = l.iter().map(|&x| int_rational(x)).collect();
    match solve_affine(&rows, &rhs, basis.len()) {
        AffineSolution::Solution(x) if x.iter().all(|c| c.is_integer()) => {
            Some(x.into_iter().map(|c| c.to_integer()).collect())
        }
        _ => None,
    }
}

/// The enumerated nonzero part of `L_k` with `1 <= -l_k <= level_bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthantRelationSet {
    pub k: usize,
    pub level_bound: u32,
    pub relations: Vec<Relation>,
    /// True when the search ran to completion under the bound.
    pub complete: bool,
    pub nodes: u64,
}

impl OrthantRelationSet {
    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Level `-l_k` of a member.
    pub fn level_of(&self, l: &Relation) -> u32 {
        (-l.get(self.k)) as u32
    }
}

/// Search budget for lattice enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub node_cap: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

struct OrthantSearch<'a> {
    cfg: &'a AConfiguration,
    free: Vec<usize>,
    /// Per free position p and coordinate i: min/max of a_{i, free[q]} over q >= p.
    suffix_min: Vec<Vec<i64>>,
    suffix_max: Vec<Vec<i64>>,
    nodes: u64,
    cap: u64,
}

impl OrthantSearch<'_> {
    fn node(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cap {
            Err(Error::BudgetExceeded { cap: self.cap })
        } else {
            Ok(())
        }
    }

    /// `target` is what the free variables from position `pos` on must still
    /// produce, with `remaining` their total.
    fn dfs(
        &mut self,
        pos: usize,
        remaining: i64,
        target: &mut [i64],
        current: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) -> Result<()> {
        self.node()?;
        let dim = self.cfg.dim();
        for i in 0..dim {
            let lo = remaining as i128 * self.suffix_min[pos][i] as i128;
            let hi = remaining as i128 * self.suffix_max[pos][i] as i128;
            let t = target[i] as i128;
            if t < lo || t > hi {
                return Ok(());
            }
        }
        let j = self.free[pos];
        if pos + 1 == self.free.len() {
            // Last variable absorbs the remainder.
            let a = self.cfg.vector(j + 1);
            if (0..dim).all(|i| target[i] as i128 == remaining as i128 * a[i] as i128) {
                current.push(remaining);
                out.push(current.clone());
                current.pop();
            }
            return Ok(());
        }
        let a = self.cfg.vector(j + 1).to_vec();
        for v in 0..=remaining {
            for i in 0..dim {
                target[i] -= v * a[i];
            }
            current.push(v);
            let res = self.dfs(pos + 1, remaining - v, target, current, out);
            current.pop();
            for i in 0..dim {
                target[i] += v * a[i];
            }
            res?;
        }
        Ok(())
    }
}

/// Exhaustive list of `l in L_k` with `1 <= -l_k <= m_max`, sorted by level
/// then lexicographically.
pub fn enumerate_orthant(
    cfg: &AConfiguration,
    k: usize,
    m_max: u32,
    limits: SearchLimits,
) -> Result<OrthantRelationSet> {
    cfg.check_index(k)?;
    let free: Vec<usize> = (0..cfg.len()).filter(|&j| j != k - 1).collect();
    let mut set = OrthantRelationSet {
        k,
        level_bound: m_max,
        relations: Vec::new(),
        complete: true,
        nodes: 0,
    };
    if free.is_empty() {
        return Ok(set);
    }
    let dim = cfg.dim();
    let mut suffix_min = vec![vec![i64::MAX; dim]; free.len() + 1];
    let mut suffix_max = vec![vec![i64::MIN; dim]; free.len() + 1];
    for p in (0..free.len()).rev() {
        let a = cfg.vector(free[p] + 1);
        for i in 0..dim {
            suffix_min[p][i] = suffix_min[p + 1][i].min(a[i]);
            suffix_max[p][i] = suffix_max[p + 1][i].max(a[i]);
        }
    }
    let mut search = OrthantSearch {
        cfg,
        free,
        suffix_min,
        suffix_max,
        nodes: 0,
        cap: limits.node_cap,
    };
    let ak = cfg.vector(k).to_vec();
    for m in 1..=m_max as i64 {
        let mut target: Vec<i64> = ak
            .iter()
            .map(|&x| x.checked_mul(m).ok_or(Error::Overflow("scaling a_k")))
            .collect::<Result<_>>()?;
        let mut found = Vec::new();
        search.dfs(0, m, &mut target, &mut Vec::new(), &mut found)?;
        for free_vals in found {
            let mut l = vec![0i64; cfg.len()];
            l[k - 1] = -m;
            for (&j, v) in search.free.iter().zip(free_vals) {
                l[j] = v;
            }
            debug_assert!(cfg.is_relation(&l));
            set.relations.push(Relation(l));
        }
    }
    set.nodes = search.nodes;
    set.relations.sort_by(|x, y| (-x.get(k), &x.0).cmp(&(-y.get(k), &y.0)));
    set.relations.dedup();
    Ok(set)
}

/// All nonzero relations with every `|l_j| <= bound`, in lexicographic order.
pub fn relation_slab(cfg: &AConfiguration, bound: u32, limits: SearchLimits) -> Result<Vec<Relation>> {
    let n = cfg.len();
    let b = bound as i64;
    let mut out = Vec::new();
    let mut l = vec![-b; n];
    let mut acc = vec![0i128; cfg.dim()];
    let mut nodes = 0u64;
    // Odometer over [-b, b]^N with an incrementally maintained sum.
    for (j, a) in cfg.vectors().iter().enumerate() {
        for (s, &x) in acc.iter_mut().zip(a) {
            *s += l[j] as i128 * x as i128;
        }
    }
    loop {
        nodes += 1;
        if nodes > limits.node_cap {
            return Err(Error::BudgetExceeded {
                cap: limits.node_cap,
            });
        }
        if acc.iter().all(|&x| x == 0) && l.iter().any(|&x| x != 0) {
            out.push(Relation(l.clone()));
        }
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            let a = cfg.vector(j + 1);
            if l[j] < b {
                l[j] += 1;
                for (s, &x) in acc.iter_mut().zip(a) {
                    *s += x as i128;
                }
                break;
            }
            for (s, &x) in acc.iter_mut().zip(a) {
                *s -= 2 * b as i128 * x as i128;
            }
            l[j] = -b;
        }
    }
}
