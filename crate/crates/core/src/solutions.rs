//! The series `G_k` and the logarithmic solutions
//! `log lambda^l + sum_k l_k G_k`, with Euler and box operator checks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{factorials, int_rational, rational_string};
use crate::config::{
    enumerate_orthant, kernel_basis, relation_slab, AConfiguration, OrthantRelationSet, Relation,
    SearchLimits,
};
use crate::error::{Error, Result};
use crate::geometry::{common_grading, orthant_min_level, PointednessCertificate};
use crate::report::{Report, Verdict, Witness};
use crate::seriesring::{ConeSeries, LogSeries};

/// `G_k` truncated at `-l_k <= m_max`, graded by `-e_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GkSeries {
    pub k: usize,
    pub m_max: u32,
    pub series: ConeSeries,
}

impl GkSeries {
    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    /// Support of the series as relations.
    pub fn support(&self) -> Vec<Relation> {
        self.series
            .terms_by_level()
            .into_iter()
            .map(|(_, u, _)| Relation::from_entries(u.clone()))
            .collect()
    }

    /// `G_k` cut down to `-l_k <= m`.
    pub fn truncated(&self, m: u32) -> Result<GkSeries> {
        Ok(GkSeries {
            k: self.k,
            m_max: m,
            series: self.series.truncate(&int_rational(m as i64))?,
        })
    }
}

/// `(-1)^{m-1} (m-1)! / prod_{j != k} l_j!` with `m = -l_k`, from a factorial table.
fn gk_coefficient_with(l: &[i64], k: usize, fact: &[num_bigint::BigUint]) -> BigRational {
    let m = (-l[k - 1]) as usize;
    let mut den = num_bigint::BigUint::one();
    for (j, &x) in l.iter().enumerate() {
        if j != k - 1 {
            den *= &fact[x as usize];
        }
    }
    let num = BigInt::from(fact[m - 1].clone());
    let c = BigRational::new(num, BigInt::from(den));
    if m.is_multiple_of(2) {
        -c
    } else {
        c
    }
}

/// Coefficient of `lambda^l` in `G_k` for `l in L_k`, `l_k < 0`.
pub fn gk_coefficient(l: &Relation, k: usize) -> BigRational {
    let top = l.entries().iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0);
    gk_coefficient_with(l.entries(), k, &factorials(top))
}

pub fn gk_from_orthant(cfg: &AConfiguration, set: &OrthantRelationSet) -> Result<GkSeries> {
    let k = set.k;
    let grading = ConeSeries::orthant_grading(cfg.len(), k);
    let mut series = ConeSeries::zero(grading, int_rational(set.level_bound as i64));
    let top = set
        .relations
        .iter()
        .flat_map(|l| l.entries().iter().map(|x| x.unsigned_abs() as usize))
        .max()
        .unwrap_or(0);
    let fact = factorials(top);
    for l in &set.relations {
        series.insert(l.entries().to_vec(), gk_coefficient_with(l.entries(), k, &fact))?;
    }
    Ok(GkSeries {
        k,
        m_max: set.level_bound,
        series,
    })
}

/// Builds `G_k` from the exhaustive enumeration of `L_k` to level `m_max`.
pub fn build_gk(cfg: &AConfiguration, k: usize, m_max: u32, limits: SearchLimits) -> Result<GkSeries> {
    let set = enumerate_orthant(cfg, k, m_max, limits)?;
    gk_from_orthant(cfg, &set)
}

pub fn build_all_gk(cfg: &AConfiguration, m_max: u32, limits: SearchLimits) -> Result<Vec<GkSeries>> {
    (1..=cfg.len()).map(|k| build_gk(cfg, k, m_max, limits)).collect()
}

/// `log lambda_k + G_k` in the grading of `G_k`.
pub fn log_plus_gk(gk: &GkSeries) -> LogSeries {
    let s = &gk.series;
    let log = LogSeries::log_monomial(s.grading().to_vec(), s.bound().clone(), gk.k, BigRational::one());
    log.add(&LogSeries::from_series(s.clone()))
        .expect("same frame")
}

/// Grading and bound shared by the series `G_k` with `l_k != 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonFrame {
    pub grading: Vec<BigRational>,
    pub bound: BigRational,
    /// Indices `k` with `l_k != 0` and `G_k != 0`.
    pub active: Vec<usize>,
    /// Present when two or more series had to be placed in one cone.
    pub certificate: Option<PointednessCertificate>,
}

/// Chooses a grading in which every active `G_k` is a cone series.
///
/// With one active index the orthant grading `-e_k` is used. With several, a
/// pointedness certificate `w` on their joint support is required; the bound
/// is `min_k m_k * rho_k`, where `rho_k` is the least `w`-level per unit of
/// `-l_k` over the real cone on `L_k`, so no omitted term falls below it.
pub fn common_frame(cfg: &AConfiguration, relation: &Relation, gks: &[GkSeries]) -> Result<CommonFrame> {
    let n = cfg.len();
    if relation.len() != n || gks.len() != n {
        return Err(Error::GradingMismatch);
    }
    let active: Vec<usize> = (1..=n)
        .filter(|&k| relation.get(k) != 0 && !gks[k - 1].is_zero())
        .collect();
    match active.as_slice() {
        [] => Ok(CommonFrame {
            grading: vec![BigRational::zero(); n],
            bound: BigRational::zero(),
            active,
            certificate: None,
        }),
        [k] => {
            let gk = &gks[*k - 1];
            Ok(CommonFrame {
                grading: gk.series.grading().to_vec(),
                bound: gk.series.bound().clone(),
                active,
                certificate: None,
            })
        }
        _ => {
            let gens: Vec<Relation> = active.iter().flat_map(|&k| gks[k - 1].support()).collect();
            let cert = common_grading(&gens)?;
            let mut bound: Option<BigRational> = None;
            for &k in &active {
                let rho = orthant_min_level(cfg, k, &cert.w).ok_or(Error::NotPointed { witness: None })?;
                if rho <= BigRational::zero() {
                    // The functional does not extend to the whole orthant cone.
                    return Err(Error::NotPointed { witness: None });
                }
                let b = rho * int_rational(gks[k - 1].m_max as i64);
                bound = Some(match bound {
                    Some(prev) if prev <= b => prev,
                    _ => b,
                });
            }
            Ok(CommonFrame {
                grading: cert.w.clone(),
                bound: bound.expect("at least two active indices"),
                active,
                certificate: Some(cert),
            })
        }
    }
}

/// `sum_k l_k G_k` placed in `frame`.
pub fn combined_series(relation: &Relation, gks: &[GkSeries], frame: &CommonFrame) -> Result<ConeSeries> {
    let mut acc = ConeSeries::zero(frame.grading.clone(), frame.bound.clone());
    for &k in &frame.active {
        let g = gks[k - 1]
            .series
            .regrade(frame.grading.clone(), frame.bound.clone())?;
        acc = acc.add(&g.scale(&int_rational(relation.get(k))))?;
    }
    Ok(acc)
}

/// `log lambda^l + sum_k l_k G_k` for `l in L`.
pub fn log_solution(cfg: &AConfiguration, relation: &Relation, gks: &[GkSeries]) -> Result<LogSeries> {
    if !cfg.is_relation(relation.entries()) {
        return Err(Error::NotARelation(relation.entries().to_vec()));
    }
    let frame = common_frame(cfg, relation, gks)?;
    let logs = LogSeries::log_of_monomial(frame.grading.clone(), frame.bound.clone(), relation.entries());
    let series = combined_series(relation, gks, &frame)?;
    logs.add(&LogSeries::from_series(series))
}

fn residual_witness(r: &LogSeries, note: String) -> Witness {
    match r.first_term() {
        Some((alpha, u, c)) => {
            let logs = if alpha.iter().any(|&a| a > 0) {
                format!(" times log-degree {alpha:?}")
            } else {
                String::new()
            };
            Witness::new(u, rational_string(&c)).with_note(format!("{note}{logs}"))
        }
        None => Witness::new(Vec::new(), "0"),
    }
}

/// Euler operators `Z_i = sum_j a_ij lambda_j d_j` (parameter 0), checked
/// termwise on log-free series and by applying `Z_i` otherwise.
pub fn check_euler(cfg: &AConfiguration, f: &LogSeries, target: &str) -> Report {
    if f.log_degree() == 0 {
        return check_euler_termwise(cfg, &f.series_part(), target);
    }
    let mut report = Report::pass("euler", target).with_valid_level(f.bound());
    for i in 0..cfg.dim() {
        let row: Vec<i64> = cfg.vectors().iter().map(|a| a[i]).collect();
        let r = f.euler_combination(&row);
        let ok = r.is_zero();
        let mut child = Report::new("euler", format!("{target} Z_{}", i + 1), Verdict::from_bool(ok))
            .with_valid_level(f.bound());
        if !ok {
            child.witness = Some(residual_witness(&r, format!("Z_{} residual", i + 1)));
        }
        report.push(child);
    }
    report
}

/// Every exponent `u` must satisfy `sum_j u_j a_j = 0`.
pub fn check_euler_termwise(cfg: &AConfiguration, f: &ConeSeries, target: &str) -> Report {
    let mut report = Report::pass("euler-termwise", target)
        .with_valid_level(f.bound())
        .stat("terms", f.len());
    for (_, u, c) in f.terms_by_level() {
        let image = cfg.apply(u);
        if let Some(i) = image.iter().position(|&x| x != 0) {
            report.verdict = Verdict::Fail;
            report.witness = Some(
                Witness::new(u.clone(), rational_string(&(c * int_rational(image[i] as i64))))
                    .with_note(format!("Z_{} residual", i + 1)),
            );
            break;
        }
    }
    report
}

/// Box operators for each relation; residuals must vanish up to the
/// guaranteed level of the output.
pub fn check_box(cfg: &AConfiguration, f: &LogSeries, rels: &[Relation], target: &str) -> Report {
    let mut report = Report::pass("box", target).stat("relations", rels.len());
    let mut min_level: Option<BigRational> = None;
    for l in rels {
        let mut child = Report::pass("box", format!("{target} l={l}"));
        if !cfg.is_relation(l.entries()) {
            child.verdict = Verdict::Fail;
            child.witness = Some(Witness::new(l.entries().to_vec(), "0").with_note("not a relation"));
            report.push(child);
            continue;
        }
        let r = f.apply_box(l);
        child.valid_level = Some(rational_string(r.bound()));
        if !r.is_zero() {
            child.verdict = Verdict::Fail;
            child.witness = Some(residual_witness(&r, format!("box residual for {l}")));
        }
        min_level = Some(match min_level {
            Some(m) if &m <= r.bound() => m,
            _ => r.bound().clone(),
        });
        report.push(child);
    }
    if let Some(m) = min_level {
        report.valid_level = Some(rational_string(&m));
    }
    report
}

/// Kernel basis followed by the remaining nonzero relations with
/// `|l_j| <= coord_bound`.
pub fn box_relations(cfg: &AConfiguration, coord_bound: u32, limits: SearchLimits) -> Result<Vec<Relation>> {
    let mut rels = kernel_basis(cfg)?;
    for l in relation_slab(cfg, coord_bound, limits)? {
        if !rels.contains(&l) {
            rels.push(l);
        }
    }
    Ok(rels)
}
