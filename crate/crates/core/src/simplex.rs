//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `min c . x` subject to `A x = b`, `x >= 0`.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<BigRational>, value: BigRational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// m rows of width ncols + 1 (last entry is the right-hand side).
    rows: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= p * &f;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs of `cost` (length ncols) against the current basis.
    fn reduced_costs(&self, cost: &[BigRational], allowed: usize) -> Vec<BigRational> {
        let mut d: Vec<BigRational> = cost[..allowed].to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(row) {
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Runs simplex iterations on columns `0..allowed`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[BigRational], allowed: usize) -> bool {
        loop {
            let d = self.reduced_costs(cost, allowed);
            // Bland: lowest-index improving column.
            let Some(enter) = (0..allowed).find(|&j| d[j].is_negative() && !self.basis.contains(&j))
            else {
                return true;
            };
            let rhs = self.ncols;
            let mut leave: Option<(usize, BigRational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Minimizes `cost . x` over `{ x >= 0 : a x = b }`.
pub fn minimize(a: &[Vec<BigRational>], b: &[BigRational], cost: &[BigRational]) -> LpOutcome {
    let n = cost.len();
    let m = a.len();
    // Phase 1 with one artificial per row: columns 0..n real, n..n+m artificial.
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut r: Vec<BigRational> = row
            .iter()
            .map(|x| if flip { -x } else { x.clone() })
            .collect();
        r.extend((0..m).map(|k| if k == i { BigRational::one() } else { BigRational::zero() }));
        r.push(if flip { -bi } else { bi.clone() });
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        ncols,
    };
    let mut phase1 = vec![BigRational::zero(); ncols];
    for c in phase1.iter_mut().skip(n) {
        *c = BigRational::one();
    }
    t.optimize(&phase1, ncols);
    let infeasibility: BigRational = t
        .rows
        .iter()
        .zip(&t.basis)
        .filter(|(_, &bv)| bv >= n)
        .map(|(r, _)| r[ncols].clone())
        .sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }

    // Drive zero-valued artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    let mut phase2 = cost.to_vec();
    phase2.extend((0..m).map(|_| BigRational::zero()));
    if !t.optimize(&phase2, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![BigRational::zero(); n];
    for (row, &bv) in t.rows.iter().zip(&t.basis) {
        if bv < n {
            x[bv] = row[ncols].clone();
        }
    }
    let value = x
        .iter()
        .zip(cost)
        .fold(BigRational::zero(), |acc, (xi, ci)| acc + xi * ci);
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn rows(v: &[&[i64]]) -> Vec<Vec<BigRational>> {
        v.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn small_optimum() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = rows(&[&[1, 2, 1, 0], &[3, 1, 0, 1]]);
        let b = vec![q(4), q(6)];
        let c = vec![q(-1), q(-1), q(0), q(0)];
        match minimize(&a, &b, &c) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, BigRational::new((-14).into(), 5.into()));
                assert_eq!(x[0], BigRational::new(8.into(), 5.into()));
                assert_eq!(x[1], BigRational::new(6.into(), 5.into()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = rows(&[&[1, 1], &[1, 1]]);
        assert_eq!(minimize(&a, &[q(1), q(2)], &[q(0), q(0)]), LpOutcome::Infeasible);
        let a = rows(&[&[1, -1]]);
        assert_eq!(minimize(&a, &[q(1)], &[q(-1), q(0)]), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        let a = rows(&[&[1, 1], &[2, 2], &[-1, 0]]);
        let b = vec![q(3), q(6), q(-1)];
        match minimize(&a, &b, &[q(0), q(1)]) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![q(1), q(2)]);
                assert_eq!(value, q(2));
            }
            other => panic!("{other:?}"),
        }
    }
}
