//! Exact linear algebra over Z and Q: integer kernels in Hermite normal form
//! and rational solves with infeasibility certificates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Outcome of solving `A x = b` over Q.
#[derive(Debug, Clone, PartialEq)]
pub enum AffineSolution {
    /// A solution with every free variable set to zero.
    Solution(Vec<BigRational>),
    /// Multipliers `y` with `y^T A = 0` and `y^T b != 0`.
    Infeasible(Vec<BigRational>),
}

/// Solves `rows * x = rhs` by reduced row echelon form, tracking row
/// combinations so an inconsistent system yields a certificate.
pub fn solve_affine(rows: &[Vec<BigRational>], rhs: &[BigRational], ncols: usize) -> AffineSolution {
    let m = rows.len();
    debug_assert_eq!(m, rhs.len());
    // [ A | b | I_m ]
    let width = ncols + 1 + m;
    let mut t: Vec<Vec<BigRational>> = rows
        .iter()
        .zip(rhs)
        .enumerate()
        .map(|(i, (row, b))| {
            let mut r = Vec::with_capacity(width);
            r.extend(row.iter().cloned());
            r.push(b.clone());
            r.extend((0..m).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();

    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m).find(|&i| !t[i][c].is_zero()) else {
            continue;
        };
        t.swap(r, p);
        let inv = t[r][c].recip();
        for x in t[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m {
            if i != r && !t[i][c].is_zero() {
                let f = t[i][c].clone();
                for col in 0..width {
                    let d = &t[r][col] * &f;
                    t[i][col] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m {
            break;
        }
    }

    for row in t.iter().skip(r) {
        if !row[ncols].is_zero() {
            return AffineSolution::Infeasible(row[ncols + 1..].to_vec());
        }
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = t[i][ncols].clone();
    }
    AffineSolution::Solution(x)
}

/// Reduces the rows in place so that the columns `0..ncols` are in echelon
/// form, using only unimodular row operations. Returns the rank.
fn integer_echelon(rows: &mut [Vec<BigInt>], ncols: usize) -> usize {
    let m = rows.len();
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        loop {
            // Smallest nonzero magnitude in column c at or below r.
            let pick = (r..m)
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&a, &b| rows[a][c].abs().cmp(&rows[b][c].abs()));
            let Some(p) = pick else { break };
            rows.swap(r, p);
            let mut done = true;
            for i in r + 1..m {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                for col in 0..rows[i].len() {
                    let d = &rows[r][col] * &q;
                    rows[i][col] -= d;
                }
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                r += 1;
                break;
            }
        }
    }
    r
}

/// Row Hermite normal form of the lattice spanned by `rows`: positive pivots
/// moving right, entries above each pivot reduced into `[0, pivot)`, zero rows
/// removed.
pub fn hermite_normal_form(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let Some(ncols) = rows.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut h: Vec<Vec<BigInt>> = rows.to_vec();
    let rank = integer_echelon(&mut h, ncols);
    h.truncate(rank);
    let mut pivot_cols = Vec::with_capacity(rank);
    for i in 0..rank {
        let c = (0..ncols).find(|&c| !h[i][c].is_zero()).expect("echelon row is nonzero");
        if h[i][c].is_negative() {
            for x in h[i].iter_mut() {
                *x = -&*x;
            }
        }
        pivot_cols.push(c);
    }
    for i in 0..rank {
        let c = pivot_cols[i];
        for above in 0..i {
            let q = h[above][c].div_floor(&h[i][c]);
            if q.is_zero() {
                continue;
            }
            for col in 0..ncols {
                let d = &h[i][col] * &q;
                h[above][col] -= d;
            }
        }
    }
    h
}

/// Basis of the integer kernel `{ l : sum_j l_j * columns[j] = 0 }`.
///
/// The basis is the Hermite normal form taken with coordinates read from the
/// right, so each vector's last nonzero entry is positive; vectors are listed
/// by increasing position of that entry. The form is unique for the lattice.
pub fn integer_kernel(columns: &[Vec<i64>], dim: usize) -> Vec<Vec<BigInt>> {
    let nvec = columns.len();
    // Row j: [ a_j | e_j ].
    let mut t: Vec<Vec<BigInt>> = columns
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let mut row: Vec<BigInt> = a.iter().map(|&x| BigInt::from(x)).collect();
            row.extend((0..nvec).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let rank = integer_echelon(&mut t, dim);
    let raw: Vec<Vec<BigInt>> = t[rank..]
        .iter()
        .map(|row| row[dim..].iter().rev().cloned().collect())
        .collect();
    let mut basis: Vec<Vec<BigInt>> = hermite_normal_form(&raw)
        .into_iter()
        .map(|mut v| {
            v.reverse();
            v
        })
        .collect();
    basis.reverse();
    basis
}
