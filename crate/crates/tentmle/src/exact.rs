//! Exact rational arithmetic: float rationalization, exact rank, and a small
//! two-phase simplex solver.
//!
//! Secondary-cone membership is a linear feasibility question whose
//! coefficients come from point coordinates. Floating-point LP misclassifies
//! near-degenerate lifts, so coordinates are rationalized exactly (every
//! finite f64 is a dyadic rational) and feasibility is decided over Q.
//! Problem sizes are tiny; a dense tableau with Bland's rule is plenty.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

/// Exact rational value of a finite f64.
pub fn rat(x: f64) -> Rat {
    BigRational::from_float(x).expect("finite float")
}

pub fn to_f64(r: &Rat) -> f64 {
    // Scale down huge numerators/denominators before converting.
    let n = r.numer();
    let d = r.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = (nb.max(db) - 900).max(0) as u64;
    let n2 = n >> shift;
    let d2 = d >> shift;
    let nf = bigint_to_f64(&n2);
    let df = bigint_to_f64(&d2);
    if df == 0.0 {
        0.0
    } else {
        nf / df
    }
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    let (sign, digits) = b.to_u64_digits();
    let mut v = 0.0f64;
    for d in digits.iter().rev() {
        v = v * 1.8446744073709552e19 + *d as f64;
    }
    match sign {
        num_bigint::Sign::Minus => -v,
        _ => v,
    }
}

/// Rank of a rational matrix by fraction-exact Gaussian elimination.
pub fn rank(mut m: Vec<Vec<Rat>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let Some(piv) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, piv);
        let p = m[row][col].clone();
        for r in row + 1..rows {
            if !m[r][col].is_zero() {
                let f = &m[r][col] / &p;
                for c in col..cols {
                    let v = &m[row][c] * &f;
                    m[r][c] -= v;
                }
            }
        }
        row += 1;
        rank += 1;
    }
    rank
}

/// Exact determinant of a square rational matrix.
pub fn det(mut m: Vec<Vec<Rat>>) -> Rat {
    let n = m.len();
    let mut d = Rat::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rat::zero();
        };
        if piv != col {
            m.swap(col, piv);
            d = -d;
        }
        let p = m[col][col].clone();
        d *= &p;
        for r in col + 1..n {
            if !m[r][col].is_zero() {
                let f = &m[r][col] / &p;
                for c in col..n {
                    let v = &m[col][c] * &f;
                    m[r][c] -= v;
                }
            }
        }
    }
    d
}

/// Solve `A x = b` exactly for square `A`; `None` when singular.
pub fn solve_system(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &p;
                for c in col..n {
                    let v = &a[col][c] * &f;
                    a[r][c] -= v;
                }
                let v = &b[col] * &f;
                b[r] -= v;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Relation of one linear constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

/// One constraint `coeffs · x  rel  rhs` over free variables `x`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub rel: Rel,
    pub rhs: Rat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rat, point: Vec<Rat> },
    Infeasible,
    Unbounded,
}

/// Maximize `objective · x` over free `x` subject to `constraints`, exactly.
///
/// Free variables are split as differences of nonnegative parts; a two-phase
/// dense simplex with Bland's rule decides the result in finite time.
pub fn maximize(objective: &[Rat], constraints: &[Constraint]) -> LpOutcome {
    let nfree = objective.len();
    let nsplit = 2 * nfree;
    let m = constraints.len();

    let n_slack = constraints.iter().filter(|c| c.rel != Rel::Eq).count();
    let total = nsplit + n_slack + m; // structural + slack/surplus + artificial
    let art_base = nsplit + n_slack;

    // Tableau rows: [coeffs | rhs], basis[i] = basic column of row i.
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut slack_idx = 0usize;
    for (i, c) in constraints.iter().enumerate() {
        debug_assert_eq!(c.coeffs.len(), nfree);
        let mut row = vec![Rat::zero(); total + 1];
        let flip = c.rhs.is_negative();
        let sgn = if flip { -Rat::one() } else { Rat::one() };
        for j in 0..nfree {
            let v = &c.coeffs[j] * &sgn;
            row[2 * j] = v.clone();
            row[2 * j + 1] = -v;
        }
        row[total] = &c.rhs * &sgn;
        let rel = match (c.rel, flip) {
            (Rel::Eq, _) => Rel::Eq,
            (Rel::Le, false) | (Rel::Ge, true) => Rel::Le,
            (Rel::Ge, false) | (Rel::Le, true) => Rel::Ge,
        };
        match rel {
            Rel::Le => {
                row[nsplit + slack_idx] = Rat::one();
                slack_idx += 1;
            }
            Rel::Ge => {
                row[nsplit + slack_idx] = -Rat::one();
                slack_idx += 1;
            }
            Rel::Eq => {}
        }
        row[art_base + i] = Rat::one();
        basis.push(art_base + i);
        t.push(row);
    }

    // Phase 1: maximize −Σ artificials.
    let mut phase1_obj = vec![Rat::zero(); total];
    for j in art_base..total {
        phase1_obj[j] = -Rat::one();
    }
    if !simplex(&mut t, &mut basis, &phase1_obj, total) {
        // Phase-1 objective is bounded; unbounded cannot happen.
        return LpOutcome::Infeasible;
    }
    let p1: Rat = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= art_base)
        .map(|(i, _)| t[i][total].clone())
        .sum();
    if !p1.is_zero() {
        return LpOutcome::Infeasible;
    }
    // Pivot remaining artificial basics out where possible.
    for i in 0..m {
        if basis[i] >= art_base {
            if let Some(j) = (0..art_base).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j, total);
            }
            // A fully zero row is redundant; its artificial stays at zero.
        }
    }

    // Phase 2 with the real objective; artificial columns are frozen.
    let mut obj = vec![Rat::zero(); total];
    for j in 0..nfree {
        obj[2 * j] = objective[j].clone();
        obj[2 * j + 1] = -&objective[j];
    }
    if !simplex(&mut t, &mut basis, &obj, art_base) {
        return LpOutcome::Unbounded;
    }

    let mut xsplit = vec![Rat::zero(); total];
    for (i, &b) in basis.iter().enumerate() {
        xsplit[b] = t[i][total].clone();
    }
    let point: Vec<Rat> = (0..nfree)
        .map(|j| &xsplit[2 * j] - &xsplit[2 * j + 1])
        .collect();
    let value: Rat = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
    LpOutcome::Optimal { value, point }
}

/// Dense simplex iterations with Bland's rule over columns `0..ncols`.
/// Returns false when the objective is unbounded.
fn simplex(t: &mut [Vec<Rat>], basis: &mut [usize], obj: &[Rat], ncols: usize) -> bool {
    let m = t.len();
    let rhs = t.first().map(|r| r.len() - 1).unwrap_or(0);
    loop {
        // Reduced costs: c_j − c_B · B⁻¹A_j, read off the current tableau.
        let mut entering = None;
        for j in 0..ncols {
            if basis.contains(&j) {
                continue;
            }
            let mut red = obj[j].clone();
            for i in 0..m {
                if !t[i][j].is_zero() {
                    red -= &obj[basis[i]] * &t[i][j];
                }
            }
            if red.is_positive() {
                entering = Some(j);
                break; // Bland: first improving index.
            }
        }
        let Some(j) = entering else { return true };
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..m {
            if t[i][j].is_positive() {
                let ratio = &t[i][rhs] / &t[i][j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((i, _)) = leave else { return false };
        pivot(t, basis, i, j, rhs);
    }
}

fn pivot(t: &mut [Vec<Rat>], basis: &mut [usize], row: usize, col: usize, rhs: usize) {
    let p = t[row][col].clone();
    for v in t[row].iter_mut() {
        *v /= &p;
    }
    for i in 0..t.len() {
        if i != row && !t[i][col].is_zero() {
            let f = t[i][col].clone();
            for j in 0..=rhs {
                let v = &t[row][j] * &f;
                t[i][j] -= v;
            }
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rationalize_is_exact() {
        let x = 0.1f64;
        let q = rat(x);
        assert_eq!(to_f64(&q), x);
        assert_eq!(q, r(3602879701896397, 36028797018963968));
    }

    #[test]
    fn exact_rank_detects_collinearity() {
        let m = vec![
            vec![r(1, 1), r(2, 1)],
            vec![r(2, 1), r(4, 1)],
            vec![r(3, 1), r(6, 1)],
        ];
        assert_eq!(rank(m), 1);
    }

    #[test]
    fn lp_bounded_maximum() {
        // max x + y s.t. x ≤ 2, y ≤ 3, x + y ≤ 4 → value 4.
        let c = vec![r(1, 1), r(1, 1)];
        let cons = vec![
            Constraint {
                coeffs: vec![r(1, 1), r(0, 1)],
                rel: Rel::Le,
                rhs: r(2, 1),
            },
            Constraint {
                coeffs: vec![r(0, 1), r(1, 1)],
                rel: Rel::Le,
                rhs: r(3, 1),
            },
            Constraint {
                coeffs: vec![r(1, 1), r(1, 1)],
                rel: Rel::Le,
                rhs: r(4, 1),
            },
            Constraint {
                coeffs: vec![r(1, 1), r(0, 1)],
                rel: Rel::Ge,
                rhs: r(-10, 1),
            },
            Constraint {
                coeffs: vec![r(0, 1), r(1, 1)],
                rel: Rel::Ge,
                rhs: r(-10, 1),
            },
        ];
        match maximize(&c, &cons) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(4, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lp_infeasible() {
        let c = vec![r(1, 1)];
        let cons = vec![
            Constraint {
                coeffs: vec![r(1, 1)],
                rel: Rel::Ge,
                rhs: r(2, 1),
            },
            Constraint {
                coeffs: vec![r(1, 1)],
                rel: Rel::Le,
                rhs: r(1, 1),
            },
        ];
        assert_eq!(maximize(&c, &cons), LpOutcome::Infeasible);
    }

    #[test]
    fn lp_unbounded() {
        let c = vec![r(1, 1)];
        let cons = vec![Constraint {
            coeffs: vec![r(1, 1)],
            rel: Rel::Ge,
            rhs: r(0, 1),
        }];
        assert_eq!(maximize(&c, &cons), LpOutcome::Unbounded);
    }

    #[test]
    fn lp_with_equalities() {
        // max x s.t. x + y = 1, y ≥ 0, x ≥ 0 → 1.
        let c = vec![r(1, 1), r(0, 1)];
        let cons = vec![
            Constraint {
                coeffs: vec![r(1, 1), r(1, 1)],
                rel: Rel::Eq,
                rhs: r(1, 1),
            },
            Constraint {
                coeffs: vec![r(1, 1), r(0, 1)],
                rel: Rel::Ge,
                rhs: r(0, 1),
            },
            Constraint {
                coeffs: vec![r(0, 1), r(1, 1)],
                rel: Rel::Ge,
                rhs: r(0, 1),
            },
        ];
        match maximize(&c, &cons) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, r(1, 1));
                assert_eq!(point[0], r(1, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
