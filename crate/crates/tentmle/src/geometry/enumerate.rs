//! Triangulation enumeration and exact regularity certification.
//!
//! Enumeration is a witness-driven branch-and-bound over candidate simplices
//! with proper-intersection checks; regularity of a candidate is then decided
//! exactly: coordinates are rationalized and the strict domination system of
//! the secondary cone (every cell plane strictly above every non-member
//! lifted point, exactly through its members) is tested for feasibility with
//! the rational simplex solver. Floating LP misclassifies near-degenerate
//! lifts, which is precisely where the interesting fixtures live.

use std::collections::HashMap;

use super::hull::{barycentric, polytope_volume_normalized};
use super::{
    combinations, simplex_volume_normalized, PointConfiguration, Subdivision, Triangulation,
};
use crate::exact::{self, Constraint, LpOutcome, Rat, Rel};
use crate::linalg::{nullspace_basis, solve, Mat};
use crate::rng::mix64;
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};

/// Guard against combinatorial explosion in enumeration entry points.
pub const DEFAULT_ENUM_LIMIT: usize = 9;

/// All regular triangulations of the configuration, canonically ordered.
pub fn enumerate_regular_triangulations(config: &PointConfiguration) -> Result<Vec<Triangulation>> {
    enumerate_regular_triangulations_with_limit(config, DEFAULT_ENUM_LIMIT)
}

/// As [`enumerate_regular_triangulations`] with an explicit size guard.
pub fn enumerate_regular_triangulations_with_limit(
    config: &PointConfiguration,
    limit: usize,
) -> Result<Vec<Triangulation>> {
    if config.n() > limit {
        return Err(Error::TooLarge {
            n: config.n(),
            limit,
        });
    }
    let all: Vec<usize> = (0..config.n()).collect();
    let geometric = geometric_triangulations_of_subset(config.points(), &all)?;
    let mut out = Vec::new();
    for cells in geometric {
        if is_regular_cells(config, &cells)? {
            out.push(Triangulation::from_cells(cells));
        }
    }
    out.sort();
    Ok(out)
}

/// All regular triangulations of the configuration refining the given
/// subdivision: each cell is triangulated independently on its own points,
/// the products are combined, and the combinations are filtered by global
/// regularity.
pub fn refining_triangulations(
    config: &PointConfiguration,
    subdivision: &Subdivision,
) -> Result<Vec<Triangulation>> {
    if config.n() > DEFAULT_ENUM_LIMIT {
        return Err(Error::TooLarge {
            n: config.n(),
            limit: DEFAULT_ENUM_LIMIT,
        });
    }
    let products = refining_geometric_triangulations(config.points(), subdivision.cells())?;
    let mut out = Vec::new();
    for cells in products {
        if is_regular_cells(config, &cells)? {
            out.push(Triangulation::from_cells(cells));
        }
    }
    out.sort();
    Ok(out)
}

/// All products of per-cell geometric triangulations, with no regularity
/// filter. Every member is a genuine triangulation of `conv(X)` whose
/// simplices lie inside cells of the subdivision; the solver's optimality
/// certificate needs exactly this family.
pub(crate) fn refining_geometric_triangulations(
    points: &[Vec<f64>],
    cells: &[Vec<usize>],
) -> Result<Vec<Vec<Vec<usize>>>> {
    let mut per_cell: Vec<Vec<Vec<Vec<usize>>>> = Vec::with_capacity(cells.len());
    for cell in cells {
        per_cell.push(geometric_triangulations_of_subset(points, cell)?);
    }
    let mut combos: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for options in &per_cell {
        let mut next = Vec::with_capacity(combos.len() * options.len());
        for base in &combos {
            for opt in options {
                let mut merged = base.clone();
                merged.extend(opt.iter().cloned());
                next.push(merged);
            }
        }
        combos = next;
        if combos.len() > 200_000 {
            return Err(Error::TooLarge {
                n: combos.len(),
                limit: 200_000,
            });
        }
    }
    for c in &mut combos {
        c.sort();
    }
    combos.sort();
    combos.dedup();
    Ok(combos)
}

/// Whether the subdivision is regular for the configuration, decided exactly.
pub fn is_regular_subdivision(
    config: &PointConfiguration,
    subdivision: &Subdivision,
) -> Result<bool> {
    is_regular_cells(config, subdivision.cells())
}

fn is_regular_cells(config: &PointConfiguration, cells: &[Vec<usize>]) -> Result<bool> {
    let cons = domination_constraints(config, cells, false)?;
    let zeros = vec![Rat::zero(); config.n()];
    Ok(matches!(
        exact::maximize(&zeros, &cons),
        LpOutcome::Optimal { .. }
    ))
}

/// A height vector in the relative interior of the subdivision's secondary
/// cone, found exactly by maximizing the least slack of the strict system
/// inside a box around `center`. `None` when the subdivision is not regular.
pub fn secondary_cone_interior_point(
    config: &PointConfiguration,
    subdivision: &Subdivision,
    center: &[f64],
    radius: f64,
) -> Result<Option<Vec<f64>>> {
    let n = config.n();
    let mut cons = domination_constraints(config, subdivision.cells(), true)?;
    let rad = exact::rat(radius);
    for i in 0..n {
        let mut lo = vec![Rat::zero(); n + 1];
        lo[i] = Rat::one();
        let ci = exact::rat(center[i]);
        cons.push(Constraint {
            coeffs: lo.clone(),
            rel: Rel::Le,
            rhs: &ci + &rad,
        });
        cons.push(Constraint {
            coeffs: lo,
            rel: Rel::Ge,
            rhs: &ci - &rad,
        });
    }
    // Cap the slack variable so the objective stays bounded.
    let mut tcap = vec![Rat::zero(); n + 1];
    tcap[n] = Rat::one();
    cons.push(Constraint {
        coeffs: tcap.clone(),
        rel: Rel::Le,
        rhs: Rat::one(),
    });
    let mut obj = vec![Rat::zero(); n + 1];
    obj[n] = Rat::one();
    match exact::maximize(&obj, &cons) {
        LpOutcome::Optimal { value, point } if value.is_positive() => {
            Ok(Some(point[..n].iter().map(exact::to_f64).collect()))
        }
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Ok(None),
    }
}

/// Build the strict domination system of a cell family over height variables
/// `y` (exact): each cell's plane passes through its members and stays
/// strictly above every other lifted point. With `with_slack`, a trailing
/// variable `t` replaces the strict margin so it can be maximized.
fn domination_constraints(
    config: &PointConfiguration,
    cells: &[Vec<usize>],
    with_slack: bool,
) -> Result<Vec<Constraint>> {
    let n = config.n();
    let d = config.dim();
    let nvars = if with_slack { n + 1 } else { n };
    let mut cons = Vec::new();
    for cell in cells {
        let basis = exact_basis(config, cell).ok_or_else(|| {
            Error::DegenerateInput(format!(
                "cell {:?} has no affinely independent spanning subset",
                cell.iter().map(|i| i + 1).collect::<Vec<_>>()
            ))
        })?;
        for k in 0..n {
            if basis.contains(&k) {
                continue;
            }
            let lam = exact_barycentric(config, &basis, k);
            let mut row = vec![Rat::zero(); nvars];
            for (l, &bi) in lam.iter().zip(&basis) {
                row[bi] = l.clone();
            }
            row[k] -= Rat::one();
            if cell.contains(&k) {
                cons.push(Constraint {
                    coeffs: row,
                    rel: Rel::Eq,
                    rhs: Rat::zero(),
                });
            } else if with_slack {
                let mut r = row;
                r[n] = -Rat::one();
                cons.push(Constraint {
                    coeffs: r,
                    rel: Rel::Ge,
                    rhs: Rat::zero(),
                });
            } else {
                cons.push(Constraint {
                    coeffs: row,
                    rel: Rel::Ge,
                    rhs: Rat::one(),
                });
            }
        }
        let _ = d;
    }
    Ok(cons)
}

/// First (d+1)-subset of the cell with nonzero exact volume.
fn exact_basis(config: &PointConfiguration, cell: &[usize]) -> Option<Vec<usize>> {
    let d = config.dim();
    if cell.len() < d + 1 {
        return None;
    }
    for combo in combinations(cell.len(), d + 1) {
        let subset: Vec<usize> = combo.iter().map(|&i| cell[i]).collect();
        let m: Vec<Vec<Rat>> = (1..=d)
            .map(|r| {
                (0..d)
                    .map(|c| {
                        exact::rat(config.point(subset[r])[c])
                            - exact::rat(config.point(subset[0])[c])
                    })
                    .collect()
            })
            .collect();
        if !exact::det(m).is_zero() {
            return Some(subset);
        }
    }
    None
}

/// Exact barycentric coordinates of point `k` with respect to `basis`.
fn exact_barycentric(config: &PointConfiguration, basis: &[usize], k: usize) -> Vec<Rat> {
    let d = config.dim();
    let mut a: Vec<Vec<Rat>> = vec![vec![Rat::zero(); d + 1]; d + 1];
    let mut b = vec![Rat::zero(); d + 1];
    for (c, &bi) in basis.iter().enumerate() {
        for r in 0..d {
            a[r][c] = exact::rat(config.point(bi)[r]);
        }
        a[d][c] = Rat::one();
    }
    for r in 0..d {
        b[r] = exact::rat(config.point(k)[r]);
    }
    b[d] = Rat::one();
    exact::solve_system(a, b).expect("basis is affinely independent")
}

/// Float coplanarity rows of a subdivision's stratum: each row states that a
/// cell member's height equals its cell-plane interpolation, `M y = 0`.
pub(crate) fn subdivision_equality_rows(
    config: &PointConfiguration,
    subdivision: &Subdivision,
) -> Vec<Vec<f64>> {
    let n = config.n();
    let d = config.dim();
    let mut rows = Vec::new();
    for cell in subdivision.cells() {
        let Some(basis) = float_basis(config, cell) else {
            continue;
        };
        for &k in cell {
            if basis.contains(&k) {
                continue;
            }
            if let Some(lam) = barycentric(config.points(), &basis, config.point(k)) {
                let mut row = vec![0.0; n];
                for (l, &bi) in lam.iter().zip(&basis) {
                    row[bi] += l;
                }
                row[k] -= 1.0;
                rows.push(row);
            }
        }
        let _ = d;
    }
    rows
}

fn float_basis(config: &PointConfiguration, cell: &[usize]) -> Option<Vec<usize>> {
    let d = config.dim();
    for combo in combinations(cell.len(), d + 1) {
        let subset: Vec<usize> = combo.iter().map(|&i| cell[i]).collect();
        let mut m = Mat::zeros(d, d);
        let mut hadamard = 1.0f64;
        for r in 0..d {
            let mut norm2 = 0.0;
            for c in 0..d {
                let e = config.point(subset[r + 1])[c] - config.point(subset[0])[c];
                m.set(r, c, e);
                norm2 += e * e;
            }
            hadamard *= norm2.sqrt();
        }
        if crate::linalg::det(&m).abs() > 1e-7 * hadamard {
            return Some(subset);
        }
    }
    None
}

/// All geometric triangulations of the points of `subset` (points on the
/// cell's plane may be used or omitted). Witness-driven recursion: each
/// partial family must cover the first uncovered witness point, which makes
/// every triangulation reachable exactly once.
pub(crate) fn geometric_triangulations_of_subset(
    points: &[Vec<f64>],
    subset: &[usize],
) -> Result<Vec<Vec<Vec<usize>>>> {
    let d = points[0].len();
    if subset.len() == d + 1 {
        return Ok(vec![vec![subset.to_vec()]]);
    }
    let coord_scale = subset
        .iter()
        .flat_map(|&i| points[i].iter())
        .fold(1.0f64, |s, v| s.max(v.abs()));
    // Candidate simplices with a conditioning cutoff.
    let mut cands: Vec<Vec<usize>> = Vec::new();
    let mut vols: Vec<f64> = Vec::new();
    for combo in combinations(subset.len(), d + 1) {
        let s: Vec<usize> = combo.iter().map(|&i| subset[i]).collect();
        let v = simplex_volume_normalized(points, &s);
        let mut hadamard = 1.0f64;
        for r in 1..=d {
            let norm2: f64 = (0..d)
                .map(|c| (points[s[r]][c] - points[s[0]][c]).powi(2))
                .sum();
            hadamard *= norm2.sqrt();
        }
        if v > 1e-9 * hadamard.max(1e-300) {
            cands.push(s);
            vols.push(v);
        }
    }
    // Deterministically jittered witnesses, one per candidate centroid.
    let witnesses: Vec<Vec<f64>> = cands
        .iter()
        .enumerate()
        .map(|(ci, s)| {
            (0..d)
                .map(|k| {
                    let centroid: f64 =
                        s.iter().map(|&vi| points[vi][k]).sum::<f64>() / (d + 1) as f64;
                    let r = mix64((ci as u64 + 1) ^ ((k as u64 + 7) << 17));
                    centroid + coord_scale * 3e-8 * ((r >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
                })
                .collect()
        })
        .collect();
    let target = polytope_volume_normalized(points, subset)?;
    let mut compat: HashMap<(usize, usize), bool> = HashMap::new();
    let mut state = Search {
        points,
        cands: &cands,
        vols: &vols,
        witnesses: &witnesses,
        target,
        compat: &mut compat,
        out: Vec::new(),
        chosen: Vec::new(),
        vol_acc: 0.0,
    };
    state.recurse();
    let mut out = state.out;
    for t in &mut out {
        t.sort();
    }
    out.sort();
    out.dedup();
    Ok(out)
}

struct Search<'a> {
    points: &'a [Vec<f64>],
    cands: &'a [Vec<usize>],
    vols: &'a [f64],
    witnesses: &'a [Vec<f64>],
    target: f64,
    compat: &'a mut HashMap<(usize, usize), bool>,
    out: Vec<Vec<Vec<usize>>>,
    chosen: Vec<usize>,
    vol_acc: f64,
}

impl Search<'_> {
    fn recurse(&mut self) {
        if self.out.len() > 100_000 {
            return;
        }
        let uncovered = (0..self.witnesses.len()).find(|&w| {
            !self
                .chosen
                .iter()
                .any(|&c| contains_point(self.points, &self.cands[c], &self.witnesses[w]))
        });
        let Some(w) = uncovered else {
            if ((self.vol_acc - self.target) / self.target).abs() < 1e-7 {
                self.out
                    .push(self.chosen.iter().map(|&c| self.cands[c].clone()).collect());
            }
            return;
        };
        if self.vol_acc > self.target * (1.0 + 1e-7) {
            return;
        }
        for c in 0..self.cands.len() {
            if !contains_point(self.points, &self.cands[c], &self.witnesses[w]) {
                continue;
            }
            if self.chosen.contains(&c) {
                continue;
            }
            let mut ok = true;
            for &prev in &self.chosen {
                let key = (prev.min(c), prev.max(c));
                let disjoint = match self.compat.get(&key) {
                    Some(&v) => v,
                    None => {
                        let v =
                            interiors_disjoint(self.points, &self.cands[key.0], &self.cands[key.1]);
                        self.compat.insert(key, v);
                        v
                    }
                };
                if !disjoint {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            self.chosen.push(c);
            self.vol_acc += self.vols[c];
            self.recurse();
            self.vol_acc -= self.vols[c];
            self.chosen.pop();
        }
    }
}

fn contains_point(points: &[Vec<f64>], simplex: &[usize], t: &[f64]) -> bool {
    match barycentric(points, simplex, t) {
        Some(lam) => lam.iter().all(|&l| l > 1e-12),
        None => false,
    }
}

/// Whether two nondegenerate simplices have disjoint interiors, decided by
/// searching for a separating hyperplane through `d` of their vertices.
fn interiors_disjoint(points: &[Vec<f64>], s1: &[usize], s2: &[usize]) -> bool {
    let d = points[0].len();
    let mut union: Vec<usize> = s1.iter().chain(s2.iter()).copied().collect();
    union.sort_unstable();
    union.dedup();
    let scale = union
        .iter()
        .flat_map(|&i| points[i].iter())
        .fold(1.0f64, |s, v| s.max(v.abs()));
    let tol = 1e-9 * scale;
    for combo in combinations(union.len(), d) {
        let f: Vec<usize> = combo.iter().map(|&i| union[i]).collect();
        let Some(normal) = hyperplane_normal(points, &f) else {
            continue;
        };
        let off: f64 = normal.iter().zip(&points[f[0]]).map(|(a, b)| a * b).sum();
        let side = |s: &[usize]| -> (bool, bool) {
            let mut all_le = true;
            let mut all_ge = true;
            for &vi in s {
                let v: f64 = normal
                    .iter()
                    .zip(&points[vi])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    - off;
                if v > tol {
                    all_le = false;
                }
                if v < -tol {
                    all_ge = false;
                }
            }
            (all_le, all_ge)
        };
        let (le1, ge1) = side(s1);
        let (le2, ge2) = side(s2);
        if (le1 && ge2) || (ge1 && le2) {
            return true;
        }
    }
    false
}

/// Unit normal of the affine hyperplane through `d` points, or `None` when
/// they do not span one.
fn hyperplane_normal(points: &[Vec<f64>], f: &[usize]) -> Option<Vec<f64>> {
    let d = points[0].len();
    debug_assert_eq!(f.len(), d);
    if d == 1 {
        return Some(vec![1.0]);
    }
    let rows: Vec<Vec<f64>> = (1..d)
        .map(|r| (0..d).map(|c| points[f[r]][c] - points[f[0]][c]).collect())
        .collect();
    let m = Mat::from_rows(&rows);
    let basis = nullspace_basis(&m, 1e-9);
    if basis.len() == 1 {
        Some(basis.into_iter().next().unwrap())
    } else {
        None
    }
}

/// Barycentric solve reused by the hull module (re-exported there).
#[allow(dead_code)]
fn _solve_alias(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    solve(a, b)
}
