//! Lifted upper hulls: induced subdivisions, tent values, relevance.
//!
//! The tent of `(X, y)` is the least concave function dominating the lifted
//! points `(x_i, y_i)`. A subset `S` is a cell of the induced subdivision
//! exactly when some affine `ℓ` satisfies `ℓ(x_j) ≥ y_j` everywhere with
//! equality precisely on `S`, and `S` spans `R^d`. We enumerate candidate
//! planes through `(d+1)`-subsets of lifted points and collect their equality
//! sets; near-coplanar facets merge automatically because equality is tested
//! within the flatness tolerance. The partition is then validated against the
//! hull volume.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use super::{
    combinations, simplex_volume_normalized, HeightVector, PointConfiguration, Subdivision,
};
use crate::linalg::{solve, Mat};
use crate::rng::mix64;
use crate::{Error, Result};

/// Facet coplanarity threshold, relative to the height scale.
pub(crate) const EPS_FLAT: f64 = 1e-9;

/// One linearity region of the tent: its point indices and the affine
/// function `ℓ(x) = a · x + b` (stored as `[a_1, …, a_d, b]`).
#[derive(Debug, Clone)]
pub(crate) struct UpperCell {
    pub indices: Vec<usize>,
    pub plane: Vec<f64>,
}

impl UpperCell {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = x.len();
        let mut v = self.plane[d];
        for k in 0..d {
            v += self.plane[k] * x[k];
        }
        v
    }
}

fn height_scale(heights: &[f64]) -> f64 {
    heights.iter().fold(1.0f64, |s, v| s.max(v.abs()))
}

/// Solve for the affine function through the lifted points of `subset`;
/// `None` when the projected simplex is too ill-conditioned to trust.
fn plane_through(points: &[Vec<f64>], heights: &[f64], subset: &[usize]) -> Option<Vec<f64>> {
    let d = points[0].len();
    debug_assert_eq!(subset.len(), d + 1);
    // Hadamard-relative degeneracy test on the projected simplex.
    let p0 = &points[subset[0]];
    let mut vol_mat = Mat::zeros(d, d);
    let mut hadamard = 1.0f64;
    for (r, &vi) in subset[1..].iter().enumerate() {
        let mut norm2 = 0.0;
        for c in 0..d {
            let e = points[vi][c] - p0[c];
            vol_mat.set(r, c, e);
            norm2 += e * e;
        }
        hadamard *= norm2.sqrt();
    }
    let vol = crate::linalg::det(&vol_mat).abs();
    if !(vol > 1e-9 * hadamard) {
        return None;
    }
    let mut m = Mat::zeros(d + 1, d + 1);
    let mut rhs = vec![0.0; d + 1];
    for (r, &vi) in subset.iter().enumerate() {
        for c in 0..d {
            m.set(r, c, points[vi][c]);
        }
        m.set(r, d, 1.0);
        rhs[r] = heights[vi];
    }
    solve(&m, &rhs)
}

/// All linearity regions of the tent over `points` with the given `heights`.
pub(crate) fn upper_cells(
    points: &[Vec<f64>],
    heights: &[f64],
    tol_rel: f64,
) -> Result<Vec<UpperCell>> {
    let n = points.len();
    let d = points[0].len();
    debug_assert_eq!(heights.len(), n);
    let tol = tol_rel * height_scale(heights);
    let mut found: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    'subsets: for subset in combinations(n, d + 1) {
        let Some(plane) = plane_through(points, heights, &subset) else {
            continue;
        };
        // Self-check: the solve must reproduce its own interpolation data.
        for &i in &subset {
            let mut v = plane[d];
            for k in 0..d {
                v += plane[k] * points[i][k];
            }
            if (v - heights[i]).abs() > 0.25 * tol {
                continue 'subsets;
            }
        }
        let mut cell = Vec::with_capacity(d + 1);
        for j in 0..n {
            let mut v = plane[d];
            for k in 0..d {
                v += plane[k] * points[j][k];
            }
            let r = v - heights[j];
            if r < -tol {
                continue 'subsets; // some lifted point pokes above the plane
            }
            if r <= tol {
                cell.push(j);
            }
        }
        found.entry(cell).or_insert(plane);
    }
    if found.is_empty() {
        return Err(Error::HullDegenerate("no valid tent plane found".into()));
    }
    Ok(found
        .into_iter()
        .map(|(indices, plane)| UpperCell { indices, plane })
        .collect())
}

/// The regular subdivision induced by lifting with `heights`: projections of
/// the upper facets of the lifted hull, coplanar facets merged, in canonical
/// form. Points strictly below the tent appear in no cell.
pub fn induced_subdivision(config: &PointConfiguration, heights: &[f64]) -> Result<Subdivision> {
    induced_subdivision_with_tol(config, heights, EPS_FLAT)
}

/// As [`induced_subdivision`], with an explicit flatness tolerance. Larger
/// tolerances merge nearly coplanar facets; the stratum classifier in the
/// solver uses this to probe coarser candidate subdivisions.
pub(crate) fn induced_subdivision_with_tol(
    config: &PointConfiguration,
    heights: &[f64],
    tol_rel: f64,
) -> Result<Subdivision> {
    check_len(config, heights)?;
    let cells = upper_cells(config.points(), heights, tol_rel)?;
    let total = config.hull_volume_normalized();
    let mut covered = 0.0;
    for c in &cells {
        covered += cell_volume(config, &c.indices)?;
    }
    if ((covered - total) / total).abs() > 1e-6 {
        return Err(Error::HullDegenerate(format!(
            "cells cover volume {covered} of {total}"
        )));
    }
    Ok(Subdivision::new(
        cells.into_iter().map(|c| c.indices).collect(),
    ))
}

fn check_len(config: &PointConfiguration, heights: &[f64]) -> Result<()> {
    if heights.len() != config.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} heights for {} points",
            heights.len(),
            config.n()
        )));
    }
    if heights.iter().any(|v| !v.is_finite()) {
        return Err(Error::DimensionMismatch("non-finite height".into()));
    }
    Ok(())
}

/// Tent values at all configuration points: the pointwise minimum over the
/// cell planes (a concave piecewise-affine function equals the minimum of
/// its pieces' affine extensions).
pub(crate) fn tent_values_at_points(points: &[Vec<f64>], cells: &[UpperCell]) -> Vec<f64> {
    points
        .iter()
        .map(|x| {
            cells
                .iter()
                .map(|c| c.eval(x))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// The tent value `h_{X,y}(t)`, or `-∞` outside the hull.
pub fn tent_value(config: &PointConfiguration, heights: &[f64], t: &[f64]) -> Result<f64> {
    check_len(config, heights)?;
    if t.len() != config.dim() {
        return Err(Error::DimensionMismatch(format!(
            "query point has dimension {}, expected {}",
            t.len(),
            config.dim()
        )));
    }
    if !point_in_hull(config, t) {
        return Ok(f64::NEG_INFINITY);
    }
    let cells = upper_cells(config.points(), heights, EPS_FLAT)?;
    Ok(cells
        .iter()
        .map(|c| c.eval(t))
        .fold(f64::INFINITY, f64::min))
}

/// Whether every tent pole touches the tent: `h_{X,y}(x_i) = y_i` for all `i`
/// within the relevance tolerance.
pub fn is_relevant(config: &PointConfiguration, heights: &[f64]) -> Result<bool> {
    check_len(config, heights)?;
    let cells = upper_cells(config.points(), heights, EPS_FLAT)?;
    let tents = tent_values_at_points(config.points(), &cells);
    let tol = super::EPS_REL * height_scale(heights);
    Ok(heights.iter().zip(&tents).all(|(y, t)| t - y <= tol))
}

/// Project heights onto the tent: `y'_i = h_{X,y}(x_i)`. Idempotent, leaves
/// the tent unchanged, and raises exactly the points hanging below it.
pub fn make_relevant(config: &PointConfiguration, heights: &[f64]) -> Result<HeightVector> {
    check_len(config, heights)?;
    let cells = upper_cells(config.points(), heights, EPS_FLAT)?;
    let tents = tent_values_at_points(config.points(), &cells);
    Ok(HeightVector(
        heights
            .iter()
            .zip(&tents)
            .map(|(&y, &t)| if t > y { t } else { y })
            .collect(),
    ))
}

/// Index of the simplex-with-gap offenders, for diagnostics.
pub(crate) fn relevance_violation(
    config: &PointConfiguration,
    heights: &[f64],
) -> Result<Option<(usize, f64)>> {
    let cells = upper_cells(config.points(), heights, EPS_FLAT)?;
    let tents = tent_values_at_points(config.points(), &cells);
    let tol = super::EPS_REL * height_scale(heights);
    let mut worst: Option<(usize, f64)> = None;
    for (i, (y, t)) in heights.iter().zip(&tents).enumerate() {
        let gap = t - y;
        if gap > tol && worst.is_none_or(|(_, g)| gap > g) {
            worst = Some((i, gap));
        }
    }
    Ok(worst)
}

/// Containment of `t` in `conv(X)`, via the configuration's cached
/// triangulation and barycentric sign tests.
pub(crate) fn point_in_hull(config: &PointConfiguration, t: &[f64]) -> bool {
    let scale = config
        .points()
        .iter()
        .flatten()
        .fold(1.0f64, |s, v| s.max(v.abs()));
    for simplex in config.full_triangulation() {
        if let Some(lam) = barycentric(config.points(), simplex, t) {
            if lam.iter().all(|&l| l >= -1e-9 * scale.max(1.0)) {
                return true;
            }
        }
    }
    false
}

/// Barycentric coordinates of `t` with respect to a simplex, or `None` for a
/// degenerate simplex.
pub(crate) fn barycentric(points: &[Vec<f64>], simplex: &[usize], t: &[f64]) -> Option<Vec<f64>> {
    let d = t.len();
    let mut m = Mat::zeros(d + 1, d + 1);
    let mut rhs = vec![0.0; d + 1];
    for (c, &vi) in simplex.iter().enumerate() {
        for r in 0..d {
            m.set(r, c, points[vi][r]);
        }
        m.set(d, c, 1.0);
    }
    rhs[..d].copy_from_slice(t);
    rhs[d] = 1.0;
    solve(&m, &rhs)
}

/// Triangulate the points of `subset` (all of them used) by lifting onto a
/// strictly concave paraboloid; deterministic jitter resolves flat ties such
/// as cocircularity. Returns simplices as global index lists.
pub(crate) fn triangulate_subset(points: &[Vec<f64>], subset: &[usize]) -> Result<Vec<Vec<usize>>> {
    let d = points[0].len();
    if subset.len() == d + 1 {
        return Ok(vec![subset.to_vec()]);
    }
    let local: Vec<Vec<f64>> = subset.iter().map(|&i| points[i].clone()).collect();
    let mut centroid = vec![0.0; d];
    for p in &local {
        for k in 0..d {
            centroid[k] += p[k] / local.len() as f64;
        }
    }
    let scale2 = local
        .iter()
        .map(|p| {
            p.iter()
                .zip(&centroid)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let base: Vec<f64> = local
        .iter()
        .map(|p| {
            -p.iter()
                .zip(&centroid)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / scale2
        })
        .collect();
    for attempt in 0..8u32 {
        let eps = if attempt == 0 {
            0.0
        } else {
            1e-7 * 4.0f64.powi(attempt as i32 - 1)
        };
        let heights: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(i, &h)| {
                let r =
                    mix64((i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ u64::from(attempt));
                h + eps * ((r >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
            })
            .collect();
        let Ok(cells) = upper_cells(&local, &heights, EPS_FLAT) else {
            continue;
        };
        if !cells.iter().all(|c| c.indices.len() == d + 1) {
            continue;
        }
        let mut used = vec![false; local.len()];
        for c in &cells {
            for &i in &c.indices {
                used[i] = true;
            }
        }
        if !used.iter().all(|&u| u) {
            continue;
        }
        let mut out: Vec<Vec<usize>> = cells
            .into_iter()
            .map(|c| {
                let mut s: Vec<usize> = c.indices.iter().map(|&i| subset[i]).collect();
                s.sort_unstable();
                s
            })
            .collect();
        out.sort();
        return Ok(out);
    }
    Err(Error::HullDegenerate(
        "could not triangulate cell after jitter escalation".into(),
    ))
}

/// Normalized volume of the hull of a point subset.
pub(crate) fn polytope_volume_normalized(points: &[Vec<f64>], subset: &[usize]) -> Result<f64> {
    Ok(triangulate_subset(points, subset)?
        .iter()
        .map(|s| simplex_volume_normalized(points, s))
        .sum())
}

/// Cached normalized cell volume, via the cached cell refinement.
pub(crate) fn cell_volume(config: &PointConfiguration, cell: &[usize]) -> Result<f64> {
    Ok(cell_refinement(config, cell)?
        .iter()
        .map(|s| simplex_volume_normalized(config.points(), s))
        .sum())
}

type RefineKey = (u64, Vec<usize>);
type RefineCache = Mutex<HashMap<RefineKey, Arc<Vec<Vec<usize>>>>>;
static REFINE_CACHE: OnceLock<RefineCache> = OnceLock::new();

/// A triangulation of one subdivision cell using all of the cell's points,
/// cached per configuration.
pub(crate) fn cell_refinement(
    config: &PointConfiguration,
    cell: &[usize],
) -> Result<Arc<Vec<Vec<usize>>>> {
    let cache = REFINE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (config.fingerprint(), cell.to_vec());
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let tri = Arc::new(triangulate_subset(config.points(), cell)?);
    let mut map = cache.lock().unwrap();
    if map.len() > 200_000 {
        map.clear();
    }
    map.insert(key, tri.clone());
    Ok(tri)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(points: &[&[f64]]) -> PointConfiguration {
        PointConfiguration::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    fn square() -> PointConfiguration {
        cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]])
    }

    fn hexagon() -> PointConfiguration {
        cfg(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[2.0, 1.0],
            &[2.0, 2.0],
            &[1.0, 2.0],
            &[0.0, 1.0],
        ])
    }

    #[test]
    fn constant_heights_trivial_subdivision() {
        let c = square();
        let s = induced_subdivision(&c, &[3.0, 3.0, 3.0, 3.0]).unwrap();
        assert_eq!(s.cells(), &[vec![0, 1, 2, 3]]);
    }

    #[test]
    fn constant_heights_include_interior_points() {
        let c = cfg(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[1.0, 1.0],
            &[0.0, 1.0],
            &[0.4, 0.5],
        ]);
        let s = induced_subdivision(&c, &[0.0; 5]).unwrap();
        assert_eq!(s.cells(), &[vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn square_fold_along_raised_diagonal() {
        let c = square();
        let s = induced_subdivision(&c, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(s.cells(), &[vec![0, 1, 2], vec![0, 2, 3]]);
    }

    #[test]
    fn hexagon_fan_from_raised_pole() {
        // Lifting vertex 1 above the rest folds a fan of four triangles.
        let c = hexagon();
        let y = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let s = induced_subdivision(&c, &y).unwrap();
        assert_eq!(
            s.cells(),
            &[vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 4], vec![0, 4, 5]]
        );
    }

    #[test]
    fn tent_value_square_center() {
        let c = square();
        let v = tent_value(&c, &[1.0, 0.0, 1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let outside = tent_value(&c, &[1.0, 0.0, 1.0, 0.0], &[2.0, 2.0]).unwrap();
        assert_eq!(outside, f64::NEG_INFINITY);
    }

    #[test]
    fn tent_value_at_pole() {
        let c = square();
        let v = tent_value(&c, &[1.0, 0.0, 1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relevance_of_line_configuration() {
        let c = cfg(&[&[0.0], &[1.0], &[2.0]]);
        assert!(is_relevant(&c, &[0.0, 1.0, 0.0]).unwrap());
        assert!(!is_relevant(&c, &[0.0, -5.0, 0.0]).unwrap());
        assert!(is_relevant(&c, &[7.0, 7.0, 7.0]).unwrap());
    }

    #[test]
    fn center_below_is_not_relevant() {
        let c = cfg(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[1.0, 1.0],
            &[0.0, 1.0],
            &[0.5, 0.5],
        ]);
        assert!(!is_relevant(&c, &[0.0, 0.0, 0.0, 0.0, -3.0]).unwrap());
    }

    #[test]
    fn make_relevant_lifts_midpoint() {
        let c = cfg(&[&[0.0], &[1.0], &[2.0]]);
        let y = make_relevant(&c, &[0.0, -5.0, 0.0]).unwrap();
        assert_eq!(y.0, vec![0.0, 0.0, 0.0]);
        let again = make_relevant(&c, &y.0).unwrap();
        assert_eq!(again.0, y.0);
    }

    #[test]
    fn make_relevant_keeps_relevant_heights() {
        let c = square();
        let y = [1.0, 0.0, 1.0, 0.0];
        let out = make_relevant(&c, &y).unwrap();
        for (a, b) in out.0.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn subset_triangulation_square_plus_center() {
        let c = cfg(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[1.0, 1.0],
            &[0.0, 1.0],
            &[0.5, 0.5],
        ]);
        let tri = triangulate_subset(c.points(), &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(tri.len(), 4);
        let total: f64 = tri
            .iter()
            .map(|s| simplex_volume_normalized(c.points(), s))
            .sum();
        assert!((total - 2.0).abs() < 1e-10);
    }

    #[test]
    fn hull_volume_hexagon() {
        assert!((hexagon().hull_volume_normalized() - 6.0).abs() < 1e-10);
    }

    #[test]
    fn affine_shift_invariance() {
        let c = hexagon();
        let y = [0.3, -0.2, 0.7, 0.1, -0.5, 0.4];
        let base = induced_subdivision(&c, &y).unwrap();
        let a = [0.8, -1.3];
        let b = 2.5;
        let shifted: Vec<f64> = (0..6)
            .map(|i| y[i] + a[0] * c.point(i)[0] + a[1] * c.point(i)[1] + b)
            .collect();
        let s2 = induced_subdivision(&c, &shifted).unwrap();
        assert_eq!(base, s2);
    }
}
