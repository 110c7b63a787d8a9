//! Exact integration of `exp(piecewise affine)` over simplices and
//! subdivided polytopes.
//!
//! Over one simplex with vertex heights `y_0,…,y_d`,
//! `∫_σ exp(ℓ) dt = vol(σ) · exp[y_0,…,y_d]` where `vol` is the normalized
//! (determinant) volume and `exp[…]` the divided difference of the
//! exponential. The constant-height limit `e^y · vol(σ)/d!` pins the volume
//! convention. Summing over the cells of a triangulation integrates any tent
//! function; `total_mass` triangulates each induced cell on the fly, and the
//! result does not depend on the refinement choice.

use crate::ddexp::exp_divided_difference;
use crate::geometry::{
    cell_refinement, induced_subdivision, make_relevant, normalized_volume,
    secondary_cone_contains, simplex_volume_normalized, HeightVector, PointConfiguration, Simplex,
    Triangulation,
};
use crate::{Error, Result};

/// Value of `∫_P exp(h_{X,y})` together with its per-cell decomposition.
#[derive(Debug, Clone)]
pub struct MassResult {
    pub total_mass: f64,
    pub per_cell: Vec<(Vec<usize>, f64)>,
}

/// `Σ_i e^{y_i} / ∏_{j≠i}(y_i − y_j)`, evaluated stably for any height
/// configuration: clustered values switch to the shifted series, partial
/// clusters recurse across their widest gap. Always positive; the confluent
/// limit at equal values `y` is `e^y/d!`.
pub fn stable_exp_divided_difference(values: &[f64]) -> f64 {
    exp_divided_difference(values)
}

/// `∫_σ exp(ℓ)` for the affine `ℓ` taking the given values at the simplex
/// vertices. Degenerate simplices integrate to zero.
pub fn exp_integral_simplex(
    config: &PointConfiguration,
    simplex: &Simplex,
    heights_at_vertices: &[f64],
) -> Result<f64> {
    let d = config.dim();
    if simplex.vertices().len() != d + 1 || heights_at_vertices.len() != d + 1 {
        return Err(Error::DimensionMismatch(format!(
            "simplex and heights must have {} entries",
            d + 1
        )));
    }
    if let Some(&bad) = simplex.vertices().iter().find(|&&v| v >= config.n()) {
        return Err(Error::DimensionMismatch(format!(
            "vertex index {} out of range",
            bad + 1
        )));
    }
    let vol = normalized_volume(config, simplex);
    Ok(vol * exp_divided_difference(heights_at_vertices))
}

/// Integrate the piecewise-affine interpolant of `heights` over a
/// triangulation whose closed secondary cone contains the heights (the tent
/// must be affine on every cell; otherwise the interpolant is not the tent).
pub fn exp_integral_subdivision(
    config: &PointConfiguration,
    triangulation: &Triangulation,
    heights: &[f64],
) -> Result<MassResult> {
    if !secondary_cone_contains(config, triangulation, heights)? {
        return Err(Error::ConeViolation);
    }
    let mut per_cell = Vec::with_capacity(triangulation.simplices().len());
    let mut total = 0.0;
    for s in triangulation.simplices() {
        let vals: Vec<f64> = s.vertices().iter().map(|&i| heights[i]).collect();
        let mass = normalized_volume(config, s) * exp_divided_difference(&vals);
        total += mass;
        per_cell.push((s.vertices().to_vec(), mass));
    }
    Ok(MassResult {
        total_mass: total,
        per_cell,
    })
}

/// `∫_P exp(h_{X,y})`: induce the subdivision, triangulate each cell, and sum
/// the closed-form simplex integrals. Per-cell masses are reported for the
/// induced (possibly non-simplicial) cells.
pub fn total_mass(config: &PointConfiguration, heights: &[f64]) -> Result<MassResult> {
    let sub = induced_subdivision(config, heights)?;
    let mut per_cell = Vec::with_capacity(sub.num_cells());
    let mut total = 0.0;
    for cell in sub.cells() {
        let mass = cell_mass(config, cell, heights)?;
        total += mass;
        per_cell.push((cell.clone(), mass));
    }
    Ok(MassResult {
        total_mass: total,
        per_cell,
    })
}

fn cell_mass(config: &PointConfiguration, cell: &[usize], heights: &[f64]) -> Result<f64> {
    let refinement = cell_refinement(config, cell)?;
    Ok(mass_over_simplices(config.points(), &refinement, heights))
}

/// Mass of a fixed simplex family (no cone checks): `Σ vol(σ)·exp[y_σ]`.
pub(crate) fn mass_over_simplices(
    points: &[Vec<f64>],
    simplices: &[Vec<usize>],
    heights: &[f64],
) -> f64 {
    let mut total = 0.0;
    let mut vals: Vec<f64> = Vec::new();
    for s in simplices {
        vals.clear();
        vals.extend(s.iter().map(|&i| heights[i]));
        total += simplex_volume_normalized(points, s) * exp_divided_difference(&vals);
    }
    total
}

/// Gradient of [`mass_over_simplices`] in the heights: component `k` is
/// `Σ_{σ∋k} vol(σ) · exp[y_σ, y_k]` — one extra repetition of the node
/// differentiates the divided difference.
pub(crate) fn mass_gradient_over_simplices(
    points: &[Vec<f64>],
    simplices: &[Vec<usize>],
    heights: &[f64],
    grad: &mut [f64],
) {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut nodes: Vec<f64> = Vec::new();
    for s in simplices {
        let vol = simplex_volume_normalized(points, s);
        for &k in s {
            nodes.clear();
            nodes.extend(s.iter().map(|&i| heights[i]));
            nodes.push(heights[k]);
            grad[k] += vol * exp_divided_difference(&nodes);
        }
    }
}

/// Hessian of the mass in the heights: `Σ_{σ ⊇ {k,l}} vol(σ)·exp[y_σ, y_k, y_l]`
/// off the diagonal and twice `exp[y_σ, y_k, y_k]` on it. Positive definite
/// whenever the family uses every point.
pub(crate) fn mass_hessian_over_simplices(
    points: &[Vec<f64>],
    simplices: &[Vec<usize>],
    heights: &[f64],
    hess: &mut crate::linalg::Mat,
) {
    hess.a.iter_mut().for_each(|v| *v = 0.0);
    let mut nodes: Vec<f64> = Vec::new();
    for s in simplices {
        let vol = simplex_volume_normalized(points, s);
        for (a, &k) in s.iter().enumerate() {
            for &l in &s[a..] {
                nodes.clear();
                nodes.extend(s.iter().map(|&i| heights[i]));
                nodes.push(heights[k]);
                nodes.push(heights[l]);
                let v = vol * exp_divided_difference(&nodes);
                if k == l {
                    let cur = hess.get(k, k);
                    hess.set(k, k, cur + 2.0 * v);
                } else {
                    let cur = hess.get(k, l);
                    hess.set(k, l, cur + v);
                    let cur = hess.get(l, k);
                    hess.set(l, k, cur + v);
                }
            }
        }
    }
}

/// Shift heights to unit total mass after projecting onto the tent:
/// `normalize(y) = make_relevant(y) − log(mass)·1`. The induced subdivision
/// is unchanged and the result is relevant with mass 1.
pub fn normalize_heights(config: &PointConfiguration, heights: &[f64]) -> Result<HeightVector> {
    let relevant = make_relevant(config, heights)?;
    let mass = total_mass(config, relevant.as_slice())?.total_mass;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::HullDegenerate(format!(
            "total mass {mass} cannot be normalized"
        )));
    }
    let shift = mass.ln();
    Ok(HeightVector(
        relevant.as_slice().iter().map(|y| y - shift).collect(),
    ))
}

/// Constant height giving the uniform density of mass 1 on `conv(X)`:
/// `c = −log(vol(P)/d!)`, the Euclidean hull volume.
pub fn uniform_height(config: &PointConfiguration) -> f64 {
    let d = config.dim();
    let dfact: f64 = (1..=d).map(|k| k as f64).product();
    -(config.hull_volume_normalized() / dfact).ln()
}

/// Membership in the feasible body `{y : ∫_P exp(h_{X,y}) ≤ 1}`.
pub fn samworth_membership(config: &PointConfiguration, heights: &[f64]) -> Result<bool> {
    Ok(total_mass(config, heights)?.total_mass <= 1.0 + 1e-12)
}

/// Internal consistency of a mass decomposition.
#[cfg(test)]
pub(crate) fn per_cell_sums_to_total(m: &MassResult) -> bool {
    let s: f64 = m.per_cell.iter().map(|(_, v)| v).sum();
    (s - m.total_mass).abs() <= 1e-12 * m.total_mass.abs().max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Subdivision;

    fn cfg(points: &[&[f64]]) -> PointConfiguration {
        PointConfiguration::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    fn square() -> PointConfiguration {
        cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]])
    }

    #[test]
    fn constant_heights_fix_volume_convention() {
        // ∫_σ e^y = e^y · vol_norm(σ)/d!; this is the load-bearing check that
        // `vol` means the determinant convention.
        let c = cfg(&[&[0.0, 0.0], &[2.0, 0.0], &[0.0, 1.0]]);
        let s = Simplex::new(vec![0, 1, 2]);
        let y = 0.7;
        let got = exp_integral_simplex(&c, &s, &[y, y, y]).unwrap();
        let expect = y.exp() * 2.0 / 2.0; // vol_norm = 2, d! = 2
        assert!((got - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn segment_integral_analytic() {
        // ∫₀¹ e^t dt = e − 1.
        let c = cfg(&[&[0.0], &[1.0]]);
        let s = Simplex::new(vec![0, 1]);
        let got = exp_integral_simplex(&c, &s, &[0.0, 1.0]).unwrap();
        assert!((got - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn stable_kernel_confluent_and_continuity() {
        let y = 1.3;
        assert!((stable_exp_divided_difference(&[y, y, y]) - y.exp() / 2.0).abs() < 1e-14);
        let eps = 1e-9;
        let v = stable_exp_divided_difference(&[0.0, eps, 2.0 * eps]);
        assert!((v - 0.5).abs() < 1e-8);
    }

    #[test]
    fn subdivision_integral_needs_cone_membership() {
        let c = square();
        let y = [1.0, 0.0, 1.0, 0.0];
        let good = Triangulation::from_cells(vec![vec![0, 1, 2], vec![0, 2, 3]]);
        let bad = Triangulation::from_cells(vec![vec![0, 1, 3], vec![1, 2, 3]]);
        assert!(exp_integral_subdivision(&c, &good, &y).is_ok());
        assert!(matches!(
            exp_integral_subdivision(&c, &bad, &y),
            Err(Error::ConeViolation)
        ));
    }

    #[test]
    fn square_mass_sums_two_triangles() {
        let c = square();
        let y = [1.0, 0.0, 1.0, 0.0];
        let t = Triangulation::from_cells(vec![vec![0, 1, 2], vec![0, 2, 3]]);
        let by_tri = exp_integral_subdivision(&c, &t, &y).unwrap();
        let direct = total_mass(&c, &y).unwrap();
        assert!((by_tri.total_mass - direct.total_mass).abs() < 1e-12 * direct.total_mass);
        assert!(per_cell_sums_to_total(&by_tri));
        assert!(per_cell_sums_to_total(&direct));
    }

    #[test]
    fn uniform_density_has_mass_one() {
        let c = square();
        let h = uniform_height(&c);
        let m = total_mass(&c, &[h; 4]).unwrap();
        assert!((m.total_mass - 1.0).abs() < 1e-12);
        assert!(samworth_membership(&c, &[h; 4]).unwrap());
    }

    #[test]
    fn shift_scales_mass_exactly() {
        let c = square();
        let y = [0.3, -0.1, 0.4, 0.0];
        let m1 = total_mass(&c, &y).unwrap().total_mass;
        let shifted: Vec<f64> = y.iter().map(|v| v + 2f64.ln()).collect();
        let m2 = total_mass(&c, &shifted).unwrap().total_mass;
        assert!((m2 - 2.0 * m1).abs() < 1e-12 * m2);
    }

    #[test]
    fn normalize_heights_round_trip() {
        let c = square();
        let y = [0.9, -0.4, 0.2, 0.5];
        let n = normalize_heights(&c, &y).unwrap();
        let m = total_mass(&c, n.as_slice()).unwrap().total_mass;
        assert!((m - 1.0).abs() < 1e-10);
        let again = normalize_heights(&c, n.as_slice()).unwrap();
        for (a, b) in again.as_slice().iter().zip(n.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        // Same induced subdivision before and after.
        let s1 = induced_subdivision(&c, &y).unwrap();
        let s2 = induced_subdivision(&c, n.as_slice()).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn constant_zero_normalizes_to_uniform() {
        let c = square();
        let n = normalize_heights(&c, &[0.0; 4]).unwrap();
        let expect = uniform_height(&c);
        for v in n.as_slice() {
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_independence() {
        // The square with a flat top: integrate via both diagonals.
        let c = square();
        let y = [0.2, 0.2, 0.2, 0.2];
        let t1 = Triangulation::from_cells(vec![vec![0, 1, 2], vec![0, 2, 3]]);
        let t2 = Triangulation::from_cells(vec![vec![0, 1, 3], vec![1, 2, 3]]);
        let m1 = exp_integral_subdivision(&c, &t1, &y).unwrap().total_mass;
        let m2 = exp_integral_subdivision(&c, &t2, &y).unwrap().total_mass;
        assert!((m1 - m2).abs() < 1e-12 * m1);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = square();
        let simplices = vec![vec![0, 1, 2], vec![0, 2, 3]];
        let y = [0.4, -0.2, 0.1, 0.3];
        let mut grad = vec![0.0; 4];
        mass_gradient_over_simplices(c.points(), &simplices, &y, &mut grad);
        let h = 1e-6;
        for k in 0..4 {
            let mut up = y;
            let mut dn = y;
            up[k] += h;
            dn[k] -= h;
            let fd = (mass_over_simplices(c.points(), &simplices, &up)
                - mass_over_simplices(c.points(), &simplices, &dn))
                / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let c = square();
        let simplices = vec![vec![0, 1, 2], vec![0, 2, 3]];
        let y = [0.4, -0.2, 0.1, 0.3];
        let mut hess = crate::linalg::Mat::zeros(4, 4);
        mass_hessian_over_simplices(c.points(), &simplices, &y, &mut hess);
        let h = 1e-5;
        let mut g_up = vec![0.0; 4];
        let mut g_dn = vec![0.0; 4];
        for k in 0..4 {
            let mut up = y;
            let mut dn = y;
            up[k] += h;
            dn[k] -= h;
            mass_gradient_over_simplices(c.points(), &simplices, &up, &mut g_up);
            mass_gradient_over_simplices(c.points(), &simplices, &dn, &mut g_dn);
            for l in 0..4 {
                let fd = (g_up[l] - g_dn[l]) / (2.0 * h);
                assert!((fd - hess.get(k, l)).abs() < 1e-7, "k={k} l={l}");
            }
        }
    }

    #[test]
    fn mass_result_reports_induced_cells() {
        let c = square();
        let m = total_mass(&c, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        let cells: Vec<Vec<usize>> = m.per_cell.iter().map(|(c, _)| c.clone()).collect();
        assert_eq!(Subdivision::new(cells).cells().len(), 2);
    }
}
