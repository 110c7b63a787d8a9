//! The symmetric function `H` in mutually checking representations.
//!
//! `H(u_1,…,u_d)` is defined by the closed two-term form
//!
//! ```text
//! H(u) = (−1)^d (1 + Σ_i 1/u_i) / ∏_i u_i  +  Σ_j e^{u_j} / (u_j² ∏_{k≠j}(u_j − u_k))
//! ```
//!
//! and extends to an entire symmetric function of `u` with series
//! `Σ_{r≥0} h_r(u)/(r+d+1)!` (complete homogeneous symmetric polynomials) and
//! integral form `∫_{Σ_d} (1 − Σ t_i) exp(u · t) dt` over the standard
//! simplex. It is positive, increasing in each argument, and convex. In this
//! crate its values are simultaneously the per-point gradient weights of the
//! mass integral and the heights-to-weights map, via the identity
//! `e^{y_k} H({y_i − y_k}) = exp[y_k, y_k, {y_i}]` (a confluent divided
//! difference).
//!
//! The closed form loses ~5 digits once arguments come within `TAU_H` of each
//! other or of zero; `h_eval` switches to the series there.

use crate::ddexp::{exp_divided_difference, HomogeneousSeries};
use crate::{Error, Result};

/// Gap threshold below which the closed form is considered cancellation-bound.
pub const TAU_H: f64 = 0.05;

const SERIES_CAP: usize = 500;

/// Smallest of the pairwise gaps and the distances to zero.
pub fn argument_gap(u: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, &a) in u.iter().enumerate() {
        gap = gap.min(a.abs());
        for &b in &u[i + 1..] {
            gap = gap.min((a - b).abs());
        }
    }
    gap
}

/// The closed two-term form. Requires all arguments nonzero and pairwise
/// distinct with gap above [`TAU_H`]; fails with `NearSingular` otherwise.
/// For very large arguments the exponential sum is accumulated in shifted
/// form to avoid overflow.
pub fn h_closed(u: &[f64]) -> Result<f64> {
    let d = u.len();
    assert!(d >= 1, "H takes at least one argument");
    let gap = argument_gap(u);
    if !(gap > TAU_H) {
        return Err(Error::NearSingular { gap });
    }
    let shift = u.iter().fold(0.0f64, |s, &v| s.max(v));
    let mut prod = 1.0f64;
    let mut inv_sum = 1.0f64;
    for &ui in u {
        prod *= ui;
        inv_sum += 1.0 / ui;
    }
    let sign = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
    let poly = sign * inv_sum / prod;
    let mut acc = poly * (-shift).exp();
    for (j, &uj) in u.iter().enumerate() {
        let mut denom = uj * uj;
        for (k, &uk) in u.iter().enumerate() {
            if k != j {
                denom *= uj - uk;
            }
        }
        acc += (uj - shift).exp() / denom;
    }
    Ok(acc * shift.exp())
}

/// Series evaluation `Σ_{r≥0} h_r(u)/(r+d+1)!`, truncated adaptively when the
/// next term falls below `rel_tol` times the partial sum. Converges for every
/// argument (the function is entire); the term cap only bites for argument
/// scales where the closed form applies anyway.
pub fn h_series(u: &[f64], rel_tol: f64) -> Result<f64> {
    series_general(u, u.len() + 1, rel_tol)
}

/// `Σ_{r≥0} h_r(args)/(r+m)!`.
fn series_general(args: &[f64], m: usize, rel_tol: f64) -> Result<f64> {
    let mut hs = HomogeneousSeries::new(args);
    let mut inv_fact = 1.0f64;
    for k in 2..=m {
        inv_fact /= k as f64;
    }
    let mut sum = inv_fact;
    let mut settled = 0u32;
    for r in 1..=SERIES_CAP {
        hs.advance();
        inv_fact /= (m + r) as f64;
        let term = hs.value() * inv_fact;
        sum += term;
        if !sum.is_finite() {
            // h_r overflows before the factorial tames it; the divided
            // difference kernel handles this scale in shifted form.
            return Err(Error::SeriesDiverged(r));
        }
        if term.abs() <= rel_tol * sum.abs() {
            settled += 1;
            // Mixed-sign arguments make single terms dip; require two quiet
            // terms in a row before truncating.
            if settled >= 2 {
                return Ok(sum);
            }
        } else {
            settled = 0;
        }
    }
    Err(Error::SeriesDiverged(SERIES_CAP))
}

/// Stability dispatcher: closed form on well-separated arguments, series
/// otherwise. Total on all finite inputs.
pub fn h_eval(u: &[f64]) -> f64 {
    if argument_gap(u) > TAU_H {
        h_closed(u).expect("gap checked")
    } else {
        match h_series(u, 1e-15) {
            Ok(v) => v,
            // Huge but clustered arguments: fall back to the divided
            // difference kernel, which splits across the large gaps.
            Err(_) => {
                let mut nodes = Vec::with_capacity(u.len() + 2);
                nodes.push(0.0);
                nodes.push(0.0);
                nodes.extend_from_slice(u);
                exp_divided_difference(&nodes)
            }
        }
    }
}

/// Complete homogeneous symmetric polynomial `h_r(u)` via the stable
/// prefix recurrence `h_r(u_1..u_k) = h_r(u_1..u_{k−1}) + u_k h_{r−1}(u_1..u_k)`.
pub fn complete_homogeneous(r: usize, u: &[f64]) -> f64 {
    let mut hs = HomogeneousSeries::new(u);
    for _ in 0..r {
        hs.advance();
    }
    hs.value()
}

/// Independent cross-check: numerical integration of
/// `(1 − Σ t_i) exp(u · t)` over the standard simplex by a tensor
/// Gauss-Legendre rule under the Duffy map. Intended for `d ≤ 3`.
pub fn h_quadrature(u: &[f64], num_nodes: usize) -> f64 {
    let d = u.len();
    let (nodes, weights) = gauss_legendre_unit(num_nodes);
    let mut total = 0.0;
    let mut idx = vec![0usize; d];
    'outer: loop {
        // Duffy map: t_k = s_k · (1 − t_1 − … − t_{k−1}).
        let mut rem = 1.0f64;
        let mut jac = 1.0f64;
        let mut dot = 0.0f64;
        let mut w = 1.0f64;
        for k in 0..d {
            let s = nodes[idx[k]];
            w *= weights[idx[k]];
            let t = s * rem;
            jac *= rem;
            dot += u[k] * t;
            rem -= t;
        }
        total += w * jac * rem * dot.exp();
        for k in 0..d {
            idx[k] += 1;
            if idx[k] < num_nodes {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    total
}

/// First partial `∂H/∂u_i`. For well-separated `u_i` this uses the shift
/// identity `∂H/∂x₁ = (e^{x₁} H(−x₁, x₂−x₁, …) − H(x)) / x₁` (after moving
/// `u_i` to the front); for `|u_i| < TAU_H` it differentiates the series term
/// by term, which amounts to evaluating the series with `u_i` repeated.
/// Always positive.
pub fn h_partial(u: &[f64], i: usize) -> f64 {
    let d = u.len();
    assert!(i < d, "partial index out of range");
    let ui = u[i];
    if ui.abs() < TAU_H {
        let mut ext = u.to_vec();
        ext.push(ui);
        return series_general(&ext, d + 2, 1e-15).unwrap_or_else(|_| {
            let mut nodes = vec![0.0, 0.0];
            nodes.extend_from_slice(u);
            nodes.push(ui);
            exp_divided_difference(&nodes)
        });
    }
    let mut shifted = Vec::with_capacity(d);
    shifted.push(-ui);
    for (j, &uj) in u.iter().enumerate() {
        if j != i {
            shifted.push(uj - ui);
        }
    }
    (ui.exp() * h_eval(&shifted) - h_eval(u)) / ui
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Newton iteration from the Chebyshev-angle initial guess.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[n - 1 - k] = 0.5 * (x + 1.0);
        weights[n - 1 - k] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn closed_form_dimension_one() {
        // H(u) = (e^u − u − 1)/u² for d = 1.
        let v = h_closed(&[1.0]).unwrap();
        assert!((v - (1f64.exp() - 2.0)).abs() < 1e-14);
        let w = h_closed(&[-1.0]).unwrap();
        assert!((w - (-1f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn closed_form_rejects_clustered() {
        assert!(matches!(
            h_closed(&[1.0, 1.0 + 1e-3]),
            Err(Error::NearSingular { .. })
        ));
        assert!(matches!(
            h_closed(&[1e-4, 2.0]),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn series_at_zero_is_inverse_factorial() {
        // H(0,…,0) = 1/(d+1)!.
        for d in 1..=6 {
            let u = vec![0.0; d];
            let v = h_series(&u, 1e-15).unwrap();
            let expect = 1.0 / factorial(d + 1);
            assert!(
                (v - expect).abs() <= 1e-14 * expect.max(1.0),
                "d={d}: {v} vs {expect}"
            );
        }
    }

    #[test]
    fn series_prefix_coefficients_d1() {
        // 1/2 + u/6 + u²/24 + …
        assert!((complete_homogeneous(0, &[0.7]) - 1.0).abs() < 1e-15);
        let u = 1e-4;
        let v = h_series(&[u], 1e-15).unwrap();
        let prefix = 0.5 + u / 6.0 + u * u / 24.0;
        assert!((v - prefix).abs() < 1e-14);
    }

    #[test]
    fn series_prefix_coefficients_d2() {
        // 1/6 + (u+v)/24 + (u² + uv + v²)/120 + …
        let (u, v) = (2e-4, -1e-4);
        let s = h_series(&[u, v], 1e-15).unwrap();
        let prefix = 1.0 / 6.0 + (u + v) / 24.0 + (u * u + u * v + v * v) / 120.0;
        // The degree-3 tail is ~1e-14; the prefix must match to that order.
        assert!((s - prefix).abs() < 1e-13);
    }

    #[test]
    fn complete_homogeneous_examples() {
        let (u, v) = (1.3, -0.4);
        assert!((complete_homogeneous(2, &[u, v]) - (u * u + u * v + v * v)).abs() < 1e-14);
        assert!((complete_homogeneous(3, &[1.0, 1.0]) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn closed_matches_series() {
        let v1 = h_closed(&[1.0, -1.0]).unwrap();
        let v2 = h_series(&[1.0, -1.0], 1e-15).unwrap();
        assert!((v1 - v2).abs() < 1e-12 * v2.abs());
    }

    #[test]
    fn eval_dispatch() {
        // Well separated: closed branch.
        let v = h_eval(&[5.0, -3.0]);
        let series = h_series(&[5.0, -3.0], 1e-15).unwrap();
        assert!((v - series).abs() < 1e-11 * series);
        // Clustered near zero: series branch, continuity at 1/6.
        let w = h_eval(&[1e-8, 2e-8]);
        assert!((w - 1.0 / 6.0).abs() < 1e-7);
        assert!((h_eval(&[0.0, 0.0]) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn eval_handles_large_clustered_arguments() {
        // Series would need thousands of terms; the kernel fallback splits
        // across the gap to zero instead. Reference: the divided-difference
        // recurrence for exp[0,0,a,a] written out analytically.
        let a = 200.0f64;
        let v = h_eval(&[a, a + 1e-9]);
        assert!(v.is_finite() && v > 0.0);
        let e = a.exp();
        let d_0a = (e - 1.0) / a; // exp[0,a]
        let d_0aa = (e - d_0a) / a; // exp[0,a,a]
        let d_00a = (d_0a - 1.0) / a; // exp[0,0,a]
        let reference = (d_0aa - d_00a) / a; // exp[0,0,a,a]
        assert!(
            (v - reference).abs() < 1e-8 * reference,
            "{v} vs {reference}"
        );
        assert!(h_eval(&[a, a + 0.1]) > v);
    }

    #[test]
    fn quadrature_matches_eval() {
        let v = h_quadrature(&[2.0, -1.0], 48);
        let e = h_eval(&[2.0, -1.0]);
        assert!((v - e).abs() < 1e-10 * e.max(1.0));
        let w = h_quadrature(&[0.0], 48);
        assert!((w - 0.5).abs() < 1e-13);
        let x = h_quadrature(&[1.0], 48);
        assert!((x - (1f64.exp() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn partial_at_zero() {
        assert!((h_partial(&[0.0], 0) - 1.0 / 6.0).abs() < 1e-14);
        assert!((h_partial(&[0.0, 0.0], 0) - 1.0 / 24.0).abs() < 1e-14);
        assert!((h_partial(&[0.0, 0.0], 1) - 1.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn partial_matches_finite_differences() {
        let u = [1.7, -2.2, 0.6];
        let h = 1e-5;
        for i in 0..3 {
            let mut up = u;
            let mut dn = u;
            up[i] += h;
            dn[i] -= h;
            let fd = (h_eval(&up) - h_eval(&dn)) / (2.0 * h);
            let an = h_partial(&u, i);
            assert!((fd - an).abs() < 1e-7, "i={i}: {fd} vs {an}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (nodes, weights) = gauss_legendre_unit(8);
        // ∫₀¹ x⁵ dx = 1/6 must be exact for an 8-point rule.
        let v: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(5)).sum();
        assert!((v - 1.0 / 6.0).abs() < 1e-14);
        let total: f64 = weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
