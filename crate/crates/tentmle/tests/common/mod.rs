//! Shared fixtures and independent oracles for the integration suites.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use tentmle::geometry::PointConfiguration;
use tentmle::rng::Stream;

/// Six convex-position points whose secondary polytope is the 3-dimensional
/// associahedron: 14 triangulations, 45 faces.
pub fn hexagon() -> PointConfiguration {
    PointConfiguration::new(vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![2.0, 1.0],
        vec![2.0, 2.0],
        vec![1.0, 2.0],
        vec![0.0, 1.0],
    ])
    .unwrap()
}

/// Vertices of the regular octahedron: 3 triangulations, 7 strata.
pub fn octahedron() -> PointConfiguration {
    PointConfiguration::new(vec![
        vec![1.0, 0.0, 0.0],
        vec![-1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0],
    ])
    .unwrap()
}

/// Triangle with three interior points; unit weights give a 7-triangle
/// optimal subdivision using all six points.
pub fn sixpoints() -> PointConfiguration {
    PointConfiguration::new(vec![
        vec![0.0, 0.0],
        vec![100.0, 0.0],
        vec![0.0, 100.0],
        vec![22.0, 37.0],
        vec![43.0, 22.0],
        vec![36.0, 41.0],
    ])
    .unwrap()
}

/// Five points whose unit-weight optimum is a nontrivial subdivision with a
/// quadrilateral cell.
pub fn fivepoints() -> PointConfiguration {
    PointConfiguration::new(vec![
        vec![0.0, 0.0],
        vec![40.0, 0.0],
        vec![20.0, 40.0],
        vec![17.0, 10.0],
        vec![21.0, 15.0],
    ])
    .unwrap()
}

pub fn unit_square() -> PointConfiguration {
    PointConfiguration::new(vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 1.0],
    ])
    .unwrap()
}

/// Random configuration with gaussian coordinates; retries degenerate draws.
pub fn random_config(n: usize, d: usize, stream: &mut Stream) -> PointConfiguration {
    loop {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| stream.gaussian()).collect())
            .collect();
        if let Ok(c) = PointConfiguration::new(pts) {
            return c;
        }
    }
}

/// Monte Carlo estimate of `∫_σ exp(affine)` over the simplex spanned by
/// `vertices` with the given vertex values: uniform barycentric sampling via
/// normalized exponentials. Returns `(estimate, standard_error)`.
pub fn mc_simplex_exp_integral(
    vertices: &[Vec<f64>],
    values: &[f64],
    samples: usize,
    stream: &mut Stream,
) -> (f64, f64) {
    let d = vertices[0].len();
    let k = vertices.len();
    debug_assert_eq!(k, d + 1);
    // Euclidean volume = |det| / d!.
    let mut det = 1.0;
    {
        let mut m = vec![vec![0.0; d]; d];
        for r in 0..d {
            for c in 0..d {
                m[r][c] = vertices[r + 1][c] - vertices[0][c];
            }
        }
        // Gaussian elimination determinant.
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
                .unwrap();
            m.swap(col, piv);
            if piv != col {
                det = -det;
            }
            det *= m[col][col];
            for r in col + 1..d {
                let f = m[r][col] / m[col][col];
                for c in col..d {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let dfact: f64 = (1..=d).map(|v| v as f64).product();
    let vol = det.abs() / dfact;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        let mut lam: Vec<f64> = (0..k).map(|_| stream.exponential()).collect();
        let tot: f64 = lam.iter().sum();
        for l in lam.iter_mut() {
            *l /= tot;
        }
        let v: f64 = lam.iter().zip(values).map(|(l, y)| l * y).sum();
        let e = v.exp();
        sum += e;
        sumsq += e * e;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0);
    (vol * mean, vol * (var / samples as f64).sqrt())
}

/// Monte Carlo estimate of `∫_P g(tent)` over the hull by rejection from the
/// bounding box; `g` maps tent values (−inf outside) to integrand values.
pub fn mc_tent_integral(
    config: &PointConfiguration,
    heights: &[f64],
    g: impl Fn(f64) -> f64,
    samples: usize,
    stream: &mut Stream,
) -> (f64, f64) {
    let d = config.dim();
    let mut lo = vec![f64::MAX; d];
    let mut hi = vec![f64::MIN; d];
    for p in config.points() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let box_vol: f64 = (0..d).map(|k| hi[k] - lo[k]).product();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut t = vec![0.0; d];
    for _ in 0..samples {
        for k in 0..d {
            t[k] = stream.range(lo[k], hi[k]);
        }
        let tent = tentmle::geometry::tent_value(config, heights, &t).unwrap();
        let v = if tent.is_finite() { g(tent) } else { 0.0 };
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0);
    (box_vol * mean, box_vol * (var / samples as f64).sqrt())
}
