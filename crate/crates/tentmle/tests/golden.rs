//! Golden checks against hand-transcribed closed forms for the fixture
//! configurations: the per-triangulation objective display for the hexagon,
//! the octahedron's membership inequality, and the GKZ component formulas.

mod common;

use common::*;
use tentmle::geometry::{gkz_vector, normalized_volume, secondary_cone_contains, Simplex, Triangulation};
use tentmle::quadrature::total_mass;
use tentmle::solver::{objective, samworth_membership, WeightVector};

fn vol3(config: &tentmle::geometry::PointConfiguration, i: usize, j: usize, k: usize) -> f64 {
    normalized_volume(config, &Simplex::new(vec![i, j, k]))
}

/// Closed form of `∫_σ exp` over one triangle with distinct vertex values.
fn triangle_term(v: f64, ya: f64, yb: f64, yc: f64) -> f64 {
    v * (ya.exp() / ((ya - yb) * (ya - yc))
        + yb.exp() / ((yb - ya) * (yb - yc))
        + yc.exp() / ((yc - ya) * (yc - yb)))
}

#[test]
fn hexagon_objective_matches_fan_display() {
    // For heights in the secondary cone of the fan {123, 134, 145, 156}, the
    // objective is w·y minus the four bracketed triangle terms.
    let config = hexagon();
    let tri = Triangulation::from_cells(vec![
        vec![0, 1, 2],
        vec![0, 2, 3],
        vec![0, 3, 4],
        vec![0, 4, 5],
    ]);
    // A certified interior point of the fan's secondary cone, nudged to
    // keep all pairwise height differences away from zero.
    let base = tentmle::geometry::secondary_cone_interior_point(
        &config,
        &tri.as_subdivision(),
        &[0.0; 6],
        1.0,
    )
    .unwrap()
    .expect("fan is regular");
    let jitter = [0.013, -0.007, 0.019, -0.023, 0.011, -0.017];
    let y: Vec<f64> = base
        .iter()
        .zip(&jitter)
        .map(|(a, b)| a + 0.2 * b)
        .collect();
    assert!(secondary_cone_contains(&config, &tri, &y).unwrap());
    let w = WeightVector::normalized(vec![2.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
    let got = objective(&config, &w, &y).unwrap();
    let wy: f64 = w.as_slice().iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    let expect = wy
        - triangle_term(vol3(&config, 0, 1, 2), y[0], y[1], y[2])
        - triangle_term(vol3(&config, 0, 2, 3), y[0], y[2], y[3])
        - triangle_term(vol3(&config, 0, 3, 4), y[0], y[3], y[4])
        - triangle_term(vol3(&config, 0, 4, 5), y[0], y[4], y[5]);
    assert!(
        (got - expect).abs() <= 1e-12 * expect.abs().max(1.0),
        "{got} vs {expect}"
    );
}

#[test]
fn hexagon_gkz_component_formulas() {
    // z for the fan {123,134,145,156} has components
    // (v123+v134+v145+v156, v123, v123+v134, v134+v145, v145+v156, v156).
    let config = hexagon();
    let tri = Triangulation::from_cells(vec![
        vec![0, 1, 2],
        vec![0, 2, 3],
        vec![0, 3, 4],
        vec![0, 4, 5],
    ]);
    let z = gkz_vector(&config, &tri).entries;
    let (v123, v134, v145, v156) = (
        vol3(&config, 0, 1, 2),
        vol3(&config, 0, 2, 3),
        vol3(&config, 0, 3, 4),
        vol3(&config, 0, 4, 5),
    );
    let expect = [
        v123 + v134 + v145 + v156,
        v123,
        v123 + v134,
        v134 + v145,
        v145 + v156,
        v156,
    ];
    for (a, b) in z.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-12, "{z:?} vs {expect:?}");
    }
}

#[test]
fn square_diagonal_choice_by_determinant_sign() {
    // For four points in convex position the lifted 4x4 determinant decides
    // the diagonal: y = (1,0,1,0) on the unit square gives a negative
    // determinant and the {123, 134} triangulation.
    let config = unit_square();
    let y = [1.0, 0.0, 1.0, 0.0];
    let tri_13 = Triangulation::from_cells(vec![vec![0, 1, 2], vec![0, 2, 3]]);
    let tri_24 = Triangulation::from_cells(vec![vec![0, 1, 3], vec![1, 2, 3]]);
    assert!(secondary_cone_contains(&config, &tri_13, &y).unwrap());
    assert!(!secondary_cone_contains(&config, &tri_24, &y).unwrap());
    // Constant heights sit in the lineality space: both cones contain them.
    let c = [0.4; 4];
    assert!(secondary_cone_contains(&config, &tri_13, &c).unwrap());
    assert!(secondary_cone_contains(&config, &tri_24, &c).unwrap());
}

#[test]
fn octahedron_membership_display() {
    // The tent over the octahedron creases along the diagonal whose lifted
    // midpoint is highest, i.e. maximal y_i + y_j; in the 12-diagonal region
    // the mass has a six-term closed form (hand-transcribed
    // rational-exponential sum; the common tetrahedron volume 2 multiplies
    // the printed bracket).
    let config = octahedron();
    let y: [f64; 6] = [-0.7, -0.9, -2.0, -1.9, -1.0, -0.8];
    assert!(y[0] + y[1] > y[2] + y[3] && y[0] + y[1] > y[4] + y[5]);
    // The crease really is the 12-diagonal.
    let tri_12 = Triangulation::from_cells(vec![
        vec![0, 1, 2, 4],
        vec![0, 1, 2, 5],
        vec![0, 1, 3, 4],
        vec![0, 1, 3, 5],
    ]);
    assert!(secondary_cone_contains(&config, &tri_12, &y).unwrap());
    let (y1, y2, y3, y4, y5, y6) = (y[0], y[1], y[2], y[3], y[4], y[5]);
    let display = y1.exp() * (2.0 * y1 - y6 - y5) * (2.0 * y1 - y4 - y3)
        / ((y1 - y2) * (y1 - y3) * (y1 - y5) * (y1 - y6) * (y1 - y4))
        - y2.exp() * (2.0 * y2 - y6 - y5) * (2.0 * y2 - y4 - y3)
            / ((y1 - y2) * (y2 - y3) * (y2 - y5) * (y2 - y6) * (y2 - y4))
        + y3.exp() * (2.0 * y3 - y6 - y5)
            / ((y1 - y3) * (y2 - y3) * (y3 - y5) * (y3 - y6))
        + y4.exp() * (2.0 * y4 - y6 - y5)
            / ((y1 - y4) * (y2 - y4) * (y4 - y5) * (y4 - y6))
        - y5.exp() * (y4 - 2.0 * y5 + y3)
            / ((y1 - y5) * (y2 - y5) * (y3 - y5) * (y4 - y5))
        - y6.exp() * (y4 - 2.0 * y6 + y3)
            / ((y1 - y6) * (y2 - y6) * (y3 - y6) * (y4 - y6));
    // The printed display drops the common determinant volume 2 of the four
    // tetrahedra; the actual mass is exactly twice the six-term sum.
    let mass = total_mass(&config, &y).unwrap().total_mass;
    assert!(
        (mass - 2.0 * display).abs() <= 1e-10 * mass.abs(),
        "{mass} vs {}",
        2.0 * display
    );
    assert_eq!(samworth_membership(&config, &y).unwrap(), mass <= 1.0 + 1e-12);
}

#[test]
fn membership_convexity_and_normalization_gap() {
    // Midpoints of members are members; the normalization gap of the
    // objective is log(c) + 1 − c ≤ 0 for tent mass c.
    let config = hexagon();
    let w = WeightVector::unit(6);
    let a = [-3.0, -2.5, -2.8, -2.6, -3.1, -2.7];
    let b = [-2.2, -2.9, -2.4, -3.0, -2.3, -2.8];
    assert!(samworth_membership(&config, &a).unwrap());
    assert!(samworth_membership(&config, &b).unwrap());
    let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect();
    assert!(samworth_membership(&config, &mid).unwrap());

    let y = [0.3, -0.2, 0.1, 0.0, -0.1, 0.2];
    let relevant = tentmle::geometry::make_relevant(&config, &y).unwrap();
    let c = total_mass(&config, relevant.as_slice()).unwrap().total_mass;
    let normalized = tentmle::quadrature::normalize_heights(&config, &y).unwrap();
    let f_raw = objective(&config, &w, relevant.as_slice()).unwrap();
    let f_norm = objective(&config, &w, normalized.as_slice()).unwrap();
    let gap = f_raw - f_norm;
    let expect = c.ln() + 1.0 - c;
    assert!(gap <= 1e-12);
    assert!((gap - expect).abs() <= 1e-12 * expect.abs().max(1.0), "{gap} vs {expect}");
}

#[test]
fn octahedron_strata_closure() {
    // Random-weight optima on the octahedron only ever land on its seven
    // strata: the trivial subdivision, three two-pyramid splits, and three
    // four-cell triangulations.
    use tentmle::solver::{solve_mle, SolverOptions};
    let config = octahedron();
    let known: Vec<tentmle::geometry::Subdivision> = {
        let mut subs = Vec::new();
        subs.push(tentmle::geometry::Subdivision::new(vec![(0..6).collect()]));
        for (a, b) in [(0, 1), (2, 3), (4, 5)] {
            // Pyramid pair over the square missing axis {a, b}.
            let square: Vec<usize> = (0..6).filter(|&i| i != a && i != b).collect();
            let mut top = square.clone();
            top.push(a);
            let mut bottom = square.clone();
            bottom.push(b);
            subs.push(tentmle::geometry::Subdivision::new(vec![top, bottom]));
            // Triangulation around the {a, b} diagonal.
            let others: Vec<usize> = square;
            let mut cells = Vec::new();
            for (i, &p) in others.iter().enumerate() {
                for &q in &others[i + 1..] {
                    // Skip the opposite pair (p, q collinear through origin).
                    if tentmle::geometry::normalized_volume(
                        &config,
                        &Simplex::new(vec![a, b, p, q]),
                    ) > 1e-9
                    {
                        cells.push(vec![a, b, p, q]);
                    }
                }
            }
            subs.push(tentmle::geometry::Subdivision::new(cells));
        }
        subs
    };
    assert_eq!(known.len(), 7);
    let mut seen = std::collections::BTreeSet::new();
    for trial in 0..150u64 {
        let w = tentmle::experiments::sample_weights_simplex(6, 505, trial);
        let r = solve_mle(&config, &w, &SolverOptions::default()).unwrap();
        if !r.converged {
            continue;
        }
        assert!(
            known.contains(&r.subdivision),
            "foreign stratum {:?}",
            r.subdivision.cells()
        );
        seen.insert(r.subdivision.clone());
    }
    // The three stratum shapes all occur in a moderate sample.
    assert!(seen.iter().any(|s| s.num_cells() == 1));
    assert!(seen.iter().any(|s| s.num_cells() == 2));
    assert!(seen.iter().any(|s| s.num_cells() == 4));
}
