//! The inverse map from optimal heights to weights, normal cones of the
//! feasible body, and constructive realization of regular subdivisions.
//!
//! For relevant unit-mass heights `y` and a triangulation refining their
//! subdivision, the weight formula
//! `w_k = Σ_{σ∋k} vol(σ) e^{y_k} H({y_i − y_k : i ∈ σ∖k})`
//! produces the unique (up to scale) weights for which `y` is the optimum
//! when the subdivision is a triangulation; in general the refining
//! triangulations' weight vectors span the normal cone of the feasible body
//! at `y`. At constant normalized heights the formula collapses to
//! `e^c/(d+1)!` times the GKZ vector, so the normal cone at the uniform
//! density is the cone over the secondary polytope.

use serde::Serialize;

use crate::geometry::{
    self, induced_subdivision, normalized_volume, refines_cells, refining_triangulations,
    secondary_cone_interior_point, HeightVector, PointConfiguration, Subdivision, Triangulation,
};
use crate::linalg::{self, Mat};
use crate::quadrature::{normalize_heights, total_mass, uniform_height};
use crate::rng::Stream;
use crate::solver::{solve_mle, SolverOptions, WeightVector};
use crate::{Error, Result};

/// The normal cone at a boundary point of the feasible body: one positive
/// generator per refining triangulation, stored unnormalized.
#[derive(Debug, Clone, Serialize)]
pub struct NormalConeGenerators {
    pub base_heights: HeightVector,
    pub generators: Vec<(Triangulation, Vec<f64>)>,
}

/// Report of numerical ranks of the generator matrix across sampled points
/// of a secondary cone. Data only; no claim is asserted.
#[derive(Debug, Clone, Serialize)]
pub struct RankProbeReport {
    pub expected_rank: usize,
    pub cone_dimension: usize,
    pub samples: Vec<RankSample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankSample {
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

const MASS_TOL: f64 = 1e-6;

fn require_relevant_unit_mass(config: &PointConfiguration, heights: &[f64]) -> Result<()> {
    if let Some((index, gap)) = geometry::relevance_violation(config, heights)? {
        return Err(Error::NotRelevant { index, gap });
    }
    let mass = total_mass(config, heights)?.total_mass;
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::NotUnitMass { mass });
    }
    Ok(())
}

/// The weight vector that makes `heights` optimal, read through one refining
/// triangulation: `w_k = Σ_{σ∋k} vol(σ) e^{y_k} H({y_i − y_k})`. Requires
/// relevant unit-mass heights; returns the unnormalized vector (its entries
/// sum to the total mass, hence to 1 at unit mass).
pub fn weights_from_heights(
    config: &PointConfiguration,
    heights: &[f64],
    triangulation: &Triangulation,
) -> Result<Vec<f64>> {
    require_relevant_unit_mass(config, heights)?;
    let sub = induced_subdivision(config, heights)?;
    if !refines_cells(triangulation, sub.cells()) {
        return Err(Error::ConeViolation);
    }
    Ok(weight_kernel(config, heights, triangulation))
}

/// The raw formula with no preconditions; used internally and by the scale
/// covariance tests.
pub(crate) fn weight_kernel(
    config: &PointConfiguration,
    heights: &[f64],
    triangulation: &Triangulation,
) -> Vec<f64> {
    let mut w = vec![0.0; config.n()];
    for s in triangulation.simplices() {
        let vol = normalized_volume(config, s);
        for &k in s.vertices() {
            let args: Vec<f64> = s
                .vertices()
                .iter()
                .filter(|&&i| i != k)
                .map(|&i| heights[i] - heights[k])
                .collect();
            w[k] += vol * heights[k].exp() * crate::hfunc::h_eval(&args);
        }
    }
    w
}

/// All normal-cone generators at a relevant unit-mass boundary point: one
/// weight vector per regular triangulation refining the induced subdivision.
pub fn normal_cone_generators(
    config: &PointConfiguration,
    heights: &[f64],
) -> Result<NormalConeGenerators> {
    require_relevant_unit_mass(config, heights)?;
    let sub = induced_subdivision(config, heights)?;
    let tris = refining_triangulations(config, &sub)?;
    let generators = tris
        .into_iter()
        .map(|t| {
            let w = weight_kernel(config, heights, &t);
            (t, w)
        })
        .collect();
    Ok(NormalConeGenerators {
        base_heights: HeightVector(heights.to_vec()),
        generators,
    })
}

/// Whether `weights` lies in the convex cone spanned by the generators,
/// decided by a nonnegative least-squares fit with relative residual `1e-9`.
pub fn cone_membership(weights: &[f64], generators: &[Vec<f64>]) -> bool {
    if generators.is_empty() {
        return false;
    }
    let n = weights.len();
    let mut a = Mat::zeros(n, generators.len());
    for (j, g) in generators.iter().enumerate() {
        for i in 0..n {
            a.set(i, j, g[i]);
        }
    }
    let lambda = linalg::nnls(&a, weights);
    let resid = linalg::nnls_residual_inf(&a, weights, &lambda);
    let scale = weights
        .iter()
        .fold(0.0f64, |s, w| s.max(w.abs()))
        .max(1e-300);
    resid <= 1e-9 * scale
}

/// Construct weights whose estimation problem reproduces the given regular
/// subdivision. The guarantee is verified, not assumed: an interior point of
/// the subdivision's secondary cone is found exactly, the normal-cone
/// generators there are averaged, and the result is accepted only when a
/// re-solve returns the requested subdivision. Retries perturb the interior
/// point deterministically from `seed`.
pub fn realize_subdivision(
    config: &PointConfiguration,
    subdivision: &Subdivision,
    seed: u64,
) -> Result<WeightVector> {
    let center = vec![uniform_height(config); config.n()];
    let Some(y_interior) = secondary_cone_interior_point(config, subdivision, &center, 0.5)? else {
        return Err(Error::NotRegular);
    };
    let mut last = String::new();
    for attempt in 0..10u64 {
        let y_try: Vec<f64> = if attempt == 0 {
            y_interior.clone()
        } else {
            // Pull toward the cone's interior point with a seeded jitter;
            // staying inside the cone keeps the subdivision unchanged.
            let mut rng = Stream::substream(seed, "realize", attempt);
            y_interior
                .iter()
                .map(|v| v + 0.05 * rng.gaussian())
                .collect()
        };
        let y = normalize_heights(config, &y_try)?;
        let sub_here = induced_subdivision(config, y.as_slice())?;
        if &sub_here != subdivision {
            last = format!("interior candidate induces {:?}", sub_here.cells());
            continue;
        }
        let cone = normal_cone_generators(config, y.as_slice())?;
        if cone.generators.is_empty() {
            return Err(Error::RealizationFailed(
                "no refining triangulations".into(),
            ));
        }
        let n = config.n();
        let mut avg = vec![0.0; n];
        for (_, g) in &cone.generators {
            for i in 0..n {
                avg[i] += g[i] / cone.generators.len() as f64;
            }
        }
        let weights = WeightVector::normalized(avg)?;
        let solved = solve_mle(config, &weights, &SolverOptions::default())?;
        if solved.converged && &solved.subdivision == subdivision {
            return Ok(weights);
        }
        last = format!(
            "re-solve returned {:?} (converged: {})",
            solved.subdivision.cells(),
            solved.converged
        );
    }
    Err(Error::RealizationFailed(last))
}

/// Sample heights across the subdivision's secondary cone and report the
/// numerical rank of the generator matrix at each sample, together with the
/// rank expected from the cone dimension. Emits data only.
pub fn rank_probe(
    config: &PointConfiguration,
    subdivision: &Subdivision,
    trials: usize,
    seed: u64,
) -> Result<RankProbeReport> {
    let n = config.n();
    let center = vec![uniform_height(config); n];
    let Some(y_interior) = secondary_cone_interior_point(config, subdivision, &center, 0.5)? else {
        return Err(Error::NotRegular);
    };
    // Cone dimension from the rank of the coplanarity equalities.
    let rows = geometry::subdivision_equality_rows(config, subdivision);
    let eq_rank = if rows.is_empty() {
        0
    } else {
        let m = Mat::from_rows(&rows);
        n - linalg::nullspace_basis(&m, 1e-9).len()
    };
    let cone_dimension = n - eq_rank;
    let expected_rank = n - cone_dimension;

    let mut samples = Vec::with_capacity(trials);
    let mut trial = 0u64;
    while samples.len() < trials && trial < 20 * trials as u64 + 20 {
        trial += 1;
        let mut rng = Stream::substream(seed, "rankprobe", trial);
        // Jitter around the interior point, shrinking until the subdivision
        // is preserved.
        let mut scale = 0.25f64;
        let mut found: Option<Vec<f64>> = None;
        for _ in 0..8 {
            let jitter: Vec<f64> = (0..n).map(|_| scale * rng.gaussian()).collect();
            let y_try: Vec<f64> = y_interior.iter().zip(&jitter).map(|(a, b)| a + b).collect();
            if let Ok(y_norm) = normalize_heights(config, &y_try) {
                if let Ok(sub_here) = induced_subdivision(config, y_norm.as_slice()) {
                    if &sub_here == subdivision {
                        found = Some(y_norm.0);
                        break;
                    }
                }
            }
            scale *= 0.5;
        }
        let Some(y) = found else { continue };
        let cone = normal_cone_generators(config, &y)?;
        let mut g = Mat::zeros(cone.generators.len(), n);
        for (r, (_, w)) in cone.generators.iter().enumerate() {
            for c in 0..n {
                g.set(r, c, w[c]);
            }
        }
        let sv = linalg::singular_values(&g);
        let top = sv.first().copied().unwrap_or(0.0).max(1e-300);
        let rank = sv.iter().filter(|&&s| s > 1e-8 * top).count();
        samples.push(RankSample {
            rank,
            singular_values: sv,
        });
    }
    Ok(RankProbeReport {
        expected_rank,
        cone_dimension,
        samples,
    })
}
