use std::collections::BTreeMap;
use tentmle::geometry::PointConfiguration;
use tentmle::solver::{solve_mle, SolverOptions, WeightVector};

fn hexagon() -> PointConfiguration {
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

#[test]
#[ignore]
fn bench_hexagon_1000() {
    let c = hexagon();
    let t = std::time::Instant::now();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut nonconv = 0usize;
    for trial in 0..1000u64 {
        let mut s = tentmle::rng::Stream::substream(2024, "weights", trial);
        let e: Vec<f64> = (0..6).map(|_| s.exponential()).collect();
        let w = WeightVector::normalized(e).unwrap();
        let r = solve_mle(&c, &w, &SolverOptions::default()).unwrap();
        if !r.converged {
            nonconv += 1;
            continue;
        }
        *counts.entry(r.subdivision.num_cells()).or_default() += 1;
    }
    println!(
        "1000 hexagon trials in {:?}: nonconv={} histogram {:?}",
        t.elapsed(),
        nonconv,
        counts
    );
}

#[test]
#[ignore]
fn bench_gaussian_census_200() {
    let t = std::time::Instant::now();
    let census =
        tentmle::experiments::cell_shape_experiment(tentmle::experiments::Dist::Gaussian, 200, 31)
            .unwrap();
    println!(
        "200 gaussian census trials in {:?}: discarded={} single_cell={:.3}",
        t.elapsed(),
        census.discarded,
        census.single_cell_share
    );
    let t = std::time::Instant::now();
    let census = tentmle::experiments::cell_shape_experiment(
        tentmle::experiments::Dist::Circular(0.1),
        200,
        31,
    )
    .unwrap();
    println!(
        "200 circular(0.1) trials in {:?}: discarded={} single={:.3} mean_cells={:.3}",
        t.elapsed(),
        census.discarded,
        census.single_cell_share,
        census.mean_cell_count
    );
}
