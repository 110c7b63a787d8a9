//! Reproducible sampling harness: stratum frequencies under random weights,
//! cell-shape censuses under random configurations, and the unit-weight
//! checks for small configurations.
//!
//! Every trial draws from its own counter-based substream keyed by
//! `(seed, purpose, trial index)`, so runs are bit-reproducible regardless of
//! the worker count. Non-converged trials are recorded and excluded from
//! percentages rather than hidden.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::geometry::{PointConfiguration, Subdivision};
use crate::rng::Stream;
use crate::solver::{solve_mle, MleResult, SolverOptions, WeightVector};
use crate::{Error, Result};

/// Sampling distribution for random planar configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    /// Standard bivariate normal.
    Gaussian,
    /// `(U₁^a cos 2πU₂, U₁^a sin 2πU₂)`; `a = 0.5` is uniform on the disc,
    /// smaller exponents push mass toward the rim.
    Circular(f64),
}

impl Dist {
    pub fn parse(s: &str) -> Result<Dist> {
        if s == "gaussian" {
            return Ok(Dist::Gaussian);
        }
        if let Some(a) = s.strip_prefix("circular:") {
            let a: f64 = a
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad circular exponent in {s:?}")))?;
            if !(a > 0.0) {
                return Err(Error::InvalidInput("circular exponent must be > 0".into()));
            }
            return Ok(Dist::Circular(a));
        }
        Err(Error::InvalidInput(format!(
            "unknown distribution {s:?}; use gaussian or circular:<a>"
        )))
    }
}

impl std::fmt::Display for Dist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dist::Gaussian => write!(f, "gaussian"),
            Dist::Circular(a) => write!(f, "circular:{a}"),
        }
    }
}

/// One solved trial of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    /// The varied input: weights for stratum experiments, points for shape
    /// censuses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    pub subdivision: Subdivision,
    pub subdivision_key: String,
    /// For d = 2: counts of k-gon cells, k = 3..=n.
    pub shape_profile: Vec<usize>,
    pub hull_vertices: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// Frequency table over canonical subdivision keys.
#[derive(Debug, Clone, Serialize)]
pub struct FrequencyReport {
    pub total_trials: usize,
    pub converged_trials: usize,
    pub discarded: usize,
    pub seed: u64,
    pub entries: Vec<FrequencyEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyEntry {
    pub key: String,
    pub cells: Subdivision,
    pub count: usize,
    pub percentage: f64,
}

/// Aggregated shape census (one row per distinct shape profile).
#[derive(Debug, Clone, Serialize)]
pub struct ShapeCensus {
    pub dist: String,
    pub total_trials: usize,
    pub discarded: usize,
    pub seed: u64,
    pub rows: Vec<ShapeRow>,
    pub mean_cell_count: f64,
    pub single_cell_share: f64,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeRow {
    /// Counts of k-gon cells for k = 3..=n.
    pub profile: Vec<usize>,
    pub hull_vertices: usize,
    pub count: usize,
}

/// Outcome of the `n = d + 2` unit-weight check.
#[derive(Debug, Clone, Serialize)]
pub struct DPlus2Report {
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub trivial: usize,
    pub nontrivial: usize,
    pub discarded: usize,
    pub counterexamples: Vec<TrialRecord>,
}

/// The `d + 2`-point construction with tunable last weight, plus its split
/// variant with `d + 3` points and unit weights.
#[derive(Debug, Clone)]
pub struct Construction {
    pub config: PointConfiguration,
    pub weights: WeightVector,
    /// The star triangulation `{D∖1, …, D∖(d+1)}`.
    pub star: Subdivision,
    /// Whether the ratio is above the `(d+1)/d` threshold, where the star
    /// triangulation is the expected optimum.
    pub expect_star: bool,
}

/// Result of the equal-base-weights check: the optimum must have equal
/// heights on the first `d+1` points and a gap of `alpha` to the last.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaReport {
    pub d: usize,
    pub alpha: f64,
    pub weight_ratio: f64,
    pub gap: f64,
    pub base_spread: f64,
    pub converged: bool,
}

/// Uniform draw from the probability simplex via normalized exponential
/// spacings; deterministic per `(seed, trial)`.
pub fn sample_weights_simplex(n: usize, seed: u64, trial: u64) -> WeightVector {
    let mut rng = Stream::substream(seed, "weights", trial);
    let e: Vec<f64> = (0..n).map(|_| rng.exponential()).collect();
    WeightVector::normalized(e).expect("exponential draws are positive")
}

/// Draw an `n`-point planar configuration from the distribution,
/// deterministically per `(seed, trial)`. Degenerate draws (coincident
/// points, flat span) retry on the next substream.
pub fn sample_points(dist: Dist, n: usize, seed: u64, trial: u64) -> Result<PointConfiguration> {
    for attempt in 0..64u64 {
        let mut rng =
            Stream::substream(seed, "points", trial.wrapping_mul(64).wrapping_add(attempt));
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| match dist {
                Dist::Gaussian => vec![rng.gaussian(), rng.gaussian()],
                Dist::Circular(a) => {
                    let r = rng.uniform().powf(a);
                    let th = 2.0 * std::f64::consts::PI * rng.uniform();
                    vec![r * th.cos(), r * th.sin()]
                }
            })
            .collect();
        if let Ok(c) = PointConfiguration::new(pts) {
            return Ok(c);
        }
    }
    Err(Error::DegenerateSample(format!(
        "no valid {n}-point sample from {dist} after 64 attempts"
    )))
}

/// Worker count for trial parallelism: `TENTMLE_THREADS` caps it, default is
/// the available parallelism capped at 8.
pub fn worker_count() -> usize {
    let avail = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(8);
    match std::env::var("TENTMLE_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).unwrap_or(avail),
        Err(_) => avail,
    }
}

/// Order-preserving parallel map over trial indices; with one worker it runs
/// inline. Results land in trial order, so aggregation is deterministic.
fn run_trials<T: Send>(trials: usize, f: impl Fn(u64) -> T + Sync) -> Vec<T> {
    let workers = worker_count().min(trials.max(1));
    if workers <= 1 {
        return (0..trials as u64).map(f).collect();
    }
    let mut out: Vec<Option<T>> = (0..trials).map(|_| None).collect();
    let chunk = trials.div_ceil(workers);
    std::thread::scope(|scope| {
        let mut rest: &mut [Option<T>] = &mut out;
        let mut start = 0usize;
        let mut handles = Vec::new();
        while !rest.is_empty() {
            let take = chunk.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            let base = start;
            let fref = &f;
            handles.push(scope.spawn(move || {
                for (i, slot) in head.iter_mut().enumerate() {
                    *slot = Some(fref((base + i) as u64));
                }
            }));
            rest = tail;
            start += take;
        }
    });
    out.into_iter()
        .map(|v| v.expect("trial completed"))
        .collect()
}

/// Canonical short key for a subdivision. Convex-position planar
/// configurations use the diagonal-list encoding (each interior wall as a
/// sorted label pair, 1-based, e.g. `"13 14 15"`, with `"trivial"` for the
/// flat subdivision); everything else falls back to the cell list.
pub fn subdivision_key(config: &PointConfiguration, sub: &Subdivision) -> String {
    if let Some(key) = diagonal_key(config, sub) {
        return key;
    }
    sub.cells()
        .iter()
        .map(|c| {
            c.iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect::<Vec<_>>()
        .join("|")
}

fn diagonal_key(config: &PointConfiguration, sub: &Subdivision) -> Option<String> {
    if config.dim() != 2 {
        return None;
    }
    let n = config.n();
    let order = convex_position_order(config)?;
    // Position in the cycle for each point index.
    let mut pos = vec![0usize; n];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    let mut diagonals: Vec<(usize, usize)> = Vec::new();
    let cells = sub.cells();
    for (a, ca) in cells.iter().enumerate() {
        for cb in cells.iter().skip(a + 1) {
            let shared: Vec<usize> = ca.iter().filter(|i| cb.contains(i)).copied().collect();
            if shared.len() == 2 {
                let (i, j) = (shared[0], shared[1]);
                let gap = (pos[i] as isize - pos[j] as isize).rem_euclid(n as isize) as usize;
                if gap != 1 && gap != n - 1 {
                    let key = (i.min(j), i.max(j));
                    if !diagonals.contains(&key) {
                        diagonals.push(key);
                    }
                }
            }
        }
    }
    if diagonals.is_empty() {
        return Some("trivial".to_string());
    }
    let mut labels: Vec<String> = diagonals
        .iter()
        .map(|&(i, j)| format!("{}{}", i + 1, j + 1))
        .collect();
    labels.sort();
    Some(labels.join(" "))
}

/// The cyclic hull order when every point is a vertex of the hull, else None.
fn convex_position_order(config: &PointConfiguration) -> Option<Vec<usize>> {
    let hull = planar_hull(config.points());
    if hull.len() == config.n() {
        Some(hull)
    } else {
        None
    }
}

/// Andrew's monotone chain with strict turns: indices of hull vertices in
/// counterclockwise order (collinear boundary points are not vertices).
fn planar_hull(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        points[a]
            .partial_cmp(&points[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let cross = |o: usize, a: usize, b: usize| -> f64 {
        (points[a][0] - points[o][0]) * (points[b][1] - points[o][1])
            - (points[a][1] - points[o][1]) * (points[b][0] - points[o][0])
    };
    let scale = points.iter().flatten().fold(1.0f64, |s, v| s.max(v.abs()));
    let eps = 1e-12 * scale * scale;
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], i) <= eps {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], i) <= eps {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Shape profile of a subdivision for d = 2: entry `k − 3` counts cells whose
/// hulls are `k`-gons, `k = 3..=n`.
fn shape_profile(config: &PointConfiguration, sub: &Subdivision) -> Vec<usize> {
    if config.dim() != 2 {
        return Vec::new();
    }
    let n = config.n();
    let mut profile = vec![0usize; n.saturating_sub(2)];
    for cell in sub.cells() {
        let pts: Vec<Vec<f64>> = cell.iter().map(|&i| config.point(i).to_vec()).collect();
        let k = planar_hull(&pts).len();
        if (3..=n).contains(&k) {
            profile[k - 3] += 1;
        }
    }
    profile
}

fn make_record(
    config: &PointConfiguration,
    trial_index: u64,
    result: &MleResult,
    weights: Option<Vec<f64>>,
    points: Option<Vec<Vec<f64>>>,
) -> TrialRecord {
    TrialRecord {
        trial_index,
        weights,
        points,
        subdivision: result.subdivision.clone(),
        subdivision_key: subdivision_key(config, &result.subdivision),
        shape_profile: shape_profile(config, &result.subdivision),
        hull_vertices: if config.dim() == 2 {
            planar_hull(config.points()).len()
        } else {
            config.n()
        },
        converged: result.converged,
        iterations: result.iterations,
    }
}

fn solver_options(seed: u64, trial: u64) -> SolverOptions {
    SolverOptions {
        seed: crate::rng::mix64(seed ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
        ..SolverOptions::default()
    }
}

/// Sample weight vectors uniformly from the simplex, solve each instance,
/// and tally the optimal subdivisions.
pub fn stratum_frequency_experiment(
    config: &PointConfiguration,
    trials: usize,
    seed: u64,
) -> Result<FrequencyReport> {
    let records = run_trials(trials, |trial| {
        let w = sample_weights_simplex(config.n(), seed, trial);
        let r = solve_mle(config, &w, &solver_options(seed, trial))?;
        Ok::<TrialRecord, Error>(make_record(
            config,
            trial,
            &r,
            Some(w.as_slice().to_vec()),
            None,
        ))
    });
    let mut counts: BTreeMap<String, (usize, Subdivision)> = BTreeMap::new();
    let mut discarded = 0usize;
    let mut total = 0usize;
    for rec in records {
        let rec = rec?;
        total += 1;
        if !rec.converged {
            discarded += 1;
            continue;
        }
        counts
            .entry(rec.subdivision_key.clone())
            .or_insert_with(|| (0, rec.subdivision.clone()))
            .0 += 1;
    }
    let converged = total - discarded;
    let mut entries: Vec<FrequencyEntry> = counts
        .into_iter()
        .map(|(key, (count, cells))| FrequencyEntry {
            key,
            cells,
            count,
            percentage: 100.0 * count as f64 / converged.max(1) as f64,
        })
        .collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then(a.key.cmp(&b.key)));
    Ok(FrequencyReport {
        total_trials: total,
        converged_trials: converged,
        discarded,
        seed,
        entries,
    })
}

/// Draw `n = 6` points per trial from the distribution, solve with unit
/// weights, and aggregate the cell-shape census.
pub fn cell_shape_experiment(dist: Dist, trials: usize, seed: u64) -> Result<ShapeCensus> {
    let records = run_trials(trials, |trial| {
        let config = sample_points(dist, 6, seed, trial)?;
        let w = WeightVector::unit(6);
        let r = solve_mle(&config, &w, &solver_options(seed, trial))?;
        Ok::<TrialRecord, Error>(make_record(
            &config,
            trial,
            &r,
            None,
            Some(config.points().to_vec()),
        ))
    });
    let mut rows: BTreeMap<(Vec<usize>, usize), usize> = BTreeMap::new();
    let mut discarded = 0usize;
    let mut kept: Vec<TrialRecord> = Vec::with_capacity(trials);
    let mut cell_sum = 0usize;
    let mut single = 0usize;
    for rec in records {
        let rec = rec?;
        if !rec.converged {
            discarded += 1;
            kept.push(rec);
            continue;
        }
        *rows
            .entry((rec.shape_profile.clone(), rec.hull_vertices))
            .or_default() += 1;
        cell_sum += rec.subdivision.num_cells();
        if rec.subdivision.is_trivial() {
            single += 1;
        }
        kept.push(rec);
    }
    let converged = trials - discarded;
    let mut out_rows: Vec<ShapeRow> = rows
        .into_iter()
        .map(|((profile, hull_vertices), count)| ShapeRow {
            profile,
            hull_vertices,
            count,
        })
        .collect();
    out_rows.sort_by(|a, b| b.count.cmp(&a.count).then(a.profile.cmp(&b.profile)));
    Ok(ShapeCensus {
        dist: dist.to_string(),
        total_trials: trials,
        discarded,
        seed,
        rows: out_rows,
        mean_cell_count: cell_sum as f64 / converged.max(1) as f64,
        single_cell_share: single as f64 / converged.max(1) as f64,
        records: kept,
    })
}

/// Unit-weight check for small configurations: for `d ∈ {2, 3}` random
/// `d + 2`-point samples must always give the flat subdivision; the `d = 1`
/// variant uses 4 points on the line.
pub fn d_plus_2_check(d: usize, trials: usize, seed: u64) -> Result<DPlus2Report> {
    let n = if d == 1 { 4 } else { d + 2 };
    let records = run_trials(trials, |trial| {
        let mut config = None;
        for attempt in 0..64u64 {
            let mut rng =
                Stream::substream(seed, "dplus2", trial.wrapping_mul(64).wrapping_add(attempt));
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.gaussian()).collect())
                .collect();
            if let Ok(c) = PointConfiguration::new(pts) {
                config = Some(c);
                break;
            }
        }
        let config = config
            .ok_or_else(|| Error::DegenerateSample("no valid sample after 64 attempts".into()))?;
        let w = WeightVector::unit(n);
        let r = solve_mle(&config, &w, &solver_options(seed, trial))?;
        Ok::<TrialRecord, Error>(make_record(
            &config,
            trial,
            &r,
            None,
            Some(config.points().to_vec()),
        ))
    });
    let mut trivial = 0;
    let mut nontrivial = 0;
    let mut discarded = 0;
    let mut counterexamples = Vec::new();
    for rec in records {
        let rec = rec?;
        if !rec.converged {
            discarded += 1;
            continue;
        }
        if rec.subdivision.is_trivial() {
            trivial += 1;
        } else {
            nontrivial += 1;
            counterexamples.push(rec);
        }
    }
    Ok(DPlus2Report {
        d,
        n,
        trials,
        trivial,
        nontrivial,
        discarded,
        counterexamples,
    })
}

/// The special configuration `(e_1, …, e_d, 0, (1/(d+1)) Σ e_i)` with equal
/// weights on the first `d + 1` points and `w_{d+2}/w_1 = ratio`. Above the
/// threshold `(d+1)/d` the optimal subdivision is the star triangulation
/// around the interior point. With `split`, the interior point splits into
/// two points `±δ·v` apart carrying equal weight, which at `ratio = 2` gives
/// `d + 3` points with unit weights and a nontrivial optimal subdivision.
pub fn d_plus_3_construction(d: usize, ratio: f64, split: Option<f64>) -> Result<Construction> {
    if d < 2 {
        return Err(Error::InvalidInput("the construction needs d >= 2".into()));
    }
    if !(ratio > 0.0) {
        return Err(Error::InvalidInput("ratio must be positive".into()));
    }
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(d + 2);
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        pts.push(e);
    }
    pts.push(vec![0.0; d]);
    pts.push(vec![1.0 / (d + 1) as f64; d]);
    let star = Subdivision::new(
        (0..=d)
            .map(|omit| (0..d + 2).filter(|&j| j != omit).collect())
            .collect(),
    );
    let expect_star = ratio > (d + 1) as f64 / d as f64;
    match split {
        None => {
            let mut w = vec![1.0; d + 2];
            w[d + 1] = ratio;
            Ok(Construction {
                config: PointConfiguration::new(pts)?,
                weights: WeightVector::normalized(w)?,
                star,
                expect_star,
            })
        }
        Some(delta) => {
            let center = pts.pop().expect("interior point");
            let mut v = vec![0.0; d];
            v[0] = 1.0 / 2f64.sqrt();
            v[1] = -1.0 / 2f64.sqrt();
            let mut p1 = center.clone();
            let mut p2 = center;
            for k in 0..d {
                p1[k] += delta * v[k];
                p2[k] -= delta * v[k];
            }
            pts.push(p1);
            pts.push(p2);
            let mut w = vec![1.0; d + 3];
            w[d + 1] = ratio / 2.0;
            w[d + 2] = ratio / 2.0;
            Ok(Construction {
                config: PointConfiguration::new(pts)?,
                weights: WeightVector::normalized(w)?,
                star,
                expect_star,
            })
        }
    }
}

/// Weights from the equal-heights construction: at
/// `w_{d+2}/w_1 = (d+1) e^α H(−α,…,−α) / (d·H(α,0,…,0))` the optimal heights
/// have `y_1 = … = y_{d+1}` and `y_{d+2} − y_1 = α`.
pub fn alpha_heights_check(d: usize, alpha: f64) -> Result<AlphaReport> {
    if d < 2 || !(alpha > 0.0) {
        return Err(Error::InvalidInput(
            "alpha check needs d >= 2 and alpha > 0".into(),
        ));
    }
    let ratio = alpha_weight_ratio(d, alpha);
    let construction = d_plus_3_construction(d, ratio, None)?;
    let r = solve_mle(
        &construction.config,
        &construction.weights,
        &SolverOptions::default(),
    )?;
    let y = r.heights.as_slice();
    let base = &y[..=d];
    let base_min = base.iter().cloned().fold(f64::INFINITY, f64::min);
    let base_max = base.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(AlphaReport {
        d,
        alpha,
        weight_ratio: ratio,
        gap: y[d + 1] - base.iter().sum::<f64>() / base.len() as f64,
        base_spread: base_max - base_min,
        converged: r.converged,
    })
}

/// `(d+1) e^α H(−α,…,−α) / (d·H(α,0,…,0))` with `d` arguments each.
pub fn alpha_weight_ratio(d: usize, alpha: f64) -> f64 {
    let neg = vec![-alpha; d];
    let mut pos = vec![0.0; d];
    pos[0] = alpha;
    (d + 1) as f64 * alpha.exp() * crate::hfunc::h_eval(&neg)
        / (d as f64 * crate::hfunc::h_eval(&pos))
}

/// CSV rows for trial records: one line per trial.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(
        "trial,converged,iterations,hull_vertices,num_cells,gons3,gons4,gons5,gons6,subdivision\n",
    );
    for r in records {
        let gons: Vec<String> = (0..4)
            .map(|k| r.shape_profile.get(k).copied().unwrap_or(0).to_string())
            .collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.trial_index,
            r.converged,
            r.iterations,
            r.hull_vertices,
            r.subdivision.num_cells(),
            gons.join(","),
            r.subdivision_key,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn simplex_sampling_moments() {
        let n = 6;
        let draws = 20_000;
        let mut mean = vec![0.0; n];
        for t in 0..draws {
            let w = sample_weights_simplex(n, 11, t);
            for (m, v) in mean.iter_mut().zip(w.as_slice()) {
                *m += v / draws as f64;
            }
        }
        // Four binomial-ish standard errors around 1/6.
        for m in &mean {
            assert!(
                (m - 1.0 / 6.0).abs() < 4.0 * 0.15 / (draws as f64).sqrt(),
                "{m}"
            );
        }
        let w1 = sample_weights_simplex(n, 11, 7);
        let w2 = sample_weights_simplex(n, 11, 7);
        assert_eq!(w1.as_slice(), w2.as_slice());
        assert_eq!(sample_weights_simplex(1, 3, 0).as_slice(), &[1.0]);
    }

    #[test]
    fn point_sampling_moments() {
        let mut r2 = 0.0;
        let draws = 20_000;
        for t in 0..draws {
            let c = sample_points(Dist::Circular(0.5), 3, 5, t).unwrap();
            // Squared radius of a uniform-disc draw has mean 1/2.
            let p = c.point(0);
            r2 += (p[0] * p[0] + p[1] * p[1]) / draws as f64;
        }
        assert!((r2 - 0.5).abs() < 0.01, "{r2}");
    }

    #[test]
    fn circular_low_exponent_is_rim_heavy() {
        // Radii for a = 0.1 stochastically dominate those for a = 0.5.
        let draws = 4000usize;
        let radius = |a: f64, seed: u64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..draws as u64)
                .map(|t| {
                    let c = sample_points(Dist::Circular(a), 3, seed, t).unwrap();
                    let p = c.point(0);
                    (p[0] * p[0] + p[1] * p[1]).sqrt()
                })
                .collect();
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            v
        };
        let r01 = radius(0.1, 77);
        let r05 = radius(0.5, 78);
        // Compare deciles.
        for q in 1..10 {
            let i = q * draws / 10;
            assert!(r01[i] > r05[i], "decile {q}");
        }
    }

    #[test]
    fn hexagon_diagonal_keys() {
        let c = hexagon();
        let trivial = Subdivision::new(vec![(0..6).collect()]);
        assert_eq!(subdivision_key(&c, &trivial), "trivial");
        let fan = Subdivision::new(vec![
            vec![0, 1, 2],
            vec![0, 2, 3],
            vec![0, 3, 4],
            vec![0, 4, 5],
        ]);
        assert_eq!(subdivision_key(&c, &fan), "13 14 15");
        let edge = Subdivision::new(vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 4, 5]]);
        assert_eq!(subdivision_key(&c, &edge), "13 14");
    }

    #[test]
    fn non_convex_position_key_falls_back() {
        let c = PointConfiguration::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.4, 0.5],
        ])
        .unwrap();
        let sub = Subdivision::new(vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(subdivision_key(&c, &sub), "1.2.3.4.5");
    }

    #[test]
    fn small_stratum_experiment_runs() {
        let c = hexagon();
        let rep = stratum_frequency_experiment(&c, 40, 9).unwrap();
        assert_eq!(rep.total_trials, 40);
        assert_eq!(rep.discarded, 0);
        let pct: f64 = rep.entries.iter().map(|e| e.percentage).sum();
        assert!((pct - 100.0).abs() < 1e-9);
        // Deterministic replay.
        let rep2 = stratum_frequency_experiment(&c, 40, 9).unwrap();
        let j1 = serde_json::to_string(&rep).unwrap();
        let j2 = serde_json::to_string(&rep2).unwrap();
        assert_eq!(j1, j2);
    }

    #[test]
    fn shape_census_runs() {
        let census = cell_shape_experiment(Dist::Gaussian, 30, 4).unwrap();
        assert_eq!(census.total_trials, 30);
        let total: usize = census.rows.iter().map(|r| r.count).sum();
        assert_eq!(total + census.discarded, 30);
        for rec in &census.records {
            let cells_from_profile: usize = rec.shape_profile.iter().sum();
            assert_eq!(cells_from_profile, rec.subdivision.num_cells());
            assert!((3..=6).contains(&rec.hull_vertices));
        }
        let csv = records_to_csv(&census.records);
        assert_eq!(csv.lines().count(), 31);
    }

    #[test]
    fn construction_volumes_and_threshold() {
        let con = d_plus_3_construction(2, 2.0, None).unwrap();
        assert!(con.expect_star);
        assert_eq!(con.config.n(), 4);
        let near = d_plus_3_construction(2, 1.1, None).unwrap();
        assert!(!near.expect_star);
        let split = d_plus_3_construction(2, 2.0, Some(1e-2)).unwrap();
        assert_eq!(split.config.n(), 5);
        // Unit weights after the split at ratio 2.
        for w in split.weights.as_slice() {
            assert!((w - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_ratio_limit() {
        // As alpha -> 0 the ratio approaches (d+1)/d.
        for d in [2usize, 3] {
            let r = alpha_weight_ratio(d, 1e-9);
            assert!((r - (d + 1) as f64 / d as f64).abs() < 1e-6, "d={d}: {r}");
        }
    }
}
