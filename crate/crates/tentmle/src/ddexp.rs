//! Divided differences of the exponential function.
//!
//! For distinct nodes, `exp[y_0,…,y_m] = Σ_i e^{y_i} / ∏_{j≠i}(y_i − y_j)`;
//! repeated nodes are confluent limits (`exp[y,…,y]` with `m+1` copies is
//! `e^y/m!`). This single kernel carries most of the crate's numerics: the
//! simplex integral of an exponential is `vol · exp[heights]`, the symmetric
//! function `H(u)` is `exp[0, 0, u_1, …, u_d]`, and each extra repetition of
//! a node differentiates with respect to it.
//!
//! The direct rational formula cancels catastrophically for clustered nodes,
//! so evaluation is split by gap structure: a cluster of total spread below
//! `TAU_CLUSTER` uses the all-positive shifted series
//! `e^{y_min} Σ_r h_r(y − y_min)/(r+m)!`, well-separated nodes use the direct
//! formula, and mixed configurations recurse with
//! `exp[y_0..y_m] = (exp[y_1..y_m] − exp[y_0..y_{m−1}])/(y_m − y_0)`, which
//! only ever divides across a spread exceeding the cluster threshold.

/// Gap threshold between the direct rational formula and series evaluation.
pub(crate) const TAU_CLUSTER: f64 = 0.05;

const SERIES_REL_TOL: f64 = 1e-16;
const SERIES_CAP: usize = 300;

/// `exp[values]` for an arbitrary multiset of nodes (order irrelevant).
pub(crate) fn exp_divided_difference(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
    let shift = *v.last().unwrap();
    for x in v.iter_mut() {
        *x -= shift;
    }
    dd_sorted(&v) * shift.exp()
}

/// Incremental complete homogeneous symmetric polynomials: after `r` calls to
/// `advance`, `value()` is `h_r(u)`.
pub(crate) struct HomogeneousSeries {
    u: Vec<f64>,
    prefix: Vec<f64>,
}

impl HomogeneousSeries {
    pub fn new(u: &[f64]) -> Self {
        HomogeneousSeries {
            u: u.to_vec(),
            prefix: vec![1.0; u.len() + 1],
        }
    }

    /// `h_r` of the full argument list at the current degree.
    pub fn value(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// Step from degree `r` to `r + 1` via
    /// `h_{r+1}(u_1..u_j) = h_{r+1}(u_1..u_{j−1}) + u_j · h_r(u_1..u_j)`.
    pub fn advance(&mut self) {
        let mut next = vec![0.0; self.prefix.len()];
        for j in 1..self.prefix.len() {
            next[j] = next[j - 1] + self.u[j - 1] * self.prefix[j];
        }
        self.prefix = next;
    }
}

/// `Σ_{r≥0} h_r(args)/(r+m)!`, the series form of `exp[nodes]` for `m+1`
/// nodes whose deviations from the minimum are `args`. All-nonnegative
/// arguments make every term positive, so there is no cancellation.
fn series_shifted(args: &[f64], m: usize) -> f64 {
    let mut hs = HomogeneousSeries::new(args);
    let mut denom = 1.0f64;
    for k in 2..=m {
        denom *= k as f64;
    }
    let mut inv_fact = 1.0 / denom; // 1/m!
    let mut sum = inv_fact;
    for r in 1..=SERIES_CAP {
        hs.advance();
        inv_fact /= (m + r) as f64;
        let term = hs.value() * inv_fact;
        sum += term;
        if term.abs() <= SERIES_REL_TOL * sum.abs() {
            break;
        }
    }
    sum
}

fn direct(v: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..v.len() {
        let mut denom = 1.0;
        for j in 0..v.len() {
            if j != i {
                denom *= v[i] - v[j];
            }
        }
        sum += v[i].exp() / denom;
    }
    sum
}

fn dd_sorted(v: &[f64]) -> f64 {
    let m = v.len();
    if m == 1 {
        return v[0].exp();
    }
    let spread = v[m - 1] - v[0];
    if spread < TAU_CLUSTER {
        let base = v[0];
        let args: Vec<f64> = v[1..].iter().map(|&x| x - base).collect();
        return base.exp() * series_shifted(&args, m - 1);
    }
    let min_gap = v
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if min_gap > TAU_CLUSTER {
        return direct(v);
    }
    (dd_sorted(&v[1..]) - dd_sorted(&v[..m - 1])) / spread
}
