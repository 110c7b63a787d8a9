//! Point configurations, lifted upper hulls, regular subdivisions,
//! triangulation enumeration, and GKZ vectors.
//!
//! Throughout, `vol` means *normalized* volume: the absolute value of the
//! `(d+1) x (d+1)` determinant with a top row of ones and the simplex
//! vertices as columns, i.e. `d!` times the Euclidean volume. The constant
//! tent `exp(y) · vol(σ)/d!` check in the quadrature tests pins this
//! convention down.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{det, Mat};
use crate::{Error, Result};

mod enumerate;
mod hull;

pub use enumerate::{
    enumerate_regular_triangulations, enumerate_regular_triangulations_with_limit,
    is_regular_subdivision, refining_triangulations, secondary_cone_interior_point,
    DEFAULT_ENUM_LIMIT,
};
pub(crate) use enumerate::{refining_geometric_triangulations, subdivision_equality_rows};
pub(crate) use hull::barycentric as barycentric_coords;
pub(crate) use hull::relevance_violation;
pub(crate) use hull::{
    cell_refinement, induced_subdivision_with_tol, triangulate_subset, EPS_FLAT,
};
pub use hull::{induced_subdivision, is_relevant, make_relevant, tent_value};

/// Relevance tolerance, relative to the height scale.
pub(crate) const EPS_REL: f64 = 1e-8;

/// A labeled configuration of `n` distinct points affinely spanning `R^d`.
#[derive(Debug, Clone)]
pub struct PointConfiguration {
    points: Vec<Vec<f64>>,
    fingerprint: u64,
    hull_volume: OnceLock<f64>,
    full_triangulation: OnceLock<Vec<Vec<usize>>>,
}

impl PointConfiguration {
    /// Validate and build a configuration. Duplicate points, fewer than
    /// `d + 1` points, or a lower-dimensional affine span are hard errors;
    /// the span check runs in exact rational arithmetic.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::DegenerateInput("empty configuration".into()));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(Error::DegenerateInput("points have dimension 0".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::DegenerateInput(format!(
                    "point {} has {} coordinates, expected {}",
                    i + 1,
                    p.len(),
                    d
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::DegenerateInput(format!(
                    "point {} has a non-finite coordinate",
                    i + 1
                )));
            }
        }
        if n < d + 1 {
            return Err(Error::DegenerateInput(format!(
                "need at least {} points in R^{}, got {}",
                d + 1,
                d,
                n
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                if points[i] == points[j] {
                    return Err(Error::DegenerateInput(format!(
                        "points {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        // Exact affine rank: rows x_i − x_0 must span R^d.
        let centered: Vec<Vec<crate::exact::Rat>> = (1..n)
            .map(|i| {
                (0..d)
                    .map(|k| crate::exact::rat(points[i][k]) - crate::exact::rat(points[0][k]))
                    .collect()
            })
            .collect();
        if crate::exact::rank(centered) != d {
            return Err(Error::DegenerateInput(
                "points do not affinely span R^d".into(),
            ));
        }
        let fingerprint = fingerprint_points(&points);
        Ok(PointConfiguration {
            points,
            fingerprint,
            hull_volume: OnceLock::new(),
            full_triangulation: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub(crate) fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Normalized volume of `conv(X)`.
    pub fn hull_volume_normalized(&self) -> f64 {
        *self.hull_volume.get_or_init(|| {
            self.full_triangulation()
                .iter()
                .map(|s| simplex_volume_normalized(&self.points, s))
                .sum()
        })
    }

    /// A fixed triangulation of the whole configuration (all points used),
    /// for volumes and point location.
    pub(crate) fn full_triangulation(&self) -> &Vec<Vec<usize>> {
        self.full_triangulation.get_or_init(|| {
            let all: Vec<usize> = (0..self.n()).collect();
            triangulate_subset(&self.points, &all).expect("triangulation of a valid configuration")
        })
    }
}

fn fingerprint_points(points: &[Vec<f64>]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut put = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    put(points.len() as u64);
    for p in points {
        for &c in p {
            put(c.to_bits());
        }
    }
    h
}

/// Heights paired with a configuration; lifts the points and induces a
/// tent function and a regular subdivision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightVector(pub Vec<f64>);

impl HeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A `d`-simplex as a sorted list of 0-based vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex {
    vertices: Vec<usize>,
}

impl Simplex {
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Simplex { vertices }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }
}

/// A polyhedral subdivision in canonical form: cells are sorted index lists,
/// the cell list is sorted lexicographically, and equality is list equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subdivision {
    cells: Vec<Vec<usize>>,
}

impl Subdivision {
    pub fn new(cells: Vec<Vec<usize>>) -> Self {
        let mut cells: Vec<Vec<usize>> = cells
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        cells.sort();
        cells.dedup();
        Subdivision { cells }
    }

    /// Build from 1-based cells (the file-format convention).
    pub fn from_one_based(cells: &[Vec<usize>]) -> Result<Self> {
        let mut out = Vec::with_capacity(cells.len());
        for c in cells {
            let mut cc = Vec::with_capacity(c.len());
            for &i in c {
                if i == 0 {
                    return Err(Error::InvalidInput(
                        "subdivision indices are 1-based; found 0".into(),
                    ));
                }
                cc.push(i - 1);
            }
            out.push(cc);
        }
        Ok(Subdivision::new(out))
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// The trivial subdivision has a single cell.
    pub fn is_trivial(&self) -> bool {
        self.cells.len() == 1
    }

    /// All cells are simplices in `R^d`.
    pub fn is_triangulation(&self, d: usize) -> bool {
        self.cells.iter().all(|c| c.len() == d + 1)
    }

    pub fn to_triangulation(&self, d: usize) -> Option<Triangulation> {
        if self.is_triangulation(d) {
            Some(Triangulation {
                simplices: self.cells.iter().map(|c| Simplex::new(c.clone())).collect(),
            })
        } else {
            None
        }
    }
}

impl Serialize for Subdivision {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            cells: &'a Vec<Vec<usize>>,
        }
        let cells: Vec<Vec<usize>> = self
            .cells
            .iter()
            .map(|c| c.iter().map(|&i| i + 1).collect())
            .collect();
        Wire { cells: &cells }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subdivision {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            cells: Vec<Vec<usize>>,
        }
        let w = Wire::deserialize(d)?;
        Subdivision::from_one_based(&w.cells).map_err(D::Error::custom)
    }
}

/// A subdivision all of whose cells are `d`-simplices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triangulation {
    simplices: Vec<Simplex>,
}

impl Serialize for Triangulation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_subdivision().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Triangulation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let sub = Subdivision::deserialize(d)?;
        Ok(Triangulation::from_cells(sub.cells.clone()))
    }
}

impl Triangulation {
    pub fn new(mut simplices: Vec<Simplex>) -> Self {
        simplices.sort();
        simplices.dedup();
        Triangulation { simplices }
    }

    pub fn from_cells(cells: Vec<Vec<usize>>) -> Self {
        Triangulation::new(cells.into_iter().map(Simplex::new).collect())
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn as_subdivision(&self) -> Subdivision {
        Subdivision::new(self.simplices.iter().map(|s| s.vertices.clone()).collect())
    }

    /// Indices used by at least one simplex.
    pub fn used_points(&self) -> BTreeSet<usize> {
        self.simplices
            .iter()
            .flat_map(|s| s.vertices.iter().copied())
            .collect()
    }
}

/// Per-point sums of normalized volumes of incident simplices; the vertex of
/// the secondary polytope associated with a regular triangulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GkzVector {
    pub entries: Vec<f64>,
}

/// Normalized volume of a simplex of the configuration: the absolute
/// determinant of the matrix with a top row of ones and point columns.
/// Degenerate simplices yield 0.
pub fn normalized_volume(config: &PointConfiguration, simplex: &Simplex) -> f64 {
    simplex_volume_normalized(config.points(), simplex.vertices())
}

pub(crate) fn simplex_volume_normalized(points: &[Vec<f64>], vertices: &[usize]) -> f64 {
    let d = points[0].len();
    if vertices.len() != d + 1 {
        return 0.0;
    }
    let p0 = &points[vertices[0]];
    let mut m = Mat::zeros(d, d);
    for (r, &vi) in vertices[1..].iter().enumerate() {
        for c in 0..d {
            m.set(r, c, points[vi][c] - p0[c]);
        }
    }
    det(&m).abs()
}

/// GKZ vector of a triangulation: entry `k` is the total normalized volume
/// of the simplices containing point `k`.
pub fn gkz_vector(config: &PointConfiguration, triangulation: &Triangulation) -> GkzVector {
    let mut entries = vec![0.0; config.n()];
    for s in triangulation.simplices() {
        let v = normalized_volume(config, s);
        for &k in s.vertices() {
            entries[k] += v;
        }
    }
    GkzVector { entries }
}

/// Whether `heights` lies in the *closed* secondary cone of the
/// triangulation, i.e. the tent is affine on every cell: every simplex of
/// the triangulation sits inside a cell of the induced subdivision.
pub fn secondary_cone_contains(
    config: &PointConfiguration,
    triangulation: &Triangulation,
    heights: &[f64],
) -> Result<bool> {
    let sub = induced_subdivision(config, heights)?;
    Ok(refines_cells(triangulation, sub.cells()))
}

/// Every simplex's index set is contained in some cell.
pub(crate) fn refines_cells(triangulation: &Triangulation, cells: &[Vec<usize>]) -> bool {
    triangulation
        .simplices()
        .iter()
        .all(|s| cells.iter().any(|c| is_sorted_subset(s.vertices(), c)))
}

pub(crate) fn is_sorted_subset(sub: &[usize], sup: &[usize]) -> bool {
    let mut it = sup.iter();
    'outer: for v in sub {
        for w in it.by_ref() {
            if w == v {
                continue 'outer;
            }
            if w > v {
                return false;
            }
        }
        return false;
    }
    true
}

/// Iterate over all `k`-element index combinations of `0..n` in lex order.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut state: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let cur = state.clone()?;
        // Advance to the next combination.
        let mut next = cur.clone();
        let mut i = k;
        loop {
            if i == 0 {
                state = None;
                break;
            }
            i -= 1;
            if next[i] < n - (k - i) {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                state = Some(next);
                break;
            }
        }
        Some(cur)
    })
}
