//! The fundamental polytope: vertices, facets (double description), the
//! vertex–facet incidence, the face lattice, and the f-vector.
//!
//! Facets are kept in ambient coordinates as normals `a` with `Σa = 0` and
//! right-hand side 1, i.e. the polytope is `{x ∈ V₀ : a·x ≤ 1 for all a}`.
//! The origin is interior for every positive symmetric distance matrix, so
//! this normalization always exists and makes each facet's normal unique.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_math::{affine_rank, dot, in_convex_hull, int, inverse, rank, RatMatrix, Rational};
use crate::metric_space::{fundamental_vectors, DistanceMatrix, LabeledPoint};

/// Vertex and point sets are bitmasks; this bounds both the number of labeled
/// points and of facet constraints.
pub const MAX_POINTS: usize = 128;

/// Labeled points of a fundamental polytope, each flagged extreme or not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VRepresentation {
    pub ambient_dim: usize,
    pub points: Vec<LabeledPoint>,
    pub is_vertex: Vec<bool>,
}

impl VRepresentation {
    /// Flags each point by an exact hull-membership LP against the others.
    pub fn from_points(ambient_dim: usize, points: Vec<LabeledPoint>) -> Result<Self> {
        if points.len() > MAX_POINTS {
            return Err(Error::Unsupported(format!(
                "{} points exceeds the limit of {MAX_POINTS}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| p.coords.len() != ambient_dim) {
            return Err(Error::DimensionMismatch(format!(
                "point ({},{}) has {} coordinates, expected {ambient_dim}",
                p.from,
                p.to,
                p.coords.len()
            )));
        }
        let mut is_vertex = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let others: Vec<Vec<Rational>> =
                points.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| q.coords.clone()).collect();
            is_vertex.push(others.is_empty() || !in_convex_hull(&others, &p.coords)?);
        }
        Ok(VRepresentation { ambient_dim, points, is_vertex })
    }

    /// Indices (into `points`) of the extreme points.
    pub fn vertex_indices(&self) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| self.is_vertex[i]).collect()
    }

    pub fn vertices(&self) -> Vec<&LabeledPoint> {
        self.vertex_indices().into_iter().map(|i| &self.points[i]).collect()
    }

    pub fn num_vertices(&self) -> usize {
        self.is_vertex.iter().filter(|&&v| v).count()
    }

    /// Affine dimension of the hull.
    pub fn dimension(&self) -> Result<usize> {
        let coords: Vec<Vec<Rational>> = self.points.iter().map(|p| p.coords.clone()).collect();
        affine_rank(&coords)
    }
}

pub fn build_fundamental_polytope(d: &DistanceMatrix) -> Result<VRepresentation> {
    VRepresentation::from_points(d.n(), fundamental_vectors(d)?)
}

/// Convex hull of the roots `1_i − 1_j` of the `A_{n−1}` root system: the
/// fundamental polytope of the unit metric.
pub fn root_polytope(n: usize) -> Result<VRepresentation> {
    build_fundamental_polytope(&DistanceMatrix::unit(n)?)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Facet {
    #[serde(with = "crate::exact_math::serde_rational::vec")]
    pub normal: Vec<Rational>,
}

impl Facet {
    pub fn value(&self, x: &[Rational]) -> Rational {
        dot(&self.normal, x)
    }

    pub fn negated(&self) -> Facet {
        Facet { normal: self.normal.iter().map(|x| -x).collect() }
    }
}

/// Facets `normal · x ≤ 1`, sorted lexicographically by normal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HRepresentation {
    pub facets: Vec<Facet>,
}

impl HRepresentation {
    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    /// `max_f normal_f · x`: the Minkowski gauge for points of `V₀`.
    pub fn max_value(&self, x: &[Rational]) -> Option<Rational> {
        self.facets.iter().map(|f| f.value(x)).max()
    }
}

fn lcm_of_denominators(values: &[Rational]) -> BigInt {
    values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales a rational vector to a primitive integer vector in the same ray.
fn primitive_from_rational(values: &[Rational]) -> Vec<BigInt> {
    let lcm = lcm_of_denominators(values);
    let ints: Vec<BigInt> = values.iter().map(|v| (v * &lcm).to_integer()).collect();
    make_primitive(ints)
}

fn make_primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    v
}

fn int_dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Ray {
    coords: Vec<BigInt>,
    zeros: u128,
}

/// Extreme rays of the pointed cone `{y : A y ≥ 0}` by the double description
/// method with the combinatorial adjacency test.
///
/// Requires `A` to have full column rank.
fn extreme_rays(constraints: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let dim = constraints[0].len();
    let as_rational = |row: &Vec<BigInt>| -> Vec<Rational> {
        row.iter().map(|x| Rational::from_integer(x.clone())).collect()
    };

    // Initial simplicial cone from `dim` independent constraints.
    let mut basis: Vec<usize> = Vec::with_capacity(dim);
    let mut basis_rows: Vec<Vec<Rational>> = Vec::with_capacity(dim);
    for (k, row) in constraints.iter().enumerate() {
        basis_rows.push(as_rational(row));
        if rank(&basis_rows) == basis_rows.len() {
            basis.push(k);
            if basis.len() == dim {
                break;
            }
        } else {
            basis_rows.pop();
        }
    }
    assert_eq!(basis.len(), dim, "constraint matrix must have full column rank");
    let inv =
        inverse(&RatMatrix::from_rows(basis_rows).expect("square")).expect("basis rows are independent");

    let all_basis: u128 = basis.iter().fold(0, |acc, &k| acc | (1u128 << k));
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let column: Vec<Rational> = (0..dim).map(|i| inv[(i, j)].clone()).collect();
            Ray { coords: primitive_from_rational(&column), zeros: all_basis & !(1u128 << basis[j]) }
        })
        .collect();

    for (k, row) in constraints.iter().enumerate() {
        if basis.contains(&k) {
            continue;
        }
        let values: Vec<BigInt> = rays.iter().map(|r| int_dot(row, &r.coords)).collect();
        let positive: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let negative: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();
        let bit = 1u128 << k;

        let mut created = Vec::new();
        for &p in &positive {
            for &q in &negative {
                let common = rays[p].zeros & rays[q].zeros;
                if (common.count_ones() as usize) + 2 < dim {
                    continue;
                }
                let blocked =
                    rays.iter().enumerate().any(|(r, ray)| r != p && r != q && ray.zeros & common == common);
                if blocked {
                    continue;
                }
                let coords: Vec<BigInt> = rays[q]
                    .coords
                    .iter()
                    .zip(&rays[p].coords)
                    .map(|(yq, yp)| &values[p] * yq - &values[q] * yp)
                    .collect();
                created.push(Ray { coords: make_primitive(coords), zeros: common | bit });
            }
        }

        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + created.len());
        for (i, mut ray) in rays.into_iter().enumerate() {
            if values[i].is_zero() {
                ray.zeros |= bit;
                next.push(ray);
            } else if values[i].is_positive() {
                next.push(ray);
            }
        }
        next.extend(created);
        rays = next;
    }
    rays.into_iter().map(|r| r.coords).collect()
}

/// Complete irredundant facet list of a full-dimensional point set in `V₀`
/// containing the origin in its interior.
///
/// Works on the polar: facets `a·x ≤ 1` are the vertices of
/// `{a : a·p ≤ 1 for all points p}`, recovered as the extreme rays of the
/// homogenized cone `{(t, a) : t − a·p ≥ 0}` in the chart that drops the last
/// coordinate.
pub fn enumerate_facets(v: &VRepresentation) -> Result<HRepresentation> {
    let n = v.ambient_dim;
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let chart_dim = n - 1;
    if v.points.iter().any(|p| p.coords.iter().sum::<Rational>() != Rational::zero()) {
        return Err(Error::DimensionMismatch("points must lie in the sum-zero hyperplane".into()));
    }
    let chart: Vec<Vec<Rational>> = v.points.iter().map(|p| p.coords[..chart_dim].to_vec()).collect();
    let found = affine_rank(&chart)?;
    if found != chart_dim {
        return Err(Error::NotFullDimensional { rank: found, expected: chart_dim });
    }

    let constraints: Vec<Vec<BigInt>> = chart
        .iter()
        .map(|p| {
            let mut row = Vec::with_capacity(n);
            row.push(Rational::one());
            row.extend(p.iter().map(|x| -x));
            primitive_from_rational(&row)
        })
        .collect();
    let homogeneous: Vec<Vec<Rational>> =
        constraints.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect();
    if rank(&homogeneous) != n {
        return Err(Error::OriginNotInterior);
    }

    let mut facets = BTreeSet::new();
    for ray in extreme_rays(&constraints) {
        if !ray[0].is_positive() {
            return Err(Error::OriginNotInterior);
        }
        let t = Rational::from_integer(ray[0].clone());
        let chart_normal: Vec<Rational> =
            ray[1..].iter().map(|x| Rational::from_integer(x.clone()) / &t).collect();
        facets.insert(Facet { normal: chart_to_ambient(&chart_normal) });
    }
    Ok(HRepresentation { facets: facets.into_iter().collect() })
}

/// The unique sum-zero ambient normal acting on `V₀` like `chart_normal` does
/// on the first `n − 1` coordinates.
pub fn chart_to_ambient(chart_normal: &[Rational]) -> Vec<Rational> {
    let n = chart_normal.len() + 1;
    let last = -chart_normal.iter().sum::<Rational>() / int(n as i64);
    chart_normal.iter().map(|c| c + &last).chain(std::iter::once(last.clone())).collect()
}

/// Vertex–facet incidence. Rows are the extreme points in `points` order;
/// `vertex_points` maps each row back to its index in the V-representation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceMatrix {
    pub vertex_points: Vec<usize>,
    pub num_facets: usize,
    pub rows: Vec<Vec<bool>>,
}

impl IncidenceMatrix {
    pub fn from_rows(rows: Vec<Vec<bool>>) -> Self {
        let num_facets = rows.first().map_or(0, Vec::len);
        IncidenceMatrix { vertex_points: (0..rows.len()).collect(), num_facets, rows }
    }

    pub fn num_vertices(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, vertex: usize, facet: usize) -> bool {
        self.rows[vertex][facet]
    }

    /// Vertex set of each facet, as a bitmask over rows.
    pub fn facet_masks(&self) -> Vec<u128> {
        (0..self.num_facets)
            .map(|f| {
                (0..self.num_vertices()).filter(|&v| self.rows[v][f]).fold(0u128, |acc, v| acc | (1u128 << v))
            })
            .collect()
    }

    pub fn facet_sizes(&self) -> Vec<usize> {
        (0..self.num_facets).map(|f| self.rows.iter().filter(|r| r[f]).count()).collect()
    }

    /// Facet size → number of facets of that size.
    pub fn facet_size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for size in self.facet_sizes() {
            *hist.entry(size).or_insert(0) += 1;
        }
        hist
    }
}

pub fn vertex_facet_incidence(v: &VRepresentation, h: &HRepresentation) -> IncidenceMatrix {
    let vertex_points = v.vertex_indices();
    let one = Rational::one();
    let rows = vertex_points
        .iter()
        .map(|&i| h.facets.iter().map(|f| f.value(&v.points[i].coords) == one).collect())
        .collect();
    IncidenceMatrix { vertex_points, num_facets: h.len(), rows }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    pub dim: i64,
    /// Row indices of the incidence matrix, ascending.
    pub vertices: Vec<usize>,
}

/// All faces including the empty face (dimension −1) and the polytope itself,
/// sorted by dimension and then vertex list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceLattice {
    pub dim: usize,
    pub faces: Vec<Face>,
}

fn mask_members(mask: u128) -> Vec<usize> {
    (0..128).filter(|&i| mask & (1u128 << i) != 0).collect()
}

/// Nonempty proper faces as vertex masks: the closure of the facet vertex sets
/// under intersection.
pub fn proper_face_masks(incidence: &IncidenceMatrix) -> HashSet<u128> {
    let facets = incidence.facet_masks();
    let mut seen: HashSet<u128> = HashSet::new();
    let mut queue: VecDeque<u128> = VecDeque::new();
    for &f in &facets {
        if f != 0 && seen.insert(f) {
            queue.push_back(f);
        }
    }
    while let Some(face) = queue.pop_front() {
        for &f in &facets {
            let meet = face & f;
            if meet != 0 && seen.insert(meet) {
                queue.push_back(meet);
            }
        }
    }
    seen
}

/// Face lattice of a full-dimensional polytope; `vertex_coords[i]` are the
/// coordinates of incidence row `i`, used to compute face dimensions.
pub fn build_face_lattice(
    incidence: &IncidenceMatrix,
    vertex_coords: &[Vec<Rational>],
) -> Result<FaceLattice> {
    if vertex_coords.len() != incidence.num_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "{} coordinate rows for {} vertices",
            vertex_coords.len(),
            incidence.num_vertices()
        )));
    }
    let dim = affine_rank(vertex_coords)?;
    let mut faces = vec![
        Face { dim: -1, vertices: Vec::new() },
        Face { dim: dim as i64, vertices: (0..incidence.num_vertices()).collect() },
    ];
    for mask in proper_face_masks(incidence) {
        let vertices = mask_members(mask);
        let coords: Vec<Vec<Rational>> = vertices.iter().map(|&i| vertex_coords[i].clone()).collect();
        faces.push(Face { dim: affine_rank(&coords)? as i64, vertices });
    }
    faces.sort();
    Ok(FaceLattice { dim, faces })
}

/// Face counts `(f_0, …, f_{d−1})`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FVector(pub Vec<usize>);

impl fmt::Display for FVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FVector {
    /// `Σ_{i<d} (−1)^i f_i`, which equals `1 − (−1)^d` for any polytope.
    pub fn euler_characteristic(&self) -> i64 {
        self.0.iter().enumerate().map(|(i, &f)| if i % 2 == 0 { f as i64 } else { -(f as i64) }).sum()
    }
}

pub fn f_vector(lattice: &FaceLattice) -> FVector {
    let mut counts = vec![0; lattice.dim];
    for face in &lattice.faces {
        if face.dim >= 0 && (face.dim as usize) < lattice.dim {
            counts[face.dim as usize] += 1;
        }
    }
    FVector(counts)
}

/// Everything the pipeline derives from one distance matrix.
#[derive(Clone, Debug)]
pub struct FundamentalPolytope {
    pub vrep: VRepresentation,
    pub hrep: HRepresentation,
    pub incidence: IncidenceMatrix,
}

impl FundamentalPolytope {
    pub fn new(d: &DistanceMatrix) -> Result<Self> {
        Self::from_vrep(build_fundamental_polytope(d)?)
    }

    pub fn from_vrep(vrep: VRepresentation) -> Result<Self> {
        let hrep = enumerate_facets(&vrep)?;
        let incidence = vertex_facet_incidence(&vrep, &hrep);
        Ok(FundamentalPolytope { vrep, hrep, incidence })
    }

    pub fn vertex_coords(&self) -> Vec<Vec<Rational>> {
        self.incidence.vertex_points.iter().map(|&i| self.vrep.points[i].coords.clone()).collect()
    }

    pub fn face_lattice(&self) -> Result<FaceLattice> {
        build_face_lattice(&self.incidence, &self.vertex_coords())
    }

    pub fn f_vector(&self) -> Result<FVector> {
        Ok(f_vector(&self.face_lattice()?))
    }
}
