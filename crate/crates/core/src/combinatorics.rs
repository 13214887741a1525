//! Combinatorial types of fundamental polytopes.
//!
//! A polytope's vertex–facet incidence determines its whole face lattice, so
//! the combinatorial type is captured by a canonical form of the incidence as
//! a two-colored bipartite graph (vertices on one side, facets on the other).
//! The canonical form is found by color refinement plus individualization:
//! every discrete refined partition reached by the search orders rows and
//! columns, and the smallest resulting bit matrix is the certificate. Leaves
//! reproducing that matrix are in bijection with the automorphisms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact_math::Rational;
use crate::metric_space::DistanceMatrix;
use crate::polytope::{proper_face_masks, FVector, Facet, FundamentalPolytope, IncidenceMatrix};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CombinatorialType {
    /// `v1:<vertices>:<facets>:<hex bits>`; equal iff the incidences are
    /// isomorphic.
    pub certificate: String,
    /// Short hash of the certificate for use as a registry key.
    pub digest: String,
    pub num_vertices: usize,
    pub num_facets: usize,
    pub automorphism_order: u64,
}

impl CombinatorialType {
    /// Rebuilds the canonical incidence matrix from the certificate.
    pub fn canonical_incidence(&self) -> Result<IncidenceMatrix> {
        let bad = || Error::Unsupported(format!("malformed certificate {:?}", self.certificate));
        let mut parts = self.certificate.splitn(4, ':');
        if parts.next() != Some("v1") {
            return Err(bad());
        }
        let nv: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let nf: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let hex = parts.next().ok_or_else(bad)?;
        let bytes: Vec<u8> = (0..hex.len() / 2)
            .map(|i| u8::from_str_radix(&hex[2 * i..2 * i + 2], 16))
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        if bytes.len() != (nv * nf).div_ceil(8) {
            return Err(bad());
        }
        let bit = |k: usize| bytes[k / 8] & (0x80 >> (k % 8)) != 0;
        let rows = (0..nv).map(|v| (0..nf).map(|f| bit(v * nf + f)).collect()).collect();
        Ok(IncidenceMatrix { vertex_points: (0..nv).collect(), num_facets: nf, rows })
    }
}

pub fn encode_certificate(rows: &[Vec<bool>], num_facets: usize) -> String {
    let bits: Vec<bool> = rows.iter().flatten().copied().collect();
    let mut out = format!("v1:{}:{}:", rows.len(), num_facets);
    for chunk in bits.chunks(8) {
        let byte = chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)));
        write!(out, "{byte:02x}").expect("writing to a String");
    }
    out
}

pub fn certificate_digest(certificate: &str) -> String {
    let hash = Sha256::digest(certificate.as_bytes());
    hash[..16].iter().map(|b| format!("{b:02x}")).collect()
}

/// Bipartite incidence graph: nodes `0..nv` are vertices, `nv..nv+nf` facets.
struct IncidenceGraph {
    nv: usize,
    nf: usize,
    adjacency: Vec<Vec<usize>>,
    bits: Vec<Vec<bool>>,
}

type Partition = Vec<Vec<usize>>;

impl IncidenceGraph {
    fn new(incidence: &IncidenceMatrix) -> Self {
        let nv = incidence.num_vertices();
        let nf = incidence.num_facets;
        let mut adjacency = vec![Vec::new(); nv + nf];
        for v in 0..nv {
            for f in 0..nf {
                if incidence.get(v, f) {
                    adjacency[v].push(nv + f);
                    adjacency[nv + f].push(v);
                }
            }
        }
        IncidenceGraph { nv, nf, adjacency, bits: incidence.rows.clone() }
    }

    /// Splits cells by neighbor counts per cell until the partition is
    /// equitable. Sub-cells are ordered by their count vectors, so the result
    /// does not depend on node numbering.
    fn refine(&self, mut cells: Partition) -> Partition {
        let mut cell_of = vec![0usize; self.adjacency.len()];
        loop {
            for (c, cell) in cells.iter().enumerate() {
                for &x in cell {
                    cell_of[x] = c;
                }
            }
            let mut changed = false;
            let mut next: Partition = Vec::with_capacity(cells.len());
            for cell in &cells {
                if cell.len() == 1 {
                    next.push(cell.clone());
                    continue;
                }
                let mut groups: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
                for &x in cell {
                    let mut counts = vec![0u32; cells.len()];
                    for &y in &self.adjacency[x] {
                        counts[cell_of[y]] += 1;
                    }
                    groups.entry(counts).or_default().push(x);
                }
                changed |= groups.len() > 1;
                next.extend(groups.into_values());
            }
            cells = next;
            if !changed {
                return cells;
            }
        }
    }

    fn leaf_matrix(&self, cells: &Partition) -> Vec<bool> {
        let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
        let vertices: Vec<usize> = order.iter().copied().filter(|&x| x < self.nv).collect();
        let facets: Vec<usize> =
            order.iter().copied().filter(|&x| x >= self.nv).map(|x| x - self.nv).collect();
        let mut bits = Vec::with_capacity(self.nv * self.nf);
        for &v in &vertices {
            for &f in &facets {
                bits.push(self.bits[v][f]);
            }
        }
        bits
    }
}

struct Search<'a> {
    graph: &'a IncidenceGraph,
    best: Option<Vec<bool>>,
    best_count: u64,
}

impl Search<'_> {
    fn explore(&mut self, cells: Partition) {
        let Some(target) = cells.iter().position(|c| c.len() > 1) else {
            let leaf = self.graph.leaf_matrix(&cells);
            match &self.best {
                Some(best) if leaf > *best => {}
                Some(best) if leaf == *best => self.best_count += 1,
                _ => {
                    self.best = Some(leaf);
                    self.best_count = 1;
                }
            }
            return;
        };
        for &x in &cells[target] {
            let mut branch = cells.clone();
            let rest: Vec<usize> = cells[target].iter().copied().filter(|&y| y != x).collect();
            branch.splice(target..=target, [vec![x], rest]);
            self.explore(self.graph.refine(branch));
        }
    }
}

/// Canonical certificate of the incidence and the order of its automorphism
/// group (pairs of vertex and facet permutations preserving incidence).
pub fn canonical_certificate(incidence: &IncidenceMatrix) -> CombinatorialType {
    let graph = IncidenceGraph::new(incidence);
    let (nv, nf) = (graph.nv, graph.nf);
    let initial: Partition = [(0..nv).collect::<Vec<_>>(), (nv..nv + nf).collect()]
        .into_iter()
        .filter(|c| !c.is_empty())
        .collect();
    let mut search = Search { graph: &graph, best: None, best_count: 0 };
    search.explore(graph.refine(initial));
    let bits = search.best.unwrap_or_default();
    let rows: Vec<Vec<bool>> =
        if nf == 0 { vec![Vec::new(); nv] } else { bits.chunks(nf).map(<[bool]>::to_vec).collect() };
    let certificate = encode_certificate(&rows, nf);
    CombinatorialType {
        digest: certificate_digest(&certificate),
        certificate,
        num_vertices: nv,
        num_facets: nf,
        automorphism_order: search.best_count,
    }
}

pub fn combinatorial_type(d: &DistanceMatrix) -> Result<CombinatorialType> {
    Ok(canonical_certificate(&FundamentalPolytope::new(d)?.incidence))
}

/// Same combinatorial type of fundamental polytopes.
pub fn is_similar(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<bool> {
    a.ensure_metric()?;
    b.ensure_metric()?;
    if a.n() != b.n() {
        return Ok(false);
    }
    Ok(combinatorial_type(a)?.certificate == combinatorial_type(b)?.certificate)
}

/// f-vector computed from the incidence alone: a face's dimension is the
/// length of the longest chain of faces below it, starting at a vertex.
pub fn combinatorial_f_vector(incidence: &IncidenceMatrix) -> FVector {
    let mut faces: Vec<u128> = proper_face_masks(incidence).into_iter().collect();
    faces.sort_by_key(|m| (m.count_ones(), *m));
    let mut dims: HashMap<u128, usize> = HashMap::new();
    for &face in &faces {
        let dim =
            faces.iter().filter(|&&g| g != face && g & face == g).map(|g| dims[g] + 1).max().unwrap_or(0);
        dims.insert(face, dim);
    }
    let top = dims.values().max().map_or(0, |d| d + 1);
    let mut counts = vec![0; top];
    for d in dims.values() {
        counts[*d] += 1;
    }
    FVector(counts)
}

fn apply_to_coords(perm: &[usize], coords: &[Rational]) -> Vec<Rational> {
    let mut out = coords.to_vec();
    for (k, x) in coords.iter().enumerate() {
        out[perm[k]] = x.clone();
    }
    out
}

/// Whether relabeling points by `perm` maps vertices to vertices and facets
/// to facets of the polytope (hence preserves incidence).
pub fn induces_polytope_automorphism(polytope: &FundamentalPolytope, perm: &[usize]) -> bool {
    let vertices: BTreeSet<Vec<Rational>> = polytope.vertex_coords().into_iter().collect();
    let facets: BTreeSet<&Facet> = polytope.hrep.facets.iter().collect();
    vertices.iter().all(|v| vertices.contains(&apply_to_coords(perm, v)))
        && polytope
            .hrep
            .facets
            .iter()
            .all(|f| facets.contains(&Facet { normal: apply_to_coords(perm, &f.normal) }))
}

fn extend_isometries(
    d: &DistanceMatrix,
    partial: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let n = d.n();
    let i = partial.len();
    if i == n {
        out.push(partial.clone());
        return;
    }
    for image in 0..n {
        if used[image] || (0..i).any(|j| d.get(image, partial[j]) != d.get(i, j)) {
            continue;
        }
        used[image] = true;
        partial.push(image);
        extend_isometries(d, partial, used, out);
        partial.pop();
        used[image] = false;
    }
}

/// Point permutations preserving all distances, each checked to act as a
/// combinatorial automorphism of the fundamental polytope.
pub fn isometry_induced_automorphisms(d: &DistanceMatrix) -> Result<Vec<Vec<usize>>> {
    d.ensure_metric()?;
    let mut isometries = Vec::new();
    extend_isometries(d, &mut Vec::with_capacity(d.n()), &mut vec![false; d.n()], &mut isometries);
    let polytope = FundamentalPolytope::new(d)?;
    Ok(isometries.into_iter().filter(|p| induces_polytope_automorphism(&polytope, p)).collect())
}
