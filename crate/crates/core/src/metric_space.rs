//! Finite metric spaces: parsing, validation, sampling, Euclidean embeddability,
//! and the labeled vectors `e_{x,y}` spanning the fundamental polytope.
//!
//! Points are indexed from 0 throughout.
//!
//! The vectors live in `V₀`, the sum-zero hyperplane of `ℝⁿ`. Each point `x`
//! maps to `δ_x = 1_x − (1/n)·𝟙`; the `−1/n` offsets cancel in any difference,
//! so `δ_x − δ_y = 1_x − 1_y` and `e_{x,y} = (1_x − 1_y) / ρ(x,y)` has a single
//! `+1/ρ` and a single `−1/ρ` coordinate.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_math::{
    format_rational, in_convex_hull, int, parse_rational, psd_check, rat, solve_lp, RatMatrix, Rational,
};

/// Symmetric `n×n` matrix with zero diagonal, `n ≥ 2`.
///
/// Positivity and the triangle inequality are not enforced by construction;
/// see [`validate_metric`] and [`DistanceMatrix::ensure_positive`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DistanceMatrix {
    rows: Vec<Vec<Rational>>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewPoints(n));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        for i in 0..n {
            if !rows[i][i].is_zero() {
                return Err(Error::NonzeroDiagonal(i));
            }
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Asymmetric { i, j });
                }
            }
        }
        Ok(DistanceMatrix { rows })
    }

    /// Every pair of distinct points at distance 1.
    pub fn unit(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| Rational::one())
    }

    /// Builds a matrix from the distance of each pair `i < j`.
    pub fn from_fn(n: usize, mut dist: impl FnMut(usize, usize) -> Rational) -> Result<Self> {
        let mut rows = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist(i, j);
                rows[i][j] = d.clone();
                rows[j][i] = d;
            }
        }
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn ensure_positive(&self) -> Result<()> {
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                if !self.rows[i][j].is_positive() {
                    return Err(Error::Nonpositive { i, j });
                }
            }
        }
        Ok(())
    }

    pub fn ensure_metric(&self) -> Result<()> {
        let report = validate_metric(self);
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::NotMetric(format!("{:?} violation at {:?}", v.kind, v.witness))),
        }
    }

    /// Relabels points: the result has `d'[perm[i]][perm[j]] = d[i][j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch(format!("permutation of length {}", perm.len())));
        }
        let mut rows = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                rows[perm[i]][perm[j]] = self.rows[i][j].clone();
            }
        }
        Self::from_rows(rows)
    }

    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        Self::from_rows(self.rows.iter().map(|row| row.iter().map(|x| x * factor).collect()).collect())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(format_rational).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MatrixJson::from(self)).expect("matrix serializes")
    }
}

/// `{"n": .., "d": [[..]]}` with rationals as strings. Extra keys are ignored
/// on input, so richer documents embedding a matrix can be read back.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    #[serde(with = "crate::exact_math::serde_rational::matrix")]
    pub d: Vec<Vec<Rational>>,
}

impl From<&DistanceMatrix> for MatrixJson {
    fn from(m: &DistanceMatrix) -> Self {
        MatrixJson { n: m.n(), d: m.rows.clone() }
    }
}

impl Serialize for DistanceMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DistanceMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.n != raw.d.len() {
            return Err(serde::de::Error::custom(format!("n = {} but {} rows", raw.n, raw.d.len())));
        }
        DistanceMatrix::from_rows(raw.d).map_err(serde::de::Error::custom)
    }
}

/// Parses the whitespace-separated text format (lines starting with `#` are
/// comments) or a JSON object `{"n": .., "d": [[..]]}`.
pub fn parse_distance_matrix(text: &str) -> Result<DistanceMatrix> {
    if text.trim_start().starts_with('{') {
        let matrix: DistanceMatrix = serde_json::from_str(text)?;
        return Ok(matrix);
    }
    DistanceMatrix::from_rows(parse_matrix_rows(text)?)
}

/// Reads a square matrix in either input format without checking any metric
/// axiom, so that [`validate_rows`] can report on it.
pub fn parse_matrix_rows(text: &str) -> Result<Vec<Vec<Rational>>> {
    if text.trim_start().starts_with('{') {
        let raw: MatrixJson = serde_json::from_str(text)?;
        if raw.n != raw.d.len() || raw.d.iter().any(|r| r.len() != raw.n) {
            return Err(Error::DimensionMismatch(format!("declared n = {} does not match the rows", raw.n)));
        }
        return Ok(raw.d);
    }
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .enumerate()
            .map(|(col, token)| {
                parse_rational(token).map_err(|_| Error::Parse {
                    line: line_no + 1,
                    col: col + 1,
                    message: format!("malformed rational {token:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::Parse {
            line: i + 1,
            col: rows[i].len(),
            message: format!("matrix row {i} has {} entries, expected {n}", rows[i].len()),
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Asymmetry,
    NonzeroDiagonal,
    Nonpositive,
    Triangle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub witness: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricReport {
    pub is_valid: bool,
    pub violations: Vec<Violation>,
}

/// Checks every metric axiom on a raw square matrix.
///
/// A triangle violation `(i, j, k)` with `i < j` means
/// `d[i][j] > d[i][k] + d[k][j]`.
pub fn validate_rows(rows: &[Vec<Rational>]) -> MetricReport {
    let n = rows.len();
    let mut violations = Vec::new();
    let mut push = |kind, witness: Vec<usize>| violations.push(Violation { kind, witness });
    for i in 0..n {
        if !rows[i][i].is_zero() {
            push(ViolationKind::NonzeroDiagonal, vec![i]);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rows[i][j] != rows[j][i] {
                push(ViolationKind::Asymmetry, vec![i, j]);
            }
            if !rows[i][j].is_positive() || !rows[j][i].is_positive() {
                push(ViolationKind::Nonpositive, vec![i, j]);
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (0..n).filter(|&k| k != i && k != j) {
                if rows[i][j] > &rows[i][k] + &rows[k][j] {
                    push(ViolationKind::Triangle, vec![i, j, k]);
                }
            }
        }
    }
    MetricReport { is_valid: violations.is_empty(), violations }
}

pub fn validate_metric(d: &DistanceMatrix) -> MetricReport {
    validate_rows(&d.rows)
}

/// The vector `e_{from,to} = (1_from − 1_to) / d[from][to]` in `V₀`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub from: usize,
    pub to: usize,
    #[serde(with = "crate::exact_math::serde_rational::vec")]
    pub coords: Vec<Rational>,
}

/// All `n(n−1)` labeled points, ordered lexicographically by `(from, to)`.
pub fn fundamental_vectors(d: &DistanceMatrix) -> Result<Vec<LabeledPoint>> {
    d.ensure_positive()?;
    let n = d.n();
    let mut points = Vec::with_capacity(n * (n - 1));
    for from in 0..n {
        for to in (0..n).filter(|&to| to != from) {
            let scale = d.get(from, to).recip();
            let mut coords = vec![Rational::zero(); n];
            coords[from] = scale.clone();
            coords[to] = -scale;
            points.push(LabeledPoint { from, to, coords });
        }
    }
    Ok(points)
}

/// Directions `n·1_i − 𝟙`, which sum to zero and positively span `V₀`.
fn spanning_directions(n: usize) -> Vec<Vec<Rational>> {
    (0..n).map(|i| (0..n).map(|k| if k == i { int(n as i64 - 1) } else { int(-1) }).collect()).collect()
}

/// Whether `target` is an interior point (relative to `V₀`) of the hull of
/// `others`.
///
/// `target` is interior iff, for each direction `u` of a positively spanning
/// set, `target + t·u` stays in the hull for some `t > 0`: the hull then
/// contains a small simplex around `target`. Each direction is one LP
/// maximizing `t`.
pub fn is_interior_point(others: &[Vec<Rational>], target: &[Rational]) -> Result<bool> {
    let dim = target.len();
    let k = others.len();
    for dir in spanning_directions(dim) {
        // Variables: λ_1..λ_k ≥ 0, t ≥ 0.
        let mut rows: Vec<Vec<Rational>> = (0..dim)
            .map(|c| {
                let mut row: Vec<Rational> = others.iter().map(|p| p[c].clone()).collect();
                row.push(-dir[c].clone());
                row
            })
            .collect();
        let mut convex = vec![Rational::one(); k];
        convex.push(Rational::zero());
        rows.push(convex);
        let mut rhs = target.to_vec();
        rhs.push(Rational::one());
        let mut objective = vec![Rational::zero(); k];
        objective.push(-Rational::one());
        let lp = solve_lp(&objective, &RatMatrix::from_rows(rows)?, &rhs, &vec![true; k + 1])?;
        match lp.value {
            Some(v) if v.is_negative() => continue,
            // Infeasible (outside the hull) or stuck at t = 0 (on the boundary).
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// True iff no `e_{x,y}` lies in the interior of the hull of the other
/// labeled points. For symmetric positive `d` this holds exactly when `d`
/// satisfies the triangle inequality.
pub fn extremality_metric_test(d: &DistanceMatrix) -> Result<bool> {
    let points = fundamental_vectors(d)?;
    let coords: Vec<Vec<Rational>> = points.into_iter().map(|p| p.coords).collect();
    for i in 0..coords.len() {
        let others: Vec<Vec<Rational>> =
            coords.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| c.clone()).collect();
        if !in_convex_hull(&others, &coords[i])? {
            continue;
        }
        if is_interior_point(&others, &coords[i])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Gram matrix of the points relative to point 0:
/// `G[i][j] = (d0i² + d0j² − dij²) / 2` for `1 ≤ i, j < n`.
pub fn gram_matrix(d: &DistanceMatrix) -> RatMatrix {
    let n = d.n();
    let mut g = RatMatrix::zeros(n - 1, n - 1);
    for i in 1..n {
        for j in 1..n {
            let sq = |x: &Rational| x * x;
            g[(i - 1, j - 1)] = (sq(d.get(0, i)) + sq(d.get(0, j)) - sq(d.get(i, j))) / int(2);
        }
    }
    g
}

/// Isometric embeddability into some Euclidean space (Schoenberg).
pub fn euclidean_type_test(d: &DistanceMatrix) -> Result<bool> {
    d.ensure_metric()?;
    psd_check(&gram_matrix(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMode {
    /// Uniform rationals in (0, 1], then shortest-path closure.
    Closure,
    /// ℓ¹ distances between random rational points of `[0,1]^(n−1)`. These are
    /// always metrics but usually not Euclidean; embeddability is decided
    /// separately by [`euclidean_type_test`].
    Euclidean,
}

impl std::str::FromStr for SamplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closure" => Ok(SamplerMode::Closure),
            "euclidean" => Ok(SamplerMode::Euclidean),
            other => Err(Error::Unsupported(format!("sampler mode {other:?}"))),
        }
    }
}

fn random_unit_rational(rng: &mut ChaCha8Rng, bound: u64, allow_zero: bool) -> Rational {
    let q = rng.gen_range(1..=bound);
    let p = if allow_zero { rng.gen_range(0..=q) } else { rng.gen_range(1..=q) };
    rat(p as i64, q as i64)
}

fn sample_with(rng: &mut ChaCha8Rng, n: usize, bound: u64, mode: SamplerMode) -> DistanceMatrix {
    match mode {
        SamplerMode::Closure => {
            let mut rows = vec![vec![Rational::zero(); n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let x = random_unit_rational(rng, bound, false);
                    rows[i][j] = x.clone();
                    rows[j][i] = x;
                }
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let via = &rows[i][k] + &rows[k][j];
                        if via < rows[i][j] {
                            rows[i][j] = via;
                        }
                    }
                }
            }
            DistanceMatrix::from_rows(rows).expect("closure keeps the matrix symmetric")
        }
        SamplerMode::Euclidean => loop {
            let dim = n - 1;
            let points: Vec<Vec<Rational>> =
                (0..n).map(|_| (0..dim).map(|_| random_unit_rational(rng, bound, true)).collect()).collect();
            let m = DistanceMatrix::from_fn(n, |i, j| {
                points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).abs()).sum()
            })
            .expect("l1 distances are symmetric");
            if m.ensure_positive().is_ok() {
                break m;
            }
        },
    }
}

/// Deterministic random metric for fixed `(n, seed, denominator_bound, mode)`.
pub fn random_metric(
    n: usize,
    seed: u64,
    denominator_bound: u64,
    mode: SamplerMode,
) -> Result<DistanceMatrix> {
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if denominator_bound == 0 {
        return Err(Error::Unsupported("denominator bound must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_with(&mut rng, n, denominator_bound, mode))
}

pub fn has_strict_triangles(d: &DistanceMatrix) -> bool {
    let n = d.n();
    (0..n).all(|i| {
        (0..n)
            .all(|j| i == j || (0..n).all(|k| k == i || k == j || d.get(i, j) < &(d.get(i, k) + d.get(k, j))))
    })
}

const STRICT_ATTEMPTS: usize = 10_000;

/// Like [`random_metric`], but resamples from the same stream until every
/// triangle inequality is strict.
pub fn random_strict_metric(
    n: usize,
    seed: u64,
    denominator_bound: u64,
    mode: SamplerMode,
) -> Result<DistanceMatrix> {
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if denominator_bound == 0 {
        return Err(Error::Unsupported("denominator bound must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..STRICT_ATTEMPTS {
        let m = sample_with(&mut rng, n, denominator_bound, mode);
        if has_strict_triangles(&m) {
            return Ok(m);
        }
    }
    Err(Error::Unsupported(format!(
        "no strict metric found in {STRICT_ATTEMPTS} draws (n = {n}, bound = {denominator_bound})"
    )))
}
