//! Exact rational arithmetic, linear algebra and linear programming.
//!
//! Everything here works over [`Rational`] (arbitrary precision, always kept in
//! lowest terms), so questions like "is this point on the boundary" have exact
//! answers.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational; `num_rational` normalizes after every
/// operation (gcd 1, positive denominator).
pub type Rational = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::BadRational(text.to_string());
    if text.is_empty() {
        return Err(bad());
    }
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p, q),
        None => (text, "1"),
    };
    let numer: BigInt = numer.parse().map_err(|_| bad())?;
    let denom: BigInt = denom.parse().map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

/// Formats as `"p/q"`, or `"p"` when the denominator is 1.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Serde adapters that store rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
            let strings: Vec<String> = values.iter().map(format_rational).collect();
            strings.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
            let strings = Vec::<String>::deserialize(d)?;
            strings.iter().map(|t| parse_rational(t).map_err(serde::de::Error::custom)).collect()
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(
            rows: &[Vec<Rational>],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let strings: Vec<Vec<String>> =
                rows.iter().map(|row| row.iter().map(format_rational).collect()).collect();
            strings.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
            let strings = Vec::<Vec<String>>::deserialize(d)?;
            strings
                .iter()
                .map(|row| row.iter().map(|t| parse_rational(t).map_err(serde::de::Error::custom)).collect())
                .collect()
        }
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, entries: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            )));
        }
        let n_rows = rows.len();
        Ok(RatMatrix { rows: n_rows, cols, entries: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Reduces `rows` in place to row echelon form and returns the rank.
fn echelon(rows: &mut [Vec<Rational>]) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &pivot_row[col];
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= &factor * p;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Rank of a list of vectors (as rows).
pub fn rank(vectors: &[Vec<Rational>]) -> usize {
    let mut rows = vectors.to_vec();
    echelon(&mut rows)
}

/// Dimension of the affine hull: rank of the differences to the first point.
pub fn affine_rank(points: &[Vec<Rational>]) -> Result<usize> {
    let first = points.first().ok_or(Error::Empty("affine_rank needs at least one point"))?;
    if points.iter().any(|p| p.len() != first.len()) {
        return Err(Error::DimensionMismatch("points of unequal length".into()));
    }
    let mut diffs: Vec<Vec<Rational>> =
        points[1..].iter().map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect()).collect();
    Ok(echelon(&mut diffs))
}

pub fn determinant(m: &RatMatrix) -> Result<Rational> {
    if m.rows != m.cols {
        return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
    }
    let mut rows = m.to_rows();
    let size = rows.len();
    let mut det = Rational::one();
    for col in 0..size {
        let Some(pivot) = (col..size).find(|&r| !rows[r][col].is_zero()) else {
            return Ok(Rational::zero());
        };
        if pivot != col {
            rows.swap(col, pivot);
            det = -det;
        }
        det *= &rows[col][col];
        let pivot_row = rows[col].clone();
        for row in rows.iter_mut().skip(col + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &pivot_row[col];
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= &factor * p;
            }
        }
    }
    Ok(det)
}

/// Inverse by Gauss-Jordan; `None` when singular.
pub fn inverse(m: &RatMatrix) -> Option<RatMatrix> {
    if m.rows != m.cols {
        return None;
    }
    let size = m.rows;
    let mut a = m.to_rows();
    let mut inv = RatMatrix::identity(size).to_rows();
    for col in 0..size {
        let pivot = (col..size).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = a[col][col].recip();
        for x in a[col].iter_mut().chain(inv[col].iter_mut()) {
            *x *= &scale;
        }
        let (pa, pi) = (a[col].clone(), inv[col].clone());
        for r in (0..size).filter(|&r| r != col) {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for (x, p) in a[r].iter_mut().zip(&pa) {
                *x -= &factor * p;
            }
            for (x, p) in inv[r].iter_mut().zip(&pi) {
                *x -= &factor * p;
            }
        }
    }
    RatMatrix::from_rows(inv).ok()
}

/// Positive semidefiniteness by symmetric elimination on positive diagonal
/// pivots.
pub fn psd_check(s: &RatMatrix) -> Result<bool> {
    if !s.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let mut a = s.to_rows();
    let mut alive: Vec<usize> = (0..a.len()).collect();
    while !alive.is_empty() {
        if alive.iter().any(|&i| a[i][i].is_negative()) {
            return Ok(false);
        }
        let Some(pos) = alive.iter().position(|&i| a[i][i].is_positive()) else {
            // Zero diagonal: PSD only if the remaining block vanishes.
            let nonzero = alive.iter().any(|&i| alive.iter().any(|&j| !a[i][j].is_zero()));
            return Ok(!nonzero);
        };
        let p = alive.remove(pos);
        let pivot = a[p][p].clone();
        for &i in &alive {
            if a[i][p].is_zero() {
                continue;
            }
            let factor = &a[i][p] / &pivot;
            for &j in &alive {
                let delta = &factor * &a[p][j];
                a[i][j] -= delta;
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpResult {
    pub status: LpStatus,
    pub value: Option<Rational>,
    pub solution: Option<Vec<Rational>>,
}

impl LpResult {
    fn without_solution(status: LpStatus) -> Self {
        LpResult { status, value: None, solution: None }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Dense simplex tableau in canonical form: basic columns are unit vectors.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

enum PivotOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let scale = self.rows[row][col].recip();
        for x in self.rows[row].iter_mut() {
            *x *= &scale;
        }
        self.rhs[row] *= &scale;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for (x, p) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
            self.rhs[r] -= &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Minimizes `cost` over columns `0..usable` with Bland's rule.
    fn run(&mut self, cost: &[Rational], usable: usize) -> PivotOutcome {
        loop {
            let entering = (0..usable).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced: Rational = cost[j].clone()
                    - self.basis.iter().zip(&self.rows).map(|(&b, row)| &cost[b] * &row[j]).sum::<Rational>();
                reduced.is_negative()
            });
            let Some(col) = entering else {
                return PivotOutcome::Optimal;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &leaving {
                    None => true,
                    Some((best, best_ratio)) => {
                        ratio < *best_ratio || (ratio == *best_ratio && self.basis[r] < self.basis[*best])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return PivotOutcome::Unbounded,
            }
        }
    }

    fn objective(&self, cost: &[Rational]) -> Rational {
        self.basis.iter().zip(&self.rhs).map(|(&b, v)| &cost[b] * v).sum()
    }
}

/// Minimizes `objective · x` subject to `eq_matrix · x = eq_rhs`, with
/// `x_j ≥ 0` wherever `nonneg[j]` is set (other variables are free).
///
/// Two-phase simplex with Bland's rule; exact throughout.
pub fn solve_lp(
    objective: &[Rational],
    eq_matrix: &RatMatrix,
    eq_rhs: &[Rational],
    nonneg: &[bool],
) -> Result<LpResult> {
    let vars = objective.len();
    if eq_matrix.cols() != vars || nonneg.len() != vars {
        return Err(Error::DimensionMismatch(format!(
            "{} objective coefficients, {} matrix columns, {} sign flags",
            vars,
            eq_matrix.cols(),
            nonneg.len()
        )));
    }
    if eq_matrix.rows() != eq_rhs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} constraint rows but {} right-hand sides",
            eq_matrix.rows(),
            eq_rhs.len()
        )));
    }

    // Free variables become differences of two nonnegative columns.
    let free: Vec<usize> = (0..vars).filter(|&j| !nonneg[j]).collect();
    let structural = vars + free.len();
    let m = eq_matrix.rows();
    let artificial = structural;
    let width = structural + m;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(width);
        row.extend_from_slice(eq_matrix.row(i));
        row.extend(free.iter().map(|&j| -&eq_matrix[(i, j)]));
        row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
        let mut b = eq_rhs[i].clone();
        if b.is_negative() {
            for x in row.iter_mut().take(structural) {
                *x = -x.clone();
            }
            b = -b;
        }
        rows.push(row);
        rhs.push(b);
    }
    let mut tableau = Tableau { rows, rhs, basis: (artificial..width).collect() };

    let mut phase_one_cost = vec![Rational::zero(); width];
    for c in phase_one_cost.iter_mut().skip(artificial) {
        *c = Rational::one();
    }
    tableau.run(&phase_one_cost, width);
    if !tableau.objective(&phase_one_cost).is_zero() {
        return Ok(LpResult::without_solution(LpStatus::Infeasible));
    }

    // Drive zero-valued artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < tableau.rows.len() {
        if tableau.basis[r] >= artificial {
            match (0..structural).find(|&j| !tableau.rows[r][j].is_zero()) {
                Some(col) => tableau.pivot(r, col),
                None => {
                    tableau.rows.remove(r);
                    tableau.rhs.remove(r);
                    tableau.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut cost: Vec<Rational> = objective.to_vec();
    cost.extend(free.iter().map(|&j| -&objective[j]));
    cost.extend((0..m).map(|_| Rational::zero()));
    if let PivotOutcome::Unbounded = tableau.run(&cost, structural) {
        return Ok(LpResult::without_solution(LpStatus::Unbounded));
    }

    let mut values = vec![Rational::zero(); structural];
    for (&b, v) in tableau.basis.iter().zip(&tableau.rhs) {
        values[b] = v.clone();
    }
    let mut solution: Vec<Rational> = values[..vars].to_vec();
    for (k, &j) in free.iter().enumerate() {
        solution[j] -= &values[vars + k];
    }
    let value = dot(objective, &solution);
    Ok(LpResult { status: LpStatus::Optimal, value: Some(value), solution: Some(solution) })
}

/// Whether `target` is a convex combination of `points`.
pub fn in_convex_hull(points: &[Vec<Rational>], target: &[Rational]) -> Result<bool> {
    let dim = target.len();
    let mut rows: Vec<Vec<Rational>> =
        (0..dim).map(|c| points.iter().map(|p| p[c].clone()).collect()).collect();
    rows.push(vec![Rational::one(); points.len()]);
    let mut rhs = target.to_vec();
    rhs.push(Rational::one());
    let lp = solve_lp(
        &vec![Rational::zero(); points.len()],
        &RatMatrix::from_rows(rows)?,
        &rhs,
        &vec![true; points.len()],
    )?;
    Ok(lp.is_optimal())
}
