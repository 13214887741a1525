//! The Kantorovich–Rubinstein norm on `V₀`, computed two ways: as an optimal
//! transportation cost, and as the gauge of the fundamental polytope.
//!
//! Plans follow the convention that row sums of `ψ` are the source masses
//! `u = max(v, 0)` and column sums the sink masses `w = max(−v, 0)`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_math::{format_rational, parse_rational, solve_lp, LpStatus, RatMatrix, Rational};
use crate::metric_space::DistanceMatrix;
use crate::polytope::{FundamentalPolytope, HRepresentation};

/// A signed mass distribution: coordinates summing exactly to zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MassVector(Vec<Rational>);

impl MassVector {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        let sum: Rational = values.iter().sum();
        if !sum.is_zero() {
            return Err(Error::NonzeroSum(format_rational(&sum)));
        }
        Ok(MassVector(values))
    }

    pub fn zero(n: usize) -> Self {
        MassVector(vec![Rational::zero(); n])
    }

    /// `1_x − 1_y`.
    pub fn dipole(n: usize, x: usize, y: usize) -> Self {
        let mut v = vec![Rational::zero(); n];
        v[x] += Rational::from_integer(1.into());
        v[y] -= Rational::from_integer(1.into());
        MassVector(v)
    }

    /// Whitespace- or comma-separated rationals.
    pub fn parse(text: &str) -> Result<Self> {
        let values = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        MassVector(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl std::ops::Add for &MassVector {
    type Output = MassVector;

    fn add(self, other: &MassVector) -> MassVector {
        MassVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// `(u, w)` with `u = max(v, 0)`, `w = max(−v, 0)`, so `v = u − w`.
pub fn split_signs(v: &MassVector) -> (Vec<Rational>, Vec<Rational>) {
    let zero = Rational::zero();
    let u = v.0.iter().map(|x| x.clone().max(zero.clone())).collect();
    let w = v.0.iter().map(|x| (-x).max(zero.clone())).collect();
    (u, w)
}

/// Nonnegative `n×n` matrix with prescribed row and column sums.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportPlan {
    #[serde(with = "crate::exact_math::serde_rational::matrix")]
    pub psi: Vec<Vec<Rational>>,
}

impl TransportPlan {
    pub fn cost(&self, d: &DistanceMatrix) -> Rational {
        let n = self.psi.len();
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).map(|(x, y)| d.get(x, y) * &self.psi[x][y]).sum()
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        self.psi.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<Rational> {
        let n = self.psi.len();
        (0..n).map(|y| self.psi.iter().map(|row| &row[y]).sum()).collect()
    }

    /// Marginals and nonnegativity hold exactly for `v`.
    pub fn is_feasible_for(&self, v: &MassVector) -> bool {
        let (u, w) = split_signs(v);
        self.row_sums() == u && self.col_sums() == w && self.psi.iter().flatten().all(|x| !x.is_negative())
    }
}

fn check_inputs(d: &DistanceMatrix, v: &MassVector) -> Result<()> {
    d.ensure_metric()?;
    if v.len() != d.n() {
        return Err(Error::DimensionMismatch(format!(
            "vector has {} coordinates for {} points",
            v.len(),
            d.n()
        )));
    }
    Ok(())
}

/// Solves the transportation LP; only routes from sources to sinks can carry
/// mass, so the other variables are left out.
pub fn optimal_plan(d: &DistanceMatrix, v: &MassVector) -> Result<TransportPlan> {
    check_inputs(d, v)?;
    let n = d.n();
    let (u, w) = split_signs(v);
    let sources: Vec<usize> = (0..n).filter(|&x| u[x].is_positive()).collect();
    let sinks: Vec<usize> = (0..n).filter(|&y| w[y].is_positive()).collect();
    let mut psi = vec![vec![Rational::zero(); n]; n];
    if sources.is_empty() {
        return Ok(TransportPlan { psi });
    }

    let routes: Vec<(usize, usize)> =
        sources.iter().flat_map(|&x| sinks.iter().map(move |&y| (x, y))).collect();
    let mut rows = Vec::with_capacity(sources.len() + sinks.len());
    let mut rhs = Vec::with_capacity(sources.len() + sinks.len());
    for &x in &sources {
        rows.push(routes.iter().map(|&(a, _)| Rational::from_integer((a == x).into())).collect());
        rhs.push(u[x].clone());
    }
    for &y in &sinks {
        rows.push(routes.iter().map(|&(_, b)| Rational::from_integer((b == y).into())).collect());
        rhs.push(w[y].clone());
    }
    let cost: Vec<Rational> = routes.iter().map(|&(x, y)| d.get(x, y).clone()).collect();
    let lp = solve_lp(&cost, &RatMatrix::from_rows(rows)?, &rhs, &vec![true; routes.len()])?;
    let solution = match lp.status {
        LpStatus::Optimal => lp.solution.expect("optimal LP carries a solution"),
        status => unreachable!("balanced transportation LP cannot be {status:?}"),
    };
    for (&(x, y), mass) in routes.iter().zip(solution) {
        psi[x][y] = mass;
    }
    Ok(TransportPlan { psi })
}

/// Minimal transportation cost from `v⁺` to `v⁻`.
pub fn transport_norm(d: &DistanceMatrix, v: &MassVector) -> Result<Rational> {
    Ok(optimal_plan(d, v)?.cost(d))
}

/// `max_f normal_f · v`, the Minkowski gauge of the polytope.
pub fn gauge_norm(h: &HRepresentation, v: &MassVector) -> Result<Rational> {
    match h.facets.first() {
        Some(f) if f.normal.len() != v.len() => Err(Error::DimensionMismatch(format!(
            "vector has {} coordinates, facets have {}",
            v.len(),
            f.normal.len()
        ))),
        _ => Ok(h.max_value(v.values()).unwrap_or_else(Rational::zero)),
    }
}

/// Checks that the norm extends the metric: `‖1_x − 1_y‖ = d(x,y)` by the LP,
/// and every generator `e_{x,y}` has gauge exactly 1.
pub fn extension_check(d: &DistanceMatrix) -> Result<bool> {
    d.ensure_metric()?;
    let n = d.n();
    let polytope = FundamentalPolytope::new(d)?;
    let one = Rational::from_integer(1.into());
    for x in 0..n {
        for y in (0..n).filter(|&y| y != x) {
            let dipole = MassVector::dipole(n, x, y);
            if transport_norm(d, &dipole)? != *d.get(x, y) {
                return Ok(false);
            }
            if gauge_norm(&polytope.hrep, &dipole.scaled(&d.get(x, y).recip()))? != one {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
