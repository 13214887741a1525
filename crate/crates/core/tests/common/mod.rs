//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the library's solvers, so agreement is a genuine cross-check.
#![allow(dead_code)]

use std::collections::BTreeSet;

use krpoly::exact_math::{int, rat, Rational};
use krpoly::metric_space::DistanceMatrix;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rational(rng: &mut ChaCha8Rng, max_abs: i64, max_denom: i64) -> Rational {
    rat(rng.gen_range(-max_abs..=max_abs), rng.gen_range(1..=max_denom))
}

/// Random sum-zero vector.
pub fn random_mass(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let mut v: Vec<Rational> = (0..n - 1).map(|_| random_rational(rng, 6, 5)).collect();
    let last = -v.iter().sum::<Rational>();
    v.push(last);
    v
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    perm
}

/// Symmetric matrix with positive off-diagonal entries; roughly half the
/// draws violate the triangle inequality.
pub fn random_symmetric_positive(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
    DistanceMatrix::from_fn(n, |_, _| rat(rng.gen_range(1..=30), rng.gen_range(1..=6))).unwrap()
}

/// Solves the square system `m x = b`; `None` when singular.
pub fn solve_square(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let size = m.len();
    let mut a: Vec<Vec<Rational>> =
        m.iter().zip(b).map(|(row, rhs)| row.iter().cloned().chain([rhs.clone()]).collect()).collect();
    for col in 0..size {
        let pivot = (col..size).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        for r in 0..size {
            if r != col && !a[r][col].is_zero() {
                let factor = &a[r][col] / &a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &factor * p;
                }
            }
        }
    }
    Some((0..size).map(|i| &a[i][size] / &a[i][i]).collect())
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum of `c·x` over basic feasible solutions of `A x = b, x ≥ 0`
/// (A with full row rank). `None` when no basis is feasible.
pub fn brute_force_lp(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Option<Rational> {
    let m = a.len();
    let vars = c.len();
    let mut best: Option<Rational> = None;
    for basis in subsets(vars, m) {
        let square: Vec<Vec<Rational>> =
            a.iter().map(|row| basis.iter().map(|&j| row[j].clone()).collect()).collect();
        let Some(x) = solve_square(&square, b) else { continue };
        if x.iter().any(Signed::is_negative) {
            continue;
        }
        let value: Rational = basis.iter().zip(&x).map(|(&j, xj)| &c[j] * xj).sum();
        if best.as_ref().is_none_or(|b| value < *b) {
            best = Some(value);
        }
    }
    best
}

/// Cofactor expansion.
pub fn laplace_det(m: &[Vec<Rational>]) -> Rational {
    let size = m.len();
    if size == 0 {
        return Rational::one();
    }
    (0..size)
        .filter(|&j| !m[0][j].is_zero())
        .map(|j| {
            let minor: Vec<Vec<Rational>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let term = &m[0][j] * laplace_det(&minor);
            if j % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

/// PSD iff every principal minor is nonnegative.
pub fn psd_by_minors(m: &[Vec<Rational>]) -> bool {
    let size = m.len();
    (1..=size).all(|k| {
        subsets(size, k).into_iter().all(|s| {
            let sub: Vec<Vec<Rational>> =
                s.iter().map(|&i| s.iter().map(|&j| m[i][j].clone()).collect()).collect();
            !laplace_det(&sub).is_negative()
        })
    })
}

/// Cayley–Menger determinant of the points `subset`.
pub fn cayley_menger(d: &DistanceMatrix, subset: &[usize]) -> Rational {
    let k = subset.len();
    let mut m = vec![vec![Rational::zero(); k + 1]; k + 1];
    for i in 1..=k {
        m[0][i] = Rational::one();
        m[i][0] = Rational::one();
        for j in 1..=k {
            let x = d.get(subset[i - 1], subset[j - 1]);
            m[i][j] = x * x;
        }
    }
    laplace_det(&m)
}

/// Euclidean embeddability: every subset containing point 0 has
/// `(−1)^|S| CM(S) ≥ 0` (squared simplex volumes are nonnegative).
pub fn euclidean_by_cayley_menger(d: &DistanceMatrix) -> bool {
    let n = d.n();
    (1..n).all(|k| {
        subsets(n - 1, k).into_iter().all(|s| {
            let subset: Vec<usize> = std::iter::once(0).chain(s.iter().map(|&i| i + 1)).collect();
            let cm = cayley_menger(d, &subset);
            let signed = if subset.len().is_multiple_of(2) { cm } else { -cm };
            !signed.is_negative()
        })
    })
}

/// Facets `a·x ≤ 1` of the hull of sum-zero points whose hull contains the
/// origin in its interior, by exhaustive search over hyperplanes through
/// `n − 1` points. Normals are returned in sum-zero ambient coordinates.
pub fn brute_force_facets(points: &[Vec<Rational>]) -> BTreeSet<Vec<Rational>> {
    let n = points[0].len();
    let d = n - 1;
    let chart: Vec<Vec<Rational>> = points.iter().map(|p| p[..d].to_vec()).collect();
    let mut facets = BTreeSet::new();
    for subset in subsets(chart.len(), d) {
        let rows: Vec<Vec<Rational>> = subset.iter().map(|&i| chart[i].clone()).collect();
        let Some(c) = solve_square(&rows, &vec![Rational::one(); d]) else { continue };
        let supports =
            chart.iter().all(|p| p.iter().zip(&c).map(|(x, y)| x * y).sum::<Rational>() <= Rational::one());
        if supports {
            // Lift: a_i = c_i + t for i < n, a_n = t, with Σa = 0.
            let t = -c.iter().sum::<Rational>() / int(n as i64);
            let normal: Vec<Rational> =
                c.iter().map(|ci| ci + &t).chain(std::iter::once(t.clone())).collect();
            facets.insert(normal);
        }
    }
    facets
}

/// Interior membership by brute-force facets of the hull of `others`.
pub fn interior_by_brute_force(others: &[Vec<Rational>], target: &[Rational]) -> bool {
    brute_force_facets(others)
        .iter()
        .all(|a| a.iter().zip(target).map(|(x, y)| x * y).sum::<Rational>() < Rational::one())
}

/// Transportation optimum over basic feasible plans on source × sink routes,
/// with the last sink constraint dropped (it is implied by the others).
pub fn brute_force_transport(d: &DistanceMatrix, v: &[Rational]) -> Rational {
    let n = v.len();
    let sources: Vec<usize> = (0..n).filter(|&i| v[i].is_positive()).collect();
    let sinks: Vec<usize> = (0..n).filter(|&i| v[i].is_negative()).collect();
    if sources.is_empty() {
        return Rational::zero();
    }
    let routes: Vec<(usize, usize)> =
        sources.iter().flat_map(|&x| sinks.iter().map(move |&y| (x, y))).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &x in &sources {
        a.push(routes.iter().map(|&(s, _)| if s == x { int(1) } else { int(0) }).collect());
        b.push(v[x].clone());
    }
    for &y in &sinks[..sinks.len() - 1] {
        a.push(routes.iter().map(|&(_, t)| if t == y { int(1) } else { int(0) }).collect());
        b.push(-v[y].clone());
    }
    let c: Vec<Rational> = routes.iter().map(|&(x, y)| d.get(x, y).clone()).collect();
    brute_force_lp(&c, &a, &b).expect("balanced transport is feasible")
}
