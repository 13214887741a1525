//! Exact-arithmetic toolkit for the fundamental (Kantorovich–Rubinstein)
//! polytopes of finite metric spaces.
//!
//! A metric `d` on `n` points yields the vectors `e_{x,y} = (1_x − 1_y)/d(x,y)`
//! in the sum-zero hyperplane `V₀ ⊂ ℝⁿ`. Their convex hull is a centrally
//! symmetric polytope whose gauge is the Kantorovich–Rubinstein (optimal
//! transport) norm, and whose combinatorial type classifies the metric.
//!
//! ```
//! use krpoly::{metric_space::DistanceMatrix, polytope::FundamentalPolytope};
//!
//! let cuboctahedron = FundamentalPolytope::new(&DistanceMatrix::unit(4)?)?;
//! assert_eq!(cuboctahedron.f_vector()?.to_string(), "(12,24,14)");
//! # Ok::<(), krpoly::Error>(())
//! ```

#![allow(clippy::needless_range_loop)]

pub mod census;
pub mod combinatorics;
mod error;
pub mod exact_math;
pub mod kr_norm;
pub mod metric_space;
pub mod polytope;

pub use error::{Error, Result};
