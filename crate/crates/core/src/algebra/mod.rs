//! Exact Laurent-polynomial and rational-function arithmetic.
//!
//! Everything symbolic in the crate is built on these types. Coefficients are
//! exact (`Q` or Gaussian rationals); parameters are ordinary variables of
//! weight zero that never carry negative exponents.

mod coeff;
mod error;
mod linear;
mod parse;
mod poly;
mod rational_fn;
pub mod univariate;
mod var;

pub use coeff::{fmt_q, gauss_i, parse_q, q, q_from_f64, q_to_f64, qf, Coeff, GaussQ, Q};
pub use error::{AlgebraError, Result};
pub use linear::{exact_linear_solve, rank, LinearSolution};
pub use parse::parse_poly;
pub use poly::{GPoly, LaurentPoly, Monomial, MonomialMap, Poly, VarWeights};
pub use rational_fn::{subs_poly_rat, RatFn, RationalFn};
pub use var::{sym, Var};

/// Builds a weight table from `(var, weight)` pairs.
pub fn weights_of(pairs: &[(Var, i64)]) -> VarWeights {
    pairs.iter().copied().collect()
}
