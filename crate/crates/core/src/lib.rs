//! Exact-arithmetic laboratory for Newman polynomials (polynomials whose
//! coefficients are all 0 or 1).
//!
//! The crate computes the coefficient height of `p²`, the ratio
//! `R(p) = ‖p²‖∞ / ‖p‖₁²`, runs the keep-with-probability-`α` sparsifier
//! that turns a dense family into a sparse one, detects the deviation
//! events that would break the construction, evaluates the matching
//! Chernoff bounds, and searches for dense inputs with small `R(p)·deg p`.

pub mod concentration;
pub mod error;
pub mod experiment;
pub mod ntt;
pub mod poly;
pub mod rational;
pub mod rng;
pub mod search;
pub mod sparsifier;

pub use concentration::{
    bad_event_e_bound, c_epsilon, choose_epsilon, tail_bound, ConcentrationQuery, EpsilonChoice,
    TailBound,
};
pub use error::{Error, Result};
pub use poly::{
    metrics, parse_polynomial, square, square_oracle, NewmanPolynomial, PolyFormat, RatioReport,
    SquareCoefficients,
};
pub use sparsifier::{
    alpha_of, BadEventFlags, CaseLabel, CoefficientSplit, KeepMask, SparsifyConfig,
    SparsifyTrial, Sparsifier,
};
