//! Chernoff machinery for sums of independent indicators.
//!
//! For `X = X₁ + … + X_m` with independent `X_j ∈ {0, 1}` and every `ε > 0`:
//!
//! ```text
//! P(|X − EX| > ε·EX) ≤ 2·exp(−c_ε·EX),   c_ε = min{(1+ε)·ln(1+ε) − ε, ε²/2}
//! ```

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{exact_f64, to_big, to_f64, Rational};

/// Below this ε the first branch of `c_ε` is evaluated by its series.
const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConcentrationQuery {
    pub epsilon: f64,
    pub mean: f64,
}

impl ConcentrationQuery {
    pub fn new(epsilon: f64, mean: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(mean >= 0.0 && mean.is_finite()) {
            return Err(Error::param(format!("mean must be nonnegative, got {mean}")));
        }
        Ok(Self { epsilon, mean })
    }
}

/// A probability bound before and after clamping to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailBound {
    pub raw: f64,
    pub clamped: f64,
}

impl TailBound {
    fn from_raw(raw: f64) -> Self {
        Self {
            raw,
            clamped: raw.min(1.0),
        }
    }

    /// True when the bound says nothing (≥ 1).
    pub fn is_vacuous(&self) -> bool {
        self.raw >= 1.0
    }
}

/// The Chernoff exponent `c_ε`.
pub fn c_epsilon(epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    // −log(e^ε (1+ε)^{−(1+ε)}) = (1+ε)ln(1+ε) − ε; the naive form cancels
    // catastrophically for small ε.
    let entropy_branch = if epsilon < SERIES_CUTOFF {
        epsilon * epsilon / 2.0 - epsilon.powi(3) / 6.0
    } else {
        (1.0 + epsilon) * epsilon.ln_1p() - epsilon
    };
    Ok(entropy_branch.min(epsilon * epsilon / 2.0))
}

/// `2·exp(−c_ε·mean)`.
pub fn tail_bound(query: &ConcentrationQuery) -> TailBound {
    let c = c_epsilon(query.epsilon).expect("query epsilon validated on construction");
    TailBound::from_raw(2.0 * (-c * query.mean).exp())
}

/// Bound on the probability that ‖q‖₁ deviates from its mean by more than
/// ε, using `E‖q‖₁ ≥ c₀·N^{1−a}` where `α = N^{−a}`.
pub fn bad_event_e_bound(
    n: u64,
    c0: &Rational,
    epsilon: f64,
    alpha_exponent: &Rational,
) -> Result<TailBound> {
    if n == 0 {
        return Err(Error::param("N must be at least 1"));
    }
    if *c0.numer() == 0 || *c0 > Rational::from_integer(1) {
        return Err(Error::param("c0 must lie in (0, 1]"));
    }
    check_alpha_exponent(alpha_exponent)?;
    let c = c_epsilon(epsilon)?;
    let mean_floor = to_f64(c0) * (n as f64).powf(1.0 - to_f64(alpha_exponent));
    Ok(TailBound::from_raw(2.0 * (-c * mean_floor).exp()))
}

pub(crate) fn check_alpha_exponent(exponent: &Rational) -> Result<()> {
    if *exponent.numer() == 0 || exponent >= &Rational::from_integer(1) {
        return Err(Error::param(format!(
            "alpha exponent must lie in (0, 1), got {exponent}"
        )));
    }
    Ok(())
}

/// `(1+ε)/(1−ε)²`, the factor by which a sparsified polynomial may lose
/// against its parent in `R·deg`.
pub fn amplification(epsilon: f64) -> f64 {
    (1.0 + epsilon) / ((1.0 - epsilon) * (1.0 - epsilon))
}

/// Exact `(1+ε)/(1−ε)²` for the float ε as given.
pub fn amplification_exact(epsilon: f64) -> BigRational {
    let e = exact_f64(epsilon);
    let one = BigRational::one();
    let down = &one - &e;
    (&one + &e) / (&down * &down)
}

/// The largest ε whose amplification keeps `ρ` at or below `ρ′`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonChoice {
    #[serde(serialize_with = "serialize_ratio")]
    pub rho: Rational,
    #[serde(serialize_with = "serialize_ratio")]
    pub rho_prime: Rational,
    pub epsilon: f64,
    pub amplification: f64,
}

fn serialize_ratio<S: serde::Serializer>(
    r: &Rational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::rational::format_ratio(r))
}

/// Whether `(1+ε)/(1−ε)²·ρ ≤ ρ′` holds exactly.
pub fn amplification_fits(epsilon: f64, rho: &Rational, rho_prime: &Rational) -> bool {
    if !(0.0..1.0).contains(&epsilon) {
        return false;
    }
    amplification_exact(epsilon) * to_big(rho) <= to_big(rho_prime)
}

/// Solves `ρ′ε² − (2ρ′+ρ)ε + (ρ′−ρ) = 0` for its root in (0, 1).
pub fn choose_epsilon(rho: &Rational, rho_prime: &Rational) -> Result<EpsilonChoice> {
    if *rho.numer() == 0 {
        return Err(Error::param("rho must be positive"));
    }
    if rho_prime <= rho {
        return Err(Error::param(format!(
            "rho' = {rho_prime} must exceed rho = {rho}; no epsilon > 0 fits"
        )));
    }
    if *rho_prime > Rational::from_integer(1) {
        return Err(Error::param("rho' must be at most 1"));
    }
    let r = to_f64(rho);
    let rp = to_f64(rho_prime);
    // Smaller root, written to avoid cancellation; discriminant is ρ² + 8ρρ′.
    let mut epsilon = 2.0 * (rp - r) / (2.0 * rp + r + (r * r + 8.0 * r * rp).sqrt());
    while epsilon > 0.0 && !amplification_fits(epsilon, rho, rho_prime) {
        epsilon = f64::from_bits(epsilon.to_bits() - 1);
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::param("no representable epsilon in (0, 1)"));
    }
    Ok(EpsilonChoice {
        rho: *rho,
        rho_prime: *rho_prime,
        epsilon,
        amplification: amplification(epsilon),
    })
}
