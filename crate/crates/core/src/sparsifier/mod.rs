//! Random sparsification of a Newman polynomial.
//!
//! Given p of degree N, each coefficient is kept independently with
//! probability `α = N^{−a}` (default `a = 1/10`), giving q with
//! `q_j = ε_j·p_j`. The module samples q, computes exact expectations,
//! splits the coefficients of q² into independent-indicator sums, and
//! flags the deviation events that would spoil `R(q)·deg q`.

mod events;
mod expectation;
mod split;

use num_rational::Ratio;
use rand::distributions::{Bernoulli, Distribution};
use serde::Serialize;

pub use events::BadEventFlags;
pub use expectation::{
    enumerate_expectations, expectation_oracle, expected_l1, expected_square_coeff,
    expected_square_coeffs, EnumeratedExpectations, Probability, SquareExpectation,
    ORACLE_MAX_DEGREE,
};
pub use split::{
    case_a_exclusion_threshold, classify_case, split_coefficient, Case, CaseLabel,
    CoefficientSplit, ExclusionThreshold, Parity, DEFAULT_EXCLUSION_CAP,
};

use crate::concentration::{amplification, amplification_exact, check_alpha_exponent, choose_epsilon};
use crate::error::{Error, Result};
use crate::poly::{square, NewmanPolynomial, RatioReport};
use crate::rational::{exact_f64, to_big, to_f64, Rational};
use crate::rng;
use events::EventDetector;

/// Keep probability `α = N^{−a}`, exact when N is a perfect power.
#[derive(Clone, Debug, PartialEq)]
pub struct Alpha {
    n: u64,
    exponent: Rational,
    value: f64,
    exact: Option<Rational>,
}

impl Alpha {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn exponent(&self) -> &Rational {
        &self.exponent
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// The exact rational value, when `N^{−a}` is rational.
    pub fn exact(&self) -> Option<&Rational> {
        self.exact.as_ref()
    }
}

fn integer_root(n: u64, b: u32) -> Option<u64> {
    let guess = (n as f64).powf(1.0 / f64::from(b)).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&m| u128::from(m).checked_pow(b) == Some(u128::from(n)))
}

/// `α(N) = N^{−exponent}`.
pub fn alpha_of(n: u64, exponent: &Rational) -> Result<Alpha> {
    if n == 0 {
        return Err(Error::param("N must be at least 1"));
    }
    check_alpha_exponent(exponent)?;
    let b = u32::try_from(*exponent.denom()).map_err(|_| Error::param("alpha exponent denominator too large"))?;
    let a = u32::try_from(*exponent.numer()).map_err(|_| Error::param("alpha exponent numerator too large"))?;
    let exact = integer_root(n, b)
        .and_then(|m| m.checked_pow(a))
        .map(|den| Ratio::new(1, den));
    let value = match &exact {
        Some(r) => to_f64(r),
        None => (n as f64).powf(-to_f64(exponent)),
    };
    Ok(Alpha {
        n,
        exponent: *exponent,
        value,
        exact,
    })
}

pub const DEFAULT_ALPHA_EXPONENT: (u64, u64) = (1, 10);

/// Parameters of a sparsification run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparsifyConfig {
    #[serde(serialize_with = "ser_ratio")]
    pub alpha_exponent: Rational,
    pub epsilon: f64,
    #[serde(serialize_with = "ser_ratio")]
    pub c0: Rational,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub rho: Option<Rational>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub rho_prime: Option<Rational>,
    pub seed: u64,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::rational::format_ratio(r))
}

fn ser_opt_ratio<S: serde::Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => ser_ratio(r, s),
        None => s.serialize_none(),
    }
}

impl SparsifyConfig {
    /// Explicit ε, default exponent 1/10.
    pub fn new(epsilon: f64, c0: Rational, seed: u64) -> Result<Self> {
        let config = Self {
            alpha_exponent: Ratio::new(DEFAULT_ALPHA_EXPONENT.0, DEFAULT_ALPHA_EXPONENT.1),
            epsilon,
            c0,
            rho: None,
            rho_prime: None,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// ε chosen as the largest value with `(1+ε)/(1−ε)²·ρ ≤ ρ′`.
    pub fn from_rho(rho: Rational, rho_prime: Rational, c0: Rational, seed: u64) -> Result<Self> {
        let choice = choose_epsilon(&rho, &rho_prime)?;
        let config = Self {
            alpha_exponent: Ratio::new(DEFAULT_ALPHA_EXPONENT.0, DEFAULT_ALPHA_EXPONENT.1),
            epsilon: choice.epsilon,
            c0,
            rho: Some(rho),
            rho_prime: Some(rho_prime),
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_alpha_exponent(mut self, exponent: Rational) -> Result<Self> {
        self.alpha_exponent = exponent;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha_exponent(&self.alpha_exponent)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if *self.c0.numer() == 0 || self.c0 > Rational::from_integer(1) {
            return Err(Error::param("c0 must lie in (0, 1]"));
        }
        match (&self.rho, &self.rho_prime) {
            (Some(rho), Some(rho_prime)) => {
                if !crate::concentration::amplification_fits(self.epsilon, rho, rho_prime) {
                    return Err(Error::param(format!(
                        "(1+ε)/(1−ε)²·ρ exceeds ρ′ for ε = {}",
                        self.epsilon
                    )));
                }
            }
            (None, None) => {}
            _ => return Err(Error::param("rho and rho' must be given together")),
        }
        Ok(())
    }
}

/// The keep indicators ε₀ … ε_N.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KeepMask(Vec<u8>);

impl KeepMask {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::param("mask bits must be 0 or 1"));
        }
        Ok(Self(bits))
    }

    pub fn all_ones(len: usize) -> Self {
        Self(vec![1; len])
    }

    pub fn all_zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn bit(&self, j: usize) -> u8 {
        self.0.get(j).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

/// One realization of the keep-mask and everything measured on it.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsifyTrial {
    pub trial_index: u64,
    pub trial_seed: u64,
    pub mask: KeepMask,
    /// ‖q‖₁ (zero when q vanished).
    pub q_l1: u64,
    /// `None` iff every ε_j·p_j is zero.
    pub q_metrics: Option<RatioReport>,
    pub flags: BadEventFlags,
}

impl SparsifyTrial {
    pub fn q_degree(&self) -> Option<u64> {
        self.q_metrics.as_ref().map(|m| m.degree)
    }

    pub fn is_clean(&self) -> bool {
        self.q_metrics.is_some() && self.flags.is_clean()
    }
}

/// Sampler bound to one parent polynomial and configuration; the parent's
/// square and the event thresholds are computed once.
pub struct Sparsifier<'a> {
    p: &'a NewmanPolynomial,
    config: &'a SparsifyConfig,
    alpha: Alpha,
    parent: RatioReport,
    keep: Bernoulli,
    detector: EventDetector,
}

impl<'a> Sparsifier<'a> {
    pub fn new(p: &'a NewmanPolynomial, config: &'a SparsifyConfig) -> Result<Self> {
        config.validate()?;
        let degree = p.degree() as u64;
        let alpha = alpha_of(degree.max(1), &config.alpha_exponent)?;
        let parent = crate::poly::metrics(p);
        let keep = Bernoulli::new(alpha.value()).map_err(|e| Error::param(e.to_string()))?;
        let detector = EventDetector::new(
            &alpha,
            &exact_f64(config.epsilon),
            config.c0,
            parent.l1,
            parent.height,
            degree,
        );
        Ok(Self {
            p,
            config,
            alpha,
            parent,
            keep,
            detector,
        })
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn parent_report(&self) -> &RatioReport {
        &self.parent
    }

    pub fn polynomial(&self) -> &NewmanPolynomial {
        self.p
    }

    pub fn config(&self) -> &SparsifyConfig {
        self.config
    }

    /// Draws ε_j ~ Bernoulli(α) for j = 0..N from the trial's own stream.
    pub fn draw_mask(&self, trial_index: u64) -> (u64, KeepMask) {
        let trial_seed = rng::derive_seed(self.config.seed, trial_index);
        let mut stream = rng::from_seed(trial_seed);
        let bits = (0..=self.p.degree())
            .map(|_| u8::from(self.keep.sample(&mut stream)))
            .collect();
        (trial_seed, KeepMask(bits))
    }

    pub fn sample(&self, trial_index: u64) -> SparsifyTrial {
        let (trial_seed, mask) = self.draw_mask(trial_index);
        self.evaluate(trial_index, trial_seed, mask)
            .expect("mask drawn with matching length")
    }

    /// Builds q from an explicit mask and measures it.
    pub fn evaluate(&self, trial_index: u64, trial_seed: u64, mask: KeepMask) -> Result<SparsifyTrial> {
        if mask.len() != self.p.degree() + 1 {
            return Err(Error::LengthMismatch {
                mask: mask.len(),
                poly: self.p.degree() + 1,
            });
        }
        let (q_l1, q_metrics, flags) = match self.p.masked(mask.bits()) {
            Some(q) => {
                let sq = square(&q);
                let report = RatioReport::from_square(&q, &sq);
                let flags = self.detector.detect(report.l1, Some(report.degree), Some(&sq));
                (report.l1, Some(report), flags)
            }
            None => (0, None, self.detector.detect(0, None, None)),
        };
        Ok(SparsifyTrial {
            trial_index,
            trial_seed,
            mask,
            q_l1,
            q_metrics,
            flags,
        })
    }

    /// Recomputes the flags of `trial` from its mask.
    pub fn detect_bad_events(&self, trial: &SparsifyTrial) -> Result<BadEventFlags> {
        Ok(self
            .evaluate(trial.trial_index, trial.trial_seed, trial.mask.clone())?
            .flags)
    }

    /// On a clean trial, checks `R(q)·deg q ≤ (1+ε)/(1−ε)²·R(p)·deg p`
    /// exactly and reports the sparsity and degree diagnostics.
    pub fn conclusion(&self, trial: &SparsifyTrial) -> Result<TheoremCheck> {
        let Some(q) = trial.q_metrics.as_ref() else {
            return Err(Error::Precondition("q vanished; R(q) is undefined".into()));
        };
        if !trial.flags.is_clean() {
            return Err(Error::Precondition("trial has a bad event".into()));
        }
        let amp = amplification_exact(self.config.epsilon);
        let q_product = to_big(&q.product);
        let p_product = to_big(&self.parent.product);
        let holds = q_product <= &amp * &p_product;
        let n = self.p.degree() as f64;
        let sparsity_reference =
            (1.0 - self.config.epsilon) * n.powf(1.0 - to_f64(&self.config.alpha_exponent));
        Ok(TheoremCheck {
            q_product: q.product,
            p_product: self.parent.product,
            amplification: amplification(self.config.epsilon),
            bound: amplification(self.config.epsilon) * to_f64(&self.parent.product),
            holds,
            q_l1: q.l1,
            sparsity_reference,
            q_degree: q.degree,
            degree_floor: to_f64(&self.config.c0) / 2.0 * n,
        })
    }
}

/// Result of [`Sparsifier::conclusion`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremCheck {
    #[serde(serialize_with = "ser_ratio")]
    pub q_product: Rational,
    #[serde(serialize_with = "ser_ratio")]
    pub p_product: Rational,
    pub amplification: f64,
    /// `amplification · R(p)·deg p`, for display only.
    pub bound: f64,
    /// The exact inequality `R(q)·deg q ≤ (1+ε)/(1−ε)²·R(p)·deg p`.
    pub holds: bool,
    pub q_l1: u64,
    /// `(1−ε)·N^{1−a}`.
    pub sparsity_reference: f64,
    pub q_degree: u64,
    /// `(c₀/2)·N`.
    pub degree_floor: f64,
}

/// One trial of the sparsifier for `(config.seed, trial_index)`.
pub fn sample(p: &NewmanPolynomial, config: &SparsifyConfig, trial_index: u64) -> Result<SparsifyTrial> {
    Ok(Sparsifier::new(p, config)?.sample(trial_index))
}

pub fn detect_bad_events(
    p: &NewmanPolynomial,
    trial: &SparsifyTrial,
    config: &SparsifyConfig,
) -> Result<BadEventFlags> {
    Sparsifier::new(p, config)?.detect_bad_events(trial)
}

pub fn theorem_conclusion_check(
    p: &NewmanPolynomial,
    trial: &SparsifyTrial,
    config: &SparsifyConfig,
) -> Result<TheoremCheck> {
    Sparsifier::new(p, config)?.conclusion(trial)
}
