//! Splitting `(q²)_k` into sums of independent indicators, and the
//! small-mean / large-mean case classification built on top of it.

use serde::Serialize;

use super::{Alpha, KeepMask};
use crate::concentration::check_alpha_exponent;
use crate::error::{Error, Result};
use crate::poly::NewmanPolynomial;
use crate::rational::{to_f64, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

/// `(q²)_k = first + second + diagonal`.
///
/// Odd k: `first = Σ_{j ≤ ⌊k/2⌋} ε_jε_{k−j}p_jp_{k−j}`, `second` the rest.
/// Even k: the two off-diagonal halves `j < k/2` and `j > k/2`, plus
/// `diagonal = ε_{k/2}p_{k/2}`. Within each part the summands involve
/// disjoint pairs of ε's, so every part is a sum of independent indicators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientSplit {
    pub k: usize,
    pub parity: Parity,
    pub first: u64,
    pub second: u64,
    pub diagonal: u64,
}

impl CoefficientSplit {
    pub fn total(&self) -> u64 {
        self.first + self.second + self.diagonal
    }
}

/// Counts `j` in `range` with `keep(j)·keep(k−j) = 1`, skipping indices
/// outside `0..=degree`.
fn half_count(
    degree: usize,
    k: usize,
    range: std::ops::RangeInclusive<usize>,
    keep: impl Fn(usize) -> bool,
) -> u64 {
    let lo = (*range.start()).max(k.saturating_sub(degree));
    let hi = (*range.end()).min(degree).min(k);
    if lo > hi {
        return 0;
    }
    (lo..=hi).filter(|&j| keep(j) && keep(k - j)).count() as u64
}

/// Index ranges of the two halves (empty ranges encoded as `1..=0`).
fn halves(k: usize) -> (std::ops::RangeInclusive<usize>, std::ops::RangeInclusive<usize>) {
    #[allow(clippy::reversed_empty_ranges)]
    let empty = 1..=0;
    if k % 2 == 1 {
        (0..=k / 2, k / 2 + 1..=k)
    } else if k == 0 {
        (empty.clone(), empty)
    } else {
        (0..=k / 2 - 1, k / 2 + 1..=k)
    }
}

pub fn split_coefficient(
    p: &NewmanPolynomial,
    mask: &KeepMask,
    k: usize,
) -> Result<CoefficientSplit> {
    let degree = p.degree();
    if mask.len() != degree + 1 {
        return Err(Error::LengthMismatch {
            mask: mask.len(),
            poly: degree + 1,
        });
    }
    if k > 2 * degree {
        return Err(Error::IndexOutOfRange { k, max: 2 * degree });
    }
    let keep = |j: usize| p.coeff(j) & mask.bit(j) == 1;
    let (lo, hi) = halves(k);
    let parity = if k % 2 == 1 { Parity::Odd } else { Parity::Even };
    let diagonal = match parity {
        Parity::Even => u64::from(keep(k / 2)),
        Parity::Odd => 0,
    };
    Ok(CoefficientSplit {
        k,
        parity,
        first: half_count(degree, k, lo, keep),
        second: half_count(degree, k, hi, keep),
        diagonal,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// Both half-sums have mean at most the threshold.
    A,
    /// Exactly one does.
    B,
    /// Neither does.
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CaseLabel {
    pub k: usize,
    pub label: Case,
    pub means: (f64, f64),
    pub threshold: f64,
}

/// Classifies coefficient k by the means `α²·#(unit products)` of its two
/// half-sums against `N^a` (where `α = N^{−a}`). The even-k diagonal term
/// belongs to neither half.
pub fn classify_case(p: &NewmanPolynomial, alpha: &Alpha, k: usize) -> Result<CaseLabel> {
    let degree = p.degree();
    if k > 2 * degree {
        return Err(Error::IndexOutOfRange { k, max: 2 * degree });
    }
    let keep = |j: usize| p.coeff(j) == 1;
    let (lo, hi) = halves(k);
    let a2 = alpha.value() * alpha.value();
    let means = (
        a2 * half_count(degree, k, lo, keep) as f64,
        a2 * half_count(degree, k, hi, keep) as f64,
    );
    let threshold = 1.0 / alpha.value();
    let small = [means.0, means.1].iter().filter(|&&m| m <= threshold).count();
    let label = match small {
        2 => Case::A,
        1 => Case::B,
        _ => Case::C,
    };
    Ok(CaseLabel {
        k,
        label,
        means,
        threshold,
    })
}

/// Least N from which a coefficient whose halves both have small mean can
/// no longer exceed `(1+ε)α²‖p²‖∞`, given `‖p²‖∞ ≥ (c₀²/3)N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExclusionThreshold {
    pub n: u64,
    /// No N up to the cap qualifies; `n` is the cap.
    pub capped: bool,
}

pub const DEFAULT_EXCLUSION_CAP: u64 = 1 << 62;

/// Finds the least N with `2·N^{3a} + 1 < (1+ε)(c₀²/3)·N^{1−2a}`.
///
/// A case-(a) coefficient is at most `2·N^{3a}` (plus one on the diagonal)
/// because each half is bounded by its mean divided by α².
pub fn case_a_exclusion_threshold(
    c0: &Rational,
    epsilon: f64,
    alpha_exponent: &Rational,
    cap: u64,
) -> Result<ExclusionThreshold> {
    if *c0.numer() == 0 || *c0 > Rational::from_integer(1) {
        return Err(Error::param("c0 must lie in (0, 1]"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon must lie in (0, 1)"));
    }
    check_alpha_exponent(alpha_exponent)?;
    if cap == 0 {
        return Err(Error::param("cap must be positive"));
    }
    let a = to_f64(alpha_exponent);
    let c0 = to_f64(c0);
    let scale = (1.0 + epsilon) * c0 * c0 / 3.0;
    let holds = |n: u64| {
        let n = n as f64;
        2.0 * n.powf(3.0 * a) + 1.0 < scale * n.powf(1.0 - 2.0 * a)
    };
    // scale < 2/3, so the inequality fails at N = 1; the gap is convex in
    // log N, hence once it holds it keeps holding.
    if !holds(cap) {
        return Ok(ExclusionThreshold { n: cap, capped: true });
    }
    let (mut lo, mut hi) = (1u64, cap);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ExclusionThreshold { n: hi, capped: false })
}
