//! The deviation events a sparsified polynomial must avoid:
//!
//! * `E`:  ‖q‖₁ < (1−ε)·α·‖p‖₁
//! * `E_k`: (q²)_k > (1+ε)·α²·‖p²‖∞, for each k = 0..2N
//! * `D`:  deg q ≤ (c₀/2)·deg p
//!
//! α = N^{−a} is irrational in general, so every comparison is done first
//! in floating point and settled exactly (by raising both sides to the
//! denominator of a) whenever the two sides are within a relative 10⁻⁹.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{pow, One, Zero};
use serde::Serialize;

use super::Alpha;
use crate::poly::SquareCoefficients;
use crate::rational::Rational;

const FLOAT_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BadEventFlags {
    #[serde(rename = "E")]
    pub e: bool,
    #[serde(rename = "E_k_any")]
    pub e_k_any: bool,
    #[serde(rename = "E_k_indices")]
    pub e_k_indices: Vec<usize>,
    #[serde(rename = "D")]
    pub d: bool,
    /// |‖q‖₁ − α‖p‖₁| > ε·α‖p‖₁; a diagnostic, not one of the three events.
    pub l1_two_sided: bool,
}

impl BadEventFlags {
    /// No bad event occurred.
    pub fn is_clean(&self) -> bool {
        !(self.e || self.e_k_any || self.d)
    }
}

/// Exact comparator for `x` versus `factor · α^power · y`.
pub(crate) struct ScaledComparator {
    n: BigInt,
    num: u32,
    den: u32,
    factor: BigRational,
    factor_f64: f64,
    alpha_power_f64: f64,
    power: u32,
}

impl ScaledComparator {
    pub(crate) fn new(alpha: &Alpha, factor: BigRational, power: u32) -> Self {
        let exponent = alpha.exponent();
        let factor_f64 = crate::rational::big_to_f64(&factor);
        Self {
            n: BigInt::from(alpha.n()),
            num: u32::try_from(*exponent.numer()).expect("alpha exponent numerator fits u32"),
            den: u32::try_from(*exponent.denom()).expect("alpha exponent denominator fits u32"),
            factor,
            factor_f64,
            alpha_power_f64: alpha.value().powi(power as i32),
            power,
        }
    }

    pub(crate) fn compare(&self, x: u64, y: u64) -> Ordering {
        let rhs = self.factor_f64 * self.alpha_power_f64 * y as f64;
        let lhs = x as f64;
        if lhs > rhs * (1.0 + FLOAT_MARGIN) {
            return Ordering::Greater;
        }
        if lhs < rhs * (1.0 - FLOAT_MARGIN) {
            return Ordering::Less;
        }
        self.compare_exact(x, y)
    }

    /// `x^b · N^{p·a'}` versus `(factor·y)^b`, where α^p = N^{−p·a'/b}.
    fn compare_exact(&self, x: u64, y: u64) -> Ordering {
        let rhs_base = &self.factor * BigRational::from_integer(BigInt::from(y));
        if x == 0 || rhs_base.is_zero() {
            return BigRational::from_integer(BigInt::from(x)).cmp(&rhs_base);
        }
        let b = self.den as usize;
        let lhs = pow(BigInt::from(x), b) * pow(self.n.clone(), (self.power * self.num) as usize);
        let rhs = pow(rhs_base, b);
        BigRational::from_integer(lhs).cmp(&rhs)
    }
}

/// Precomputed thresholds for one parent polynomial and configuration.
pub(crate) struct EventDetector {
    l1_low: ScaledComparator,
    l1_high: ScaledComparator,
    coeff_high: ScaledComparator,
    p_l1: u64,
    p_height: u64,
    p_degree: u64,
    c0: Rational,
    coeff_cutoff: f64,
}

impl EventDetector {
    pub(crate) fn new(
        alpha: &Alpha,
        epsilon: &BigRational,
        c0: Rational,
        p_l1: u64,
        p_height: u64,
        p_degree: u64,
    ) -> Self {
        let one = BigRational::one();
        let coeff_high = ScaledComparator::new(alpha, &one + epsilon, 2);
        let coeff_cutoff =
            coeff_high.factor_f64 * coeff_high.alpha_power_f64 * p_height as f64 * (1.0 - FLOAT_MARGIN);
        Self {
            l1_low: ScaledComparator::new(alpha, &one - epsilon, 1),
            l1_high: ScaledComparator::new(alpha, &one + epsilon, 1),
            coeff_high,
            p_l1,
            p_height,
            p_degree,
            c0,
            coeff_cutoff,
        }
    }

    /// Flags for a masked polynomial with ‖q‖₁ = `q_l1`, degree `q_degree`
    /// (`None` when q vanished) and square `q_square`.
    pub(crate) fn detect(
        &self,
        q_l1: u64,
        q_degree: Option<u64>,
        q_square: Option<&SquareCoefficients>,
    ) -> BadEventFlags {
        let e = self.l1_low.compare(q_l1, self.p_l1) == Ordering::Less;
        let l1_two_sided = e || self.l1_high.compare(q_l1, self.p_l1) == Ordering::Greater;
        let e_k_indices: Vec<usize> = q_square
            .map(|sq| {
                sq.coefficients()
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| {
                        c as f64 >= self.coeff_cutoff
                            && self.coeff_high.compare(c, self.p_height) == Ordering::Greater
                    })
                    .map(|(k, _)| k)
                    .collect()
            })
            .unwrap_or_default();
        let d = match q_degree {
            None => true,
            // deg q ≤ (c₀/2)·N  ⇔  2·deg q·den ≤ num·N
            Some(deg) => {
                2 * u128::from(deg) * u128::from(*self.c0.denom())
                    <= u128::from(*self.c0.numer()) * u128::from(self.p_degree)
            }
        };
        BadEventFlags {
            e,
            e_k_any: !e_k_indices.is_empty(),
            e_k_indices,
            d,
            l1_two_sided,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::exact_f64;
    use crate::sparsifier::alpha_of;

    #[test]
    fn comparator_settles_ties_exactly() {
        // α = 1024^{-1/10} = 1/2 exactly: 3 versus 1·(1/2)·6 is a tie.
        let alpha = alpha_of(1024, &Rational::new(1, 10)).unwrap();
        let cmp = ScaledComparator::new(&alpha, BigRational::one(), 1);
        assert_eq!(cmp.compare(3, 6), Ordering::Equal);
        assert_eq!(cmp.compare(4, 6), Ordering::Greater);
        assert_eq!(cmp.compare(0, 0), Ordering::Equal);
        assert_eq!(cmp.compare(1, 0), Ordering::Greater);
        // α² with a non-dyadic factor
        let cmp = ScaledComparator::new(&alpha, exact_f64(1.5), 2);
        assert_eq!(cmp.compare(3, 8), Ordering::Equal);
    }

    #[test]
    fn comparator_irrational_alpha() {
        // α = 2^{-1/2}: x vs α·y with x² vs y²/2
        let alpha = alpha_of(2, &Rational::new(1, 2)).unwrap();
        let cmp = ScaledComparator::new(&alpha, BigRational::one(), 1);
        assert_eq!(cmp.compare(70_710_678, 100_000_000), Ordering::Less);
        assert_eq!(cmp.compare(70_710_679, 100_000_000), Ordering::Greater);
        assert_eq!(cmp.compare_exact(70_710_678, 100_000_000), Ordering::Less);
        assert_eq!(cmp.compare_exact(70_710_679, 100_000_000), Ordering::Greater);
    }
}
