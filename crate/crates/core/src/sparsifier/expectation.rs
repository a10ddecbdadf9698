//! Exact expectations of ‖q‖₁ and of the coefficients of q², together with
//! a brute-force oracle that enumerates every keep-mask.

use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{square, NewmanPolynomial};

/// Largest degree the mask-enumeration oracle accepts (2²¹ masks).
pub const ORACLE_MAX_DEGREE: usize = 20;

/// Scalars that can carry a keep probability: exact rationals or floats.
pub trait Probability:
    Clone + PartialOrd + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    fn from_count(n: u64) -> Self;
}

impl Probability for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }
}

impl Probability for BigRational {
    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

/// `E(q²)_k = α²(p²)_k + θ_k`, with `θ_k = α(1−α)p_{k/2}²` for even k and
/// zero for odd k.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareExpectation<T> {
    pub k: usize,
    pub main: T,
    pub theta: T,
    pub total: T,
}

/// `E‖q‖₁ = α‖p‖₁`.
pub fn expected_l1<T: Probability>(p: &NewmanPolynomial, alpha: &T) -> T {
    alpha.clone() * T::from_count(p.l1() as u64)
}

fn square_coeff(p: &NewmanPolynomial, k: usize) -> u64 {
    p.support()
        .iter()
        .filter(|&&j| j <= k && p.coeff(k - j) == 1)
        .count() as u64
}

fn decompose<T: Probability>(p: &NewmanPolynomial, alpha: &T, k: usize, sq_k: u64) -> SquareExpectation<T> {
    let main = alpha.clone() * alpha.clone() * T::from_count(sq_k);
    let theta = if k.is_multiple_of(2) && p.coeff(k / 2) == 1 {
        alpha.clone() * (T::one() - alpha.clone())
    } else {
        T::zero()
    };
    let total = main.clone() + theta.clone();
    SquareExpectation { k, main, theta, total }
}

pub fn expected_square_coeff<T: Probability>(
    p: &NewmanPolynomial,
    alpha: &T,
    k: usize,
) -> Result<SquareExpectation<T>> {
    let max = 2 * p.degree();
    if k > max {
        return Err(Error::IndexOutOfRange { k, max });
    }
    Ok(decompose(p, alpha, k, square_coeff(p, k)))
}

/// Expectations for every k at once, sharing one squaring of p.
pub fn expected_square_coeffs<T: Probability>(
    p: &NewmanPolynomial,
    alpha: &T,
) -> Vec<SquareExpectation<T>> {
    let sq = square(p);
    sq.coefficients()
        .iter()
        .enumerate()
        .map(|(k, &c)| decompose(p, alpha, k, c))
        .collect()
}

/// Exact expectations obtained by summing over all 2^{N+1} keep-masks.
#[derive(Clone, Debug, PartialEq)]
pub struct EnumeratedExpectations {
    pub l1: BigRational,
    pub square: Vec<BigRational>,
}

/// Enumerates every mask and weights it by `α^w (1−α)^{N+1−w}`; masks of
/// equal weight share a probability, so totals are accumulated per weight
/// in integers first.
pub fn enumerate_expectations(
    p: &NewmanPolynomial,
    alpha: &BigRational,
) -> Result<EnumeratedExpectations> {
    let degree = p.degree();
    if degree > ORACLE_MAX_DEGREE {
        return Err(Error::DegreeAboveCap {
            what: "expectation_oracle",
            degree,
            cap: ORACLE_MAX_DEGREE,
        });
    }
    let n = degree + 1;
    let p_bits: u32 = p
        .bits()
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &b)| acc | (u32::from(b) << j));

    let mut coeff_totals = vec![vec![0u64; n + 1]; 2 * degree + 1];
    let mut l1_totals = vec![0u64; n + 1];
    let mut set_bits = Vec::with_capacity(n);
    for mask in 0u32..(1u32 << n) {
        let weight = mask.count_ones() as usize;
        let q = p_bits & mask;
        set_bits.clear();
        set_bits.extend((0..n).filter(|&j| q >> j & 1 == 1));
        l1_totals[weight] += set_bits.len() as u64;
        for &i in &set_bits {
            for &j in &set_bits {
                coeff_totals[i + j][weight] += 1;
            }
        }
    }

    let one = BigRational::one();
    let keep_powers = powers(alpha, n);
    let drop_powers = powers(&(&one - alpha), n);
    let weight_prob: Vec<BigRational> = (0..=n)
        .map(|w| &keep_powers[w] * &drop_powers[n - w])
        .collect();
    let expect = |totals: &[u64]| -> BigRational {
        totals
            .iter()
            .zip(&weight_prob)
            .fold(BigRational::zero(), |acc, (&t, prob)| {
                acc + prob * BigRational::from_integer(BigInt::from(t))
            })
    };
    Ok(EnumeratedExpectations {
        l1: expect(&l1_totals),
        square: coeff_totals.iter().map(|t| expect(t)).collect(),
    })
}

fn powers(base: &BigRational, n: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = BigRational::one();
    for _ in 0..=n {
        out.push(acc.clone());
        acc = &acc * base;
    }
    out
}

/// `E(q²)_k` by full mask enumeration.
pub fn expectation_oracle(p: &NewmanPolynomial, alpha: &BigRational, k: usize) -> Result<BigRational> {
    let max = 2 * p.degree();
    if k > max {
        return Err(Error::IndexOutOfRange { k, max });
    }
    Ok(enumerate_expectations(p, alpha)?.square.swap_remove(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, PolyFormat};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn bits(s: &str) -> NewmanPolynomial {
        parse_polynomial(s, PolyFormat::Bitstring).unwrap()
    }

    #[test]
    fn l1_examples() {
        assert_eq!(expected_l1(&bits("111"), &q(1, 2)), q(3, 2));
        assert_eq!(expected_l1(&bits("1101"), &q(1, 1)), q(3, 1));
        let p = NewmanPolynomial::all_ones(1024);
        assert_eq!(expected_l1(&p, &q(1, 2)), q(1025, 2));
    }

    #[test]
    fn square_examples() {
        let half = q(1, 2);
        let e = expected_square_coeff(&bits("11"), &half, 1).unwrap();
        assert_eq!(e.total, q(1, 2));
        assert_eq!(e.theta, q(0, 1));
        // (q²)₀ = ε₀, so the expectation is α itself
        for alpha in [q(1, 2), q(1, 3), q(2, 7)] {
            let e = expected_square_coeff(&bits("11"), &alpha, 0).unwrap();
            assert_eq!(e.total, alpha);
        }
        let e = expected_square_coeff(&bits("111"), &half, 2).unwrap();
        assert_eq!(e.main, q(3, 4));
        assert_eq!(e.theta, q(1, 4));
        assert_eq!(e.total, q(1, 1));
        assert!(matches!(
            expected_square_coeff(&bits("111"), &half, 5),
            Err(Error::IndexOutOfRange { k: 5, max: 4 })
        ));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(expectation_oracle(&bits("111"), &q(1, 2), 2).unwrap(), q(1, 1));
        assert_eq!(expectation_oracle(&bits("1001"), &q(1, 3), 3).unwrap(), q(2, 9));
        let big = NewmanPolynomial::all_ones(ORACLE_MAX_DEGREE + 1);
        assert!(matches!(
            expectation_oracle(&big, &q(1, 2), 0),
            Err(Error::DegreeAboveCap { .. })
        ));
    }

    #[test]
    fn float_and_exact_agree() {
        let p = bits("1011001");
        for (exact, float) in expected_square_coeffs(&p, &q(1, 4))
            .iter()
            .zip(expected_square_coeffs(&p, &0.25f64))
        {
            let e: f64 = crate::rational::big_to_f64(&exact.total);
            assert!((e - float.total).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_in_unit_interval() {
        let p = bits("110111");
        for alpha in [q(1, 4), q(1, 3), q(1, 2), q(99, 100)] {
            for e in expected_square_coeffs(&p, &alpha) {
                assert!(e.theta >= q(0, 1) && e.theta < q(1, 1));
            }
        }
    }
}
