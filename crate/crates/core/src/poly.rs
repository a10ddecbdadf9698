//! Newman polynomials, their squares, and the ratio `R(p) = ‖p²‖∞ / ‖p‖₁²`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ntt;
use crate::rational::Rational;

/// Largest degree accepted by [`square_oracle`].
pub const ORACLE_MAX_DEGREE: usize = 10_000;

/// A polynomial with coefficients in {0, 1} and leading coefficient 1.
///
/// The dense coefficient vector and the sorted support are both kept; the
/// zero polynomial is not representable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NewmanPolynomial {
    bits: Vec<u8>,
    support: Vec<usize>,
}

impl NewmanPolynomial {
    /// Builds from dense coefficients `c₀ … c_N`; the last one must be 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(position) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidCharacter {
                found: char::from_digit(u32::from(bits[position]) % 36, 36).unwrap_or('?'),
                position,
            });
        }
        if bits.last() != Some(&1) {
            return Err(Error::LeadingZero);
        }
        let support = bits
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| (b == 1).then_some(j))
            .collect();
        Ok(Self { bits, support })
    }

    /// Builds from a set of exponents; duplicates are rejected.
    pub fn from_exponents(exponents: &[usize]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &e in exponents {
            if !seen.insert(e) {
                return Err(Error::DuplicateExponent(e));
            }
        }
        let Some(&degree) = seen.iter().next_back() else {
            return Err(Error::EmptyInput);
        };
        let mut bits = vec![0u8; degree + 1];
        for &e in &seen {
            bits[e] = 1;
        }
        Ok(Self {
            bits,
            support: seen.into_iter().collect(),
        })
    }

    /// `1 + x + … + x^degree`.
    pub fn all_ones(degree: usize) -> Self {
        Self {
            bits: vec![1; degree + 1],
            support: (0..=degree).collect(),
        }
    }

    /// Keeps coefficient j iff `mask[j] == 1`. Trailing zeros are trimmed;
    /// `None` when nothing survives.
    pub fn masked(&self, mask: &[u8]) -> Option<Self> {
        let support: Vec<usize> = self
            .support
            .iter()
            .copied()
            .filter(|&j| mask.get(j) == Some(&1))
            .collect();
        let degree = *support.last()?;
        let mut bits = vec![0u8; degree + 1];
        for &j in &support {
            bits[j] = 1;
        }
        Some(Self { bits, support })
    }

    pub fn degree(&self) -> usize {
        self.bits.len() - 1
    }

    /// ‖p‖₁, the number of nonzero coefficients.
    pub fn l1(&self) -> usize {
        self.support.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Coefficient of xʲ (zero past the degree).
    pub fn coeff(&self, j: usize) -> u8 {
        self.bits.get(j).copied().unwrap_or(0)
    }

    /// `p(x) = x^N p(1/x)`.
    pub fn is_reciprocal(&self) -> bool {
        self.bits.iter().eq(self.bits.iter().rev())
    }

    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }

    pub fn to_exponent_list(&self) -> String {
        let parts: Vec<String> = self.support.iter().map(|e| e.to_string()).collect();
        parts.join(",")
    }

    pub fn format(&self, format: PolyFormat) -> String {
        match format {
            PolyFormat::Bitstring => self.to_bitstring(),
            PolyFormat::ExponentList => self.to_exponent_list(),
        }
    }
}

impl fmt::Display for NewmanPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_exponent_list())
    }
}

/// Text encodings of a Newman polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyFormat {
    /// `c₀c₁…c_N`, index 0 first.
    Bitstring,
    /// Comma-separated distinct exponents, e.g. `0,3`.
    ExponentList,
}

impl FromStr for PolyFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bitstring" | "bits" => Ok(PolyFormat::Bitstring),
            "exponent_list" | "exponents" | "exponent-list" => Ok(PolyFormat::ExponentList),
            other => Err(Error::param(format!("unknown polynomial format {other:?}"))),
        }
    }
}

pub fn parse_polynomial(text: &str, format: PolyFormat) -> Result<NewmanPolynomial> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::EmptyInput);
    }
    match format {
        PolyFormat::Bitstring => {
            let bits = text
                .chars()
                .enumerate()
                .map(|(position, c)| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    found => Err(Error::InvalidCharacter { found, position }),
                })
                .collect::<Result<Vec<u8>>>()?;
            NewmanPolynomial::from_bits(bits)
        }
        PolyFormat::ExponentList => {
            let exponents = text
                .split(',')
                .map(|token| {
                    let token = token.trim();
                    token
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidExponent(token.to_string()))
                })
                .collect::<Result<Vec<usize>>>()?;
            NewmanPolynomial::from_exponents(&exponents)
        }
    }
}

/// Coefficients of `p²`, index k holding `(p²)_k`, length `2N + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareCoefficients(Vec<u64>);

impl SquareCoefficients {
    pub fn new(coefficients: Vec<u64>) -> Self {
        Self(coefficients)
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.0
    }

    pub fn get(&self, k: usize) -> u64 {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// ‖p²‖∞.
    pub fn height(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Smallest k attaining the height.
    pub fn argmax(&self) -> usize {
        let h = self.height();
        self.0.iter().position(|&c| c == h).unwrap_or(0)
    }

    /// ‖p²‖₁, equal to ‖p‖₁² for nonnegative coefficients.
    pub fn sum(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }
}

/// How [`square_with`] convolves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SquareStrategy {
    /// Pick by density.
    Auto,
    /// Iterate over pairs of support indices, O(‖p‖₁²).
    SupportPairs,
    /// Number-theoretic transform, O(N log N).
    Transform,
}

pub fn square(p: &NewmanPolynomial) -> SquareCoefficients {
    square_with(p, SquareStrategy::Auto)
}

pub fn square_with(p: &NewmanPolynomial, strategy: SquareStrategy) -> SquareCoefficients {
    let strategy = match strategy {
        SquareStrategy::Auto => choose_strategy(p),
        s => s,
    };
    match strategy {
        SquareStrategy::Transform if ntt::supports(p.bits.len()) => {
            SquareCoefficients(ntt::square_bits(&p.bits))
        }
        _ => SquareCoefficients(square_support_pairs(p)),
    }
}

fn choose_strategy(p: &NewmanPolynomial) -> SquareStrategy {
    let n = p.degree() as f64;
    let pairs = (p.l1() as f64).powi(2);
    let sparse = pairs < n * n.max(2.0).log2();
    if sparse || p.degree() < 64 || !ntt::supports(p.bits.len()) {
        SquareStrategy::SupportPairs
    } else {
        SquareStrategy::Transform
    }
}

fn square_support_pairs(p: &NewmanPolynomial) -> Vec<u64> {
    let mut out = vec![0u64; 2 * p.degree() + 1];
    for (idx, &i) in p.support.iter().enumerate() {
        out[2 * i] += 1;
        for &j in &p.support[idx + 1..] {
            out[i + j] += 2;
        }
    }
    out
}

/// The literal double loop over all index pairs; the reference the fast
/// paths are checked against.
pub fn square_oracle(p: &NewmanPolynomial) -> Result<SquareCoefficients> {
    let degree = p.degree();
    if degree > ORACLE_MAX_DEGREE {
        return Err(Error::DegreeAboveCap {
            what: "square_oracle",
            degree,
            cap: ORACLE_MAX_DEGREE,
        });
    }
    let mut out = vec![0u64; 2 * degree + 1];
    for i in 0..=degree {
        for j in 0..=degree {
            out[i + j] += u64::from(p.bits[i]) * u64::from(p.bits[j]);
        }
    }
    Ok(SquareCoefficients(out))
}

/// Exact summary of one polynomial: norms, height of the square, `R(p)`,
/// `R(p)·deg p` and the floor `1/(2 deg p + 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioReport {
    pub l1: u64,
    pub degree: u64,
    pub height: u64,
    pub ratio: Rational,
    pub product: Rational,
    pub trivial_bound: Rational,
}

impl RatioReport {
    /// Builds the report from an already computed square.
    pub fn from_square(p: &NewmanPolynomial, sq: &SquareCoefficients) -> Self {
        let l1 = p.l1() as u64;
        let degree = p.degree() as u64;
        let height = sq.height();
        let l1_sq = l1 * l1;
        Self {
            l1,
            degree,
            height,
            ratio: Ratio::new(height, l1_sq),
            product: Ratio::new(height * degree, l1_sq),
            trivial_bound: Ratio::new(1, 2 * degree + 1),
        }
    }
}

pub fn metrics(p: &NewmanPolynomial) -> RatioReport {
    RatioReport::from_square(p, &square(p))
}

#[derive(Serialize)]
struct FlatRatioReport {
    l1: u64,
    degree: u64,
    height: u64,
    ratio_num: u64,
    ratio_den: u64,
    product_num: u64,
    product_den: u64,
    trivial_bound_num: u64,
    trivial_bound_den: u64,
}

impl Serialize for RatioReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FlatRatioReport {
            l1: self.l1,
            degree: self.degree,
            height: self.height,
            ratio_num: *self.ratio.numer(),
            ratio_den: *self.ratio.denom(),
            product_num: *self.product.numer(),
            product_den: *self.product.denom(),
            trivial_bound_num: *self.trivial_bound.numer(),
            trivial_bound_den: *self.trivial_bound.denom(),
        }
        .serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> NewmanPolynomial {
        parse_polynomial(s, PolyFormat::Bitstring).unwrap()
    }

    #[test]
    fn parse_examples() {
        let p = bits("111");
        assert_eq!(p.degree(), 2);
        assert_eq!(p.support(), &[0, 1, 2]);
        let p = parse_polynomial("0,3", PolyFormat::ExponentList).unwrap();
        assert_eq!(p.degree(), 3);
        assert_eq!(p.to_bitstring(), "1001");
        assert!(matches!(
            parse_polynomial("110", PolyFormat::Bitstring),
            Err(Error::LeadingZero)
        ));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_polynomial("", PolyFormat::Bitstring), Err(Error::EmptyInput)));
        assert!(matches!(parse_polynomial("  ", PolyFormat::ExponentList), Err(Error::EmptyInput)));
        assert!(matches!(
            parse_polynomial("1021", PolyFormat::Bitstring),
            Err(Error::InvalidCharacter { found: '2', position: 2 })
        ));
        assert!(matches!(
            parse_polynomial("1,2,1", PolyFormat::ExponentList),
            Err(Error::DuplicateExponent(1))
        ));
        assert!(matches!(
            parse_polynomial("1,-2", PolyFormat::ExponentList),
            Err(Error::InvalidExponent(_))
        ));
        assert!(matches!(
            parse_polynomial("1,,2", PolyFormat::ExponentList),
            Err(Error::InvalidExponent(_))
        ));
        assert!(NewmanPolynomial::from_bits(vec![1, 0]).is_err());
        assert!(NewmanPolynomial::from_bits(vec![1, 2, 1]).is_err());
    }

    #[test]
    fn exponent_list_is_sorted_on_output() {
        let p = parse_polynomial("5, 0,2", PolyFormat::ExponentList).unwrap();
        assert_eq!(p.to_string(), "0,2,5");
    }

    #[test]
    fn square_examples() {
        assert_eq!(square(&bits("11")).coefficients(), &[1, 2, 1]);
        assert_eq!(square(&bits("1001")).coefficients(), &[1, 0, 0, 2, 0, 0, 1]);
        assert_eq!(square(&bits("111")).coefficients(), &[1, 2, 3, 2, 1]);
        assert_eq!(square_oracle(&bits("1")).unwrap().coefficients(), &[1]);
        assert_eq!(square_oracle(&bits("111")).unwrap().coefficients(), &[1, 2, 3, 2, 1]);
    }

    #[test]
    fn oracle_rejects_large_degree() {
        let p = NewmanPolynomial::all_ones(ORACLE_MAX_DEGREE + 1);
        assert!(matches!(square_oracle(&p), Err(Error::DegreeAboveCap { .. })));
    }

    #[test]
    fn strategies_agree() {
        let p = parse_polynomial("0,1,5,9,70,71,200", PolyFormat::ExponentList).unwrap();
        let a = square_with(&p, SquareStrategy::SupportPairs);
        let b = square_with(&p, SquareStrategy::Transform);
        assert_eq!(a, b);
        assert_eq!(a, square_oracle(&p).unwrap());
    }

    #[test]
    fn metrics_examples() {
        let m = metrics(&bits("1"));
        assert_eq!((m.l1, m.height, m.degree), (1, 1, 0));
        assert_eq!(m.ratio, Ratio::from_integer(1));
        assert_eq!(m.product, Ratio::from_integer(0));
        assert_eq!(m.trivial_bound, Ratio::from_integer(1));

        let m = metrics(&bits("11"));
        assert_eq!((m.l1, m.height), (2, 2));
        assert_eq!(m.ratio, Ratio::new(1, 2));
        assert_eq!(m.product, Ratio::new(1, 2));
        assert_eq!(m.trivial_bound, Ratio::new(1, 3));
    }

    #[test]
    fn all_ones_product_closed_form() {
        for n in 0..=100u64 {
            let p = NewmanPolynomial::all_ones(n as usize);
            let from_oracle = RatioReport::from_square(&p, &square_oracle(&p).unwrap());
            let m = metrics(&p);
            assert_eq!(m, from_oracle);
            assert_eq!(m.ratio, Ratio::new(1, n + 1));
            assert_eq!(m.product, Ratio::new(n, n + 1));
        }
    }

    #[test]
    fn all_ones_product_up_to_1000() {
        for n in 0..=1000u64 {
            let m = metrics(&NewmanPolynomial::all_ones(n as usize));
            assert_eq!(m.product, Ratio::new(n, n + 1), "n = {n}");
        }
    }

    #[test]
    fn masked_trims_and_empties() {
        let p = bits("1111");
        assert_eq!(p.masked(&[1, 0, 1, 0]).unwrap().to_bitstring(), "101");
        assert!(p.masked(&[0, 0, 0, 0]).is_none());
    }

    #[test]
    fn reciprocal_square_is_palindromic() {
        let p = bits("1101011");
        assert!(p.is_reciprocal());
        let sq = square(&p);
        let c = sq.coefficients();
        assert!(c.iter().eq(c.iter().rev()));
    }

    #[test]
    fn report_serializes_flat() {
        let json = serde_json::to_value(metrics(&bits("11"))).unwrap();
        assert_eq!(json["ratio_num"], 1);
        assert_eq!(json["ratio_den"], 2);
        assert_eq!(json["trivial_bound_den"], 3);
        assert_eq!(json["height"], 2);
    }
}
