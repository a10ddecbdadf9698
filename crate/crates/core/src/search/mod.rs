//! Hunting for dense Newman polynomials with small `R(p)·deg p`.
//!
//! Candidates are canonical: `p₀ = p_N = 1`, so only the `N − 1` interior
//! coefficients vary. Shifting by a power of x never helps at fixed
//! degree, and `p` and its reversal `x^N p(1/x)` share every metric.

mod exhaustive;
mod local;

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

pub use exhaustive::{exhaustive_search, EXHAUSTIVE_MAX_DEGREE};
pub use local::local_search;

use crate::error::{Error, Result};
use crate::poly::{metrics, NewmanPolynomial, RatioReport};
use crate::rational::{format_ratio, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `R(p)·deg p`.
    MinProduct,
    /// `R(p)`.
    MinRatio,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min_product" | "product" => Ok(Objective::MinProduct),
            "min_ratio" | "ratio" => Ok(Objective::MinRatio),
            other => Err(Error::param(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    LocalSearch,
}

impl FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "local_search" | "local" | "anneal" => Ok(SearchMode::LocalSearch),
            other => Err(Error::param(format!("unknown search mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchSpec {
    pub min_degree: usize,
    pub max_degree: usize,
    /// c₀ in `‖p‖₁ ≥ c₀·deg p`; zero disables the constraint.
    #[serde(serialize_with = "ser_ratio")]
    pub density_floor: Rational,
    pub objective: Objective,
    pub mode: SearchMode,
    pub seed: u64,
    /// Moves per degree (local search only).
    pub iteration_budget: u64,
    /// Independent annealing runs per degree (local search only).
    pub restarts: usize,
    /// Disable the reversal reduction (exhaustive only).
    pub use_reversal_symmetry: bool,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_ratio(r))
}

impl SearchSpec {
    pub fn exhaustive(min_degree: usize, max_degree: usize) -> Self {
        Self {
            min_degree,
            max_degree,
            density_floor: Rational::from_integer(0),
            objective: Objective::MinProduct,
            mode: SearchMode::Exhaustive,
            seed: 0,
            iteration_budget: 0,
            restarts: 1,
            use_reversal_symmetry: true,
        }
    }

    pub fn local(min_degree: usize, max_degree: usize, iteration_budget: u64, seed: u64) -> Self {
        Self {
            mode: SearchMode::LocalSearch,
            iteration_budget,
            seed,
            restarts: 4,
            ..Self::exhaustive(min_degree, max_degree)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_degree > self.max_degree {
            return Err(Error::param("min_degree exceeds max_degree"));
        }
        if self.max_degree == 0 {
            return Err(Error::param("degree 0 is degenerate for R·deg; need max_degree ≥ 1"));
        }
        if self.density_floor > Rational::from_integer(1) {
            return Err(Error::param("density floor above 1 admits no candidates"));
        }
        if self.mode == SearchMode::Exhaustive && self.max_degree > EXHAUSTIVE_MAX_DEGREE {
            return Err(Error::DegreeAboveCap {
                what: "exhaustive_search",
                degree: self.max_degree,
                cap: EXHAUSTIVE_MAX_DEGREE,
            });
        }
        if self.mode == SearchMode::LocalSearch && self.restarts == 0 {
            return Err(Error::param("local search needs at least one restart"));
        }
        Ok(())
    }

    /// Degrees actually searched (degree 0 is skipped).
    pub(crate) fn degrees(&self) -> std::ops::RangeInclusive<usize> {
        self.min_degree.max(1)..=self.max_degree
    }

    /// Whether a candidate with `l1` terms meets the floor at degree `n`.
    pub(crate) fn dense_enough(&self, l1: u64, n: usize) -> bool {
        u128::from(l1) * u128::from(*self.density_floor.denom())
            >= u128::from(*self.density_floor.numer()) * n as u128
    }

    pub(crate) fn objective_of(&self, report: &RatioReport) -> Rational {
        match self.objective {
            Objective::MinProduct => report.product,
            Objective::MinRatio => report.ratio,
        }
    }
}

/// Best candidate found at one degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeBest {
    pub degree: usize,
    #[serde(serialize_with = "ser_poly")]
    pub best: NewmanPolynomial,
    pub report: RatioReport,
    pub candidates_examined: u64,
}

fn ser_poly<S: serde::Serializer>(p: &NewmanPolynomial, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_exponent_list())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SearchMetadata {
    pub iterations: u64,
    pub seed: u64,
    pub evaluated: u64,
    pub skipped_by_reversal: u64,
    pub skipped_by_density: u64,
    pub rejected_moves: u64,
    /// `(degree, iteration, best objective so far)` at every improvement.
    pub trajectory: Vec<TrajectoryPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub degree: usize,
    pub iteration: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub objective: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    #[serde(serialize_with = "ser_poly")]
    pub best: NewmanPolynomial,
    pub report: RatioReport,
    pub objective: Objective,
    pub degree_table: Vec<DegreeBest>,
    pub metadata: SearchMetadata,
}

impl SearchResult {
    pub(crate) fn assemble(spec: &SearchSpec, table: Vec<DegreeBest>, metadata: SearchMetadata) -> Result<Self> {
        let overall = table
            .iter()
            .min_by(|a, b| {
                spec.objective_of(&a.report)
                    .cmp(&spec.objective_of(&b.report))
                    .then(a.degree.cmp(&b.degree))
            })
            .ok_or_else(|| Error::param("no feasible candidate in the degree range"))?;
        Ok(Self {
            best: overall.best.clone(),
            report: overall.report.clone(),
            objective: spec.objective,
            degree_table: table,
            metadata,
        })
    }

    /// Per-degree table: `degree,l1,height,product_num,product_den,ratio_num,ratio_den,candidates,best`.
    pub fn degree_table_csv(&self) -> String {
        let mut out = String::from("degree,l1,height,product_num,product_den,ratio_num,ratio_den,candidates,best\n");
        for row in &self.degree_table {
            let r = &row.report;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},\"{}\"",
                row.degree,
                r.l1,
                r.height,
                r.product.numer(),
                r.product.denom(),
                r.ratio.numer(),
                r.ratio.denom(),
                row.candidates_examined,
                row.best.to_exponent_list()
            );
        }
        out
    }
}

pub fn run_search(spec: &SearchSpec) -> Result<SearchResult> {
    match spec.mode {
        SearchMode::Exhaustive => exhaustive_search(spec),
        SearchMode::LocalSearch => local_search(spec),
    }
}

/// Outcome of checking `‖p‖₁ ≥ c₀·deg p` and `R(p)·deg p ≤ ρ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub density_ok: bool,
    pub ratio_ok: bool,
    pub holds: bool,
    pub failed: Vec<&'static str>,
}

pub fn verify_hypothesis(p: &NewmanPolynomial, c0: &Rational, rho: &Rational) -> Result<HypothesisReport> {
    if p.degree() == 0 {
        return Err(Error::param("degree 0: R·deg is degenerate"));
    }
    let report = metrics(p);
    let density_ok = Rational::from_integer(report.l1) >= c0 * Rational::from_integer(report.degree);
    let ratio_ok = report.product <= *rho;
    let mut failed = Vec::new();
    if !density_ok {
        failed.push("density");
    }
    if !ratio_ok {
        failed.push("ratio");
    }
    Ok(HypothesisReport {
        density_ok,
        ratio_ok,
        holds: density_ok && ratio_ok,
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, PolyFormat};
    use num_rational::Ratio;

    #[test]
    fn hypothesis_examples() {
        for n in 1..30usize {
            let p = NewmanPolynomial::all_ones(n);
            let r = verify_hypothesis(&p, &Ratio::from_integer(1), &Ratio::new(n as u64, n as u64 + 1)).unwrap();
            assert!(r.holds, "n = {n}");
        }
        for n in 5..20usize {
            let p = parse_polynomial(&format!("0,{n}"), PolyFormat::ExponentList).unwrap();
            let r = verify_hypothesis(&p, &Ratio::new(1, 2), &Ratio::from_integer(n as u64)).unwrap();
            assert!(!r.density_ok);
            assert_eq!(r.failed, vec!["density"]);
        }
        // ρ below the trivial floor N/(2N+1) can never be met
        let p = parse_polynomial("1101", PolyFormat::Bitstring).unwrap();
        let r = verify_hypothesis(&p, &Ratio::from_integer(0), &Ratio::new(3, 8)).unwrap();
        assert!(!r.ratio_ok);
        assert!(verify_hypothesis(&NewmanPolynomial::all_ones(0), &Ratio::from_integer(0), &Ratio::from_integer(1)).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(SearchSpec::exhaustive(3, 2).validate().is_err());
        assert!(SearchSpec::exhaustive(1, EXHAUSTIVE_MAX_DEGREE + 1).validate().is_err());
        assert!(SearchSpec::exhaustive(0, 0).validate().is_err());
        let mut s = SearchSpec::exhaustive(1, 4);
        s.density_floor = Ratio::new(3, 2);
        assert!(s.validate().is_err());
        assert!(SearchSpec::local(1, 100, 10, 0).validate().is_ok());
    }
}
