use rayon::prelude::*;

use super::{DegreeBest, SearchMetadata, SearchResult, SearchSpec};
use crate::error::Result;
use crate::poly::NewmanPolynomial;
use crate::search::Objective;

pub const EXHAUSTIVE_MAX_DEGREE: usize = 28;

/// Interior-bit prefixes handed to workers per degree.
const PARTITION_BITS: u32 = 8;

/// Ordering key of a candidate at fixed degree: objective `num/den`, ties
/// broken by the coefficient word so the reduction is order independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Candidate {
    num: u64,
    den: u64,
    word: u64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        let lhs = u128::from(self.num) * u128::from(other.den);
        let rhs = u128::from(other.num) * u128::from(self.den);
        lhs < rhs || (lhs == rhs && self.word < other.word)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    best: Option<Candidate>,
    evaluated: u64,
    skipped_by_reversal: u64,
    skipped_by_density: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.best = match (self.best, other.best) {
            (Some(a), Some(b)) => Some(if b.better_than(&a) { b } else { a }),
            (a, b) => a.or(b),
        };
        self.evaluated += other.evaluated;
        self.skipped_by_reversal += other.skipped_by_reversal;
        self.skipped_by_density += other.skipped_by_density;
        self
    }
}

fn reverse_word(word: u64, n: usize) -> u64 {
    word.reverse_bits() >> (63 - n)
}

/// ‖p²‖∞ of the degree-n polynomial encoded in `word`, as the largest
/// overlap of the word with shifts of its reversal.
fn square_height(word: u64, n: usize) -> u64 {
    let rev = reverse_word(word, n);
    let mut height = 0;
    for shift in 0..=n {
        height = height.max(u64::from((word & (rev >> shift)).count_ones()));
        height = height.max(u64::from((word & (rev << shift)).count_ones()));
    }
    height
}

fn search_degree(spec: &SearchSpec, n: usize) -> Tally {
    let interior = n.saturating_sub(1) as u32;
    let ends: u64 = 1 | (1u64 << n);
    let prefix_bits = PARTITION_BITS.min(interior);
    let low_bits = interior - prefix_bits;

    (0u64..1 << prefix_bits)
        .into_par_iter()
        .map(|prefix| {
            let mut tally = Tally::default();
            for low in 0u64..1 << low_bits {
                let interior_word = (prefix << low_bits) | low;
                let word = ends | (interior_word << 1);
                if spec.use_reversal_symmetry && reverse_word(word, n) < word {
                    tally.skipped_by_reversal += 1;
                    continue;
                }
                let l1 = u64::from(word.count_ones());
                if !spec.dense_enough(l1, n) {
                    tally.skipped_by_density += 1;
                    continue;
                }
                tally.evaluated += 1;
                let height = square_height(word, n);
                let (num, den) = match spec.objective {
                    Objective::MinProduct => (height * n as u64, l1 * l1),
                    Objective::MinRatio => (height, l1 * l1),
                };
                let candidate = Candidate { num, den, word };
                if tally.best.is_none_or(|b| candidate.better_than(&b)) {
                    tally.best = Some(candidate);
                }
            }
            tally
        })
        .reduce(Tally::default, Tally::merge)
}

fn word_to_poly(word: u64, n: usize) -> NewmanPolynomial {
    let bits = (0..=n).map(|j| (word >> j & 1) as u8).collect();
    NewmanPolynomial::from_bits(bits).expect("canonical word has leading 1")
}

/// Exact minimum of the objective over all canonical candidates in the
/// degree range that satisfy the density floor.
pub fn exhaustive_search(spec: &SearchSpec) -> Result<SearchResult> {
    spec.validate()?;
    let mut table = Vec::new();
    let mut metadata = SearchMetadata {
        seed: spec.seed,
        ..SearchMetadata::default()
    };
    for n in spec.degrees() {
        let tally = search_degree(spec, n);
        metadata.evaluated += tally.evaluated;
        metadata.skipped_by_reversal += tally.skipped_by_reversal;
        metadata.skipped_by_density += tally.skipped_by_density;
        metadata.iterations += tally.evaluated + tally.skipped_by_reversal + tally.skipped_by_density;
        if let Some(best) = tally.best {
            let poly = word_to_poly(best.word, n);
            let report = crate::poly::metrics(&poly);
            table.push(DegreeBest {
                degree: n,
                best: poly,
                report,
                candidates_examined: tally.evaluated,
            });
        }
    }
    SearchResult::assemble(spec, table, metadata)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::square;
    use num_rational::Ratio;

    #[test]
    fn popcount_height_matches_square() {
        for n in 1..=12usize {
            for interior in 0u64..1 << (n - 1) {
                let word = 1 | (1 << n) | (interior << 1);
                let p = word_to_poly(word, n);
                assert_eq!(square_height(word, n), square(&p).height());
            }
        }
    }

    #[test]
    fn degree_one_and_two() {
        let r = exhaustive_search(&SearchSpec::exhaustive(1, 1)).unwrap();
        assert_eq!(r.report.product, Ratio::new(1, 2));
        assert_eq!(r.best.to_bitstring(), "11");

        let r = exhaustive_search(&SearchSpec::exhaustive(2, 2)).unwrap();
        assert_eq!(r.report.product, Ratio::new(2, 3));
        assert_eq!(r.best.to_bitstring(), "111");
    }

    #[test]
    fn never_worse_than_all_ones() {
        let r = exhaustive_search(&SearchSpec::exhaustive(1, 14)).unwrap();
        for row in &r.degree_table {
            let n = row.degree as u64;
            assert!(row.report.product <= Ratio::new(n, n + 1), "degree {n}");
        }
    }

    #[test]
    fn reversal_reduction_preserves_minima() {
        let with = exhaustive_search(&SearchSpec::exhaustive(1, 14)).unwrap();
        let mut spec = SearchSpec::exhaustive(1, 14);
        spec.use_reversal_symmetry = false;
        let without = exhaustive_search(&spec).unwrap();
        for (a, b) in with.degree_table.iter().zip(&without.degree_table) {
            assert_eq!(a.report.product, b.report.product);
        }
        assert!(with.metadata.skipped_by_reversal > 0);
        assert_eq!(without.metadata.skipped_by_reversal, 0);
    }

    #[test]
    fn density_floor_is_respected() {
        let mut spec = SearchSpec::exhaustive(4, 10);
        spec.density_floor = Ratio::new(9, 10);
        let r = exhaustive_search(&spec).unwrap();
        for row in &r.degree_table {
            assert!(10 * row.report.l1 >= 9 * row.degree as u64);
        }
        assert!(r.metadata.skipped_by_density > 0);
    }

    #[test]
    fn ratio_objective() {
        let mut spec = SearchSpec::exhaustive(1, 8);
        spec.objective = Objective::MinRatio;
        let r = exhaustive_search(&spec).unwrap();
        // R(p) ≥ 1/(2N+1) and the all-ones polynomial attains 1/(N+1)
        for row in &r.degree_table {
            let n = row.degree as u64;
            assert!(row.report.ratio >= Ratio::new(1, 2 * n + 1));
            assert!(row.report.ratio <= Ratio::new(1, n + 1));
        }
    }
}
