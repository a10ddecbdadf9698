//! Seeded simulated annealing over the interior coefficients.
//!
//! Moves flip one interior bit or swap a 1 with a 0. The square is updated
//! incrementally in O(N) per move. Restart 0 starts from the all-ones
//! polynomial; the others from random starts that meet the density floor.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{DegreeBest, Objective, SearchMetadata, SearchResult, SearchSpec, TrajectoryPoint};
use crate::error::{Error, Result};
use crate::poly::{metrics, NewmanPolynomial};
use crate::rational::Rational;
use crate::rng::{self, StreamRng};

const START_TEMPERATURE: f64 = 2e-2;
const END_TEMPERATURE: f64 = 1e-4;

struct State {
    bits: Vec<u8>,
    square: Vec<i64>,
    l1: u64,
    height: u64,
}

impl State {
    fn new(bits: Vec<u8>) -> Self {
        let p = NewmanPolynomial::from_bits(bits.clone()).expect("state keeps p_N = 1");
        let square: Vec<i64> = crate::poly::square(&p)
            .coefficients()
            .iter()
            .map(|&c| c as i64)
            .collect();
        let height = square.iter().copied().max().unwrap_or(0) as u64;
        Self {
            l1: p.l1() as u64,
            bits,
            square,
            height,
        }
    }

    fn flip(&mut self, i: usize) {
        let sign: i64 = if self.bits[i] == 1 { -1 } else { 1 };
        self.bits[i] ^= 1;
        for (j, &b) in self.bits.iter().enumerate() {
            if b == 1 && j != i {
                self.square[i + j] += 2 * sign;
            }
        }
        self.square[2 * i] += sign;
        if sign > 0 {
            self.l1 += 1;
        } else {
            self.l1 -= 1;
        }
    }

    fn refresh_height(&mut self) {
        self.height = self.square.iter().copied().max().unwrap_or(0) as u64;
    }

    /// Objective as `num/den`.
    fn key(&self, objective: Objective, n: usize) -> (u64, u64) {
        match objective {
            Objective::MinProduct => (self.height * n as u64, self.l1 * self.l1),
            Objective::MinRatio => (self.height, self.l1 * self.l1),
        }
    }
}

fn less(a: (u64, u64), b: (u64, u64)) -> bool {
    u128::from(a.0) * u128::from(b.1) < u128::from(b.0) * u128::from(a.1)
}

struct RunOutcome {
    best_bits: Vec<u8>,
    best_key: (u64, u64),
    rejected: u64,
    improvements: Vec<(u64, (u64, u64))>,
}

fn random_start(spec: &SearchSpec, n: usize, stream: &mut StreamRng) -> Vec<u8> {
    let density = crate::rational::to_f64(&spec.density_floor).max(0.5);
    let mut bits: Vec<u8> = (0..=n).map(|_| u8::from(stream.gen_bool(density))).collect();
    bits[0] = 1;
    bits[n] = 1;
    let mut zeros: Vec<usize> = (1..n).filter(|&j| bits[j] == 0).collect();
    zeros.shuffle(stream);
    let mut l1 = bits.iter().filter(|&&b| b == 1).count() as u64;
    while !spec.dense_enough(l1, n) {
        let j = zeros.pop().expect("all-ones meets any floor ≤ 1");
        bits[j] = 1;
        l1 += 1;
    }
    bits
}

fn anneal(spec: &SearchSpec, n: usize, start: Vec<u8>, budget: u64, stream: &mut StreamRng) -> RunOutcome {
    let mut state = State::new(start);
    let mut current = state.key(spec.objective, n);
    let mut best_key = current;
    let mut best_bits = state.bits.clone();
    let mut improvements = vec![(0, best_key)];
    let mut rejected = 0;
    if n < 2 {
        return RunOutcome {
            best_bits,
            best_key,
            rejected,
            improvements,
        };
    }
    let value = |k: (u64, u64)| k.0 as f64 / k.1 as f64;
    let cooling = if budget > 1 {
        (END_TEMPERATURE / START_TEMPERATURE).powf(1.0 / (budget - 1) as f64)
    } else {
        1.0
    };
    let mut temperature = START_TEMPERATURE;

    for iteration in 1..=budget {
        let i = stream.gen_range(1..n);
        let mut touched = vec![i];
        if stream.gen_bool(0.5) {
            // swap: pair i with an interior position holding the other value
            let j = stream.gen_range(1..n);
            if j != i && state.bits[j] != state.bits[i] {
                touched.push(j);
            }
        }
        for &t in &touched {
            state.flip(t);
        }
        if !spec.dense_enough(state.l1, n) {
            for &t in &touched {
                state.flip(t);
            }
            rejected += 1;
            temperature *= cooling;
            continue;
        }
        state.refresh_height();
        let candidate = state.key(spec.objective, n);
        let delta = value(candidate) - value(current);
        let accept = delta <= 0.0 || stream.gen::<f64>() < (-delta / temperature).exp();
        if accept {
            current = candidate;
            if less(candidate, best_key) {
                best_key = candidate;
                best_bits.clone_from(&state.bits);
                improvements.push((iteration, best_key));
            }
        } else {
            for &t in &touched {
                state.flip(t);
            }
            state.refresh_height();
            rejected += 1;
        }
        temperature *= cooling;
    }
    RunOutcome {
        best_bits,
        best_key,
        rejected,
        improvements,
    }
}

/// Per-restart budgets: an even split, remainder to the earliest restarts;
/// restarts with no budget are dropped except the all-ones one.
fn budgets(total: u64, restarts: usize) -> Vec<u64> {
    let r = restarts as u64;
    (0..r)
        .map(|i| total / r + u64::from(i < total % r))
        .enumerate()
        .filter(|&(i, b)| i == 0 || b > 0)
        .map(|(_, b)| b)
        .collect()
}

fn search_degree(spec: &SearchSpec, n: usize) -> (DegreeBest, SearchMetadata) {
    let plan = budgets(spec.iteration_budget, spec.restarts);
    let degree_seed = rng::derive_seed(spec.seed, n as u64);
    let outcomes: Vec<RunOutcome> = plan
        .par_iter()
        .enumerate()
        .map(|(r, &budget)| {
            let mut stream = rng::stream(degree_seed, r as u64);
            let start = if r == 0 {
                vec![1; n + 1]
            } else {
                random_start(spec, n, &mut stream)
            };
            anneal(spec, n, start, budget, &mut stream)
        })
        .collect();

    let mut metadata = SearchMetadata {
        seed: spec.seed,
        ..SearchMetadata::default()
    };
    let mut offset = 0;
    let mut best: Option<(usize, (u64, u64))> = None;
    let mut events: Vec<(u64, (u64, u64))> = Vec::new();
    for (r, (outcome, &budget)) in outcomes.iter().zip(&plan).enumerate() {
        if best.is_none_or(|(_, k)| less(outcome.best_key, k)) {
            best = Some((r, outcome.best_key));
        }
        events.extend(outcome.improvements.iter().map(|&(it, k)| (offset + it, k)));
        metadata.rejected_moves += outcome.rejected;
        metadata.iterations += budget;
        metadata.evaluated += budget + 1;
        offset += budget;
    }
    let mut running: Option<(u64, u64)> = None;
    for (iteration, key) in events {
        if running.is_none_or(|k| less(key, k)) {
            running = Some(key);
            metadata.trajectory.push(TrajectoryPoint {
                degree: n,
                iteration,
                objective: Rational::new(key.0, key.1),
            });
        }
    }
    let (r, _) = best.expect("at least one restart");
    let poly = NewmanPolynomial::from_bits(outcomes[r].best_bits.clone()).expect("p_N = 1 preserved");
    let report = metrics(&poly);
    (
        DegreeBest {
            degree: n,
            best: poly,
            report,
            candidates_examined: metadata.evaluated,
        },
        metadata,
    )
}

/// Randomized search; never returns a candidate below the density floor
/// and is deterministic given the seed.
pub fn local_search(spec: &SearchSpec) -> Result<SearchResult> {
    spec.validate()?;
    if spec.mode != super::SearchMode::LocalSearch {
        return Err(Error::param("local_search needs mode local_search"));
    }
    let mut table = Vec::new();
    let mut metadata = SearchMetadata {
        seed: spec.seed,
        ..SearchMetadata::default()
    };
    for n in spec.degrees() {
        let (row, meta) = search_degree(spec, n);
        metadata.iterations += meta.iterations;
        metadata.evaluated += meta.evaluated;
        metadata.rejected_moves += meta.rejected_moves;
        metadata.trajectory.extend(meta.trajectory);
        table.push(row);
    }
    SearchResult::assemble(spec, table, metadata)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::exhaustive_search;
    use num_rational::Ratio;

    #[test]
    fn incremental_square_tracks_full_square() {
        let mut state = State::new(vec![1, 0, 1, 1, 0, 0, 1]);
        for &i in &[1usize, 3, 4, 1, 5, 2] {
            state.flip(i);
            state.refresh_height();
            let fresh = State::new(state.bits.clone());
            assert_eq!(state.square, fresh.square);
            assert_eq!((state.l1, state.height), (fresh.l1, fresh.height));
        }
    }

    #[test]
    fn zero_budget_returns_all_ones() {
        for n in [5usize, 40, 200] {
            let r = local_search(&SearchSpec::local(n, n, 0, 1)).unwrap();
            assert_eq!(r.best, NewmanPolynomial::all_ones(n));
            assert_eq!(r.report.product, Ratio::new(n as u64, n as u64 + 1));
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        let spec = SearchSpec::local(20, 24, 3_000, 99);
        let a = local_search(&spec).unwrap();
        let b = local_search(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn density_floor_holds() {
        let mut spec = SearchSpec::local(30, 30, 5_000, 4);
        spec.density_floor = Ratio::new(4, 5);
        let r = local_search(&spec).unwrap();
        assert!(5 * r.report.l1 >= 4 * 30);
    }

    #[test]
    fn matches_exhaustive_at_degree_12() {
        let exact = exhaustive_search(&SearchSpec::exhaustive(12, 12)).unwrap();
        let found = local_search(&SearchSpec::local(12, 12, 100_000, 2024)).unwrap();
        assert!(found.report.product >= exact.report.product);
        assert_eq!(found.report.product, exact.report.product);
    }

    #[test]
    fn budget_split() {
        assert_eq!(budgets(10, 4), vec![3, 3, 2, 2]);
        assert_eq!(budgets(2, 4), vec![1, 1]);
        assert_eq!(budgets(0, 4), vec![0]);
    }
}
