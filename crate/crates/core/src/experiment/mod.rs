//! Seeded sparsification campaigns over a ladder of degrees.

mod config;
mod output;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{parse_degree, CampaignConfig, Family, OutputFormat, DEFAULT_SEARCH_BUDGET};
pub use output::{emit_results, summary_csv, trials_csv, SUMMARY_COLUMNS, TRIAL_COLUMNS};

use crate::concentration::{bad_event_e_bound, choose_epsilon, tail_bound, ConcentrationQuery};
use crate::error::{Error, Result};
use crate::poly::{parse_polynomial, NewmanPolynomial, PolyFormat};
use crate::rational::{to_f64, Rational};
use crate::rng;
use crate::search::{local_search, SearchSpec};
use crate::sparsifier::{Sparsifier, SparsifyConfig, SparsifyTrial};

/// Compact per-trial record; the mask itself is not retained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub l1_q: u64,
    pub deg_q: Option<u64>,
    pub height_q2: u64,
    #[serde(skip)]
    pub ratio: Option<Rational>,
    #[serde(skip)]
    pub product: Option<Rational>,
    pub flag_e: bool,
    pub flag_d: bool,
    pub num_ek: u64,
    pub first_ek_index: Option<u64>,
    /// Two-sided ‖q‖₁ deviation, diagnostic only.
    pub l1_two_sided: bool,
    /// Exact `R(q)·deg q ≤ (1+ε)/(1−ε)²·R(p)·deg p`, on clean trials.
    pub implication_holds: Option<bool>,
}

impl TrialRecord {
    pub fn from_trial(trial: &SparsifyTrial, sparsifier: &Sparsifier<'_>) -> Self {
        let q = trial.q_metrics.as_ref();
        let implication_holds = trial
            .is_clean()
            .then(|| sparsifier.conclusion(trial).map(|c| c.holds).unwrap_or(false));
        Self {
            trial_index: trial.trial_index,
            seed: trial.trial_seed,
            l1_q: trial.q_l1,
            deg_q: q.map(|m| m.degree),
            height_q2: q.map_or(0, |m| m.height),
            ratio: q.map(|m| m.ratio),
            product: q.map(|m| m.product),
            flag_e: trial.flags.e,
            flag_d: trial.flags.d,
            num_ek: trial.flags.e_k_indices.len() as u64,
            first_ek_index: trial.flags.e_k_indices.first().map(|&k| k as u64),
            l1_two_sided: trial.flags.l1_two_sided,
            implication_holds,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.deg_q.is_some() && !self.flag_e && !self.flag_d && self.num_ek == 0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    pub count: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// Summation runs in the iterator's order, so the result is a pure
    /// function of the per-trial values.
    pub fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut s = Stats {
            count: 0,
            mean: f64::NAN,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        };
        let mut sum = 0.0;
        for v in values {
            s.count += 1;
            sum += v;
            s.min = s.min.min(v);
            s.max = s.max.max(v);
        }
        if s.count > 0 {
            s.mean = sum / s.count as f64;
        } else {
            s.min = f64::NAN;
            s.max = f64::NAN;
        }
        s
    }
}

/// One row per ladder degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeSummary {
    pub degree: u64,
    pub alpha: f64,
    pub epsilon: f64,
    pub c0: String,
    pub trials: u64,
    pub count_e: u64,
    pub count_ek: u64,
    pub count_d: u64,
    pub count_clean: u64,
    pub count_empty: u64,
    pub count_l1_two_sided: u64,
    pub freq_e: f64,
    pub freq_ek: f64,
    pub freq_d: f64,
    pub freq_clean: f64,
    /// Normal-approximation standard error of `freq_e`.
    pub mc_se_e: f64,
    /// Over nonempty trials.
    pub l1_q: Stats,
    pub deg_q: Stats,
    pub product: Stats,
    /// ‖q‖₁ / deg q over clean trials.
    pub sparsity_clean: Stats,
    /// `2·exp(−c_ε·c₀·N^{1−a})`.
    pub bound_e_raw: f64,
    pub bound_e_clamped: f64,
    /// `2·exp(−c_ε·α‖p‖₁)`, the bound at the exact mean.
    pub tail_bound_exact_mean: f64,
    pub parent_product: f64,
    pub implication_failures: u64,
}

impl DegreeSummary {
    #[allow(clippy::too_many_arguments)]
    pub fn from_records(
        degree: u64,
        alpha: f64,
        epsilon: f64,
        c0: &Rational,
        alpha_exponent: &Rational,
        parent_l1: u64,
        parent_product: f64,
        records: &[TrialRecord],
    ) -> Result<Self> {
        let trials = records.len() as u64;
        let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count() as u64;
        let count_e = count(&|r| r.flag_e);
        let count_ek = count(&|r| r.num_ek > 0);
        let count_d = count(&|r| r.flag_d);
        let count_clean = count(&|r| r.is_clean());
        let freq = |c: u64| if trials == 0 { 0.0 } else { c as f64 / trials as f64 };
        let freq_e = freq(count_e);
        let nonempty = || records.iter().filter(|r| r.deg_q.is_some());
        let bound = bad_event_e_bound(degree, c0, epsilon, alpha_exponent)?;
        let exact_mean = tail_bound(&ConcentrationQuery::new(epsilon, alpha * parent_l1 as f64)?);
        Ok(Self {
            degree,
            alpha,
            epsilon,
            c0: crate::rational::format_ratio(c0),
            trials,
            count_e,
            count_ek,
            count_d,
            count_clean,
            count_empty: count(&|r| r.deg_q.is_none()),
            count_l1_two_sided: count(&|r| r.l1_two_sided),
            freq_e,
            freq_ek: freq(count_ek),
            freq_d: freq(count_d),
            freq_clean: freq(count_clean),
            mc_se_e: if trials == 0 { 0.0 } else { (freq_e * (1.0 - freq_e) / trials as f64).sqrt() },
            l1_q: Stats::of(nonempty().map(|r| r.l1_q as f64)),
            deg_q: Stats::of(nonempty().map(|r| r.deg_q.unwrap_or(0) as f64)),
            product: Stats::of(nonempty().filter_map(|r| r.product.as_ref().map(to_f64))),
            sparsity_clean: Stats::of(
                records
                    .iter()
                    .filter(|r| r.is_clean())
                    .map(|r| r.l1_q as f64 / r.deg_q.unwrap_or(1) as f64),
            ),
            bound_e_raw: bound.raw,
            bound_e_clamped: bound.clamped,
            tail_bound_exact_mean: exact_mean.clamped,
            parent_product,
            implication_failures: count(&|r| r.implication_holds == Some(false)),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeRun {
    pub summary: DegreeSummary,
    pub trials: Vec<TrialRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignSummary {
    pub config_text: String,
    pub config_hash: String,
    pub seed: u64,
    pub runs: Vec<DegreeRun>,
}

fn read_family_file(path: &std::path::Path) -> Result<Vec<NewmanPolynomial>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| parse_polynomial(l, PolyFormat::ExponentList))
        .collect()
}

struct FamilySource {
    family: Family,
    from_file: Vec<NewmanPolynomial>,
}

impl FamilySource {
    fn new(family: &Family) -> Result<Self> {
        let from_file = match family {
            Family::FromFile(path) => read_family_file(path)?,
            _ => Vec::new(),
        };
        Ok(Self {
            family: family.clone(),
            from_file,
        })
    }

    fn member(&self, n: u64, config: &CampaignConfig) -> Result<NewmanPolynomial> {
        let degree = n as usize;
        match &self.family {
            Family::AllOnes => Ok(NewmanPolynomial::all_ones(degree)),
            Family::FromFile(path) => self
                .from_file
                .iter()
                .find(|p| p.degree() == degree)
                .cloned()
                .ok_or_else(|| Error::param(format!("{}: no polynomial of degree {n}", path.display()))),
            Family::SearchBest { budget } => {
                let mut spec = SearchSpec::local(degree, degree, *budget, rng::derive_seed(config.seed, n ^ 0x5EA4C));
                if let Some(c0) = config.c0 {
                    spec.density_floor = c0;
                }
                Ok(local_search(&spec)?.best)
            }
        }
    }
}

fn run_degree(n: u64, p: &NewmanPolynomial, config: &CampaignConfig, epsilon: f64) -> Result<DegreeRun> {
    let c0 = match config.c0 {
        Some(c0) => c0,
        None => Rational::new(p.l1() as u64, n).min(Rational::from_integer(1)),
    };
    let mut sparsify = SparsifyConfig::new(epsilon, c0, rng::derive_seed(config.seed, n))?
        .with_alpha_exponent(config.alpha_exponent)?;
    if let (Some(rho), Some(rho_prime)) = (config.rho, config.rho_prime) {
        sparsify.rho = Some(rho);
        sparsify.rho_prime = Some(rho_prime);
        sparsify.validate()?;
    }
    let sparsifier = Sparsifier::new(p, &sparsify)?;
    let trials: Vec<TrialRecord> = (0..config.trials_per_degree)
        .into_par_iter()
        .map(|t| TrialRecord::from_trial(&sparsifier.sample(t), &sparsifier))
        .collect();
    let summary = DegreeSummary::from_records(
        n,
        sparsifier.alpha().value(),
        epsilon,
        &c0,
        &config.alpha_exponent,
        sparsifier.parent_report().l1,
        to_f64(&sparsifier.parent_report().product),
        &trials,
    )?;
    Ok(DegreeRun { summary, trials })
}

/// Runs every ladder degree; the result depends only on the config (and
/// its master seed), never on the number of workers.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignSummary> {
    config.validate()?;
    let epsilon = match config.epsilon {
        Some(e) => e,
        None => {
            let (rho, rho_prime) = config
                .rho
                .zip(config.rho_prime)
                .ok_or_else(|| Error::param("give epsilon or rho and rho_prime"))?;
            choose_epsilon(&rho, &rho_prime)?.epsilon
        }
    };
    let source = FamilySource::new(&config.family)?;
    let work = || -> Result<Vec<DegreeRun>> {
        config
            .degree_ladder
            .iter()
            .map(|&n| {
                let p = source.member(n, config)?;
                run_degree(n, &p, config, epsilon)
            })
            .collect()
    };
    let runs = match config.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::param(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    Ok(CampaignSummary {
        config_text: config.canonical_text(),
        config_hash: config.hash(),
        seed: config.seed,
        runs,
    })
}
