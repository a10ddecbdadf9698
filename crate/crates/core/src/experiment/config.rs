//! Campaign configuration and its `key = value` text form.
//!
//! ```text
//! # comments start with '#'
//! family = all_ones            # or search_best, or from_file
//! family_file = dense.txt      # exponent lists, one polynomial per line
//! degrees = 2^10, 2^14, 2^18
//! trials = 1000
//! alpha_exponent = 1/10
//! rho = 8/9
//! rho_prime = 0.95
//! seed = 42
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::Ratio;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational::{format_ratio, parse_ratio, Rational};
use crate::sparsifier::DEFAULT_ALPHA_EXPONENT;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    AllOnes,
    /// Exponent-list polynomials, one per line; the one of degree N is used.
    FromFile(PathBuf),
    /// Best candidate of a seeded local search at each degree.
    SearchBest { budget: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::param(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub family: Family,
    pub degree_ladder: Vec<u64>,
    pub trials_per_degree: u64,
    pub alpha_exponent: Rational,
    /// Explicit ε; otherwise chosen from (ρ, ρ′).
    pub epsilon: Option<f64>,
    pub rho: Option<Rational>,
    pub rho_prime: Option<Rational>,
    /// Density constant; defaults per degree to min(‖p‖₁/N, 1).
    pub c0: Option<Rational>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub format: OutputFormat,
    /// Worker threads; `None` uses the global pool. Never affects output.
    pub workers: Option<usize>,
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000;

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            family: Family::AllOnes,
            degree_ladder: Vec::new(),
            trials_per_degree: 1,
            alpha_exponent: Ratio::new(DEFAULT_ALPHA_EXPONENT.0, DEFAULT_ALPHA_EXPONENT.1),
            epsilon: None,
            rho: None,
            rho_prime: None,
            c0: None,
            seed: 0,
            output_dir: None,
            format: OutputFormat::Csv,
            workers: None,
        }
    }
}

/// Parses `1024`, `2^10` or `1e4`.
pub fn parse_degree(text: &str) -> Result<u64> {
    let text = text.trim();
    let bad = || Error::param(format!("cannot parse degree {text:?}"));
    if let Some((base, exp)) = text.split_once('^') {
        let base: u64 = base.trim().parse().map_err(|_| bad())?;
        let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
        return base.checked_pow(exp).ok_or_else(bad);
    }
    if let Some((mantissa, exp)) = text.split_once(['e', 'E']) {
        let mantissa: u64 = mantissa.trim().parse().map_err(|_| bad())?;
        let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
        return 10u64.checked_pow(exp).and_then(|p| p.checked_mul(mantissa)).ok_or_else(bad);
    }
    text.parse().map_err(|_| bad())
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_degree == 0 {
            return Err(Error::param("trials_per_degree must be at least 1"));
        }
        if self.degree_ladder.contains(&0) {
            return Err(Error::param("ladder degrees must be positive"));
        }
        if self.degree_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("degree ladder must be strictly increasing"));
        }
        if self.epsilon.is_none() && (self.rho.is_none() || self.rho_prime.is_none()) {
            return Err(Error::param("give epsilon or both rho and rho_prime"));
        }
        if self.workers == Some(0) {
            return Err(Error::param("workers must be positive"));
        }
        Ok(())
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config = CampaignConfig::default();
        let mut family_kind = String::from("all_ones");
        let mut family_file: Option<PathBuf> = None;
        let mut search_budget = DEFAULT_SEARCH_BUDGET;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("expected key = value, got {line:?}"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let wrap = |e: Error| Error::Config {
                line: line_no,
                message: e.to_string(),
            };
            let int = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| wrap(Error::param(format!("{key}: not an integer: {v:?}"))))
            };
            match key {
                "family" => {
                    if let Some(path) = value.strip_prefix("from_file:") {
                        family_kind = "from_file".into();
                        family_file = Some(base_dir.join(path.trim()));
                    } else {
                        family_kind = value.to_string();
                    }
                }
                "family_file" => family_file = Some(base_dir.join(value)),
                "search_budget" => search_budget = int(value)?,
                "degrees" | "degree_ladder" => {
                    config.degree_ladder = value
                        .split(',')
                        .map(parse_degree)
                        .collect::<Result<Vec<_>>>()
                        .map_err(wrap)?;
                }
                "trials" | "trials_per_degree" => config.trials_per_degree = int(value)?,
                "alpha_exponent" => config.alpha_exponent = parse_ratio(value).map_err(wrap)?,
                "epsilon" => {
                    config.epsilon = Some(value.parse().map_err(|_| {
                        wrap(Error::param(format!("epsilon: not a number: {value:?}")))
                    })?)
                }
                "rho" => config.rho = Some(parse_ratio(value).map_err(wrap)?),
                "rho_prime" => config.rho_prime = Some(parse_ratio(value).map_err(wrap)?),
                "c0" => config.c0 = Some(parse_ratio(value).map_err(wrap)?),
                "seed" => config.seed = int(value)?,
                "out" | "output_dir" => config.output_dir = Some(base_dir.join(value)),
                "format" => config.format = value.parse().map_err(wrap)?,
                "workers" => config.workers = Some(int(value)? as usize),
                other => {
                    return Err(Error::Config {
                        line: line_no,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        config.family = match family_kind.as_str() {
            "all_ones" => Family::AllOnes,
            "search_best" => Family::SearchBest {
                budget: search_budget,
            },
            "from_file" => Family::FromFile(
                family_file.ok_or_else(|| Error::param("family from_file needs family_file"))?,
            ),
            other => return Err(Error::param(format!("unknown family {other:?}"))),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Everything that determines the results, in a fixed order. Worker
    /// count and output location are excluded.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let family = match &self.family {
            Family::AllOnes => "all_ones".to_string(),
            Family::FromFile(path) => format!(
                "from_file:{}",
                path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
            ),
            Family::SearchBest { budget } => format!("search_best:{budget}"),
        };
        let opt_ratio = |r: &Option<Rational>| r.as_ref().map(format_ratio).unwrap_or_else(|| "-".into());
        let ladder: Vec<String> = self.degree_ladder.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "family = {family}");
        let _ = writeln!(out, "degrees = {}", ladder.join(","));
        let _ = writeln!(out, "trials = {}", self.trials_per_degree);
        let _ = writeln!(out, "alpha_exponent = {}", format_ratio(&self.alpha_exponent));
        let _ = writeln!(
            out,
            "epsilon = {}",
            self.epsilon.map(|e| format!("{e:?}")).unwrap_or_else(|| "-".into())
        );
        let _ = writeln!(out, "rho = {}", opt_ratio(&self.rho));
        let _ = writeln!(out, "rho_prime = {}", opt_ratio(&self.rho_prime));
        let _ = writeln!(out, "c0 = {}", opt_ratio(&self.c0));
        let _ = writeln!(out, "seed = {}", self.seed);
        out
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}
