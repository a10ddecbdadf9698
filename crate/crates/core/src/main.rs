use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use newman_core::concentration::amplification;
use newman_core::experiment::{emit_results, run_campaign, trials_csv, CampaignConfig, OutputFormat, TrialRecord};
use newman_core::rational::{format_ratio, parse_ratio, Rational};
use newman_core::search::{run_search, verify_hypothesis, Objective, SearchMode, SearchSpec};
use newman_core::sparsifier::DEFAULT_ALPHA_EXPONENT;
use newman_core::{
    bad_event_e_bound, c_epsilon, choose_epsilon, metrics, parse_polynomial, square, tail_bound, ConcentrationQuery,
    Error, NewmanPolynomial, PolyFormat, Result, SparsifyConfig, Sparsifier,
};

#[derive(Parser)]
#[command(name = "newman", version, about = "Squares, ratios and random sparsification of Newman polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (or directory for `search` and `experiment`); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<OutputFormat>,
}

#[derive(Args, Clone)]
struct PolyInput {
    /// Polynomial text, e.g. `0,3,4` or `1011`.
    #[arg(long, conflicts_with = "file")]
    poly: Option<String>,
    /// File holding the polynomial on its first non-comment line.
    #[arg(long)]
    file: Option<PathBuf>,
    /// exponent_list or bitstring.
    #[arg(long, default_value = "exponent_list")]
    input_format: PolyFormat,
}

impl PolyInput {
    fn load(&self) -> Result<NewmanPolynomial> {
        let text = match (&self.poly, &self.file) {
            (Some(text), _) => text.clone(),
            (None, Some(path)) => {
                let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                raw.lines()
                    .map(str::trim)
                    .find(|l| !l.is_empty() && !l.starts_with('#'))
                    .unwrap_or("")
                    .to_string()
            }
            (None, None) => return Err(Error::param("give --poly or --file")),
        };
        parse_polynomial(&text, self.input_format)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Coefficients of p².
    Square {
        #[command(flatten)]
        input: PolyInput,
        #[command(flatten)]
        common: Common,
    },
    /// ‖p‖₁, ‖p²‖∞, R(p) and R(p)·deg p, optionally checked against (c₀, ρ).
    Ratio {
        #[command(flatten)]
        input: PolyInput,
        #[arg(long, value_parser = parse_ratio)]
        c0: Option<Rational>,
        #[arg(long, value_parser = parse_ratio)]
        rho: Option<Rational>,
        #[command(flatten)]
        common: Common,
    },
    /// c_ε, tail bounds and the ε chosen from (ρ, ρ′).
    Chernoff {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        mean: Option<f64>,
        #[arg(long, value_parser = parse_ratio)]
        rho: Option<Rational>,
        #[arg(long, value_parser = parse_ratio)]
        rho_prime: Option<Rational>,
        /// Degree for the bound on the event E.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, value_parser = parse_ratio, default_value = "1")]
        c0: Rational,
        #[arg(long, value_parser = parse_ratio, default_value = "1/10")]
        alpha_exponent: Rational,
        #[command(flatten)]
        common: Common,
    },
    /// Seeded sparsification trials; one CSV row per trial.
    Sparsify {
        #[command(flatten)]
        input: PolyInput,
        #[arg(long, value_parser = parse_ratio)]
        alpha_exponent: Option<Rational>,
        #[arg(long, conflicts_with_all = ["rho", "rho_prime"])]
        epsilon: Option<f64>,
        #[arg(long, value_parser = parse_ratio, requires = "rho_prime")]
        rho: Option<Rational>,
        #[arg(long, value_parser = parse_ratio, requires = "rho")]
        rho_prime: Option<Rational>,
        /// Density constant; defaults to min(‖p‖₁/N, 1).
        #[arg(long, value_parser = parse_ratio)]
        c0: Option<Rational>,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Minimize R(p)·deg p over a degree range.
    Search {
        #[arg(long)]
        min_degree: usize,
        #[arg(long)]
        max_degree: usize,
        #[arg(long, default_value = "exhaustive")]
        mode: SearchMode,
        #[arg(long, default_value = "min_product")]
        objective: Objective,
        /// Density floor c₀.
        #[arg(long, value_parser = parse_ratio, default_value = "0")]
        floor: Rational,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long)]
        no_reversal: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a campaign described by a key = value config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io(Path::new("<stdout>"), e))
        }
    }
}

fn pretty(value: &impl serde::Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn cmd_square(input: &PolyInput, common: &Common) -> Result<()> {
    let p = input.load()?;
    let sq = square(&p);
    let text = match common.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => pretty(&json!({
            "degree": p.degree(),
            "l1": p.l1(),
            "coefficients": sq.coefficients(),
        }))?,
        OutputFormat::Csv => {
            let mut s = String::from("k,coefficient\n");
            for (k, c) in sq.coefficients().iter().enumerate() {
                s.push_str(&format!("{k},{c}\n"));
            }
            s
        }
    };
    emit(common.out.as_deref(), &text)
}

fn cmd_ratio(input: &PolyInput, c0: Option<Rational>, rho: Option<Rational>, common: &Common) -> Result<()> {
    let p = input.load()?;
    let mut value = serde_json::to_value(metrics(&p))?;
    if let (Some(c0), Some(rho)) = (c0, rho) {
        value["hypothesis"] = serde_json::to_value(verify_hypothesis(&p, &c0, &rho)?)?;
    }
    emit(common.out.as_deref(), &pretty(&value)?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_chernoff(
    epsilon: Option<f64>,
    mean: Option<f64>,
    rho: Option<Rational>,
    rho_prime: Option<Rational>,
    n: Option<u64>,
    c0: Rational,
    alpha_exponent: Rational,
    common: &Common,
) -> Result<()> {
    let mut out = serde_json::Map::new();
    let chosen = match (rho, rho_prime) {
        (Some(rho), Some(rho_prime)) => {
            let choice = choose_epsilon(&rho, &rho_prime)?;
            let eps = choice.epsilon;
            out.insert("choice".into(), serde_json::to_value(choice)?);
            Some(eps)
        }
        (None, None) => None,
        _ => return Err(Error::param("--rho and --rho-prime go together")),
    };
    let eps = epsilon.or(chosen);
    if let Some(eps) = eps {
        out.insert("epsilon".into(), json!(eps));
        out.insert("c_epsilon".into(), json!(c_epsilon(eps)?));
        out.insert("amplification".into(), json!(amplification(eps)));
        if let Some(mean) = mean {
            let bound = tail_bound(&ConcentrationQuery::new(eps, mean)?);
            out.insert("mean".into(), json!(mean));
            out.insert("tail_bound".into(), serde_json::to_value(bound)?);
        }
        if let Some(n) = n {
            let bound = bad_event_e_bound(n, &c0, eps, &alpha_exponent)?;
            out.insert(
                "bad_event_e".into(),
                json!({
                    "n": n,
                    "c0": format_ratio(&c0),
                    "alpha_exponent": format_ratio(&alpha_exponent),
                    "raw": bound.raw,
                    "clamped": bound.clamped,
                }),
            );
        }
    } else if mean.is_some() || n.is_some() {
        return Err(Error::param("tail bounds need --epsilon or --rho/--rho-prime"));
    }
    emit(common.out.as_deref(), &pretty(&Value::Object(out))?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sparsify(
    input: &PolyInput,
    alpha_exponent: Option<Rational>,
    epsilon: Option<f64>,
    rho: Option<Rational>,
    rho_prime: Option<Rational>,
    c0: Option<Rational>,
    trials: u64,
    common: &Common,
) -> Result<()> {
    let p = input.load()?;
    if p.degree() == 0 {
        return Err(Error::param("sparsify needs degree ≥ 1"));
    }
    let seed = common.seed.unwrap_or(0);
    let c0 = c0.unwrap_or_else(|| {
        let n = p.degree() as u64;
        Rational::new((p.l1() as u64).min(n), n)
    });
    let mut config = match (epsilon, rho, rho_prime) {
        (Some(eps), _, _) => SparsifyConfig::new(eps, c0, seed)?,
        (None, Some(rho), Some(rho_prime)) => SparsifyConfig::from_rho(rho, rho_prime, c0, seed)?,
        _ => return Err(Error::param("give --epsilon or --rho with --rho-prime")),
    };
    config = config.with_alpha_exponent(
        alpha_exponent.unwrap_or_else(|| Rational::new(DEFAULT_ALPHA_EXPONENT.0, DEFAULT_ALPHA_EXPONENT.1)),
    )?;
    let sparsifier = Sparsifier::new(&p, &config)?;
    let records: Vec<TrialRecord> = (0..trials)
        .map(|i| TrialRecord::from_trial(&sparsifier.sample(i), &sparsifier))
        .collect();
    let text = match common.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => trials_csv(&records),
        OutputFormat::Json => pretty(&json!({
            "config": config,
            "alpha": sparsifier.alpha().value(),
            "trials": records,
        }))?,
    };
    emit(common.out.as_deref(), &text)
}

fn cmd_search(spec: SearchSpec, common: &Common) -> Result<()> {
    let result = run_search(&spec)?;
    let json_text = pretty(&json!({ "spec": spec, "result": result }))?;
    match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            emit(Some(&dir.join("search_result.json")), &json_text)?;
            emit(Some(&dir.join("degree_table.csv")), &result.degree_table_csv())
        }
        None => match common.format.unwrap_or(OutputFormat::Json) {
            OutputFormat::Json => emit(None, &json_text),
            OutputFormat::Csv => emit(None, &result.degree_table_csv()),
        },
    }
}

fn cmd_experiment(config_path: &Path, workers: Option<usize>, common: &Common) -> Result<()> {
    let mut config = CampaignConfig::load(config_path)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(format) = common.format {
        config.format = format;
    }
    if let Some(out) = &common.out {
        config.output_dir = Some(out.clone());
    }
    if workers.is_some() {
        config.workers = workers;
    }
    config.validate()?;
    let dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("results"));
    let summary = run_campaign(&config)?;
    for path in emit_results(&summary, &dir, config.format)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Square { input, common } => cmd_square(&input, &common),
        Command::Ratio { input, c0, rho, common } => cmd_ratio(&input, c0, rho, &common),
        Command::Chernoff {
            epsilon,
            mean,
            rho,
            rho_prime,
            n,
            c0,
            alpha_exponent,
            common,
        } => cmd_chernoff(epsilon, mean, rho, rho_prime, n, c0, alpha_exponent, &common),
        Command::Sparsify {
            input,
            alpha_exponent,
            epsilon,
            rho,
            rho_prime,
            c0,
            trials,
            common,
        } => cmd_sparsify(&input, alpha_exponent, epsilon, rho, rho_prime, c0, trials, &common),
        Command::Search {
            min_degree,
            max_degree,
            mode,
            objective,
            floor,
            budget,
            restarts,
            no_reversal,
            common,
        } => {
            let spec = SearchSpec {
                min_degree,
                max_degree,
                density_floor: floor,
                objective,
                mode,
                seed: common.seed.unwrap_or(0),
                iteration_budget: budget,
                restarts,
                use_reversal_symmetry: !no_reversal,
            };
            cmd_search(spec, &common)
        }
        Command::Experiment { config, workers, common } => cmd_experiment(&config, workers, &common),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
