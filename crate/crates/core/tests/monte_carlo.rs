//! Seeded Monte Carlo checks against the exact means and the Chernoff bounds.

use newman_core::experiment::{run_campaign, summary_csv, trials_csv, CampaignConfig};
use newman_core::rational::Rational;
use newman_core::search::{run_search, SearchSpec};
use newman_core::{choose_epsilon, tail_bound, ConcentrationQuery, NewmanPolynomial, Sparsifier, SparsifyConfig};

fn se(freq: f64, n: f64) -> f64 {
    (freq * (1.0 - freq) / n).sqrt()
}

#[test]
fn sample_mean_and_event_e_at_1024() {
    let p = NewmanPolynomial::all_ones(1024);
    let eps = choose_epsilon(&Rational::new(8, 9), &Rational::new(19, 20)).unwrap().epsilon;
    let config = SparsifyConfig::new(eps, Rational::from_integer(1), 77).unwrap();
    let sparsifier = Sparsifier::new(&p, &config).unwrap();
    assert_eq!(sparsifier.alpha().exact(), Some(&Rational::new(1, 2)));

    let trials = 10_000;
    let samples: Vec<_> = (0..trials).map(|t| sparsifier.sample(t)).collect();
    let mean = samples.iter().map(|s| s.q_l1 as f64).sum::<f64>() / trials as f64;
    let sd = (1025.0f64 * 0.25).sqrt();
    assert!((mean - 512.5).abs() <= 4.0 * sd / 100.0, "mean {mean}");

    let freq_e = samples.iter().filter(|s| s.flags.e).count() as f64 / trials as f64;
    let bound = tail_bound(&ConcentrationQuery::new(eps, 512.5).unwrap()).clamped;
    assert!(freq_e <= bound + 3.0 * se(freq_e, trials as f64));
}

#[test]
fn concentration_improves_with_degree() {
    let config = CampaignConfig {
        degree_ladder: vec![1 << 10, 1 << 14],
        trials_per_degree: 1000,
        rho: Some(Rational::new(8, 9)),
        rho_prime: Some(Rational::new(19, 20)),
        seed: 21,
        ..CampaignConfig::default()
    };
    let summary = run_campaign(&config).unwrap();
    let (a, b) = (&summary.runs[0].summary, &summary.runs[1].summary);
    let tol = 3.0 * (a.mc_se_e.powi(2) + b.mc_se_e.powi(2)).sqrt();
    assert!(b.freq_e <= a.freq_e + tol, "{} vs {}", b.freq_e, a.freq_e);
    for row in [a, b] {
        assert!(row.freq_e <= row.bound_e_clamped + 3.0 * row.mc_se_e);
        assert_eq!(row.count_clean + (row.trials - row.count_clean), 1000);
        assert!((0.0..=1.0).contains(&row.freq_clean));
    }
}

/// Every summary statistic recomputed from the trial table matches.
#[test]
fn summary_agrees_with_trial_table() {
    let config = CampaignConfig {
        degree_ladder: vec![64, 512],
        trials_per_degree: 300,
        epsilon: Some(0.15),
        seed: 8,
        ..CampaignConfig::default()
    };
    let summary = run_campaign(&config).unwrap();
    let table = summary_csv(&summary);
    let header: Vec<&str> = table.lines().next().unwrap().split(',').collect();
    let col = |row: &str, name: &str| -> String {
        let i = header.iter().position(|h| *h == name).unwrap();
        row.split(',').nth(i).unwrap().to_string()
    };
    for (run, row) in summary.runs.iter().zip(table.lines().skip(1)) {
        let csv = trials_csv(&run.trials);
        let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
        let n = rows.len() as f64;
        let flag_e = rows.iter().filter(|r| r[9] == "1").count();
        let any_ek = rows.iter().filter(|r| r[11] != "0").count();
        let clean = rows
            .iter()
            .filter(|r| !r[3].is_empty() && r[9] == "0" && r[10] == "0" && r[11] == "0")
            .count();
        let products: Vec<f64> = rows
            .iter()
            .filter(|r| !r[7].is_empty())
            .map(|r| r[7].parse::<u64>().unwrap() as f64 / r[8].parse::<u64>().unwrap() as f64)
            .collect();
        let product_sum: f64 = products.iter().sum();
        assert_eq!(col(row, "trials"), rows.len().to_string());
        assert_eq!(col(row, "freq_E"), format!("{:.12}", flag_e as f64 / n));
        assert_eq!(col(row, "freq_Ek"), format!("{:.12}", any_ek as f64 / n));
        assert_eq!(col(row, "freq_clean"), format!("{:.12}", clean as f64 / n));
        assert_eq!(col(row, "mean_product_den_proxy"), products.len().to_string());
        assert_eq!(col(row, "mean_product"), format!("{:.12}", product_sum / products.len() as f64));
    }
}

#[test]
fn local_search_reproduces_exhaustive_minimum() {
    let exhaustive = run_search(&SearchSpec::exhaustive(8, 14)).unwrap();
    for row in &exhaustive.degree_table {
        let hits = (0..10u64)
            .filter(|&seed| {
                let spec = SearchSpec::local(row.degree, row.degree, 50_000, seed);
                run_search(&spec).unwrap().report.product == row.report.product
            })
            .count();
        assert!(hits >= 9, "degree {}: {hits}/10", row.degree);
    }
}
