//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::TAU;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rfiqkd::channel::{analytic_observables, analytic_qber, analytic_yield, simulate_rounds, ChannelModel, DriftProcess};
use rfiqkd::config::ProtocolConfig;
use rfiqkd::decoy::{asymptotic_rate_from_observables, e1zz_upper_bound, y1_lower_bound, METHOD2_CONSTANT};
use rfiqkd::finite::{delta, finite_key_rate_from_observables, FiniteKeyContext};
use rfiqkd::harness::{derive_seed, run_oracle_validation, Mode, RunConfig};
use rfiqkd::{BasisPair, Intensity};

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn analytic_rate(km: f64, beta: f64) -> f64 {
    let cfg = ProtocolConfig::default();
    let obs = analytic_observables(&cfg, &ChannelModel::default().with_length(km), beta);
    asymptotic_rate_from_observables(&obs, &cfg).unwrap().rate
}

fn beta_invariance() -> Outcome {
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for km in [0.0, 50.0] {
        let rates: Vec<f64> = (0..100).map(|k| analytic_rate(km, TAU * k as f64 / 100.0)).collect();
        let lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(hi - lo);
        detail += &format!("{km} km: R in [{lo:.4e}, {hi:.4e}]; ");
    }
    outcome(worst <= 1e-9, format!("{detail}spread {worst:.3e} (limit 1e-9)"))
}

fn decoy_soundness() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        mode: Mode::Mc,
        sweep_km: vec![0.0, 25.0, 50.0],
        seeds: 50,
        seed: 20_240_101,
        output_dir: dir.path().to_owned(),
        ..RunConfig::default()
    };
    let (r, _) = run_oracle_validation(&config).unwrap();
    let budget = 0.01 * r.evaluated as f64;
    let mut per_km = String::new();
    for km in &config.sweep_km {
        let at: Vec<_> = r.checks.iter().filter(|c| c.length_km == *km && c.checked()).collect();
        let n = |f: fn(&rfiqkd::harness::OracleCheck) -> f64| at.iter().filter(|c| f(c) < 0.0).count();
        per_km += &format!(
            " {km} km y1/e1zz/c1 {}/{}/{};",
            n(|c| c.y1_margin()),
            n(|c| c.e1zz_margin()),
            n(|c| c.c1_margin())
        );
    }
    let pass = r.insufficient == 0
        && [r.y1_violations, r.e1zz_violations, r.c1_violations].iter().all(|&v| v as f64 <= budget);
    outcome(
        pass,
        format!(
            "{} runs; violations y1 {} e1zz {} c1 {} (budget {budget:.1});{per_km}",
            r.evaluated, r.y1_violations, r.e1zz_violations, r.c1_violations
        ),
    )
}

fn golden_values() -> Outcome {
    let y1 = y1_lower_bound(0.0583155, 0.0198813, 8e-5, 0.6, 0.2).unwrap();
    let e1 = e1zz_upper_bound(0.0035, 0.0583155, 8e-5, 0.6, 0.093042).unwrap();
    let d = delta(142_937.0, 1e-5).unwrap();
    let pass = (y1 - 0.09304).abs() <= 1e-5 && (e1 - 5.945e-3).abs() <= 1e-5 && (d - 0.01110).abs() <= 1e-5;
    outcome(pass, format!("y1_lower {y1:.6} e1zz_upper {e1:.6e} delta {d:.6}"))
}

fn zero_rate_distance() -> Outcome {
    let beta = DriftProcess::default().beta_initial;
    let r0 = analytic_rate(0.0, beta);
    let ratio = r0 / 5.474e-3;
    let cross = (0..=2000).map(|k| k as f64 * 0.1).find(|&km| analytic_rate(km, beta) <= 0.0);
    let pass = matches!(cross, Some(km) if (70.0..=95.0).contains(&km)) && (0.5..=2.0).contains(&ratio);
    let cross_text = cross.map_or("none".to_string(), |km| format!("{km:.1}"));
    outcome(pass, format!("R(0 km) = {r0:.4e} ({ratio:.2}x reference 5.474e-3); first zero at {cross_text} km"))
}

fn finite_key_ordering() -> Outcome {
    let cfg = ProtocolConfig::default();
    let beta = DriftProcess::default().beta_initial;
    let segments = [5.0, 50.0, 200.0];
    let mut cutoffs = [None; 3];
    let mut below_asymptotic = true;
    let mut at_0 = 0.0;
    let mut at_25 = f64::NAN;
    for k in 0..=1000 {
        let km = k as f64 * 0.1;
        let obs = analytic_observables(&cfg, &ChannelModel::default().with_length(km), beta);
        let asym = asymptotic_rate_from_observables(&obs, &cfg).unwrap().rate;
        for (s, &seconds) in segments.iter().enumerate() {
            let ctx = FiniteKeyContext::for_segment(&cfg, &obs, seconds, 1e6);
            let r = finite_key_rate_from_observables(&obs, &cfg, &ctx).unwrap().rate();
            below_asymptotic &= if asym > 0.0 { r < asym } else { r == 0.0 };
            if r <= 0.0 && cutoffs[s].is_none() {
                cutoffs[s] = Some(km);
            }
            if s == 0 && k == 0 {
                at_0 = r;
            }
            if s == 0 && k == 250 {
                at_25 = r;
            }
        }
    }
    let obs = analytic_observables(&cfg, &ChannelModel::default(), beta);
    let asym = asymptotic_rate_from_observables(&obs, &cfg).unwrap().rate;
    let huge = FiniteKeyContext {
        n_raw: 1e12,
        m_est: 1e12,
        n_pulses_total: 1e12 / (cfg.intensity_weight(Intensity::Signal) * cfg.p_z * cfg.p_z * obs.y_signal),
        eps: cfg.epsilons(),
    };
    let limit_gap = asym - finite_key_rate_from_observables(&obs, &cfg, &huge).unwrap().rate();
    let ordered = match cutoffs {
        [Some(a), Some(b), Some(c)] => a < b && b < c,
        _ => false,
    };
    let pass = ordered && at_0 > 0.0 && at_25 == 0.0 && below_asymptotic && limit_gap.abs() <= 1e-4;
    outcome(
        pass,
        format!(
            "cutoffs 5/50/200 s at {} km; 5 s: {at_0:.3e} at 0 km, {at_25} at 25 km; finite < asymptotic: {below_asymptotic}; gap at n=1e12 {limit_gap:.2e}",
            cutoffs.map(|c| c.map_or("none".to_string(), |km| format!("{km:.1}"))).join("/")
        ),
    )
}

fn within(observed: f64, expected: f64, trials: u64, k: f64) -> bool {
    let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
    (observed - expected).abs() <= k * sigma
}

fn monte_carlo_agreement() -> Outcome {
    let cfg = ProtocolConfig::default();
    let model = ChannelModel::default();
    let drift = DriftProcess::default();
    let results: Vec<(usize, usize)> = (0..100u64)
        .into_par_iter()
        .map(|run| {
            let (stats, _) = simulate_rounds(&cfg, &model, &drift, derive_seed(7, 0, run, 0)).unwrap();
            let beta = stats.mean_beta().unwrap();
            let (mut cells, mut failures) = (0, 0);
            for intensity in Intensity::ALL {
                let mean = cfg.mean_photons(intensity);
                for pair in BasisPair::all() {
                    let c = stats.cell(intensity, pair);
                    if c.detected < 10_000 {
                        continue;
                    }
                    cells += 1;
                    let y_ok = within(c.yield_rate().unwrap(), analytic_yield(&model, mean), c.sent, 4.0);
                    let e_ok = within(c.error_rate().unwrap(), analytic_qber(&model, mean, pair, beta), c.detected, 4.0);
                    failures += usize::from(!(y_ok && e_ok));
                }
            }
            (cells, failures)
        })
        .collect();
    let cells: usize = results.iter().map(|r| r.0).sum();
    let failures: usize = results.iter().map(|r| r.1).sum();
    let rate = failures as f64 / cells as f64;
    outcome(cells > 0 && rate <= 0.01, format!("{failures} of {cells} cells outside 4 sigma ({:.3}%)", 100.0 * rate))
}

fn constant_self_check() -> Outcome {
    let steps = 1_000_000;
    let max = (0..=steps)
        .map(|k| {
            let e = 0.5 + 0.5 * k as f64 / steps as f64;
            0.5 + e + (e * (1.0 - e)).sqrt()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = (max - 1.70711).abs() <= 1e-5 && (max - METHOD2_CONSTANT).abs() <= 1e-5;
    outcome(pass, format!("grid max {max:.10} at 1e6 points; exact 1 + 1/sqrt2 = {:.10}", 1.0 + 0.5f64.sqrt()))
}

fn run_cli(config: &Path, out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_rfiqkd"))
        .args(["rate-curve", "--seed", "42", "--mode", "mc", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "sweep_km = [0.0, 30.0]\nsegment_seconds = [1.0]\nseeds = 2\n[protocol]\nn_total_pulses = 2000000\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    if !(run_cli(&config, &a) && run_cli(&config, &b)) {
        return outcome(false, "CLI run failed".into());
    }
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    let same_csv = read(&a, "rate_curve.csv") == read(&b, "rate_curve.csv");
    let same_json = read(&a, "rate_curve.json") == read(&b, "rate_curve.json");
    outcome(
        same_csv && same_json,
        format!("rate_curve.csv identical: {same_csv}; rate_curve.json identical: {same_json}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 beta-invariance of the asymptotic rate", beta_invariance, Duration::from_secs(1)),
        ("2 decoy-bound soundness vs ground truth", decoy_soundness, Duration::from_secs(300)),
        ("3 golden values", golden_values, Duration::from_secs(1)),
        ("4 zero-rate distance", zero_rate_distance, Duration::from_secs(1)),
        ("5 finite-key ordering", finite_key_ordering, Duration::from_secs(10)),
        ("6 Monte Carlo vs analytic", monte_carlo_agreement, Duration::from_secs(300)),
        ("7 constant self-check", constant_self_check, Duration::from_secs(1)),
        ("8 determinism", determinism, Duration::from_secs(300)),
    ];
    let mut all = true;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let o = check();
        let took = start.elapsed();
        let pass = o.pass && took <= budget;
        all &= pass;
        println!(
            "{} criterion {name}: {} [{:.2} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
