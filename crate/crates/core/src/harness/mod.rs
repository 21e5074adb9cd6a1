//! Experiment orchestration behind the `rfiqkd` binary: distance sweeps,
//! finite-size sweeps, QBER histograms and the oracle validation suite.
//! Each run writes plot-ready CSV plus a JSON audit report.

mod config;
mod oracle;
mod table;

pub use config::{DriftSettings, HistogramSettings, Mode, RunConfig};
pub use oracle::{run_oracle_validation, validate_point, OracleCheck, OracleStatus, ValidationReport, MIN_CELL_DETECTIONS};
pub use table::{format_value, Table};

use std::path::{Path, PathBuf};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisPair;
use crate::channel::{analytic_observables, qber_histogram, simulate_rounds, DriftProcess, GroundTruth, QberHistogram};
use crate::decoy::{asymptotic_rate, asymptotic_rate_from_observables, y1_lower_bound, RateReport};
use crate::error::{Error, Result};
use crate::finite::{finite_key_rate, finite_key_rate_from_observables, FiniteKeyContext, FiniteKeyReport};

/// Independent seed for one (sweep point, repetition, purpose) triple.
pub fn derive_seed(base: u64, point: u64, repetition: u64, purpose: u64) -> u64 {
    let mut key = [0u8; 32];
    for (k, v) in [base, point, repetition, purpose].iter().enumerate() {
        key[8 * k..8 * k + 8].copy_from_slice(&v.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key).next_u64()
}

/// True single-photon quantities from the simulator's bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthSummary {
    pub y1: Option<f64>,
    pub e1zz: Option<f64>,
    pub c1: Option<f64>,
}

impl TruthSummary {
    pub fn of(truth: &GroundTruth) -> Self {
        TruthSummary {
            y1: truth.yield_n(1),
            e1zz: truth.error_n(1, BasisPair::ZZ),
            c1: truth.single_photon_quality(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentResult {
    pub seconds: f64,
    pub report: Option<FiniteKeyReport>,
    /// Why no report could be formed (Monte Carlo segments too short to
    /// fill every cell).
    pub refused: Option<String>,
}

impl SegmentResult {
    pub fn rate(&self) -> f64 {
        self.report.as_ref().map_or(0.0, FiniteKeyReport::rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Simulator seed; absent in analytic mode.
    pub seed: Option<u64>,
    pub asymptotic: Option<RateReport>,
    pub refused: Option<String>,
    pub finite: Vec<SegmentResult>,
    pub truth: Option<TruthSummary>,
}

impl RunResult {
    pub fn rate(&self) -> f64 {
        self.asymptotic.as_ref().map_or(0.0, |r| r.rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub length_km: f64,
    pub runs: Vec<RunResult>,
}

impl SweepPoint {
    pub fn mean_rate(&self) -> f64 {
        mean(self.runs.iter().map(RunResult::rate))
    }

    pub fn mean_finite_rate(&self, segment: usize) -> f64 {
        mean(self.runs.iter().map(|r| r.finite[segment].rate()))
    }

    /// Standard error of the mean of R over repetitions; NaN for one run.
    pub fn sem_rate(&self) -> f64 {
        sem(&self.runs.iter().map(RunResult::rate).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub mode: Mode,
    pub segment_seconds: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    /// First sweep distance at which the mean finite-size rate for
    /// `segment` is zero.
    pub fn finite_cutoff_km(&self, segment: usize) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.mean_finite_rate(segment) <= 0.0)
            .map(|p| p.length_km)
    }

    pub fn asymptotic_cutoff_km(&self) -> Option<f64> {
        self.points.iter().find(|p| p.mean_rate() <= 0.0).map(|p| p.length_km)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Sample standard deviation over √k.
pub fn sem(values: &[f64]) -> f64 {
    let k = values.len();
    if k < 2 {
        return f64::NAN;
    }
    let m = mean(values.iter().copied());
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1) as f64;
    (var / k as f64).sqrt()
}

fn segment_label(seconds: f64) -> String {
    format!("{seconds}")
}

fn analytic_point(config: &RunConfig, km: f64) -> Result<RunResult> {
    let model = config.channel_at(km);
    let observed = analytic_observables(&config.protocol, &model, config.drift.beta_initial);
    let asymptotic = asymptotic_rate_from_observables(&observed, &config.protocol)?;
    let finite = config
        .segment_seconds
        .iter()
        .map(|&seconds| {
            let ctx = FiniteKeyContext::for_segment(&config.protocol, &observed, seconds, config.pulse_rate_hz);
            Ok(SegmentResult {
                seconds,
                report: Some(finite_key_rate_from_observables(&observed, &config.protocol, &ctx)?),
                refused: None,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RunResult {
        seed: None,
        asymptotic: Some(asymptotic),
        refused: None,
        finite,
        truth: None,
    })
}

fn refusal<T>(result: Result<T>) -> Result<std::result::Result<T, String>> {
    match result {
        Ok(v) => Ok(Ok(v)),
        Err(e @ Error::IncompleteStatistics { .. }) => Ok(Err(e.to_string())),
        Err(e) => Err(e),
    }
}

fn mc_point(config: &RunConfig, point: u64, km: f64, repetition: u64) -> Result<RunResult> {
    let model = config.channel_at(km);
    let drift = config.drift();
    let seed = derive_seed(config.seed, point, repetition, 0);
    let (stats, truth) = simulate_rounds(&config.protocol, &model, &drift, seed)?;
    let (asymptotic, refused) = match refusal(asymptotic_rate(&stats, &config.protocol))? {
        Ok(r) => (Some(r), None),
        Err(reason) => (None, Some(reason)),
    };
    let mut finite = Vec::new();
    for (k, &seconds) in config.segment_seconds.iter().enumerate() {
        let pulses = (seconds * config.pulse_rate_hz).round().max(1.0) as u64;
        let protocol = config.protocol.clone().with_total_pulses(pulses);
        let seg_seed = derive_seed(config.seed, point, repetition, k as u64 + 1);
        let (seg_stats, _) = simulate_rounds(&protocol, &model, &drift, seg_seed)?;
        finite.push(match refusal(finite_key_rate(&seg_stats, &config.protocol))? {
            Ok(r) => SegmentResult {
                seconds,
                report: Some(r),
                refused: None,
            },
            Err(reason) => SegmentResult {
                seconds,
                report: None,
                refused: Some(reason),
            },
        });
    }
    Ok(RunResult {
        seed: Some(seed),
        asymptotic,
        refused,
        finite,
        truth: Some(TruthSummary::of(&truth)),
    })
}

/// Evaluates every sweep point, in parallel, in sweep order.
pub fn evaluate_sweep(config: &RunConfig) -> Result<SweepReport> {
    config.validate()?;
    let points = config
        .sweep_km
        .par_iter()
        .enumerate()
        .map(|(i, &km)| {
            let runs = match config.mode {
                Mode::Analytic => vec![analytic_point(config, km)?],
                Mode::Mc => (0..config.seeds as u64)
                    .map(|rep| mc_point(config, i as u64, km, rep))
                    .collect::<Result<_>>()?,
            };
            Ok(SweepPoint { length_km: km, runs })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        mode: config.mode,
        segment_seconds: config.segment_seconds.clone(),
        points,
    })
}

fn nan_or(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn rate_columns(run: &RunResult, config: &RunConfig) -> Vec<f64> {
    let nan9 = || vec![f64::NAN; 9];
    let mut v = match &run.asymptotic {
        Some(r) => {
            let o = &r.observed;
            let e = &o.e_signal;
            let y1 = r.bounds.as_ref().map(|b| b.y1_lower).or_else(|| {
                y1_lower_bound(o.y_signal, o.y_decoy, o.y_vacuum, config.protocol.mu, config.protocol.nu).ok()
            });
            vec![
                o.y_signal,
                o.y_decoy,
                o.y_vacuum,
                e.zz,
                e.xx,
                e.xy,
                e.yx,
                e.yy,
                nan_or(y1),
            ]
        }
        None => nan9(),
    };
    let b = run.asymptotic.as_ref().and_then(|r| r.bounds.as_ref());
    v.push(nan_or(b.map(|b| b.e1zz_upper)));
    v.push(nan_or(b.map(|b| b.c1_lower)));
    v.push(nan_or(b.map(|b| b.i_e_upper)));
    v.push(run.rate());
    v.extend(run.finite.iter().map(SegmentResult::rate));
    v
}

/// Rows of the `rate-curve` CSV. Monte Carlo columns are means over
/// repetitions, followed by `sem_R` and the ground-truth columns.
pub fn rate_curve_table(report: &SweepReport, config: &RunConfig) -> Table {
    let mut columns: Vec<String> = [
        "length_km", "Y_mu", "Y_nu", "Y_0", "E_mu_zz", "E_mu_xx", "E_mu_xy", "E_mu_yx", "E_mu_yy", "y1_lower",
        "e1zz_upper", "c1_lower", "I_E", "R_asym",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    columns.extend(report.segment_seconds.iter().map(|s| format!("r_finite_{}", segment_label(*s))));
    if report.mode == Mode::Mc {
        columns.extend(["sem_R", "y1_true", "e1zz_true", "c1_true"].map(String::from));
    }
    let mut table = Table::new(columns);
    for p in &report.points {
        let per_run: Vec<Vec<f64>> = p.runs.iter().map(|r| rate_columns(r, config)).collect();
        let mut row = vec![p.length_km];
        row.extend((0..per_run[0].len()).map(|k| mean(per_run.iter().map(|r| r[k]))));
        if report.mode == Mode::Mc {
            row.push(p.sem_rate());
            let truth = |f: fn(&TruthSummary) -> Option<f64>| {
                mean(p.runs.iter().map(|r| nan_or(r.truth.as_ref().and_then(f))))
            };
            row.push(truth(|t| t.y1));
            row.push(truth(|t| t.e1zz));
            row.push(truth(|t| t.c1));
        }
        table.push(row);
    }
    table
}

/// Rows of the `finite-sweep` CSV: per segment length the sample sizes,
/// corrected key error, quality bound and rate.
pub fn finite_sweep_table(report: &SweepReport) -> Table {
    let mut columns = vec!["length_km".to_string(), "R_asym".to_string()];
    for s in &report.segment_seconds {
        let l = segment_label(*s);
        columns.extend([
            format!("n_{l}"),
            format!("m_{l}"),
            format!("E_zz_corrected_{l}"),
            format!("c1_lower_{l}"),
            format!("r_finite_{l}"),
        ]);
    }
    let mut table = Table::new(columns);
    for p in &report.points {
        let mut row = vec![p.length_km, p.mean_rate()];
        for k in 0..report.segment_seconds.len() {
            let reports: Vec<Option<&FiniteKeyReport>> = p.runs.iter().map(|r| r.finite[k].report.as_ref()).collect();
            let avg = |f: &dyn Fn(&FiniteKeyReport) -> Option<f64>| mean(reports.iter().map(|r| nan_or(r.and_then(f))));
            row.push(avg(&|r| Some(r.context.n_raw)));
            row.push(avg(&|r| Some(r.context.m_est)));
            row.push(avg(&|r| r.corrected.map(|c| c.e_zz)));
            row.push(avg(&|r| r.report.bounds.as_ref().map(|b| b.c1_lower)));
            row.push(p.mean_finite_rate(k));
        }
        table.push(row);
    }
    table
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Files written by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub csv: PathBuf,
    pub json: PathBuf,
}

fn emit(config: &RunConfig, stem: &str, table: &Table, report: &impl Serialize) -> Result<Outputs> {
    prepare_dir(&config.output_dir)?;
    let out = Outputs {
        csv: config.output_dir.join(format!("{stem}.csv")),
        json: config.output_dir.join(format!("{stem}.json")),
    };
    table.write(&out.csv)?;
    write_json(&out.json, report)?;
    Ok(out)
}

/// Asymptotic (and per-segment finite) key rate against distance.
pub fn run_rate_curve(config: &RunConfig) -> Result<(SweepReport, Outputs)> {
    let report = evaluate_sweep(config)?;
    let out = emit(config, "rate_curve", &rate_curve_table(&report, config), &report)?;
    Ok((report, out))
}

/// Finite-size key rate against distance for each segment length.
pub fn run_finite_sweep(config: &RunConfig) -> Result<(SweepReport, Outputs)> {
    if config.segment_seconds.is_empty() {
        return Err(Error::config("segment_seconds", "finite sweep needs at least one segment length"));
    }
    let report = evaluate_sweep(config)?;
    let out = emit(config, "finite_sweep", &finite_sweep_table(&report), &report)?;
    Ok((report, out))
}

/// Histogram summary written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub settings: HistogramSettings,
    pub histogram: QberHistogram,
}

/// Frame angle of each histogram segment: independent uniform draws, or the
/// drift process sampled at segment boundaries.
pub fn histogram_betas(config: &RunConfig) -> Vec<f64> {
    let h = &config.histogram;
    if h.uniform_beta {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, u64::MAX, 0, 0));
        (0..h.segments).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
    } else {
        config
            .drift()
            .block_path(h.segments as usize, h.segment_pulses, derive_seed(config.seed, u64::MAX, 0, 1))
    }
}

/// Simulates the histogram segments and bins their X/Y error rates.
pub fn evaluate_histogram(config: &RunConfig) -> Result<QberHistogram> {
    config.validate()?;
    if config.mode == Mode::Analytic {
        return Err(Error::config("mode", "the QBER histogram needs sampled frame angles; use mc mode"));
    }
    let h = &config.histogram;
    let model = config.channel_at(h.length_km);
    let protocol = config.protocol.clone().with_total_pulses(h.segment_pulses);
    let betas = histogram_betas(config);
    let parts = betas
        .par_iter()
        .enumerate()
        .map(|(k, &beta)| {
            let drift = if h.uniform_beta {
                DriftProcess::frozen(beta)
            } else {
                DriftProcess {
                    beta_initial: beta,
                    ..config.drift()
                }
            };
            let seed = derive_seed(config.seed, u64::MAX, k as u64, 2);
            let (stats, _) = simulate_rounds(&protocol, &model, &drift, seed)?;
            qber_histogram(std::slice::from_ref(&stats))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = QberHistogram::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

pub fn histogram_table(h: &QberHistogram) -> Table {
    let mut t = Table::new(vec!["bin_upper".into(), "count".into()]);
    for (k, &c) in h.counts.iter().enumerate() {
        t.push(vec![QberHistogram::upper_edge(k), c as f64]);
    }
    t
}

/// Writes `qber_histogram.csv` (bin upper edge, count).
pub fn run_qber_histogram(config: &RunConfig) -> Result<(QberHistogram, Outputs)> {
    let h = evaluate_histogram(config)?;
    let report = HistogramReport {
        settings: config.histogram.clone(),
        histogram: h.clone(),
    };
    let out = emit(config, "qber_histogram", &histogram_table(&h), &report)?;
    Ok((h, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sem_matches_direct_formula() {
        let v = [1.0, 2.0, 4.0, 7.0];
        let m = 3.5;
        let s = ((v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 3.0) / 4.0).sqrt();
        assert!((sem(&v) - s).abs() < 1e-15);
        assert!(sem(&[1.0]).is_nan());
    }

    #[test]
    fn seeds_differ_by_every_component() {
        let s = derive_seed(1, 2, 3, 4);
        assert_eq!(s, derive_seed(1, 2, 3, 4));
        for other in [derive_seed(0, 2, 3, 4), derive_seed(1, 0, 3, 4), derive_seed(1, 2, 0, 4), derive_seed(1, 2, 3, 0)] {
            assert_ne!(s, other);
        }
    }

    #[test]
    fn analytic_sweep_has_one_run_per_point() {
        let config = RunConfig {
            sweep_km: vec![0.0, 50.0, 120.0],
            ..RunConfig::default()
        };
        let r = evaluate_sweep(&config).unwrap();
        assert!(r.points.iter().all(|p| p.runs.len() == 1 && p.runs[0].seed.is_none()));
        assert!(r.points[0].mean_rate() > r.points[1].mean_rate());
        assert_eq!(r.points[2].mean_rate(), 0.0);
        assert_eq!(r.asymptotic_cutoff_km(), Some(120.0));
        let t = rate_curve_table(&r, &config);
        assert_eq!(t.columns.len(), 14 + 3);
        assert_eq!(t.columns[14], "r_finite_5");
    }

    #[test]
    fn histogram_refuses_analytic_mode() {
        let err = evaluate_histogram(&RunConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "mode"));
    }
}
