//! Finite-size corrections and the key rate against collective attacks.

use serde::{Deserialize, Serialize};

use crate::basis::{BasisPair, Intensity};
use crate::channel::ObservedStatistics;
use crate::config::{ProtocolConfig, SecurityEpsilons};
use crate::decoy::{rate_chain, RateReport};
use crate::error::{Error, Result};
use crate::observables::Observables;

/// Sample sizes of one stationary segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteKeyContext {
    /// Raw key length n: detected signal Z/Z events.
    pub n_raw: f64,
    /// Estimation sample m: detected signal events in the sparsest X/Y pair.
    pub m_est: f64,
    /// Pulses N emitted in the segment.
    pub n_pulses_total: f64,
    pub eps: SecurityEpsilons,
}

impl FiniteKeyContext {
    /// Sample sizes read off counted statistics.
    pub fn from_statistics(stats: &ObservedStatistics, config: &ProtocolConfig) -> Self {
        let detected = |pair| stats.cell(Intensity::Signal, pair).detected;
        let m = BasisPair::ESTIMATION.iter().map(|&p| detected(p)).min().unwrap();
        FiniteKeyContext {
            n_raw: detected(BasisPair::ZZ) as f64,
            m_est: m as f64,
            n_pulses_total: stats.total_sent() as f64,
            eps: config.epsilons(),
        }
    }

    /// Expected sample sizes for `pulses` emitted pulses:
    /// n = N w_μ p_Z² Y_μ and m = N w_μ p² Y_μ.
    pub fn analytic(config: &ProtocolConfig, observed: &Observables, pulses: f64) -> Self {
        let signal = pulses * config.intensity_weight(Intensity::Signal) * observed.y_signal;
        FiniteKeyContext {
            n_raw: signal * config.p_z * config.p_z,
            m_est: signal * config.p_xy * config.p_xy,
            n_pulses_total: pulses,
            eps: config.epsilons(),
        }
    }

    /// [`FiniteKeyContext::analytic`] for a segment of `seconds` at
    /// `pulse_rate_hz`.
    pub fn for_segment(config: &ProtocolConfig, observed: &Observables, seconds: f64, pulse_rate_hz: f64) -> Self {
        Self::analytic(config, observed, seconds * pulse_rate_hz)
    }
}

/// Deviation `√[(ln(1/ε_PE) + 2 ln(k + 1)) / (2k)]` for a sample of size k.
///
/// `k` may be fractional so expected counts can be used directly.
pub fn delta(k: f64, eps_pe: f64) -> Result<f64> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::domain("k", k, "[1, inf)"));
    }
    if !(eps_pe > 0.0 && eps_pe <= 1.0) {
        return Err(Error::domain("eps_pe", eps_pe, "(0, 1]"));
    }
    Ok((((1.0 / eps_pe).ln() + 2.0 * (k + 1.0).ln()) / (2.0 * k)).sqrt())
}

/// Error rates after finite-size correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedErrors {
    pub delta_n: f64,
    pub delta_m: f64,
    /// min(1, E_ZZ + δ(n)).
    pub e_zz: f64,
    /// max(½, E − δ(m)/2) for XX, XY, YX, YY.
    pub e_xy: [f64; 4],
}

/// Pushes the key error up by δ(n) and the flip-normalized X/Y errors
/// toward ½ by δ(m)/2, the pessimistic direction for both.
pub fn corrected_statistics(flipped: &Observables, ctx: &FiniteKeyContext) -> Result<CorrectedErrors> {
    let delta_n = delta(ctx.n_raw, ctx.eps.pe)?;
    let delta_m = delta(ctx.m_est, ctx.eps.pe)?;
    Ok(CorrectedErrors {
        delta_n,
        delta_m,
        e_zz: (flipped.e_signal.zz + delta_n).min(1.0),
        e_xy: flipped.e_signal.estimation().map(|e| (e - delta_m / 2.0).max(0.5)),
    })
}

/// Error-correction, privacy-amplification and estimation overhead per
/// emitted pulse:
/// `(n/N)[(1/n) log₂(2/ε_EC) + (2/n) log₂(1/ε_PA) + 7 √(log₂(2/ε̄)/n)]`.
pub fn finite_overhead(ctx: &FiniteKeyContext) -> f64 {
    let n = ctx.n_raw;
    let e = &ctx.eps;
    let per_bit = (2.0 / e.ec).log2() / n + 2.0 * (1.0 / e.pa).log2() / n + 7.0 * ((2.0 / e.bar).log2() / n).sqrt();
    n / ctx.n_pulses_total * per_bit
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteKeyReport {
    pub context: FiniteKeyContext,
    pub corrected: Option<CorrectedErrors>,
    pub report: RateReport,
}

impl FiniteKeyReport {
    pub fn rate(&self) -> f64 {
        self.report.rate
    }
}

/// Finite-size key rate per pulse from observed rates.
///
/// Reruns the decoy chain with corrected error rates and subtracts
/// [`finite_overhead`]. Too few events for a deviation bound (n or m below
/// one) gives rate 0 with the reason recorded.
pub fn finite_key_rate_from_observables(
    observed: &Observables,
    config: &ProtocolConfig,
    ctx: &FiniteKeyContext,
) -> Result<FiniteKeyReport> {
    config.validate()?;
    ctx.eps.validate()?;
    let (flipped, flips) = observed.normalize_flip_convention();
    if !(ctx.n_raw >= 1.0 && ctx.m_est >= 1.0) {
        let reason = format!("sample too small: n = {}, m = {}", ctx.n_raw, ctx.m_est);
        return Ok(FiniteKeyReport {
            context: *ctx,
            corrected: None,
            report: RateReport::refused(observed, &flipped, flips, reason),
        });
    }
    let corrected = corrected_statistics(&flipped, ctx)?;
    let report = rate_chain(
        observed,
        &flipped,
        flips,
        corrected.e_zz,
        corrected.e_xy,
        finite_overhead(ctx),
        config,
    )?;
    Ok(FiniteKeyReport {
        context: *ctx,
        corrected: Some(corrected),
        report,
    })
}

/// Finite-size key rate from counted statistics, with n, m and N taken from
/// the counts.
pub fn finite_key_rate(stats: &ObservedStatistics, config: &ProtocolConfig) -> Result<FiniteKeyReport> {
    let observed = stats.observables()?;
    let ctx = FiniteKeyContext::from_statistics(stats, config);
    finite_key_rate_from_observables(&observed, config, &ctx)
}
