//! Decoy-state bounds on the single-photon yield, key error and quality
//! parameter, chained into the asymptotic secret key rate.
//!
//! All bounds are clamped to their physical range. Every clamp that actually
//! changes a value is recorded as a [`ClampWarning`] so reports stay
//! auditable.

use serde::{Deserialize, Serialize};

use crate::channel::ObservedStatistics;
use crate::config::ProtocolConfig;
use crate::correlation::entropy;
use crate::error::{Error, Result};
use crate::eve::eve_information;
use crate::observables::{FlipSet, Observables};

/// Upper end of `a`, `b` in the second C bound: the maximum of
/// ½ + e + √(e(1 − e)) over e ∈ [½, 1], rounded to five decimals.
pub const METHOD2_CONSTANT: f64 = 1.70711;
// five-decimal rounding on purpose, to match METHOD2_CONSTANT
#[allow(clippy::approx_constant)]
const METHOD2_VACUUM_WEIGHT: f64 = 0.70711;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampWarning {
    pub quantity: String,
    pub raw: f64,
    pub clamped: f64,
}

fn clamp_into(
    quantity: &str,
    raw: f64,
    lo: f64,
    hi: f64,
    warnings: &mut Vec<ClampWarning>,
) -> f64 {
    let clamped = raw.clamp(lo, hi);
    if clamped != raw {
        warnings.push(ClampWarning {
            quantity: quantity.to_owned(),
            raw,
            clamped,
        });
    }
    clamped
}

fn check_mean_photons(mu: f64, nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::domain("nu", nu, "(0, mu)"));
    }
    if !(mu > nu && mu.is_finite()) {
        return Err(Error::domain("mu", mu, "(nu, inf)"));
    }
    Ok(())
}

fn check_y1(y1_lower: f64) -> Result<()> {
    if y1_lower > 0.0 {
        Ok(())
    } else {
        Err(Error::NoKey("single-photon yield lower bound is zero"))
    }
}

/// Unclamped decoy estimate
/// `[−ν²e^μ Y_μ + μ²e^ν Y_ν − (μ² − ν²) Y₀] / (μ(μν − ν²))`.
pub fn y1_lower_raw(y_mu: f64, y_nu: f64, y_0: f64, mu: f64, nu: f64) -> Result<f64> {
    check_mean_photons(mu, nu)?;
    let num = -nu * nu * mu.exp() * y_mu + mu * mu * nu.exp() * y_nu - (mu * mu - nu * nu) * y_0;
    Ok(num / (mu * (mu * nu - nu * nu)))
}

/// Lower bound on the single-photon yield y₁, floored at 0.
pub fn y1_lower_bound(y_mu: f64, y_nu: f64, y_0: f64, mu: f64, nu: f64) -> Result<f64> {
    Ok(y1_lower_raw(y_mu, y_nu, y_0, mu, nu)?.max(0.0))
}

/// Upper bound on the single-photon Z/Z error rate, clamped to [0, 1].
pub fn e1zz_upper_bound(e_mu_zz: f64, y_mu: f64, y_0: f64, mu: f64, y1_lower: f64) -> Result<f64> {
    check_y1(y1_lower)?;
    let raw = (e_mu_zz * y_mu - 0.5 * (-mu).exp() * y_0) / (mu * (-mu).exp() * y1_lower);
    Ok(raw.clamp(0.0, 1.0))
}

/// Lower bound on a single-photon X/Y error rate, assuming every
/// multi-photon X/Y event is an error. Clamped to [0, 1].
pub fn e1xy_lower_bound(e_mu_xy: f64, y_mu: f64, y_0: f64, mu: f64, y1_lower: f64) -> Result<f64> {
    check_y1(y1_lower)?;
    let raw = 1.0 - ((1.0 - e_mu_xy) * y_mu - 0.5 * (-mu).exp() * y_0) / (mu * (-mu).exp() * y1_lower);
    Ok(raw.clamp(0.0, 1.0))
}

/// First C bound from the four e₁ lower bounds in XX, XY, YX, YY order:
/// returns (α, β) with α = Σ_{XX,XY} (1 − 2 max(½, e))² and β over YX, YY.
pub fn c1_method1(e1xy_lower: [f64; 4]) -> (f64, f64) {
    let t = |e: f64| (1.0 - 2.0 * e.max(0.5)).powi(2);
    (
        t(e1xy_lower[0]) + t(e1xy_lower[1]),
        t(e1xy_lower[2]) + t(e1xy_lower[3]),
    )
}

/// Unclamped `a` (from XX + XY) and `b` (from YX + YY).
pub fn method2_sums(e_mu_xy: [f64; 4], y_mu: f64, y_0: f64, mu: f64, y1_lower: f64) -> Result<(f64, f64)> {
    check_y1(y1_lower)?;
    let d = mu * (-mu).exp() * y1_lower;
    let vac = METHOD2_VACUUM_WEIGHT * (-mu).exp() * y_0;
    let sum = |e1: f64, e2: f64| METHOD2_CONSTANT - ((METHOD2_CONSTANT - e1 - e2) * y_mu - vac) / d;
    Ok((sum(e_mu_xy[0], e_mu_xy[1]), sum(e_mu_xy[2], e_mu_xy[3])))
}

/// Second C bound: (α′, β′) = (2(1 − a)², 2(1 − b)²) with `a`, `b` clamped
/// to [1, 1.70711].
pub fn c1_method2(e_mu_xy: [f64; 4], y_mu: f64, y_0: f64, mu: f64, y1_lower: f64) -> Result<(f64, f64)> {
    let (a, b) = method2_sums(e_mu_xy, y_mu, y_0, mu, y1_lower)?;
    let a = a.clamp(1.0, METHOD2_CONSTANT);
    let b = b.clamp(1.0, METHOD2_CONSTANT);
    Ok((2.0 * (1.0 - a).powi(2), 2.0 * (1.0 - b).powi(2)))
}

/// `min(2, max(α, α′) + max(β, β′))`.
pub fn c1_lower_bound(method1: (f64, f64), method2: (f64, f64)) -> f64 {
    (method1.0.max(method2.0) + method1.1.max(method2.1)).min(2.0)
}

/// I_E evaluated at the decoy bounds. A key-error bound of 1 means Eve may
/// know everything.
pub fn eve_information_decoy(e1zz_upper: f64, c1_lower: f64) -> Result<f64> {
    if e1zz_upper >= 1.0 {
        return Ok(1.0);
    }
    eve_information(e1zz_upper, c1_lower).map(|r| r.i_e)
}

/// Every intermediate of the decoy bound chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoyBounds {
    pub y1_lower: f64,
    pub e1zz_upper: f64,
    /// XX, XY, YX, YY.
    pub e1xy_lower: [f64; 4],
    pub c1_alpha: f64,
    pub c1_beta: f64,
    /// `a` and `b` after clamping.
    pub a_bound: f64,
    pub b_bound: f64,
    pub c1_alpha_prime: f64,
    pub c1_beta_prime: f64,
    pub c1_lower: f64,
    pub i_e_upper: f64,
    pub v_max: f64,
    pub f_v_max: f64,
    pub warnings: Vec<ClampWarning>,
}

impl DecoyBounds {
    /// Runs the chain on flip-normalized signal error rates. Fails with
    /// [`Error::NoKey`] when the single-photon yield bound is zero.
    pub fn compute(
        y_mu: f64,
        y_nu: f64,
        y_0: f64,
        e_mu_zz: f64,
        e_mu_xy: [f64; 4],
        mu: f64,
        nu: f64,
    ) -> Result<DecoyBounds> {
        let mut warnings = Vec::new();
        let y1_raw = y1_lower_raw(y_mu, y_nu, y_0, mu, nu)?;
        let y1_lower = clamp_into("y1_lower", y1_raw, 0.0, f64::INFINITY, &mut warnings);
        check_y1(y1_lower)?;

        let d = mu * (-mu).exp() * y1_lower;
        let vac = 0.5 * (-mu).exp() * y_0;
        let e1zz_upper = clamp_into("e1zz_upper", (e_mu_zz * y_mu - vac) / d, 0.0, 1.0, &mut warnings);

        let names = ["e1xx_lower", "e1xy_lower", "e1yx_lower", "e1yy_lower"];
        let mut e1xy_lower = [0.0; 4];
        for k in 0..4 {
            let raw = 1.0 - ((1.0 - e_mu_xy[k]) * y_mu - vac) / d;
            e1xy_lower[k] = clamp_into(names[k], raw, 0.0, 1.0, &mut warnings);
        }
        let (c1_alpha, c1_beta) = c1_method1(e1xy_lower);

        let (a_raw, b_raw) = method2_sums(e_mu_xy, y_mu, y_0, mu, y1_lower)?;
        let a_bound = clamp_into("a", a_raw, 1.0, METHOD2_CONSTANT, &mut warnings);
        let b_bound = clamp_into("b", b_raw, 1.0, METHOD2_CONSTANT, &mut warnings);
        let c1_alpha_prime = 2.0 * (1.0 - a_bound).powi(2);
        let c1_beta_prime = 2.0 * (1.0 - b_bound).powi(2);

        let c1_lower = c1_lower_bound((c1_alpha, c1_beta), (c1_alpha_prime, c1_beta_prime));
        let (i_e_upper, v_max, f_v_max) = if e1zz_upper >= 1.0 {
            (1.0, 0.0, 0.0)
        } else {
            let r = eve_information(e1zz_upper, c1_lower)?;
            (r.i_e, r.v_max, r.f_v_max)
        };

        Ok(DecoyBounds {
            y1_lower,
            e1zz_upper,
            e1xy_lower,
            c1_alpha,
            c1_beta,
            a_bound,
            b_bound,
            c1_alpha_prime,
            c1_beta_prime,
            c1_lower,
            i_e_upper,
            v_max,
            f_v_max,
            warnings,
        })
    }
}

/// Key rate per emitted pulse with every input and intermediate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Rates as measured.
    pub observed: Observables,
    /// Rates after Bob's relabeling of low-error X/Y pairs.
    pub flipped: Observables,
    pub flips: FlipSet,
    /// Key-basis error rate fed to the chain (finite-size corrected in
    /// finite-key reports).
    pub e_zz_used: f64,
    /// XX, XY, YX, YY error rates fed to the chain.
    pub e_xy_used: [f64; 4],
    pub bounds: Option<DecoyBounds>,
    /// Y_μ h(E_ZZ).
    pub error_correction: f64,
    /// μ e^(−μ) y₁ᴸ (1 − I_E).
    pub privacy_term: f64,
    /// Finite-size overhead per pulse; zero asymptotically.
    pub overhead: f64,
    pub rate: f64,
    pub no_key: Option<String>,
    pub yield_ordering_violated: bool,
}

impl RateReport {
    pub(crate) fn refused(observed: &Observables, flipped: &Observables, flips: FlipSet, reason: String) -> Self {
        RateReport {
            observed: *observed,
            flipped: *flipped,
            flips,
            e_zz_used: flipped.e_signal.zz,
            e_xy_used: flipped.e_signal.estimation(),
            bounds: None,
            error_correction: 0.0,
            privacy_term: 0.0,
            overhead: 0.0,
            rate: 0.0,
            no_key: Some(reason),
            yield_ordering_violated: observed.yield_ordering_violated(),
        }
    }
}

/// Shared tail of the asymptotic and finite-size rates.
pub(crate) fn rate_chain(
    observed: &Observables,
    flipped: &Observables,
    flips: FlipSet,
    e_zz: f64,
    e_xy: [f64; 4],
    overhead: f64,
    config: &ProtocolConfig,
) -> Result<RateReport> {
    let (mu, nu) = (config.mu, config.nu);
    let mut report = RateReport {
        observed: *observed,
        flipped: *flipped,
        flips,
        e_zz_used: e_zz,
        e_xy_used: e_xy,
        bounds: None,
        error_correction: flipped.y_signal * entropy(e_zz),
        privacy_term: 0.0,
        overhead,
        rate: 0.0,
        no_key: None,
        yield_ordering_violated: observed.yield_ordering_violated(),
    };
    if e_zz >= 0.5 {
        report.no_key = Some(format!("key-basis error rate {e_zz} is at least 1/2"));
        return Ok(report);
    }
    let bounds = match DecoyBounds::compute(flipped.y_signal, flipped.y_decoy, flipped.y_vacuum, e_zz, e_xy, mu, nu) {
        Ok(b) => b,
        Err(Error::NoKey(reason)) => {
            report.no_key = Some(reason.to_owned());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.privacy_term = mu * (-mu).exp() * bounds.y1_lower * (1.0 - bounds.i_e_upper);
    let raw = report.privacy_term - report.error_correction - overhead;
    report.rate = raw.max(0.0);
    if raw <= 0.0 {
        report.no_key = Some("error correction and privacy amplification exceed the single-photon key".into());
    }
    report.bounds = Some(bounds);
    Ok(report)
}

/// Asymptotic key rate per pulse from observed rates
/// `R = −Y_μ h(E_μZZ) + μe^(−μ) y₁ᴸ (1 − I_E)`, floored at 0.
pub fn asymptotic_rate_from_observables(observed: &Observables, config: &ProtocolConfig) -> Result<RateReport> {
    config.validate()?;
    let (flipped, flips) = observed.normalize_flip_convention();
    rate_chain(
        observed,
        &flipped,
        flips,
        flipped.e_signal.zz,
        flipped.e_signal.estimation(),
        0.0,
        config,
    )
}

/// [`asymptotic_rate_from_observables`] on counted statistics; refuses
/// incomplete statistics and names the empty cell.
pub fn asymptotic_rate(stats: &ObservedStatistics, config: &ProtocolConfig) -> Result<RateReport> {
    asymptotic_rate_from_observables(&stats.observables()?, config)
}
