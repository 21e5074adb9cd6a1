//! Photon channel and detector model, the frame drift process, and the
//! Monte Carlo simulator that turns them into observed statistics.

mod analytic;
mod histogram;
mod sim;
mod stats;

pub use analytic::{analytic_observables, analytic_qber, analytic_yield, signal_error_probability};
pub use histogram::{qber_histogram, QberHistogram, HISTOGRAM_BIN_WIDTH, HISTOGRAM_BINS};
pub use sim::{simulate_rounds, CHUNK_PULSES, DRIFT_BLOCK_PULSES};
pub use stats::{CellCounts, GroundTruth, ObservedStatistics, GROUND_TRUTH_MAX_PHOTONS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::correlation::wrap_angle;
use crate::error::{Error, Result};

/// Fiber, receiver and detector parameters for one link length.
///
/// Overall transmittance is
/// `η = detector_efficiency · 10^(−(fiber_loss_db_per_km · length_km + receiver_loss_db)/10)`.
/// The defaults use the 0.20 dB/km fiber, 11% efficient detectors with
/// 4×10⁻⁵ dark counts per gate, plus a receiver insertion loss and visibility
/// fitted so that the key-basis error is 0.35% at 0 km and 1.6% at 50 km.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelModel {
    pub fiber_loss_db_per_km: f64,
    pub length_km: f64,
    /// Fixed optical loss inside Bob's apparatus.
    pub receiver_loss_db: f64,
    pub detector_efficiency: f64,
    /// Per detector, per gate.
    pub dark_count_per_gate: f64,
    pub num_detectors: u32,
    pub visibility: f64,
    /// Recorded for completeness; not part of the background yield.
    pub after_pulse_prob: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel {
            fiber_loss_db_per_km: 0.20,
            length_km: 0.0,
            receiver_loss_db: 3.76,
            detector_efficiency: 0.11,
            dark_count_per_gate: 4e-5,
            num_detectors: 2,
            visibility: 0.9959,
            after_pulse_prob: 0.00358,
        }
    }
}

impl ChannelModel {
    /// An idealized lossless, noiseless link.
    pub fn ideal() -> Self {
        ChannelModel {
            fiber_loss_db_per_km: 0.0,
            length_km: 0.0,
            receiver_loss_db: 0.0,
            detector_efficiency: 1.0,
            dark_count_per_gate: 0.0,
            num_detectors: 2,
            visibility: 1.0,
            after_pulse_prob: 0.0,
        }
    }

    pub fn with_length(mut self, km: f64) -> Self {
        self.length_km = km;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("detector_efficiency", self.detector_efficiency),
            ("dark_count_per_gate", self.dark_count_per_gate),
            ("visibility", self.visibility),
            ("after_pulse_prob", self.after_pulse_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(name, format!("{p} is not a probability")));
            }
        }
        for (name, v) in [
            ("fiber_loss_db_per_km", self.fiber_loss_db_per_km),
            ("length_km", self.length_km),
            ("receiver_loss_db", self.receiver_loss_db),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("{v} must be finite and >= 0")));
            }
        }
        if self.num_detectors == 0 {
            return Err(Error::config("num_detectors", "must be at least 1"));
        }
        if self.transmittance() <= 0.0 {
            return Err(Error::config("detector_efficiency", "overall transmittance is zero"));
        }
        Ok(())
    }

    /// Overall single-photon detection probability η.
    pub fn transmittance(&self) -> f64 {
        let loss_db = self.fiber_loss_db_per_km * self.length_km + self.receiver_loss_db;
        self.detector_efficiency * 10f64.powf(-loss_db / 10.0)
    }

    /// Probability that at least one detector fires on an empty gate.
    pub fn background_yield(&self) -> f64 {
        1.0 - (1.0 - self.dark_count_per_gate).powi(self.num_detectors as i32)
    }
}

/// Slow random walk of the frame angle β between Alice and Bob.
///
/// β performs a Wiener process with diffusion `sigma_rad_per_sqrt_s`
/// (standard deviation after one second) starting at `beta_initial`,
/// sampled once per block of [`DRIFT_BLOCK_PULSES`] pulses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftProcess {
    pub sigma_rad_per_sqrt_s: f64,
    pub beta_initial: f64,
    pub pulse_rate_hz: f64,
}

impl Default for DriftProcess {
    fn default() -> Self {
        DriftProcess {
            // about 7 mrad over a 50 s segment
            sigma_rad_per_sqrt_s: 1e-3,
            beta_initial: std::f64::consts::FRAC_PI_8,
            pulse_rate_hz: 1e6,
        }
    }
}

impl DriftProcess {
    pub fn frozen(beta: f64) -> Self {
        DriftProcess {
            sigma_rad_per_sqrt_s: 0.0,
            beta_initial: beta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_rad_per_sqrt_s >= 0.0 && self.sigma_rad_per_sqrt_s.is_finite()) {
            return Err(Error::config(
                "sigma_rad_per_sqrt_s",
                format!("{} must be finite and >= 0", self.sigma_rad_per_sqrt_s),
            ));
        }
        if !self.beta_initial.is_finite() {
            return Err(Error::config("beta_initial", "must be finite"));
        }
        if !(self.pulse_rate_hz > 0.0 && self.pulse_rate_hz.is_finite()) {
            return Err(Error::config(
                "pulse_rate_hz",
                format!("{} must be > 0", self.pulse_rate_hz),
            ));
        }
        Ok(())
    }

    /// β at the start of each of `blocks` consecutive blocks of `block_len`
    /// pulses, wrapped to [0, 2π).
    pub fn block_path(&self, blocks: usize, block_len: u64, seed: u64) -> Vec<f64> {
        let mut path = Vec::with_capacity(blocks);
        let mut beta = wrap_angle(self.beta_initial);
        if self.sigma_rad_per_sqrt_s == 0.0 {
            path.resize(blocks, beta);
            return path;
        }
        let step = self.sigma_rad_per_sqrt_s * (block_len as f64 / self.pulse_rate_hz).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..blocks {
            path.push(beta);
            let z: f64 = StandardNormal.sample(&mut rng);
            beta = wrap_angle(beta + step * z);
        }
        path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn background_combines_two_detectors() {
        let m = ChannelModel::default();
        let expected = 1.0 - (1.0 - 4e-5f64).powi(2);
        assert_eq!(m.background_yield(), expected);
        assert!((m.background_yield() - 8e-5).abs() < 2e-9);
    }

    #[test]
    fn transmittance_falls_two_db_per_ten_km() {
        let m = ChannelModel::default();
        let ratio = m.clone().with_length(10.0).transmittance() / m.transmittance();
        assert!((ratio - 10f64.powf(-0.2)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_probabilities() {
        let m = ChannelModel {
            visibility: 1.2,
            ..Default::default()
        };
        assert!(matches!(m.validate(), Err(Error::Config { field, .. }) if field == "visibility"));
        let m = ChannelModel {
            length_km: -1.0,
            ..Default::default()
        };
        assert!(matches!(m.validate(), Err(Error::Config { field, .. }) if field == "length_km"));
    }

    #[test]
    fn frozen_drift_is_constant() {
        let path = DriftProcess::frozen(0.3).block_path(50, 1024, 9);
        assert!(path.iter().all(|&b| b == 0.3));
    }

    #[test]
    fn drift_path_has_wiener_increments() {
        let d = DriftProcess {
            sigma_rad_per_sqrt_s: 0.5,
            beta_initial: 1.0,
            pulse_rate_hz: 1e6,
        };
        let path = d.block_path(20_000, 1000, 3);
        let step = 0.5 * (1e-3f64).sqrt();
        let var = path
            .windows(2)
            .map(|w| {
                let mut dx = w[1] - w[0];
                if dx > std::f64::consts::PI {
                    dx -= std::f64::consts::TAU;
                } else if dx < -std::f64::consts::PI {
                    dx += std::f64::consts::TAU;
                }
                dx * dx
            })
            .sum::<f64>()
            / (path.len() - 1) as f64;
        assert!((var / (step * step) - 1.0).abs() < 0.05, "variance ratio {}", var / (step * step));
    }
}
