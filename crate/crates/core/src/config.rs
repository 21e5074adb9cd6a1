//! Source and basis-choice parameters shared by the simulator and the
//! estimators.

use serde::{Deserialize, Serialize};

use crate::basis::{Basis, Intensity};
use crate::error::{Error, Result};

/// Failure probabilities of parameter estimation, privacy amplification,
/// error correction and the smoothing term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityEpsilons {
    pub pe: f64,
    pub pa: f64,
    pub ec: f64,
    pub bar: f64,
}

impl Default for SecurityEpsilons {
    fn default() -> Self {
        SecurityEpsilons {
            pe: 1e-5,
            pa: 1e-5,
            ec: 1e-5,
            bar: 1e-5,
        }
    }
}

impl SecurityEpsilons {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps_pe", self.pe),
            ("eps_pa", self.pa),
            ("eps_ec", self.ec),
            ("eps_bar", self.bar),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(name, format!("{v} must lie in (0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Signal mean photon number.
    pub mu: f64,
    /// Decoy mean photon number.
    pub nu: f64,
    /// Relative frequencies of signal, decoy and vacuum pulses.
    pub pulse_ratio: [f64; 3],
    pub p_z: f64,
    /// Probability of X, and separately of Y.
    pub p_xy: f64,
    pub eps_pe: f64,
    pub eps_pa: f64,
    pub eps_ec: f64,
    pub eps_bar: f64,
    pub n_total_pulses: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            mu: 0.6,
            nu: 0.2,
            pulse_ratio: [6.0, 2.0, 1.0],
            p_z: 1.0 / 3.0,
            p_xy: 1.0 / 3.0,
            eps_pe: 1e-5,
            eps_pa: 1e-5,
            eps_ec: 1e-5,
            eps_bar: 1e-5,
            n_total_pulses: 10_000_000,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::config("nu", format!("{} must be > 0", self.nu)));
        }
        if !(self.mu > self.nu && self.mu.is_finite()) {
            return Err(Error::config(
                "mu",
                format!("{} must exceed nu = {}", self.mu, self.nu),
            ));
        }
        if self.pulse_ratio.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::config(
                "pulse_ratio",
                format!("{:?} must be nonnegative", self.pulse_ratio),
            ));
        }
        if self.pulse_ratio.iter().sum::<f64>() <= 0.0 {
            return Err(Error::config("pulse_ratio", "weights sum to zero"));
        }
        for (name, p) in [("p_z", self.p_z), ("p_xy", self.p_xy)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(name, format!("{p} is not a probability")));
            }
        }
        if (self.p_z + 2.0 * self.p_xy - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "p_xy",
                format!("p_z + 2 p_xy = {} must equal 1", self.p_z + 2.0 * self.p_xy),
            ));
        }
        self.epsilons().validate()?;
        if self.n_total_pulses == 0 {
            return Err(Error::config("n_total_pulses", "must be at least 1"));
        }
        Ok(())
    }

    pub fn epsilons(&self) -> SecurityEpsilons {
        SecurityEpsilons {
            pe: self.eps_pe,
            pa: self.eps_pa,
            ec: self.eps_ec,
            bar: self.eps_bar,
        }
    }

    pub fn mean_photons(&self, intensity: Intensity) -> f64 {
        match intensity {
            Intensity::Signal => self.mu,
            Intensity::Decoy => self.nu,
            Intensity::Vacuum => 0.0,
        }
    }

    /// Pulse-ratio weights normalized to sum to one.
    pub fn intensity_weights(&self) -> [f64; 3] {
        let total: f64 = self.pulse_ratio.iter().sum();
        self.pulse_ratio.map(|w| w / total)
    }

    pub fn intensity_weight(&self, intensity: Intensity) -> f64 {
        self.intensity_weights()[intensity.index()]
    }

    pub fn basis_probability(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Z => self.p_z,
            Basis::X | Basis::Y => self.p_xy,
        }
    }

    pub fn with_total_pulses(mut self, n: u64) -> Self {
        self.n_total_pulses = n;
        self
    }
}
