//! Rates the decoy estimator consumes: per-intensity yields and per-pair
//! error rates.

use serde::{Deserialize, Serialize};

use crate::basis::{BasisPair, Intensity};

/// Error rates of the five protocol basis pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRates {
    pub zz: f64,
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl PairRates {
    pub fn uniform(value: f64) -> Self {
        PairRates {
            zz: value,
            xx: value,
            xy: value,
            yx: value,
            yy: value,
        }
    }

    /// # Panics
    /// If `pair` mixes Z with X or Y.
    pub fn get(&self, pair: BasisPair) -> f64 {
        match pair {
            BasisPair::ZZ => self.zz,
            BasisPair::XX => self.xx,
            BasisPair::XY => self.xy,
            BasisPair::YX => self.yx,
            BasisPair::YY => self.yy,
            other => panic!("{other} is not a protocol basis pair"),
        }
    }

    pub fn get_mut(&mut self, pair: BasisPair) -> &mut f64 {
        match pair {
            BasisPair::ZZ => &mut self.zz,
            BasisPair::XX => &mut self.xx,
            BasisPair::XY => &mut self.xy,
            BasisPair::YX => &mut self.yx,
            BasisPair::YY => &mut self.yy,
            other => panic!("{other} is not a protocol basis pair"),
        }
    }

    pub fn estimation(&self) -> [f64; 4] {
        [self.xx, self.xy, self.yx, self.yy]
    }
}

/// Which estimation pairs (XX, XY, YX, YY order) had Bob's bits relabeled.
pub type FlipSet = [bool; 4];

/// Observed yields Y_μ, Y_ν, Y_0 and the signal/decoy error rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub y_signal: f64,
    pub y_decoy: f64,
    pub y_vacuum: f64,
    pub e_signal: PairRates,
    /// Collected for diagnostics; the bound chain only uses signal errors.
    pub e_decoy: PairRates,
}

impl Observables {
    pub fn yield_of(&self, intensity: Intensity) -> f64 {
        match intensity {
            Intensity::Signal => self.y_signal,
            Intensity::Decoy => self.y_decoy,
            Intensity::Vacuum => self.y_vacuum,
        }
    }

    /// Relabels Bob's bits for every estimation pair whose signal error
    /// rate is below ½, at both intensities, so that all four signal error
    /// rates end up ≥ ½.
    pub fn normalize_flip_convention(&self) -> (Observables, FlipSet) {
        let mut out = *self;
        let mut flips = [false; 4];
        for (k, pair) in BasisPair::ESTIMATION.into_iter().enumerate() {
            if self.e_signal.get(pair) < 0.5 {
                flips[k] = true;
                *out.e_signal.get_mut(pair) = 1.0 - self.e_signal.get(pair);
                *out.e_decoy.get_mut(pair) = 1.0 - self.e_decoy.get(pair);
            }
        }
        (out, flips)
    }

    /// Yields should satisfy Y_μ ≥ Y_ν ≥ Y_0; finite samples may not.
    pub fn yield_ordering_violated(&self) -> bool {
        !(self.y_signal >= self.y_decoy && self.y_decoy >= self.y_vacuum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Observables {
        Observables {
            y_signal: 0.03,
            y_decoy: 0.01,
            y_vacuum: 8e-5,
            e_signal: PairRates {
                zz: 0.0035,
                xx: 0.4,
                xy: 0.9,
                yx: 0.2,
                yy: 0.6,
            },
            e_decoy: PairRates {
                zz: 0.005,
                xx: 0.55,
                xy: 0.8,
                yx: 0.3,
                yy: 0.6,
            },
        }
    }

    #[test]
    fn flip_is_driven_by_signal_intensity() {
        let (f, flips) = sample().normalize_flip_convention();
        assert_eq!(flips, [true, false, true, false]);
        assert!((f.e_signal.xx - 0.6).abs() < 1e-15);
        assert!((f.e_decoy.xx - 0.45).abs() < 1e-15);
        assert_eq!(f.e_signal.zz, 0.0035);
        assert!(f.e_signal.estimation().iter().all(|&e| e >= 0.5));
    }

    #[test]
    fn flip_is_idempotent() {
        let (once, _) = sample().normalize_flip_convention();
        let (twice, flips) = once.normalize_flip_convention();
        assert_eq!(once, twice);
        assert_eq!(flips, [false; 4]);
    }
}
