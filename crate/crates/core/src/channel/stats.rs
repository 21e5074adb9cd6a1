use serde::{Deserialize, Serialize};

use crate::basis::{BasisPair, Intensity};
use crate::error::{Error, Result};
use crate::observables::{FlipSet, Observables, PairRates};

/// Photon numbers at or above this share the last [`GroundTruth`] bucket.
pub const GROUND_TRUTH_MAX_PHOTONS: usize = 10;

/// Counts for one (intensity, basis pair) or (photon number, basis pair) cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub sent: u64,
    pub detected: u64,
    pub errors: u64,
}

impl CellCounts {
    pub fn merge(&mut self, other: &CellCounts) {
        self.sent += other.sent;
        self.detected += other.detected;
        self.errors += other.errors;
    }

    /// detected / sent, or `None` if nothing was sent.
    pub fn yield_rate(&self) -> Option<f64> {
        (self.sent > 0).then(|| self.detected as f64 / self.sent as f64)
    }

    /// errors / detected, or `None` if nothing was detected.
    pub fn error_rate(&self) -> Option<f64> {
        (self.detected > 0).then(|| self.errors as f64 / self.detected as f64)
    }

    fn flip(&mut self) {
        self.errors = self.detected - self.errors;
    }
}

/// What Alice and Bob can see: counts keyed by announced intensity and bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedStatistics {
    pub cells: [[CellCounts; BasisPair::COUNT]; 3],
    /// Σ cos β and Σ sin β over all rounds, for the segment-mean angle.
    pub beta_cos_sum: f64,
    pub beta_sin_sum: f64,
}

impl Default for ObservedStatistics {
    fn default() -> Self {
        ObservedStatistics {
            cells: [[CellCounts::default(); BasisPair::COUNT]; 3],
            beta_cos_sum: 0.0,
            beta_sin_sum: 0.0,
        }
    }
}

impl ObservedStatistics {
    pub fn cell(&self, intensity: Intensity, pair: BasisPair) -> &CellCounts {
        &self.cells[intensity.index()][pair.index()]
    }

    pub fn cell_mut(&mut self, intensity: Intensity, pair: BasisPair) -> &mut CellCounts {
        &mut self.cells[intensity.index()][pair.index()]
    }

    /// Pulses of this intensity sent, over all basis pairs.
    pub fn sent(&self, intensity: Intensity) -> u64 {
        self.cells[intensity.index()].iter().map(|c| c.sent).sum()
    }

    pub fn detected(&self, intensity: Intensity) -> u64 {
        self.cells[intensity.index()].iter().map(|c| c.detected).sum()
    }

    pub fn total_sent(&self) -> u64 {
        Intensity::ALL.iter().map(|&i| self.sent(i)).sum()
    }

    /// Y for an intensity, pooled over basis pairs (the yield does not depend
    /// on the basis).
    pub fn yield_of(&self, intensity: Intensity) -> Option<f64> {
        let sent = self.sent(intensity);
        (sent > 0).then(|| self.detected(intensity) as f64 / sent as f64)
    }

    pub fn qber(&self, intensity: Intensity, pair: BasisPair) -> Option<f64> {
        self.cell(intensity, pair).error_rate()
    }

    /// Circular mean of β over all simulated rounds.
    pub fn mean_beta(&self) -> Option<f64> {
        (self.beta_cos_sum != 0.0 || self.beta_sin_sum != 0.0)
            .then(|| crate::correlation::wrap_angle(self.beta_sin_sum.atan2(self.beta_cos_sum)))
    }

    /// Adds `other`'s counts into `self`.
    pub fn merge(&mut self, other: &ObservedStatistics) {
        for (mine, theirs) in self.cells.iter_mut().zip(&other.cells) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                a.merge(b);
            }
        }
        self.beta_cos_sum += other.beta_cos_sum;
        self.beta_sin_sum += other.beta_sin_sum;
    }

    /// Applies the flip decision of [`Observables::normalize_flip_convention`]
    /// at the count level: a pair is relabeled when its signal error rate is
    /// below ½, and then at every intensity.
    pub fn normalize_flip_convention(&self) -> (ObservedStatistics, FlipSet) {
        let mut out = self.clone();
        let mut flips = [false; 4];
        for (k, pair) in BasisPair::ESTIMATION.into_iter().enumerate() {
            let flip = matches!(self.qber(Intensity::Signal, pair), Some(e) if e < 0.5);
            if flip {
                flips[k] = true;
                for intensity in Intensity::ALL {
                    out.cell_mut(intensity, pair).flip();
                }
            }
        }
        (out, flips)
    }

    /// Converts counts to rates. Refuses when any intensity has no pulses or
    /// any signal protocol cell has no detections; decoy error rates with no
    /// detections are reported as NaN since the bounds never use them.
    pub fn observables(&self) -> Result<Observables> {
        let mut yields = [0.0; 3];
        for intensity in Intensity::ALL {
            yields[intensity.index()] =
                self.yield_of(intensity).ok_or(Error::IncompleteStatistics {
                    intensity,
                    pair: BasisPair::ZZ,
                    what: "sent pulses",
                })?;
        }
        let mut e_signal = PairRates::uniform(0.0);
        let mut e_decoy = PairRates::uniform(f64::NAN);
        for pair in BasisPair::PROTOCOL {
            *e_signal.get_mut(pair) =
                self.qber(Intensity::Signal, pair)
                    .ok_or(Error::IncompleteStatistics {
                        intensity: Intensity::Signal,
                        pair,
                        what: "detections",
                    })?;
            if let Some(e) = self.qber(Intensity::Decoy, pair) {
                *e_decoy.get_mut(pair) = e;
            }
        }
        Ok(Observables {
            y_signal: yields[0],
            y_decoy: yields[1],
            y_vacuum: yields[2],
            e_signal,
            e_decoy,
        })
    }
}

/// Simulator-only bookkeeping keyed by the true photon number of each pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub cells: [[CellCounts; BasisPair::COUNT]; GROUND_TRUTH_MAX_PHOTONS + 1],
}

impl Default for GroundTruth {
    fn default() -> Self {
        GroundTruth {
            cells: [[CellCounts::default(); BasisPair::COUNT]; GROUND_TRUTH_MAX_PHOTONS + 1],
        }
    }
}

impl GroundTruth {
    fn bucket(photons: usize) -> usize {
        photons.min(GROUND_TRUTH_MAX_PHOTONS)
    }

    pub fn cell(&self, photons: usize, pair: BasisPair) -> &CellCounts {
        &self.cells[Self::bucket(photons)][pair.index()]
    }

    pub fn cell_mut(&mut self, photons: usize, pair: BasisPair) -> &mut CellCounts {
        &mut self.cells[Self::bucket(photons)][pair.index()]
    }

    pub fn merge(&mut self, other: &GroundTruth) {
        for (mine, theirs) in self.cells.iter_mut().zip(&other.cells) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                a.merge(b);
            }
        }
    }

    /// True n-photon yield y_n, pooled over basis pairs and intensities.
    pub fn yield_n(&self, photons: usize) -> Option<f64> {
        let row = &self.cells[Self::bucket(photons)];
        let sent: u64 = row.iter().map(|c| c.sent).sum();
        let detected: u64 = row.iter().map(|c| c.detected).sum();
        (sent > 0).then(|| detected as f64 / sent as f64)
    }

    /// True n-photon error rate for one basis pair.
    pub fn error_n(&self, photons: usize, pair: BasisPair) -> Option<f64> {
        self.cell(photons, pair).error_rate()
    }

    /// True single-photon quality parameter Σ (1 − 2e₁)² over the four
    /// estimation pairs. Invariant under bit flips.
    pub fn single_photon_quality(&self) -> Option<f64> {
        BasisPair::ESTIMATION
            .iter()
            .map(|&p| self.error_n(1, p).map(|e| (1.0 - 2.0 * e).powi(2)))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled() -> ObservedStatistics {
        let mut s = ObservedStatistics::default();
        for intensity in Intensity::ALL {
            for pair in BasisPair::all() {
                *s.cell_mut(intensity, pair) = CellCounts {
                    sent: 10_000,
                    detected: 1000,
                    errors: 500,
                };
            }
        }
        s
    }

    #[test]
    fn complement_flip() {
        let mut s = filled();
        s.cell_mut(Intensity::Signal, BasisPair::XX).errors = 100;
        s.cell_mut(Intensity::Decoy, BasisPair::XX).errors = 550;
        let (f, flips) = s.normalize_flip_convention();
        assert_eq!(flips, [true, false, false, false]);
        assert_eq!(f.cell(Intensity::Signal, BasisPair::XX).errors, 900);
        assert_eq!(f.qber(Intensity::Signal, BasisPair::XX), Some(0.9));
        assert_eq!(f.qber(Intensity::Decoy, BasisPair::XX), Some(0.45));
        assert_eq!(f.cell(Intensity::Signal, BasisPair::XY).errors, 500);
    }

    #[test]
    fn already_normalized_is_unchanged() {
        let s = filled();
        let (f, flips) = s.normalize_flip_convention();
        assert_eq!(f, s);
        assert_eq!(flips, [false; 4]);
    }

    #[test]
    fn refuses_missing_detections() {
        let mut s = filled();
        s.cell_mut(Intensity::Signal, BasisPair::YX).detected = 0;
        s.cell_mut(Intensity::Signal, BasisPair::YX).errors = 0;
        assert_eq!(
            s.observables(),
            Err(Error::IncompleteStatistics {
                intensity: Intensity::Signal,
                pair: BasisPair::YX,
                what: "detections"
            })
        );
    }

    #[test]
    fn refuses_missing_intensity() {
        let mut s = filled();
        s.cells[Intensity::Vacuum.index()] = [CellCounts::default(); BasisPair::COUNT];
        let err = s.observables().unwrap_err();
        assert!(err.to_string().contains("vacuum"), "{err}");
    }

    #[test]
    fn merge_adds_counts() {
        let mut a = filled();
        a.merge(&filled());
        assert_eq!(a.sent(Intensity::Decoy), 2 * 9 * 10_000);
        assert_eq!(a.yield_of(Intensity::Decoy), Some(0.1));
    }

    #[test]
    fn photon_numbers_above_cap_share_a_bucket() {
        let mut g = GroundTruth::default();
        g.cell_mut(14, BasisPair::ZZ).sent += 1;
        g.cell_mut(10, BasisPair::ZZ).sent += 1;
        assert_eq!(g.cell(GROUND_TRUTH_MAX_PHOTONS, BasisPair::ZZ).sent, 2);
    }
}
