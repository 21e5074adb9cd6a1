use serde::{Deserialize, Serialize};

use crate::basis::{BasisPair, Intensity};
use crate::channel::stats::ObservedStatistics;
use crate::error::{Error, Result};

pub const HISTOGRAM_BINS: usize = 200;
pub const HISTOGRAM_BIN_WIDTH: f64 = 1.0 / HISTOGRAM_BINS as f64;

/// Counts of X/Y error rates in bins `(k·w − w, k·w]`, labeled by their upper
/// edge. An error rate of exactly 0 lands in the first bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QberHistogram {
    pub counts: Vec<u64>,
    /// Segment/pair combinations with no detections, left out of the counts.
    pub skipped: u64,
}

impl Default for QberHistogram {
    fn default() -> Self {
        QberHistogram {
            counts: vec![0; HISTOGRAM_BINS],
            skipped: 0,
        }
    }
}

impl QberHistogram {
    pub fn bin_of(e: f64) -> usize {
        let k = (e * HISTOGRAM_BINS as f64).ceil().max(1.0) as usize;
        k.min(HISTOGRAM_BINS) - 1
    }

    pub fn upper_edge(bin: usize) -> f64 {
        (bin + 1) as f64 / HISTOGRAM_BINS as f64
    }

    pub fn add(&mut self, e: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::domain("qber", e, "[0, 1]"));
        }
        self.counts[Self::bin_of(e)] += 1;
        Ok(())
    }

    /// Adds the four raw signal X/Y error rates of one segment.
    pub fn add_segment(&mut self, stats: &ObservedStatistics) {
        for pair in BasisPair::ESTIMATION {
            match stats.qber(Intensity::Signal, pair) {
                Some(e) => self.counts[Self::bin_of(e)] += 1,
                None => self.skipped += 1,
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &QberHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.skipped += other.skipped;
    }
}

/// Histogram of the signal-intensity XX, XY, YX and YY error rates of each
/// segment, before any flip.
pub fn qber_histogram(segments: &[ObservedStatistics]) -> Result<QberHistogram> {
    if segments.is_empty() {
        return Err(Error::config("segments", "need at least one segment"));
    }
    let mut h = QberHistogram::default();
    for s in segments {
        h.add_segment(s);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::stats::CellCounts;

    #[test]
    fn bins_are_closed_on_the_right() {
        assert_eq!(QberHistogram::bin_of(0.5), 99);
        assert!((QberHistogram::upper_edge(99) - 0.5).abs() < 1e-15);
        assert_eq!(QberHistogram::bin_of(0.0), 0);
        assert_eq!(QberHistogram::bin_of(0.005), 0);
        assert_eq!(QberHistogram::bin_of(0.0051), 1);
        assert_eq!(QberHistogram::bin_of(1.0), 199);
    }

    #[test]
    fn single_half_segment() {
        let mut s = ObservedStatistics::default();
        for pair in BasisPair::ESTIMATION {
            *s.cell_mut(Intensity::Signal, pair) = CellCounts {
                sent: 100,
                detected: 10,
                errors: 5,
            };
        }
        let h = qber_histogram(&[s]).unwrap();
        assert_eq!(h.counts[99], 4);
        assert_eq!(h.total(), 4);
    }

    #[test]
    fn empty_cells_are_skipped() {
        let h = qber_histogram(&[ObservedStatistics::default()]).unwrap();
        assert_eq!(h.total(), 0);
        assert_eq!(h.skipped, 4);
        assert!(qber_histogram(&[]).is_err());
    }
}
