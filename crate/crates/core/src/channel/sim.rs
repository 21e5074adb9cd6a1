use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{Basis, BasisPair, Intensity};
use crate::channel::analytic::signal_error_probability;
use crate::channel::stats::{GroundTruth, ObservedStatistics};
use crate::channel::{ChannelModel, DriftProcess};
use crate::config::ProtocolConfig;
use crate::error::Result;

/// Pulses per parallel work unit. Each chunk draws from its own ChaCha
/// stream, so results do not depend on the number of threads.
pub const CHUNK_PULSES: u64 = 1 << 20;

/// β is held constant over blocks of this many pulses.
pub const DRIFT_BLOCK_PULSES: u64 = 1024;

const TWO_POW_32: f64 = 4_294_967_296.0;

/// Threshold such that `(u32 as u64) < t` has probability `p`.
fn u32_threshold(p: f64) -> u64 {
    (p.clamp(0.0, 1.0) * TWO_POW_32).round() as u64
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Poisson CDF out to where the tail drops below 2⁻⁵³.
fn poisson_cdf(mean: f64) -> Vec<f64> {
    let mut cdf = Vec::new();
    let mut p = (-mean).exp();
    let mut acc = 0.0;
    let mut n = 0u32;
    loop {
        acc += p;
        cdf.push(acc);
        if 1.0 - acc < 1e-17 || n > 200 {
            break;
        }
        n += 1;
        p *= mean / n as f64;
    }
    // anything past the table lands in the last entry
    *cdf.last_mut().unwrap() = 1.0;
    cdf
}

struct Plan {
    intensity_t: [u64; 2],
    basis_t: [u64; 2],
    photon_cdf: [Vec<f64>; 3],
    p_click: Vec<f64>,
    dark_t: u64,
    visibility: f64,
}

impl Plan {
    fn new(config: &ProtocolConfig, model: &ChannelModel) -> Self {
        let w = config.intensity_weights();
        let photon_cdf = Intensity::ALL.map(|i| poisson_cdf(config.mean_photons(i)));
        let max_n = photon_cdf.iter().map(Vec::len).max().unwrap();
        let eta = model.transmittance();
        Plan {
            intensity_t: [u32_threshold(w[0]), u32_threshold(w[0] + w[1])],
            basis_t: [u32_threshold(config.p_xy), u32_threshold(2.0 * config.p_xy)],
            photon_cdf,
            p_click: (0..max_n).map(|n| 1.0 - (1.0 - eta).powi(n as i32)).collect(),
            dark_t: u32_threshold(model.background_yield()),
            visibility: model.visibility,
        }
    }

    #[inline]
    fn basis(&self, u: u64) -> Basis {
        if u < self.basis_t[0] {
            Basis::X
        } else if u < self.basis_t[1] {
            Basis::Y
        } else {
            Basis::Z
        }
    }

    #[inline]
    fn intensity(&self, u: u64) -> Intensity {
        if u < self.intensity_t[0] {
            Intensity::Signal
        } else if u < self.intensity_t[1] {
            Intensity::Decoy
        } else {
            Intensity::Vacuum
        }
    }

    fn run_chunk(
        &self,
        seed: u64,
        chunk: u64,
        start: u64,
        end: u64,
        beta_path: &[f64],
    ) -> (ObservedStatistics, GroundTruth) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk + 1);
        let mut obs = ObservedStatistics::default();
        let mut truth = GroundTruth::default();
        let mut e_sig = [0.0f64; BasisPair::COUNT];

        let mut pos = start;
        while pos < end {
            let block = (pos / DRIFT_BLOCK_PULSES) as usize;
            let block_end = ((block as u64 + 1) * DRIFT_BLOCK_PULSES).min(end);
            let beta = beta_path[block];
            for (k, e) in e_sig.iter_mut().enumerate() {
                *e = signal_error_probability(self.visibility, BasisPair::from_index(k), beta);
            }
            let len = (block_end - pos) as f64;
            let (s, c) = beta.sin_cos();
            obs.beta_cos_sum += c * len;
            obs.beta_sin_sum += s * len;

            for _ in pos..block_end {
                let a = rng.next_u64();
                let b = rng.next_u64();
                let intensity = self.intensity(a >> 32);
                let pair = BasisPair::new(self.basis(a & 0xffff_ffff), self.basis(b >> 32));
                let p = pair.index();

                let cdf = &self.photon_cdf[intensity.index()];
                let photons = if cdf.len() == 1 {
                    0
                } else {
                    let u = unit_f64(&mut rng);
                    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
                };

                let error_prob = if (b & 0xffff_ffff) < self.dark_t {
                    0.5
                } else if photons > 0 && unit_f64(&mut rng) < self.p_click[photons] {
                    e_sig[p]
                } else {
                    obs.cells[intensity.index()][p].sent += 1;
                    truth.cell_mut(photons, pair).sent += 1;
                    continue;
                };
                let error = (unit_f64(&mut rng) < error_prob) as u64;

                let cell = &mut obs.cells[intensity.index()][p];
                cell.sent += 1;
                cell.detected += 1;
                cell.errors += error;
                let cell = truth.cell_mut(photons, pair);
                cell.sent += 1;
                cell.detected += 1;
                cell.errors += error;
            }
            pos = block_end;
        }
        (obs, truth)
    }
}

/// Simulates `config.n_total_pulses` rounds and returns the announced
/// statistics together with photon-number ground truth.
///
/// Every round samples intensity, Alice's and Bob's bases, and the photon
/// number. A dark click (probability Y₀) yields a random bit; otherwise
/// each photon is detected with probability η and the bit errs with the
/// pair's probability at the current β. Output is a pure function of the
/// arguments and `seed`.
pub fn simulate_rounds(
    config: &ProtocolConfig,
    model: &ChannelModel,
    drift: &DriftProcess,
    seed: u64,
) -> Result<(ObservedStatistics, GroundTruth)> {
    config.validate()?;
    model.validate()?;
    drift.validate()?;
    let total = config.n_total_pulses;
    let blocks = total.div_ceil(DRIFT_BLOCK_PULSES) as usize;
    let beta_path = drift.block_path(blocks, DRIFT_BLOCK_PULSES, seed);
    let plan = Plan::new(config, model);

    let chunks = total.div_ceil(CHUNK_PULSES);
    let parts: Vec<_> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_PULSES;
            let end = (start + CHUNK_PULSES).min(total);
            plan.run_chunk(seed, c, start, end, &beta_path)
        })
        .collect();

    let mut obs = ObservedStatistics::default();
    let mut truth = GroundTruth::default();
    for (o, t) in &parts {
        obs.merge(o);
        truth.merge(t);
    }
    Ok((obs, truth))
}
