use crate::basis::{Basis, BasisPair, Intensity};
use crate::channel::ChannelModel;
use crate::config::ProtocolConfig;
use crate::correlation::wrap_angle;
use crate::observables::{Observables, PairRates};

/// Gain of a Poisson source with the given mean photon number:
/// `Y₀ + (1 − Y₀)(1 − e^(−η·mean))`.
pub fn analytic_yield(model: &ChannelModel, mean_photons: f64) -> f64 {
    let y0 = model.background_yield();
    let signal = 1.0 - (-model.transmittance() * mean_photons).exp();
    y0 + signal - y0 * signal
}

/// Error probability of a photon-triggered click for a basis pair under
/// frame rotation `beta`.
pub fn signal_error_probability(visibility: f64, pair: BasisPair, beta: f64) -> f64 {
    let (s, c) = wrap_angle(beta).sin_cos();
    let m = match (pair.alice, pair.bob) {
        (Basis::Z, Basis::Z) => 1.0,
        (Basis::X, Basis::X) | (Basis::Y, Basis::Y) => c,
        (Basis::X, Basis::Y) => -s,
        (Basis::Y, Basis::X) => s,
        // Z against X/Y: no correlation
        _ => 0.0,
    };
    (1.0 - visibility * m) / 2.0
}

/// Error rate among detected events: dark clicks err half the time, photon
/// clicks with [`signal_error_probability`].
pub fn analytic_qber(model: &ChannelModel, mean_photons: f64, pair: BasisPair, beta: f64) -> f64 {
    let y0 = model.background_yield();
    let total = analytic_yield(model, mean_photons);
    if total == 0.0 {
        return 0.5;
    }
    let signal = 1.0 - (-model.transmittance() * mean_photons).exp();
    let e_sig = signal_error_probability(model.visibility, pair, beta);
    (0.5 * y0 + signal * (1.0 - y0) * e_sig) / total
}

/// Expected observables for a fixed frame angle, with no sampling noise.
pub fn analytic_observables(config: &ProtocolConfig, model: &ChannelModel, beta: f64) -> Observables {
    let rates = |intensity: Intensity| {
        let mean = config.mean_photons(intensity);
        let mut r = PairRates::uniform(0.0);
        for pair in BasisPair::PROTOCOL {
            *r.get_mut(pair) = analytic_qber(model, mean, pair, beta);
        }
        r
    };
    Observables {
        y_signal: analytic_yield(model, config.mu),
        y_decoy: analytic_yield(model, config.nu),
        y_vacuum: analytic_yield(model, 0.0),
        e_signal: rates(Intensity::Signal),
        e_decoy: rates(Intensity::Decoy),
    }
}
