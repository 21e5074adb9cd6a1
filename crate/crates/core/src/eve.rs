//! Upper bound on the eavesdropper's information per sifted key bit, given
//! the key-basis error rate and the quality parameter C.

use serde::{Deserialize, Serialize};

use crate::correlation::entropy;
use crate::error::{Error, Result};

/// I_E together with the two intermediate correlations it is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveInformation {
    pub i_e: f64,
    pub v_max: f64,
    pub f_v_max: f64,
}

/// Evaluates
///
/// ```text
/// v_max = min(√(C/2) / (1 − e), 1)
/// f     = √(C/2 − (1 − e)² v_max²) / e
/// I_E   = (1 − e) h((1 + v_max)/2) + e h((1 + f)/2)
/// ```
///
/// `f` is capped at 1: past C/2 = (1 − e)² + e² no physical state matches the
/// inputs and the second term is already zero at the cap. At `e = 0` the
/// second term vanishes.
pub fn eve_information(e_zz: f64, c: f64) -> Result<EveInformation> {
    if !(0.0..1.0).contains(&e_zz) {
        return Err(Error::domain("e_zz", e_zz, "[0, 1)"));
    }
    if !(0.0..=2.0).contains(&c) {
        return Err(Error::domain("c", c, "[0, 2]"));
    }
    let half_c = c / 2.0;
    let keep = 1.0 - e_zz;
    let v_unclamped = half_c.sqrt() / keep;
    let v_max = v_unclamped.min(1.0);
    // below the clamp the radicand is zero exactly; skip the cancellation
    let f_v_max = if e_zz == 0.0 || v_unclamped <= 1.0 {
        0.0
    } else {
        ((half_c - keep * keep).sqrt() / e_zz).min(1.0)
    };
    let mut i_e = keep * entropy((1.0 + v_max) / 2.0);
    if e_zz > 0.0 {
        i_e += e_zz * entropy((1.0 + f_v_max) / 2.0);
    }
    Ok(EveInformation {
        i_e: i_e.clamp(0.0, 1.0),
        v_max,
        f_v_max,
    })
}

/// I_E for a single-photon source with observed key error `e_zz` and
/// quality parameter `c`.
pub fn single_photon_eve_information(e_zz: f64, c: f64) -> Result<f64> {
    eve_information(e_zz, c).map(|r| r.i_e)
}
