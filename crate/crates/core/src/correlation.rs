//! Binary entropy and the correlation algebra of the three-basis protocol.
//!
//! Bob's X/Y frame is rotated by an unknown angle β about Z relative to
//! Alice's:
//!
//! ```text
//! Z_B = Z_A
//! X_B = cos β X_A + sin β Y_A
//! Y_B = cos β Y_A − sin β X_A
//! ```
//!
//! Individual X/Y correlations depend on β, but the sum of their squares
//! ([`quality_parameter`]) does not.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::basis::BasisPair;
use crate::error::{Error, Result};

/// Shannon entropy of a Bernoulli(x) variable, in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("x", x, "[0, 1]"));
    }
    Ok(entropy(x))
}

/// Unchecked binary entropy; callers guarantee `x` is a probability.
pub(crate) fn entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Expectation values ⟨A_A B_B⟩ for the five protocol basis pairs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationSet {
    pub exp_xx: f64,
    pub exp_xy: f64,
    pub exp_yx: f64,
    pub exp_yy: f64,
    pub exp_zz: f64,
}

impl CorrelationSet {
    pub fn get(&self, pair: BasisPair) -> Option<f64> {
        match pair {
            BasisPair::XX => Some(self.exp_xx),
            BasisPair::XY => Some(self.exp_xy),
            BasisPair::YX => Some(self.exp_yx),
            BasisPair::YY => Some(self.exp_yy),
            BasisPair::ZZ => Some(self.exp_zz),
            _ => None,
        }
    }

    /// Builds the set from error rates via ⟨AB⟩ = 1 − 2E.
    pub fn from_error_rates(e_xx: f64, e_xy: f64, e_yx: f64, e_yy: f64, e_zz: f64) -> Self {
        CorrelationSet {
            exp_xx: 1.0 - 2.0 * e_xx,
            exp_xy: 1.0 - 2.0 * e_xy,
            exp_yx: 1.0 - 2.0 * e_yx,
            exp_yy: 1.0 - 2.0 * e_yy,
            exp_zz: 1.0 - 2.0 * e_zz,
        }
    }
}

/// Single-photon correlations under a frame rotation `beta` and uniform
/// depolarization with visibility `visibility`.
pub fn rotated_expectations(beta: f64, visibility: f64) -> Result<CorrelationSet> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::domain("visibility", visibility, "[0, 1]"));
    }
    let (s, c) = wrap_angle(beta).sin_cos();
    let v = visibility;
    Ok(CorrelationSet {
        exp_xx: v * c,
        exp_xy: -v * s,
        exp_yx: v * s,
        exp_yy: v * c,
        exp_zz: v,
    })
}

/// C = ⟨XX⟩² + ⟨XY⟩² + ⟨YX⟩² + ⟨YY⟩², clamped to the physical range [0, 2].
pub fn quality_parameter(c: &CorrelationSet) -> f64 {
    let raw = c.exp_xx.powi(2) + c.exp_xy.powi(2) + c.exp_yx.powi(2) + c.exp_yy.powi(2);
    raw.clamp(0.0, 2.0)
}

/// E = (1 − ⟨AB⟩)/2.
pub fn error_rate_from_expectation(e: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&e) {
        return Err(Error::domain("expectation", e, "[-1, 1]"));
    }
    Ok((1.0 - e) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
    }

    #[test]
    fn entropy_at_eleven_percent() {
        // 40-digit evaluation: 0.4999159581645279956...
        let h = binary_entropy(0.11).unwrap();
        assert!((h - 0.4999).abs() < 1e-4);
        assert!((h - 0.499_915_958_164_528).abs() < 1e-14);
    }

    #[test]
    fn entropy_rejects_out_of_range() {
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn identity_and_quarter_rotation() {
        let id = rotated_expectations(0.0, 1.0).unwrap();
        assert_eq!(
            (id.exp_xx, id.exp_xy, id.exp_yx, id.exp_yy, id.exp_zz),
            (1.0, 0.0, 0.0, 1.0, 1.0)
        );
        let q = rotated_expectations(FRAC_PI_2, 1.0).unwrap();
        assert!(q.exp_xx.abs() < 1e-15);
        assert!((q.exp_xy + 1.0).abs() < 1e-15);
        assert!((q.exp_yx - 1.0).abs() < 1e-15);
        assert!(q.exp_yy.abs() < 1e-15);
    }

    #[test]
    fn quality_parameter_examples() {
        let c = rotated_expectations(1.234, 1.0).unwrap();
        assert!((quality_parameter(&c) - 2.0).abs() < 1e-15);
        assert_eq!(quality_parameter(&CorrelationSet::default()), 0.0);
        let c = rotated_expectations(0.7, 0.95).unwrap();
        assert!((quality_parameter(&c) - 1.805).abs() < 1e-12);
    }

    #[test]
    fn quality_parameter_clamps_unphysical_sums() {
        let c = CorrelationSet {
            exp_xx: 1.0,
            exp_xy: 1.0,
            exp_yx: 0.5,
            exp_yy: 0.0,
            exp_zz: 1.0,
        };
        assert_eq!(quality_parameter(&c), 2.0);
    }

    #[test]
    fn error_rate_examples() {
        assert_eq!(error_rate_from_expectation(1.0).unwrap(), 0.0);
        assert_eq!(error_rate_from_expectation(-1.0).unwrap(), 1.0);
        assert!((error_rate_from_expectation(0.968).unwrap() - 0.016).abs() < 1e-15);
        assert!(error_rate_from_expectation(1.01).is_err());
    }

    #[test]
    fn angles_wrap() {
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(5.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_angle(-1e-300), 0.0);
        assert!(wrap_angle(-1e-300) < TAU);
    }
}
