//! Key-rate analysis for decoy-state reference-frame-independent QKD.
//!
//! The pipeline runs from a channel model (or Monte Carlo counts) to
//! observed yields and error rates, through decoy-state bounds on the
//! single-photon contribution, to asymptotic and finite-size secret key
//! rates:
//!
//! ```
//! use rfiqkd::channel::{analytic_observables, ChannelModel};
//! use rfiqkd::config::ProtocolConfig;
//! use rfiqkd::decoy::asymptotic_rate_from_observables;
//!
//! let config = ProtocolConfig::default();
//! let model = ChannelModel::default().with_length(25.0);
//! let obs = analytic_observables(&config, &model, 0.3);
//! let report = asymptotic_rate_from_observables(&obs, &config).unwrap();
//! assert!(report.rate > 0.0);
//! ```

pub mod basis;
pub mod channel;
pub mod config;
pub mod correlation;
pub mod decoy;
pub mod error;
pub mod eve;
pub mod finite;
pub mod harness;
pub mod observables;

pub use basis::{Basis, BasisPair, Intensity};
pub use error::{Error, Result};
