use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, DriftProcess};
use crate::config::ProtocolConfig;
use crate::error::{Error, Result};

/// Where observed statistics come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Expected rates from the channel model, no sampling noise.
    Analytic,
    /// Counted statistics from the Monte Carlo simulator.
    #[serde(alias = "monte-carlo")]
    #[value(alias = "monte-carlo")]
    Mc,
}

/// Frame-drift settings; the pulse rate comes from the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSettings {
    pub sigma_rad_per_sqrt_s: f64,
    /// Also the fixed frame angle used in analytic mode.
    pub beta_initial: f64,
}

impl Default for DriftSettings {
    fn default() -> Self {
        let d = DriftProcess::default();
        DriftSettings {
            sigma_rad_per_sqrt_s: d.sigma_rad_per_sqrt_s,
            beta_initial: d.beta_initial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramSettings {
    pub segments: u64,
    pub segment_pulses: u64,
    pub length_km: f64,
    /// Draw an independent uniform β for every segment instead of following
    /// the drift process.
    pub uniform_beta: bool,
}

impl Default for HistogramSettings {
    fn default() -> Self {
        HistogramSettings {
            segments: 10_000,
            segment_pulses: 100_000,
            length_km: 0.0,
            uniform_beta: true,
        }
    }
}

/// Everything one CLI invocation needs. Missing keys take the defaults;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub sweep_km: Vec<f64>,
    pub segment_seconds: Vec<f64>,
    pub pulse_rate_hz: f64,
    pub seed: u64,
    /// Monte Carlo repetitions per sweep point.
    pub seeds: u32,
    pub output_dir: PathBuf,
    pub protocol: ProtocolConfig,
    pub channel: ChannelModel,
    pub drift: DriftSettings,
    pub histogram: HistogramSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Analytic,
            sweep_km: (0..=20).map(|k| 5.0 * k as f64).collect(),
            segment_seconds: vec![5.0, 50.0, 200.0],
            pulse_rate_hz: 1e6,
            seed: 1,
            seeds: 1,
            output_dir: PathBuf::from("out"),
            protocol: ProtocolConfig::default(),
            channel: ChannelModel::default(),
            drift: DriftSettings::default(),
            histogram: HistogramSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            let (field, line) = locate(text, e.span());
            Error::config(field, format!("{} (line {line})", e.message()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep_km.is_empty() {
            return Err(Error::config("sweep_km", "sweep is empty"));
        }
        if let Some(km) = self.sweep_km.iter().find(|k| !(**k >= 0.0 && k.is_finite())) {
            return Err(Error::config("sweep_km", format!("{km} is not a length")));
        }
        if let Some(s) = self.segment_seconds.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::config("segment_seconds", format!("{s} must be > 0")));
        }
        if self.seeds == 0 {
            return Err(Error::config("seeds", "need at least one repetition"));
        }
        if self.histogram.segments == 0 {
            return Err(Error::config("histogram.segments", "need at least one segment"));
        }
        if self.histogram.segment_pulses == 0 {
            return Err(Error::config("histogram.segment_pulses", "must be at least 1"));
        }
        if !(self.histogram.length_km >= 0.0 && self.histogram.length_km.is_finite()) {
            return Err(Error::config("histogram.length_km", "must be finite and >= 0"));
        }
        self.protocol.validate().map_err(|e| prefix(e, "protocol"))?;
        self.channel.validate().map_err(|e| prefix(e, "channel"))?;
        self.drift().validate().map_err(|e| match e {
            Error::Config { field, message } if field == "pulse_rate_hz" => Error::Config { field, message },
            e => prefix(e, "drift"),
        })?;
        Ok(())
    }

    pub fn drift(&self) -> DriftProcess {
        DriftProcess {
            sigma_rad_per_sqrt_s: self.drift.sigma_rad_per_sqrt_s,
            beta_initial: self.drift.beta_initial,
            pulse_rate_hz: self.pulse_rate_hz,
        }
    }

    pub fn channel_at(&self, km: f64) -> ChannelModel {
        self.channel.clone().with_length(km)
    }
}

fn prefix(e: Error, section: &str) -> Error {
    match e {
        Error::Config { field, message } => Error::Config {
            field: format!("{section}.{field}"),
            message,
        },
        e => e,
    }
}

/// Dotted key and line number of the TOML entry containing `span`.
fn locate(text: &str, span: Option<std::ops::Range<usize>>) -> (String, usize) {
    let Some(span) = span else {
        return ("config".into(), 0);
    };
    let start = span.start.min(text.len());
    let line_no = text[..start].matches('\n').count() + 1;
    let mut section = None;
    let mut key = None;
    for (k, line) in text.lines().enumerate().take(line_no).collect::<Vec<_>>().into_iter().rev() {
        let line = line.trim();
        if k + 1 == line_no {
            key = line.split_once('=').map(|(k, _)| k.trim().to_owned());
        }
        if line.starts_with('[') {
            section = Some(line.trim_matches(|c| c == '[' || c == ']').trim().to_owned());
            break;
        }
    }
    let field = match (section, key) {
        (Some(s), Some(k)) => format!("{s}.{k}"),
        (None, Some(k)) => k,
        (Some(s), None) => s,
        (None, None) => "config".into(),
    };
    (field, line_no)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn sections_override_defaults() {
        let c = RunConfig::from_toml_str(
            "mode = \"mc\"\nsweep_km = [0.0, 25.0]\n[protocol]\nmu = 0.5\n[channel]\nvisibility = 0.99\n",
        )
        .unwrap();
        assert_eq!(c.mode, Mode::Mc);
        assert_eq!(c.protocol.mu, 0.5);
        assert_eq!(c.protocol.nu, 0.2);
        assert_eq!(c.channel.visibility, 0.99);
        let c = RunConfig::from_toml_str("mode = \"monte-carlo\"").unwrap();
        assert_eq!(c.mode, Mode::Mc);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::from_toml_str("[protocol]\nmuu = 0.5\n").unwrap_err().to_string();
        assert!(err.contains("muu"), "{err}");
        let err = RunConfig::from_toml_str("seed = 3\n[channel]\nvisibility = \"high\"\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "channel.visibility"), "{err}");
        let err = RunConfig::from_toml_str("seeds = -2\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "seeds"), "{err}");
    }

    #[test]
    fn range_errors_are_named() {
        let field = |text: &str| match RunConfig::from_toml_str(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field("sweep_km = []"), "sweep_km");
        assert_eq!(field("segment_seconds = [5.0, 0.0]"), "segment_seconds");
        assert_eq!(field("[protocol]\nnu = 0.7\n"), "protocol.mu");
        assert_eq!(field("[channel]\ndark_count_per_gate = -1e-5\n"), "channel.dark_count_per_gate");
        assert_eq!(field("[drift]\nsigma_rad_per_sqrt_s = -1.0\n"), "drift.sigma_rad_per_sqrt_s");
        assert_eq!(field("pulse_rate_hz = 0.0"), "pulse_rate_hz");
        assert_eq!(field("seeds = 0"), "seeds");
    }
}
