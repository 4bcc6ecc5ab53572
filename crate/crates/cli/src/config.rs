//! Scenario configuration: flat `key = value` files with unit suffixes.
//!
//! One assignment per line, `#` starts a comment, dotted keys group
//! related settings. Physical quantities must carry a unit suffix
//! (`20ns`, `60.0mV`); dimensionless values must not. Times accept
//! `s`, `ms`, `us`, `ns`; voltages accept `V`, `mV`, `uV`. Every key is
//! optional and defaults to the reference scenario, so an empty file is
//! a valid config.
//!
//! Serialization is canonical (fixed key order, native units), which
//! makes the config digest independent of formatting and unit spelling.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use twinqkd::protocol::{ChannelModel, DetectionPolicy, SessionConfig};
use twinqkd::channel::ChannelParams;
use twinqkd::source::SourceParams;

/// What the signal beam passes through in this scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    None,
    Tap,
    InterceptResend,
}

impl AttackKind {
    fn as_str(&self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::Tap => "tap",
            AttackKind::InterceptResend => "intercept_resend",
        }
    }
}

/// Sweep-specific settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub taps: Vec<f64>,
    pub sessions: usize,
    pub noise_samples: usize,
}

/// A complete, runnable scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub source: SourceParams,
    pub attack: AttackKind,
    pub tap_fraction: f64,
    pub key_length: usize,
    pub n_samples: usize,
    pub calibration_samples: usize,
    pub test_fraction: f64,
    pub detect_sigma: f64,
    pub seed: u64,
    pub out_dir: String,
    pub sweep: SweepSettings,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            source: SourceParams::reference(),
            attack: AttackKind::None,
            tap_fraction: 0.0,
            key_length: 2_000,
            n_samples: 100_000,
            calibration_samples: 100_000,
            test_fraction: 0.1,
            detect_sigma: 5.0,
            seed: 42,
            out_dir: "out".into(),
            sweep: SweepSettings {
                taps: vec![0.0, 0.1, 0.2, 0.5],
                sessions: 200,
                noise_samples: 1_000_000,
            },
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config `{}`", path.display()))?;
        Scenario::parse(&text)
    }

    /// Parse the flat key-value grammar. Diagnostics name the offending
    /// key and line.
    pub fn parse(text: &str) -> Result<Scenario> {
        let mut scenario = Scenario::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow!("line {line_no}: expected `key = value`, got `{line}`")
            })?;
            let key = key.trim();
            let value = value.trim();
            scenario
                .apply(key, value)
                .map_err(|e| anyhow!("line {line_no}: key `{key}`: {e}"))?;
        }
        Ok(scenario)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "source.xi" => self.source.xi = dimensionless(value)?,
            "source.eta0" => self.source.eta0 = dimensionless(value)?,
            "source.omega" => self.source.omega = dimensionless(value)?,
            "source.cavity_storage_time" => {
                self.source.cavity_storage_time_s = time_seconds(value)?
            }
            "source.mean_current" => self.source.mean_current_mv = voltage_mv(value)?,
            "source.shot_noise_std" => self.source.shot_noise_std_mv = voltage_mv(value)?,
            "source.excess_factor" => self.source.excess_factor = dimensionless(value)?,
            "source.sample_interval" => self.source.sample_interval_s = time_seconds(value)?,
            "source.cavity_memory" => self.source.cavity_memory = boolean(value)?,
            "channel.attack" => {
                self.attack = match value {
                    "none" => AttackKind::None,
                    "tap" => AttackKind::Tap,
                    "intercept_resend" => AttackKind::InterceptResend,
                    other => bail!("unknown attack `{other}` (none, tap, intercept_resend)"),
                }
            }
            "channel.tap_fraction" => self.tap_fraction = dimensionless(value)?,
            "protocol.key_length" => self.key_length = integer(value)?,
            "protocol.n_samples" => self.n_samples = integer(value)?,
            "protocol.calibration_samples" => self.calibration_samples = integer(value)?,
            "protocol.test_fraction" => self.test_fraction = dimensionless(value)?,
            "detect.sigma" => self.detect_sigma = dimensionless(value)?,
            "sweep.taps" => self.sweep.taps = dimensionless_list(value)?,
            "sweep.sessions" => self.sweep.sessions = integer(value)?,
            "sweep.noise_samples" => self.sweep.noise_samples = integer(value)?,
            "seed" => self.seed = value.parse().map_err(|_| anyhow!("bad seed `{value}`"))?,
            "out_dir" => self.out_dir = value.to_string(),
            other => bail!("unknown key `{other}`"),
        }
        Ok(())
    }

    /// Canonical serialization: every key, fixed order, native units.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let s = &self.source;
        let _ = write!(
            out,
            "source.xi = {}\n\
             source.eta0 = {}\n\
             source.omega = {}\n\
             source.cavity_storage_time = {}s\n\
             source.mean_current = {}mV\n\
             source.shot_noise_std = {}mV\n\
             source.excess_factor = {}\n\
             source.sample_interval = {}s\n\
             source.cavity_memory = {}\n\
             channel.attack = {}\n\
             channel.tap_fraction = {}\n\
             protocol.key_length = {}\n\
             protocol.n_samples = {}\n\
             protocol.calibration_samples = {}\n\
             protocol.test_fraction = {}\n\
             detect.sigma = {}\n\
             sweep.taps = {}\n\
             sweep.sessions = {}\n\
             sweep.noise_samples = {}\n\
             seed = {}\n\
             out_dir = {}\n",
            s.xi,
            s.eta0,
            s.omega,
            s.cavity_storage_time_s,
            s.mean_current_mv,
            s.shot_noise_std_mv,
            s.excess_factor,
            s.sample_interval_s,
            s.cavity_memory,
            self.attack.as_str(),
            self.tap_fraction,
            self.key_length,
            self.n_samples,
            self.calibration_samples,
            self.test_fraction,
            self.detect_sigma,
            self.sweep
                .taps
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(","),
            self.sweep.sessions,
            self.sweep.noise_samples,
            self.seed,
            self.out_dir,
        );
        out
    }

    /// Hex digest of the canonical serialization, for replay headers.
    ///
    /// The output directory is excluded: where results are written has
    /// no bearing on what was simulated.
    pub fn digest(&self) -> String {
        let canonical: String = self
            .serialize()
            .lines()
            .filter(|line| !line.starts_with("out_dir = "))
            .fold(String::new(), |mut acc, line| {
                acc.push_str(line);
                acc.push('\n');
                acc
            });
        let hash = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in &hash[..8] {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    /// The channel model this scenario describes.
    pub fn channel_model(&self) -> Result<ChannelModel> {
        Ok(match self.attack {
            AttackKind::None => ChannelModel::Tap(ChannelParams::lossless(&self.source)),
            AttackKind::Tap => {
                ChannelModel::Tap(ChannelParams::with_tap(&self.source, self.tap_fraction)?)
            }
            AttackKind::InterceptResend => ChannelModel::InterceptResend,
        })
    }

    pub fn session_config(&self) -> SessionConfig {
        SessionConfig {
            n_samples: self.n_samples,
            calibration_samples: self.calibration_samples,
            test_fraction: self.test_fraction,
            detection: DetectionPolicy {
                sigma: self.detect_sigma,
            },
        }
    }

    /// Rough achievability check for the requested key length; a warning
    /// string if the expected retained count looks too small.
    pub fn key_length_warning(&self) -> Option<String> {
        let s = twinqkd::source::difference_noise(&self.source).ok()?;
        let g = self.source.excess_factor;
        if g <= 0.0 {
            return None;
        }
        let threshold = (2.0 * s / g).sqrt();
        let retain_single = 2.0 * (1.0 - twinqkd::stats::normal_cdf(threshold));
        // Both-party retention is below the single-party rate; 0.7 is a
        // conservative joint factor for well-correlated beams.
        let expected =
            0.7 * retain_single * (1.0 - self.test_fraction) * self.n_samples as f64;
        if (self.key_length as f64) > expected {
            Some(format!(
                "key_length {} may exceed the expected ~{} retained outcomes \
                 ({} samples, {:.0}% drop, test fraction {})",
                self.key_length,
                expected as usize,
                self.n_samples,
                100.0 * (1.0 - retain_single),
                self.test_fraction
            ))
        } else {
            None
        }
    }
}

/// Split a trailing alphabetic unit suffix off a value.
fn split_unit(value: &str) -> (&str, &str) {
    let split_at = value
        .rfind(|c: char| !c.is_ascii_alphabetic())
        .map(|i| i + 1)
        .unwrap_or(0);
    value.split_at(split_at)
}

fn dimensionless(value: &str) -> Result<f64> {
    let (number, unit) = split_unit(value);
    if !unit.is_empty() && !number.is_empty() {
        bail!("dimensionless value must not carry a unit, got `{value}`");
    }
    value
        .parse()
        .map_err(|_| anyhow!("bad number `{value}`"))
}

fn dimensionless_list(value: &str) -> Result<Vec<f64>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| dimensionless(v.trim())).collect()
}

fn integer(value: &str) -> Result<usize> {
    value.parse().map_err(|_| anyhow!("bad integer `{value}`"))
}

fn boolean(value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(anyhow!("expected `true` or `false`, got `{other}`")),
    }
}

/// Parse a time with a mandatory unit, to seconds. Scales divide by
/// exact powers of ten so `20ns` is the same float as the literal 2e-8.
fn time_seconds(value: &str) -> Result<f64> {
    let (number, unit) = split_unit(value);
    let mantissa: f64 = number
        .parse()
        .map_err(|_| anyhow!("bad number `{value}`"))?;
    match unit {
        "s" => Ok(mantissa),
        "ms" => Ok(mantissa / 1e3),
        "us" => Ok(mantissa / 1e6),
        "ns" => Ok(mantissa / 1e9),
        "" => bail!("time value needs a unit (s, ms, us, ns), got `{value}`"),
        other => bail!("unknown time unit `{other}` (s, ms, us, ns)"),
    }
}

/// Parse a voltage with a mandatory unit, to millivolts.
fn voltage_mv(value: &str) -> Result<f64> {
    let (number, unit) = split_unit(value);
    let mantissa: f64 = number
        .parse()
        .map_err(|_| anyhow!("bad number `{value}`"))?;
    match unit {
        "V" => Ok(mantissa * 1e3),
        "mV" => Ok(mantissa),
        "uV" => Ok(mantissa / 1e3),
        "" => bail!("voltage value needs a unit (V, mV, uV), got `{value}`"),
        other => bail!("unknown voltage unit `{other}` (V, mV, uV)"),
    }
}
