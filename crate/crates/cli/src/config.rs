use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rio_core::cavity::PhysicalParams;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Settings shared by every subcommand. Flags override the config file,
/// which overrides the defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    /// `None` means the subcommand's own default.
    pub tolerance: Option<f64>,
    pub g_khz: f64,
    pub delta_over_g: f64,
    pub q_factor: f64,
    pub cavity_ghz: f64,
    pub radiative_time: f64,
    pub pulse_time: f64,
    pub excitation_probability: f64,
    pub offset: f64,
    pub step: f64,
    pub phase: f64,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub verbose: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: 50,
            tolerance: None,
            g_khz: 24.0,
            delta_over_g: 10.0,
            q_factor: 1e8,
            cavity_ghz: 50.0,
            radiative_time: 3e-2,
            pulse_time: 6.3e-6,
            excitation_probability: 0.01,
            offset: 0.01,
            step: 0.1,
            phase: 0.0,
            format: Format::Json,
            out: None,
            verbose: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value {value:?} for {key}")))
}

impl RunConfig {
    /// Sets one `key = value` entry. Keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "seed" => self.seed = parse_num(&key, value)?,
            "samples" => self.samples = parse_num(&key, value)?,
            "tolerance" => self.tolerance = Some(parse_num(&key, value)?),
            "g_khz" => self.g_khz = parse_num(&key, value)?,
            "delta_over_g" => self.delta_over_g = parse_num(&key, value)?,
            "q_factor" => self.q_factor = parse_num(&key, value)?,
            "cavity_ghz" => self.cavity_ghz = parse_num(&key, value)?,
            "radiative_time" => self.radiative_time = parse_num(&key, value)?,
            "pulse_time" => self.pulse_time = parse_num(&key, value)?,
            "excitation_probability" => self.excitation_probability = parse_num(&key, value)?,
            "offset" => self.offset = parse_num(&key, value)?,
            "step" => self.step = parse_num(&key, value)?,
            "phase" => self.phase = parse_num(&key, value)?,
            "format" => {
                self.format = Format::from_str(value, true)
                    .map_err(|_| CliError::Config(format!("unknown format {value:?}")))?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "verbose" => self.verbose = parse_num(&key, value)?,
            _ => return Err(CliError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn apply_file_contents(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_file_contents(&text)
    }

    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            q_factor: self.q_factor,
            cavity_hz: self.cavity_ghz * 1e9,
            radiative_time: self.radiative_time,
            pulse_time: self.pulse_time,
            excitation_probability: self.excitation_probability,
            ..PhysicalParams::from_khz(self.g_khz, self.delta_over_g)
        }
    }

    /// Rejects settings no command can run with; returns soft warnings.
    pub fn validate(&self) -> Result<Vec<String>, CliError> {
        if self.samples < 1 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Config(format!("tolerance must be positive, got {t}")));
            }
        }
        if !self.offset.is_finite() || !(0.0..=rio_core::cavity::MAX_OFFSET_FRACTION).contains(&self.offset) {
            return Err(CliError::Config(format!(
                "offset must lie in [0, {}], got {}",
                rio_core::cavity::MAX_OFFSET_FRACTION,
                self.offset
            )));
        }
        if !self.phase.is_finite() {
            return Err(CliError::Config("phase must be finite".into()));
        }
        rio_core::cavity::amplitude_grid(self.step).map_err(|e| CliError::Config(e.to_string()))?;
        self.params()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn tolerance_or(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}
