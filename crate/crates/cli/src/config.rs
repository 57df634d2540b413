//! Experiment configuration files and command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use cavom::{Preset, SystemParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Fig2,
    Fig3a,
    Fig3b,
    Fig4c,
    Fig5,
    Fig6,
    Fig9,
    Fig10,
    Fig11,
    CustomSweep,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::Fig2,
        ExperimentId::Fig3a,
        ExperimentId::Fig3b,
        ExperimentId::Fig4c,
        ExperimentId::Fig5,
        ExperimentId::Fig6,
        ExperimentId::Fig9,
        ExperimentId::Fig10,
        ExperimentId::Fig11,
        ExperimentId::CustomSweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3a => "fig3a",
            ExperimentId::Fig3b => "fig3b",
            ExperimentId::Fig4c => "fig4c",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Fig6 => "fig6",
            ExperimentId::Fig9 => "fig9",
            ExperimentId::Fig10 => "fig10",
            ExperimentId::Fig11 => "fig11",
            ExperimentId::CustomSweep => "custom-sweep",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == name)
            .ok_or_else(|| CliError::UnknownExperiment(name.to_string()))
    }

    /// Name of the swept quantity; `None` means any parameter field or `delta_c`.
    pub fn sweep_variable(&self) -> Option<&'static str> {
        match self {
            ExperimentId::Fig2 => Some("x"),
            ExperimentId::Fig3a | ExperimentId::Fig3b | ExperimentId::Fig5 => Some("delta_c"),
            ExperimentId::Fig4c | ExperimentId::Fig6 => Some("r_zp"),
            ExperimentId::Fig9 => Some("g0_over_delta_0"),
            ExperimentId::Fig10 => Some("omega_m_over_kappa"),
            ExperimentId::Fig11 => Some("detuning_over_g0"),
            ExperimentId::CustomSweep => None,
        }
    }

    /// Experiments on the lossless resolution family take no base parameter set.
    pub fn uses_base_params(&self) -> bool {
        !matches!(
            self,
            ExperimentId::Fig3a | ExperimentId::Fig3b | ExperimentId::Fig4c | ExperimentId::Fig6
        )
    }

    /// Versioned default configuration shipped with the binary.
    pub fn default_config_text(&self) -> &'static str {
        match self {
            ExperimentId::Fig2 => include_str!("../configs/fig2.json"),
            ExperimentId::Fig3a => include_str!("../configs/fig3a.json"),
            ExperimentId::Fig3b => include_str!("../configs/fig3b.json"),
            ExperimentId::Fig4c => include_str!("../configs/fig4c.json"),
            ExperimentId::Fig5 => include_str!("../configs/fig5.json"),
            ExperimentId::Fig6 => include_str!("../configs/fig6.json"),
            ExperimentId::Fig9 => include_str!("../configs/fig9.json"),
            ExperimentId::Fig10 => include_str!("../configs/fig10.json"),
            ExperimentId::Fig11 => include_str!("../configs/fig11.json"),
            ExperimentId::CustomSweep => include_str!("../configs/custom-sweep.json"),
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Inclusive sweep `start..=stop` with `points` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepRange {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(CliError::InvalidRange(format!(
                "`{}` sweep has no points",
                self.variable
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::InvalidRange(format!(
                "`{}` bounds must be finite, got [{}, {}]",
                self.variable, self.start, self.stop
            )));
        }
        if self.points > 1 && self.start == self.stop {
            return Err(CliError::InvalidRange(format!(
                "`{}` sweep of {} points has zero width",
                self.variable, self.points
            )));
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(CliError::InvalidRange(format!(
                "log-spaced `{}` sweep needs positive bounds",
                self.variable
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        match self.scale {
            Scale::Linear => (0..self.points)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / last)
                .collect(),
            Scale::Log => cavom::scattering::log_space(self.start, self.stop, self.points),
        }
    }
}

/// Least-squares power-law fit of one output column over a window of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub column: String,
    pub window: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_ld: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_zp: Option<f64>,
    /// Hold the laser–atom detuning fixed and adjust `ω_0 − ω_c` for resonance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub fits: BTreeMap<String, FitSpec>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub presets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SystemParams>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub set: BTreeMap<String, f64>,
    pub sweep: SweepRange,
    #[serde(default)]
    pub options: Options,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

const OPTION_KEYS: [&str; 4] = ["eta_ld", "r_zp", "delta_0", "cutoff"];
const SWEEP_KEYS: [&str; 3] = ["sweep.start", "sweep.stop", "sweep.points"];

impl ExperimentConfig {
    /// Parses a config without validating it.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn default_for(id: ExperimentId) -> Self {
        Self::from_json(id.default_config_text()).expect("shipped config parses")
    }

    pub fn id(&self) -> Result<ExperimentId> {
        ExperimentId::parse(&self.experiment)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        let id = self.id()?;
        match id.sweep_variable() {
            Some(expected) if expected != self.sweep.variable => {
                return Err(CliError::Config(format!(
                    "{id} sweeps `{expected}`, not `{}`",
                    self.sweep.variable
                )));
            }
            None if self.sweep.variable != "delta_c"
                && !SystemParams::FIELD_NAMES.contains(&self.sweep.variable.as_str()) =>
            {
                return Err(CliError::Config(format!(
                    "cannot sweep unknown parameter `{}`",
                    self.sweep.variable
                )));
            }
            _ => {}
        }
        self.sweep.validate()?;
        if self.workers == Some(0) {
            return Err(CliError::Config("worker count must be at least 1".into()));
        }
        if self.preset.is_some() && self.params.is_some() {
            return Err(CliError::Config(
                "give either a preset or inline params, not both".into(),
            ));
        }

        if id.uses_base_params() {
            for params in self.base_params()? {
                params.validate().map_err(|e| CliError::Config(e.to_string()))?;
            }
        } else if self.preset.is_some() || self.params.is_some() || !self.set.is_empty() {
            return Err(CliError::Config(format!(
                "{id} runs on the lossless resolution family and takes no base parameters"
            )));
        }

        let positive = |name: &str, v: Option<f64>| match v {
            Some(v) if v > 0.0 && v.is_finite() => Ok(v),
            _ => Err(CliError::Config(format!("{id} needs a positive `{name}` option"))),
        };
        match id {
            ExperimentId::Fig3a | ExperimentId::Fig3b => {
                positive("eta_ld", self.options.eta_ld)?;
                positive("r_zp", self.options.r_zp)?;
            }
            ExperimentId::Fig4c | ExperimentId::Fig6 => {
                positive("eta_ld", self.options.eta_ld)?;
                if !(self.sweep.start > 0.0 && self.sweep.stop > 0.0) {
                    return Err(CliError::InvalidRange("r_zp must be positive".into()));
                }
            }
            ExperimentId::Fig2 => {
                if self.sweep.points < 64 {
                    return Err(CliError::InvalidRange(
                        "potential profiles need at least 64 positions".into(),
                    ));
                }
            }
            ExperimentId::Fig9 | ExperimentId::Fig10 => {
                if !matches!(self.options.cutoff, Some(n) if n >= 1) {
                    return Err(CliError::Config(format!("{id} needs a phonon `cutoff` ≥ 1")));
                }
                if !(self.sweep.start > 0.0 && self.sweep.stop > 0.0) {
                    return Err(CliError::InvalidRange("ratios must be positive".into()));
                }
            }
            _ => {}
        }
        for (name, fit) in &self.options.fits {
            let [lo, hi] = fit.window;
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(CliError::InvalidRange(format!(
                    "fit `{name}` window must satisfy 0 < lo < hi"
                )));
            }
        }
        Ok(())
    }

    /// Base parameter sets with `set` overrides applied; one per preset for
    /// experiments that compare several.
    pub fn base_params(&self) -> Result<Vec<SystemParams>> {
        let bases: Vec<SystemParams> = if let Some(params) = self.params {
            vec![params]
        } else if let Some(name) = &self.preset {
            vec![preset(name)?.params()]
        } else if !self.options.presets.is_empty() {
            self.options
                .presets
                .iter()
                .map(|name| preset(name).map(|p| p.params()))
                .collect::<Result<_>>()?
        } else {
            return Err(CliError::Config(format!(
                "{} needs a preset or inline params",
                self.experiment
            )));
        };
        bases
            .into_iter()
            .map(|mut params| {
                for (key, value) in &self.set {
                    params
                        .set_field(key, *value)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                }
                Ok(params)
            })
            .collect()
    }

    /// Names matching [`Self::base_params`], used to label per-preset outputs.
    pub fn base_names(&self) -> Vec<String> {
        if self.params.is_some() {
            vec!["custom".into()]
        } else if let Some(name) = &self.preset {
            vec![name.clone()]
        } else {
            self.options.presets.clone()
        }
    }

    /// Applies a `key=value` override from the command line. Option and sweep
    /// keys are routed to their sections; anything else is a parameter.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{assignment}`")))?;
        let key = key.trim();
        let value: f64 = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("`{key}` needs a number, got `{raw}`")))?;
        match key {
            "eta_ld" => self.options.eta_ld = Some(value),
            "r_zp" => self.options.r_zp = Some(value),
            "delta_0" => self.options.delta_0 = Some(value),
            "cutoff" => self.options.cutoff = Some(as_count(key, value)?),
            "sweep.start" => self.sweep.start = value,
            "sweep.stop" => self.sweep.stop = value,
            "sweep.points" => self.sweep.points = as_count(key, value)?,
            _ if SystemParams::FIELD_NAMES.contains(&key) => {
                self.set.insert(key.to_string(), value);
            }
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key `{key}`; use a parameter ({}), an option ({}) or {}",
                    SystemParams::FIELD_NAMES.join(", "),
                    OPTION_KEYS.join(", "),
                    SWEEP_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// SHA-256 of everything that determines the output data. The output
    /// location and worker count are excluded since they never change results.
    pub fn inputs_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        canonical.workers = None;
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex(&Sha256::digest(text.as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn preset(name: &str) -> Result<Preset> {
    Preset::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
        CliError::Config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

fn as_count(key: &str, value: f64) -> Result<usize> {
    if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(CliError::Config(format!("`{key}` must be a whole number, got {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_configs_are_valid() {
        for id in ExperimentId::ALL {
            let config = ExperimentConfig::default_for(id);
            assert_eq!(config.id().unwrap(), id);
            config.validate().unwrap_or_else(|e| panic!("{id}: {e}"));
        }
    }

    #[test]
    fn sweep_values_are_inclusive() {
        let lin = SweepRange {
            variable: "x".into(),
            start: 1.0,
            stop: 2.0,
            points: 5,
            scale: Scale::Linear,
        };
        assert_eq!(lin.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        let log = SweepRange { scale: Scale::Log, start: 0.1, stop: 10.0, points: 3, ..lin };
        let v = log.values();
        assert!((v[1] - 1.0).abs() < 1e-12 && (v[2] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn bad_ranges_are_rejected() {
        let mut config = ExperimentConfig::default_for(ExperimentId::Fig4c);
        config.sweep.points = 0;
        assert!(matches!(config.validate(), Err(CliError::InvalidRange(_))));
        config.sweep.points = 10;
        config.sweep.start = -1.0;
        assert!(matches!(config.validate(), Err(CliError::InvalidRange(_))));
        config.sweep.start = f64::NAN;
        assert!(matches!(config.validate(), Err(CliError::InvalidRange(_))));
    }

    #[test]
    fn overrides_route_by_key() {
        let mut config = ExperimentConfig::default_for(ExperimentId::Fig5);
        config.apply_override("omega_m=0.1").unwrap();
        config.apply_override("sweep.points=11").unwrap();
        config.apply_override("cutoff=32").unwrap();
        assert_eq!(config.set["omega_m"], 0.1);
        assert_eq!(config.sweep.points, 11);
        assert_eq!(config.options.cutoff, Some(32));
        assert_eq!(config.base_params().unwrap()[0].omega_m, 0.1);
        assert!(config.apply_override("omega=1").is_err());
        assert!(config.apply_override("g0").is_err());
        assert!(config.apply_override("cutoff=1.5").is_err());
    }

    #[test]
    fn family_experiments_refuse_presets() {
        let mut config = ExperimentConfig::default_for(ExperimentId::Fig6);
        config.preset = Some("fiber-I".into());
        assert!(matches!(config.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_ignores_output_and_workers() {
        let a = ExperimentConfig::default_for(ExperimentId::Fig9);
        let mut b = a.clone();
        b.output = Some("/tmp/elsewhere".into());
        b.workers = Some(7);
        assert_eq!(a.inputs_hash(), b.inputs_hash());
        b.set.insert("g0".into(), 22.0);
        assert_ne!(a.inputs_hash(), b.inputs_hash());
    }
}
