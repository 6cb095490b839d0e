//! Sweep configuration, presets, and validation. Configs are plain JSON with
//! explicit unit suffixes in every physical field name.

use serde::{Deserialize, Serialize};

use crate::circuits::{ShuntedParams, UnshuntedParams};
use crate::error::{Error, Result};
use crate::floquet::StepMethod;

pub mod figures;
pub mod run;
pub mod svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Unshunted,
    Shunted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    #[serde(rename = "EC_over_h_GHz")]
    pub ec_over_h_ghz: f64,
    #[serde(rename = "EJ_over_h_GHz")]
    pub ej_over_h_ghz: f64,
    #[serde(rename = "EL_over_h_GHz", default, skip_serializing_if = "Option::is_none")]
    pub el_over_h_ghz: Option<f64>,
    #[serde(rename = "g_over_2pi_GHz")]
    pub g_over_2pi_ghz: f64,
    #[serde(rename = "omega_a_over_2pi_GHz")]
    pub omega_a_over_2pi_ghz: f64,
    #[serde(rename = "omega_p_over_2pi_GHz")]
    pub omega_p_over_2pi_ghz: f64,
    #[serde(rename = "Ng", default)]
    pub ng: f64,
}

impl CircuitConfig {
    pub fn unshunted_params(&self) -> UnshuntedParams {
        UnshuntedParams::from_ghz(
            self.ec_over_h_ghz,
            self.ej_over_h_ghz,
            self.g_over_2pi_ghz,
            self.omega_a_over_2pi_ghz,
            self.omega_p_over_2pi_ghz,
        )
        .with_ng(self.ng)
    }

    pub fn shunted_params(&self) -> Result<ShuntedParams> {
        let el = self.el_over_h_ghz.ok_or_else(|| {
            Error::Config("shunted model needs EL_over_h_GHz in the circuit section".into())
        })?;
        Ok(ShuntedParams::from_ghz(
            self.ec_over_h_ghz,
            self.ej_over_h_ghz,
            el,
            self.g_over_2pi_ghz,
            self.omega_a_over_2pi_ghz,
            self.omega_p_over_2pi_ghz,
        ))
    }
}

/// Sweep axis: the estimated circulating photon number or the raw pump
/// amplitude. Both are recorded in every report regardless of which one the
/// grid was specified in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NbarEst,
    PumpAmpOver2piGhz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Explicit(Vec<f64>),
    Linspace { start: f64, stop: f64, count: usize },
}

impl GridSpec {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let values = match self {
            GridSpec::Explicit(v) => v.clone(),
            GridSpec::Linspace { start, stop, count } => {
                if *count < 1 {
                    return Err(Error::Config("grid count must be at least 1".into()));
                }
                if count == &1 {
                    vec![*start]
                } else {
                    (0..*count)
                        .map(|i| start + (stop - start) * i as f64 / (*count as f64 - 1.0))
                        .collect()
                }
            }
        };
        if values.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::Config("sweep grid values must be finite and nonnegative".into()));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub axis: SweepAxis,
    pub values: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationConfig {
    /// Charge window half-width for the unshunted transmon mode.
    pub charge_n_max: usize,
    /// Fock dimension of the oscillator-like mode.
    pub fock_osc: usize,
    /// Fock dimension of the junction-like mode (shunted model).
    pub fock_b: usize,
    /// Padded dimensions for the frame back-transform; 0 means automatic.
    pub pad_fock_osc: usize,
    pub pad_fock_b: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { charge_n_max: 25, fock_osc: 10, fock_b: 20, pad_fock_osc: 0, pad_fock_b: 0 }
    }
}

impl TruncationConfig {
    pub fn padded_osc(&self) -> usize {
        if self.pad_fock_osc > 0 {
            self.pad_fock_osc
        } else {
            self.fock_osc + (self.fock_osc / 2).max(4)
        }
    }

    pub fn padded_b(&self) -> usize {
        if self.pad_fock_b > 0 {
            self.pad_fock_b
        } else {
            self.fock_b + (self.fock_b / 2).max(6)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FloquetConfig {
    pub steps_per_period: usize,
    pub strobe_samples: usize,
    pub sidebands: usize,
    pub method: ConfigStepMethod,
}

impl Default for FloquetConfig {
    fn default() -> Self {
        Self {
            steps_per_period: 1024,
            strobe_samples: 128,
            sidebands: 20,
            method: ConfigStepMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConfigStepMethod {
    #[default]
    Auto,
    ExpMidpoint,
    ExpMidpoint4,
    SplitStep,
    SplitStep4,
}

impl From<ConfigStepMethod> for StepMethod {
    fn from(m: ConfigStepMethod) -> Self {
        match m {
            ConfigStepMethod::Auto => StepMethod::Auto,
            ConfigStepMethod::ExpMidpoint => StepMethod::ExpMidpoint,
            ConfigStepMethod::ExpMidpoint4 => StepMethod::ExpMidpoint4,
            ConfigStepMethod::SplitStep => StepMethod::SplitStep,
            ConfigStepMethod::SplitStep4 => StepMethod::SplitStep4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    #[serde(rename = "kappa_over_2pi_GHz")]
    pub kappa_over_2pi_ghz: f64,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        // 100 kHz bare-oscillator linewidth; steady-state populations are
        // invariant under rescaling of a white spectrum.
        Self { kappa_over_2pi_ghz: 1e-4, temperature_k: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesConfig {
    /// Stark-line window center; defaults to the bare oscillator frequency.
    #[serde(rename = "window_center_GHz")]
    pub window_center_ghz: Option<f64>,
    #[serde(rename = "window_halfwidth_GHz")]
    pub window_halfwidth_ghz: f64,
    pub weight_floor_rel: f64,
    /// Number of diagnostic-basis levels stored per report.
    pub report_levels: usize,
}

impl Default for ObservablesConfig {
    fn default() -> Self {
        Self {
            window_center_ghz: None,
            window_halfwidth_ghz: 0.3,
            weight_floor_rel: 1e-4,
            report_levels: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelKind,
    pub circuit: CircuitConfig,
    pub sweep: AxisConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub floquet: FloquetConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub observables: ObservablesConfig,
    /// Worker threads for independent sweep points; 0 = all available.
    #[serde(default)]
    pub workers: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let c = &self.circuit;
        if c.ec_over_h_ghz <= 0.0 || c.ej_over_h_ghz <= 0.0 {
            return Err(Error::Config("E_C and E_J must be positive".into()));
        }
        if c.omega_a_over_2pi_ghz <= 0.0 || c.omega_p_over_2pi_ghz <= 0.0 {
            return Err(Error::Config("omega_a and omega_p must be positive".into()));
        }
        if self.model == ModelKind::Shunted {
            match c.el_over_h_ghz {
                Some(el) if el > 0.0 => {}
                _ => {
                    return Err(Error::Config(
                        "shunted model needs a positive EL_over_h_GHz".into(),
                    ))
                }
            }
        }
        if self.truncation.charge_n_max < 2 {
            return Err(Error::Config("charge_n_max must be at least 2".into()));
        }
        if self.truncation.fock_osc < 2 || self.truncation.fock_b < 2 {
            return Err(Error::Config("Fock truncations must be at least 2".into()));
        }
        if self.floquet.steps_per_period < 32 {
            return Err(Error::Config("steps_per_period must be at least 32".into()));
        }
        if !self.floquet.strobe_samples.is_power_of_two() || self.floquet.strobe_samples < 64 {
            return Err(Error::Config("strobe_samples must be a power of two >= 64".into()));
        }
        if self.floquet.sidebands > self.floquet.strobe_samples / 2 - 1 {
            return Err(Error::Config(
                "sidebands must be at most strobe_samples/2 - 1 (aliasing)".into(),
            ));
        }
        if self.noise.kappa_over_2pi_ghz <= 0.0 {
            return Err(Error::Config("kappa must be positive".into()));
        }
        if self.noise.temperature_k < 0.0 {
            return Err(Error::Config("temperature must be nonnegative".into()));
        }
        self.sweep.values.resolve()?;
        Ok(())
    }

    pub fn parse(json: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetScale {
    /// Full truncations; the complete pump grid is an hours-scale run.
    Paper,
    /// Reduced truncations and coarse grids for minutes-scale qualitative runs.
    Ci,
}

/// Built-in configurations matching the reference parameter sets.
pub fn preset(model: ModelKind, scale: PresetScale) -> SweepConfig {
    let circuit = match model {
        ModelKind::Unshunted => CircuitConfig {
            ec_over_h_ghz: 0.15,
            ej_over_h_ghz: 20.0,
            el_over_h_ghz: None,
            g_over_2pi_ghz: 0.14,
            omega_a_over_2pi_ghz: 5.5,
            omega_p_over_2pi_ghz: 6.0,
            ng: 0.0,
        },
        ModelKind::Shunted => CircuitConfig {
            ec_over_h_ghz: 0.15,
            ej_over_h_ghz: 6.0,
            el_over_h_ghz: Some(14.0),
            g_over_2pi_ghz: 0.14,
            omega_a_over_2pi_ghz: 5.5,
            omega_p_over_2pi_ghz: 6.0,
            ng: 0.0,
        },
    };
    let (truncation, sweep, floquet) = match scale {
        PresetScale::Paper => (
            TruncationConfig::default(),
            AxisConfig {
                axis: SweepAxis::NbarEst,
                values: GridSpec::Linspace { start: 0.0, stop: 500.0, count: 26 },
            },
            FloquetConfig::default(),
        ),
        PresetScale::Ci => (
            TruncationConfig { charge_n_max: 15, fock_osc: 8, fock_b: 16, ..Default::default() },
            AxisConfig {
                axis: SweepAxis::NbarEst,
                values: GridSpec::Linspace { start: 0.0, stop: 500.0, count: 6 },
            },
            FloquetConfig { steps_per_period: 512, strobe_samples: 64, ..Default::default() },
        ),
    };
    SweepConfig {
        model,
        circuit,
        sweep,
        truncation,
        floquet,
        noise: NoiseConfig::default(),
        observables: ObservablesConfig::default(),
        workers: 0,
    }
}

/// Alternate shunted parameter set with stronger nonlinearity.
pub fn preset_shunted_alt(scale: PresetScale) -> SweepConfig {
    let mut cfg = preset(ModelKind::Shunted, scale);
    cfg.circuit.ec_over_h_ghz = 0.45;
    cfg.circuit.ej_over_h_ghz = 2.22;
    cfg.circuit.el_over_h_ghz = Some(4.44);
    cfg.circuit.g_over_2pi_ghz = 0.245;
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let cfg = preset(ModelKind::Shunted, PresetScale::Ci);
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        assert!(json.contains("EJ_over_h_GHz"));
        assert!(json.contains("kappa_over_2pi_GHz"));
        let back = SweepConfig::parse(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn grids_must_increase() {
        let mut cfg = preset(ModelKind::Unshunted, PresetScale::Ci);
        cfg.sweep.values = GridSpec::Explicit(vec![0.0, 10.0, 5.0]);
        assert!(cfg.validate().is_err());
        cfg.sweep.values = GridSpec::Explicit(vec![0.0, 10.0, 20.0]);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn shunted_requires_el() {
        let mut cfg = preset(ModelKind::Shunted, PresetScale::Ci);
        cfg.circuit.el_over_h_ghz = None;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let cfg = preset(ModelKind::Unshunted, PresetScale::Ci);
        let mut v: serde_json::Value = serde_json::to_value(&cfg).unwrap();
        v["typo_field"] = serde_json::json!(1);
        assert!(SweepConfig::parse(&v.to_string()).is_err());
    }
}
