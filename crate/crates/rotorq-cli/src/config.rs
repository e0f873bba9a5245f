//! Run configuration: a structured text file plus CLI overrides.
//!
//! Physics parameters live here, never in environment variables. A manifest
//! written by a previous run can be passed back as the config: its embedded
//! resolved configuration is used verbatim, which reproduces the outputs.

use serde::{Deserialize, Serialize};
use std::path::Path;

use rotorq::{ErrorModel, PulseTemplate, RotorSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PulseConfig {
    /// Delta-omega as a fraction of omega_01.
    pub bandwidth_frac: f64,
    /// Inter-pulse delay in revival times.
    pub tau_revivals: f64,
    /// Carrier as a fraction of omega_01.
    pub carrier_frac: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self { bandwidth_frac: 0.1, tau_revivals: 11.2, carrier_frac: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PropagationConfig {
    /// dt = carrier period / steps_per_period for plain runs.
    pub steps_per_period: u32,
    /// Step refinement used when certifying convergence (dt and basis gates).
    pub certify_steps_per_period: u32,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self { steps_per_period: 64, certify_steps_per_period: 20_000 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub molecule: Option<RotorSpec>,
    pub pulse: PulseConfig,
    pub errors: ErrorModel,
    pub propagation: PropagationConfig,
}

impl RunConfig {
    /// Load from TOML or JSON (by extension); a manifest JSON with an
    /// embedded `config` object is accepted and unwrapped.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| e.to_string())?;
            let config_value = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(config_value).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        }
    }

    pub fn molecule(&self) -> RotorSpec {
        self.molecule.clone().unwrap_or_else(RotorSpec::nacs)
    }

    pub fn template(&self) -> PulseTemplate {
        let spec = self.molecule();
        PulseTemplate {
            bandwidth: self.pulse.bandwidth_frac * spec.omega01(),
            tau: self.pulse.tau_revivals * spec.revival_time(),
            carrier: self.pulse.carrier_frac * spec.omega01(),
        }
    }

    pub fn dt(&self) -> f64 {
        let template = self.template();
        2.0 * std::f64::consts::PI / template.carrier / self.propagation.steps_per_period as f64
    }

    pub fn certify_dt(&self) -> f64 {
        let template = self.template();
        2.0 * std::f64::consts::PI
            / template.carrier
            / self.propagation.certify_steps_per_period as f64
    }
}
