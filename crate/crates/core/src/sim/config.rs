//! Scenario files: `[network]`, `[simulation]` and `[baselines]` tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net_model::NetworkConfig;
use crate::opt_a::SolverOptionsA;
use crate::opt_b::B2Options;
use crate::utility::Utility;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub network: NetworkConfig,
    pub simulation: SimulationConfig,
    pub baselines: BaselineConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub superframes: usize,
    pub utility: Utility,
    /// Super-frames between profile recomputations.
    pub profile_period: usize,
    /// Super-frames a broadcast takes to reach the BSs.
    pub broadcast_delay: usize,
    /// Evaluate subbands on the rayon pool.
    pub parallel: bool,
    pub mis_cap: usize,
    pub b2_eps: f64,
    pub b2_max_iter: usize,
    pub qa_tol: f64,
    pub qa_max_iter: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            superframes: 50,
            utility: Utility::ProportionalFair,
            profile_period: 10,
            broadcast_delay: 0,
            parallel: true,
            mis_cap: crate::graph_b::MIS_CAP,
            b2_eps: 1e-6,
            b2_max_iter: 50,
            qa_tol: 1e-6,
            qa_max_iter: 5000,
        }
    }
}

impl SimulationConfig {
    pub fn b2_options(&self) -> B2Options {
        B2Options {
            eps: self.b2_eps,
            max_iter: self.b2_max_iter,
            cap: self.mis_cap,
        }
    }

    pub fn qa_options(&self) -> SolverOptionsA {
        SolverOptionsA {
            tol: self.qa_tol,
            max_iter: self.qa_max_iter,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Static scheme: one blank subframe in every `abs_period`.
    pub abs_period: usize,
    /// Fraction of each macro's users, lowest SNR first, in the outer zone.
    pub outer_fraction: f64,
    /// Share of the subbands reserved for the three outer-zone groups.
    pub outer_subband_fraction: f64,
    /// Blanking-rate grid resolution of the dynamic scheme.
    pub rate_steps: usize,
    /// Pilot length in subframes; zero means one super-frame.
    pub pilot_subframes: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            abs_period: 8,
            outer_fraction: 0.3,
            outer_subband_fraction: 0.6,
            rate_steps: 8,
            pilot_subframes: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        let s = &self.simulation;
        s.utility.validate()?;
        if s.superframes == 0 {
            return Err(Error::Config("horizon shorter than one super-frame".into()));
        }
        if s.profile_period == 0 {
            return Err(Error::Config("profile_period must be positive".into()));
        }
        if !(s.b2_eps > 0.0 && s.qa_tol > 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        let b = &self.baselines;
        if b.abs_period == 0 || b.rate_steps == 0 {
            return Err(Error::Config("abs_period and rate_steps must be positive".into()));
        }
        if !(0.0..=1.0).contains(&b.outer_fraction) || !(0.0..1.0).contains(&b.outer_subband_fraction) {
            return Err(Error::Config("baseline fractions must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Subframes per super-frame.
    pub fn superframe_len(&self) -> usize {
        self.network.superframe_len
    }

    /// Sets the horizon from a subframe count, rounding down to whole
    /// super-frames.
    pub fn set_horizon_subframes(&mut self, subframes: usize) -> Result<()> {
        let len = self.superframe_len();
        if subframes < len {
            return Err(Error::Config(format!(
                "horizon of {subframes} subframes is shorter than one super-frame ({len})"
            )));
        }
        self.simulation.superframes = subframes / len;
        Ok(())
    }

    pub fn pilot_len(&self) -> usize {
        match self.baselines.pilot_subframes {
            0 => self.superframe_len(),
            n => n,
        }
    }
}
