use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-distance path loss `intercept + slope * log10(d_km)` in dB.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLoss {
    pub intercept_db: f64,
    pub slope_db: f64,
}

impl PathLoss {
    pub const MACRO: PathLoss = PathLoss {
        intercept_db: 128.1,
        slope_db: 37.6,
    };
    pub const PICO: PathLoss = PathLoss {
        intercept_db: 140.7,
        slope_db: 36.7,
    };

    pub fn loss_db(&self, distance_m: f64) -> f64 {
        self.intercept_db + self.slope_db * (distance_m / 1000.0).log10()
    }
}

/// How many picos and users each macro area receives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Loading {
    /// Exactly `picos_per_macro` picos and `users_per_macro` users per area.
    Uniform,
    /// Poisson counts per area with the given means.
    Poisson { mean_picos: f64, mean_users: f64 },
}

/// Scenario parameters for layout, radio and topology extraction.
///
/// Powers are per subband. `edge_threshold_db` is an interference-to-noise
/// cutoff; `edge_margin_db` additionally requires an interferer to be within
/// that many dB of the serving link before it counts as an edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_macro: usize,
    pub picos_per_macro: usize,
    /// Explicit pico coordinates in meters; overrides `picos_per_macro`.
    pub pico_positions: Option<Vec<[f64; 2]>>,
    pub users_per_macro: usize,
    pub loading: Loading,
    pub inter_site_distance: f64,
    pub subbands: usize,
    pub macro_power_dbm: f64,
    pub pico_power_dbm: f64,
    pub bias_db: f64,
    pub noise_density_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub shadowing_std_db: f64,
    pub edge_threshold_db: f64,
    pub edge_margin_db: f64,
    pub superframe_len: usize,
    pub seed: u64,
    pub clustered_fraction: f64,
    pub cluster_radius: f64,
    pub min_distance: f64,
    pub min_pico_macro_distance: f64,
    pub macro_pathloss: PathLoss,
    pub pico_pathloss: PathLoss,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_macro: 7,
            picos_per_macro: 2,
            pico_positions: None,
            users_per_macro: 10,
            loading: Loading::Uniform,
            inter_site_distance: 500.0,
            subbands: 10,
            macro_power_dbm: 46.0,
            pico_power_dbm: 30.0,
            bias_db: 9.0,
            noise_density_dbm_hz: -174.0,
            bandwidth_hz: 10e6,
            shadowing_std_db: 8.0,
            edge_threshold_db: 6.0,
            edge_margin_db: 10.0,
            superframe_len: 200,
            seed: 1,
            clustered_fraction: 2.0 / 3.0,
            cluster_radius: 40.0,
            min_distance: 10.0,
            min_pico_macro_distance: 75.0,
            macro_pathloss: PathLoss::MACRO,
            pico_pathloss: PathLoss::PICO,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_macro == 0 {
            return bad("n_macro must be at least 1");
        }
        if self.users_per_macro == 0 && self.loading == Loading::Uniform {
            return bad("users_per_macro must be at least 1");
        }
        if self.subbands < 2 {
            return bad("subbands must be at least 2");
        }
        if self.superframe_len == 0 {
            return bad("superframe_len must be at least 1");
        }
        if !(self.bias_db >= 0.0) {
            return bad("bias_db must be nonnegative");
        }
        let finite = [
            self.macro_power_dbm,
            self.pico_power_dbm,
            self.noise_density_dbm_hz,
            self.edge_threshold_db,
            self.edge_margin_db,
            self.shadowing_std_db,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("powers, noise and thresholds must be finite");
        }
        if !(self.bandwidth_hz > 0.0 && self.inter_site_distance > 0.0) {
            return bad("bandwidth_hz and inter_site_distance must be positive");
        }
        if self.shadowing_std_db < 0.0 {
            return bad("shadowing_std_db must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.clustered_fraction) {
            return bad("clustered_fraction must lie in [0, 1]");
        }
        if !(self.min_distance > 0.0) || !(self.cluster_radius > self.min_distance) {
            return bad("need 0 < min_distance < cluster_radius");
        }
        if let Loading::Poisson {
            mean_picos,
            mean_users,
        } = self.loading
        {
            if !(mean_picos >= 0.0 && mean_users > 0.0) {
                return bad("poisson loading needs mean_picos >= 0 and mean_users > 0");
            }
        }
        Ok(())
    }

    /// Noise power per subband in dBm.
    pub fn noise_dbm(&self) -> f64 {
        self.noise_density_dbm_hz + 10.0 * (self.bandwidth_hz / self.subbands as f64).log10()
    }

    pub fn subband_hz(&self) -> f64 {
        self.bandwidth_hz / self.subbands as f64
    }
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
