//! JSON run configuration.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::LeeWave;
use crate::params::{coriolis_params, ParamsError, PhysicalConstants, SiteParams, WaveParams};
use crate::thermo::{Atmosphere, DensityProfile, ThermoError};
use crate::verifier::{solve_dispersion, VerifyError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Dispersion(#[from] VerifyError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

/// Density profile as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileConfig {
    Affine {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        surface_pressure: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        integration_constant: Option<f64>,
    },
    Exponential {
        rho_ref: f64,
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        surface_pressure: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        integration_constant: Option<f64>,
    },
}

impl ProfileConfig {
    pub fn profile(&self) -> DensityProfile {
        match *self {
            Self::Affine { a, b, .. } => DensityProfile::affine(a, b),
            Self::Exponential { rho_ref, lambda, .. } => DensityProfile::exponential(rho_ref, lambda),
        }
    }

    /// (surface_pressure, integration_constant)
    fn constants(&self) -> (Option<f64>, Option<f64>) {
        match *self {
            Self::Affine {
                surface_pressure,
                integration_constant,
                ..
            }
            | Self::Exponential {
                surface_pressure,
                integration_constant,
                ..
            } => (surface_pressure, integration_constant),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Reference latitude, degrees.
    pub latitude_deg: f64,
    pub k: f64,
    pub c0: f64,
    #[serde(alias = "Z0")]
    pub z0: f64,
    pub s0: f64,
    pub r0: f64,
    pub r1: f64,
    #[serde(default = "default_xi_guard")]
    pub xi_guard: f64,
    /// Wave speed override; solved from the dispersion relation when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default)]
    pub constants: PhysicalConstants,
    pub density_profile: ProfileConfig,
}

fn default_xi_guard() -> f64 {
    WaveParams::DEFAULT_XI_GUARD
}

impl Default for Config {
    fn default() -> Self {
        Self {
            latitude_deg: 45.0,
            k: TAU / 1e4,
            c0: 30.0,
            z0: 5000.0,
            s0: 1.2e4,
            r0: -20.0,
            r1: -5000.0,
            xi_guard: WaveParams::DEFAULT_XI_GUARD,
            c: None,
            constants: PhysicalConstants::default(),
            density_profile: ProfileConfig::Exponential {
                rho_ref: 1.0,
                lambda: 1.25e-4,
                surface_pressure: Some(1e5),
                integration_constant: None,
            },
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config is always serializable")
    }

    pub fn site(&self) -> Result<SiteParams, ConfigError> {
        Ok(coriolis_params(self.latitude_deg.to_radians(), &self.constants)?)
    }

    /// The override if given, else the dispersion root.
    pub fn wave_speed(&self) -> Result<f64, ConfigError> {
        match self.c {
            Some(c) => Ok(c),
            None => Ok(solve_dispersion(self.k, self.c0, &self.site()?, &self.constants)?),
        }
    }

    pub fn wave_params(&self) -> Result<WaveParams, ConfigError> {
        Ok(WaveParams {
            k: self.k,
            c: self.wave_speed()?,
            c0: self.c0,
            z0: self.z0,
            s0: self.s0,
            r0: self.r0,
            r1: self.r1,
            xi_guard: self.xi_guard,
        })
    }

    pub fn flow(&self) -> Result<LeeWave, ConfigError> {
        Ok(LeeWave::new(self.constants, self.site()?, self.wave_params()?)?)
    }

    /// An explicit integration constant wins over surface-pressure
    /// normalization.
    pub fn atmosphere(&self) -> Result<Atmosphere, ConfigError> {
        let flow = self.flow()?;
        let atm = Atmosphere::new(flow, self.density_profile.profile())?;
        Ok(match self.density_profile.constants() {
            (_, Some(constant)) => {
                Atmosphere::new(flow, self.density_profile.profile().with_integration_constant(constant))?
            }
            (Some(p), None) => atm.with_surface_pressure(p),
            (None, None) => atm,
        })
    }
}
