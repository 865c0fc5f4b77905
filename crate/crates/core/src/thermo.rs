//! Density, pressure and temperature of the lee-wave atmosphere.
//!
//! All three fields are functions of the labels (s, r) only, through the
//! common argument
//!
//! ```text
//! ζ(s, r) = e^{2k(r − m(s))}/(2k) − r + c₀(2fs + βs²)/(2(f̂c₀ + g))
//! ```
//!
//! with ρ = F(ζ), P = (f̂c₀ + g)·𝓕(ζ) and T = P/(ρ R) for a monotone
//! increasing profile F with antiderivative 𝓕.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Node;
use crate::kinematics::{LabelPoint, LeeWave};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("invalid density profile: {0}")]
    Profile(&'static str),
    #[error("profile argument {value:e} <= 0 at s = {s:e} m, r = {r:e} m")]
    ArgumentDomain { s: f64, r: f64, value: f64 },
}

/// Monotone profile families with closed-form antiderivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileFamily {
    /// F(ζ) = a + bζ.
    Affine { a: f64, b: f64 },
    /// F(ζ) = ρ_ref·e^{λζ}.
    Exponential { rho_ref: f64, lambda: f64 },
}

/// The free profile F together with the constant fixing 𝓕.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub family: ProfileFamily,
    pub integration_constant: f64,
}

impl DensityProfile {
    pub fn affine(a: f64, b: f64) -> Self {
        Self {
            family: ProfileFamily::Affine { a, b },
            integration_constant: 0.0,
        }
    }

    pub fn exponential(rho_ref: f64, lambda: f64) -> Self {
        Self {
            family: ProfileFamily::Exponential { rho_ref, lambda },
            integration_constant: 0.0,
        }
    }

    pub fn with_integration_constant(self, integration_constant: f64) -> Self {
        Self {
            integration_constant,
            ..self
        }
    }

    /// F must map (0, ∞) into (0, ∞) and be strictly increasing.
    pub fn validate(&self) -> Result<(), ThermoError> {
        match self.family {
            ProfileFamily::Affine { a, b } => {
                if !(b > 0.0) {
                    return Err(ThermoError::Profile("affine profile needs b > 0"));
                }
                if !(a >= 0.0) {
                    return Err(ThermoError::Profile("affine profile needs a >= 0"));
                }
            }
            ProfileFamily::Exponential { rho_ref, lambda } => {
                if !(rho_ref > 0.0) {
                    return Err(ThermoError::Profile("exponential profile needs rho_ref > 0"));
                }
                if !(lambda > 0.0) {
                    return Err(ThermoError::Profile("exponential profile needs lambda > 0"));
                }
            }
        }
        if !self.integration_constant.is_finite() {
            return Err(ThermoError::Profile("integration constant must be finite"));
        }
        Ok(())
    }

    /// F(ζ).
    pub fn density(&self, zeta: f64) -> f64 {
        match self.family {
            ProfileFamily::Affine { a, b } => a + b * zeta,
            ProfileFamily::Exponential { rho_ref, lambda } => rho_ref * (lambda * zeta).exp(),
        }
    }

    /// F′(ζ).
    pub fn density_slope(&self, zeta: f64) -> f64 {
        match self.family {
            ProfileFamily::Affine { b, .. } => b,
            ProfileFamily::Exponential { rho_ref, lambda } => rho_ref * lambda * (lambda * zeta).exp(),
        }
    }

    /// 𝓕(ζ), including the integration constant.
    pub fn antiderivative(&self, zeta: f64) -> f64 {
        let base = match self.family {
            ProfileFamily::Affine { a, b } => a * zeta + 0.5 * b * zeta * zeta,
            ProfileFamily::Exponential { rho_ref, lambda } => rho_ref * (lambda * zeta).exp() / lambda,
        };
        base + self.integration_constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoState {
    /// kg/m³
    pub rho: f64,
    /// Pa
    pub pressure: f64,
    /// K
    pub temperature: f64,
}

/// Where ζ attains its infimum over the label domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArgumentMinimum {
    pub s: f64,
    pub r: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub nodes: usize,
    pub density_violations: usize,
    pub pressure_violations: usize,
    /// Nodes where the fields could not be evaluated.
    pub failed_nodes: usize,
    /// Largest (least negative) ∂ρ/∂z seen.
    pub max_density_dz: f64,
    /// Largest (least negative) ∂P/∂z seen.
    pub max_pressure_dz: f64,
    pub first_violation: Option<Node>,
}

impl MonotonicityReport {
    pub fn all_decreasing(&self) -> bool {
        self.density_violations == 0 && self.pressure_violations == 0 && self.failed_nodes == 0
    }
}

/// A lee-wave flow equipped with its thermodynamic fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atmosphere {
    flow: LeeWave,
    profile: DensityProfile,
}

impl Atmosphere {
    /// Pair a flow with a profile, checking the profile hypotheses and that
    /// ζ stays positive on the whole label domain.
    pub fn new(flow: LeeWave, profile: DensityProfile) -> Result<Self, ThermoError> {
        profile.validate()?;
        let atm = Self { flow, profile };
        let min = atm.argument_minimum();
        if !(min.value > 0.0) {
            return Err(ThermoError::ArgumentDomain {
                s: min.s,
                r: min.r,
                value: min.value,
            });
        }
        Ok(atm)
    }

    /// Pair without any checks; for probing non-admissible profiles.
    pub fn new_unchecked(flow: LeeWave, profile: DensityProfile) -> Self {
        Self { flow, profile }
    }

    /// Choose the integration constant so that the smallest pressure on the
    /// label domain equals `surface_pressure`.
    pub fn with_surface_pressure(self, surface_pressure: f64) -> Self {
        let base = self.profile.with_integration_constant(0.0);
        let min = self.argument_minimum();
        let constant = surface_pressure / self.flow.forcing() - base.antiderivative(min.value);
        Self {
            profile: base.with_integration_constant(constant),
            ..self
        }
    }

    pub fn flow(&self) -> &LeeWave {
        &self.flow
    }

    pub fn profile(&self) -> &DensityProfile {
        &self.profile
    }

    /// ζ(s, r).
    pub fn profile_argument(&self, s: f64, r: f64) -> f64 {
        let k = self.flow.wave().k;
        let c0 = self.flow.wave().c0;
        let site = self.flow.site();
        let xi = self.flow.vertical_phase(s, r);
        (2.0 * xi).exp() / (2.0 * k) - r + c0 * (2.0 * site.f * s + site.beta * s * s) / (2.0 * self.flow.forcing())
    }

    /// Infimum of ζ over s ∈ [−s0, s0], r < r0.
    ///
    /// ζ decreases in r, so the infimum lies on r = r0. Along that edge
    /// ∂ζ/∂s = m_s(c₀/c − e^{2ξ}), whose zeros are the trough vertex and
    /// the roots of m(s) = r0 − ln(c₀/c)/(2k).
    pub fn argument_minimum(&self) -> ArgumentMinimum {
        let w = self.flow.wave();
        let trough = self.flow.trough();
        let mut candidates = vec![-w.s0, w.s0];
        if self.flow.site().beta != 0.0 {
            candidates.push(-self.flow.site().f / self.flow.site().beta);
        }
        if w.c0 > 0.0 {
            let level = w.r0 - (w.c0 / w.c).ln() / (2.0 * w.k);
            candidates.extend(trough.solve(level));
        }
        candidates
            .into_iter()
            .filter(|s| s.abs() <= w.s0)
            .map(|s| ArgumentMinimum {
                s,
                r: w.r0,
                value: self.profile_argument(s, w.r0),
            })
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("endpoints are always candidates")
    }

    fn argument(&self, s: f64, r: f64) -> Result<f64, ThermoError> {
        let value = self.profile_argument(s, r);
        if value > 0.0 {
            Ok(value)
        } else {
            Err(ThermoError::ArgumentDomain { s, r, value })
        }
    }

    pub fn density(&self, s: f64, r: f64) -> Result<f64, ThermoError> {
        Ok(self.profile.density(self.argument(s, r)?))
    }

    pub fn pressure(&self, s: f64, r: f64) -> Result<f64, ThermoError> {
        Ok(self.flow.forcing() * self.profile.antiderivative(self.argument(s, r)?))
    }

    pub fn temperature(&self, s: f64, r: f64) -> Result<f64, ThermoError> {
        let state = self.state(s, r)?;
        Ok(state.temperature)
    }

    pub fn state(&self, s: f64, r: f64) -> Result<ThermoState, ThermoError> {
        let zeta = self.argument(s, r)?;
        let rho = self.profile.density(zeta);
        let pressure = self.flow.forcing() * self.profile.antiderivative(zeta);
        Ok(ThermoState {
            rho,
            pressure,
            temperature: pressure / (rho * self.flow.consts().gas_constant),
        })
    }

    /// ∂ρ/∂z at fixed (x, y, t): (∂ρ/∂r)(∂r/∂z), since ∂s/∂z = 0.
    pub fn density_dz(&self, label: &LabelPoint, t: f64) -> Result<f64, ThermoError> {
        let zeta = self.argument(label.s, label.r)?;
        let phase = self.flow.phase(label, t);
        let e = phase.attenuation();
        let drho_dr = self.profile.density_slope(zeta) * (2.0 * phase.xi).exp_m1();
        Ok(drho_dr * (1.0 - e * phase.theta.cos()) / phase.jacobian_det())
    }

    /// ∂P/∂z = −ρ(f̂c₀ + g)(1 − e^ξ cos θ).
    pub fn pressure_dz(&self, label: &LabelPoint, t: f64) -> Result<f64, ThermoError> {
        let rho = self.density(label.s, label.r)?;
        let phase = self.flow.phase(label, t);
        Ok(-rho * self.flow.forcing() * (1.0 - phase.attenuation() * phase.theta.cos()))
    }

    pub fn check_monotonicity(&self, nodes: &[Node]) -> MonotonicityReport {
        let mut report = MonotonicityReport {
            nodes: nodes.len(),
            density_violations: 0,
            pressure_violations: 0,
            failed_nodes: 0,
            max_density_dz: f64::NEG_INFINITY,
            max_pressure_dz: f64::NEG_INFINITY,
            first_violation: None,
        };
        for node in nodes {
            let (Ok(drho), Ok(dp)) = (
                self.density_dz(&node.label, node.t),
                self.pressure_dz(&node.label, node.t),
            ) else {
                report.failed_nodes += 1;
                report.first_violation.get_or_insert(*node);
                continue;
            };
            report.max_density_dz = report.max_density_dz.max(drho);
            report.max_pressure_dz = report.max_pressure_dz.max(dp);
            let bad_rho = !(drho < 0.0);
            let bad_p = !(dp < 0.0);
            report.density_violations += bad_rho as usize;
            report.pressure_violations += bad_p as usize;
            if bad_rho || bad_p {
                report.first_violation.get_or_insert(*node);
            }
        }
        report
    }
}
