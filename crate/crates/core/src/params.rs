//! Physical constants, latitude-dependent Coriolis parameters and the wave
//! configuration, together with the admissibility checks every other module
//! relies on.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::Trough;

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("latitude {0} rad is outside [-pi/2, pi/2]")]
    Latitude(f64),
    #[error("physical constant `{name}` must be strictly positive (got {value})")]
    Constant { name: &'static str, value: f64 },
    #[error("inadmissible configuration:\n{0}")]
    Inadmissible(ValidationReport),
}

/// Universal constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    /// Earth's rotation rate, rad/s.
    pub omega: f64,
    /// Gravitational acceleration at the surface, m/s².
    pub g: f64,
    /// Equatorial radius, m.
    pub earth_radius: f64,
    /// Gas constant for dry air, m²s⁻²K⁻¹.
    pub gas_constant: f64,
    /// Specific heat of dry air at 1000 mb, m²s⁻²K⁻¹.
    pub cp: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            omega: 7.29e-5,
            g: 9.81,
            earth_radius: 6.378e6,
            gas_constant: 287.0,
            cp: 1000.0,
        }
    }
}

impl PhysicalConstants {
    pub fn check(&self) -> Result<(), ParamsError> {
        let fields = [
            ("omega", self.omega),
            ("g", self.g),
            ("earth_radius", self.earth_radius),
            ("gas_constant", self.gas_constant),
            ("cp", self.cp),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ParamsError::Constant { name, value });
            }
        }
        Ok(())
    }
}

/// Coriolis parameters at a fixed reference latitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteParams {
    /// Latitude, rad.
    pub latitude: f64,
    /// Planar Coriolis parameter 2Ω sin φ, s⁻¹.
    pub f: f64,
    /// Second Coriolis parameter 2Ω cos φ, s⁻¹.
    pub f_hat: f64,
    /// Meridional gradient of the planar parameter, m⁻¹s⁻¹.
    pub beta: f64,
}

impl SiteParams {
    /// The Coriolis parameter on the β-plane at meridional offset `y`.
    #[inline]
    pub fn f_at(&self, y: f64) -> f64 {
        self.f + self.beta * y
    }
}

pub fn coriolis_params(latitude: f64, consts: &PhysicalConstants) -> Result<SiteParams, ParamsError> {
    if !(-FRAC_PI_2..=FRAC_PI_2).contains(&latitude) {
        return Err(ParamsError::Latitude(latitude));
    }
    consts.check()?;
    let (sin, cos) = latitude.sin_cos();
    let two_omega = 2.0 * consts.omega;
    let f_hat = two_omega * cos;
    Ok(SiteParams {
        latitude,
        f: two_omega * sin,
        f_hat,
        beta: f_hat / consts.earth_radius,
    })
}

/// Wave and label-domain configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    /// Wavenumber, m⁻¹.
    pub k: f64,
    /// Wave speed, m/s.
    pub c: f64,
    /// Mean background wind, m/s.
    pub c0: f64,
    /// Reference altitude, m.
    pub z0: f64,
    /// Meridional half-width of the label domain, m.
    pub s0: f64,
    /// Upper bound of the vertical label, m.
    pub r0: f64,
    /// Lower bound of the vertical label, m.
    pub r1: f64,
    /// Required margin of the vertical phase below zero.
    pub xi_guard: f64,
}

impl WaveParams {
    pub const DEFAULT_XI_GUARD: f64 = 1e-3;

    /// The effective vertical forcing f̂c₀ + g.
    #[inline]
    pub fn forcing(&self, site: &SiteParams, consts: &PhysicalConstants) -> f64 {
        site.f_hat * self.c0 + consts.g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate`]. Failures are carried, not raised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    /// Meridional label where r0 − m(s) is largest.
    pub worst_s: Option<f64>,
    /// The maximum of r0 − m(s) over [−s0, s0].
    pub worst_margin: Option<f64>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult {
            name: name.to_owned(),
            passed,
            detail,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "  [{tag}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Check every admissibility condition of the solution family.
///
/// The worst case of r0 − m(s) is found from the vertex of the quadratic
/// trough function, not by sampling.
pub fn validate(wave: &WaveParams, site: &SiteParams, consts: &PhysicalConstants) -> ValidationReport {
    let mut report = ValidationReport {
        checks: Vec::new(),
        worst_s: None,
        worst_margin: None,
    };

    let consts_ok = consts.check();
    report.push(
        "physical constants > 0",
        consts_ok.is_ok(),
        consts_ok.err().map_or_else(|| "all positive".into(), |e| e.to_string()),
    );
    report.push("k > 0", wave.k > 0.0, format!("k = {:e}", wave.k));
    report.push("c > 0", wave.c > 0.0, format!("c = {:e}", wave.c));
    let forcing = wave.forcing(site, consts);
    report.push("f_hat*c0 + g > 0", forcing > 0.0, format!("f_hat*c0 + g = {forcing:e}"));
    report.push("s0 >= 0", wave.s0 >= 0.0, format!("s0 = {:e}", wave.s0));
    report.push(
        "r1 < r0",
        wave.r1 < wave.r0,
        format!("r1 = {:e}, r0 = {:e}", wave.r1, wave.r0),
    );
    report.push(
        "xi_guard > 0",
        wave.xi_guard > 0.0,
        format!("xi_guard = {:e}", wave.xi_guard),
    );

    if forcing > 0.0 && wave.s0 >= 0.0 {
        let trough = Trough::new(site, wave.c, forcing);
        let (s_min, m_min) = trough.minimum_on(wave.s0);
        let margin = wave.r0 - m_min;
        report.worst_s = Some(s_min);
        report.worst_margin = Some(margin);
        report.push(
            "r0 - m(s) < 0 on [-s0, s0]",
            margin < 0.0,
            format!("max r0 - m(s) = {margin:e} at s = {s_min:e}"),
        );
        let xi_max = wave.k * margin;
        report.push(
            "k*(r0 - m(s)) <= -xi_guard",
            wave.xi_guard > 0.0 && xi_max <= -wave.xi_guard,
            format!("max k*(r0 - m(s)) = {xi_max:e}"),
        );
    } else {
        let why = "trough function undefined (needs f_hat*c0 + g > 0 and s0 >= 0)".to_string();
        report.push("r0 - m(s) < 0 on [-s0, s0]", false, why.clone());
        report.push("k*(r0 - m(s)) <= -xi_guard", false, why);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn reference_wave() -> WaveParams {
        WaveParams {
            k: 2.0 * std::f64::consts::PI / 1e4,
            c: 124.89,
            c0: 30.0,
            z0: 5000.0,
            s0: 1e4,
            r0: -20.0,
            r1: -5000.0,
            xi_guard: WaveParams::DEFAULT_XI_GUARD,
        }
    }

    #[test]
    fn coriolis_at_equator() {
        let consts = PhysicalConstants::default();
        let site = coriolis_params(0.0, &consts).unwrap();
        assert_eq!(site.f, 0.0);
        assert_eq!(site.f_hat, 2.0 * 7.29e-5);
        assert!((site.f_hat - 1.458e-4).abs() < 1e-18);
        assert!((site.beta - 2.2860e-11).abs() < 1e-14);
    }

    #[test]
    fn coriolis_at_pole() {
        let consts = PhysicalConstants::default();
        let site = coriolis_params(FRAC_PI_2, &consts).unwrap();
        assert_eq!(site.f, 2.0 * 7.29e-5);
        assert!(site.f_hat.abs() < 1e-20);
        assert!(site.beta.abs() < 1e-26);
    }

    #[test]
    fn coriolis_at_45_degrees() {
        // 2 * 7.29e-5 * sqrt(2)/2 = 1.03096168697e-4
        let site = coriolis_params(FRAC_PI_4, &PhysicalConstants::default()).unwrap();
        assert!((site.f - 1.030_961_686_97e-4).abs() < 1e-15);
        assert!((site.f - site.f_hat).abs() < 1e-19);
    }

    #[test]
    fn latitude_out_of_range() {
        let consts = PhysicalConstants::default();
        assert!(matches!(coriolis_params(1.6, &consts), Err(ParamsError::Latitude(_))));
        assert!(matches!(
            coriolis_params(f64::NAN, &consts),
            Err(ParamsError::Latitude(_))
        ));
    }

    #[test]
    fn degenerate_domain_passes() {
        let consts = PhysicalConstants::default();
        let site = coriolis_params(FRAC_PI_4, &consts).unwrap();
        let wave = WaveParams {
            s0: 0.0,
            r0: -1.0,
            r1: -10.0,
            k: 1.0,
            ..reference_wave()
        };
        let report = validate(&wave, &site, &consts);
        assert!(report.is_admissible(), "{report}");
        assert_eq!(report.worst_s, Some(0.0));
    }

    #[test]
    fn forcing_boundary_fails() {
        let consts = PhysicalConstants::default();
        let site = coriolis_params(FRAC_PI_4, &consts).unwrap();
        let wave = WaveParams {
            c0: -consts.g / site.f_hat,
            ..reference_wave()
        };
        let report = validate(&wave, &site, &consts);
        assert!(!report.is_admissible());
        assert!(report.failures().any(|c| c.name == "f_hat*c0 + g > 0"));
    }

    #[test]
    fn reference_config_passes() {
        let consts = PhysicalConstants::default();
        let site = coriolis_params(FRAC_PI_4, &consts).unwrap();
        let report = validate(&reference_wave(), &site, &consts);
        assert!(report.is_admissible(), "{report}");
        // The trough is smallest at the southern edge for this configuration.
        assert_eq!(report.worst_s, Some(-1e4));
    }

    proptest! {
        #[test]
        fn rotation_identity(phi in -FRAC_PI_2..FRAC_PI_2) {
            let consts = PhysicalConstants::default();
            let site = coriolis_params(phi, &consts).unwrap();
            let four_omega2 = 4.0 * consts.omega * consts.omega;
            let rel = (site.f * site.f + site.f_hat * site.f_hat - four_omega2).abs() / four_omega2;
            prop_assert!(rel < 1e-15);
            prop_assert_eq!(site, coriolis_params(phi, &consts).unwrap());
        }

        #[test]
        fn raising_r0_above_trough_minimum_flips_verdict(
            phi in -1.4f64..1.4,
            s0 in 0.0f64..5e4,
            offset in 2.0f64..500.0,
        ) {
            let consts = PhysicalConstants::default();
            let site = coriolis_params(phi, &consts).unwrap();
            let mut wave = WaveParams { s0, ..reference_wave() };
            let forcing = wave.forcing(&site, &consts);
            let (_, m_min) = Trough::new(&site, wave.c, forcing).minimum_on(s0);
            wave.r0 = m_min - offset;
            wave.r1 = wave.r0 - 1000.0;
            prop_assert!(validate(&wave, &site, &consts).is_admissible());
            wave.r0 = m_min + offset;
            prop_assert!(!validate(&wave, &site, &consts).is_admissible());
        }
    }
}
