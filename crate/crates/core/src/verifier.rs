//! Numerical verification that the constructed fields solve the governing
//! system: momentum (with full β-plane Coriolis terms), mass conservation,
//! the ideal-gas law and the first law of thermodynamics.
//!
//! Material derivatives are plain time derivatives at fixed label and are
//! taken by central differences. Eulerian pressure gradients come from
//! differencing the pressure in label space and solving the 3×3 system
//! (P_q, P_s, P_r) = J (P_x, P_y, P_z). None of the residuals reuse the
//! closed-form acceleration, inverse Jacobian or velocity gradient.

use std::fmt;

use nalgebra::Matrix3;
use serde::Serialize;
use thiserror::Error;

use crate::fd;
use crate::grid::Node;
use crate::kinematics::{KinematicsError, LabelPoint, LeeWave, PhysicalPoint, Vec3};
use crate::params::{PhysicalConstants, SiteParams};
use crate::thermo::{Atmosphere, ThermoError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error("dispersion relation needs {0}")]
    Dispersion(&'static str),
    #[error("singular Jacobian at {0:?}")]
    Singular(LabelPoint),
}

/// Positive root c of kc² + f̂c − (f̂c₀ + g) = 0.
pub fn solve_dispersion(k: f64, c0: f64, site: &SiteParams, consts: &PhysicalConstants) -> Result<f64, VerifyError> {
    if !(k > 0.0) {
        return Err(VerifyError::Dispersion("k > 0"));
    }
    let forcing = site.f_hat * c0 + consts.g;
    if !(forcing > 0.0) {
        return Err(VerifyError::Dispersion("f_hat*c0 + g > 0"));
    }
    // (−f̂ + √(f̂² + 4kG))/(2k), rearranged to avoid cancellation.
    let root = (site.f_hat * site.f_hat + 4.0 * k * forcing).sqrt();
    Ok(2.0 * forcing / (site.f_hat + root))
}

/// kc² + f̂c − f̂c₀ − g.
pub fn dispersion_residual(k: f64, c: f64, c0: f64, site: &SiteParams, consts: &PhysicalConstants) -> f64 {
    k * c * c + site.f_hat * c - site.f_hat * c0 - consts.g
}

/// The fields a residual operator inspects, as functions of (label, t).
pub trait FlowFields {
    fn flow(&self) -> &LeeWave;

    fn velocity(&self, label: &LabelPoint, t: f64) -> Vec3 {
        self.flow().velocity(label, t)
    }

    fn density(&self, label: &LabelPoint, t: f64) -> Result<f64, ThermoError>;
    fn pressure(&self, label: &LabelPoint, t: f64) -> Result<f64, ThermoError>;
    fn temperature(&self, label: &LabelPoint, t: f64) -> Result<f64, ThermoError>;
}

impl FlowFields for Atmosphere {
    fn flow(&self) -> &LeeWave {
        Atmosphere::flow(self)
    }

    fn density(&self, label: &LabelPoint, _t: f64) -> Result<f64, ThermoError> {
        Atmosphere::density(self, label.s, label.r)
    }

    fn pressure(&self, label: &LabelPoint, _t: f64) -> Result<f64, ThermoError> {
        Atmosphere::pressure(self, label.s, label.r)
    }

    fn temperature(&self, label: &LabelPoint, _t: f64) -> Result<f64, ThermoError> {
        Atmosphere::temperature(self, label.s, label.r)
    }
}

/// Deliberate O(ε) corruption of one field, for checking that the residual
/// operators detect non-solutions. Drifts grow at the relative rate ε·kc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Perturbation {
    VelocityScale(f64),
    DensityScale(f64),
    DensityDrift(f64),
    PressureScale(f64),
    PressureDrift(f64),
    TemperatureScale(f64),
    TemperatureDrift(f64),
}

pub struct Perturbed<'a, F: ?Sized> {
    pub inner: &'a F,
    pub perturbation: Perturbation,
}

impl<'a, F: FlowFields + ?Sized> Perturbed<'a, F> {
    pub fn new(inner: &'a F, perturbation: Perturbation) -> Self {
        Self { inner, perturbation }
    }

    fn drift(&self, eps: f64, t: f64) -> f64 {
        1.0 + eps * t / self.inner.flow().time_scale()
    }
}

impl<F: FlowFields + ?Sized> FlowFields for Perturbed<'_, F> {
    fn flow(&self) -> &LeeWave {
        self.inner.flow()
    }

    fn velocity(&self, label: &LabelPoint, t: f64) -> Vec3 {
        let u = self.inner.velocity(label, t);
        match self.perturbation {
            Perturbation::VelocityScale(eps) => u * (1.0 + eps),
            _ => u,
        }
    }

    fn density(&self, label: &LabelPoint, t: f64) -> Result<f64, ThermoError> {
        let rho = self.inner.density(label, t)?;
        Ok(match self.perturbation {
            Perturbation::DensityScale(eps) => rho * (1.0 + eps),
            Perturbation::DensityDrift(eps) => rho * self.drift(eps, t),
            _ => rho,
        })
    }

    fn pressure(&self, label: &LabelPoint, t: f64) -> Result<f64, ThermoError> {
        let p = self.inner.pressure(label, t)?;
        Ok(match self.perturbation {
            Perturbation::PressureScale(eps) => p * (1.0 + eps),
            Perturbation::PressureDrift(eps) => p * self.drift(eps, t),
            _ => p,
        })
    }

    fn temperature(&self, label: &LabelPoint, t: f64) -> Result<f64, ThermoError> {
        let temp = self.inner.temperature(label, t)?;
        Ok(match self.perturbation {
            Perturbation::TemperatureScale(eps) => temp * (1.0 + eps),
            Perturbation::TemperatureDrift(eps) => temp * self.drift(eps, t),
            _ => temp,
        })
    }
}

fn time_step(flow: &LeeWave, t: f64) -> f64 {
    fd::step(t, flow.time_scale())
}

/// (P_q, P_s, P_r) by central differences.
pub fn label_pressure_gradient<F: FlowFields + ?Sized>(
    fields: &F,
    label: &LabelPoint,
    t: f64,
) -> Result<Vec3, ThermoError> {
    let scale = fields.flow().length_scale();
    let mut grad = Vec3::zeros();
    for axis in 0..3 {
        let h = fd::step(label.get(axis), scale);
        grad[axis] = fd::try_central(|d| fields.pressure(&label.shifted(axis, d), t), h)?;
    }
    Ok(grad)
}

/// (P_x, P_y, P_z) from the label-space gradient through J.
pub fn eulerian_pressure_gradient<F: FlowFields + ?Sized>(
    fields: &F,
    label: &LabelPoint,
    t: f64,
) -> Result<Vec3, VerifyError> {
    let jac = fields.flow().jacobian(label, t)?;
    let grad = label_pressure_gradient(fields, label, t)?;
    jac.0.lu().solve(&grad).ok_or(VerifyError::Singular(*label))
}

/// Momentum residual, divided by g.
pub fn euler_residual<F: FlowFields + ?Sized>(fields: &F, label: &LabelPoint, t: f64) -> Result<Vec3, VerifyError> {
    let flow = fields.flow();
    let site = flow.site();
    let g = flow.consts().g;
    let grad_p = eulerian_pressure_gradient(fields, label, t)?;
    let rho = fields.density(label, t)?;
    let u = fields.velocity(label, t);
    let du = fd::central_vec(|d| fields.velocity(label, t + d), time_step(flow, t));
    // y = s along every particle path
    let f_y = site.f_at(label.s);
    let res = Vec3::new(
        du.x + site.f_hat * u.z - f_y * u.y + grad_p.x / rho,
        du.y + f_y * u.x + grad_p.y / rho,
        du.z - site.f_hat * u.x + grad_p.z / rho + g,
    );
    Ok(res / g)
}

/// ∂U_i/∂x_j by differencing the velocity in label space and applying the
/// numerical inverse of J.
pub fn numeric_velocity_gradient<F: FlowFields + ?Sized>(
    fields: &F,
    label: &LabelPoint,
    t: f64,
) -> Result<Matrix3<f64>, VerifyError> {
    let flow = fields.flow();
    let jac = flow.jacobian(label, t)?;
    let inv = jac.0.try_inverse().ok_or(VerifyError::Singular(*label))?;
    let scale = flow.length_scale();
    let mut du_dlabel = Matrix3::zeros();
    for axis in 0..3 {
        let h = fd::step(label.get(axis), scale);
        let col = fd::central_vec(|d| fields.velocity(&label.shifted(axis, d), t), h);
        du_dlabel.set_column(axis, &col);
    }
    // inv[(j, a)] = ∂label_a/∂x_j
    Ok(du_dlabel * inv.transpose())
}

/// Mass-conservation residual Dρ/Dt + ρ ∇·U, divided by ρkc.
pub fn mass_residual<F: FlowFields + ?Sized>(fields: &F, label: &LabelPoint, t: f64) -> Result<f64, VerifyError> {
    let flow = fields.flow();
    let w = flow.wave();
    let rho = fields.density(label, t)?;
    let drho = fd::try_central(|d| fields.density(label, t + d), time_step(flow, t))?;
    let div = numeric_velocity_gradient(fields, label, t)?.trace();
    Ok((drho + rho * div) / (rho * w.k * w.c))
}

/// First-law residual c_p DT/Dt − (1/ρ) DP/Dt, divided by c_p T kc.
pub fn first_law_residual<F: FlowFields + ?Sized>(fields: &F, label: &LabelPoint, t: f64) -> Result<f64, VerifyError> {
    let flow = fields.flow();
    let w = flow.wave();
    let cp = flow.consts().cp;
    let h = time_step(flow, t);
    let rho = fields.density(label, t)?;
    let temp = fields.temperature(label, t)?;
    let dtemp = fd::try_central(|d| fields.temperature(label, t + d), h)?;
    let dp = fd::try_central(|d| fields.pressure(label, t + d), h)?;
    Ok((cp * dtemp - dp / rho) / (cp * temp * w.k * w.c))
}

/// Relative ideal-gas residual (P − ρRT)/P.
pub fn state_residual<F: FlowFields + ?Sized>(fields: &F, label: &LabelPoint, t: f64) -> Result<f64, VerifyError> {
    let p = fields.pressure(label, t)?;
    let rho = fields.density(label, t)?;
    let temp = fields.temperature(label, t)?;
    Ok((p - rho * fields.flow().consts().gas_constant * temp) / p)
}

/// Differenced (P_q, P_s, P_r) minus the reduced closed forms
///
/// ```text
/// P_q = 0
/// P_s = −ρ(kc² + f̂c) m_s e^{2ξ} + ρ(f + βs)c₀
/// P_r =  ρ(kc² + f̂c) e^{2ξ} − ρ(f̂c₀ + g)
/// ```
///
/// divided by ρ(f̂c₀ + g).
pub fn pressure_gradient_identity(atm: &Atmosphere, label: &LabelPoint, t: f64) -> Result<Vec3, VerifyError> {
    let flow = atm.flow();
    let w = flow.wave();
    let rho = atm.density(label.s, label.r)?;
    let e2 = (2.0 * flow.vertical_phase(label.s, label.r)).exp();
    let orbital = w.k * w.c * w.c + flow.site().f_hat * w.c;
    let closed = Vec3::new(
        0.0,
        -rho * orbital * flow.trough_slope(label.s) * e2 + rho * flow.site().f_at(label.s) * w.c0,
        rho * orbital * e2 - rho * flow.forcing(),
    );
    let numeric = label_pressure_gradient(atm, label, t)?;
    Ok((numeric - closed) / (rho * flow.forcing()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub momentum: f64,
    pub mass: f64,
    pub first_law: f64,
    /// Relative.
    pub state: f64,
    /// Relative to g.
    pub dispersion: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            momentum: 1e-6,
            mass: 1e-6,
            first_law: 1e-6,
            state: 1e-12,
            dispersion: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub equation: &'static str,
    pub scale: &'static str,
    pub max_residual: f64,
    pub at: Option<Node>,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepScales {
    /// ε^{1/3}
    pub relative_step: f64,
    /// m
    pub length_scale: f64,
    /// s
    pub time_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub grid: String,
    pub seed: Option<u64>,
    pub nodes: usize,
    pub failed_nodes: usize,
    pub first_failure: Option<String>,
    pub steps: StepScales,
    /// |kc² + f̂c − f̂c₀ − g| / g
    pub dispersion_residual: f64,
    pub max_jacobian_condition: f64,
    pub tolerances: Tolerances,
    pub entries: Vec<ResidualEntry>,
    pub passed: bool,
}

impl ResidualReport {
    pub fn entry(&self, equation: &str) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.equation == equation)
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.seed {
            Some(seed) => writeln!(f, "grid: {} ({} nodes, seed {seed})", self.grid, self.nodes)?,
            None => writeln!(f, "grid: {} ({} nodes)", self.grid, self.nodes)?,
        }
        writeln!(f, "dispersion residual / g: {:.3e}", self.dispersion_residual)?;
        for e in &self.entries {
            let tag = if e.passed { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "  [{tag}] {:<10} max {:.3e} (tol {:.0e}, scale {})",
                e.equation, e.max_residual, e.tolerance, e.scale
            )?;
        }
        if self.failed_nodes > 0 {
            writeln!(f, "  {} nodes failed to evaluate", self.failed_nodes)?;
        }
        Ok(())
    }
}

struct Running {
    max: f64,
    at: Option<Node>,
}

impl Running {
    fn new() -> Self {
        Self { max: 0.0, at: None }
    }

    fn update(&mut self, value: f64, node: &Node) {
        let value = if value.is_nan() { f64::INFINITY } else { value.abs() };
        if value > self.max || self.at.is_none() {
            self.max = value;
            self.at = Some(*node);
        }
    }
}

/// Evaluate every residual at every node and reduce to per-equation maxima.
pub fn verify_nodes<F: FlowFields + ?Sized>(
    fields: &F,
    nodes: &[Node],
    tolerances: &Tolerances,
    grid: impl Into<String>,
    seed: Option<u64>,
) -> ResidualReport {
    let flow = fields.flow();
    let w = flow.wave();
    let dispersion = dispersion_residual(w.k, w.c, w.c0, flow.site(), flow.consts()).abs() / flow.consts().g;
    let mut euler = [Running::new(), Running::new(), Running::new()];
    let mut mass = Running::new();
    let mut first_law = Running::new();
    let mut state = Running::new();
    let mut failed = 0;
    let mut first_failure = None;
    let mut max_cond: f64 = 0.0;

    for node in nodes {
        let l = &node.label;
        let outcome = (|| -> Result<_, VerifyError> {
            let jac = flow.jacobian(l, node.t)?;
            let cond = jac
                .0
                .try_inverse()
                .map(|inv| jac.0.abs().row_sum().max() * inv.abs().row_sum().max())
                .unwrap_or(f64::INFINITY);
            Ok((
                euler_residual(fields, l, node.t)?,
                mass_residual(fields, l, node.t)?,
                first_law_residual(fields, l, node.t)?,
                state_residual(fields, l, node.t)?,
                cond,
            ))
        })();
        match outcome {
            Ok((e, m, fl, st, cond)) => {
                for (run, v) in euler.iter_mut().zip(e.iter()) {
                    run.update(*v, node);
                }
                mass.update(m, node);
                first_law.update(fl, node);
                state.update(st, node);
                max_cond = max_cond.max(cond);
            }
            Err(err) => {
                failed += 1;
                first_failure.get_or_insert_with(|| format!("{node:?}: {err}"));
            }
        }
    }

    let entry = |equation, scale, run: &Running, tolerance: f64| ResidualEntry {
        equation,
        scale,
        max_residual: run.max,
        at: run.at,
        tolerance,
        passed: run.max < tolerance,
    };
    let [ex, ey, ez] = &euler;
    let entries = vec![
        entry("euler_x", "g", ex, tolerances.momentum),
        entry("euler_y", "g", ey, tolerances.momentum),
        entry("euler_z", "g", ez, tolerances.momentum),
        entry("mass", "rho*k*c", &mass, tolerances.mass),
        entry("state", "P", &state, tolerances.state),
        entry("first_law", "c_p*T*k*c", &first_law, tolerances.first_law),
    ];
    let passed = failed == 0 && dispersion < tolerances.dispersion && entries.iter().all(|e| e.passed);
    ResidualReport {
        grid: grid.into(),
        seed,
        nodes: nodes.len(),
        failed_nodes: failed,
        first_failure,
        steps: StepScales {
            relative_step: f64::EPSILON.cbrt(),
            length_scale: flow.length_scale(),
            time_scale: flow.time_scale(),
        },
        dispersion_residual: dispersion,
        max_jacobian_condition: max_cond,
        tolerances: *tolerances,
        entries,
        passed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub analytic: PhysicalPoint,
    pub numeric: PhysicalPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub label: LabelPoint,
    pub horizon: f64,
    pub steps: usize,
    /// Orbit radius e^ξ/k, m.
    pub amplitude: f64,
    /// Largest distance between the integrated and closed-form paths, m.
    pub max_error: f64,
    pub samples: Vec<TrajectorySample>,
}

/// Velocity of the particle found at `p` at time `t`.
pub fn eulerian_velocity(flow: &LeeWave, p: &PhysicalPoint, t: f64) -> Result<Vec3, KinematicsError> {
    let label = flow.invert_flow_map(p, t)?;
    Ok(flow.velocity(&label, t))
}

/// Advect the particle `label` through the Eulerian velocity field with
/// classical RK4 and compare against the closed-form path.
pub fn trajectory_consistency(
    flow: &LeeWave,
    label: &LabelPoint,
    horizon: f64,
    steps: usize,
) -> Result<TrajectoryReport, VerifyError> {
    let steps = steps.max(1);
    let dt = horizon / steps as f64;
    let field = |x: Vec3, t: f64| eulerian_velocity(flow, &PhysicalPoint::from_vector(x), t);

    let start = flow.flow_map(label, 0.0)?;
    let mut x = start.to_vector();
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(TrajectorySample {
        t: 0.0,
        analytic: start,
        numeric: start,
    });
    let mut max_error: f64 = 0.0;
    for n in 0..steps {
        let t = n as f64 * dt;
        let k1 = field(x, t)?;
        let k2 = field(x + k1 * (0.5 * dt), t + 0.5 * dt)?;
        let k3 = field(x + k2 * (0.5 * dt), t + 0.5 * dt)?;
        let k4 = field(x + k3 * dt, t + dt)?;
        x += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0);
        let t_next = (n + 1) as f64 * dt;
        let analytic = flow.position(label, t_next);
        max_error = max_error.max((x - analytic.to_vector()).norm());
        samples.push(TrajectorySample {
            t: t_next,
            analytic,
            numeric: PhysicalPoint::from_vector(x),
        });
    }
    Ok(TrajectoryReport {
        label: *label,
        horizon,
        steps,
        amplitude: flow.orbit_radius(label),
        max_error,
        samples,
    })
}

/// log₂ of the error ratio between `steps` and `2·steps`.
pub fn observed_order(flow: &LeeWave, label: &LabelPoint, horizon: f64, steps: usize) -> Result<f64, VerifyError> {
    let coarse = trajectory_consistency(flow, label, horizon, steps)?.max_error;
    let fine = trajectory_consistency(flow, label, horizon, 2 * steps)?.max_error;
    Ok((coarse / fine).log2())
}
