//! Exact nonlinear trapped lee waves on the β-plane.
//!
//! The flow is given in Lagrangian labels (q, s, r) as
//!
//! ```text
//! x = q − c₀t − e^ξ sin θ / k
//! y = s
//! z = Z₀ + r + e^ξ cos θ / k,      ξ = k(r − m(s)),  θ = k(q − ct)
//! ```
//!
//! together with density, pressure and temperature fields that depend on
//! (s, r) only. The crate evaluates the solution, verifies it against the
//! governing equations by finite differences, and analyses its vorticity.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod fd;
pub mod grid;
pub mod kinematics;
pub mod params;
pub mod thermo;
pub mod verifier;
pub mod vorticity;

pub use config::{Config, ConfigError, ProfileConfig};
pub use grid::{AxisRange, FieldRecord, GridError, GridSpec, Node, Sampling, Time, Vertical, DEFAULT_SEED};
pub use kinematics::{Jacobian3, KinematicsError, LabelPoint, LeeWave, Phase, PhysicalPoint, Trough, Vec3};
pub use params::{
    coriolis_params, validate, CheckResult, ParamsError, PhysicalConstants, SiteParams, ValidationReport, WaveParams,
};
pub use thermo::{Atmosphere, DensityProfile, MonotonicityReport, ProfileFamily, ThermoError, ThermoState};
pub use verifier::{
    solve_dispersion, FlowFields, Perturbation, Perturbed, ResidualReport, Tolerances, TrajectoryReport, VerifyError,
};
pub use vorticity::{Figure1Row, PsiAnalysis, VorticityError, VorticityVec};

/// All fields at one node.
pub fn field_record(atm: &Atmosphere, node: &Node) -> Result<FieldRecord, VerifyError> {
    let flow = atm.flow();
    let l = &node.label;
    let p = flow.flow_map(l, node.t)?;
    let u = flow.velocity(l, node.t);
    let state = atm.state(l.s, l.r)?;
    let gamma = vorticity::vorticity_vec(flow, l, node.t)?;
    Ok(FieldRecord {
        q: l.q,
        s: l.s,
        r: l.r,
        t: node.t,
        x: p.x,
        y: p.y,
        z: p.z,
        u: u.x,
        v: u.y,
        w: u.z,
        rho: state.rho,
        pressure: state.pressure,
        temperature: state.temperature,
        gamma1: gamma.gamma1,
        gamma2: gamma.gamma2,
        gamma3: gamma.gamma3,
        gamma_abs: gamma.magnitude,
    })
}
