//! Lagrangian kinematics of the trapped lee wave.
//!
//! A particle with labels (q, s, r) sits at
//!
//! ```text
//! x = q − c₀t − (1/k) e^ξ sin θ
//! y = s
//! z = Z₀ + r + (1/k) e^ξ cos θ
//! ```
//!
//! with ξ = k(r − m(s)) and θ = k(q − ct). Particles orbit circles of radius
//! e^ξ/k in the vertical plane y = s while drifting with the background wind.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{validate, ParamsError, PhysicalConstants, SiteParams, WaveParams};

pub type Vec3 = Vector3<f64>;

const MAX_NEWTON_ITERATIONS: usize = 50;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("label {label:?} is outside the admissible domain: {reason}")]
    Domain { label: LabelPoint, reason: &'static str },
    #[error("vertical phase xi = {xi:e} is within the guard margin {guard:e} of zero")]
    Conditioning { xi: f64, guard: f64 },
    #[error("flow-map inversion did not converge after {iterations} iterations (residual {residual:e} m)")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("inverted label {0:?} lies outside the admissible domain")]
    OutsideImage(LabelPoint),
}

impl KinematicsError {
    /// True for failures of [`LeeWave::invert_flow_map`].
    pub fn is_inversion_failure(&self) -> bool {
        matches!(self, Self::NoConvergence { .. } | Self::OutsideImage(_))
    }
}

/// Lagrangian labels of a particle, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelPoint {
    pub q: f64,
    pub s: f64,
    pub r: f64,
}

impl LabelPoint {
    pub const fn new(q: f64, s: f64, r: f64) -> Self {
        Self { q, s, r }
    }

    /// Component `axis` (0 = q, 1 = s, 2 = r).
    pub fn get(&self, axis: usize) -> f64 {
        match axis {
            0 => self.q,
            1 => self.s,
            2 => self.r,
            _ => panic!("label axis {axis} out of range"),
        }
    }

    /// Copy with component `axis` shifted by `delta`.
    pub fn shifted(mut self, axis: usize, delta: f64) -> Self {
        match axis {
            0 => self.q += delta,
            1 => self.s += delta,
            2 => self.r += delta,
            _ => panic!("label axis {axis} out of range"),
        }
        self
    }
}

/// Eulerian position, metres (east, north, up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PhysicalPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_vector(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: Vec3) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }
}

/// Dimensionless phases ξ = k(r − m(s)) and θ = k(q − ct).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub xi: f64,
    pub theta: f64,
}

impl Phase {
    /// Orbit attenuation e^ξ.
    #[inline]
    pub fn attenuation(&self) -> f64 {
        self.xi.exp()
    }

    /// Closed-form Jacobian determinant 1 − e^{2ξ}.
    #[inline]
    pub fn jacobian_det(&self) -> f64 {
        -(2.0 * self.xi).exp_m1()
    }
}

/// Partial derivatives of (x, y, z) with respect to (q, s, r) when used as
/// the forward Jacobian (row = label, column = coordinate), or of (q, s, r)
/// with respect to (x, y, z) for the inverse (row = coordinate, column =
/// label). Either way `forward * inverse = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian3(pub Matrix3<f64>);

impl Jacobian3 {
    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

/// The trough function m(s) = (2fcs + βcs²) / (2(f̂c₀ + g)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trough {
    f: f64,
    beta: f64,
    c: f64,
    forcing: f64,
}

impl Trough {
    pub fn new(site: &SiteParams, c: f64, forcing: f64) -> Self {
        Self {
            f: site.f,
            beta: site.beta,
            c,
            forcing,
        }
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        (2.0 * self.f * self.c * s + self.beta * self.c * s * s) / (2.0 * self.forcing)
    }

    /// m_s(s) = (f + βs)c / (f̂c₀ + g).
    #[inline]
    pub fn slope(&self, s: f64) -> f64 {
        (self.f + self.beta * s) * self.c / self.forcing
    }

    /// Smallest value of m on [−s0, s0] and where it is attained.
    pub fn minimum_on(&self, s0: f64) -> (f64, f64) {
        let mut best = (-s0, self.value(-s0));
        let mut consider = |s: f64| {
            let m = self.value(s);
            if m < best.1 {
                best = (s, m);
            }
        };
        consider(s0);
        if self.beta != 0.0 {
            let vertex = -self.f / self.beta;
            if vertex.abs() <= s0 {
                consider(vertex);
            }
        }
        best
    }

    /// Real roots of m(s) = level, in increasing order.
    pub fn solve(&self, level: f64) -> Vec<f64> {
        // (βc/2) s² + fc s − G·level = 0
        let a = 0.5 * self.beta * self.c;
        let b = self.f * self.c;
        let cc = -self.forcing * level;
        if a == 0.0 {
            return if b == 0.0 { Vec::new() } else { vec![-cc / b] };
        }
        let disc = b * b - 4.0 * a * cc;
        if disc < 0.0 {
            return Vec::new();
        }
        let sq = disc.sqrt();
        // stable pairing of the two roots
        let qv = -0.5 * (b + b.signum() * sq);
        let mut roots = if qv == 0.0 { vec![0.0] } else { vec![qv / a, cc / qv] };
        roots.sort_by(f64::total_cmp);
        roots
    }
}

/// The flow: constants, Coriolis parameters and wave configuration of one
/// admissible trapped lee wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeeWave {
    consts: PhysicalConstants,
    site: SiteParams,
    wave: WaveParams,
    forcing: f64,
    trough: Trough,
}

impl LeeWave {
    /// Build a flow, rejecting configurations that fail [`validate`].
    pub fn new(consts: PhysicalConstants, site: SiteParams, wave: WaveParams) -> Result<Self, ParamsError> {
        let report = validate(&wave, &site, &consts);
        if !report.is_admissible() {
            return Err(ParamsError::Inadmissible(report));
        }
        let forcing = wave.forcing(&site, &consts);
        Ok(Self {
            consts,
            site,
            wave,
            forcing,
            trough: Trough::new(&site, wave.c, forcing),
        })
    }

    pub fn consts(&self) -> &PhysicalConstants {
        &self.consts
    }

    pub fn site(&self) -> &SiteParams {
        &self.site
    }

    pub fn wave(&self) -> &WaveParams {
        &self.wave
    }

    /// f̂c₀ + g.
    pub fn forcing(&self) -> f64 {
        self.forcing
    }

    pub fn trough(&self) -> &Trough {
        &self.trough
    }

    pub fn trough_m(&self, s: f64) -> f64 {
        self.trough.value(s)
    }

    pub fn trough_slope(&self, s: f64) -> f64 {
        self.trough.slope(s)
    }

    /// Wave period 2π/(kc), seconds.
    pub fn period(&self) -> f64 {
        TAU / (self.wave.k * self.wave.c)
    }

    /// Length scale 1/k used to size finite-difference steps.
    pub fn length_scale(&self) -> f64 {
        1.0 / self.wave.k
    }

    /// Time scale 1/(kc) used to size finite-difference steps.
    pub fn time_scale(&self) -> f64 {
        1.0 / (self.wave.k * self.wave.c)
    }

    /// Radius e^ξ/k of the orbit for the given label.
    pub fn orbit_radius(&self, label: &LabelPoint) -> f64 {
        self.vertical_phase(label.s, label.r).exp() / self.wave.k
    }

    #[inline]
    pub fn vertical_phase(&self, s: f64, r: f64) -> f64 {
        self.wave.k * (r - self.trough.value(s))
    }

    /// Phases at (label, t). Time is reduced modulo the period first.
    pub fn phase(&self, label: &LabelPoint, t: f64) -> Phase {
        let t_red = t.rem_euclid(self.period());
        Phase {
            xi: self.vertical_phase(label.s, label.r),
            theta: self.wave.k * (label.q - self.wave.c * t_red),
        }
    }

    /// Phases, failing when ξ is not at least `xi_guard` below zero.
    pub fn guarded_phase(&self, label: &LabelPoint, t: f64) -> Result<Phase, KinematicsError> {
        let phase = self.phase(label, t);
        if phase.xi > -self.wave.xi_guard || phase.xi.is_nan() {
            return Err(KinematicsError::Conditioning {
                xi: phase.xi,
                guard: self.wave.xi_guard,
            });
        }
        Ok(phase)
    }

    /// Check s ∈ [−s0, s0] and r ∈ (r1, r0). Any real q is accepted.
    pub fn check_label(&self, label: &LabelPoint) -> Result<(), KinematicsError> {
        let w = &self.wave;
        let reason = if !(label.q.is_finite() && label.s.is_finite() && label.r.is_finite()) {
            Some("non-finite label")
        } else if label.s.abs() > w.s0 {
            Some("s outside [-s0, s0]")
        } else if !(label.r > w.r1 && label.r < w.r0) {
            Some("r outside (r1, r0)")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(KinematicsError::Domain { label: *label, reason }),
            None => Ok(()),
        }
    }

    /// As [`check_label`](Self::check_label), additionally requiring q ≥ 0.
    pub fn check_label_strict(&self, label: &LabelPoint) -> Result<(), KinematicsError> {
        self.check_label(label)?;
        if label.q < 0.0 {
            return Err(KinematicsError::Domain {
                label: *label,
                reason: "q < 0 in strict mode",
            });
        }
        Ok(())
    }

    /// Position without the domain check.
    pub fn position(&self, label: &LabelPoint, t: f64) -> PhysicalPoint {
        let k = self.wave.k;
        let phase = self.phase(label, t);
        let radius = phase.attenuation() / k;
        let (sin, cos) = phase.theta.sin_cos();
        PhysicalPoint {
            x: label.q - self.wave.c0 * t - radius * sin,
            y: label.s,
            z: self.wave.z0 + label.r + radius * cos,
        }
    }

    pub fn flow_map(&self, label: &LabelPoint, t: f64) -> Result<PhysicalPoint, KinematicsError> {
        self.check_label(label)?;
        Ok(self.position(label, t))
    }

    /// ∂(x, y, z)/∂(q, s, r), row = label.
    pub fn jacobian(&self, label: &LabelPoint, t: f64) -> Result<Jacobian3, KinematicsError> {
        let phase = self.guarded_phase(label, t)?;
        let e = phase.attenuation();
        let (sin, cos) = phase.theta.sin_cos();
        let ms = self.trough.slope(label.s);
        #[rustfmt::skip]
        let m = Matrix3::new(
            1.0 - e * cos,  0.0, -e * sin,
            ms * e * sin,   1.0, -ms * e * cos,
            -e * sin,       0.0, 1.0 + e * cos,
        );
        Ok(Jacobian3(m))
    }

    /// ∂(q, s, r)/∂(x, y, z), row = coordinate.
    pub fn inverse_jacobian(&self, label: &LabelPoint, t: f64) -> Result<Jacobian3, KinematicsError> {
        let phase = self.guarded_phase(label, t)?;
        let e = phase.attenuation();
        let (sin, cos) = phase.theta.sin_cos();
        let ms = self.trough.slope(label.s);
        let det = phase.jacobian_det();
        #[rustfmt::skip]
        let m = Matrix3::new(
            1.0 + e * cos,  0.0, e * sin,
            -ms * e * sin,  det, ms * (e * cos - e * e),
            e * sin,        0.0, 1.0 - e * cos,
        ) / det;
        Ok(Jacobian3(m))
    }

    /// Particle velocity (u, v, w), m/s.
    pub fn velocity(&self, label: &LabelPoint, t: f64) -> Vec3 {
        let phase = self.phase(label, t);
        let amp = self.wave.c * phase.attenuation();
        let (sin, cos) = phase.theta.sin_cos();
        Vec3::new(-self.wave.c0 + amp * cos, 0.0, amp * sin)
    }

    /// Particle acceleration (Du/Dt, Dv/Dt, Dw/Dt), m/s².
    pub fn acceleration(&self, label: &LabelPoint, t: f64) -> Vec3 {
        let phase = self.phase(label, t);
        let amp = self.wave.k * self.wave.c * self.wave.c * phase.attenuation();
        let (sin, cos) = phase.theta.sin_cos();
        Vec3::new(amp * sin, 0.0, -amp * cos)
    }

    /// Recover the label of the particle at `p` at time `t`.
    ///
    /// Solves the (q, r) system at s = y by damped Newton iteration started
    /// from the deep-label asymptote q = x + c₀t, r = z − Z₀ (lowered to
    /// ξ = −1/2 if it lies above that). Iterates are kept in ξ < 0, where
    /// the map is one-to-one.
    pub fn invert_flow_map(&self, p: &PhysicalPoint, t: f64) -> Result<LabelPoint, KinematicsError> {
        let s = p.y;
        let target = Vector2::new(p.x, p.z);
        let residual = |q: f64, r: f64| {
            let pos = self.position(&LabelPoint { q, s, r }, t);
            Vector2::new(pos.x, pos.z) - target
        };
        let scale = p.norm().max(1.0);
        let tol = 1e-10 * scale;

        let r_start = (p.z - self.wave.z0).min(self.trough.value(s) - 0.5 / self.wave.k);
        let mut guess = Vector2::new(p.x + self.wave.c0 * t, r_start);
        let mut res = residual(guess.x, guess.y);
        let mut norm = res.norm();
        let mut iterations = 0;
        while iterations < MAX_NEWTON_ITERATIONS && norm > 0.0 {
            if !norm.is_finite() {
                break;
            }
            iterations += 1;
            let phase = self.phase(&LabelPoint::new(guess.x, s, guess.y), t);
            let e = phase.attenuation();
            let (sin, cos) = phase.theta.sin_cos();
            // rows: (x, z); columns: (q, r)
            let jac = Matrix2::new(1.0 - e * cos, -e * sin, -e * sin, 1.0 + e * cos);
            let Some(step) = jac.lu().solve(&(-res)) else {
                break;
            };
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let trial = guess + step * lambda;
                let trial_res = residual(trial.x, trial.y);
                let trial_norm = trial_res.norm();
                if trial_norm < norm && self.vertical_phase(s, trial.y) < 0.0 {
                    accepted = Some((trial, trial_res, trial_norm));
                    break;
                }
                lambda *= 0.5;
            }
            // No decrease along the Newton direction: at the roundoff floor.
            let Some((trial, trial_res, trial_norm)) = accepted else {
                break;
            };
            guess = trial;
            res = trial_res;
            norm = trial_norm;
            if norm <= tol && step.norm() * lambda <= 8.0 * f64::EPSILON * scale {
                break;
            }
        }

        if !(norm <= tol) {
            return Err(KinematicsError::NoConvergence {
                iterations,
                residual: norm,
            });
        }
        let label = LabelPoint::new(guess.x, s, guess.y);
        self.check_label(&label)
            .map_err(|_| KinematicsError::OutsideImage(label))?;
        Ok(label)
    }
}
