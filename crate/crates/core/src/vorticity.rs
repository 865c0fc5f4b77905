//! Velocity gradient, vorticity and the growth of |γ| with height.
//!
//! With E = e^ξ, D = 1 − E², K = kc·m_s and A = 3 + 8/m_s², the magnitude of
//! the vorticity satisfies
//!
//! ```text
//! |γ| ∂|γ|/∂z = K² k E²/D⁴ · [(1 − E cos θ) Ψ(E, cos θ) + E² sin²θ (1 − E²)]
//! Ψ(E, C)     = 1 − 3EC + AE² − E³C  ≥  Ψ(E) = 1 + E(AE − E² − 3)
//! ```
//!
//! so it increases with height wherever Ψ stays positive.

use nalgebra::Matrix3;
use num_bigint::BigInt;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::fd;
use crate::kinematics::{KinematicsError, LabelPoint, LeeWave, PhysicalPoint, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VorticityError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("trough slope m_s vanishes (f + beta*s = 0)")]
    FlatTrough,
    #[error("figure data needs {0}")]
    Range(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VorticityVec {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub magnitude: f64,
}

impl VorticityVec {
    pub fn from_vector(v: Vec3) -> Self {
        Self {
            gamma1: v.x,
            gamma2: v.y,
            gamma3: v.z,
            magnitude: v.norm(),
        }
    }

    pub fn to_vector(self) -> Vec3 {
        Vec3::new(self.gamma1, self.gamma2, self.gamma3)
    }
}

/// ∂U_i/∂x_j in closed form.
pub fn velocity_gradient(flow: &LeeWave, label: &LabelPoint, t: f64) -> Result<Matrix3<f64>, KinematicsError> {
    let phase = flow.guarded_phase(label, t)?;
    let e = phase.attenuation();
    let (sin, cos) = phase.theta.sin_cos();
    let ms = flow.trough_slope(label.s);
    let w = flow.wave();
    let scale = w.c * w.k * e / phase.jacobian_det();
    #[rustfmt::skip]
    let g = Matrix3::new(
        -sin,       ms * (e - cos), cos - e,
        0.0,        0.0,            0.0,
        cos + e,    -ms * sin,      sin,
    );
    Ok(g * scale)
}

/// Curl of a velocity-gradient tensor G_ij = ∂U_i/∂x_j.
pub fn curl(g: &Matrix3<f64>) -> Vec3 {
    Vec3::new(g[(2, 1)] - g[(1, 2)], g[(0, 2)] - g[(2, 0)], g[(1, 0)] - g[(0, 1)])
}

pub fn vorticity_vec(flow: &LeeWave, label: &LabelPoint, t: f64) -> Result<VorticityVec, KinematicsError> {
    let phase = flow.guarded_phase(label, t)?;
    let e = phase.attenuation();
    let d = phase.jacobian_det();
    let (sin, cos) = phase.theta.sin_cos();
    let w = flow.wave();
    let big_k = w.k * flow.site().f_at(label.s) * w.c * w.c / flow.forcing();
    Ok(VorticityVec::from_vector(Vec3::new(
        -big_k * e * sin / d,
        -2.0 * w.k * w.c * e * e / d,
        big_k * (e * cos - e * e) / d,
    )))
}

/// ∂|γ|/∂z. Positive wherever Ψ is.
pub fn dgamma_dz(flow: &LeeWave, label: &LabelPoint, t: f64) -> Result<f64, VorticityError> {
    let ms = flow.trough_slope(label.s);
    if ms == 0.0 {
        return Err(VorticityError::FlatTrough);
    }
    let gamma = vorticity_vec(flow, label, t)?;
    let phase = flow.guarded_phase(label, t)?;
    let e = phase.attenuation();
    let d = phase.jacobian_det();
    let (sin, cos) = phase.theta.sin_cos();
    let w = flow.wave();
    let big_k = w.k * w.c * ms;
    let bracket = (1.0 - e * cos) * psi_full(e, cos, coefficient_a(ms)) + e * e * sin * sin * d;
    let dot = big_k * big_k * w.k * e * e / d.powi(4) * bracket;
    Ok(dot / gamma.magnitude)
}

/// Velocity gradient by fourth-order Eulerian central differences: labels
/// of the neighbouring points come from the inverted flow map.
pub fn numeric_velocity_gradient(flow: &LeeWave, label: &LabelPoint, t: f64) -> Result<Matrix3<f64>, KinematicsError> {
    let p = flow.flow_map(label, t)?.to_vector();
    let mut g = Matrix3::zeros();
    for j in 0..3 {
        let h = fd::step(p[j], flow.length_scale());
        let col = fd::try_central4_vec(
            |d| {
                let mut x = p;
                x[j] += d;
                let l = flow.invert_flow_map(&PhysicalPoint::from_vector(x), t)?;
                Ok::<_, KinematicsError>(flow.velocity(&l, t))
            },
            h,
        )?;
        g.set_column(j, &col);
    }
    Ok(g)
}

pub fn numeric_vorticity(flow: &LeeWave, label: &LabelPoint, t: f64) -> Result<VorticityVec, KinematicsError> {
    Ok(VorticityVec::from_vector(curl(&numeric_velocity_gradient(
        flow, label, t,
    )?)))
}

/// ∂|γ|/∂z by a fourth-order vertical Eulerian central difference.
pub fn numeric_dgamma_dz(flow: &LeeWave, label: &LabelPoint, t: f64) -> Result<f64, KinematicsError> {
    let p = flow.flow_map(label, t)?;
    let h = fd::step(p.z, flow.length_scale());
    fd::try_central4(
        |d| {
            let l = flow.invert_flow_map(&PhysicalPoint::new(p.x, p.y, p.z + d), t)?;
            Ok(vorticity_vec(flow, &l, t)?.magnitude)
        },
        h,
    )
}

/// A = 3 + 8/m_s².
pub fn coefficient_a(ms: f64) -> f64 {
    3.0 + 8.0 / (ms * ms)
}

/// Ψ(X) = 1 + X(AX − X² − 3).
pub fn psi(x: f64, a: f64) -> f64 {
    1.0 + x * (a * x - x * x - 3.0)
}

/// Ψ′(X) = −3X² + 2AX − 3.
pub fn psi_prime(x: f64, a: f64) -> f64 {
    -3.0 * x * x + 2.0 * a * x - 3.0
}

/// Ψ(E, C) = 1 − 3EC + AE² − E³C.
pub fn psi_full(e: f64, cos: f64, a: f64) -> f64 {
    1.0 - 3.0 * e * cos + a * e * e - e * e * e * cos
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiAnalysis {
    pub m_s: f64,
    #[serde(rename = "A")]
    pub a: f64,
    /// Smaller positive root of Ψ′.
    #[serde(rename = "X1")]
    pub x1: f64,
    /// Ψ(X1).
    pub psi_min: f64,
}

pub fn psi_analysis(ms: f64) -> Result<PsiAnalysis, VorticityError> {
    if ms == 0.0 || !ms.is_finite() {
        return Err(VorticityError::FlatTrough);
    }
    let a = coefficient_a(ms);
    let x1 = 3.0 / (a + (a * a - 9.0).sqrt());
    Ok(PsiAnalysis {
        m_s: ms,
        a,
        x1,
        psi_min: psi(x1, a),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    #[serde(rename = "A")]
    pub a: f64,
    /// (2A³ + (18 − 2A²)√(A² − 9) − 27A)/27 + 1, extended precision.
    pub closed_form: f64,
    /// Ψ(3/(A + √(A² − 9))), extended precision.
    pub substituted: f64,
    /// Ψ(X1) in double precision.
    pub double: f64,
    pub relative_difference: f64,
}

/// Binary fixed point with `FRAC_BITS` fractional bits.
#[derive(Debug, Clone)]
struct Fixed(BigInt);

const FRAC_BITS: u32 = 320;

impl Fixed {
    fn from_f64(x: f64) -> Self {
        // exact: x·2^FRAC_BITS is an integer for every finite x ≳ 1e-90
        Self(BigInt::from_f64(x * 2f64.powi(FRAC_BITS as i32)).expect("finite"))
    }

    fn int(n: i64) -> Self {
        Self(BigInt::from(n) << FRAC_BITS)
    }

    fn add(&self, o: &Self) -> Self {
        Self(&self.0 + &o.0)
    }

    fn sub(&self, o: &Self) -> Self {
        Self(&self.0 - &o.0)
    }

    fn mul(&self, o: &Self) -> Self {
        Self((&self.0 * &o.0) >> FRAC_BITS)
    }

    fn div(&self, o: &Self) -> Self {
        Self((&self.0 << FRAC_BITS) / &o.0)
    }

    fn sqrt(&self) -> Self {
        Self((&self.0 << FRAC_BITS).sqrt())
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().expect("in range") / 2f64.powi(FRAC_BITS as i32)
    }
}

/// Evaluate Ψ(X1) both from the closed form and by substitution, in
/// fixed-point arithmetic with 320 fractional bits.
pub fn closed_form_check(analysis: &PsiAnalysis) -> ClosedFormCheck {
    let a = Fixed::from_f64(analysis.a);
    let n = Fixed::int;
    let a2 = a.mul(&a);
    let root = a2.sub(&n(9)).sqrt();
    let closed = n(2)
        .mul(&a2)
        .mul(&a)
        .add(&n(18).sub(&n(2).mul(&a2)).mul(&root))
        .sub(&n(27).mul(&a))
        .div(&n(27))
        .add(&n(1));
    let x = n(3).div(&a.add(&root));
    let substituted = n(1).add(&x.mul(&a.mul(&x).sub(&x.mul(&x)).sub(&n(3))));
    let (closed, substituted) = (closed.to_f64(), substituted.to_f64());
    ClosedFormCheck {
        a: analysis.a,
        closed_form: closed,
        substituted,
        double: analysis.psi_min,
        relative_difference: ((closed - substituted) / substituted).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure1Row {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "dPsi")]
    pub dpsi: f64,
    #[serde(rename = "Psi")]
    pub psi: f64,
}

/// Ψ′ and Ψ on `n` equispaced points of [x_lo, x_hi].
pub fn figure1_data(ms: f64, x_range: (f64, f64), n: usize) -> Result<Vec<Figure1Row>, VorticityError> {
    let (lo, hi) = x_range;
    if n < 2 {
        return Err(VorticityError::Range("at least two points"));
    }
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(VorticityError::Range("0 <= X_lo < X_hi"));
    }
    let a = psi_analysis(ms)?.a;
    Ok((0..n)
        .map(|i| {
            let x = lo + (hi - lo) * (i as f64 / (n - 1) as f64);
            Figure1Row {
                x,
                dpsi: psi_prime(x, a),
                psi: psi(x, a),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{equatorial_flow, reference_flow, sample_label, sample_nodes};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gradient_is_traceless_with_empty_middle_row() {
        let flow = reference_flow();
        for node in sample_nodes(&flow, 50, 1) {
            let g = velocity_gradient(&flow, &node.label, node.t).unwrap();
            assert!(g.trace().abs() <= 1e-15 * g.abs().max());
            assert_eq!(g.row(1).abs().max(), 0.0);
        }
    }

    #[test]
    fn gradient_matches_eulerian_differences() {
        let flow = reference_flow();
        for node in sample_nodes(&flow, 40, 2) {
            let g = velocity_gradient(&flow, &node.label, node.t).unwrap();
            let n = numeric_velocity_gradient(&flow, &node.label, node.t).unwrap();
            assert!((g - n).abs().max() < 1e-6 * g.abs().max(), "{g}\n{n}");
        }
    }

    #[test]
    fn vorticity_matches_numerical_curl() {
        let flow = reference_flow();
        for node in sample_nodes(&flow, 40, 3) {
            let v = vorticity_vec(&flow, &node.label, node.t).unwrap();
            let n = numeric_vorticity(&flow, &node.label, node.t).unwrap();
            assert!((v.to_vector() - n.to_vector()).norm() < 1e-6 * v.magnitude);
        }
    }

    #[test]
    fn equator_centre_line_is_pure_gerstner() {
        let flow = equatorial_flow();
        let w = flow.wave();
        let label = LabelPoint::new(1234.0, 0.0, -1.0 / w.k);
        for t in [0.0, 7.0, 33.3] {
            let v = vorticity_vec(&flow, &label, t).unwrap();
            let e2 = (2.0 * flow.vertical_phase(0.0, label.r)).exp();
            assert_eq!(v.gamma1, 0.0);
            assert_eq!(v.gamma3, 0.0);
            assert_eq!(
                v.gamma2,
                -2.0 * w.k * w.c * e2 / -(2.0 * flow.vertical_phase(0.0, label.r)).exp_m1()
            );
        }
    }

    #[test]
    fn deep_vorticity_vanishes() {
        let flow = crate::test_support::deep_flow();
        let w = flow.wave();
        let label = LabelPoint::new(0.0, 3000.0, flow.trough_m(3000.0) - 40.0 / w.k);
        let v = vorticity_vec(&flow, &label, 0.0).unwrap();
        assert!(v.magnitude < 1e-15 * w.k * w.c);
    }

    #[test]
    fn dgamma_dz_matches_differences_and_is_positive() {
        let flow = reference_flow();
        for node in sample_nodes(&flow, 60, 4) {
            let exact = dgamma_dz(&flow, &node.label, node.t).unwrap();
            let n = numeric_dgamma_dz(&flow, &node.label, node.t).unwrap();
            assert!(exact > 0.0);
            assert!(rel(n, exact) < 1e-6, "{exact:e} vs {n:e}");
        }
    }

    #[test]
    fn dgamma_dz_rejects_flat_trough() {
        let flow = equatorial_flow();
        let label = LabelPoint::new(0.0, 0.0, -300.0);
        assert_eq!(dgamma_dz(&flow, &label, 0.0), Err(VorticityError::FlatTrough));
    }

    #[test]
    fn psi_analysis_at_typical_slope() {
        let p = psi_analysis(3e-4).unwrap();
        assert!(rel(p.a, 88_888_891.888_888_9) < 1e-15);
        assert!((p.a / 1e7 * 100.0).round() == 889.0);
        assert!(psi_prime(p.x1, p.a).abs() < 1e-12);
        assert!(rel(p.x1, 1.687_499_943_046_877_4e-8) < 1e-14);
        assert!(p.psi_min > 0.0);
        assert!(rel(p.psi_min, 0.999_999_974_687_500_9) < 1e-15);
        assert_eq!(psi_analysis(0.0), Err(VorticityError::FlatTrough));
    }

    #[test]
    fn closed_form_minimum_agrees_in_extended_precision() {
        for ms in [3e-4, 1e-3, 0.05, 0.7] {
            let p = psi_analysis(ms).unwrap();
            let c = closed_form_check(&p);
            assert!(c.relative_difference < 1e-10, "{c:?}");
            assert!(rel(c.double, c.substituted) < 1e-14, "{c:?}");
        }
    }

    #[test]
    fn figure1_sign_pattern_brackets_x1() {
        let p = psi_analysis(3e-4).unwrap();
        let rows = figure1_data(3e-4, (0.0, 4.0 * p.x1), 401).unwrap();
        assert_eq!(rows[0].psi, 1.0);
        assert_eq!(rows[0].dpsi, -3.0);
        let changes: Vec<_> = rows
            .windows(2)
            .filter(|w| w[0].dpsi.signum() != w[1].dpsi.signum())
            .collect();
        assert_eq!(changes.len(), 1);
        assert!(changes[0][0].x <= p.x1 && p.x1 <= changes[0][1].x);
        for w in rows.windows(2).filter(|w| w[0].x >= p.x1) {
            assert!(w[1].psi > w[0].psi);
        }
        assert!(figure1_data(3e-4, (0.0, 1.0), 1).is_err());
        assert!(figure1_data(3e-4, (1.0, 1.0), 5).is_err());
    }

    proptest! {
        #[test]
        fn curl_of_tensor_is_vorticity(seed in 0u64..10_000) {
            let flow = reference_flow();
            let label = sample_label(&flow, seed);
            let t = (seed as f64) * 0.37;
            let v = vorticity_vec(&flow, &label, t).unwrap().to_vector();
            let c = curl(&velocity_gradient(&flow, &label, t).unwrap());
            prop_assert!((v - c).norm() <= 1e-13 * v.norm());
        }

        #[test]
        fn gamma2_is_latitude_independent(xi in -3.0f64..-0.05, lat in -1.5f64..1.5, q in 0.0f64..1e4) {
            let flow = crate::test_support::flow_at_latitude(lat);
            let w = flow.wave();
            let label = LabelPoint::new(q, 0.0, flow.trough_m(0.0) + xi / w.k);
            let g2 = vorticity_vec(&flow, &label, 0.0).unwrap().gamma2;
            let e2 = (2.0 * flow.vertical_phase(0.0, label.r)).exp();
            prop_assert!(rel(g2, -2.0 * w.k * w.c * e2 / (1.0 - e2)) < 1e-13);
        }

        #[test]
        fn full_psi_bounded_below(e in 0.0f64..1.0, theta in -3.2f64..3.2, ms in 1e-5f64..1.0) {
            let a = coefficient_a(ms);
            prop_assert!(psi_full(e, theta.cos(), a) >= psi(e, a) * (1.0 - 1e-15) - 1e-15);
        }

        #[test]
        fn growth_with_height(seed in 0u64..10_000) {
            let flow = reference_flow();
            let label = sample_label(&flow, seed);
            prop_assume!(flow.site().f_at(label.s) != 0.0);
            prop_assert!(dgamma_dz(&flow, &label, seed as f64).unwrap() > 0.0);
        }
    }
}
