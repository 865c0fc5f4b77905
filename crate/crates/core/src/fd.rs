//! Central differences of second and fourth order.

use crate::kinematics::Vec3;

/// Step for a central difference at coordinate `x`: ε^{1/3}·max(scale, |x|),
/// rounded so that `x + h` is exactly representable.
pub fn step(x: f64, scale: f64) -> f64 {
    let h = f64::EPSILON.cbrt() * x.abs().max(scale);
    (x + h) - x
}

/// (f(h) − f(−h)) / 2h, where `f` receives the offset from the base point.
pub fn central(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

pub fn try_central<E>(f: impl Fn(f64) -> Result<f64, E>, h: f64) -> Result<f64, E> {
    Ok((f(h)? - f(-h)?) / (2.0 * h))
}

pub fn central_vec(f: impl Fn(f64) -> Vec3, h: f64) -> Vec3 {
    (f(h) - f(-h)) / (2.0 * h)
}

pub fn try_central_vec<E>(f: impl Fn(f64) -> Result<Vec3, E>, h: f64) -> Result<Vec3, E> {
    Ok((f(h)? - f(-h)?) / (2.0 * h))
}

/// Five-point stencil (−f(2h) + 8f(h) − 8f(−h) + f(−2h)) / 12h.
pub fn central4(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
}

pub fn try_central4<E>(f: impl Fn(f64) -> Result<f64, E>, h: f64) -> Result<f64, E> {
    Ok((8.0 * (f(h)? - f(-h)?) - (f(2.0 * h)? - f(-2.0 * h)?)) / (12.0 * h))
}

pub fn try_central4_vec<E>(f: impl Fn(f64) -> Result<Vec3, E>, h: f64) -> Result<Vec3, E> {
    Ok(((f(h)? - f(-h)?) * 8.0 - (f(2.0 * h)? - f(-2.0 * h)?)) / (12.0 * h))
}
