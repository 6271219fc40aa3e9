//! Classical fourth-order Runge-Kutta step for linear-space states.

use std::ops::{Add, Mul};

pub(crate) fn rk4_step<S, F>(y: &S, h: f64, f: F) -> S
where
    S: Clone + Add<Output = S> + Mul<f64, Output = S>,
    F: Fn(&S) -> S,
{
    let k1 = f(y);
    let k2 = f(&(y.clone() + k1.clone() * (0.5 * h)));
    let k3 = f(&(y.clone() + k2.clone() * (0.5 * h)));
    let k4 = f(&(y.clone() + k3.clone() * h));
    y.clone() + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}
