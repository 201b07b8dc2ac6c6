//! Semi-Lagrangian DG transport for `v_t + c v_x = 0`.

use crate::dg::{DgFunction, Mesh1D};
use crate::error::{Error, Result};
use crate::projection::{default_quad_points, l2_project, l2_project_shifted};
use crate::scalar::Real;
use crate::schedule::StepPlan;

pub(crate) fn check_velocity<T: Real>(c: T) -> Result<()> {
    if c > T::zero() && c.is_finite() {
        Ok(())
    } else {
        Err(Error::VelocitySign(c.as_f64()))
    }
}

pub(crate) fn check_step<T: Real>(dt: T) -> Result<()> {
    if dt > T::zero() && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveStep(dt.as_f64()))
    }
}

/// One step `v <- Pi_h(v(. - c dt))`. Unconditionally stable.
pub fn sldg_step<T: Real>(v: &DgFunction<T>, c: T, dt: T) -> Result<DgFunction<T>> {
    check_velocity(c)?;
    check_step(dt)?;
    let next = l2_project_shifted(v, c * dt)?;
    debug_assert!(
        next.l2_norm() <= v.l2_norm() * (T::one() + T::lit(1e3) * T::epsilon()) + T::epsilon(),
        "shifted projection grew the L2 norm"
    );
    Ok(next)
}

/// Projects `v0` and advances it to `plan.t_final`.
pub fn sldg_advect<T, F>(v0: F, mesh: &Mesh1D<T>, degree: usize, c: T, plan: &StepPlan<T>) -> Result<DgFunction<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    check_velocity(c)?;
    let mut v = l2_project(v0, mesh, degree, default_quad_points(degree))?;
    for dt in plan.iter() {
        v = sldg_step(&v, c, dt)?;
    }
    Ok(v)
}
