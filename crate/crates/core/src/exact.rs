//! Exact solutions of the obstacle transport equation.
//!
//! For `min(u_t + c u_x, u - g) = 0` with `u0 >= g` the viscosity solution is
//! `u(t, x) = max(u0(x - c t), max_{tau in [0, t]} g(x - c tau))`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::obstacle::{ObstacleSpec, ScalarFn};
use crate::scalar::{wrap_periodic, Real};

/// Slack allowed when checking `u0 >= g` on the sampling grid.
pub const COMPATIBILITY_SLACK: f64 = 1e-10;
const COMPATIBILITY_SAMPLES: usize = 10_000;

/// Value-function oracle for periodic data on `[a, b)`.
#[derive(Clone)]
pub struct DppOracle<T> {
    u0: ScalarFn<T>,
    obstacle: Option<ObstacleSpec<T>>,
    c: T,
    a: T,
    len: T,
}

impl<T: Real> DppOracle<T> {
    /// Builds the oracle, rejecting initial data that dips below the obstacle.
    pub fn new<F>(u0: F, obstacle: Option<ObstacleSpec<T>>, c: T, domain: (T, T)) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        crate::sldg::check_velocity(c)?;
        let (a, b) = domain;
        if !(b > a) {
            return Err(Error::InvalidMesh(format!("empty domain [{a}, {b}]")));
        }
        let len = b - a;
        if let Some(spec) = &obstacle {
            for i in 0..=COMPATIBILITY_SAMPLES {
                let x = a + len * T::from_usize_lossy(i) / T::from_usize_lossy(COMPATIBILITY_SAMPLES);
                let (u, g) = (u0(x), spec.g(x));
                if u < g - T::lit(COMPATIBILITY_SLACK) {
                    return Err(Error::Incompatible {
                        x: x.as_f64(),
                        u0: u.as_f64(),
                        g: g.as_f64(),
                    });
                }
            }
        }
        Ok(Self {
            u0: Arc::new(u0),
            obstacle,
            c,
            a,
            len,
        })
    }

    pub fn velocity(&self) -> T {
        self.c
    }

    pub fn obstacle(&self) -> Option<&ObstacleSpec<T>> {
        self.obstacle.as_ref()
    }

    /// Initial data at `x` (wrapped into the domain).
    pub fn initial(&self, x: T) -> T {
        (self.u0)(wrap_periodic(x, self.a, self.len))
    }

    /// `u(t, x)`.
    pub fn value(&self, t: T, x: T) -> T {
        let transported = self.initial(x - self.c * t);
        match &self.obstacle {
            None => transported,
            Some(spec) => {
                let x = wrap_periodic(x, self.a, self.len);
                transported.max(spec.window_max(x, self.c * t))
            }
        }
    }
}

/// One-shot form of [`DppOracle::value`] on the domain `[a, b)`.
pub fn dpp_exact<T, F>(u0: F, spec: &ObstacleSpec<T>, c: T, t: T, x: T, domain: (T, T)) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T + Send + Sync + 'static,
{
    if t < T::zero() {
        return Err(Error::TimeOutOfRange(t.as_f64()));
    }
    Ok(DppOracle::new(u0, Some(spec.clone()), c, domain)?.value(t, x))
}

/// `u0(x) = 0.5 + sin(pi x)` on `[-1, 1]`.
pub fn example1_initial<T: Real>(x: T) -> T {
    T::lit(0.5) + (T::PI() * x).sin()
}

/// Closed-form solution on `[-1, 1]` with `c = 1`, `g = sin(pi x)` and
/// `u0 = 0.5 + g`, valid for `0 <= t <= 1`.
///
/// The plateau `u = 1` appears once the window `[x - t, x]` straddles the
/// peak of `g` at `x = 1/2` without the transported data dominating. For
/// `t > 5/6` the plateau re-enters through the periodic boundary on
/// `[-1, t - 11/6]`.
pub fn example1_exact<T: Real>(t: T, x: T) -> Result<T> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::TimeOutOfRange(t.as_f64()));
    }
    let (lo, len) = (-T::one(), T::lit(2.0));
    let x = wrap_periodic(x, lo, len);
    let transported = example1_initial(wrap_periodic(x - t, lo, len));
    let obstacle = (T::PI() * x).sin();
    let base = transported.max(obstacle);
    let third = T::one() / T::lit(3.0);
    let half = T::lit(0.5);
    if t < third {
        return Ok(base);
    }
    let in_right = x >= half && x <= T::one();
    let in_wrapped = t > third + half && x >= -T::one() && x <= t - third - half - T::one();
    Ok(if in_right || in_wrapped { base.max(T::one()) } else { base })
}

/// Two-dimensional data depending on `x + y` only: `u(t, x, y) = u1(t, x + y)`.
pub fn example2_exact<T: Real>(t: T, x: T, y: T) -> Result<T> {
    example1_exact(t, wrap_periodic(x + y, -T::one(), T::lit(2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn example1_oracle() -> DppOracle<f64> {
        DppOracle::new(example1_initial, Some(ObstacleSpec::sin_pi()), 1.0, (-1.0, 1.0)).unwrap()
    }

    #[test]
    fn printed_examples() {
        let v = example1_exact(0.5_f64, 0.75).unwrap();
        assert!((v - (0.5 + 0.5f64.sqrt())).abs() < 1e-12);
        assert!((v - 1.207_106_781_2).abs() < 1e-10);
        assert!((example1_exact(1.0_f64, -0.5).unwrap() - 1.5).abs() < 1e-12);
        assert!(example1_exact(0.2_f64, 0.0).unwrap().abs() < 1e-15);
        assert!(example1_exact(1.1_f64, 0.0).is_err());
        assert!(example1_exact(-0.1_f64, 0.0).is_err());
    }

    #[test]
    fn example2_reduces_to_example1() {
        let a = example2_exact(0.5_f64, 0.375, 0.375).unwrap();
        assert_eq!(a, example1_exact(0.5, 0.75).unwrap());
        for &(x, y) in &[(0.1, -0.7), (0.9, 0.8), (-0.95, -0.6)] {
            assert_eq!(example2_exact(0.7, x, y).unwrap(), example2_exact(0.7, y, x).unwrap());
            let t0 = example2_exact(0.0, x, y).unwrap();
            assert!((t0 - (0.5 + (PI * (x + y)).sin())).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_matches_closed_form() {
        let oracle = example1_oracle();
        assert!((oracle.value(0.5, 0.75) - example1_exact(0.5, 0.75).unwrap()).abs() < 1e-10);
        for i in 0..=100 {
            for j in 0..=100 {
                let t = i as f64 / 100.0;
                let x = -1.0 + 2.0 * j as f64 / 100.0;
                let d = (oracle.value(t, x) - example1_exact(t, x).unwrap()).abs();
                assert!(d < 1e-10, "t={t} x={x} d={d}");
            }
        }
    }

    #[test]
    fn oracle_limits() {
        let oracle = example1_oracle();
        for &x in &[-0.8, 0.1, 0.6] {
            assert!((oracle.value(0.0, x) - example1_initial(x)).abs() < 1e-15);
        }
        let low = ObstacleSpec::analytic(|_| -10.0, |_, _| -10.0);
        let free = DppOracle::new(example1_initial, Some(low), 1.0, (-1.0, 1.0)).unwrap();
        assert!((free.value(0.3, 0.2) - example1_initial(-0.1_f64)).abs() < 1e-15);
        let bad = DppOracle::new(|x: f64| (PI * x).sin() - 0.1, Some(ObstacleSpec::sin_pi()), 1.0, (-1.0, 1.0));
        assert!(matches!(bad, Err(Error::Incompatible { .. })));
        let one_shot = dpp_exact(example1_initial, &ObstacleSpec::sin_pi(), 1.0, 0.5, 0.75, (-1.0, 1.0)).unwrap();
        assert!((one_shot - example1_exact(0.5_f64, 0.75).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn stays_above_obstacle() {
        let oracle = example1_oracle();
        for i in 0..50 {
            let t = i as f64 / 49.0;
            for j in 0..1000 {
                let x = -1.0 + 2.0 * j as f64 / 1000.0;
                assert!(oracle.value(t, x) >= (PI * x).sin() - 1e-15);
            }
        }
    }
}
