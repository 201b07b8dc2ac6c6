//! Time-step schedules.
//!
//! Every schedule resolves to a nominal step `dt` on a given mesh; the final
//! step is shortened so the steps sum to the final time exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Slack when counting how many nominal steps fit into `[0, T]`, so that
/// `T / dt` landing a rounding error above an integer does not add a sliver step.
const STEP_COUNT_SLACK: f64 = 1e-9;

/// How the time step is chosen for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeSchedule {
    /// A fixed step independent of the mesh.
    FixedDt { dt: f64 },
    /// `dt = frac * h`.
    DtEqFracH { frac: f64 },
    /// `dt = c * h^p`.
    DtEqCHPow { c: f64, p: f64 },
    /// A fixed number of equal steps over `[0, T]`.
    StepCount { steps: usize },
    /// A named step-count rule.
    StepCountRule { rule: StepRule },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `10 (N / 10)^(3/5)` steps over the run, i.e. `dt ~ h^(3/5)`.
    PaperTable3,
}

impl StepRule {
    /// Nominal (possibly fractional) number of steps on `n_cells` cells.
    pub fn nominal_steps(self, n_cells: usize) -> f64 {
        match self {
            StepRule::PaperTable3 => 10.0 * (n_cells as f64 / 10.0).powf(0.6),
        }
    }
}

impl TimeSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidSchedule(what.to_string()));
        match *self {
            TimeSchedule::FixedDt { dt } if !(dt > 0.0 && dt.is_finite()) => bad("dt must be positive"),
            TimeSchedule::DtEqFracH { frac } if !(frac > 0.0 && frac.is_finite()) => bad("frac must be positive"),
            TimeSchedule::DtEqCHPow { c, p } if !(c > 0.0 && p > 0.0 && c.is_finite() && p.is_finite()) => {
                bad("c and p must be positive")
            }
            TimeSchedule::StepCount { steps: 0 } => bad("steps must be positive"),
            _ => Ok(()),
        }
    }

    /// Nominal step for mesh width `h`, `n_cells` cells and final time `t_final`.
    pub fn nominal_dt(&self, h: f64, n_cells: usize, t_final: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            TimeSchedule::FixedDt { dt } => dt,
            TimeSchedule::DtEqFracH { frac } => frac * h,
            TimeSchedule::DtEqCHPow { c, p } => c * h.powf(p),
            TimeSchedule::StepCount { steps } => t_final / steps as f64,
            TimeSchedule::StepCountRule { rule } => t_final / rule.nominal_steps(n_cells),
        })
    }

    /// Resolves into a concrete step plan.
    pub fn plan<T: Real>(&self, h: T, n_cells: usize, t_final: T) -> Result<StepPlan<T>> {
        let t = t_final.as_f64();
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidSchedule(format!("final time {t} must be non-negative")));
        }
        let dt = self.nominal_dt(h.as_f64(), n_cells, t)?;
        StepPlan::new(T::lit(dt), t_final)
    }
}

/// Concrete sequence of steps: `steps - 1` nominal steps and one final step
/// of length `last_dt <= dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan<T> {
    pub dt: T,
    pub steps: usize,
    pub last_dt: T,
    pub t_final: T,
}

impl<T: Real> StepPlan<T> {
    pub fn new(dt: T, t_final: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::NonPositiveStep(dt.as_f64()));
        }
        if t_final == T::zero() {
            return Ok(Self {
                dt,
                steps: 0,
                last_dt: T::zero(),
                t_final,
            });
        }
        let ratio = (t_final / dt).as_f64();
        let steps = ((ratio - STEP_COUNT_SLACK * ratio.max(1.0)).ceil() as usize).max(1);
        let last_dt = t_final - dt * T::from_usize_lossy(steps - 1);
        Ok(Self {
            dt,
            steps,
            last_dt,
            t_final,
        })
    }

    /// Time levels strictly between `0` and `T`.
    pub fn interior_levels(&self) -> usize {
        self.steps.saturating_sub(1)
    }

    /// Step lengths in order.
    pub fn iter(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.steps).map(move |i| if i + 1 == self.steps { self.last_dt } else { self.dt })
    }
}
