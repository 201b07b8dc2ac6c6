//! Single runs and convergence studies on concrete problems.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dg::{DgFunction, Mesh1D};
use crate::error::{Error, Result};
use crate::exact::{example1_exact, example1_initial, example2_exact};
use crate::metrics::{grid_error, ErrorNorms, ErrorReport, DEFAULT_SAMPLES_PER_CELL};
use crate::obstacle::{run_plan, ObstacleSpec, ObstacleVariant, ScalarFn, Transport};
use crate::projection::{default_quad_points, l2_project};
use crate::rkdg::{CflPolicy, RkdgSolver, DEFAULT_CFL};
use crate::schedule::{StepPlan, TimeSchedule};
use crate::solver2d::{grid_error_2d, l2_project_2d, run_plan_2d, DgFunction2D, Mesh2D, Obstacle2D, Rkdg2D, DEFAULT_SUBGRID};

/// Exact solution `u(t, x)`.
pub type Exact1D = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Exact solution `u(t, x, y)`.
pub type Exact2D = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Sldg,
    Rkdg,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Sldg => "sldg",
            Scheme::Rkdg => "rkdg",
        }
    }
}

/// Data of a periodic 1-D problem.
#[derive(Clone)]
pub struct Problem1D {
    pub domain: (f64, f64),
    pub c: f64,
    pub initial: ScalarFn<f64>,
    pub obstacle: Option<ObstacleSpec<f64>>,
    pub exact: Option<Exact1D>,
}

impl Problem1D {
    /// `g = sin(pi x)`, `u0 = 0.5 + g`, `c = 1` on `[-1, 1]`.
    pub fn example1(obstacle: ObstacleSpec<f64>) -> Self {
        Self {
            domain: (-1.0, 1.0),
            c: 1.0,
            initial: Arc::new(example1_initial),
            obstacle: Some(obstacle),
            exact: Some(Arc::new(|t, x| example1_exact(t, x).expect("time checked by the study"))),
        }
    }

    /// Plain advection of `sin(pi x)` on `[-1, 1]`.
    pub fn sine_advection(c: f64) -> Self {
        use std::f64::consts::PI;
        Self {
            domain: (-1.0, 1.0),
            c,
            initial: Arc::new(|x| (PI * x).sin()),
            obstacle: None,
            exact: Some(Arc::new(move |t, x| (PI * (x - c * t)).sin())),
        }
    }
}

/// Scheme, discretization and schedule for a 1-D study.
#[derive(Clone)]
pub struct Study1D {
    pub problem: Problem1D,
    pub scheme: Scheme,
    pub degree: usize,
    pub t_final: f64,
    pub schedule: TimeSchedule,
    pub samples_per_cell: usize,
    pub cfl_policy: CflPolicy,
}

/// Result of one run.
#[derive(Debug, Clone)]
pub struct RunOutcome<F> {
    pub solution: F,
    pub plan: StepPlan<f64>,
    pub errors: Option<ErrorNorms<f64>>,
}

impl Study1D {
    pub fn new(problem: Problem1D, scheme: Scheme, t_final: f64, schedule: TimeSchedule) -> Self {
        Self {
            problem,
            scheme,
            degree: 2,
            t_final,
            schedule,
            samples_per_cell: DEFAULT_SAMPLES_PER_CELL,
            cfl_policy: CflPolicy::Warn,
        }
    }

    pub fn transport(&self) -> Result<Transport<f64>> {
        Ok(match self.scheme {
            Scheme::Sldg => Transport::Sldg { c: self.problem.c },
            Scheme::Rkdg => {
                Transport::Rkdg(RkdgSolver::new(self.problem.c, self.degree)?.with_cfl(DEFAULT_CFL, self.cfl_policy))
            }
        })
    }

    pub fn plan(&self, n: usize) -> Result<StepPlan<f64>> {
        let (a, b) = self.problem.domain;
        self.schedule.plan((b - a) / n as f64, n, self.t_final)
    }

    /// Runs on `n` cells; `observe` sees every step.
    pub fn run_with<O>(&self, n: usize, observe: O) -> Result<RunOutcome<DgFunction<f64>>>
    where
        O: FnMut(&DgFunction<f64>, Option<&crate::obstacle::NodalTable<f64>>),
    {
        let (a, b) = self.problem.domain;
        let mesh = Mesh1D::new(a, b, n)?;
        let plan = self.plan(n)?;
        let initial = &self.problem.initial;
        let u0 = l2_project(|x| initial(x), &mesh, self.degree, default_quad_points(self.degree))?;
        let u = run_plan(u0, &self.transport()?, self.problem.obstacle.as_ref(), &plan, observe)?;
        let errors = match &self.problem.exact {
            Some(exact) => Some(grid_error(&u, |x| exact(self.t_final, x), self.samples_per_cell)?),
            None => None,
        };
        Ok(RunOutcome {
            solution: u,
            plan,
            errors,
        })
    }

    pub fn run(&self, n: usize) -> Result<RunOutcome<DgFunction<f64>>> {
        self.run_with(n, |_, _| {})
    }

    /// One row per grid, computed in parallel and reported in input order.
    pub fn convergence(&self, grids: &[usize]) -> Result<ErrorReport> {
        check_grids(grids)?;
        if self.problem.exact.is_none() {
            return Err(Error::InvalidArgument("convergence study needs an exact solution".into()));
        }
        let (a, b) = self.problem.domain;
        let rows = grids
            .par_iter()
            .map(|&n| {
                let out = self.run(n)?;
                let e = out.errors.expect("exact solution present");
                Ok((n, (b - a) / n as f64, out.plan.interior_levels(), e))
            })
            .collect::<Result<Vec<_>>>()?;
        ErrorReport::new(rows)
    }
}

/// Data of a periodic 2-D problem.
#[derive(Clone)]
pub struct Problem2D {
    pub domain: ((f64, f64), (f64, f64)),
    pub c: (f64, f64),
    pub initial: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub obstacle: Option<Obstacle2D<f64>>,
    pub exact: Option<Exact2D>,
}

impl Problem2D {
    /// `g = sin(pi (x + y))`, `u0 = 0.5 + g`, `c1 = c2 = 1/2` on `[-1, 1]^2`.
    pub fn example2() -> Self {
        use std::f64::consts::PI;
        Self {
            domain: ((-1.0, 1.0), (-1.0, 1.0)),
            c: (0.5, 0.5),
            initial: Arc::new(|x, y| 0.5 + (PI * (x + y)).sin()),
            obstacle: Some(Obstacle2D::sin_pi_diagonal()),
            exact: Some(Arc::new(|t, x, y| example2_exact(t, x, y).expect("time checked by the study"))),
        }
    }
}

/// A 2-D RKDG study. Without a schedule the step is
/// `0.2 min(hx, hy) / (c1 + c2)`.
#[derive(Clone)]
pub struct Study2D {
    pub problem: Problem2D,
    pub degree: usize,
    pub t_final: f64,
    pub schedule: Option<TimeSchedule>,
    pub subgrid: usize,
    pub cfl_policy: CflPolicy,
}

impl Study2D {
    pub fn new(problem: Problem2D, t_final: f64) -> Self {
        Self {
            problem,
            degree: 2,
            t_final,
            schedule: None,
            subgrid: DEFAULT_SUBGRID,
            cfl_policy: CflPolicy::Warn,
        }
    }

    pub fn solver(&self) -> Result<Rkdg2D<f64>> {
        let (c1, c2) = self.problem.c;
        Ok(Rkdg2D::new(c1, c2, self.degree)?.with_cfl(DEFAULT_CFL, self.cfl_policy))
    }

    pub fn mesh(&self, nx: usize, ny: usize) -> Result<Mesh2D<f64>> {
        let (x, y) = self.problem.domain;
        Mesh2D::new(x, y, nx, ny)
    }

    pub fn plan(&self, nx: usize, ny: usize) -> Result<StepPlan<f64>> {
        let mesh = self.mesh(nx, ny)?;
        match &self.schedule {
            Some(s) => s.plan(mesh.min_h(), nx.max(ny), self.t_final),
            None => StepPlan::new(self.solver()?.max_dt(&mesh), self.t_final),
        }
    }

    pub fn run(&self, nx: usize, ny: usize) -> Result<RunOutcome<DgFunction2D<f64>>> {
        let mesh = self.mesh(nx, ny)?;
        let plan = self.plan(nx, ny)?;
        let initial = &self.problem.initial;
        let u0 = l2_project_2d(|x, y| initial(x, y), &mesh, self.degree, default_quad_points(self.degree))?;
        let u = run_plan_2d(u0, &self.solver()?, self.problem.obstacle.as_ref(), &plan, |_, _| {})?;
        let errors = match &self.problem.exact {
            Some(exact) => Some(grid_error_2d(&u, |x, y| exact(self.t_final, x, y), self.subgrid)?),
            None => None,
        };
        Ok(RunOutcome {
            solution: u,
            plan,
            errors,
        })
    }

    /// Square grids `n x n`; `h` in the report is `min(hx, hy)`.
    pub fn convergence(&self, grids: &[usize]) -> Result<ErrorReport> {
        check_grids(grids)?;
        if self.problem.exact.is_none() {
            return Err(Error::InvalidArgument("convergence study needs an exact solution".into()));
        }
        let rows = grids
            .par_iter()
            .map(|&n| {
                let out = self.run(n, n)?;
                let h = out.solution.mesh().min_h();
                Ok((n, h, out.plan.interior_levels(), out.errors.expect("exact solution present")))
            })
            .collect::<Result<Vec<_>>>()?;
        ErrorReport::new(rows)
    }
}

fn check_grids(grids: &[usize]) -> Result<()> {
    if grids.is_empty() {
        return Err(Error::InvalidArgument("grid list is empty".into()));
    }
    if grids.windows(2).any(|w| w[0] >= w[1]) || grids[0] == 0 {
        return Err(Error::InvalidArgument(format!("grid list {grids:?} must be positive and strictly ascending")));
    }
    Ok(())
}

/// Example 1 with the sine obstacle and the given `g~` variant.
pub fn example1_study(scheme: Scheme, schedule: TimeSchedule, variant: ObstacleVariant) -> Study1D {
    Study1D::new(
        Problem1D::example1(ObstacleSpec::sin_pi().with_variant(variant)),
        scheme,
        0.5,
        schedule,
    )
}
