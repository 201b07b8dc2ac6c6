//! Obstacle window maxima and the Gauss-point obstacle update.
//!
//! A full obstacle step transports the solution (SLDG or RKDG) and then
//! replaces its values at the `k + 1` Gauss nodes of every cell by
//! `max(value, g~)`, where `g~` is either the sliding window maximum
//! `g_dt(x) = max_{tau in [0, dt]} g(x - c tau)` or the two-point surrogate
//! `max(g(x), g(x - c dt))`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dg::{DgFunction, Mesh1D, ReferenceElement};
use crate::error::{Error, Result};
use crate::rkdg::RkdgSolver;
use crate::scalar::Real;
use crate::schedule::StepPlan;
use crate::sldg::sldg_step;

pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
/// `(x, width) -> max of g over [x - width, x]`.
pub type WindowFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Which obstacle values the Gauss-point update compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleVariant {
    /// The sliding window maximum `g_dt`.
    ExactWindow,
    /// `max(g(x), g(x - c dt))`.
    #[default]
    TwoPoint,
}

/// How `g_dt` is evaluated.
#[derive(Clone)]
pub enum WindowStrategy<T> {
    /// Closed form supplied with the obstacle.
    Analytic(WindowFn<T>),
    /// Uniform samples plus rounds of three-point parabolic refinement.
    Sampled { n_samples: usize, refine_iters: usize },
}

impl<T> fmt::Debug for WindowStrategy<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowStrategy::Analytic(_) => f.write_str("Analytic"),
            WindowStrategy::Sampled { n_samples, refine_iters } => f
                .debug_struct("Sampled")
                .field("n_samples", n_samples)
                .field("refine_iters", refine_iters)
                .finish(),
        }
    }
}

pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_REFINE_ITERS: usize = 2;

/// An obstacle `g` with its window strategy and update variant.
#[derive(Clone)]
pub struct ObstacleSpec<T> {
    g: ScalarFn<T>,
    window: WindowStrategy<T>,
    variant: ObstacleVariant,
}

impl<T> fmt::Debug for ObstacleSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObstacleSpec")
            .field("window", &self.window)
            .field("variant", &self.variant)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ObstacleSpec<T> {
    /// Obstacle with a sampled window maximum using the default resolution.
    pub fn sampled<G>(g: G) -> Self
    where
        G: Fn(T) -> T + Send + Sync + 'static,
    {
        Self {
            g: Arc::new(g),
            window: WindowStrategy::Sampled {
                n_samples: DEFAULT_SAMPLES,
                refine_iters: DEFAULT_REFINE_ITERS,
            },
            variant: ObstacleVariant::default(),
        }
    }

    /// Obstacle with a closed-form window maximum.
    pub fn analytic<G, W>(g: G, window: W) -> Self
    where
        G: Fn(T) -> T + Send + Sync + 'static,
        W: Fn(T, T) -> T + Send + Sync + 'static,
    {
        Self {
            g: Arc::new(g),
            window: WindowStrategy::Analytic(Arc::new(window)),
            variant: ObstacleVariant::default(),
        }
    }

    /// `g(x) = sin(pi x)` with its closed-form window maximum.
    pub fn sin_pi() -> Self {
        Self::analytic(|x: T| (T::PI() * x).sin(), sin_pi_window_max)
    }

    pub fn with_variant(mut self, variant: ObstacleVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_sampling(mut self, n_samples: usize, refine_iters: usize) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "window sampling needs at least 2 samples, got {n_samples}"
            )));
        }
        self.window = WindowStrategy::Sampled { n_samples, refine_iters };
        Ok(self)
    }

    pub fn variant(&self) -> ObstacleVariant {
        self.variant
    }

    pub fn window(&self) -> &WindowStrategy<T> {
        &self.window
    }

    #[inline]
    pub fn g(&self, x: T) -> T {
        (self.g)(x)
    }

    /// `max_{y in [x - width, x]} g(y)`.
    pub fn window_max(&self, x: T, width: T) -> T {
        if width <= T::zero() {
            return self.g(x);
        }
        match &self.window {
            WindowStrategy::Analytic(f) => f(x, width),
            WindowStrategy::Sampled { n_samples, refine_iters } => {
                sampled_window_max(&*self.g, x, width, *n_samples, *refine_iters)
            }
        }
    }

    /// `g~(x)` for a transport displacement `shift = c dt`.
    pub fn tilde(&self, x: T, shift: T) -> T {
        match self.variant {
            ObstacleVariant::ExactWindow => self.window_max(x, shift),
            ObstacleVariant::TwoPoint => self.g(x).max(self.g(x - shift)),
        }
    }
}

/// Free-function form of [`ObstacleSpec::window_max`].
pub fn g_window_max<T: Real>(spec: &ObstacleSpec<T>, x: T, width: T) -> T {
    spec.window_max(x, width)
}

/// Closed-form `max` of `sin(pi y)` over `y in [x - width, x]`.
pub fn sin_pi_window_max<T: Real>(x: T, width: T) -> T {
    let two = T::lit(2.0);
    if width >= two {
        return T::one();
    }
    // distance back from x to the nearest peak at 1/2 + 2m
    let mut d = (x - T::lit(0.5)) % two;
    if d < T::zero() {
        d += two;
    }
    if d <= width {
        return T::one();
    }
    let s = |y: T| (T::PI() * y).sin();
    s(x).max(s(x - width))
}

fn sampled_window_max<T: Real>(g: &(dyn Fn(T) -> T + Send + Sync), x: T, width: T, n: usize, iters: usize) -> T {
    let n = n.max(2);
    let lo = x - width;
    let mut step = width / T::from_usize_lossy(n);
    let mut best_y = x;
    let mut best = g(x);
    for i in 0..n {
        let y = lo + T::from_usize_lossy(i) * step;
        let v = g(y);
        if v > best {
            best = v;
            best_y = y;
        }
    }
    for _ in 0..iters {
        // Keep the three-point stencil inside the window.
        let center = if width > step + step {
            best_y.max(lo + step).min(x - step)
        } else {
            lo + width * T::lit(0.5)
        };
        let fc = g(center);
        let yl = (center - step).max(lo);
        let yr = (center + step).min(x);
        let (fl, fr) = (g(yl), g(yr));
        if fc > best {
            best = fc;
            best_y = center;
        }
        let vertex = parabola_vertex((yl, fl), (center, fc), (yr, fr)).map(|v| v.max(lo).min(x));
        let mut candidates = vec![(yl, fl), (yr, fr)];
        if let Some(v) = vertex {
            candidates.push((v, g(v)));
        }
        for (y, fy) in candidates {
            if fy > best {
                best = fy;
                best_y = y;
            }
        }
        step *= T::lit(0.25);
    }
    best
}

/// Abscissa of the extremum of the parabola through three points, if defined.
fn parabola_vertex<T: Real>(a: (T, T), b: (T, T), c: (T, T)) -> Option<T> {
    let (x0, f0) = a;
    let (x1, f1) = b;
    let (x2, f2) = c;
    let num = (x1 - x0).powi(2) * (f1 - f2) - (x1 - x2).powi(2) * (f1 - f0);
    let den = (x1 - x0) * (f1 - f2) - (x1 - x2) * (f1 - f0);
    if den == T::zero() || !den.is_finite() {
        return None;
    }
    let v = x1 - T::lit(0.5) * num / den;
    v.is_finite().then_some(v)
}

/// Row-major `N x (k + 1)` table of values at the cells' Gauss nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalTable<T> {
    n_cells: usize,
    n_nodes: usize,
    values: Vec<T>,
}

impl<T: Real> NodalTable<T> {
    pub fn new(n_cells: usize, n_nodes: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != n_cells * n_nodes {
            return Err(Error::ShapeMismatch {
                got: (values.len(), 1),
                expected: (n_cells, n_nodes),
            });
        }
        Ok(Self { n_cells, n_nodes, values })
    }

    pub fn filled(n_cells: usize, n_nodes: usize, value: T) -> Self {
        Self {
            n_cells,
            n_nodes,
            values: vec![value; n_cells * n_nodes],
        }
    }

    /// Tabulates `f` at every Gauss node of `mesh` for degree `k`.
    pub fn from_fn<F: Fn(T) -> T>(mesh: &Mesh1D<T>, k: usize, f: F) -> Result<Self> {
        let rule = crate::quadrature::gauss_legendre::<T>(k + 1)?;
        let values = (0..mesh.n_cells())
            .flat_map(|j| rule.points.iter().map(move |&xi| mesh.to_physical(j, xi)))
            .map(f)
            .collect();
        Self::new(mesh.n_cells(), k + 1, values)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_cells, self.n_nodes)
    }

    pub fn row(&self, j: usize) -> &[T] {
        &self.values[j * self.n_nodes..(j + 1) * self.n_nodes]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.values[j * self.n_nodes..(j + 1) * self.n_nodes]
    }

    pub fn get(&self, j: usize, node: usize) -> T {
        self.values[j * self.n_nodes + node]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// `g~` at every Gauss node for a step of length `dt` at velocity `c`.
pub fn tilde_g_values<T: Real>(spec: &ObstacleSpec<T>, mesh: &Mesh1D<T>, k: usize, c: T, dt: T) -> Result<NodalTable<T>> {
    crate::sldg::check_step(dt)?;
    let shift = c * dt;
    NodalTable::from_fn(mesh, k, |x| spec.tilde(x, shift))
}

/// Values of `v` at the Gauss nodes of every cell.
pub fn nodal_values<T: Real>(v: &DgFunction<T>) -> Result<NodalTable<T>> {
    let re = ReferenceElement::<T>::new(v.degree())?;
    let n = v.mesh().n_cells();
    let scale = v.mesh().basis_scale();
    let mut table = NodalTable::filled(n, v.n_modes(), T::zero());
    for j in 0..n {
        let row = table.row_mut(j);
        re.to_nodal(v.cell(j), row);
        row.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(table)
}

/// Degree-`k` interpolant of `max(v, gvals)` at each cell's Gauss nodes.
pub fn apply_obstacle<T: Real>(v: &DgFunction<T>, gvals: &NodalTable<T>) -> Result<DgFunction<T>> {
    let expected = (v.mesh().n_cells(), v.n_modes());
    if gvals.shape() != expected {
        return Err(Error::ShapeMismatch {
            got: gvals.shape(),
            expected,
        });
    }
    let re = ReferenceElement::<T>::new(v.degree())?;
    let scale = v.mesh().basis_scale();
    let np = v.n_modes();
    let mut out = DgFunction::zeros(*v.mesh(), v.degree());
    let mut nodal = vec![T::zero(); np];
    for j in 0..expected.0 {
        re.to_nodal(v.cell(j), &mut nodal);
        for (val, &g) in nodal.iter_mut().zip(gvals.row(j)) {
            *val = (*val * scale).max(g) / scale;
        }
        re.from_nodal(&nodal, out.cell_mut(j));
    }
    Ok(out)
}

/// Linear transport solver used inside an obstacle step.
#[derive(Debug, Clone)]
pub enum Transport<T> {
    Sldg { c: T },
    Rkdg(RkdgSolver<T>),
}

impl<T: Real> Transport<T> {
    pub fn velocity(&self) -> T {
        match self {
            Transport::Sldg { c } => *c,
            Transport::Rkdg(s) => s.velocity(),
        }
    }

    pub fn step(&self, v: &DgFunction<T>, dt: T) -> Result<DgFunction<T>> {
        match self {
            Transport::Sldg { c } => sldg_step(v, *c, dt),
            Transport::Rkdg(s) => s.step(v, dt),
        }
    }
}

/// Transport step followed by the Gauss-point obstacle update.
pub fn obstacle_step<T: Real>(
    u: &DgFunction<T>,
    transport: &Transport<T>,
    spec: &ObstacleSpec<T>,
    dt: T,
) -> Result<DgFunction<T>> {
    let moved = transport.step(u, dt)?;
    let gvals = tilde_g_values(spec, u.mesh(), u.degree(), transport.velocity(), dt)?;
    apply_obstacle(&moved, &gvals)
}

/// Runs a step plan with an optional obstacle.
///
/// `observe` is called after every step with the new solution and the
/// obstacle table used for it (if any).
pub fn run_plan<T, F>(
    u0: DgFunction<T>,
    transport: &Transport<T>,
    obstacle: Option<&ObstacleSpec<T>>,
    plan: &StepPlan<T>,
    mut observe: F,
) -> Result<DgFunction<T>>
where
    T: Real,
    F: FnMut(&DgFunction<T>, Option<&NodalTable<T>>),
{
    let mut u = u0;
    let mut cached: Option<(T, NodalTable<T>)> = None;
    for dt in plan.iter() {
        let moved = transport.step(&u, dt)?;
        u = match obstacle {
            None => {
                observe(&moved, None);
                moved
            }
            Some(spec) => {
                if cached.as_ref().is_none_or(|(d, _)| *d != dt) {
                    let table = tilde_g_values(spec, moved.mesh(), moved.degree(), transport.velocity(), dt)?;
                    cached = Some((dt, table));
                }
                let table = &cached.as_ref().expect("table cached above").1;
                let next = apply_obstacle(&moved, table)?;
                observe(&next, Some(table));
                next
            }
        };
    }
    Ok(u)
}
