//! Tensor-product `Q^k` RKDG for `u_t + c1 u_x + c2 u_y = 0` on a periodic
//! rectangle, with the Gauss-point obstacle step.

use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::dg::{Mesh1D, ReferenceElement};
use crate::error::{Error, Result};
use crate::metrics::{ErrorNorms, NormAccumulator};
use crate::quadrature::{gauss_legendre, legendre_derivative, legendre_values_into};
use crate::rkdg::{CflPolicy, DEFAULT_CFL};
use crate::scalar::Real;
use crate::schedule::StepPlan;
use crate::sldg::{check_step, check_velocity};

/// Default sub-grid size per cell for 2-D error sampling.
pub const DEFAULT_SUBGRID: usize = 10;

/// Largest polynomial degree handled by [`Rkdg2D`].
pub const MAX_DEGREE_2D: usize = 7;

/// Uniform periodic Cartesian mesh, the product of two 1-D meshes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh2D<T> {
    pub x: Mesh1D<T>,
    pub y: Mesh1D<T>,
}

impl<T: Real> Mesh2D<T> {
    pub fn new(x: (T, T), y: (T, T), nx: usize, ny: usize) -> Result<Self> {
        Ok(Self {
            x: Mesh1D::new(x.0, x.1, nx)?,
            y: Mesh1D::new(y.0, y.1, ny)?,
        })
    }

    /// `[-1, 1]^2` with `n x n` cells.
    pub fn square(n: usize) -> Result<Self> {
        Self::new((-T::one(), T::one()), (-T::one(), T::one()), n, n)
    }

    pub fn nx(&self) -> usize {
        self.x.n_cells()
    }

    pub fn ny(&self) -> usize {
        self.y.n_cells()
    }

    pub fn n_cells(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn min_h(&self) -> T {
        self.x.h().min(self.y.h())
    }

    pub fn area(&self) -> T {
        self.x.length() * self.y.length()
    }

    /// `2 / sqrt(hx hy)`.
    pub fn basis_scale(&self) -> T {
        self.x.basis_scale() * self.y.basis_scale()
    }

    /// Flat index of cell `(i, j)`, `i` along x.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }
}

/// Piecewise `Q^k` function. Mode `(p, q)` of a cell is stored at
/// `p * (k + 1) + q`, `p` being the x-degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DgFunction2D<T> {
    mesh: Mesh2D<T>,
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Real> DgFunction2D<T> {
    pub fn zeros(mesh: Mesh2D<T>, degree: usize) -> Self {
        let n = mesh.n_cells() * (degree + 1) * (degree + 1);
        Self {
            mesh,
            degree,
            coeffs: vec![T::zero(); n],
        }
    }

    pub fn from_coeffs(mesh: Mesh2D<T>, degree: usize, coeffs: Vec<T>) -> Result<Self> {
        let per = (degree + 1) * (degree + 1);
        if coeffs.len() != mesh.n_cells() * per {
            return Err(Error::ShapeMismatch {
                got: (coeffs.len() / per.max(1), coeffs.len() % per.max(1)),
                expected: (mesh.n_cells(), per),
            });
        }
        Ok(Self { mesh, degree, coeffs })
    }

    pub fn constant(mesh: Mesh2D<T>, degree: usize, value: T) -> Self {
        let mut f = Self::zeros(mesh, degree);
        // phi_0 phi_0 = 1/2 on the reference square
        let c0 = value * T::lit(2.0) / mesh.basis_scale();
        let per = f.modes_per_cell();
        for cell in f.coeffs.chunks_mut(per) {
            cell[0] = c0;
        }
        f
    }

    pub fn mesh(&self) -> &Mesh2D<T> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modes_per_cell(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn cell(&self, i: usize, j: usize) -> &[T] {
        let per = self.modes_per_cell();
        let c = self.mesh.index(i, j);
        &self.coeffs[c * per..(c + 1) * per]
    }

    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut [T] {
        let per = self.modes_per_cell();
        let c = self.mesh.index(i, j);
        &mut self.coeffs[c * per..(c + 1) * per]
    }

    pub fn same_space(&self, other: &Self) -> bool {
        self.mesh == other.mesh && self.degree == other.degree
    }

    /// Value at reference coordinates `(xi, eta)` of cell `(i, j)`.
    pub fn eval_local(&self, i: usize, j: usize, xi: T, eta: T) -> T {
        let np = self.degree + 1;
        let mut bx = [T::zero(); 8];
        let mut by = [T::zero(); 8];
        let (bx, by) = if np <= 8 {
            (&mut bx[..np], &mut by[..np])
        } else {
            return self.eval_local_slow(i, j, xi, eta);
        };
        legendre_values_into(xi, bx);
        legendre_values_into(eta, by);
        self.mesh.basis_scale() * contract(self.cell(i, j), bx, by)
    }

    fn eval_local_slow(&self, i: usize, j: usize, xi: T, eta: T) -> T {
        let np = self.degree + 1;
        let mut bx = vec![T::zero(); np];
        let mut by = vec![T::zero(); np];
        legendre_values_into(xi, &mut bx);
        legendre_values_into(eta, &mut by);
        self.mesh.basis_scale() * contract(self.cell(i, j), &bx, &by)
    }

    /// Physical gradient at reference coordinates of cell `(i, j)`.
    pub fn grad_local(&self, i: usize, j: usize, xi: T, eta: T) -> (T, T) {
        let np = self.degree + 1;
        let mut bx = vec![T::zero(); np];
        let mut by = vec![T::zero(); np];
        legendre_values_into(xi, &mut bx);
        legendre_values_into(eta, &mut by);
        let dx: Vec<T> = (0..np).map(|p| legendre_derivative(p, xi)).collect();
        let dy: Vec<T> = (0..np).map(|q| legendre_derivative(q, eta)).collect();
        let cell = self.cell(i, j);
        let s = self.mesh.basis_scale();
        let two = T::lit(2.0);
        (
            s * two / self.mesh.x.h() * contract(cell, &dx, &by),
            s * two / self.mesh.y.h() * contract(cell, &bx, &dy),
        )
    }

    /// Value at a physical point (wrapped periodically).
    pub fn eval(&self, x: T, y: T) -> T {
        let (i, xi) = self.mesh.x.locate(x);
        let (j, eta) = self.mesh.y.locate(y);
        self.eval_local(i, j, xi, eta)
    }

    pub fn l2_norm(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    pub fn integral(&self) -> T {
        let per = self.modes_per_cell();
        let s: T = self.coeffs.chunks(per).map(|c| c[0]).sum();
        s * T::lit(2.0) / self.mesh.basis_scale()
    }

    /// `self = alpha * self + beta * other`.
    pub fn axpby(&mut self, alpha: T, beta: T, other: &Self) {
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = alpha * *a + beta * b;
        }
    }

    /// `x,y,u` rows on an `s x s` uniform interior sub-grid of every cell.
    pub fn write_csv<W: Write>(&self, mut out: W, per_cell: usize) -> io::Result<()> {
        writeln!(out, "x,y,u")?;
        let m = self.mesh;
        for j in 0..m.ny() {
            for b in 0..per_cell {
                let eta = subgrid_point::<T>(b, per_cell);
                let y = m.y.to_physical(j, eta);
                for i in 0..m.nx() {
                    for a in 0..per_cell {
                        let xi = subgrid_point::<T>(a, per_cell);
                        let x = m.x.to_physical(i, xi);
                        writeln!(out, "{x:.10e},{y:.10e},{:.10e}", self.eval_local(i, j, xi, eta))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// `sum_{p,q} c[p, q] bx[p] by[q]`.
#[inline]
fn contract<T: Real>(cell: &[T], bx: &[T], by: &[T]) -> T {
    let np = bx.len();
    let mut total = T::zero();
    for (p, &vx) in bx.iter().enumerate() {
        let row = &cell[p * np..(p + 1) * np];
        total += vx * row.iter().zip(by).map(|(&c, &v)| c * v).sum::<T>();
    }
    total
}

fn subgrid_point<T: Real>(i: usize, s: usize) -> T {
    (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(s) * T::lit(2.0) - T::one()
}

/// L2 projection of `f` using a `quad_points^2` tensor Gauss rule per cell.
pub fn l2_project_2d<T, F>(f: F, mesh: &Mesh2D<T>, k: usize, quad_points: usize) -> Result<DgFunction2D<T>>
where
    T: Real,
    F: Fn(T, T) -> T + Sync,
{
    if quad_points < k + 1 {
        return Err(Error::QuadratureSize(quad_points));
    }
    let rule = gauss_legendre::<T>(quad_points)?;
    let np = k + 1;
    let basis: Vec<Vec<T>> = rule
        .points
        .iter()
        .map(|&xi| {
            let mut b = vec![T::zero(); np];
            legendre_values_into(xi, &mut b);
            b
        })
        .collect();
    // (hx hy / 4) * basis_scale
    let factor = T::lit(0.5) * (mesh.x.h() * mesh.y.h()).sqrt();
    let mut out = DgFunction2D::zeros(*mesh, k);
    let per = np * np;
    let nx = mesh.nx();
    out.coeffs.par_chunks_mut(per).enumerate().for_each(|(c, cell)| {
        let (i, j) = (c % nx, c / nx);
        for (b, &eta) in rule.points.iter().enumerate() {
            let y = mesh.y.to_physical(j, eta);
            for (a, &xi) in rule.points.iter().enumerate() {
                let w = rule.weights[a] * rule.weights[b] * f(mesh.x.to_physical(i, xi), y);
                for p in 0..np {
                    for q in 0..np {
                        cell[p * np + q] += w * basis[a][p] * basis[b][q];
                    }
                }
            }
        }
        for v in cell.iter_mut() {
            *v *= factor;
        }
    });
    Ok(out)
}

/// RKDG context for the 2-D transport problem.
#[derive(Debug, Clone)]
pub struct Rkdg2D<T> {
    c1: T,
    c2: T,
    cfl: T,
    policy: CflPolicy,
    reference: ReferenceElement<T>,
}

impl<T: Real> Rkdg2D<T> {
    pub fn new(c1: T, c2: T, degree: usize) -> Result<Self> {
        check_velocity(c1)?;
        check_velocity(c2)?;
        if degree > MAX_DEGREE_2D {
            return Err(Error::InvalidArgument(format!(
                "2-D degree {degree} exceeds the supported maximum {MAX_DEGREE_2D}"
            )));
        }
        Ok(Self {
            c1,
            c2,
            cfl: T::lit(DEFAULT_CFL),
            policy: CflPolicy::Warn,
            reference: ReferenceElement::new(degree)?,
        })
    }

    pub fn with_cfl(mut self, cfl: T, policy: CflPolicy) -> Self {
        self.cfl = cfl;
        self.policy = policy;
        self
    }

    pub fn velocity(&self) -> (T, T) {
        (self.c1, self.c2)
    }

    pub fn degree(&self) -> usize {
        self.reference.degree
    }

    /// `cfl * min(hx, hy) / (c1 + c2)`.
    pub fn max_dt(&self, mesh: &Mesh2D<T>) -> T {
        self.cfl * mesh.min_h() / (self.c1 + self.c2)
    }

    fn check_space(&self, v: &DgFunction2D<T>) -> Result<()> {
        if v.degree() != self.degree() {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    /// `H(phi, psi)` assembled from tensor Gauss volume terms and 1-D Gauss
    /// rules on every face, with upwind (left/bottom) traces of `phi`.
    pub fn bilinear_h(&self, phi: &DgFunction2D<T>, psi: &DgFunction2D<T>) -> Result<T> {
        if !phi.same_space(psi) {
            return Err(Error::MeshMismatch);
        }
        let m = *phi.mesh();
        let rule = gauss_legendre::<T>(phi.degree() + 1)?;
        let (hx, hy) = (m.x.h(), m.y.h());
        let quarter = hx * hy * T::lit(0.25);
        let one = T::one();
        let (c1, c2) = (self.c1, self.c2);
        let total = (0..m.n_cells())
            .into_par_iter()
            .map(|c| {
                let (i, j) = (c % m.nx(), c / m.nx());
                let il = m.x.shift_index(i, -1);
                let jb = m.y.shift_index(j, -1);
                let mut vol = T::zero();
                let mut faces = T::zero();
                for (a, &s) in rule.points.iter().enumerate() {
                    for (b, &t) in rule.points.iter().enumerate() {
                        let (gx, gy) = psi.grad_local(i, j, s, t);
                        vol += rule.weights[a] * rule.weights[b] * phi.eval_local(i, j, s, t) * (c1 * gx + c2 * gy);
                    }
                    let w = rule.weights[a];
                    // x-faces at fixed eta = s
                    let right = phi.eval_local(i, j, one, s) * psi.eval_local(i, j, one, s);
                    let left = phi.eval_local(il, j, one, s) * psi.eval_local(i, j, -one, s);
                    faces += c1 * hy * T::lit(0.5) * w * (right - left);
                    // y-faces at fixed xi = s
                    let top = phi.eval_local(i, j, s, one) * psi.eval_local(i, j, s, one);
                    let bottom = phi.eval_local(i, jb, s, one) * psi.eval_local(i, j, s, -one);
                    faces += c2 * hx * T::lit(0.5) * w * (top - bottom);
                }
                quarter * vol - faces
            })
            .collect::<Vec<T>>()
            .into_iter()
            .sum();
        Ok(total)
    }

    /// `w` with `(w, psi) = H(v, psi)` for every `psi` in the space.
    pub fn apply_l(&self, v: &DgFunction2D<T>) -> Result<DgFunction2D<T>> {
        self.check_space(v)?;
        let mut w = DgFunction2D::zeros(*v.mesh(), v.degree());
        self.apply_l_into(v, &mut w);
        Ok(w)
    }

    fn apply_l_into(&self, v: &DgFunction2D<T>, w: &mut DgFunction2D<T>) {
        let m = *v.mesh();
        let re = &self.reference;
        let np = re.n_modes();
        let per = np * np;
        let two = T::lit(2.0);
        let fx = self.c1 * two / m.x.h();
        let fy = self.c2 * two / m.y.h();
        let nx = m.nx();
        w.coeffs.par_chunks_mut(per).enumerate().for_each(|(c, out)| {
            let (i, j) = (c % nx, c / nx);
            let cell = v.cell(i, j);
            let west = v.cell(m.x.shift_index(i, -1), j);
            let south = v.cell(i, m.y.shift_index(j, -1));
            // Right traces along x for each y-mode, and along y for each x-mode.
            let mut own_x = [T::zero(); 8];
            let mut up_x = [T::zero(); 8];
            let mut own_y = [T::zero(); 8];
            let mut up_y = [T::zero(); 8];
            for r in 0..np {
                for s in 0..np {
                    own_x[r] += re.right[s] * cell[s * np + r];
                    up_x[r] += re.right[s] * west[s * np + r];
                    own_y[r] += re.right[s] * cell[r * np + s];
                    up_y[r] += re.right[s] * south[r * np + s];
                }
            }
            for p in 0..np {
                for q in 0..np {
                    let mut vx = T::zero();
                    let mut vy = T::zero();
                    for n in 0..np {
                        vx += re.stiffness[p][n] * cell[n * np + q];
                        vy += re.stiffness[q][n] * cell[p * np + n];
                    }
                    let ax = vx - re.right[p] * own_x[q] + re.left[p] * up_x[q];
                    let ay = vy - re.right[q] * own_y[p] + re.left[q] * up_y[p];
                    out[p * np + q] = fx * ax + fy * ay;
                }
            }
        });
    }

    fn check_cfl(&self, mesh: &Mesh2D<T>, dt: T) -> Result<()> {
        let bound = self.max_dt(mesh);
        if dt > bound * (T::one() + T::lit(1e-12)) {
            match self.policy {
                CflPolicy::Strict => {
                    return Err(Error::Cfl {
                        dt: dt.as_f64(),
                        bound: bound.as_f64(),
                    })
                }
                CflPolicy::Warn => log::warn!("dt = {dt} exceeds CFL bound {bound}"),
            }
        }
        Ok(())
    }

    /// One TVD-RK3 step.
    pub fn step(&self, v: &DgFunction2D<T>, dt: T) -> Result<DgFunction2D<T>> {
        self.check_space(v)?;
        check_step(dt)?;
        self.check_cfl(v.mesh(), dt)?;
        let mut l = DgFunction2D::zeros(*v.mesh(), v.degree());

        self.apply_l_into(v, &mut l);
        let mut v1 = v.clone();
        v1.axpby(T::one(), dt, &l);

        self.apply_l_into(&v1, &mut l);
        let quarter = T::lit(0.25);
        let mut v2 = v1;
        v2.axpby(quarter, quarter * dt, &l);
        v2.axpby(T::one(), T::lit(0.75), v);

        self.apply_l_into(&v2, &mut l);
        let two_thirds = T::lit(2.0) / T::lit(3.0);
        let mut v3 = v2;
        v3.axpby(two_thirds, two_thirds * dt, &l);
        v3.axpby(T::one(), T::one() / T::lit(3.0), v);
        Ok(v3)
    }
}

/// Obstacle `g(x, y)` for the 2-D problem.
#[derive(Clone)]
pub struct Obstacle2D<T> {
    g: Arc<dyn Fn(T, T) -> T + Send + Sync>,
}

impl<T> std::fmt::Debug for Obstacle2D<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Obstacle2D")
    }
}

impl<T: Real> Obstacle2D<T> {
    pub fn new<G: Fn(T, T) -> T + Send + Sync + 'static>(g: G) -> Self {
        Self { g: Arc::new(g) }
    }

    /// `g = sin(pi (x + y))`.
    pub fn sin_pi_diagonal() -> Self {
        Self::new(|x: T, y: T| (T::PI() * (x + y)).sin())
    }

    pub fn g(&self, x: T, y: T) -> T {
        (self.g)(x, y)
    }

    /// `max(g(x, y), g(x - s1, y - s2))`.
    pub fn tilde(&self, x: T, y: T, s1: T, s2: T) -> T {
        self.g(x, y).max(self.g(x - s1, y - s2))
    }
}

/// `g~` at the tensor Gauss nodes, one row of `(k+1)^2` values per cell with
/// node `(a, b)` at `a * (k + 1) + b`.
pub fn tilde_g_values_2d<T: Real>(
    obstacle: &Obstacle2D<T>,
    mesh: &Mesh2D<T>,
    k: usize,
    shift: (T, T),
) -> Result<Vec<T>> {
    let rule = gauss_legendre::<T>(k + 1)?;
    let np = k + 1;
    let nx = mesh.nx();
    let mut out = vec![T::zero(); mesh.n_cells() * np * np];
    out.par_chunks_mut(np * np).enumerate().for_each(|(c, row)| {
        let (i, j) = (c % nx, c / nx);
        for (a, &xi) in rule.points.iter().enumerate() {
            let x = mesh.x.to_physical(i, xi);
            for (b, &eta) in rule.points.iter().enumerate() {
                let y = mesh.y.to_physical(j, eta);
                row[a * np + b] = obstacle.tilde(x, y, shift.0, shift.1);
            }
        }
    });
    Ok(out)
}

/// Values of `v` at the tensor Gauss nodes, laid out as in [`tilde_g_values_2d`].
pub fn nodal_values_2d<T: Real>(v: &DgFunction2D<T>, reference: &ReferenceElement<T>) -> Vec<T> {
    let np = v.degree() + 1;
    let per = np * np;
    let scale = v.mesh().basis_scale();
    let mut out = vec![T::zero(); v.coeffs.len()];
    out.par_chunks_mut(per).zip(v.coeffs.par_chunks(per)).for_each(|(vals, cell)| {
        for a in 0..np {
            for b in 0..np {
                vals[a * np + b] = scale * contract(cell, &reference.nodal[a], &reference.nodal[b]);
            }
        }
    });
    out
}

/// Nodal max against `gvals`, then the exact back-transform.
pub fn apply_obstacle_2d<T: Real>(
    v: &DgFunction2D<T>,
    gvals: &[T],
    reference: &ReferenceElement<T>,
) -> Result<DgFunction2D<T>> {
    if gvals.len() != v.coeffs.len() || reference.degree != v.degree() {
        return Err(Error::MeshMismatch);
    }
    let np = v.degree() + 1;
    let per = np * np;
    let scale = v.mesh().basis_scale();
    let nodal = nodal_values_2d(v, reference);
    let mut out = DgFunction2D::zeros(*v.mesh(), v.degree());
    let w = &reference.rule.weights;
    out.coeffs
        .par_chunks_mut(per)
        .zip(nodal.par_chunks(per).zip(gvals.par_chunks(per)))
        .for_each(|(cell, (vals, gs))| {
            for p in 0..np {
                for q in 0..np {
                    let mut s = T::zero();
                    for a in 0..np {
                        for b in 0..np {
                            let val = vals[a * np + b].max(gs[a * np + b]);
                            s += w[a] * w[b] * val * reference.nodal[a][p] * reference.nodal[b][q];
                        }
                    }
                    cell[p * np + q] = s / scale;
                }
            }
        });
    Ok(out)
}

/// TVD-RK3 transport followed by the nodal max against
/// `max(g(x, y), g(x - c1 dt, y - c2 dt))`.
pub fn rkdg2d_obstacle_step<T: Real>(
    u: &DgFunction2D<T>,
    solver: &Rkdg2D<T>,
    obstacle: &Obstacle2D<T>,
    dt: T,
) -> Result<DgFunction2D<T>> {
    let moved = solver.step(u, dt)?;
    let gvals = tilde_g_values_2d(obstacle, u.mesh(), u.degree(), (solver.c1 * dt, solver.c2 * dt))?;
    apply_obstacle_2d(&moved, &gvals, &solver.reference)
}

/// Runs a step plan; `observe` sees the solution and the nodal obstacle
/// values used after every step.
pub fn run_plan_2d<T, F>(
    u0: DgFunction2D<T>,
    solver: &Rkdg2D<T>,
    obstacle: Option<&Obstacle2D<T>>,
    plan: &StepPlan<T>,
    mut observe: F,
) -> Result<DgFunction2D<T>>
where
    T: Real,
    F: FnMut(&DgFunction2D<T>, Option<&[T]>),
{
    let mut u = u0;
    let mut cached: Option<(T, Vec<T>)> = None;
    for dt in plan.iter() {
        let moved = solver.step(&u, dt)?;
        u = match obstacle {
            None => {
                observe(&moved, None);
                moved
            }
            Some(ob) => {
                if cached.as_ref().is_none_or(|(d, _)| *d != dt) {
                    let shift = (solver.c1 * dt, solver.c2 * dt);
                    cached = Some((dt, tilde_g_values_2d(ob, moved.mesh(), moved.degree(), shift)?));
                }
                let table = &cached.as_ref().expect("table cached above").1;
                let next = apply_obstacle_2d(&moved, table, &solver.reference)?;
                observe(&next, Some(table));
                next
            }
        };
    }
    Ok(u)
}

/// Errors on an `s x s` uniform interior sub-grid of every cell.
pub fn grid_error_2d<T, F>(u_h: &DgFunction2D<T>, exact: F, per_cell: usize) -> Result<ErrorNorms<T>>
where
    T: Real,
    F: Fn(T, T) -> T + Sync,
{
    if per_cell < 2 {
        return Err(Error::InvalidArgument(format!(
            "error sampling needs at least 2 points per cell side, got {per_cell}"
        )));
    }
    let m = *u_h.mesh();
    let acc = (0..m.n_cells())
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % m.nx(), c / m.nx());
            let mut acc = NormAccumulator::new();
            for b in 0..per_cell {
                let eta = subgrid_point::<T>(b, per_cell);
                let y = m.y.to_physical(j, eta);
                for a in 0..per_cell {
                    let xi = subgrid_point::<T>(a, per_cell);
                    acc.push(u_h.eval_local(i, j, xi, eta) - exact(m.x.to_physical(i, xi), y));
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(NormAccumulator::new(), NormAccumulator::merge);
    Ok(acc.finish(m.area()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::DgFunction;
    use crate::exact::example2_exact;
    use crate::rkdg::RkdgSolver;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_2d(rng: &mut ChaCha8Rng, nx: usize, ny: usize, k: usize) -> DgFunction2D<f64> {
        let m = Mesh2D::new((-1.0, 1.0), (-0.5, 1.0), nx, ny).unwrap();
        let c = (0..m.n_cells() * (k + 1) * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DgFunction2D::from_coeffs(m, k, c).unwrap()
    }

    fn random_1d(rng: &mut ChaCha8Rng, m: Mesh1D<f64>, k: usize) -> DgFunction<f64> {
        let c = (0..m.n_cells() * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DgFunction::from_coeffs(m, k, c).unwrap()
    }

    fn tensor(a: &DgFunction<f64>, b: &DgFunction<f64>) -> DgFunction2D<f64> {
        let m = Mesh2D { x: *a.mesh(), y: *b.mesh() };
        let k = a.degree();
        let np = k + 1;
        let mut out = DgFunction2D::zeros(m, k);
        for j in 0..m.ny() {
            for i in 0..m.nx() {
                let cell = out.cell_mut(i, j);
                for p in 0..np {
                    for q in 0..np {
                        cell[p * np + q] = a.cell(i)[p] * b.cell(j)[q];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn constants_and_projection() {
        let m = Mesh2D::<f64>::square(4).unwrap();
        let c = DgFunction2D::constant(m, 2, 1.5);
        assert!((c.eval(0.13, -0.71) - 1.5).abs() < 1e-14);
        assert!((c.integral() - 6.0).abs() < 1e-13);
        let p = l2_project_2d(|x, y| 1.0 + x * y - y * y, &m, 2, 5).unwrap();
        for &(x, y) in &[(0.3, 0.2), (-0.9, 0.95), (0.0, -0.4)] {
            assert!((p.eval(x, y) - (1.0 + x * y - y * y)).abs() < 1e-13);
        }
        let (gx, gy) = p.grad_local(1, 2, 0.2, -0.3);
        let (x, y) = (m.x.to_physical(1, 0.2), m.y.to_physical(2, -0.3));
        assert!((gx - y).abs() < 1e-12 && (gy - (x - 2.0 * y)).abs() < 1e-12);
        assert!(DgFunction2D::from_coeffs(m, 2, vec![0.0; 5]).is_err());
    }

    #[test]
    fn constants_annihilate_the_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = Rkdg2D::new(0.5, 0.7, 2).unwrap();
        for _ in 0..5 {
            let phi = random_2d(&mut rng, 5, 3, 2);
            let one = DgFunction2D::constant(*phi.mesh(), 2, 1.0);
            assert!(s.bilinear_h(&one, &phi).unwrap().abs() < 1e-12);
            assert!(s.bilinear_h(&phi, &one).unwrap().abs() < 1e-12);
            assert!(s.bilinear_h(&phi, &phi).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn operator_is_riesz_representer() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..=2 {
            let s = Rkdg2D::new(0.5, 0.3, k).unwrap();
            let phi = random_2d(&mut rng, 4, 3, k);
            let psi = random_2d(&mut rng, 4, 3, k);
            let l = s.apply_l(&phi).unwrap();
            let inner: f64 = l.coeffs().iter().zip(psi.coeffs()).map(|(a, b)| a * b).sum();
            let h = s.bilinear_h(&phi, &psi).unwrap();
            assert!((inner - h).abs() < 1e-11 * h.abs().max(1.0), "k = {k}: {inner} vs {h}");
        }
    }

    #[test]
    fn separable_matches_one_dimensional_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mx = Mesh1D::new(-1.0, 1.0, 6).unwrap();
        let my = Mesh1D::new(-1.0, 1.0, 4).unwrap();
        let (c1, c2) = (0.5, 1.25);
        let s = Rkdg2D::new(c1, c2, 2).unwrap();
        let one_d = RkdgSolver::new(1.0, 2).unwrap();
        for _ in 0..5 {
            let (a, b) = (random_1d(&mut rng, mx, 2), random_1d(&mut rng, my, 2));
            let (al, be) = (random_1d(&mut rng, mx, 2), random_1d(&mut rng, my, 2));
            let want = c1 * one_d.bilinear_h(&a, &al).unwrap() * b.inner(&be).unwrap()
                + c2 * a.inner(&al).unwrap() * one_d.bilinear_h(&b, &be).unwrap();
            let got = s.bilinear_h(&tensor(&a, &b), &tensor(&al, &be)).unwrap();
            assert!((got - want).abs() < 1e-11 * want.abs().max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn transport_conserves_mass() {
        let m = Mesh2D::<f64>::square(8).unwrap();
        let s = Rkdg2D::new(0.5, 0.5, 2).unwrap();
        let mut u = l2_project_2d(|x, y| (PI * x).sin() * (PI * y).cos() + 2.0, &m, 2, 5).unwrap();
        let mass = u.integral();
        let dt = s.max_dt(&m);
        for _ in 0..20 {
            let prev = u.l2_norm();
            u = s.step(&u, dt).unwrap();
            assert!((u.integral() - mass).abs() < 1e-12);
            assert!(u.l2_norm() <= prev * (1.0 + 1e-14));
        }
        let strict = s.clone().with_cfl(0.2, CflPolicy::Strict);
        assert!(matches!(strict.step(&u, dt * 2.0), Err(Error::Cfl { .. })));
    }

    #[test]
    fn swap_symmetry() {
        let m = Mesh2D::<f64>::square(6).unwrap();
        let s = Rkdg2D::new(0.5, 0.5, 2).unwrap();
        let ob = Obstacle2D::sin_pi_diagonal();
        let mut u = l2_project_2d(|x, y| 0.5 + (PI * (x + y)).sin() + 0.3 * (x * y).cos(), &m, 2, 5).unwrap();
        for _ in 0..10 {
            u = rkdg2d_obstacle_step(&u, &s, &ob, s.max_dt(&m)).unwrap();
        }
        let np = 3;
        for j in 0..6 {
            for i in 0..6 {
                for p in 0..np {
                    for q in 0..np {
                        let d = u.cell(i, j)[p * np + q] - u.cell(j, i)[q * np + p];
                        assert!(d.abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn obstacle_step_bounds() {
        let m = Mesh2D::<f64>::square(6).unwrap();
        let s = Rkdg2D::new(0.5, 0.5, 2).unwrap();
        let ob = Obstacle2D::sin_pi_diagonal();
        let re = ReferenceElement::new(2).unwrap();
        let mut u = l2_project_2d(|x, y| 0.5 + (PI * (x + y)).sin(), &m, 2, 5).unwrap();
        let dt = s.max_dt(&m);
        let g = tilde_g_values_2d(&ob, &m, 2, (0.5 * dt, 0.5 * dt)).unwrap();
        for _ in 0..10 {
            u = rkdg2d_obstacle_step(&u, &s, &ob, dt).unwrap();
            let vals = nodal_values_2d(&u, &re);
            assert!(vals.iter().zip(&g).all(|(v, g)| *v >= g - 1e-12));
        }
        let low = Obstacle2D::new(|_, _| -10.0);
        let c = DgFunction2D::constant(m, 2, 0.25);
        let next = rkdg2d_obstacle_step(&c, &s, &low, dt).unwrap();
        for (a, b) in next.coeffs().iter().zip(c.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn example2_error_is_small() {
        let m = Mesh2D::<f64>::square(20).unwrap();
        let s = Rkdg2D::new(0.5, 0.5, 2).unwrap();
        let ob = Obstacle2D::sin_pi_diagonal();
        let u0 = l2_project_2d(|x, y| 0.5 + (PI * (x + y)).sin(), &m, 2, 5).unwrap();
        let plan = StepPlan::new(s.max_dt(&m), 0.5).unwrap();
        let u = run_plan_2d(u0, &s, Some(&ob), &plan, |_, _| {}).unwrap();
        let e = grid_error_2d(&u, |x, y| example2_exact(0.5, x, y).unwrap(), 10).unwrap();
        assert!(e.l1 < 2e-2, "{e:?}");
        let mut buf = Vec::new();
        u.write_csv(&mut buf, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 20 * 20 * 4);
        assert!(text.starts_with("x,y,u\n"));
    }
}
