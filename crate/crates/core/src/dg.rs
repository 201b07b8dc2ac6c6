//! Periodic uniform meshes and piecewise-polynomial DG functions.
//!
//! Cells are indexed from zero: cell `j` spans `[a + j h, a + (j + 1) h]`.
//! Interface `i` sits at `a + i h`; interface `N` is identified with
//! interface `0` under periodicity. On cell `j` the basis is
//! `sqrt(2/h) phi_m(xi)` with `phi_m` the orthonormal Legendre polynomials on
//! `[-1, 1]`, so the coefficient vector's 2-norm is the L2 norm.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, legendre_derivative, legendre_value, QuadRule};
use crate::scalar::{wrap_periodic, Real};

/// Uniform periodic partition of `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D<T> {
    a: T,
    b: T,
    n_cells: usize,
    h: T,
}

impl<T: Real> Mesh1D<T> {
    pub fn new(a: T, b: T, n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidMesh("at least one cell is required".into()));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidMesh(format!("empty interval [{a}, {b}]")));
        }
        let h = (b - a) / T::from_usize_lossy(n_cells);
        Ok(Self { a, b, n_cells, h })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }

    /// Left endpoint of cell `j`.
    pub fn cell_left(&self, j: usize) -> T {
        self.a + T::from_usize_lossy(j) * self.h
    }

    pub fn cell_center(&self, j: usize) -> T {
        self.cell_left(j) + self.h * T::lit(0.5)
    }

    /// Coordinate of interface `i` (`0 <= i <= N`).
    pub fn interface(&self, i: usize) -> T {
        self.cell_left(i)
    }

    pub fn wrap(&self, x: T) -> T {
        wrap_periodic(x, self.a, self.length())
    }

    /// Cell containing `x` (after periodic wrap) and its reference coordinate.
    ///
    /// Points on an interface belong to the cell to their right.
    pub fn locate(&self, x: T) -> (usize, T) {
        let x = self.wrap(x);
        let s = (x - self.a) / self.h;
        let mut j = s.floor().to_usize().unwrap_or(0);
        if j >= self.n_cells {
            j = self.n_cells - 1;
        }
        let xi = self.to_reference(j, x);
        (j, xi.max(-T::one()).min(T::one()))
    }

    /// Affine map from physical `x` to `xi in [-1, 1]` on cell `j`.
    #[inline]
    pub fn to_reference(&self, j: usize, x: T) -> T {
        (x - self.cell_center(j)) * T::lit(2.0) / self.h
    }

    #[inline]
    pub fn to_physical(&self, j: usize, xi: T) -> T {
        self.cell_center(j) + xi * self.h * T::lit(0.5)
    }

    /// Scale factor `sqrt(2/h)` of the cell basis.
    #[inline]
    pub fn basis_scale(&self) -> T {
        (T::lit(2.0) / self.h).sqrt()
    }

    /// Periodic neighbour `j + offset` (offset may be negative).
    #[inline]
    pub fn shift_index(&self, j: usize, offset: isize) -> usize {
        let n = self.n_cells as isize;
        (((j as isize + offset) % n + n) % n) as usize
    }
}

/// Which one-sided limit to take at an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Limit from the cell on the left, `(.)^-`.
    Left,
    /// Limit from the cell on the right, `(.)^+`.
    Right,
}

/// Physical Gauss nodes of cell `j` with weights normalized to sum to one.
pub fn gauss_points_of_cell<T: Real>(mesh: &Mesh1D<T>, j: usize, k: usize) -> Result<Vec<(T, T)>> {
    if j >= mesh.n_cells() {
        return Err(Error::InvalidArgument(format!(
            "cell {j} out of range for {} cells",
            mesh.n_cells()
        )));
    }
    let rule = gauss_legendre::<T>(k + 1)?;
    Ok(rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(&xi, &w)| (mesh.to_physical(j, xi), w * T::lit(0.5)))
        .collect())
}

/// Tabulated reference-element data for degree `k`.
#[derive(Debug, Clone)]
pub struct ReferenceElement<T> {
    pub degree: usize,
    /// The `(k + 1)`-point Gauss rule.
    pub rule: QuadRule<T>,
    /// `nodal[a][m] = phi_m(xi_a)` at the Gauss nodes.
    pub nodal: Vec<Vec<T>>,
    /// `phi_m(1)`.
    pub right: Vec<T>,
    /// `phi_m(-1)`.
    pub left: Vec<T>,
    /// `stiffness[m][n] = int phi_n phi_m' dxi`.
    pub stiffness: Vec<Vec<T>>,
}

impl<T: Real> ReferenceElement<T> {
    pub fn new(degree: usize) -> Result<Self> {
        let np = degree + 1;
        let rule = gauss_legendre::<T>(np)?;
        let nodal = rule
            .points
            .iter()
            .map(|&xi| (0..np).map(|m| legendre_value(m, xi)).collect())
            .collect();
        let right = (0..np).map(|m| legendre_value(m, T::one())).collect();
        let left = (0..np).map(|m| legendre_value(m, -T::one())).collect();
        let stiffness = (0..np)
            .map(|m| {
                (0..np)
                    .map(|n| rule.integrate(|xi| legendre_value(n, xi) * legendre_derivative(m, xi)))
                    .collect()
            })
            .collect();
        Ok(Self {
            degree,
            rule,
            nodal,
            right,
            left,
            stiffness,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.degree + 1
    }

    /// Values of the unscaled local expansion at the Gauss nodes.
    pub fn to_nodal(&self, coeffs: &[T], out: &mut [T]) {
        for (o, row) in out.iter_mut().zip(&self.nodal) {
            *o = row.iter().zip(coeffs).map(|(&p, &c)| p * c).sum();
        }
    }

    /// Inverse of [`Self::to_nodal`]: `c_m = sum_a w_a v_a phi_m(xi_a)`.
    ///
    /// Exact because the rule integrates products of degree `2k`.
    pub fn from_nodal(&self, values: &[T], out: &mut [T]) {
        for (m, o) in out.iter_mut().enumerate() {
            *o = values
                .iter()
                .zip(&self.rule.weights)
                .zip(&self.nodal)
                .map(|((&v, &w), row)| w * v * row[m])
                .sum();
        }
    }
}

/// Piecewise polynomial of degree `k` on a periodic mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DgFunction<T> {
    mesh: Mesh1D<T>,
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Real> DgFunction<T> {
    pub fn zeros(mesh: Mesh1D<T>, degree: usize) -> Self {
        Self {
            mesh,
            degree,
            coeffs: vec![T::zero(); mesh.n_cells() * (degree + 1)],
        }
    }

    /// Builds from a flat row-major `N x (k + 1)` coefficient table.
    pub fn from_coeffs(mesh: Mesh1D<T>, degree: usize, coeffs: Vec<T>) -> Result<Self> {
        let expected = (mesh.n_cells(), degree + 1);
        if coeffs.len() != expected.0 * expected.1 {
            return Err(Error::ShapeMismatch {
                got: (coeffs.len(), 1),
                expected,
            });
        }
        Ok(Self { mesh, degree, coeffs })
    }

    /// The function equal to `value` everywhere.
    pub fn constant(mesh: Mesh1D<T>, degree: usize, value: T) -> Self {
        let mut f = Self::zeros(mesh, degree);
        // int_{I_j} value * sqrt(2/h) / sqrt(2) dx = value * sqrt(h)
        let c0 = value * mesh.h().sqrt();
        for j in 0..mesh.n_cells() {
            f.cell_mut(j)[0] = c0;
        }
        f
    }

    pub fn mesh(&self) -> &Mesh1D<T> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_modes(&self) -> usize {
        self.degree + 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn cell(&self, j: usize) -> &[T] {
        let np = self.n_modes();
        &self.coeffs[j * np..(j + 1) * np]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [T] {
        let np = self.n_modes();
        &mut self.coeffs[j * np..(j + 1) * np]
    }

    pub fn same_space(&self, other: &Self) -> bool {
        self.degree == other.degree && self.mesh == other.mesh
    }

    /// Value of the cell-`j` polynomial at reference coordinate `xi`.
    pub fn eval_local(&self, j: usize, xi: T) -> T {
        let s = self.mesh.basis_scale();
        let mut buf = [T::zero(); 16];
        if self.n_modes() <= buf.len() {
            let vals = &mut buf[..self.n_modes()];
            crate::quadrature::legendre_values_into(xi, vals);
            s * vals.iter().zip(self.cell(j)).map(|(&p, &c)| p * c).sum::<T>()
        } else {
            s * self
                .cell(j)
                .iter()
                .enumerate()
                .map(|(m, &c)| c * legendre_value(m, xi))
                .sum::<T>()
        }
    }

    /// Spatial derivative of the cell-`j` polynomial at reference coordinate `xi`.
    pub fn eval_derivative_local(&self, j: usize, xi: T) -> T {
        let s = self.mesh.basis_scale() * T::lit(2.0) / self.mesh.h();
        s * self
            .cell(j)
            .iter()
            .enumerate()
            .map(|(m, &c)| c * crate::quadrature::legendre_derivative(m, xi))
            .sum::<T>()
    }

    /// Point value; interface coordinates take the right cell's value.
    pub fn eval(&self, x: T) -> T {
        let (j, xi) = self.mesh.locate(x);
        self.eval_local(j, xi)
    }

    /// One-sided limit at interface `i` (`0 <= i <= N`, periodic).
    pub fn trace(&self, i: usize, side: Side) -> T {
        let n = self.mesh.n_cells();
        let i = i % n;
        match side {
            Side::Left => self.eval_local(self.mesh.shift_index(i, -1), T::one()),
            Side::Right => self.eval_local(i, -T::one()),
        }
    }

    /// Jump `u^+ - u^-` at interface `i`.
    pub fn jump(&self, i: usize) -> T {
        self.trace(i, Side::Right) - self.trace(i, Side::Left)
    }

    /// L2 norm (Parseval in the orthonormal cell basis).
    pub fn l2_norm(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    /// L2 inner product.
    pub fn inner(&self, other: &Self) -> Result<T> {
        if !self.same_space(other) {
            return Err(Error::MeshMismatch);
        }
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a * b).sum())
    }

    /// `int f dx` over the whole domain.
    pub fn integral(&self) -> T {
        let h_sqrt = self.mesh.h().sqrt();
        (0..self.mesh.n_cells()).map(|j| self.cell(j)[0]).sum::<T>() * h_sqrt
    }

    /// `self = alpha * self + beta * other`.
    pub fn axpby(&mut self, alpha: T, beta: T, other: &Self) {
        debug_assert!(self.same_space(other));
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = alpha * *a + beta * b;
        }
    }

    /// Writes `x,u_h` samples at `per_cell` interior points of every cell.
    pub fn write_csv<W: Write>(&self, mut out: W, per_cell: usize) -> io::Result<()> {
        writeln!(out, "x,u_h")?;
        let per_cell = per_cell.max(1);
        for j in 0..self.mesh.n_cells() {
            for i in 0..per_cell {
                let frac = (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(per_cell);
                let xi = frac * T::lit(2.0) - T::one();
                let x = self.mesh.to_physical(j, xi);
                writeln!(out, "{:.12e},{:.12e}", x, self.eval_local(j, xi))?;
            }
        }
        Ok(())
    }
}
