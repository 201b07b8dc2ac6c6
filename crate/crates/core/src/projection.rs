//! L2 and Gauss-Radau projections onto the DG space.

use crate::dg::{DgFunction, Mesh1D};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, legendre_value, legendre_values_into};
use crate::scalar::Real;

/// Relative tolerance (in units of `h`) for snapping a shifted breakpoint onto an interface.
pub const BREAKPOINT_SNAP: f64 = 1e-13;

/// Default number of Gauss points per cell when projecting a callable.
pub fn default_quad_points(degree: usize) -> usize {
    degree + 3
}

/// L2 projection of `f` with a `quad_points`-point Gauss rule per cell.
pub fn l2_project<T, F>(f: F, mesh: &Mesh1D<T>, degree: usize, quad_points: usize) -> Result<DgFunction<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    if quad_points < degree + 1 {
        return Err(Error::InvalidArgument(format!(
            "{quad_points} quadrature points cannot resolve degree {degree}"
        )));
    }
    let rule = gauss_legendre::<T>(quad_points)?;
    let np = degree + 1;
    let basis: Vec<Vec<T>> = rule
        .points
        .iter()
        .map(|&xi| {
            let mut row = vec![T::zero(); np];
            legendre_values_into(xi, &mut row);
            row
        })
        .collect();
    // int_{I_j} f sqrt(2/h) phi_m dx = sqrt(h/2) sum_a w_a f(x_a) phi_m(xi_a)
    let scale = (mesh.h() * T::lit(0.5)).sqrt();
    let mut out = DgFunction::zeros(*mesh, degree);
    for j in 0..mesh.n_cells() {
        let cell = out.cell_mut(j);
        for ((&xi, &w), row) in rule.points.iter().zip(&rule.weights).zip(&basis) {
            let fx = f(mesh.to_physical(j, xi));
            for (c, &p) in cell.iter_mut().zip(row) {
                *c += w * fx * p;
            }
        }
        for c in cell.iter_mut() {
            *c *= scale;
        }
    }
    Ok(out)
}

/// Exact L2 projection of `x -> v(x - shift)`.
///
/// On a uniform mesh a shift `s = m h + r` sends every target cell onto the
/// tail of source cell `j - m - 1` (length `r`) and the head of source cell
/// `j - m` (length `h - r`). Both transfer matrices are cell-independent and
/// are integrated exactly with a `(k + 1)`-point rule.
pub fn l2_project_shifted<T: Real>(v: &DgFunction<T>, shift: T) -> Result<DgFunction<T>> {
    let mesh = *v.mesh();
    let h = mesh.h();
    let n = mesh.n_cells();
    let np = v.n_modes();
    let (whole, rem) = split_shift(&mesh, shift);

    let mut out = DgFunction::zeros(mesh, v.degree());
    if rem == T::zero() {
        for j in 0..n {
            let src = mesh.shift_index(j, -(whole as isize));
            out.cell_mut(j).copy_from_slice(v.cell(src));
        }
        return Ok(out);
    }

    let (tail, head) = shift_transfer_matrices(v.degree(), h, rem)?;
    for j in 0..n {
        let src_tail = v.cell(mesh.shift_index(j, -(whole as isize) - 1));
        let src_head = v.cell(mesh.shift_index(j, -(whole as isize)));
        let dst = out.cell_mut(j);
        for m in 0..np {
            let mut acc = T::zero();
            for q in 0..np {
                acc += tail[m][q] * src_tail[q] + head[m][q] * src_head[q];
            }
            dst[m] = acc;
        }
    }
    Ok(out)
}

/// Reduces `shift` to `whole * h + rem` with `0 <= rem < h`, snapping `rem`
/// to zero when it lies within [`BREAKPOINT_SNAP`] of an interface.
fn split_shift<T: Real>(mesh: &Mesh1D<T>, shift: T) -> (usize, T) {
    let h = mesh.h();
    let len = mesh.length();
    let mut s = shift % len;
    if s < T::zero() {
        s += len;
    }
    let q = s / h;
    let mut whole = q.floor().to_usize().unwrap_or(0);
    let mut frac = q - q.floor();
    let snap = T::lit(BREAKPOINT_SNAP);
    if frac < snap {
        frac = T::zero();
    } else if T::one() - frac < snap {
        frac = T::zero();
        whole += 1;
    }
    (whole % mesh.n_cells(), frac * h)
}

/// Transfer matrices `(tail, head)` for a sub-cell shift `rem` in `(0, h)`.
///
/// `tail[m][q] = int_0^rem psi_m(t) phi_q(t - rem + h) dt` and
/// `head[m][q] = int_rem^h psi_m(t) phi_q(t - rem) dt`, with `t` the offset
/// from the cell's left end and both bases scaled by `sqrt(2/h)`.
#[allow(clippy::type_complexity)]
fn shift_transfer_matrices<T: Real>(degree: usize, h: T, rem: T) -> Result<(Vec<Vec<T>>, Vec<Vec<T>>)> {
    let np = degree + 1;
    let rule = gauss_legendre::<T>(np)?;
    let two = T::lit(2.0);
    let to_xi = |t: T| t * two / h - T::one();
    let scale = two / h;
    let mut tail = vec![vec![T::zero(); np]; np];
    let mut head = vec![vec![T::zero(); np]; np];
    let mut bt = vec![T::zero(); np];
    let mut bs = vec![T::zero(); np];
    let mut accumulate = |lo: T, hi: T, src_offset: T, mat: &mut Vec<Vec<T>>| {
        let half = (hi - lo) * T::lit(0.5);
        let mid = (hi + lo) * T::lit(0.5);
        for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
            let t = mid + half * xi;
            legendre_values_into(to_xi(t), &mut bt);
            legendre_values_into(to_xi(t + src_offset), &mut bs);
            for m in 0..np {
                for q in 0..np {
                    mat[m][q] += scale * half * w * bt[m] * bs[q];
                }
            }
        }
    };
    accumulate(T::zero(), rem, h - rem, &mut tail);
    accumulate(rem, h, -rem, &mut head);
    Ok((tail, head))
}

/// Legendre-Gauss-Radau projection: matches `f` at each cell's right end and
/// is L2-orthogonal to polynomials of degree `< k` against the residual.
///
/// In the orthonormal basis the orthogonality conditions fix the first `k`
/// coefficients to the L2 moments, and the trace condition gives the last.
pub fn gauss_radau_project<T, F>(f: F, mesh: &Mesh1D<T>, degree: usize) -> Result<DgFunction<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    let moments = l2_project(&f, mesh, degree, default_quad_points(degree) + 2)?;
    let scale = mesh.basis_scale();
    let top = legendre_value::<T>(degree, T::one());
    let mut out = DgFunction::zeros(*mesh, degree);
    for j in 0..mesh.n_cells() {
        let right = f(mesh.cell_left(j) + mesh.h());
        let src = moments.cell(j);
        let dst = out.cell_mut(j);
        let mut lower = T::zero();
        for m in 0..degree {
            dst[m] = src[m];
            lower += src[m] * legendre_value(m, T::one());
        }
        dst[degree] = (right / scale - lower) / top;
    }
    Ok(out)
}
