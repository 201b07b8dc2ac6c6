//! Upwind DG operator and TVD-RK3 stepping for `v_t + c v_x = 0`, `c > 0`.

use crate::dg::{DgFunction, ReferenceElement, Side};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;
use crate::sldg::{check_step, check_velocity};

/// Default CFL number for `dt <= cfl * h / c`.
pub const DEFAULT_CFL: f64 = 0.2;

/// What to do when a step exceeds the CFL bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CflPolicy {
    #[default]
    Warn,
    Strict,
}

/// RKDG context: velocity, CFL handling and cached reference data.
#[derive(Debug, Clone)]
pub struct RkdgSolver<T> {
    c: T,
    cfl: T,
    policy: CflPolicy,
    reference: ReferenceElement<T>,
}

impl<T: Real> RkdgSolver<T> {
    pub fn new(c: T, degree: usize) -> Result<Self> {
        check_velocity(c)?;
        Ok(Self {
            c,
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

    pub fn velocity(&self) -> T {
        self.c
    }

    pub fn degree(&self) -> usize {
        self.reference.degree
    }

    /// Largest admissible step on mesh width `h`.
    pub fn max_dt(&self, h: T) -> T {
        self.cfl * h / self.c
    }

    fn check_space(&self, v: &DgFunction<T>) -> Result<()> {
        if v.degree() != self.degree() {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    /// The bilinear form `H(phi, psi) = sum_j H_j(phi, psi)` assembled directly
    /// from point values and one-sided traces.
    pub fn bilinear_h(&self, phi: &DgFunction<T>, psi: &DgFunction<T>) -> Result<T> {
        if !phi.same_space(psi) {
            return Err(Error::MeshMismatch);
        }
        let mesh = phi.mesh();
        let n = mesh.n_cells();
        let rule = gauss_legendre::<T>(phi.degree() + 1)?;
        let half_h = mesh.h() * T::lit(0.5);
        let c = self.c;
        let mut total = T::zero();
        for j in 0..n {
            let volume = half_h * rule.integrate(|xi| phi.eval_local(j, xi) * psi.eval_derivative_local(j, xi));
            let right = phi.trace(j + 1, Side::Left) * psi.trace(j + 1, Side::Left);
            let left = phi.trace(j, Side::Left) * psi.trace(j, Side::Right);
            total += c * volume - c * (right - left);
        }
        Ok(total)
    }

    /// `w` with `(w, psi) = H(v, psi)` for all `psi` in the DG space.
    pub fn apply_l(&self, v: &DgFunction<T>) -> Result<DgFunction<T>> {
        self.check_space(v)?;
        let mut w = DgFunction::zeros(*v.mesh(), v.degree());
        self.apply_l_into(v, &mut w);
        Ok(w)
    }

    fn apply_l_into(&self, v: &DgFunction<T>, w: &mut DgFunction<T>) {
        let mesh = *v.mesh();
        let re = &self.reference;
        let np = re.n_modes();
        let factor = self.c * T::lit(2.0) / mesh.h();
        let right_trace = |cell: &[T]| cell.iter().zip(&re.right).map(|(&a, &b)| a * b).sum::<T>();
        for j in 0..mesh.n_cells() {
            let cell = v.cell(j);
            let own = right_trace(cell);
            let upwind = right_trace(v.cell(mesh.shift_index(j, -1)));
            let out = w.cell_mut(j);
            for m in 0..np {
                let vol: T = re.stiffness[m].iter().zip(cell).map(|(&s, &c)| s * c).sum();
                out[m] = factor * (vol - re.right[m] * own + re.left[m] * upwind);
            }
        }
    }

    fn check_cfl(&self, h: T, dt: T) -> Result<()> {
        let bound = self.max_dt(h);
        // Relative slack so that dt = cfl * h computed in floating point passes.
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
    pub fn step(&self, v: &DgFunction<T>, dt: T) -> Result<DgFunction<T>> {
        self.check_space(v)?;
        check_step(dt)?;
        self.check_cfl(v.mesh().h(), dt)?;
        let mut l = DgFunction::zeros(*v.mesh(), v.degree());

        // v1 = v + dt L(v)
        self.apply_l_into(v, &mut l);
        let mut v1 = v.clone();
        v1.axpby(T::one(), dt, &l);

        // v2 = 3/4 v + 1/4 v1 + dt/4 L(v1)
        self.apply_l_into(&v1, &mut l);
        let quarter = T::lit(0.25);
        let mut v2 = v1;
        v2.axpby(quarter, quarter * dt, &l);
        v2.axpby(T::one(), T::lit(0.75), v);

        // v3 = 1/3 v + 2/3 v2 + 2 dt/3 L(v2)
        self.apply_l_into(&v2, &mut l);
        let two_thirds = T::lit(2.0) / T::lit(3.0);
        let mut v3 = v2;
        v3.axpby(two_thirds, two_thirds * dt, &l);
        v3.axpby(T::one(), T::one() / T::lit(3.0), v);
        Ok(v3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::Mesh1D;
    use crate::projection::l2_project;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_fn(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DgFunction<f64> {
        let m = Mesh1D::new(-1.0, 1.0, n).unwrap();
        let c = (0..n * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DgFunction::from_coeffs(m, k, c).unwrap()
    }

    #[test]
    fn constants_are_annihilated() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let solver = RkdgSolver::new(1.3, 2).unwrap();
        for _ in 0..20 {
            let psi = random_fn(&mut rng, 9, 2);
            let one = DgFunction::constant(*psi.mesh(), 2, 1.0);
            assert!(solver.bilinear_h(&one, &psi).unwrap().abs() < 1e-12);
            assert!(solver.bilinear_h(&psi, &one).unwrap().abs() < 1e-12);
        }
        let one = DgFunction::constant(Mesh1D::new(-1.0, 1.0, 9).unwrap(), 2, 2.5);
        assert!(solver.apply_l(&one).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn riesz_representer_matches_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..=3 {
            let solver = RkdgSolver::new(0.7, k).unwrap();
            let v = random_fn(&mut rng, 6, k);
            let psi = random_fn(&mut rng, 6, k);
            let w = solver.apply_l(&v).unwrap();
            let lhs = w.inner(&psi).unwrap();
            let rhs = solver.bilinear_h(&v, &psi).unwrap();
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0), "k = {k}");
            assert!(w.inner(&v).unwrap() <= 1e-13);
        }
    }

    #[test]
    fn energy_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = 0.9;
        let solver = RkdgSolver::new(c, 2).unwrap();
        let phi = random_fn(&mut rng, 12, 2);
        let jumps: f64 = (0..12).map(|i| phi.jump(i).powi(2)).sum();
        let h = solver.bilinear_h(&phi, &phi).unwrap();
        assert!((h + 0.5 * c * jumps).abs() < 1e-12 * h.abs());
    }

    #[test]
    fn operator_approximates_derivative() {
        let errs: Vec<f64> = [20, 40, 80]
            .iter()
            .map(|&n| {
                let m = Mesh1D::new(-1.0, 1.0, n).unwrap();
                let v = l2_project(|x: f64| (PI * x).sin(), &m, 2, 5).unwrap();
                let w = RkdgSolver::new(1.0, 2).unwrap().apply_l(&v).unwrap();
                let samples = 20 * n;
                let s: f64 = (0..samples)
                    .map(|i| {
                        let x = -1.0 + 2.0 * (i as f64 + 0.5) / samples as f64;
                        (w.eval(x) + PI * (PI * x).cos()).powi(2)
                    })
                    .sum();
                (2.0 * s / samples as f64).sqrt()
            })
            .collect();
        let order = (errs[0] / errs[2]).log2() / 2.0;
        assert!(order >= 2.0, "{errs:?} -> {order}");
    }

    #[test]
    fn step_preserves_constants_and_mass() {
        let m = Mesh1D::new(-1.0_f64, 1.0, 16).unwrap();
        let solver = RkdgSolver::new(1.0, 2).unwrap();
        let c = DgFunction::constant(m, 2, 4.0);
        let next = solver.step(&c, 0.2 * m.h()).unwrap();
        for (a, b) in next.coeffs().iter().zip(c.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
        let mut v = l2_project(|x: f64| (x * 3.0).exp(), &m, 2, 5).unwrap();
        let mass = v.integral();
        for _ in 0..10 {
            v = solver.step(&v, 0.2 * m.h()).unwrap();
            assert!((v.integral() - mass).abs() < 1e-13 * mass.abs().max(1.0));
        }
    }

    #[test]
    fn strict_cfl() {
        let m = Mesh1D::new(-1.0_f64, 1.0, 10).unwrap();
        let v = DgFunction::constant(m, 1, 1.0);
        let strict = RkdgSolver::new(1.0, 1).unwrap().with_cfl(0.2, CflPolicy::Strict);
        assert!(matches!(strict.step(&v, 0.5 * m.h()), Err(Error::Cfl { .. })));
        assert!(strict.step(&v, 0.2 * m.h()).is_ok());
        let lax = RkdgSolver::new(1.0, 1).unwrap();
        assert!(lax.step(&v, 0.5 * m.h()).is_ok());
        assert!(RkdgSolver::new(-1.0, 1).is_err());
        let other = DgFunction::constant(m, 2, 1.0);
        assert_eq!(lax.step(&other, 0.01), Err(Error::MeshMismatch));
    }
}
