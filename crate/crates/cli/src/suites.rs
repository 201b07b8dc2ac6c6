//! Seeded invariant suites behind `proptest --suite NAME`.

use std::f64::consts::PI;

use obstacle_dg::dg::{DgFunction, Mesh1D, ReferenceElement, Side};
use obstacle_dg::exact::{example1_exact, example1_initial, DppOracle};
use obstacle_dg::metrics::l2_pseudo_norm_dg;
use obstacle_dg::obstacle::{nodal_values, obstacle_step, tilde_g_values, ObstacleSpec, ObstacleVariant, Transport};
use obstacle_dg::projection::{gauss_radau_project, l2_project, l2_project_shifted};
use obstacle_dg::quadrature::{gauss_legendre, legendre_value, MAX_POINTS};
use obstacle_dg::rkdg::RkdgSolver;
use obstacle_dg::sldg::sldg_step;
use obstacle_dg::solver2d::{
    nodal_values_2d, rkdg2d_obstacle_step, tilde_g_values_2d, DgFunction2D, Mesh2D, Obstacle2D, Rkdg2D,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SUITES: [&str; 8] = [
    "lemma51",
    "obstacle_bound",
    "oracle",
    "projection",
    "quadrature",
    "rkdg_structure",
    "sldg_structure",
    "solver2d",
];

#[derive(Debug, Default)]
pub struct SuiteReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

pub fn run(name: &str, seed: u64, cases: usize) -> Option<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteReport::default();
    match name {
        "lemma51" => lemma51(&mut rng, cases, &mut r),
        "obstacle_bound" => obstacle_bound(&mut rng, cases, &mut r),
        "oracle" => oracle(&mut rng, cases, &mut r),
        "projection" => projection(&mut rng, cases, &mut r),
        "quadrature" => quadrature(&mut rng, cases, &mut r),
        "rkdg_structure" => rkdg_structure(&mut rng, cases, &mut r),
        "sldg_structure" => sldg_structure(&mut rng, cases, &mut r),
        "solver2d" => solver2d(&mut rng, cases, &mut r),
        _ => return None,
    }
    Some(r)
}

fn random_dg(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DgFunction<f64> {
    let mesh = Mesh1D::new(-1.0, 1.0, n).expect("positive cell count");
    let c = (0..n * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DgFunction::from_coeffs(mesh, k, c).expect("shape matches")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn lemma51(rng: &mut ChaCha8Rng, cases: usize, r: &mut SuiteReport) {
    for _ in 0..cases {
        let (n, k, c) = (rng.gen_range(1..=64), rng.gen_range(0..=2), rng.gen_range(0.1..3.0));
        let phi = random_dg(rng, n, k);
        let psi = DgFunction::from_coeffs(*phi.mesh(), k, (0..n * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .expect("shape matches");
        let s = RkdgSolver::new(c, k).expect("positive speed");
        let h = |a: &DgFunction<f64>, b: &DgFunction<f64>| s.bilinear_h(a, b).expect("same space");
        let jumps: f64 = (0..n).map(|i| phi.jump(i).powi(2)).sum();
        let cross: f64 = (0..n).map(|i| phi.jump(i) * psi.jump(i)).sum();
        let (a, b) = (h(&phi, &phi), -0.5 * c * jumps);
        r.expect(rel(a, b) <= 1e-12, || format!("H(phi, phi) = {a}, -(c/2) sum jumps^2 = {b} (n={n}, k={k})"));
        let (a, b) = (h(&phi, &psi) + h(&psi, &phi), -c * cross);
        r.expect(rel(a, b) <= 1e-12, || format!("symmetric part {a} vs {b} (n={n}, k={k})"));
    }
}

fn obstacle_bound(rng: &mut ChaCha8Rng, cases: usize, r: &mut SuiteReport) {
    let n = 40;
    let h = 2.0 / n as f64;
    let mut u = l2_project(example1_initial, &Mesh1D::new(-1.0, 1.0, n).expect("valid mesh"), 2, 5).expect("projection");
    for _ in 0..cases {
        let variant = if rng.gen_bool(0.5) { ObstacleVariant::TwoPoint } else { ObstacleVariant::ExactWindow };
        let spec = ObstacleSpec::sin_pi().with_variant(variant);
        let c = rng.gen_range(0.2..2.0);
        let (transport, dt) = if rng.gen_bool(0.5) {
            (Transport::Sldg { c }, rng.gen_range(0.001..0.5))
        } else {
            (Transport::Rkdg(RkdgSolver::new(c, 2).expect("positive speed")), rng.gen_range(0.1..1.0) * 0.2 * h / c)
        };
        u = obstacle_step(&u, &transport, &spec, dt).expect("valid step");
        let g = tilde_g_values(&spec, u.mesh(), 2, c, dt).expect("valid table");
        let vals = nodal_values(&u).expect("valid function");
        let worst = vals.values().iter().zip(g.values()).map(|(v, g)| g - v).fold(f64::NEG_INFINITY, f64::max);
        r.expect(worst <= 1e-12, || format!("nodal value below g~ by {worst:.3e} ({variant:?}, dt={dt})"));
    }
}

fn oracle(rng: &mut ChaCha8Rng, cases: usize, r: &mut SuiteReport) {
    let spec = ObstacleSpec::sin_pi();
    let o = DppOracle::new(example1_initial, Some(spec.clone()), 1.0, (-1.0, 1.0)).expect("compatible data");
    for _ in 0..cases {
        let (t, x): (f64, f64) = (rng.gen_range(0.0..=1.0), rng.gen_range(-1.0..1.0));
        let (a, b) = (o.value(t, x), example1_exact(t, x).expect("t in range"));
        r.expect((a - b).abs() <= 1e-10, || format!("oracle {a} vs closed form {b} at t={t}, x={x}"));
        let s: f64 = rng.gen_range(0.0..1.0);
        let lhs = o.value(t + s, x);
        let rhs = o.value(t, x - s).max(spec.window_max(x, s));
        r.expect((lhs - rhs).abs() <= 1e-10, || format!("semigroup {lhs} vs {rhs} at t={t}, s={s}, x={x}"));
        r.expect(a >= (PI * x).sin() - 1e-15, || format!("u below g at t={t}, x={x}"));
    }
}

fn projection(rng: &mut ChaCha8Rng, cases: usize, r: &mut SuiteReport) {
    let rule = gauss_legendre::<f64>(16).expect("valid size");
    for _ in 0..cases {
        let (n, k) = (rng.gen_range(1..=32), rng.gen_range(0..=3));
        let (a, w) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..4.0));
        let f = move |x: f64| a * (w * x).sin() + x * x;
        let mesh = Mesh1D::new(-1.0, 1.0, n).expect("valid mesh");
        let p = l2_project(f, &mesh, k, 16).expect("projection");
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for m in 0..=k {
                let res = mesh.h() / 2.0
                    * rule.integrate(|xi| (f(mesh.to_physical(j, xi)) - p.eval_local(j, xi)) * legendre_value(m, xi));
                worst = worst.max(res.abs());
            }
        }
        r.expect(worst <= 1e-11, || format!("orthogonality residual {worst:.3e} (n={n}, k={k})"));
        let rad = gauss_radau_project(f, &mesh, k).expect("projection");
        let trace = (0..n)
            .map(|j| (rad.trace(j + 1, Side::Left) - f(mesh.cell_left(j) + mesh.h())).abs())
            .fold(0.0, f64::max);
        r.expect(trace <= 1e-12, || format!("Radau trace mismatch {trace:.3e}"));
        let v = random_dg(rng, n, k);
        let pseudo = l2_pseudo_norm_dg(&v).expect("valid function");
        r.expect(rel(pseudo, v.l2_norm()) <= 1e-12, || format!("l2 {pseudo} vs L2 {}", v.l2_norm()));
        let again = l2_project(|x| v.eval(x), &mesh, k, k + 1).expect("projection");
        let d = again.coeffs().iter().zip(v.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.expect(d <= 1e-12, || format!("projection not idempotent: {d:.3e}"));
    }
}

fn quadrature(rng: &mut ChaCha8Rng, cases: usize, r: &mut SuiteReport) {
    for _ in 0..cases {
        let n = rng.gen_range(1..=MAX_POINTS);
        let q = gauss_legendre::<f64>(n).expect("valid size");
        let deg = rng.gen_range(0..2 * n);
        let coef: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let got = q.integrate(|x| coef.iter().rev().fold(0.0, |acc, &c| acc * x + c));
        let want: f64 = coef
            .iter()
            .enumerate()
            .map(|(m, c)| if m % 2 == 1 { 0.0 } else { 2.0 * c / (m as f64 + 1.0) })
            .sum();
        r.expect((got - want).abs() <= 1e-12 * (1.0 + want.abs()) * deg.max(1) as f64, || {
            format!("{n}-point rule on degree {deg}: {got} vs {want}")
        });
    }
}

fn sldg_structure(rng: &mut ChaCha8Rng, cases: usize, r: &mut SuiteReport) {
    for _ in 0..cases {
        let (n, k) = (rng.gen_range(1..=48), rng.gen_range(0..=3));
        let v = random_dg(rng, n, k);
        let h = v.mesh().h();
        let mut w = v.clone();
        for _ in 0..n {
            w = sldg_step(&w, 1.0, h).expect("valid step");
        }
        let d = w.coeffs().iter().zip(v.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.expect(d <= 1e-12, || format!("full period of cell shifts off by {d:.3e}"));
        let (c, dt) = (rng.gen_range(0.1..3.0), rng.gen_range(0.001..1.0));
        let next = sldg_step(&v, c, dt).expect("valid step");
        r.expect(next.l2_norm() <= v.l2_norm() * (1.0 + 1e-14), || "shifted projection grew the norm".into());
        r.expect((next.integral() - v.integral()).abs() <= 1e-13, || {
            format!("mass drift {:.3e}", next.integral() - v.integral())
        });
        let back = l2_project_shifted(&l2_project_shifted(&v, dt).expect("shift"), -dt).expect("shift");
        r.expect(back.l2_norm() <= v.l2_norm() * (1.0 + 1e-14), || "round trip grew the norm".into());
    }
}

fn rkdg_structure(rng: &mut ChaCha8Rng, cases: usize, r: &mut SuiteReport) {
    for _ in 0..cases {
        let (n, k, c) = (rng.gen_range(2..=48), rng.gen_range(0..=2), rng.gen_range(0.1..3.0));
        let v = random_dg(rng, n, k);
        let s = RkdgSolver::new(c, k).expect("positive speed");
        let dt = rng.gen_range(0.05..=1.0) * s.max_dt(v.mesh().h());
        let next = s.step(&v, dt).expect("valid step");
        r.expect(next.l2_norm() <= v.l2_norm() * (1.0 + 1e-14), || {
            format!("norm grew from {} to {} (n={n}, k={k})", v.l2_norm(), next.l2_norm())
        });
        r.expect((next.integral() - v.integral()).abs() <= 1e-13, || {
            format!("mass drift {:.3e}", next.integral() - v.integral())
        });
        let konst = DgFunction::constant(*v.mesh(), k, 0.7);
        let kept = s.step(&konst, dt).expect("valid step");
        let d = kept.coeffs().iter().zip(konst.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.expect(d <= 1e-14, || format!("constant changed by {d:.3e}"));
    }
}

fn solver2d(rng: &mut ChaCha8Rng, cases: usize, r: &mut SuiteReport) {
    for _ in 0..cases {
        let (n, k) = (rng.gen_range(2..=8), rng.gen_range(0..=2));
        let (c1, c2) = (rng.gen_range(0.1..1.5), rng.gen_range(0.1..1.5));
        let mesh = Mesh2D::<f64>::square(n).expect("valid mesh");
        let c = (0..n * n * (k + 1) * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = DgFunction2D::from_coeffs(mesh, k, c).expect("shape matches");
        let s = Rkdg2D::new(c1, c2, k).expect("positive speeds");
        let h = s.bilinear_h(&v, &v).expect("same space");
        r.expect(h <= 1e-12, || format!("H(phi, phi) = {h} > 0"));
        let next = s.step(&v, s.max_dt(&mesh)).expect("valid step");
        r.expect((next.integral() - v.integral()).abs() <= 1e-12, || "2-D mass drift".into());
        let ob = Obstacle2D::sin_pi_diagonal();
        let dt = s.max_dt(&mesh);
        let bounded = rkdg2d_obstacle_step(&v, &s, &ob, dt).expect("valid step");
        let g = tilde_g_values_2d(&ob, &mesh, k, (c1 * dt, c2 * dt)).expect("valid table");
        let vals = nodal_values_2d(&bounded, &ReferenceElement::new(k).expect("valid degree"));
        let worst = vals.iter().zip(&g).map(|(v, g)| g - v).fold(f64::NEG_INFINITY, f64::max);
        r.expect(worst <= 1e-12, || format!("2-D nodal value below g~ by {worst:.3e}"));
    }
}
