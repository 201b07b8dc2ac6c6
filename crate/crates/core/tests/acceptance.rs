//! Acceptance criteria. Runs as a plain binary and prints one line per
//! criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use obstacle_dg::dg::{DgFunction, Mesh1D, Side};
use obstacle_dg::exact::{example1_exact, example1_initial, DppOracle};
use obstacle_dg::metrics::{l2_pseudo_norm_dg, least_squares_order, ErrorReport};
use obstacle_dg::obstacle::{nodal_values, ObstacleSpec, ObstacleVariant};
use obstacle_dg::projection::{gauss_radau_project, l2_project};
use obstacle_dg::quadrature::{gauss_legendre, legendre_value};
use obstacle_dg::rkdg::RkdgSolver;
use obstacle_dg::schedule::{StepRule, TimeSchedule};
use obstacle_dg::sldg::sldg_step;
use obstacle_dg::study::{example1_study, Problem1D, Problem2D, Scheme, Study1D, Study2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240517;
const GRIDS: [usize; 4] = [80, 160, 320, 640];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_factor(got: f64, want: f64, factor: f64) -> bool {
    got <= want * factor && got >= want / factor
}

fn l1_column(rep: &ErrorReport) -> Vec<f64> {
    rep.rows.iter().map(|r| r.errors.l1).collect()
}

fn fmt_column(v: &[f64]) -> String {
    v.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ")
}

fn table_check(rep: &ErrorReport, reference: &[f64]) -> (bool, String) {
    let got = l1_column(rep);
    let ok = got.iter().zip(reference).all(|(&g, &p)| within_factor(g, p, 3.0));
    (ok, format!("L1 [{}] vs [{}]", fmt_column(&got), fmt_column(reference)))
}

fn table1() -> Outcome {
    let s = example1_study(Scheme::Rkdg, TimeSchedule::DtEqFracH { frac: 0.2 }, ObstacleVariant::TwoPoint);
    let rep = s.convergence(&GRIDS).map_err(|e| e.to_string())?;
    let (ok, mut detail) = table_check(&rep, &[2.68e-4, 6.47e-5, 1.96e-5, 6.40e-6]);
    let [o1, o2, oi] = rep.orders_ls.expect("four rows");
    detail += &format!("; LS orders {o1:.2}/{o2:.2}/{oi:.2}");
    check(ok && o1 >= 1.4 && o2 >= 1.0 && oi >= 0.6, detail)
}

fn table2() -> Outcome {
    let s = example1_study(Scheme::Sldg, TimeSchedule::DtEqFracH { frac: 0.5 }, ObstacleVariant::TwoPoint);
    let rep = s.convergence(&GRIDS).map_err(|e| e.to_string())?;
    let (ok, mut detail) = table_check(&rep, &[1.73e-4, 2.38e-5, 1.56e-5, 4.73e-6]);
    let o1 = rep.orders_ls.expect("four rows")[0];
    detail += &format!("; LS L1 order {o1:.2}");
    check(ok && o1 >= 1.3, detail)
}

fn table3() -> Outcome {
    let schedule = TimeSchedule::StepCountRule {
        rule: StepRule::PaperTable3,
    };
    let s = example1_study(Scheme::Sldg, schedule, ObstacleVariant::TwoPoint);
    let rep = s.convergence(&GRIDS).map_err(|e| e.to_string())?;
    let steps: Vec<usize> = rep.rows.iter().map(|r| r.steps).collect();
    let (ok, mut detail) = table_check(&rep, &[6.04e-5, 1.99e-5, 7.95e-6, 2.50e-6]);
    let o1 = rep.orders_ls.expect("four rows")[0];
    detail += &format!("; steps {steps:?}; LS L1 order {o1:.2}");
    check(ok && steps == [34, 52, 79, 121] && o1 >= 1.2, detail)
}

fn table4() -> Outcome {
    let s = Study2D::new(Problem2D::example2(), 0.5);
    let rep = s.convergence(&[10, 20, 40]).map_err(|e| e.to_string())?;
    let (ok, mut detail) = table_check(&rep, &[2.25e-2, 6.70e-3, 1.70e-3]);
    let o1 = rep.orders_ls.expect("three rows")[0];
    detail += &format!("; LS L1 order {o1:.2}");
    check(ok && o1 >= 1.5, detail)
}

fn random_dg(rng: &mut ChaCha8Rng, mesh: Mesh1D<f64>, k: usize) -> DgFunction<f64> {
    let c = (0..mesh.n_cells() * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DgFunction::from_coeffs(mesh, k, c).expect("shape matches")
}

fn form_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=64);
        let k = rng.gen_range(0..=2);
        let c = rng.gen_range(0.1..3.0);
        let mesh = Mesh1D::new(-1.0, 1.0, n).map_err(|e| e.to_string())?;
        let (phi, psi) = (random_dg(&mut rng, mesh, k), random_dg(&mut rng, mesh, k));
        let solver = RkdgSolver::new(c, k).map_err(|e| e.to_string())?;
        let h = |a: &DgFunction<f64>, b: &DgFunction<f64>| solver.bilinear_h(a, b).expect("same space");
        let jumps: f64 = (0..n).map(|i| phi.jump(i) * phi.jump(i)).sum();
        let cross: f64 = (0..n).map(|i| phi.jump(i) * psi.jump(i)).sum();
        let (lhs1, rhs1) = (h(&phi, &phi), -0.5 * c * jumps);
        let (lhs2, rhs2) = (h(&phi, &psi) + h(&psi, &phi), -c * cross);
        worst = worst
            .max((lhs1 - rhs1).abs() / rhs1.abs().max(1.0))
            .max((lhs2 - rhs2).abs() / rhs2.abs().max(1.0));
    }
    check(worst <= 1e-12, format!("max relative defect {worst:.2e} over 1000 pairs"))
}

fn projection() -> Outcome {
    let f = |x: f64| (PI * x).sin() + (2.0 * x).exp() * 0.3 + (x - 0.1).abs();
    let rule = gauss_legendre::<f64>(20).map_err(|e| e.to_string())?;
    let mut orth: f64 = 0.0;
    let mut radau: f64 = 0.0;
    let mut parseval: f64 = 0.0;
    for &n in &[7usize, 20, 64] {
        for k in 0..=3 {
            let mesh = Mesh1D::new(-1.0, 1.0, n).map_err(|e| e.to_string())?;
            let p = l2_project(f, &mesh, k, 20).map_err(|e| e.to_string())?;
            for j in 0..n {
                for m in 0..=k {
                    let r = mesh.h() / 2.0
                        * rule.integrate(|xi| (f(mesh.to_physical(j, xi)) - p.eval_local(j, xi)) * legendre_value(m, xi));
                    orth = orth.max(r.abs());
                }
            }
            let g = |x: f64| (PI * x).cos() + x * x;
            let r = gauss_radau_project(g, &mesh, k).map_err(|e| e.to_string())?;
            for j in 0..n {
                radau = radau.max((r.trace(j + 1, Side::Left) - g(mesh.cell_left(j) + mesh.h())).abs());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + n as u64 + k as u64);
            let v = random_dg(&mut rng, mesh, k);
            let pseudo = l2_pseudo_norm_dg(&v).map_err(|e| e.to_string())?;
            parseval = parseval.max((pseudo - v.l2_norm()).abs() / v.l2_norm());
        }
    }
    let detail = format!("orthogonality {orth:.1e}, Radau trace {radau:.1e}, l2=L2 {parseval:.1e}");
    check(orth <= 1e-11 && radau <= 1e-12 && parseval <= 1e-12, detail)
}

fn structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mesh = Mesh1D::new(-1.0, 1.0, 32).map_err(|e| e.to_string())?;
    let v0 = l2_project(|x: f64| (PI * x).sin() + 0.5 * (3.0 * PI * x).cos(), &mesh, 2, 5).map_err(|e| e.to_string())?;
    let mut v = v0.clone();
    for _ in 0..32 {
        v = sldg_step(&v, 1.0, mesh.h()).map_err(|e| e.to_string())?;
    }
    let period: f64 = v.coeffs().iter().zip(v0.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut sldg_growth: f64 = 0.0;
    let mut sldg_mass: f64 = 0.0;
    let mut rk_growth: f64 = 0.0;
    let mut rk_mass: f64 = 0.0;
    let rk = RkdgSolver::new(1.0, 2).map_err(|e| e.to_string())?;
    let mut s = random_dg(&mut rng, mesh, 2);
    let mut r = s.clone();
    for _ in 0..1000 {
        let dt = rng.gen_range(0.001..0.7);
        let next = sldg_step(&s, 1.0, dt).map_err(|e| e.to_string())?;
        sldg_growth = sldg_growth.max(next.l2_norm() - s.l2_norm());
        sldg_mass = sldg_mass.max((next.integral() - s.integral()).abs());
        s = next;

        let dt = rng.gen_range(0.1..=1.0) * rk.max_dt(mesh.h());
        let next = rk.step(&r, dt).map_err(|e| e.to_string())?;
        rk_growth = rk_growth.max(next.l2_norm() - r.l2_norm());
        rk_mass = rk_mass.max((next.integral() - r.integral()).abs());
        r = next;
    }
    let detail = format!(
        "period {period:.1e}; SLDG growth {sldg_growth:.1e} mass {sldg_mass:.1e}; RKDG growth {rk_growth:.1e} mass {rk_mass:.1e}"
    );
    check(
        period <= 1e-12 && sldg_growth <= 1e-14 && sldg_mass <= 1e-13 && rk_growth <= 1e-14 && rk_mass <= 1e-13,
        detail,
    )
}

fn obstacle_suite() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for scheme in [Scheme::Sldg, Scheme::Rkdg] {
        for variant in [ObstacleVariant::TwoPoint, ObstacleVariant::ExactWindow] {
            let frac = if scheme == Scheme::Rkdg { 0.2 } else { 0.5 };
            let mut s = example1_study(scheme, TimeSchedule::DtEqFracH { frac }, variant);
            s.t_final = 1.0;
            s.run_with(160, |u, table| {
                let table = table.expect("obstacle present");
                let vals = nodal_values(u).expect("valid function");
                for (v, g) in vals.values().iter().zip(table.values()) {
                    worst = worst.max(g - v);
                }
            })
            .map_err(|e| e.to_string())?;
        }
    }
    let exact = ObstacleSpec::sin_pi().with_variant(ObstacleVariant::ExactWindow);
    let two = ObstacleSpec::sin_pi().with_variant(ObstacleVariant::TwoPoint);
    let mut ratio: f64 = 0.0;
    for dt in [0.05, 0.01, 0.002] {
        let gap = (0..=20_000)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / 20_000.0;
                (exact.tilde(x, dt) - two.tilde(x, dt)).abs()
            })
            .fold(0.0, f64::max);
        ratio = ratio.max(gap / (dt * dt));
    }
    let detail = format!("max (g~ - u_h) at nodes {worst:.1e}; max gap / dt^2 {ratio:.2}");
    check(worst <= 1e-12 && ratio <= 5.0, detail)
}

fn smooth_orders() -> Outcome {
    let grids = [20, 40, 80, 160];
    let fit = |s: &Study1D| -> Result<f64, String> {
        let pts = grids
            .iter()
            .map(|&n| {
                let e = s.run(n).map_err(|e| e.to_string())?.errors.expect("exact solution");
                Ok((2.0 / n as f64, e.l2))
            })
            .collect::<Result<Vec<_>, String>>()?;
        least_squares_order(&pts).map_err(|e| e.to_string())
    };
    let rk = Study1D::new(Problem1D::sine_advection(1.0), Scheme::Rkdg, 0.5, TimeSchedule::DtEqFracH { frac: 0.2 });
    let sl = Study1D::new(Problem1D::sine_advection(1.0), Scheme::Sldg, 0.5, TimeSchedule::StepCount { steps: 7 });
    let (o_rk, o_sl) = (fit(&rk)?, fit(&sl)?);
    check(
        (2.7..=3.3).contains(&o_rk) && o_sl >= 2.5,
        format!("RKDG L2 order {o_rk:.2}; SLDG fixed-step L2 order {o_sl:.2}"),
    )
}

fn oracle() -> Outcome {
    let oracle = DppOracle::new(example1_initial, Some(ObstacleSpec::sin_pi()), 1.0, (-1.0, 1.0)).map_err(|e| e.to_string())?;
    let mut grid: f64 = 0.0;
    for i in 0..200 {
        let t = i as f64 / 199.0;
        for j in 0..200 {
            let x = -1.0 + 2.0 * j as f64 / 199.0;
            let e = example1_exact(t, x).map_err(|e| e.to_string())?;
            grid = grid.max((oracle.value(t, x) - e).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let spec = ObstacleSpec::sin_pi();
    let mut semigroup: f64 = 0.0;
    for _ in 0..1000 {
        let t = rng.gen_range(0.0..1.0);
        let s = rng.gen_range(0.0..1.0);
        let x = rng.gen_range(-1.0..1.0);
        let lhs = oracle.value(t + s, x);
        let rhs = oracle.value(t, x - s).max(spec.window_max(x, s));
        semigroup = semigroup.max((lhs - rhs).abs());
    }
    check(
        grid <= 1e-10 && semigroup <= 1e-10,
        format!("closed form vs oracle {grid:.1e}; semigroup {semigroup:.1e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("table 1 (RKDG, dt = 0.2h)", table1),
        ("table 2 (SLDG, dt = h/2)", table2),
        ("table 3 (SLDG, dt ~ h^0.6)", table3),
        ("table 4 (2-D RKDG, Q2)", table4),
        ("upwind form identities", form_identities),
        ("projection properties", projection),
        ("transport structure", structure),
        ("obstacle bound and g~ gap", obstacle_suite),
        ("smooth-problem orders", smooth_orders),
        ("oracle cross-validation", oracle),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.1}s]", i + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
