//! Error norms, the Gauss-node pseudo-norm and convergence-order fits.

use std::io::{self, Write};

use crate::dg::{DgFunction, Mesh1D};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

/// Default number of error samples per cell.
pub const DEFAULT_SAMPLES_PER_CELL: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms<T> {
    pub l1: T,
    pub l2: T,
    pub linf: T,
}

impl<T: Real> ErrorNorms<T> {
    pub fn to_f64(self) -> ErrorNorms<f64> {
        ErrorNorms {
            l1: self.l1.as_f64(),
            l2: self.l2.as_f64(),
            linf: self.linf.as_f64(),
        }
    }
}

/// Accumulates sampled errors into L1/L2/Linf with the domain measure.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NormAccumulator<T> {
    sum_abs: T,
    sum_sq: T,
    max_abs: T,
    count: usize,
}

impl<T: Real> NormAccumulator<T> {
    pub(crate) fn new() -> Self {
        Self {
            sum_abs: T::zero(),
            sum_sq: T::zero(),
            max_abs: T::zero(),
            count: 0,
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, e: T) {
        let a = e.abs();
        self.sum_abs += a;
        self.sum_sq += a * a;
        self.max_abs = self.max_abs.max(a);
        self.count += 1;
    }

    pub(crate) fn merge(mut self, other: Self) -> Self {
        self.sum_abs += other.sum_abs;
        self.sum_sq += other.sum_sq;
        self.max_abs = self.max_abs.max(other.max_abs);
        self.count += other.count;
        self
    }

    pub(crate) fn finish(self, measure: T) -> ErrorNorms<T> {
        let n = T::from_usize_lossy(self.count.max(1));
        ErrorNorms {
            l1: self.sum_abs / n * measure,
            l2: (self.sum_sq / n * measure).sqrt(),
            linf: self.max_abs,
        }
    }
}

/// Errors of `u_h` against `exact` on `per_cell` uniform interior samples
/// `(i + 1/2) / M` of every cell.
pub fn grid_error<T, F>(u_h: &DgFunction<T>, exact: F, per_cell: usize) -> Result<ErrorNorms<T>>
where
    T: Real,
    F: Fn(T) -> T + Sync,
{
    if per_cell < 2 {
        return Err(Error::InvalidArgument(format!(
            "error sampling needs at least 2 points per cell, got {per_cell}"
        )));
    }
    use rayon::prelude::*;
    let mesh = u_h.mesh();
    let m = T::from_usize_lossy(per_cell);
    let acc = (0..mesh.n_cells())
        .into_par_iter()
        .map(|j| {
            let mut acc = NormAccumulator::new();
            for i in 0..per_cell {
                let xi = (T::from_usize_lossy(i) + T::lit(0.5)) / m * T::lit(2.0) - T::one();
                let x = mesh.to_physical(j, xi);
                acc.push(u_h.eval_local(j, xi) - exact(x));
            }
            acc
        })
        // Folded in cell order so the result does not depend on scheduling.
        .collect::<Vec<_>>()
        .into_iter()
        .fold(NormAccumulator::new(), NormAccumulator::merge);
    Ok(acc.finish(mesh.length()))
}

/// `(sum_j sum_a w_a |f(x_a)|^2 h)^(1/2)` over the `(k + 1)`-point Gauss nodes,
/// with weights normalized to sum to one per cell.
pub fn l2_pseudo_norm<T, F>(f: F, mesh: &Mesh1D<T>, k: usize) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let rule = gauss_legendre::<T>(k + 1)?;
    let half = T::lit(0.5);
    let mut s = T::zero();
    for j in 0..mesh.n_cells() {
        for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
            let v = f(mesh.to_physical(j, xi));
            s += w * half * v * v * mesh.h();
        }
    }
    Ok(s.sqrt())
}

/// [`l2_pseudo_norm`] of a DG function on its own mesh and degree.
pub fn l2_pseudo_norm_dg<T: Real>(f: &DgFunction<T>) -> Result<T> {
    l2_pseudo_norm(|x| f.eval(x), f.mesh(), f.degree())
}

/// Slope of the least-squares line through `(log h, log e)`.
pub fn least_squares_order(rows: &[(f64, f64)]) -> Result<f64> {
    if rows.len() < 2 {
        return Err(Error::InvalidFit(format!("{} row(s)", rows.len())));
    }
    if let Some(&(h, e)) = rows.iter().find(|(h, e)| !(*h > 0.0) || !(*e > 0.0)) {
        return Err(Error::InvalidFit(format!("non-positive entry (h = {h}, e = {e})")));
    }
    let n = rows.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidFit("all mesh sizes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Expected projection rate `min(min(k, l) + 1, 3/2)` for Lipschitz data that
/// is piecewise `C^(l+1)` with isolated kinks.
pub fn expected_rate(k: usize, smoothness: usize) -> f64 {
    ((k.min(smoothness) + 1) as f64).min(1.5)
}

/// One resolution of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub h: f64,
    /// Time levels strictly between `0` and `T`.
    pub steps: usize,
    pub errors: ErrorNorms<f64>,
    /// Observed orders against the previous row, in L1/L2/Linf order.
    pub orders: Option<[f64; 3]>,
}

/// Error table with per-row and least-squares orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ReportRow>,
    /// Least-squares slopes (L1, L2, Linf); `None` with fewer than two rows.
    pub orders_ls: Option<[f64; 3]>,
}

impl ErrorReport {
    /// Sorts by resolution and fills in the order columns.
    pub fn new(rows: impl IntoIterator<Item = (usize, f64, usize, ErrorNorms<f64>)>) -> Result<Self> {
        let mut rows: Vec<ReportRow> = rows
            .into_iter()
            .map(|(n, h, steps, errors)| ReportRow {
                n,
                h,
                steps,
                errors,
                orders: None,
            })
            .collect();
        rows.sort_by_key(|r| r.n);
        for i in 1..rows.len() {
            let (prev, cur) = (rows[i - 1], rows[i]);
            let rate = |a: f64, b: f64| (a / b).ln() / (prev.h / cur.h).ln();
            rows[i].orders = Some([
                rate(prev.errors.l1, cur.errors.l1),
                rate(prev.errors.l2, cur.errors.l2),
                rate(prev.errors.linf, cur.errors.linf),
            ]);
        }
        let orders_ls = if rows.len() >= 2 {
            let fit = |pick: fn(&ErrorNorms<f64>) -> f64| {
                least_squares_order(&rows.iter().map(|r| (r.h, pick(&r.errors))).collect::<Vec<_>>())
            };
            Some([fit(|e| e.l1)?, fit(|e| e.l2)?, fit(|e| e.linf)?])
        } else {
            None
        };
        Ok(Self { rows, orders_ls })
    }

    /// Writes the table as CSV, preceded by `# key = value` comment lines.
    pub fn write_csv<W: Write>(&self, mut out: W, config: &[(String, String)]) -> io::Result<()> {
        for (k, v) in config {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "N,steps,L1_error,L1_order,L2_error,L2_order,Linf_error,Linf_order")?;
        for r in &self.rows {
            let o = |i: usize| r.orders.map_or_else(|| "-".to_string(), |o| format!("{:.2}", o[i]));
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.n,
                r.steps,
                sci3(r.errors.l1),
                o(0),
                sci3(r.errors.l2),
                o(1),
                sci3(r.errors.linf),
                o(2)
            )?;
        }
        if let Some([a, b, c]) = self.orders_ls {
            writeln!(out, "# least_squares_order L1 = {a:.2}, L2 = {b:.2}, Linf = {c:.2}")?;
        }
        Ok(())
    }
}

/// Scientific notation with three significant digits and a signed
/// two-digit exponent, e.g. `2.68E-04`.
pub fn sci3(x: f64) -> String {
    if x == 0.0 {
        return "0.00E+00".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.2E}");
    let (mantissa, exp) = s.split_once('E').expect("formatted with exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::l2_project;
    use std::f64::consts::PI;

    #[test]
    fn constant_offset_error() {
        let m = Mesh1D::new(0.0_f64, 1.0, 8).unwrap();
        let u = l2_project(|x: f64| x * x, &m, 2, 5).unwrap();
        let e = grid_error(&u, |x| x * x - 0.1, 50).unwrap();
        for v in [e.l1, e.l2, e.linf] {
            assert!((v - 0.1).abs() < 1e-12);
        }
        let z = grid_error(&u, |x| u.eval(x), 7).unwrap();
        assert!(z.l1 < 1e-14 && z.l2 < 1e-14 && z.linf < 1e-14);
        assert!(grid_error(&u, |x| x, 1).is_err());
    }

    #[test]
    fn error_estimate_is_stable_in_m() {
        let m = Mesh1D::new(0.0_f64, 1.0, 10).unwrap();
        let u = DgFunction::constant(m, 1, 0.0);
        let exact = |x: f64| (x - 0.37).abs();
        let a = grid_error(&u, exact, 50).unwrap();
        let b = grid_error(&u, exact, 100).unwrap();
        assert!(((a.l1 - b.l1) / b.l1).abs() < 0.01);
    }

    #[test]
    fn pseudo_norm() {
        let m = Mesh1D::new(0.0_f64, 1.0, 5).unwrap();
        assert!((l2_pseudo_norm(|_| 1.0, &m, 2).unwrap() - 1.0).abs() < 1e-15);
        let v = DgFunction::from_coeffs(m, 2, (0..15).map(|i| (i as f64 * 0.7).sin()).collect()).unwrap();
        assert!((l2_pseudo_norm_dg(&v).unwrap() - v.l2_norm()).abs() < 1e-12);
        let m16 = Mesh1D::new(0.0_f64, 1.0, 16).unwrap();
        let s = l2_pseudo_norm(|x| (PI * x).sin(), &m16, 2).unwrap();
        assert!((s - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn least_squares() {
        let rows: Vec<_> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&h| (h, 3.0 * h * h)).collect();
        assert!((least_squares_order(&rows).unwrap() - 2.0).abs() < 1e-12);
        let flat: Vec<_> = [0.1, 0.05].iter().map(|&h| (h, 0.4)).collect();
        assert!(least_squares_order(&flat).unwrap().abs() < 1e-12);
        assert!(least_squares_order(&[(0.1, 1.0)]).is_err());
        assert!(least_squares_order(&[(0.1, 1.0), (0.05, 0.0)]).is_err());
    }

    #[test]
    fn reference_l1_column_fit() {
        let n = [80, 160, 320, 640, 1280, 2560, 5120, 10240];
        let l1 = [2.68e-4, 6.47e-5, 1.96e-5, 6.40e-6, 2.10e-6, 6.14e-7, 1.98e-7, 6.19e-8];
        let rows: Vec<_> = n.iter().zip(l1).map(|(&n, e)| (2.0 / n as f64, e)).collect();
        let p = least_squares_order(&rows).unwrap();
        assert!((p - 1.75).abs() < 0.05, "{p}");
    }

    #[test]
    fn report_orders_and_csv() {
        let norms = |e: f64| ErrorNorms { l1: e, l2: 2.0 * e, linf: 4.0 * e };
        let report = ErrorReport::new([
            (40, 0.05, 10, norms(1e-4)),
            (20, 0.1, 5, norms(8e-4)),
            (80, 0.025, 20, norms(1.25e-5)),
        ])
        .unwrap();
        assert_eq!(report.rows[0].n, 20);
        assert!(report.rows[0].orders.is_none());
        let o = report.rows[1].orders.unwrap();
        assert!((o[0] - (8e-4f64 / 1e-4).log2()).abs() < 1e-12);
        assert!((report.orders_ls.unwrap()[0] - 3.0).abs() < 1e-12);
        let mut buf = Vec::new();
        report.write_csv(&mut buf, &[("scheme".into(), "rkdg".into())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# scheme = rkdg\nN,steps,"));
        assert!(text.contains("20,5,8.00E-04,-,1.60E-03,-,3.20E-03,-"));
        assert!(text.contains("40,10,1.00E-04,3.00,"));
    }

    #[test]
    fn sci3_format() {
        assert_eq!(sci3(2.68e-4), "2.68E-04");
        assert_eq!(sci3(6.4e-6), "6.40E-06");
        assert_eq!(sci3(12345.0), "1.23E+04");
        assert_eq!(sci3(0.0), "0.00E+00");
    }

    #[test]
    fn rate_helper() {
        assert_eq!(expected_rate(2, 1), 1.5);
        assert_eq!(expected_rate(0, 3), 1.0);
    }
}
