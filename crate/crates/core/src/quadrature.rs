//! Orthonormal Legendre basis and Gauss-Legendre rules on `[-1, 1]`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported Gauss-Legendre point count.
pub const MAX_POINTS: usize = 32;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITERS: usize = 100;

/// Gauss-Legendre rule on the reference element.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule<T> {
    /// Abscissae, strictly increasing and symmetric about zero.
    pub points: Vec<T>,
    /// Positive weights summing to 2.
    pub weights: Vec<T>,
    /// Highest monomial degree integrated exactly (`2n - 1`).
    pub exactness: usize,
}

impl<T: Real> QuadRule<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over `[-1, 1]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integrates `f` over `[lo, hi]` through the affine map.
    pub fn integrate_on<F: FnMut(T) -> T>(&self, lo: T, hi: T, mut f: F) -> T {
        let half = (hi - lo) * T::lit(0.5);
        let mid = (hi + lo) * T::lit(0.5);
        half * self.integrate(|xi| f(mid + half * xi))
    }
}

/// Legendre polynomial `P_n` and its derivative at `x`, in double precision.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 1..n {
        let m = m as f64;
        let next = ((2.0 * m + 1.0) * x * p - m * p_prev) / (m + 1.0);
        p_prev = p;
        p = next;
    }
    let nf = n as f64;
    let dp = nf * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// The `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Nodes are Newton iterates seeded by the Chebyshev-angle approximation and
/// are computed in double precision before conversion to `T`.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<QuadRule<T>> {
    if n == 0 || n > MAX_POINTS {
        return Err(Error::QuadratureSize(n));
    }
    let mut nodes = vec![0.0_f64; n];
    let mut weights = vec![0.0_f64; n];
    let half = n / 2;
    for i in 0..half {
        // Largest roots first; mirrored below.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (d * d);
    }
    Ok(QuadRule {
        points: nodes.into_iter().map(T::lit).collect(),
        weights: weights.into_iter().map(T::lit).collect(),
        exactness: 2 * n - 1,
    })
}

/// Orthonormal Legendre polynomial `sqrt((2m+1)/2) P_m(xi)`.
pub fn legendre_value<T: Real>(m: usize, xi: T) -> T {
    let mut p_prev = T::one();
    let mut p = xi;
    let p_m = match m {
        0 => T::one(),
        _ => {
            for j in 1..m {
                let jf = T::from_usize_lossy(j);
                let next = ((jf + jf + T::one()) * xi * p - jf * p_prev) / (jf + T::one());
                p_prev = p;
                p = next;
            }
            p
        }
    };
    p_m * normalization(m)
}

/// Derivative of [`legendre_value`] with respect to `xi`.
///
/// Uses `P'_{m+1} = P'_{m-1} + (2m+1) P_m`, which stays exact at the
/// endpoints `xi = +-1`.
pub fn legendre_derivative<T: Real>(m: usize, xi: T) -> T {
    if m == 0 {
        return T::zero();
    }
    // (P_{j-1}, P_j) and (P'_{j-1}, P'_j)
    let (mut p_prev, mut p) = (T::one(), xi);
    let (mut d_prev, mut d) = (T::zero(), T::one());
    for j in 1..m {
        let jf = T::from_usize_lossy(j);
        let two_j1 = jf + jf + T::one();
        let p_next = (two_j1 * xi * p - jf * p_prev) / (jf + T::one());
        let d_next = d_prev + two_j1 * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    d * normalization(m)
}

/// Fills `out[m]` with the orthonormal basis values `phi_m(xi)`, `m < out.len()`.
pub fn legendre_values_into<T: Real>(xi: T, out: &mut [T]) {
    let mut p_prev = T::one();
    let mut p = xi;
    for (m, slot) in out.iter_mut().enumerate() {
        let val = match m {
            0 => T::one(),
            1 => xi,
            _ => {
                let jf = T::from_usize_lossy(m - 1);
                let next = ((jf + jf + T::one()) * xi * p - jf * p_prev) / (jf + T::one());
                p_prev = p;
                p = next;
                next
            }
        };
        *slot = val * normalization(m);
    }
}

#[inline]
fn normalization<T: Real>(m: usize) -> T {
    (T::from_usize_lossy(2 * m + 1) * T::lit(0.5)).sqrt()
}
