//! Small dense helpers shared by the numerical modules.

use crate::{CMat, C64};

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub(crate) fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Largest singular value, computed from the Hermitian matrix `M†M`.
pub(crate) fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    let gram = if m.nrows() >= m.ncols() {
        m.adjoint() * m
    } else {
        m * m.adjoint()
    };
    let gram = hermitize(&gram);
    let top = gram
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, &v| acc.max(v));
    top.max(0.0).sqrt()
}

pub(crate) fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Diagonal of `A·B` without forming the product.
pub(crate) fn diag_of_product(a: &CMat, b: &CMat) -> Vec<C64> {
    let n = a.nrows();
    let bt = b.transpose();
    (0..n)
        .map(|i| {
            a.row(i)
                .iter()
                .zip(bt.row(i).iter())
                .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x * y)
        })
        .collect()
}

pub(crate) fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    // (P_n(x), P_n'(x))
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
    };
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `M = Q T Q†` with `T` Hermitian tridiagonal, from a Householder
/// reduction. `T` is stored by its three bands.
pub(crate) struct Tridiagonal {
    pub q: CMat,
    diag: Vec<C64>,
    lower: Vec<C64>,
    upper: Vec<C64>,
}

impl Tridiagonal {
    /// `None` when `Q†MQ` is not banded to `1e-10·max|M|`.
    pub fn new(m: &CMat) -> Option<Self> {
        let n = m.nrows();
        if n < 2 {
            return None;
        }
        let h = hermitize(m);
        let q = nalgebra::SymmetricTridiagonal::new(h.clone()).q();
        let t = q.adjoint() * &h * &q;
        let tol = 1e-10 * max_abs(&h).max(1.0);
        let off_band = (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .filter(|&(i, j)| i.abs_diff(j) > 1)
            .fold(0.0_f64, |acc, (i, j)| acc.max(t[(i, j)].norm()));
        if off_band > tol {
            return None;
        }
        Some(Tridiagonal {
            diag: (0..n).map(|i| t[(i, i)]).collect(),
            lower: (0..n - 1).map(|i| t[(i + 1, i)]).collect(),
            upper: (0..n - 1).map(|i| t[(i, i + 1)]).collect(),
            q,
        })
    }

    /// Full inverse of `z − T` by elimination without pivoting, `O(n²)`;
    /// `None` on a vanishing pivot.
    pub fn resolvent(&self, z: C64) -> Option<CMat> {
        let n = self.diag.len();
        // z − T = L U with unit lower L (multipliers l) and upper U with
        // diagonal u and superdiagonal −upper
        let mut u = vec![C64::new(0.0, 0.0); n];
        let mut l = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
        u[0] = z - self.diag[0];
        for i in 1..n {
            if u[i - 1].norm() < 1e-300 {
                return None;
            }
            l[i - 1] = -self.lower[i - 1] / u[i - 1];
            u[i] = (z - self.diag[i]) + l[i - 1] * self.upper[i - 1];
        }
        if u[n - 1].norm() < 1e-300 {
            return None;
        }
        let mut inv = CMat::zeros(n, n);
        let mut y = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            // L y = e_j: zero above j
            y[..j].fill(C64::new(0.0, 0.0));
            y[j] = C64::new(1.0, 0.0);
            for i in j + 1..n {
                y[i] = -l[i - 1] * y[i - 1];
            }
            // U x = y
            let mut col = inv.column_mut(j);
            col[n - 1] = y[n - 1] / u[n - 1];
            for i in (0..n - 1).rev() {
                col[i] = (y[i] + self.upper[i] * col[i + 1]) / u[i];
            }
        }
        Some(inv)
    }
}

/// `sqrt(‖A‖₁‖A‖∞)`, an upper bound for the spectral norm.
pub(crate) fn norm_bound(a: &CMat) -> f64 {
    let col = a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let row = a.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    (col * row).sqrt()
}
