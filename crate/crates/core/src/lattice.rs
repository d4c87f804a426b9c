//! Finite-window realization of the representation
//! `π_ω(f u^s)|x⟩ = e^{i sᵀΘx} f(ϱ(x+s)ω)|x+s⟩`.
//!
//! Sites of a window are ordered lexicographically with the first axis most
//! significant; the matrix index of `(site, orbital)` is
//! `site_index · n + orbital`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::disorder::{self, DisorderConfig};
use crate::error::{NcError, Result};
use crate::linalg;
use crate::models::{build_hamiltonian, ModelSpec};
use crate::twist::{NcPoly, TwistMatrix};
use crate::{CMat, Point, C64};

/// Tolerance for `Θ_{jk} N ∈ 2πZ`.
const COMMENSURATE_TOL: f64 = 1e-9;

/// Relative size above which an entry at displacement exactly `N_j/2`
/// makes the periodic position commutator ambiguous.
pub const STRICT_IMAGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    sizes: Vec<usize>,
    boundary: Boundary,
    orbital_dim: usize,
}

impl Window {
    pub fn new(sizes: Vec<usize>, boundary: Boundary, orbital_dim: usize) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(NcError::InvalidParameter(format!("window sizes {sizes:?} must be positive")));
        }
        if orbital_dim == 0 {
            return Err(NcError::InvalidParameter("orbital dimension must be positive".into()));
        }
        Ok(Window { sizes, boundary, orbital_dim })
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn orbital_dim(&self) -> usize {
        self.orbital_dim
    }

    pub fn site_count(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn matrix_dim(&self) -> usize {
        self.site_count() * self.orbital_dim
    }

    /// Index of site `x`. Periodic windows wrap; open windows return `None`
    /// outside `[0, N)`.
    pub fn site_index(&self, x: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (&c, &n) in x.iter().zip(&self.sizes) {
            let c = match self.boundary {
                Boundary::Periodic => c.rem_euclid(n as i64),
                Boundary::Open if c < 0 || c >= n as i64 => return None,
                Boundary::Open => c,
            };
            idx = idx * n + c as usize;
        }
        Some(idx)
    }

    pub fn site(&self, mut index: usize) -> Point {
        let mut x = vec![0; self.dim()];
        for (c, &n) in x.iter_mut().zip(&self.sizes).rev() {
            *c = (index % n) as i64;
            index /= n;
        }
        x
    }

    pub fn sites(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.site_count()).map(|i| self.site(i))
    }

    /// Site indices at distance `≥ margin` from every open face.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        match self.boundary {
            Boundary::Periodic => (0..self.site_count()).collect(),
            Boundary::Open => {
                let m = margin as i64;
                (0..self.site_count())
                    .filter(|&i| {
                        self.site(i)
                            .iter()
                            .zip(&self.sizes)
                            .all(|(&c, &n)| c >= m && c < n as i64 - m)
                    })
                    .collect()
            }
        }
    }

    /// On periodic windows, checks `Θ_{jk}·N_k ∈ 2πZ` (and, with
    /// `both_sides`, also `Θ_{jk}·N_j ∈ 2πZ`).
    pub fn check_commensurate(&self, theta: &TwistMatrix, both_sides: bool) -> Result<()> {
        if theta.dim() != self.dim() {
            return Err(NcError::DimensionMismatch { expected: self.dim(), got: theta.dim() });
        }
        if self.boundary == Boundary::Open {
            return Ok(());
        }
        let d = self.dim();
        for j in 0..d {
            for k in 0..j {
                let t = theta.entry(j, k);
                let mut sizes = vec![self.sizes[k]];
                if both_sides {
                    sizes.push(self.sizes[j]);
                }
                for n in sizes {
                    let turns = t * n as f64 / (2.0 * PI);
                    if (turns - turns.round()).abs() > COMMENSURATE_TOL {
                        return Err(NcError::Incommensurate(format!(
                            "Θ[{j}][{k}]·{n} = {:.6}·2π is not a multiple of 2π",
                            turns
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_range(&self, hop: &[i64]) -> Result<()> {
        if hop.iter().zip(&self.sizes).any(|(&s, &n)| s.unsigned_abs() as usize >= n) {
            return Err(NcError::RangeExceedsWindow { hop: hop.to_vec(), sizes: self.sizes.clone() });
        }
        Ok(())
    }
}

/// A dense matrix on a window together with the twist it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOperator {
    window: Window,
    twist: TwistMatrix,
    data: CMat,
    hermitian_hint: bool,
}

impl LatticeOperator {
    pub fn new(window: Window, twist: TwistMatrix, data: CMat) -> Result<Self> {
        let n = window.matrix_dim();
        if data.nrows() != n || data.ncols() != n {
            return Err(NcError::DimensionMismatch { expected: n, got: data.nrows() });
        }
        if twist.dim() != window.dim() {
            return Err(NcError::DimensionMismatch { expected: window.dim(), got: twist.dim() });
        }
        let hermitian_hint = hermiticity_defect(&data) <= 1e-12 * linalg::max_abs(&data).max(1.0);
        Ok(LatticeOperator { window, twist, data, hermitian_hint })
    }

    pub fn identity(window: Window, twist: TwistMatrix) -> Result<Self> {
        let n = window.matrix_dim();
        LatticeOperator::new(window, twist, linalg::identity(n))
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn twist(&self) -> &TwistMatrix {
        &self.twist
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_data(self) -> CMat {
        self.data
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    /// Same window and twist, new matrix.
    pub fn with_data(&self, data: CMat) -> Result<Self> {
        LatticeOperator::new(self.window.clone(), self.twist.clone(), data)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.window != other.window || self.twist != other.twist {
            return Err(NcError::Incompatible("operators live on different windows".into()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        self.with_data(&self.data * &other.data)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        self.with_data(&self.data + &other.data)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        self.with_data(&self.data - &other.data)
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        out.data *= z;
        out.hermitian_hint = self.hermitian_hint && z.im == 0.0;
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        out.data = self.data.adjoint();
        out
    }

    /// `n×n` block `⟨r|M|x⟩` for site indices `r`, `x`.
    pub fn block(&self, r: usize, x: usize) -> CMat {
        let n = self.window.orbital_dim;
        self.data.view((r * n, x * n), (n, n)).into_owned()
    }

    /// Restriction to the given sites (rows and columns), keeping orbitals.
    pub fn restrict(&self, sites: &[usize]) -> CMat {
        let n = self.window.orbital_dim;
        let idx: Vec<usize> = sites.iter().flat_map(|&s| (0..n).map(move |o| s * n + o)).collect();
        CMat::from_fn(idx.len(), idx.len(), |i, j| self.data[(idx[i], idx[j])])
    }
}

pub(crate) fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn prepare_config(omega: &DisorderConfig, w: &Window) -> Result<DisorderConfig> {
    if omega.spec().dim != w.dim() {
        return Err(NcError::DimensionMismatch { expected: w.dim(), got: omega.spec().dim });
    }
    match w.boundary {
        Boundary::Periodic if !omega.is_clean() && omega.period().is_none() => {
            omega.periodized(&w.sizes)
        }
        _ => Ok(omega.clone()),
    }
}

/// `π_ω(p)` on `w`: block `⟨x+s|M|x⟩ = e^{i sᵀΘx}·Φ_s(p)(ϱ(x+s)ω)`.
///
/// Periodic windows wrap `x+s` and read the disorder periodically with
/// period `N`; open windows drop hops leaving the window.
pub fn materialize(p: &NcPoly, omega: &DisorderConfig, w: &Window) -> Result<LatticeOperator> {
    if p.dim() != w.dim() {
        return Err(NcError::DimensionMismatch { expected: w.dim(), got: p.dim() });
    }
    if p.orbital_dim() != w.orbital_dim {
        return Err(NcError::DimensionMismatch { expected: w.orbital_dim, got: p.orbital_dim() });
    }
    w.check_commensurate(p.twist(), false)?;
    for s in p.support() {
        w.check_range(s)?;
    }
    let omega = prepare_config(omega, w)?;
    let n = w.orbital_dim;
    let theta = p.twist();
    let mut data = CMat::zeros(w.matrix_dim(), w.matrix_dim());
    for xi in 0..w.site_count() {
        let x = w.site(xi);
        for (s, c) in p.terms() {
            let target: Point = x.iter().zip(s).map(|(a, b)| a + b).collect();
            let Some(ri) = w.site_index(&target) else { continue };
            let phase = C64::from_polar(1.0, theta.phase(s, &x));
            let value = match c.as_constant() {
                Some(m) => m * phase,
                None => c.eval(&disorder::shift(&omega, &target)?)? * phase,
            };
            let mut view = data.view_mut((ri * n, xi * n), (n, n));
            view += &value;
        }
    }
    LatticeOperator::new(w.clone(), theta.clone(), data)
}

fn translation<F>(y: &[i64], w: &Window, theta: &TwistMatrix, phase: F) -> Result<LatticeOperator>
where
    F: Fn(&[i64], &[i64]) -> f64,
{
    if y.len() != w.dim() {
        return Err(NcError::DimensionMismatch { expected: w.dim(), got: y.len() });
    }
    w.check_range(y)?;
    let n = w.orbital_dim;
    let mut data = CMat::zeros(w.matrix_dim(), w.matrix_dim());
    for xi in 0..w.site_count() {
        let x = w.site(xi);
        let target: Point = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let Some(ri) = w.site_index(&target) else { continue };
        let z = C64::from_polar(1.0, phase(&x, &target));
        for o in 0..n {
            data[(ri * n + o, xi * n + o)] = z;
        }
    }
    LatticeOperator::new(w.clone(), theta.clone(), data)
}

/// `U^y|x⟩ = e^{i yᵀΘx}|x+y⟩`, the image of `u^y`.
pub fn dual_translation(y: &[i64], w: &Window, theta: &TwistMatrix) -> Result<LatticeOperator> {
    w.check_commensurate(theta, false)?;
    translation(y, w, theta, |x, _| theta.phase(y, x))
}

/// `V^y|x⟩ = e^{i (x+y)ᵀΘy}|x+y⟩`, commuting with every `U^z`.
///
/// On periodic windows this also needs `Θ_{jk}·N_j ∈ 2πZ`.
pub fn direct_translation(y: &[i64], w: &Window, theta: &TwistMatrix) -> Result<LatticeOperator> {
    w.check_commensurate(theta, true)?;
    translation(y, w, theta, |_, target| theta.phase(target, y))
}

fn displacement(w: &Window, axis: usize, r: i64, x: i64) -> (i64, bool) {
    let d = r - x;
    match w.boundary {
        Boundary::Open => (d, false),
        Boundary::Periodic => {
            let n = w.sizes[axis] as i64;
            let m = d.rem_euclid(n);
            if 2 * m == n {
                (0, true)
            } else if 2 * m > n {
                (m - n, false)
            } else {
                (m, false)
            }
        }
    }
}

/// `i[X_j, M]` with the default strict tolerance for entries at the
/// ambiguous periodic displacement `N_j/2`.
pub fn position_commutator(m: &LatticeOperator, axis: usize) -> Result<LatticeOperator> {
    position_commutator_with(m, axis, STRICT_IMAGE_TOL)
}

/// `i[X_j, M]`, entrywise `i·(r_j − x_j)·M_{r,x}`.
///
/// On periodic windows the displacement is the minimal image. Entries at
/// displacement exactly `N_j/2` are set to zero; if any of them exceeds
/// `rel_tol · max|M|` the call fails with [`NcError::AmbiguousImage`].
pub fn position_commutator_with(m: &LatticeOperator, axis: usize, rel_tol: f64) -> Result<LatticeOperator> {
    let w = &m.window;
    if axis >= w.dim() {
        return Err(NcError::AxisOutOfRange { axis, dim: w.dim() });
    }
    let n = w.orbital_dim;
    let coords: Vec<i64> = (0..w.site_count()).map(|i| w.site(i)[axis]).collect();
    let limit = rel_tol * linalg::max_abs(&m.data);
    let mut ambiguous = 0.0_f64;
    let dim = w.matrix_dim();
    let mut out = CMat::zeros(dim, dim);
    for col in 0..dim {
        let xc = coords[col / n];
        for row in 0..dim {
            let z = m.data[(row, col)];
            if z == C64::new(0.0, 0.0) {
                continue;
            }
            let (disp, amb) = displacement(w, axis, coords[row / n], xc);
            if amb {
                ambiguous = ambiguous.max(z.norm());
                continue;
            }
            out[(row, col)] = z * C64::new(0.0, disp as f64);
        }
    }
    if ambiguous > limit {
        return Err(NcError::AmbiguousImage { axis, magnitude: ambiguous });
    }
    m.with_data(out)
}

/// Per-site average of the orbital trace over the interior sites.
pub fn volume_trace(m: &LatticeOperator, margin: usize) -> Result<C64> {
    let sites = m.window.interior(margin);
    if sites.is_empty() {
        return Err(NcError::EmptyInterior { margin, sizes: m.window.sizes.clone() });
    }
    let n = m.window.orbital_dim;
    let total = sites
        .iter()
        .flat_map(|&s| (0..n).map(move |o| s * n + o))
        .fold(C64::new(0.0, 0.0), |acc, i| acc + m.data[(i, i)]);
    Ok(total / sites.len() as f64)
}

/// `e^{−i sᵀΘx}·⟨x+s|M|x⟩`, the estimate of `Φ_s(p)(ϱ(x+s)ω)`.
pub fn fourier_from_matrix(m: &LatticeOperator, s: &[i64], x: &[i64]) -> Result<CMat> {
    let w = &m.window;
    if s.len() != w.dim() || x.len() != w.dim() {
        return Err(NcError::DimensionMismatch { expected: w.dim(), got: s.len().min(x.len()) });
    }
    let in_range = |p: &[i64]| p.iter().zip(&w.sizes).all(|(&c, &n)| c >= 0 && c < n as i64);
    if !in_range(x) {
        return Err(NcError::IndexOutOfRange(format!("site {x:?} outside window {:?}", w.sizes)));
    }
    let target: Point = x.iter().zip(s).map(|(a, b)| a + b).collect();
    let ri = w.site_index(&target).ok_or_else(|| {
        NcError::IndexOutOfRange(format!("site {target:?} outside window {:?}", w.sizes))
    })?;
    let xi = w.site_index(x).expect("checked above");
    let phase = C64::from_polar(1.0, -m.twist.phase(s, x));
    Ok(m.block(ri, xi) * phase)
}

/// Norm of `V^y H_ω V^{y†} − H_{ϱ(−y)ω}`.
///
/// On open windows the comparison is restricted to sites `x` such that both
/// `x` and `x − y` keep distance `margin` from the faces; `margin` is
/// ignored on periodic windows.
pub fn covariance_residual(
    model: &ModelSpec,
    omega: &DisorderConfig,
    y: &[i64],
    w: &Window,
    margin: usize,
) -> Result<f64> {
    let h = build_hamiltonian(model)?;
    let omega = prepare_config(omega, w)?;
    let back: Point = y.iter().map(|c| -c).collect();
    let shifted = disorder::shift(&omega, &back)?;
    let h_omega = materialize(&h, &omega, w)?;
    let h_shifted = materialize(&h, &shifted, w)?;
    let v = direct_translation(y, w, h.twist())?;
    let conj = v.mul(&h_omega)?.mul(&v.adjoint())?;
    let diff = conj.sub(&h_shifted)?;
    let sites: Vec<usize> = match w.boundary {
        Boundary::Periodic => (0..w.site_count()).collect(),
        Boundary::Open => {
            let interior = w.interior(margin);
            let keep: std::collections::HashSet<usize> = interior.iter().copied().collect();
            interior
                .into_iter()
                .filter(|&i| {
                    let x = w.site(i);
                    let pre: Point = x.iter().zip(&back).map(|(a, b)| a + b).collect();
                    w.site_index(&pre).is_some_and(|j| keep.contains(&j))
                })
                .collect()
        }
    };
    if sites.is_empty() {
        return Err(NcError::EmptyInterior { margin, sizes: w.sizes.clone() });
    }
    Ok(linalg::spectral_norm(&diff.restrict(&sites)))
}

/// Largest singular value; Hermitian inputs use their eigenvalues directly.
pub fn op_norm_estimate(m: &LatticeOperator) -> f64 {
    if m.hermitian_hint {
        let h = linalg::hermitize(&m.data);
        h.symmetric_eigenvalues().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    } else {
        linalg::spectral_norm(&m.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twist::{derive, rational_angle, Coefficient};

    fn theta2(phi: f64) -> TwistMatrix {
        TwistMatrix::from_lower(2, &[(1, 0, phi)]).unwrap()
    }

    fn mono(t: &TwistMatrix, s: &[i64]) -> NcPoly {
        NcPoly::monomial(t.clone(), s.to_vec(), Coefficient::real(1.0)).unwrap()
    }

    fn clean2() -> DisorderConfig {
        DisorderConfig::clean(2)
    }

    #[test]
    fn site_layout_is_lexicographic() {
        let w = Window::new(vec![2, 3], Boundary::Open, 2).unwrap();
        assert_eq!(w.site_index(&[1, 2]), Some(5));
        assert_eq!(w.site(4), vec![1, 1]);
        assert_eq!(w.site_index(&[2, 0]), None);
        let p = Window::new(vec![2, 3], Boundary::Periodic, 1).unwrap();
        assert_eq!(p.site_index(&[-1, 3]), Some(3));
    }

    #[test]
    fn materialize_first_generator_is_plain_shift() {
        let t = theta2(rational_angle(1, 4).unwrap());
        let w = Window::new(vec![4, 4], Boundary::Periodic, 1).unwrap();
        let m = materialize(&mono(&t, &[1, 0]), &clean2(), &w).unwrap();
        for xi in 0..16 {
            let x = w.site(xi);
            let r = w.site_index(&[x[0] + 1, x[1]]).unwrap();
            assert_eq!(m.data()[(r, xi)], C64::new(1.0, 0.0));
        }
        assert_eq!(m.data().iter().filter(|z| z.norm() > 0.0).count(), 16);
    }

    #[test]
    fn materialize_second_generator_phases() {
        let phi = rational_angle(1, 4).unwrap();
        let t = theta2(phi);
        let w = Window::new(vec![4, 4], Boundary::Periodic, 1).unwrap();
        let m = materialize(&mono(&t, &[0, 1]), &clean2(), &w).unwrap();
        for xi in 0..16 {
            let x = w.site(xi);
            let r = w.site_index(&[x[0], x[1] + 1]).unwrap();
            let expected = C64::from_polar(1.0, phi * x[0] as f64);
            assert!((m.data()[(r, xi)] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn materialize_site_function_is_diagonal() {
        let spec = crate::DisorderSpec::new(2, 1, 8, 3).unwrap();
        let omega = disorder::sample_config(&spec, 0);
        let f = Coefficient::site_fn(1, |w| Ok(CMat::from_element(1, 1, C64::new(w.value(&[0, 0])?[0], 0.0))));
        let p = NcPoly::monomial(TwistMatrix::zero(2), vec![0, 0], f).unwrap().with_disorder(spec);
        let w = Window::new(vec![3, 3], Boundary::Open, 1).unwrap();
        let m = materialize(&p, &omega, &w).unwrap();
        for xi in 0..9 {
            let x = w.site(xi);
            assert_eq!(m.data()[(xi, xi)].re, omega.value(&x).unwrap()[0]);
        }
        assert!(m.hermitian_hint());
    }

    #[test]
    fn incommensurate_periodic_window_is_rejected() {
        let t = theta2(rational_angle(1, 3).unwrap());
        let w = Window::new(vec![4, 4], Boundary::Periodic, 1).unwrap();
        assert!(matches!(materialize(&mono(&t, &[1, 0]), &clean2(), &w), Err(NcError::Incommensurate(_))));
        let open = Window::new(vec![4, 4], Boundary::Open, 1).unwrap();
        assert!(materialize(&mono(&t, &[1, 0]), &clean2(), &open).is_ok());
        assert!(matches!(
            materialize(&mono(&t, &[4, 0]), &clean2(), &open),
            Err(NcError::RangeExceedsWindow { .. })
        ));
    }

    #[test]
    fn translations() {
        let phi = rational_angle(1, 4).unwrap();
        let t = theta2(phi);
        let w = Window::new(vec![4, 4], Boundary::Periodic, 1).unwrap();
        let id = dual_translation(&[0, 0], &w, &t).unwrap();
        assert_eq!(id.data(), &CMat::identity(16, 16));
        assert_eq!(direct_translation(&[0, 0], &w, &t).unwrap().data(), &CMat::identity(16, 16));

        let u1 = dual_translation(&[1, 0], &w, &t).unwrap();
        let u2 = dual_translation(&[0, 1], &w, &t).unwrap();
        let u12 = dual_translation(&[1, 1], &w, &t).unwrap();
        let lhs = u2.mul(&u1).unwrap();
        let rhs = u12.scale(C64::from_polar(1.0, phi));
        assert!(linalg::max_abs_diff(lhs.data(), rhs.data()) < 1e-14);

        for y in [[1, 0], [0, 1], [2, 3]] {
            let u = dual_translation(&y, &w, &t).unwrap();
            let g = u.adjoint().mul(&u).unwrap();
            assert!(linalg::max_abs_diff(g.data(), &CMat::identity(16, 16)) < 1e-14);
            assert!((op_norm_estimate(&u) - 1.0).abs() < 1e-10);
            for z in [[1, 0], [0, 1], [1, 2]] {
                let v = direct_translation(&z, &w, &t).unwrap();
                let a = v.mul(&u).unwrap();
                let b = u.mul(&v).unwrap();
                assert!(linalg::max_abs_diff(a.data(), b.data()) < 1e-13);
            }
        }
    }

    #[test]
    fn generator_commutation_relation() {
        let phi = rational_angle(3, 8).unwrap();
        let t = theta2(phi);
        let w = Window::new(vec![8, 8], Boundary::Periodic, 1).unwrap();
        let a = materialize(&mono(&t, &[1, 0]), &clean2(), &w).unwrap();
        let b = materialize(&mono(&t, &[0, 1]), &clean2(), &w).unwrap();
        let theta_hat = crate::twist::antisym(&t);
        // π(u_2)π(u_1) = e^{iΘ̂_{21}} π(u_1)π(u_2), the same relation as in the algebra
        let lhs = b.mul(&a).unwrap();
        let rhs = a.mul(&b).unwrap().scale(C64::from_polar(1.0, theta_hat[(1, 0)]));
        assert!(linalg::max_abs_diff(lhs.data(), rhs.data()) < 1e-13);
    }

    #[test]
    fn position_commutator_examples() {
        let t = theta2(rational_angle(1, 6).unwrap());
        let w = Window::new(vec![6, 6], Boundary::Periodic, 1).unwrap();
        let diag = LatticeOperator::identity(w.clone(), t.clone()).unwrap();
        let c = position_commutator(&diag, 0).unwrap();
        assert_eq!(linalg::max_abs(c.data()), 0.0);

        let u = materialize(&mono(&t, &[1, 0]), &clean2(), &w).unwrap();
        let c = position_commutator(&u, 0).unwrap();
        assert!(linalg::max_abs_diff(c.data(), u.scale(C64::new(0.0, 1.0)).data()) < 1e-15);
        assert_eq!(volume_trace(&c, 0).unwrap(), C64::new(0.0, 0.0));

        let far = materialize(&mono(&t, &[3, 0]), &clean2(), &w).unwrap();
        assert!(matches!(position_commutator(&far, 0), Err(NcError::AmbiguousImage { axis: 0, .. })));
        assert!(matches!(position_commutator(&far, 2), Err(NcError::AxisOutOfRange { .. })));
    }

    #[test]
    fn derive_matches_commutator_on_open_interior() {
        let t = theta2(0.37);
        let w = Window::new(vec![7, 7], Boundary::Open, 1).unwrap();
        let p = crate::twist::nc_lincomb(&[
            (C64::new(1.0, 0.5), &mono(&t, &[1, -1])),
            (C64::new(-0.3, 0.0), &mono(&t, &[0, 2])),
            (C64::new(0.2, 0.1), &mono(&t, &[0, 0])),
        ])
        .unwrap();
        for axis in 0..2 {
            let lhs = materialize(&derive(&p, axis).unwrap(), &clean2(), &w).unwrap();
            let rhs = position_commutator(&materialize(&p, &clean2(), &w).unwrap(), axis).unwrap();
            let interior = w.interior(2);
            assert!(linalg::max_abs_diff(&lhs.restrict(&interior), &rhs.restrict(&interior)) < 1e-12);
        }
    }

    #[test]
    fn volume_trace_examples() {
        let t = TwistMatrix::zero(2);
        let w = Window::new(vec![4, 4], Boundary::Open, 2).unwrap();
        let id = LatticeOperator::identity(w.clone(), t.clone()).unwrap();
        assert_eq!(volume_trace(&id, 1).unwrap(), C64::new(2.0, 0.0));
        let u = NcPoly::monomial(t.clone(), vec![1, 0], Coefficient::identity(2)).unwrap();
        let m = materialize(&u, &clean2(), &w).unwrap();
        assert_eq!(volume_trace(&m, 0).unwrap(), C64::new(0.0, 0.0));
        assert!(matches!(volume_trace(&id, 2), Err(NcError::EmptyInterior { .. })));
    }

    #[test]
    fn fourier_round_trip() {
        let phi = rational_angle(1, 4).unwrap();
        let t = theta2(phi);
        let w = Window::new(vec![8, 8], Boundary::Periodic, 1).unwrap();
        let coeffs = [([1, 0], C64::new(0.3, 0.2)), ([-1, 2], C64::new(-1.0, 0.5)), ([0, 0], C64::new(2.0, 0.0))];
        let terms: Vec<_> = coeffs.iter().map(|(s, z)| (s.to_vec(), Coefficient::scalar(*z))).collect();
        let p = NcPoly::from_terms(t.clone(), 1, None, terms).unwrap();
        let m = materialize(&p, &clean2(), &w).unwrap();
        for (s, z) in coeffs {
            let mut worst = 0.0_f64;
            for x in w.sites() {
                let v = fourier_from_matrix(&m, &s, &x).unwrap()[(0, 0)];
                worst = worst.max((v - z).norm());
            }
            assert!(worst < 1e-12, "s={s:?}");
        }
        assert!(fourier_from_matrix(&m, &[2, 2], &[0, 0]).unwrap()[(0, 0)].norm() < 1e-15);
        assert!(fourier_from_matrix(&m, &[0, 0], &[8, 0]).is_err());
    }

    #[test]
    fn op_norm_examples() {
        let t = TwistMatrix::zero(1);
        let w = Window::new(vec![2], Boundary::Open, 1).unwrap();
        let m = LatticeOperator::new(
            w.clone(),
            t.clone(),
            CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(-1.0, 0.0)])),
        )
        .unwrap();
        assert!((op_norm_estimate(&m) - 3.0).abs() < 1e-12);
        assert!((op_norm_estimate(&LatticeOperator::identity(w, t).unwrap()) - 1.0).abs() < 1e-12);
    }
}
