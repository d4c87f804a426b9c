//! Hermitian spectral calculus on lattice operators: eigendecomposition,
//! gaps, Fermi projections by two independent routes, and the chiral
//! flat-band unitary.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{NcError, Result};
use crate::lattice::{hermiticity_defect, LatticeOperator, Window};
use crate::linalg;
use crate::twist::TwistMatrix;
use crate::{CMat, C64};

/// Hermiticity tolerance accepted by [`eigh`], relative to `max(1, max|M|)`.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Minimal distance between a Fermi level and the spectrum.
pub const GAPLESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
    source_hash: u64,
    window: Window,
    twist: TwistMatrix,
}

impl SpectralData {
    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `k` belongs to `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    /// Hash of the bit pattern of the decomposed matrix.
    pub fn source_hash(&self) -> u64 {
        self.source_hash
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Number of eigenvalues `≤ e`.
    pub fn count_below(&self, e: f64) -> usize {
        self.eigenvalues.partition_point(|&v| v <= e)
    }
}

fn matrix_hash(m: &CMat) -> u64 {
    let mut h = DefaultHasher::new();
    m.nrows().hash(&mut h);
    for z in m.iter() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Symmetrizes and diagonalizes; eigenvalues ascending.
pub fn eigh(m: &LatticeOperator) -> Result<SpectralData> {
    let data = m.data();
    let defect = hermiticity_defect(data);
    if defect > HERMITIAN_TOL * linalg::max_abs(data).max(1.0) {
        return Err(NcError::NotHermitian(defect));
    }
    let eig = linalg::hermitize(data).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = data.nrows();
    let eigenvectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        source_hash: matrix_hash(data),
        window: m.window().clone(),
        twist: m.twist().clone(),
    })
}

/// `‖M v_k − λ_k v_k‖` per eigenpair. For Hermitian `M` each value bounds
/// the distance from `λ_k` to the exact spectrum.
pub fn residual_bounds(m: &LatticeOperator, spec: &SpectralData) -> Result<Vec<f64>> {
    if m.data().nrows() != spec.eigenvalues.len() {
        return Err(NcError::DimensionMismatch { expected: spec.eigenvalues.len(), got: m.data().nrows() });
    }
    let mv = m.data() * &spec.eigenvectors;
    Ok(spec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &e)| (mv.column(k) - spec.eigenvectors.column(k) * C64::new(e, 0.0)).norm())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub lower: f64,
    pub upper: f64,
}

impl Gap {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, e: f64) -> bool {
        self.lower < e && e < self.upper
    }
}

/// Gaps of width `≥ min_width` between consecutive eigenvalues.
pub fn find_gaps(spec: &SpectralData, min_width: f64) -> Vec<Gap> {
    gaps_of_sorted(&spec.eigenvalues, min_width)
}

/// Like [`find_gaps`] for an arbitrary (not necessarily sorted) list, e.g.
/// the union of several sampled spectra.
pub fn gaps_of(values: &[f64], min_width: f64) -> Vec<Gap> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    gaps_of_sorted(&sorted, min_width)
}

fn gaps_of_sorted(values: &[f64], min_width: f64) -> Vec<Gap> {
    values
        .windows(2)
        .filter(|w| w[1] - w[0] >= min_width)
        .map(|w| Gap { lower: w[0], upper: w[1] })
        .collect()
}

fn check_fermi_level(spec: &SpectralData, e_f: f64) -> Result<()> {
    if let Some((eigenvalue, distance)) = spec
        .eigenvalues
        .iter()
        .map(|&v| (v, (v - e_f).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
    {
        if distance <= GAPLESS_TOL {
            return Err(NcError::Gapless { energy: e_f, eigenvalue, distance });
        }
    }
    Ok(())
}

/// `P = Σ_{λ_k ≤ E_F} v_k v_k†`.
pub fn fermi_projection(spec: &SpectralData, e_f: f64) -> Result<LatticeOperator> {
    check_fermi_level(spec, e_f)?;
    let k = spec.count_below(e_f);
    let v = spec.eigenvectors.columns(0, k);
    let p = &v * v.adjoint();
    LatticeOperator::new(spec.window.clone(), spec.twist.clone(), p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Composite trapezoid rule per edge (second order).
    Trapezoid,
    /// Gauss–Legendre nodes per edge.
    #[default]
    GaussLegendre,
}

/// Counter-clockwise rectangle with corners `lower_left` and `upper_right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub lower_left: C64,
    pub upper_right: C64,
    pub points_per_edge: usize,
    pub rule: QuadratureRule,
}

pub const DEFAULT_CONTOUR_POINTS: usize = 64;

impl Contour {
    pub fn rectangle(re_min: f64, re_max: f64, half_height: f64, points_per_edge: usize) -> Self {
        Contour {
            lower_left: C64::new(re_min, -half_height),
            upper_right: C64::new(re_max, half_height),
            points_per_edge,
            rule: QuadratureRule::default(),
        }
    }

    /// Real extent `[λ_min − g/2, E_F]`, half-height `g`.
    pub fn enclosing_below(lowest: f64, e_f: f64, gap_width: f64, points_per_edge: usize) -> Self {
        Contour::rectangle(lowest - gap_width / 2.0, e_f, gap_width, points_per_edge)
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_points(mut self, points_per_edge: usize) -> Self {
        self.points_per_edge = points_per_edge;
        self
    }

    fn corners(&self) -> [C64; 4] {
        let (a, b) = (self.lower_left, self.upper_right);
        [a, C64::new(b.re, a.im), b, C64::new(a.re, b.im)]
    }

    /// `(node, weight·dz)` pairs covering the closed path once.
    fn nodes(&self) -> Vec<(C64, C64)> {
        let n = self.points_per_edge;
        let corners = self.corners();
        let mut out = Vec::with_capacity(4 * n);
        for e in 0..4 {
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            match self.rule {
                QuadratureRule::GaussLegendre => {
                    let (t, w) = linalg::gauss_legendre(n);
                    for (t, w) in t.iter().zip(&w) {
                        let z = a + (b - a) * ((t + 1.0) / 2.0);
                        out.push((z, (b - a) * (w / 2.0)));
                    }
                }
                QuadratureRule::Trapezoid => {
                    let h = (b - a) / n as f64;
                    for k in 0..=n {
                        let w = if k == 0 || k == n { h * 0.5 } else { h };
                        out.push((a + h * k as f64, w));
                    }
                }
            }
        }
        out
    }
}

/// `(1/2πi) ∮ (z − M)^{−1} dz` by quadrature over the rectangle.
pub fn riesz_projection(m: &LatticeOperator, c: &Contour) -> Result<LatticeOperator> {
    if c.points_per_edge == 0 {
        return Err(NcError::InvalidParameter("contour needs at least one point per edge".into()));
    }
    if !(c.lower_left.re < c.upper_right.re && c.lower_left.im < c.upper_right.im) {
        return Err(NcError::InvalidParameter("contour corners are not ordered".into()));
    }
    let data = m.data();
    let defect = hermiticity_defect(data);
    if defect > HERMITIAN_TOL * linalg::max_abs(data).max(1.0) {
        return Err(NcError::NotHermitian(defect));
    }
    let n = data.nrows();
    let scale = linalg::max_abs(data).max(1.0);
    // Householder reduction once, then O(n²) per node; the dense LU path
    // is the fallback when the reduction or an elimination breaks down
    let tri = linalg::Tridiagonal::new(data);
    let dense = |z: C64| (linalg::identity(n) * z - data).lu().try_inverse();
    let resolvent = |z: C64| -> Option<CMat> {
        match &tri {
            Some(t) => t.resolvent(z).or_else(|| dense(z).map(|r| t.q.adjoint() * r * &t.q)),
            None => dense(z),
        }
    };
    // the spectrum is real, so it meets the contour only where the vertical
    // edges cross the axis; there the resolvent norm is 1/distance
    for x in [c.lower_left.re, c.upper_right.re] {
        let distance = match resolvent(C64::new(x, 0.0)) {
            Some(inv) => 1.0 / linalg::norm_bound(&inv),
            None => 0.0,
        };
        if distance <= 1e-12 * scale {
            return Err(NcError::ContourTooClose { distance });
        }
    }
    let mut acc = CMat::zeros(n, n);
    for (z, dz) in c.nodes() {
        let inv = resolvent(z).ok_or(NcError::ContourTooClose { distance: 0.0 })?;
        acc += inv * dz;
    }
    let acc = match &tri {
        Some(t) => &t.q * acc * t.q.adjoint(),
        None => acc,
    };
    let p = acc / C64::new(0.0, 2.0 * PI);
    m.with_data(p)
}

/// `‖P² − P‖`.
pub fn idempotency_residual(p: &LatticeOperator) -> f64 {
    let d = p.data();
    linalg::spectral_norm(&(d * d - d))
}

/// Orbital-index grading: within every site, orbitals `< n₊` carry `+1`.
fn grading(w: &Window, split: (usize, usize)) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = w.orbital_dim();
    if split.0 + split.1 != n {
        return Err(NcError::InvalidParameter(format!(
            "chiral split {split:?} does not add up to orbital dimension {n}"
        )));
    }
    if split.0 != split.1 {
        return Err(NcError::InvalidParameter(format!("chiral split {split:?} is unbalanced")));
    }
    let plus = (0..w.site_count()).flat_map(|s| (0..split.0).map(move |o| s * n + o)).collect();
    let minus = (0..w.site_count()).flat_map(|s| (split.0..n).map(move |o| s * n + o)).collect();
    Ok((plus, minus))
}

fn sub_block(m: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Lower-left block `U` of the flat-band sign `Q = 1 − 2χ(M ≤ 0)`, so that
/// `Q = [[0, U†], [U, 0]]` in the chiral grading.
pub fn chiral_unitary(m: &LatticeOperator, split: (usize, usize)) -> Result<LatticeOperator> {
    let w = m.window();
    let (plus, minus) = grading(w, split)?;
    let data = m.data();
    let scale = linalg::max_abs(data).max(1.0);
    let mut chiral_defect = 0.0_f64;
    for block in [(&plus, &plus), (&minus, &minus)] {
        chiral_defect = chiral_defect.max(linalg::max_abs(&sub_block(data, block.0, block.1)));
    }
    if chiral_defect > HERMITIAN_TOL * scale {
        return Err(NcError::ChiralViolation(chiral_defect));
    }
    let spec = eigh(m)?;
    let p = fermi_projection(&spec, 0.0)?;
    let q = linalg::identity(data.nrows()) - p.data() * C64::new(2.0, 0.0);
    let off = linalg::max_abs(&sub_block(&q, &plus, &plus)).max(linalg::max_abs(&sub_block(&q, &minus, &minus)));
    if off > 1e-8 {
        return Err(NcError::ChiralViolation(off));
    }
    let u = sub_block(&q, &minus, &plus);
    let unitarity = linalg::max_abs_diff(&(u.adjoint() * &u), &linalg::identity(u.nrows()));
    if unitarity > 1e-8 {
        return Err(NcError::NotUnitary(unitarity));
    }
    let uw = Window::new(w.sizes().to_vec(), w.boundary(), split.0)?;
    LatticeOperator::new(uw, m.twist().clone(), u)
}
