//! Finitely supported elements `p = Σ Φ_s(p) u^s` of the twisted crossed
//! product `A ⋊_{α,Θ} Z^d` with `A = M_n(C(Ω))`, and the operations the
//! algebra carries on Fourier coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::disorder::{self, sample_config, DisorderConfig, DisorderSpec};
use crate::error::{NcError, Result};
use crate::lattice::{self, Window};
use crate::linalg;
use crate::{CMat, Point, C64};

/// Coefficients whose operator norm stays below this on every probe are
/// dropped from the support.
pub const CANONICAL_TOL: f64 = 1e-14;

/// Number of sampled configurations used to decide whether a site-function
/// coefficient vanishes.
const CANONICAL_PROBES: u64 = 3;

/// Lower-triangular twist `Θ` with zero diagonal and entries in `[0, 2π)`;
/// the cocycle is `ζ(x, y) = exp(i xᵀΘy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistMatrix {
    dim: usize,
    entries: Vec<f64>,
}

/// `2π·(p/q mod 1)`.
pub fn rational_angle(p: i64, q: i64) -> Result<f64> {
    if q <= 0 {
        return Err(NcError::InvalidParameter(format!("flux denominator {q} must be positive")));
    }
    Ok(2.0 * PI * (p.rem_euclid(q) as f64 / q as f64))
}

fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2π
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

impl TwistMatrix {
    pub fn zero(dim: usize) -> Self {
        TwistMatrix { dim, entries: vec![0.0; dim * dim] }
    }

    /// Row-major `d×d` entries; rejects anything that is not strictly
    /// lower triangular with entries in `[0, 2π)`.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(NcError::InvalidTwist("dimension must be >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(NcError::InvalidTwist(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in 0..dim {
                let v = entries[i * dim + j];
                if !v.is_finite() {
                    return Err(NcError::InvalidTwist(format!("entry ({i},{j}) is not finite")));
                }
                if j >= i && v != 0.0 {
                    return Err(NcError::InvalidTwist(format!(
                        "entry ({i},{j}) = {v} above or on the diagonal"
                    )));
                }
                if !(0.0..2.0 * PI).contains(&v) {
                    return Err(NcError::InvalidTwist(format!(
                        "entry ({i},{j}) = {v} outside [0, 2π)"
                    )));
                }
            }
        }
        Ok(TwistMatrix { dim, entries })
    }

    /// Builds `Θ` from `(row, col, angle)` triples with `row > col`;
    /// angles are reduced into `[0, 2π)`.
    pub fn from_lower(dim: usize, angles: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries = vec![0.0; dim * dim];
        for &(i, j, a) in angles {
            if i >= dim || j >= i {
                return Err(NcError::InvalidTwist(format!(
                    "({i},{j}) is not strictly below the diagonal of a {dim}×{dim} matrix"
                )));
            }
            entries[i * dim + j] = reduce_angle(a);
        }
        TwistMatrix::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    /// `xᵀΘy` without dimension checks.
    pub(crate) fn phase(&self, x: &[i64], y: &[i64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 1..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..i {
                acc += x[i] as f64 * self.entries[i * d + j] * y[j] as f64;
            }
        }
        acc
    }

    pub fn as_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    fn check(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(NcError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }
}

/// `ζ(x, y) = exp(i xᵀΘy)`.
pub fn cocycle(theta: &TwistMatrix, x: &[i64], y: &[i64]) -> Result<C64> {
    theta.check(x)?;
    theta.check(y)?;
    Ok(C64::from_polar(1.0, theta.phase(x, y)))
}

/// `Θ̂ = Θ − Θᵀ`.
pub fn antisym(theta: &TwistMatrix) -> DMatrix<f64> {
    let m = theta.as_matrix();
    &m - m.transpose()
}

type SiteEval = dyn Fn(&DisorderConfig) -> Result<CMat> + Send + Sync;

/// A Fourier coefficient: an `n×n` matrix, either constant over the hull
/// or a function of the disorder configuration.
#[derive(Clone)]
pub enum Coefficient {
    Constant(CMat),
    Site { orbital_dim: usize, eval: Arc<SiteEval> },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            Coefficient::Site { orbital_dim, .. } => {
                f.debug_struct("Site").field("orbital_dim", orbital_dim).finish_non_exhaustive()
            }
        }
    }
}

impl Coefficient {
    pub fn scalar(z: C64) -> Self {
        Coefficient::Constant(CMat::from_element(1, 1, z))
    }

    pub fn real(v: f64) -> Self {
        Coefficient::scalar(C64::new(v, 0.0))
    }

    pub fn constant(m: CMat) -> Self {
        assert!(m.is_square(), "coefficient matrices are square");
        Coefficient::Constant(m)
    }

    pub fn identity(n: usize) -> Self {
        Coefficient::Constant(CMat::identity(n, n))
    }

    pub fn zero(n: usize) -> Self {
        Coefficient::Constant(CMat::zeros(n, n))
    }

    pub fn site_fn<F>(orbital_dim: usize, f: F) -> Self
    where
        F: Fn(&DisorderConfig) -> Result<CMat> + Send + Sync + 'static,
    {
        Coefficient::Site { orbital_dim, eval: Arc::new(f) }
    }

    pub fn orbital_dim(&self) -> usize {
        match self {
            Coefficient::Constant(m) => m.nrows(),
            Coefficient::Site { orbital_dim, .. } => *orbital_dim,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coefficient::Constant(_))
    }

    pub fn as_constant(&self) -> Option<&CMat> {
        match self {
            Coefficient::Constant(m) => Some(m),
            Coefficient::Site { .. } => None,
        }
    }

    pub fn eval(&self, omega: &DisorderConfig) -> Result<CMat> {
        match self {
            Coefficient::Constant(m) => Ok(m.clone()),
            Coefficient::Site { eval, .. } => eval(omega),
        }
    }

    /// `α(s)`: `ω ↦ c(ϱ(−s)ω)`.
    pub fn shifted(&self, s: &[i64]) -> Self {
        match self {
            Coefficient::Constant(_) => self.clone(),
            Coefficient::Site { orbital_dim, eval } => {
                if s.iter().all(|&c| c == 0) {
                    return self.clone();
                }
                let eval = Arc::clone(eval);
                let back: Point = s.iter().map(|c| -c).collect();
                Coefficient::site_fn(*orbital_dim, move |w| eval(&disorder::shift(w, &back)?))
            }
        }
    }

    fn zip_with(&self, other: &Self, op: fn(&CMat, &CMat) -> CMat) -> Self {
        match (self, other) {
            (Coefficient::Constant(a), Coefficient::Constant(b)) => Coefficient::Constant(op(a, b)),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                Coefficient::site_fn(self.orbital_dim(), move |w| Ok(op(&a.eval(w)?, &b.eval(w)?)))
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, z: C64) -> Self {
        match self {
            Coefficient::Constant(m) => Coefficient::Constant(m * z),
            Coefficient::Site { orbital_dim, eval } => {
                let eval = Arc::clone(eval);
                Coefficient::site_fn(*orbital_dim, move |w| Ok(eval(w)? * z))
            }
        }
    }

    /// Pointwise conjugate transpose.
    pub fn dagger(&self) -> Self {
        match self {
            Coefficient::Constant(m) => Coefficient::Constant(m.adjoint()),
            Coefficient::Site { orbital_dim, eval } => {
                let eval = Arc::clone(eval);
                Coefficient::site_fn(*orbital_dim, move |w| Ok(eval(w)?.adjoint()))
            }
        }
    }

    /// Maximum operator norm over `samples` (constants ignore them).
    pub fn sup_norm(&self, samples: &[DisorderConfig]) -> Result<f64> {
        match self {
            Coefficient::Constant(m) => Ok(linalg::spectral_norm(m)),
            Coefficient::Site { .. } => {
                if samples.is_empty() {
                    return Err(NcError::MissingSamples);
                }
                samples.iter().try_fold(0.0_f64, |acc, w| {
                    Ok(acc.max(linalg::spectral_norm(&self.eval(w)?)))
                })
            }
        }
    }

    fn is_negligible(&self, probes: &[DisorderConfig]) -> bool {
        match self {
            Coefficient::Constant(m) => small_norm_below(m, CANONICAL_TOL),
            Coefficient::Site { .. } => {
                !probes.is_empty()
                    && probes.iter().all(|w| {
                        self.eval(w).map(|m| small_norm_below(&m, CANONICAL_TOL)).unwrap_or(false)
                    })
            }
        }
    }
}

fn small_norm_below(m: &CMat, tol: f64) -> bool {
    // the Frobenius norm bounds the operator norm from above
    let fro = m.norm();
    fro < tol || (fro < tol * (m.nrows() as f64).sqrt() && linalg::spectral_norm(m) < tol)
}

/// A finitely supported element `Σ_s Φ_s u^s`. Zero coefficients are never
/// stored.
#[derive(Clone, Debug)]
pub struct NcPoly {
    twist: TwistMatrix,
    orbital_dim: usize,
    disorder: Option<DisorderSpec>,
    coeffs: BTreeMap<Point, Coefficient>,
}

impl NcPoly {
    pub fn zero(twist: TwistMatrix, orbital_dim: usize) -> Self {
        NcPoly { twist, orbital_dim, disorder: None, coeffs: BTreeMap::new() }
    }

    /// The unit `1_A u^0`.
    pub fn unit(twist: TwistMatrix, orbital_dim: usize) -> Self {
        let d = twist.dim();
        let mut p = NcPoly::zero(twist, orbital_dim);
        p.coeffs.insert(vec![0; d], Coefficient::identity(orbital_dim));
        p
    }

    /// `c·u^s`.
    pub fn monomial(twist: TwistMatrix, s: Point, c: Coefficient) -> Result<Self> {
        let n = c.orbital_dim();
        NcPoly::from_terms(twist, n, None, [(s, c)])
    }

    /// Sums the given terms (repeated exponents accumulate).
    pub fn from_terms<I>(
        twist: TwistMatrix,
        orbital_dim: usize,
        disorder: Option<DisorderSpec>,
        terms: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (Point, Coefficient)>,
    {
        let d = twist.dim();
        let mut map: BTreeMap<Point, Coefficient> = BTreeMap::new();
        for (s, c) in terms {
            if s.len() != d {
                return Err(NcError::DimensionMismatch { expected: d, got: s.len() });
            }
            if c.orbital_dim() != orbital_dim {
                return Err(NcError::DimensionMismatch { expected: orbital_dim, got: c.orbital_dim() });
            }
            if let Coefficient::Constant(m) = &c {
                if !m.is_square() {
                    return Err(NcError::Incompatible("coefficient is not square".into()));
                }
            }
            accumulate(&mut map, s, c);
        }
        let mut p = NcPoly { twist, orbital_dim, disorder, coeffs: map };
        p.canonicalize();
        Ok(p)
    }

    /// Attaches the disorder model that site-function coefficients read.
    pub fn with_disorder(mut self, spec: DisorderSpec) -> Self {
        self.disorder = Some(spec);
        self.canonicalize();
        self
    }

    pub fn dim(&self) -> usize {
        self.twist.dim()
    }

    pub fn twist(&self) -> &TwistMatrix {
        &self.twist
    }

    pub fn orbital_dim(&self) -> usize {
        self.orbital_dim
    }

    pub fn disorder(&self) -> Option<&DisorderSpec> {
        self.disorder.as_ref()
    }

    /// `Φ_s(p)`, `None` when `s` is outside the support.
    pub fn coeff(&self, s: &[i64]) -> Option<&Coefficient> {
        self.coeffs.get(s)
    }

    /// `Φ_0(p)`, zero if absent.
    pub fn phi0(&self) -> Coefficient {
        self.coeffs
            .get(&vec![0; self.dim()])
            .cloned()
            .unwrap_or_else(|| Coefficient::zero(self.orbital_dim))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Point, &Coefficient)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Point> {
        self.coeffs.keys()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        self.coeffs.values().all(Coefficient::is_constant)
    }

    /// `max_s max_j |s_j|`.
    pub fn range(&self) -> i64 {
        self.coeffs
            .keys()
            .flat_map(|s| s.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Probe configurations drawn from the attached disorder model: the
    /// clean configuration when the model is clean, none when site
    /// functions are present but no model is attached.
    pub fn probes(&self) -> Vec<DisorderConfig> {
        match &self.disorder {
            Some(spec) if !spec.is_clean() => {
                (0..CANONICAL_PROBES).map(|i| sample_config(spec, i)).collect()
            }
            _ if !self.is_clean() => Vec::new(),
            _ => vec![DisorderConfig::clean(self.dim())],
        }
    }

    fn canonicalize(&mut self) {
        let probes = self.probes();
        self.coeffs.retain(|_, c| !c.is_negligible(&probes));
    }

    fn compatible(&self, other: &NcPoly) -> Result<Option<DisorderSpec>> {
        if self.twist != other.twist {
            return Err(NcError::Incompatible("different twist matrices".into()));
        }
        if self.orbital_dim != other.orbital_dim {
            return Err(NcError::Incompatible(format!(
                "orbital dimensions {} and {}",
                self.orbital_dim, other.orbital_dim
            )));
        }
        match (&self.disorder, &other.disorder) {
            (Some(a), Some(b)) if a != b => {
                Err(NcError::Incompatible("different disorder models".into()))
            }
            (Some(a), _) => Ok(Some(a.clone())),
            (None, b) => Ok(b.clone()),
        }
    }

    fn rebuild(&self, disorder: Option<DisorderSpec>, coeffs: BTreeMap<Point, Coefficient>) -> Self {
        let mut p = NcPoly { twist: self.twist.clone(), orbital_dim: self.orbital_dim, disorder, coeffs };
        p.canonicalize();
        p
    }

    fn map_coeffs<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&Point, &Coefficient) -> Option<(Point, Coefficient)>,
    {
        let coeffs = self.coeffs.iter().filter_map(|(s, c)| f(s, c)).collect();
        self.rebuild(self.disorder.clone(), coeffs)
    }
}

fn accumulate(map: &mut BTreeMap<Point, Coefficient>, s: Point, c: Coefficient) {
    match map.get_mut(&s) {
        Some(prev) => *prev = prev.add(&c),
        None => {
            map.insert(s, c);
        }
    }
}

/// `Φ_s(pq) = Σ_x e^{i xᵀΘ(s−x)} Φ_x(p) α(x)(Φ_{s−x}(q))`.
pub fn nc_mul(p: &NcPoly, q: &NcPoly) -> Result<NcPoly> {
    let disorder = p.compatible(q)?;
    let mut out = BTreeMap::new();
    for (x, a) in &p.coeffs {
        for (y, b) in &q.coeffs {
            let s: Point = x.iter().zip(y).map(|(u, v)| u + v).collect();
            let zeta = C64::from_polar(1.0, p.twist.phase(x, y));
            let term = a.mul(&b.shifted(x)).scale(zeta);
            accumulate(&mut out, s, term);
        }
    }
    Ok(p.rebuild(disorder, out))
}

/// `Σ_k z_k p_k`.
pub fn nc_lincomb(terms: &[(C64, &NcPoly)]) -> Result<NcPoly> {
    let Some((_, first)) = terms.first() else {
        return Err(NcError::InvalidParameter("empty linear combination".into()));
    };
    let mut disorder = first.disorder.clone();
    for (_, p) in terms {
        if let Some(spec) = first.compatible(p)? {
            if disorder.as_ref().is_some_and(|d| *d != spec) {
                return Err(NcError::Incompatible("different disorder models".into()));
            }
            disorder = Some(spec);
        }
    }
    let mut out = BTreeMap::new();
    for (z, p) in terms {
        if *z == C64::new(0.0, 0.0) {
            continue;
        }
        for (s, c) in &p.coeffs {
            accumulate(&mut out, s.clone(), c.scale(*z));
        }
    }
    Ok(first.rebuild(disorder, out))
}

/// `Φ_s(p*) = e^{i sᵀΘs} α(s)(Φ_{−s}(p)†)`.
pub fn adjoint(p: &NcPoly) -> NcPoly {
    p.map_coeffs(|t, c| {
        let s: Point = t.iter().map(|v| -v).collect();
        let phase = C64::from_polar(1.0, p.twist.phase(&s, &s));
        let value = c.dagger().shifted(&s).scale(phase);
        Some((s, value))
    })
}

/// `Φ_s(τ(λ)p) = γ_s(λ)Φ_s(p)` with `γ_s(λ) = ∏ λ_j^{s_j}`.
pub fn torus_act(lambda: &[C64], p: &NcPoly) -> Result<NcPoly> {
    if lambda.len() != p.dim() {
        return Err(NcError::DimensionMismatch { expected: p.dim(), got: lambda.len() });
    }
    for (index, z) in lambda.iter().enumerate() {
        let modulus = z.norm();
        if (modulus - 1.0).abs() > 1e-12 {
            return Err(NcError::NotUnitModulus { index, modulus });
        }
    }
    Ok(p.map_coeffs(|s, c| {
        let gamma = s
            .iter()
            .zip(lambda)
            .fold(C64::new(1.0, 0.0), |acc, (&k, z)| acc * z.powi(k as i32));
        Some((s.clone(), c.scale(gamma)))
    }))
}

/// Fejér mean: support cut to `[-n, n]^d`, weights `∏_j (1 − |s_j|/(n+1))`.
pub fn fejer(p: &NcPoly, n: usize) -> NcPoly {
    let n = n as i64;
    p.map_coeffs(|s, c| {
        if s.iter().any(|v| v.abs() > n) {
            return None;
        }
        let w: f64 = s.iter().map(|v| 1.0 - v.abs() as f64 / (n + 1) as f64).product();
        Some((s.clone(), c.scale(C64::new(w, 0.0))))
    })
}

/// `Φ_s(∂_j p) = i s_j Φ_s(p)`.
pub fn derive(p: &NcPoly, axis: usize) -> Result<NcPoly> {
    if axis >= p.dim() {
        return Err(NcError::AxisOutOfRange { axis, dim: p.dim() });
    }
    Ok(p.map_coeffs(|s, c| {
        (s[axis] != 0).then(|| (s.clone(), c.scale(C64::new(0.0, s[axis] as f64))))
    }))
}

/// `Σ_s max_ω ‖Φ_s(p)(ω)‖`, an upper bound for the C* norm.
pub fn l1_norm(p: &NcPoly, samples: &[DisorderConfig]) -> Result<f64> {
    p.coeffs.values().try_fold(0.0, |acc, c| Ok(acc + c.sup_norm(samples)?))
}

/// How `‖·‖₀` is estimated in [`smooth_seminorm`].
#[derive(Debug, Clone, PartialEq)]
pub enum NormBackend {
    L1,
    /// Largest singular value of the lattice materialization, maximized
    /// over the samples.
    OperatorEstimate(Window),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    L1,
    OperatorEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seminorm {
    pub order: usize,
    pub backend: BackendKind,
    pub value: f64,
}

fn base_norm(p: &NcPoly, backend: &NormBackend, samples: &[DisorderConfig]) -> Result<f64> {
    match backend {
        NormBackend::L1 => l1_norm(p, samples),
        NormBackend::OperatorEstimate(window) => {
            if p.is_zero() {
                return Ok(0.0);
            }
            let clean = [DisorderConfig::clean(p.dim())];
            let configs = if samples.is_empty() {
                if !p.is_clean() {
                    return Err(NcError::MissingSamples);
                }
                &clean[..]
            } else {
                samples
            };
            configs.iter().try_fold(0.0_f64, |acc, w| {
                let m = lattice::materialize(p, w, window)?;
                Ok(acc.max(lattice::op_norm_estimate(&m)))
            })
        }
    }
}

/// `‖p‖_n = ‖p‖_0 + Σ_{k=1}^n (1/k!) Σ_{i_1..i_k} ‖∂_{i_1}···∂_{i_k} p‖_0`
/// over all ordered axis tuples.
pub fn smooth_seminorm(
    p: &NcPoly,
    order: usize,
    backend: &NormBackend,
    samples: &[DisorderConfig],
) -> Result<Seminorm> {
    let d = p.dim();
    let mut value = base_norm(p, backend, samples)?;
    // every ordered k-tuple, built by extending the (k-1)-tuples
    let mut layer = vec![p.clone()];
    let mut factorial = 1.0;
    for k in 1..=order {
        factorial *= k as f64;
        let mut next = Vec::with_capacity(layer.len() * d);
        for q in &layer {
            for axis in 0..d {
                next.push(derive(q, axis)?);
            }
        }
        let sum = next
            .iter()
            .try_fold(0.0, |acc, q| Ok::<_, NcError>(acc + base_norm(q, backend, samples)?))?;
        value += sum / factorial;
        layer = next;
    }
    let backend = match backend {
        NormBackend::L1 => BackendKind::L1,
        NormBackend::OperatorEstimate(_) => BackendKind::OperatorEstimate,
    };
    Ok(Seminorm { order, backend, value })
}

/// `max_s |s|^x ‖Φ_s(p)‖` with `|s|^x = ∏ |s_j|^{x_j}` and `0^0 = 1`.
pub fn decay_profile(p: &NcPoly, x: &[u32], samples: &[DisorderConfig]) -> Result<f64> {
    if x.len() != p.dim() {
        return Err(NcError::DimensionMismatch { expected: p.dim(), got: x.len() });
    }
    p.coeffs.iter().try_fold(0.0_f64, |acc, (s, c)| {
        let weight: f64 = s.iter().zip(x).map(|(v, &e)| (v.abs() as f64).powi(e as i32)).product();
        if weight == 0.0 {
            return Ok(acc);
        }
        Ok(acc.max(weight * c.sup_norm(samples)?))
    })
}

/// `Σ_s Φ_s(p) Φ_s(p)†`, which equals `Φ_0(p p*)`.
pub fn gram0(p: &NcPoly) -> Coefficient {
    p.coeffs
        .values()
        .fold(Coefficient::zero(p.orbital_dim), |acc, c| acc.add(&c.mul(&c.dagger())))
}

/// Largest coefficientwise deviation between two polynomials, probed on the
/// given samples (or the attached probes when empty).
pub fn max_coeff_distance(p: &NcPoly, q: &NcPoly, samples: &[DisorderConfig]) -> Result<f64> {
    p.compatible(q)?;
    let diff = nc_lincomb(&[(C64::new(1.0, 0.0), p), (C64::new(-1.0, 0.0), q)])?;
    let probes;
    let samples = if samples.is_empty() {
        probes = diff.probes();
        &probes[..]
    } else {
        samples
    };
    diff.coeffs.values().try_fold(0.0_f64, |acc, c| Ok(acc.max(c.sup_norm(samples)?)))
}
