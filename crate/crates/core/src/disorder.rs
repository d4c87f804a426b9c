//! The disorder hull: i.i.d. per-site configurations on a finite window of
//! `Z^d`, the shift action on them, the induced action on coefficients and
//! the weighted product metric.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NcError, Result};
use crate::twist::Coefficient;
use crate::Point;

/// Per-coordinate sampling law for the single-site space `[0,1]^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteDistribution {
    Uniform { low: f64, high: f64 },
}

impl Default for SiteDistribution {
    fn default() -> Self {
        SiteDistribution::Uniform { low: 0.0, high: 1.0 }
    }
}

/// Description of a disorder model. `per_site_dim == 0` is the clean case,
/// where the hull is a single point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub dim: usize,
    pub per_site_dim: usize,
    pub window_radius: i64,
    #[serde(default)]
    pub distribution: SiteDistribution,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn clean(dim: usize) -> Self {
        DisorderSpec {
            dim,
            per_site_dim: 0,
            window_radius: 0,
            distribution: SiteDistribution::default(),
            seed: 0,
        }
    }

    pub fn new(dim: usize, per_site_dim: usize, window_radius: i64, seed: u64) -> Result<Self> {
        let spec = DisorderSpec {
            dim,
            per_site_dim,
            window_radius,
            distribution: SiteDistribution::default(),
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn is_clean(&self) -> bool {
        self.per_site_dim == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(NcError::InvalidParameter("disorder dimension must be >= 1".into()));
        }
        if self.window_radius < 0 {
            return Err(NcError::InvalidParameter("window radius must be >= 0".into()));
        }
        let SiteDistribution::Uniform { low, high } = self.distribution;
        if !(0.0 <= low && low < high && high <= 1.0) {
            return Err(NcError::InvalidParameter(format!(
                "uniform range [{low}, {high}] must lie inside [0, 1]"
            )));
        }
        Ok(())
    }

    fn side(&self) -> usize {
        (2 * self.window_radius + 1) as usize
    }

    fn site_offset(&self, site: &[i64]) -> usize {
        let side = self.side() as i64;
        site.iter()
            .fold(0i64, |acc, &c| acc * side + (c + self.window_radius)) as usize
    }
}

/// One point `ω` of the hull, stored on `[-R, R]^d` and read through a
/// lazily applied shift. A periodized configuration reads its values
/// modulo a period instead of failing outside the window.
#[derive(Debug, Clone)]
pub struct DisorderConfig {
    spec: Arc<DisorderSpec>,
    values: Arc<Vec<f64>>,
    offset: Point,
    period: Option<Vec<usize>>,
}

impl PartialEq for DisorderConfig {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.offset == other.offset
            && self.period == other.period
            && (Arc::ptr_eq(&self.values, &other.values) || self.values == other.values)
    }
}

impl DisorderConfig {
    /// The unique configuration of the clean hull.
    pub fn clean(dim: usize) -> Self {
        DisorderConfig {
            spec: Arc::new(DisorderSpec::clean(dim)),
            values: Arc::new(Vec::new()),
            offset: vec![0; dim],
            period: None,
        }
    }

    pub fn spec(&self) -> &DisorderSpec {
        &self.spec
    }

    pub fn offset(&self) -> &[i64] {
        &self.offset
    }

    pub fn is_clean(&self) -> bool {
        self.spec.is_clean()
    }

    /// Single-site value `ω(x)` in `[0,1]^m`.
    pub fn value(&self, x: &[i64]) -> Result<&[f64]> {
        if x.len() != self.spec.dim {
            return Err(NcError::DimensionMismatch { expected: self.spec.dim, got: x.len() });
        }
        let m = self.spec.per_site_dim;
        if m == 0 {
            return Ok(&[]);
        }
        let mut site: Point = x.iter().zip(&self.offset).map(|(a, b)| a + b).collect();
        if let Some(period) = &self.period {
            for (c, &n) in site.iter_mut().zip(period) {
                *c = c.rem_euclid(n as i64);
            }
        }
        let r = self.spec.window_radius;
        let reach = site.iter().map(|c| c.abs()).max().unwrap_or(0);
        if reach > r {
            return Err(NcError::WindowExceeded { site, required: reach, radius: r });
        }
        let start = self.spec.site_offset(&site) * m;
        Ok(&self.values[start..start + m])
    }

    /// The same configuration viewed as periodic with the given period,
    /// reading the cell `[0, N_j)` of the stored window.
    pub fn periodized(&self, period: &[usize]) -> Result<Self> {
        if period.len() != self.spec.dim {
            return Err(NcError::DimensionMismatch { expected: self.spec.dim, got: period.len() });
        }
        if self.is_clean() {
            return Ok(self.clone());
        }
        let need = period.iter().map(|&n| n as i64 - 1).max().unwrap_or(0);
        if need > self.spec.window_radius {
            return Err(NcError::WindowExceeded {
                site: period.iter().map(|&n| n as i64 - 1).collect(),
                required: need,
                radius: self.spec.window_radius,
            });
        }
        let mut out = self.clone();
        out.period = Some(period.to_vec());
        Ok(out)
    }

    pub fn period(&self) -> Option<&[usize]> {
        self.period.as_deref()
    }
}

/// Deterministic draw of configuration number `index` for `spec`.
///
/// Each index selects an independent ChaCha8 stream under the spec's seed;
/// sites are filled in lexicographic order of `[-R, R]^d`.
pub fn sample_config(spec: &DisorderSpec, index: u64) -> DisorderConfig {
    let m = spec.per_site_dim;
    let values = if m == 0 {
        Vec::new()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(index);
        let SiteDistribution::Uniform { low, high } = spec.distribution;
        let count = spec.side().pow(spec.dim as u32) * m;
        (0..count).map(|_| low + (high - low) * rng.random::<f64>()).collect()
    };
    DisorderConfig {
        spec: Arc::new(spec.clone()),
        values: Arc::new(values),
        offset: vec![0; spec.dim],
        period: None,
    }
}

/// `(ϱ(s)ω)(x) = ω(x + s)`.
pub fn shift(omega: &DisorderConfig, s: &[i64]) -> Result<DisorderConfig> {
    let dim = omega.spec.dim;
    if s.len() != dim {
        return Err(NcError::DimensionMismatch { expected: dim, got: s.len() });
    }
    if omega.is_clean() {
        return Ok(omega.clone());
    }
    let offset: Point = omega.offset.iter().zip(s).map(|(a, b)| a + b).collect();
    if omega.period.is_none() {
        let reach = offset.iter().map(|c| c.abs()).max().unwrap_or(0);
        if reach > omega.spec.window_radius {
            return Err(NcError::WindowExceeded {
                site: offset,
                required: reach,
                radius: omega.spec.window_radius,
            });
        }
    }
    Ok(DisorderConfig { offset, ..omega.clone() })
}

/// `(α(s)c)(ω) = c(ϱ(−s)ω)`; constants are fixed points.
pub fn act(s: &[i64], c: &Coefficient) -> Coefficient {
    c.shifted(s)
}

/// Enumeration of `[-R, R]^d` by shells of growing sup-norm, each shell in
/// lexicographic order. Stops after `limit` sites.
pub fn spiral_sites(dim: usize, radius: i64, limit: usize) -> Vec<Point> {
    let mut out = Vec::new();
    for r in 0..=radius {
        let side = (2 * r + 1) as usize;
        let total = side.pow(dim as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut p = vec![0i64; dim];
            for c in p.iter_mut().rev() {
                *c = (rem % side) as i64 - r;
                rem /= side;
            }
            if p.iter().map(|c| c.abs()).max().unwrap_or(0) == r {
                out.push(p);
                if out.len() >= limit {
                    return out;
                }
            }
        }
    }
    out
}

// 2^-n underflows to zero past this index
const METRIC_TERMS: usize = 1100;

/// Weighted product metric `Σ_n 2^{-n} d(ω₁(x_n), ω₂(x_n)) / (1 + d(..))`
/// with Euclidean `d` on `[0,1]^m` and `x_n` the spiral enumeration.
/// A site readable in only one configuration contributes the bound 1.
pub fn hull_metric(a: &DisorderConfig, b: &DisorderConfig) -> Result<f64> {
    if a.spec != b.spec {
        return Err(NcError::SpecMismatch);
    }
    if a.is_clean() {
        return Ok(0.0);
    }
    let sites = spiral_sites(a.spec.dim, a.spec.window_radius, METRIC_TERMS);
    let mut total = 0.0;
    let mut weight = 1.0;
    for x in &sites {
        weight *= 0.5;
        let term = match (a.value(x), b.value(x)) {
            (Ok(u), Ok(v)) => {
                let d = u.iter().zip(v).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
                d / (1.0 + d)
            }
            (Err(_), Err(_)) => 0.0,
            _ => 1.0,
        };
        total += weight * term;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CMat;
    use crate::C64;

    fn spec2() -> DisorderSpec {
        DisorderSpec::new(2, 2, 4, 7).unwrap()
    }

    #[test]
    fn clean_sample_is_unique() {
        let spec = DisorderSpec::clean(2);
        let a = sample_config(&spec, 0);
        let b = sample_config(&spec, 5);
        assert_eq!(a, b);
        assert_eq!(a.value(&[100, -3]).unwrap(), &[] as &[f64]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_config(&spec2(), 3);
        let b = sample_config(&spec2(), 3);
        assert_eq!(a, b);
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn different_indices_differ() {
        let a = sample_config(&spec2(), 0);
        let b = sample_config(&spec2(), 1);
        let differs = spiral_sites(2, 4, usize::MAX)
            .iter()
            .any(|x| a.value(x).unwrap() != b.value(x).unwrap());
        assert!(differs);
    }

    #[test]
    fn values_lie_in_unit_cube() {
        let a = sample_config(&spec2(), 2);
        assert!(a.values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(a.values.len(), 81 * 2);
    }

    #[test]
    fn shift_identity_and_inverse() {
        let w = sample_config(&spec2(), 0);
        assert_eq!(shift(&w, &[0, 0]).unwrap(), w);
        let back = shift(&shift(&w, &[2, -1]).unwrap(), &[-2, 1]).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn shift_composes() {
        let w = sample_config(&spec2(), 0);
        let a = shift(&shift(&w, &[1, 0]).unwrap(), &[0, 1]).unwrap();
        let b = shift(&w, &[1, 1]).unwrap();
        for x in spiral_sites(2, 3, usize::MAX) {
            assert_eq!(a.value(&x).unwrap(), b.value(&x).unwrap());
        }
        // pointwise definition
        assert_eq!(a.value(&[0, 0]).unwrap(), w.value(&[1, 1]).unwrap());
    }

    #[test]
    fn shift_outside_window_is_rejected() {
        let w = sample_config(&spec2(), 0);
        match shift(&w, &[5, 0]) {
            Err(NcError::WindowExceeded { required, radius, .. }) => {
                assert_eq!(required, 5);
                assert_eq!(radius, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn periodized_reads_wrap() {
        let w = sample_config(&spec2(), 0).periodized(&[3, 3]).unwrap();
        assert_eq!(w.value(&[4, -1]).unwrap(), w.value(&[1, 2]).unwrap());
        assert!(sample_config(&spec2(), 0).periodized(&[6, 6]).is_err());
    }

    #[test]
    fn act_on_constant_is_identity() {
        let c = Coefficient::scalar(C64::new(2.0, 1.0));
        let w = sample_config(&spec2(), 0);
        let shifted = act(&[1, 2], &c);
        assert_eq!(shifted.eval(&w).unwrap(), c.eval(&w).unwrap());
    }

    #[test]
    fn act_reads_shifted_configuration() {
        let f = Coefficient::site_fn(1, |w| {
            let v = w.value(&[0, 0])?;
            Ok(CMat::from_element(1, 1, C64::new(v[0], v[1])))
        });
        for idx in 0..3 {
            let w = sample_config(&spec2(), idx);
            let lhs = act(&[1, 0], &f).eval(&w).unwrap();
            let rhs = f.eval(&shift(&w, &[-1, 0]).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            assert_eq!(act(&[0, 0], &f).eval(&w).unwrap(), f.eval(&w).unwrap());
            // α(s)∘α(t) = α(s+t)
            let st = act(&[1, 0], &act(&[0, -1], &f)).eval(&w).unwrap();
            assert_eq!(st, act(&[1, -1], &f).eval(&w).unwrap());
        }
    }

    #[test]
    fn spiral_order_starts_at_origin() {
        let s = spiral_sites(2, 1, usize::MAX);
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], vec![0, 0]);
        assert_eq!(s[1], vec![-1, -1]);
        assert_eq!(s[2], vec![-1, 0]);
    }

    #[test]
    fn metric_axioms() {
        let spec = spec2();
        let configs: Vec<_> = (0..6).map(|i| sample_config(&spec, i)).collect();
        let mut shifted = configs.clone();
        shifted.push(shift(&configs[0], &[1, 0]).unwrap());
        shifted.push(shift(&configs[1], &[-2, 3]).unwrap());
        for a in &shifted {
            assert_eq!(hull_metric(a, a).unwrap(), 0.0);
            for b in &shifted {
                let ab = hull_metric(a, b).unwrap();
                assert!((ab - hull_metric(b, a).unwrap()).abs() < 1e-15);
                for c in &shifted {
                    let ac = hull_metric(a, c).unwrap();
                    let bc = hull_metric(b, c).unwrap();
                    assert!(ac <= ab + bc + 1e-15);
                }
            }
        }
        assert!(hull_metric(&configs[0], &configs[1]).unwrap() > 0.0);
    }

    #[test]
    fn metric_rejects_spec_mismatch() {
        let a = sample_config(&spec2(), 0);
        let other = DisorderSpec::new(2, 2, 4, 8).unwrap();
        let b = sample_config(&other, 0);
        assert_eq!(hull_metric(&a, &b), Err(NcError::SpecMismatch));
    }
}
