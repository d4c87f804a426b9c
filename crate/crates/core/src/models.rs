//! Covariant Hamiltonian families `H = Σ_y e^{(i/2)yᵀΘy} W_y u^y` and the
//! concrete Hofstadter and SSH builders.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::disorder::{sample_config, DisorderConfig, DisorderSpec};
use crate::error::{NcError, Result};
use crate::linalg;
use crate::twist::{rational_angle, Coefficient, NcPoly, TwistMatrix};
use crate::{CMat, Point, C64};

/// Disorder window radius used by the built-in models.
pub const DEFAULT_DISORDER_RADIUS: i64 = 64;

const CONSTRAINT_TOL: f64 = 1e-12;
const CONSTRAINT_PROBES: u64 = 3;

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub dim: usize,
    pub orbital_dim: usize,
    pub twist: TwistMatrix,
    /// `W_y`, closed under `y ↦ −y`.
    pub hoppings: BTreeMap<Point, Coefficient>,
    pub disorder: DisorderSpec,
    /// `(n₊, n₋)`: orbitals `< n₊` of each site are even under `J`.
    pub chiral_split: Option<(usize, usize)>,
}

impl ModelSpec {
    pub fn is_clean(&self) -> bool {
        self.disorder.is_clean() || self.hoppings.values().all(Coefficient::is_constant)
    }

    pub fn hopping_range(&self) -> i64 {
        self.hoppings.keys().flat_map(|y| y.iter().map(|c| c.abs())).max().unwrap_or(0)
    }

    fn probes(&self) -> Vec<DisorderConfig> {
        if self.disorder.is_clean() {
            vec![DisorderConfig::clean(self.dim)]
        } else {
            (0..CONSTRAINT_PROBES).map(|i| sample_config(&self.disorder, i)).collect()
        }
    }

    /// Checks `W_{−y} = α(−y)(W_y)†` on probe configurations.
    pub fn validate(&self) -> Result<()> {
        if self.twist.dim() != self.dim || self.disorder.dim != self.dim {
            return Err(NcError::DimensionMismatch { expected: self.dim, got: self.twist.dim() });
        }
        if let Some((a, b)) = self.chiral_split {
            if a + b != self.orbital_dim {
                return Err(NcError::InvalidParameter(format!(
                    "chiral split ({a}, {b}) does not match orbital dimension {}",
                    self.orbital_dim
                )));
            }
        }
        let probes = self.probes();
        for (y, w) in &self.hoppings {
            if y.len() != self.dim {
                return Err(NcError::DimensionMismatch { expected: self.dim, got: y.len() });
            }
            if w.orbital_dim() != self.orbital_dim {
                return Err(NcError::DimensionMismatch { expected: self.orbital_dim, got: w.orbital_dim() });
            }
            let neg: Point = y.iter().map(|c| -c).collect();
            let Some(partner) = self.hoppings.get(&neg) else {
                return Err(NcError::HermiticityViolation(y.clone()));
            };
            if constraint_defect(w, partner, y, &probes)? > CONSTRAINT_TOL {
                return Err(NcError::HermiticityViolation(y.clone()));
            }
        }
        Ok(())
    }
}

/// `max_ω ‖W_{−y}(ω) − W_y(ϱ(y)ω)†‖` over the probes.
fn constraint_defect(w: &Coefficient, partner: &Coefficient, y: &[i64], probes: &[DisorderConfig]) -> Result<f64> {
    let neg: Point = y.iter().map(|c| -c).collect();
    let expected = w.dagger().shifted(&neg);
    probes.iter().try_fold(0.0_f64, |acc, omega| {
        let diff = partner.eval(omega)? - expected.eval(omega)?;
        Ok(acc.max(linalg::max_abs(&diff)))
    })
}

/// Validates the pairs and completes each missing `W_{−y}` as
/// `α(−y)(W_y)†`, the completion that makes the Hamiltonian self-adjoint.
pub fn from_hoppings(
    dim: usize,
    orbital_dim: usize,
    twist: TwistMatrix,
    pairs: Vec<(Point, Coefficient)>,
    disorder: Option<DisorderSpec>,
) -> Result<ModelSpec> {
    let disorder = disorder.unwrap_or_else(|| DisorderSpec::clean(dim));
    let mut hoppings = BTreeMap::new();
    for (y, w) in pairs {
        if y.len() != dim {
            return Err(NcError::DimensionMismatch { expected: dim, got: y.len() });
        }
        if w.orbital_dim() != orbital_dim {
            return Err(NcError::DimensionMismatch { expected: orbital_dim, got: w.orbital_dim() });
        }
        if hoppings.insert(y.clone(), w).is_some() {
            return Err(NcError::ContradictoryHoppings(y));
        }
    }
    let mut spec = ModelSpec { dim, orbital_dim, twist, hoppings, disorder, chiral_split: None };
    let probes = spec.probes();
    let keys: Vec<Point> = spec.hoppings.keys().cloned().collect();
    for y in keys {
        let neg: Point = y.iter().map(|c| -c).collect();
        let w = spec.hoppings[&y].clone();
        match spec.hoppings.get(&neg) {
            Some(partner) => {
                if constraint_defect(&w, partner, &y, &probes)? > CONSTRAINT_TOL {
                    return Err(if neg == y {
                        NcError::HermiticityViolation(y)
                    } else {
                        NcError::ContradictoryHoppings(y)
                    });
                }
            }
            None => {
                spec.hoppings.insert(neg.clone(), w.dagger().shifted(&neg));
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// `Φ_y(H) = e^{(i/2) yᵀΘy} W_y`.
pub fn build_hamiltonian(m: &ModelSpec) -> Result<NcPoly> {
    m.validate()?;
    let terms = m.hoppings.iter().map(|(y, w)| {
        let phase = C64::from_polar(1.0, 0.5 * m.twist.phase(y, y));
        (y.clone(), w.scale(phase))
    });
    let disorder = (!m.disorder.is_clean()).then(|| m.disorder.clone());
    NcPoly::from_terms(m.twist.clone(), m.orbital_dim, disorder, terms)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn check_strength(s: f64) -> Result<()> {
    if !s.is_finite() || s < 0.0 {
        return Err(NcError::InvalidParameter(format!("disorder strength {s} must be finite and ≥ 0")));
    }
    Ok(())
}

/// Square lattice at flux `2πp/q` per plaquette with optional on-site
/// disorder `strength·(2ω(0) − 1)`.
pub fn hofstadter(p: i64, q: i64, strength: f64, seed: u64) -> Result<ModelSpec> {
    if q < 1 {
        return Err(NcError::InvalidParameter(format!("flux denominator {q} must be ≥ 1")));
    }
    if gcd(p, q) != 1 {
        return Err(NcError::InvalidParameter(format!("flux {p}/{q} is not in lowest terms")));
    }
    check_strength(strength)?;
    let twist = TwistMatrix::from_lower(2, &[(1, 0, rational_angle(p, q)?)])?;
    let mut pairs: Vec<(Point, Coefficient)> = [[1, 0], [-1, 0], [0, 1], [0, -1]]
        .into_iter()
        .map(|y| (y.to_vec(), Coefficient::real(1.0)))
        .collect();
    let disorder = if strength > 0.0 {
        pairs.push((
            vec![0, 0],
            Coefficient::site_fn(1, move |w| {
                let v = w.value(&[0, 0])?[0];
                Ok(CMat::from_element(1, 1, C64::new(strength * (2.0 * v - 1.0), 0.0)))
            }),
        ));
        Some(DisorderSpec::new(2, 1, DEFAULT_DISORDER_RADIUS, seed)?)
    } else {
        None
    };
    from_hoppings(2, 1, twist, pairs, disorder)
}

/// Disorder radius of the SSH chain; covers periodic windows up to 257 cells.
pub const SSH_DISORDER_RADIUS: i64 = 256;

/// Two-orbital chain (A = 0, B = 1) with intracell bond
/// `t_intra + s(2ω(0)₀ − 1)` and intercell bond `t_inter + s(2ω(0)₁ − 1)`
/// read at the cell the bond enters.
pub fn ssh(t_intra: f64, t_inter: f64, strength: f64, seed: u64) -> Result<ModelSpec> {
    if !t_intra.is_finite() || !t_inter.is_finite() {
        return Err(NcError::InvalidParameter("SSH hoppings must be finite".into()));
    }
    check_strength(strength)?;
    let c = |v: f64| C64::new(v, 0.0);
    let (w0, w1, disorder) = if strength > 0.0 {
        let w0 = Coefficient::site_fn(2, move |w| {
            let a = t_intra + strength * (2.0 * w.value(&[0])?[0] - 1.0);
            Ok(CMat::from_row_slice(2, 2, &[c(0.0), c(a), c(a), c(0.0)]))
        });
        let w1 = Coefficient::site_fn(2, move |w| {
            let b = t_inter + strength * (2.0 * w.value(&[0])?[1] - 1.0);
            Ok(CMat::from_row_slice(2, 2, &[c(0.0), c(b), c(0.0), c(0.0)]))
        });
        (w0, w1, Some(DisorderSpec::new(1, 2, SSH_DISORDER_RADIUS, seed)?))
    } else {
        (
            Coefficient::constant(CMat::from_row_slice(2, 2, &[c(0.0), c(t_intra), c(t_intra), c(0.0)])),
            Coefficient::constant(CMat::from_row_slice(2, 2, &[c(0.0), c(t_inter), c(0.0), c(0.0)])),
            None,
        )
    };
    let mut spec = from_hoppings(1, 2, TwistMatrix::zero(1), vec![(vec![0], w0), (vec![1], w1)], disorder)?;
    spec.chiral_split = Some((1, 1));
    Ok(spec)
}

/// Smallest cell `Q` with `Θ_{jk}·Q_k ∈ 2πZ` for all `j, k`.
pub fn magnetic_cell(twist: &TwistMatrix) -> Result<Vec<usize>> {
    const MAX_CELL: usize = 4096;
    let d = twist.dim();
    (0..d)
        .map(|k| {
            (1..=MAX_CELL)
                .find(|&q| {
                    (k + 1..d).all(|j| {
                        let turns = twist.entry(j, k) * q as f64 / (2.0 * PI);
                        (turns - turns.round()).abs() < 1e-9
                    })
                })
                .ok_or_else(|| NcError::Incommensurate(format!("no magnetic cell up to {MAX_CELL} on axis {k}")))
        })
        .collect()
}

/// Bloch matrix of a clean `h` on the cell `Q`:
/// `H(k)[(r,a),(x,b)] = Σ e^{i sᵀΘx} Φ_s[a,b] e^{−ik·m}` over `x + s = r + Q∘m`.
pub fn bloch_matrix(h: &NcPoly, cell: &[usize], k: &[f64]) -> Result<CMat> {
    let d = h.dim();
    if cell.len() != d || k.len() != d {
        return Err(NcError::DimensionMismatch { expected: d, got: cell.len().min(k.len()) });
    }
    if !h.is_clean() {
        return Err(NcError::InvalidParameter("Bloch matrices need a clean Hamiltonian".into()));
    }
    for j in 0..d {
        for l in 0..j {
            let turns = h.twist().entry(j, l) * cell[l] as f64 / (2.0 * PI);
            if (turns - turns.round()).abs() > 1e-9 {
                return Err(NcError::Incommensurate(format!("cell {cell:?} is not a magnetic cell")));
            }
        }
    }
    let n = h.orbital_dim();
    let sites: usize = cell.iter().product();
    let site = |mut idx: usize| -> Point {
        let mut x = vec![0i64; d];
        for (c, &q) in x.iter_mut().zip(cell).rev() {
            *c = (idx % q) as i64;
            idx /= q;
        }
        x
    };
    let mut out = CMat::zeros(sites * n, sites * n);
    for xi in 0..sites {
        let x = site(xi);
        for (s, coeff) in h.terms() {
            let m = coeff.as_constant().expect("clean");
            let target: Point = x.iter().zip(s).map(|(a, b)| a + b).collect();
            let mut ri = 0usize;
            let mut kdotm = 0.0;
            for (j, &t) in target.iter().enumerate() {
                let q = cell[j] as i64;
                let (cm, r) = (t.div_euclid(q), t.rem_euclid(q));
                ri = ri * cell[j] + r as usize;
                kdotm += k[j] * cm as f64;
            }
            let z = C64::from_polar(1.0, h.twist().phase(s, &x) - kdotm);
            let mut view = out.view_mut((ri * n, xi * n), (n, n));
            view += m * z;
        }
    }
    Ok(out)
}
