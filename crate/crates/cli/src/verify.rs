//! The `verify` command: a fixed, seeded battery of property and calibration
//! checks over every layer of the library. Each check reduces to a residual
//! compared against a tolerance; the report has one line per check.

use std::path::PathBuf;

use nalgebra::DMatrix;
use ncbt_core::disorder::{sample_config, shift, DisorderConfig, DisorderSpec};
use ncbt_core::invariants::{
    chern_even_with, chern_odd, chern_range, kspace_chern_oracle, lambda_const, pfaffian, winding_oracle,
    MultiIndex, EVEN_ORIENTATION,
};
use ncbt_core::lattice::{
    covariance_residual, materialize, position_commutator, volume_trace, Boundary, LatticeOperator, Window,
};
use ncbt_core::models::{bloch_matrix, build_hamiltonian, hofstadter, magnetic_cell, ssh, ModelSpec};
use ncbt_core::pipeline::{
    chern_even_samples, chern_odd_samples, diagonalize_samples, resolve_fermi_level, FermiChoice,
};
use ncbt_core::spectral::{eigh, fermi_projection, riesz_projection, Contour, QuadratureRule};
use ncbt_core::twist::{
    adjoint, cocycle, derive, fejer, gram0, l1_norm, max_coeff_distance, nc_lincomb, nc_mul, rational_angle,
    Coefficient, NcPoly, TwistMatrix,
};
use ncbt_core::{CMat, NcError, Point, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{Mutation, VerifyArgs};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutDir;

type Outcome = Result<f64, NcError>;

pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub tolerance: f64,
    pub outcome: Result<f64, String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Ok(r) if r <= self.tolerance)
    }

    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        match &self.outcome {
            Ok(r) => format!("{status} {}/{} residual={r:.3e} tolerance={:.1e}", self.suite, self.name, self.tolerance),
            Err(e) => format!("{status} {}/{} error: {e}", self.suite, self.name),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub mutation: Option<Mutation>,
}

struct Suite {
    opts: VerifyOptions,
    checks: Vec<Check>,
}

impl Suite {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
    }

    fn check(&mut self, suite: &'static str, name: &'static str, tolerance: f64, f: impl FnOnce() -> Outcome) {
        let outcome = f().map_err(|e| e.to_string());
        self.checks.push(Check { suite, name, tolerance, outcome });
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn op_diff(a: &LatticeOperator, b: &LatticeOperator) -> f64 {
    max_abs(&(a.data() - b.data()))
}

fn random_matrix(r: &mut ChaCha8Rng, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

fn theta2(p: i64, q: i64) -> Result<TwistMatrix, NcError> {
    TwistMatrix::from_lower(2, &[(1, 0, rational_angle(p, q)?)])
}

/// Reduced `p/q` with `q | n`.
fn random_flux(r: &mut ChaCha8Rng, n: i64) -> (i64, i64) {
    let divisors: Vec<i64> = (1..=n).filter(|q| n % q == 0).collect();
    loop {
        let q = divisors[r.random_range(0..divisors.len())];
        let p = r.random_range(0..q);
        if (1..=q).rev().find(|g| p % g == 0 && q % g == 0) == Some(1) {
            return (p, q);
        }
    }
}

/// Random polynomial with `terms` hops in `[−radius, radius]^d`; with a
/// disorder spec, about half the coefficients read `ω` at the origin and at
/// `e₁`.
fn random_poly(
    r: &mut ChaCha8Rng,
    theta: &TwistMatrix,
    terms: usize,
    radius: i64,
    n: usize,
    disorder: Option<&DisorderSpec>,
) -> Result<NcPoly, NcError> {
    let d = theta.dim();
    let mut pairs: Vec<(Point, Coefficient)> = Vec::with_capacity(terms);
    for _ in 0..terms {
        let s: Point = (0..d).map(|_| r.random_range(-radius..=radius)).collect();
        let coeff = if disorder.is_some() && r.random_bool(0.5) {
            let (a, b, e) = (random_matrix(r, n), random_matrix(r, n), random_matrix(r, n));
            Coefficient::site_fn(n, move |w: &DisorderConfig| {
                let origin = vec![0i64; d];
                let mut e1 = origin.clone();
                e1[0] = 1;
                let v0 = w.value(&origin)?[0];
                let v1 = w.value(&e1)?[0];
                Ok(&a + &b * c(v0) + &e * c(v1))
            })
        } else {
            Coefficient::constant(random_matrix(r, n))
        };
        pairs.push((s, coeff));
    }
    NcPoly::from_terms(theta.clone(), n, disorder.cloned(), pairs)
}

fn omega_for(p: &NcPoly, index: u64) -> DisorderConfig {
    match p.disorder() {
        Some(spec) => sample_config(spec, index),
        None => DisorderConfig::clean(p.dim()),
    }
}

fn algebra(s: &mut Suite) {
    let mut r = s.rng(1);
    s.check("algebra", "cocycle_identity", 1e-10, || {
        let mut worst = 0.0_f64;
        for _ in 0..50 {
            let angles: Vec<(usize, usize, f64)> =
                [(1, 0), (2, 0), (2, 1)].iter().map(|&(i, j)| (i, j, r.random_range(0.0..6.28))).collect();
            let theta = TwistMatrix::from_lower(3, &angles)?;
            let mut point = || -> Point { (0..3).map(|_| r.random_range(-5..=5)).collect() };
            let (x, y, z) = (point(), point(), point());
            let add = |a: &[i64], b: &[i64]| -> Point { a.iter().zip(b).map(|(u, v)| u + v).collect() };
            let lhs = cocycle(&theta, &x, &y)? * cocycle(&theta, &add(&x, &y), &z)?;
            let rhs = cocycle(&theta, &x, &add(&y, &z))? * cocycle(&theta, &y, &z)?;
            worst = worst.max((lhs - rhs).norm());
        }
        Ok(worst)
    });

    let mut r = s.rng(2);
    s.check("algebra", "monomial_commutation", 1e-12, || {
        let mut worst = 0.0_f64;
        for _ in 0..50 {
            let (p, q) = random_flux(&mut r, 12);
            let theta = theta2(p, q)?;
            let x: Point = vec![r.random_range(-4..=4), r.random_range(-4..=4)];
            let y: Point = vec![r.random_range(-4..=4), r.random_range(-4..=4)];
            let ux = NcPoly::monomial(theta.clone(), x.clone(), Coefficient::real(1.0))?;
            let uy = NcPoly::monomial(theta.clone(), y.clone(), Coefficient::real(1.0))?;
            // xᵀΘ̂y in two dimensions
            let angle = theta.entry(1, 0) * (x[1] * y[0] - x[0] * y[1]) as f64;
            let rotated = nc_lincomb(&[(C64::from_polar(1.0, angle), &nc_mul(&uy, &ux)?)])?;
            worst = worst.max(max_coeff_distance(&nc_mul(&ux, &uy)?, &rotated, &[])?);
        }
        Ok(worst)
    });

    let mut r = s.rng(3);
    let spec = DisorderSpec::new(2, 1, 24, s.opts.seed);
    s.check("algebra", "associativity", 1e-10, || {
        let spec = spec.clone()?;
        let mut worst = 0.0_f64;
        for k in 0..20 {
            let theta = {
                let (p, q) = random_flux(&mut r, 12);
                theta2(p, q)?
            };
            let dis = (k % 2 == 1).then_some(&spec);
            let a = random_poly(&mut r, &theta, 4, 2, 2, dis)?;
            let b = random_poly(&mut r, &theta, 4, 2, 2, dis)?;
            let e = random_poly(&mut r, &theta, 4, 2, 2, dis)?;
            let left = nc_mul(&nc_mul(&a, &b)?, &e)?;
            let right = nc_mul(&a, &nc_mul(&b, &e)?)?;
            worst = worst.max(max_coeff_distance(&left, &right, &[])?);
        }
        Ok(worst)
    });

    let mut r = s.rng(4);
    s.check("algebra", "adjoint_anti_multiplicative", 1e-10, || {
        let spec = spec.clone()?;
        let mut worst = 0.0_f64;
        for k in 0..20 {
            let theta = theta2(1, 3)?;
            let dis = (k % 2 == 0).then_some(&spec);
            let a = random_poly(&mut r, &theta, 4, 2, 2, dis)?;
            let b = random_poly(&mut r, &theta, 4, 2, 2, dis)?;
            let lhs = adjoint(&nc_mul(&a, &b)?);
            let rhs = nc_mul(&adjoint(&b), &adjoint(&a))?;
            worst = worst.max(max_coeff_distance(&lhs, &rhs, &[])?);
        }
        Ok(worst)
    });

    let mut r = s.rng(5);
    s.check("algebra", "leibniz_rule", 1e-10, || {
        let spec = spec.clone()?;
        let mut worst = 0.0_f64;
        for k in 0..20 {
            let theta = theta2(1, 5)?;
            let a = random_poly(&mut r, &theta, 4, 2, 2, Some(&spec))?;
            let b = random_poly(&mut r, &theta, 4, 2, 2, Some(&spec))?;
            let axis = k % 2;
            let lhs = derive(&nc_mul(&a, &b)?, axis)?;
            let rhs = nc_lincomb(&[
                (c(1.0), &nc_mul(&derive(&a, axis)?, &b)?),
                (c(1.0), &nc_mul(&a, &derive(&b, axis)?)?),
            ])?;
            worst = worst.max(max_coeff_distance(&lhs, &rhs, &[])?);
        }
        Ok(worst)
    });

    let mut r = s.rng(6);
    s.check("algebra", "gram_identity", 1e-12, || {
        let spec = spec.clone()?;
        let probes: Vec<DisorderConfig> = (0..3).map(|i| sample_config(&spec, i)).collect();
        let mut worst = 0.0_f64;
        for k in 0..100 {
            let (p, q) = random_flux(&mut r, 12);
            let n = 1 + k % 3;
            let dis = (k % 2 == 0).then_some(&spec);
            let a = random_poly(&mut r, &theta2(p, q)?, 4, 2, n, dis)?;
            let phi0 = nc_mul(&a, &adjoint(&a))?.phi0();
            let gram = gram0(&a);
            for w in &probes {
                worst = worst.max(max_abs(&(gram.eval(w)? - phi0.eval(w)?)));
            }
        }
        Ok(worst)
    });

    let mut r = s.rng(7);
    s.check("algebra", "fejer_monotone", 1e-12, || {
        let mut worst_increase = 0.0_f64;
        for _ in 0..10 {
            let a = random_poly(&mut r, &theta2(1, 6)?, 6, 3, 1, None)?;
            let mut prev = f64::INFINITY;
            for n in 0..40 {
                let diff = nc_lincomb(&[(c(1.0), &fejer(&a, n)), (c(-1.0), &a)])?;
                let e = l1_norm(&diff, &[])?;
                worst_increase = worst_increase.max(e - prev);
                prev = e;
            }
        }
        Ok(worst_increase)
    });
}

fn disorder(s: &mut Suite) {
    let mut r = s.rng(11);
    let seed = s.opts.seed;
    s.check("disorder", "shift_composition", 0.0, || {
        let spec = DisorderSpec::new(2, 2, 32, seed)?;
        let mut worst = 0.0_f64;
        for i in 0..10 {
            let omega = sample_config(&spec, i);
            let a: Point = vec![r.random_range(-5..=5), r.random_range(-5..=5)];
            let b: Point = vec![r.random_range(-5..=5), r.random_range(-5..=5)];
            let ab: Point = a.iter().zip(&b).map(|(u, v)| u + v).collect();
            let twice = shift(&shift(&omega, &a)?, &b)?;
            let once = shift(&omega, &ab)?;
            for _ in 0..20 {
                let x: Point = vec![r.random_range(-10..=10), r.random_range(-10..=10)];
                for (u, v) in twice.value(&x)?.iter().zip(once.value(&x)?) {
                    worst = worst.max((u - v).abs());
                }
            }
        }
        Ok(worst)
    });
    s.check("disorder", "sampling_is_reproducible", 0.0, || {
        let spec = DisorderSpec::new(1, 1, 64, seed)?;
        let (a, b) = (sample_config(&spec, 3), sample_config(&spec, 3));
        let mut worst = 0.0_f64;
        for x in -64..=64 {
            worst = worst.max((a.value(&[x])?[0] - b.value(&[x])?[0]).abs());
        }
        Ok(worst)
    });
}

fn lattice(s: &mut Suite) {
    let mut r = s.rng(21);
    let spec = DisorderSpec::new(2, 1, 24, s.opts.seed);
    s.check("lattice", "star_homomorphism", 1e-10, || {
        let spec = spec.clone()?;
        let w1 = Window::new(vec![12, 12], Boundary::Periodic, 1)?;
        let w2 = Window::new(vec![12, 12], Boundary::Periodic, 2)?;
        let mut worst = 0.0_f64;
        for k in 0..50 {
            let (p, q) = random_flux(&mut r, 12);
            let theta = theta2(p, q)?;
            let (n, w) = if k % 2 == 0 { (1, &w1) } else { (2, &w2) };
            let dis = (k % 3 == 0).then_some(&spec);
            let a = random_poly(&mut r, &theta, 5, 2, n, dis)?;
            let b = random_poly(&mut r, &theta, 5, 2, n, dis)?;
            let omega = omega_for(&a, k as u64);
            let (ma, mb) = (materialize(&a, &omega, w)?, materialize(&b, &omega, w)?);
            worst = worst.max(op_diff(&materialize(&nc_mul(&a, &b)?, &omega, w)?, &ma.mul(&mb)?));
            worst = worst.max(op_diff(&materialize(&adjoint(&a), &omega, w)?, &ma.adjoint()));
        }
        Ok(worst)
    });

    let mut r = s.rng(22);
    s.check("lattice", "derivation_is_position_commutator", 1e-12, || {
        let spec = spec.clone()?;
        let w = Window::new(vec![12, 12], Boundary::Periodic, 1)?;
        let mut worst = 0.0_f64;
        for k in 0..20 {
            let (p, q) = random_flux(&mut r, 12);
            let a = random_poly(&mut r, &theta2(p, q)?, 5, 5, 1, Some(&spec))?;
            let omega = omega_for(&a, 0);
            let axis = k % 2;
            let lhs = materialize(&derive(&a, axis)?, &omega, &w)?;
            let rhs = position_commutator(&materialize(&a, &omega, &w)?, axis)?;
            worst = worst.max(op_diff(&lhs, &rhs)).max(volume_trace(&lhs, 0)?.norm());
        }
        Ok(worst)
    });

    let mut r = s.rng(23);
    s.check("lattice", "trace_is_tracial", 1e-12, || {
        let w = Window::new(vec![8, 8], Boundary::Periodic, 2)?;
        let omega = DisorderConfig::clean(2);
        let mut worst = 0.0_f64;
        for _ in 0..10 {
            let theta = theta2(1, 4)?;
            let a = materialize(&random_poly(&mut r, &theta, 4, 2, 2, None)?, &omega, &w)?;
            let b = materialize(&random_poly(&mut r, &theta, 4, 2, 2, None)?, &omega, &w)?;
            worst = worst.max((volume_trace(&a.mul(&b)?, 0)? - volume_trace(&b.mul(&a)?, 0)?).norm());
        }
        Ok(worst)
    });
}

fn hofstadter_window(model: &ModelSpec, n: usize) -> Result<(NcPoly, Window), NcError> {
    Ok((build_hamiltonian(model)?, Window::new(vec![n, n], Boundary::Periodic, 1)?))
}

fn spectral(s: &mut Suite) {
    let seed = s.opts.seed;
    let gapped = move |k: u64, n: usize, g: f64| -> Result<LatticeOperator, NcError> {
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ (0x5EC7 + k));
        let q = random_matrix(&mut r, n).qr().q();
        let below = r.random_range(1..n);
        let d = CMat::from_fn(n, n, |i, j| {
            if i != j {
                c(0.0)
            } else if i < below {
                c(-g / 2.0 - (3.0 - g / 2.0) * ((i + 1) as f64 / below as f64))
            } else {
                c(g / 2.0 + (3.0 - g / 2.0) * ((i - below + 1) as f64 / (n - below) as f64))
            }
        });
        let h = &q * d * q.adjoint();
        let h = (&h + h.adjoint()) * c(0.5);
        LatticeOperator::new(Window::new(vec![n], Boundary::Periodic, 1)?, TwistMatrix::zero(1), h)
    };
    s.check("spectral", "riesz_matches_eigen_projection", 1e-6, || {
        let mut worst = 0.0_f64;
        for k in 0..20 {
            let h = gapped(k, 32, 0.4)?;
            let spec = eigh(&h)?;
            let contour = Contour::enclosing_below(spec.eigenvalues()[0], 0.0, 0.4, 64);
            worst = worst.max(op_diff(&riesz_projection(&h, &contour)?, &fermi_projection(&spec, 0.0)?));
        }
        Ok(worst)
    });
    s.check("spectral", "riesz_error_halves_under_doubling", 0.5, || {
        let h = gapped(99, 32, 0.6)?;
        let spec = eigh(&h)?;
        let exact = fermi_projection(&spec, 0.0)?;
        let mut worst_ratio = 0.0_f64;
        for rule in [QuadratureRule::GaussLegendre, QuadratureRule::Trapezoid] {
            let mut prev: Option<f64> = None;
            for pts in [4, 8, 16, 32] {
                let contour = Contour::enclosing_below(spec.eigenvalues()[0], 0.0, 0.6, pts).with_rule(rule);
                let e = op_diff(&riesz_projection(&h, &contour)?, &exact);
                if let Some(p) = prev.filter(|_| e >= 1e-12) {
                    worst_ratio = worst_ratio.max(e / p);
                }
                prev = Some(e);
            }
        }
        Ok(worst_ratio)
    });
    s.check("spectral", "ssh_spectrum_is_symmetric", 1e-10, || {
        let m = ssh(0.5, 1.0, 0.0, 0)?;
        let w = Window::new(vec![64], Boundary::Periodic, 2)?;
        let e = eigh(&materialize(&build_hamiltonian(&m)?, &DisorderConfig::clean(1), &w)?)?;
        let e = e.eigenvalues();
        Ok(e.iter().zip(e.iter().rev()).fold(0.0, |acc, (a, b)| acc.max((a + b).abs())))
    });
}

fn models(s: &mut Suite) {
    let seed = s.opts.seed;
    s.check("models", "hamiltonian_is_self_adjoint", 1e-12, || {
        let mut worst = 0.0_f64;
        for m in [hofstadter(1, 3, 0.5, seed)?, ssh(0.4, 1.1, 0.3, seed)?] {
            let h = build_hamiltonian(&m)?;
            let probes: Vec<DisorderConfig> = (0..3).map(|i| sample_config(&m.disorder, i)).collect();
            worst = worst.max(max_coeff_distance(&adjoint(&h), &h, &probes)?);
            let sizes = if m.dim == 2 { vec![12, 12] } else { vec![24] };
            let w = Window::new(sizes, Boundary::Periodic, m.orbital_dim)?;
            let mat = materialize(&h, &probes[0], &w)?;
            worst = worst.max(max_abs(&(mat.data() - mat.data().adjoint())));
        }
        Ok(worst)
    });
    s.check("models", "translation_covariance", 1e-12, || {
        let mut worst = 0.0_f64;
        let clean = hofstadter(1, 3, 0.0, seed)?;
        let torus = Window::new(vec![6, 6], Boundary::Periodic, 1)?;
        for y in [[1, 0], [0, 1], [2, 1]] {
            worst = worst.max(covariance_residual(&clean, &DisorderConfig::clean(2), &y, &torus, 0)?);
        }
        let dirty = hofstadter(1, 4, 0.5, seed)?;
        let omega = sample_config(&dirty.disorder, 2);
        let open = Window::new(vec![10, 10], Boundary::Open, 1)?;
        for y in [[1, 0], [0, 1], [1, -1]] {
            worst = worst.max(covariance_residual(&dirty, &omega, &y, &open, 2)?);
        }
        Ok(worst)
    });
}

/// Fermi projection of clean Hofstadter `1/3` on a 24×24 torus with the
/// lowest band filled.
fn hofstadter_third() -> Result<LatticeOperator, NcError> {
    let (h, w) = hofstadter_window(&hofstadter(1, 3, 0.0, 0)?, 24)?;
    let spec = eigh(&materialize(&h, &DisorderConfig::clean(2), &w)?)?;
    let e = spec.eigenvalues();
    let k = 24 * 24 / 3;
    fermi_projection(&spec, 0.5 * (e[k - 1] + e[k]))
}

fn invariants(s: &mut Suite) {
    let projection = hofstadter_third();
    let axes = MultiIndex::new(vec![0, 1], 2);
    let swapped = MultiIndex::new(vec![1, 0], 2);
    let mut prefactor = lambda_const(2).map(|l| l * EVEN_ORIENTATION);
    if s.opts.mutation == Some(Mutation::Lambda2Sign) {
        prefactor = prefactor.map(|l| -l);
    }
    let forward = match (&projection, &axes, &prefactor) {
        (Ok(p), Ok(a), Ok(l)) => chern_even_with(p, a, 0, *l),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => Err(e.clone()),
    };

    s.check("invariants", "orientation_matches_berry_flux_oracle", 1e-2, || {
        let m = hofstadter(1, 3, 0.0, 0)?;
        let h = build_hamiltonian(&m)?;
        let cell = magnetic_cell(h.twist())?;
        let oracle = kspace_chern_oracle(|k| bloch_matrix(&h, &cell, &k), 1, 64)?;
        Ok((forward.clone()?.re - oracle).abs())
    });
    s.check("invariants", "imaginary_part_vanishes", 1e-6, || Ok(forward.clone()?.im.abs()));
    s.check("invariants", "axis_swap_flips_sign", 1e-10, || {
        let p = projection.clone()?;
        Ok((forward.clone()? + chern_even_with(&p, &swapped.clone()?, 0, prefactor.clone()?)?).norm())
    });
    s.check("invariants", "complement_sums_to_zero", 2e-2, || {
        let p = projection.clone()?;
        let n = p.data().nrows();
        let complement = p.with_data(CMat::identity(n, n) - p.data())?;
        Ok((forward.clone()? + chern_even_with(&complement, &axes.clone()?, 0, prefactor.clone()?)?).norm())
    });
    s.check("invariants", "fermi_trace_in_gap_labelling_group", 1e-3, || {
        let t = volume_trace(&projection.clone()?, 0)?.re;
        let range = chern_range(&hofstadter(1, 3, 0.0, 0)?.twist, &MultiIndex::empty())?;
        Ok(match range.membership(t, 1e-3, 16) {
            Some(n) => (n.iter().zip(range.coefficients()).map(|(&k, c)| k as f64 * c).sum::<f64>() - t).abs(),
            None => f64::INFINITY,
        })
    });
    s.check("invariants", "range_is_integral_for_full_axes", 1e-14, || {
        let theta = hofstadter(1, 3, 0.0, 0)?.twist;
        let mut worst = 0.0_f64;
        for labels in [vec![1, 2], vec![1]] {
            let range = chern_range(&theta, &MultiIndex::from_one_based(&labels, 2)?)?;
            let coeffs = range.coefficients();
            worst = worst.max(if coeffs.len() == 1 { (coeffs[0] - 1.0).abs() } else { f64::INFINITY });
        }
        Ok(worst)
    });
    s.check("invariants", "odd_chern_matches_winding_oracle", 1e-3, || {
        let mut worst = 0.0_f64;
        for (t, tp) in [(0.5, 1.0), (1.0, 0.5), (0.2, 1.3)] {
            let m = ssh(t, tp, 0.0, 0)?;
            let h = build_hamiltonian(&m)?;
            let w = Window::new(vec![64], Boundary::Periodic, 2)?;
            let u = ncbt_core::spectral::chiral_unitary(&materialize(&h, &DisorderConfig::clean(1), &w)?, (1, 1))?;
            let value = chern_odd(&u, &MultiIndex::new(vec![0], 1)?, 0)?;
            let oracle = winding_oracle(|k| Ok(bloch_matrix(&h, &[1], &[k])?.view((1, 0), (1, 1)).into_owned()), 256)?;
            worst = worst.max((value.re - oracle.winding as f64).abs()).max(value.im.abs());
        }
        Ok(worst)
    });
    let mut r = s.rng(31);
    s.check("invariants", "pfaffian_squares_to_determinant", 1e-10, || {
        let mut worst = 0.0_f64;
        for k in 0..10 {
            let n = 2 + 2 * (k % 3);
            let a = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
            let a = &a - a.transpose();
            let pf = pfaffian(&a)?;
            let det = a.determinant();
            worst = worst.max((pf * pf - det).abs() / det.abs().max(1.0));
        }
        Ok(worst)
    });

    let seed = s.opts.seed;
    s.check("invariants", "hofstadter_integer_survives_disorder", 5e-2, || {
        let m = hofstadter(1, 3, 0.5, seed)?;
        let w = Window::new(vec![24, 24], Boundary::Periodic, 1)?;
        let spectra = diagonalize_samples(&m, &w, 2)?;
        let (ef, _) = resolve_fermi_level(&spectra, FermiChoice::GapIndex { index: 0, min_width: 0.05 })?;
        let result = chern_even_samples(&m, &w, 2, ef, &axes.clone()?, 0)?;
        Ok((result.value - 1.0).abs())
    });
    s.check("invariants", "ssh_integer_survives_disorder", 5e-2, || {
        let m = ssh(0.5, 1.0, 0.1, seed)?;
        let w = Window::new(vec![64], Boundary::Periodic, 2)?;
        let result = chern_odd_samples(&m, &w, 4, &MultiIndex::new(vec![0], 1)?, 0)?;
        Ok((result.value - 1.0).abs())
    });
}

/// Runs every suite in a fixed order.
pub fn run_suites(opts: VerifyOptions) -> Vec<Check> {
    let mut suite = Suite { opts, checks: Vec::new() };
    algebra(&mut suite);
    disorder(&mut suite);
    lattice(&mut suite);
    spectral(&mut suite);
    models(&mut suite);
    invariants(&mut suite);
    suite.checks
}

pub fn report(checks: &[Check]) -> String {
    let mut text: String = checks.iter().map(|c| c.line() + "\n").collect();
    let failed = checks.iter().filter(|c| !c.passed()).count();
    text.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    text
}

pub fn command(args: &VerifyArgs) -> Result<(), CliError> {
    let config = args.config.as_deref().map(RunConfig::load).transpose()?;
    let seed = args.common.seed.or(config.as_ref().map(|c| c.invariant.seed)).unwrap_or(0);
    let out: Option<PathBuf> =
        args.common.out.clone().or_else(|| config.as_ref().and_then(|c| c.output.dir.as_ref().map(PathBuf::from)));
    let checks = run_suites(VerifyOptions { seed, mutation: args.mutate });
    let text = report(&checks);
    print!("{text}");
    if let Some(dir) = out {
        OutDir::create(dir)?.text("verify.txt", &text)?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::Check(format!("{failed} of {} verification checks failed", checks.len())));
    }
    Ok(())
}
