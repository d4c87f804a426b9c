#![allow(dead_code)]

use ncbt_core::disorder::{sample_config, DisorderConfig, DisorderSpec};
use ncbt_core::twist::{rational_angle, Coefficient, NcPoly, TwistMatrix};
use ncbt_core::{CMat, Point, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = random_matrix(rng, n);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

pub fn theta2(p: i64, q: i64) -> TwistMatrix {
    TwistMatrix::from_lower(2, &[(1, 0, rational_angle(p, q).unwrap())]).unwrap()
}

/// A flux `p/q` in lowest terms with `q | n`.
pub fn random_flux(rng: &mut ChaCha8Rng, n: usize) -> (i64, i64) {
    let qs: Vec<i64> = (1..=n as i64).filter(|q| n as i64 % q == 0).collect();
    loop {
        let q = qs[rng.random_range(0..qs.len())];
        let p = rng.random_range(0..q);
        if gcd(p, q) == 1 {
            return (p, q);
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Disorder spec shared by the disordered random polynomials below.
pub fn test_disorder(dim: usize, seed: u64) -> DisorderSpec {
    DisorderSpec::new(dim, 2, 40, seed).unwrap()
}

/// Coefficient `A + ω(0)₀·B + ω(e₁)₁·C` reading two sites.
pub fn random_site_coefficient(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Coefficient {
    let (a, b, m) = (random_matrix(rng, n), random_matrix(rng, n), random_matrix(rng, n));
    Coefficient::site_fn(n, move |w: &DisorderConfig| {
        let origin = vec![0i64; dim];
        let mut e1 = origin.clone();
        e1[0] = 1;
        let v0 = w.value(&origin)?.first().copied().unwrap_or(0.0);
        let v1 = w.value(&e1)?.get(1).copied().unwrap_or(0.0);
        Ok(&a + &b * c(v0, 0.0) + &m * c(v1, 0.0))
    })
}

pub struct PolyShape {
    pub terms: usize,
    pub radius: i64,
    pub orbital_dim: usize,
    pub disordered: bool,
}

pub fn random_poly(rng: &mut ChaCha8Rng, theta: &TwistMatrix, shape: &PolyShape, disorder_seed: u64) -> NcPoly {
    let d = theta.dim();
    let terms: Vec<(Point, Coefficient)> = (0..shape.terms)
        .map(|_| {
            let s: Point = (0..d).map(|_| rng.random_range(-shape.radius..=shape.radius)).collect();
            let coeff = if shape.disordered && rng.random_bool(0.5) {
                random_site_coefficient(rng, shape.orbital_dim, d)
            } else {
                Coefficient::constant(random_matrix(rng, shape.orbital_dim))
            };
            (s, coeff)
        })
        .collect();
    let disorder = shape.disordered.then(|| test_disorder(d, disorder_seed));
    NcPoly::from_terms(theta.clone(), shape.orbital_dim, disorder, terms).unwrap()
}

pub fn samples(spec: &DisorderSpec, count: u64) -> Vec<DisorderConfig> {
    (0..count).map(|i| sample_config(spec, i)).collect()
}
