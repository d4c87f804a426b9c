mod common;

use common::*;
use ncbt_core::disorder::{sample_config, DisorderConfig};
use ncbt_core::lattice::{
    covariance_residual, direct_translation, dual_translation, materialize, position_commutator, volume_trace,
    Boundary, LatticeOperator, Window,
};
use ncbt_core::models::{build_hamiltonian, hofstadter, ssh};
use ncbt_core::twist::{adjoint, derive, nc_mul, NcPoly};
use ncbt_core::CMat;
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn diff(a: &LatticeOperator, b: &LatticeOperator) -> f64 {
    max_abs(&(a.data() - b.data()))
}

fn omega_for(p: &NcPoly, index: u64) -> DisorderConfig {
    match p.disorder() {
        Some(spec) => sample_config(spec, index),
        None => DisorderConfig::clean(p.dim()),
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn periodic_materialization_is_a_star_homomorphism(seed in any::<u64>(), disordered in any::<bool>()) {
        let mut r = rng(seed);
        let (p, q) = random_flux(&mut r, 12);
        let theta = theta2(p, q);
        let shape = PolyShape { terms: 5, radius: 2, orbital_dim: 1 + r.random_range(0..2), disordered };
        let a = random_poly(&mut r, &theta, &shape, seed);
        let b = random_poly(&mut r, &theta, &shape, seed);
        let w = Window::new(vec![12, 12], Boundary::Periodic, shape.orbital_dim).unwrap();
        let omega = omega_for(&a, seed % 7);
        let ab = materialize(&nc_mul(&a, &b).unwrap(), &omega, &w).unwrap();
        let prod = materialize(&a, &omega, &w).unwrap().mul(&materialize(&b, &omega, &w).unwrap()).unwrap();
        prop_assert!(diff(&ab, &prod) <= 1e-10);
        let star = materialize(&adjoint(&a), &omega, &w).unwrap();
        prop_assert!(diff(&star, &materialize(&a, &omega, &w).unwrap().adjoint()) <= 1e-10);
    }

    #[test]
    fn derivations_are_position_commutators(seed in any::<u64>(), axis in 0usize..2) {
        let mut r = rng(seed);
        let (p, q) = random_flux(&mut r, 12);
        let shape = PolyShape { terms: 5, radius: 5, orbital_dim: 1, disordered: true };
        let a = random_poly(&mut r, &theta2(p, q), &shape, seed);
        let w = Window::new(vec![12, 12], Boundary::Periodic, 1).unwrap();
        let omega = omega_for(&a, 0);
        let lhs = materialize(&derive(&a, axis).unwrap(), &omega, &w).unwrap();
        let rhs = position_commutator(&materialize(&a, &omega, &w).unwrap(), axis).unwrap();
        prop_assert!(diff(&lhs, &rhs) <= 1e-12);
        prop_assert!(volume_trace(&lhs, 0).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn volume_trace_is_tracial(seed in any::<u64>()) {
        let mut r = rng(seed);
        let theta = theta2(1, 4);
        let shape = PolyShape { terms: 4, radius: 2, orbital_dim: 2, disordered: false };
        let a = random_poly(&mut r, &theta, &shape, seed);
        let b = random_poly(&mut r, &theta, &shape, seed);
        let w = Window::new(vec![8, 8], Boundary::Periodic, 2).unwrap();
        let omega = DisorderConfig::clean(2);
        let (ma, mb) = (materialize(&a, &omega, &w).unwrap(), materialize(&b, &omega, &w).unwrap());
        let ab = volume_trace(&ma.mul(&mb).unwrap(), 0).unwrap();
        let ba = volume_trace(&mb.mul(&ma).unwrap(), 0).unwrap();
        prop_assert!((ab - ba).norm() <= 1e-12);
        // clean: T(p) = tr Φ₀(p) on the algebra side
        let t = a.phi0().eval(&omega).unwrap().trace();
        prop_assert!((volume_trace(&ma, 0).unwrap() - t).norm() <= 1e-12);
    }
}

#[test]
fn open_windows_agree_with_the_algebra_away_from_the_faces() {
    let mut r = rng(3);
    let theta = theta2(1, 3);
    let shape = PolyShape { terms: 4, radius: 1, orbital_dim: 1, disordered: true };
    let a = random_poly(&mut r, &theta, &shape, 3);
    let b = random_poly(&mut r, &theta, &shape, 3);
    let w = Window::new(vec![9, 9], Boundary::Open, 1).unwrap();
    let omega = omega_for(&a, 1);
    let ab = materialize(&nc_mul(&a, &b).unwrap(), &omega, &w).unwrap();
    let prod = materialize(&a, &omega, &w).unwrap().mul(&materialize(&b, &omega, &w).unwrap()).unwrap();
    let interior = w.interior(1);
    assert!(max_abs(&(ab.restrict(&interior) - prod.restrict(&interior))) <= 1e-10);
    // truncation is visible at the faces
    assert!(max_abs(&(ab.data() - prod.data())) > 1e-6);
}

#[test]
fn dual_translations_obey_the_rotation_relation() {
    for (p, q) in [(1, 3), (2, 5), (1, 6)] {
        let theta = theta2(p, q);
        let n = 30;
        let w = Window::new(vec![n, n], Boundary::Periodic, 1).unwrap();
        let u1 = dual_translation(&[1, 0], &w, &theta).unwrap();
        let u2 = dual_translation(&[0, 1], &w, &theta).unwrap();
        let angle = theta.entry(1, 0);
        let lhs = u2.mul(&u1).unwrap();
        let rhs = u1.mul(&u2).unwrap().scale(ncbt_core::C64::from_polar(1.0, angle));
        assert!(diff(&lhs, &rhs) < 1e-12, "flux {p}/{q}");
    }
}

#[test]
fn direct_translations_commute_with_dual_ones() {
    let theta = theta2(1, 4);
    let w = Window::new(vec![8, 8], Boundary::Periodic, 1).unwrap();
    for y in [[1, 0], [0, 1], [2, 3]] {
        let v = direct_translation(&y, &w, &theta).unwrap();
        for x in [[1, 0], [0, 1]] {
            let u = dual_translation(&x, &w, &theta).unwrap();
            assert!(diff(&u.mul(&v).unwrap(), &v.mul(&u).unwrap()) < 1e-12);
        }
    }
}

#[test]
fn clean_hofstadter_is_translation_covariant() {
    let m = hofstadter(1, 3, 0.0, 0).unwrap();
    let w = Window::new(vec![6, 6], Boundary::Periodic, 1).unwrap();
    let clean = DisorderConfig::clean(2);
    for y in [[1, 0], [0, 1], [2, 1]] {
        assert!(covariance_residual(&m, &clean, &y, &w, 0).unwrap() < 1e-12);
    }
}

#[test]
fn disordered_models_are_covariant_in_the_interior() {
    let m = hofstadter(1, 4, 0.5, 17).unwrap();
    let omega = sample_config(&m.disorder, 2);
    let open = Window::new(vec![10, 10], Boundary::Open, 1).unwrap();
    for y in [[1, 0], [0, 1], [1, -1]] {
        assert!(covariance_residual(&m, &omega, &y, &open, 2).unwrap() < 1e-12);
    }
    let chain = ssh(0.4, 1.1, 0.3, 5).unwrap();
    let omega = sample_config(&chain.disorder, 0);
    let w = Window::new(vec![20], Boundary::Open, 2).unwrap();
    assert!(covariance_residual(&chain, &omega, &[3], &w, 2).unwrap() < 1e-12);
}

#[test]
fn disordered_hamiltonians_are_hermitian() {
    for (m, w) in [
        (hofstadter(1, 3, 0.7, 4).unwrap(), Window::new(vec![12, 12], Boundary::Periodic, 1).unwrap()),
        (hofstadter(2, 5, 0.7, 4).unwrap(), Window::new(vec![10, 10], Boundary::Open, 1).unwrap()),
        (ssh(0.3, 1.0, 0.4, 8).unwrap(), Window::new(vec![32], Boundary::Periodic, 2).unwrap()),
    ] {
        let h = build_hamiltonian(&m).unwrap();
        for i in 0..3 {
            let x = materialize(&h, &sample_config(&m.disorder, i), &w).unwrap();
            assert!(diff(&x, &x.adjoint()) < 1e-12);
        }
    }
}
