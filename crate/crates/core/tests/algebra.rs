mod common;

use common::*;
use ncbt_core::twist::{
    adjoint, antisym, cocycle, derive, fejer, gram0, l1_norm, max_coeff_distance, nc_lincomb, nc_mul,
    smooth_seminorm, torus_act, Coefficient, NcPoly, NormBackend,
};
use ncbt_core::C64;
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn shape(disordered: bool) -> PolyShape {
    PolyShape { terms: 4, radius: 2, orbital_dim: 2, disordered }
}

fn close(p: &NcPoly, q: &NcPoly, tol: f64) -> bool {
    max_coeff_distance(p, q, &[]).unwrap() <= tol
}

fn sum(p: &NcPoly, q: &NcPoly) -> NcPoly {
    nc_lincomb(&[(c(1.0, 0.0), p), (c(1.0, 0.0), q)]).unwrap()
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn cocycle_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let theta = ncbt_core::twist::TwistMatrix::from_lower(3, &[
            (1, 0, r.random_range(0.0..6.28)), (2, 0, r.random_range(0.0..6.28)), (2, 1, r.random_range(0.0..6.28)),
        ]).unwrap();
        let mut point = || -> Vec<i64> { (0..3).map(|_| r.random_range(-5..=5)).collect() };
        let (x, y, z) = (point(), point(), point());
        let add = |a: &[i64], b: &[i64]| -> Vec<i64> { a.iter().zip(b).map(|(u, v)| u + v).collect() };
        let lhs = cocycle(&theta, &x, &y).unwrap() * cocycle(&theta, &add(&x, &y), &z).unwrap();
        let rhs = cocycle(&theta, &x, &add(&y, &z)).unwrap() * cocycle(&theta, &y, &z).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
        prop_assert!((cocycle(&theta, &x, &y).unwrap().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn monomials_commute_up_to_the_antisymmetrized_twist(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, q) = random_flux(&mut r, 12);
        let theta = theta2(p, q);
        let x = vec![r.random_range(-4..=4), r.random_range(-4..=4)];
        let y = vec![r.random_range(-4..=4), r.random_range(-4..=4)];
        let ux = NcPoly::monomial(theta.clone(), x.clone(), Coefficient::real(1.0)).unwrap();
        let uy = NcPoly::monomial(theta.clone(), y.clone(), Coefficient::real(1.0)).unwrap();
        let hat = antisym(&theta);
        let angle: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| x[i] as f64 * hat[(i, j)] * y[j] as f64)
            .sum();
        let xy = nc_mul(&ux, &uy).unwrap();
        let yx = nc_mul(&uy, &ux).unwrap();
        let rotated = nc_lincomb(&[(C64::from_polar(1.0, angle), &yx)]).unwrap();
        prop_assert!(close(&xy, &rotated, 1e-12));
    }

    #[test]
    fn product_is_associative_and_distributive(seed in any::<u64>(), disordered in any::<bool>()) {
        let mut r = rng(seed);
        let (p, q) = random_flux(&mut r, 12);
        let theta = theta2(p, q);
        let [a, b, e] = [0, 1, 2].map(|_| random_poly(&mut r, &theta, &shape(disordered), seed));
        let left = nc_mul(&nc_mul(&a, &b).unwrap(), &e).unwrap();
        let right = nc_mul(&a, &nc_mul(&b, &e).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-10));
        let dist = nc_mul(&a, &sum(&b, &e)).unwrap();
        let expanded = sum(&nc_mul(&a, &b).unwrap(), &nc_mul(&a, &e).unwrap());
        prop_assert!(close(&dist, &expanded, 1e-10));
    }

    #[test]
    fn adjoint_is_an_anti_multiplicative_involution(seed in any::<u64>(), disordered in any::<bool>()) {
        let mut r = rng(seed);
        let (p, q) = random_flux(&mut r, 12);
        let theta = theta2(p, q);
        let a = random_poly(&mut r, &theta, &shape(disordered), seed);
        let b = random_poly(&mut r, &theta, &shape(disordered), seed);
        prop_assert!(close(&adjoint(&adjoint(&a)), &a, 1e-12));
        let lhs = adjoint(&nc_mul(&a, &b).unwrap());
        let rhs = nc_mul(&adjoint(&b), &adjoint(&a)).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn derivations_obey_leibniz(seed in any::<u64>(), axis in 0usize..2) {
        let mut r = rng(seed);
        let theta = theta2(1, 5);
        let a = random_poly(&mut r, &theta, &shape(true), seed);
        let b = random_poly(&mut r, &theta, &shape(true), seed);
        let lhs = derive(&nc_mul(&a, &b).unwrap(), axis).unwrap();
        let rhs = sum(
            &nc_mul(&derive(&a, axis).unwrap(), &b).unwrap(),
            &nc_mul(&a, &derive(&b, axis).unwrap()).unwrap(),
        );
        prop_assert!(close(&lhs, &rhs, 1e-10));
        // ∂ commutes with the adjoint
        prop_assert!(close(&derive(&adjoint(&a), axis).unwrap(), &adjoint(&derive(&a, axis).unwrap()), 1e-12));
    }

    #[test]
    fn torus_action_is_a_star_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let theta = theta2(2, 7);
        let lambda = [C64::from_polar(1.0, r.random_range(0.0..6.28)), C64::from_polar(1.0, r.random_range(0.0..6.28))];
        let a = random_poly(&mut r, &theta, &shape(true), seed);
        let b = random_poly(&mut r, &theta, &shape(true), seed);
        let lhs = torus_act(&lambda, &nc_mul(&a, &b).unwrap()).unwrap();
        let rhs = nc_mul(&torus_act(&lambda, &a).unwrap(), &torus_act(&lambda, &b).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-10));
        let star = torus_act(&lambda, &adjoint(&a)).unwrap();
        prop_assert!(close(&star, &adjoint(&torus_act(&lambda, &a).unwrap()), 1e-12));
    }

    #[test]
    fn gram_coefficient_matches_the_product(seed in any::<u64>(), disordered in any::<bool>()) {
        let mut r = rng(seed);
        let (p, q) = random_flux(&mut r, 12);
        let a = random_poly(&mut r, &theta2(p, q), &shape(disordered), seed);
        let phi0 = nc_mul(&a, &adjoint(&a)).unwrap().phi0();
        let probes = if disordered { samples(&test_disorder(2, seed), 3) } else { vec![ncbt_core::disorder::DisorderConfig::clean(2)] };
        for w in &probes {
            let diff = gram0(&a).eval(w).unwrap() - phi0.eval(w).unwrap();
            prop_assert!(diff.iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn l1_norm_is_submultiplicative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let theta = theta2(1, 3);
        let a = random_poly(&mut r, &theta, &shape(false), seed);
        let b = random_poly(&mut r, &theta, &shape(false), seed);
        let ab = l1_norm(&nc_mul(&a, &b).unwrap(), &[]).unwrap();
        prop_assert!(ab <= l1_norm(&a, &[]).unwrap() * l1_norm(&b, &[]).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn seminorms_grow_with_the_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_poly(&mut r, &theta2(1, 4), &shape(false), seed);
        let mut prev = 0.0;
        for order in 0..4 {
            let v = smooth_seminorm(&a, order, &NormBackend::L1, &[]).unwrap().value;
            prop_assert!(v + 1e-12 >= prev);
            prev = v;
        }
    }

    #[test]
    fn fejer_error_decreases(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_poly(&mut r, &theta2(1, 6), &PolyShape { terms: 6, radius: 3, orbital_dim: 1, disordered: false }, seed);
        let mut prev = f64::INFINITY;
        for n in 0..40 {
            let diff = nc_lincomb(&[(c(1.0, 0.0), &fejer(&a, n)), (c(-1.0, 0.0), &a)]).unwrap();
            let e = l1_norm(&diff, &[]).unwrap();
            prop_assert!(e <= prev + 1e-12);
            prev = e;
        }
    }
}

#[test]
fn operator_seminorm_is_bounded_by_the_l1_seminorm() {
    let mut r = rng(11);
    let theta = theta2(1, 4);
    let a = random_poly(&mut r, &theta, &shape(false), 0);
    let window = ncbt_core::lattice::Window::new(vec![12, 12], ncbt_core::lattice::Boundary::Periodic, 2).unwrap();
    for order in 0..3 {
        let op = smooth_seminorm(&a, order, &NormBackend::OperatorEstimate(window.clone()), &[]).unwrap();
        let l1 = smooth_seminorm(&a, order, &NormBackend::L1, &[]).unwrap();
        assert!(op.value <= l1.value * (1.0 + 1e-10), "order {order}: {} > {}", op.value, l1.value);
    }
}
