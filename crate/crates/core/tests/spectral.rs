mod common;

use common::*;
use nalgebra::DVector;
use ncbt_core::disorder::{sample_config, DisorderConfig};
use ncbt_core::lattice::{materialize, Boundary, LatticeOperator, Window};
use ncbt_core::models::{build_hamiltonian, hofstadter, ssh};
use ncbt_core::spectral::{
    chiral_unitary, eigh, fermi_projection, find_gaps, idempotency_residual, riesz_projection, Contour,
    QuadratureRule,
};
use ncbt_core::twist::TwistMatrix;
use ncbt_core::{CMat, C64};
use rand::Rng;

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Random Hermitian matrix with spectrum in `[-3,-g/2] ∪ [g/2,3]`, plus the
/// number of eigenvalues below zero.
fn gapped(seed: u64, n: usize, g: f64) -> (LatticeOperator, usize) {
    let mut r = rng(seed);
    let q = random_matrix(&mut r, n).qr().q();
    let below = r.random_range(1..n);
    let eigs: Vec<f64> = (0..n)
        .map(|k| if k < below { r.random_range(-3.0..-g / 2.0) } else { r.random_range(g / 2.0..3.0) })
        .collect();
    let d = CMat::from_diagonal(&DVector::from_iterator(n, eigs.iter().map(|&e| c(e, 0.0))));
    let h = &q * d * q.adjoint();
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    let w = Window::new(vec![n], Boundary::Periodic, 1).unwrap();
    (LatticeOperator::new(w, TwistMatrix::zero(1), h).unwrap(), below)
}

#[test]
fn riesz_matches_the_fermi_projection() {
    for seed in 0..20 {
        let (h, below) = gapped(seed, 32, 0.4);
        let spec = eigh(&h).unwrap();
        let fermi = fermi_projection(&spec, 0.0).unwrap();
        let contour = Contour::enclosing_below(spec.eigenvalues()[0], 0.0, 0.4, 64);
        let riesz = riesz_projection(&h, &contour).unwrap();
        assert!(max_abs(&(riesz.data() - fermi.data())) <= 1e-6, "seed {seed}");
        assert!(idempotency_residual(&riesz) <= 1e-6);
        let rank = riesz.data().trace().re;
        assert!((rank - below as f64).abs() < 1e-6);
    }
}

#[test]
fn quadrature_error_halves_under_doubling() {
    let (h, _) = gapped(99, 32, 0.6);
    let spec = eigh(&h).unwrap();
    let fermi = fermi_projection(&spec, 0.0).unwrap();
    for rule in [QuadratureRule::GaussLegendre, QuadratureRule::Trapezoid] {
        let errors: Vec<f64> = [4, 8, 16, 32]
            .iter()
            .map(|&pts| {
                let c = Contour::enclosing_below(spec.eigenvalues()[0], 0.0, 0.6, pts).with_rule(rule);
                max_abs(&(riesz_projection(&h, &c).unwrap().data() - fermi.data()))
            })
            .collect();
        for pair in errors.windows(2) {
            assert!(pair[1] <= 0.5 * pair[0] || pair[1] < 1e-12, "{rule:?}: {errors:?}");
        }
    }
}

#[test]
fn eigenvectors_reconstruct_the_matrix() {
    let m = hofstadter(1, 4, 0.5, 2).unwrap();
    let h = materialize(
        &build_hamiltonian(&m).unwrap(),
        &sample_config(&m.disorder, 0),
        &Window::new(vec![8, 8], Boundary::Periodic, 1).unwrap(),
    )
    .unwrap();
    let spec = eigh(&h).unwrap();
    let v = spec.eigenvectors();
    let d = CMat::from_diagonal(&DVector::from_iterator(64, spec.eigenvalues().iter().map(|&e| c(e, 0.0))));
    assert!(max_abs(&(v * d * v.adjoint() - h.data())) < 1e-10);
    assert!(spec.eigenvalues().windows(2).all(|p| p[0] <= p[1]));
}

#[test]
fn hofstadter_third_has_two_wide_gaps() {
    let m = hofstadter(1, 3, 0.0, 0).unwrap();
    let h = materialize(
        &build_hamiltonian(&m).unwrap(),
        &DisorderConfig::clean(2),
        &Window::new(vec![24, 24], Boundary::Periodic, 1).unwrap(),
    )
    .unwrap();
    let spec = eigh(&h).unwrap();
    assert_eq!(spec.eigenvalues().len(), 576);
    let gaps = find_gaps(&spec, 0.25);
    assert_eq!(gaps.len(), 2);
    // the two band gaps mirror each other about zero
    assert!((gaps[0].lower + gaps[1].upper).abs() < 1e-9);
    assert!((gaps[0].width() - gaps[1].width()).abs() < 1e-9);
}

#[test]
fn ssh_spectrum_is_symmetric_with_the_bloch_gap() {
    let m = ssh(0.5, 1.0, 0.0, 0).unwrap();
    let h = materialize(
        &build_hamiltonian(&m).unwrap(),
        &DisorderConfig::clean(1),
        &Window::new(vec![64], Boundary::Periodic, 2).unwrap(),
    )
    .unwrap();
    let spec = eigh(&h).unwrap();
    let e = spec.eigenvalues();
    for k in 0..e.len() {
        assert!((e[k] + e[e.len() - 1 - k]).abs() < 1e-10);
    }
    let gap = find_gaps(&spec, 0.5);
    assert_eq!(gap.len(), 1);
    assert!((gap[0].width() - 1.0).abs() < 1e-10);
}

#[test]
fn chiral_unitary_reassembles_the_flattened_hamiltonian() {
    let m = ssh(0.3, 1.0, 0.2, 6).unwrap();
    let w = Window::new(vec![40], Boundary::Periodic, 2).unwrap();
    let h = materialize(&build_hamiltonian(&m).unwrap(), &sample_config(&m.disorder, 0), &w).unwrap();
    let u = chiral_unitary(&h, (1, 1)).unwrap();
    let ud = u.data();
    assert!(max_abs(&(ud.adjoint() * ud - CMat::identity(40, 40))) < 1e-10);
    // rebuild Q = 1 − 2P in the site-major layout from its off-diagonal block
    let spec = eigh(&h).unwrap();
    let p = fermi_projection(&spec, 0.0).unwrap();
    let mut q = CMat::zeros(80, 80);
    for x in 0..40 {
        for y in 0..40 {
            q[(2 * x + 1, 2 * y)] = ud[(x, y)];
            q[(2 * x, 2 * y + 1)] = ud[(y, x)].conj();
        }
    }
    let expected = CMat::identity(80, 80) - p.data() * C64::new(2.0, 0.0);
    assert!(max_abs(&(q - expected)) < 1e-10);
}
