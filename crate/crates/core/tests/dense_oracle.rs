use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use fermion_distill::quasifree::{bogolubov_transform, fidelity_raw, equal_parity_probability, BasisProjection};
use fermion_distill::verify::chain::{block_state, chain_correlations, finite_chain_covariance, many_body_ground_state, Boundary};
use fermion_distill::verify::dense::{conjugate_state, dense_bogolubov, max_norm};
use fermion_distill::verify::random::{random_covariance, random_pure_covariance};
use fermion_distill::verify::twirl::{dense_twirl, dense_twirl_sampled, invariant_state_matrix, symmetry_residual};
use fermion_distill::verify::{dense_covariance, dense_fidelity, dense_from_covariance, dense_parity_probabilities, DenseState, FockSpace};
use fermion_distill::{chain_covariance, run_protocol, ChainSpec, Complex64, CovarianceMatrix, MajoranaKind};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn random_antisymmetric(n: usize, scale: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal) * scale);
    &g - g.transpose()
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (na, nb) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(na + nb, na + nb);
    out.view_mut((0, 0), (na, na)).copy_from(a);
    out.view_mut((na, na), (nb, nb)).copy_from(b);
    out
}

fn pure_psi(s: &CovarianceMatrix) -> DVector<Complex64> {
    match dense_from_covariance(s).unwrap() {
        DenseState::Pure { psi, .. } => psi,
        DenseState::Mixed { .. } => panic!("pure covariance gave a mixed state"),
    }
}

#[test]
fn pure_and_mixed_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (d_a, d_b) in [(1, 1), (1, 2), (2, 2), (3, 2)] {
        for s in [random_covariance(d_a, d_b, &mut rng).unwrap(), random_pure_covariance(d_a, d_b, &mut rng).unwrap()] {
            let state = dense_from_covariance(&s).unwrap();
            assert!(state.validity_residual() < 1e-10);
            let back = dense_covariance(&state, d_a, d_b).unwrap();
            assert!((back.m() - s.m()).amax() < 1e-10);
        }
    }
}

#[test]
fn equal_parity_probability_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in 1..=3 {
        let s = random_covariance(d, d, &mut rng).unwrap();
        let dense = dense_parity_probabilities(&dense_from_covariance(&s).unwrap(), d, d).unwrap();
        assert!((dense.sum() - 1.0).abs() < 1e-12);
        assert!((dense.equal() - equal_parity_probability(&s).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn local_bogolubov_matches_covariance_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (d_a, d_b) in [(1, 1), (2, 1), (2, 2)] {
        let s = random_covariance(d_a, d_b, &mut rng).unwrap();
        let (ga, gb) = (random_antisymmetric(2 * d_a, 0.4, &mut rng), random_antisymmetric(2 * d_b, 0.4, &mut rng));
        let (u_a, u_b) = (ga.clone().exp(), gb.clone().exp());
        let expected = bogolubov_transform(&s, &u_a, &u_b).unwrap();
        let u = dense_bogolubov(d_a, d_b, &block_diag(&ga, &gb)).unwrap();
        let moved = conjugate_state(&dense_from_covariance(&s).unwrap(), &u);
        let got = dense_covariance(&moved, d_a, d_b).unwrap();
        assert!((got.m() - expected.m()).amax() < 1e-9);
    }
}

#[test]
fn fidelity_with_random_projection_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for d in 1..=3 {
        let s = random_covariance(d, d, &mut rng).unwrap();
        let state = dense_from_covariance(&s).unwrap();
        let p = BasisProjection::new(fermion_distill::quasifree::random_orthogonal(2 * d, &mut rng)).unwrap();
        let psi = pure_psi(&p.covariance());
        let dense = dense_fidelity(&state, &psi);
        let gaussian = fidelity_raw(&s, &p).unwrap();
        assert!((dense - gaussian).norm() < 1e-9, "d = {d}");
    }
}

#[test]
fn even_operators_of_different_parties_commute() {
    let space = FockSpace::new(4).unwrap();
    let alice = [space.majorana(0, MajoranaKind::A), space.majorana(1, MajoranaKind::B)];
    let bob = [space.majorana(2, MajoranaKind::A), space.majorana(3, MajoranaKind::B)];
    let even_a = alice[0] * alice[1];
    let even_b = bob[0] * bob[1];
    assert!(max_norm(&(&even_a * &even_b - &even_b * &even_a)) < 1e-14);
    // odd elements anticommute instead
    let anti = alice[0] * bob[0] + bob[0] * alice[0];
    assert!(max_norm(&anti) < 1e-14);
    assert!(max_norm(&(alice[0] * bob[0] - bob[0] * alice[0])) > 1.0);
    // an odd Alice element and an even Bob element commute
    assert!(max_norm(&(alice[0] * &even_b - &even_b * alice[0])) < 1e-14);
}

fn random_density_matrix(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

#[test]
fn twirl_output_is_a_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let psi_plus = pure_psi(&BasisProjection::standard(2).covariance());
    for _ in 0..10 {
        let rho = random_density_matrix(16, &mut rng);
        let (params, projected) = dense_twirl(&rho, &psi_plus, 2).unwrap();
        assert!((projected.trace() - c(1.0)).norm() < 1e-12);
        assert!((params.trace() - 1.0).abs() < 1e-12);
        let eig = projected.symmetric_eigenvalues();
        assert!(eig.min() > -1e-12);
        assert!((eig.min() - params.min_eigenvalue()).abs() < 1e-10);
    }
}

#[test]
fn twirl_fixes_invariant_states() {
    let psi_plus = pure_psi(&BasisProjection::standard(2).covariance());
    let params = fermion_distill::InvariantStateParams { lambda_plus: 0.3, lambda_minus: 0.1, mu_plus: 0.05, mu_minus: 0.0375, d: 2 };
    let sigma = invariant_state_matrix(&params, &psi_plus, 2).unwrap();
    let (again, projected) = dense_twirl(&sigma, &psi_plus, 2).unwrap();
    assert!(max_norm(&(projected - &sigma)) < 1e-12);
    assert!((again.lambda_plus - 0.3).abs() < 1e-12 && (again.mu_minus - 0.0375).abs() < 1e-12);
}

#[test]
fn sampled_twirl_converges_to_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let psi_plus = pure_psi(&BasisProjection::standard(2).covariance());
    assert!(symmetry_residual(&psi_plus, 2, &mut rng).unwrap() < 1e-12);
    let rho = random_density_matrix(16, &mut rng);
    let (_, exact) = dense_twirl(&rho, &psi_plus, 2).unwrap();
    let sampled = dense_twirl_sampled(&rho, &psi_plus, 2, 2000, &mut rng).unwrap();
    let err = max_norm(&(sampled - exact));
    assert!(err < 2e-2, "Monte Carlo error {err:e}");
}

#[test]
fn dense_twirl_rejects_bad_target() {
    let psi = pure_psi(&CovarianceMatrix::vacuum(2, 2));
    let rho = DMatrix::<Complex64>::identity(16, 16) / c(16.0);
    assert!(dense_twirl(&rho, &psi, 2).is_err());
    let psi1 = pure_psi(&BasisProjection::standard(1).covariance());
    assert!(dense_twirl(&DMatrix::identity(4, 4), &psi1, 1).is_err());
}

#[test]
fn many_body_block_matches_single_particle_chain() {
    for boundary in [Boundary::Open, Boundary::ClosedShell] {
        let l = 12;
        let psi = many_body_ground_state(l, boundary).unwrap();
        for d in [1, 2] {
            let start = (l - 2 * d) / 2;
            let state = block_state(&psi, l, start, 2 * d).unwrap();
            let dense = dense_covariance(&state, d, d).unwrap();
            let single = finite_chain_covariance(d, l, boundary).unwrap();
            assert!((dense.m() - single.m()).amax() < 1e-10, "{boundary:?} d = {d}");
        }
    }
}

#[test]
fn small_ring_is_close_to_infinite_chain() {
    // a 12-site ring sits within a few percent of the infinite chain;
    // the gap closes as 1/L² (see the acceptance suite for L = 32d)
    let l = 12;
    let psi = many_body_ground_state(l, Boundary::ClosedShell).unwrap();
    for (d, tol) in [(1, 1e-2), (2, 3e-2)] {
        let state = block_state(&psi, l, (l - 2 * d) / 2, 2 * d).unwrap();
        let s = dense_covariance(&state, d, d).unwrap();
        let finite = run_protocol(&s, d.min(2), false).unwrap();
        let exact = run_protocol(&chain_covariance(&ChainSpec::new(d)).unwrap(), d.min(2), false).unwrap();
        let diff = (finite.f - exact.f).abs().max((finite.p - exact.p).abs());
        assert!(diff < tol, "d = {d}: {diff:e}");
    }
    let corr = chain_correlations(l, Boundary::ClosedShell).unwrap();
    assert!((corr.trace() - l as f64 / 2.0).abs() < 1e-10);
}
