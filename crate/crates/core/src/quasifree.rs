//! Gaussian-state calculus on covariance matrices: Wick moments, parity
//! statistics, fidelities with maximally entangled quasifree states, local
//! Bogolubov transformations and the normal form.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::covariance::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::linalg::{orthogonality_residual, pfaffian_unchecked, real_svd};
use crate::Complex64;

/// Orthogonality tolerance for basis projections.
pub const PROJECTION_ORTHOGONALITY_TOL: f64 = 1e-10;

/// Orthogonality tolerance for local Bogolubov transformations.
pub const BOGOLUBOV_ORTHOGONALITY_TOL: f64 = 1e-8;

/// Probabilities are clamped to `[0, 1]`; clamps larger than this are logged.
pub const CLAMP_LOG_TOL: f64 = 1e-9;

/// Tolerance for the block conditions checked by
/// [`optimal_fidelity_closed_form`].
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// Covariance of a pure, maximally entangled quasifree state on `d + d`
/// modes, `M = [[0, R], [-Rᵀ, 0]]` with `R` real orthogonal.
///
/// For `det R = +1` the state lies in the even total-parity sector, for
/// `det R = -1` in the odd one.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisProjection {
    d: usize,
    r: DMatrix<f64>,
    det_sign: f64,
}

impl BasisProjection {
    pub fn new(r: DMatrix<f64>) -> Result<Self> {
        if !r.is_square() || r.nrows() % 2 == 1 {
            return Err(Error::NotSquare { rows: r.nrows(), cols: r.ncols() });
        }
        let residual = orthogonality_residual(&r);
        if residual > PROJECTION_ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { residual });
        }
        let det_sign = r.clone().determinant().signum();
        Ok(Self { d: r.nrows() / 2, r, det_sign })
    }

    /// `R = 1`; realizes ψ₊ in the normal-form basis.
    pub fn standard(d: usize) -> Self {
        Self { d, r: DMatrix::identity(2 * d, 2 * d), det_sign: 1.0 }
    }

    /// `R = -1`; realizes ψ₋, the partner of [`standard`](Self::standard).
    pub fn conjugate(d: usize) -> Self {
        Self { d, r: -DMatrix::identity(2 * d, 2 * d), det_sign: 1.0 }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// `+1` for even, `-1` for odd total parity.
    pub fn parity(&self) -> f64 {
        self.det_sign
    }

    pub fn m(&self) -> DMatrix<f64> {
        let n = 2 * self.d;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, n), (n, n)).copy_from(&self.r);
        m.view_mut((n, 0), (n, n)).copy_from(&(-self.r.transpose()));
        m
    }

    pub fn covariance(&self) -> CovarianceMatrix {
        CovarianceMatrix::from_trusted(self.d, self.d, self.m())
    }
}

/// `tr(ρ B(F₁)⋯B(F₂ₙ))` for `B(F) = Σ_k F_k γ_k/√2`, as the Pfaffian of
/// `S̃_jk = F_jᵀ S F_k` (`j < k`). Odd moments vanish.
pub fn wick_moment(s: &CovarianceMatrix, vectors: &[DVector<Complex64>]) -> Result<Complex64> {
    for v in vectors {
        if v.len() != s.dim() {
            return Err(Error::DimensionMismatch { expected: s.dim(), found: v.len() });
        }
    }
    let n = vectors.len();
    if n % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let smat = s.s();
    let sf: Vec<DVector<Complex64>> = vectors.iter().map(|f| &smat * f).collect();
    let mut tilde = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        for k in (j + 1)..n {
            let v = vectors[j].transpose() * &sf[k];
            tilde[(j, k)] = v[(0, 0)];
            tilde[(k, j)] = -v[(0, 0)];
        }
    }
    Ok(pfaffian_unchecked(tilde))
}

/// Probability of equal local parities in a joint parity measurement.
///
/// The total parity `θ = θ_A θ_B` has expectation `Pf(M)` with `M` taken in
/// mode-pair order, so `p = (1 + Pf(M))/2`; this is the equal-parity formula
/// `p = (1 + (-4)^d Pf(S - 1/2))/2` with the ordering sign made explicit.
pub fn equal_parity_probability(s: &CovarianceMatrix) -> Result<f64> {
    if s.d_a() != s.d_b() {
        return Err(Error::Unsupported(format!(
            "equal-parity probability needs d_A = d_B, got {} and {}",
            s.d_a(),
            s.d_b()
        )));
    }
    let parity = total_parity(s);
    Ok(clamp_probability((1.0 + parity) / 2.0, "equal-parity probability"))
}

/// `⟨θ⟩` for the global parity `θ = (-1)^N`.
pub fn total_parity(s: &CovarianceMatrix) -> f64 {
    pfaffian_unchecked(s.mode_pair_matrix())
}

/// `⟨ψ_P, ρ_S ψ_P⟩ = Pf(1 - S - P)`, normalized by `Pf(1 - 2P) = ±1` so that
/// the result does not depend on basis ordering or on the parity of ψ_P.
pub fn fidelity(s: &CovarianceMatrix, p: &BasisProjection) -> Result<f64> {
    let raw = fidelity_raw(s, p)?;
    if raw.im.abs() > CLAMP_LOG_TOL {
        warn!("fidelity has imaginary residual {:.3e}", raw.im);
    }
    Ok(clamp_probability(raw.re, "fidelity"))
}

/// Unclamped complex value behind [`fidelity`].
pub fn fidelity_raw(s: &CovarianceMatrix, p: &BasisProjection) -> Result<Complex64> {
    if s.d_a() != p.d() || s.d_b() != p.d() {
        return Err(Error::DimensionMismatch { expected: 2 * p.d(), found: s.modes() });
    }
    let sum = s.m() + p.m();
    let a = sum.map(|x| Complex64::new(0.0, -0.5 * x));
    let pf = pfaffian_unchecked(a);
    Ok(pf * p.parity())
}

fn clamp_probability(x: f64, what: &str) -> f64 {
    let c = x.clamp(0.0, 1.0);
    if (c - x).abs() > CLAMP_LOG_TOL {
        warn!("{what} {x:.6e} clamped to [0, 1]");
    }
    c
}

/// Applies the local Bogolubov transformation `u = u_A ⊕ u_B`,
/// `M ↦ u M uᵀ`. Real orthogonal `u` is exactly the condition `ΓuΓ = u`
/// for a unitary in the Γ-invariant basis.
pub fn bogolubov_transform(
    s: &CovarianceMatrix,
    u_a: &DMatrix<f64>,
    u_b: &DMatrix<f64>,
) -> Result<CovarianceMatrix> {
    let (na, nb) = (2 * s.d_a(), 2 * s.d_b());
    for (u, n) in [(u_a, na), (u_b, nb)] {
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u.nrows().max(u.ncols()) });
        }
        let residual = orthogonality_residual(u);
        if residual > BOGOLUBOV_ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { residual });
        }
    }
    let mut u = DMatrix::zeros(na + nb, na + nb);
    u.view_mut((0, 0), (na, na)).copy_from(u_a);
    u.view_mut((na, na), (nb, nb)).copy_from(u_b);
    let m = &u * s.m() * u.transpose();
    let m = (&m - m.transpose()) * 0.5;
    Ok(CovarianceMatrix::from_trusted(s.d_a(), s.d_b(), m))
}

/// Result of [`normal_form`].
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub state: CovarianceMatrix,
    pub u_a: DMatrix<f64>,
    pub u_b: DMatrix<f64>,
    /// Singular values of `Y`, descending.
    pub singular_values: Vec<f64>,
}

impl NormalForm {
    /// Keeps the `n` modes per side carrying the `2n` largest singular values.
    pub fn top_modes(&self, n: usize) -> Result<CovarianceMatrix> {
        let (d_a, d_b) = (self.state.d_a(), self.state.d_b());
        if n > d_a.min(d_b) {
            return Err(Error::Inconsistent(format!(
                "cannot keep {n} modes of a {d_a}+{d_b} mode state"
            )));
        }
        let keep_a: Vec<usize> = (0..n).collect();
        let keep_b: Vec<usize> = (d_b - n..d_b).collect();
        self.state.restrict_modes(&keep_a, &keep_b)
    }
}

/// Diagonalizes `Y` by local Bogolubov transformations.
///
/// The `i`-th largest singular value lands at Alice position `i/2` (even `i`)
/// or `d_A + i/2` (odd `i`) and the matching Bob position, so each pair of
/// consecutive singular values belongs to one Alice mode and one Bob mode,
/// and the leading pairs sit on modes `0, 1, ...` of Alice. When `Y` has a
/// zero singular value (or `d_A ≠ d_B`) the free sign is used to keep
/// `det u_A · det u_B = +1`, which preserves the equal-parity probability.
pub fn normal_form(s: &CovarianceMatrix) -> Result<NormalForm> {
    let (d_a, d_b) = (s.d_a(), s.d_b());
    let y = s.y();
    let svd = real_svd(&y)?;
    let k = svd.singular_values.len();

    let place = |i: usize, d: usize| if i.is_multiple_of(2) { i / 2 } else { d + i / 2 };
    let mut u_a = arrange_rows(&svd.u, k, |i| place(i, d_a));
    let mut u_b = arrange_rows(&svd.v, k, |i| place(i, d_b));

    if u_a.clone().determinant() * u_b.clone().determinant() < 0.0 {
        if 2 * d_b > k {
            let row = unassigned_rows(k, 2 * d_b, |i| place(i, d_b))[0];
            u_b.row_mut(row).neg_mut();
        } else if 2 * d_a > k {
            let row = unassigned_rows(k, 2 * d_a, |i| place(i, d_a))[0];
            u_a.row_mut(row).neg_mut();
        } else if k > 0 && svd.singular_values[k - 1] <= 1e-12 {
            u_b.row_mut(place(k - 1, d_b)).neg_mut();
        }
    }
    let state = bogolubov_transform(s, &u_a, &u_b)?;
    Ok(NormalForm { state, u_a, u_b, singular_values: svd.singular_values })
}

/// Builds `Π Qᵀ`: row `pos(i)` is column `i` of `q` for `i < k`, remaining
/// columns fill the remaining rows in increasing order.
fn arrange_rows(q: &DMatrix<f64>, k: usize, pos: impl Fn(usize) -> usize) -> DMatrix<f64> {
    let n = q.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..k {
        out.row_mut(pos(i)).copy_from(&q.column(i).transpose());
    }
    for (extra, row) in unassigned_rows(k, n, &pos).into_iter().enumerate() {
        out.row_mut(row).copy_from(&q.column(k + extra).transpose());
    }
    out
}

fn unassigned_rows(k: usize, n: usize, pos: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut taken = vec![false; n];
    for i in 0..k {
        taken[pos(i)] = true;
    }
    (0..n).filter(|&r| !taken[r]).collect()
}

/// Closed-form optimal fidelity when `X = 0` or `Z = 0` and `Y` is diagonal
/// with nonnegative entries: `∏_j (1 + y_j)/2` over all `2d` diagonal
/// entries of `Y`, attained by [`BasisProjection::standard`].
pub fn optimal_fidelity_closed_form(s: &CovarianceMatrix) -> Result<f64> {
    if s.d_a() != s.d_b() {
        return Err(Error::Unsupported("closed-form optimum needs d_A = d_B".into()));
    }
    let (x, y, z) = (s.x(), s.y(), s.z());
    if x.amax() > CLOSED_FORM_TOL && z.amax() > CLOSED_FORM_TOL {
        return Err(Error::Unsupported(format!(
            "closed-form optimum needs X = 0 or Z = 0 (|X| = {:.3e}, |Z| = {:.3e}); use fidelity() directly",
            x.amax(),
            z.amax()
        )));
    }
    let n = y.nrows();
    let mut product = 1.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && y[(i, j)].abs() > CLOSED_FORM_TOL {
                return Err(Error::Unsupported(
                    "closed-form optimum needs diagonal Y; apply normal_form first".into(),
                ));
            }
        }
        if y[(i, i)] < -CLOSED_FORM_TOL {
            return Err(Error::Unsupported(
                "closed-form optimum needs nonnegative diagonal Y; apply normal_form first".into(),
            ));
        }
        product *= (1.0 + y[(i, i)]) / 2.0;
    }
    Ok(product)
}

/// Haar-random orthogonal matrix from the QR decomposition of a Gaussian
/// matrix with the sign of `diag(R)` absorbed.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    use rand_distr::StandardNormal;
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Largest fidelity over `samples` Haar-random basis projections. A
/// numerical cross-check for the closed-form optimum, not an optimizer.
pub fn best_random_projection(
    s: &CovarianceMatrix,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<(f64, BasisProjection)> {
    let d = s.d_a();
    let mut best = (f64::NEG_INFINITY, BasisProjection::standard(d));
    for _ in 0..samples {
        let p = BasisProjection::new(random_orthogonal(2 * d, rng))?;
        let f = fidelity_raw(s, &p)?.re;
        if f > best.0 {
            best = (f, p);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_projection_is_projection() {
        for d in 1..=3 {
            let p = BasisProjection::standard(d).covariance();
            let s = p.s();
            assert!(crate::verify::dense::max_norm(&(&s * &s - &s)) < 1e-12);
            assert!(p.is_pure());
        }
        let p1 = BasisProjection::standard(1).covariance().s();
        // off-diagonal block i·1/2
        assert!((p1[(0, 2)] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((p1[(1, 3)] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn self_fidelity_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..=3 {
            for p in [BasisProjection::standard(d), BasisProjection::conjugate(d)] {
                assert!((fidelity(&p.covariance(), &p).unwrap() - 1.0).abs() < 1e-12);
            }
            let p = BasisProjection::new(random_orthogonal(2 * d, &mut rng)).unwrap();
            assert!((fidelity(&p.covariance(), &p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_fidelity_with_bell_pair() {
        let f = fidelity(&CovarianceMatrix::vacuum(1, 1), &BasisProjection::standard(1)).unwrap();
        assert!((f - 0.5).abs() < 1e-14);
    }

    #[test]
    fn standard_and_conjugate_are_orthogonal() {
        for d in 1..=3 {
            let f = fidelity(&BasisProjection::standard(d).covariance(), &BasisProjection::conjugate(d))
                .unwrap();
            assert!(f.abs() < 1e-14);
        }
    }

    #[test]
    fn parity_of_vacuum_and_projections() {
        for d in 1..=3 {
            assert_eq!(equal_parity_probability(&CovarianceMatrix::vacuum(d, d)).unwrap(), 1.0);
            let p = equal_parity_probability(&BasisProjection::standard(d).covariance()).unwrap();
            assert!((p - 1.0).abs() < 1e-14);
        }
        let mixed = equal_parity_probability(&CovarianceMatrix::maximally_mixed(2, 2)).unwrap();
        assert!((mixed - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parity_needs_equal_sides() {
        assert!(matches!(
            equal_parity_probability(&CovarianceMatrix::vacuum(1, 2)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn odd_moments_vanish_and_two_point() {
        let s = CovarianceMatrix::vacuum(1, 1);
        let e = |k: usize| {
            let mut v = DVector::zeros(4);
            v[k] = Complex64::new(1.0, 0.0);
            v
        };
        assert_eq!(wick_moment(&s, &[e(0), e(1), e(2)]).unwrap(), Complex64::new(0.0, 0.0));
        let two = wick_moment(&s, &[e(0), e(1)]).unwrap();
        assert!((two - s.s()[(0, 1)]).norm() < 1e-15);
        assert!(matches!(
            wick_moment(&s, &[DVector::zeros(3), e(0)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bogolubov_identity_and_rejection() {
        let s = BasisProjection::standard(2).covariance();
        let id = DMatrix::identity(4, 4);
        assert_eq!(bogolubov_transform(&s, &id, &id).unwrap(), s);
        let bad = &id * 1.1;
        assert!(matches!(bogolubov_transform(&s, &bad, &id), Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn normal_form_of_diagonal_state_is_trivial() {
        let s = BasisProjection::standard(2).covariance();
        let nf = normal_form(&s).unwrap();
        assert!((nf.state.m() - s.m()).amax() < 1e-12);
        assert!(nf.singular_values.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn closed_form_single_mode() {
        let lambda = 0.6;
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 2)] = lambda;
        m[(1, 3)] = lambda;
        m[(2, 0)] = -lambda;
        m[(3, 1)] = -lambda;
        let s = CovarianceMatrix::new(1, 1, m).unwrap();
        let closed = optimal_fidelity_closed_form(&s).unwrap();
        let expected = ((1.0 + lambda) / 2.0f64).powi(2);
        assert!((closed - expected).abs() < 1e-14);
        let pf = fidelity(&s, &BasisProjection::standard(1)).unwrap();
        assert!((pf - expected).abs() < 1e-14);
    }

    #[test]
    fn closed_form_rejects_general_states() {
        let s = CovarianceMatrix::vacuum(1, 1);
        assert!(matches!(optimal_fidelity_closed_form(&s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 5, 8] {
            assert!(orthogonality_residual(&random_orthogonal(n, &mut rng)) < 1e-12);
        }
    }
}
