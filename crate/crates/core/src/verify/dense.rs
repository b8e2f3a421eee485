//! Dense states, their covariance matrices, moments and parity statistics.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::covariance::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::Complex64;

use super::fock::{occupation, FockSpace};

/// Largest total mode count accepted by [`dense_from_covariance`].
pub const COVARIANCE_MAX_MODES: usize = 7;

/// `|ν|` of mixed normal modes is clipped below `1` by this much before
/// taking `artanh`.
const NU_CLIP: f64 = 1e-14;

/// A pure or mixed state on `modes` fermionic modes in the Jordan–Wigner
/// basis.
#[derive(Debug, Clone)]
pub enum DenseState {
    Pure { modes: usize, psi: DVector<Complex64> },
    Mixed { modes: usize, rho: DMatrix<Complex64> },
}

impl DenseState {
    pub fn modes(&self) -> usize {
        match self {
            Self::Pure { modes, .. } | Self::Mixed { modes, .. } => *modes,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.modes()
    }

    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        match self {
            Self::Pure { psi, .. } => psi * psi.adjoint(),
            Self::Mixed { rho, .. } => rho.clone(),
        }
    }

    /// `tr(ρ A)`.
    pub fn expectation(&self, a: &DMatrix<Complex64>) -> Complex64 {
        match self {
            Self::Pure { psi, .. } => psi.dotc(&(a * psi)),
            Self::Mixed { rho, .. } => (a * rho).trace(),
        }
    }

    /// Diagonal of ρ in the occupation basis.
    pub fn populations(&self) -> Vec<f64> {
        match self {
            Self::Pure { psi, .. } => psi.iter().map(|z| z.norm_sqr()).collect(),
            Self::Mixed { rho, .. } => (0..rho.nrows()).map(|i| rho[(i, i)].re).collect(),
        }
    }

    /// Largest deviation from unit trace, Hermiticity and positivity.
    pub fn validity_residual(&self) -> f64 {
        match self {
            Self::Pure { psi, .. } => (psi.norm() - 1.0).abs(),
            Self::Mixed { rho, .. } => {
                let herm = max_norm(&(rho - rho.adjoint()));
                let trace = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
                let eig = SymmetricEigen::new((rho + rho.adjoint()) * Complex64::new(0.5, 0.0));
                let neg = (-eig.eigenvalues.min()).max(0.0);
                herm.max(trace).max(neg)
            }
        }
    }
}

/// Largest entry modulus.
pub fn max_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_modes(s: &CovarianceMatrix) -> Result<()> {
    if s.modes() > COVARIANCE_MAX_MODES {
        return Err(Error::TooLarge { what: "mode count", size: s.modes(), limit: COVARIANCE_MAX_MODES });
    }
    Ok(())
}

/// `(i/4) Σ_jk h_jk γ_j γ_k`
fn quadratic_operator(gammas: &[&DMatrix<Complex64>], h: &DMatrix<f64>) -> DMatrix<Complex64> {
    let dim = gammas[0].nrows();
    let mut out = DMatrix::zeros(dim, dim);
    for j in 0..gammas.len() {
        for k in (j + 1)..gammas.len() {
            if h[(j, k)] != 0.0 {
                // h antisymmetric: the (j,k) and (k,j) terms are equal
                out += (gammas[j] * gammas[k]) * Complex64::new(0.0, 0.5 * h[(j, k)]);
            }
        }
    }
    out
}

fn hermitian_eigen(h: DMatrix<Complex64>) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h)
}

/// Builds the dense state with covariance `s`.
///
/// A pure `s` yields the ground state of `H = (i/4) Σ M_jk γ_j γ_k`, whose
/// spectrum has gap 1. A mixed `s` yields `e^{-H}/Z` with `M = tanh(h/2)`
/// taken as a matrix function of `iM`; this covers every valid covariance,
/// not only mode-diagonal ones.
pub fn dense_from_covariance(s: &CovarianceMatrix) -> Result<DenseState> {
    check_modes(s)?;
    let modes = s.modes();
    let space = FockSpace::new(modes)?;
    let gammas = space.covariance_majoranas(s.d_a(), s.d_b())?;

    if s.is_pure() {
        let eig = hermitian_eigen(quadratic_operator(&gammas, s.m()));
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let gap = eig.eigenvalues[order[1]] - eig.eigenvalues[order[0]];
        if gap < 0.5 {
            return Err(Error::Numerical(format!("ground state gap {gap:.3e} too small")));
        }
        let psi = eig.eigenvectors.column(order[0]).into_owned();
        return Ok(DenseState::Pure { modes, psi });
    }

    let im = s.m().map(|x| Complex64::new(0.0, x));
    let eig = hermitian_eigen(im);
    let g = eig.eigenvalues.map(|nu| {
        let nu = nu.clamp(-1.0 + NU_CLIP, 1.0 - NU_CLIP);
        Complex64::new(2.0 * nu.atanh(), 0.0)
    });
    let v = &eig.eigenvectors;
    let ih = v * DMatrix::from_diagonal(&g) * v.adjoint();
    let h = ih.map(|z| z.im);
    let h = (&h - h.transpose()) * 0.5;

    let eig = hermitian_eigen(quadratic_operator(&gammas, &h));
    let e0 = eig.eigenvalues.min();
    let w: Vec<f64> = eig.eigenvalues.iter().map(|e| (-(e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    let dim = space.dim();
    let mut rho = DMatrix::zeros(dim, dim);
    for (n, wn) in w.iter().enumerate() {
        if *wn / z < 1e-300 {
            continue;
        }
        let col = eig.eigenvectors.column(n);
        rho += (col * col.adjoint()) * Complex64::new(wn / z, 0.0);
    }
    Ok(DenseState::Mixed { modes, rho })
}

/// `⟨γ_j γ_k⟩` for all pairs, in the covariance ordering.
fn two_point_table(state: &DenseState, gammas: &[&DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let n = gammas.len();
    let mut table = DMatrix::zeros(n, n);
    match state {
        DenseState::Pure { psi, .. } => {
            let w: Vec<DVector<Complex64>> = gammas.iter().map(|g| *g * psi).collect();
            for j in 0..n {
                for k in 0..n {
                    table[(j, k)] = w[j].dotc(&w[k]);
                }
            }
        }
        DenseState::Mixed { rho, .. } => {
            // tr(ρ γ_j γ_k) = Σ_ab (γ_k ρ)_ab (γ_j)_ba
            let r: Vec<DMatrix<Complex64>> = gammas.iter().map(|g| *g * rho).collect();
            for j in 0..n {
                let gt = gammas[j].transpose();
                for k in 0..n {
                    table[(j, k)] = r[k].component_mul(&gt).sum();
                }
            }
        }
    }
    table
}

/// Covariance of a dense state split as `d_A + d_B` modes,
/// `M_jk = -i tr(ρ γ_j γ_k)`.
pub fn dense_covariance(state: &DenseState, d_a: usize, d_b: usize) -> Result<CovarianceMatrix> {
    let space = FockSpace::new(state.modes())?;
    let gammas = space.covariance_majoranas(d_a, d_b)?;
    let table = two_point_table(state, &gammas);
    let n = gammas.len();
    let m = DMatrix::from_fn(n, n, |j, k| if j == k { 0.0 } else { table[(j, k)].im });
    CovarianceMatrix::new(d_a, d_b, m)
}

/// `tr(ρ B(F₁)⋯B(Fₙ))` with `B(F) = Σ_k F_k γ_k/√2` in the covariance
/// ordering.
pub fn dense_moment(state: &DenseState, d_a: usize, d_b: usize, vectors: &[DVector<Complex64>]) -> Result<Complex64> {
    let space = FockSpace::new(state.modes())?;
    let gammas = space.covariance_majoranas(d_a, d_b)?;
    let dim = space.dim();
    let scale = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut ops = Vec::with_capacity(vectors.len());
    for f in vectors {
        if f.len() != gammas.len() {
            return Err(Error::DimensionMismatch { expected: gammas.len(), found: f.len() });
        }
        let mut b = DMatrix::zeros(dim, dim);
        for (k, g) in gammas.iter().enumerate() {
            b += *g * (f[k] * scale);
        }
        ops.push(b);
    }
    Ok(match state {
        DenseState::Pure { psi, .. } => {
            let mut v = psi.clone();
            for b in ops.iter().rev() {
                v = b * v;
            }
            psi.dotc(&v)
        }
        DenseState::Mixed { rho, .. } => {
            let mut y = rho.clone();
            for b in ops.iter().rev() {
                y = b * y;
            }
            y.trace()
        }
    })
}

/// Outcome probabilities of the joint local parity measurement; `pm` is
/// Alice even, Bob odd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityProbabilities {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl ParityProbabilities {
    pub fn equal(&self) -> f64 {
        self.pp + self.mm
    }

    pub fn sum(&self) -> f64 {
        self.pp + self.pm + self.mp + self.mm
    }
}

/// `p^{jk} = tr(P_A^j P_B^k ρ)` from the local parity operators.
pub fn dense_parity_probabilities(state: &DenseState, d_a: usize, d_b: usize) -> Result<ParityProbabilities> {
    let l = state.modes();
    if d_a + d_b != l {
        return Err(Error::DimensionMismatch { expected: l, found: d_a + d_b });
    }
    let mut out = ParityProbabilities { pp: 0.0, pm: 0.0, mp: 0.0, mm: 0.0 };
    for (s, w) in state.populations().into_iter().enumerate() {
        let even_a = occupation(l, 0..d_a, s).is_multiple_of(2);
        let even_b = occupation(l, d_a..l, s).is_multiple_of(2);
        match (even_a, even_b) {
            (true, true) => out.pp += w,
            (true, false) => out.pm += w,
            (false, true) => out.mp += w,
            (false, false) => out.mm += w,
        }
    }
    Ok(out)
}

/// `⟨ψ, ρ ψ⟩`.
pub fn dense_fidelity(state: &DenseState, psi: &DVector<Complex64>) -> Complex64 {
    match state {
        DenseState::Pure { psi: phi, .. } => Complex64::new(psi.dotc(phi).norm_sqr(), 0.0),
        DenseState::Mixed { rho, .. } => psi.dotc(&(rho * psi)),
    }
}

/// `U = exp((1/4) Σ_jk A_jk γ_j γ_k)` for real antisymmetric `A`. It acts on
/// covariances as `M ↦ O M Oᵀ` with `O = exp(A)`.
pub fn dense_bogolubov(d_a: usize, d_b: usize, generator: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    let space = FockSpace::new(d_a + d_b)?;
    let gammas = space.covariance_majoranas(d_a, d_b)?;
    if generator.nrows() != gammas.len() || generator.ncols() != gammas.len() {
        return Err(Error::DimensionMismatch { expected: gammas.len(), found: generator.nrows() });
    }
    let dim = space.dim();
    let mut k = DMatrix::zeros(dim, dim);
    for j in 0..gammas.len() {
        for l in (j + 1)..gammas.len() {
            k += (gammas[j] * gammas[l]) * Complex64::new(0.5 * generator[(j, l)], 0.0);
        }
    }
    Ok(k.exp())
}

/// `U ρ U†`.
pub fn conjugate_state(state: &DenseState, u: &DMatrix<Complex64>) -> DenseState {
    match state {
        DenseState::Pure { modes, psi } => DenseState::Pure { modes: *modes, psi: u * psi },
        DenseState::Mixed { modes, rho } => DenseState::Mixed { modes: *modes, rho: u * rho * u.adjoint() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasifree::BasisProjection;

    #[test]
    fn vacuum_round_trip() {
        let s = CovarianceMatrix::vacuum(1, 2);
        let state = dense_from_covariance(&s).unwrap();
        let pops = state.populations();
        assert!((pops[0] - 1.0).abs() < 1e-12);
        let back = dense_covariance(&state, 1, 2).unwrap();
        assert!((back.m() - s.m()).amax() < 1e-12);
    }

    #[test]
    fn vacuum_parity() {
        let state = dense_from_covariance(&CovarianceMatrix::vacuum(2, 2)).unwrap();
        let p = dense_parity_probabilities(&state, 2, 2).unwrap();
        assert!((p.pp - 1.0).abs() < 1e-12);
        assert!(p.pm.abs() + p.mp.abs() + p.mm.abs() < 1e-12);
    }

    #[test]
    fn thermal_single_mode() {
        // occupation 0.3: ⟨1 - 2n⟩ = 0.4
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = 0.4;
        m[(1, 0)] = -0.4;
        let s = CovarianceMatrix::new(1, 0, m).unwrap();
        let rho = dense_from_covariance(&s).unwrap().density_matrix();
        assert!((rho[(0, 0)].re - 0.7).abs() < 1e-12);
        assert!((rho[(1, 1)].re - 0.3).abs() < 1e-12);
        assert!(rho[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn standard_projection_sectors() {
        let s = BasisProjection::standard(2).covariance();
        let state = dense_from_covariance(&s).unwrap();
        let p = dense_parity_probabilities(&state, 2, 2).unwrap();
        assert!((p.pp - 0.5).abs() < 1e-12 && (p.mm - 0.5).abs() < 1e-12);
        assert!(p.pm.abs() < 1e-12 && p.mp.abs() < 1e-12);
        let back = dense_covariance(&state, 2, 2).unwrap();
        assert!((back.m() - s.m()).amax() < 1e-9);
    }
}
