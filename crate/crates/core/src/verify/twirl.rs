//! Dense twirl over the local symmetry group of ψ₊ on `n + n` modes.
//!
//! ψ₊ must have the form `(Φ_even + Φ_odd)/√2` with `Φ_even`, `Φ_odd`
//! maximally entangled on the equal-parity sectors, each of dimension
//! `D = 2^(n-1)` per side. Its partner is `ψ₋ = θ_A ψ₊`.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::distill::InvariantStateParams;
use crate::error::{Error, Result};
use crate::Complex64;

use super::dense::max_norm;

/// Tolerance for the form check on ψ₊.
pub const PLUS_STATE_TOL: f64 = 1e-9;

/// Largest sector dimension handled.
pub const MAX_SECTOR_DIM: usize = 4;

fn is_even(x: usize) -> bool {
    x.count_ones().is_multiple_of(2)
}

/// ψ₊ reshaped as an Alice × Bob amplitude matrix after the form check.
struct PlusState {
    n: usize,
    psi_plus: DVector<Complex64>,
    psi_minus: DVector<Complex64>,
    amplitudes: DMatrix<Complex64>,
}

impl PlusState {
    fn new(psi_plus: &DVector<Complex64>, n: usize) -> Result<Self> {
        if n == 0 || (1usize << (n - 1)) > MAX_SECTOR_DIM {
            return Err(Error::TooLarge { what: "sector dimension", size: 1 << n.saturating_sub(1), limit: MAX_SECTOR_DIM });
        }
        let local = 1usize << n;
        if psi_plus.len() != local * local {
            return Err(Error::DimensionMismatch { expected: local * local, found: psi_plus.len() });
        }
        let amplitudes = DMatrix::from_fn(local, local, |a, b| psi_plus[a * local + b]);
        let sector = (local / 2) as f64;
        for a in 0..local {
            for b in 0..local {
                if is_even(a) != is_even(b) && amplitudes[(a, b)].norm() > PLUS_STATE_TOL {
                    return Err(Error::Inconsistent("ψ₊ has weight on unequal parity sectors".into()));
                }
            }
        }
        // Φ†Φ = 1/(2D) on each sector
        let gram = amplitudes.adjoint() * &amplitudes;
        let target = DMatrix::<Complex64>::identity(local, local) * Complex64::new(0.5 / sector, 0.0);
        let residual = max_norm(&(&gram - target));
        if residual > PLUS_STATE_TOL {
            return Err(Error::Inconsistent(format!(
                "ψ₊ is not maximally entangled within its parity sectors (residual {residual:.3e})"
            )));
        }
        let psi_minus = DVector::from_fn(local * local, |i, _| {
            if is_even(i / local) {
                psi_plus[i]
            } else {
                -psi_plus[i]
            }
        });
        Ok(Self { n, psi_plus: psi_plus.clone(), psi_minus, amplitudes })
    }

    fn local_dim(&self) -> usize {
        1 << self.n
    }

    fn sector_dim(&self) -> usize {
        1 << (self.n - 1)
    }

    /// Diagonals of `P⁺⁺ + P⁻⁻` and `P⁺⁻ + P⁻⁺`.
    fn sector_diagonals(&self) -> (Vec<f64>, Vec<f64>) {
        let local = self.local_dim();
        let eq: Vec<f64> = (0..local * local)
            .map(|i| if is_even(i / local) == is_even(i % local) { 1.0 } else { 0.0 })
            .collect();
        let cross = eq.iter().map(|x| 1.0 - x).collect();
        (eq, cross)
    }

    fn basis(&self) -> [DMatrix<Complex64>; 4] {
        let (eq, cross) = self.sector_diagonals();
        let diag = |v: &[f64]| DMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0))));
        [
            &self.psi_plus * self.psi_plus.adjoint(),
            &self.psi_minus * self.psi_minus.adjoint(),
            diag(&eq),
            diag(&cross),
        ]
    }
}

/// `λ₊|ψ₊⟩⟨ψ₊| + λ₋|ψ₋⟩⟨ψ₋| + μ₊(P⁺⁺ + P⁻⁻) + μ₋(P⁺⁻ + P⁻⁺)` as a dense matrix.
pub fn invariant_state_matrix(params: &InvariantStateParams, psi_plus: &DVector<Complex64>, n: usize) -> Result<DMatrix<Complex64>> {
    let plus = PlusState::new(psi_plus, n)?;
    let coeffs = [params.lambda_plus, params.lambda_minus, params.mu_plus, params.mu_minus];
    let basis = plus.basis();
    let dim = basis[0].nrows();
    let mut out = DMatrix::zeros(dim, dim);
    for (c, b) in coeffs.iter().zip(basis.iter()) {
        out += b * Complex64::new(*c, 0.0);
    }
    Ok(out)
}

/// Hilbert–Schmidt projection of ρ onto the span of the four invariant
/// operators. Returns the coefficients and the projected matrix.
pub fn dense_twirl(
    rho: &DMatrix<Complex64>,
    psi_plus: &DVector<Complex64>,
    n: usize,
) -> Result<(InvariantStateParams, DMatrix<Complex64>)> {
    let plus = PlusState::new(psi_plus, n)?;
    if plus.sector_dim() < 2 {
        return Err(Error::Unsupported("the invariant operators are dependent for D = 1".into()));
    }
    if rho.nrows() != psi_plus.len() || rho.ncols() != psi_plus.len() {
        return Err(Error::DimensionMismatch { expected: psi_plus.len(), found: rho.nrows() });
    }
    let basis = plus.basis();
    let hs = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| (a.adjoint() * b).trace().re;
    let gram = Matrix4::from_fn(|i, j| hs(&basis[i], &basis[j]));
    let rhs = Vector4::from_fn(|i, _| hs(&basis[i], rho));
    let c = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular Gram matrix".into()))?;
    let params = InvariantStateParams {
        lambda_plus: c[0],
        lambda_minus: c[1],
        mu_plus: c[2],
        mu_minus: c[3],
        d: plus.sector_dim(),
    };
    let dim = rho.nrows();
    let mut out = DMatrix::zeros(dim, dim);
    for (ci, b) in c.iter().zip(basis.iter()) {
        out += b * Complex64::new(*ci, 0.0);
    }
    Ok((params, out))
}

fn random_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / Complex64::new(d.norm(), 0.0);
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// A random local unitary `U_A ⊗ U_B` fixing ψ₊. `U_A` either preserves
/// Alice's parity sectors or exchanges them, with probability 1/2 each, and
/// `U_B = (Ψ⁻¹ U_A† Ψ)ᵀ` for the amplitude matrix `Ψ`.
fn random_symmetry(plus: &PlusState, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let local = plus.local_dim();
    let sector = plus.sector_dim();
    let even: Vec<usize> = (0..local).filter(|&a| is_even(a)).collect();
    let odd: Vec<usize> = (0..local).filter(|&a| !is_even(a)).collect();
    let (v_even, v_odd) = (random_unitary(sector, rng), random_unitary(sector, rng));
    let swap = rng.random_bool(0.5);
    let mut u_a = DMatrix::zeros(local, local);
    for i in 0..sector {
        for j in 0..sector {
            if swap {
                u_a[(odd[i], even[j])] = v_even[(i, j)];
                u_a[(even[i], odd[j])] = v_odd[(i, j)];
            } else {
                u_a[(even[i], even[j])] = v_even[(i, j)];
                u_a[(odd[i], odd[j])] = v_odd[(i, j)];
            }
        }
    }
    // Ψ⁻¹ = 2D Ψ†
    let psi_inv = plus.amplitudes.adjoint() * Complex64::new(local as f64, 0.0);
    let u_b = (psi_inv * u_a.adjoint() * &plus.amplitudes).transpose();
    u_a.kronecker(&u_b)
}

/// Monte Carlo average of `U ρ U†` over `samples` random symmetries of ψ₊.
/// Converges to [`dense_twirl`]'s projection; used only to check it.
pub fn dense_twirl_sampled(
    rho: &DMatrix<Complex64>,
    psi_plus: &DVector<Complex64>,
    n: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<DMatrix<Complex64>> {
    let plus = PlusState::new(psi_plus, n)?;
    if rho.nrows() != psi_plus.len() {
        return Err(Error::DimensionMismatch { expected: psi_plus.len(), found: rho.nrows() });
    }
    let mut acc = DMatrix::zeros(rho.nrows(), rho.ncols());
    for _ in 0..samples {
        let u = random_symmetry(&plus, rng);
        acc += &u * rho * u.adjoint();
    }
    Ok(acc / Complex64::new(samples.max(1) as f64, 0.0))
}

/// Checks that a random symmetry fixes ψ₊ (used by tests).
pub fn symmetry_residual(psi_plus: &DVector<Complex64>, n: usize, rng: &mut impl Rng) -> Result<f64> {
    let plus = PlusState::new(psi_plus, n)?;
    let u = random_symmetry(&plus, rng);
    Ok((&u * psi_plus - psi_plus).iter().map(|z| z.norm()).fold(0.0, f64::max))
}
