//! Finite chains solved by exact diagonalization, as a reference for the
//! infinite-chain kernel.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::covariance::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::lattice::covariance_from_correlations;
use crate::Complex64;

use super::dense::DenseState;
use super::fock::{hop, MAX_MODES};

/// Boundary condition of the finite chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    /// Ring closed with the periodic or antiperiodic bond, whichever gives a
    /// non-degenerate half-filled ground state (periodic for an odd number
    /// of particles). Finite-size errors then fall off like `1/L²` instead of
    /// `1/L`.
    ClosedShell,
}

impl Boundary {
    /// Hopping amplitude on the bond `(l-1, 0)`, if any.
    fn wrap_amplitude(self, l: usize) -> Option<f64> {
        match self {
            Self::Open => None,
            Self::ClosedShell if (l / 2) % 2 == 1 => Some(1.0),
            Self::ClosedShell => Some(-1.0),
        }
    }
}

fn check_length(l: usize) -> Result<()> {
    if l == 0 || l % 2 == 1 {
        return Err(Error::Inconsistent(format!("chain length {l} must be even and positive")));
    }
    Ok(())
}

/// `⟨c†_m c_n⟩` in the half-filled ground state of
/// `H = -Σ (c†_j c_{j+1} + h.c.)` on `l` sites, from the single-particle
/// eigenvectors.
pub fn chain_correlations(l: usize, boundary: Boundary) -> Result<DMatrix<f64>> {
    check_length(l)?;
    let mut h = DMatrix::<f64>::from_fn(l, l, |i, j| if i.abs_diff(j) == 1 { -1.0 } else { 0.0 });
    if let Some(t) = boundary.wrap_amplitude(l) {
        if l > 2 {
            h[(l - 1, 0)] = -t;
            h[(0, l - 1)] = -t;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut c = DMatrix::zeros(l, l);
    for &k in &order[..l / 2] {
        let v = eig.eigenvectors.column(k);
        c += v * v.transpose();
    }
    Ok(c)
}

/// Covariance of two adjacent `d`-site blocks centred in a chain of length
/// `l`.
pub fn finite_chain_covariance(d: usize, l: usize, boundary: Boundary) -> Result<CovarianceMatrix> {
    if l < 2 * d {
        return Err(Error::Inconsistent(format!("chain of length {l} cannot hold two blocks of {d} sites")));
    }
    let c = chain_correlations(l, boundary)?;
    let start = (l - 2 * d) / 2;
    let block = c.view((start, start), (2 * d, 2 * d)).into_owned();
    covariance_from_correlations(d, d, &block)
}

/// Many-body ground state of the chain in the half-filled sector, as a full
/// Fock-space vector. The wrap-around bond is applied as a fermionic
/// operator, so its Jordan–Wigner sign is automatic.
pub fn many_body_ground_state(l: usize, boundary: Boundary) -> Result<DVector<f64>> {
    check_length(l)?;
    if l > MAX_MODES {
        return Err(Error::TooLarge { what: "chain length", size: l, limit: MAX_MODES });
    }
    let sector: Vec<usize> = (0..1usize << l).filter(|s| s.count_ones() as usize == l / 2).collect();
    let index = |s: usize| sector.binary_search(&s).ok();
    let n = sector.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (col, &s) in sector.iter().enumerate() {
        let wrap = boundary.wrap_amplitude(l).filter(|_| l > 2).map(|t| (l - 1, 0, t));
        let bonds = (0..l - 1).map(|j| (j, j + 1, 1.0)).chain(wrap);
        for (i, j, t) in bonds {
            for (m, k) in [(i, j), (j, i)] {
                if let Some((sign, out)) = hop(l, m, k, s) {
                    let row = index(out).expect("hopping conserves particle number");
                    h[(row, col)] -= t * sign;
                }
            }
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let ground = eig.eigenvectors.column(order[0]);
    let mut psi = DVector::zeros(1 << l);
    for (i, &s) in sector.iter().enumerate() {
        psi[s] = ground[i];
    }
    Ok(psi)
}

/// Reduced state of the contiguous modes `start..start + len` of a pure
/// `l`-mode state with definite parity. Bilinears inside the block carry no
/// Jordan–Wigner string from the modes before it, so tracing out the other
/// bits gives the block's fermionic reduced state.
pub fn block_state(psi: &DVector<f64>, l: usize, start: usize, len: usize) -> Result<DenseState> {
    if start + len > l || psi.len() != 1 << l {
        return Err(Error::DimensionMismatch { expected: 1 << l, found: psi.len() });
    }
    let right = l - start - len;
    let (nb, nr) = (1usize << len, 1usize << right);
    let mut rho = DMatrix::<Complex64>::zeros(nb, nb);
    for left in 0..1usize << start {
        for r in 0..nr {
            let amp = |b: usize| psi[(left << (len + right)) | (b << right) | r];
            for b1 in 0..nb {
                let a1 = amp(b1);
                if a1 == 0.0 {
                    continue;
                }
                for b2 in 0..nb {
                    rho[(b1, b2)] += Complex64::new(a1 * amp(b2), 0.0);
                }
            }
        }
    }
    Ok(DenseState::Mixed { modes: len, rho })
}
