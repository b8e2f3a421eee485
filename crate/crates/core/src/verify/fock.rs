//! Jordan–Wigner fermions on `L` modes.
//!
//! Basis states are bit strings with mode 0 as the most significant bit, so
//! mode 0 is the slowest index of a state vector and Alice's modes (listed
//! first) form the leading tensor factor.

use nalgebra::DMatrix;

use crate::covariance::{majorana_label, MajoranaKind, Party};
use crate::error::{Error, Result};
use crate::Complex64;

/// Largest mode count for bit-level operations on basis states.
pub const MAX_MODES: usize = 14;

/// Largest mode count for which full operator matrices are built.
pub const DENSE_MATRIX_MAX_MODES: usize = 10;

fn check_modes(l: usize, limit: usize) -> Result<()> {
    if l > limit {
        return Err(Error::TooLarge { what: "mode count", size: l, limit });
    }
    Ok(())
}

fn bit(l: usize, j: usize) -> usize {
    1 << (l - 1 - j)
}

/// `(-1)^(number of occupied modes before j)`
fn string_sign(l: usize, j: usize, state: usize) -> f64 {
    if (state >> (l - j)).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `c_j |state⟩ = sign |state'⟩`, or `None` if mode `j` is empty.
pub fn annihilate(l: usize, j: usize, state: usize) -> Option<(f64, usize)> {
    let b = bit(l, j);
    (state & b != 0).then(|| (string_sign(l, j, state), state ^ b))
}

/// `c†_j |state⟩ = sign |state'⟩`, or `None` if mode `j` is occupied.
pub fn create(l: usize, j: usize, state: usize) -> Option<(f64, usize)> {
    let b = bit(l, j);
    (state & b == 0).then(|| (string_sign(l, j, state), state ^ b))
}

/// `c†_m c_n |state⟩`.
pub fn hop(l: usize, m: usize, n: usize, state: usize) -> Option<(f64, usize)> {
    let (s1, mid) = annihilate(l, n, state)?;
    let (s2, out) = create(l, m, mid)?;
    Some((s1 * s2, out))
}

/// Number of occupied modes among `modes`.
pub fn occupation(l: usize, modes: std::ops::Range<usize>, state: usize) -> u32 {
    modes.map(|j| u32::from(state & bit(l, j) != 0)).sum()
}

/// Annihilation matrices `c_0..c_{L-1}`.
pub fn dense_operators(l: usize) -> Result<Vec<DMatrix<f64>>> {
    check_modes(l, DENSE_MATRIX_MAX_MODES)?;
    let dim = 1usize << l;
    Ok((0..l)
        .map(|j| {
            let mut c = DMatrix::zeros(dim, dim);
            for state in 0..dim {
                if let Some((sign, out)) = annihilate(l, j, state) {
                    c[(out, state)] = sign;
                }
            }
            c
        })
        .collect())
}

/// Operator matrices for `L` modes, with the Majoranas `a_j = c_j + c†_j`
/// and `b_j = i(c†_j - c_j)`.
#[derive(Debug, Clone)]
pub struct FockSpace {
    modes: usize,
    annihilators: Vec<DMatrix<f64>>,
    majoranas: Vec<[DMatrix<Complex64>; 2]>,
}

impl FockSpace {
    pub fn new(modes: usize) -> Result<Self> {
        let annihilators = dense_operators(modes)?;
        let i = Complex64::new(0.0, 1.0);
        let majoranas = annihilators
            .iter()
            .map(|c| {
                let c = c.map(|x| Complex64::new(x, 0.0));
                let cd = c.transpose();
                [&c + &cd, (&cd - &c) * i]
            })
            .collect();
        Ok(Self { modes, annihilators, majoranas })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    pub fn annihilator(&self, j: usize) -> &DMatrix<f64> {
        &self.annihilators[j]
    }

    pub fn majorana(&self, j: usize, kind: MajoranaKind) -> &DMatrix<Complex64> {
        match kind {
            MajoranaKind::A => &self.majoranas[j][0],
            MajoranaKind::B => &self.majoranas[j][1],
        }
    }

    /// Majoranas in the covariance ordering for a `d_A + d_B` split, Alice's
    /// modes first in the Jordan–Wigner order.
    pub fn covariance_majoranas(&self, d_a: usize, d_b: usize) -> Result<Vec<&DMatrix<Complex64>>> {
        if d_a + d_b != self.modes {
            return Err(Error::DimensionMismatch { expected: self.modes, found: d_a + d_b });
        }
        Ok((0..2 * self.modes)
            .map(|t| {
                let label = majorana_label(d_a, d_b, t);
                let mode = match label.party {
                    Party::Alice => label.mode,
                    Party::Bob => d_a + label.mode,
                };
                self.majorana(mode, label.kind)
            })
            .collect())
    }

    /// Diagonal of `(-1)^N` restricted to `modes`.
    pub fn parity_diagonal(&self, modes: std::ops::Range<usize>) -> Vec<f64> {
        (0..self.dim())
            .map(|s| if occupation(self.modes, modes.clone(), s).is_multiple_of(2) { 1.0 } else { -1.0 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::dense::max_norm;

    #[test]
    fn single_mode() {
        let c = &dense_operators(1).unwrap()[0];
        assert_eq!(c, &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn anticommutators() {
        let l = 4;
        let cs = dense_operators(l).unwrap();
        let id = DMatrix::<f64>::identity(1 << l, 1 << l);
        for j in 0..l {
            for k in 0..l {
                let cc = &cs[j] * &cs[k] + &cs[k] * &cs[j];
                assert_eq!(cc.amax(), 0.0);
                let cdc = cs[j].transpose() * &cs[k] + &cs[k] * cs[j].transpose();
                let expected = if j == k { id.clone() } else { id.clone() * 0.0 };
                assert_eq!(cdc, expected);
            }
        }
    }

    #[test]
    fn majoranas_square_to_one() {
        let space = FockSpace::new(3).unwrap();
        let id = DMatrix::<Complex64>::identity(8, 8);
        for j in 0..3 {
            for kind in [MajoranaKind::A, MajoranaKind::B] {
                let g = space.majorana(j, kind);
                assert!(max_norm(&(g * g - &id)) < 1e-15);
                assert!(max_norm(&(g.adjoint() - g)) < 1e-15);
            }
        }
    }

    #[test]
    fn parity_is_diagonal_sign() {
        let space = FockSpace::new(3).unwrap();
        let p = space.parity_diagonal(0..3);
        assert!(p.iter().all(|x| x.abs() == 1.0));
        assert_eq!(p[0], 1.0);
        assert_eq!(p[0b111], -1.0);
    }

    #[test]
    fn refuses_large() {
        assert!(matches!(dense_operators(DENSE_MATRIX_MAX_MODES + 1), Err(Error::TooLarge { .. })));
    }
}
