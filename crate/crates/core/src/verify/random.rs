//! Random valid covariance matrices for the reference comparisons.

use nalgebra::DMatrix;
use rand::Rng;

use crate::covariance::{validate, CovarianceMatrix};
use crate::error::Result;
use crate::quasifree::random_orthogonal;

fn normal_form_blocks(nu: &[f64]) -> DMatrix<f64> {
    let n = 2 * nu.len();
    let mut m = DMatrix::zeros(n, n);
    for (k, &v) in nu.iter().enumerate() {
        m[(2 * k, 2 * k + 1)] = v;
        m[(2 * k + 1, 2 * k)] = -v;
    }
    m
}

/// `M = O (⊕ ν_k J) Oᵀ` with Haar-random `O` and `ν_k` uniform in `[0, 1]`.
pub fn random_covariance(d_a: usize, d_b: usize, rng: &mut impl Rng) -> Result<CovarianceMatrix> {
    let l = d_a + d_b;
    let nu: Vec<f64> = (0..l).map(|_| rng.random::<f64>()).collect();
    let o = random_orthogonal(2 * l, rng);
    CovarianceMatrix::new(d_a, d_b, &o * normal_form_blocks(&nu) * o.transpose())
}

/// Pure state: all `ν_k = 1`.
pub fn random_pure_covariance(d_a: usize, d_b: usize, rng: &mut impl Rng) -> Result<CovarianceMatrix> {
    let l = d_a + d_b;
    let o = random_orthogonal(2 * l, rng);
    CovarianceMatrix::new(d_a, d_b, &o * normal_form_blocks(&vec![1.0; l]) * o.transpose())
}

/// `d + d` modes with `X = 0`, `Y` diagonal with entries in `[0, 1)` and a
/// random Bob block `Z`, shrunk until the matrix is a valid covariance.
pub fn random_x_zero_covariance(d: usize, rng: &mut impl Rng) -> Result<CovarianceMatrix> {
    let n = 2 * d;
    let bob = random_covariance(d, 0, rng)?;
    let mut scale = rng.random::<f64>();
    loop {
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let y = rng.random::<f64>();
            m[(i, n + i)] = y;
            m[(n + i, i)] = -y;
        }
        m.view_mut((n, n), (n, n)).copy_from(&(bob.m() * scale));
        if validate(d, d, &m).is_ok() {
            return CovarianceMatrix::new(d, d, m);
        }
        scale *= 0.5;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            assert!(random_covariance(2, 1, &mut rng).unwrap().validate().is_ok());
            assert!(random_pure_covariance(2, 2, &mut rng).unwrap().is_pure());
            let s = random_x_zero_covariance(2, &mut rng).unwrap();
            assert_eq!(s.x().amax(), 0.0);
        }
    }
}
