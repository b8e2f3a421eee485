//! Agreement of the covariance calculus with the dense reference on random
//! states.

use std::fmt;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::covariance::CovarianceMatrix;
use crate::error::Result;
use crate::quasifree::{equal_parity_probability, fidelity_raw, random_orthogonal, wick_moment, BasisProjection};
use crate::Complex64;

use super::dense::{dense_covariance, dense_fidelity, dense_from_covariance, dense_moment, dense_parity_probabilities, DenseState};
use super::random::{random_covariance, random_pure_covariance};

/// Default agreement tolerance.
pub const ORACLE_TOL: f64 = 1e-8;

/// Largest residual seen per quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub residuals: Vec<(&'static str, f64)>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|(_, r)| *r < self.tolerance)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "d_A = d_B = {}, {} trials, seed {}", self.d, self.trials, self.seed)?;
        for (name, r) in &self.residuals {
            let mark = if *r < self.tolerance { "ok" } else { "FAIL" };
            writeln!(f, "  {name:<28} max residual {r:.3e}  {mark}")?;
        }
        Ok(())
    }
}

fn random_unit_vector(n: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    let v = DVector::from_fn(n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

#[derive(Default)]
struct Maxima {
    covariance: f64,
    two_point: f64,
    three_point: f64,
    four_point: f64,
    parity: f64,
    parity_sum: f64,
    fidelity_standard: f64,
    fidelity_random: f64,
}

fn projection_state(p: &BasisProjection) -> Result<DVector<Complex64>> {
    match dense_from_covariance(&p.covariance())? {
        DenseState::Pure { psi, .. } => Ok(psi),
        DenseState::Mixed { .. } => unreachable!("basis projections are pure"),
    }
}

fn trial(s: &CovarianceMatrix, rng: &mut impl Rng, acc: &mut Maxima) -> Result<()> {
    let (d_a, d_b) = (s.d_a(), s.d_b());
    let state = dense_from_covariance(s)?;
    let back = dense_covariance(&state, d_a, d_b)?;
    acc.covariance = acc.covariance.max((back.m() - s.m()).amax());

    for (k, slot) in [(2, &mut acc.two_point), (3, &mut acc.three_point), (4, &mut acc.four_point)] {
        let vs: Vec<_> = (0..k).map(|_| random_unit_vector(s.dim(), rng)).collect();
        let gauss = wick_moment(s, &vs)?;
        let dense = dense_moment(&state, d_a, d_b, &vs)?;
        *slot = slot.max((gauss - dense).norm());
    }

    let probs = dense_parity_probabilities(&state, d_a, d_b)?;
    acc.parity_sum = acc.parity_sum.max((probs.sum() - 1.0).abs());
    acc.parity = acc.parity.max((equal_parity_probability(s)? - probs.equal()).abs());

    let d = d_a;
    let standard = BasisProjection::standard(d);
    let f = fidelity_raw(s, &standard)?;
    let fd = dense_fidelity(&state, &projection_state(&standard)?);
    acc.fidelity_standard = acc.fidelity_standard.max((f - fd).norm());

    let random = BasisProjection::new(random_orthogonal(2 * d, rng))?;
    let f = fidelity_raw(s, &random)?;
    let fd = dense_fidelity(&state, &projection_state(&random)?);
    acc.fidelity_random = acc.fidelity_random.max((f - fd).norm());
    Ok(())
}

/// Runs `trials` random states on `d + d` modes (every fourth one pure)
/// and records the largest disagreement per quantity.
pub fn oracle_suite(d: usize, trials: usize, seed: u64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Maxima::default();
    for t in 0..trials {
        let s = if t % 4 == 0 {
            random_pure_covariance(d, d, &mut rng)?
        } else {
            random_covariance(d, d, &mut rng)?
        };
        trial(&s, &mut rng, &mut acc)?;
    }
    Ok(OracleReport {
        d,
        trials,
        seed,
        tolerance: ORACLE_TOL,
        residuals: vec![
            ("covariance round trip", acc.covariance),
            ("two-point moments", acc.two_point),
            ("three-point moments", acc.three_point),
            ("four-point moments", acc.four_point),
            ("equal-parity probability", acc.parity),
            ("parity probabilities sum", acc.parity_sum),
            ("fidelity, R = 1", acc.fidelity_standard),
            ("fidelity, random R", acc.fidelity_random),
        ],
    })
}
