//! Ground state of the free-fermion chain restricted to two adjacent blocks,
//! and the rate sweep over the block length.
//!
//! The half-filled nearest-neighbour hopping chain has a translation invariant
//! quasifree ground state. Its two-point function is the Fourier coefficient
//! of the indicator of half the Brillouin zone,
//! `⟨c†_m c_n⟩ = (1/2π) ∫_{-π/2}^{π/2} e^{ik(m-n)} dk = sin(π r/2)/(π r)`,
//! `r = m - n`. Other choices of the filled half-circle differ from this one by
//! site-local phases, which do not change any distillation figure.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::covariance::{majorana_index, CovarianceMatrix, MajoranaKind, MajoranaLabel, Party};
use crate::distill::{run_protocol, DistillationReport};
use crate::error::{Error, Result};

/// Default number of quadrature intervals.
pub const DEFAULT_QUADRATURE_POINTS: usize = 1 << 14;

/// How the two-point kernel is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelMethod {
    #[default]
    ClosedForm,
    /// Composite trapezoidal rule over the filled band with `points`
    /// intervals and Euler–Maclaurin endpoint corrections up to `h⁴`.
    Quadrature { points: usize },
}

/// Two blocks `[offset, offset + d)` (Alice) and `[offset + d, offset + 2d)`
/// (Bob) of the infinite chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSpec {
    pub d: usize,
    pub offset: i64,
    pub kernel: KernelMethod,
}

impl ChainSpec {
    pub fn new(d: usize) -> Self {
        Self { d, offset: 0, kernel: KernelMethod::ClosedForm }
    }

    pub fn with_offset(mut self, offset: i64) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_kernel(mut self, kernel: KernelMethod) -> Self {
        self.kernel = kernel;
        self
    }
}

/// `sin(π r/2)` for integer `r`, exactly.
fn sin_half_pi(r: i64) -> f64 {
    match r.rem_euclid(4) {
        1 => 1.0,
        3 => -1.0,
        _ => 0.0,
    }
}

/// `⟨c†_m c_n⟩` as a function of the separation `r = m - n`.
pub fn hopping_correlation(r: i64, method: KernelMethod) -> f64 {
    match method {
        KernelMethod::ClosedForm => {
            if r == 0 {
                0.5
            } else {
                sin_half_pi(r) / (PI * r as f64)
            }
        }
        KernelMethod::Quadrature { points } => quadrature_correlation(r, points.max(2)),
    }
}

fn quadrature_correlation(r: i64, points: usize) -> f64 {
    let (a, b) = (-PI / 2.0, PI / 2.0);
    let h = (b - a) / points as f64;
    let rf = r as f64;
    let f = |k: f64| (k * rf).cos();
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..points {
        sum += f(a + i as f64 * h);
    }
    let trapezoid = h * sum;
    // f'(b) - f'(a) = -2 r sin(πr/2),  f'''(b) - f'''(a) = 2 r³ sin(πr/2)
    let s = (rf * PI / 2.0).sin();
    let d1 = -2.0 * rf * s;
    let d3 = 2.0 * rf.powi(3) * s;
    let integral = trapezoid - h * h / 12.0 * d1 + h.powi(4) / 720.0 * d3;
    integral / (2.0 * PI)
}

/// Covariance of a number-conserving state with real two-point matrix
/// `C_mn = ⟨c†_m c_n⟩` on `d_A + d_B` modes (Alice's first): `M(a_m, b_n) =
/// δ_mn - 2 C_mn` and zero between Majoranas of the same kind.
pub fn covariance_from_correlations(d_a: usize, d_b: usize, c: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let l = d_a + d_b;
    if c.nrows() != l || c.ncols() != l {
        return Err(Error::DimensionMismatch { expected: l, found: c.nrows() });
    }
    let label = |mode: usize, kind| {
        if mode < d_a {
            MajoranaLabel { party: Party::Alice, mode, kind }
        } else {
            MajoranaLabel { party: Party::Bob, mode: mode - d_a, kind }
        }
    };
    let n = 2 * l;
    let mut m = DMatrix::zeros(n, n);
    for x in 0..l {
        let ia = majorana_index(d_a, d_b, label(x, MajoranaKind::A));
        for y in 0..l {
            let ib = majorana_index(d_a, d_b, label(y, MajoranaKind::B));
            let g = if x == y { 1.0 } else { 0.0 } - 2.0 * c[(x, y)];
            m[(ia, ib)] = g;
            m[(ib, ia)] = -g;
        }
    }
    CovarianceMatrix::new(d_a, d_b, m)
}

/// Reduced covariance of the chain ground state on the two blocks.
pub fn chain_covariance(spec: &ChainSpec) -> Result<CovarianceMatrix> {
    let l = 2 * spec.d;
    // the kernel only depends on the separation, so the offset drops out
    let kernel: Vec<f64> = (0..l as i64).map(|r| hopping_correlation(r, spec.kernel)).collect();
    let c = DMatrix::from_fn(l, l, |i, j| kernel[(i as i64 - j as i64).unsigned_abs() as usize]);
    covariance_from_correlations(spec.d, spec.d, &c)
}

/// Parameters for [`rate_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub d_min: usize,
    pub d_max: usize,
    pub n_keep: usize,
    pub conservative_p: bool,
    pub kernel: KernelMethod,
    /// Rows are independent; when set they are computed on the rayon pool.
    pub parallel: bool,
}

impl SweepConfig {
    pub fn new(d_min: usize, d_max: usize) -> Self {
        Self { d_min, d_max, n_keep: 2, conservative_p: false, kernel: KernelMethod::ClosedForm, parallel: true }
    }
}

fn sweep_row(d: usize, cfg: &SweepConfig) -> Result<DistillationReport> {
    let s = chain_covariance(&ChainSpec::new(d).with_kernel(cfg.kernel))?;
    let mut report = run_protocol(&s, cfg.n_keep, cfg.conservative_p)?;
    report.rate_per_site = report.rate.map(|r| r / d as f64);
    Ok(report)
}

/// One [`DistillationReport`] per block length `d_min..=d_max`, in order.
pub fn rate_sweep(cfg: &SweepConfig) -> Result<Vec<DistillationReport>> {
    if cfg.d_min > cfg.d_max {
        return Err(Error::Inconsistent(format!("d_min {} > d_max {}", cfg.d_min, cfg.d_max)));
    }
    if cfg.n_keep == 0 || cfg.d_min < cfg.n_keep {
        return Err(Error::Inconsistent(format!(
            "d_min {} must be at least n_keep {} >= 1",
            cfg.d_min, cfg.n_keep
        )));
    }
    let ds: Vec<usize> = (cfg.d_min..=cfg.d_max).collect();
    if cfg.parallel {
        ds.par_iter().map(|&d| sweep_row(d, cfg)).collect()
    } else {
        ds.iter().map(|&d| sweep_row(d, cfg)).collect()
    }
}

/// Two-column `d  R/d` text for plotting.
pub fn plot_data(rows: &[DistillationReport]) -> String {
    let mut out = String::from("# d rate_per_site\n");
    for r in rows {
        if let Some(x) = r.rate_per_site {
            out.push_str(&format!("{} {:.11e}\n", r.d, x));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let k = KernelMethod::ClosedForm;
        assert_eq!(hopping_correlation(0, k), 0.5);
        assert!((hopping_correlation(1, k) - 1.0 / PI).abs() < 1e-15);
        assert!((hopping_correlation(-1, k) - 1.0 / PI).abs() < 1e-15);
        assert!((hopping_correlation(3, k) + 1.0 / (3.0 * PI)).abs() < 1e-15);
        for r in [2, 4, 6, -2] {
            assert_eq!(hopping_correlation(r, k), 0.0);
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let q = KernelMethod::Quadrature { points: DEFAULT_QUADRATURE_POINTS };
        for r in 0..128 {
            let diff = hopping_correlation(r, q) - hopping_correlation(r, KernelMethod::ClosedForm);
            assert!(diff.abs() < 1e-10, "r = {r}: {diff:e}");
        }
    }

    #[test]
    fn chain_is_valid() {
        for d in [1, 2, 5, 16] {
            let s = chain_covariance(&ChainSpec::new(d)).unwrap();
            assert!(s.validate().is_ok());
            assert_eq!(s.d_a(), d);
        }
    }

    #[test]
    fn sweep_rejects_bad_ranges() {
        assert!(rate_sweep(&SweepConfig::new(5, 4)).is_err());
        assert!(rate_sweep(&SweepConfig::new(1, 4)).is_err());
    }

    #[test]
    fn sweep_rows_in_order() {
        let rows = rate_sweep(&SweepConfig::new(2, 6)).unwrap();
        let ds: Vec<usize> = rows.iter().map(|r| r.d).collect();
        assert_eq!(ds, vec![2, 3, 4, 5, 6]);
        assert!(rows.iter().all(|r| r.rate_per_site.is_some()));
    }
}
