//! Twirl-invariant reduction, distillability tests and hashing rates.
//!
//! The twirl over the local symmetry group of ψ₊ is never integrated. The
//! invariant state is fixed by the fidelities with ψ± and the parity-sector
//! probabilities of the input, all of which the twirl leaves unchanged, so
//! [`twirl_project`] simply solves for the four invariant coefficients.

use std::fmt::Write as _;

use crate::covariance::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::quasifree::{equal_parity_probability, fidelity, normal_form, BasisProjection};

/// Coefficients below zero by at most this much are set to zero.
pub const NEGATIVE_COEFF_TOL: f64 = 1e-9;

/// Conditioning on equal parities requires `p` above this.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-15;

/// `σ = λ₊|ψ₊⟩⟨ψ₊| + λ₋|ψ₋⟩⟨ψ₋| + μ₊(P⁺⁺ + P⁻⁻) + μ₋(P⁺⁻ + P⁻⁺)` on a pair
/// of `2D`-dimensional local spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantStateParams {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    /// Dimension of each local parity sector.
    pub d: usize,
}

impl InvariantStateParams {
    fn d2(&self) -> f64 {
        (self.d * self.d) as f64
    }

    /// `⟨ψ₊, σψ₊⟩`
    pub fn fidelity_plus(&self) -> f64 {
        self.lambda_plus + self.mu_plus
    }

    /// `⟨ψ₋, σψ₋⟩`
    pub fn fidelity_minus(&self) -> f64 {
        self.lambda_minus + self.mu_plus
    }

    /// `p⁺⁺ = p⁻⁻`
    pub fn p_equal_sector(&self) -> f64 {
        (self.lambda_plus + self.lambda_minus) / 2.0 + self.mu_plus * self.d2()
    }

    /// `p⁺⁻ = p⁻⁺`
    pub fn p_cross_sector(&self) -> f64 {
        self.mu_minus * self.d2()
    }

    pub fn trace(&self) -> f64 {
        self.lambda_plus + self.lambda_minus + 2.0 * self.d2() * (self.mu_plus + self.mu_minus)
    }

    /// Smallest eigenvalue of σ: the spectrum is `λ± + μ₊`, `μ₊` and `μ₋`.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut e = self.mu_minus.min(self.fidelity_plus()).min(self.fidelity_minus());
        if self.d > 1 {
            e = e.min(self.mu_plus);
        }
        e
    }
}

/// Inverts the relations between the invariant coefficients and the
/// quantities preserved by the twirl.
///
/// `p_equal_pp`, `p_equal_mm` are the input's `p⁺⁺`, `p⁻⁻` and `p_cross` is
/// `(p⁺⁻ + p⁻⁺)/2`; the twirl symmetrizes the two equal sectors, so their mean
/// is used.
pub fn twirl_project(
    f_plus: f64,
    f_minus: f64,
    p_equal_pp: f64,
    p_equal_mm: f64,
    p_cross: f64,
    d: usize,
) -> Result<InvariantStateParams> {
    if d < 2 {
        return Err(Error::Unsupported(format!(
            "invariant-state reduction needs sector dimension D >= 2, got {d}"
        )));
    }
    let d2 = (d * d) as f64;
    let p_eq = 0.5 * (p_equal_pp + p_equal_mm);
    let mu_minus = p_cross / d2;
    let mu_plus = (p_eq - 0.5 * (f_plus + f_minus)) / (d2 - 1.0);
    let mut params = InvariantStateParams {
        lambda_plus: f_plus - mu_plus,
        lambda_minus: f_minus - mu_plus,
        mu_plus,
        mu_minus,
        d,
    };
    // positivity of σ; λ± alone may be negative
    let clamp = |x: &mut f64, name: &str| -> Result<()> {
        if *x < -NEGATIVE_COEFF_TOL {
            return Err(Error::Inconsistent(format!("{name} = {x:.3e} is negative")));
        }
        if *x < 0.0 {
            *x = 0.0;
        }
        Ok(())
    };
    clamp(&mut params.mu_plus, "mu_plus")?;
    clamp(&mut params.mu_minus, "mu_minus")?;
    for (value, name) in [(params.fidelity_plus(), "lambda_plus + mu_plus"), (params.fidelity_minus(), "lambda_minus + mu_plus")] {
        if value < -NEGATIVE_COEFF_TOL {
            return Err(Error::Inconsistent(format!("{name} = {value:.3e} is negative")));
        }
    }
    Ok(params)
}

/// Fidelity `f` of the isotropic state left after a successful equal-parity
/// outcome, and that outcome's probability `p`. Unequal outcomes leave the
/// chaotic state `P^{±∓}/D²`, which is useless for distillation.
pub fn conditional_fidelity(params: &InvariantStateParams) -> Result<(f64, f64)> {
    let p = 2.0 * params.p_equal_sector();
    if p <= MIN_SUCCESS_PROBABILITY {
        return Err(Error::Inconsistent(format!("equal-parity probability {p:.3e} is zero")));
    }
    let f = (params.fidelity_plus() + params.fidelity_minus()) / p;
    Ok((f, p))
}

/// `f₊ + f₋ > p/D`, strictly.
pub fn distillable(f_plus: f64, f_minus: f64, p: f64, d: usize) -> bool {
    f_plus + f_minus > p / d as f64
}

/// Isotropic-state weight `θ = (D² f - 1)/(D² - 1)`.
pub fn isotropic_theta(f: f64, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::Unsupported(format!("isotropic parameter needs D >= 2, got {d}")));
    }
    let d2 = (d * d) as f64;
    Ok((d2 * f - 1.0) / (d2 - 1.0))
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Hashing yield `1 - S(σ)` for a two-qubit isotropic state of fidelity `f`,
/// scaled by `p` and clamped at zero.
pub fn hashing_rate(p: f64, f: f64) -> f64 {
    let raw = hashing_rate_raw(p, f);
    raw.max(0.0)
}

pub fn hashing_rate_raw(p: f64, f: f64) -> f64 {
    p * (1.0 + xlog2x(f) + xlog2x(1.0 - f) - (1.0 - f) * 3f64.log2())
}

/// Outcome of [`run_protocol`]. `rate` is `None` unless two modes per side
/// are kept (the qubit case, `D = 2`).
#[derive(Debug, Clone, PartialEq)]
pub struct DistillationReport {
    /// Mode count per side of the input.
    pub d: usize,
    pub n_keep: usize,
    /// All singular values of `Y`, descending.
    pub singular_values: Vec<f64>,
    pub f_plus: f64,
    pub f_minus: f64,
    pub p: f64,
    pub f: f64,
    pub distillable: bool,
    pub rate: Option<f64>,
    pub rate_per_site: Option<f64>,
    pub params: Option<InvariantStateParams>,
}

pub const CSV_HEADER: &str = "d,n_keep,f_plus,f_minus,p,f,distillable,rate,rate_per_site";

fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

impl DistillationReport {
    /// Singular values of `Y` carried by the kept modes.
    pub fn kept_singular_values(&self) -> &[f64] {
        let k = (2 * self.n_keep).min(self.singular_values.len());
        &self.singular_values[..k]
    }

    /// One CSV row in [`CSV_HEADER`] order, 12 significant digits.
    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_else(|| "NA".to_string());
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.d,
            self.n_keep,
            fmt_float(self.f_plus),
            fmt_float(self.f_minus),
            fmt_float(self.p),
            fmt_float(self.f),
            self.distillable,
            opt(self.rate),
            opt(self.rate_per_site)
        )
    }

    /// Multi-line human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "modes per side      {}", self.d);
        let _ = writeln!(s, "kept modes          {}", self.n_keep);
        let kept: Vec<String> = self.kept_singular_values().iter().map(|x| format!("{x:.6}")).collect();
        let _ = writeln!(s, "kept singular vals  {}", kept.join(" "));
        let _ = writeln!(s, "f_plus              {:.12}", self.f_plus);
        let _ = writeln!(s, "f_minus             {:.12}", self.f_minus);
        let _ = writeln!(s, "p                   {:.12}", self.p);
        let _ = writeln!(s, "f                   {:.12}", self.f);
        let _ = writeln!(s, "distillable         {}", self.distillable);
        match self.rate {
            Some(r) => {
                let _ = writeln!(s, "rate                {r:.12}");
            }
            None => {
                let _ = writeln!(s, "rate                unavailable (needs 2 kept modes)");
            }
        }
        if let Some(r) = self.rate_per_site {
            let _ = writeln!(s, "rate per site       {r:.12}");
        }
        s
    }
}

/// The quasifree distillation pipeline: normal form, truncation to the
/// `n_keep` strongest mode pairs, fidelities with ψ₊ = ψ_P and ψ₋ = ψ_Q,
/// equal-parity probability (or `p = 1` when `conservative_p`), the
/// distillability test, the invariant-state reduction and, for two kept modes,
/// the hashing rate.
pub fn run_protocol(s: &CovarianceMatrix, n_keep: usize, conservative_p: bool) -> Result<DistillationReport> {
    let d = s.d_a().min(s.d_b());
    if n_keep == 0 || n_keep > d {
        return Err(Error::Inconsistent(format!("n_keep = {n_keep} must lie in 1..={d}")));
    }
    let nf = normal_form(s)?;
    let kept = nf.top_modes(n_keep)?;
    let f_plus = fidelity(&kept, &BasisProjection::standard(n_keep))?;
    let f_minus = fidelity(&kept, &BasisProjection::conjugate(n_keep))?;
    let p_measured = equal_parity_probability(&kept)?;
    let p = if conservative_p { 1.0 } else { p_measured };
    let sector = 1usize << (n_keep - 1);
    let distill = distillable(f_plus, f_minus, p, sector);

    let (f, p_out, params) = if sector >= 2 {
        let (p_pp, p_cross) = (p / 2.0, (1.0 - p) / 2.0);
        let params = twirl_project(f_plus, f_minus, p_pp, p_pp, p_cross, sector)?;
        let (f, p_out) = conditional_fidelity(&params)?;
        (f, p_out, Some(params))
    } else {
        if p <= MIN_SUCCESS_PROBABILITY {
            return Err(Error::Inconsistent(format!("equal-parity probability {p:.3e} is zero")));
        }
        ((f_plus + f_minus) / p, p, None)
    };
    let rate = (n_keep == 2).then(|| hashing_rate(p_out, f));
    Ok(DistillationReport {
        d,
        n_keep,
        singular_values: nf.singular_values,
        f_plus,
        f_minus,
        p: p_out,
        f,
        distillable: distill,
        rate,
        rate_per_site: None,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_plus_is_invariant() {
        let p = twirl_project(1.0, 0.0, 0.5, 0.5, 0.0, 2).unwrap();
        assert!((p.lambda_plus - 1.0).abs() < 1e-15);
        assert!(p.lambda_minus.abs() < 1e-15);
        assert!(p.mu_plus.abs() < 1e-15);
        assert!(p.mu_minus.abs() < 1e-15);
        let (f, prob) = conditional_fidelity(&p).unwrap();
        assert!((f - 1.0).abs() < 1e-15 && (prob - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chaotic_state() {
        let d = 2;
        let f = 1.0 / (4.0 * 4.0);
        let p = twirl_project(f, f, 0.25, 0.25, 0.25, d).unwrap();
        assert!(p.lambda_plus.abs() < 1e-15 && p.lambda_minus.abs() < 1e-15);
        assert!((p.mu_plus - 1.0 / 16.0).abs() < 1e-15);
        assert!((p.mu_minus - 1.0 / 16.0).abs() < 1e-15);
        let (fc, prob) = conditional_fidelity(&p).unwrap();
        assert!((fc - 0.25).abs() < 1e-15);
        assert!((prob - 0.5).abs() < 1e-15);
        assert!(!distillable(f, f, 0.5, d));
    }

    #[test]
    fn d_one_is_unsupported() {
        assert!(matches!(twirl_project(0.5, 0.5, 0.5, 0.5, 0.0, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn negative_mu_is_rejected() {
        // p_eq below (f+ + f-)/2 forces mu_plus < 0
        assert!(matches!(twirl_project(0.9, 0.0, 0.2, 0.2, 0.3, 2), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn distillable_boundaries() {
        assert!(distillable(1.0, 0.0, 1.0, 2));
        assert!(!distillable(0.25, 0.25, 1.0, 2));
    }

    #[test]
    fn theta_values() {
        assert_eq!(isotropic_theta(1.0, 2).unwrap(), 1.0);
        assert!(isotropic_theta(0.25, 2).unwrap().abs() < 1e-15);
        assert!((isotropic_theta(0.5, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(isotropic_theta(0.5, 1).is_err());
    }

    #[test]
    fn hashing_rate_values() {
        assert_eq!(hashing_rate(1.0, 1.0), 1.0);
        assert!((hashing_rate_raw(1.0, 0.25) + 1.0).abs() < 1e-12);
        assert_eq!(hashing_rate(1.0, 0.25), 0.0);
        assert_eq!(hashing_rate(0.0, 0.9), 0.0);
    }

    #[test]
    fn protocol_on_maximally_entangled_state() {
        for d in 2..=3 {
            let s = BasisProjection::standard(d).covariance();
            let r = run_protocol(&s, 2, false).unwrap();
            assert!((r.f - 1.0).abs() < 1e-12);
            assert!((r.p - 1.0).abs() < 1e-12);
            assert!((r.rate.unwrap() - 1.0).abs() < 1e-10);
            assert!(r.distillable);
        }
    }

    #[test]
    fn protocol_on_product_state() {
        let r = run_protocol(&CovarianceMatrix::vacuum(3, 3), 2, false).unwrap();
        assert!(!r.distillable);
        assert_eq!(r.rate, Some(0.0));
        let r = run_protocol(&CovarianceMatrix::maximally_mixed(3, 3), 2, false).unwrap();
        assert!(!r.distillable);
    }

    #[test]
    fn protocol_rejects_bad_keep() {
        let s = CovarianceMatrix::vacuum(2, 2);
        assert!(run_protocol(&s, 0, false).is_err());
        assert!(run_protocol(&s, 3, false).is_err());
    }

    #[test]
    fn csv_row_shape() {
        let s = BasisProjection::standard(2).covariance();
        let r = run_protocol(&s, 2, false).unwrap();
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.ends_with(",NA"));
        let r1 = run_protocol(&s, 1, false).unwrap();
        assert!(r1.csv_row().contains(",NA,NA"));
    }
}
