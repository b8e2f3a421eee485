//! Covariance matrices of quasifree states in the Γ-invariant Majorana basis.
//!
//! A state on `d_A + d_B` modes is described by a real antisymmetric matrix
//! `M` with `S = (1 + iM)/2`. Indices run over the doubled space: first
//! Alice's `2 d_A` Majoranas in the order `a_1..a_dA, b_1..b_dA`, then Bob's
//! `2 d_B` Majoranas in *reversed* order `b_dB..b_1, a_dB..a_1`. With
//! `a = c + c†`, `b = i(c† - c)` one has `M_jk = -i⟨γ_j γ_k⟩` for `j ≠ k`;
//! the vacuum has `M(a_k, b_k) = 1`.
//!
//! The reversal of Bob's half makes the identity-coupled basis projection an
//! even-parity state; see [`crate::quasifree::BasisProjection`].

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{antisymmetry_residual, permute_symmetric, ANTISYMMETRY_TOL};

/// Singular values of `M` above `1 + POSITIVITY_TOL` violate `0 ≤ S ≤ 1`.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Overshoots of the largest singular value up to this size are projected
/// back onto the unit ball on construction; larger ones are rejected.
pub const PROJECTION_TOL: f64 = 1e-9;

/// Tolerance for `M² = -1`.
pub const PURITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

/// The two Hermitian Majorana operators of a mode: `a = c + c†` and
/// `b = i(c† - c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajoranaKind {
    A,
    B,
}

/// Identifies one basis vector of the doubled space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MajoranaLabel {
    pub party: Party,
    /// Mode index within the party.
    pub mode: usize,
    pub kind: MajoranaKind,
}

/// Position of a Majorana in the doubled-space ordering for given mode counts.
pub fn majorana_index(d_a: usize, d_b: usize, label: MajoranaLabel) -> usize {
    match (label.party, label.kind) {
        (Party::Alice, MajoranaKind::A) => label.mode,
        (Party::Alice, MajoranaKind::B) => d_a + label.mode,
        (Party::Bob, MajoranaKind::A) => 2 * d_a + 2 * d_b - 1 - label.mode,
        (Party::Bob, MajoranaKind::B) => 2 * d_a + d_b - 1 - label.mode,
    }
}

/// Inverse of [`majorana_index`].
pub fn majorana_label(d_a: usize, d_b: usize, index: usize) -> MajoranaLabel {
    if index < d_a {
        MajoranaLabel { party: Party::Alice, mode: index, kind: MajoranaKind::A }
    } else if index < 2 * d_a {
        MajoranaLabel { party: Party::Alice, mode: index - d_a, kind: MajoranaKind::B }
    } else {
        let e = 2 * d_b - 1 - (index - 2 * d_a);
        if e < d_b {
            MajoranaLabel { party: Party::Bob, mode: e, kind: MajoranaKind::A }
        } else {
            MajoranaLabel { party: Party::Bob, mode: e - d_b, kind: MajoranaKind::B }
        }
    }
}

/// Doubled-space indices ordered mode by mode, `(a, b)` per mode, Alice's
/// modes first. In this order the total parity expectation is `Pf(M)`.
pub fn mode_pair_order(d_a: usize, d_b: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(2 * (d_a + d_b));
    for (party, count) in [(Party::Alice, d_a), (Party::Bob, d_b)] {
        for mode in 0..count {
            for kind in [MajoranaKind::A, MajoranaKind::B] {
                order.push(majorana_index(d_a, d_b, MajoranaLabel { party, mode, kind }));
            }
        }
    }
    order
}

/// One failed constraint and the size by which it failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape { expected: usize, rows: usize, cols: usize },
    NonFinite,
    Antisymmetry { residual: f64 },
    Positivity { max_singular_value: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Shape { expected, rows, cols } => {
                write!(f, "shape {rows}x{cols}, expected {expected}x{expected}")
            }
            Violation::NonFinite => write!(f, "non-finite entries"),
            Violation::Antisymmetry { residual } => {
                write!(f, "antisymmetry residual {residual:.3e} > {ANTISYMMETRY_TOL:.0e}")
            }
            Violation::Positivity { max_singular_value } => write!(
                f,
                "0 <= S <= 1 violated: largest singular value of M is {max_singular_value:.12} (excess {:.3e})",
                max_singular_value - 1.0
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Largest singular value of `M`, when it could be computed.
    pub max_singular_value: Option<f64>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the constraints on a candidate covariance matrix `M`.
///
/// `ΓSΓ = 1 - S` holds identically for `S = (1 + iM)/2` with real `M`, so only
/// antisymmetry and `0 ≤ S ≤ 1` (all singular values of `M` at most one) are
/// tested.
pub fn validate(d_a: usize, d_b: usize, m: &DMatrix<f64>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = 2 * (d_a + d_b);
    if m.nrows() != n || m.ncols() != n {
        report.violations.push(Violation::Shape { expected: n, rows: m.nrows(), cols: m.ncols() });
        return report;
    }
    if m.iter().any(|x| !x.is_finite()) {
        report.violations.push(Violation::NonFinite);
        return report;
    }
    let residual = antisymmetry_residual(m);
    if residual > ANTISYMMETRY_TOL {
        report.violations.push(Violation::Antisymmetry { residual });
    }
    let smax = max_singular_value(m);
    report.max_singular_value = Some(smax);
    if smax > 1.0 + POSITIVITY_TOL {
        report.violations.push(Violation::Positivity { max_singular_value: smax });
    }
    report
}

fn max_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Covariance of a quasifree state on `d_A + d_B` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    d_a: usize,
    d_b: usize,
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates `M`. Antisymmetry residuals up to `1e-12` are symmetrized
    /// away and positivity overshoots between `1e-10` and `1e-9` are projected back.
    pub fn new(d_a: usize, d_b: usize, m: DMatrix<f64>) -> Result<Self> {
        let report = validate(d_a, d_b, &m);
        let mut hard = Vec::new();
        for v in &report.violations {
            match v {
                Violation::Positivity { max_singular_value }
                    if *max_singular_value <= 1.0 + PROJECTION_TOL => {}
                other => hard.push(other.to_string()),
            }
        }
        if !hard.is_empty() {
            return Err(Error::InvalidCovariance(hard.join("; ")));
        }
        let mut m = (&m - m.transpose()) * 0.5;
        if report.max_singular_value.is_some_and(|s| s > 1.0 + POSITIVITY_TOL) {
            m = clip_to_unit_ball(&m)?;
        }
        Ok(Self { d_a, d_b, m })
    }

    pub(crate) fn from_trusted(d_a: usize, d_b: usize, m: DMatrix<f64>) -> Self {
        debug_assert_eq!(m.nrows(), 2 * (d_a + d_b));
        Self { d_a, d_b, m }
    }

    /// All modes empty: `⟨1 - 2n⟩ = 1` on every mode.
    pub fn vacuum(d_a: usize, d_b: usize) -> Self {
        let n = 2 * (d_a + d_b);
        let mut m = DMatrix::zeros(n, n);
        for (party, count) in [(Party::Alice, d_a), (Party::Bob, d_b)] {
            for mode in 0..count {
                let ia = majorana_index(d_a, d_b, MajoranaLabel { party, mode, kind: MajoranaKind::A });
                let ib = majorana_index(d_a, d_b, MajoranaLabel { party, mode, kind: MajoranaKind::B });
                m[(ia, ib)] = 1.0;
                m[(ib, ia)] = -1.0;
            }
        }
        Self { d_a, d_b, m }
    }

    /// `S = 1/2`.
    pub fn maximally_mixed(d_a: usize, d_b: usize) -> Self {
        let n = 2 * (d_a + d_b);
        Self { d_a, d_b, m: DMatrix::zeros(n, n) }
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn modes(&self) -> usize {
        self.d_a + self.d_b
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Alice–Alice block.
    pub fn x(&self) -> DMatrix<f64> {
        let na = 2 * self.d_a;
        self.m.view((0, 0), (na, na)).into_owned()
    }

    /// Alice–Bob block.
    pub fn y(&self) -> DMatrix<f64> {
        let (na, nb) = (2 * self.d_a, 2 * self.d_b);
        self.m.view((0, na), (na, nb)).into_owned()
    }

    /// Bob–Bob block.
    pub fn z(&self) -> DMatrix<f64> {
        let (na, nb) = (2 * self.d_a, 2 * self.d_b);
        self.m.view((na, na), (nb, nb)).into_owned()
    }

    /// `S = (1 + iM)/2` as a complex matrix.
    pub fn s(&self) -> DMatrix<crate::Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            let re = if i == j { 0.5 } else { 0.0 };
            crate::Complex64::new(re, 0.5 * self.m[(i, j)])
        })
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self.d_a, self.d_b, &self.m)
    }

    /// `M² = -1` to [`PURITY_TOL`].
    pub fn is_pure(&self) -> bool {
        let n = self.dim();
        let r = &self.m * &self.m + DMatrix::<f64>::identity(n, n);
        r.amax() <= PURITY_TOL
    }

    /// `M` reordered mode by mode; see [`mode_pair_order`].
    pub fn mode_pair_matrix(&self) -> DMatrix<f64> {
        permute_symmetric(&self.m, &mode_pair_order(self.d_a, self.d_b))
    }

    pub fn majorana_label(&self, index: usize) -> MajoranaLabel {
        majorana_label(self.d_a, self.d_b, index)
    }

    /// Partial trace onto the selected modes, given as mode indices within
    /// each party. The result lists the kept modes in the order given.
    pub fn restrict_modes(&self, keep_a: &[usize], keep_b: &[usize]) -> Result<Self> {
        check_selection(keep_a, self.d_a)?;
        check_selection(keep_b, self.d_b)?;
        let (na, nb) = (keep_a.len(), keep_b.len());
        let dim = 2 * (na + nb);
        let perm: Vec<usize> = (0..dim)
            .map(|t| {
                let new = majorana_label(na, nb, t);
                let old_mode = match new.party {
                    Party::Alice => keep_a[new.mode],
                    Party::Bob => keep_b[new.mode],
                };
                majorana_index(self.d_a, self.d_b, MajoranaLabel { mode: old_mode, ..new })
            })
            .collect();
        Ok(Self { d_a: na, d_b: nb, m: permute_symmetric(&self.m, &perm) })
    }

    /// Plain-text form: a `d_A d_B` header followed by the rows of `M`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.d_a, self.d_b);
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|j| format!("{:e}", self.m[(i, j)])).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    /// Parses [`to_text`](Self::to_text) output and validates the matrix.
    pub fn from_text(text: &str) -> Result<Self> {
        let (d_a, d_b, m) = parse_text(text)?;
        Self::new(d_a, d_b, m)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Parses the plain-text covariance format without validating the matrix.
pub fn parse_text(text: &str) -> Result<(usize, usize, DMatrix<f64>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty input".into() })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse { line: hline, message: format!("bad header: {e}") })?;
    if dims.len() != 2 {
        return Err(Error::Parse { line: hline, message: "header must be `d_A d_B`".into() });
    }
    let (d_a, d_b) = (dims[0], dims[1]);
    let n = 2 * (d_a + d_b);
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (lineno, line) in lines {
        if rows == n {
            return Err(Error::Parse { line: lineno, message: format!("more than {n} rows") });
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
        if row.len() != n {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {n} entries, found {}", row.len()),
            });
        }
        data.extend(row);
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse { line: rows + 1, message: format!("expected {n} rows, found {rows}") });
    }
    Ok((d_a, d_b, DMatrix::from_row_slice(n, n, &data)))
}

fn check_selection(keep: &[usize], modes: usize) -> Result<()> {
    let mut seen = vec![false; modes];
    for &k in keep {
        if k >= modes {
            return Err(Error::ModeOutOfRange { index: k, modes });
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::DuplicateMode(k));
        }
    }
    Ok(())
}

/// Clips singular values of an antisymmetric matrix to at most one.
fn clip_to_unit_ball(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = nalgebra::linalg::SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let s = svd.singular_values.map(|x| x.min(1.0));
    let clipped = &u * DMatrix::from_diagonal(&s) * &vt;
    Ok((&clipped - clipped.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for (d_a, d_b) in [(1, 1), (2, 3), (3, 2)] {
            for i in 0..2 * (d_a + d_b) {
                assert_eq!(majorana_index(d_a, d_b, majorana_label(d_a, d_b, i)), i);
            }
        }
    }

    #[test]
    fn bob_is_reversed() {
        // d_A = d_B = 1: ordering (a_A, b_A, b_B, a_B)
        let l = majorana_label(1, 1, 2);
        assert_eq!((l.party, l.kind), (Party::Bob, MajoranaKind::B));
        let l = majorana_label(1, 1, 3);
        assert_eq!((l.party, l.kind), (Party::Bob, MajoranaKind::A));
    }

    #[test]
    fn maximally_mixed_is_valid() {
        assert!(CovarianceMatrix::maximally_mixed(2, 2).validate().is_ok());
        assert!(CovarianceMatrix::vacuum(2, 3).validate().is_ok());
        assert!(CovarianceMatrix::vacuum(2, 3).is_pure());
    }

    #[test]
    fn positivity_violation_reported() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = 1.5;
        m[(1, 0)] = -1.5;
        let r = validate(1, 1, &m);
        assert!(matches!(r.violations[..], [Violation::Positivity { .. }]));
        assert!(CovarianceMatrix::new(1, 1, m).is_err());
    }

    #[test]
    fn antisymmetry_violation_reported() {
        let mut m = CovarianceMatrix::vacuum(1, 1).m().clone();
        m[(0, 2)] += 1e-6;
        m[(2, 0)] += 1e-6;
        let r = validate(1, 1, &m);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Antisymmetry { .. })));
    }

    #[test]
    fn small_overshoot_is_projected() {
        let mut m = CovarianceMatrix::vacuum(1, 1).m().clone();
        m *= 1.0 + 5e-10;
        let s = CovarianceMatrix::new(1, 1, m).unwrap();
        assert!(s.validate().is_ok());
        assert!(s.validate().max_singular_value.unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let r = validate(1, 1, &DMatrix::zeros(3, 3));
        assert!(matches!(r.violations[..], [Violation::Shape { .. }]));
    }

    #[test]
    fn restrict_all_modes_is_identity() {
        let s = CovarianceMatrix::vacuum(2, 2);
        assert_eq!(s.restrict_modes(&[0, 1], &[0, 1]).unwrap(), s);
    }

    #[test]
    fn restrict_rejects_bad_indices() {
        let s = CovarianceMatrix::vacuum(2, 2);
        assert!(matches!(s.restrict_modes(&[2], &[0]), Err(Error::ModeOutOfRange { .. })));
        assert!(matches!(s.restrict_modes(&[0, 0], &[0]), Err(Error::DuplicateMode(0))));
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 2)] = 0.123_456_789_012_345_68;
        m[(2, 0)] = -m[(0, 2)];
        m[(1, 3)] = std::f64::consts::FRAC_1_PI;
        m[(3, 1)] = -m[(1, 3)];
        let s = CovarianceMatrix::new(1, 1, m).unwrap();
        let back = CovarianceMatrix::from_text(&s.to_text()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_text(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_text("1 1\n0 0 0 0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_text("1 x\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_text("1 1\n0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n"), Err(Error::Parse { .. })));
    }
}
