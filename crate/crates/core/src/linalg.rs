//! Dense linear algebra for the self-dual formalism.
//!
//! All matrices live in the Γ-invariant Majorana basis, where the antiunitary
//! Γ reduces to entrywise complex conjugation. Pfaffians are computed by
//! skew-symmetric `L T Lᵀ` elimination with partial pivoting (Parlett–Reid),
//! which works unchanged for real and complex entries.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::Complex64;

/// Tolerance on `|A + Aᵀ|` accepted when constructing a [`SkewMatrix`].
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Pivots with modulus below this value terminate the elimination and the
/// Pfaffian is reported as exactly zero.
pub const PIVOT_THRESHOLD: f64 = 1e-13;

/// Largest dimension accepted by [`pair_partition_pfaffian`].
pub const PAIR_PARTITION_MAX_DIM: usize = 12;

/// A square antisymmetric matrix, real or complex.
///
/// Odd dimensions are allowed; their Pfaffian is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix<T: ComplexField<RealField = f64>> {
    inner: DMatrix<T>,
}

impl<T: ComplexField<RealField = f64>> SkewMatrix<T> {
    /// Validates antisymmetry to [`ANTISYMMETRY_TOL`].
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        Self::with_tolerance(matrix, ANTISYMMETRY_TOL)
    }

    pub fn with_tolerance(matrix: DMatrix<T>, tolerance: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let residual = antisymmetry_residual(&matrix);
        if residual > tolerance {
            return Err(Error::NotAntisymmetric { residual, tolerance });
        }
        Ok(Self { inner: matrix })
    }

    /// Replaces `A` by `(A - Aᵀ)/2`, discarding any symmetric part.
    pub fn symmetrized(matrix: DMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let t = matrix.transpose();
        let half = T::from_real(0.5);
        Ok(Self { inner: (matrix - t) * half })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<T> {
        self.inner
    }
}

/// Largest entry of `|A + Aᵀ|`.
pub fn antisymmetry_residual<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    let n = a.nrows().min(a.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let r = (a[(i, j)].clone() + a[(j, i)].clone()).modulus();
            worst = worst.max(r);
        }
    }
    worst
}

/// Largest entry of `|QᵀQ - 1|`.
pub fn orthogonality_residual(q: &DMatrix<f64>) -> f64 {
    if !q.is_square() {
        return f64::INFINITY;
    }
    let prod = q.transpose() * q;
    let id = DMatrix::<f64>::identity(q.nrows(), q.ncols());
    (prod - id).amax()
}

/// Pfaffian by skew-symmetric tridiagonalization with partial pivoting.
///
/// Row/column swaps flip the sign; a pivot below [`PIVOT_THRESHOLD`] means the
/// matrix is singular to working precision and zero is returned.
pub fn pfaffian<T: ComplexField<RealField = f64>>(a: &SkewMatrix<T>) -> T {
    pfaffian_unchecked(a.matrix().clone())
}

pub(crate) fn pfaffian_unchecked<T: ComplexField<RealField = f64>>(mut a: DMatrix<T>) -> T {
    let n = a.nrows();
    if n % 2 == 1 {
        return T::zero();
    }
    let mut pf = T::one();
    let mut k = 0;
    while k + 1 < n {
        // pivot: largest entry in column k below the diagonal
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].clone().modulus();
        for i in (k + 2)..n {
            let m = a[(i, k)].clone().modulus();
            if m > best {
                best = m;
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if best < PIVOT_THRESHOLD {
            return T::zero();
        }
        let pivot = a[(k, k + 1)].clone();
        pf *= pivot.clone();

        if k + 2 < n {
            let tau: Vec<T> = ((k + 2)..n).map(|j| a[(k, j)].clone() / pivot.clone()).collect();
            let col: Vec<T> = ((k + 2)..n).map(|i| a[(i, k + 1)].clone()).collect();
            let m = n - k - 2;
            for i in 0..m {
                for j in 0..m {
                    let upd = tau[i].clone() * col[j].clone() - col[i].clone() * tau[j].clone();
                    a[(k + 2 + i, k + 2 + j)] += upd;
                }
            }
        }
        k += 2;
    }
    pf
}

/// Pfaffian by explicit summation over all pair partitions, expanding along
/// the first row. Exponential cost; intended as a reference for tests.
pub fn pair_partition_pfaffian<T: ComplexField<RealField = f64>>(a: &SkewMatrix<T>) -> Result<T> {
    let n = a.dim();
    if n > PAIR_PARTITION_MAX_DIM {
        return Err(Error::TooLarge {
            what: "pair-partition Pfaffian dimension",
            size: n,
            limit: PAIR_PARTITION_MAX_DIM,
        });
    }
    if n % 2 == 1 {
        return Ok(T::zero());
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(expand(a.matrix(), &idx))
}

fn expand<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, idx: &[usize]) -> T {
    if idx.is_empty() {
        return T::one();
    }
    let first = idx[0];
    let mut total = T::zero();
    for pos in 1..idx.len() {
        let rest: Vec<usize> = idx[1..]
            .iter()
            .enumerate()
            .filter(|&(p, _)| p + 1 != pos)
            .map(|(_, &v)| v)
            .collect();
        let term = a[(first, idx[pos])].clone() * expand(a, &rest);
        // partner at relative position `pos` contributes sign (-1)^(pos+1)
        if pos % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Real singular value decomposition `Y = U Σ Vᵀ` with square orthogonal
/// `U` (rows×rows) and `V` (cols×cols) and singular values sorted descending.
#[derive(Debug, Clone)]
pub struct RealSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl RealSvd {
    /// The rectangular diagonal factor Σ.
    pub fn sigma(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.u.nrows(), self.v.nrows());
        for (i, &x) in self.singular_values.iter().enumerate() {
            s[(i, i)] = x;
        }
        s
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * self.sigma() * self.v.transpose()
    }
}

pub fn real_svd(y: &DMatrix<f64>) -> Result<RealSvd> {
    let (m, n) = y.shape();
    if m == 0 || n == 0 {
        return Ok(RealSvd {
            u: DMatrix::identity(m, m),
            singular_values: Vec::new(),
            v: DMatrix::identity(n, n),
        });
    }
    let svd = nalgebra::linalg::SVD::try_new(y.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u_thin = svd.u.ok_or_else(|| Error::Numerical("SVD returned no U".into()))?;
    let vt_thin = svd.v_t.ok_or_else(|| Error::Numerical("SVD returned no Vᵀ".into()))?;
    let k = svd.singular_values.len();

    // stable descending order, lower index first on ties
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut u_cols = Vec::with_capacity(k);
    let mut v_cols = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    for &i in &order {
        u_cols.push(u_thin.column(i).into_owned());
        v_cols.push(vt_thin.row(i).transpose());
        values.push(svd.singular_values[i].max(0.0));
    }
    Ok(RealSvd {
        u: complete_orthonormal_basis(&u_cols, m),
        singular_values: values,
        v: complete_orthonormal_basis(&v_cols, n),
    })
}

/// Extends orthonormal columns to a full orthogonal `dim`×`dim` matrix by
/// Gram–Schmidt against the canonical basis.
fn complete_orthonormal_basis(cols: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = cols.to_vec();
    let mut e = 0;
    while basis.len() < dim && e < dim {
        let mut v = DVector::<f64>::zeros(dim);
        v[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
        e += 1;
    }
    DMatrix::from_columns(&basis)
}

/// Γ in the Γ-invariant basis: entrywise complex conjugation. `Γ² = 1`.
pub fn gamma(v: &DVector<Complex64>) -> DVector<Complex64> {
    v.map(|z| z.conj())
}

/// A doubled-space operator commutes with Γ exactly when it is real in the
/// Γ-invariant basis. Returns the largest imaginary entry.
pub fn gamma_commutator_residual(u: &DMatrix<Complex64>) -> f64 {
    u.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Orthogonal similarity `Pᵀ A P` that reorders rows and columns so that the
/// `k`-th new index is `perm[k]`.
pub(crate) fn permute_symmetric<T: ComplexField<RealField = f64>>(
    a: &DMatrix<T>,
    perm: &[usize],
) -> DMatrix<T> {
    DMatrix::from_fn(perm.len(), perm.len(), |i, j| a[(perm[i], perm[j])].clone())
}
