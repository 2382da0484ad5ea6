//! Dense real linear-algebra kernels shared by every other module.
//!
//! Decompositions are delegated to nalgebra; on top of that this module
//! adds an eigenvalue-ordered real Schur form (the workhorse behind the
//! Riccati solvers) and a Bartels-Stewart Sylvester solver.

mod schur;
mod sylvester;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub use schur::{real_schur, SchurOrdering};
pub use sylvester::solve_sylvester;
pub(crate) use sylvester::solve_lyapunov;

/// Dense real matrix, the universal value type of the crate.
pub type Matrix = DMatrix<f64>;

/// Absolute floor under every relative tolerance in this module.
pub const ABS_TOL_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("singular Sylvester pencil: spectra of A and -B overlap")]
    SingularPencil,
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Real Schur decomposition `M = Q T Qᵀ` with `Q` orthogonal and `T`
/// quasi-upper-triangular (1x1 and 2x2 diagonal blocks).
#[derive(Debug, Clone)]
pub struct SchurDecomposition {
    pub q: Matrix,
    pub t: Matrix,
    /// Eigenvalues read off the diagonal blocks of `t`, in block order.
    pub eigenvalues: Vec<Complex64>,
}

pub(crate) fn check_square(m: &Matrix) -> Result<(), NumericsError> {
    if m.nrows() != m.ncols() {
        return Err(NumericsError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite(m: &Matrix) -> Result<(), NumericsError> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(NumericsError::NonFinite)
    }
}

/// Eigenvalues of a square matrix, balanced before the QR iteration.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>, NumericsError> {
    check_square(m)?;
    check_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex64::new(m[(0, 0)], 0.0)]);
    }
    let mut balanced = m.clone();
    nalgebra::linalg::balancing::balance_parlett_reinsch(&mut balanced);
    let schur = nalgebra::linalg::Schur::try_new(balanced, 1e-14, 100_000)
        .ok_or_else(|| NumericsError::NonConvergence("QR iteration (eigenvalues)".into()))?;
    Ok(schur.complex_eigenvalues().as_slice().to_vec())
}

/// Singular value decomposition `M = U Σ Vᵀ`, singular values nonincreasing.
pub fn svd(m: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix), NumericsError> {
    check_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok((
            Matrix::identity(m.nrows(), m.nrows()),
            Vec::new(),
            Matrix::identity(m.ncols(), m.ncols()),
        ));
    }
    let svd = nalgebra::linalg::SVD::try_new(m.clone(), true, true, 1e-14, 100_000)
        .ok_or_else(|| NumericsError::NonConvergence("SVD iteration".into()))?;
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");
    Ok((u, svd.singular_values.as_slice().to_vec(), vt.transpose()))
}

/// Largest singular value; 0 for empty matrices.
pub fn sigma_max(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    svd(m).map(|(_, s, _)| s.first().copied().unwrap_or(0.0)).unwrap_or(f64::NAN)
}

/// 2-norm condition number σ_max/σ_min; ∞ when rank-deficient.
pub fn condition_number(m: &Matrix) -> Result<f64, NumericsError> {
    let (_, s, _) = svd(m)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    if smin == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(smax / smin)
    }
}

/// Max real part over the spectrum; `-inf` for 0x0 (vacuously stable).
pub fn spectral_abscissa(m: &Matrix) -> Result<f64, NumericsError> {
    let eig = eigenvalues(m)?;
    Ok(eig.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max))
}

/// True iff every eigenvalue satisfies `Re λ < -margin`.
pub fn is_hurwitz(m: &Matrix, margin: f64) -> Result<bool, NumericsError> {
    Ok(spectral_abscissa(m)? < -margin)
}

/// Spectral radius, 0 for 0x0.
pub fn spectral_radius(m: &Matrix) -> Result<f64, NumericsError> {
    let eig = eigenvalues(m)?;
    Ok(eig.iter().map(|l| l.norm()).fold(0.0, f64::max))
}

/// `(M + Mᵀ)/2`, used to scrub roundoff off nominally symmetric results.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Diagonal state balancing of a realization (A, B, C): power-of-two
/// scalings d with x = diag(d)·x̃ equalizing row/column norms of the
/// stacked system data. Transfer functions are unchanged; downstream
/// Riccati/LMI conditioning improves dramatically for plants whose
/// states span several decades.
pub fn balance_realization(a: &Matrix, b: &Matrix, c: &Matrix) -> (Vec<f64>, Matrix, Matrix, Matrix) {
    let n = a.nrows();
    let mut ab = a.clone();
    let mut bb = b.clone();
    let mut cb = c.clone();
    let mut d = vec![1.0f64; n];
    for _ in 0..8 {
        let mut changed = false;
        for i in 0..n {
            let mut row = 0.0;
            for k in 0..n {
                if k != i {
                    row += ab[(i, k)].abs();
                }
            }
            for k in 0..bb.ncols() {
                row += bb[(i, k)].abs();
            }
            let mut col = 0.0;
            for k in 0..n {
                if k != i {
                    col += ab[(k, i)].abs();
                }
            }
            for k in 0..cb.nrows() {
                col += cb[(k, i)].abs();
            }
            if row == 0.0 || col == 0.0 {
                continue;
            }
            let f = (row / col).sqrt().log2().round().exp2();
            if f == 1.0 || !f.is_finite() || f == 0.0 {
                continue;
            }
            for k in 0..n {
                ab[(i, k)] /= f;
                ab[(k, i)] *= f;
            }
            for k in 0..bb.ncols() {
                bb[(i, k)] /= f;
            }
            for k in 0..cb.nrows() {
                cb[(k, i)] *= f;
            }
            d[i] *= f;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    (d, ab, bb, cb)
}

/// Solve `M x = b` for each column of `b` via LU; `None` if singular.
pub fn solve_lu(m: &Matrix, rhs: &Matrix) -> Option<Matrix> {
    m.clone().lu().solve(rhs)
}
