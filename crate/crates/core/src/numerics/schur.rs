//! Real Schur decomposition with optional stable-first eigenvalue ordering.
//!
//! nalgebra supplies the unordered factorization; the reordering moves
//! selected eigenvalues to the leading block of `T` through direct swaps
//! of adjacent 1x1/2x2 diagonal blocks. Each swap solves a small
//! Sylvester equation for the invariant subspace of the trailing block
//! and retires it to the front with a Householder QR.

use super::{check_finite, check_square, Matrix, NumericsError, SchurDecomposition};
use num_complex::Complex64;

/// Eigenvalue placement requested from [`real_schur`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurOrdering {
    /// Whatever order the QR iteration produces.
    None,
    /// Eigenvalues with negative real part occupy the leading block of T.
    StableFirst,
}

/// Relative threshold below which a subdiagonal entry is declared zero.
const SUBDIAG_TOL: f64 = 1e-13;

pub fn real_schur(m: &Matrix, ordering: SchurOrdering) -> Result<SchurDecomposition, NumericsError> {
    check_square(m)?;
    check_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(SchurDecomposition {
            q: Matrix::zeros(0, 0),
            t: Matrix::zeros(0, 0),
            eigenvalues: Vec::new(),
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-14, 100_000)
        .ok_or_else(|| NumericsError::NonConvergence("QR iteration (Schur)".into()))?;
    let (mut q, mut t) = schur.unpack();
    clean_quasi_triangular(&mut t)?;
    split_real_pair_blocks(&mut q, &mut t)?;
    if ordering == SchurOrdering::StableFirst {
        reorder_stable_first(&mut q, &mut t)?;
    }
    let eigenvalues = block_eigenvalues(&t);
    Ok(SchurDecomposition { q, t, eigenvalues })
}

/// Zero out everything below the quasi-triangular profile and negligible
/// subdiagonal entries. Rejects shapes with two consecutive nonzero
/// subdiagonal entries (not a valid block structure).
fn clean_quasi_triangular(t: &mut Matrix) -> Result<(), NumericsError> {
    let n = t.nrows();
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            t[(i, j)] = 0.0;
        }
    }
    for i in 0..n.saturating_sub(1) {
        let scale = t[(i, i)].abs() + t[(i + 1, i + 1)].abs() + 1.0;
        if t[(i + 1, i)].abs() <= SUBDIAG_TOL * scale {
            t[(i + 1, i)] = 0.0;
        }
    }
    for i in 0..n.saturating_sub(2) {
        if t[(i + 1, i)] != 0.0 && t[(i + 2, i + 1)] != 0.0 {
            return Err(NumericsError::NonConvergence(
                "Schur form has overlapping 2x2 blocks".into(),
            ));
        }
    }
    Ok(())
}

/// Diagonal block layout of a quasi-triangular matrix: (start, size) pairs.
fn scan_blocks(t: &Matrix) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    blocks
}

/// Eigenvalues of the (start, size) diagonal block.
fn block_eigs(t: &Matrix, start: usize, size: usize) -> (Complex64, Option<Complex64>) {
    if size == 1 {
        return (Complex64::new(t[(start, start)], 0.0), None);
    }
    let a = t[(start, start)];
    let b = t[(start, start + 1)];
    let c = t[(start + 1, start)];
    let d = t[(start + 1, start + 1)];
    let mean = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc < 0.0 {
        let im = (-disc).sqrt();
        (Complex64::new(mean, im), Some(Complex64::new(mean, -im)))
    } else {
        let r = disc.sqrt();
        (Complex64::new(mean + r, 0.0), Some(Complex64::new(mean - r, 0.0)))
    }
}

fn block_eigenvalues(t: &Matrix) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(t.nrows());
    for (start, size) in scan_blocks(t) {
        let (l1, l2) = block_eigs(t, start, size);
        out.push(l1);
        if let Some(l2) = l2 {
            out.push(l2);
        }
    }
    out
}

/// A block is "stable" when every eigenvalue has strictly negative real part.
fn block_is_stable(t: &Matrix, start: usize, size: usize) -> bool {
    let (l1, l2) = block_eigs(t, start, size);
    let mut worst = l1.re;
    if let Some(l2) = l2 {
        worst = worst.max(l2.re);
    }
    worst < 0.0
}

/// A 2x2 block whose eigenvalues turn out real is split into two 1x1
/// blocks by rotating its leading eigenvector to e1.
fn split_real_pair_blocks(q: &mut Matrix, t: &mut Matrix) -> Result<(), NumericsError> {
    let n = t.nrows();
    let mut i = 0;
    while i + 1 < n {
        if t[(i + 1, i)] != 0.0 {
            let a = t[(i, i)];
            let b = t[(i, i + 1)];
            let c = t[(i + 1, i)];
            let d = t[(i + 1, i + 1)];
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc >= 0.0 {
                let lambda = 0.5 * (a + d) + disc.sqrt().copysign(a - d);
                // eigenvector of [[a,b],[c,d]] for lambda: pick the better row
                let (v0, v1) = if (lambda - a).abs() > (lambda - d).abs() {
                    (b, lambda - a)
                } else {
                    (lambda - d, c)
                };
                let norm = (v0 * v0 + v1 * v1).sqrt();
                if norm > 0.0 {
                    let g = Matrix::from_row_slice(
                        2,
                        2,
                        &[v0 / norm, -v1 / norm, v1 / norm, v0 / norm],
                    );
                    apply_window_similarity(q, t, i, &g);
                    t[(i + 1, i)] = 0.0;
                }
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(())
}

/// Similarity update T := ĜᵀTĜ, Q := QĜ where Ĝ embeds `g` at `offset`.
fn apply_window_similarity(q: &mut Matrix, t: &mut Matrix, offset: usize, g: &Matrix) {
    let s = g.nrows();
    let n = t.nrows();
    // rows offset..offset+s, columns offset..n
    let rows = t.view((offset, offset), (s, n - offset)).clone_owned();
    t.view_mut((offset, offset), (s, n - offset))
        .copy_from(&(g.transpose() * rows));
    // columns offset..offset+s, rows 0..offset+s
    let cols = t.view((0, offset), (offset + s, s)).clone_owned();
    t.view_mut((0, offset), (offset + s, s)).copy_from(&(cols * g));
    let qcols = q.view((0, offset), (n, s)).clone_owned();
    q.view_mut((0, offset), (n, s)).copy_from(&(qcols * g));
}

/// Full orthogonal factor of the thin QR of `w` (rows x cols, rows >= cols).
fn householder_full_q(w: &Matrix) -> Matrix {
    let rows = w.nrows();
    let cols = w.ncols();
    let mut r = w.clone();
    let mut qacc = Matrix::identity(rows, rows);
    for col in 0..cols.min(rows.saturating_sub(1)) {
        let x = r.view((col, col), (rows - col, 1)).clone_owned();
        let xnorm = x.norm();
        if xnorm == 0.0 {
            continue;
        }
        let mut v = x;
        let alpha = if v[(0, 0)] >= 0.0 { -xnorm } else { xnorm };
        v[(0, 0)] -= alpha;
        let vnorm = v.norm();
        if vnorm == 0.0 {
            continue;
        }
        let v = v / vnorm;
        let sub = r.view((col, 0), (rows - col, cols)).clone_owned();
        let upd = &sub - &v * (v.transpose() * &sub) * 2.0;
        r.view_mut((col, 0), (rows - col, cols)).copy_from(&upd);
        let qsub = qacc.view((0, col), (rows, rows - col)).clone_owned();
        let qupd = &qsub - (&qsub * &v) * v.transpose() * 2.0;
        qacc.view_mut((0, col), (rows, rows - col)).copy_from(&qupd);
    }
    qacc
}

/// Direct swap of the adjacent diagonal blocks (i, p) and (i+p, s2).
///
/// Solves A11 X - X A22 = -A12, then rotates the invariant subspace
/// spanned by [X; I] to the leading columns of the window.
fn swap_adjacent_blocks(
    q: &mut Matrix,
    t: &mut Matrix,
    i: usize,
    p: usize,
    s2: usize,
) -> Result<(), NumericsError> {
    let s = p + s2;
    let a11 = t.view((i, i), (p, p)).clone_owned();
    let a12 = t.view((i, i + p), (p, s2)).clone_owned();
    let a22 = t.view((i + p, i + p), (s2, s2)).clone_owned();

    // Kronecker system (I ⊗ A11 - A22ᵀ ⊗ I) vec(X) = vec(-A12)
    let dim = p * s2;
    let mut k = Matrix::zeros(dim, dim);
    for col_blk in 0..s2 {
        for rr in 0..p {
            for cc in 0..p {
                k[(col_blk * p + rr, col_blk * p + cc)] += a11[(rr, cc)];
            }
        }
        for other in 0..s2 {
            for rr in 0..p {
                k[(col_blk * p + rr, other * p + rr)] -= a22[(other, col_blk)];
            }
        }
    }
    let rhs = Matrix::from_fn(dim, 1, |idx, _| -a12[(idx % p, idx / p)]);
    let x = k
        .lu()
        .solve(&rhs)
        .ok_or(NumericsError::NonConvergence(
            "eigenvalue swap: coincident block spectra".into(),
        ))?;

    // stacked subspace basis [X; I]
    let mut w = Matrix::zeros(s, s2);
    for cc in 0..s2 {
        for rr in 0..p {
            w[(rr, cc)] = x[(cc * p + rr, 0)];
        }
        w[(p + cc, cc)] = 1.0;
    }
    let g = householder_full_q(&w);
    apply_window_similarity(q, t, i, &g);

    // the retired block must have (numerically) vanished below the diagonal
    let tnorm = t.norm();
    let mut worst: f64 = 0.0;
    for rr in s2..s {
        for cc in 0..s2 {
            worst = worst.max(t[(i + rr, i + cc)].abs());
        }
    }
    if worst > 1e-7 * (1.0 + tnorm) {
        return Err(NumericsError::NonConvergence(format!(
            "eigenvalue swap left residual {worst:.3e}"
        )));
    }
    for rr in s2..s {
        for cc in 0..s2 {
            t[(i + rr, i + cc)] = 0.0;
        }
    }
    // tidy negligible subdiagonals inside the window
    for rr in i..(i + s).min(t.nrows() - 1) {
        let scale = t[(rr, rr)].abs() + t[(rr + 1, rr + 1)].abs() + 1.0;
        if t[(rr + 1, rr)].abs() <= SUBDIAG_TOL * scale {
            t[(rr + 1, rr)] = 0.0;
        }
    }
    Ok(())
}

/// Bubble selected (stable) blocks to the front with adjacent swaps.
/// Binary classification keeps the original order inside each class, so
/// eigenvalues with equal real parts are never reordered relative to
/// each other.
fn reorder_stable_first(q: &mut Matrix, t: &mut Matrix) -> Result<(), NumericsError> {
    let mut blocks = scan_blocks(t);
    let max_passes = blocks.len() + 1;
    for _ in 0..max_passes {
        let mut swapped = false;
        let mut k = 0;
        while k + 1 < blocks.len() {
            let (i1, p1) = blocks[k];
            let (_, p2) = blocks[k + 1];
            let first_stable = block_is_stable(t, i1, p1);
            let second_stable = block_is_stable(t, blocks[k + 1].0, p2);
            if !first_stable && second_stable {
                swap_adjacent_blocks(q, t, i1, p1, p2)?;
                blocks[k] = (i1, p2);
                blocks[k + 1] = (i1 + p2, p1);
                swapped = true;
            }
            k += 1;
        }
        if !swapped {
            return Ok(());
        }
    }
    Err(NumericsError::NonConvergence(
        "eigenvalue reordering did not settle".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{assert_spectra_match, char_poly_roots_oracle, random_matrix};
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_orthogonal(q: &Matrix) {
        let n = q.nrows();
        let err = (q.transpose() * q - Matrix::identity(n, n)).norm();
        assert!(err < 1e-11, "Q not orthogonal: {err:.3e}");
    }

    fn assert_reconstructs(dec: &SchurDecomposition, m: &Matrix, rel: f64) {
        let rec = &dec.q * &dec.t * dec.q.transpose();
        let err = (rec - m).norm() / (1.0 + m.norm());
        assert!(err < rel, "reconstruction error {err:.3e}");
    }

    fn stable_count_leading(dec: &SchurDecomposition) -> usize {
        // eigenvalues come in block order; count the leading run with Re < 0
        dec.eigenvalues.iter().take_while(|l| l.re < 0.0).count()
    }

    #[test]
    fn already_ordered_diagonal() {
        let m = Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 2.0]);
        let dec = real_schur(&m, SchurOrdering::StableFirst).unwrap();
        assert_relative_eq!(dec.t[(0, 0)], -1.0, epsilon = 1e-12);
        assert_relative_eq!(dec.t[(1, 1)], 2.0, epsilon = 1e-12);
        assert_reconstructs(&dec, &m, 1e-12);
    }

    #[test]
    fn swap_case_diagonal() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -1.0]);
        let dec = real_schur(&m, SchurOrdering::StableFirst).unwrap();
        assert_relative_eq!(dec.t[(0, 0)], -1.0, epsilon = 1e-12);
        assert_relative_eq!(dec.t[(1, 1)], 2.0, epsilon = 1e-12);
        assert_orthogonal(&dec.q);
        assert_reconstructs(&dec, &m, 1e-12);
    }

    #[test]
    fn random_5x5_reconstruction_and_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 5, 5);
            let dec = real_schur(&m, SchurOrdering::StableFirst).unwrap();
            assert_orthogonal(&dec.q);
            let rec = &dec.q * &dec.t * dec.q.transpose();
            assert!((rec - &m).norm() / m.norm() < 1e-12);
            let oracle = char_poly_roots_oracle(&m);
            assert_spectra_match(&dec.eigenvalues, &oracle, 1e-8);
            // leading block holds exactly the stable eigenvalues
            let total_stable = oracle.iter().filter(|l| l.re < 0.0).count();
            assert_eq!(stable_count_leading(&dec), total_stable);
        }
    }

    #[test]
    fn complex_pairs_are_reordered() {
        // block diag: unstable 1x1, stable complex pair, stable 1x1
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = 3.0;
        m[(1, 1)] = -0.5;
        m[(1, 2)] = 2.0;
        m[(2, 1)] = -2.0;
        m[(2, 2)] = -0.5;
        m[(3, 3)] = -4.0;
        // rotate by a random orthogonal similarity so the structure is hidden
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = householder_full_q(&random_matrix(&mut rng, 4, 4));
        let m = &g * m * g.transpose();
        let dec = real_schur(&m, SchurOrdering::StableFirst).unwrap();
        assert_eq!(stable_count_leading(&dec), 3);
        assert_reconstructs(&dec, &m, 1e-11);
        let oracle = char_poly_roots_oracle(&m);
        assert_spectra_match(&dec.eigenvalues, &oracle, 1e-7);
    }

    #[test]
    fn reconstruction_up_to_20x20() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [8, 14, 20] {
            let m = random_matrix(&mut rng, n, n);
            let dec = real_schur(&m, SchurOrdering::StableFirst).unwrap();
            let rec = &dec.q * &dec.t * dec.q.transpose();
            assert!(
                (rec - &m).norm() <= 1e-10 * m.norm(),
                "n={n}: reconstruction too loose"
            );
            // eigenvalue multiset of T's blocks matches M's spectrum
            let eig_m = super::super::eigenvalues(&m).unwrap();
            assert_spectra_match(&dec.eigenvalues, &eig_m, 1e-8);
        }
    }

    #[test]
    fn unordered_matches_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 6, 6);
        let dec = real_schur(&m, SchurOrdering::None).unwrap();
        assert_orthogonal(&dec.q);
        assert_reconstructs(&dec, &m, 1e-12);
    }

    #[test]
    fn empty_matrix() {
        let dec = real_schur(&Matrix::zeros(0, 0), SchurOrdering::StableFirst).unwrap();
        assert!(dec.eigenvalues.is_empty());
    }
}
