//! Bartels-Stewart style solver for A·X + X·B = C.
//!
//! Only B is reduced to Schur form; each (quasi-)triangular column block
//! then yields a shifted dense linear system in the columns of X. At the
//! matrix sizes this crate works with, dense LU per column block is both
//! simple and fast.

use super::schur::{real_schur, SchurOrdering};
use super::{check_finite, check_square, Matrix, NumericsError};

pub fn solve_sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix, NumericsError> {
    check_square(a)?;
    check_square(b)?;
    check_finite(a)?;
    check_finite(b)?;
    check_finite(c)?;
    let n = a.nrows();
    let m = b.nrows();
    if c.nrows() != n || c.ncols() != m {
        return Err(NumericsError::DimensionMismatch(format!(
            "C is {}x{}, expected {}x{}",
            c.nrows(),
            c.ncols(),
            n,
            m
        )));
    }
    if n == 0 || m == 0 {
        return Ok(Matrix::zeros(n, m));
    }

    // B = V Tᵀ Vᵀ with T quasi-upper-triangular
    let dec = real_schur(&b.transpose(), SchurOrdering::None)?;
    let (v, t) = (dec.q, dec.t);
    let f = c * &v;
    let mut y = Matrix::zeros(n, m);

    // column blocks of T, processed last to first
    let mut starts = Vec::new();
    {
        let mut i = 0;
        while i < m {
            if i + 1 < m && t[(i + 1, i)] != 0.0 {
                starts.push((i, 2usize));
                i += 2;
            } else {
                starts.push((i, 1usize));
                i += 1;
            }
        }
    }
    for &(j, q) in starts.iter().rev() {
        // rhs = F_j - Σ_{k>j} Y_k (T_{jk})ᵀ
        let mut rhs = f.view((0, j), (n, q)).clone_owned();
        let tail = j + q;
        if tail < m {
            let yk = y.view((0, tail), (n, m - tail));
            let tjk = t.view((j, tail), (q, m - tail));
            rhs -= yk * tjk.transpose();
        }
        let d = t.view((j, j), (q, q)).clone_owned(); // Y_j Dᵀ term uses D = T_jj
        if q == 1 {
            let shifted = a + Matrix::identity(n, n) * d[(0, 0)];
            let col = shifted
                .lu()
                .solve(&rhs)
                .ok_or(NumericsError::SingularPencil)?;
            y.view_mut((0, j), (n, 1)).copy_from(&col);
        } else {
            // A y1 + y1 d11 + y2 d12 = g1 ; A y2 + y1 d21 + y2 d22 = g2
            // (coefficients from Y Dᵀ where D = T_jj)
            let mut k = Matrix::zeros(2 * n, 2 * n);
            k.view_mut((0, 0), (n, n)).copy_from(&(a + Matrix::identity(n, n) * d[(0, 0)]));
            k.view_mut((0, n), (n, n)).copy_from(&(Matrix::identity(n, n) * d[(0, 1)]));
            k.view_mut((n, 0), (n, n)).copy_from(&(Matrix::identity(n, n) * d[(1, 0)]));
            k.view_mut((n, n), (n, n)).copy_from(&(a + Matrix::identity(n, n) * d[(1, 1)]));
            let mut stacked = Matrix::zeros(2 * n, 1);
            stacked.view_mut((0, 0), (n, 1)).copy_from(&rhs.column(0));
            stacked.view_mut((n, 0), (n, 1)).copy_from(&rhs.column(1));
            let sol = k
                .lu()
                .solve(&stacked)
                .ok_or(NumericsError::SingularPencil)?;
            y.view_mut((0, j), (n, 1)).copy_from(&sol.view((0, 0), (n, 1)));
            y.view_mut((0, j + 1), (n, 1)).copy_from(&sol.view((n, 0), (n, 1)));
        }
    }

    let x = y * v.transpose();
    let residual = (a * &x + &x * b - c).norm();
    let scale = (a.norm() + b.norm()) * x.norm() + c.norm() + super::ABS_TOL_FLOOR;
    if !residual.is_finite() || residual > 1e-9 * scale {
        return Err(NumericsError::SingularPencil);
    }
    Ok(x)
}

/// Continuous Lyapunov equation A·X + X·Aᵀ + Q = 0.
pub(crate) fn solve_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix, NumericsError> {
    solve_sylvester(a, &a.transpose(), &(-q))
}

#[cfg(test)]
mod tests {
    use super::super::tests::random_matrix;
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Kronecker linearization oracle: (I ⊗ A + Bᵀ ⊗ I) vec(X) = vec(C).
    fn kronecker_oracle(a: &Matrix, b: &Matrix, c: &Matrix) -> Matrix {
        let n = a.nrows();
        let m = b.nrows();
        let mut k = Matrix::zeros(n * m, n * m);
        for j in 0..m {
            for r in 0..n {
                for cc in 0..n {
                    k[(j * n + r, j * n + cc)] += a[(r, cc)];
                }
            }
            for jj in 0..m {
                for r in 0..n {
                    k[(j * n + r, jj * n + r)] += b[(jj, j)];
                }
            }
        }
        let rhs = Matrix::from_fn(n * m, 1, |idx, _| c[(idx % n, idx / n)]);
        let sol = k.lu().solve(&rhs).expect("oracle solve");
        Matrix::from_fn(n, m, |r, cc| sol[(cc * n + r, 0)])
    }

    fn stabilized(mut m: Matrix) -> Matrix {
        // shift so that the spectral abscissa is about -0.5
        let shift = super::super::spectral_abscissa(&m).unwrap() + 0.5;
        let n = m.nrows();
        m -= Matrix::identity(n, n) * shift;
        m
    }

    #[test]
    fn scalar_case() {
        let a = Matrix::from_element(1, 1, -1.0);
        let b = Matrix::from_element(1, 1, -1.0);
        let c = Matrix::from_element(1, 1, 2.0);
        let x = solve_sylvester(&a, &b, &c).unwrap();
        assert_relative_eq!(x[(0, 0)], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_rhs() {
        let x = solve_sylvester(&Matrix::identity(3, 3), &Matrix::identity(3, 3), &Matrix::zeros(3, 3))
            .unwrap();
        assert!(x.norm() < 1e-14);
    }

    #[test]
    fn random_stable_vs_kronecker_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let a = stabilized(random_matrix(&mut rng, 3, 3));
            let b = stabilized(random_matrix(&mut rng, 3, 3));
            let c = random_matrix(&mut rng, 3, 3);
            let x = solve_sylvester(&a, &b, &c).unwrap();
            let oracle = kronecker_oracle(&a, &b, &c);
            assert!(
                (&x - &oracle).norm() <= 1e-9 * (1.0 + oracle.norm()),
                "mismatch vs Kronecker oracle"
            );
        }
    }

    #[test]
    fn four_by_four_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let a = stabilized(random_matrix(&mut rng, 4, 4));
            let b = stabilized(random_matrix(&mut rng, 4, 4));
            let c = random_matrix(&mut rng, 4, 4);
            let x = solve_sylvester(&a, &b, &c).unwrap();
            let oracle = kronecker_oracle(&a, &b, &c);
            assert!((&x - &oracle).norm() <= 1e-9 * (1.0 + oracle.norm()));
        }
    }

    #[test]
    fn rectangular_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = stabilized(random_matrix(&mut rng, 4, 4));
        let b = stabilized(random_matrix(&mut rng, 2, 2));
        let c = random_matrix(&mut rng, 4, 2);
        let x = solve_sylvester(&a, &b, &c).unwrap();
        assert!((&a * &x + &x * &b - &c).norm() < 1e-10 * (1.0 + c.norm()));
    }

    #[test]
    fn singular_pencil_detected() {
        // spec(A) ∩ spec(-B) = {1}: A = 1, B = -1 (scalars)
        let a = Matrix::from_element(1, 1, 1.0);
        let b = Matrix::from_element(1, 1, -1.0);
        let c = Matrix::from_element(1, 1, 1.0);
        assert!(matches!(
            solve_sylvester(&a, &b, &c),
            Err(NumericsError::SingularPencil)
        ));
    }

    #[test]
    fn lyapunov_definiteness() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let a = stabilized(random_matrix(&mut rng, 4, 4));
        let q = {
            let r = random_matrix(&mut rng, 4, 4);
            &r * r.transpose() + Matrix::identity(4, 4) * 0.1
        };
        let x = solve_lyapunov(&a, &q).unwrap();
        // X symmetric positive definite for stable A, Q > 0
        assert!((x.clone() - x.transpose()).norm() < 1e-9 * (1.0 + x.norm()));
        let eig = x.clone().symmetric_eigen().eigenvalues;
        assert!(eig.iter().all(|l| *l > 0.0), "Lyapunov solution not PD");
    }
}
