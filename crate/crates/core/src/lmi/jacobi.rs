//! Cyclic Jacobi eigensolver for symmetric matrices.
//!
//! Deliberately separate from the decomposition stack the barrier solver
//! uses: returned LMI solutions are re-verified with this routine, so a
//! defect in one path cannot certify itself.

use crate::numerics::Matrix;

/// All eigenvalues of a symmetric matrix, unordered.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "Jacobi eigensolver needs a square matrix");
    if n == 0 {
        return Vec::new();
    }
    let mut a = (m + m.transpose()) * 0.5;
    let scale = a.norm().max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-13 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

pub fn max_eigenvalue(m: &Matrix) -> f64 {
    symmetric_eigenvalues(m)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    symmetric_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_nalgebra_on_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [1usize, 3, 6, 12] {
            let r = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let sym = (&r + r.transpose()) * 0.5;
            let mut ours = symmetric_eigenvalues(&sym);
            let mut reference = sym.clone().symmetric_eigen().eigenvalues.as_slice().to_vec();
            ours.sort_by(|a, b| a.partial_cmp(b).unwrap());
            reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (x, y) in ours.iter().zip(reference.iter()) {
                assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn diagonal_matrix() {
        let d = Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -1.0]);
        assert!((max_eigenvalue(&d) - 3.0).abs() < 1e-14);
        assert!((min_eigenvalue(&d) + 1.0).abs() < 1e-14);
    }
}
