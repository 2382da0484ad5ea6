//! Transmission zeros from the Rosenbrock system pencil.
//!
//! For square systems the finite generalized eigenvalues of
//! ([[A, B],[C, D]], diag(I, 0)) are computed by shift-and-invert with
//! two shifts; agreement between the shifts filters the spurious
//! near-infinite values. Non-square systems are squared down with two
//! independent random projections and the results intersected; a
//! projection can only add zeros, never remove one, so the common set
//! is exactly the zeros of the rectangular system.

use super::{StateSpace, SysError};
use crate::numerics::{self, Matrix};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MATCH_TOL: f64 = 1e-6;

fn square_pencil_zeros(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    d: &Matrix,
) -> Result<Vec<Complex64>, SysError> {
    let n = a.nrows();
    let (p, m) = (c.nrows(), b.ncols());
    debug_assert_eq!(p, m);
    if n == 0 {
        return Ok(Vec::new());
    }
    let size = n + p;
    let mut mm = Matrix::zeros(size, size);
    mm.view_mut((0, 0), (n, n)).copy_from(a);
    mm.view_mut((0, n), (n, m)).copy_from(b);
    mm.view_mut((n, 0), (p, n)).copy_from(c);
    mm.view_mut((n, n), (p, m)).copy_from(d);
    let mut nn = Matrix::zeros(size, size);
    for i in 0..n {
        nn[(i, i)] = 1.0;
    }

    let rho = 1.0 + a.norm();
    let shift_factors = [1.323_729, -2.118_034, 0.577_215, 3.302_775, -4.236_068, 2.741_963];
    let mut spectra: Vec<Vec<Complex64>> = Vec::new();
    for factor in shift_factors {
        if spectra.len() == 2 {
            break;
        }
        let sigma = factor * rho;
        let shifted = &mm - &nn * sigma;
        let Some(k) = numerics::solve_lu(&shifted, &nn) else {
            continue;
        };
        if !k.iter().all(|x| x.is_finite()) {
            continue;
        }
        let mu = numerics::eigenvalues(&k)?;
        let mu_max = mu.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
        let cut = (1e-8 * mu_max).max(1e-12 / rho);
        let zeros: Vec<Complex64> = mu
            .iter()
            .filter(|u| u.norm() > cut)
            .map(|u| sigma + 1.0 / u)
            .filter(|z| z.norm() < 1e9 * rho)
            .collect();
        spectra.push(zeros);
    }
    if spectra.len() < 2 {
        return Err(SysError::DegeneratePencil);
    }
    Ok(intersect_spectra(&spectra[0], &spectra[1]))
}

/// Greedy multiset intersection of two complex spectra.
fn intersect_spectra(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut pool: Vec<Complex64> = b.to_vec();
    let mut out = Vec::new();
    for z in a {
        let best = pool
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
        if let Some((i, dist)) = best {
            if dist <= MATCH_TOL * (1.0 + z.norm()) {
                out.push(*z);
                pool.swap_remove(i);
            }
        }
    }
    out
}

/// Finite transmission zeros of a state-space system.
pub fn transmission_zeros(s: &StateSpace) -> Result<Vec<Complex64>, SysError> {
    let (p, m) = (s.noutputs(), s.ninputs());
    if s.order() == 0 || p == 0 || m == 0 {
        return Ok(Vec::new());
    }
    if p == m {
        return square_pencil_zeros(&s.a, &s.b, &s.c, &s.d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0123);
    if p > m {
        // tall: compress outputs with two independent projections
        let mut runs = Vec::new();
        for _ in 0..2 {
            let w = Matrix::from_fn(m, p, |_, _| rng.random_range(-1.0..1.0));
            runs.push(square_pencil_zeros(&s.a, &s.b, &(&w * &s.c), &(&w * &s.d))?);
        }
        Ok(intersect_spectra(&runs[0], &runs[1]))
    } else {
        // wide: compress inputs
        let mut runs = Vec::new();
        for _ in 0..2 {
            let v = Matrix::from_fn(m, p, |_, _| rng.random_range(-1.0..1.0));
            runs.push(square_pencil_zeros(&s.a, &(&s.b * &v), &s.c, &(&s.d * &v))?);
        }
        Ok(intersect_spectra(&runs[0], &runs[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::random_state_space;
    use super::super::tf::{poly_from_real_roots, poly_mul_complex_pair, RationalFunction, TransferMatrix};
    use super::super::tf_to_ss;
    use super::*;
    use rand::SeedableRng;

    fn contains_zero(zeros: &[Complex64], z: Complex64, tol: f64) -> bool {
        zeros.iter().any(|w| (w - z).norm() < tol)
    }

    #[test]
    fn siso_rhp_zero() {
        // (s-1)/(s+2): zero at +1
        let rf = RationalFunction::new(vec![1.0, -1.0], vec![1.0, 2.0]).unwrap();
        let ss = tf_to_ss(&TransferMatrix::siso(rf)).unwrap();
        let zeros = transmission_zeros(&ss).unwrap();
        assert_eq!(zeros.len(), 1);
        assert!(contains_zero(&zeros, Complex64::new(1.0, 0.0), 1e-8));
    }

    #[test]
    fn invertible_d_reduction_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..8 {
            let mut s = random_state_space(&mut rng, 4, 2, 2, false);
            // make D comfortably invertible
            s.d += Matrix::identity(2, 2) * 2.0;
            let zeros = transmission_zeros(&s).unwrap();
            let dinv = s.d.clone().try_inverse().unwrap();
            let reduced = &s.a - &s.b * dinv * &s.c;
            let oracle = numerics::eigenvalues(&reduced).unwrap();
            assert_eq!(zeros.len(), oracle.len(), "zero count mismatch");
            crate::numerics::tests::assert_spectra_match(&zeros, &oracle, 1e-6);
        }
    }

    #[test]
    fn tall_system_common_zeros() {
        // two SISO numerators sharing roots {1, 5}; zeros of the stacked
        // 2x1 system are exactly the common roots
        let den = {
            let mut d = poly_mul_complex_pair(&[1.0], -2.0, 1.0);
            d = super::super::tf::poly_mul(&d, &poly_from_real_roots(&[3.0, 20.0]));
            d
        };
        let num1 = poly_from_real_roots(&[-5.0, 1.0, 5.0]);
        let num2 = poly_from_real_roots(&[-1.0, 1.0, 5.0]);
        let g = TransferMatrix::new(vec![
            vec![RationalFunction::new(num1, den.clone()).unwrap()],
            vec![RationalFunction::new(num2, den).unwrap()],
        ])
        .unwrap();
        let ss = tf_to_ss(&g).unwrap();
        assert_eq!(ss.order(), 4);
        let zeros = transmission_zeros(&ss).unwrap();
        assert_eq!(zeros.len(), 2, "zeros: {zeros:?}");
        assert!(contains_zero(&zeros, Complex64::new(1.0, 0.0), 1e-6));
        assert!(contains_zero(&zeros, Complex64::new(5.0, 0.0), 1e-6));
    }

    #[test]
    fn degenerate_pencil_reported() {
        // zero output map with zero feedthrough: det(M - λN) ≡ 0
        let s = StateSpace::new(
            Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]),
            Matrix::from_row_slice(2, 1, &[1.0, 1.0]),
            Matrix::zeros(1, 2),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        assert!(matches!(
            transmission_zeros(&s),
            Err(SysError::DegeneratePencil)
        ));
    }

    #[test]
    fn no_zeros_for_simple_integrator_chain() {
        // 1/(s+1)^2 has no finite zeros
        let rf = RationalFunction::new(vec![1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let ss = tf_to_ss(&TransferMatrix::siso(rf)).unwrap();
        let zeros = transmission_zeros(&ss).unwrap();
        assert!(zeros.is_empty(), "unexpected zeros {zeros:?}");
    }
}
