//! H-infinity norm via bisection on the Hamiltonian imaginary-axis test.

use super::{StateSpace, SysError};
use crate::numerics::{self, Matrix};
use num_complex::Complex64;

/// Relative half-width at which an eigenvalue counts as "on the axis".
const AXIS_TOL: f64 = 1e-9;

/// Logarithmically spaced frequency grid.
pub fn frequency_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Largest singular value of the frequency response over a grid of
/// imaginary-axis points. This is the test oracle for `hinf_norm`, not
/// the algorithm behind it.
pub fn max_sv_on_grid(s: &StateSpace, grid: &[f64]) -> Result<f64, SysError> {
    let mut best: f64 = 0.0;
    for w in grid {
        let g = s.transfer_at(Complex64::new(0.0, *w))?;
        let sv = g.svd(false, false).singular_values;
        best = best.max(sv.iter().fold(0.0f64, |m, x| m.max(*x)));
    }
    Ok(best)
}

/// True iff γ > σ_max(D) is a strict upper bound on the H∞ norm, via the
/// absence of imaginary-axis eigenvalues in the associated Hamiltonian.
fn gamma_exceeds_norm(s: &StateSpace, gamma: f64) -> Result<bool, SysError> {
    let n = s.order();
    let m = s.ninputs();
    let r = Matrix::identity(m, m) * (gamma * gamma) - s.d.transpose() * &s.d;
    let rinv_dt_c = numerics::solve_lu(&r, &(s.d.transpose() * &s.c))
        .ok_or(SysError::SingularAtFrequency)?;
    let rinv_bt = numerics::solve_lu(&r, &s.b.transpose()).ok_or(SysError::SingularAtFrequency)?;
    let a_h = &s.a + &s.b * &rinv_dt_c;
    let g_bb = &s.b * &rinv_bt;
    let p = s.noutputs();
    let w = s.c.transpose()
        * (Matrix::identity(p, p) + &s.d * numerics::solve_lu(&r, &s.d.transpose()).unwrap())
        * &s.c;
    let mut h = Matrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&a_h);
    h.view_mut((0, n), (n, n)).copy_from(&g_bb);
    h.view_mut((n, 0), (n, n)).copy_from(&(-&w));
    h.view_mut((n, n), (n, n)).copy_from(&(-a_h.transpose()));
    let eig = numerics::eigenvalues(&h)?;
    Ok(eig
        .iter()
        .all(|l| l.re.abs() > AXIS_TOL * (1.0 + l.norm())))
}

/// H-infinity norm of a stable system to relative accuracy `rel_tol`.
///
/// The initial bracket is [σ_max(D), σ_max(D) + 2·Σ Hankel singular
/// values]; bisection then tests each candidate level on the Hamiltonian.
pub fn hinf_norm(s: &StateSpace, rel_tol: f64) -> Result<f64, SysError> {
    let n = s.order();
    let sigma_d = numerics::sigma_max(&s.d);
    if n == 0 {
        return Ok(sigma_d);
    }
    if !s.is_stable(0.0)? {
        return Err(SysError::UnstableSystem);
    }
    if s.b.ncols() == 0 || s.c.nrows() == 0 {
        return Ok(0.0);
    }

    // Hankel-type upper bound from the system Gramians
    let p_gram = numerics::solve_lyapunov(&s.a, &(&s.b * s.b.transpose()))?;
    let q_gram = numerics::solve_lyapunov(&s.a.transpose(), &(s.c.transpose() * &s.c))?;
    let pq_eig = numerics::eigenvalues(&(&p_gram * &q_gram))?;
    let hankel_sum: f64 = pq_eig.iter().map(|l| l.re.max(0.0).sqrt()).sum();
    let mut hi = (sigma_d + 2.0 * hankel_sum) * (1.0 + 1e-6) + 1e-9;
    let mut lo = sigma_d * (1.0 + 1e-10) + 1e-14;

    for _ in 0..40 {
        if gamma_exceeds_norm(s, hi)? {
            break;
        }
        hi *= 2.0;
    }
    if !gamma_exceeds_norm(s, hi)? {
        return Err(SysError::Numerics(numerics::NumericsError::NonConvergence(
            "H-infinity upper bound not found".into(),
        )));
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gamma_exceeds_norm(s, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::super::tests::random_state_space;
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn static_gain_norm() {
        let s = StateSpace::static_gain(Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]));
        assert_relative_eq!(hinf_norm(&s, 1e-6).unwrap(), 3.0, epsilon = 1e-9);
    }

    #[test]
    fn first_order_lag_norm_is_one() {
        let s = StateSpace::new(
            Matrix::from_element(1, 1, -1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let norm = hinf_norm(&s, 1e-8).unwrap();
        // dense frequency-sweep oracle
        let sweep = max_sv_on_grid(&s, &frequency_grid(1e-4, 1e4, 2000)).unwrap();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-6);
        assert!(norm >= sweep - 1e-6);
    }

    #[test]
    fn resonant_peak_matches_closed_form() {
        // 1/(s^2 + 2ζs + 1), peak = 1/(2ζ sqrt(1-ζ^2)) at ζ = 0.1
        let zeta: f64 = 0.1;
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -2.0 * zeta]);
        let b = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let c = Matrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let s = StateSpace::new(a, b, c, Matrix::zeros(1, 1)).unwrap();
        let expect = 1.0 / (2.0 * zeta * (1.0 - zeta * zeta).sqrt());
        let norm = hinf_norm(&s, 1e-8).unwrap();
        assert_relative_eq!(norm, expect, max_relative = 1e-6);
        let sweep = max_sv_on_grid(&s, &frequency_grid(1e-2, 1e2, 4000)).unwrap();
        assert_relative_eq!(norm, sweep, max_relative = 1e-4);
    }

    #[test]
    fn unstable_system_rejected() {
        let s = StateSpace::new(
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        assert!(matches!(hinf_norm(&s, 1e-6), Err(SysError::UnstableSystem)));
    }

    #[test]
    fn norm_dominates_every_grid_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..15 {
            let s = random_state_space(&mut rng, 4, 2, 2, true);
            let norm = hinf_norm(&s, 1e-6).unwrap();
            let grid = frequency_grid(1e-3, 1e3, 400);
            let sweep = max_sv_on_grid(&s, &grid).unwrap();
            assert!(
                norm >= sweep * (1.0 - 1e-5),
                "norm {norm} below sweep {sweep}"
            );
            assert!(
                norm <= sweep * 1.2 + 1e-6,
                "norm {norm} far above sweep {sweep} (grid too coarse?)"
            );
        }
    }
}
