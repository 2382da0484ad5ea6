//! Stabilizing solutions of algebraic Riccati equations.
//!
//! Two solvers live here: the zero-constant-term equation
//! AᵀX + XA − XBBᵀX = 0 whose stabilizing root anchors the strong
//! stabilization controller, and the γ-dependent pair of standard
//! H-infinity equations used by the central-controller synthesis.
//! Both go through the ordered real Schur form of a Hamiltonian.

use crate::numerics::{self, real_schur, Matrix, NumericsError, SchurOrdering};
use crate::sysmodel::GeneralizedPlant;
use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance for calling an eigenvalue "on the imaginary axis".
const AXIS_TOL: f64 = 1e-8;
/// Condition-number ceiling for the invariant-subspace basis.
const COND_LIMIT: f64 = 1e8;

#[derive(Debug, Error)]
pub enum RiccatiError {
    #[error("(A, B) is not stabilizable (PBH test failed at {eigenvalue})")]
    NotStabilizable { eigenvalue: Complex64 },
    #[error("A has an eigenvalue on the imaginary axis: {eigenvalue}")]
    ImaginaryAxisEigenvalue { eigenvalue: Complex64 },
    #[error("invariant-subspace basis is ill-conditioned (cond = {cond:.3e}); \
             the Riccati solution is numerically ill-posed here")]
    IllConditionedBasis { cond: f64 },
    #[error("D12 is not full column rank or D21 is not full row rank")]
    NormalizationFailure,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub x: Matrix,
    /// Frobenius norm of AᵀX + XA − XBBᵀX at the returned X.
    pub residual: f64,
    /// Spectral abscissa of A − BBᵀX; negative for a stabilizing solution.
    pub closed_loop_spectral_abscissa: f64,
}

fn on_axis(l: &Complex64) -> bool {
    l.re.abs() <= AXIS_TOL * (1.0 + l.norm())
}

/// Stable invariant subspace of a 2n x 2n Hamiltonian-like matrix,
/// returned as X = U2·U1⁻¹. `Err(None)` flags an imaginary-axis
/// eigenvalue or a stable subspace of the wrong dimension (feasibility
/// failures); `Err(Some(cond))` an ill-conditioned basis.
fn stable_subspace_solution(h: &Matrix) -> Result<Result<Matrix, Option<f64>>, NumericsError> {
    let two_n = h.nrows();
    let n = two_n / 2;
    let dec = real_schur(h, SchurOrdering::StableFirst)?;
    if dec.eigenvalues.iter().any(on_axis) {
        return Ok(Err(None));
    }
    let stable = dec.eigenvalues.iter().filter(|l| l.re < 0.0).count();
    if stable != n {
        return Ok(Err(None));
    }
    let u1 = dec.q.view((0, 0), (n, n)).into_owned();
    let u2 = dec.q.view((n, 0), (n, n)).into_owned();
    let cond = numerics::condition_number(&u1)?;
    if !cond.is_finite() || cond > COND_LIMIT {
        return Ok(Err(Some(cond)));
    }
    // X = U2 U1⁻¹ via transposed solve
    let xt = numerics::solve_lu(&u1.transpose(), &u2.transpose())
        .ok_or(NumericsError::SingularPencil)?;
    Ok(Ok(numerics::symmetrize(&xt.transpose())))
}

/// Stabilizing solution of AᵀX + XA − XBBᵀX = 0.
///
/// X = 0 always solves the equation; the stabilizing root (A − BBᵀX
/// Hurwitz) is extracted from the stable invariant subspace of
/// [[A, −BBᵀ],[0, −Aᵀ]] and polished with one Newton step.
pub fn solve_stabilizing_riccati(a: &Matrix, b: &Matrix) -> Result<RiccatiSolution, RiccatiError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(RiccatiError::DimensionMismatch(format!(
            "A must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if b.nrows() != n {
        return Err(RiccatiError::DimensionMismatch(format!(
            "B has {} rows, expected {}",
            b.nrows(),
            n
        )));
    }
    if n == 0 {
        return Ok(RiccatiSolution {
            x: Matrix::zeros(0, 0),
            residual: 0.0,
            closed_loop_spectral_abscissa: f64::NEG_INFINITY,
        });
    }

    let eig_a = numerics::eigenvalues(a)?;
    if let Some(l) = eig_a.iter().find(|l| on_axis(l)) {
        return Err(RiccatiError::ImaginaryAxisEigenvalue { eigenvalue: *l });
    }
    let scale = a.norm() + b.norm() + 1.0;
    for l in &eig_a {
        if l.re > 0.0 && pbh_sigma_min(a, b, *l) <= 1e-9 * scale {
            return Err(RiccatiError::NotStabilizable { eigenvalue: *l });
        }
    }

    let bbt = b * b.transpose();
    let mut h = Matrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&bbt));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let mut x = match stable_subspace_solution(&h)? {
        Ok(x) => x,
        Err(Some(cond)) => return Err(RiccatiError::IllConditionedBasis { cond }),
        Err(None) => {
            // ruled out above for this block-triangular Hamiltonian
            return Err(RiccatiError::IllConditionedBasis { cond: f64::INFINITY });
        }
    };

    let residual_of = |x: &Matrix| (a.transpose() * x + x * a - x * &bbt * x).norm();
    // one Newton step: A_Xᵀ Δ + Δ A_X = -R(X)
    {
        let a_x = a - &bbt * &x;
        let r = a.transpose() * &x + &x * a - &x * &bbt * &x;
        if let Ok(delta) = numerics::solve_sylvester(&a_x.transpose(), &a_x, &(-r)) {
            let candidate = numerics::symmetrize(&(&x + delta));
            if residual_of(&candidate) < residual_of(&x) {
                x = candidate;
            }
        }
    }

    let a_x = a - &bbt * &x;
    let abscissa = numerics::spectral_abscissa(&a_x)?;
    if abscissa >= 0.0 {
        return Err(RiccatiError::IllConditionedBasis { cond: f64::INFINITY });
    }
    Ok(RiccatiSolution {
        residual: residual_of(&x),
        closed_loop_spectral_abscissa: abscissa,
        x,
    })
}

fn pbh_sigma_min(a: &Matrix, b: &Matrix, lambda: Complex64) -> f64 {
    let n = a.nrows();
    let m = b.ncols();
    let pencil = nalgebra::DMatrix::from_fn(n, n + m, |i, j| {
        if j < n {
            let diag = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
            Complex64::new(a[(i, j)], 0.0) - diag
        } else {
            Complex64::new(b[(i, j - n)], 0.0)
        }
    });
    pencil
        .svd(false, false)
        .singular_values
        .iter()
        .fold(f64::INFINITY, |m, s| m.min(*s))
}

/// Outcome of the γ-dependent H-infinity Riccati pair.
#[derive(Debug, Clone)]
pub enum GammaFeasibility {
    Feasible(HinfPairSolution),
    /// γ is below the solvability level; the reason names the failing test.
    Infeasible { reason: String },
}

#[derive(Debug, Clone)]
pub struct HinfPairSolution {
    pub x_inf: Matrix,
    pub y_inf: Matrix,
    /// ρ(X∞ Y∞); solvability requires this below γ².
    pub spectral_radius_xy: f64,
}

/// Solve the two standard H-infinity Riccati equations at level γ for a
/// plant with normalized D12/D21 and D11 = 0 (see
/// [`crate::hinfsynth`] for the normalization front end).
///
/// Cross terms D12ᵀC1 and B1D21ᵀ are absorbed into the Hamiltonians:
///
///   X: (A−B2D12ᵀC1)ᵀX + X(·) + X(γ⁻²B1B1ᵀ−B2B2ᵀ)X + C1ᵀ(I−D12D12ᵀ)C1 = 0
///   Y: (A−B1D21ᵀC2)Y + Y(·)ᵀ + Y(γ⁻²C1ᵀC1−C2ᵀC2)Y + B1(I−D21ᵀD21)B1ᵀ = 0
pub fn solve_h2_like_pair(
    p: &GeneralizedPlant,
    gamma: f64,
) -> Result<GammaFeasibility, RiccatiError> {
    if gamma <= 0.0 {
        return Ok(GammaFeasibility::Infeasible {
            reason: "gamma must be positive".into(),
        });
    }
    let n = p.order();
    let (a, b1, b2, c1, c2) = (p.a(), p.b1(), p.b2(), p.c1(), p.c2());
    let (d12, d21) = (p.d12(), p.d21());
    let gi2 = 1.0 / (gamma * gamma);

    let eig_a = numerics::eigenvalues(&a)?;
    if let Some(l) = eig_a.iter().find(|l| on_axis(l)) {
        return Err(RiccatiError::ImaginaryAxisEigenvalue { eigenvalue: *l });
    }

    // X Hamiltonian
    let a_bar = &a - &b2 * d12.transpose() * &c1;
    let proj_out = Matrix::identity(p.p1, p.p1) - &d12 * d12.transpose();
    let q_x = c1.transpose() * proj_out * &c1;
    let r_x = &b1 * b1.transpose() * gi2 - &b2 * b2.transpose();
    let mut hx = Matrix::zeros(2 * n, 2 * n);
    hx.view_mut((0, 0), (n, n)).copy_from(&a_bar);
    hx.view_mut((0, n), (n, n)).copy_from(&r_x);
    hx.view_mut((n, 0), (n, n)).copy_from(&(-&q_x));
    hx.view_mut((n, n), (n, n)).copy_from(&(-a_bar.transpose()));
    let x_inf = match stable_subspace_solution(&hx)? {
        Ok(x) => x,
        Err(Some(cond)) => {
            return Ok(GammaFeasibility::Infeasible {
                reason: format!("X-equation basis ill-conditioned (cond {cond:.3e})"),
            })
        }
        Err(None) => {
            return Ok(GammaFeasibility::Infeasible {
                reason: "X-equation Hamiltonian has imaginary-axis eigenvalues".into(),
            })
        }
    };
    if min_sym_eig(&x_inf) < -1e-7 * (1.0 + x_inf.norm()) {
        return Ok(GammaFeasibility::Infeasible {
            reason: "X-equation solution is indefinite".into(),
        });
    }

    // Y Hamiltonian (dual)
    let a_hat = &a - &b1 * d21.transpose() * &c2;
    let proj_in = Matrix::identity(p.m1, p.m1) - d21.transpose() * &d21;
    let q_y = &b1 * proj_in * b1.transpose();
    let r_y = c1.transpose() * &c1 * gi2 - c2.transpose() * &c2;
    let mut hy = Matrix::zeros(2 * n, 2 * n);
    hy.view_mut((0, 0), (n, n)).copy_from(&a_hat.transpose());
    hy.view_mut((0, n), (n, n)).copy_from(&r_y);
    hy.view_mut((n, 0), (n, n)).copy_from(&(-&q_y));
    hy.view_mut((n, n), (n, n)).copy_from(&(-&a_hat));
    let y_inf = match stable_subspace_solution(&hy)? {
        Ok(y) => y,
        Err(Some(cond)) => {
            return Ok(GammaFeasibility::Infeasible {
                reason: format!("Y-equation basis ill-conditioned (cond {cond:.3e})"),
            })
        }
        Err(None) => {
            return Ok(GammaFeasibility::Infeasible {
                reason: "Y-equation Hamiltonian has imaginary-axis eigenvalues".into(),
            })
        }
    };
    if min_sym_eig(&y_inf) < -1e-7 * (1.0 + y_inf.norm()) {
        return Ok(GammaFeasibility::Infeasible {
            reason: "Y-equation solution is indefinite".into(),
        });
    }

    let rho = numerics::spectral_radius(&(&x_inf * &y_inf))?;
    if rho >= gamma * gamma {
        return Ok(GammaFeasibility::Infeasible {
            reason: format!("spectral radius ρ(XY) = {rho:.6e} ≥ γ² = {:.6e}", gamma * gamma),
        });
    }
    Ok(GammaFeasibility::Feasible(HinfPairSolution {
        x_inf,
        y_inf,
        spectral_radius_xy: rho,
    }))
}

fn min_sym_eig(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, b| a.min(*b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hurwitz_a_gives_zero_solution() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 0.3, 0.0, -2.0]);
        let b = Matrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let sol = solve_stabilizing_riccati(&a, &b).unwrap();
        assert!(sol.x.norm() < 1e-10, "X should vanish for stable A");
        assert!(sol.closed_loop_spectral_abscissa < 0.0);
    }

    #[test]
    fn scalar_unstable_closed_form() {
        // A = 1, B = 1: 2X - X² = 0, stabilizing root X = 2, A_X = -1
        let a = Matrix::from_element(1, 1, 1.0);
        let b = Matrix::from_element(1, 1, 1.0);
        let sol = solve_stabilizing_riccati(&a, &b).unwrap();
        assert_relative_eq!(sol.x[(0, 0)], 2.0, epsilon = 1e-10);
        assert_relative_eq!(sol.closed_loop_spectral_abscissa, -1.0, epsilon = 1e-9);
        assert!(sol.residual < 1e-9);
    }

    #[test]
    fn decoupled_diagonal_closed_form() {
        // A = diag(1, 2), B = I: X = diag(2, 4)
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let b = Matrix::identity(2, 2);
        let sol = solve_stabilizing_riccati(&a, &b).unwrap();
        assert_relative_eq!(sol.x[(0, 0)], 2.0, epsilon = 1e-9);
        assert_relative_eq!(sol.x[(1, 1)], 4.0, epsilon = 1e-9);
        assert!(sol.x[(0, 1)].abs() < 1e-9);
    }

    #[test]
    fn random_solutions_are_psd_symmetric_with_small_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..15 {
            let n = rng.random_range(2..=5);
            let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let b = Matrix::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
            match solve_stabilizing_riccati(&a, &b) {
                Ok(sol) => {
                    assert!((&sol.x - sol.x.transpose()).norm() < 1e-10 * (1.0 + sol.x.norm()));
                    assert!(sol.residual <= 1e-9 * (1.0 + sol.x.norm() * sol.x.norm()));
                    assert!(sol.closed_loop_spectral_abscissa < 0.0);
                    assert!(min_sym_eig(&sol.x) >= -1e-9 * (1.0 + sol.x.norm()));
                }
                Err(RiccatiError::NotStabilizable { .. })
                | Err(RiccatiError::ImaginaryAxisEigenvalue { .. }) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn uniqueness_under_state_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let n = 4;
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let b = Matrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
        let Ok(sol) = solve_stabilizing_riccati(&a, &b) else {
            return;
        };
        // permute states, solve, map back
        let mut perm = Matrix::zeros(n, n);
        let order = [2usize, 0, 3, 1];
        for (i, j) in order.iter().enumerate() {
            perm[(i, *j)] = 1.0;
        }
        let ap = &perm * &a * perm.transpose();
        let bp = &perm * &b;
        let solp = solve_stabilizing_riccati(&ap, &bp).unwrap();
        let back = perm.transpose() * &solp.x * &perm;
        assert!(
            (back - &sol.x).norm() <= 1e-8 * (1.0 + sol.x.norm()),
            "solution is not unique under permutation"
        );
    }

    #[test]
    fn axis_eigenvalue_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let b = Matrix::identity(2, 2);
        assert!(matches!(
            solve_stabilizing_riccati(&a, &b),
            Err(RiccatiError::ImaginaryAxisEigenvalue { .. })
        ));
    }

    #[test]
    fn unstabilizable_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let b = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!(matches!(
            solve_stabilizing_riccati(&a, &b),
            Err(RiccatiError::NotStabilizable { .. })
        ));
    }
}
