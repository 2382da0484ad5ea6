//! Strong stabilization of (A, B, C) plants.
//!
//! With X the stabilizing solution of AᵀX + XA − XBBᵀX = 0 and
//! A_X := A − BBᵀX, a stable stabilizing controller exists whenever the
//! injection-Lyapunov LMI
//!
//!   Γ(X_K, A) + Γ(Z, C) ≺ 0
//!
//! and the bounded-real LMI
//!
//!   [[Γ(X_K, A_X) + Γ(Z, C), −Z, −X·B],
//!    [−Zᵀ, −γ_K·I, 0],
//!    [−Bᵀ·X, 0, −γ_K·I]] ≺ 0
//!
//! admit X_K ≻ 0 and Z. The controller
//!
//!   K = [A_X + X_K⁻¹ZC | −X_K⁻¹Z; −BᵀX | 0]
//!
//! is then itself stable with ‖K‖∞ < γ_K, and the closed-loop spectrum
//! splits into eig(A_X) ⊎ eig(A_Z), A_Z := A + X_K⁻¹ZC. Dropping the
//! norm bound keeps only the two Lyapunov-type conditions. Freezing
//! Z = −γ_K·Cᵀ recovers the more conservative earlier
//! Riccati-structured design, kept here as a comparison baseline.

use crate::lmi::{
    self, jacobi, AffineLmi, FeasibilityOutcome, LmiError, LmiSolution, MatrixVariable,
};
use crate::numerics::{self, Matrix};
use crate::riccati::{self, RiccatiError};
use crate::sysmodel::{hinf_norm, lft_lower, GeneralizedPlant, StateSpace, SysError};
use thiserror::Error;

/// Plant triple (A, B, C) with strictly proper measurement.
#[derive(Debug, Clone)]
pub struct Plant {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl Plant {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self, StrongStabError> {
        let n = a.nrows();
        if a.ncols() != n || n == 0 {
            return Err(StrongStabError::InvalidArguments(
                "A must be square and nonempty".into(),
            ));
        }
        if b.nrows() != n || c.ncols() != n {
            return Err(StrongStabError::InvalidArguments(
                "B rows and C cols must match the state dimension".into(),
            ));
        }
        Ok(Self { a, b, c })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Wrap as a generalized plant with empty performance channels; the
    /// LFT against a controller then yields the closed-loop dynamics.
    pub fn as_generalized(&self) -> GeneralizedPlant {
        let n = self.order();
        let (m, p) = (self.b.ncols(), self.c.nrows());
        GeneralizedPlant::from_blocks(
            self.a.clone(),
            Matrix::zeros(n, 0),
            self.b.clone(),
            Matrix::zeros(0, n),
            self.c.clone(),
            Matrix::zeros(0, 0),
            Matrix::zeros(0, m),
            Matrix::zeros(p, 0),
        )
        .expect("shapes are consistent by construction")
    }
}

#[derive(Debug, Error)]
pub enum StrongStabError {
    #[error("LMI condition infeasible{}: best margin {best_margin:.3e}. \
             The condition is sufficient only; the plant may still be strongly stabilizable.",
            gamma_k.map(|g| format!(" at gamma_k = {g}")).unwrap_or_else(|| " over the whole bracket".into()))]
    Infeasible {
        gamma_k: Option<f64>,
        best_margin: f64,
    },
    #[error("Riccati solve failed: {0}")]
    RiccatiFailure(#[from] RiccatiError),
    #[error(transparent)]
    Lmi(LmiError),
    #[error(transparent)]
    Sys(#[from] SysError),
    #[error("certificate recomputation failed: {0}")]
    CertificateFailure(String),
    #[error("controller state matrix is not Hurwitz; cannot form the parameterization")]
    NormComputationFailure,
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
}

impl From<LmiError> for StrongStabError {
    fn from(e: LmiError) -> Self {
        match e {
            LmiError::BracketInfeasible { margin, .. } => StrongStabError::Infeasible {
                gamma_k: None,
                best_margin: margin,
            },
            other => StrongStabError::Lmi(other),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StrongStabOptions {
    pub eps_strict: f64,
    pub bracket: (f64, f64),
    pub bisect_rel_tol: f64,
    pub hinf_rel_tol: f64,
}

impl Default for StrongStabOptions {
    fn default() -> Self {
        Self {
            eps_strict: 1e-6,
            bracket: (1e-3, 1e6),
            bisect_rel_tol: 1e-3,
            hinf_rel_tol: 1e-6,
        }
    }
}

/// Independently recomputed stability/norm certificates.
#[derive(Debug, Clone)]
pub struct StrongStabCertificates {
    pub a_x_abscissa: f64,
    pub a_z_abscissa: f64,
    /// Present only when the norm-bounded LMI (4) was in the constraint set.
    pub controller_hinf_norm: Option<f64>,
    pub closed_loop_abscissa: f64,
}

#[derive(Debug, Clone)]
pub struct StrongStabResult {
    /// Stabilizing Riccati solution.
    pub x: Matrix,
    pub x_k: Matrix,
    pub z: Matrix,
    pub gamma_k: f64,
    pub controller: StateSpace,
    pub certificates: StrongStabCertificates,
    /// Margin of the verified LMI solution (most positive eigenvalue).
    pub lmi_margin: f64,
}

/// All-controllers seed of the parameterization: a two-port system K⁰
/// whose lower LFT with any stable Q, ‖Q‖∞ < γ_Q, is strongly
/// stabilizing; Q = 0 recovers the central controller.
#[derive(Debug, Clone)]
pub struct ParameterizationSeed {
    pub k0: GeneralizedPlant,
    pub gamma_q: f64,
}

/// Assemble the synthesis LMIs for fixed γ_K.
///
/// Note the asymmetry: the injection-Lyapunov condition uses A while
/// the (1,1) block of the bounded-real condition uses A_X.
pub fn build_synthesis_lmis(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    x: &Matrix,
    gamma_k: f64,
) -> (Vec<MatrixVariable>, Vec<AffineLmi>) {
    let n = a.nrows();
    let p2 = c.nrows();
    let vars = vec![
        MatrixVariable::symmetric("X_K", n, true),
        MatrixVariable::rectangular("Z", n, p2),
    ];
    let mut constraints = vec![lmi_injection_lyapunov(a, c)];
    constraints.push(lmi_bounded_real(a, b, c, x, gamma_k, false));
    (vars, constraints)
}

fn lmi_injection_lyapunov(a: &Matrix, c: &Matrix) -> AffineLmi {
    let n = a.nrows();
    AffineLmi::new("injection_lyapunov", Matrix::zeros(n, n))
        .with_term("X_K", Matrix::identity(n, n), a.clone())
        .with_term("Z", Matrix::identity(n, n), c.clone())
}

/// (1,1) block of the bounded-real LMI on its own: it makes the
/// controller state matrix A_X + X_K⁻¹ZC stable.
fn lmi_controller_lyapunov(a_x: &Matrix, c: &Matrix) -> AffineLmi {
    let n = a_x.nrows();
    AffineLmi::new("controller_lyapunov", Matrix::zeros(n, n))
        .with_term("X_K", Matrix::identity(n, n), a_x.clone())
        .with_term("Z", Matrix::identity(n, n), c.clone())
}

/// The 3x3 bounded-real block LMI. With `frozen_z` the Z blocks move
/// into the constant using Z = -γ_K·Cᵀ (the structured baseline).
fn lmi_bounded_real(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    x: &Matrix,
    gamma_k: f64,
    frozen_z: bool,
) -> AffineLmi {
    let n = a.nrows();
    let p2 = c.nrows();
    let m2 = b.ncols();
    let size = n + p2 + m2;
    let a_x = a - b * b.transpose() * x;

    // selectors embedding the three block rows
    let e1 = {
        let mut e = Matrix::zeros(size, n);
        e.view_mut((0, 0), (n, n)).copy_from(&Matrix::identity(n, n));
        e
    };
    let e2 = {
        let mut e = Matrix::zeros(size, p2);
        e.view_mut((n, 0), (p2, p2)).copy_from(&Matrix::identity(p2, p2));
        e
    };
    let e3 = {
        let mut e = Matrix::zeros(size, m2);
        e.view_mut((n + p2, 0), (m2, m2)).copy_from(&Matrix::identity(m2, m2));
        e
    };

    let mut constant = Matrix::zeros(size, size);
    // (1,3)/(3,1): -X·B
    let m13 = &e1 * (-(x * b)) * e3.transpose();
    constant += &m13 + m13.transpose();
    // diagonal -γ_K blocks
    constant
        .view_mut((n, n), (p2, p2))
        .copy_from(&(Matrix::identity(p2, p2) * -gamma_k));
    constant
        .view_mut((n + p2, n + p2), (m2, m2))
        .copy_from(&(Matrix::identity(m2, m2) * -gamma_k));

    if frozen_z {
        let z = c.transpose() * -gamma_k;
        // Γ(Z, C) in the (1,1) block
        let m11 = &e1 * (&z * c) * e1.transpose();
        constant += &m11 + m11.transpose();
        // -Z in the (1,2) block
        let m12 = &e1 * (-&z) * e2.transpose();
        constant += &m12 + m12.transpose();
        AffineLmi::new("bounded_real_structured", constant).with_term(
            "X_K",
            e1.clone(),
            a_x * e1.transpose(),
        )
    } else {
        AffineLmi::new("bounded_real", constant)
            .with_term("X_K", e1.clone(), &a_x * e1.transpose())
            .with_term("Z", e1.clone(), c * e1.transpose())
            .with_term("Z", -&e1, e2.transpose())
    }
}

/// Constraints for the structured baseline at fixed γ_K (Z = -γ_K·Cᵀ).
fn structured_constraints(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    x: &Matrix,
    gamma_k: f64,
) -> Vec<AffineLmi> {
    let n = a.nrows();
    let z = c.transpose() * -gamma_k;
    let gzc = lmi::gamma_shorthand(&z, c).expect("shapes fixed");
    let eq3 = AffineLmi::new("injection_lyapunov_structured", gzc).with_term(
        "X_K",
        Matrix::identity(n, n),
        a.clone(),
    );
    vec![eq3, lmi_bounded_real(a, b, c, x, gamma_k, true)]
}

/// X_K⁻¹·Z through the Cholesky factorization; failure means the solver
/// margin on X_K ≻ 0 eroded and the result cannot be trusted.
fn xk_inverse_times(x_k: &Matrix, z: &Matrix) -> Result<Matrix, StrongStabError> {
    let chol = nalgebra::linalg::Cholesky::new(x_k.clone()).ok_or_else(|| {
        StrongStabError::CertificateFailure("X_K is not numerically positive definite".into())
    })?;
    Ok(chol.solve(z))
}

fn assemble_controller(
    plant: &Plant,
    x: &Matrix,
    x_k: &Matrix,
    z: &Matrix,
) -> Result<StateSpace, StrongStabError> {
    let a_x = &plant.a - &plant.b * plant.b.transpose() * x;
    let xkinv_z = xk_inverse_times(x_k, z)?;
    let a_k = &a_x + &xkinv_z * &plant.c;
    let b_k = -xkinv_z;
    let c_k = -(plant.b.transpose() * x);
    let d_k = Matrix::zeros(plant.b.ncols(), plant.c.nrows());
    Ok(StateSpace::new(a_k, b_k, c_k, d_k)?)
}

fn finish(
    plant: &Plant,
    riccati_x: Matrix,
    solution: &LmiSolution,
    gamma_k: f64,
    norm_bounded: bool,
    opts: &StrongStabOptions,
) -> Result<StrongStabResult, StrongStabError> {
    let x_k = solution.assignments["X_K"].clone();
    let z = solution.assignments["Z"].clone();
    let controller = assemble_controller(plant, &riccati_x, &x_k, &z)?;

    let a_x = &plant.a - &plant.b * plant.b.transpose() * &riccati_x;
    let xkinv_z = xk_inverse_times(&x_k, &z)?;
    let a_z = &plant.a + &xkinv_z * &plant.c;

    let a_x_abscissa = numerics::spectral_abscissa(&a_x).map_err(SysError::from)?;
    let a_z_abscissa = numerics::spectral_abscissa(&a_z).map_err(SysError::from)?;

    let n = plant.order();
    let mut a_cl = Matrix::zeros(2 * n, 2 * n);
    a_cl.view_mut((0, 0), (n, n)).copy_from(&plant.a);
    a_cl.view_mut((0, n), (n, n)).copy_from(&(&plant.b * &controller.c));
    a_cl.view_mut((n, 0), (n, n)).copy_from(&(&controller.b * &plant.c));
    a_cl.view_mut((n, n), (n, n)).copy_from(&controller.a);
    let closed_loop_abscissa = numerics::spectral_abscissa(&a_cl).map_err(SysError::from)?;

    let controller_abscissa = controller.spectral_abscissa()?;
    if a_x_abscissa >= 0.0 || a_z_abscissa >= 0.0 {
        return Err(StrongStabError::CertificateFailure(format!(
            "A_X abscissa {a_x_abscissa:.3e}, A_Z abscissa {a_z_abscissa:.3e}"
        )));
    }
    if closed_loop_abscissa >= 0.0 {
        return Err(StrongStabError::CertificateFailure(format!(
            "closed loop abscissa {closed_loop_abscissa:.3e}"
        )));
    }
    if controller_abscissa >= 0.0 {
        return Err(StrongStabError::CertificateFailure(format!(
            "controller abscissa {controller_abscissa:.3e}"
        )));
    }

    let controller_hinf_norm = if norm_bounded {
        let norm = hinf_norm(&controller, opts.hinf_rel_tol)?;
        if norm >= gamma_k {
            return Err(StrongStabError::CertificateFailure(format!(
                "controller norm {norm:.6e} is not below gamma_k {gamma_k:.6e}"
            )));
        }
        Some(norm)
    } else {
        None
    };

    Ok(StrongStabResult {
        x: riccati_x,
        x_k,
        z,
        gamma_k,
        controller,
        certificates: StrongStabCertificates {
            a_x_abscissa,
            a_z_abscissa,
            controller_hinf_norm,
            closed_loop_abscissa,
        },
        lmi_margin: solution.margin,
    })
}

/// Diagonal balancing of the plant triple; solving the LMIs in balanced
/// coordinates and congruence-mapping (X, X_K, Z) back leaves the
/// feasible set untouched while taming the conditioning of plants whose
/// states span several decades.
fn balanced(plant: &Plant) -> (Vec<f64>, Plant) {
    let (d, a, b, c) = numerics::balance_realization(&plant.a, &plant.b, &plant.c);
    (d, Plant { a, b, c })
}

/// Map a balanced-coordinates quantity M back as D⁻¹·M·D⁻¹ (two_sided)
/// or D⁻¹·M (left only).
fn unbalance(d: &[f64], m: &Matrix, two_sided: bool) -> Matrix {
    let mut out = m.clone();
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            out[(i, j)] /= d[i];
            if two_sided {
                out[(i, j)] /= d[j];
            }
        }
    }
    out
}

fn unbalance_solution(d: &[f64], sol: &LmiSolution) -> LmiSolution {
    let mut mapped = sol.clone();
    if let Some(xk) = sol.assignments.get("X_K") {
        mapped
            .assignments
            .insert("X_K".into(), unbalance(d, xk, true));
    }
    if let Some(z) = sol.assignments.get("Z") {
        mapped.assignments.insert("Z".into(), unbalance(d, z, false));
    }
    mapped
}

/// Norm-bounded synthesis: stable controller with ‖K‖∞ < γ_K.
///
/// With `minimize` the smallest feasible γ_K in the bracket is located
/// by bisection; otherwise `gamma_k` must be given and is used as-is.
pub fn strong_stabilize(
    plant: &Plant,
    gamma_k: Option<f64>,
    minimize: bool,
    opts: &StrongStabOptions,
) -> Result<StrongStabResult, StrongStabError> {
    let (d, bal) = balanced(plant);
    let ric = riccati::solve_stabilizing_riccati(&bal.a, &bal.b)?;
    let vars = vec![
        MatrixVariable::symmetric("X_K", bal.order(), true),
        MatrixVariable::rectangular("Z", bal.order(), bal.c.nrows()),
    ];
    let x_orig = unbalance(&d, &ric.x, true);
    if minimize {
        let hi = gamma_k.unwrap_or(opts.bracket.1);
        let build = |g: f64| {
            let (_, cons) = build_synthesis_lmis(&bal.a, &bal.b, &bal.c, &ric.x, g);
            cons
        };
        let min = lmi::minimize_scalar(
            &vars,
            build,
            (opts.bracket.0, hi),
            opts.bisect_rel_tol,
            opts.eps_strict,
        )?;
        let sol = unbalance_solution(&d, &min.witness);
        finish(plant, x_orig, &sol, min.gamma, true, opts)
    } else {
        let g = gamma_k.ok_or_else(|| {
            StrongStabError::InvalidArguments("gamma_k required when minimize is off".into())
        })?;
        let (_, cons) = build_synthesis_lmis(&bal.a, &bal.b, &bal.c, &ric.x, g);
        match lmi::solve_feasibility(&vars, &cons, opts.eps_strict)? {
            FeasibilityOutcome::Feasible(sol) => {
                let sol = unbalance_solution(&d, &sol);
                finish(plant, x_orig, &sol, g, true, opts)
            }
            FeasibilityOutcome::Infeasible { best_margin, .. } => {
                Err(StrongStabError::Infeasible {
                    gamma_k: Some(g),
                    best_margin,
                })
            }
        }
    }
}

/// Stability-only synthesis: no norm bound. Solves the two
/// Lyapunov-type conditions (the bounded-real blocks are dropped).
pub fn strong_stabilize_stability_only(
    plant: &Plant,
    opts: &StrongStabOptions,
) -> Result<StrongStabResult, StrongStabError> {
    let (d, bal) = balanced(plant);
    let ric = riccati::solve_stabilizing_riccati(&bal.a, &bal.b)?;
    let a_x = &bal.a - &bal.b * bal.b.transpose() * &ric.x;
    let vars = vec![
        MatrixVariable::symmetric("X_K", bal.order(), true),
        MatrixVariable::rectangular("Z", bal.order(), bal.c.nrows()),
    ];
    let cons = vec![lmi_injection_lyapunov(&bal.a, &bal.c), lmi_controller_lyapunov(&a_x, &bal.c)];
    match lmi::solve_feasibility(&vars, &cons, opts.eps_strict)? {
        FeasibilityOutcome::Feasible(sol) => {
            let sol = unbalance_solution(&d, &sol);
            finish(plant, unbalance(&d, &ric.x, true), &sol, f64::INFINITY, false, opts)
        }
        FeasibilityOutcome::Infeasible { best_margin, .. } => Err(StrongStabError::Infeasible {
            gamma_k: None,
            best_margin,
        }),
    }
}

/// Structured baseline: the same LMIs with Z frozen to -γ_K·Cᵀ,
/// matching the earlier Riccati-structured design this method
/// generalizes. Its minimal feasible γ_K is never below the
/// unstructured one.
pub fn structured_baseline(
    plant: &Plant,
    gamma_k: Option<f64>,
    minimize: bool,
    opts: &StrongStabOptions,
) -> Result<StrongStabResult, StrongStabError> {
    let (d, bal) = balanced(plant);
    let ric = riccati::solve_stabilizing_riccati(&bal.a, &bal.b)?;
    let vars = vec![MatrixVariable::symmetric("X_K", bal.order(), true)];
    // Z frozen in balanced coordinates maps back to exactly -γ_K·Cᵀ in
    // the original ones (C_b = C·D, D⁻¹·C_bᵀ = Cᵀ)
    let with_frozen_z = |sol: &LmiSolution, g: f64| -> LmiSolution {
        let mut s = unbalance_solution(&d, sol);
        s.assignments
            .insert("Z".into(), plant.c.transpose() * -g);
        s
    };
    if minimize {
        let hi = gamma_k.unwrap_or(opts.bracket.1);
        let build = |g: f64| structured_constraints(&bal.a, &bal.b, &bal.c, &ric.x, g);
        let min = lmi::minimize_scalar(
            &vars,
            build,
            (opts.bracket.0, hi),
            opts.bisect_rel_tol,
            opts.eps_strict,
        )?;
        let sol = with_frozen_z(&min.witness, min.gamma);
        finish(plant, unbalance(&d, &ric.x, true), &sol, min.gamma, true, opts)
    } else {
        let g = gamma_k.ok_or_else(|| {
            StrongStabError::InvalidArguments("gamma_k required when minimize is off".into())
        })?;
        let cons = structured_constraints(&bal.a, &bal.b, &bal.c, &ric.x, g);
        match lmi::solve_feasibility(&vars, &cons, opts.eps_strict)? {
            FeasibilityOutcome::Feasible(sol) => {
                let sol = with_frozen_z(&sol, g);
                finish(plant, unbalance(&d, &ric.x, true), &sol, g, true, opts)
            }
            FeasibilityOutcome::Infeasible { best_margin, .. } => {
                Err(StrongStabError::Infeasible {
                    gamma_k: Some(g),
                    best_margin,
                })
            }
        }
    }
}

/// All-controllers parameterization seed
///
///   K⁰ = [A_X + X_K⁻¹ZC | -X_K⁻¹Z, B; -BᵀX | 0, I; -C | I, 0]
///
/// with γ_Q the reciprocal of ‖C(sI - (A_X + X_K⁻¹ZC))⁻¹B‖∞; the lower
/// LFT of K⁰ with any stable Q, ‖Q‖∞ < γ_Q, is strongly stabilizing.
pub fn parameterize(
    result: &StrongStabResult,
    plant: &Plant,
) -> Result<ParameterizationSeed, StrongStabError> {
    let a_k0 = result.controller.a.clone();
    if numerics::spectral_abscissa(&a_k0).map_err(SysError::from)? >= 0.0 {
        return Err(StrongStabError::NormComputationFailure);
    }
    let (m2, p2) = (plant.b.ncols(), plant.c.nrows());
    let inner = StateSpace::new(
        a_k0.clone(),
        plant.b.clone(),
        plant.c.clone(),
        Matrix::zeros(p2, m2),
    )?;
    let norm = hinf_norm(&inner, 1e-8)?;
    let gamma_q = if norm == 0.0 { f64::INFINITY } else { 1.0 / norm };

    let b_k = result.controller.b.clone(); // -X_K⁻¹Z
    let c_k = result.controller.c.clone(); // -BᵀX
    let n = plant.order();
    let mut b0 = Matrix::zeros(n, p2 + m2);
    b0.view_mut((0, 0), (n, p2)).copy_from(&b_k);
    b0.view_mut((0, p2), (n, m2)).copy_from(&plant.b);
    let mut c0 = Matrix::zeros(m2 + p2, n);
    c0.view_mut((0, 0), (m2, n)).copy_from(&c_k);
    c0.view_mut((m2, 0), (p2, n)).copy_from(&(-&plant.c));
    let mut d0 = Matrix::zeros(m2 + p2, p2 + m2);
    d0.view_mut((0, p2), (m2, m2)).copy_from(&Matrix::identity(m2, m2));
    d0.view_mut((m2, 0), (p2, p2)).copy_from(&Matrix::identity(p2, p2));
    let ss = StateSpace::new(a_k0, b0, c0, d0)?;
    let k0 = GeneralizedPlant::new(ss, p2, m2, m2, p2)?;
    Ok(ParameterizationSeed { k0, gamma_q })
}

/// Controller obtained from the seed by closing its Q-channel.
pub fn controller_from_seed(
    seed: &ParameterizationSeed,
    q: &StateSpace,
) -> Result<StateSpace, StrongStabError> {
    Ok(lft_lower(&seed.k0, q)?)
}

/// Worst LMI margin of a result re-verified against freshly rebuilt
/// constraints (an independent check path used by reports and tests).
pub fn reverify_lmis(plant: &Plant, result: &StrongStabResult) -> Result<f64, StrongStabError> {
    let (_, cons) = build_synthesis_lmis(
        &plant.a,
        &plant.b,
        &plant.c,
        &result.x,
        result.gamma_k.min(1e30),
    );
    let mut assignments = std::collections::BTreeMap::new();
    assignments.insert("X_K".to_string(), result.x_k.clone());
    assignments.insert("Z".to_string(), result.z.clone());
    let mut worst = f64::NEG_INFINITY;
    for lmi in &cons {
        let val = lmi.assemble(&assignments).map_err(StrongStabError::Lmi)?;
        worst = worst.max(jacobi::max_eigenvalue(&val));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn scalar_plant() -> Plant {
        Plant::new(
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn synthesis_lmis_hand_substitution() {
        // A=1, B=1, C=1, X=2, A_X=-1, γ_K=3
        let one = Matrix::from_element(1, 1, 1.0);
        let x = Matrix::from_element(1, 1, 2.0);
        let (_, cons) = build_synthesis_lmis(&one, &one, &one, &x, 3.0);
        let mut assign = BTreeMap::new();
        assign.insert("X_K".to_string(), Matrix::from_element(1, 1, 0.7));
        assign.insert("Z".to_string(), Matrix::from_element(1, 1, -0.4));
        // injection Lyapunov: 2 x_K + 2 z
        let inj = cons[0].assemble(&assign).unwrap();
        assert_relative_eq!(inj[(0, 0)], 2.0 * 0.7 + 2.0 * (-0.4), epsilon = 1e-14);
        // bounded real: [[-2x_K + 2z, -z, -2],[-z, -3, 0],[-2, 0, -3]]
        let brl = cons[1].assemble(&assign).unwrap();
        assert_relative_eq!(brl[(0, 0)], -2.0 * 0.7 + 2.0 * (-0.4), epsilon = 1e-14);
        assert_relative_eq!(brl[(0, 1)], 0.4, epsilon = 1e-14);
        assert_relative_eq!(brl[(0, 2)], -2.0, epsilon = 1e-14);
        assert_relative_eq!(brl[(1, 1)], -3.0, epsilon = 1e-14);
        assert_relative_eq!(brl[(2, 2)], -3.0, epsilon = 1e-14);
        assert_relative_eq!(brl[(1, 2)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn bounded_real_with_zero_x_has_zero_coupling_block() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 0.2, 0.0, -2.0]);
        let b = Matrix::from_row_slice(2, 1, &[1.0, 0.5]);
        let c = Matrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let x = Matrix::zeros(2, 2);
        let (_, cons) = build_synthesis_lmis(&a, &b, &c, &x, 2.0);
        let mut assign = BTreeMap::new();
        assign.insert("X_K".to_string(), Matrix::identity(2, 2));
        assign.insert("Z".to_string(), Matrix::zeros(2, 1));
        let brl = cons[1].assemble(&assign).unwrap();
        // (1,3) block rows 0..2, col 3 must vanish when X = 0
        assert_eq!(brl[(0, 3)], 0.0);
        assert_eq!(brl[(1, 3)], 0.0);
    }

    #[test]
    fn stable_plant_zero_controller() {
        let plant = Plant::new(
            Matrix::from_row_slice(2, 2, &[-1.0, 0.3, 0.0, -2.0]),
            Matrix::from_row_slice(2, 1, &[1.0, 1.0]),
            Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
        )
        .unwrap();
        let res = strong_stabilize(&plant, None, true, &StrongStabOptions::default()).unwrap();
        // X = 0 forces C_K = 0: the controller transfer function vanishes
        assert!(res.controller.c.norm() < 1e-9);
        assert!(res.certificates.controller_hinf_norm.unwrap() < 1e-9);
        assert!(res.certificates.closed_loop_abscissa < 0.0);
    }

    #[test]
    fn scalar_unstable_plant_matches_grid_oracle() {
        let plant = scalar_plant();
        let opts = StrongStabOptions::default();
        let res = strong_stabilize(&plant, None, true, &opts).unwrap();
        assert!(res.certificates.a_x_abscissa < 0.0);
        assert!(res.certificates.a_z_abscissa < 0.0);
        assert!(res.certificates.controller_hinf_norm.unwrap() < res.gamma_k);

        // 2-D grid oracle over (x_K, z) for each γ on a fine grid:
        // feasible iff 2x_K + 2z < 0 and the 3x3 block matrix is ≺ 0,
        // which reduces to -2x_K + 2z + (z² + 4)/γ < 0.
        let feasible_at = |gamma: f64| -> bool {
            let xs: Vec<f64> = (1..=400).map(|i| 0.01 * i as f64).collect();
            let zs: Vec<f64> = (-400..0).map(|i| 0.01 * i as f64).collect();
            xs.iter().any(|xk| {
                zs.iter().any(|z| {
                    2.0 * xk + 2.0 * z < 0.0
                        && -2.0 * xk + 2.0 * z + (z * z + 4.0) / gamma < 0.0
                })
            })
        };
        let mut grid_min = f64::INFINITY;
        let mut g = 0.5;
        while g < 5.0 {
            if feasible_at(g) {
                grid_min = g;
                break;
            }
            g += 0.01;
        }
        assert!(
            (res.gamma_k - grid_min).abs() < 1e-2 + 0.02,
            "bisection {} vs grid oracle {}",
            res.gamma_k,
            grid_min
        );
        // closed form of the oracle: with x_K → -z the reduced condition
        // is 4z + (z²+4)/γ < 0, minimized at z = -2γ, giving γ* = 1
        assert!((grid_min - 1.0).abs() < 0.02, "grid minimum {grid_min}");
    }

    #[test]
    fn stability_only_witness_exists_and_norm_is_omitted() {
        let plant = scalar_plant();
        let res = strong_stabilize_stability_only(&plant, &StrongStabOptions::default()).unwrap();
        assert!(res.certificates.controller_hinf_norm.is_none());
        assert!(res.certificates.a_z_abscissa < 0.0);
        assert!(res.controller.spectral_abscissa().unwrap() < 0.0);
    }

    #[test]
    fn unobservable_unstable_plant_infeasible() {
        // C = 0 with unstable A: (3) collapses to a Lyapunov LMI on A
        let plant = Plant::new(
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        assert!(matches!(
            strong_stabilize_stability_only(&plant, &StrongStabOptions::default()),
            Err(StrongStabError::Infeasible { .. })
        ));
    }

    #[test]
    fn structured_baseline_never_beats_lmi() {
        let plant = scalar_plant();
        let opts = StrongStabOptions::default();
        let lmi_res = strong_stabilize(&plant, None, true, &opts).unwrap();
        let str_res = structured_baseline(&plant, None, true, &opts).unwrap();
        assert!(
            str_res.gamma_k >= lmi_res.gamma_k * (1.0 - 2.0 * opts.bisect_rel_tol),
            "structured {} must dominate unstructured {}",
            str_res.gamma_k,
            lmi_res.gamma_k
        );
        // structured result carries the frozen Z
        let expect_z = plant.c.transpose() * -str_res.gamma_k;
        assert!((&str_res.z - expect_z).norm() < 1e-12);
    }

    #[test]
    fn closed_loop_spectrum_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let mut checked = 0;
        for _ in 0..30 {
            let n = rng.random_range(2..=4);
            let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let b = Matrix::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
            let c = Matrix::from_fn(1, n, |_, _| rng.random_range(-1.0..1.0));
            let Ok(plant) = Plant::new(a, b, c) else { continue };
            let Ok(res) = strong_stabilize(&plant, None, true, &StrongStabOptions::default())
            else {
                continue;
            };
            let a_x = &plant.a - &plant.b * plant.b.transpose() * &res.x;
            let xkinv_z = xk_inverse_times(&res.x_k, &res.z).unwrap();
            let a_z = &plant.a + xkinv_z * &plant.c;
            let mut expect = numerics::eigenvalues(&a_x).unwrap();
            expect.extend(numerics::eigenvalues(&a_z).unwrap());
            let mut a_cl = Matrix::zeros(2 * n, 2 * n);
            a_cl.view_mut((0, 0), (n, n)).copy_from(&plant.a);
            a_cl.view_mut((0, n), (n, n))
                .copy_from(&(&plant.b * &res.controller.c));
            a_cl.view_mut((n, 0), (n, n))
                .copy_from(&(&res.controller.b * &plant.c));
            a_cl.view_mut((n, n), (n, n)).copy_from(&res.controller.a);
            let got = numerics::eigenvalues(&a_cl).unwrap();
            // backward-stable eigensolvers resolve eigenvalues to about
            // eps·‖A‖·cond(λ); scale the tolerance by the matrix norm
            let tol = 1e-6 * (1.0 + a_cl.norm());
            crate::numerics::tests::assert_spectra_match(&got, &expect, tol);
            checked += 1;
        }
        assert!(checked >= 5, "too few feasible random plants ({checked})");
    }

    #[test]
    fn parameterization_central_element_and_ball() {
        let plant = scalar_plant();
        let opts = StrongStabOptions::default();
        let res = strong_stabilize_stability_only(&plant, &opts).unwrap();
        let seed = parameterize(&res, &plant).unwrap();
        assert!(seed.gamma_q.is_finite() && seed.gamma_q > 0.0);

        // Q = 0 recovers the central controller
        let q0 = StateSpace::zero(1, 1);
        let central = controller_from_seed(&seed, &q0).unwrap();
        for w in [0.1, 1.0, 10.0] {
            let s = num_complex::Complex64::new(0.0, w);
            let a = central.transfer_at(s).unwrap()[(0, 0)];
            let b = res.controller.transfer_at(s).unwrap()[(0, 0)];
            assert!((a - b).norm() < 1e-10, "central element mismatch at w={w}");
        }

        // random stable Q inside the ball keep the loop stable
        let gp = plant.as_generalized();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let mut aq = Matrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let shift = numerics::spectral_abscissa(&aq).unwrap() + 0.4;
            aq -= Matrix::identity(2, 2) * shift;
            let q = StateSpace::new(
                aq,
                Matrix::from_fn(2, 1, |_, _| rng.random_range(-1.0..1.0)),
                Matrix::from_fn(1, 2, |_, _| rng.random_range(-1.0..1.0)),
                Matrix::zeros(1, 1),
            )
            .unwrap();
            let norm = hinf_norm(&q, 1e-8).unwrap();
            if norm == 0.0 {
                continue;
            }
            let scale = 0.8 * seed.gamma_q / norm;
            let q = StateSpace::new(q.a, q.b * scale, q.c, q.d).unwrap();
            let k = controller_from_seed(&seed, &q).unwrap();
            assert!(k.spectral_abscissa().unwrap() < 0.0, "K(Q) must be stable");
            let cl = lft_lower(&gp, &k).unwrap();
            assert!(
                cl.spectral_abscissa().unwrap() < 0.0,
                "K(Q) must stabilize the plant"
            );
        }
    }

    #[test]
    fn gamma_q_reciprocal_formula() {
        let plant = scalar_plant();
        let res = strong_stabilize_stability_only(&plant, &StrongStabOptions::default()).unwrap();
        let seed = parameterize(&res, &plant).unwrap();
        let inner = StateSpace::new(
            res.controller.a.clone(),
            plant.b.clone(),
            plant.c.clone(),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let norm = hinf_norm(&inner, 1e-9).unwrap();
        assert_relative_eq!(seed.gamma_q, 1.0 / norm, max_relative = 1e-6);
    }

    #[test]
    fn feasibility_monotone_in_gamma_k() {
        // the -γ_K·I diagonal blocks make feasibility monotone
        let plant = scalar_plant();
        let opts = StrongStabOptions::default();
        assert!(matches!(
            strong_stabilize(&plant, Some(0.5), false, &opts),
            Err(StrongStabError::Infeasible { .. })
        ));
        for gamma_k in [2.0, 5.0, 20.0] {
            let res = strong_stabilize(&plant, Some(gamma_k), false, &opts).unwrap();
            assert!(res.certificates.controller_hinf_norm.unwrap() < gamma_k);
        }
    }

    #[test]
    fn reverify_margin_negative() {
        let plant = scalar_plant();
        let res = strong_stabilize(&plant, None, true, &StrongStabOptions::default()).unwrap();
        let margin = reverify_lmis(&plant, &res).unwrap();
        assert!(margin < 0.0, "re-verified margin {margin} must be negative");
    }
}
