//! Stable H-infinity controller synthesis.
//!
//! For a solvable level γ the suboptimal controllers of a generalized
//! plant P are F_l(M∞, Q) over stable Q with ‖Q‖∞ ≤ γ. Treating M∞
//! itself as a plant and strongly stabilizing its Q-channel triple
//! (A_c, B_c2, C_c2) with the norm bound γ_K = γ produces a stable
//! K_{M∞}; the composition C_γ = F_l(M∞, K_{M∞}) is then a stable
//! controller achieving ‖F_l(P, C_γ)‖∞ < γ, of twice the plant order.
//!
//! C_γ is assembled directly from its block-triangular realization and
//! cross-checked against the generic LFT on a frequency grid; the
//! returned controller always carries independently recomputed
//! stability and norm certificates.

use crate::numerics::{self, Matrix};
use crate::riccati::{self, GammaFeasibility, RiccatiError};
use crate::strongstab::{
    strong_stabilize, structured_baseline, Plant, StrongStabError, StrongStabOptions,
    StrongStabResult,
};
use crate::sysmodel::{
    frequency_grid, hinf_norm, lft_lower, validate_assumptions, AssumptionViolation,
    GeneralizedPlant, StateSpace, SysError,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HinfError {
    #[error("gamma = {gamma} is infeasible: {reason}")]
    GammaInfeasible { gamma: f64, reason: String },
    #[error("hard assumption violated: {0:?}")]
    AssumptionViolated(Vec<AssumptionViolation>),
    #[error("inner strong-stabilization LMIs infeasible at gamma = {gamma}: {detail}. \
             The condition is sufficient only; a stable controller may still exist at this level.")]
    InnerInfeasible { gamma: f64, detail: String },
    #[error("direct block assembly of C_gamma disagrees with the generic LFT \
             (max relative error {max_rel_err:.3e}); this indicates an implementation bug")]
    CrossCheckMismatch { max_rel_err: f64 },
    #[error("certificate recomputation failed: {0}")]
    CertificateFailed(String),
    #[error("upper bracket end gamma = {hi} is infeasible: {reason}")]
    BracketInfeasible { hi: f64, reason: String },
    #[error(transparent)]
    Riccati(#[from] RiccatiError),
    #[error(transparent)]
    Sys(#[from] SysError),
    #[error(transparent)]
    StrongStab(#[from] StrongStabError),
}

/// How the inner norm bound γ_K relates to the outer level γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaKMode {
    /// γ_K = γ (the default coupling).
    Coupled,
    /// Minimize γ_K at fixed γ (experimentation aid).
    Minimize,
}

#[derive(Debug, Clone, Copy)]
pub struct HinfOptions {
    pub strongstab: StrongStabOptions,
    /// Relative tolerance of the outer γ bisection.
    pub gamma_rel_tol: f64,
    pub gamma_k_mode: GammaKMode,
    /// Use the structured (frozen-Z) baseline for the inner problem.
    pub inner_structured: bool,
    /// Tolerance for assumption checks.
    pub assumption_tol: f64,
}

impl Default for HinfOptions {
    fn default() -> Self {
        Self {
            strongstab: StrongStabOptions::default(),
            gamma_rel_tol: 1e-3,
            gamma_k_mode: GammaKMode::Coupled,
            inner_structured: false,
            assumption_tol: 1e-7,
        }
    }
}

/// Plant after D12/D21 scaling (and loop shifting when D11 ≠ 0), with
/// the data needed to map controllers back to original coordinates.
struct NormalizedPlant {
    plant: GeneralizedPlant,
    su: Matrix,
    sy: Matrix,
    dk0: Matrix,
    diagnostics: Vec<String>,
}

/// Symmetric inverse square root of an SPD matrix.
fn inv_sqrt_spd(w: &Matrix) -> Option<Matrix> {
    let se = w.clone().symmetric_eigen();
    let n = w.nrows();
    let min = se.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = se.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if min <= 1e-12 * (1.0 + max) {
        return None;
    }
    let d = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 / se.eigenvalues[i].sqrt()
        } else {
            0.0
        }
    });
    Some(&se.eigenvectors * d * se.eigenvectors.transpose())
}

fn normalize_plant(p: &GeneralizedPlant, tol: f64) -> Result<NormalizedPlant, HinfError> {
    let mut diagnostics = Vec::new();

    // hard assumptions: stabilizability/detectability and A.4
    let violations = validate_assumptions(p, tol)?;
    let hard: Vec<AssumptionViolation> = violations
        .iter()
        .filter(|v| {
            matches!(
                v,
                AssumptionViolation::NotStabilizable { .. }
                    | AssumptionViolation::NotDetectable { .. }
                    | AssumptionViolation::ImaginaryAxisEigenvalue { .. }
                    | AssumptionViolation::D12RankDeficient
                    | AssumptionViolation::D21RankDeficient
            )
        })
        .cloned()
        .collect();
    if !hard.is_empty() {
        return Err(HinfError::AssumptionViolated(hard));
    }
    for v in &violations {
        diagnostics.push(format!("assumption warning: {v}"));
    }

    let d12 = p.d12();
    let d21 = p.d21();
    let su = inv_sqrt_spd(&(d12.transpose() * &d12))
        .ok_or(HinfError::AssumptionViolated(vec![AssumptionViolation::D12RankDeficient]))?;
    let sy = inv_sqrt_spd(&(&d21 * d21.transpose()))
        .ok_or(HinfError::AssumptionViolated(vec![AssumptionViolation::D21RankDeficient]))?;

    let (a, b1, b2) = (p.a(), p.b1(), p.b2() * &su);
    let (c1, c2) = (p.c1(), &sy * p.c2());
    let d11 = p.d11();
    let (d12, d21) = (p.d12() * &su, &sy * p.d21());

    // loop shift for nonzero D11 (best effort; residual is flagged)
    let (a, b1, c1, dk0) = if d11.norm() > 0.0 {
        let dk0 = -(d12.transpose() * &d11 * d21.transpose());
        let a_s = &a + &b2 * &dk0 * &c2;
        let b1_s = &b1 + &b2 * &dk0 * &d21;
        let c1_s = &c1 + &d12 * &dk0 * &c2;
        let d11_res = &d11 + &d12 * &dk0 * &d21;
        if d11_res.norm() > 1e-9 * (1.0 + d11.norm()) {
            diagnostics.push(format!(
                "loop shift left a residual D11 of norm {:.3e}; it is treated as zero \
                 (best-effort path), final certificates remain authoritative",
                d11_res.norm()
            ));
        }
        diagnostics.push("nonzero D11 handled by loop-shift preprocessing".into());
        (a_s, b1_s, c1_s, dk0)
    } else {
        (a, b1, c1, Matrix::zeros(p.m2, p.p2))
    };

    let plant = GeneralizedPlant::from_blocks(
        a,
        b1,
        b2,
        c1,
        c2,
        Matrix::zeros(p.p1, p.m1),
        d12,
        d21,
    )?;
    Ok(NormalizedPlant {
        plant,
        su,
        sy,
        dk0,
        diagnostics,
    })
}

/// The central-controller generator M∞ at level γ, in normalized
/// coordinates, together with the data to map controllers back.
#[derive(Debug, Clone)]
pub struct CentralController {
    /// Two-port M∞ with channels ([y, q_in] -> [u, q_out]).
    pub m: GeneralizedPlant,
    pub gamma: f64,
    pub x_inf: Matrix,
    pub y_inf: Matrix,
    pub spectral_radius_xy: f64,
    su: Matrix,
    sy: Matrix,
    dk0: Matrix,
    pub diagnostics: Vec<String>,
}

impl CentralController {
    /// Map a controller for the normalized plant back to original
    /// coordinates: K = Su·(K' + D_K0)·Sy.
    fn unscale(&self, k: &StateSpace) -> StateSpace {
        StateSpace {
            a: k.a.clone(),
            b: &k.b * &self.sy,
            c: &self.su * &k.c,
            d: &self.su * (&k.d + &self.dk0) * &self.sy,
        }
    }

    /// Suboptimal controller F_l(M∞, Q) in original coordinates.
    pub fn controller_from_q(&self, q: &StateSpace) -> Result<StateSpace, HinfError> {
        Ok(self.unscale(&lft_lower(&self.m, q)?))
    }

    /// The central (Q = 0) controller in original coordinates.
    pub fn central(&self) -> Result<StateSpace, HinfError> {
        self.controller_from_q(&StateSpace::zero(self.m.m2, self.m.p2))
    }
}

/// Solvability of the two H-infinity Riccati equations at level γ for a
/// normalized plant; used for the γ_opt search.
pub fn gamma_solvable(p: &GeneralizedPlant, gamma: f64, tol: f64) -> Result<bool, HinfError> {
    let norm = normalize_plant(p, tol)?;
    Ok(matches!(
        riccati::solve_h2_like_pair(&norm.plant, gamma)?,
        GammaFeasibility::Feasible(_)
    ))
}

/// Smallest γ (to relative tolerance) at which the Riccati pair is
/// solvable: the standard-problem optimum γ_opt.
pub fn min_gamma_central(
    p: &GeneralizedPlant,
    bracket: (f64, f64),
    rel_tol: f64,
    opts: &HinfOptions,
) -> Result<f64, HinfError> {
    let (mut lo, mut hi) = bracket;
    assert!(lo > 0.0 && hi > lo);
    if !gamma_solvable(p, hi, opts.assumption_tol)? {
        return Err(HinfError::BracketInfeasible {
            hi,
            reason: "Riccati pair unsolvable at the upper bracket end".into(),
        });
    }
    if gamma_solvable(p, lo, opts.assumption_tol)? {
        return Ok(lo);
    }
    while hi / lo > 1.0 + rel_tol {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if gamma_solvable(p, mid, opts.assumption_tol)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Build the central-controller generator M∞ at level γ.
///
/// The realization uses the worst-case-disturbance observer form; the
/// cross-term corrections (D12ᵀC1, B1D21ᵀ) appear in the gains and in
/// the shifted output/input maps. F_l(M∞, 0) is certified against the
/// original plant before M∞ is returned.
pub fn central_controller(
    p: &GeneralizedPlant,
    gamma: f64,
    opts: &HinfOptions,
) -> Result<CentralController, HinfError> {
    let norm = normalize_plant(p, opts.assumption_tol)?;
    let np = &norm.plant;
    let pair = match riccati::solve_h2_like_pair(np, gamma)? {
        GammaFeasibility::Feasible(pair) => pair,
        GammaFeasibility::Infeasible { reason } => {
            return Err(HinfError::GammaInfeasible { gamma, reason })
        }
    };
    let (x, y) = (&pair.x_inf, &pair.y_inf);
    let n = np.order();
    let gi2 = 1.0 / (gamma * gamma);
    let (a, b1, b2, c1, c2) = (np.a(), np.b1(), np.b2(), np.c1(), np.c2());
    let (d12, d21) = (np.d12(), np.d21());

    let f_gain = -(b2.transpose() * x + d12.transpose() * &c1);
    let l_gain = -(y * c2.transpose() + &b1 * d21.transpose());
    let z_inf_inv = Matrix::identity(n, n) - y * x * gi2;
    let z_inf = z_inf_inv.try_inverse().ok_or(HinfError::GammaInfeasible {
        gamma,
        reason: "I - γ⁻²YX is singular".into(),
    })?;
    let c2_shift = &c2 + &d21 * b1.transpose() * x * gi2;
    let b2_shift = &b2 + y * c1.transpose() * &d12 * gi2;

    let a_m = &a + &b1 * b1.transpose() * x * gi2 + &b2 * &f_gain + &z_inf * &l_gain * &c2_shift;
    let b_m1 = -(&z_inf * &l_gain);
    let b_m2 = &z_inf * &b2_shift;
    let c_m1 = f_gain.clone();
    let c_m2 = -&c2_shift;
    let (m2, p2) = (np.m2, np.p2);
    let m = GeneralizedPlant::from_blocks(
        a_m,
        b_m1,
        b_m2,
        c_m1,
        c_m2,
        Matrix::zeros(m2, p2),
        Matrix::identity(m2, m2),
        Matrix::identity(p2, p2),
    )?;

    let cc = CentralController {
        m,
        gamma,
        x_inf: pair.x_inf.clone(),
        y_inf: pair.y_inf.clone(),
        spectral_radius_xy: pair.spectral_radius_xy,
        su: norm.su,
        sy: norm.sy,
        dk0: norm.dk0,
        diagnostics: norm.diagnostics,
    };

    // certify the central controller against the original plant
    let k0 = cc.central()?;
    let closed = lft_lower(p, &k0)?;
    let abscissa = closed.spectral_abscissa()?;
    if abscissa >= 0.0 {
        return Err(HinfError::GammaInfeasible {
            gamma,
            reason: format!("central controller does not stabilize (abscissa {abscissa:.3e})"),
        });
    }
    let cl_norm = hinf_norm(&closed, 1e-7)?;
    if cl_norm > gamma * (1.0 + 1e-6) {
        return Err(HinfError::GammaInfeasible {
            gamma,
            reason: format!("central closed-loop norm {cl_norm:.6e} exceeds gamma"),
        });
    }
    Ok(cc)
}

/// Independently recomputed certificates of a stable H∞ controller.
#[derive(Debug, Clone)]
pub struct HinfCertificates {
    pub controller_abscissa: f64,
    pub closed_loop_abscissa: f64,
    pub closed_loop_hinf: f64,
}

#[derive(Debug, Clone)]
pub struct StableHinfController {
    /// The stable controller, order 2n, in original plant coordinates.
    pub c_gamma: StateSpace,
    /// Strong-stabilization result for the inner (M∞) problem.
    pub inner: StrongStabResult,
    pub gamma: f64,
    pub gamma_k: f64,
    pub certificates: HinfCertificates,
    pub diagnostics: Vec<String>,
}

/// Strongly stabilize M∞ and compose the stable H-infinity controller.
pub fn stable_hinf(
    p: &GeneralizedPlant,
    gamma: f64,
    opts: &HinfOptions,
) -> Result<StableHinfController, HinfError> {
    let mut cc = central_controller(p, gamma, opts)?;

    // rebase M∞ on balanced state coordinates of its Q-channel triple;
    // the transfer function is unchanged and the inner Riccati/LMI data
    // stays well-scaled even when the plant states span decades
    {
        let (d, ab, b2b, c2b) = numerics::balance_realization(&cc.m.a(), &cc.m.b2(), &cc.m.c2());
        let n = ab.nrows();
        let mut b1b = cc.m.b1();
        let mut c1b = cc.m.c1();
        for i in 0..n {
            for j in 0..b1b.ncols() {
                b1b[(i, j)] /= d[i];
            }
            for r in 0..c1b.nrows() {
                c1b[(r, i)] *= d[i];
            }
        }
        cc.m = GeneralizedPlant::from_blocks(
            ab,
            b1b,
            b2b,
            c1b,
            c2b,
            cc.m.d11(),
            cc.m.d12(),
            cc.m.d21(),
        )?;
    }

    let inner_plant = Plant::new(cc.m.a(), cc.m.b2(), cc.m.c2())
        .map_err(|e| HinfError::InnerInfeasible {
            gamma,
            detail: format!("inner plant is degenerate: {e}"),
        })?;

    let run_inner = || -> Result<StrongStabResult, StrongStabError> {
        match (opts.inner_structured, opts.gamma_k_mode) {
            (false, GammaKMode::Coupled) => {
                strong_stabilize(&inner_plant, Some(gamma), false, &opts.strongstab)
            }
            (false, GammaKMode::Minimize) => {
                strong_stabilize(&inner_plant, Some(gamma), true, &opts.strongstab)
            }
            (true, GammaKMode::Coupled) => {
                structured_baseline(&inner_plant, Some(gamma), false, &opts.strongstab)
            }
            (true, GammaKMode::Minimize) => {
                structured_baseline(&inner_plant, Some(gamma), true, &opts.strongstab)
            }
        }
    };
    let inner = run_inner().map_err(|e| match e {
        StrongStabError::Infeasible { best_margin, .. } => HinfError::InnerInfeasible {
            gamma,
            detail: format!("LMIs infeasible (best margin {best_margin:.3e})"),
        },
        StrongStabError::RiccatiFailure(r) => HinfError::InnerInfeasible {
            gamma,
            detail: format!("inner Riccati failed: {r}"),
        },
        // margin erosion in the verified certificates: numerically
        // infeasible at this level, a softer failure than a bug
        StrongStabError::CertificateFailure(msg) => HinfError::InnerInfeasible {
            gamma,
            detail: format!("inner certificates eroded: {msg}"),
        },
        other => HinfError::StrongStab(other),
    })?;

    // direct assembly of C_gamma from its block-triangular realization
    let (a_c, b_c1, b_c2) = (cc.m.a(), cc.m.b1(), cc.m.b2());
    let (c_c1, c_c2) = (cc.m.c1(), cc.m.c2());
    let (d_c12, d_c21) = (cc.m.d12(), cc.m.d21());
    let n = a_c.nrows();
    let bbt_x = &b_c2 * b_c2.transpose() * &inner.x;
    let xkinv_z = nalgebra::linalg::Cholesky::new(inner.x_k.clone())
        .ok_or_else(|| HinfError::CertificateFailed("X_Kc lost definiteness".into()))?
        .solve(&inner.z);
    let mut a_cg = Matrix::zeros(2 * n, 2 * n);
    a_cg.view_mut((0, 0), (n, n)).copy_from(&(&a_c - &bbt_x));
    a_cg.view_mut((0, n), (n, n)).copy_from(&(-&bbt_x));
    a_cg.view_mut((n, n), (n, n))
        .copy_from(&(&a_c + &xkinv_z * &c_c2));
    let p2m = cc.m.p2;
    let mut b_cg = Matrix::zeros(2 * n, p2m);
    b_cg.view_mut((0, 0), (n, p2m)).copy_from(&b_c1);
    b_cg.view_mut((n, 0), (n, p2m))
        .copy_from(&(-&b_c1 - &xkinv_z * &d_c21));
    let m2m = cc.m.m2;
    let mut c_cg = Matrix::zeros(m2m, 2 * n);
    let dbx = &d_c12 * b_c2.transpose() * &inner.x;
    c_cg.view_mut((0, 0), (m2m, n)).copy_from(&(&c_c1 - &dbx));
    c_cg.view_mut((0, n), (m2m, n)).copy_from(&(-&dbx));
    let c_gamma_normalized = StateSpace::new(a_cg, b_cg, c_cg, cc.m.d11())?;

    // cross-check against the generic LFT composition
    let via_lft = lft_lower(&cc.m, &inner.controller)?;
    let mut max_rel = 0.0f64;
    for w in frequency_grid(1e-3, 1e3, 40) {
        let s = num_complex::Complex64::new(0.0, w);
        let g1 = c_gamma_normalized.transfer_at(s)?;
        let g2 = via_lft.transfer_at(s)?;
        let denom = g2.norm().max(1.0);
        max_rel = max_rel.max((g1 - g2).norm() / denom);
    }
    if max_rel > 1e-6 {
        return Err(HinfError::CrossCheckMismatch { max_rel_err: max_rel });
    }

    let c_gamma = cc.unscale(&c_gamma_normalized);

    // the three certificates, recomputed on the original plant
    let controller_abscissa = c_gamma.spectral_abscissa()?;
    if controller_abscissa >= 0.0 {
        return Err(HinfError::CertificateFailed(format!(
            "C_gamma is not stable (abscissa {controller_abscissa:.3e})"
        )));
    }
    let closed = lft_lower(p, &c_gamma)?;
    let closed_loop_abscissa = closed.spectral_abscissa()?;
    if closed_loop_abscissa >= 0.0 {
        return Err(HinfError::CertificateFailed(format!(
            "closed loop is not stable (abscissa {closed_loop_abscissa:.3e})"
        )));
    }
    let closed_loop_hinf = hinf_norm(&closed, 1e-7)?;
    if closed_loop_hinf > gamma * (1.0 + 1e-6) {
        return Err(HinfError::CertificateFailed(format!(
            "closed-loop norm {closed_loop_hinf:.6e} is not below gamma {gamma:.6e}"
        )));
    }

    Ok(StableHinfController {
        c_gamma,
        gamma,
        gamma_k: inner.gamma_k.min(gamma),
        inner,
        certificates: HinfCertificates {
            controller_abscissa,
            closed_loop_abscissa,
            closed_loop_hinf,
        },
        diagnostics: cc.diagnostics.clone(),
    })
}

/// Result of the outer γ bisection.
#[derive(Debug)]
pub struct MinGammaResult {
    pub gamma: f64,
    pub controller: StableHinfController,
    /// Probe history (γ, feasible, detail) in probing order.
    pub probes: Vec<(f64, bool, String)>,
    /// True when the history shows a feasible probe below an infeasible
    /// one; the combined sufficient condition is not proven monotone,
    /// so this is recorded rather than treated as an error.
    pub non_monotone_observed: bool,
}

/// Locate the smallest γ in the bracket at which [`stable_hinf`]
/// succeeds; infeasibility of any kind at a probe (Riccati, inner LMI,
/// certificate) makes that probe infeasible.
pub fn min_gamma_stable(
    p: &GeneralizedPlant,
    bracket: (f64, f64),
    rel_tol: f64,
    opts: &HinfOptions,
) -> Result<MinGammaResult, HinfError> {
    let (mut lo, mut hi) = bracket;
    assert!(lo > 0.0 && hi > lo, "bracket must satisfy 0 < lo < hi");
    let mut probes: Vec<(f64, bool, String)> = Vec::new();

    let probe = |gamma: f64,
                 probes: &mut Vec<(f64, bool, String)>|
     -> Result<Option<StableHinfController>, HinfError> {
        match stable_hinf(p, gamma, opts) {
            Ok(ctrl) => {
                probes.push((gamma, true, String::new()));
                Ok(Some(ctrl))
            }
            Err(
                e @ (HinfError::GammaInfeasible { .. }
                | HinfError::InnerInfeasible { .. }
                | HinfError::CertificateFailed(_)),
            ) => {
                probes.push((gamma, false, e.to_string()));
                Ok(None)
            }
            Err(hard) => Err(hard),
        }
    };

    let Some(mut best) = probe(hi, &mut probes)? else {
        let reason = probes.last().map(|p| p.2.clone()).unwrap_or_default();
        return Err(HinfError::BracketInfeasible { hi, reason });
    };
    let mut best_gamma = hi;

    if let Some(ctrl) = probe(lo, &mut probes)? {
        return Ok(MinGammaResult {
            gamma: lo,
            controller: ctrl,
            probes,
            non_monotone_observed: false,
        });
    }

    while hi / lo > 1.0 + rel_tol {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        match probe(mid, &mut probes)? {
            Some(ctrl) => {
                hi = mid;
                best = ctrl;
                best_gamma = mid;
            }
            None => lo = mid,
        }
    }

    let non_monotone_observed = probes.iter().any(|(g1, f1, _)| {
        *f1 && probes
            .iter()
            .any(|(g2, f2, _)| !*f2 && g1 < g2)
    });
    Ok(MinGammaResult {
        gamma: best_gamma,
        controller: best,
        probes,
        non_monotone_observed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-state benchmark plant with reference γ_opt ≈ 1.2929 and
    /// minimal stable-controller level ≈ 1.3696.
    #[allow(clippy::approx_constant)] // 0.7071 is the reference data, verbatim
    pub(crate) fn lee_soh_plant() -> GeneralizedPlant {
        let a = Matrix::from_row_slice(2, 2, &[-2.0, 1.7321, 1.7321, 0.0]);
        let b1 = Matrix::from_row_slice(2, 2, &[0.1, -0.1, -0.5, 0.5]);
        let b2 = Matrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let c1 = Matrix::from_row_slice(2, 2, &[0.2, -1.0, 0.0, 0.0]);
        let c2 = Matrix::from_row_slice(1, 2, &[10.0, 11.5470]);
        let d11 = Matrix::zeros(2, 2);
        let d12 = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let d21 = Matrix::from_row_slice(1, 2, &[0.7071, 0.7071]);
        GeneralizedPlant::from_blocks(a, b1, b2, c1, c2, d11, d12, d21).unwrap()
    }

    #[test]
    fn lee_soh_gamma_opt() {
        let p = lee_soh_plant();
        let opts = HinfOptions::default();
        let gopt = min_gamma_central(&p, (0.5, 20.0), 1e-4, &opts).unwrap();
        // the exact two-Riccati feasibility boundary of this data; the
        // published 1.2929 is an upper bisection probe and must lie
        // within its own coarse tolerance above the boundary
        assert!(
            (gopt - 1.29022).abs() < 5e-4,
            "gamma_opt = {gopt}, expected the 1.29022 boundary"
        );
        assert!(1.2929 >= gopt && 1.2929 <= gopt + 0.004);
    }

    #[test]
    fn lee_soh_solvable_above_and_not_below_optimum() {
        let p = lee_soh_plant();
        let opts = HinfOptions::default();
        assert!(gamma_solvable(&p, 1.5, opts.assumption_tol).unwrap());
        assert!(!gamma_solvable(&p, 1.2, opts.assumption_tol).unwrap());
    }

    #[test]
    fn riccati_pair_feasibility_monotone_in_gamma() {
        let p = lee_soh_plant();
        let opts = HinfOptions::default();
        let mut seen_feasible = false;
        for gamma in [1.1, 1.2, 1.25, 1.291, 1.32, 1.5, 2.0, 5.0] {
            let ok = gamma_solvable(&p, gamma, opts.assumption_tol).unwrap();
            assert!(
                ok || !seen_feasible,
                "feasibility lost at gamma = {gamma} after a smaller feasible level"
            );
            seen_feasible |= ok;
        }
        assert!(seen_feasible);
    }

    #[test]
    fn lee_soh_central_controller_certified() {
        let p = lee_soh_plant();
        let cc = central_controller(&p, 1.5, &HinfOptions::default()).unwrap();
        let k0 = cc.central().unwrap();
        let closed = lft_lower(&p, &k0).unwrap();
        assert!(closed.spectral_abscissa().unwrap() < 0.0);
        assert!(hinf_norm(&closed, 1e-7).unwrap() < 1.5);
    }

    #[test]
    fn lee_soh_random_q_parameterization() {
        use rand::Rng;
        use rand::SeedableRng;
        let p = lee_soh_plant();
        let gamma = 1.6;
        let cc = central_controller(&p, gamma, &HinfOptions::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..8 {
            let mut aq = Matrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let shift = numerics::spectral_abscissa(&aq).unwrap() + 0.5;
            aq -= Matrix::identity(2, 2) * shift;
            let q = StateSpace::new(
                aq,
                Matrix::from_fn(2, 1, |_, _| rng.random_range(-1.0..1.0)),
                Matrix::from_fn(1, 2, |_, _| rng.random_range(-1.0..1.0)),
                Matrix::zeros(1, 1),
            )
            .unwrap();
            let qn = hinf_norm(&q, 1e-8).unwrap();
            if qn == 0.0 {
                continue;
            }
            // rescale into the admissible ball
            let q = StateSpace::new(q.a, q.b * (0.7 * gamma / qn), q.c, q.d).unwrap();
            let k = cc.controller_from_q(&q).unwrap();
            let closed = lft_lower(&p, &k).unwrap();
            assert!(closed.spectral_abscissa().unwrap() < 0.0, "Q-loop unstable");
            let norm = hinf_norm(&closed, 1e-6).unwrap();
            assert!(
                norm <= gamma * (1.0 + 1e-4),
                "‖F_l(P, F_l(M,Q))‖ = {norm} exceeds gamma = {gamma}"
            );
        }
    }

    #[test]
    fn lee_soh_stable_controller_at_137() {
        let p = lee_soh_plant();
        let ctrl = stable_hinf(&p, 1.37, &HinfOptions::default()).unwrap();
        assert_eq!(ctrl.c_gamma.order(), 4, "order must be 2n");
        assert!(ctrl.certificates.controller_abscissa < 0.0);
        assert!(ctrl.certificates.closed_loop_abscissa < 0.0);
        assert!(ctrl.certificates.closed_loop_hinf < 1.37);
    }

    #[test]
    fn decoupled_gamma_k_mode_minimizes_inner_bound() {
        let p = lee_soh_plant();
        let opts = HinfOptions {
            gamma_k_mode: GammaKMode::Minimize,
            ..HinfOptions::default()
        };
        let ctrl = stable_hinf(&p, 1.6, &opts).unwrap();
        // the minimized inner bound must beat the coupled choice γ_K = γ
        assert!(ctrl.gamma_k < 1.6, "gamma_k = {}", ctrl.gamma_k);
        assert!(ctrl.certificates.closed_loop_hinf < 1.6);
    }

    #[test]
    fn lee_soh_infeasible_below_gamma_opt() {
        let p = lee_soh_plant();
        let err = stable_hinf(&p, 1.28, &HinfOptions::default()).unwrap_err();
        assert!(matches!(err, HinfError::GammaInfeasible { .. }), "{err}");
    }

    #[test]
    fn lee_soh_min_gamma_near_published_value() {
        let p = lee_soh_plant();
        let res = min_gamma_stable(&p, (1.0, 3.0), 5e-4, &HinfOptions::default()).unwrap();
        assert!(
            (res.gamma - 1.36957).abs() < 0.01,
            "minimal stable gamma = {}, expected about 1.36957",
            res.gamma
        );
        // block-triangular split: eig(A_Cγ) = eig(A_X-part) ⊎ eig(A_Z-part)
        let ctrl = &res.controller;
        let eig = numerics::eigenvalues(&ctrl.c_gamma.a).unwrap();
        assert_eq!(eig.len(), 4);
    }
}


