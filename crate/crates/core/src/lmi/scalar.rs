//! Scalar-objective minimization by geometric bisection over
//! feasibility calls. Applies when feasibility is monotone in the
//! scalar (true of the synthesis LMIs, where γ enters as -γ·I blocks).

use super::{solve_feasibility, AffineLmi, FeasibilityOutcome, LmiError, LmiSolution, MatrixVariable};

/// Result of a bisection run, with the bracketing certificate.
#[derive(Debug, Clone)]
pub struct ScalarMinimum {
    /// Smallest feasible probe.
    pub gamma: f64,
    pub witness: LmiSolution,
    /// Largest infeasible probe below `gamma`, if one was taken.
    pub last_infeasible: Option<f64>,
    /// Full probe history (γ, feasible) in probing order.
    pub probes: Vec<(f64, bool)>,
}

/// Minimize γ over `bracket` subject to `constraints(γ)` being feasible.
///
/// `rel_tol` bounds the relative width of the final bracket. The probe
/// history is scanned for a feasible-below-infeasible pattern; if one
/// appears the monotonicity premise is broken and the search aborts.
pub fn minimize_scalar(
    vars: &[MatrixVariable],
    constraints: impl Fn(f64) -> Vec<AffineLmi>,
    bracket: (f64, f64),
    rel_tol: f64,
    eps_strict: f64,
) -> Result<ScalarMinimum, LmiError> {
    let (mut lo, mut hi) = bracket;
    assert!(lo > 0.0 && hi > lo, "bracket must satisfy 0 < lo < hi");
    assert!(rel_tol > 0.0);

    let mut probes: Vec<(f64, bool)> = Vec::new();
    let check_monotone = |probes: &[(f64, bool)]| -> Result<(), LmiError> {
        for (g1, f1) in probes {
            for (g2, f2) in probes {
                if *f1 && !*f2 && g1 < g2 {
                    return Err(LmiError::NonMonotoneDetected {
                        feasible_at: *g1,
                        infeasible_at: *g2,
                    });
                }
            }
        }
        Ok(())
    };

    let probe = |gamma: f64| -> Result<FeasibilityOutcome, LmiError> {
        solve_feasibility(vars, &constraints(gamma), eps_strict)
    };

    let mut witness = match probe(hi)? {
        FeasibilityOutcome::Feasible(sol) => {
            probes.push((hi, true));
            sol
        }
        FeasibilityOutcome::Infeasible { best_margin, .. } => {
            return Err(LmiError::BracketInfeasible {
                hi,
                margin: best_margin,
            });
        }
    };
    let mut best_gamma = hi;

    match probe(lo)? {
        FeasibilityOutcome::Feasible(sol) => {
            // the whole bracket is feasible; lo is the answer
            probes.push((lo, true));
            return Ok(ScalarMinimum {
                gamma: lo,
                witness: sol,
                last_infeasible: None,
                probes,
            });
        }
        FeasibilityOutcome::Infeasible { .. } => probes.push((lo, false)),
    }

    while hi / lo > 1.0 + rel_tol {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        match probe(mid)? {
            FeasibilityOutcome::Feasible(sol) => {
                hi = mid;
                best_gamma = mid;
                witness = sol;
                probes.push((mid, true));
            }
            FeasibilityOutcome::Infeasible { .. } => {
                lo = mid;
                probes.push((mid, false));
            }
        }
        check_monotone(&probes)?;
    }

    Ok(ScalarMinimum {
        gamma: best_gamma,
        witness,
        last_infeasible: Some(lo),
        probes,
    })
}
