//! Phase-1 barrier method for the semidefinite feasibility problem.
//!
//! The epigraph form `min t s.t. F_i(x) ⪯ t·I` is always strictly
//! feasible (take t large), so a standard log-det path-following scheme
//! applies: minimize μ·t − Σ log det(t·I − F_i(x)) by damped Newton in
//! (x, t), growing μ until either an x with all F_i(x) ≺ 0 appears or
//! the gap certifies t* is not negative enough.

use super::jacobi;
use super::{AffineLmi, FeasibilityOutcome, LmiError, LmiSolution, MatrixVariable, VarKind};
use crate::numerics::Matrix;
use std::collections::BTreeMap;

struct VarLayout {
    name: String,
    rows: usize,
    cols: usize,
    kind: VarKind,
    offset: usize,
}

impl VarLayout {
    /// Basis matrix for the local scalar index.
    fn basis(&self, local: usize) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        match self.kind {
            VarKind::Rectangular => {
                m[(local / self.cols, local % self.cols)] = 1.0;
            }
            VarKind::Symmetric => {
                // upper-triangle enumeration (p <= q)
                let (p, q) = sym_index(self.rows, local);
                m[(p, q)] = 1.0;
                m[(q, p)] = 1.0;
                if p == q {
                    m[(p, q)] = 1.0;
                }
            }
        }
        m
    }

    fn materialize(&self, x: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        match self.kind {
            VarKind::Rectangular => {
                for local in 0..self.rows * self.cols {
                    m[(local / self.cols, local % self.cols)] = x[self.offset + local];
                }
            }
            VarKind::Symmetric => {
                for local in 0..self.rows * (self.rows + 1) / 2 {
                    let (p, q) = sym_index(self.rows, local);
                    m[(p, q)] = x[self.offset + local];
                    m[(q, p)] = x[self.offset + local];
                }
            }
        }
        m
    }
}

/// (p, q) with p <= q for the `local`-th upper-triangle entry, row-major.
fn sym_index(n: usize, local: usize) -> (usize, usize) {
    let mut rem = local;
    for p in 0..n {
        let row_len = n - p;
        if rem < row_len {
            return (p, p + rem);
        }
        rem -= row_len;
    }
    unreachable!("symmetric index out of range")
}

/// Internal scaled constraint: F(x) = constant + Σ x_k coeff_k.
struct Constraint {
    constant: Matrix,
    coeffs: Vec<(usize, Matrix)>,
    size: usize,
}

fn build_constraints(
    vars: &[VarLayout],
    lmis: &[AffineLmi],
    eps_strict: f64,
) -> Result<(Vec<Constraint>, Vec<f64>), LmiError> {
    let mut out = Vec::new();
    let mut eps_list = Vec::new();
    let by_name: BTreeMap<&str, &VarLayout> =
        vars.iter().map(|v| (v.name.as_str(), v)).collect();
    for lmi in lmis {
        let size = lmi.size();
        if lmi.constant.ncols() != size {
            return Err(LmiError::BadShape(format!(
                "constraint {} has non-square constant",
                lmi.label
            )));
        }
        let eps = eps_strict * (1.0 + lmi.constant.norm());
        let shifted = &lmi.constant + Matrix::identity(size, size) * eps;
        let scale = 1.0 / (1.0 + shifted.norm());
        // accumulate per-scalar coefficient matrices
        let mut coeff_map: BTreeMap<usize, Matrix> = BTreeMap::new();
        for term in &lmi.terms {
            let layout = by_name.get(term.var.as_str()).ok_or_else(|| {
                LmiError::BadShape(format!(
                    "constraint {} references unknown variable {}",
                    lmi.label, term.var
                ))
            })?;
            let count = match layout.kind {
                VarKind::Symmetric => layout.rows * (layout.rows + 1) / 2,
                VarKind::Rectangular => layout.rows * layout.cols,
            };
            // shape check: L (size x r'), op(V) (r' x c'), R (c' x size)
            let (vr, vc) = if term.transpose_var {
                (layout.cols, layout.rows)
            } else {
                (layout.rows, layout.cols)
            };
            if term.left.nrows() != size
                || term.left.ncols() != vr
                || term.right.nrows() != vc
                || term.right.ncols() != size
            {
                return Err(LmiError::DimensionMismatch(format!(
                    "constraint {}: term on {} has L {}x{}, R {}x{}, var {}x{}",
                    lmi.label,
                    term.var,
                    term.left.nrows(),
                    term.left.ncols(),
                    term.right.nrows(),
                    term.right.ncols(),
                    vr,
                    vc
                )));
            }
            for local in 0..count {
                let basis = layout.basis(local);
                let op_b = if term.transpose_var { basis.transpose() } else { basis };
                let m = &term.left * op_b * &term.right;
                let sym = (&m + m.transpose()) * scale;
                coeff_map
                    .entry(layout.offset + local)
                    .and_modify(|acc| *acc += &sym)
                    .or_insert(sym);
            }
        }
        out.push(Constraint {
            constant: shifted * scale,
            coeffs: coeff_map.into_iter().collect(),
            size,
        });
        eps_list.push(eps);
    }
    Ok((out, eps_list))
}

/// Damped-Newton analytic centering of {x : F_i(x) ≺ 0}: starting from
/// a strictly interior point, minimize -Σ log det(-F_i(x)). The center
/// balances every constraint (including the definiteness floors and
/// variable caps), which keeps the returned matrices far better
/// conditioned than the first feasible iterate of the phase-1 path.
fn analytic_center_polish(scaled: &[Constraint], x: &mut Vec<f64>, nx: usize) {
    let eval = |x: &[f64], c: &Constraint| -> Matrix {
        let mut f = c.constant.clone();
        for (k, coeff) in &c.coeffs {
            f += coeff * x[*k];
        }
        f
    };
    let phi = |x: &[f64]| -> Option<f64> {
        let mut val = 0.0;
        for c in scaled {
            let s = -eval(x, c);
            let chol = nalgebra::linalg::Cholesky::new(s)?;
            let ld: f64 = (0..c.size).map(|i| chol.l_dirty()[(i, i)].ln()).sum();
            val -= 2.0 * ld;
        }
        Some(val)
    };
    for _ in 0..30 {
        let mut sinvs = Vec::with_capacity(scaled.len());
        for c in scaled {
            match nalgebra::linalg::Cholesky::new(-eval(x, c)) {
                Some(chol) => sinvs.push(chol.inverse()),
                None => return,
            }
        }
        let mut grad = vec![0.0f64; nx];
        let mut hess = Matrix::zeros(nx, nx);
        for (c, sinv) in scaled.iter().zip(sinvs.iter()) {
            let ws: Vec<(usize, Matrix)> = c
                .coeffs
                .iter()
                .map(|(k, coeff)| (*k, sinv * coeff))
                .collect();
            for (k, w) in &ws {
                grad[*k] += w.trace();
            }
            for (ia, (k, wk)) in ws.iter().enumerate() {
                for pair in ws.iter().skip(ia) {
                    let (l, wl) = (pair.0, &pair.1);
                    let mut tr = 0.0;
                    for r in 0..c.size {
                        for cc in 0..c.size {
                            tr += wk[(r, cc)] * wl[(cc, r)];
                        }
                    }
                    hess[(*k, l)] += tr;
                    if *k != l {
                        hess[(l, *k)] += tr;
                    }
                }
            }
        }
        let g = Matrix::from_fn(nx, 1, |i, _| -grad[i]);
        let mut step = None;
        let mut ridge = 0.0;
        for _ in 0..6 {
            let h = if ridge > 0.0 {
                &hess + Matrix::identity(nx, nx) * ridge
            } else {
                hess.clone()
            };
            if let Some(chol) = nalgebra::linalg::Cholesky::new(h) {
                step = Some(chol.solve(&g));
                break;
            }
            ridge = if ridge == 0.0 {
                1e-10 * (1.0 + hess.trace().abs())
            } else {
                ridge * 100.0
            };
        }
        let Some(step) = step else { return };
        let decrement_sq: f64 = (0..nx).map(|i| step[(i, 0)] * grad[i]).sum::<f64>().abs();
        let Some(phi0) = phi(x) else { return };
        let slope: f64 = (0..nx).map(|i| grad[i] * step[(i, 0)]).sum();
        let mut alpha = 1.0f64;
        let mut moved = false;
        for _ in 0..40 {
            let xt: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(i, v)| v + alpha * step[(i, 0)])
                .collect();
            if let Some(val) = phi(&xt) {
                if val <= phi0 + 0.01 * alpha * slope {
                    *x = xt;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved || decrement_sq < 1e-12 {
            return;
        }
    }
}

/// Find an assignment making every constraint ≺ -ε_strict·(1+‖C‖)·I, or
/// report infeasibility with the best margin achieved.
pub fn solve_feasibility(
    vars: &[MatrixVariable],
    constraints: &[AffineLmi],
    eps_strict: f64,
) -> Result<FeasibilityOutcome, LmiError> {
    for v in vars {
        if v.kind == VarKind::Symmetric && v.rows != v.cols {
            return Err(LmiError::BadShape(format!(
                "symmetric variable {} is {}x{}",
                v.name, v.rows, v.cols
            )));
        }
    }
    let mut layouts = Vec::new();
    let mut offset = 0usize;
    for v in vars {
        layouts.push(VarLayout {
            name: v.name.clone(),
            rows: v.rows,
            cols: v.cols,
            kind: v.kind,
            offset,
        });
        offset += v.scalar_count();
    }
    let nx = offset;

    // fold definiteness tags into extra constraints ε·I - V ⪯ 0
    let mut all_lmis: Vec<AffineLmi> = constraints.to_vec();
    for v in vars {
        if v.positive_definite {
            let lmi = AffineLmi::new(
                &format!("{}_pd", v.name),
                Matrix::identity(v.rows, v.rows) * eps_strict,
            )
            .with_term(&v.name, Matrix::identity(v.rows, v.rows) * -0.5, Matrix::identity(v.rows, v.rows));
            all_lmis.push(lmi);
        }
    }

    // internal variable caps bound the feasible region, so the analytic
    // center exists and iterates cannot run off to ill-conditioned
    // extremes; the cap is generous relative to the constraint data
    let cap = 1e7
        * (1.0
            + constraints
                .iter()
                .map(|c| c.constant.norm())
                .fold(0.0f64, f64::max));
    for v in vars {
        match v.kind {
            VarKind::Symmetric => {
                let i = Matrix::identity(v.rows, v.rows);
                all_lmis.push(
                    AffineLmi::new(&format!("{}_cap_hi", v.name), &i * -cap)
                        .with_term(&v.name, &i * 0.5, i.clone()),
                );
                all_lmis.push(
                    AffineLmi::new(&format!("{}_cap_lo", v.name), &i * -cap)
                        .with_term(&v.name, &i * -0.5, i.clone()),
                );
            }
            VarKind::Rectangular => {
                let size = v.rows + v.cols;
                let mut sel_r = Matrix::zeros(size, v.rows);
                sel_r.view_mut((0, 0), (v.rows, v.rows))
                    .copy_from(&Matrix::identity(v.rows, v.rows));
                let mut sel_c = Matrix::zeros(v.cols, size);
                sel_c.view_mut((0, v.rows), (v.cols, v.cols))
                    .copy_from(&Matrix::identity(v.cols, v.cols));
                all_lmis.push(
                    AffineLmi::new(&format!("{}_cap", v.name), Matrix::identity(size, size) * -cap)
                        .with_term(&v.name, sel_r, sel_c),
                );
            }
        }
    }

    let (scaled, _eps_list) = build_constraints(&layouts, &all_lmis, eps_strict)?;
    let m_total: usize = scaled.iter().map(|c| c.size).sum();

    let mut x = vec![0.0f64; nx];
    let eval = |x: &[f64], c: &Constraint| -> Matrix {
        let mut f = c.constant.clone();
        for (k, coeff) in &c.coeffs {
            f += coeff * x[*k];
        }
        f
    };
    let worst_shifted = |x: &[f64]| -> f64 {
        scaled
            .iter()
            .map(|c| jacobi::max_eigenvalue(&eval(x, c)))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut t = worst_shifted(&x) + 1.0;
    let mut mu = 1.0f64;
    let mut total_newton = 0usize;
    let mut margin_trace = Vec::new();
    let finish_feasible = |x: &[f64], iterations: usize| -> Result<FeasibilityOutcome, LmiError> {
        let assignments: BTreeMap<String, Matrix> = layouts
            .iter()
            .map(|l| (l.name.clone(), l.materialize(x)))
            .collect();
        let margin = super::verify_margin(constraints, &assignments)?;
        // definiteness tags re-verified independently as well
        let mut ok = margin < 0.0;
        for v in vars {
            if v.positive_definite {
                let val = assignments.get(&v.name).expect("materialized");
                ok &= jacobi::min_eigenvalue(val) >= 0.25 * eps_strict;
            }
        }
        if ok {
            Ok(FeasibilityOutcome::Feasible(LmiSolution {
                assignments,
                margin,
                solver_iterations: iterations,
            }))
        } else {
            Ok(FeasibilityOutcome::Infeasible {
                best_margin: margin,
                iterations,
            })
        }
    };
    let finish_polished = |x: &[f64], iterations: usize| -> Result<FeasibilityOutcome, LmiError> {
        let mut xp = x.to_vec();
        analytic_center_polish(&scaled, &mut xp, nx);
        match finish_feasible(&xp, iterations)? {
            out @ FeasibilityOutcome::Feasible(_) => Ok(out),
            _ => finish_feasible(x, iterations),
        }
    };

    for _outer in 0..48 {
        // centering steps for the current mu
        for _inner in 0..60 {
            total_newton += 1;
            if total_newton > 2000 {
                break;
            }
            // factorizations S_i = t I - F_i(x)
            let mut sinvs = Vec::with_capacity(scaled.len());
            for c in &scaled {
                let s = Matrix::identity(c.size, c.size) * t - eval(&x, c);
                let chol = nalgebra::linalg::Cholesky::new(s).ok_or_else(|| {
                    LmiError::SolverStall {
                        best_margin: worst_shifted(&x),
                        trace: margin_trace.clone(),
                    }
                })?;
                sinvs.push(chol.inverse());
            }
            // gradient and Hessian over (x, t)
            let dim = nx + 1;
            let mut grad = vec![0.0f64; dim];
            let mut hess = Matrix::zeros(dim, dim);
            grad[nx] = mu;
            for (c, sinv) in scaled.iter().zip(sinvs.iter()) {
                let ws: Vec<(usize, Matrix)> = c
                    .coeffs
                    .iter()
                    .map(|(k, coeff)| (*k, sinv * coeff))
                    .collect();
                for (k, w) in &ws {
                    grad[*k] += w.trace();
                }
                grad[nx] -= sinv.trace();
                for (ia, (k, wk)) in ws.iter().enumerate() {
                    for pair in ws.iter().skip(ia) {
                        let (l, wl) = (pair.0, &pair.1);
                        let mut tr = 0.0;
                        for r in 0..c.size {
                            for cc in 0..c.size {
                                tr += wk[(r, cc)] * wl[(cc, r)];
                            }
                        }
                        hess[(*k, l)] += tr;
                        if *k != l {
                            hess[(l, *k)] += tr;
                        }
                    }
                    // cross term with t: -tr(S⁻¹ A_k S⁻¹)
                    let mut tr_t = 0.0;
                    for r in 0..c.size {
                        for cc in 0..c.size {
                            tr_t += wk[(r, cc)] * sinv[(cc, r)];
                        }
                    }
                    hess[(*k, nx)] -= tr_t;
                    hess[(nx, *k)] -= tr_t;
                }
                let mut tr_tt = 0.0;
                for r in 0..c.size {
                    for cc in 0..c.size {
                        tr_tt += sinv[(r, cc)] * sinv[(cc, r)];
                    }
                }
                hess[(nx, nx)] += tr_tt;
            }

            // damped Newton step with ridge fallback
            let g = Matrix::from_fn(dim, 1, |i, _| -grad[i]);
            let mut step = None;
            let mut ridge = 0.0;
            for _ in 0..6 {
                let h = if ridge > 0.0 {
                    &hess + Matrix::identity(dim, dim) * ridge
                } else {
                    hess.clone()
                };
                if let Some(chol) = nalgebra::linalg::Cholesky::new(h) {
                    step = Some(chol.solve(&g));
                    break;
                }
                ridge = if ridge == 0.0 { 1e-10 * (1.0 + hess.trace().abs()) } else { ridge * 100.0 };
            }
            let Some(step) = step else {
                return Err(LmiError::SolverStall {
                    best_margin: worst_shifted(&x),
                    trace: margin_trace,
                });
            };
            let decrement_sq: f64 = (0..dim).map(|i| -step[(i, 0)] * -grad[i]).sum::<f64>().abs();

            // objective for the line search
            let psi = |x: &[f64], t: f64| -> Option<f64> {
                let mut val = mu * t;
                for c in &scaled {
                    let s = Matrix::identity(c.size, c.size) * t - eval(x, c);
                    let chol = nalgebra::linalg::Cholesky::new(s)?;
                    let ld: f64 = (0..c.size).map(|i| chol.l_dirty()[(i, i)].ln()).sum();
                    val -= 2.0 * ld;
                }
                Some(val)
            };
            let psi0 = psi(&x, t).expect("current iterate is interior");
            let slope: f64 = (0..dim).map(|i| grad[i] * step[(i, 0)]).sum();
            let mut alpha = 1.0f64;
            let mut moved = false;
            for _ in 0..50 {
                let xt: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v + alpha * step[(i, 0)])
                    .collect();
                let tt = t + alpha * step[(nx, 0)];
                if let Some(val) = psi(&xt, tt) {
                    if val <= psi0 + 0.01 * alpha * slope {
                        x = xt;
                        t = tt;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            margin_trace.push(worst_shifted(&x));
            if let Some(last) = margin_trace.last() {
                if *last < -1e-3 * eps_strict {
                    return finish_polished(&x, total_newton);
                }
            }
            if !moved || decrement_sq < 1e-16 * (1.0 + mu * mu) {
                break;
            }
        }
        // gap small enough to certify t* sign?
        let gap = m_total as f64 / mu;
        let margin_now = worst_shifted(&x);
        if margin_now < -1e-3 * eps_strict {
            return finish_polished(&x, total_newton);
        }
        if gap < (0.05 * margin_now.abs()).max(1e-2 * eps_strict) {
            break;
        }
        mu *= 16.0;
    }

    let assignments: BTreeMap<String, Matrix> = layouts
        .iter()
        .map(|l| (l.name.clone(), l.materialize(&x)))
        .collect();
    let best_margin = super::verify_margin(constraints, &assignments)?;
    Ok(FeasibilityOutcome::Infeasible {
        best_margin,
        iterations: total_newton,
    })
}

#[cfg(test)]
mod tests {
    use super::super::gamma_shorthand;
    use super::*;

    #[test]
    fn scalar_negative_variable() {
        // find x < 0
        let vars = [MatrixVariable::symmetric("x", 1, false)];
        let lmi = AffineLmi::new("x_neg", Matrix::zeros(1, 1)).with_term(
            "x",
            Matrix::from_element(1, 1, 0.5),
            Matrix::identity(1, 1),
        );
        let out = solve_feasibility(&vars, &[lmi], 1e-6).unwrap();
        let FeasibilityOutcome::Feasible(sol) = out else {
            panic!("should be feasible");
        };
        assert!(sol.assignments["x"][(0, 0)] < -1e-6 * 0.5);
        assert!(sol.margin < 0.0);
    }

    #[test]
    fn lyapunov_feasibility_stable_a() {
        // AᵀP + PA < 0, P > 0 with A = -I
        let a = Matrix::identity(2, 2) * -1.0;
        let vars = [MatrixVariable::symmetric("P", 2, true)];
        let lmi = AffineLmi::new("lyap", Matrix::zeros(2, 2)).with_term(
            "P",
            Matrix::identity(2, 2),
            a.clone(),
        );
        let out = solve_feasibility(&vars, &[lmi], 1e-6).unwrap();
        let FeasibilityOutcome::Feasible(sol) = out else {
            panic!("should be feasible");
        };
        let p = &sol.assignments["P"];
        // verify with the Γ shorthand directly
        let val = gamma_shorthand(p, &a).unwrap();
        assert!(jacobi::max_eigenvalue(&val) < 0.0);
        assert!(jacobi::min_eigenvalue(p) > 0.0);
    }

    #[test]
    fn unstable_scalar_is_infeasible() {
        // p·(2) < 0 with p > 0 is a contradiction (A = +1)
        let vars = [MatrixVariable::symmetric("p", 1, true)];
        let lmi = AffineLmi::new("lyap", Matrix::zeros(1, 1)).with_term(
            "p",
            Matrix::identity(1, 1),
            Matrix::from_element(1, 1, 1.0),
        );
        let out = solve_feasibility(&vars, &[lmi], 1e-6).unwrap();
        assert!(!out.is_feasible());
        if let FeasibilityOutcome::Infeasible { best_margin, .. } = out {
            assert!(best_margin > -1e-3, "margin should not certify feasibility");
        }
    }

    #[test]
    fn rectangular_variable_coupled_constraint() {
        // find symmetric X > 0 and rectangular Z (2x1) with
        // Γ(X, A) + Γ(Z, C) < 0 for an unstable A: output injection
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.0]);
        let c = Matrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let vars = [
            MatrixVariable::symmetric("X", 2, true),
            MatrixVariable::rectangular("Z", 2, 1),
        ];
        let lmi = AffineLmi::new("inj", Matrix::zeros(2, 2))
            .with_term("X", Matrix::identity(2, 2), a.clone())
            .with_term("Z", Matrix::identity(2, 2), c.clone());
        let out = solve_feasibility(&vars, &[lmi], 1e-6).unwrap();
        let FeasibilityOutcome::Feasible(sol) = out else {
            panic!("output-injection LMI should be feasible");
        };
        let x = &sol.assignments["X"];
        let z = &sol.assignments["Z"];
        let val = gamma_shorthand(x, &a).unwrap() + gamma_shorthand(z, &c).unwrap();
        assert!(jacobi::max_eigenvalue(&val) < 0.0);
    }

    #[test]
    fn congruence_scaling_invariance() {
        // scaling a constraint by a positive scalar must not change
        // feasibility
        let a = Matrix::from_row_slice(2, 2, &[-0.5, 1.0, 0.0, -1.0]);
        for scale in [1.0, 7.5, 120.0] {
            let vars = [MatrixVariable::symmetric("P", 2, true)];
            let lmi = AffineLmi::new("lyap", Matrix::zeros(2, 2)).with_term(
                "P",
                Matrix::identity(2, 2) * scale,
                a.clone(),
            );
            let out = solve_feasibility(&vars, &[lmi], 1e-6).unwrap();
            assert!(out.is_feasible(), "scale {scale} broke feasibility");
        }
    }
}
