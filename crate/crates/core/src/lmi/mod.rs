//! Small-scale semidefinite feasibility with named matrix variables.
//!
//! Constraints are affine symmetric-matrix expressions required to be
//! negative definite; strictness is enforced through a uniform margin
//! ε_strict folded into each constraint. Scalar objectives (the γ bounds
//! of the synthesis LMIs) are minimized by bisection over feasibility
//! calls. Every returned solution is re-verified by an independent
//! symmetric eigensolver before it leaves this module.

pub mod jacobi;
mod scalar;
mod solver;

use crate::numerics::Matrix;
use std::collections::BTreeMap;
use thiserror::Error;

pub use scalar::{minimize_scalar, ScalarMinimum};
pub use solver::solve_feasibility;

#[derive(Debug, Error)]
pub enum LmiError {
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("solver stalled with best margin {best_margin:.3e}; margin trace: {trace:?}")]
    SolverStall { best_margin: f64, trace: Vec<f64> },
    #[error("upper bracket end {hi} is infeasible (margin {margin:.3e})")]
    BracketInfeasible { hi: f64, margin: f64 },
    #[error("feasibility is not monotone over the bracket (feasible at {feasible_at}, infeasible at {infeasible_at})")]
    NonMonotoneDetected { feasible_at: f64, infeasible_at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Symmetric,
    Rectangular,
}

/// A named matrix decision variable.
#[derive(Debug, Clone)]
pub struct MatrixVariable {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub kind: VarKind,
    /// Adds the side constraint V ⪰ ε_strict·I.
    pub positive_definite: bool,
}

impl MatrixVariable {
    pub fn symmetric(name: &str, n: usize, positive_definite: bool) -> Self {
        Self {
            name: name.into(),
            rows: n,
            cols: n,
            kind: VarKind::Symmetric,
            positive_definite,
        }
    }

    pub fn rectangular(name: &str, rows: usize, cols: usize) -> Self {
        Self {
            name: name.into(),
            rows,
            cols,
            kind: VarKind::Rectangular,
            positive_definite: false,
        }
    }

    pub fn scalar_count(&self) -> usize {
        match self.kind {
            VarKind::Symmetric => self.rows * (self.rows + 1) / 2,
            VarKind::Rectangular => self.rows * self.cols,
        }
    }
}

/// One additive term L·V·R (optionally L·Vᵀ·R); the assembled constraint
/// always carries the term together with its transpose, so any symmetric
/// assignment keeps the expression symmetric.
#[derive(Debug, Clone)]
pub struct LmiTerm {
    pub var: String,
    pub left: Matrix,
    pub right: Matrix,
    pub transpose_var: bool,
}

/// Affine symmetric-matrix constraint `constant + Σ sym(L·op(V)·R) ≺ 0`.
#[derive(Debug, Clone)]
pub struct AffineLmi {
    pub label: String,
    pub constant: Matrix,
    pub terms: Vec<LmiTerm>,
}

impl AffineLmi {
    pub fn new(label: &str, constant: Matrix) -> Self {
        debug_assert!(
            (constant.clone() - constant.transpose()).norm() <= 1e-10 * (1.0 + constant.norm()),
            "constant block of {label} is not symmetric"
        );
        let constant = (&constant + constant.transpose()) * 0.5;
        Self {
            label: label.into(),
            constant,
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, var: &str, left: Matrix, right: Matrix) -> Self {
        self.terms.push(LmiTerm {
            var: var.into(),
            left,
            right,
            transpose_var: false,
        });
        self
    }

    pub fn with_transposed_term(mut self, var: &str, left: Matrix, right: Matrix) -> Self {
        self.terms.push(LmiTerm {
            var: var.into(),
            left,
            right,
            transpose_var: true,
        });
        self
    }

    pub fn size(&self) -> usize {
        self.constant.nrows()
    }

    /// Evaluate the constraint at an assignment of the variables.
    pub fn assemble(&self, assignments: &BTreeMap<String, Matrix>) -> Result<Matrix, LmiError> {
        let mut out = self.constant.clone();
        for term in &self.terms {
            let v = assignments
                .get(&term.var)
                .ok_or_else(|| LmiError::BadShape(format!("no assignment for {}", term.var)))?;
            let op_v = if term.transpose_var { v.transpose() } else { v.clone() };
            let m = &term.left * op_v * &term.right;
            if m.nrows() != out.nrows() || m.ncols() != out.ncols() {
                return Err(LmiError::DimensionMismatch(format!(
                    "term on {} assembles to {}x{}, constraint {} is {}x{}",
                    term.var,
                    m.nrows(),
                    m.ncols(),
                    self.label,
                    out.nrows(),
                    out.ncols()
                )));
            }
            out += &m + m.transpose();
        }
        Ok(out)
    }

    /// Plain-text dump of the constraint blocks (debug aid; the CLI
    /// exposes it behind --verbose).
    pub fn debug_dump(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "constraint {} ({}x{}):", self.label, self.size(), self.size());
        let _ = writeln!(s, "  constant = {:?}", self.constant.as_slice());
        for t in &self.terms {
            let _ = writeln!(
                s,
                "  + sym(L·{}{}·R), L = {:?}, R = {:?}",
                t.var,
                if t.transpose_var { "ᵀ" } else { "" },
                t.left.as_slice(),
                t.right.as_slice()
            );
        }
        s
    }
}

/// Feasible point with its independently re-verified margin.
#[derive(Debug, Clone)]
pub struct LmiSolution {
    pub assignments: BTreeMap<String, Matrix>,
    /// Most-positive eigenvalue over all constraints; negative when valid.
    pub margin: f64,
    pub solver_iterations: usize,
}

#[derive(Debug, Clone)]
pub enum FeasibilityOutcome {
    Feasible(LmiSolution),
    Infeasible {
        best_margin: f64,
        iterations: usize,
    },
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible(_))
    }
}

/// Γ(A, B) := BᵀAᵀ + AB, symmetrized exactly.
pub fn gamma_shorthand(a: &Matrix, b: &Matrix) -> Result<Matrix, LmiError> {
    if a.ncols() != b.nrows() || a.nrows() != b.ncols() {
        return Err(LmiError::DimensionMismatch(format!(
            "gamma_shorthand: A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let p = a * b;
    Ok(&p + p.transpose())
}

/// Worst (most positive) eigenvalue over all constraints at an
/// assignment, measured with the independent Jacobi eigensolver.
pub fn verify_margin(
    constraints: &[AffineLmi],
    assignments: &BTreeMap<String, Matrix>,
) -> Result<f64, LmiError> {
    let mut worst = f64::NEG_INFINITY;
    for lmi in constraints {
        let val = lmi.assemble(assignments)?;
        worst = worst.max(jacobi::max_eigenvalue(&val));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_shorthand_identity() {
        let i = Matrix::identity(3, 3);
        let g = gamma_shorthand(&i, &i).unwrap();
        assert!((g - Matrix::identity(3, 3) * 2.0).norm() < 1e-15);
    }

    #[test]
    fn gamma_shorthand_lyapunov_form() {
        // Γ(X, A) with symmetric X equals AᵀX + XA
        let x = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -3.0, -0.4]);
        let g = gamma_shorthand(&x, &a).unwrap();
        let expect = a.transpose() * &x + &x * &a;
        assert!((g - expect).norm() < 1e-14);
    }

    #[test]
    fn gamma_shorthand_exactly_symmetric() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let a = Matrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let b = Matrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let g = gamma_shorthand(&a, &b).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(g[(i, j)], g[(j, i)], "not bit-exact symmetric");
                }
            }
        }
    }

    #[test]
    fn gamma_shorthand_rejects_bad_dims() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 2);
        assert!(gamma_shorthand(&a, &b).is_err());
    }
}
