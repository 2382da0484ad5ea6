//! Staircase-based minimal realization.
//!
//! Orthogonal staircase transforms isolate the controllable subspace
//! (then, by duality, the observable one) and truncate the rest. Works
//! for unstable systems, unlike Gramian-based balancing.

use super::StateSpace;
use crate::numerics::Matrix;

/// Controllable part of (A, B); C is carried along. Returns (A, B, C)
/// restricted to the controllable subspace.
fn controllable_part(a: &Matrix, b: &Matrix, c: &Matrix, tol: f64) -> (Matrix, Matrix, Matrix) {
    let n = a.nrows();
    if n == 0 {
        return (a.clone(), b.clone(), c.clone());
    }
    let scale = a.norm() + b.norm() + 1.0;
    let thresh = tol * scale;
    let mut at = a.clone();
    let mut bt = b.clone();
    let mut u = Matrix::identity(n, n);
    let mut nc = 0usize;
    let mut prev_lo = 0usize;
    loop {
        if nc == n {
            break;
        }
        let rem = n - nc;
        // input block feeding the not-yet-confirmed states
        let blk = if nc == 0 {
            bt.rows(0, n).into_owned()
        } else {
            at.view((nc, prev_lo), (rem, nc - prev_lo)).into_owned()
        };
        // full orthogonal basis ordered by singular value, via blk·blkᵀ
        let gram = &blk * blk.transpose();
        let se = gram.symmetric_eigen();
        let mut idx: Vec<usize> = (0..rem).collect();
        idx.sort_by(|&i, &j| se.eigenvalues[j].partial_cmp(&se.eigenvalues[i]).unwrap());
        let w = Matrix::from_fn(rem, rem, |r, cc| se.eigenvectors[(r, idx[cc])]);
        let rank = idx
            .iter()
            .take_while(|&&i| se.eigenvalues[i].max(0.0).sqrt() > thresh)
            .count();
        if rank == 0 {
            break;
        }
        // rotate the remaining states
        let rows = at.view((nc, 0), (rem, n)).into_owned();
        at.view_mut((nc, 0), (rem, n)).copy_from(&(w.transpose() * rows));
        let cols = at.view((0, nc), (n, rem)).into_owned();
        at.view_mut((0, nc), (n, rem)).copy_from(&(cols * &w));
        let brows = bt.view((nc, 0), (rem, b.ncols())).into_owned();
        bt.view_mut((nc, 0), (rem, b.ncols()))
            .copy_from(&(w.transpose() * brows));
        let ucols = u.view((0, nc), (n, rem)).into_owned();
        u.view_mut((0, nc), (n, rem)).copy_from(&(ucols * &w));
        prev_lo = nc;
        nc += rank;
    }
    let ct = c * &u;
    (
        at.view((0, 0), (nc, nc)).into_owned(),
        bt.view((0, 0), (nc, b.ncols())).into_owned(),
        ct.view((0, 0), (c.nrows(), nc)).into_owned(),
    )
}

/// Orthogonal-projection minimal realization with truncation threshold
/// `tol` (relative to the system's norms). The transfer function is
/// preserved; the order never grows.
pub fn minimal_realization(s: &StateSpace, tol: f64) -> StateSpace {
    let (ac, bc, cc) = controllable_part(&s.a, &s.b, &s.c, tol);
    // observable part by duality
    let (ao_t, co_t, bo_t) = controllable_part(&ac.transpose(), &cc.transpose(), &bc.transpose(), tol);
    StateSpace {
        a: ao_t.transpose(),
        b: bo_t.transpose(),
        c: co_t.transpose(),
        d: s.d.clone(),
    }
}
