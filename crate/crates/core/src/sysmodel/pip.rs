//! Parity interlacing property: a stable stabilizing controller exists
//! iff the plant has an even number of real nonnegative poles between
//! every pair of its real nonnegative blocking zeros, the point at
//! infinity included.

use super::{minimal_realization, transmission_zeros, StateSpace, SysError};
use crate::numerics;
use num_complex::Complex64;
use serde::Serialize;

/// A point on the extended nonnegative real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Finite(x) => write!(f, "{x}"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipReport {
    pub real_nonneg_zeros: Vec<ExtendedReal>,
    pub real_nonneg_poles: Vec<f64>,
    pub satisfied: bool,
    pub violating_pair: Option<(ExtendedReal, ExtendedReal)>,
}

fn real_nonneg_filter(values: &[Complex64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = values
        .iter()
        .filter(|v| v.im.abs() <= tol * (1.0 + v.re.abs()) && v.re >= -tol)
        .map(|v| v.re.max(0.0))
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

fn numerical_rank(m: &nalgebra::DMatrix<Complex64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |a, b| a.max(*b));
    sv.iter().filter(|s| **s > 1e-9 * (1.0 + smax)).count()
}

/// Check the parity interlacing property on the extended positive real
/// axis. Poles/zeros within `tol` of the real axis count as real.
pub fn check_pip(s: &StateSpace, tol: f64) -> Result<PipReport, SysError> {
    let min = minimal_realization(s, 1e-8);
    let poles = real_nonneg_filter(&numerics::eigenvalues(&min.a)?, tol);
    let finite_zeros = real_nonneg_filter(&transmission_zeros(&min)?, tol);

    // zero at infinity: the feedthrough loses rank against the normal rank
    let normal_rank = {
        let rho = 1.0 + min.a.norm();
        let probes = [1.37 * rho, 2.71 * rho];
        let mut r = 0usize;
        for p in probes {
            if let Ok(g) = min.transfer_at(Complex64::new(p, 0.0)) {
                r = r.max(numerical_rank(&g));
            }
        }
        r
    };
    let d_rank = {
        let dc = min.d.map(|x| Complex64::new(x, 0.0));
        numerical_rank(&dc)
    };

    let mut zeros: Vec<ExtendedReal> = finite_zeros.iter().map(|z| ExtendedReal::Finite(*z)).collect();
    if d_rank < normal_rank {
        zeros.push(ExtendedReal::Infinity);
    }

    let mut satisfied = true;
    let mut violating_pair = None;
    for pair in zeros.windows(2) {
        let lo = match pair[0] {
            ExtendedReal::Finite(x) => x,
            ExtendedReal::Infinity => continue,
        };
        let buffer = tol * (1.0 + lo.abs());
        let count = match pair[1] {
            ExtendedReal::Finite(hi) => poles
                .iter()
                .filter(|p| **p > lo + buffer && **p < hi - tol * (1.0 + hi.abs()))
                .count(),
            ExtendedReal::Infinity => poles.iter().filter(|p| **p > lo + buffer).count(),
        };
        if count % 2 != 0 {
            satisfied = false;
            violating_pair = Some((pair[0], pair[1]));
            break;
        }
    }

    Ok(PipReport {
        real_nonneg_zeros: zeros,
        real_nonneg_poles: poles,
        satisfied,
        violating_pair,
    })
}
