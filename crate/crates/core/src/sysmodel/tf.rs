//! Rational transfer matrices and their state-space realization.
//!
//! Polynomials are coefficient lists in descending powers of s.

use super::{minimal_realization, StateSpace, SysError};
use crate::numerics::Matrix;
use num_complex::Complex64;

/// Strip (exactly) zero leading coefficients, keeping at least one entry.
pub fn poly_trim(coeffs: &[f64]) -> Vec<f64> {
    let first = coeffs.iter().position(|c| *c != 0.0).unwrap_or(coeffs.len() - 1);
    coeffs[first.min(coeffs.len() - 1)..].to_vec()
}

pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, x) in a.iter().rev().enumerate() {
        out[n - 1 - i] += x;
    }
    for (i, y) in b.iter().rev().enumerate() {
        out[n - 1 - i] += y;
    }
    out
}

/// Monic polynomial with the given real roots.
pub fn poly_from_real_roots(roots: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    for r in roots {
        out = poly_mul(&out, &[1.0, -r]);
    }
    out
}

/// Multiply in the real quadratic (s - (re+j·im))(s - (re-j·im)).
pub fn poly_mul_complex_pair(poly: &[f64], re: f64, im: f64) -> Vec<f64> {
    poly_mul(poly, &[1.0, -2.0 * re, re * re + im * im])
}

pub fn poly_eval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
}

/// One proper rational entry num(s)/den(s), descending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl RationalFunction {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self, SysError> {
        let den = poly_trim(&den);
        if den.iter().all(|c| *c == 0.0) {
            return Err(SysError::DimensionMismatch(
                "rational function has zero denominator".into(),
            ));
        }
        let num = poly_trim(&num);
        Ok(Self { num, den })
    }

    pub fn constant(gain: f64) -> Self {
        Self { num: vec![gain], den: vec![1.0] }
    }

    pub fn num_degree(&self) -> usize {
        if self.num.iter().all(|c| *c == 0.0) {
            0
        } else {
            self.num.len() - 1
        }
    }

    pub fn den_degree(&self) -> usize {
        self.den.len() - 1
    }

    pub fn is_proper(&self) -> bool {
        self.num.iter().all(|c| *c == 0.0) || self.num.len() <= self.den.len()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly_eval(&self.num, s) / poly_eval(&self.den, s)
    }

    /// Controllable-canonical realization of this entry.
    fn realize(&self) -> (Matrix, Matrix, Matrix, f64) {
        let mut den = self.den.clone();
        let lead = den[0];
        for c in den.iter_mut() {
            *c /= lead;
        }
        let num: Vec<f64> = self.num.iter().map(|c| c / lead).collect();
        let n = den.len() - 1;
        if n == 0 {
            return (
                Matrix::zeros(0, 0),
                Matrix::zeros(0, 1),
                Matrix::zeros(1, 0),
                num.first().copied().unwrap_or(0.0),
            );
        }
        // feedthrough + strictly proper remainder
        let (d, num_sp) = if num.len() == den.len() {
            let d = num[0];
            let rem: Vec<f64> = num
                .iter()
                .zip(den.iter())
                .skip(1)
                .map(|(nc, dc)| nc - d * dc)
                .collect();
            (d, rem)
        } else {
            let mut rem = vec![0.0; n - num.len()];
            rem.extend_from_slice(&num);
            (0.0, rem)
        };
        let mut a = Matrix::zeros(n, n);
        for j in 0..n {
            a[(0, j)] = -den[j + 1];
        }
        for i in 1..n {
            a[(i, i - 1)] = 1.0;
        }
        let mut b = Matrix::zeros(n, 1);
        b[(0, 0)] = 1.0;
        let c = Matrix::from_fn(1, n, |_, j| num_sp[j]);
        (a, b, c, d)
    }
}

/// A p x m grid of proper rational entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    entries: Vec<Vec<RationalFunction>>,
}

impl TransferMatrix {
    pub fn new(entries: Vec<Vec<RationalFunction>>) -> Result<Self, SysError> {
        if entries.is_empty() || entries[0].is_empty() {
            return Err(SysError::DimensionMismatch("empty transfer matrix".into()));
        }
        let m = entries[0].len();
        if entries.iter().any(|row| row.len() != m) {
            return Err(SysError::DimensionMismatch(
                "ragged transfer matrix rows".into(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn siso(rf: RationalFunction) -> Self {
        Self { entries: vec![vec![rf]] }
    }

    pub fn noutputs(&self) -> usize {
        self.entries.len()
    }

    pub fn ninputs(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i][j]
    }

    pub fn is_proper(&self) -> bool {
        self.entries.iter().flatten().all(|rf| rf.is_proper())
    }

    pub fn eval(&self, s: Complex64) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.noutputs(), self.ninputs(), |i, j| {
            self.entries[i][j].eval(s)
        })
    }
}

/// Minimal state-space realization of a proper transfer matrix.
///
/// Each entry is realized in controllable canonical form; the stacked
/// system is then reduced by the staircase minimal realization.
pub fn tf_to_ss(t: &TransferMatrix) -> Result<StateSpace, SysError> {
    let (p, m) = (t.noutputs(), t.ninputs());
    for i in 0..p {
        for j in 0..m {
            if !t.entry(i, j).is_proper() {
                return Err(SysError::ImproperTransfer(i, j));
            }
        }
    }
    let mut total_states = 0;
    let mut pieces = Vec::new();
    for i in 0..p {
        for j in 0..m {
            let (ae, be, ce, de) = t.entry(i, j).realize();
            total_states += ae.nrows();
            pieces.push((i, j, ae, be, ce, de));
        }
    }
    let mut a = Matrix::zeros(total_states, total_states);
    let mut b = Matrix::zeros(total_states, m);
    let mut c = Matrix::zeros(p, total_states);
    let mut d = Matrix::zeros(p, m);
    let mut offset = 0;
    for (i, j, ae, be, ce, de) in pieces {
        let ne = ae.nrows();
        a.view_mut((offset, offset), (ne, ne)).copy_from(&ae);
        b.view_mut((offset, j), (ne, 1)).copy_from(&be);
        c.view_mut((i, offset), (1, ne)).copy_from(&ce);
        d[(i, j)] = de;
        offset += ne;
    }
    let raw = StateSpace::new(a, b, c, d)?;
    Ok(minimal_realization(&raw, 1e-8))
}
