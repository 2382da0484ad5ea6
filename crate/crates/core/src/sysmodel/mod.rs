//! State-space and transfer-function system models, interconnection
//! algebra, stability/norm analysis and the parity-interlacing check.

mod minreal;
mod norms;
mod pip;
mod tf;
mod zeros;

use crate::numerics::{self, Matrix, NumericsError};
use num_complex::Complex64;
use thiserror::Error;

pub use minreal::minimal_realization;
pub use norms::{frequency_grid, hinf_norm, max_sv_on_grid};
pub use pip::{check_pip, ExtendedReal, PipReport};
pub use tf::{
    poly_add, poly_eval, poly_from_real_roots, poly_mul, poly_mul_complex_pair, poly_trim,
    tf_to_ss, RationalFunction, TransferMatrix,
};
pub use zeros::transmission_zeros;

#[derive(Debug, Error)]
pub enum SysError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("algebraic loop: I - D22·D_K is singular")]
    AlgebraicLoop,
    #[error("controller must be strictly proper (D_K = 0)")]
    NonStrictlyProperController,
    #[error("system is not stable; H-infinity norm undefined")]
    UnstableSystem,
    #[error("transfer function entry ({0},{1}) is improper")]
    ImproperTransfer(usize, usize),
    #[error("Rosenbrock pencil is singular for every shift; zeros undefined")]
    DegeneratePencil,
    #[error("frequency response is singular at the requested point")]
    SingularAtFrequency,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Continuous-time state-space system ẋ = Ax + Bu, y = Cx + Du.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

impl StateSpace {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self, SysError> {
        if a.nrows() != a.ncols() {
            return Err(SysError::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        if b.nrows() != n {
            return Err(SysError::DimensionMismatch(format!(
                "B has {} rows, expected {}",
                b.nrows(),
                n
            )));
        }
        if c.ncols() != n {
            return Err(SysError::DimensionMismatch(format!(
                "C has {} cols, expected {}",
                c.ncols(),
                n
            )));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(SysError::DimensionMismatch(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Pure gain system y = D·u with no states.
    pub fn static_gain(d: Matrix) -> Self {
        let (p, m) = (d.nrows(), d.ncols());
        Self {
            a: Matrix::zeros(0, 0),
            b: Matrix::zeros(0, m),
            c: Matrix::zeros(p, 0),
            d,
        }
    }

    /// Zero system of the given I/O shape.
    pub fn zero(p: usize, m: usize) -> Self {
        Self::static_gain(Matrix::zeros(p, m))
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn ninputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn noutputs(&self) -> usize {
        self.c.nrows()
    }

    /// Frequency response D + C(sI - A)⁻¹B at one complex point.
    pub fn transfer_at(&self, s: Complex64) -> Result<nalgebra::DMatrix<Complex64>, SysError> {
        let n = self.order();
        let dc = self.d.map(|x| Complex64::new(x, 0.0));
        if n == 0 {
            return Ok(dc);
        }
        let resolvent = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - Complex64::new(self.a[(i, j)], 0.0)
        });
        let bc = self.b.map(|x| Complex64::new(x, 0.0));
        let sol = resolvent
            .lu()
            .solve(&bc)
            .ok_or(SysError::SingularAtFrequency)?;
        let cc = self.c.map(|x| Complex64::new(x, 0.0));
        Ok(cc * sol + dc)
    }

    /// True iff the spectral abscissa of A is below `-margin`.
    pub fn is_stable(&self, margin: f64) -> Result<bool, SysError> {
        Ok(numerics::is_hurwitz(&self.a, margin)?)
    }

    pub fn spectral_abscissa(&self) -> Result<f64, SysError> {
        Ok(numerics::spectral_abscissa(&self.a)?)
    }
}

/// Partitioned plant separating disturbance/performance channels (w→z)
/// from control/measurement channels (u→y). The (2,2) feedthrough block
/// is structurally zero.
#[derive(Debug, Clone)]
pub struct GeneralizedPlant {
    pub ss: StateSpace,
    pub m1: usize,
    pub m2: usize,
    pub p1: usize,
    pub p2: usize,
}

impl GeneralizedPlant {
    pub fn new(ss: StateSpace, m1: usize, m2: usize, p1: usize, p2: usize) -> Result<Self, SysError> {
        if m1 + m2 != ss.ninputs() {
            return Err(SysError::DimensionMismatch(format!(
                "m1+m2 = {} but plant has {} inputs",
                m1 + m2,
                ss.ninputs()
            )));
        }
        if p1 + p2 != ss.noutputs() {
            return Err(SysError::DimensionMismatch(format!(
                "p1+p2 = {} but plant has {} outputs",
                p1 + p2,
                ss.noutputs()
            )));
        }
        let d22 = ss.d.view((p1, m1), (p2, m2));
        if d22.iter().any(|x| *x != 0.0) {
            return Err(SysError::DimensionMismatch(
                "D22 block must be zero".into(),
            ));
        }
        Ok(Self { ss, m1, m2, p1, p2 })
    }

    /// Assemble from individual blocks with D22 = 0.
    #[allow(clippy::too_many_arguments)]
    pub fn from_blocks(
        a: Matrix,
        b1: Matrix,
        b2: Matrix,
        c1: Matrix,
        c2: Matrix,
        d11: Matrix,
        d12: Matrix,
        d21: Matrix,
    ) -> Result<Self, SysError> {
        let n = a.nrows();
        let (m1, m2) = (b1.ncols(), b2.ncols());
        let (p1, p2) = (c1.nrows(), c2.nrows());
        let mut b = Matrix::zeros(n, m1 + m2);
        b.view_mut((0, 0), (n, m1)).copy_from(&b1);
        b.view_mut((0, m1), (n, m2)).copy_from(&b2);
        let mut c = Matrix::zeros(p1 + p2, n);
        c.view_mut((0, 0), (p1, n)).copy_from(&c1);
        c.view_mut((p1, 0), (p2, n)).copy_from(&c2);
        let mut d = Matrix::zeros(p1 + p2, m1 + m2);
        d.view_mut((0, 0), (p1, m1)).copy_from(&d11);
        d.view_mut((0, m1), (p1, m2)).copy_from(&d12);
        d.view_mut((p1, 0), (p2, m1)).copy_from(&d21);
        let ss = StateSpace::new(a, b, c, d)?;
        Self::new(ss, m1, m2, p1, p2)
    }

    pub fn order(&self) -> usize {
        self.ss.order()
    }

    pub fn a(&self) -> Matrix {
        self.ss.a.clone()
    }
    pub fn b1(&self) -> Matrix {
        self.ss.b.view((0, 0), (self.order(), self.m1)).into_owned()
    }
    pub fn b2(&self) -> Matrix {
        self.ss.b.view((0, self.m1), (self.order(), self.m2)).into_owned()
    }
    pub fn c1(&self) -> Matrix {
        self.ss.c.view((0, 0), (self.p1, self.order())).into_owned()
    }
    pub fn c2(&self) -> Matrix {
        self.ss.c.view((self.p1, 0), (self.p2, self.order())).into_owned()
    }
    pub fn d11(&self) -> Matrix {
        self.ss.d.view((0, 0), (self.p1, self.m1)).into_owned()
    }
    pub fn d12(&self) -> Matrix {
        self.ss.d.view((0, self.m1), (self.p1, self.m2)).into_owned()
    }
    pub fn d21(&self) -> Matrix {
        self.ss.d.view((self.p1, 0), (self.p2, self.m1)).into_owned()
    }
}

/// Lower linear fractional transformation F_l(G, K): the closed loop
/// w → z once the controller K closes the (y, u) channels.
pub fn lft_lower(g: &GeneralizedPlant, k: &StateSpace) -> Result<StateSpace, SysError> {
    if k.ninputs() != g.p2 || k.noutputs() != g.m2 {
        return Err(SysError::DimensionMismatch(format!(
            "controller is {}x{}, plant expects {}x{}",
            k.noutputs(),
            k.ninputs(),
            g.m2,
            g.p2
        )));
    }
    let (n, nk) = (g.order(), k.order());
    let (a, b1, b2) = (g.a(), g.b1(), g.b2());
    let (c1, c2) = (g.c1(), g.c2());
    let (d11, d12, d21) = (g.d11(), g.d12(), g.d21());
    let d22 = Matrix::zeros(g.p2, g.m2);

    // u = Φ (D_K C2 x + C_K x_K + D_K D21 w), Φ = (I - D_K D22)⁻¹
    let phi_inv = Matrix::identity(g.m2, g.m2) - &k.d * &d22;
    let phi = phi_inv.clone().try_inverse().ok_or(SysError::AlgebraicLoop)?;
    let u_x = &phi * &k.d * &c2;
    let u_xk = &phi * &k.c;
    let u_w = &phi * &k.d * &d21;

    let mut a_cl = Matrix::zeros(n + nk, n + nk);
    a_cl.view_mut((0, 0), (n, n)).copy_from(&(&a + &b2 * &u_x));
    a_cl.view_mut((0, n), (n, nk)).copy_from(&(&b2 * &u_xk));
    // y2 = C2 x + D21 w + D22 u feeds the controller state
    let y_x = &c2 + &d22 * &u_x;
    let y_xk = &d22 * &u_xk;
    let y_w = &d21 + &d22 * &u_w;
    a_cl.view_mut((n, 0), (nk, n)).copy_from(&(&k.b * &y_x));
    a_cl.view_mut((n, n), (nk, nk)).copy_from(&(&k.a + &k.b * y_xk));

    let mut b_cl = Matrix::zeros(n + nk, g.m1);
    b_cl.view_mut((0, 0), (n, g.m1)).copy_from(&(&b1 + &b2 * &u_w));
    b_cl.view_mut((n, 0), (nk, g.m1)).copy_from(&(&k.b * y_w));

    let mut c_cl = Matrix::zeros(g.p1, n + nk);
    c_cl.view_mut((0, 0), (g.p1, n)).copy_from(&(&c1 + &d12 * &u_x));
    c_cl.view_mut((0, n), (g.p1, nk)).copy_from(&(&d12 * &u_xk));

    let d_cl = &d11 + &d12 * &u_w;
    StateSpace::new(a_cl, b_cl, c_cl, d_cl)
}

/// Closed-loop state matrix [[A, B2·C_K],[B_K·C2, A_K]] for a strictly
/// proper controller.
pub fn feedback_a_matrix(g: &GeneralizedPlant, k: &StateSpace) -> Result<Matrix, SysError> {
    if k.d.iter().any(|x| *x != 0.0) {
        return Err(SysError::NonStrictlyProperController);
    }
    if k.ninputs() != g.p2 || k.noutputs() != g.m2 {
        return Err(SysError::DimensionMismatch(
            "controller I/O does not match plant (u, y) channels".into(),
        ));
    }
    let (n, nk) = (g.order(), k.order());
    let mut a_cl = Matrix::zeros(n + nk, n + nk);
    a_cl.view_mut((0, 0), (n, n)).copy_from(&g.a());
    a_cl.view_mut((0, n), (n, nk)).copy_from(&(g.b2() * &k.c));
    a_cl.view_mut((n, 0), (nk, n)).copy_from(&(&k.b * g.c2()));
    a_cl.view_mut((n, n), (nk, nk)).copy_from(&k.a);
    Ok(a_cl)
}

/// One violated standard synthesis assumption.
#[derive(Debug, Clone, PartialEq)]
pub enum AssumptionViolation {
    /// A.1: an unstable mode is uncontrollable through B2.
    NotStabilizable { eigenvalue: Complex64 },
    /// A.1: an unstable mode is unobservable through C2.
    NotDetectable { eigenvalue: Complex64 },
    /// A.2: the (A, B2, C1, D12) pencil loses column rank in the CRHP.
    PerformanceRankDeficient { at: Complex64 },
    /// A.2 regularity: D12 is column-rank deficient.
    D12RankDeficient,
    /// A.3: the (A, B1, C2, D21) pencil loses row rank in the CRHP.
    DisturbanceRankDeficient { at: Complex64 },
    /// A.3 regularity: D21 is row-rank deficient.
    D21RankDeficient,
    /// A.4: A has an eigenvalue on the imaginary axis.
    ImaginaryAxisEigenvalue { eigenvalue: Complex64 },
}

impl std::fmt::Display for AssumptionViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotStabilizable { eigenvalue } => {
                write!(f, "A.1: mode at {eigenvalue} is not stabilizable through B2")
            }
            Self::NotDetectable { eigenvalue } => {
                write!(f, "A.1: mode at {eigenvalue} is not detectable through C2")
            }
            Self::PerformanceRankDeficient { at } => {
                write!(f, "A.2: [A-λI B2; C1 D12] column-rank deficient at λ = {at}")
            }
            Self::D12RankDeficient => write!(f, "A.2: D12 is not full column rank"),
            Self::DisturbanceRankDeficient { at } => {
                write!(f, "A.3: [A-λI B1; C2 D21] row-rank deficient at λ = {at}")
            }
            Self::D21RankDeficient => write!(f, "A.3: D21 is not full row rank"),
            Self::ImaginaryAxisEigenvalue { eigenvalue } => {
                write!(f, "A.4: eigenvalue {eigenvalue} on the imaginary axis")
            }
        }
    }
}

/// Smallest singular value of the complex matrix [A - λI, B].
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
    let svd = pencil.svd(false, false);
    svd.singular_values.iter().fold(f64::INFINITY, |m, s| m.min(*s))
}

/// Smallest singular value of the complex pencil [[A-λI, B],[C, D]].
fn pencil_sigma_min(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix, lambda: Complex64) -> f64 {
    let n = a.nrows();
    let (p, m) = (c.nrows(), b.ncols());
    let pencil = nalgebra::DMatrix::from_fn(n + p, n + m, |i, j| {
        let val = match (i < n, j < n) {
            (true, true) => {
                let diag = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
                return Complex64::new(a[(i, j)], 0.0) - diag;
            }
            (true, false) => b[(i, j - n)],
            (false, true) => c[(i - n, j)],
            (false, false) => d[(i - n, j - n)],
        };
        Complex64::new(val, 0.0)
    });
    let svd = pencil.svd(false, false);
    svd.singular_values.iter().fold(f64::INFINITY, |mn, s| mn.min(*s))
}

/// Check the four standard synthesis assumptions; violations are
/// returned, never thrown.
pub fn validate_assumptions(
    g: &GeneralizedPlant,
    tol: f64,
) -> Result<Vec<AssumptionViolation>, SysError> {
    let mut out = Vec::new();
    let a = g.a();
    let n = g.order();
    let eig = numerics::eigenvalues(&a)?;
    let scale = a.norm() + 1.0;

    // A.4 first: imaginary-axis eigenvalues
    for l in &eig {
        if l.re.abs() <= tol * (1.0 + l.norm()) {
            out.push(AssumptionViolation::ImaginaryAxisEigenvalue { eigenvalue: *l });
        }
    }

    // A.1 PBH tests at unstable eigenvalues
    let b2 = g.b2();
    let c2 = g.c2();
    for l in &eig {
        if l.re >= -tol * (1.0 + l.norm()) {
            if pbh_sigma_min(&a, &b2, *l) <= tol * scale {
                out.push(AssumptionViolation::NotStabilizable { eigenvalue: *l });
            }
            if pbh_sigma_min(&a.transpose(), &c2.transpose(), l.conj()) <= tol * scale {
                out.push(AssumptionViolation::NotDetectable { eigenvalue: *l });
            }
        }
    }

    // A.2: regularity of D12, then pencil rank at unstable invariant zeros
    // (vacuous without a performance channel)
    let (c1, d12) = (g.c1(), g.d12());
    if g.m2 > 0 && g.p1 > 0 {
        let (_, sv, _) = numerics::svd(&d12)?;
        let smax = sv.first().copied().unwrap_or(0.0);
        if sv.len() < g.m2 || sv[g.m2 - 1] <= tol * (1.0 + smax) {
            out.push(AssumptionViolation::D12RankDeficient);
        }
    }
    if g.p1 > 0 {
        let sub12 = StateSpace::new(a.clone(), b2.clone(), c1.clone(), d12.clone())?;
        if let Ok(zeros) = transmission_zeros(&sub12) {
            for z in zeros {
                if z.re >= -tol * (1.0 + z.norm())
                    && pencil_sigma_min(&a, &b2, &c1, &d12, z) <= tol * scale
                {
                    out.push(AssumptionViolation::PerformanceRankDeficient { at: z });
                }
            }
        }
    }

    // A.3: dual conditions on (A, B1, C2, D21) (vacuous without a
    // disturbance channel)
    let (b1, d21) = (g.b1(), g.d21());
    if g.p2 > 0 && g.m1 > 0 {
        let (_, sv, _) = numerics::svd(&d21)?;
        let smax = sv.first().copied().unwrap_or(0.0);
        if sv.len() < g.p2 || sv[g.p2 - 1] <= tol * (1.0 + smax) {
            out.push(AssumptionViolation::D21RankDeficient);
        }
    }
    if g.m1 > 0 {
        let sub21 = StateSpace::new(a.clone(), b1.clone(), c2.clone(), d21.clone())?;
        if let Ok(zeros) = transmission_zeros(&sub21) {
            for z in zeros {
                if z.re >= -tol * (1.0 + z.norm()) {
                    // row rank of the pencil = column rank of its transpose
                    let at = a.transpose();
                    let bt = c2.transpose();
                    let ct = b1.transpose();
                    let dt = d21.transpose();
                    if pencil_sigma_min(&at, &bt, &ct, &dt, z.conj()) <= tol * scale {
                        out.push(AssumptionViolation::DisturbanceRankDeficient { at: z });
                    }
                }
            }
        }
    }

    let _ = n;
    Ok(out)
}
