//! Benchmark plant data.

use crate::numerics::Matrix;
use crate::sysmodel::{
    poly_from_real_roots, poly_mul, poly_mul_complex_pair, GeneralizedPlant, RationalFunction,
    StateSpace, SysError, TransferMatrix,
};

/// Two-output, one-input plant with common unstable zeros {1, 5} and
/// unstable poles {alpha, 20}; strongly stabilizable iff alpha > 5.
pub fn g1_plant(alpha: f64) -> TransferMatrix {
    let den = poly_mul(
        &poly_mul_complex_pair(&[1.0], -2.0, 1.0),
        &poly_from_real_roots(&[alpha, 20.0]),
    );
    let num1 = poly_from_real_roots(&[-5.0, 1.0, 5.0]);
    let num2 = poly_from_real_roots(&[-1.0, 1.0, 5.0]);
    TransferMatrix::new(vec![
        vec![RationalFunction::new(num1, den.clone()).expect("valid rational")],
        vec![RationalFunction::new(num2, den).expect("valid rational")],
    ])
    .expect("2x1 grid")
}

/// Companion plant with complex zeros 2 ± j·alpha and unstable poles
/// {1, 5}; the extended nonnegative real axis carries no zero pair, so
/// the parity condition holds for every alpha > 0.
pub fn g2_plant(alpha: f64) -> TransferMatrix {
    let den = poly_mul(
        &poly_mul_complex_pair(&[1.0], -2.0, 1.0),
        &poly_from_real_roots(&[1.0, 5.0]),
    );
    let zero_pair = poly_mul_complex_pair(&[1.0], 2.0, alpha);
    let num1 = poly_mul(&[1.0, 1.0], &zero_pair);
    let num2 = poly_mul(&[1.0, 5.0], &zero_pair);
    TransferMatrix::new(vec![
        vec![RationalFunction::new(num1, den.clone()).expect("valid rational")],
        vec![RationalFunction::new(num2, den).expect("valid rational")],
    ])
    .expect("2x1 grid")
}

/// Two-state generalized plant from the stable-controller literature;
/// the minimal stable-controller level is about 1.3696.
#[allow(clippy::approx_constant)] // 0.7071 is the reference data, verbatim
pub fn lee_soh_plant() -> GeneralizedPlant {
    let a = Matrix::from_row_slice(2, 2, &[-2.0, 1.7321, 1.7321, 0.0]);
    let b1 = Matrix::from_row_slice(2, 2, &[0.1, -0.1, -0.5, 0.5]);
    let b2 = Matrix::from_row_slice(2, 1, &[1.0, 0.0]);
    let c1 = Matrix::from_row_slice(2, 2, &[0.2, -1.0, 0.0, 0.0]);
    let c2 = Matrix::from_row_slice(1, 2, &[10.0, 11.5470]);
    let d11 = Matrix::zeros(2, 2);
    let d12 = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let d21 = Matrix::from_row_slice(1, 2, &[0.7071, 0.7071]);
    GeneralizedPlant::from_blocks(a, b1, b2, c1, c2, d11, d12, d21).expect("consistent blocks")
}

/// Eighth-order benchmark plant
///
///   z1 = g_z(s)·(w1 + u),  z2 = β·u,  y = w2 + g_y(s)·(w1 + u)
///
/// with the shared denominator s⁸ + 0.161s⁷ + 6s⁶ + 0.582s⁵ + 9.984s⁴ +
/// 0.407s³ + 3.9822s². The double pole at s = 0 violates the
/// imaginary-axis assumption; synthesis shifts the axis (A + ε·I) and
/// shifts the controller back.
pub fn benchmark10_plant(beta: f64) -> GeneralizedPlant {
    let den = [1.0, 0.161, 6.0, 0.582, 9.984, 0.407, 3.9822, 0.0, 0.0];
    let num_z = [0.03, 0.008, 0.19, 0.037, 0.36, 0.05, 0.18, 0.015];
    let num_y = [0.0064, 0.0024, 0.071, 1.0, 0.1045, 1.0];
    let n = 8;

    // controllable canonical realization of the shared-denominator pair
    let mut a = Matrix::zeros(n, n);
    for j in 0..n {
        a[(0, j)] = -den[j + 1];
    }
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    let mut b = Matrix::zeros(n, 1);
    b[(0, 0)] = 1.0;
    let mut c_z = Matrix::zeros(1, n);
    for (k, coeff) in num_z.iter().enumerate() {
        c_z[(0, n - num_z.len() + k)] = *coeff;
    }
    let mut c_y = Matrix::zeros(1, n);
    for (k, coeff) in num_y.iter().enumerate() {
        c_y[(0, n - num_y.len() + k)] = *coeff;
    }

    // w = [w1; w2], z = [z1; z2], inputs w1 and u both drive the chain
    let mut b1 = Matrix::zeros(n, 2);
    b1.view_mut((0, 0), (n, 1)).copy_from(&b);
    let b2 = b.clone();
    let mut c1 = Matrix::zeros(2, n);
    c1.view_mut((0, 0), (1, n)).copy_from(&c_z);
    let d11 = Matrix::zeros(2, 2);
    let d12 = Matrix::from_row_slice(2, 1, &[0.0, beta]);
    let d21 = Matrix::from_row_slice(1, 2, &[0.0, 1.0]);
    GeneralizedPlant::from_blocks(a, b1, b2, c1, c_y, d11, d12, d21).expect("consistent blocks")
}

/// Axis shift A → A + ε·I; the synthesized controller must be shifted
/// back with [`unshift_controller`].
pub fn shift_plant(p: &GeneralizedPlant, eps: f64) -> GeneralizedPlant {
    let n = p.order();
    let ss = StateSpace {
        a: &p.ss.a + Matrix::identity(n, n) * eps,
        b: p.ss.b.clone(),
        c: p.ss.c.clone(),
        d: p.ss.d.clone(),
    };
    GeneralizedPlant::new(ss, p.m1, p.m2, p.p1, p.p2).expect("shape preserved")
}

pub fn unshift_controller(k: &StateSpace, eps: f64) -> StateSpace {
    let nk = k.order();
    StateSpace {
        a: &k.a - Matrix::identity(nk, nk) * eps,
        b: k.b.clone(),
        c: k.c.clone(),
        d: k.d.clone(),
    }
}

/// Fourth-order single-input plant used by the mixed-sensitivity case:
/// zeros {-5, 1, 5}, poles {-2±j, 20, 30}.
pub fn siso_unstable_plant() -> TransferMatrix {
    let num = poly_from_real_roots(&[-5.0, 1.0, 5.0]);
    let den = poly_mul(
        &poly_mul_complex_pair(&[1.0], -2.0, 1.0),
        &poly_from_real_roots(&[20.0, 30.0]),
    );
    TransferMatrix::siso(RationalFunction::new(num, den).expect("valid rational"))
}

/// Plant of the weighted pipeline case: (s² + 0.1s + 0.1) /
/// ((s − 0.1)(s − 1)(s² + 2s + 3)).
pub fn cc_plant() -> TransferMatrix {
    let num = vec![1.0, 0.1, 0.1];
    let den = poly_mul(&poly_from_real_roots(&[0.1, 1.0]), &[1.0, 2.0, 3.0]);
    TransferMatrix::siso(RationalFunction::new(num, den).expect("valid rational"))
}

/// Two-block mixed-sensitivity generalized plant
///
///   z1 = W1·(w − P·u),  z2 = W2·u,  y = w − P·u
///
/// for SISO P and weights given as state-space systems.
pub fn mixed_sensitivity_plant(
    p: &StateSpace,
    w1: &StateSpace,
    w2: &StateSpace,
) -> Result<GeneralizedPlant, SysError> {
    let (np, n1, n2) = (p.order(), w1.order(), w2.order());
    let n = np + n1 + n2;
    let mut a = Matrix::zeros(n, n);
    a.view_mut((0, 0), (np, np)).copy_from(&p.a);
    a.view_mut((np, np), (n1, n1)).copy_from(&w1.a);
    a.view_mut((np + n1, np + n1), (n2, n2)).copy_from(&w2.a);
    // W1 is driven by e = w - C_p x_p (P strictly proper is required)
    if p.d.norm() != 0.0 {
        return Err(SysError::DimensionMismatch(
            "mixed-sensitivity assembly expects a strictly proper plant".into(),
        ));
    }
    a.view_mut((np, 0), (n1, np)).copy_from(&(-&w1.b * &p.c));

    let mut b1 = Matrix::zeros(n, 1);
    b1.view_mut((np, 0), (n1, 1)).copy_from(&w1.b);
    let mut b2 = Matrix::zeros(n, 1);
    b2.view_mut((0, 0), (np, 1)).copy_from(&p.b);
    b2.view_mut((np + n1, 0), (n2, 1)).copy_from(&w2.b);

    // z1 = C_w1 x_w1 + D_w1 (w - C_p x_p); z2 = C_w2 x_w2 + D_w2 u
    let mut c1 = Matrix::zeros(2, n);
    c1.view_mut((0, 0), (1, np)).copy_from(&(-&w1.d * &p.c));
    c1.view_mut((0, np), (1, n1)).copy_from(&w1.c);
    c1.view_mut((1, np + n1), (1, n2)).copy_from(&w2.c);
    let d11 = Matrix::from_row_slice(2, 1, &[w1.d[(0, 0)], 0.0]);
    let d12 = Matrix::from_row_slice(2, 1, &[0.0, w2.d[(0, 0)]]);

    // y = w - C_p x_p
    let mut c2 = Matrix::zeros(1, n);
    c2.view_mut((0, 0), (1, np)).copy_from(&(-&p.c));
    let d21 = Matrix::identity(1, 1);
    GeneralizedPlant::from_blocks(a, b1, b2, c1, c2, d11, d12, d21)
}
