//! Benchmark cases: encode the reference examples as data plus drivers
//! and emit self-verifying synthesis reports.

mod plants;

use crate::hinfsynth::{min_gamma_central, min_gamma_stable, HinfError, HinfOptions};
use crate::numerics::Matrix;
use crate::strongstab::{strong_stabilize, structured_baseline, Plant, StrongStabError};
use crate::sysmodel::{check_pip, hinf_norm, lft_lower, tf_to_ss, StateSpace, SysError};
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;
use thiserror::Error;

pub use plants::{
    benchmark10_plant, cc_plant, g1_plant, g2_plant, lee_soh_plant, mixed_sensitivity_plant,
    shift_plant, siso_unstable_plant, unshift_controller,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("mixed-sensitivity weights are required for this case but were not supplied")]
    MissingWeights,
    #[error(transparent)]
    Hinf(#[from] HinfError),
    #[error(transparent)]
    StrongStab(#[from] StrongStabError),
    #[error(transparent)]
    Sys(#[from] SysError),
}

/// Serializable matrix (row-major nested arrays).
#[derive(Debug, Clone, Serialize)]
pub struct MatrixRepr(pub Vec<Vec<f64>>);

impl From<&Matrix> for MatrixRepr {
    fn from(m: &Matrix) -> Self {
        MatrixRepr(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StateSpaceRepr {
    pub a: MatrixRepr,
    pub b: MatrixRepr,
    pub c: MatrixRepr,
    pub d: MatrixRepr,
}

impl From<&StateSpace> for StateSpaceRepr {
    fn from(s: &StateSpace) -> Self {
        Self {
            a: (&s.a).into(),
            b: (&s.b).into(),
            c: (&s.c).into(),
            d: (&s.d).into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateRepr {
    pub controller_abscissa: f64,
    pub closed_loop_abscissa: f64,
    pub closed_loop_hinf: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller_hinf_norm: Option<f64>,
}

/// One checked quantity with its reference value.
#[derive(Debug, Clone, Serialize)]
pub struct Expectation {
    pub quantity: String,
    pub value: f64,
    pub target: String,
    pub pass: bool,
}

impl Expectation {
    fn near(quantity: &str, value: f64, expected: f64, tol: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            target: format!("{expected} ± {tol}"),
            pass: (value - expected).abs() <= tol,
        }
    }

    fn at_most(quantity: &str, value: f64, bound: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            target: format!("≤ {bound}"),
            pass: value <= bound,
        }
    }

    fn in_band(quantity: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            target: format!("[{lo}, {hi}]"),
            pass: value >= lo && value <= hi,
        }
    }
}

/// Self-verifying synthesis record; every γ is accompanied by
/// recomputed certificates.
#[derive(Debug, Clone, Serialize)]
pub struct SynthesisReport {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_structured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller: Option<StateSpaceRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<CertificateRepr>,
    pub expected: Vec<Expectation>,
    pub diagnostics: Vec<String>,
    pub elapsed_seconds: f64,
}

impl SynthesisReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            parameters: BTreeMap::new(),
            gamma_opt: None,
            gamma: None,
            gamma_structured: None,
            controller_order: None,
            controller: None,
            certificates: None,
            expected: Vec::new(),
            diagnostics: Vec::new(),
            elapsed_seconds: 0.0,
        }
    }

    pub fn all_expectations_pass(&self) -> bool {
        self.expected.iter().all(|e| e.pass)
    }
}

/// Reference synthesis: γ_opt ≈ 1.2929 (reported), stable controller at
/// γ ≈ 1.36957, order 4.
pub fn case_lee_soh(opts: &HinfOptions) -> Result<SynthesisReport, BenchError> {
    let start = Instant::now();
    let p = lee_soh_plant();
    let mut report = SynthesisReport::new("lee-soh");

    let gamma_opt = min_gamma_central(&p, (0.5, 20.0), 1e-4, opts)?;
    report.gamma_opt = Some(gamma_opt);
    report
        .expected
        .push(Expectation::near("gamma_opt", gamma_opt, 1.2929, 0.001));
    if (gamma_opt - 1.2929).abs() > 0.001 {
        report.diagnostics.push(format!(
            "gamma_opt boundary computed at {gamma_opt:.5}; the reference 1.2929 matches the \
             terminal probe of a coarse (≈0.004) bisection above this boundary; a certified \
             controller below 1.2929 exists, see the min-stable certificates"
        ));
    }

    let min = min_gamma_stable(&p, (1.0, 3.0), 5e-4, opts)?;
    report.gamma = Some(min.gamma);
    report
        .expected
        .push(Expectation::near("gamma_stable_min", min.gamma, 1.36957, 0.01));
    let ctrl = &min.controller;
    report.controller_order = Some(ctrl.c_gamma.order());
    report.expected.push(Expectation::near(
        "controller_order",
        ctrl.c_gamma.order() as f64,
        4.0,
        0.0,
    ));
    report.controller = Some((&ctrl.c_gamma).into());
    report.certificates = Some(CertificateRepr {
        controller_abscissa: ctrl.certificates.controller_abscissa,
        closed_loop_abscissa: ctrl.certificates.closed_loop_abscissa,
        closed_loop_hinf: ctrl.certificates.closed_loop_hinf,
        controller_hinf_norm: ctrl.inner.certificates.controller_hinf_norm,
    });
    report.diagnostics.extend(ctrl.diagnostics.clone());
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Eighth-order benchmark at one β, with the axis-shift preprocessing;
/// certificates are recomputed against the unshifted plant.
pub fn case_benchmark10(
    beta: f64,
    axis_shift_eps: f64,
    opts: &HinfOptions,
) -> Result<SynthesisReport, BenchError> {
    let start = Instant::now();
    let raw = benchmark10_plant(beta);
    let shifted = shift_plant(&raw, axis_shift_eps);
    let mut report = SynthesisReport::new("benchmark10");
    report.parameters.insert("beta".into(), beta);
    report
        .parameters
        .insert("axis_shift_eps".into(), axis_shift_eps);
    report.diagnostics.push(format!(
        "double pole at s = 0 violates the imaginary-axis assumption; \
         synthesis runs on A + ε·I with ε = {axis_shift_eps:e} and shifts the controller back"
    ));

    let gamma_opt = min_gamma_central(&shifted, (0.02, 2.0), 1e-4, opts)?;
    report.gamma_opt = Some(gamma_opt);

    let min = min_gamma_stable(&shifted, (0.05, 2.0), 5e-4, opts)?;
    let k = unshift_controller(&min.controller.c_gamma, axis_shift_eps);

    // certificates against the original, unshifted plant
    let controller_abscissa = k.spectral_abscissa()?;
    let closed = lft_lower(&raw, &k)?;
    let closed_loop_abscissa = closed.spectral_abscissa()?;
    let closed_loop_hinf = hinf_norm(&closed, 1e-7)?;

    report.gamma = Some(min.gamma);
    report.controller_order = Some(k.order());
    report.controller = Some((&k).into());
    report.certificates = Some(CertificateRepr {
        controller_abscissa,
        closed_loop_abscissa,
        closed_loop_hinf,
        controller_hinf_norm: min.controller.inner.certificates.controller_hinf_norm,
    });

    let (exp_opt, exp_go) = match beta {
        b if (b - 0.1).abs() < 1e-12 => (Some(0.232), 0.241),
        b if (b - 0.01).abs() < 1e-12 => (Some(0.142), 0.176),
        b if (b - 0.001).abs() < 1e-12 => (Some(0.122), 0.170),
        _ => (None, f64::NAN),
    };
    if let Some(e) = exp_opt {
        report
            .expected
            .push(Expectation::near("gamma_opt", gamma_opt, e, 0.005));
        report
            .expected
            .push(Expectation::near("gamma_stable_min", min.gamma, exp_go, 0.01));
    }
    report.expected.push(Expectation::near(
        "controller_order",
        k.order() as f64,
        16.0,
        0.0,
    ));
    report.expected.push(Expectation::at_most(
        "closed_loop_hinf_vs_gamma",
        closed_loop_hinf,
        min.gamma + 2e-3,
    ));
    report.expected.push(Expectation::at_most(
        "closed_loop_abscissa",
        closed_loop_abscissa,
        -0.0,
    ));
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Mixed-sensitivity case: γ_opt ≈ 34.24, stable controller at ≈ 35.29,
/// structured baseline in the 38–47 band.
pub fn case_siso_mixed_sensitivity(opts: &HinfOptions) -> Result<SynthesisReport, BenchError> {
    let start = Instant::now();
    let p = tf_to_ss(&siso_unstable_plant())?;
    let w1 = tf_to_ss(&crate::sysmodel::TransferMatrix::siso(
        crate::sysmodel::RationalFunction::new(vec![1.0], vec![1.0, 1.0]).expect("valid"),
    ))?;
    let w2 = StateSpace::static_gain(Matrix::from_element(1, 1, 0.2));
    let gp = mixed_sensitivity_plant(&p, &w1, &w2)?;
    let mut report = SynthesisReport::new("siso-mixed-sensitivity");

    let gamma_opt = min_gamma_central(&gp, (5.0, 500.0), 1e-4, opts)?;
    report.gamma_opt = Some(gamma_opt);
    report
        .expected
        .push(Expectation::near("gamma_opt", gamma_opt, 34.24, 0.1));

    let min = min_gamma_stable(&gp, (gamma_opt * 1.001, 200.0), 5e-4, opts)?;
    report.gamma = Some(min.gamma);
    report.expected.push(Expectation::at_most(
        "gamma_stable_min",
        min.gamma,
        35.29 + 0.5,
    ));
    report.controller_order = Some(min.controller.c_gamma.order());
    report.expected.push(Expectation::near(
        "controller_order",
        min.controller.c_gamma.order() as f64,
        2.0 * gp.order() as f64,
        0.0,
    ));
    report.controller = Some((&min.controller.c_gamma).into());
    report.certificates = Some(CertificateRepr {
        controller_abscissa: min.controller.certificates.controller_abscissa,
        closed_loop_abscissa: min.controller.certificates.closed_loop_abscissa,
        closed_loop_hinf: min.controller.certificates.closed_loop_hinf,
        controller_hinf_norm: min.controller.inner.certificates.controller_hinf_norm,
    });

    // structured baseline as a proxy for the Riccati-structured method
    let mut structured_opts = *opts;
    structured_opts.inner_structured = true;
    match min_gamma_stable(&gp, (gamma_opt * 1.001, 400.0), 5e-4, &structured_opts) {
        Ok(st) => {
            report.gamma_structured = Some(st.gamma);
            report.expected.push(Expectation::in_band(
                "gamma_structured",
                st.gamma,
                38.0,
                47.0,
            ));
            report.expected.push(Expectation::at_most(
                "gamma_lmi_below_structured",
                min.gamma,
                st.gamma,
            ));
        }
        Err(e) => report
            .diagnostics
            .push(format!("structured baseline failed: {e}")),
    }
    report.diagnostics.extend(min.controller.diagnostics.clone());
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Mixed-sensitivity weights for the weighted pipeline case.
#[derive(Debug, Clone)]
pub struct CcWeights {
    pub w1: crate::sysmodel::RationalFunction,
    pub w2: crate::sysmodel::RationalFunction,
    /// Marks the documented stand-in weights (the reference weights are
    /// not part of this data set).
    pub placeholder: bool,
}

impl CcWeights {
    /// Documented stand-in: W1 = 1/(s+1), W2 = 0.1.
    pub fn placeholder() -> Self {
        Self {
            w1: crate::sysmodel::RationalFunction::new(vec![1.0], vec![1.0, 1.0]).expect("valid"),
            w2: crate::sysmodel::RationalFunction::new(vec![0.1], vec![1.0]).expect("valid"),
            placeholder: true,
        }
    }
}

/// Weighted pipeline on the fourth-order plant; runs the full synthesis
/// with user-supplied weights and checks structure and certificates
/// only (no reference γ exists without the original weights).
pub fn case_cc_pipeline(
    weights: Option<&CcWeights>,
    opts: &HinfOptions,
) -> Result<SynthesisReport, BenchError> {
    let weights = weights.ok_or(BenchError::MissingWeights)?;
    let start = Instant::now();
    let p = tf_to_ss(&cc_plant())?;
    let w1 = tf_to_ss(&crate::sysmodel::TransferMatrix::siso(weights.w1.clone()))?;
    let w2 = tf_to_ss(&crate::sysmodel::TransferMatrix::siso(weights.w2.clone()))?;
    let gp = mixed_sensitivity_plant(&p, &w1, &w2)?;
    let mut report = SynthesisReport::new("cc-pipeline");
    if weights.placeholder {
        report.diagnostics.push(
            "run with placeholder weights W1 = 1/(s+1), W2 = 0.1; γ values are not comparable \
             to any reference"
                .into(),
        );
    }

    let gamma_opt = min_gamma_central(&gp, (0.5, 1e4), 1e-4, opts)?;
    report.gamma_opt = Some(gamma_opt);
    let min = min_gamma_stable(&gp, (gamma_opt * 1.001, 1e4), 1e-3, opts)?;
    report.gamma = Some(min.gamma);
    report.controller_order = Some(min.controller.c_gamma.order());
    report.expected.push(Expectation::near(
        "controller_order",
        min.controller.c_gamma.order() as f64,
        2.0 * gp.order() as f64,
        0.0,
    ));
    report.expected.push(Expectation::at_most(
        "closed_loop_hinf_vs_gamma",
        min.controller.certificates.closed_loop_hinf,
        min.gamma,
    ));
    report.controller = Some((&min.controller.c_gamma).into());
    report.certificates = Some(CertificateRepr {
        controller_abscissa: min.controller.certificates.controller_abscissa,
        closed_loop_abscissa: min.controller.certificates.closed_loop_abscissa,
        closed_loop_hinf: min.controller.certificates.closed_loop_hinf,
        controller_hinf_norm: min.controller.inner.certificates.controller_hinf_norm,
    });
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepPlant {
    G1,
    G2,
}

/// One row of the α-sweep comparison.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub pip_satisfied: Option<bool>,
    pub gamma_lmi: Option<f64>,
    pub gamma_structured: Option<f64>,
    pub status: String,
}

/// Default 60-point α grids: G1 inside its strongly-stabilizable range
/// (α > 5), G2 across (0, 8].
pub fn default_alphas(which: SweepPlant) -> Vec<f64> {
    let (lo, hi, n) = match which {
        SweepPlant::G1 => (5.5, 18.0, 60),
        SweepPlant::G2 => (8.5, 40.0, 60),
    };
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Minimum γ_K comparison between the LMI synthesis and the structured
/// baseline over an α grid. Failures are recorded per row and never
/// abort the sweep.
pub fn case_g1_g2_sweep(
    which: SweepPlant,
    alphas: &[f64],
    opts: &HinfOptions,
) -> Vec<SweepRecord> {
    alphas
        .iter()
        .map(|&alpha| {
            let tf = match which {
                SweepPlant::G1 => g1_plant(alpha),
                SweepPlant::G2 => g2_plant(alpha),
            };
            let mut record = SweepRecord {
                alpha,
                pip_satisfied: None,
                gamma_lmi: None,
                gamma_structured: None,
                status: "ok".into(),
            };
            let ss = match tf_to_ss(&tf) {
                Ok(ss) => ss,
                Err(e) => {
                    record.status = format!("realization failed: {e}");
                    return record;
                }
            };
            match check_pip(&ss, 1e-7) {
                Ok(r) => record.pip_satisfied = Some(r.satisfied),
                Err(e) => record.status = format!("pip check failed: {e}"),
            }
            let plant = match Plant::new(ss.a.clone(), ss.b.clone(), ss.c.clone()) {
                Ok(p) => p,
                Err(e) => {
                    record.status = format!("plant invalid: {e}");
                    return record;
                }
            };
            match strong_stabilize(&plant, None, true, &opts.strongstab) {
                Ok(res) => record.gamma_lmi = Some(res.gamma_k),
                Err(StrongStabError::Infeasible { .. }) => {}
                Err(e) => record.status = format!("lmi synthesis error: {e}"),
            }
            match structured_baseline(&plant, None, true, &opts.strongstab) {
                Ok(res) => record.gamma_structured = Some(res.gamma_k),
                Err(StrongStabError::Infeasible { .. }) => {}
                Err(e) => {
                    if record.status == "ok" {
                        record.status = format!("structured synthesis error: {e}");
                    }
                }
            }
            record
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_weights_is_an_error() {
        assert!(matches!(
            case_cc_pipeline(None, &HinfOptions::default()),
            Err(BenchError::MissingWeights)
        ));
    }

    #[test]
    fn sweep_records_dominance_and_pip() {
        let opts = HinfOptions::default();
        let alphas = [6.0, 9.0, 14.0];
        let rows = case_g1_g2_sweep(SweepPlant::G1, &alphas, &opts);
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert_eq!(row.pip_satisfied, Some(true), "alpha={}", row.alpha);
            if let (Some(l), Some(s)) = (row.gamma_lmi, row.gamma_structured) {
                assert!(
                    l <= s * 1.005,
                    "alpha={}: lmi {} must not exceed structured {}",
                    row.alpha,
                    l,
                    s
                );
            }
        }
        // at least one row must have both methods feasible
        assert!(rows
            .iter()
            .any(|r| r.gamma_lmi.is_some() && r.gamma_structured.is_some()));
    }

    #[test]
    fn sweep_marks_pip_failures_without_aborting() {
        let opts = HinfOptions::default();
        let rows = case_g1_g2_sweep(SweepPlant::G1, &[3.0], &opts);
        assert_eq!(rows[0].pip_satisfied, Some(false));
        // the sufficient condition must agree: no stable controller here
        assert!(rows[0].gamma_lmi.is_none());
    }
}


