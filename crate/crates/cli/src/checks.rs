//! The identity/invariant suite behind `bisectional verify`.
//!
//! Each check is a pure function returning a named result; the runner
//! aggregates them into a JSON report. A check can be deliberately broken
//! through [`FaultInjection`] to exercise the failure path end to end.

use num_complex::Complex64;
use serde::Serialize;

use bisectional::basis::{matrix_traceless, spectrum, standard_basis, trace_bound_check};
use bisectional::curvature::{KahlerCurvature, SampleStyle};
use bisectional::flow::{
    rhs_full, rhs_matrix, rhs_parts_recomposed, rhs_ric0, rhs_scalar, ricci_projection_matrix,
};
use bisectional::lie::{bracket, quadratic_combination, sharp, structure_constants};
use bisectional::linalg;
use bisectional::reconstruct::Reconstructor;
use bisectional::{Cone, HermitianForm, OperatorMatrix};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn from_residual(name: &str, residual: f64, tolerance: f64, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub n_values: Vec<usize>,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Names accepted by `--inject-fault`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultInjection {
    None,
    /// Flip the sign of the Lie-algebra square in the quadratic identity.
    QuadraticIdentity,
}

impl FaultInjection {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quadratic-identity" | "quadratic_identity" => Some(FaultInjection::QuadraticIdentity),
            _ => None,
        }
    }
}

pub struct VerifyConfig {
    pub n_values: Vec<usize>,
    pub seed: u64,
    pub samples: usize,
    pub fault: FaultInjection,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_values: vec![2, 3],
            seed: 0,
            samples: 25,
            fault: FaultInjection::None,
        }
    }
}

pub fn run_suite(cfg: &VerifyConfig) -> anyhow::Result<VerifyReport> {
    let mut checks = Vec::new();
    checks.push(check_basis_gram(&cfg.n_values)?);
    checks.push(check_bracket_table()?);
    checks.push(check_structure_constants(&cfg.n_values)?);
    checks.push(check_sharp_closed_form()?);
    checks.push(check_sharp_sign(&cfg.n_values, cfg.seed, cfg.samples)?);
    checks.push(check_quadratic_identity(
        &cfg.n_values,
        cfg.seed,
        cfg.samples,
        cfg.fault == FaultInjection::QuadraticIdentity,
    )?);
    checks.push(check_trace_bound(&cfg.n_values, cfg.seed, cfg.samples)?);
    checks.push(check_reconstruction(&cfg.n_values, cfg.seed)?);
    checks.push(check_fixed_point()?);
    checks.push(check_ode_consistency(&cfg.n_values, cfg.seed, cfg.samples)?);
    checks.push(check_decompose_roundtrip(&cfg.n_values, cfg.seed)?);
    checks.push(check_frame_invariance(&cfg.n_values, cfg.seed)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        n_values: cfg.n_values.clone(),
        seed: cfg.seed,
        samples: cfg.samples,
        checks,
        passed,
    })
}

fn check_basis_gram(ns: &[usize]) -> anyhow::Result<CheckResult> {
    let mut worst = 0.0f64;
    for &n in ns {
        let b = standard_basis(n)?;
        worst = worst.max(b.gram_residual());
        if b.dim() != n * n - 1 {
            return Ok(CheckResult {
                name: "basis_gram".into(),
                passed: false,
                residual: f64::INFINITY,
                tolerance: 1e-12,
                detail: format!("basis count {} != {}", b.dim(), n * n - 1),
            });
        }
    }
    Ok(CheckResult::from_residual(
        "basis_gram",
        worst,
        1e-12,
        format!("orthonormality and tracelessness over n={ns:?}"),
    ))
}

fn abc(n: usize, i: usize, j: usize) -> (HermitianForm, HermitianForm, HermitianForm) {
    use nalgebra::DMatrix;
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    a[(i, i)] = Complex64::new(1.0, 0.0);
    a[(j, j)] = Complex64::new(-1.0, 0.0);
    let mut b = DMatrix::<Complex64>::zeros(n, n);
    b[(i, j)] = Complex64::new(1.0, 0.0);
    b[(j, i)] = Complex64::new(1.0, 0.0);
    let mut c = DMatrix::<Complex64>::zeros(n, n);
    c[(i, j)] = Complex64::new(0.0, -1.0);
    c[(j, i)] = Complex64::new(0.0, 1.0);
    (
        HermitianForm::new(a, 0.0).unwrap(),
        HermitianForm::new(b, 0.0).unwrap(),
        HermitianForm::new(c, 0.0).unwrap(),
    )
}

/// Verifies the commutator table of the unnormalized generators on three
/// distinct indices, including the same-pair triple and the mixed-index
/// relations.
fn check_bracket_table() -> anyhow::Result<CheckResult> {
    let n = 3;
    let (a12, b12, c12) = abc(n, 0, 1);
    let (a13, b13, c13) = abc(n, 0, 2);
    let (a23, b23, c23) = abc(n, 1, 2);
    let i2 = Complex64::new(0.0, 2.0);
    let i1 = Complex64::new(0.0, 1.0);
    let mut worst = 0.0f64;
    let mut push = |lhs: &nalgebra::DMatrix<Complex64>, rhs: nalgebra::DMatrix<Complex64>| {
        worst = worst.max((lhs - rhs).camax());
    };
    // same-pair triple
    push(&bracket(&a12, &b12)?, c12.matrix() * i2);
    push(&bracket(&b12, &c12)?, a12.matrix() * i2);
    push(&bracket(&c12, &a12)?, b12.matrix() * i2);
    // A against mixed B
    push(&bracket(&a12, &b13)?, c13.matrix() * i1);
    push(&bracket(&a12, &b23)?, c23.matrix() * (-i1));
    // B/C mixed pairs share an index
    push(&bracket(&b12, &c13)?, b23.matrix() * (-i1));
    push(&bracket(&b12, &b13)?, c23.matrix() * i1);
    push(&bracket(&c12, &c13)?, c23.matrix() * i1);
    // disjoint diagonal generators commute
    push(&bracket(&a12, &a13)?, nalgebra::DMatrix::zeros(n, n));
    push(&bracket(&a12, &a23)?, nalgebra::DMatrix::zeros(n, n));
    Ok(CheckResult::from_residual(
        "bracket_table",
        worst,
        1e-12,
        "commutator table of the unnormalized generators (n=3)".into(),
    ))
}

fn check_structure_constants(ns: &[usize]) -> anyhow::Result<CheckResult> {
    // the constructor already rejects real parts above 1e-12 and jacobi
    // residuals above 1e-10; report the observed residuals
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &n in ns {
        let b = standard_basis(n)?;
        let sc = structure_constants(&b)?;
        worst = worst
            .max(sc.jacobi_residual)
            .max(sc.antisymmetry_residual());
        detail.push_str(&format!(
            "n={n}: real {:.1e}, jacobi {:.1e}; ",
            sc.max_real_part, sc.jacobi_residual
        ));
    }
    Ok(CheckResult::from_residual(
        "structure_constants",
        worst,
        1e-10,
        detail,
    ))
}

fn check_sharp_closed_form() -> anyhow::Result<CheckResult> {
    let b = standard_basis(2)?;
    let sc = structure_constants(&b)?;
    let mut worst = 0.0f64;
    for &m in &[1.0, 0.5, -0.25, 1.0 / 3.0] {
        let mat = OperatorMatrix::new(nalgebra::DMatrix::identity(3, 3) * m, b.id(), 1e-12)?;
        let sh = sharp(&mat, &sc)?;
        let expect = nalgebra::DMatrix::identity(3, 3) * (-4.0 * m * m);
        worst = worst.max((sh.matrix() - expect).amax());
    }
    Ok(CheckResult::from_residual(
        "sharp_closed_form",
        worst,
        1e-12,
        "n=2 scalar matrices: M#(mI) = -4 m^2 I".into(),
    ))
}

fn psd_sample(d: usize, rng: &mut rand_chacha::ChaCha8Rng) -> nalgebra::DMatrix<f64> {
    let g = nalgebra::DMatrix::from_fn(d, d, |_, _| linalg::standard_normal(rng));
    &g * g.transpose()
}

fn check_sharp_sign(ns: &[usize], seed: u64, samples: usize) -> anyhow::Result<CheckResult> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for &n in ns {
        let b = standard_basis(n)?;
        let sc = structure_constants(&b)?;
        let scr = sc.real_counterpart();
        let d = n * n - 1;
        for _ in 0..samples {
            let m = OperatorMatrix::new(psd_sample(d, &mut rng), b.id(), 1e-12)?;
            let sh = sharp(&m, &sc)?;
            let scale = 1.0 + sh.max_abs();
            let ev = spectrum(&sh);
            worst = worst.max(ev.last().copied().unwrap_or(0.0) / scale);
            let shr = sharp(&m, &scr)?;
            let scale_r = 1.0 + shr.max_abs();
            let evr = spectrum(&shr);
            worst = worst.max(-evr.first().copied().unwrap_or(0.0) / scale_r);
        }
    }
    Ok(CheckResult::from_residual(
        "sharp_sign",
        worst,
        1e-10,
        format!(
            "PSD inputs: imaginary table gives M# <= 0, real table M# >= 0 ({samples} samples/n)"
        ),
    ))
}

fn check_quadratic_identity(
    ns: &[usize],
    seed: u64,
    samples: usize,
    flip_sign: bool,
) -> anyhow::Result<CheckResult> {
    let sign = if flip_sign { 0.5 } else { -0.5 };
    let mut worst = 0.0f64;
    for &n in ns {
        let b = standard_basis(n)?;
        let sc = structure_constants(&b)?;
        for s in 0..samples as u64 {
            let t = KahlerCurvature::random(n, seed ^ (s * 1315), SampleStyle::Unconstrained, &b)?;
            let p = t.decompose();
            let lhs = quadratic_combination(&p.s4);
            let m = matrix_traceless(&p.s4, &b)?;
            let msharp = sharp(&m, &sc)?;
            let d = b.dim();
            for aa in 0..n {
                for bb in 0..n {
                    for cc in 0..n {
                        for dd in 0..n {
                            let mut rhs = Complex64::new(0.0, 0.0);
                            for q in 0..d {
                                for pp in 0..d {
                                    rhs += Complex64::new(sign * msharp.matrix()[(q, pp)], 0.0)
                                        * b.elems[q].entry(aa, bb)
                                        * b.elems[pp].entry(cc, dd);
                                }
                            }
                            worst = worst.max((lhs.get(aa, bb, cc, dd) - rhs).norm());
                        }
                    }
                }
            }
        }
    }
    Ok(CheckResult::from_residual(
        "quadratic_identity",
        worst,
        1e-9,
        format!("commutator quadratic vs -(1/2) M# form ({samples} samples/n)"),
    ))
}

fn check_trace_bound(ns: &[usize], seed: u64, samples: usize) -> anyhow::Result<CheckResult> {
    let mut worst = f64::NEG_INFINITY;
    for &n in ns {
        let b = standard_basis(n)?;
        for s in 0..(samples as u64 * 4) {
            let t = KahlerCurvature::random(
                n,
                seed ^ (s * 7919),
                SampleStyle::ShiftedIntoCone {
                    cone: Cone::TwoNonneg,
                    margin: 0.01,
                },
                &b,
            )?;
            let r = trace_bound_check(&t, &b, 1e-10)?;
            if !r.applicable {
                continue;
            }
            worst = worst.max(r.trace_m - r.bound);
            if !r.ok {
                return Ok(CheckResult {
                    name: "trace_bound".into(),
                    passed: false,
                    residual: r.trace_m - r.bound,
                    tolerance: 1e-9,
                    detail: format!("violated at n={n} seed-offset {s}"),
                });
            }
        }
    }
    Ok(CheckResult::from_residual(
        "trace_bound",
        worst.max(0.0),
        1e-9,
        "tr(M) <= (n-1) R on 2-nonnegative samples".into(),
    ))
}

fn check_reconstruction(ns: &[usize], seed: u64) -> anyhow::Result<CheckResult> {
    let mut worst = 0.0f64;
    for &n in ns {
        let b = standard_basis(n)?;
        let rec = Reconstructor::new(&b)?;
        // zero matrix reconstructs to zero
        let zero = OperatorMatrix::new(
            nalgebra::DMatrix::zeros(b.dim(), b.dim()),
            b.id(),
            1e-12,
        )?;
        let rz = rec.reconstruct(&zero, 1e-10)?;
        worst = worst.max(rz.s4.max_abs());
        for s in 0..10u64 {
            let t = KahlerCurvature::random(n, seed ^ (s * 31), SampleStyle::Unconstrained, &b)?;
            let p = t.decompose();
            let m = matrix_traceless(&t, &b)?;
            let r = rec.reconstruct(&m, 1e-8)?;
            let scale = 1.0 + p.s4.max_abs();
            worst = worst.max(r.s4.max_abs_diff(&p.s4) / scale).max(r.residual);
        }
    }
    Ok(CheckResult::from_residual(
        "reconstruction",
        worst,
        1e-10,
        "operator matrix -> traceless four-tensor round trip".into(),
    ))
}

fn check_fixed_point() -> anyhow::Result<CheckResult> {
    let mut worst = 0.0f64;
    for n in 2..=6usize {
        let t = KahlerCurvature::space_form(n, 1.0 / (n as f64 + 1.0))?;
        worst = worst.max(rhs_full(&t)?.max_abs());
    }
    Ok(CheckResult::from_residual(
        "fixed_point",
        worst,
        1e-12,
        "reaction terms vanish on the Einstein space forms, n=2..6".into(),
    ))
}

fn check_ode_consistency(ns: &[usize], seed: u64, samples: usize) -> anyhow::Result<CheckResult> {
    let mut worst = 0.0f64;
    for &n in ns {
        let b = standard_basis(n)?;
        let sc = structure_constants(&b)?;
        for s in 0..samples as u64 {
            let t = KahlerCurvature::random(n, seed ^ (s * 53), SampleStyle::Unconstrained, &b)?;
            let p = t.decompose();
            let d = rhs_full(&t)?;
            let scale = 1.0 + d.max_abs();
            // trace chain
            let lhs = d.second_trace();
            let dr = rhs_scalar(&p);
            let dric0 = rhs_ric0(&p)?;
            for i in 0..n {
                for j in 0..n {
                    let mut rhs = dric0.entry(i, j);
                    if i == j {
                        rhs += Complex64::new(dr / n as f64, 0.0);
                    }
                    worst = worst.max((lhs[(i, j)] - rhs).norm() / scale);
                }
            }
            // full recomposition of the three reaction terms
            let via_parts = rhs_parts_recomposed(&p)?;
            worst = worst.max(via_parts.max_abs_diff(&d) / scale);
            // matrix path
            let m = matrix_traceless(&p.s4, &b)?;
            let tm = ricci_projection_matrix(&p, &b);
            let dm = rhs_matrix(&m, &tm, &sc)?;
            let dm_tensor = matrix_traceless(&bisectional::flow::rhs_s4(&p)?, &b)?;
            worst = worst.max(dm.max_abs_diff(&dm_tensor) / (1.0 + dm.max_abs()));
        }
    }
    Ok(CheckResult::from_residual(
        "ode_consistency",
        worst,
        1e-10,
        format!("trace chain, parts recomposition and matrix path ({samples} samples/n)"),
    ))
}

fn check_decompose_roundtrip(ns: &[usize], seed: u64) -> anyhow::Result<CheckResult> {
    let mut worst = 0.0f64;
    for &n in ns {
        let b = standard_basis(n)?;
        for s in 0..20u64 {
            let t = KahlerCurvature::random(n, seed ^ (s * 101), SampleStyle::Unconstrained, &b)?;
            let p = t.decompose();
            p.validate(1e-10).map_err(|e| anyhow::anyhow!("{e}"))?;
            let t2 = bisectional::recompose(&p, 1e-10)?;
            worst = worst.max(t.max_abs_diff(&t2));
        }
    }
    Ok(CheckResult::from_residual(
        "decompose_roundtrip",
        worst,
        1e-12,
        "decompose then recompose is the identity".into(),
    ))
}

fn check_frame_invariance(ns: &[usize], seed: u64) -> anyhow::Result<CheckResult> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(77));
    let mut worst = 0.0f64;
    for &n in ns {
        let b = standard_basis(n)?;
        for s in 0..5u64 {
            let t = KahlerCurvature::random(n, seed ^ (s * 211), SampleStyle::Unconstrained, &b)?;
            let ev0 = spectrum(&matrix_traceless(&t, &b)?);
            for _ in 0..5 {
                let u = linalg::haar_unitary(n, &mut rng);
                let tc = t.unitary_conjugate(&u)?;
                worst = worst.max((tc.scalar() - t.scalar()).abs());
                let ev1 = spectrum(&matrix_traceless(&tc, &b)?);
                for (a, c) in ev0.iter().zip(ev1.iter()) {
                    worst = worst.max((a - c).abs());
                }
            }
        }
    }
    Ok(CheckResult::from_residual(
        "frame_invariance",
        worst,
        1e-10,
        "scalar and operator spectrum under random unitary frames".into(),
    ))
}
