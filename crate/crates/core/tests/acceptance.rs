//! Acceptance suite: every release criterion as one test, each printing a
//! single PASS/FAIL line with the measured numbers (visible under
//! `cargo test -- --nocapture`, or on failure).

use rayon::prelude::*;
use std::time::Instant;

use bisectional::basis::{
    matrix_traceless, spectrum, standard_basis, trace_bound_check,
};
use bisectional::cones::{orth_bisec_min, ricci_pair_min, sup_ratio, Cone};
use bisectional::curvature::{KahlerCurvature, SampleStyle};
use bisectional::flow::{
    montecarlo_cone, rhs_full, rhs_matrix, rhs_parts_recomposed, rhs_ric0, rhs_s4, rhs_scalar,
    ricci_projection_matrix, MonteCarloConfig,
};
use bisectional::lie::{sharp, structure_constants};
use bisectional::linalg;
use bisectional::reconstruct::Reconstructor;
use bisectional::OperatorMatrix;

fn report(name: &str, ok: bool, detail: String) {
    println!(
        "acceptance {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance {name}: FAIL ({detail})");
}

fn sample_shifted(n: usize, cone: Cone, margin: f64, seed: u64) -> KahlerCurvature {
    let b = standard_basis(n).unwrap();
    KahlerCurvature::random(n, seed, SampleStyle::ShiftedIntoCone { cone, margin }, &b).unwrap()
}

#[test]
fn acceptance_space_form_spectrum() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=6usize {
        let c = 1.0 / (n as f64 + 1.0);
        let t = KahlerCurvature::space_form(n, c).unwrap();
        let b = standard_basis(n).unwrap();
        let m = matrix_traceless(&t, &b).unwrap();
        let d = b.dim();
        for p in 0..d {
            for q in 0..d {
                let expect = if p == q { c } else { 0.0 };
                worst = worst.max((m.matrix()[(p, q)] - expect).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "space_form_spectrum",
        worst <= 1e-12 && elapsed < 1.0,
        format!("max deviation from I/(n+1): {worst:.3e} over n=2..6, {elapsed:.2}s"),
    );
}

#[test]
fn acceptance_trace_bound() {
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    for n in [2usize, 3, 4] {
        let b = standard_basis(n).unwrap();
        let gap = (0..10_000u64)
            .into_par_iter()
            .map(|i| {
                let t = sample_shifted(n, Cone::TwoNonneg, 0.01, 90_000 + i * 3 + n as u64);
                let r = trace_bound_check(&t, &b, 1e-10).unwrap();
                assert!(r.applicable, "sampler must land in the cone");
                r.trace_m - r.bound
            })
            .reduce(|| f64::NEG_INFINITY, f64::max);
        worst = worst.max(gap);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "trace_bound",
        worst <= 1e-9 && elapsed < 60.0,
        format!("max tr(M) - (n-1)R over 1e4 2-nonneg samples per n in 2..4: {worst:.3e}, {elapsed:.1}s"),
    );
}

#[test]
fn acceptance_reconstruction() {
    // forward map: full column rank over the doubly-traceless parameter
    // space, plus the full-parameter ranks; then the round trip on
    // decomposed four-tensor parts
    let mut rank_detail = String::new();
    let mut ranks_ok = true;
    for (n, space_expect, full_expect) in [(2usize, 5usize, 6usize), (3, 27, 36), (4, 84, 100)] {
        let b = standard_basis(n).unwrap();
        let rec = Reconstructor::new(&b).unwrap();
        let (space_dim, rank) = rec.doubly_traceless_rank(1e-9).unwrap();
        let full_rank = rec.rank(1e-9);
        ranks_ok &= space_dim == space_expect && rank == space_expect && full_rank == full_expect;
        rank_detail.push_str(&format!(
            "n={n}: traceless-space dim {space_dim} rank {rank}, full rank {full_rank}; "
        ));
    }

    let mut worst_rel = 0.0f64;
    for (n, count) in [(2usize, 400u64), (3, 300), (4, 300)] {
        let b = standard_basis(n).unwrap();
        let rec = Reconstructor::new(&b).unwrap();
        let errs: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|i| {
                let bb = standard_basis(n).unwrap();
                let t = KahlerCurvature::random(
                    n,
                    40_000 + i * 7 + n as u64,
                    SampleStyle::Unconstrained,
                    &bb,
                )
                .unwrap();
                let p = t.decompose();
                let m = matrix_traceless(&t, &bb).unwrap();
                let r = rec.reconstruct(&m, 1e-8).unwrap();
                r.s4.max_abs_diff(&p.s4) / (1.0 + p.s4.max_abs())
            })
            .collect();
        worst_rel = worst_rel.max(errs.into_iter().fold(0.0, f64::max));
    }
    report(
        "reconstruction",
        ranks_ok && worst_rel <= 1e-10,
        format!("{rank_detail}round-trip rel err {worst_rel:.3e} over 1e3 samples"),
    );
}

#[test]
fn acceptance_bracket_sharp_suite() {
    // structure constants purely imaginary with tiny Jacobi residual
    let mut im_worst = 0.0f64;
    let mut jac_worst = 0.0f64;
    for n in 2..=4usize {
        let b = standard_basis(n).unwrap();
        let sc = structure_constants(&b).unwrap();
        im_worst = im_worst.max(sc.max_real_part);
        jac_worst = jac_worst.max(sc.jacobi_residual);
    }

    // n=2 closed form M#(m I) = -4 m^2 I
    let b2 = standard_basis(2).unwrap();
    let sc2 = structure_constants(&b2).unwrap();
    let mut closed_worst = 0.0f64;
    for &m in &[1.0, 0.5, -0.7, 1.0 / 3.0] {
        let mat =
            OperatorMatrix::new(nalgebra::DMatrix::identity(3, 3) * m, b2.id(), 1e-12).unwrap();
        let sh = sharp(&mat, &sc2).unwrap();
        let expect = nalgebra::DMatrix::identity(3, 3) * (-4.0 * m * m);
        closed_worst = closed_worst.max((sh.matrix() - expect).amax());
    }

    // sign regimes over PSD samples
    use rand::SeedableRng;
    let mut sign_worst = f64::NEG_INFINITY;
    let mut real_worst = f64::NEG_INFINITY;
    for n in 2..=3usize {
        let b = standard_basis(n).unwrap();
        let sc = structure_constants(&b).unwrap();
        let scr = sc.real_counterpart();
        let d = n * n - 1;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(600 + n as u64);
        for _ in 0..1000 {
            let g = nalgebra::DMatrix::from_fn(d, d, |_, _| linalg::standard_normal(&mut rng));
            let psd = &g * g.transpose();
            let m = OperatorMatrix::new(psd, b.id(), 1e-12).unwrap();
            let ev = spectrum(&sharp(&m, &sc).unwrap());
            sign_worst = sign_worst.max(*ev.last().unwrap());
            let evr = spectrum(&sharp(&m, &scr).unwrap());
            real_worst = real_worst.max(-evr[0]);
        }
    }

    let ok = im_worst <= 1e-12
        && jac_worst <= 1e-10
        && closed_worst <= 1e-12
        && sign_worst <= 1e-10
        && real_worst <= 1e-10;
    report(
        "bracket_sharp_suite",
        ok,
        format!(
            "real residue {im_worst:.1e}, jacobi {jac_worst:.1e}, closed form {closed_worst:.1e}, \
             max eig of M# on PSD {sign_worst:.3e}, real-table -min eig {real_worst:.3e} (1e3 samples/n)"
        ),
    );
}

#[test]
fn acceptance_quadratic_identity() {
    // residual of the commutator quadratic against -(1/2) M# with no scale
    // calibration: the orthonormal basis makes the factor exactly one
    let mut worst = 0.0f64;
    for n in 2..=3usize {
        let b = standard_basis(n).unwrap();
        let sc = structure_constants(&b).unwrap();
        let w = (0..100u64)
            .into_par_iter()
            .map(|i| {
                let bb = standard_basis(n).unwrap();
                let t = KahlerCurvature::random(
                    n,
                    71_000 + i * 13 + n as u64,
                    SampleStyle::Unconstrained,
                    &bb,
                )
                .unwrap();
                let p = t.decompose();
                bisectional::lie::quadratic_identity_residual_with(&p, &bb, &sc).unwrap()
            })
            .reduce(|| 0.0, f64::max);
        worst = worst.max(w);
    }
    report(
        "quadratic_identity",
        worst <= 1e-9,
        format!("max residual {worst:.3e} over 100 tensors per n in 2..3, scale factor 1"),
    );
}

#[test]
fn acceptance_ode_consistency() {
    let mut trace_worst = 0.0f64;
    let mut matrix_worst = 0.0f64;
    for n in 2..=3usize {
        let b = standard_basis(n).unwrap();
        let sc = structure_constants(&b).unwrap();
        for i in 0..100u64 {
            let t = KahlerCurvature::random(
                n,
                52_000 + i * 11 + n as u64,
                SampleStyle::Unconstrained,
                &b,
            )
            .unwrap();
            let p = t.decompose();
            let d = rhs_full(&t).unwrap();
            // trace of the tensor reaction reproduces the decomposed Ricci
            // and scalar reaction terms
            let lhs = d.second_trace();
            let dr = rhs_scalar(&p);
            let dric0 = rhs_ric0(&p).unwrap();
            for a in 0..n {
                for c in 0..n {
                    let mut rhs = dric0.entry(a, c);
                    if a == c {
                        rhs += num_complex::Complex64::new(dr / n as f64, 0.0);
                    }
                    trace_worst = trace_worst.max((lhs[(a, c)] - rhs).norm());
                }
            }
            let via_parts = rhs_parts_recomposed(&p).unwrap();
            trace_worst = trace_worst.max(via_parts.max_abs_diff(&d));
            // matrix path
            let m = matrix_traceless(&p.s4, &b).unwrap();
            let tm = ricci_projection_matrix(&p, &b);
            let dm = rhs_matrix(&m, &tm, &sc).unwrap();
            let dm_tensor = matrix_traceless(&rhs_s4(&p).unwrap(), &b).unwrap();
            matrix_worst = matrix_worst.max(dm.max_abs_diff(&dm_tensor));
        }
    }
    report(
        "ode_consistency",
        trace_worst <= 1e-10 && matrix_worst <= 1e-9,
        format!(
            "trace-chain residual {trace_worst:.3e} (tol 1e-10), matrix-path residual \
             {matrix_worst:.3e} (tol 1e-9), 100 tensors/n"
        ),
    );
}

#[test]
fn acceptance_fixed_point() {
    let mut worst = 0.0f64;
    for n in 2..=6usize {
        let t = KahlerCurvature::space_form(n, 1.0 / (n as f64 + 1.0)).unwrap();
        worst = worst.max(rhs_full(&t).unwrap().max_abs());
    }
    // the n=2 matrix balance holds in exact floating point arithmetic
    let balance = -1.0 / 3.0 + 1.0 / 9.0 + 2.0 / 9.0;
    let b2 = standard_basis(2).unwrap();
    let sc2 = structure_constants(&b2).unwrap();
    let m = OperatorMatrix::new(nalgebra::DMatrix::identity(3, 3) / 3.0, b2.id(), 1e-12).unwrap();
    let t0 = OperatorMatrix::new(nalgebra::DMatrix::zeros(3, 3), b2.id(), 1e-12).unwrap();
    let dm = rhs_matrix(&m, &t0, &sc2).unwrap().max_abs();
    report(
        "fixed_point",
        worst <= 1e-12 && balance == 0.0 && dm == 0.0,
        format!("rhs residual {worst:.3e} for n=2..6; -1/3 + 1/9 + 2/9 = {balance:e}; |dM| = {dm:e}"),
    );
}

#[test]
fn acceptance_cone_invariance() {
    let start = Instant::now();
    let mut detail = String::new();
    let mut ok = true;
    for n in 2..=3usize {
        let b = standard_basis(n).unwrap();
        for (cone, seed) in [(Cone::Nonneg, 8101u64), (Cone::TwoNonneg, 8202u64)] {
            let mut cfg = MonteCarloConfig::new(n, cone, 200, seed + n as u64);
            cfg.dt = 1e-3;
            cfg.t_end = 1.0;
            cfg.margin = 0.01;
            cfg.frames = 2;
            let summary = montecarlo_cone(&cfg, &b).unwrap();
            let g = summary.global.as_ref().unwrap();
            let observed = match cone {
                Cone::Nonneg => g.min_lambda,
                Cone::TwoNonneg => g.min_lambda_pair,
            };
            ok &= observed >= -1e-6;
            detail.push_str(&format!(
                "n={n} {}: min {observed:.3e} ({} completed/{} truncated); ",
                cone.name(),
                summary.completed,
                summary.truncated
            ));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 600.0;
    detail.push_str(&format!("{elapsed:.1}s"));
    report("cone_invariance", ok, detail);
}

#[test]
fn acceptance_geometric_consequences() {
    let start = Instant::now();
    // orthogonal bisectional curvature nonnegative on the 2-nonneg cone,
    // 1e3 samples x 100 random frames
    let mut orth_worst = f64::INFINITY;
    for n in 2..=3usize {
        let w = (0..1000u64)
            .into_par_iter()
            .map(|i| {
                let t = sample_shifted(n, Cone::TwoNonneg, 0.01, 30_000 + i * 5 + n as u64);
                orth_bisec_min(&t, 100, 77_000 + i)
            })
            .reduce(|| f64::INFINITY, f64::min);
        orth_worst = orth_worst.min(w);
    }

    // Ricci eigenvalue pair sums nonnegative on the nonneg cone
    let mut ric_worst = f64::INFINITY;
    for n in 2..=3usize {
        let w = (0..1000u64)
            .into_par_iter()
            .map(|i| {
                let t = sample_shifted(n, Cone::Nonneg, 0.01, 61_000 + i * 5 + n as u64);
                ricci_pair_min(&t)
            })
            .reduce(|| f64::INFINITY, f64::min);
        ric_worst = ric_worst.min(w);
    }

    // sup ratio: finite and stable across two disjoint 1e4-sample batches
    let batch = |n: usize, base: u64| -> f64 {
        (0..10_000u64)
            .into_par_iter()
            .map(|i| {
                let t = sample_shifted(n, Cone::TwoNonneg, 0.01, base + i);
                sup_ratio(&t, 4, base ^ (i * 31)).unwrap()
            })
            .reduce(|| 0.0, f64::max)
    };
    let mut ratio_detail = String::new();
    let mut ratio_ok = true;
    for n in 2..=3usize {
        let a = batch(n, 100_000 + n as u64 * 1_000_000);
        let b = batch(n, 500_000 + n as u64 * 1_000_000);
        let rel = (a - b).abs() / a.max(b);
        ratio_ok &= a.is_finite() && b.is_finite() && rel <= 0.10;
        ratio_detail.push_str(&format!("C({n}) = {:.3} [batches {a:.3}/{b:.3}, rel {rel:.3}]; ", a.max(b)));
    }

    let elapsed = start.elapsed().as_secs_f64();
    report(
        "geometric_consequences",
        orth_worst >= -1e-10 && ric_worst >= -1e-10 && ratio_ok,
        format!(
            "min orth bisec {orth_worst:.3e}, min ricci pair {ric_worst:.3e}, {ratio_detail}{elapsed:.1}s"
        ),
    );
}

#[test]
fn acceptance_ricci_positivity_along_flow() {
    let mut worst = f64::INFINITY;
    let mut detail = String::new();
    for n in 2..=3usize {
        let b = standard_basis(n).unwrap();
        for (cone, seed) in [(Cone::Nonneg, 9301u64), (Cone::TwoNonneg, 9402u64)] {
            let mut cfg = MonteCarloConfig::new(n, cone, 100, seed + n as u64);
            cfg.dt = 1e-3;
            cfg.t_end = 1.0;
            cfg.margin = 0.01;
            cfg.frames = 2;
            cfg.ricci_floor = Some(0.05);
            let summary = montecarlo_cone(&cfg, &b).unwrap();
            let g = summary.global.as_ref().unwrap();
            worst = worst.min(g.min_ricci_min);
            detail.push_str(&format!(
                "n={n} {}: min ricci eig {:.3e}; ",
                cone.name(),
                g.min_ricci_min
            ));
        }
    }
    report(
        "ricci_positivity_along_flow",
        worst >= -1e-6,
        format!("{detail}floor 0.05, t in [0,1]"),
    );
}
