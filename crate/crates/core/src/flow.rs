//! Reaction ODE for the curvature tensor in an evolved frame, with the
//! Laplacian dropped, plus its decomposed and matrix-level forms, a
//! fixed-step integrator and the cone-invariance Monte Carlo experiment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{act, FormBasis, OperatorMatrix};
use crate::cones::{cone_report, Cone, ConeReport};
use crate::curvature::{
    recompose_unchecked, HermitianForm, KahlerCurvature, SampleStyle, Tensor4, TracelessParts,
};
use crate::error::{Error, Result};
use crate::lie::{quadratic_combination, sharp, StructureConstants};

/// Default component-magnitude cap. Fixed-step RK4 at `dt = 1e-3` stays well
/// inside its stability region for reaction terms of this size; the reaction
/// ODE blows up in finite time for large data, so trajectories that reach the
/// cap are truncated rather than polluted with unstable steps.
pub const DEFAULT_COMPONENT_CAP: f64 = 50.0;

/// Evolved-frame reaction terms for the curvature tensor:
///
/// `D = -R + Q1 - Q2 + Q3` with
/// `Q1 = R_{ijpq} R_{qpkl}`, `Q2 = R_{ipkq} R_{pjql}`, `Q3 = R_{ilpq} R_{qpkj}`
/// (summed over p, q). The output satisfies every curvature-type invariant.
pub fn rhs_full(t: &KahlerCurvature) -> Result<KahlerCurvature> {
    let n = t.dim();
    let mut out = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = -t.get(i, j, k, l);
                    for p in 0..n {
                        for q in 0..n {
                            acc += t.get(i, j, p, q) * t.get(q, p, k, l)
                                - t.get(i, p, k, q) * t.get(p, j, q, l)
                                + t.get(i, l, p, q) * t.get(q, p, k, j);
                        }
                    }
                    out.set(i, j, k, l, acc);
                }
            }
        }
    }
    KahlerCurvature::new_scaled(out, 1e-10).map_err(|_| Error::InvariantViolation {
        context: "reaction rhs symmetry",
        residual: f64::NAN,
        tol: 1e-10,
    })
}

/// Scalar reaction term `-R + R^2/n + S0 . S0`.
pub fn rhs_scalar(p: &TracelessParts) -> f64 {
    let n = p.dim() as f64;
    -p.scalar + p.scalar * p.scalar / n + p.ric0.inner(&p.ric0)
}

/// Traceless-Ricci reaction term `(1/n)(R - n) S0_{ab} + S_{abij} S0_{ji}`;
/// traceless by construction, checked on output.
pub fn rhs_ric0(p: &TracelessParts) -> Result<HermitianForm> {
    let n = p.dim();
    let acted = act(&p.s4, &p.ric0)?;
    let out = p
        .ric0
        .scaled((p.scalar - n as f64) / n as f64)
        .add(&acted);
    let tr = out.trace().abs();
    let tol = 1e-10 * (1.0 + out.max_abs());
    if tr > tol {
        return Err(Error::InvariantViolation {
            context: "ricci reaction trace",
            residual: tr,
            tol,
        });
    }
    Ok(out)
}

/// Four-tensor reaction term
/// `-S + S_{abij} S_{jicd} + L_{abcd} + (1/n) S0_{ab} S0_{cd}`,
/// where `L` is the commutator-type quadratic combination. The output keeps
/// the traceless-part invariants (interchange, reality, vanishing traces).
pub fn rhs_s4(p: &TracelessParts) -> Result<Tensor4> {
    let n = p.dim();
    let s4 = &p.s4;
    let mut out = quadratic_combination(s4);
    let inv_n = 1.0 / n as f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = out.get(a, b, c, d) - s4.get(a, b, c, d)
                        + inv_n * p.ric0.entry(a, b) * p.ric0.entry(c, d);
                    for i in 0..n {
                        for j in 0..n {
                            acc += s4.get(a, b, i, j) * s4.get(j, i, c, d);
                        }
                    }
                    out.set(a, b, c, d, acc);
                }
            }
        }
    }
    let weak = out.weak_residuals();
    let tol = 1e-10 * (1.0 + out.max_abs());
    if weak.trace > tol || weak.max_violation() > tol {
        return Err(Error::InvariantViolation {
            context: "four-tensor reaction invariants",
            residual: weak.max_violation(),
            tol,
        });
    }
    Ok(out)
}

/// Matrix-level reaction `-M + M^2 - (1/2) M# + (1/n) T`.
///
/// `T` is the rank-one projection of the `(1/n) S0 S0` term: `T_qp = s_q s_p`
/// with `s_q` the basis coefficients of the traceless Ricci part.
pub fn rhs_matrix(
    m: &OperatorMatrix,
    t: &OperatorMatrix,
    sc: &StructureConstants,
) -> Result<OperatorMatrix> {
    let d = m.dim();
    if t.dim() != d || sc.dim() != d {
        return Err(Error::DimensionMismatch(t.dim(), d));
    }
    // d = n^2 - 1
    let n = ((d + 1) as f64).sqrt().round() as usize;
    if n * n != d + 1 {
        return Err(Error::DimensionMismatch(d, n * n - 1));
    }
    let msharp = sharp(m, sc)?;
    let mm = m.matrix();
    let out = -mm + mm * mm - msharp.matrix() * 0.5 + t.matrix() / n as f64;
    OperatorMatrix::new(out, m.basis_id(), 1e-9)
}

/// Coefficients of the traceless Ricci part in the basis, and the rank-one
/// matrix `T_qp = s_q s_p`.
pub fn ricci_projection_matrix(p: &TracelessParts, b: &FormBasis) -> OperatorMatrix {
    let d = b.dim();
    let s: Vec<f64> = b.elems.iter().map(|e| p.ric0.inner(e)).collect();
    let mut out = nalgebra::DMatrix::<f64>::zeros(d, d);
    for q in 0..d {
        for pp in 0..d {
            out[(q, pp)] = s[q] * s[pp];
        }
    }
    OperatorMatrix::from_symmetric(out, b.id())
}

/// One point of a flow trajectory.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub time: f64,
    pub curv: KahlerCurvature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Rk4,
    Euler,
}

impl Method {
    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "rk4" => Some(Method::Rk4),
            "euler" => Some(Method::Euler),
            _ => None,
        }
    }
}

/// Why a trajectory stopped before `t_end`.
#[derive(Clone, Debug, Serialize)]
pub enum TruncationReason {
    /// Component magnitude exceeded the cap (finite-time blow-up of the
    /// reaction ODE).
    ComponentCap { max_abs: f64 },
    /// A state violated the curvature invariants beyond tolerance.
    InvariantViolation { residual: f64 },
    /// Scalar curvature stopped being positive on a cone run.
    NonPositiveScalar { scalar: f64 },
    /// A state became non-finite.
    NonFinite,
}

impl std::fmt::Display for TruncationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TruncationReason::ComponentCap { max_abs } => {
                write!(f, "component cap exceeded (max |R| = {max_abs:.3e})")
            }
            TruncationReason::InvariantViolation { residual } => {
                write!(f, "invariant violation (residual {residual:.3e})")
            }
            TruncationReason::NonPositiveScalar { scalar } => {
                write!(f, "scalar curvature not positive ({scalar:.3e})")
            }
            TruncationReason::NonFinite => write!(f, "non-finite state"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum TrajectoryStatus {
    Completed,
    Truncated {
        at_time: f64,
        reason: TruncationReason,
    },
}

/// Time-ordered flow states with per-state cone diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<FlowState>,
    pub diagnostics: Vec<ConeReport>,
    pub step: f64,
    pub method: Method,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        matches!(self.status, TrajectoryStatus::Completed)
    }

    pub fn last_time(&self) -> f64 {
        self.states.last().map(|s| s.time).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug)]
pub struct IntegratorOptions {
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    /// Random frames used per state for the orthogonal-bisectional and
    /// sup-ratio diagnostics.
    pub diag_frames: usize,
    pub seed: u64,
    pub component_cap: f64,
    pub validate_tol: f64,
    /// Truncate when the scalar curvature stops being positive; enabled on
    /// cone runs where the sup ratio must stay defined.
    pub require_positive_scalar: bool,
}

impl IntegratorOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        IntegratorOptions {
            dt,
            t_end,
            method: Method::Rk4,
            diag_frames: 4,
            seed: 0,
            component_cap: DEFAULT_COMPONENT_CAP,
            validate_tol: 1e-8,
            require_positive_scalar: false,
        }
    }
}

fn derived_seed(base: u64, idx: u64) -> u64 {
    base.wrapping_add(idx.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Fixed-step integration of the tensor reaction ODE. Every accepted state is
/// validated and measured; a state that fails validation, exceeds the
/// component cap or (on cone runs) loses scalar positivity truncates the
/// trajectory with an error flag instead of aborting.
pub fn integrate(s0: FlowState, b: &FormBasis, opts: &IntegratorOptions) -> Result<Trajectory> {
    if opts.dt <= 0.0 || opts.t_end <= s0.time {
        return Err(Error::DimensionMismatch(0, 0));
    }
    let t_start = s0.time;
    let n_steps = ((opts.t_end - t_start) / opts.dt).round().max(1.0) as usize;
    let mut states: Vec<FlowState> = Vec::with_capacity(n_steps + 1);
    let mut diagnostics = Vec::with_capacity(n_steps + 1);
    let mut status = TrajectoryStatus::Completed;

    let mut current = s0;
    for step in 0..=n_steps {
        let max_abs = current.curv.max_abs();
        if !max_abs.is_finite() {
            status = TrajectoryStatus::Truncated {
                at_time: current.time,
                reason: TruncationReason::NonFinite,
            };
            break;
        }
        if max_abs > opts.component_cap {
            status = TrajectoryStatus::Truncated {
                at_time: current.time,
                reason: TruncationReason::ComponentCap { max_abs },
            };
            break;
        }
        let (report, ok) = current.curv.validate(opts.validate_tol * (1.0 + max_abs));
        if !ok {
            status = TrajectoryStatus::Truncated {
                at_time: current.time,
                reason: TruncationReason::InvariantViolation {
                    residual: report.max_violation(),
                },
            };
            break;
        }
        if opts.require_positive_scalar && current.curv.scalar() <= 0.0 {
            status = TrajectoryStatus::Truncated {
                at_time: current.time,
                reason: TruncationReason::NonPositiveScalar {
                    scalar: current.curv.scalar(),
                },
            };
            break;
        }
        let diag = cone_report(
            &current.curv,
            b,
            opts.diag_frames,
            derived_seed(opts.seed, step as u64),
            crate::cones::CONE_TOL,
        )?;
        diagnostics.push(diag);
        states.push(current.clone());
        if step == n_steps {
            break;
        }

        let next = match advance(&current.curv, opts.dt, opts.method, opts.validate_tol) {
            Ok(t) => t,
            Err(e) => {
                status = TrajectoryStatus::Truncated {
                    at_time: current.time,
                    reason: TruncationReason::InvariantViolation {
                        residual: match e {
                            Error::InvariantViolation { residual, .. } => residual,
                            _ => f64::NAN,
                        },
                    },
                };
                break;
            }
        };
        current = FlowState {
            time: t_start + (step as f64 + 1.0) * opts.dt,
            curv: next,
        };
    }

    Ok(Trajectory {
        states,
        diagnostics,
        step: opts.dt,
        method: opts.method,
        status,
    })
}

fn advance(y: &KahlerCurvature, dt: f64, method: Method, tol: f64) -> Result<KahlerCurvature> {
    match method {
        Method::Euler => {
            let k1 = rhs_full(y)?;
            let mut out = (**y).clone();
            out.axpy(dt, &k1);
            KahlerCurvature::new_scaled(out, tol)
        }
        Method::Rk4 => {
            let k1 = rhs_full(y)?;
            let mut y2 = (**y).clone();
            y2.axpy(0.5 * dt, &k1);
            let k2 = rhs_full(&KahlerCurvature::new_scaled(y2, tol)?)?;
            let mut y3 = (**y).clone();
            y3.axpy(0.5 * dt, &k2);
            let k3 = rhs_full(&KahlerCurvature::new_scaled(y3, tol)?)?;
            let mut y4 = (**y).clone();
            y4.axpy(dt, &k3);
            let k4 = rhs_full(&KahlerCurvature::new_scaled(y4, tol)?)?;
            let mut out = (**y).clone();
            out.axpy(dt / 6.0, &k1);
            out.axpy(dt / 3.0, &k2);
            out.axpy(dt / 3.0, &k3);
            out.axpy(dt / 6.0, &k4);
            KahlerCurvature::new_scaled(out, tol)
        }
    }
}

/// Configuration of a cone-invariance Monte Carlo run.
#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloConfig {
    pub n: usize,
    pub cone: Cone,
    pub samples: usize,
    pub dt: f64,
    pub t_end: f64,
    pub margin: f64,
    pub seed: u64,
    pub frames: usize,
    /// When set, samples are additionally shifted until the smallest Ricci
    /// eigenvalue reaches this floor.
    pub ricci_floor: Option<f64>,
}

impl MonteCarloConfig {
    pub fn new(n: usize, cone: Cone, samples: usize, seed: u64) -> Self {
        MonteCarloConfig {
            n,
            cone,
            samples,
            dt: 1e-3,
            t_end: 1.0,
            margin: 0.01,
            seed,
            frames: 4,
            ricci_floor: None,
        }
    }
}

/// Extrema of one trajectory's diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub status: String,
    pub completed: bool,
    pub t_reached: f64,
    pub steps: usize,
    pub min_lambda: f64,
    pub min_lambda_pair: f64,
    pub min_orth_bisec: f64,
    pub min_ricci_min: f64,
    pub min_ricci_pair: f64,
    pub max_sup_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct McExtrema {
    pub min_lambda: f64,
    pub min_lambda_pair: f64,
    pub min_orth_bisec: f64,
    pub min_ricci_min: f64,
    pub min_ricci_pair: f64,
    pub max_sup_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloSummary {
    pub config: MonteCarloConfig,
    pub completed: usize,
    pub truncated: usize,
    pub per_sample: Vec<SampleOutcome>,
    pub global: Option<McExtrema>,
}

fn merge_min(acc: &mut f64, v: f64) {
    if v < *acc {
        *acc = v;
    }
}

/// Samples shifted-into-cone tensors, integrates each one and reports the
/// per-sample and global diagnostic extrema. Samples run in parallel; the
/// result is deterministic in the seed.
pub fn montecarlo_cone(cfg: &MonteCarloConfig, b: &FormBasis) -> Result<MonteCarloSummary> {
    if b.n() != cfg.n {
        return Err(Error::DimensionMismatch(b.n(), cfg.n));
    }
    let outcomes: Vec<Result<SampleOutcome>> = (0..cfg.samples)
        .into_par_iter()
        .map(|idx| run_sample(cfg, b, idx))
        .collect();
    let mut per_sample = Vec::with_capacity(cfg.samples);
    for o in outcomes {
        per_sample.push(o?);
    }
    let mut global: Option<McExtrema> = None;
    for s in &per_sample {
        let g = global.get_or_insert(McExtrema {
            min_lambda: f64::INFINITY,
            min_lambda_pair: f64::INFINITY,
            min_orth_bisec: f64::INFINITY,
            min_ricci_min: f64::INFINITY,
            min_ricci_pair: f64::INFINITY,
            max_sup_ratio: None,
        });
        merge_min(&mut g.min_lambda, s.min_lambda);
        merge_min(&mut g.min_lambda_pair, s.min_lambda_pair);
        merge_min(&mut g.min_orth_bisec, s.min_orth_bisec);
        merge_min(&mut g.min_ricci_min, s.min_ricci_min);
        merge_min(&mut g.min_ricci_pair, s.min_ricci_pair);
        if let Some(v) = s.max_sup_ratio {
            let cur = g.max_sup_ratio.get_or_insert(v);
            if v > *cur {
                *cur = v;
            }
        }
    }
    let completed = per_sample.iter().filter(|s| s.completed).count();
    Ok(MonteCarloSummary {
        config: cfg.clone(),
        completed,
        truncated: per_sample.len() - completed,
        per_sample,
        global,
    })
}

fn run_sample(cfg: &MonteCarloConfig, b: &FormBasis, idx: usize) -> Result<SampleOutcome> {
    let sample_seed = derived_seed(cfg.seed, idx as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let mut t0 = KahlerCurvature::random_with(
        cfg.n,
        &mut rng,
        SampleStyle::ShiftedIntoCone {
            cone: cfg.cone,
            margin: cfg.margin,
        },
        b,
    )?;
    if let Some(floor) = cfg.ricci_floor {
        let lam = crate::cones::ricci_min(&t0);
        if lam < floor {
            // Ricci of space_form(n, 1) is (n+1) I, so a shift of s raises
            // every Ricci eigenvalue by s (n + 1).
            t0 = t0.shifted((floor - lam) / (cfg.n as f64 + 1.0))?;
        }
    }
    let mut opts = IntegratorOptions::new(cfg.dt, cfg.t_end);
    opts.diag_frames = cfg.frames;
    opts.seed = derived_seed(sample_seed, 0x5eed);
    opts.require_positive_scalar = true;
    let traj = integrate(
        FlowState {
            time: 0.0,
            curv: t0,
        },
        b,
        &opts,
    )?;
    let mut out = SampleOutcome {
        index: idx,
        status: match &traj.status {
            TrajectoryStatus::Completed => "completed".to_string(),
            TrajectoryStatus::Truncated { at_time, reason } => {
                format!("truncated at t={at_time:.4}: {reason}")
            }
        },
        completed: traj.completed(),
        t_reached: traj.last_time(),
        steps: traj.states.len().saturating_sub(1),
        min_lambda: f64::INFINITY,
        min_lambda_pair: f64::INFINITY,
        min_orth_bisec: f64::INFINITY,
        min_ricci_min: f64::INFINITY,
        min_ricci_pair: f64::INFINITY,
        max_sup_ratio: None,
    };
    for d in &traj.diagnostics {
        merge_min(&mut out.min_lambda, d.lambda_min);
        merge_min(&mut out.min_lambda_pair, d.lambda_pair_min);
        merge_min(&mut out.min_orth_bisec, d.orth_bisec_min);
        merge_min(&mut out.min_ricci_min, d.ricci_min);
        merge_min(&mut out.min_ricci_pair, d.ricci_pair_min);
        if let Some(v) = d.sup_ratio {
            let cur = out.max_sup_ratio.get_or_insert(v);
            if v > *cur {
                *cur = v;
            }
        }
    }
    Ok(out)
}

/// Derivative of the decomposed parts reassembled into a tensor; equals
/// `rhs_full` of the recomposed tensor.
pub fn rhs_parts_recomposed(p: &TracelessParts) -> Result<KahlerCurvature> {
    let parts = TracelessParts {
        scalar: rhs_scalar(p),
        ric0: rhs_ric0(p)?,
        s4: rhs_s4(p)?,
    };
    Ok(recompose_unchecked(&parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{matrix_traceless, standard_basis};
    use crate::lie::structure_constants;
    use num_complex::Complex64;

    #[test]
    fn space_form_is_fixed_point() {
        for n in 2..=6usize {
            let t = KahlerCurvature::space_form(n, 1.0 / (n as f64 + 1.0)).unwrap();
            let d = rhs_full(&t).unwrap();
            assert!(d.max_abs() < 1e-12, "n={n}: {}", d.max_abs());
        }
        let z = KahlerCurvature::zero(3).unwrap();
        assert_eq!(rhs_full(&z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn scalar_reaction_at_fixed_point() {
        // R = n with vanishing traceless parts is stationary: -n + n^2/n = 0
        let p = KahlerCurvature::space_form(3, 0.25).unwrap().decompose();
        assert!(rhs_scalar(&p).abs() < 1e-12);
        let z = KahlerCurvature::zero(3).unwrap().decompose();
        assert_eq!(rhs_scalar(&z), 0.0);
    }

    #[test]
    fn einstein_parts_have_zero_ricci_reaction() {
        let p = KahlerCurvature::space_form(4, 0.11).unwrap().decompose();
        assert!(rhs_ric0(&p).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn space_form_s4_reaction_consistent_with_fixed_point() {
        let p = KahlerCurvature::space_form(2, 1.0 / 3.0).unwrap().decompose();
        // the assembled parts derivative must vanish like rhs_full does
        let d = rhs_parts_recomposed(&p).unwrap();
        assert!(d.max_abs() < 1e-12);
    }

    #[test]
    fn decomposition_commutes_with_reaction() {
        let b = standard_basis(3).unwrap();
        for seed in 0..10 {
            let t = KahlerCurvature::random(3, seed, SampleStyle::Unconstrained, &b).unwrap();
            let p = t.decompose();
            let via_parts = rhs_parts_recomposed(&p).unwrap();
            let direct = rhs_full(&t).unwrap();
            let scale = 1.0 + direct.max_abs();
            assert!(via_parts.max_abs_diff(&direct) / scale < 1e-12);
        }
    }

    #[test]
    fn ricci_trace_chain() {
        // sum_k D_{ijkk} equals the assembled Ricci reaction from the
        // decomposed equations
        let b = standard_basis(2).unwrap();
        for seed in 0..10 {
            let t = KahlerCurvature::random(2, seed, SampleStyle::Unconstrained, &b).unwrap();
            let p = t.decompose();
            let d = rhs_full(&t).unwrap();
            let lhs = d.second_trace();
            let dr = rhs_scalar(&p);
            let dric0 = rhs_ric0(&p).unwrap();
            let n = t.dim();
            let scale = 1.0 + d.max_abs();
            for i in 0..n {
                for j in 0..n {
                    let rhs = dric0.entry(i, j)
                        + if i == j {
                            Complex64::new(dr / n as f64, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                    assert!((lhs[(i, j)] - rhs).norm() / scale < 1e-12);
                }
            }
        }
    }

    #[test]
    fn matrix_reaction_fixed_point_balance() {
        // n=2: M = I/3, T = 0 gives -1/3 + 1/9 + 2/9 = 0 exactly
        let b = standard_basis(2).unwrap();
        let sc = structure_constants(&b).unwrap();
        let m = OperatorMatrix::from_symmetric(nalgebra::DMatrix::identity(3, 3) / 3.0, b.id());
        let t = OperatorMatrix::from_symmetric(nalgebra::DMatrix::zeros(3, 3), b.id());
        let d = rhs_matrix(&m, &t, &sc).unwrap();
        assert_eq!(d.max_abs(), 0.0);
        // and the scalar arithmetic itself
        assert_eq!(-1.0 / 3.0 + 1.0 / 9.0 + 2.0 / 9.0, 0.0);

        let zero = OperatorMatrix::from_symmetric(nalgebra::DMatrix::zeros(3, 3), b.id());
        assert_eq!(rhs_matrix(&zero, &t, &sc).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn matrix_reaction_matches_tensor_path() {
        for n in 2..=3usize {
            let b = standard_basis(n).unwrap();
            let sc = structure_constants(&b).unwrap();
            for seed in 0..5 {
                let t = KahlerCurvature::random(n, seed, SampleStyle::Unconstrained, &b).unwrap();
                let p = t.decompose();
                let m = matrix_traceless(&p.s4, &b).unwrap();
                let tmat = ricci_projection_matrix(&p, &b);
                let dm = rhs_matrix(&m, &tmat, &sc).unwrap();
                let ds4 = rhs_s4(&p).unwrap();
                let dm_tensor = matrix_traceless(&ds4, &b).unwrap();
                let scale = 1.0 + dm.max_abs();
                assert!(
                    dm.max_abs_diff(&dm_tensor) / scale < 1e-11,
                    "n={n} seed={seed}"
                );
            }
        }
    }

    #[test]
    fn integration_fixed_point_stays_flat() {
        let b = standard_basis(2).unwrap();
        let t = KahlerCurvature::space_form(2, 1.0 / 3.0).unwrap();
        let mut opts = IntegratorOptions::new(1e-3, 1.0);
        opts.diag_frames = 0;
        let traj = integrate(
            FlowState {
                time: 0.0,
                curv: t.clone(),
            },
            &b,
            &opts,
        )
        .unwrap();
        assert!(traj.completed());
        assert_eq!(traj.states.len(), 1001);
        for s in &traj.states {
            assert!(s.curv.max_abs_diff(&t) < 1e-9);
        }

        let z = KahlerCurvature::zero(2).unwrap();
        let traj = integrate(
            FlowState { time: 0.0, curv: z },
            &b,
            &opts,
        )
        .unwrap();
        assert!(traj.completed());
        for s in &traj.states {
            assert_eq!(s.curv.max_abs(), 0.0);
        }
    }

    #[test]
    fn rk4_beats_euler_by_two_orders() {
        let b = standard_basis(2).unwrap();
        // small subcritical start so nothing blows up over [0, 0.5]
        let t0 = KahlerCurvature::new(
            KahlerCurvature::random(2, 3, SampleStyle::Unconstrained, &b)
                .unwrap()
                .scaled(0.05),
            1e-9,
        )
        .unwrap();
        let run = |method: Method, dt: f64| {
            let mut opts = IntegratorOptions::new(dt, 0.5);
            opts.method = method;
            opts.diag_frames = 0;
            integrate(
                FlowState {
                    time: 0.0,
                    curv: t0.clone(),
                },
                &b,
                &opts,
            )
            .unwrap()
        };
        // step-halved RK4 reference
        let reference = run(Method::Rk4, 1e-5);
        let refend = &reference.states.last().unwrap().curv;
        let rk4_err = run(Method::Rk4, 1e-3)
            .states
            .last()
            .unwrap()
            .curv
            .max_abs_diff(refend);
        let euler_err = run(Method::Euler, 1e-4)
            .states
            .last()
            .unwrap()
            .curv
            .max_abs_diff(refend);
        assert!(
            euler_err > 1e2 * rk4_err.max(1e-15),
            "euler {euler_err:.3e} rk4 {rk4_err:.3e}"
        );
    }

    #[test]
    fn montecarlo_empty_and_small() {
        let b = standard_basis(2).unwrap();
        let cfg = MonteCarloConfig::new(2, Cone::TwoNonneg, 0, 1);
        let s = montecarlo_cone(&cfg, &b).unwrap();
        assert!(s.per_sample.is_empty() && s.global.is_none());

        let mut cfg = MonteCarloConfig::new(2, Cone::TwoNonneg, 8, 1);
        cfg.t_end = 0.05;
        cfg.frames = 1;
        let s = montecarlo_cone(&cfg, &b).unwrap();
        assert_eq!(s.per_sample.len(), 8);
        let g = s.global.as_ref().unwrap();
        assert!(g.min_lambda_pair >= -1e-6);
        // determinism
        let s2 = montecarlo_cone(&cfg, &b).unwrap();
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            serde_json::to_string(&s2).unwrap()
        );
    }

    #[test]
    fn ricci_floor_is_enforced_at_start() {
        let b = standard_basis(2).unwrap();
        let mut cfg = MonteCarloConfig::new(2, Cone::Nonneg, 4, 9);
        cfg.t_end = 0.01;
        cfg.frames = 0;
        cfg.ricci_floor = Some(0.05);
        let s = montecarlo_cone(&cfg, &b).unwrap();
        for out in &s.per_sample {
            assert!(out.min_ricci_min >= -1e-6, "sample {}", out.index);
        }
    }
}
