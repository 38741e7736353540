//! Cone-membership predicates for the traceless curvature operator and the
//! pointwise geometric inequality checks that follow from them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis::{matrix_traceless, FormBasis, OperatorMatrix};
use crate::curvature::KahlerCurvature;
use crate::error::{Error, Result};
use crate::linalg;

/// Default slack for cone predicates, absorbing eigen-solver noise.
pub const CONE_TOL: f64 = 1e-10;

/// The two operator cones under study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Cone {
    /// All eigenvalues nonnegative.
    Nonneg,
    /// Sum of the two smallest eigenvalues nonnegative.
    TwoNonneg,
}

impl Cone {
    pub fn parse(s: &str) -> Option<Cone> {
        match s {
            "nonneg" => Some(Cone::Nonneg),
            "2nonneg" | "2-nonneg" => Some(Cone::TwoNonneg),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Cone::Nonneg => "nonneg",
            Cone::TwoNonneg => "2nonneg",
        }
    }
}

/// Smallest eigenvalue of a symmetric operator matrix.
pub fn lambda_min(m: &OperatorMatrix) -> f64 {
    linalg::low_spectrum(m.matrix()).0
}

/// Sum of the two smallest eigenvalues.
pub fn lambda_pair_min(m: &OperatorMatrix) -> f64 {
    linalg::low_spectrum(m.matrix()).1
}

pub fn is_nonneg(m: &OperatorMatrix, tol: f64) -> bool {
    lambda_min(m) >= -tol
}

pub fn is_2_nonneg(m: &OperatorMatrix, tol: f64) -> bool {
    lambda_pair_min(m) >= -tol
}

/// Minimum of `R'_{iijj}` (i != j) over the identity frame and `frames`
/// random unitary frames.
pub fn orth_bisec_min(t: &KahlerCurvature, frames: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = t.dim();
    let mut best = f64::INFINITY;
    let mut scan = |tt: &crate::curvature::Tensor4| {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    best = best.min(tt.get(i, i, j, j).re);
                }
            }
        }
    };
    scan(t);
    for _ in 0..frames {
        let u = linalg::haar_unitary(n, &mut rng);
        let tc = t.conjugated(&u);
        scan(&tc);
    }
    if n < 2 {
        0.0
    } else {
        best
    }
}

/// Sum of the two smallest eigenvalues of the Ricci form.
pub fn ricci_pair_min(t: &KahlerCurvature) -> f64 {
    let ev = t.ricci().eigenvalues();
    ev[0] + ev[1]
}

/// Smallest Ricci eigenvalue.
pub fn ricci_min(t: &KahlerCurvature) -> f64 {
    t.ricci().eigenvalues()[0]
}

/// `max |R'_{ijkl}|` over components, the identity frame and `frames` random
/// frames, divided by the scalar curvature. Undefined for `R <= 0`.
pub fn sup_ratio(t: &KahlerCurvature, frames: usize, seed: u64) -> Result<f64> {
    let r = t.scalar();
    if r <= 0.0 {
        return Err(Error::NonPositiveScalar(r));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = t.max_abs();
    for _ in 0..frames {
        let u = linalg::haar_unitary(t.dim(), &mut rng);
        best = best.max(t.conjugated(&u).max_abs());
    }
    Ok(best / r)
}

/// Per-tensor cone diagnostics.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConeReport {
    pub lambda_min: f64,
    pub lambda_pair_min: f64,
    pub orth_bisec_min: f64,
    pub ricci_min: f64,
    pub ricci_pair_min: f64,
    /// None when the scalar curvature is not positive.
    pub sup_ratio: Option<f64>,
    pub max_abs_component: f64,
    pub nonneg: bool,
    pub two_nonneg: bool,
}

pub fn cone_report(
    t: &KahlerCurvature,
    b: &FormBasis,
    frames: usize,
    seed: u64,
    tol: f64,
) -> Result<ConeReport> {
    let m = matrix_traceless(t, b)?;
    let (lam1, pair) = linalg::low_spectrum(m.matrix());
    let ric_ev = t.ricci().eigenvalues();
    Ok(ConeReport {
        lambda_min: lam1,
        lambda_pair_min: pair,
        orth_bisec_min: orth_bisec_min(t, frames, seed),
        ricci_min: ric_ev[0],
        ricci_pair_min: ric_ev[0] + ric_ev[1],
        sup_ratio: sup_ratio(t, frames, seed.wrapping_add(1)).ok(),
        max_abs_component: t.max_abs(),
        nonneg: lam1 >= -tol,
        two_nonneg: pair >= -tol,
    })
}

/// Pointwise inequality suite tied to operator-cone membership, evaluated in
/// the tensor's own frame.
///
/// When the operator is nonnegative the full list applies:
/// `R_iiii + R_jjjj >= 2 R_iijj >= 0` and `R_ii + R_jj >= 0` (diagonal Ricci
/// entries). When it is only 2-nonnegative, only `R_iijj >= 0` is claimed.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InequalityReport {
    /// Operator is nonnegative at the predicate tolerance.
    pub nonneg: bool,
    /// Operator is 2-nonnegative at the predicate tolerance.
    pub two_nonneg: bool,
    /// min over i != j of `R_iijj`.
    pub min_cross: f64,
    /// min over i != j of `R_iiii + R_jjjj - 2 R_iijj`.
    pub min_diag_dominance: f64,
    /// min over i != j of `R_ii + R_jj`.
    pub min_ricci_diag_pair: f64,
    /// Whether every applicable inequality held to the tolerance; false when
    /// neither cone precondition holds (not applicable).
    pub applicable: bool,
    pub ok: bool,
}

pub fn pointwise_inequalities(
    t: &KahlerCurvature,
    b: &FormBasis,
    tol: f64,
) -> Result<InequalityReport> {
    let m = matrix_traceless(t, b)?;
    let (lam1, pair) = linalg::low_spectrum(m.matrix());
    let nonneg = lam1 >= -tol;
    let two_nonneg = pair >= -tol;
    let n = t.dim();
    let ric = t.ricci();
    let mut min_cross = f64::INFINITY;
    let mut min_dom = f64::INFINITY;
    let mut min_ric = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let riijj = t.get(i, i, j, j).re;
            min_cross = min_cross.min(riijj);
            min_dom = min_dom.min(t.get(i, i, i, i).re + t.get(j, j, j, j).re - 2.0 * riijj);
            min_ric = min_ric.min(ric.entry(i, i).re + ric.entry(j, j).re);
        }
    }
    let ok = if nonneg {
        min_cross >= -tol && min_dom >= -tol && min_ric >= -tol
    } else if two_nonneg {
        min_cross >= -tol
    } else {
        false
    };
    Ok(InequalityReport {
        nonneg,
        two_nonneg,
        min_cross,
        min_diag_dominance: min_dom,
        min_ricci_diag_pair: min_ric,
        applicable: nonneg || two_nonneg,
        ok,
    })
}
