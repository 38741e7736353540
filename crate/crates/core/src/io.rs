//! File formats: the tensor JSON schema (generating set with 1-based
//! indices), matrix CSV/JSON, structure-constant dumps and trajectory CSV.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::basis::OperatorMatrix;
use crate::curvature::{KahlerCurvature, Tensor4};
use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::lie::StructureConstants;

/// One listed component, 1-based indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorComponent {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub re: f64,
    pub im: f64,
}

/// Tensor file: a generating set of components; the loader completes the
/// symmetric images and rejects contradictions above tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorJson {
    pub n: usize,
    pub components: Vec<TensorComponent>,
}

/// The eight symmetry images of an index quadruple, with whether the value
/// is conjugated.
fn orbit(i: usize, j: usize, k: usize, l: usize) -> [(usize, usize, usize, usize, bool); 8] {
    [
        (i, j, k, l, false),
        (k, j, i, l, false),
        (i, l, k, j, false),
        (k, l, i, j, false),
        (j, i, l, k, true),
        (j, k, l, i, true),
        (l, i, j, k, true),
        (l, k, j, i, true),
    ]
}

/// Serializes a tensor as a generating set: the lexicographically smallest
/// representative of each nonzero symmetry orbit.
pub fn tensor_to_json(t: &KahlerCurvature) -> TensorJson {
    let n = t.dim();
    let mut components = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = t.get(i, j, k, l);
                    if v.norm() == 0.0 {
                        continue;
                    }
                    let me = (i, j, k, l);
                    let is_rep = orbit(i, j, k, l)
                        .iter()
                        .all(|&(a, b, c, d, _)| me <= (a, b, c, d));
                    if is_rep {
                        components.push(TensorComponent {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                            l: l + 1,
                            re: v.re,
                            im: v.im,
                        });
                    }
                }
            }
        }
    }
    TensorJson { n, components }
}

/// Builds a tensor from a generating set, completing all symmetry images and
/// rejecting contradictions above `tol`. Unlisted orbits are zero.
pub fn tensor_from_json(doc: &TensorJson, tol: f64) -> Result<KahlerCurvature> {
    let n = doc.n;
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let mut t = Tensor4::zeros(n);
    let mut written = vec![false; n * n * n * n];
    for comp in &doc.components {
        if comp.i < 1 || comp.j < 1 || comp.k < 1 || comp.l < 1
            || comp.i > n || comp.j > n || comp.k > n || comp.l > n
        {
            return Err(Error::IndexOutOfRange {
                i: comp.i,
                j: comp.j,
                k: comp.k,
                l: comp.l,
                n,
            });
        }
        let v = Complex64::new(comp.re, comp.im);
        let (i, j, k, l) = (comp.i - 1, comp.j - 1, comp.k - 1, comp.l - 1);
        for (a, b, c, d, conj) in orbit(i, j, k, l) {
            let val = if conj { v.conj() } else { v };
            let flat = ((a * n + b) * n + c) * n + d;
            if written[flat] {
                let delta = (t.get(a, b, c, d) - val).norm();
                if delta > tol {
                    return Err(Error::ComponentConflict {
                        i: a + 1,
                        j: b + 1,
                        k: c + 1,
                        l: d + 1,
                        delta,
                    });
                }
            } else {
                t.set(a, b, c, d, val);
                written[flat] = true;
            }
        }
    }
    KahlerCurvature::new(t, tol)
}

pub fn save_tensor(t: &KahlerCurvature, path: &Path) -> Result<()> {
    let doc = tensor_to_json(t);
    std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

pub fn load_tensor(path: &Path, tol: f64) -> Result<KahlerCurvature> {
    let text = std::fs::read_to_string(path)?;
    let doc: TensorJson = serde_json::from_str(&text)?;
    tensor_from_json(&doc, tol)
}

/// Row-major CSV of a symmetric operator matrix.
pub fn matrix_to_csv(m: &OperatorMatrix) -> String {
    let d = m.dim();
    let mut out = String::new();
    for p in 0..d {
        for q in 0..d {
            if q > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", m.matrix()[(p, q)]));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub basis_id: String,
    pub rows: Vec<Vec<f64>>,
}

pub fn matrix_to_json(m: &OperatorMatrix) -> MatrixJson {
    let d = m.dim();
    MatrixJson {
        dim: d,
        basis_id: m.basis_id().to_string(),
        rows: (0..d)
            .map(|p| (0..d).map(|q| m.matrix()[(p, q)]).collect())
            .collect(),
    }
}

/// Nonzero structure constants as `(lambda, mu, rho, im)` records, sorted by
/// index for regression snapshots.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureConstantEntry {
    pub lambda: usize,
    pub mu: usize,
    pub rho: usize,
    pub im: f64,
}

pub fn structure_constants_to_json(sc: &StructureConstants) -> Vec<StructureConstantEntry> {
    let d = sc.dim();
    let mut out = Vec::new();
    for l in 0..d {
        for m in 0..d {
            for r in 0..d {
                let v = sc.get(l, m, r);
                if v.norm() > 1e-13 {
                    out.push(StructureConstantEntry {
                        lambda: l,
                        mu: m,
                        rho: r,
                        im: v.im,
                    });
                }
            }
        }
    }
    out
}

pub const TRAJECTORY_CSV_HEADER: &str =
    "t,R,lam1,lam2,lam_pair,orth_bisec_min,ricci_min,ricci_pair_min,sup_ratio,max_abs_component";

/// Trajectory CSV with one row per recorded state.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::from(TRAJECTORY_CSV_HEADER);
    out.push('\n');
    for (state, diag) in traj.states.iter().zip(traj.diagnostics.iter()) {
        let lam2 = diag.lambda_pair_min - diag.lambda_min;
        let sup = diag
            .sup_ratio
            .map(|v| format!("{v}"))
            .unwrap_or_else(|| "nan".to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            state.time,
            state.curv.scalar(),
            diag.lambda_min,
            lam2,
            diag.lambda_pair_min,
            diag.orth_bisec_min,
            diag.ricci_min,
            diag.ricci_pair_min,
            sup,
            diag.max_abs_component,
        ));
    }
    out
}
