//! Recovering the traceless four-tensor part from the operator matrix.
//!
//! The forward map sends a curvature tensor (parametrized by a Hermitian
//! form on the unordered index pairs) to the matrix of its traceless
//! operator. The matrix only depends on the traceless four-tensor part, so a
//! least-squares solve over the tensor parameters inverts the map wherever an
//! actual curvature matrix is given; the residual detects matrices outside
//! the image.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::{matrix_traceless, FormBasis, OperatorMatrix};
use crate::curvature::{sym_pairs, KahlerCurvature, Tensor4};
use crate::error::{Error, Result};

/// Result of a reconstruction: the recovered traceless four-tensor and the
/// max-abs residual of its operator matrix against the input.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub s4: Tensor4,
    pub residual: f64,
}

/// Precomputed forward map and its SVD for one dimension/basis; reusable
/// across many solves.
pub struct Reconstructor {
    basis: FormBasis,
    param_dim: usize,
    forward: DMatrix<f64>,
    svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

/// Real parameters of a Hermitian matrix on the pair space: diagonal entries,
/// then (re, im) per off-diagonal pair in lexicographic order.
fn param_matrices(np: usize) -> Vec<DMatrix<Complex64>> {
    let mut out = Vec::with_capacity(np * np);
    for a in 0..np {
        let mut h = DMatrix::<Complex64>::zeros(np, np);
        h[(a, a)] = Complex64::new(1.0, 0.0);
        out.push(h);
    }
    for a in 0..np {
        for b in (a + 1)..np {
            let mut h = DMatrix::<Complex64>::zeros(np, np);
            h[(a, b)] = Complex64::new(1.0, 0.0);
            h[(b, a)] = Complex64::new(1.0, 0.0);
            out.push(h);
            let mut h = DMatrix::<Complex64>::zeros(np, np);
            h[(a, b)] = Complex64::new(0.0, 1.0);
            h[(b, a)] = Complex64::new(0.0, -1.0);
            out.push(h);
        }
    }
    out
}

fn assemble_pair_form(np: usize, x: &DVector<f64>) -> DMatrix<Complex64> {
    let mut h = DMatrix::<Complex64>::zeros(np, np);
    let mut at = 0;
    for a in 0..np {
        h[(a, a)] = Complex64::new(x[at], 0.0);
        at += 1;
    }
    for a in 0..np {
        for b in (a + 1)..np {
            h[(a, b)] = Complex64::new(x[at], x[at + 1]);
            h[(b, a)] = Complex64::new(x[at], -x[at + 1]);
            at += 2;
        }
    }
    h
}

/// Upper-triangle vectorization with sqrt(2)-weighted off-diagonal entries,
/// so the Euclidean norm equals the Frobenius norm.
fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * (d + 1) / 2);
    let s2 = std::f64::consts::SQRT_2;
    for p in 0..d {
        v.push(m[(p, p)]);
    }
    for p in 0..d {
        for q in (p + 1)..d {
            v.push(s2 * m[(p, q)]);
        }
    }
    DVector::from_vec(v)
}

impl Reconstructor {
    pub fn new(basis: &FormBasis) -> Result<Self> {
        let n = basis.n();
        let np = n * (n + 1) / 2;
        let params = param_matrices(np);
        let param_dim = params.len();
        let m_dim = basis.dim();
        let vec_dim = m_dim * (m_dim + 1) / 2;
        let mut forward = DMatrix::<f64>::zeros(vec_dim, param_dim);
        for (col, h) in params.iter().enumerate() {
            let t = KahlerCurvature::from_pair_form(n, h)?;
            let m = matrix_traceless(&t, basis)?;
            forward.set_column(col, &vectorize(m.matrix()));
        }
        let svd = forward.clone().svd(true, true);
        Ok(Reconstructor {
            basis: basis.clone(),
            param_dim,
            forward,
            svd,
        })
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    fn sigma_max(&self) -> f64 {
        self.svd
            .singular_values
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Rank of the forward map over the full tensor parameter space.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.sigma_max();
        self.svd
            .singular_values
            .iter()
            .filter(|&&s| s > cut)
            .count()
    }

    /// Dimension of the doubly-traceless parameter subspace (pair forms with
    /// vanishing partial trace) and the forward rank restricted to it.
    pub fn doubly_traceless_rank(&self, rel_tol: f64) -> Result<(usize, usize)> {
        let n = self.basis.n();
        let np = n * (n + 1) / 2;
        let params = param_matrices(np);
        // trace constraints: first_trace of the tensor, split into re/im rows
        let mut cons = DMatrix::<f64>::zeros(2 * n * n, self.param_dim);
        for (col, h) in params.iter().enumerate() {
            let t = KahlerCurvature::from_pair_form(n, h)?;
            let tr = t.first_trace();
            for c in 0..n {
                for d in 0..n {
                    cons[(2 * (c * n + d), col)] = tr[(c, d)].re;
                    cons[(2 * (c * n + d) + 1, col)] = tr[(c, d)].im;
                }
            }
        }
        // nullspace via the spectral decomposition of C^T C
        let gram = cons.transpose() * &cons;
        let eig = gram.symmetric_eigen();
        let lam_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let mut null_cols = Vec::new();
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam <= 1e-10 * (1.0 + lam_max) {
                null_cols.push(eig.eigenvectors.column(i).into_owned());
            }
        }
        let space_dim = null_cols.len();
        let mut null = DMatrix::<f64>::zeros(self.param_dim, space_dim);
        for (j, c) in null_cols.iter().enumerate() {
            null.set_column(j, c);
        }
        let restricted = &self.forward * null;
        let sv = restricted.svd(false, false).singular_values;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let rank = sv.iter().filter(|&&s| s > rel_tol * smax).count();
        Ok((space_dim, rank))
    }

    /// Least-squares solve; always returns the minimum-norm solution and its
    /// residual.
    pub fn solve(&self, m: &OperatorMatrix) -> Result<Reconstruction> {
        let m_dim = self.basis.dim();
        if m.dim() != m_dim {
            return Err(Error::DimensionMismatch(m.dim(), m_dim));
        }
        let rhs = vectorize(m.matrix());
        let eps = 1e-10 * self.sigma_max();
        let x = self
            .svd
            .solve(&rhs, eps)
            .map_err(|_| Error::NotCurvatureMatrix(f64::INFINITY))?;
        let n = self.basis.n();
        let np = n * (n + 1) / 2;
        let h = assemble_pair_form(np, &x);
        let t = KahlerCurvature::from_pair_form(n, &h)?;
        let reassembled = matrix_traceless(&t, &self.basis)?;
        let residual = reassembled.max_abs_diff(m);
        Ok(Reconstruction {
            s4: t.decompose().s4,
            residual,
        })
    }

    /// Solve and require the residual to be at most `tol`; a larger residual
    /// means the matrix is not the operator matrix of any curvature tensor.
    pub fn reconstruct(&self, m: &OperatorMatrix, tol: f64) -> Result<Reconstruction> {
        let r = self.solve(m)?;
        if r.residual > tol {
            return Err(Error::NotCurvatureMatrix(r.residual));
        }
        Ok(r)
    }

    /// A symmetric matrix with no preimage, obtained by projecting a probe
    /// out of the forward image; `None` when the map is onto (n = 2, 3).
    pub fn off_image_matrix(&self, probe_seed: u64) -> Option<OperatorMatrix> {
        use rand::SeedableRng;
        let m_dim = self.basis.dim();
        let vec_dim = m_dim * (m_dim + 1) / 2;
        if self.rank(1e-9) == vec_dim {
            return None;
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(probe_seed);
        let r = DVector::from_fn(vec_dim, |_, _| crate::linalg::standard_normal(&mut rng));
        // subtract the projection onto the image spanned by the left singular
        // vectors with nonzero singular value
        let u = self.svd.u.as_ref().expect("svd with u");
        let cut = 1e-9 * self.sigma_max();
        let mut perp = r.clone();
        for (i, &s) in self.svd.singular_values.iter().enumerate() {
            if s > cut {
                let ui = u.column(i);
                let coef = ui.dot(&r);
                perp -= ui * coef;
            }
        }
        let norm = perp.norm();
        if norm < 1e-8 {
            return None;
        }
        perp /= norm;
        // unvectorize
        let s2 = std::f64::consts::SQRT_2;
        let mut out = DMatrix::<f64>::zeros(m_dim, m_dim);
        for p in 0..m_dim {
            out[(p, p)] = perp[p];
        }
        let mut at = m_dim;
        for p in 0..m_dim {
            for q in (p + 1)..m_dim {
                out[(p, q)] = perp[at] / s2;
                out[(q, p)] = perp[at] / s2;
                at += 1;
            }
        }
        Some(OperatorMatrix::from_symmetric(out, self.basis.id()))
    }
}

/// One-shot reconstruction; builds the forward map internally.
pub fn reconstruct_s4(
    m: &OperatorMatrix,
    basis: &FormBasis,
    tol: f64,
) -> Result<Reconstruction> {
    Reconstructor::new(basis)?.reconstruct(m, tol)
}

/// Number of unordered index pairs for dimension `n`.
pub fn pair_count(n: usize) -> usize {
    sym_pairs(n).len()
}
