//! Orthonormal basis of the traceless (1,1)-forms and matrix representations
//! of the curvature action on it.
//!
//! The basis starts from the three classical families on index pairs
//! `i < j`:
//!
//! * `A^{ij} = E_ii - E_jj`   (diagonal differences; only the chain `A^{1j}`
//!   is used, orthonormalized in index order),
//! * `B^{ij} = E_ij + E_ji`,
//! * `C^{ij} = -i E_ij + i E_ji`,
//!
//! with `B` and `C` scaled by `1/sqrt(2)`. The normalized Kähler direction
//! `omega_hat = I / sqrt(n)` completes it to a basis of all Hermitian
//! matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::curvature::{HermitianForm, KahlerCurvature, Tensor4};
use crate::error::{Error, Result};
use crate::linalg;

/// Ordered orthonormal basis of the traceless (1,1)-forms, plus the
/// normalized Kähler direction.
#[derive(Clone, Debug)]
pub struct FormBasis {
    n: usize,
    pub omega_hat: HermitianForm,
    pub elems: Vec<HermitianForm>,
    id: String,
}

impl FormBasis {
    /// Wraps an explicit element list; requires `n^2 - 1` traceless elements,
    /// orthonormal to 1e-12 and orthogonal to the Kähler direction.
    pub fn new(n: usize, elems: Vec<HermitianForm>, id: &str) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        if elems.len() != n * n - 1 {
            return Err(Error::DimensionMismatch(elems.len(), n * n - 1));
        }
        let b = FormBasis {
            n,
            omega_hat: HermitianForm::identity(n).scaled(1.0 / (n as f64).sqrt()),
            elems,
            id: id.to_string(),
        };
        let res = b.gram_residual();
        if res > 1e-12 {
            return Err(Error::InvariantViolation {
                context: "basis orthonormality",
                residual: res,
                tol: 1e-12,
            });
        }
        Ok(b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of traceless basis elements, `n^2 - 1`.
    pub fn dim(&self) -> usize {
        self.elems.len()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Max deviation of the Gram matrix from the identity, including the
    /// pairings with `omega_hat`.
    pub fn gram_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (p, ep) in self.elems.iter().enumerate() {
            for (q, eq) in self.elems.iter().enumerate() {
                let expect = if p == q { 1.0 } else { 0.0 };
                worst = worst.max((ep.inner(eq) - expect).abs());
            }
            worst = worst.max(ep.inner(&self.omega_hat).abs());
            worst = worst.max(ep.trace().abs());
        }
        worst = worst.max((self.omega_hat.inner(&self.omega_hat) - 1.0).abs());
        worst
    }
}

/// Builds the standard orthonormal basis for dimension `n`.
///
/// Ordering: the Gram-Schmidt `A^{1j}` chain for ascending `j`, then `B^{ij}`
/// in lexicographic order over `i < j`, then `C^{ij}` likewise.
pub fn standard_basis(n: usize) -> Result<FormBasis> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let mut elems: Vec<HermitianForm> = Vec::with_capacity(n * n - 1);

    for j in 1..n {
        let mut a = DMatrix::<Complex64>::zeros(n, n);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        a[(j, j)] = Complex64::new(-1.0, 0.0);
        let mut w = HermitianForm::new(a, 0.0)?;
        for e in &elems {
            let c = w.inner(e);
            w = w.add(&e.scaled(-c));
        }
        let norm = w.inner(&w).sqrt();
        elems.push(w.scaled(1.0 / norm));
    }

    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut b = DMatrix::<Complex64>::zeros(n, n);
            b[(i, j)] = Complex64::new(inv_sqrt2, 0.0);
            b[(j, i)] = Complex64::new(inv_sqrt2, 0.0);
            elems.push(HermitianForm::new(b, 0.0)?);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut c = DMatrix::<Complex64>::zeros(n, n);
            c[(i, j)] = Complex64::new(0.0, -inv_sqrt2);
            c[(j, i)] = Complex64::new(0.0, inv_sqrt2);
            elems.push(HermitianForm::new(c, 0.0)?);
        }
    }

    let omega_hat = HermitianForm::identity(n).scaled(1.0 / (n as f64).sqrt());
    Ok(FormBasis {
        n,
        omega_hat,
        elems,
        id: format!("abc-gs:n={n}"),
    })
}

/// Action of the curvature on a form:
/// `(R eta)_{kl} = sum_{ij} R_{ijkl} eta_{ji}`.
pub fn act(t: &Tensor4, eta: &HermitianForm) -> Result<HermitianForm> {
    let n = t.dim();
    if eta.dim() != n {
        return Err(Error::DimensionMismatch(eta.dim(), n));
    }
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    s += t.get(i, j, k, l) * eta.entry(j, i);
                }
            }
            out[(k, l)] = s;
        }
    }
    // reality of the tensor makes the result Hermitian up to rounding
    let scale = 1.0 + out.camax();
    let mut res = 0.0f64;
    for k in 0..n {
        for l in 0..=k {
            res = res.max((out[(k, l)] - out[(l, k)].conj()).norm());
        }
    }
    if res > 1e-9 * scale {
        return Err(Error::InvariantViolation {
            context: "curvature action hermiticity",
            residual: res,
            tol: 1e-9 * scale,
        });
    }
    Ok(HermitianForm::from_hermitian(
        (out.clone() + out.adjoint()) * Complex64::new(0.5, 0.0),
    ))
}

/// Real symmetric matrix of an operator in a named basis.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    m: DMatrix<f64>,
    basis_id: String,
}

impl OperatorMatrix {
    pub fn new(m: DMatrix<f64>, basis_id: &str, tol: f64) -> Result<Self> {
        let mut res = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..i {
                res = res.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if res > tol * (1.0 + m.amax()) {
            return Err(Error::InvariantViolation {
                context: "operator matrix symmetry",
                residual: res,
                tol,
            });
        }
        Ok(OperatorMatrix {
            m: (m.clone() + m.transpose()) * 0.5,
            basis_id: basis_id.to_string(),
        })
    }

    pub(crate) fn from_symmetric(m: DMatrix<f64>, basis_id: &str) -> Self {
        OperatorMatrix {
            m,
            basis_id: basis_id.to_string(),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn basis_id(&self) -> &str {
        &self.basis_id
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        (&self.m - &other.m).amax()
    }
}

fn project_matrix(
    t: &Tensor4,
    basis: &[&HermitianForm],
    basis_id: &str,
) -> Result<OperatorMatrix> {
    let m = basis.len();
    let mut out = DMatrix::<Complex64>::zeros(m, m);
    for (q, phi_q) in basis.iter().enumerate() {
        let acted = act(t, phi_q)?;
        for (p, phi_p) in basis.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..t.dim() {
                for b in 0..t.dim() {
                    s += acted.entry(a, b) * phi_p.entry(a, b).conj();
                }
            }
            out[(p, q)] = s;
        }
    }
    let scale = 1.0 + out.camax();
    let mut imag = 0.0f64;
    let mut asym = 0.0f64;
    for p in 0..m {
        for q in 0..m {
            imag = imag.max(out[(p, q)].im.abs());
            if q < p {
                asym = asym.max((out[(p, q)] - out[(q, p)]).norm());
            }
        }
    }
    let tol = 1e-10 * scale;
    if imag > tol || asym > tol {
        return Err(Error::InvariantViolation {
            context: "operator matrix reality/symmetry",
            residual: imag.max(asym),
            tol,
        });
    }
    let real = DMatrix::from_fn(m, m, |p, q| (out[(p, q)].re + out[(q, p)].re) * 0.5);
    Ok(OperatorMatrix::from_symmetric(real, basis_id))
}

/// Matrix of the traceless bisectional curvature operator:
/// `M[p][q] = <act(t, elems[q]), elems[p]>`. Accepts any tensor with the
/// reality symmetry; the scalar and Ricci parts project away.
pub fn matrix_traceless(t: &Tensor4, b: &FormBasis) -> Result<OperatorMatrix> {
    if t.dim() != b.n() {
        return Err(Error::DimensionMismatch(t.dim(), b.n()));
    }
    let refs: Vec<&HermitianForm> = b.elems.iter().collect();
    project_matrix(t, &refs, b.id())
}

/// Matrix of the full curvature action in the basis `(omega_hat, elems)`:
/// corner `R/n`, mixed row/column the traceless-Ricci components over
/// `sqrt(n)`, lower block the traceless operator matrix.
pub fn matrix_full(t: &Tensor4, b: &FormBasis) -> Result<OperatorMatrix> {
    if t.dim() != b.n() {
        return Err(Error::DimensionMismatch(t.dim(), b.n()));
    }
    let mut refs: Vec<&HermitianForm> = vec![&b.omega_hat];
    refs.extend(b.elems.iter());
    project_matrix(t, &refs, &format!("{}+omega", b.id()))
}

/// Eigenvalues of a symmetric operator matrix, ascending.
pub fn spectrum(m: &OperatorMatrix) -> Vec<f64> {
    linalg::sym_eigenvalues(m.matrix())
}

/// Outcome of the trace bound `tr(M) <= (n-1) R` on the 2-nonnegative cone.
#[derive(Clone, Copy, Debug)]
pub struct TraceBound {
    pub trace_m: f64,
    pub bound: f64,
    /// Whether the 2-nonnegativity precondition held; the check is skipped
    /// otherwise.
    pub applicable: bool,
    pub ok: bool,
}

pub fn trace_bound_check(t: &KahlerCurvature, b: &FormBasis, tol: f64) -> Result<TraceBound> {
    let m = matrix_traceless(t, b)?;
    let (_, pair) = linalg::low_spectrum(m.matrix());
    let applicable = pair >= -tol;
    let trace_m = m.trace();
    let bound = (b.n() as f64 - 1.0) * t.scalar();
    Ok(TraceBound {
        trace_m,
        bound,
        applicable,
        ok: applicable && trace_m <= bound + tol,
    })
}
