//! Pointwise Kähler curvature tensors, their contractions and the orthogonal
//! decomposition into scalar, traceless-Ricci and traceless four-tensor parts.
//!
//! Everything is expressed in a frame where the metric is the identity, so a
//! curvature value is just the complex array `R_{i \bar j k \bar l}`. A tensor
//! of curvature type satisfies
//!
//! * pair symmetry   `R_{ijkl} = R_{kjil} = R_{ilkj}`,
//! * reality         `conj(R_{ijkl}) = R_{jilk}`.
//!
//! The traceless four-tensor part produced by [`KahlerCurvature::decompose`]
//! keeps only the weaker interchange symmetry `S_{abcd} = S_{cdab}` together
//! with reality and vanishing partial traces; it is *not* of curvature type.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::ops::Deref;

use crate::basis::{matrix_traceless, FormBasis};
use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::linalg;

/// Default tolerance for invariant checks: double-precision contractions over
/// at most 6^4 terms.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Dense complex array indexed by four indices in `0..n`.
///
/// This is the raw storage shared by curvature tensors and their traceless
/// parts; it carries no symmetry guarantee of its own.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    n: usize,
    comp: Vec<Complex64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            comp: vec![Complex64::new(0.0, 0.0); n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.comp[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: Complex64) {
        let at = self.idx(i, j, k, l);
        self.comp[at] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.comp.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, f: f64) -> Self {
        Tensor4 {
            n: self.n,
            comp: self.comp.iter().map(|c| c * f).collect(),
        }
    }

    /// `self += f * other`
    pub fn axpy(&mut self, f: f64, other: &Tensor4) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.comp.iter_mut().zip(other.comp.iter()) {
            *a += f * b;
        }
    }

    pub fn add(&self, other: &Tensor4) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Tensor4) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.comp
            .iter()
            .zip(other.comp.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Second-pair trace `sum_k T_{i j k k}` as a complex matrix.
    pub fn second_trace(&self) -> DMatrix<Complex64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.get(i, j, k, k)).sum())
    }

    /// First-pair trace `sum_a T_{a a c d}` as a complex matrix.
    pub fn first_trace(&self) -> DMatrix<Complex64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |c, d| (0..n).map(|a| self.get(a, a, c, d)).sum())
    }

    /// Full scalar trace `sum_{i,k} T_{i i k k}`.
    pub fn scalar_raw(&self) -> Complex64 {
        let n = self.n;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                s += self.get(i, i, k, k);
            }
        }
        s
    }

    /// Residuals of the curvature-type invariants.
    pub fn curvature_residuals(&self) -> ValidationReport {
        let n = self.n;
        let mut pair = 0.0f64;
        let mut conj_pair = 0.0f64;
        let mut reality = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.get(i, j, k, l);
                        pair = pair.max((v - self.get(k, j, i, l)).norm());
                        conj_pair = conj_pair.max((v - self.get(i, l, k, j)).norm());
                        reality = reality.max((v.conj() - self.get(j, i, l, k)).norm());
                    }
                }
            }
        }
        ValidationReport {
            pair_symmetry: pair,
            conj_pair_symmetry: conj_pair,
            reality,
            max_abs: self.max_abs(),
        }
    }

    /// Max-abs residual of the weaker invariants carried by traceless
    /// four-tensor parts: interchange symmetry, reality and both partial
    /// traces.
    pub fn weak_residuals(&self) -> WeakValidation {
        let n = self.n;
        let mut interchange = 0.0f64;
        let mut reality = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.get(i, j, k, l);
                        interchange = interchange.max((v - self.get(k, l, i, j)).norm());
                        reality = reality.max((v.conj() - self.get(j, i, l, k)).norm());
                    }
                }
            }
        }
        let trace = self
            .first_trace()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(
                self.second_trace()
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max),
            );
        WeakValidation {
            interchange,
            reality,
            trace,
        }
    }

    /// `T'_{abcd} = sum U_{ia} conj(U_{jb}) U_{kc} conj(U_{ld}) T_{ijkl}`,
    /// computed as four successive single-index contractions.
    pub fn conjugated(&self, u: &DMatrix<Complex64>) -> Tensor4 {
        let n = self.n;
        let mut t1 = Tensor4::zeros(n);
        for a in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = Complex64::new(0.0, 0.0);
                        for i in 0..n {
                            s += u[(i, a)] * self.get(i, j, k, l);
                        }
                        t1.set(a, j, k, l, s);
                    }
                }
            }
        }
        let mut t2 = Tensor4::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = Complex64::new(0.0, 0.0);
                        for j in 0..n {
                            s += u[(j, b)].conj() * t1.get(a, j, k, l);
                        }
                        t2.set(a, b, k, l, s);
                    }
                }
            }
        }
        let mut t3 = Tensor4::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for l in 0..n {
                        let mut s = Complex64::new(0.0, 0.0);
                        for k in 0..n {
                            s += u[(k, c)] * t2.get(a, b, k, l);
                        }
                        t3.set(a, b, c, l, s);
                    }
                }
            }
        }
        let mut out = Tensor4::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut s = Complex64::new(0.0, 0.0);
                        for l in 0..n {
                            s += u[(l, d)].conj() * t3.get(a, b, c, l);
                        }
                        out.set(a, b, c, d, s);
                    }
                }
            }
        }
        out
    }
}

/// Max violation of each curvature-type invariant.
#[derive(Clone, Copy, Debug)]
pub struct ValidationReport {
    pub pair_symmetry: f64,
    pub conj_pair_symmetry: f64,
    pub reality: f64,
    pub max_abs: f64,
}

impl ValidationReport {
    pub fn max_violation(&self) -> f64 {
        self.pair_symmetry.max(self.conj_pair_symmetry).max(self.reality)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }

    /// Pass/fail with the tolerance scaled by the tensor magnitude, for
    /// states produced by floating-point evolution.
    pub fn passes_scaled(&self, tol: f64) -> bool {
        self.max_violation() <= tol * (1.0 + self.max_abs)
    }
}

/// Residuals of the traceless-part invariants.
#[derive(Clone, Copy, Debug)]
pub struct WeakValidation {
    pub interchange: f64,
    pub reality: f64,
    pub trace: f64,
}

impl WeakValidation {
    pub fn max_violation(&self) -> f64 {
        self.interchange.max(self.reality).max(self.trace)
    }
}

/// A real (1,1)-form at a point: an `n x n` Hermitian coefficient matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianForm {
    m: DMatrix<Complex64>,
}

impl HermitianForm {
    pub fn new(m: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        let res = hermitian_residual(&m);
        if res > tol {
            return Err(Error::InvariantViolation {
                context: "hermitian form",
                residual: res,
                tol,
            });
        }
        Ok(HermitianForm {
            m: (m.clone() + m.adjoint()) * Complex64::new(0.5, 0.0),
        })
    }

    /// Wraps a matrix that is Hermitian by construction.
    pub(crate) fn from_hermitian(m: DMatrix<Complex64>) -> Self {
        debug_assert!(hermitian_residual(&m) <= 1e-9 * (1.0 + m.camax()));
        HermitianForm { m }
    }

    pub fn zero(n: usize) -> Self {
        HermitianForm {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        HermitianForm {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    #[inline]
    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.m[(a, b)]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Frobenius pairing `<eta, tau> = sum eta_{ab} conj(tau_{ab})`; real for
    /// Hermitian arguments.
    pub fn inner(&self, other: &HermitianForm) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (a, b) in self.m.iter().zip(other.m.iter()) {
            s += a * b.conj();
        }
        s.re
    }

    pub fn scaled(&self, f: f64) -> Self {
        HermitianForm {
            m: &self.m * Complex64::new(f, 0.0),
        }
    }

    pub fn add(&self, other: &HermitianForm) -> Self {
        HermitianForm {
            m: &self.m + &other.m,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.m.camax()
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::herm_eigenvalues(&self.m)
    }
}

fn hermitian_residual(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Scalar, traceless Ricci and traceless four-tensor parts of a curvature
/// tensor.
#[derive(Clone, Debug)]
pub struct TracelessParts {
    pub scalar: f64,
    pub ric0: HermitianForm,
    pub s4: Tensor4,
}

impl TracelessParts {
    pub fn dim(&self) -> usize {
        self.ric0.dim()
    }

    /// Checks the traceless-part invariants: `tr ric0 = 0`, and the
    /// four-tensor part satisfies interchange symmetry, reality and has
    /// vanishing partial traces.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.ric0.trace().abs();
        if tr > tol {
            return Err(Error::InvariantViolation {
                context: "traceless ricci trace",
                residual: tr,
                tol,
            });
        }
        let weak = self.s4.weak_residuals();
        let res = weak.max_violation();
        if res > tol * (1.0 + self.s4.max_abs()) {
            return Err(Error::InvariantViolation {
                context: "traceless four-tensor invariants",
                residual: res,
                tol,
            });
        }
        Ok(())
    }
}

/// Pointwise Kähler curvature tensor with the metric normalized to the
/// identity; construction enforces the curvature-type invariants.
#[derive(Clone, Debug, PartialEq)]
pub struct KahlerCurvature(Tensor4);

impl Deref for KahlerCurvature {
    type Target = Tensor4;

    fn deref(&self) -> &Tensor4 {
        &self.0
    }
}

impl KahlerCurvature {
    /// Validates the curvature invariants at absolute tolerance `tol`.
    pub fn new(t: Tensor4, tol: f64) -> Result<Self> {
        if t.dim() < 2 {
            return Err(Error::DimensionTooSmall(t.dim()));
        }
        let report = t.curvature_residuals();
        if !report.passes(tol) {
            return Err(Error::InvariantViolation {
                context: "curvature symmetries",
                residual: report.max_violation(),
                tol,
            });
        }
        Ok(KahlerCurvature(t))
    }

    /// Like [`KahlerCurvature::new`] but with the tolerance scaled by the
    /// tensor magnitude; used for states produced by numerical evolution.
    pub fn new_scaled(t: Tensor4, tol: f64) -> Result<Self> {
        if t.dim() < 2 {
            return Err(Error::DimensionTooSmall(t.dim()));
        }
        let report = t.curvature_residuals();
        if !report.passes_scaled(tol) {
            return Err(Error::InvariantViolation {
                context: "curvature symmetries",
                residual: report.max_violation(),
                tol,
            });
        }
        Ok(KahlerCurvature(t))
    }

    pub fn zero(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        Ok(KahlerCurvature(Tensor4::zeros(n)))
    }

    /// Constant-holomorphic-sectional-curvature model
    /// `R_{ijkl} = c (d_{ij} d_{kl} + d_{il} d_{kj})`.
    pub fn space_form(n: usize, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        let mut t = Tensor4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = c * ((i == j && k == l) as u8 as f64
                            + (i == l && k == j) as u8 as f64);
                        if v != 0.0 {
                            t.set(i, j, k, l, Complex64::new(v, 0.0));
                        }
                    }
                }
            }
        }
        Ok(KahlerCurvature(t))
    }

    /// Builds a tensor from a Hermitian bilinear form on the unordered index
    /// pairs `(i,k)`: `R_{ijkl} = H[(ik),(jl)]`. This forces every
    /// curvature-type invariant.
    pub fn from_pair_form(n: usize, h: &DMatrix<Complex64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        let pairs = sym_pairs(n);
        if h.nrows() != pairs.len() || h.ncols() != pairs.len() {
            return Err(Error::DimensionMismatch(h.nrows(), pairs.len()));
        }
        let res = hermitian_residual(h);
        if res > DEFAULT_TOL * (1.0 + h.camax()) {
            return Err(Error::InvariantViolation {
                context: "pair form hermiticity",
                residual: res,
                tol: DEFAULT_TOL,
            });
        }
        let mut t = Tensor4::zeros(n);
        for (a, &(i, k)) in pairs.iter().enumerate() {
            for (b, &(j, l)) in pairs.iter().enumerate() {
                let v = h[(a, b)];
                for &(ii, kk) in &[(i, k), (k, i)] {
                    for &(jj, ll) in &[(j, l), (l, j)] {
                        t.set(ii, jj, kk, ll, v);
                    }
                }
            }
        }
        Ok(KahlerCurvature(t))
    }

    pub fn into_inner(self) -> Tensor4 {
        self.0
    }

    /// Max violation of each invariant; passes iff all are at most `tol`.
    pub fn validate(&self, tol: f64) -> (ValidationReport, bool) {
        let report = self.0.curvature_residuals();
        let ok = report.passes(tol);
        (report, ok)
    }

    /// Ricci contraction `R_{ij} = sum_k R_{ijkk}`.
    pub fn ricci(&self) -> HermitianForm {
        let m = self.0.second_trace();
        HermitianForm::from_hermitian((m.clone() + m.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// Scalar curvature `R = sum_{i,k} R_{iikk}`.
    pub fn scalar(&self) -> f64 {
        self.0.scalar_raw().re
    }

    /// Splits into scalar, traceless Ricci and traceless four-tensor parts.
    pub fn decompose(&self) -> TracelessParts {
        let n = self.dim();
        let r = self.scalar();
        let ric = self.ricci();
        let mut ric0 = ric.matrix().clone();
        for i in 0..n {
            ric0[(i, i)] -= Complex64::new(r / n as f64, 0.0);
        }
        let ric0 = HermitianForm::from_hermitian(ric0);
        let mut s4 = self.0.clone();
        let inv_n = 1.0 / n as f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut v = s4.get(a, b, c, d);
                        if c == d {
                            v -= inv_n * ric0.entry(a, b);
                        }
                        if a == b {
                            v -= inv_n * ric0.entry(c, d);
                        }
                        if a == b && c == d {
                            v -= Complex64::new(r * inv_n * inv_n, 0.0);
                        }
                        s4.set(a, b, c, d, v);
                    }
                }
            }
        }
        TracelessParts {
            scalar: r,
            ric0,
            s4,
        }
    }

    /// Frame change by a unitary matrix; rejects `U` with unitarity residual
    /// above 1e-12.
    pub fn unitary_conjugate(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(u.nrows(), self.dim()));
        }
        let res = linalg::unitarity_residual(u);
        if res > 1e-12 {
            return Err(Error::NotUnitary(res));
        }
        let t = self.0.conjugated(u);
        KahlerCurvature::new_scaled(t, DEFAULT_TOL)
    }

    /// Deterministic random tensor; see [`SampleStyle`].
    pub fn random(n: usize, seed: u64, style: SampleStyle, basis: &FormBasis) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(n, &mut rng, style, basis)
    }

    pub fn random_with(
        n: usize,
        rng: &mut ChaCha8Rng,
        style: SampleStyle,
        basis: &FormBasis,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        let np = n * (n + 1) / 2;
        let g = DMatrix::from_fn(np, np, |_, _| linalg::complex_normal(rng));
        let h = (g.clone() + g.adjoint()) * Complex64::new(0.5, 0.0);
        let t = Self::from_pair_form(n, &h)?;
        match style {
            SampleStyle::Unconstrained => Ok(t),
            SampleStyle::ShiftedIntoCone { cone, margin } => {
                let m = matrix_traceless(&t, basis)?;
                let (lam1, pair) = linalg::low_spectrum(m.matrix());
                let s = match cone {
                    Cone::Nonneg => (margin - lam1).max(0.0),
                    Cone::TwoNonneg => ((margin - pair) / 2.0).max(0.0),
                };
                t.shifted(s)
            }
        }
    }

    /// `self + s * space_form(n, 1)`; shifts the traceless operator spectrum
    /// by exactly `s`.
    pub fn shifted(&self, s: f64) -> Result<Self> {
        if s == 0.0 {
            return Ok(self.clone());
        }
        let sf = KahlerCurvature::space_form(self.dim(), 1.0)?;
        let mut t = self.0.clone();
        t.axpy(s, &sf.0);
        Ok(KahlerCurvature(t))
    }
}

/// Reassembles a curvature tensor from its decomposition:
/// `R_{abcd} = s4 + (1/n)(S_ab d_cd + S_cd d_ab) + (1/n^2) R d_ab d_cd`.
///
/// Rejects parts whose invariants are violated above `tol`.
pub fn recompose(p: &TracelessParts, tol: f64) -> Result<KahlerCurvature> {
    p.validate(tol)?;
    Ok(recompose_unchecked(p))
}

pub(crate) fn recompose_unchecked(p: &TracelessParts) -> KahlerCurvature {
    let n = p.dim();
    let inv_n = 1.0 / n as f64;
    let mut t = p.s4.clone();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = t.get(a, b, c, d);
                    if c == d {
                        v += inv_n * p.ric0.entry(a, b);
                    }
                    if a == b {
                        v += inv_n * p.ric0.entry(c, d);
                    }
                    if a == b && c == d {
                        v += Complex64::new(p.scalar * inv_n * inv_n, 0.0);
                    }
                    t.set(a, b, c, d, v);
                }
            }
        }
    }
    KahlerCurvature(t)
}

/// Styles for [`KahlerCurvature::random`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleStyle {
    /// Random Hermitian pair form, no constraint.
    Unconstrained,
    /// Adds the smallest multiple of `space_form(n, 1)` that puts the
    /// traceless operator into the requested cone with the given margin.
    ShiftedIntoCone { cone: Cone, margin: f64 },
}

/// Unordered index pairs `(i,k)`, `i <= k`, in lexicographic order.
pub fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for k in i..n {
            out.push((i, k));
        }
    }
    out
}
