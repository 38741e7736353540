//! Commutator structure of the traceless (1,1)-forms: structure constants,
//! the Lie-algebra square `M#` of an operator matrix, and the contraction
//! identity tying the quadratic curvature terms to `M#`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{matrix_traceless, FormBasis, OperatorMatrix};
use crate::curvature::{HermitianForm, Tensor4, TracelessParts};
use crate::error::{Error, Result};

/// Matrix commutator `[eta, tau]_{ab} = sum_m eta_{am} tau_{mb} - tau_{am} eta_{mb}`;
/// anti-Hermitian for Hermitian inputs.
pub fn bracket(eta: &HermitianForm, tau: &HermitianForm) -> Result<DMatrix<Complex64>> {
    if eta.dim() != tau.dim() {
        return Err(Error::DimensionMismatch(eta.dim(), tau.dim()));
    }
    let e = eta.matrix();
    let t = tau.matrix();
    Ok(e * t - t * e)
}

/// Structure constants `[phi^l, phi^m] = sum_r c[l][m][r] phi^r` of an
/// orthonormal basis; all entries are purely imaginary.
#[derive(Clone, Debug)]
pub struct StructureConstants {
    dim: usize,
    c: Vec<Complex64>,
    basis_id: String,
    pub max_real_part: f64,
    pub jacobi_residual: f64,
}

impl StructureConstants {
    #[inline]
    fn at(&self, l: usize, m: usize, r: usize) -> usize {
        (l * self.dim + m) * self.dim + r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_id(&self) -> &str {
        &self.basis_id
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize, r: usize) -> Complex64 {
        self.c[self.at(l, m, r)]
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for l in 0..self.dim {
            for m in 0..self.dim {
                for r in 0..self.dim {
                    worst = worst.max((self.get(l, m, r) + self.get(m, l, r)).norm());
                }
            }
        }
        worst
    }

    /// Raw table constructor; computes the diagnostic residuals but imposes
    /// no imaginarity requirement. Used for the artificial real table.
    pub fn from_table(dim: usize, c: Vec<Complex64>, basis_id: &str) -> StructureConstants {
        let mut sc = StructureConstants {
            dim,
            c,
            basis_id: basis_id.to_string(),
            max_real_part: 0.0,
            jacobi_residual: 0.0,
        };
        sc.max_real_part = sc.c.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        sc.jacobi_residual = jacobi_residual(&sc);
        sc
    }

    /// The same table with every entry divided by `sqrt(-1)`: a real,
    /// antisymmetric table satisfying the Jacobi identity, used to exercise
    /// the real-constants sign regime of the Lie-algebra square.
    pub fn real_counterpart(&self) -> StructureConstants {
        let c = self
            .c
            .iter()
            .map(|v| *v / Complex64::new(0.0, 1.0))
            .collect();
        StructureConstants::from_table(self.dim, c, &format!("{}:real", self.basis_id))
    }
}

fn jacobi_residual(sc: &StructureConstants) -> f64 {
    let d = sc.dim;
    let mut worst = 0.0f64;
    for l in 0..d {
        for m in 0..d {
            for n in 0..d {
                for s in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for r in 0..d {
                        acc += sc.get(l, m, r) * sc.get(r, n, s)
                            + sc.get(m, n, r) * sc.get(r, l, s)
                            + sc.get(n, l, r) * sc.get(r, m, s);
                    }
                    worst = worst.max(acc.norm());
                }
            }
        }
    }
    worst
}

/// Computes the structure constants of a basis by projecting each bracket
/// back onto the basis with the Frobenius pairing.
///
/// Fails if a bracket does not lie in the complex span of the basis, if a
/// constant has real part above 1e-12, or if the Jacobi residual exceeds
/// 1e-10.
pub fn structure_constants(b: &FormBasis) -> Result<StructureConstants> {
    let m = b.dim();
    let mut c = vec![Complex64::new(0.0, 0.0); m * m * m];
    for l in 0..m {
        for mu in 0..m {
            let k = bracket(&b.elems[l], &b.elems[mu])?;
            let mut resid = k.clone();
            for r in 0..m {
                // <K, phi^r> = sum K_{ab} conj(phi^r_{ab})
                let mut coef = Complex64::new(0.0, 0.0);
                for (x, y) in k.iter().zip(b.elems[r].matrix().iter()) {
                    coef += x * y.conj();
                }
                c[(l * m + mu) * m + r] = coef;
                resid -= b.elems[r].matrix() * coef;
            }
            let res = resid.camax();
            if res > 1e-10 {
                return Err(Error::InvariantViolation {
                    context: "bracket projection",
                    residual: res,
                    tol: 1e-10,
                });
            }
        }
    }
    let sc = StructureConstants::from_table(m, c, b.id());
    if sc.max_real_part > 1e-12 {
        return Err(Error::InvariantViolation {
            context: "structure constant imaginarity",
            residual: sc.max_real_part,
            tol: 1e-12,
        });
    }
    if sc.jacobi_residual > 1e-10 {
        return Err(Error::InvariantViolation {
            context: "jacobi identity",
            residual: sc.jacobi_residual,
            tol: 1e-10,
        });
    }
    Ok(sc)
}

/// Lie-algebra square `M#_{qp} = C^{ag}_q C^{bd}_p M_{ab} M_{gd}`.
///
/// The result must be real symmetric; an imaginary residue above tolerance is
/// an error.
pub fn sharp(m: &OperatorMatrix, sc: &StructureConstants) -> Result<OperatorMatrix> {
    let d = sc.dim();
    if m.dim() != d {
        return Err(Error::DimensionMismatch(m.dim(), d));
    }
    let mm = m.matrix();
    // W[q][g][b] = sum_a C^{ag}_q M_{ab};  X[p][b][g] = sum_d C^{bd}_p M_{gd}
    let mut w = vec![Complex64::new(0.0, 0.0); d * d * d];
    let mut x = vec![Complex64::new(0.0, 0.0); d * d * d];
    for q in 0..d {
        for g in 0..d {
            for b in 0..d {
                let mut acc_w = Complex64::new(0.0, 0.0);
                let mut acc_x = Complex64::new(0.0, 0.0);
                for a in 0..d {
                    acc_w += sc.get(a, g, q) * mm[(a, b)];
                    // reuse the loop: for X the roles are (b,d,p) with g fixed
                    acc_x += sc.get(g, a, q) * mm[(b, a)];
                }
                w[(q * d + g) * d + b] = acc_w;
                x[(q * d + g) * d + b] = acc_x;
            }
        }
    }
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for q in 0..d {
        for p in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for g in 0..d {
                for b in 0..d {
                    // X[p][b][g] stored at x[(p*d + b)*d + g]
                    acc += w[(q * d + g) * d + b] * x[(p * d + b) * d + g];
                }
            }
            out[(q, p)] = acc;
        }
    }
    let scale = 1.0 + out.camax();
    let mut imag = 0.0f64;
    for v in out.iter() {
        imag = imag.max(v.im.abs());
    }
    if imag > 1e-10 * scale {
        return Err(Error::InvariantViolation {
            context: "sharp imaginary residue",
            residual: imag,
            tol: 1e-10 * scale,
        });
    }
    let real = DMatrix::from_fn(d, d, |q, p| (out[(q, p)].re + out[(p, q)].re) * 0.5);
    OperatorMatrix::new(real, &format!("{}#", m.basis_id()), 1e-9)
}

/// Max componentwise deviation between the quadratic curvature combination
///
/// `L_{abcd} = sum_{mn} S_{amnd} S_{mbcn} - S_{amcn} S_{mbnd}`
///
/// and its Lie-algebra form `-(1/2) M#_{qp} phi^q_{ab} phi^p_{cd}`, where `M`
/// is the matrix of the traceless four-tensor part.
pub fn quadratic_identity_residual(p: &TracelessParts, b: &FormBasis) -> Result<f64> {
    let sc = structure_constants(b)?;
    quadratic_identity_residual_with(p, b, &sc)
}

pub fn quadratic_identity_residual_with(
    p: &TracelessParts,
    b: &FormBasis,
    sc: &StructureConstants,
) -> Result<f64> {
    let s4 = &p.s4;
    let n = s4.dim();
    let lhs = quadratic_combination(s4);
    let m = matrix_traceless(s4, b)?;
    let msharp = sharp(&m, sc)?;
    let d = b.dim();
    let mut worst = 0.0f64;
    for a in 0..n {
        for bb in 0..n {
            for c in 0..n {
                for dd in 0..n {
                    let mut rhs = Complex64::new(0.0, 0.0);
                    for q in 0..d {
                        for pp in 0..d {
                            rhs += Complex64::new(-0.5 * msharp.matrix()[(q, pp)], 0.0)
                                * b.elems[q].entry(a, bb)
                                * b.elems[pp].entry(c, dd);
                        }
                    }
                    worst = worst.max((lhs.get(a, bb, c, dd) - rhs).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// `L_{abcd} = sum_{mn} S_{amnd} S_{mbcn} - S_{amcn} S_{mbnd}`.
pub fn quadratic_combination(s4: &Tensor4) -> Tensor4 {
    let n = s4.dim();
    let mut out = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..n {
                        for nn in 0..n {
                            acc += s4.get(a, m, nn, d) * s4.get(m, b, c, nn)
                                - s4.get(a, m, c, nn) * s4.get(m, b, nn, d);
                        }
                    }
                    out.set(a, b, c, d, acc);
                }
            }
        }
    }
    out
}
