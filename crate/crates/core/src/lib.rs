//! Pointwise algebra of the Kähler bisectional curvature operator.
//!
//! The crate works at a single point of a Kähler manifold with the metric
//! normalized to the identity. It provides:
//!
//! * [`curvature`] — the curvature tensor type, its contractions, the
//!   orthogonal decomposition into scalar / traceless-Ricci / traceless
//!   four-tensor parts, frame changes and seeded samplers;
//! * [`basis`] — the orthonormal basis of traceless (1,1)-forms and the
//!   symmetric matrix of the curvature action on it;
//! * [`reconstruct`] — least-squares inversion of the four-tensor-to-matrix
//!   map;
//! * [`lie`] — commutators of (1,1)-forms, structure constants and the
//!   Lie-algebra square `M#`;
//! * [`cones`] — nonnegativity and 2-nonnegativity predicates with the
//!   geometric inequality checks they imply;
//! * [`flow`] — the evolved-frame reaction ODE (Laplacian dropped), a
//!   fixed-step integrator and the cone-invariance Monte Carlo experiment;
//! * [`io`] — tensor JSON schema, matrix CSV/JSON and trajectory CSV.

pub mod basis;
pub mod cones;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod io;
pub mod lie;
pub mod linalg;
pub mod reconstruct;

pub use basis::{
    act, matrix_full, matrix_traceless, spectrum, standard_basis, trace_bound_check, FormBasis,
    OperatorMatrix, TraceBound,
};
pub use cones::{
    cone_report, is_2_nonneg, is_nonneg, lambda_min, lambda_pair_min, orth_bisec_min,
    pointwise_inequalities, ricci_min, ricci_pair_min, sup_ratio, Cone, ConeReport,
    InequalityReport, CONE_TOL,
};
pub use curvature::{
    recompose, HermitianForm, KahlerCurvature, SampleStyle, Tensor4, TracelessParts,
    ValidationReport, DEFAULT_TOL,
};
pub use error::{Error, Result};
pub use flow::{
    integrate, montecarlo_cone, rhs_full, rhs_matrix, rhs_ric0, rhs_s4, rhs_scalar, FlowState,
    IntegratorOptions, Method, MonteCarloConfig, MonteCarloSummary, Trajectory, TrajectoryStatus,
};
pub use lie::{bracket, quadratic_identity_residual, sharp, structure_constants, StructureConstants};
pub use reconstruct::{reconstruct_s4, Reconstruction, Reconstructor};
