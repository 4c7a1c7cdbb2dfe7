//! Local extrema of `P(x) = ∏ ⟨v_j, x⟩` on the unit sphere, and numerical
//! certificates for the identities and inequalities of the real
//! polarization problem.
//!
//! * [`numerics`]: small dense kernels (LU, Cholesky, dual bases, finite
//!   differences, monomial polynomials, the seeded PRNG).
//! * [`systems`]: vector configurations, Coxeter arrangements and the
//!   family registry.
//! * [`extrema`]: one extremal point per chamber via a barrier Newton solve.
//! * [`certify`]: residuals and verdicts over an enumerated extrema set.

// `!(x <= tol)` is deliberate: NaN must fail a check. Index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod certify;
pub mod extrema;
pub mod numerics;
pub mod systems;
