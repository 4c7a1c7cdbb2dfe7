//! Dense linear algebra and calculus kernels for the small problems this
//! crate deals with (dimensions up to a few dozen).
//!
//! Everything here is unblocked and allocation-happy; sizes never exceed
//! 32×32 so simplicity wins over speed.

mod extended;
mod lu;
mod matrix;
mod poly;
mod rng;

use thiserror::Error;

pub use extended::det_identity_plus_gram;
pub use lu::{
    condition_1, dual_basis, lu_determinant, orthogonal_complement, orthonormal_span, rank,
    rank_with_pivots, spd_solve, Lu, DUAL_BASIS_PIVOT_RATIO,
};
pub use matrix::{axpy, distance, dot, norm, scale, sub, Matrix};
pub use poly::{eval_poly, monomials_up_to, random_poly, MonomialPoly, Term};
pub use rng::SplitMix64;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("matrix is not positive definite (pivot column {column})")]
    NotPositiveDefinite { column: usize },
    #[error("basis is numerically singular (pivot ratio {pivot_ratio:e})")]
    Singular { pivot_ratio: f64 },
    #[error("non-finite function value at stencil point {coord} ({side})")]
    Stencil { coord: usize, side: &'static str },
}

/// Central-difference gradient `(f(x+h e_i) - f(x-h e_i)) / 2h`.
pub fn fd_gradient<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>, NumericsError>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        if !fp.is_finite() {
            return Err(NumericsError::Stencil {
                coord: i,
                side: "+",
            });
        }
        if !fm.is_finite() {
            return Err(NumericsError::Stencil {
                coord: i,
                side: "-",
            });
        }
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

/// Central-difference Hessian. Used as an oracle for second-order identities.
pub fn fd_hessian<F>(f: F, x: &[f64], h: f64) -> Result<Matrix, NumericsError>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x.len();
    let mut out = Matrix::zeros(n, n);
    let mut p = x.to_vec();
    let f0 = f(x);
    for i in 0..n {
        for j in i..n {
            let val = if i == j {
                p[i] = x[i] + h;
                let fp = f(&p);
                p[i] = x[i] - h;
                let fm = f(&p);
                p[i] = x[i];
                (fp - 2.0 * f0 + fm) / (h * h)
            } else {
                let mut corner = |si: f64, sj: f64| {
                    p[i] = x[i] + si * h;
                    p[j] = x[j] + sj * h;
                    let v = f(&p);
                    p[i] = x[i];
                    p[j] = x[j];
                    v
                };
                (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                    / (4.0 * h * h)
            };
            if !val.is_finite() {
                return Err(NumericsError::Stencil {
                    coord: i,
                    side: "hessian",
                });
            }
            out[(i, j)] = val;
            out[(j, i)] = val;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_gradient_affine_and_quadratic() {
        let c = [0.5, -2.0, 3.25];
        let g = fd_gradient(|x| dot(&c, x), &[1.0, 2.0, -0.3], FD_STEP).unwrap();
        for (a, b) in g.iter().zip(&c) {
            assert!((a - b).abs() < 1e-9);
        }
        let g = fd_gradient(|x| dot(x, x), &[1.0, 2.0], FD_STEP).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8 && (g[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn fd_gradient_reports_bad_stencil() {
        let r = fd_gradient(|x| 1.0 / x[0], &[0.0], 0.0);
        assert!(matches!(r, Err(NumericsError::Stencil { coord: 0, .. })));
        let r = fd_gradient(|x| (x[0] - 1e-6).ln(), &[1e-6 + 1e-6], FD_STEP);
        assert!(matches!(r, Err(NumericsError::Stencil { .. })));
    }

    #[test]
    fn fd_hessian_of_quadratic() {
        let h = fd_hessian(|x| x[0] * x[0] + 3.0 * x[0] * x[1], &[0.2, 0.7], 1e-4).unwrap();
        assert!((h[(0, 0)] - 2.0).abs() < 1e-6);
        assert!((h[(0, 1)] - 3.0).abs() < 1e-6);
        assert!(h[(1, 1)].abs() < 1e-6);
    }
}
