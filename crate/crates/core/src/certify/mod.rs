//! Closed-form quantities attached to `P(x) = ∏⟨v_j, x⟩` and the identities
//! they satisfy, each evaluated as a residual.

mod report;

use thiserror::Error;

use crate::extrema::ExtremaSet;
use crate::numerics::{self, dot, lu_determinant, Matrix, MonomialPoly, NumericsError, SplitMix64};
use crate::systems::{validate, VectorSystem};

pub use report::{
    classify, gram_sign_check, strong_weak_report, CertificationReport, Classification, Gate,
    PointResiduals, ReportOptions, Tolerances, GRAM_TOL,
};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CertifyError {
    #[error("point lies on the hyperplane of vector {index}")]
    Boundary { index: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("extrema set is incomplete ({found} points, expected {expected:?})")]
    Incomplete { found: usize, expected: Option<u64> },
    #[error("test polynomial has degree {degree}, identity needs degree <= {max}")]
    Degree { degree: u32, max: u32 },
    #[error("unknown tolerance `{0}`")]
    UnknownTolerance(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn nonzero_products(sys: &VectorSystem, x: &[f64]) -> Result<Vec<f64>, CertifyError> {
    if x.len() != sys.dim() {
        return Err(NumericsError::Dimension(format!(
            "point has length {}, system lives in ℝ^{}",
            x.len(),
            sys.dim()
        ))
        .into());
    }
    let a = sys.inner_products(x);
    match a.iter().position(|&v| v == 0.0) {
        Some(index) => Err(CertifyError::Boundary { index }),
        None => Ok(a),
    }
}

pub(crate) fn require_complete(es: &ExtremaSet) -> Result<(), CertifyError> {
    if es.complete {
        Ok(())
    } else {
        Err(CertifyError::Incomplete {
            found: es.points.len(),
            expected: es.expected_count,
        })
    }
}

/// `P(x) = ∏⟨v_j, x⟩`.
pub fn eval_p(sys: &VectorSystem, x: &[f64]) -> f64 {
    sys.vectors().iter().map(|v| dot(v, x)).product()
}

/// `∇P(x)`. Uses `P Σ v_j/⟨v_j,x⟩` away from the walls and the product
/// rule `Σ_j (∏_{k≠j} ⟨v_k,x⟩) v_j` on them.
pub fn grad_p(sys: &VectorSystem, x: &[f64]) -> Vec<f64> {
    let a = sys.inner_products(x);
    let mut g = vec![0.0; sys.dim()];
    if a.iter().all(|&v| v != 0.0) {
        let p: f64 = a.iter().product();
        for (v, &aj) in sys.vectors().iter().zip(&a) {
            numerics::axpy(p / aj, v, &mut g);
        }
    } else {
        for (j, v) in sys.vectors().iter().enumerate() {
            let others: f64 = a
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &ak)| ak)
                .product();
            numerics::axpy(others, v, &mut g);
        }
    }
    g
}

/// `ΔP(x) = P (‖Σ v_j/⟨v_j,x⟩‖² − Σ ⟨v_j,x⟩⁻²)`.
pub fn laplacian_p(sys: &VectorSystem, x: &[f64]) -> Result<f64, CertifyError> {
    let a = nonzero_products(sys, x)?;
    let p: f64 = a.iter().product();
    let mut sum = vec![0.0; sys.dim()];
    for (v, &aj) in sys.vectors().iter().zip(&a) {
        numerics::axpy(1.0 / aj, v, &mut sum);
    }
    let s: f64 = a.iter().map(|aj| 1.0 / (aj * aj)).sum();
    Ok(p * (dot(&sum, &sum) - s))
}

/// `S(u) = Σ ⟨v_j, u⟩⁻²`.
pub fn s_value(sys: &VectorSystem, u: &[f64]) -> Result<f64, CertifyError> {
    Ok(nonzero_products(sys, u)?
        .iter()
        .map(|a| 1.0 / (a * a))
        .sum())
}

/// `I + (1/n) Σ v_j v_jᵀ / ⟨v_j, u⟩²`.
pub fn weight_matrix(sys: &VectorSystem, u: &[f64]) -> Result<Matrix, CertifyError> {
    let a = nonzero_products(sys, u)?;
    let n = sys.n() as f64;
    let mut m = Matrix::identity(sys.dim());
    for (v, &aj) in sys.vectors().iter().zip(&a) {
        m.add_outer(1.0 / (n * aj * aj), v, v);
    }
    Ok(m)
}

/// `μ(u) = 1 / det(I + (1/n) Σ v_j v_jᵀ / ⟨v_j, u⟩²)`.
pub fn mu_weight(sys: &VectorSystem, u: &[f64]) -> Result<f64, CertifyError> {
    Ok(1.0 / lu_determinant(&weight_matrix(sys, u)?)?)
}

fn require_basis(sys: &VectorSystem, dual: &Matrix) -> Result<(), CertifyError> {
    if sys.n() != sys.dim() || !validate(sys).is_basis {
        return Err(CertifyError::Precondition(format!(
            "h map needs a basis of ℝ^{}, got {} vectors",
            sys.dim(),
            sys.n()
        )));
    }
    if dual.rows() != sys.n() || dual.cols() != sys.dim() {
        return Err(CertifyError::Precondition(format!(
            "dual basis is {}×{}, expected {}×{}",
            dual.rows(),
            dual.cols(),
            sys.n(),
            sys.dim()
        )));
    }
    Ok(())
}

/// `h(x) = Σ_j ⟨v_j,x⟩⟨w_j,x⟩ v_j − (1/n) Σ_j v_j`, where the rows of `dual`
/// are the dual vectors `w_j`. Vanishes exactly on the extremal set.
pub fn h_map(sys: &VectorSystem, dual: &Matrix, x: &[f64]) -> Result<Vec<f64>, CertifyError> {
    require_basis(sys, dual)?;
    let n = sys.n() as f64;
    let mut h = vec![0.0; sys.dim()];
    for (j, v) in sys.vectors().iter().enumerate() {
        let coeff = dot(v, x) * dot(dual.row(j), x) - 1.0 / n;
        numerics::axpy(coeff, v, &mut h);
    }
    Ok(h)
}

/// Jacobian of [`h_map`]: `J[i][k] = Σ_j v_ji (⟨w_j,x⟩ v_jk + ⟨v_j,x⟩ w_jk)`.
pub fn jacobian_h(sys: &VectorSystem, dual: &Matrix, x: &[f64]) -> Result<Matrix, CertifyError> {
    require_basis(sys, dual)?;
    let mut jac = Matrix::zeros(sys.dim(), sys.dim());
    for (j, v) in sys.vectors().iter().enumerate() {
        let w = dual.row(j);
        jac.add_outer(dot(w, x), v, v);
        jac.add_outer(dot(v, x), v, w);
    }
    Ok(jac)
}

/// Relative residual of `Σ_u (S(u) − n²) μ(u) = 0`, normalized by
/// `Σ_u (|S(u) − n²| + 1) μ(u)`.
pub fn euler_jacobi_theorem_residual(es: &ExtremaSet) -> Result<f64, CertifyError> {
    require_complete(es)?;
    let n2 = (es.system.n() * es.system.n()) as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for p in &es.points {
        num += (p.value_s - n2) * p.weight_mu;
        den += ((p.value_s - n2).abs() + 1.0) * p.weight_mu;
    }
    Ok(num.abs() / den)
}

/// Something that can stand in for `g` in `Σ g(u)/det J_h(u)`.
pub trait TestFunction {
    fn degree(&self) -> u32;
    fn value(&self, x: &[f64]) -> Result<f64, CertifyError>;
}

impl TestFunction for MonomialPoly {
    fn degree(&self) -> u32 {
        MonomialPoly::degree(self)
    }
    fn value(&self, x: &[f64]) -> Result<f64, CertifyError> {
        Ok(self.eval(x)?)
    }
}

/// `ΔP` of a system, a polynomial of degree `n − 2`.
pub struct LaplacianOfP<'a>(pub &'a VectorSystem);

impl TestFunction for LaplacianOfP<'_> {
    fn degree(&self) -> u32 {
        self.0.n().saturating_sub(2) as u32
    }
    fn value(&self, x: &[f64]) -> Result<f64, CertifyError> {
        laplacian_p(self.0, x)
    }
}

/// `(Σ_u g(u)/det J_h(u), Σ_u |g(u)/det J_h(u)|)` over the extremal set of
/// a basis, with no degree check. `det J_h(u) = P(u)/μ(u)` there.
pub fn euler_jacobi_sum(
    es: &ExtremaSet,
    dual: &Matrix,
    g: &dyn TestFunction,
) -> Result<(f64, f64), CertifyError> {
    require_complete(es)?;
    let (mut sum, mut abs) = (0.0, 0.0);
    for p in &es.points {
        let det = lu_determinant(&jacobian_h(&es.system, dual, &p.u)?)?;
        let term = g.value(&p.u)? / det;
        sum += term;
        abs += term.abs();
    }
    Ok((sum, abs))
}

/// `|Σ g μ/P| / (Σ |g| μ/|P| + 1)` for `deg g <= n − 1`.
pub fn euler_jacobi_general_residual(
    es: &ExtremaSet,
    dual: &Matrix,
    g: &dyn TestFunction,
) -> Result<f64, CertifyError> {
    let max = es.system.n() as u32 - 1;
    if g.degree() > max {
        return Err(CertifyError::Degree {
            degree: g.degree(),
            max,
        });
    }
    let (sum, abs) = euler_jacobi_sum(es, dual, g)?;
    Ok(sum.abs() / (abs + 1.0))
}

/// `(lhs, rhs)` of the lower bound
/// `det(I + (1/n)Σ v_j v_jᵀ/a_j²) >= 1 + (1/n)Σ a_j⁻² + (1/n²)Σ_{j<k} sin²θ_jk/(a_j² a_k²)`.
pub fn det_lower_bound_check(sys: &VectorSystem, u: &[f64]) -> Result<(f64, f64), CertifyError> {
    let a = nonzero_products(sys, u)?;
    let n = sys.n() as f64;
    let scaled: Vec<Vec<f64>> = sys
        .vectors()
        .iter()
        .zip(&a)
        .map(|(v, aj)| numerics::scale(v, 1.0 / (n.sqrt() * aj.abs())))
        .collect();
    let lhs = numerics::det_identity_plus_gram(&scaled, sys.dim())?;
    let inv2: Vec<f64> = a.iter().map(|aj| 1.0 / (aj * aj)).collect();
    let mut pairs = 0.0;
    for j in 0..sys.n() {
        for k in j + 1..sys.n() {
            let c = dot(sys.vector(j), sys.vector(k));
            pairs += (1.0 - c * c) * inv2[j] * inv2[k];
        }
    }
    let rhs = 1.0 + inv2.iter().sum::<f64>() / n + pairs / (n * n);
    Ok((lhs, rhs))
}

/// `Σ_{j≠k} |⟨v_j,v_k⟩| ∏_{l≠j,k} |⟨v_l,x⟩|`, a bound on `|ΔP(x)|` that
/// stays finite on the walls.
fn laplacian_scale(sys: &VectorSystem, x: &[f64]) -> f64 {
    let a = sys.inner_products(x);
    let n = sys.n();
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let rest: f64 = (0..n)
                .filter(|&l| l != j && l != k)
                .map(|l| a[l].abs())
                .product();
            total += dot(sys.vector(j), sys.vector(k)).abs() * rest;
        }
    }
    total
}

/// `max |ΔP(x)| / (1 + max Σ_{j≠k} |⟨v_j,v_k⟩| ∏_{l≠j,k} |⟨v_l,x⟩|)` over
/// `samples` random unit points. Zero for harmonic `P`.
pub fn harmonicity_residual(sys: &VectorSystem, samples: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    let mut taken = 0;
    while taken < samples {
        let x = rng.unit_vector(sys.dim());
        let Ok(lap) = laplacian_p(sys, &x) else {
            continue;
        };
        taken += 1;
        worst = worst.max(lap.abs());
        scale = scale.max(laplacian_scale(sys, &x));
    }
    worst / (1.0 + scale)
}
