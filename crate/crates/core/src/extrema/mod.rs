//! Enumeration of the local extrema of `P(x) = ∏⟨v_j, x⟩` on the sphere.
//!
//! Each chamber of the complement of the hyperplanes `v_j^⊥` contains exactly
//! one extremal point: the minimizer of the strictly convex barrier
//!
//! ```text
//! Ψ(x) = ½‖x‖² − (1/n) Σ log|⟨v_j, x⟩|
//! ```
//!
//! whose critical points are the solutions of `x = (1/n) Σ v_j / ⟨v_j, x⟩`.
//! Chambers are found by a max-margin linear program per sign pattern and
//! solved by damped Newton with a line search that never leaves the chamber.

mod lp;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{eval_p, mu_weight, s_value, CertifyError};
use crate::numerics::{self, dot, norm, spd_solve, Matrix, NumericsError};
use crate::systems::{is_generic, validate, VectorSystem, PARALLEL_TOL};

/// Newton iteration cap per chamber.
pub const MAX_NEWTON_ITERS: usize = 200;
/// Step halvings allowed per line search.
pub const MAX_HALVINGS: usize = 60;
/// Relative gradient tolerance: stop when `‖∇Ψ‖ <= GRAD_TOL (1 + ‖x‖)`.
pub const GRAD_TOL: f64 = 1e-12;
/// Newton decrement below which the full step is taken without measuring
/// the decrease of `Ψ`.
pub const NEWTON_DECREMENT_TRUST: f64 = 1e-6;
/// Largest fixed-point residual accepted for an [`ExtremalPoint`].
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Chambers whose optimal margin is at most this are treated as empty.
pub const MARGIN_TOL: f64 = 1e-9;
/// Two extremal points closer than this are the same point.
pub const DEDUP_TOL: f64 = 1e-6;
/// Largest `n` for which all `2^n` sign patterns are swept.
pub const DEFAULT_PATTERN_BUDGET: usize = 20;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ExtremaError {
    #[error("point lies on the hyperplane of vector {index}")]
    Boundary { index: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("Newton did not converge in chamber {pattern} after {iters} iterations (‖∇Ψ‖ = {grad_norm:e})")]
    Convergence {
        pattern: SignPattern,
        iters: usize,
        grad_norm: f64,
    },
    #[error("{n} vectors need 2^{n} sign patterns, above the budget of 2^{budget}")]
    Budget { n: usize, budget: usize },
    #[error("linear program failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl From<CertifyError> for ExtremaError {
    fn from(e: CertifyError) -> Self {
        match e {
            CertifyError::Boundary { index } => Self::Boundary { index },
            CertifyError::Numerics(e) => Self::Numerics(e),
            other => Self::Precondition(other.to_string()),
        }
    }
}

/// A vector of signs `±1`, one per system vector, labeling a chamber.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self, ExtremaError> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(ExtremaError::Precondition(
                "sign patterns hold only ±1".into(),
            ));
        }
        Ok(Self(signs))
    }

    /// Pattern number `index` in lexicographic order (−1 before +1, first
    /// coordinate most significant).
    pub fn from_index(index: u64, n: usize) -> Self {
        Self(
            (0..n)
                .map(|j| if index >> (n - 1 - j) & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    /// Sign pattern of `⟨v_j, x⟩`; `None` if some product is zero.
    pub fn of_point(sys: &VectorSystem, x: &[f64]) -> Option<Self> {
        sys.inner_products(x)
            .into_iter()
            .map(|a| {
                if a > 0.0 {
                    Some(1)
                } else if a < 0.0 {
                    Some(-1)
                } else {
                    None
                }
            })
            .collect::<Option<Vec<i8>>>()
            .map(Self)
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| s as f64).collect()
    }

    fn admits(&self, products: &[f64]) -> bool {
        self.0
            .iter()
            .zip(products)
            .all(|(&s, &a)| (s as f64) * a > 0.0)
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// A point of `𝓔(P)` with its cached quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalPoint {
    pub u: Vec<f64>,
    pub pattern: SignPattern,
    #[serde(rename = "P")]
    pub value_p: f64,
    #[serde(rename = "S")]
    pub value_s: f64,
    #[serde(rename = "mu")]
    pub weight_mu: f64,
    #[serde(rename = "residual")]
    pub fixed_point_residual: f64,
    #[serde(default)]
    pub newton_iters: usize,
}

/// The full set of extremal points of one system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremaSet {
    pub system: VectorSystem,
    pub points: Vec<ExtremalPoint>,
    pub expected_count: Option<u64>,
    pub complete: bool,
}

impl ExtremaSet {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("extrema set serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest pairwise distance between points (∞ for fewer than two).
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min(numerics::distance(&a.u, &b.u));
            }
        }
        best
    }
}

fn products_nonzero(sys: &VectorSystem, x: &[f64]) -> Result<Vec<f64>, ExtremaError> {
    let a = sys.inner_products(x);
    match a.iter().position(|&v| v == 0.0) {
        Some(index) => Err(ExtremaError::Boundary { index }),
        None => Ok(a),
    }
}

fn check_dim(sys: &VectorSystem, x: &[f64]) -> Result<(), ExtremaError> {
    if x.len() != sys.dim() {
        return Err(NumericsError::Dimension(format!(
            "point has length {}, system lives in ℝ^{}",
            x.len(),
            sys.dim()
        ))
        .into());
    }
    Ok(())
}

/// `Ψ(x) = ½‖x‖² − (1/n) Σ log|⟨v_j, x⟩|`.
pub fn psi(sys: &VectorSystem, x: &[f64]) -> Result<f64, ExtremaError> {
    check_dim(sys, x)?;
    let a = products_nonzero(sys, x)?;
    let n = sys.n() as f64;
    Ok(0.5 * dot(x, x) - a.iter().map(|v| v.abs().ln()).sum::<f64>() / n)
}

/// `∇Ψ(x) = x − (1/n) Σ v_j / ⟨v_j, x⟩`.
pub fn psi_gradient(sys: &VectorSystem, x: &[f64]) -> Result<Vec<f64>, ExtremaError> {
    check_dim(sys, x)?;
    let a = products_nonzero(sys, x)?;
    let w = vec![1.0; sys.n()];
    Ok(Barrier::new(sys.vectors(), &w).gradient(x, &a))
}

/// `∇²Ψ(x) = I + (1/n) Σ v_j v_jᵀ / ⟨v_j, x⟩²`.
pub fn psi_hessian(sys: &VectorSystem, x: &[f64]) -> Result<Matrix, ExtremaError> {
    check_dim(sys, x)?;
    let a = products_nonzero(sys, x)?;
    let w = vec![1.0; sys.n()];
    Ok(Barrier::new(sys.vectors(), &w).hessian(&a))
}

/// `‖u − (1/n) Σ v_j / ⟨v_j, u⟩‖`, zero exactly on `𝓔(P)`.
pub fn fixed_point_residual(sys: &VectorSystem, u: &[f64]) -> Result<f64, ExtremaError> {
    Ok(norm(&psi_gradient(sys, u)?))
}

/// The barrier with integer-like weights `m_j` (multiplicities) on the
/// logarithms, normalized by `Σ m_j`. Unit weights give `Ψ`.
pub(crate) struct Barrier<'a> {
    vectors: &'a [Vec<f64>],
    weights: &'a [f64],
    total: f64,
}

impl<'a> Barrier<'a> {
    pub(crate) fn new(vectors: &'a [Vec<f64>], weights: &'a [f64]) -> Self {
        Self {
            vectors,
            weights,
            total: weights.iter().sum(),
        }
    }

    fn products(&self, x: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|v| dot(v, x)).collect()
    }

    fn gradient(&self, x: &[f64], a: &[f64]) -> Vec<f64> {
        let mut g = x.to_vec();
        for ((v, &w), &aj) in self.vectors.iter().zip(self.weights).zip(a) {
            numerics::axpy(-w / (self.total * aj), v, &mut g);
        }
        g
    }

    fn hessian(&self, a: &[f64]) -> Matrix {
        let d = self.vectors[0].len();
        let mut h = Matrix::identity(d);
        for ((v, &w), &aj) in self.vectors.iter().zip(self.weights).zip(a) {
            h.add_outer(w / (self.total * aj * aj), v, v);
        }
        h
    }

    /// `Ψ(x + αp) − Ψ(x)`, computed without cancellation.
    fn change(&self, x: &[f64], p: &[f64], alpha: f64, a: &[f64]) -> f64 {
        let quad = alpha * dot(x, p) + 0.5 * alpha * alpha * dot(p, p);
        let logs: f64 = self
            .vectors
            .iter()
            .zip(self.weights)
            .zip(a)
            .map(|((v, &w), &aj)| w * (alpha * dot(v, p) / aj).ln_1p())
            .sum();
        quad - logs / self.total
    }

    /// Smallest gradient norm attainable near `x` in double precision: one
    /// ulp of `x` moves `⟨v_j,x⟩` by about `ε‖x‖`, which moves the gradient
    /// by `ε‖x‖ Σ w_j/(W a_j²)`; evaluation adds `ε Σ w_j/(W|a_j|)`.
    fn gradient_floor(&self, x: &[f64], a: &[f64]) -> f64 {
        let (mut first, mut second) = (0.0, 0.0);
        for (&w, &aj) in self.weights.iter().zip(a) {
            let t = w / (self.total * aj.abs());
            first += t;
            second += t / aj.abs();
        }
        let nx = norm(x);
        8.0 * f64::EPSILON * (1.0 + nx + first + nx * second)
    }

    /// Damped Newton from `x0` inside the chamber of `pattern`. Every
    /// accepted iterate is appended to `trace` when given.
    fn minimize(
        &self,
        pattern: &SignPattern,
        x0: &[f64],
        mut trace: Option<&mut Vec<Vec<f64>>>,
    ) -> Result<(Vec<f64>, usize), ExtremaError> {
        let mut x = x0.to_vec();
        let mut a = self.products(&x);
        if !pattern.admits(&a) {
            return Err(ExtremaError::Precondition(format!(
                "starting point is not inside chamber {pattern}"
            )));
        }
        let fail = |iters: usize, grad_norm: f64| ExtremaError::Convergence {
            pattern: pattern.clone(),
            iters,
            grad_norm,
        };
        for iter in 0..MAX_NEWTON_ITERS {
            let g = self.gradient(&x, &a);
            let gn = norm(&g);
            // Near thin walls the gradient cannot be evaluated below its
            // rounding floor, which may sit above GRAD_TOL.
            if gn <= (GRAD_TOL * (1.0 + norm(&x))).max(self.gradient_floor(&x, &a)) {
                return Ok((x, iter));
            }
            let step = spd_solve(&self.hessian(&a), &g).map_err(|_| fail(iter, gn))?;
            let p: Vec<f64> = step.iter().map(|s| -s).collect();
            // Newton decrement λ² = gᵀH⁻¹g. Once it is small the full step is
            // a guaranteed descent step, while the measured decrease (~λ²/2)
            // drowns in rounding; only the chamber guard is enforced then.
            let decrement = dot(&g, &step);
            let trust_full_step = decrement <= NEWTON_DECREMENT_TRUST;
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                let cand: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + alpha * pi).collect();
                let ca = self.products(&cand);
                if pattern.admits(&ca) && (trust_full_step || self.change(&x, &p, alpha, &a) < 0.0)
                {
                    x = cand;
                    a = ca;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(fail(iter, gn));
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(x.clone());
            }
        }
        Err(fail(MAX_NEWTON_ITERS, norm(&self.gradient(&x, &a))))
    }
}

/// Max-margin point of the chamber of `pattern`:
/// maximize `t` subject to `pattern_j ⟨v_j, x⟩ >= t` and `-1 <= x_i <= 1`.
/// Returns `(x, t)` when the optimal margin exceeds [`MARGIN_TOL`], `None`
/// when the chamber is empty.
pub fn feasible_pattern(
    sys: &VectorSystem,
    pattern: &SignPattern,
) -> Result<Option<(Vec<f64>, f64)>, ExtremaError> {
    if pattern.len() != sys.n() {
        return Err(ExtremaError::Precondition(format!(
            "pattern has {} signs for {} vectors",
            pattern.len(),
            sys.n()
        )));
    }
    let d = sys.dim();
    let n = sys.n();
    // variables: x⁺ (d), x⁻ (d), t; x = x⁺ − x⁻
    let nv = 2 * d + 1;
    let mut a = Matrix::zeros(n + 2 * d, nv);
    let mut b = vec![0.0; n + 2 * d];
    for (j, v) in sys.vectors().iter().enumerate() {
        let s = pattern.signs()[j] as f64;
        for i in 0..d {
            a[(j, i)] = -s * v[i];
            a[(j, d + i)] = s * v[i];
        }
        a[(j, 2 * d)] = 1.0;
    }
    for i in 0..2 * d {
        a[(n + i, i)] = 1.0;
        b[n + i] = 1.0;
    }
    let mut c = vec![0.0; nv];
    c[2 * d] = 1.0;
    match lp::maximize(&a, &b, &c) {
        lp::LpOutcome::Optimal { value, solution } => {
            if value <= MARGIN_TOL {
                return Ok(None);
            }
            let x: Vec<f64> = (0..d).map(|i| solution[i] - solution[d + i]).collect();
            Ok(Some((x, value)))
        }
        lp::LpOutcome::Unbounded => Err(ExtremaError::Solver(
            "max-margin program is unbounded".into(),
        )),
        lp::LpOutcome::Stalled => Err(ExtremaError::Solver(format!(
            "simplex iteration guard exhausted for pattern {pattern}"
        ))),
    }
}

/// Builds the cached point record for a solved `u`.
fn extremal_point(
    sys: &VectorSystem,
    pattern: SignPattern,
    u: Vec<f64>,
    newton_iters: usize,
) -> Result<ExtremalPoint, ExtremaError> {
    let residual = fixed_point_residual(sys, &u)?;
    let value_s = s_value(sys, &u)?;
    let weight_mu = mu_weight(sys, &u)?;
    Ok(ExtremalPoint {
        value_p: eval_p(sys, &u),
        value_s,
        weight_mu,
        fixed_point_residual: residual,
        newton_iters,
        pattern,
        u,
    })
}

/// Unique extremal point in the chamber of `pattern`, by damped Newton on
/// `Ψ` from the interior point `x0`.
pub fn solve_chamber(
    sys: &VectorSystem,
    pattern: &SignPattern,
    x0: &[f64],
) -> Result<ExtremalPoint, ExtremaError> {
    check_dim(sys, x0)?;
    if pattern.len() != sys.n() {
        return Err(ExtremaError::Precondition(format!(
            "pattern has {} signs for {} vectors",
            pattern.len(),
            sys.n()
        )));
    }
    let w = vec![1.0; sys.n()];
    let (u, iters) = Barrier::new(sys.vectors(), &w).minimize(pattern, x0, None)?;
    let point = extremal_point(sys, pattern.clone(), u, iters)?;
    if point.fixed_point_residual > RESIDUAL_TOL.max(residual_floor(sys, &point.u)) {
        return Err(ExtremaError::Convergence {
            pattern: pattern.clone(),
            iters,
            grad_norm: point.fixed_point_residual,
        });
    }
    Ok(point)
}

/// Fixed-point residual that double precision can guarantee at `u`. It
/// exceeds [`RESIDUAL_TOL`] only when some `|⟨v_j,u⟩|` is of order `1e-4`
/// or smaller, i.e. in very thin chambers.
pub fn residual_floor(sys: &VectorSystem, u: &[f64]) -> f64 {
    let w = vec![1.0; sys.n()];
    Barrier::new(sys.vectors(), &w).gradient_floor(u, &sys.inner_products(u))
}

/// `Ψ` at the start point and at every accepted Newton iterate.
pub fn newton_trace(
    sys: &VectorSystem,
    pattern: &SignPattern,
    x0: &[f64],
) -> Result<Vec<f64>, ExtremaError> {
    check_dim(sys, x0)?;
    let w = vec![1.0; sys.n()];
    let mut iterates = vec![x0.to_vec()];
    Barrier::new(sys.vectors(), &w).minimize(pattern, x0, Some(&mut iterates))?;
    iterates.iter().map(|x| psi(sys, x)).collect()
}

/// Number of chambers of `n` central hyperplanes in general position in
/// `ℝ^d`: `2 Σ_{k<d} C(n−1, k)`.
pub fn expected_region_count(d: usize, n: usize) -> u64 {
    let m = (n - 1) as u64;
    let mut total: u64 = 0;
    let mut binom: u64 = 1; // C(m, 0)
    for k in 0..d as u64 {
        if k > m {
            break;
        }
        total += binom;
        binom = binom * (m - k) / (k + 1);
    }
    2 * total
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumerateOptions {
    pub pattern_budget: usize,
    /// Worker threads for chamber solves; `None` uses the global pool.
    pub parallelism: Option<usize>,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            pattern_budget: DEFAULT_PATTERN_BUDGET,
            parallelism: None,
        }
    }
}

pub fn enumerate_extrema(sys: &VectorSystem) -> Result<ExtremaSet, ExtremaError> {
    enumerate_extrema_with(sys, &EnumerateOptions::default())
}

/// Sweeps every sign pattern, solves each nonempty chamber, and records
/// whether the count matches the known chamber count.
pub fn enumerate_extrema_with(
    sys: &VectorSystem,
    options: &EnumerateOptions,
) -> Result<ExtremaSet, ExtremaError> {
    let diag = validate(sys);
    if diag.has_parallel_pair {
        return Err(ExtremaError::Precondition(
            "system has a parallel pair; split duplicates first".into(),
        ));
    }
    let n = sys.n();
    if n > options.pattern_budget || n >= 63 {
        return Err(ExtremaError::Budget {
            n,
            budget: options.pattern_budget,
        });
    }
    let total: u64 = 1 << n;
    let solve_one = |index: u64| -> Result<Option<ExtremalPoint>, ExtremaError> {
        let pattern = SignPattern::from_index(index, n);
        match feasible_pattern(sys, &pattern)? {
            None => Ok(None),
            Some((x, _)) => {
                let nx = norm(&x);
                let start: Vec<f64> = x.iter().map(|v| v / nx).collect();
                solve_chamber(sys, &pattern, &start).map(Some)
            }
        }
    };
    let run = || -> Vec<Result<Option<ExtremalPoint>, ExtremaError>> {
        (0..total).into_par_iter().map(solve_one).collect()
    };
    let results = match options.parallelism {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| ExtremaError::Solver(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut points: Vec<ExtremalPoint> = Vec::new();
    for r in results {
        if let Some(p) = r? {
            if points
                .iter()
                .all(|q| numerics::distance(&q.u, &p.u) > DEDUP_TOL)
            {
                points.push(p);
            }
        }
    }

    let expected_count = if diag.is_basis {
        Some(1u64 << n)
    } else if is_generic(sys) {
        Some(expected_region_count(diag.spans_dim, n))
    } else {
        None
    };
    let complete = match expected_count {
        Some(c) => points.len() as u64 == c,
        None => true,
    };
    Ok(ExtremaSet {
        system: sys.clone(),
        points,
        expected_count,
        complete,
    })
}

/// Extremal points of `∏⟨v_j, x⟩^{m_j}` for distinct directions `v_j` with
/// multiplicities `m_j`, i.e. of the product polynomial of a system with
/// repeated vectors. Returns the `u` of every chamber.
pub(crate) fn weighted_extrema(
    directions: &[Vec<f64>],
    multiplicities: &[f64],
    budget: usize,
) -> Result<Vec<Vec<f64>>, ExtremaError> {
    let dim = directions[0].len();
    let sys = VectorSystem::new(dim, directions.to_vec(), "collapsed")
        .map_err(|e| ExtremaError::Precondition(e.to_string()))?;
    let n = sys.n();
    if n > budget {
        return Err(ExtremaError::Budget { n, budget });
    }
    let barrier = Barrier::new(sys.vectors(), multiplicities);
    let results: Vec<Result<Option<Vec<f64>>, ExtremaError>> = (0..1u64 << n)
        .into_par_iter()
        .map(|index| {
            let pattern = SignPattern::from_index(index, n);
            match feasible_pattern(&sys, &pattern)? {
                None => Ok(None),
                Some((x, _)) => {
                    let nx = norm(&x);
                    let start: Vec<f64> = x.iter().map(|v| v / nx).collect();
                    barrier
                        .minimize(&pattern, &start, None)
                        .map(|(u, _)| Some(u))
                }
            }
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        if let Some(u) = r? {
            out.push(u);
        }
    }
    Ok(out)
}

/// `max |P|` over the unit sphere, valid also when the system repeats a
/// direction: parallel vectors are collapsed into one direction with a
/// multiplicity and the weighted barrier is solved per chamber. Returns the
/// maximum and a maximizer.
pub fn max_abs_product(sys: &VectorSystem) -> Result<(f64, Vec<f64>), ExtremaError> {
    let mut directions: Vec<Vec<f64>> = Vec::new();
    let mut mult: Vec<f64> = Vec::new();
    for v in sys.vectors() {
        match directions
            .iter()
            .position(|w| dot(w, v).abs() > 1.0 - PARALLEL_TOL)
        {
            Some(i) => mult[i] += 1.0,
            None => {
                directions.push(v.clone());
                mult.push(1.0);
            }
        }
    }
    let mut best = (0.0, Vec::new());
    for u in weighted_extrema(&directions, &mult, DEFAULT_PATTERN_BUDGET)? {
        let p = eval_p(sys, &u).abs();
        if p > best.0 {
            best = (p, u);
        }
    }
    Ok(best)
}
