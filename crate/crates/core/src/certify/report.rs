use serde::{Deserialize, Serialize};

use super::{
    euler_jacobi_general_residual, euler_jacobi_theorem_residual, grad_p, harmonicity_residual,
    jacobian_h, laplacian_p, require_complete, CertifyError,
};
use crate::extrema::{residual_floor, ExtremaSet};
use crate::numerics::{self, condition_1, dot, dual_basis, lu_determinant, random_poly, Matrix};
use crate::systems::{is_reflection_system, validate, SystemDiagnostics};

/// Tolerance of the Gram sign check and its preconditions.
pub const GRAM_TOL: f64 = 1e-8;

/// Named gate tolerances. Every report echoes the values it was run with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub ej_rel_tol: f64,
    pub eigen_tol: f64,
    pub laplacian_tol: f64,
    pub jacobian_tol: f64,
    pub amgm_tol: f64,
    pub harmonicity_tol: f64,
    pub equality_tol: f64,
    pub strong_tol: f64,
    pub weak_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ej_rel_tol: 1e-8,
            eigen_tol: 1e-9,
            laplacian_tol: 1e-9,
            jacobian_tol: 1e-9,
            amgm_tol: 1e-9,
            harmonicity_tol: 1e-8,
            equality_tol: 1e-7,
            strong_tol: 1e-9,
            weak_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 9] = [
        "ej_rel_tol",
        "eigen_tol",
        "laplacian_tol",
        "jacobian_tol",
        "amgm_tol",
        "harmonicity_tol",
        "equality_tol",
        "strong_tol",
        "weak_tol",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), CertifyError> {
        let slot = match name {
            "ej_rel_tol" => &mut self.ej_rel_tol,
            "eigen_tol" => &mut self.eigen_tol,
            "laplacian_tol" => &mut self.laplacian_tol,
            "jacobian_tol" => &mut self.jacobian_tol,
            "amgm_tol" => &mut self.amgm_tol,
            "harmonicity_tol" => &mut self.harmonicity_tol,
            "equality_tol" => &mut self.equality_tol,
            "strong_tol" => &mut self.strong_tol,
            "weak_tol" => &mut self.weak_tol,
            other => return Err(CertifyError::UnknownTolerance(other.to_string())),
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportOptions {
    pub tolerances: Tolerances,
    /// Number of random test polynomials for the general identity (bases only).
    pub random_g: usize,
    pub g_seed: u64,
    /// Sample count for the harmonicity residual; `None` skips it.
    pub harmonicity_samples: Option<usize>,
    pub harmonicity_seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    OrthonormalExtremal,
    ReflectionEquality,
    NonExtremal,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::OrthonormalExtremal => "ORTHONORMAL_EXTREMAL",
            Self::ReflectionEquality => "REFLECTION_EQUALITY",
            Self::NonExtremal => "NON_EXTREMAL",
        })
    }
}

/// Residuals of the pointwise identities at one extremal point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResiduals {
    pub u: Vec<f64>,
    #[serde(rename = "P")]
    pub value_p: f64,
    #[serde(rename = "S")]
    pub value_s: f64,
    pub mu: f64,
    /// `‖∇P(u) − nP(u)u‖ / (n|P(u)|)`
    pub eigen_rel: f64,
    /// Rounding bound on `eigen_rel` at `u`; nonzero mainly in thin chambers.
    #[serde(default)]
    pub eigen_floor: f64,
    /// `|ΔP(u) − P(u)(n² − S(u))| / (|P(u)| n²)`
    pub laplacian_id: f64,
    /// `|det J_h(u) − P(u)/μ(u)| / |P(u)/μ(u)|`, bases only
    pub jacobian_fact: Option<f64>,
    /// `d·ε·κ₁(J_h)`, the rounding scale of the LU determinant.
    #[serde(default)]
    pub jacobian_floor: Option<f64>,
    /// `max(0, |P|^{−2/n} − S/n) / (S/n)`
    pub amgm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    /// Largest rounding floor that replaced `tol` at some point, when any did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    pub pass: bool,
}

impl Gate {
    /// Per-point gate over `(value, floor)` pairs: each value must be at most
    /// `max(tol, floor)`. Reports the worst raw value.
    fn per_point(name: &str, pairs: impl Iterator<Item = (f64, f64)>, tol: f64) -> Self {
        let (mut value, mut floor, mut pass) = (0.0f64, None::<f64>, true);
        for (v, f) in pairs {
            value = value.max(v);
            pass &= v <= tol.max(f);
            if f > tol {
                floor = Some(floor.map_or(f, |g| g.max(f)));
            }
        }
        Self {
            name: name.to_string(),
            value,
            tol,
            floor,
            pass,
        }
    }

    fn at_most(name: &str, value: f64, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tol,
            floor: None,
            pass: value <= tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub label: String,
    pub n: usize,
    pub dim: usize,
    pub count: usize,
    pub ej_theorem_residual: f64,
    pub ej_general_residuals: Vec<f64>,
    #[serde(rename = "min_S")]
    pub min_s: f64,
    #[serde(rename = "argmin_S")]
    pub argmin_s: Vec<f64>,
    #[serde(rename = "max_absP")]
    pub max_abs_p: f64,
    #[serde(rename = "argmax_absP")]
    pub argmax_abs_p: Vec<f64>,
    /// `n²`
    pub strong_bound: f64,
    /// `n^{−n/2}`
    pub weak_bound: f64,
    pub strong_holds: bool,
    pub weak_holds: bool,
    pub all_points_equality: bool,
    pub harmonicity_residual: Option<f64>,
    pub classification: Classification,
    pub gram_eigen_checks: Vec<bool>,
    pub tolerances: Tolerances,
    pub gates: Vec<Gate>,
    pub passed: bool,
    pub points: Vec<PointResiduals>,
}

impl CertificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failed_gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| !g.pass)
    }
}

fn weak_bound(n: usize) -> f64 {
    let n = n as f64;
    n.powf(-n / 2.0)
}

/// `(min S, argmin, max |P|, argmax)` over the points.
fn optima(es: &ExtremaSet) -> (f64, Vec<f64>, f64, Vec<f64>) {
    let mut min_s = (f64::INFINITY, Vec::new());
    let mut max_p = (0.0, Vec::new());
    for p in &es.points {
        if p.value_s < min_s.0 {
            min_s = (p.value_s, p.u.clone());
        }
        if p.value_p.abs() > max_p.0 {
            max_p = (p.value_p.abs(), p.u.clone());
        }
    }
    (min_s.0, min_s.1, max_p.0, max_p.1)
}

fn point_residuals(
    es: &ExtremaSet,
    dual: Option<&Matrix>,
) -> Result<Vec<PointResiduals>, CertifyError> {
    let sys = &es.system;
    let n = sys.n() as f64;
    es.points
        .iter()
        .map(|p| {
            let (pv, s) = (p.value_p, p.value_s);
            let grad = grad_p(sys, &p.u);
            let target = numerics::scale(&p.u, n * pv);
            let eigen_rel = numerics::distance(&grad, &target) / (n * pv.abs());
            let eigen_floor = residual_floor(sys, &p.u);
            let lap = laplacian_p(sys, &p.u)?;
            let laplacian_id = (lap - pv * (n * n - s)).abs() / (pv.abs() * n * n);
            let (jacobian_fact, jacobian_floor) = match dual {
                Some(w) => {
                    let jac = jacobian_h(sys, w, &p.u)?;
                    let det = lu_determinant(&jac)?;
                    let want = pv / p.weight_mu;
                    let floor = sys.dim() as f64 * f64::EPSILON * condition_1(&jac)?;
                    (Some((det - want).abs() / want.abs()), Some(floor))
                }
                None => (None, None),
            };
            let lhs = (-2.0 / n * pv.abs().ln()).exp();
            let amgm = (lhs - s / n).max(0.0) / (s / n);
            Ok(PointResiduals {
                u: p.u.clone(),
                value_p: pv,
                value_s: s,
                mu: p.weight_mu,
                eigen_rel,
                eigen_floor,
                laplacian_id,
                jacobian_fact,
                jacobian_floor,
                amgm,
            })
        })
        .collect()
}

/// Per point: when `S = n²` and all `|⟨v_j,u⟩|` agree (within [`GRAM_TOL`]),
/// checks `u = (1/√n) Σ ε_j v_j` and `Gε = ε` for the sign vector `ε` of
/// `u`. Points outside that case pass vacuously.
pub fn gram_sign_check(es: &ExtremaSet) -> Result<Vec<bool>, CertifyError> {
    require_complete(es)?;
    let sys = &es.system;
    let n = sys.n();
    let nf = n as f64;
    Ok(es
        .points
        .iter()
        .map(|p| {
            let a = sys.inner_products(&p.u);
            let (lo, hi) = a.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
                (lo.min(x.abs()), hi.max(x.abs()))
            });
            if (p.value_s - nf * nf).abs() > GRAM_TOL * nf * nf || hi - lo > GRAM_TOL {
                return true;
            }
            let eps = p.pattern.as_f64();
            let mut signed = vec![0.0; sys.dim()];
            for (v, &e) in sys.vectors().iter().zip(&eps) {
                numerics::axpy(e / nf.sqrt(), v, &mut signed);
            }
            let g_eps: Vec<f64> = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| dot(sys.vector(j), sys.vector(k)) * eps[k])
                        .sum()
                })
                .collect();
            numerics::distance(&signed, &p.u) <= GRAM_TOL
                && numerics::distance(&g_eps, &eps) <= GRAM_TOL
        })
        .collect())
}

fn gram_is_identity(es: &ExtremaSet, tol: f64) -> bool {
    let v = es.system.vectors();
    (0..v.len()).all(|j| {
        (0..v.len()).all(|k| {
            let want = if j == k { 1.0 } else { 0.0 };
            (dot(&v[j], &v[k]) - want).abs() <= tol
        })
    })
}

fn all_points_equality(es: &ExtremaSet, tol: f64) -> bool {
    let n2 = (es.system.n() * es.system.n()) as f64;
    es.points.iter().all(|p| (p.value_s - n2).abs() <= tol * n2)
}

/// Orthonormal bases first, then reflection systems with equality at every
/// extremum, otherwise non-extremal.
pub fn classify(
    es: &ExtremaSet,
    diag: &SystemDiagnostics,
    reflection: bool,
) -> Result<Classification, CertifyError> {
    classify_with(es, diag, reflection, &Tolerances::default())
}

fn classify_with(
    es: &ExtremaSet,
    diag: &SystemDiagnostics,
    reflection: bool,
    tol: &Tolerances,
) -> Result<Classification, CertifyError> {
    require_complete(es)?;
    let n = es.system.n();
    let (_, _, max_p, _) = optima(es);
    let bound = weak_bound(n);
    if diag.is_unit && gram_is_identity(es, 1e-9) && (max_p - bound).abs() <= 1e-9 * bound {
        return Ok(Classification::OrthonormalExtremal);
    }
    if reflection && all_points_equality(es, tol.equality_tol) {
        return Ok(Classification::ReflectionEquality);
    }
    Ok(Classification::NonExtremal)
}

/// Full certificate for a complete extrema set.
pub fn strong_weak_report(
    es: &ExtremaSet,
    options: &ReportOptions,
) -> Result<CertificationReport, CertifyError> {
    require_complete(es)?;
    let tol = &options.tolerances;
    let sys = &es.system;
    let n = sys.n();
    let n2 = (n * n) as f64;
    let diag = validate(sys);

    let dual = if diag.is_basis {
        Some(dual_basis(&sys.to_matrix())?)
    } else {
        None
    };
    let ej_theorem_residual = euler_jacobi_theorem_residual(es)?;
    let mut ej_general_residuals = Vec::new();
    if let Some(w) = &dual {
        for k in 0..options.random_g {
            let g = random_poly(
                sys.dim(),
                n as u32 - 1,
                options.g_seed.wrapping_add(k as u64),
            );
            ej_general_residuals.push(euler_jacobi_general_residual(es, w, &g)?);
        }
    }
    let (min_s, argmin_s, max_abs_p, argmax_abs_p) = optima(es);
    let weak = weak_bound(n);
    let strong_holds = min_s <= n2 * (1.0 + tol.strong_tol);
    let weak_holds = max_abs_p >= weak * (1.0 - tol.weak_tol);
    let harmonicity = options
        .harmonicity_samples
        .map(|k| harmonicity_residual(sys, k, options.harmonicity_seed));
    let reflection = is_reflection_system(sys, 1e-9);
    let classification = classify_with(es, &diag, reflection, tol)?;
    let points = point_residuals(es, dual.as_ref())?;

    let worst = |f: &dyn Fn(&PointResiduals) -> f64| points.iter().map(f).fold(0.0, f64::max);
    let mut gates = vec![
        Gate::at_most("ej_theorem", ej_theorem_residual, tol.ej_rel_tol),
        Gate::at_most(
            "ej_general",
            ej_general_residuals.iter().copied().fold(0.0, f64::max),
            tol.ej_rel_tol,
        ),
        Gate::per_point(
            "eigen_relation",
            points.iter().map(|p| (p.eigen_rel, p.eigen_floor)),
            tol.eigen_tol,
        ),
        Gate::at_most(
            "laplacian_identity",
            worst(&|p| p.laplacian_id),
            tol.laplacian_tol,
        ),
        Gate::per_point(
            "jacobian_factorization",
            points
                .iter()
                .filter_map(|p| Some((p.jacobian_fact?, p.jacobian_floor.unwrap_or(0.0)))),
            tol.jacobian_tol,
        ),
        Gate::at_most("amgm_chain", worst(&|p| p.amgm), tol.amgm_tol),
        Gate {
            name: "strong_bound".into(),
            value: min_s / n2 - 1.0,
            tol: tol.strong_tol,
            floor: None,
            pass: strong_holds,
        },
    ];
    if let Some(h) = harmonicity {
        gates.push(Gate::at_most("harmonicity", h, tol.harmonicity_tol));
    }
    let passed = gates.iter().all(|g| g.pass);

    Ok(CertificationReport {
        label: sys.label().to_string(),
        n,
        dim: sys.dim(),
        count: es.points.len(),
        ej_theorem_residual,
        ej_general_residuals,
        min_s,
        argmin_s,
        max_abs_p,
        argmax_abs_p,
        strong_bound: n2,
        weak_bound: weak,
        strong_holds,
        weak_holds,
        all_points_equality: all_points_equality(es, tol.equality_tol),
        harmonicity_residual: harmonicity,
        classification,
        gram_eigen_checks: gram_sign_check(es)?,
        tolerances: tol.clone(),
        gates,
        passed,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrema::enumerate_extrema;
    use crate::systems::{
        make_coxeter, make_orthonormal, make_random, CoxeterFamily, CoxeterSpec, VectorSystem,
    };

    fn report(sys: &VectorSystem) -> CertificationReport {
        strong_weak_report(&enumerate_extrema(sys).unwrap(), &ReportOptions::default()).unwrap()
    }

    #[test]
    fn orthonormal_report() {
        for n in 1..=6 {
            let r = report(&make_orthonormal(n).unwrap());
            let nf = n as f64;
            assert!((r.min_s - nf * nf).abs() <= 1e-9 * nf * nf);
            assert!((r.max_abs_p - nf.powf(-nf / 2.0)).abs() <= 1e-12 * r.max_abs_p);
            assert!(r.strong_holds && r.weak_holds && r.all_points_equality && r.passed);
            assert_eq!(r.classification, Classification::OrthonormalExtremal);
            assert!(r.gram_eigen_checks.iter().all(|&b| b));
        }
    }

    #[test]
    fn sixty_degree_pair_report() {
        let s3 = 3f64.sqrt();
        let sys = VectorSystem::new(2, vec![vec![1.0, 0.0], vec![0.5, s3 / 2.0]], "pair").unwrap();
        let r = report(&sys);
        assert!((r.min_s - 8.0 / 3.0).abs() < 1e-12);
        assert!((r.max_abs_p - 0.75).abs() < 1e-12);
        assert_eq!(r.classification, Classification::NonExtremal);
        assert!(r.strong_holds && r.weak_holds && !r.all_points_equality);
        assert!(r.gram_eigen_checks.iter().all(|&b| b));
    }

    #[test]
    fn reflection_systems_classify_as_equality() {
        for spec in [
            CoxeterSpec::new(CoxeterFamily::I2, 5),
            CoxeterSpec::new(CoxeterFamily::A3, 0),
            CoxeterSpec::new(CoxeterFamily::H3, 0),
        ] {
            let r = report(&make_coxeter(&spec).unwrap());
            assert_eq!(
                r.classification,
                Classification::ReflectionEquality,
                "{spec:?}"
            );
        }
    }

    #[test]
    fn random_generic_systems_are_non_extremal() {
        for seed in 0..5 {
            let r = report(&make_random(3, 5, seed, 0.3).unwrap());
            assert_eq!(r.classification, Classification::NonExtremal);
            assert!(r.min_s < 25.0 && r.passed);
        }
    }

    #[test]
    fn gram_check_can_fail_near_an_orthonormal_basis() {
        // v₁ = (cos α, sin α), v₂ = (sin α, cos α) keeps equal moduli at the
        // diagonal extrema while ⟨v₁,v₂⟩ = sin 2α moves G away from I.
        let alpha = 0.9e-8f64.asin() / 2.0;
        let (c, s) = (alpha.cos(), alpha.sin());
        let sys = VectorSystem::new(2, vec![vec![c, s], vec![s, c]], "skew").unwrap();
        let checks = gram_sign_check(&enumerate_extrema(&sys).unwrap()).unwrap();
        assert!(checks.iter().any(|&b| !b), "{checks:?}");
    }

    #[test]
    fn gates_report_overrides() {
        let sys = make_random(4, 4, 3, 0.1).unwrap();
        let es = enumerate_extrema(&sys).unwrap();
        let mut options = ReportOptions {
            random_g: 5,
            g_seed: 1,
            ..Default::default()
        };
        let r = strong_weak_report(&es, &options).unwrap();
        assert!(r.passed && r.ej_general_residuals.len() == 5);
        options.tolerances.set("ej_rel_tol", 0.0).unwrap();
        let r = strong_weak_report(&es, &options).unwrap();
        assert!(!r.passed);
        assert!(r.failed_gates().any(|g| g.name.starts_with("ej_")));
        assert!(options.tolerances.set("nonsense", 1.0).is_err());
    }

    #[test]
    fn report_json_has_point_blocks() {
        let r = report(&make_orthonormal(3).unwrap());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["classification"], "ORTHONORMAL_EXTREMAL");
        for key in ["eigen_rel", "laplacian_id", "jacobian_fact", "amgm"] {
            assert!(v["points"][0].get(key).is_some());
        }
        assert!(v["tolerances"]["ej_rel_tol"].is_number());
        let back: CertificationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn per_point_gates_compare_each_value_to_its_own_floor() {
        let g = Gate::per_point("g", [(1e-12, 0.0), (5e-9, 1e-8)].into_iter(), 1e-9);
        assert!(g.pass);
        assert_eq!((g.value, g.floor), (5e-9, Some(1e-8)));
        // The floor only covers its own point.
        let g = Gate::per_point("g", [(5e-9, 0.0), (1e-12, 1e-8)].into_iter(), 1e-9);
        assert!(!g.pass);
        // A zero tolerance still allows rounding-level residuals but nothing else.
        assert!(Gate::per_point("g", [(1e-15, 2e-15)].into_iter(), 0.0).pass);
        assert!(!Gate::per_point("g", [(1e-15, 0.0)].into_iter(), 0.0).pass);
        assert_eq!(Gate::per_point("g", std::iter::empty(), 1e-9).floor, None);
    }
}
