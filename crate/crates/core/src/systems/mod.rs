//! Configurations of unit vectors: construction, validation, the JSON input
//! format, Coxeter root systems and the transformations used to reduce
//! special configurations to generic ones.

mod coxeter;
mod family;
mod transform;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, norm, SplitMix64};

pub use coxeter::{make_coxeter, CoxeterFamily, CoxeterSpec};
pub use family::{FamilyParams, FamilyRegistry, SystemFamily};
pub use transform::{direct_sum, pad_to, perturb_to_basis, reflect, split_duplicates};

/// Tolerance on `‖v‖ = 1` for every vector of a [`VectorSystem`].
pub const UNIT_TOL: f64 = 1e-12;
/// `|⟨v_j, v_k⟩|` above `1 - PARALLEL_TOL` counts as a parallel pair.
pub const PARALLEL_TOL: f64 = 1e-10;
/// Relative pivot tolerance for rank decisions.
pub const RANK_TOL: f64 = 1e-10;
/// Attempts allowed when rejection-sampling random systems.
pub const REJECTION_BUDGET: usize = 10_000;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SystemError {
    #[error("system has no vectors")]
    Empty,
    #[error("vector {index} has length {len}, expected dimension {dim}")]
    Dimension {
        index: usize,
        len: usize,
        dim: usize,
    },
    #[error("vector {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("vector {index} has norm {norm} (not a unit vector)")]
    NotUnit { index: usize, norm: f64 },
    #[error(
        "could not place {n} vectors with pairwise angle >= {min_angle} in {attempts} attempts"
    )]
    Generation {
        n: usize,
        min_angle: f64,
        attempts: usize,
    },
    #[error("reflection axis is the zero vector")]
    DegenerateAxis,
    #[error("invalid system spec: {0}")]
    Spec(String),
    #[error("rank error: {0}")]
    Rank(String),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("splitting produced a vector parallel to vector {with}")]
    Collision { with: usize },
    #[error("invalid system document: {0}")]
    Document(String),
}

/// `n` unit vectors in `ℝ^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSystem {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    label: String,
}

impl VectorSystem {
    /// Validates shape, finiteness and unit length.
    pub fn new(
        dim: usize,
        vectors: Vec<Vec<f64>>,
        label: impl Into<String>,
    ) -> Result<Self, SystemError> {
        if vectors.is_empty() || dim == 0 {
            return Err(SystemError::Empty);
        }
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(SystemError::Dimension {
                    index,
                    len: v.len(),
                    dim,
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(SystemError::NonFinite { index });
            }
            let nv = norm(v);
            if (nv - 1.0).abs() > UNIT_TOL {
                return Err(SystemError::NotUnit { index, norm: nv });
            }
        }
        Ok(Self {
            dim,
            vectors,
            label: label.into(),
        })
    }

    /// Scales every vector to unit length first. Zero vectors are rejected.
    pub fn normalized(
        dim: usize,
        vectors: Vec<Vec<f64>>,
        label: impl Into<String>,
    ) -> Result<Self, SystemError> {
        let mut out = Vec::with_capacity(vectors.len());
        for (index, v) in vectors.into_iter().enumerate() {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(SystemError::NonFinite { index });
            }
            let nv = norm(&v);
            if nv == 0.0 {
                return Err(SystemError::NotUnit { index, norm: 0.0 });
            }
            out.push(v.into_iter().map(|x| x / nv).collect());
        }
        Self::new(dim, out, label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `⟨v_j, x⟩` for every `j`.
    pub fn inner_products(&self, x: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|v| numerics::dot(v, x)).collect()
    }

    /// Rows are the vectors.
    pub fn to_matrix(&self) -> numerics::Matrix {
        numerics::Matrix::from_rows(&self.vectors)
            .expect("system vectors are finite and rectangular")
    }

    /// Applies a linear map (given by its rows) to every vector.
    pub fn map_linear(&self, rows: &numerics::Matrix) -> Result<Self, SystemError> {
        let vectors = self
            .vectors
            .iter()
            .map(|v| {
                rows.mul_vec(v)
                    .map_err(|e| SystemError::Spec(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::normalized(rows.rows(), vectors, self.label.clone())
    }

    pub fn to_document(&self) -> SystemDocument {
        SystemDocument {
            dim: self.dim,
            label: self.label.clone(),
            vectors: self.vectors.clone(),
            normalize: false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("system serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SystemError> {
        let doc: SystemDocument =
            serde_json::from_str(s).map_err(|e| SystemError::Document(e.to_string()))?;
        doc.into_system()
    }
}

/// On-disk form of a [`VectorSystem`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub dim: usize,
    #[serde(default)]
    pub label: String,
    pub vectors: Vec<Vec<f64>>,
    #[serde(default)]
    pub normalize: bool,
}

impl SystemDocument {
    pub fn into_system(self) -> Result<VectorSystem, SystemError> {
        if self.normalize {
            VectorSystem::normalized(self.dim, self.vectors, self.label)
        } else {
            VectorSystem::new(self.dim, self.vectors, self.label)
        }
    }
}

impl Serialize for VectorSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_document().serialize(s)
    }
}

impl<'de> Deserialize<'de> for VectorSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        SystemDocument::deserialize(d)?
            .into_system()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDiagnostics {
    pub is_unit: bool,
    /// Smallest angle between the lines spanned by two vectors, in radians.
    pub min_pairwise_angle: f64,
    pub has_parallel_pair: bool,
    pub spans_dim: usize,
    pub is_basis: bool,
}

/// Angle between the lines `ℝv` and `ℝw` of two unit vectors.
pub fn line_angle(v: &[f64], w: &[f64]) -> f64 {
    numerics::dot(v, w).abs().min(1.0).acos()
}

pub fn validate(sys: &VectorSystem) -> SystemDiagnostics {
    let n = sys.n();
    let is_unit = sys
        .vectors
        .iter()
        .all(|v| (norm(v) - 1.0).abs() <= UNIT_TOL);
    let mut min_angle = std::f64::consts::FRAC_PI_2;
    let mut has_parallel_pair = false;
    for j in 0..n {
        for k in j + 1..n {
            let c = numerics::dot(&sys.vectors[j], &sys.vectors[k]).abs();
            if c > 1.0 - PARALLEL_TOL {
                has_parallel_pair = true;
            }
            min_angle = min_angle.min(c.min(1.0).acos());
        }
    }
    let spans_dim = numerics::rank(&sys.vectors, RANK_TOL);
    SystemDiagnostics {
        is_unit,
        min_pairwise_angle: min_angle,
        has_parallel_pair,
        spans_dim,
        is_basis: n == sys.dim && spans_dim == n,
    }
}

/// Whether every `min(rank, n)`-subset of the vectors is linearly
/// independent, i.e. the arrangement is in general position inside the span.
pub fn is_generic(sys: &VectorSystem) -> bool {
    let r = numerics::rank(&sys.vectors, RANK_TOL);
    let n = sys.n();
    let k = r.min(n);
    if k == n {
        return true;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let subset: Vec<&[f64]> = idx.iter().map(|&i| sys.vector(i)).collect();
        if numerics::rank(&subset, 1e-9) < k {
            return false;
        }
        if !next_combination(&mut idx, n) {
            return true;
        }
    }
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic
/// order; false once exhausted.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Standard basis `e_1, …, e_d`.
pub fn make_orthonormal(d: usize) -> Result<VectorSystem, SystemError> {
    if d == 0 {
        return Err(SystemError::Spec(
            "orthonormal dimension must be >= 1".into(),
        ));
    }
    let vectors = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();
    VectorSystem::new(d, vectors, format!("orthonormal:{d}"))
}

/// `n` uniform random unit vectors in `ℝ^d`, rejection-sampled so every
/// pairwise line angle is at least `min_angle`.
pub fn make_random(
    d: usize,
    n: usize,
    seed: u64,
    min_angle: f64,
) -> Result<VectorSystem, SystemError> {
    if d == 0 || n == 0 {
        return Err(SystemError::Spec(
            "random systems need d >= 1 and n >= 1".into(),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut attempts = 0;
    while vectors.len() < n {
        if attempts >= REJECTION_BUDGET {
            return Err(SystemError::Generation {
                n,
                min_angle,
                attempts,
            });
        }
        attempts += 1;
        let v = rng.unit_vector(d);
        if vectors.iter().all(|w| line_angle(w, &v) >= min_angle) {
            vectors.push(v);
        }
    }
    VectorSystem::new(d, vectors, format!("random:d{d}:n{n}:s{seed}"))
}

/// `Φ = {±v_j}` is closed under every reflection `s_v`, `v ∈ Φ`, up to `tol`.
pub fn is_reflection_system(sys: &VectorSystem, tol: f64) -> bool {
    let phi: Vec<Vec<f64>> = sys
        .vectors
        .iter()
        .flat_map(|v| [v.clone(), v.iter().map(|x| -x).collect()])
        .collect();
    for v in &sys.vectors {
        for w in &sys.vectors {
            let Ok(img) = reflect(v, w) else {
                return false;
            };
            let hit = phi.iter().any(|p| numerics::distance(&img, p) <= tol);
            if !hit {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    pub(crate) fn sixty_degree_pair() -> VectorSystem {
        VectorSystem::new(
            2,
            vec![vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]],
            "pair60",
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_vectors() {
        assert_eq!(VectorSystem::new(2, vec![], "x"), Err(SystemError::Empty));
        assert!(matches!(
            VectorSystem::new(2, vec![vec![1.0, 1.0]], "x"),
            Err(SystemError::NotUnit { .. })
        ));
        assert!(matches!(
            VectorSystem::new(2, vec![vec![1.0]], "x"),
            Err(SystemError::Dimension { .. })
        ));
        assert!(matches!(
            VectorSystem::new(1, vec![vec![f64::NAN]], "x"),
            Err(SystemError::NonFinite { .. })
        ));
        let s = VectorSystem::normalized(2, vec![vec![3.0, 4.0]], "x").unwrap();
        assert!((s.vector(0)[0] - 0.6).abs() < 1e-16);
    }

    #[test]
    fn validate_examples() {
        let d = validate(&make_orthonormal(3).unwrap());
        assert!(d.is_basis && d.is_unit && !d.has_parallel_pair);
        assert!((d.min_pairwise_angle - FRAC_PI_2).abs() < 1e-15);

        let dup = VectorSystem::new(2, vec![vec![1.0, 0.0], vec![1.0, 0.0]], "dup").unwrap();
        assert!(validate(&dup).has_parallel_pair);

        let anti = VectorSystem::new(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0]], "anti").unwrap();
        assert!(validate(&anti).has_parallel_pair);

        let s = 1.0 / 3f64.sqrt();
        let four = VectorSystem::new(
            3,
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![s, s, s],
            ],
            "four",
        )
        .unwrap();
        let d = validate(&four);
        assert_eq!(d.spans_dim, 3);
        assert!(!d.is_basis);
    }

    #[test]
    fn orthonormal_generator() {
        assert_eq!(make_orthonormal(1).unwrap().vectors(), &[vec![1.0]]);
        assert_eq!(
            make_orthonormal(2).unwrap().vectors(),
            &[vec![1.0, 0.0], vec![0.0, 1.0]]
        );
        let s = make_orthonormal(5).unwrap();
        for j in 0..5 {
            for k in 0..5 {
                let g = numerics::dot(s.vector(j), s.vector(k));
                assert_eq!(g, if j == k { 1.0 } else { 0.0 });
            }
        }
        assert!(make_orthonormal(0).is_err());
    }

    #[test]
    fn random_generator_contract() {
        let one = make_random(3, 1, 42, 0.0).unwrap();
        assert!((norm(one.vector(0)) - 1.0).abs() < 1e-12);

        let s = make_random(2, 5, 3, 0.2).unwrap();
        for j in 0..5 {
            for k in j + 1..5 {
                assert!(line_angle(s.vector(j), s.vector(k)) >= 0.2);
            }
        }
        assert_eq!(
            make_random(4, 6, 11, 0.1).unwrap(),
            make_random(4, 6, 11, 0.1).unwrap()
        );
        assert!(matches!(
            make_random(2, 5, 1, 1.0),
            Err(SystemError::Generation { .. })
        ));
    }

    #[test]
    fn reflection_closure_examples() {
        assert!(is_reflection_system(&make_orthonormal(2).unwrap(), 1e-12));
        assert!(!is_reflection_system(&sixty_degree_pair(), 1e-9));
    }

    #[test]
    fn genericity() {
        assert!(is_generic(&make_random(3, 7, 5, 0.1).unwrap()));
        assert!(is_generic(&make_orthonormal(4).unwrap()));
        let b3 = make_coxeter(&CoxeterSpec::new(CoxeterFamily::B3, 0)).unwrap();
        assert!(!is_generic(&b3));
        let i2 = make_coxeter(&CoxeterSpec::new(CoxeterFamily::I2, 7)).unwrap();
        assert!(is_generic(&i2));
    }

    #[test]
    fn json_round_trip_and_normalize_flag() {
        let s = make_random(3, 4, 8, 0.1).unwrap();
        let back = VectorSystem::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);

        let raw = r#"{"dim":2,"label":"raw","vectors":[[3.0,4.0]],"normalize":true}"#;
        let s = VectorSystem::from_json(raw).unwrap();
        assert!((s.vector(0)[1] - 0.8).abs() < 1e-16);
        let raw = r#"{"dim":2,"label":"raw","vectors":[[3.0,4.0]],"normalize":false}"#;
        assert!(matches!(
            VectorSystem::from_json(raw),
            Err(SystemError::NotUnit { .. })
        ));
    }
}
