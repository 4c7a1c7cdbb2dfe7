use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{make_orthonormal, SystemError, VectorSystem};
use crate::numerics::{self, orthonormal_span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoxeterFamily {
    I2,
    A3,
    B3,
    H3,
    Prism,
    Orthonormal,
}

impl fmt::Display for CoxeterFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::I2 => "i2",
            Self::A3 => "a3",
            Self::B3 => "b3",
            Self::H3 => "h3",
            Self::Prism => "prism",
            Self::Orthonormal => "orthonormal",
        };
        f.write_str(s)
    }
}

impl FromStr for CoxeterFamily {
    type Err = SystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "i2" => Ok(Self::I2),
            "a3" => Ok(Self::A3),
            "b3" => Ok(Self::B3),
            "h3" => Ok(Self::H3),
            "prism" => Ok(Self::Prism),
            "orthonormal" => Ok(Self::Orthonormal),
            other => Err(SystemError::Spec(format!(
                "unknown Coxeter family `{other}`"
            ))),
        }
    }
}

/// A finite reflection arrangement: family plus its integer parameter
/// (`m` for `I2`/`PRISM`, `d` for `ORTHONORMAL`, ignored otherwise).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoxeterSpec {
    pub family: CoxeterFamily,
    pub param: usize,
}

impl CoxeterSpec {
    pub fn new(family: CoxeterFamily, param: usize) -> Self {
        Self { family, param }
    }

    pub fn check(&self) -> Result<(), SystemError> {
        match self.family {
            CoxeterFamily::I2 | CoxeterFamily::Prism if self.param < 2 => Err(SystemError::Spec(
                format!("{} needs m >= 2, got {}", self.family, self.param),
            )),
            CoxeterFamily::Orthonormal if self.param < 1 => {
                Err(SystemError::Spec("orthonormal needs d >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Golden ratio.
const TAU: f64 = 1.618_033_988_749_895;

fn polygon(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|k| {
            let a = k as f64 * PI / m as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Normalized positive-root directions of a Coxeter arrangement.
pub fn make_coxeter(spec: &CoxeterSpec) -> Result<VectorSystem, SystemError> {
    spec.check()?;
    let label = match spec.family {
        CoxeterFamily::I2 | CoxeterFamily::Prism | CoxeterFamily::Orthonormal => {
            format!("{}:{}", spec.family, spec.param)
        }
        _ => spec.family.to_string(),
    };
    match spec.family {
        CoxeterFamily::I2 => VectorSystem::normalized(2, polygon(spec.param), label),
        CoxeterFamily::A3 => VectorSystem::normalized(3, a3_roots(), label),
        CoxeterFamily::B3 => VectorSystem::normalized(3, b3_roots(), label),
        CoxeterFamily::H3 => VectorSystem::normalized(3, h3_roots(), label),
        CoxeterFamily::Prism => {
            let mut vs: Vec<Vec<f64>> = polygon(spec.param)
                .into_iter()
                .map(|v| vec![v[0], v[1], 0.0])
                .collect();
            vs.push(vec![0.0, 0.0, 1.0]);
            VectorSystem::normalized(3, vs, label)
        }
        CoxeterFamily::Orthonormal => Ok(make_orthonormal(spec.param)?.with_label(label)),
    }
}

/// `e_i - e_j` in `ℝ⁴`, expressed in a fixed orthonormal basis of the
/// hyperplane `Σx = 0`.
fn a3_roots() -> Vec<Vec<f64>> {
    let seed = [
        [1.0, -1.0, 0.0, 0.0],
        [0.0, 1.0, -1.0, 0.0],
        [0.0, 0.0, 1.0, -1.0],
    ];
    let basis = orthonormal_span(&seed, 1e-12);
    debug_assert_eq!(basis.len(), 3);
    let mut roots = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let mut r = [0.0; 4];
            r[i] = 1.0;
            r[j] = -1.0;
            roots.push(basis.iter().map(|q| numerics::dot(q, &r)).collect());
        }
    }
    roots
}

/// `e_i ± e_j` (length √2) and `e_i` (length 1); normalized by the caller.
fn b3_roots() -> Vec<Vec<f64>> {
    let mut roots = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            for s in [1.0, -1.0] {
                let mut r = vec![0.0; 3];
                r[i] = 1.0;
                r[j] = s;
                roots.push(r);
            }
        }
    }
    for i in 0..3 {
        let mut r = vec![0.0; 3];
        r[i] = 1.0;
        roots.push(r);
    }
    roots
}

/// The three axes plus cyclic permutations of `(±1, ±τ, ±1/τ)/2`, one
/// representative per `±` pair.
fn h3_roots() -> Vec<Vec<f64>> {
    let mut roots: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            e
        })
        .collect();
    let base = [1.0, TAU, 1.0 / TAU];
    for shift in 0..3 {
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                // first entry of `base` is kept positive
                let signed = [base[0], s1 * base[1], s2 * base[2]];
                let mut r = vec![0.0; 3];
                for (k, x) in signed.iter().enumerate() {
                    r[(k + shift) % 3] = x / 2.0;
                }
                roots.push(r);
            }
        }
    }
    roots
}
