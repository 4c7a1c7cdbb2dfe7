use serde::{Deserialize, Serialize};

use super::{NumericsError, SplitMix64};

/// One monomial `coeff · ∏ x_i^{e_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

/// Sparse polynomial in `dim` real variables, stored as a list of monomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialPoly {
    dim: usize,
    terms: Vec<Term>,
}

impl MonomialPoly {
    pub fn new(dim: usize, terms: Vec<Term>) -> Result<Self, NumericsError> {
        if dim == 0 {
            return Err(NumericsError::Dimension(
                "polynomial dimension must be positive".into(),
            ));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.exponents.len() != dim {
                return Err(NumericsError::Dimension(format!(
                    "term {i} has {} exponents, expected {dim}",
                    t.exponents.len()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(NumericsError::NonFinite(format!("coefficient of term {i}")));
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self {
            dim,
            terms: vec![Term {
                coeff: c,
                exponents: vec![0; dim],
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exponents.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, NumericsError> {
        eval_poly(self, x)
    }
}

pub fn eval_poly(g: &MonomialPoly, x: &[f64]) -> Result<f64, NumericsError> {
    if x.len() != g.dim {
        return Err(NumericsError::Dimension(format!(
            "polynomial in {} variables evaluated at a point of length {}",
            g.dim,
            x.len()
        )));
    }
    Ok(g.terms
        .iter()
        .map(|t| {
            t.exponents
                .iter()
                .zip(x)
                .fold(t.coeff, |acc, (&e, &xi)| acc * xi.powi(e as i32))
        })
        .sum())
}

/// Exponent vectors of every monomial of total degree `<= max_degree`,
/// graded then lexicographically descending in the leading variable.
pub fn monomials_up_to(dim: usize, max_degree: u32) -> Vec<Vec<u32>> {
    fn fill(dim: usize, pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == dim {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            fill(dim, pos + 1, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        fill(dim, 0, deg, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

/// Dense random polynomial: every monomial of degree `<= max_degree` with a
/// coefficient drawn uniformly from `[-1, 1]`.
pub fn random_poly(dim: usize, max_degree: u32, seed: u64) -> MonomialPoly {
    let mut rng = SplitMix64::new(seed);
    let terms = monomials_up_to(dim, max_degree)
        .into_iter()
        .map(|exponents| Term {
            coeff: rng.uniform(-1.0, 1.0),
            exponents,
        })
        .collect();
    MonomialPoly { dim, terms }
}
