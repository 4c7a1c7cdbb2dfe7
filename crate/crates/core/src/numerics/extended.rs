use std::ops::{Add, Div, Mul, Sub};

use super::NumericsError;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2` (double-double).
#[derive(Clone, Copy, Debug, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Self {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn fast_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Self {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn sqrt(self) -> Self {
        let r = self.hi.sqrt();
        // one Newton correction: r + (x − r²)/(2r)
        let err = (self - Dd::two_prod(r, r)).hi;
        Dd::fast_two_sum(r, err / (2.0 * r))
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let v = Dd::fast_two_sum(s.hi, s.lo + t.hi);
        Dd::fast_two_sum(v.hi, v.lo + t.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + Dd {
            hi: -o.hi,
            lo: -o.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, o.hi);
        Dd::fast_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let q = Dd::fast_two_sum(q1, q2);
        q + Dd::new(q3)
    }
}

/// `det(I + Bᵀ B)` for the `k×d` matrix `B` with the given rows.
///
/// The matrix is assembled and Cholesky-factored in double-double
/// arithmetic. Rows of very different lengths make `I + BᵀB` badly
/// conditioned, but the determinant itself is a sum of squared volumes and
/// stays well conditioned under relative perturbations of the rows, so only
/// the factorization needs the extra precision.
pub fn det_identity_plus_gram<R: AsRef<[f64]>>(rows: &[R], d: usize) -> Result<f64, NumericsError> {
    let mut h = vec![vec![Dd::new(0.0); d]; d];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = Dd::new(1.0);
    }
    for (r, row) in rows.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != d {
            return Err(NumericsError::Dimension(format!(
                "row {r} has length {}, expected {d}",
                row.len()
            )));
        }
        if let Some(c) = row.iter().position(|x| !x.is_finite()) {
            return Err(NumericsError::NonFinite(format!("entry ({r}, {c})")));
        }
        for i in 0..d {
            for k in 0..d {
                h[i][k] = h[i][k] + Dd::two_prod(row[i], row[k]);
            }
        }
    }
    // in-place Cholesky; det = ∏ l_ii²
    let mut det = Dd::new(1.0);
    for j in 0..d {
        let mut diag = h[j][j];
        for k in 0..j {
            diag = diag - h[j][k] * h[j][k];
        }
        if !(diag.hi > 0.0) {
            return Err(NumericsError::NotPositiveDefinite { column: j });
        }
        det = det * diag;
        let l = diag.sqrt();
        h[j][j] = l;
        for i in j + 1..d {
            let mut s = h[i][j];
            for k in 0..j {
                s = s - h[i][k] * h[j][k];
            }
            h[i][j] = s / l;
        }
    }
    Ok(det.hi + det.lo)
}
