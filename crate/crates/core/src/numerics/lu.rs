use super::{Matrix, NumericsError};

/// Partial-pivot LU factorization `PA = LU`, stored compactly.
#[derive(Clone, Debug)]
pub struct Lu {
    factors: Matrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn factor(m: &Matrix) -> Result<Self, NumericsError> {
        if !m.is_square() {
            return Err(NumericsError::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (p, _) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if p != k {
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = t;
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = a[(k, k)];
            if pivot == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        a[(i, j)] -= f * a[(k, j)];
                    }
                }
            }
        }
        Ok(Self {
            factors: a,
            perm,
            swaps,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.rows()
    }

    pub fn det(&self) -> f64 {
        let d: f64 = (0..self.dim()).map(|i| self.factors[(i, i)]).product();
        if self.swaps % 2 == 1 {
            -d
        } else {
            d
        }
    }

    /// Absolute values of the diagonal of `U`.
    pub fn pivot_magnitudes(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.factors[(i, i)].abs())
            .collect()
    }

    /// Ratio of smallest to largest pivot magnitude; 0 for an exactly
    /// singular factorization.
    pub fn pivot_ratio(&self) -> f64 {
        let p = self.pivot_magnitudes();
        let max = p.iter().cloned().fold(0.0, f64::max);
        let min = p.iter().cloned().fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let n = self.dim();
        if b.len() != n {
            return Err(NumericsError::Dimension(format!(
                "rhs has length {}, expected {n}",
                b.len()
            )));
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.factors[(i, j)] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.factors[(i, j)] * y[j];
            }
            let d = self.factors[(i, i)];
            if d == 0.0 {
                return Err(NumericsError::Singular { pivot_ratio: 0.0 });
            }
            y[i] /= d;
        }
        Ok(y)
    }
}

/// `‖A‖₁‖A⁻¹‖₁`, infinite for a singular matrix. Builds the full inverse,
/// which is fine at the sizes used here.
pub fn condition_1(m: &Matrix) -> Result<f64, NumericsError> {
    let lu = Lu::factor(m)?;
    let n = lu.dim();
    let col_norm = |col: &dyn Fn(usize) -> Vec<f64>| {
        (0..n)
            .map(|k| col(k).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let a_norm = col_norm(&|k| (0..n).map(|i| m[(i, k)]).collect());
    let mut inv_norm = 0.0f64;
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        match lu.solve(&e) {
            Ok(c) => inv_norm = inv_norm.max(c.iter().map(|x| x.abs()).sum()),
            Err(NumericsError::Singular { .. }) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }
    Ok(a_norm * inv_norm)
}

/// Determinant by partial-pivot LU.
pub fn lu_determinant(m: &Matrix) -> Result<f64, NumericsError> {
    Ok(Lu::factor(m)?.det())
}

/// Solves `Hx = b` for symmetric positive-definite `H` via Cholesky.
///
/// A non-positive pivot is reported as [`NumericsError::NotPositiveDefinite`].
pub fn spd_solve(h: &Matrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    if !h.is_square() {
        return Err(NumericsError::Dimension(format!(
            "Cholesky needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let n = h.rows();
    if b.len() != n {
        return Err(NumericsError::Dimension(format!(
            "rhs has length {}, expected {n}",
            b.len()
        )));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(NumericsError::NotPositiveDefinite { column: j });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = h[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[(k, i)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    Ok(y)
}

/// Pivot threshold for [`dual_basis`]: smallest pivot below this fraction of
/// the largest pivot means the basis is treated as singular.
pub const DUAL_BASIS_PIVOT_RATIO: f64 = 1e-12;

/// Dual basis of the rows of `v`: returns `W` with `⟨v_j, w_k⟩ = δ_jk`,
/// i.e. the inverse transpose.
pub fn dual_basis(v: &Matrix) -> Result<Matrix, NumericsError> {
    let lu = Lu::factor(v)?;
    let ratio = lu.pivot_ratio();
    if ratio < DUAL_BASIS_PIVOT_RATIO {
        return Err(NumericsError::Singular { pivot_ratio: ratio });
    }
    let n = v.rows();
    let mut w = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for k in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[k] = 1.0;
        // column k of V^{-1} is w_k
        let col = lu.solve(&e)?;
        for (i, c) in col.into_iter().enumerate() {
            w[(k, i)] = c;
        }
    }
    Ok(w)
}

/// Numerical rank of a set of row vectors by Gaussian elimination with full
/// pivoting. Pivots below `tol` times the largest entry count as zero.
///
/// Also returns the original indices of the rows chosen as pivots, in the
/// order they were selected.
pub fn rank_with_pivots<R: AsRef<[f64]>>(rows: &[R], tol: f64) -> (usize, Vec<usize>) {
    if rows.is_empty() {
        return (0, Vec::new());
    }
    let cols = rows[0].as_ref().len();
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| r.as_ref().to_vec()).collect();
    let mut idx: Vec<usize> = (0..a.len()).collect();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return (0, Vec::new());
    }
    let mut rank = 0;
    let mut col_used = vec![false; cols];
    while rank < a.len().min(cols) {
        let mut best = (0, 0, 0.0);
        for (i, row) in a.iter().enumerate().skip(rank) {
            for (j, x) in row.iter().enumerate() {
                if !col_used[j] && x.abs() > best.2 {
                    best = (i, j, x.abs());
                }
            }
        }
        if best.2 <= tol * scale {
            break;
        }
        let (pi, pj, _) = best;
        a.swap(rank, pi);
        idx.swap(rank, pi);
        col_used[pj] = true;
        let pivot_row = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            let f = row[pj] / pivot_row[pj];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
            }
        }
        rank += 1;
    }
    idx.truncate(rank);
    (rank, idx)
}

pub fn rank<R: AsRef<[f64]>>(rows: &[R], tol: f64) -> usize {
    rank_with_pivots(rows, tol).0
}

/// Orthonormal basis of `span(rows)` by modified Gram–Schmidt with
/// reorthogonalization; vectors whose residual norm drops below `tol` are
/// skipped.
pub fn orthonormal_span<R: AsRef<[f64]>>(rows: &[R], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let r = r.as_ref();
        let n0 = super::norm(r);
        if n0 == 0.0 {
            continue;
        }
        let mut v = r.to_vec();
        for _ in 0..2 {
            for q in &basis {
                let c = super::dot(q, &v);
                super::axpy(-c, q, &mut v);
            }
        }
        let nv = super::norm(&v);
        if nv > tol * n0 {
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v);
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of `span(rows)` in `ℝ^dim`,
/// obtained by continuing Gram–Schmidt over the standard basis.
pub fn orthogonal_complement<R: AsRef<[f64]>>(rows: &[R], dim: usize, tol: f64) -> Vec<Vec<f64>> {
    let span = orthonormal_span(rows, tol);
    let k = span.len();
    let mut all: Vec<Vec<f64>> = span;
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        all.push(e);
    }
    orthonormal_span(&all, 1e-8).split_off(k)
}
