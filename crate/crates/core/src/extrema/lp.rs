//! Dense tableau simplex with Bland's rule, sized for the max-margin chamber
//! programs (a few dozen rows and columns).

use crate::numerics::Matrix;

const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal {
        value: f64,
        solution: Vec<f64>,
    },
    Unbounded,
    /// Iteration guard exhausted.
    Stalled,
}

/// Maximizes `c·z` subject to `A z <= b`, `z >= 0`, with `b >= 0` so the
/// slack basis is feasible from the start.
pub(crate) fn maximize(a: &Matrix, b: &[f64], c: &[f64]) -> LpOutcome {
    let m = a.rows();
    let nv = a.cols();
    debug_assert_eq!(b.len(), m);
    debug_assert_eq!(c.len(), nv);
    debug_assert!(b.iter().all(|&x| x >= 0.0));

    // columns: structural | slack | rhs
    let width = nv + m + 1;
    let mut t = Matrix::zeros(m + 1, width);
    for i in 0..m {
        for j in 0..nv {
            t[(i, j)] = a[(i, j)];
        }
        t[(i, nv + i)] = 1.0;
        t[(i, width - 1)] = b[i];
    }
    // objective row holds reduced costs of the maximization
    for j in 0..nv {
        t[(m, j)] = c[j];
    }
    let mut basis: Vec<usize> = (nv..nv + m).collect();

    let max_iters = 50 * (m + nv) + 100;
    for _ in 0..max_iters {
        let Some(enter) = (0..nv + m).find(|&j| t[(m, j)] > PIVOT_TOL) else {
            let mut solution = vec![0.0; nv];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < nv {
                    solution[bv] = t[(i, width - 1)];
                }
            }
            return LpOutcome::Optimal {
                value: -t[(m, width - 1)],
                solution,
            };
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let col = t[(i, enter)];
            if col > PIVOT_TOL {
                let ratio = t[(i, width - 1)] / col;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-15
                            || ((ratio - lr).abs() <= 1e-15 && basis[i] < basis[li])
                        {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return LpOutcome::Unbounded;
        };
        pivot(&mut t, row, enter);
        basis[row] = enter;
    }
    LpOutcome::Stalled
}

fn pivot(t: &mut Matrix, row: usize, col: usize) {
    let width = t.cols();
    let p = t[(row, col)];
    for j in 0..width {
        t[(row, j)] /= p;
    }
    for i in 0..t.rows() {
        if i == row {
            continue;
        }
        let f = t[(i, col)];
        if f != 0.0 {
            for j in 0..width {
                let v = t[(row, j)];
                t[(i, j)] -= f * v;
            }
        }
    }
}
