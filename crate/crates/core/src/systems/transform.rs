use std::f64::consts::FRAC_PI_2;

use super::{validate, SystemError, VectorSystem, PARALLEL_TOL, RANK_TOL};
use crate::numerics::{self, dot, orthogonal_complement, orthonormal_span};

/// Reflection across the hyperplane `v^⊥`: `u - 2⟨u,v⟩/⟨v,v⟩ v`.
pub fn reflect(v: &[f64], u: &[f64]) -> Result<Vec<f64>, SystemError> {
    let vv = dot(v, v);
    if vv == 0.0 {
        return Err(SystemError::DegenerateAxis);
    }
    let c = 2.0 * dot(u, v) / vv;
    Ok(u.iter().zip(v).map(|(ui, vi)| ui - c * vi).collect())
}

/// Orthogonal sum: `a` occupies the leading coordinates, `b` the trailing ones.
pub fn direct_sum(a: &VectorSystem, b: &VectorSystem) -> VectorSystem {
    let dim = a.dim() + b.dim();
    let mut vectors = Vec::with_capacity(a.n() + b.n());
    for v in a.vectors() {
        let mut x = v.clone();
        x.resize(dim, 0.0);
        vectors.push(x);
    }
    for v in b.vectors() {
        let mut x = vec![0.0; a.dim()];
        x.extend_from_slice(v);
        vectors.push(x);
    }
    VectorSystem::new(dim, vectors, format!("{}+{}", a.label(), b.label()))
        .expect("padding preserves unit norms")
}

/// Zero-pads every vector up to `dim` coordinates.
pub fn pad_to(sys: &VectorSystem, dim: usize) -> Result<VectorSystem, SystemError> {
    if dim < sys.dim() {
        return Err(SystemError::Rank(format!(
            "cannot pad a {}-dimensional system down to {dim}",
            sys.dim()
        )));
    }
    let vectors = sys
        .vectors()
        .iter()
        .map(|v| {
            let mut x = v.clone();
            x.resize(dim, 0.0);
            x
        })
        .collect();
    VectorSystem::new(dim, vectors, sys.label().to_string())
}

/// Deforms a rank-deficient system of `n` vectors into a basis of `ℝⁿ`.
///
/// A maximal independent subset (chosen greedily in input order) is kept
/// fixed; every other vector `v_j` becomes `cos(t) v_j + sin(t) w_j` where the
/// `w_j` are an orthonormal basis of the orthogonal complement of the span.
/// When `n < d` the system is first rewritten in an `n`-dimensional
/// coordinate subspace containing the span.
pub fn perturb_to_basis(sys: &VectorSystem, t: f64) -> Result<VectorSystem, SystemError> {
    if !(t.abs() < FRAC_PI_2) {
        return Err(SystemError::Range(format!("|t| must be < π/2, got {t}")));
    }
    let n = sys.n();
    if n > sys.dim() {
        return Err(SystemError::Rank(format!(
            "{n} vectors cannot form a basis of ℝ^{}; pad the system to dimension {n} first",
            sys.dim()
        )));
    }
    let vectors: Vec<Vec<f64>> = if n < sys.dim() {
        let mut frame = orthonormal_span(sys.vectors(), RANK_TOL);
        frame.extend(orthogonal_complement(&frame, sys.dim(), RANK_TOL));
        frame.truncate(n);
        sys.vectors()
            .iter()
            .map(|v| frame.iter().map(|q| dot(q, v)).collect())
            .collect()
    } else {
        sys.vectors().to_vec()
    };

    let mut kept: Vec<usize> = Vec::new();
    let mut kept_rows: Vec<&[f64]> = Vec::new();
    for (j, v) in vectors.iter().enumerate() {
        kept_rows.push(v);
        if numerics::rank(&kept_rows, RANK_TOL) == kept_rows.len() {
            kept.push(j);
        } else {
            kept_rows.pop();
        }
    }
    let complement = orthogonal_complement(&kept_rows, n, RANK_TOL);
    debug_assert_eq!(complement.len(), n - kept.len());

    let (c, s) = (t.cos(), t.sin());
    let mut extra = complement.into_iter();
    let out = vectors
        .iter()
        .enumerate()
        .map(|(j, v)| {
            if kept.contains(&j) {
                v.clone()
            } else {
                let w = extra
                    .next()
                    .expect("one complement vector per dependent vector");
                v.iter().zip(&w).map(|(a, b)| c * a + s * b).collect()
            }
        })
        .collect();
    VectorSystem::new(n, out, format!("{}~t{t}", sys.label()))
}

/// Replaces every group of `k > 1` mutually parallel vectors by `k` vectors
/// fanned at angles `θ, -θ, 2θ, -2θ, …` around the group direction, inside
/// the plane spanned with a fixed orthogonal direction `w`.
///
/// `w` is the standard basis vector least aligned with the group direction,
/// orthogonalized against it.
pub fn split_duplicates(sys: &VectorSystem, theta: f64) -> Result<VectorSystem, SystemError> {
    let n = sys.n();
    let mut group_of: Vec<Option<usize>> = vec![None; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..n {
        if group_of[j].is_some() {
            continue;
        }
        let g = groups.len();
        group_of[j] = Some(g);
        let mut members = vec![j];
        for k in j + 1..n {
            if group_of[k].is_none() && dot(sys.vector(j), sys.vector(k)).abs() > 1.0 - PARALLEL_TOL
            {
                group_of[k] = Some(g);
                members.push(k);
            }
        }
        groups.push(members);
    }
    if groups.iter().all(|g| g.len() == 1) {
        return Ok(sys.clone());
    }
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(SystemError::Range(format!(
            "split angle must lie in (0, π/2), got {theta}"
        )));
    }
    if sys.dim() < 2 {
        return Err(SystemError::Rank(
            "cannot split parallel vectors in ℝ¹".into(),
        ));
    }

    let mut out: Vec<Vec<f64>> = sys.vectors().to_vec();
    for members in groups.iter().filter(|g| g.len() > 1) {
        let v = sys.vector(members[0]);
        let axis = (0..v.len())
            .min_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap())
            .unwrap();
        let mut w = vec![0.0; v.len()];
        w[axis] = 1.0;
        let c = dot(&w, v);
        numerics::axpy(-c, v, &mut w);
        let nw = numerics::norm(&w);
        w.iter_mut().for_each(|x| *x /= nw);

        for (i, &j) in members.iter().enumerate() {
            let step = (i / 2 + 1) as f64;
            let angle = if i % 2 == 0 {
                step * theta
            } else {
                -step * theta
            };
            let orient = dot(sys.vector(j), v).signum();
            out[j] = v
                .iter()
                .zip(&w)
                .map(|(a, b)| orient * (angle.cos() * a + angle.sin() * b))
                .collect();
        }
    }
    let split = VectorSystem::normalized(sys.dim(), out, format!("{}~split{theta}", sys.label()))?;
    if validate(&split).has_parallel_pair {
        for j in 0..n {
            for k in j + 1..n {
                if dot(split.vector(j), split.vector(k)).abs() > 1.0 - PARALLEL_TOL {
                    return Err(SystemError::Collision { with: j });
                }
            }
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{distance, norm, SplitMix64};
    use crate::systems::{
        is_reflection_system, make_coxeter, make_orthonormal, CoxeterFamily, CoxeterSpec,
    };

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect(&[1.0, 0.0], &[3.0, 4.0]).unwrap(), vec![-3.0, 4.0]);
        assert_eq!(reflect(&[1.0, 0.0], &[0.0, 2.5]).unwrap(), vec![0.0, 2.5]);
        let r = 1.0 / 2f64.sqrt();
        let img = reflect(&[1.0, 0.0], &[r, r]).unwrap();
        assert!(distance(&img, &[-r, r]) < 1e-16);
        assert_eq!(
            reflect(&[0.0, 0.0], &[1.0, 1.0]),
            Err(SystemError::DegenerateAxis)
        );
    }

    #[test]
    fn reflect_is_an_involutive_isometry() {
        let mut rng = SplitMix64::new(2024);
        for trial in 0..1000 {
            let d = 1 + trial % 7;
            let v = rng.unit_vector(d);
            let u: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
            let once = reflect(&v, &u).unwrap();
            let twice = reflect(&v, &once).unwrap();
            assert!(distance(&twice, &u) < 1e-12);
            assert!((norm(&once) - norm(&u)).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_sum_examples() {
        let a = make_orthonormal(1).unwrap();
        let b = make_coxeter(&CoxeterSpec::new(CoxeterFamily::I2, 10)).unwrap();
        let sum = direct_sum(&a, &b);
        let prism = make_coxeter(&CoxeterSpec::new(CoxeterFamily::Prism, 10)).unwrap();
        assert_eq!(sum.n(), prism.n());
        // coordinates (x0, x1, x2) of the sum correspond to (z, x, y) of the prism
        for v in sum.vectors() {
            let permuted = [v[1], v[2], v[0]];
            assert!(prism
                .vectors()
                .iter()
                .any(|p| distance(p, &permuted) < 1e-15));
        }

        let five = direct_sum(&make_orthonormal(2).unwrap(), &make_orthonormal(3).unwrap());
        assert_eq!(five.vectors(), make_orthonormal(5).unwrap().vectors());

        let a3 = make_coxeter(&CoxeterSpec::new(CoxeterFamily::A3, 0)).unwrap();
        let i2 = make_coxeter(&CoxeterSpec::new(CoxeterFamily::I2, 5)).unwrap();
        assert!(is_reflection_system(&direct_sum(&a3, &i2), 1e-9));
    }

    #[test]
    fn perturb_keeps_a_basis_unchanged() {
        let b = crate::systems::make_random(4, 4, 3, 0.1).unwrap();
        let p = perturb_to_basis(&b, 0.3).unwrap();
        for (x, y) in b.vectors().iter().zip(p.vectors()) {
            assert!(distance(x, y) < 1e-15);
        }
    }

    #[test]
    fn perturb_completes_a_rank_deficient_system() {
        let h = 3f64.sqrt() / 2.0;
        let sys = VectorSystem::new(
            3,
            vec![vec![1.0, 0.0, 0.0], vec![0.5, h, 0.0], vec![0.0, 1.0, 0.0]],
            "planar",
        )
        .unwrap();
        let p = perturb_to_basis(&sys, 0.1).unwrap();
        assert_eq!(numerics::rank(p.vectors(), RANK_TOL), 3);
        assert_eq!(p.vector(0), sys.vector(0));
        assert_eq!(p.vector(1), sys.vector(1));
        let w3: Vec<f64> = p
            .vector(2)
            .iter()
            .zip(sys.vector(2))
            .map(|(a, b)| (a - 0.1f64.cos() * b) / 0.1f64.sin())
            .collect();
        assert!((norm(&w3) - 1.0).abs() < 1e-12);
        assert!(dot(&w3, sys.vector(0)).abs() < 1e-12 && dot(&w3, sys.vector(1)).abs() < 1e-12);
    }

    #[test]
    fn perturbation_distance_is_at_most_t() {
        let h = 3f64.sqrt() / 2.0;
        let sys = VectorSystem::new(
            3,
            vec![vec![1.0, 0.0, 0.0], vec![0.5, h, 0.0], vec![0.0, 1.0, 0.0]],
            "planar",
        )
        .unwrap();
        for t in [0.4, 0.1, 0.01, 1e-4, -0.2] {
            let p = perturb_to_basis(&sys, t).unwrap();
            let worst = sys
                .vectors()
                .iter()
                .zip(p.vectors())
                .map(|(a, b)| distance(a, b))
                .fold(0.0, f64::max);
            assert!(worst <= t.abs() + 1e-15, "t={t} worst={worst}");
        }
    }

    #[test]
    fn perturb_reembeds_and_rejects() {
        // three vectors in ℝ⁵ spanning a plane
        let sys = VectorSystem::normalized(
            5,
            vec![
                vec![1.0, 0.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0, 0.0],
                vec![1.0, 1.0, 0.0, 0.0, 0.0],
            ],
            "low",
        )
        .unwrap();
        let p = perturb_to_basis(&sys, 0.2).unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(numerics::rank(p.vectors(), RANK_TOL), 3);

        let wide = make_coxeter(&CoxeterSpec::new(CoxeterFamily::I2, 3)).unwrap();
        assert!(matches!(
            perturb_to_basis(&wide, 0.1),
            Err(SystemError::Rank(_))
        ));
        let padded = pad_to(&wide, 3).unwrap();
        assert!(perturb_to_basis(&padded, 0.1).is_ok());
        assert!(matches!(
            perturb_to_basis(&padded, 2.0),
            Err(SystemError::Range(_))
        ));
    }

    #[test]
    fn split_examples() {
        let dup = VectorSystem::new(2, vec![vec![1.0, 0.0], vec![1.0, 0.0]], "dup").unwrap();
        let s = split_duplicates(&dup, 0.1).unwrap();
        let (c, sn) = (0.1f64.cos(), 0.1f64.sin());
        assert!(distance(s.vector(0), &[c, sn]) < 1e-15);
        assert!(distance(s.vector(1), &[c, -sn]) < 1e-15);

        let plain = make_orthonormal(3).unwrap();
        assert_eq!(split_duplicates(&plain, 0.1).unwrap(), plain);

        let three = VectorSystem::new(
            2,
            vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            "e1e1e2",
        )
        .unwrap();
        let s = split_duplicates(&three, 0.05).unwrap();
        assert_eq!(s.n(), 3);
        assert!(!validate(&s).has_parallel_pair);
    }

    #[test]
    fn split_handles_larger_groups_and_collisions() {
        let quad = VectorSystem::new(2, vec![vec![1.0, 0.0]; 4], "quad").unwrap();
        let s = split_duplicates(&quad, 0.1).unwrap();
        assert!(!validate(&s).has_parallel_pair);

        // fanning e1 by π/4 lands on the existing (1,1)/√2
        let r = 1.0 / 2f64.sqrt();
        let clash = VectorSystem::new(2, vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![r, r]], "clash")
            .unwrap();
        assert!(matches!(
            split_duplicates(&clash, std::f64::consts::FRAC_PI_4),
            Err(SystemError::Collision { .. })
        ));
    }
}
