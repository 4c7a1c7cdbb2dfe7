//! Property tests over seeded random configurations. proptest only draws
//! seeds and sizes; all library randomness goes through `SplitMix64`.

use proptest::prelude::*;

use polarize_core::certify::{
    det_lower_bound_check, euler_jacobi_general_residual, euler_jacobi_theorem_residual,
    strong_weak_report, ReportOptions,
};
use polarize_core::extrema::{
    enumerate_extrema, expected_region_count, newton_trace, residual_floor, solve_chamber,
    ExtremaSet, SignPattern,
};
use polarize_core::numerics::{
    distance, dot, dual_basis, lu_determinant, norm, orthonormal_span, random_poly, spd_solve, Lu,
    Matrix, SplitMix64,
};
use polarize_core::systems::{
    direct_sum, is_reflection_system, make_coxeter, make_random, pad_to, perturb_to_basis, reflect,
    CoxeterFamily, CoxeterSpec, VectorSystem,
};

fn random_orthogonal(d: usize, seed: u64) -> Matrix {
    let mut rng = SplitMix64::new(seed);
    loop {
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..d).map(|_| rng.gaussian()).collect())
            .collect();
        let q = orthonormal_span(&rows, 1e-8);
        if q.len() == d {
            return Matrix::from_rows(&q).unwrap();
        }
    }
}

fn tolerance_at(es: &ExtremaSet, u: &[f64], base: f64) -> f64 {
    base.max(residual_floor(&es.system, u))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn extremal_points_are_unit_and_in_their_chamber(d in 2usize..6, extra in 0usize..4, seed in any::<u64>()) {
        let sys = make_random(d, d + extra, seed, 0.05).unwrap();
        let es = enumerate_extrema(&sys).unwrap();
        for p in &es.points {
            let tol = tolerance_at(&es, &p.u, 1e-10);
            prop_assert!((norm(&p.u) - 1.0).abs() <= tol, "‖u‖ = {}", norm(&p.u));
            prop_assert_eq!(SignPattern::of_point(&sys, &p.u), Some(p.pattern.clone()));
            prop_assert!(p.value_p != 0.0 && p.weight_mu > 0.0);
            prop_assert!(p.fixed_point_residual <= tolerance_at(&es, &p.u, 1e-9));
        }
        prop_assert!(es.min_pairwise_distance() > 1e-6);
    }

    #[test]
    fn extrema_are_closed_under_antipodes(d in 2usize..5, extra in 0usize..4, seed in any::<u64>()) {
        let sys = make_random(d, d + extra, seed, 0.05).unwrap();
        let es = enumerate_extrema(&sys).unwrap();
        let odd = sys.n() % 2 == 1;
        for p in &es.points {
            let neg: Vec<f64> = p.u.iter().map(|x| -x).collect();
            let q = es.points.iter().find(|q| distance(&q.u, &neg) < 1e-9);
            prop_assert!(q.is_some(), "no antipode for {:?}", p.u);
            let q = q.unwrap();
            prop_assert_eq!(&q.pattern, &p.pattern.negated());
            // log P, S and log μ move by at most 2δΣ1/|a_j| when u moves by δ; the two
            // chambers are solved independently, so allow for their positional mismatch.
            let inv_a: f64 = sys.vectors().iter().map(|v| 1.0 / dot(v, &p.u).abs()).sum();
            let rel = 1e-9 + 4.0 * distance(&q.u, &neg) * inv_a;
            let want_p = if odd { -p.value_p } else { p.value_p };
            prop_assert!((q.value_p - want_p).abs() <= rel * p.value_p.abs());
            prop_assert!((q.value_s - p.value_s).abs() <= rel * p.value_s);
            prop_assert!((q.weight_mu - p.weight_mu).abs() <= rel * p.weight_mu);
        }
    }

    #[test]
    fn chamber_solutions_do_not_depend_on_the_start(d in 2usize..5, extra in 0usize..3, seed in any::<u64>()) {
        let sys = make_random(d, d + extra, seed, 0.1).unwrap();
        let mut rng = SplitMix64::new(seed ^ 0x5eed);
        let x0 = rng.unit_vector(d);
        let pattern = SignPattern::of_point(&sys, &x0).unwrap();
        let reference = solve_chamber(&sys, &pattern, &x0).unwrap();
        let mut found = 0;
        for _ in 0..10_000 {
            if found == 10 {
                break;
            }
            let y: Vec<f64> = (0..d).map(|_| 3.0 * rng.gaussian()).collect();
            if SignPattern::of_point(&sys, &y).as_ref() != Some(&pattern) {
                continue;
            }
            found += 1;
            let p = solve_chamber(&sys, &pattern, &y).unwrap();
            prop_assert!(distance(&p.u, &reference.u) <= 1e-9);
        }
    }

    #[test]
    fn newton_never_increases_psi(d in 2usize..6, extra in 0usize..4, seed in any::<u64>()) {
        let sys = make_random(d, d + extra, seed, 0.05).unwrap();
        let mut rng = SplitMix64::new(seed.wrapping_add(1));
        let x0: Vec<f64> = (0..d).map(|_| 5.0 * rng.gaussian()).collect();
        let pattern = SignPattern::of_point(&sys, &x0).unwrap();
        let trace = newton_trace(&sys, &pattern, &x0).unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1] < w[0] || w[1] - w[0] <= 4.0 * f64::EPSILON * w[0].abs());
        }
    }

    #[test]
    fn basis_enumerations_are_complete_and_certified(n in 2usize..9, seed in any::<u64>()) {
        let sys = make_random(n, n, seed, 0.05).unwrap();
        let es = enumerate_extrema(&sys).unwrap();
        prop_assert_eq!(es.len(), 1usize << n);
        prop_assert!(es.complete);
        prop_assert!(euler_jacobi_theorem_residual(&es).unwrap() <= 1e-8);
        let report = strong_weak_report(&es, &ReportOptions::default()).unwrap();
        prop_assert!(report.strong_holds);
        for p in &report.points {
            prop_assert!(p.eigen_rel <= tolerance_at(&es, &p.u, 1e-9), "eigen {}", p.eigen_rel);
            prop_assert!(p.laplacian_id <= 1e-9, "laplacian {}", p.laplacian_id);
            prop_assert!(p.jacobian_fact.unwrap() <= 1e-9f64.max(p.jacobian_floor.unwrap()));
            prop_assert!(p.amgm <= 1e-9);
        }
    }

    #[test]
    fn generic_enumerations_match_the_region_count(d in 2usize..5, extra in 1usize..6, seed in any::<u64>()) {
        let n = d + extra;
        let sys = make_random(d, n, seed, 0.05).unwrap();
        let es = enumerate_extrema(&sys).unwrap();
        prop_assert_eq!(es.len() as u64, expected_region_count(d, n));
        prop_assert!(euler_jacobi_theorem_residual(&es).unwrap() <= 1e-8);
        let n2 = (n * n) as f64;
        prop_assert!(es.points.iter().any(|p| p.value_s <= n2 * (1.0 + 1e-9)));
    }

    #[test]
    fn general_identity_holds_below_the_critical_degree(n in 2usize..7, seed in any::<u64>(), gseed in any::<u64>()) {
        let sys = make_random(n, n, seed, 0.05).unwrap();
        let w = dual_basis(&sys.to_matrix()).unwrap();
        let es = enumerate_extrema(&sys).unwrap();
        for k in 0..5 {
            let g = random_poly(n, n as u32 - 1, gseed.wrapping_add(k));
            prop_assert!(euler_jacobi_general_residual(&es, &w, &g).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn rotations_carry_extrema_along(d in 2usize..5, extra in 0usize..3, seed in any::<u64>()) {
        let sys = make_random(d, d + extra, seed, 0.1).unwrap();
        let q = random_orthogonal(d, seed ^ 0xabcdef);
        let rotated = sys.map_linear(&q).unwrap();
        let a = enumerate_extrema(&sys).unwrap();
        let b = enumerate_extrema(&rotated).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for p in &a.points {
            let qu = q.mul_vec(&p.u).unwrap();
            let best = b.points.iter().map(|r| distance(&r.u, &qu)).fold(f64::INFINITY, f64::min);
            prop_assert!(best <= 1e-8, "rotated extremum missing by {}", best);
        }
    }

    #[test]
    fn determinant_bound_holds(n in 1usize..9, d in 2usize..7, seed in any::<u64>()) {
        let sys = make_random(d, n, seed, 0.05).unwrap();
        let u = SplitMix64::new(seed.rotate_left(17)).unit_vector(d);
        let (lhs, rhs) = det_lower_bound_check(&sys, &u).unwrap();
        prop_assert!(lhs >= rhs - 1e-12 * rhs, "{} < {}", lhs, rhs);
    }

    #[test]
    fn reflections_are_norm_preserving_involutions(d in 1usize..7, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let v: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
        let u: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
        let once = reflect(&v, &u).unwrap();
        let twice = reflect(&v, &once).unwrap();
        prop_assert!(distance(&twice, &u) <= 1e-12 * (1.0 + norm(&u)));
        prop_assert!((norm(&once) - norm(&u)).abs() <= 1e-12 * (1.0 + norm(&u)));
    }

    #[test]
    fn numerics_round_trips(d in 1usize..8, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let mut m = Matrix::identity(d);
        for _ in 0..d {
            let r: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
            m.add_outer(1.0, &r, &r);
        }
        let b: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
        let x = spd_solve(&m, &b).unwrap();
        let r = m.mul_vec(&x).unwrap();
        prop_assert!(distance(&r, &b) <= 1e-10 * (1.0 + norm(&b)));

        // det(M) · det(M⁻¹) = 1, with M⁻¹ assembled column by column
        let lu = Lu::factor(&m).unwrap();
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                let mut e = vec![0.0; d];
                e[k] = 1.0;
                lu.solve(&e).unwrap()
            })
            .collect();
        let inv = Matrix::from_rows(&cols).unwrap().transpose();
        let prod = lu_determinant(&m).unwrap() * lu_determinant(&inv).unwrap();
        prop_assert!((prod - 1.0).abs() <= 1e-8);

        let sys = make_random(d, d, seed, 0.1).unwrap();
        let w = dual_basis(&sys.to_matrix()).unwrap();
        for j in 0..d {
            for k in 0..d {
                let want = if j == k { 1.0 } else { 0.0 };
                prop_assert!((dot(sys.vector(j), w.row(k)) - want).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn system_json_round_trips(d in 1usize..6, n in 1usize..8, seed in any::<u64>()) {
        let sys = make_random(d.max(2), n, seed, 0.0).unwrap();
        let back = VectorSystem::from_json(&sys.to_json()).unwrap();
        prop_assert_eq!(&back, &sys);
        let es = enumerate_extrema(&make_random(2, n.min(5), seed, 0.1).unwrap()).unwrap();
        prop_assert_eq!(ExtremaSet::from_json(&es.to_json()).unwrap(), es);
    }
}

#[test]
fn sums_of_reflection_systems_stay_reflection_systems() {
    let families = [
        CoxeterSpec::new(CoxeterFamily::I2, 3),
        CoxeterSpec::new(CoxeterFamily::I2, 8),
        CoxeterSpec::new(CoxeterFamily::A3, 0),
        CoxeterSpec::new(CoxeterFamily::B3, 0),
    ];
    for a in &families {
        for b in &families {
            let s = direct_sum(&make_coxeter(a).unwrap(), &make_coxeter(b).unwrap());
            assert!(is_reflection_system(&s, 1e-9), "{a:?} + {b:?}");
        }
    }
}

#[test]
fn perturbed_extrema_converge_to_the_base_extrema() {
    // The rate constant depends on the system, so check shape, not a fixed multiple of t:
    // the worst match distance never grows, and halving t eventually halves it.
    let ts = [0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125, 0.0015625];
    for seed in [11, 2, 3] {
        let base = pad_to(&make_random(3, 5, seed, 0.1).unwrap(), 5).unwrap();
        let es = enumerate_extrema(&base).unwrap();
        let worst: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let pes = enumerate_extrema(&perturb_to_basis(&base, t).unwrap()).unwrap();
                assert_eq!(pes.len(), 32);
                es.points
                    .iter()
                    .map(|p| {
                        pes.points
                            .iter()
                            .map(|q| distance(&p.u, &q.u))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in worst.windows(2) {
            assert!(w[1] < w[0], "seed {seed}: {worst:?}");
        }
        let k = worst.len();
        let (a, b) = (worst[k - 2] / ts[k - 2], worst[k - 1] / ts[k - 1]);
        assert!((b / a - 1.0).abs() < 0.05, "seed {seed}: rate {a} then {b}");
    }
}
