use num_complex::Complex64;
use proptest::prelude::*;
use slelab_core::domain::build_disk_domain;
use slelab_core::harmonic::{
    harmonic_conjugate, hitting_vs_lambda, pair_near_angle, solve_mixed, three_arc_value, EdgeClass, MixedBoundaryProblem,
    CR_TOLERANCE,
};
use slelab_core::lattice::{Lattice, LatticeWalkSpec, Vertex};
use slelab_core::stats::Verdict;
use slelab_core::verify::{harmonic, potential, Budget};

#[test]
fn harmonic_suite_small_budget() {
    let r = harmonic(Budget::Small).unwrap();
    assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");
}

#[test]
fn potential_suite_small_budget() {
    let r = potential(Budget::Small).unwrap();
    assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");
}

#[test]
fn rectangle_solution_is_monotone_and_bounded() {
    let p = MixedBoundaryProblem::rectangle(12, 7).unwrap();
    let s = solve_mixed(&p).unwrap();
    for y in 0..7 {
        let row: Vec<f64> = (0..12).map(|x| s.at(&p, Vertex::new(x, y)).unwrap()).collect();
        assert!(row.windows(2).all(|w| w[1] > w[0]), "{row:?}");
        assert!(row.iter().all(|&v| v > 0.0 && v < 1.0));
    }
}

#[test]
fn deviation_shrinks_with_radius() {
    let spec = LatticeWalkSpec::simple_square();
    let worst = |r: f64| {
        let d = build_disk_domain(r, Lattice::Square).unwrap();
        let u = pair_near_angle(&d, 1.0);
        let pts = [Vertex::new((0.3 * r) as i32, 0), Vertex::new(0, (-0.4 * r) as i32)];
        hitting_vs_lambda(&d, r, &spec, &pts, u).unwrap().iter().map(|x| x.deviation).fold(0.0, f64::max)
    };
    let (a, b) = (worst(30.0), worst(60.0));
    assert!(b < a, "{a} {b}");
}

#[test]
fn three_arc_values_converge() {
    let exact = MixedBoundaryProblem::three_arc_continuum(1.2, 2.5).unwrap();
    let err = |r: f64| {
        let p = MixedBoundaryProblem::three_arc_disk(r, 1.2, 2.5).unwrap();
        (solve_mixed(&p).unwrap().at(&p, Vertex::ORIGIN).unwrap() - exact).abs()
    };
    assert!(err(40.0) < 0.05);
    // The value at the centre only depends on the arcs up to rotation.
    let z = |t: f64| Complex64::from_polar(1.0, t);
    for a in [0.4, 2.0, 5.0] {
        let v = three_arc_value(z(a), z(a + 1.2), z(a + 2.5), Complex64::new(0.0, 0.0)).unwrap();
        assert!((v - exact).abs() < 1e-9, "{v} {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maximum_principle_and_cauchy_riemann(m in 2i32..9, n in 2i32..9, a in 0i32..8, b in 0i32..8) {
        // Box with Dirichlet 0 on the left side, 1 on rows lo..=hi of the
        // right side and reflecting elsewhere.
        let verts: Vec<Vertex> = (0..n).flat_map(|y| (0..m).map(move |x| Vertex::new(x, y))).collect();
        let d = slelab_core::domain::GridDomain::from_vertices(Lattice::Square, verts).unwrap();
        let lo = a % n;
        let hi = lo + b % (n - lo);
        let p = MixedBoundaryProblem::classify(&d, |bp| {
            if bp.outer.x < 0 {
                EdgeClass::Zero
            } else if bp.outer.x >= m && (lo..=hi).contains(&bp.inner.y) {
                EdgeClass::One
            } else {
                EdgeClass::Neumann
            }
        });
        let p = p.unwrap();
        let s = solve_mixed(&p).unwrap();
        prop_assert!(s.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let c = harmonic_conjugate(&p, &s).unwrap();
        prop_assert!(c.residual < CR_TOLERANCE);
        prop_assert!(c.l > 0.0);
    }
}
