use proptest::prelude::*;
use slelab_core::domain::{build_disk_domain, GridDomain};
use slelab_core::lattice::{Lattice, LatticeWalkSpec, Vertex};
use slelab_core::lerw::{expected_visits_check, loop_erase_seq, LerwSampler};
use slelab_core::rng::RngKey;
use slelab_core::stats::{chi_square_gof, chi_square_independence, Verdict};
use slelab_core::verify::{oracles, Budget};
use slelab_core::walk::{exact_hitting, relative_derivative_at_origin, sample_walk, KilledWalk};

#[test]
fn oracle_suite_small_budget() {
    let r = oracles(Budget::Small, 7).unwrap();
    for e in &r.entries {
        assert_eq!(e.verdict, Verdict::Pass, "{}: {}", e.test, e.estimate);
    }
}

#[test]
fn exit_law_chi_square() {
    let spec = LatticeWalkSpec::simple_square();
    let d = build_disk_domain(5.0, Lattice::Square).unwrap();
    let exact = exact_hitting(&d, Vertex::new(1, 2), &spec).unwrap();
    let mut counts = vec![0u64; exact.len()];
    let mut rng = RngKey::new(3).rng();
    for _ in 0..20_000 {
        let w = sample_walk(&d, Vertex::new(1, 2), &spec, &mut rng).unwrap();
        counts[d.pair_index(w.exit_pair.unwrap()).unwrap()] += 1;
    }
    let t = chi_square_gof(&counts, &exact);
    assert!(t.p_value > 1e-3, "{t:?}");
}

#[test]
fn lazy_walk_has_the_same_exit_law() {
    let d = build_disk_domain(7.0, Lattice::Square).unwrap();
    let a = exact_hitting(&d, Vertex::new(2, -1), &LatticeWalkSpec::simple_square()).unwrap();
    let b = exact_hitting(&d, Vertex::new(2, -1), &LatticeWalkSpec::lazy_square(0.3).unwrap()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn derivative_of_exit_law_is_order_one_over_r() {
    // r |H(e, y) - H(0, y)| / H(0, y) stays bounded as the disk grows.
    let spec = LatticeWalkSpec::simple_square();
    let a = relative_derivative_at_origin(&spec, 20.0).unwrap();
    let b = relative_derivative_at_origin(&spec, 40.0).unwrap();
    assert!(a < 5.0 && b < 5.0, "{a} {b}");
    assert!((b / a - 1.0).abs() < 0.3, "{a} {b}");
}

#[test]
fn expected_visits_before_first_segment() {
    let spec = LatticeWalkSpec::simple_square();
    let d = build_disk_domain(3.0, Lattice::Square).unwrap();
    let bp = d.boundary_pairs()[0];
    let mut rng = RngKey::new(5).rng();
    let r = expected_visits_check(&d, &spec, bp.outer, bp.inner, Vertex::new(0, 1), 400_000, &mut rng).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
}

#[test]
fn reversed_erasure_has_the_law_of_the_forward_erasure() {
    // For a reversible walk, erasing the reversed walk gives the same path
    // law as erasing forward (both read from the origin to the exit).
    let spec = LatticeWalkSpec::simple_square();
    let d = build_disk_domain(15.0, Lattice::Square).unwrap();
    let mut rng = RngKey::new(8).rng();
    let bins = [0usize, 20, 30, 40, 55, 75, usize::MAX];
    let bin = |n: usize| bins.windows(2).position(|w| n >= w[0] && n < w[1]).unwrap();
    let mut table = vec![vec![0u64; bins.len() - 1]; 2];
    for _ in 0..4000 {
        let w = sample_walk(&d, Vertex::ORIGIN, &spec, &mut rng).unwrap();
        table[0][bin(loop_erase_seq(&w.vertices).len())] += 1;
        let w = sample_walk(&d, Vertex::ORIGIN, &spec, &mut rng).unwrap();
        let rev: Vec<Vertex> = w.vertices.iter().rev().copied().collect();
        table[1][bin(loop_erase_seq(&rev).len())] += 1;
    }
    let t = chi_square_independence(&table);
    assert!(t.p_value > 1e-3, "{t:?} {table:?}");
}

#[test]
fn reversed_sampler_is_a_simple_path_to_the_origin() {
    let d = build_disk_domain(20.0, Lattice::Square).unwrap();
    let mut s = LerwSampler::new(&d, &LatticeWalkSpec::simple_square()).unwrap();
    let mut rng = RngKey::new(1).rng();
    for _ in 0..50 {
        let p = s.sample_reversed(&mut rng).unwrap();
        assert!(!d.contains(p[0]));
        assert_eq!(*p.last().unwrap(), Vertex::ORIGIN);
        let set: std::collections::HashSet<_> = p.iter().collect();
        assert_eq!(set.len(), p.len());
        assert!(p.windows(2).all(|w| Lattice::Square.is_neighbor_offset(w[1] - w[0])));
        assert!(p[1..].iter().all(|&v| d.contains(v)));
    }
}

fn blob(bits: u64) -> Vec<Vertex> {
    let mut v = vec![Vertex::ORIGIN];
    for k in 0..24 {
        if bits >> k & 1 == 1 {
            let (x, y) = ((k % 5) as i32 - 2, (k / 5) as i32 - 2);
            v.push(Vertex::new(x, y));
        }
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exit_rows_sum_to_one_on_random_domains(bits in any::<u64>()) {
        let d = match GridDomain::from_vertices(Lattice::Square, blob(bits)) {
            Ok(d) => d,
            Err(_) => return Ok(()),
        };
        let spec = LatticeWalkSpec::simple_square();
        let mut kw = KilledWalk::new(&d, &spec).unwrap();
        for &v in d.interior() {
            let row = kw.exit_distribution(v).unwrap();
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(row.iter().all(|&p| p >= -1e-15));
        }
        // Green's function of a symmetric walk is symmetric.
        let a = d.interior()[0];
        let b = *d.interior().last().unwrap();
        let gab = kw.green_column(b).unwrap()[d.index_of(a).unwrap()];
        let gba = kw.green_column(a).unwrap()[d.index_of(b).unwrap()];
        prop_assert!((gab - gba).abs() < 1e-12);
    }

    #[test]
    fn loop_erasure_is_a_simple_subsequence(seq in proptest::collection::vec(0u8..6, 1..60)) {
        let le = loop_erase_seq(&seq);
        prop_assert_eq!(le[0], seq[0]);
        prop_assert_eq!(le.last(), seq.last());
        let set: std::collections::HashSet<_> = le.iter().collect();
        prop_assert_eq!(set.len(), le.len());
        let mut it = seq.iter();
        prop_assert!(le.iter().all(|x| it.any(|y| y == x)));
        prop_assert_eq!(loop_erase_seq(&le), le);
    }
}
