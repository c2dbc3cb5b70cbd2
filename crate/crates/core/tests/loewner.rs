use num_complex::Complex64;
use proptest::prelude::*;
use slelab_core::loewner::{brownian_record, chordal_slit_step, extract_driving, radial_slit_step, Mode, ZipperOptions};
use slelab_core::rng::RngKey;
use slelab_core::stats::Verdict;
use slelab_core::verify::{loewner, Budget};

#[test]
fn loewner_suite_small_budget() {
    let r = loewner(Budget::Small, 4).unwrap();
    assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");
}

#[test]
fn radial_roundtrip() {
    let mut rng = RngKey::new(9).rng();
    let rec = brownian_record(2.0, Mode::Radial, 0.5, 0.005, &mut rng).unwrap();
    let tips = rec.chain().unwrap().tips();
    let mut curve = vec![Complex64::new(1.0, 0.0)];
    curve.extend(tips);
    let (back, _) = extract_driving(&curve, Mode::Radial, ZipperOptions::default()).unwrap();
    assert_eq!(back.times.len(), rec.times.len());
    for k in 0..rec.times.len() {
        assert!((back.times[k] - rec.times[k]).abs() < 1e-8);
        let d = (back.values[k] - rec.values[k]).rem_euclid(2.0 * std::f64::consts::PI);
        assert!(d.min(2.0 * std::f64::consts::PI - d) < 1e-8, "{k}: {} {}", back.values[k], rec.values[k]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chordal_slit_maps_upper_half_plane_into_itself(w in -3.0f64..3.0, dt in 1e-4f64..2.0, x in -10.0f64..10.0, y in 1e-3f64..10.0) {
        let m = chordal_slit_step(w, dt).unwrap();
        let z = Complex64::new(x, y);
        let g = m.apply(z);
        prop_assert!(g.im > 0.0);
        prop_assert!((m.inverse(g) - z).norm() < 1e-8 * (1.0 + z.norm()));
    }

    #[test]
    fn radial_slit_maps_disk_into_itself(th in -3.1f64..3.1, dt in 1e-4f64..1.0, r in 0.0f64..0.999, a in -3.1f64..3.1) {
        let m = radial_slit_step(th, dt).unwrap();
        let z = Complex64::from_polar(r, a);
        let g = m.apply(z);
        prop_assert!(g.norm() < 1.0);
        prop_assert!((m.inverse(g) - z).norm() < 1e-8);
        // The map fixes the origin with derivative e^{dt}.
        let eps = 1e-6;
        let d = m.apply(Complex64::new(eps, 0.0)) / eps;
        prop_assert!((d.norm() / dt.exp() - 1.0).abs() < 1e-4);
    }
}
