use motion_lds::discrepancy::{
    arc_discrepancy_estimate, arc_discrepancy_exact, box_discrepancy_estimate,
    box_discrepancy_exact, deviation, CombRect,
};
use motion_lds::motion::{local_cartesian_product, Fibration};
use motion_lds::product::cartesian_fraction_gap;
use motion_lds::sphere::{lambert, lambert_inverse};
use motion_lds::unitcube::{circle_points, halton_kd};
use motion_lds::{AngleInterval, PointSet, Provenance, Space};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_size_law(a in 1usize..40, b in 1usize..40) {
        let q = circle_points(a, AngleInterval::FULL_CIRCLE).unwrap();
        let r = halton_kd(b, 2).unwrap();
        let p = local_cartesian_product(&q, &r, &Fibration::trivial(Space::Circle, Space::Cube(2))).unwrap();
        prop_assert_eq!(p.len(), a * b);
        for (i, (f, x)) in p.iter().enumerate() {
            prop_assert_eq!(*f, q.points()[i % a]);
            prop_assert_eq!(x, &r.points()[i / a]);
        }
    }

    #[test]
    fn lambert_is_unit_and_invertible(x in 0.0f64..1.0, y in 1e-6f64..(1.0 - 1e-6)) {
        let p = lambert(x, y).unwrap();
        prop_assert!((p.norm() - 1.0).abs() < 1e-12);
        let [u, v] = lambert_inverse(&p);
        prop_assert!((v - y).abs() < 1e-9);
        let du = (u - x).abs();
        prop_assert!(du.min(1.0 - du) < 1e-9);
    }

    #[test]
    fn circle_points_meet_the_arc_rate(n in 1usize..300) {
        let s = circle_points(n, AngleInterval::FULL_CIRCLE).unwrap();
        prop_assert!(arc_discrepancy_exact(&s).unwrap().value <= 1.0 / n as f64 + 1e-12);
    }

    #[test]
    fn estimates_never_exceed_exact(angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 1..64),
                                    coords in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..48),
                                    seed in any::<u64>()) {
        let circle = PointSet::new(angles, Space::Circle, Provenance::default());
        let exact = arc_discrepancy_exact(&circle).unwrap();
        let est = arc_discrepancy_estimate(&circle, 200, seed).unwrap();
        prop_assert!((0.0..=1.0).contains(&exact.value));
        prop_assert!(est.value <= exact.value + 1e-12);
        let pts: Vec<[f64; 2]> = coords.into_iter().map(|(a, b)| [a, b]).collect();
        let exact = box_discrepancy_exact(&pts, false).unwrap();
        let est = box_discrepancy_estimate(&pts, false, 200, seed).unwrap();
        prop_assert!(est.value <= exact.value + 1e-12);
        prop_assert_eq!(est, box_discrepancy_estimate(&pts, false, 200, seed).unwrap());
    }

    #[test]
    fn full_rectangle_has_zero_deviation(m in 1u32..10, pts in prop::collection::vec(prop::collection::vec(0u32..1000, 3), 1..30)) {
        let pts: Vec<Vec<u32>> = pts.into_iter().map(|p| p.into_iter().map(|a| a % m).collect()).collect();
        let full = CombRect { m, sets: vec![(0..m).collect(); 3] };
        prop_assert_eq!(deviation(&full, &pts), 0.0);
    }

    #[test]
    fn product_fraction_gap(pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..=8)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let sum: f64 = pairs.iter().map(|(x, y)| (x - y).abs()).sum();
        prop_assert!(cartesian_fraction_gap(&a, &b) <= sum + 1e-12);
    }
}
