use proptest::prelude::*;
use reskit::geometry::{
    boundary_points, chebyshev_nodes, interior_points, BoundaryFamily, NodeFamily, PointTag,
};
use reskit::stability::lebesgue_constant;
use reskit::{Domain, Point2, PointSet};

fn domain_strategy() -> impl Strategy<Value = Domain> {
    prop_oneof![
        Just(Domain::unit_disk()),
        (-2.0..0.0f64, -2.0..0.0f64, 0.2..2.0f64, 0.2..2.0f64)
            .prop_map(|(ax, ay, w, h)| Domain::rectangle(ax, ay, ax + w, ay + h).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn boundary_points_lie_on_the_boundary(d in domain_strategy(), n in 4usize..200) {
        let pts = boundary_points(&d, n, BoundaryFamily::Equidistant).unwrap();
        prop_assert_eq!(pts.len(), n);
        for p in pts.points() {
            prop_assert!(d.boundary_distance(p) < 1e-12);
        }
    }

    #[test]
    fn interior_points_are_inside(d in domain_strategy(), n in 1usize..300) {
        let pts = interior_points(&d, n).unwrap();
        prop_assert!(!pts.is_empty());
        for p in pts.points() {
            prop_assert!(d.contains(p));
        }
        // Deterministic generation.
        let again = interior_points(&d, n).unwrap();
        prop_assert_eq!(pts.points(), again.points());
    }

    #[test]
    fn fill_distance_shrinks_with_more_points(
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..40),
        extra in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..20),
    ) {
        let to_pts = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Point2::new(x, y).unwrap()).collect::<Vec<_>>();
        let base = PointSet::new(to_pts(&raw), PointTag::Interior, NodeFamily::Custom).unwrap();
        let mut all = to_pts(&raw);
        all.extend(to_pts(&extra));
        let more = PointSet::new(all, PointTag::Interior, NodeFamily::Custom).unwrap();
        let d = Domain::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap();
        let reference = interior_points(&d, 400).unwrap();
        let h0 = reskit::geometry::fill_distance(&base, &reference).unwrap();
        let h1 = reskit::geometry::fill_distance(&more, &reference).unwrap();
        prop_assert!(h1 <= h0 + 1e-15);
    }

    #[test]
    fn lebesgue_constant_is_at_least_one(n in 1usize..25) {
        let nodes = chebyshev_nodes(n).unwrap();
        prop_assert!(nodes.iter().all(|x| (-1.0..=1.0).contains(x)));
        let fine = reskit::geometry::equidistant_nodes(801).unwrap();
        let l = lebesgue_constant(&nodes, &fine).unwrap();
        prop_assert!(l >= 1.0 - 1e-12);
        // Chebyshev growth is logarithmic.
        prop_assert!(l <= 1.0 + 2.0 / std::f64::consts::PI * (n as f64 + 1.0).ln());
    }
}
