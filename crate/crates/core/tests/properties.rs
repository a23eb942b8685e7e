
use oracles::{overlaps, random_convex};
use polyvo::cones::{build_rvo, build_vo, cone_directions_circular, cone_directions_polytopic, ConeDirections};
use polyvo::geometry::{inflate, intersects, min_distance, point_segment_distance};
use polyvo::{Polygon, Vec2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn polygon(seed: u64, center: (f64, f64)) -> Polygon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_convex(&mut rng, Vec2::new(center.0, center.1), 0.8)
}

fn vec2() -> impl Strategy<Value = Vec2<f64>> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

/// Robot near the origin and a disjoint obstacle further out.
fn disjoint_pair() -> impl Strategy<Value = (Polygon, Polygon)> {
    (any::<u64>(), any::<u64>(), 0.0..std::f64::consts::TAU, 2.0..4.0f64).prop_filter_map(
        "shapes overlap",
        |(sa, sb, angle, dist)| {
            let a = polygon(sa, (0.0, 0.0));
            let b = polygon(sb, (dist * angle.cos(), dist * angle.sin()));
            (min_distance(&a, &b) > 1e-3).then_some((a, b))
        },
    )
}

fn close(a: Vec2<f64>, b: Vec2<f64>) -> bool {
    a.distance(b) < 1e-9
}

fn same_dirs(a: ConeDirections<f64>, b: ConeDirections<f64>) -> bool {
    match (a, b) {
        (ConeDirections::Bounded { left: l1, right: r1 }, ConeDirections::Bounded { left: l2, right: r2 }) => {
            close(l1, l2) && close(r1, r2)
        }
        (ConeDirections::FullPlane, ConeDirections::FullPlane) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cone_is_translation_invariant((a, b) in disjoint_pair(), shift in vec2()) {
        let moved = cone_directions_polytopic(&a.translated(shift), &b.translated(shift));
        prop_assert!(same_dirs(cone_directions_polytopic(&a, &b), moved));
    }

    #[test]
    fn swapping_roles_mirrors_the_cone((a, b) in disjoint_pair()) {
        let forward = cone_directions_polytopic(&a, &b);
        let backward = cone_directions_polytopic(&b, &a);
        match (forward, backward) {
            (ConeDirections::Bounded { left, right }, ConeDirections::Bounded { left: l2, right: r2 }) => {
                prop_assert!(close(l2, -left) && close(r2, -right));
            }
            _ => prop_assert!(false, "disjoint pair gave a full-plane cone"),
        }
    }

    #[test]
    fn circular_cone_contains_polytopic((a, b) in disjoint_pair(), v in vec2()) {
        let poly = build_vo(cone_directions_polytopic(&a, &b), Vec2::zero());
        let disc = build_vo(
            cone_directions_circular(a.centroid(), a.circumradius(), b.centroid(), b.circumradius()),
            Vec2::zero(),
        );
        prop_assert!(!poly.contains(v) || disc.contains(v));
    }

    #[test]
    fn rvo_is_reciprocal((a, b) in disjoint_pair(), va in vec2(), vb in vec2(), v in vec2()) {
        let mine = build_rvo(cone_directions_polytopic(&a, &b), va, vb);
        let theirs = build_rvo(cone_directions_polytopic(&b, &a), vb, va);
        let mirrored = va + vb - v;
        let margin = |c: &polyvo::Cone, w: Vec2<f64>| {
            let d = w - c.apex;
            c.right.cross(d).abs().min(c.left.cross(d).abs())
        };
        if margin(&mine, v) > 1e-9 {
            prop_assert_eq!(mine.contains(v), theirs.contains(mirrored));
        }
    }

    #[test]
    fn vo_apex_shift_is_a_translation((a, b) in disjoint_pair(), vo in vec2(), v in vec2()) {
        let dirs = cone_directions_polytopic(&a, &b);
        prop_assert_eq!(build_vo(dirs, vo).contains(v + vo), build_vo(dirs, Vec2::zero()).contains(v));
    }

    #[test]
    fn distance_is_symmetric_and_translation_invariant(sa in any::<u64>(), sb in any::<u64>(), at in vec2(), shift in vec2()) {
        let a = polygon(sa, (0.0, 0.0));
        let b = polygon(sb, (at.x, at.y));
        let d = min_distance(&a, &b);
        prop_assert!(d >= 0.0);
        prop_assert!((d - min_distance(&b, &a)).abs() < 1e-12);
        prop_assert!((d - min_distance(&a.translated(shift), &b.translated(shift))).abs() < 1e-9);
        prop_assert_eq!(d == 0.0, intersects(&a, &b));
        prop_assert_eq!(intersects(&a, &b), overlaps(&a, &b));
    }

    #[test]
    fn inflation_offsets_every_edge(seed in any::<u64>(), margin in 0.01..0.5f64) {
        let p = polygon(seed, (0.0, 0.0));
        let q = inflate(&p, margin);
        prop_assert_eq!(q.len(), p.len());
        prop_assert!(q.area() > p.area());
        for &v in p.vertices() {
            prop_assert!(q.contains_point(v, 0.0));
        }
        for &v in q.vertices() {
            let gap = p.edges().map(|(a, b)| point_segment_distance(v, a, b)).fold(f64::INFINITY, f64::min);
            prop_assert!(gap >= margin - 1e-9);
        }
        let inner: Vec<_> = p.edges().collect();
        for (i, (a, b)) in q.edges().enumerate() {
            let (pa, pb) = inner[i];
            let normal = (pb - pa).perp() / (pb - pa).norm();
            prop_assert!((normal.dot(a - pa) + margin).abs() < 1e-9);
            prop_assert!((normal.dot(b - pa) + margin).abs() < 1e-9);
        }
    }

    #[test]
    fn inflated_shapes_are_margin_apart_when_disjoint((a, b) in disjoint_pair(), margin in 0.01..0.3f64) {
        let d = min_distance(&a, &b);
        let di = min_distance(&inflate(&a, margin), &inflate(&b, margin));
        prop_assert!(di <= (d - 2.0 * margin).max(0.0) + 1e-9);
    }
}
