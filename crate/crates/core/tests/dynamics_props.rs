use gbd_kit::dynamics::{
    minimality_certificate, orbit_visits_cylinder, tail_equivalent, trace_trisection, transitivity_probe,
    PathGenerator,
};
use gbd_kit::paths::FinitePath;
use gbd_kit::probes::Verdict;
use gbd_kit::reenumerate::compact_cylinder_check;
use gbd_kit::relabel::{relabel, ShiftRule, VertexBijectionSeq};
use gbd_kit::{catalog, DiagonalRule, DiagramHandle, Interval, LevelRule};
use proptest::prelude::*;

fn map_prefix(c: &FinitePath, g: &VertexBijectionSeq) -> FinitePath {
    let vs: Vec<i64> = c.vertices().iter().enumerate().map(|(n, v)| g.forward(n, *v).unwrap()).collect();
    FinitePath::through(0, &vs).unwrap()
}

fn odometer() -> DiagramHandle {
    catalog::odometer_two_sided(DiagonalRule::Constant(2)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orbit_verdicts_are_relabel_equivariant(
        gi in 0usize..4, start in -3i64..=3, tail in 0usize..3, end in -4i64..=4, extra in 0usize..3,
    ) {
        let d = odometer();
        let g = [
            VertexBijectionSeq::interleave(),
            VertexBijectionSeq::level_shift(1),
            VertexBijectionSeq::shift(ShiftRule::Constant(-2)),
            VertexBijectionSeq::cone_shift(LevelRule::Constant(1)),
        ][gi].clone();
        let x = [PathGenerator::vertical_from(start), PathGenerator::leftmost_slant_from(start),
                 PathGenerator::alternating_from(start)][tail].clone();
        let mut verts = vec![end];
        for _ in 0..extra {
            verts.push(*verts.last().unwrap());
        }
        let c = FinitePath::through(0, &verts).unwrap();
        let dp = relabel(&d, &g).unwrap();
        let a = orbit_visits_cylinder(&d, &x, &c, 16).unwrap();
        let b = orbit_visits_cylinder(&dp, &x.mapped(&g), &map_prefix(&c, &g), 16).unwrap();
        prop_assert_eq!(a.label(), b.label());
        if let Verdict::Yes(hit) = b {
            prop_assert!(hit.path.validate(&dp).is_ok());
            let t = x.mapped(&g).trace(&dp, hit.m + 1).unwrap();
            prop_assert_eq!(hit.path.end(), t[hit.m]);
        }
    }

    #[test]
    fn orbit_witnesses_extend_the_cylinder(start in 1i64..8, verts in proptest::collection::vec(1i64..10, 1..4)) {
        let d = catalog::renewal_shift();
        let Ok(c) = FinitePath::through(0, &verts) else { return Ok(()) };
        prop_assume!(c.validate(&d).is_ok());
        let x = PathGenerator::leftmost_slant_from(start);
        let Verdict::Yes(hit) = orbit_visits_cylinder(&d, &x, &c, 24).unwrap() else {
            return Err(TestCaseError::fail("renewal orbit missed a cylinder"));
        };
        prop_assert!(hit.path.validate(&d).is_ok());
        prop_assert_eq!(&hit.path.edges[..c.len()], &c.edges[..]);
        // the witness followed by the tail of x is tail equivalent to x
        let t = x.trace(&d, hit.m + 1).unwrap();
        prop_assert_eq!(hit.path.end(), t[hit.m]);
        let mut vs = hit.path.vertices();
        vs.pop();
        let y = PathGenerator::table_then_rule(&[vs, vec![t[hit.m]]].concat(), gbd_kit::dynamics::TailRule::LeftmostSlant).unwrap();
        prop_assert!(tail_equivalent(&d, &x, &y, 64).unwrap().is_yes());
    }
}

#[test]
fn renewal_minimality_implies_dense_orbits() {
    let d = catalog::renewal_shift();
    assert!(minimality_certificate(&d, 64, Interval::new(1, 12)).unwrap().is_yes());
    let gens = [
        PathGenerator::vertical_from(1),
        PathGenerator::climbing(1),
        PathGenerator::leftmost_slant_from(6),
        PathGenerator::eventually_vertical(&[4, 3, 2], 1),
    ];
    for x in gens {
        let t = transitivity_probe(&d, &x, 3, Interval::new(1, 8), 24).unwrap();
        assert!(t.is_yes(), "{x}: {}", t.label());
    }
}

#[test]
fn renewal_cylinders_through_one_are_not_compact() {
    let d = catalog::renewal_shift();
    for verts in [vec![1], vec![2, 1], vec![1, 5, 4], vec![3, 2, 1, 1]] {
        let c = FinitePath::through(0, &verts).unwrap();
        assert!(compact_cylinder_check(&d, &c, 32).unwrap().is_no());
    }
}

#[test]
fn star_orbit_closures_separate() {
    let d = catalog::star_odometer();
    for i in 2..=10 {
        for j in 1..=10 {
            let v = orbit_visits_cylinder(&d, &PathGenerator::vertical_from(i), &FinitePath::empty(0, j), 24).unwrap();
            assert_eq!(v.is_yes(), j == 1 || j == i, "x^{i} vs {j}");
            assert!(!v.is_unknown());
        }
    }
}

#[test]
fn minimality_obstructions() {
    let t = minimality_certificate(&catalog::tridiag_b(), 64, Interval::new(-4, 4)).unwrap();
    assert!(t.is_no(), "{t:?}");
    let s = minimality_certificate(&catalog::star_odometer(), 64, Interval::new(1, 9)).unwrap();
    assert!(s.is_no(), "{s:?}");
}

#[test]
fn trisections() {
    let d = odometer();
    let parts = trace_trisection(&d, &PathGenerator::leftmost_slant_from(0), 5, Interval::new(-8, 8)).unwrap();
    for (n, (on, left, right)) in parts.iter().enumerate() {
        assert_eq!(on, &vec![-(n as i64)]);
        assert_eq!(on.len() + left.len() + right.len(), 17);
    }
    let parts = trace_trisection(&d, &PathGenerator::vertical_from(5), 3, Interval::new(0, 9)).unwrap();
    assert!(parts.iter().all(|(on, left, _)| on == &vec![5] && left == &(0..5).collect::<Vec<_>>()));
}
