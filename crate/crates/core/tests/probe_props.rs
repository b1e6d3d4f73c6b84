use gbd_kit::paths::{count_paths, enumerate_paths};
use gbd_kit::probes::{
    classify_irreducibility_type, cone_bound, invariant_certificate, irreducible_probe, period_of_index,
    reducibility_certificate, IrreducibilityClass, Verdict, ALL_TAGS,
};
use gbd_kit::{catalog, DiagramHandle, Interval, LevelWindow};
use proptest::prelude::*;

fn diagram() -> impl Strategy<Value = DiagramHandle> {
    let all = catalog::all_default();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn verdicts_are_sound(d in diagram(), a in 0i64..13, b in 0i64..13) {
        let win = d.indexing().centered(6);
        let (i, j) = (win.lo + a, win.lo + b);
        match irreducible_probe(&d, i, j, 0, 6).unwrap() {
            Verdict::Yes(p) => {
                prop_assert!(p.validate(&d).is_ok());
                prop_assert_eq!((p.start, p.end()), (i, j));
            }
            Verdict::No(inv) => {
                prop_assert!(inv.is_global());
                for m in 1..=6 {
                    let (paths, _) = enumerate_paths(&d, i, 0, j, m, Some(1)).unwrap();
                    prop_assert!(paths.is_empty(), "{} claims no path but one exists at level {}", inv, m);
                }
            }
            Verdict::Unknown(_) => {}
        }
    }
}

#[test]
fn cones_contain_reach_and_are_tight_for_tridiag() {
    for d in catalog::all_default().into_iter().filter(|d| gbd_kit::probes::t_rule(d).is_some()) {
        for v in -6..=6 {
            for n in 0..3 {
                for m in n..=n + 6 {
                    let c = cone_bound(&d, v, n, m).unwrap();
                    assert!(c.reach.iter().all(|x| c.interval.contains(*x)));
                    if d.name() == "tridiag_B" {
                        assert_eq!(c.reach.len(), c.interval.len());
                    }
                }
            }
        }
    }
}

#[test]
fn return_lengths_are_multiples_of_the_period() {
    for d in catalog::all_default().into_iter().filter(|d| d.is_stationary()) {
        for v in d.window_vertices(0, d.indexing().centered(3)) {
            let p = period_of_index(&d, v, 10).unwrap();
            if let Some(g) = p.gcd {
                assert!(p.returns.iter().all(|m| (*m as u64).is_multiple_of(g)));
                assert!(p.returns.iter().all(|m| count_paths(&d, v, 0, v, *m).unwrap() > 0u32.into()));
            }
        }
    }
}

#[test]
fn complete_irreducibility_excludes_invariants() {
    for d in catalog::all_default() {
        let win = d.indexing().clip(d.indexing().centered(8));
        let class = classify_irreducibility_type(&d, 64, win).unwrap();
        let lw = LevelWindow::uniform(d.indexing(), 4, win).unwrap();
        let reducing = reducibility_certificate(&d, &lw).unwrap();
        if matches!(class, IrreducibilityClass::CertifiedCompletelyIrreducible(_)) {
            assert!(reducing.is_none(), "{}", d.name());
        }
    }
}

#[test]
fn certificates_hold_on_wider_windows() {
    // a certificate found on a small window must also hold on a larger one
    for d in catalog::all_default() {
        let small = LevelWindow::centered(d.indexing(), 3, 6);
        let large = LevelWindow::centered(d.indexing(), 6, 20);
        let found = invariant_certificate(&d, &small, &ALL_TAGS).unwrap();
        let wide = invariant_certificate(&d, &large, &ALL_TAGS).unwrap();
        for inv in found.iter().filter(|i| i.is_global()) {
            assert!(wide.iter().any(|w| w.kind == inv.kind), "{} {} fails on the wide window", d.name(), inv);
        }
    }
}

#[test]
fn spec_examples() {
    let r = catalog::renewal_shift();
    let p = irreducible_probe(&r, 5, 2, 0, 24).unwrap();
    assert!(p.is_yes());
    let s = catalog::shifted_bsecond();
    assert!(irreducible_probe(&s, 3, 1, 0, 24).unwrap().is_no());
    let t = catalog::tridiag_b();
    assert!(irreducible_probe(&t, 0, 9, 0, 24).unwrap().is_yes());
    assert!(gbd_kit::probes::connected_probe(&t, 3, Interval::new(-5, 5)).unwrap().is_yes());
    let star = catalog::star_odometer();
    let v = irreducible_probe(&star, 3, 2, 0, 24).unwrap();
    assert!(v.is_no(), "{v:?}");
}
