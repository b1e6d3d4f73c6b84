use std::collections::BTreeMap;

use gbd_kit::paths::count_paths;
use gbd_kit::relabel::{
    builtin_bijection, iso_search, relabel, verify_permutation_identity, IsoSearchResult, ShiftRule,
    VertexBijectionSeq,
};
use gbd_kit::{catalog, DiagramHandle, Interval, LevelRule, VertexIndexing};
use proptest::prelude::*;

fn two_sided() -> Vec<DiagramHandle> {
    catalog::all_default().into_iter().filter(|d| d.indexing() == VertexIndexing::TwoSided).collect()
}

fn bijections_for(d: &DiagramHandle) -> Vec<VertexBijectionSeq> {
    match d.indexing() {
        VertexIndexing::TwoSided => vec![
            VertexBijectionSeq::identity(VertexIndexing::TwoSided),
            VertexBijectionSeq::interleave(),
            VertexBijectionSeq::shift(ShiftRule::Constant(3)),
            VertexBijectionSeq::level_shift(-1),
            VertexBijectionSeq::cone_shift(LevelRule::Constant(2)),
            VertexBijectionSeq::shift(ShiftRule::Explicit(vec![0, 4, -2, 7])),
        ],
        idx => {
            let swap = builtin_bijection(
                "swap",
                &serde_json::json!({"level": 1, "a": idx.base().unwrap(), "b": idx.base().unwrap() + 3,
                                    "indexing": {"mode": "one_sided", "base": idx.base().unwrap()}}),
            )
            .unwrap();
            let pins = vec![BTreeMap::new(), BTreeMap::from([(idx.base().unwrap() + 2, 0)])];
            vec![
                VertexBijectionSeq::identity(idx),
                swap,
                VertexBijectionSeq::table_fill(idx, VertexIndexing::OneSidedFrom(0), pins).unwrap(),
            ]
        }
    }
}

#[test]
fn round_trip_is_identity() {
    for d in catalog::all_default() {
        for g in bijections_for(&d) {
            let back = relabel(&relabel(&d, &g).unwrap(), &g.inverse_seq()).unwrap();
            let win = d.indexing().centered(12);
            for n in 0..=6 {
                assert_eq!(
                    back.incidence_window(n, win, win).unwrap(),
                    d.incidence_window(n, win, win).unwrap(),
                    "{} under {g} at level {n}",
                    d.name()
                );
            }
        }
    }
}

#[test]
fn relabeling_satisfies_permutation_identity() {
    for d in catalog::all_default() {
        for g in bijections_for(&d) {
            let dp = relabel(&d, &g).unwrap();
            let rows = dp.indexing().clip(Interval::new(-6, 6));
            let cols = dp.indexing().clip(Interval::new(-60, 60));
            let ok = verify_permutation_identity(&d, &dp, &g, 4, rows, cols).unwrap();
            assert!(ok, "{} under {g}", d.name());
        }
    }
}

#[test]
fn iso_witnesses_verify() {
    let a = catalog::tridiag_b();
    let b = catalog::interleaved_bprime();
    let r = iso_search(&a, &b, 3, Interval::new(-6, 6), Interval::new(0, 12), 200_000).unwrap();
    let IsoSearchResult::Witness(w) = r else { panic!("no witness: {r:?}") };
    assert!(w.recheck(&a, &b).unwrap().is_some());
    let g = w.bijection(a.indexing(), b.indexing()).unwrap();
    assert!(verify_permutation_identity(&a, &b, &g, 2, Interval::new(0, 4), Interval::new(0, 40)).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn relabeling_preserves_path_counts(
        di in 0usize..8, gi in 0usize..6, w in -6i64..=6, v in -6i64..=6, n in 0usize..3, len in 0usize..5,
    ) {
        let ds = two_sided();
        let d = &ds[di % ds.len()];
        let gs = bijections_for(d);
        let g = &gs[gi % gs.len()];
        let dp = relabel(d, g).unwrap();
        let m = n + len;
        let a = count_paths(d, w, n, v, m).unwrap();
        let b = count_paths(&dp, g.forward(n, w).unwrap(), n, g.forward(m, v).unwrap(), m).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn row_sums_are_permuted(di in 0usize..8, gi in 0usize..6, n in 0usize..4) {
        let ds = two_sided();
        let d = &ds[di % ds.len()];
        let gs = bijections_for(d);
        let g = &gs[gi % gs.len()];
        let dp = relabel(d, g).unwrap();
        for v in -8i64..=8 {
            let a: u64 = d.in_edges(n, v).unwrap().iter().map(|(_, m)| m).sum();
            let b: u64 = dp.in_edges(n, g.forward(n + 1, v).unwrap()).unwrap().iter().map(|(_, m)| m).sum();
            prop_assert_eq!(a, b);
        }
    }
}
