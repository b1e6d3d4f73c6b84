use gbd_kit::{catalog, ColumnSupport, Interval, LevelWindow};
use proptest::prelude::*;

#[test]
fn catalog_rows_are_finite_and_positive() {
    for d in catalog::all_default() {
        let win = d.indexing().centered(10);
        for n in 0..6 {
            for v in d.window_vertices(n + 1, win) {
                let row = d.in_edges(n, v).unwrap();
                assert!(!row.is_empty(), "{} row {v}@{n} is empty", d.name());
                assert!(row.iter().all(|(w, m)| *m > 0 && d.has_vertex(n, *w)));
                assert!(row.windows(2).all(|p| p[0].0 < p[1].0), "rows are sorted by source");
            }
        }
    }
}

#[test]
fn out_edges_match_in_edges() {
    for d in catalog::all_default() {
        let win = d.indexing().centered(8);
        for n in 0..3 {
            for w in d.window_vertices(n, win) {
                let out = d.out_edges_in_window(n, w, win).unwrap();
                for v in d.window_vertices(n + 1, win) {
                    let by_row = d.mult(n, v, w).unwrap();
                    let by_col = out.iter().find(|(x, _)| *x == v).map_or(0, |(_, m)| *m);
                    assert_eq!(by_row, by_col, "{}: {w}@{n} -> {v}", d.name());
                }
                if let ColumnSupport::Finite(vs) = d.column_support(n, w).unwrap() {
                    let inside: Vec<_> = vs.into_iter().filter(|v| win.contains(*v)).collect();
                    let listed: Vec<_> = out.iter().map(|(v, _)| *v).collect();
                    assert_eq!(inside, listed);
                }
            }
        }
    }
}

#[test]
fn incidence_window_matches_rows() {
    for d in catalog::all_default() {
        let rows = d.indexing().clip(d.indexing().centered(6));
        let cols = rows.widen(3);
        let cols = d.indexing().clip(cols);
        for n in 0..3 {
            let block = d.incidence_window(n, rows, cols).unwrap();
            for (i, v) in rows.iter().enumerate() {
                for (j, w) in cols.iter().enumerate() {
                    assert_eq!(block[i][j], d.mult(n, v, w).unwrap());
                }
            }
        }
    }
}

#[test]
fn stationary_levels_coincide() {
    for d in catalog::all_default().into_iter().filter(|d| d.is_stationary()) {
        let win = d.indexing().centered(8);
        let first = d.incidence_window(0, win, win).unwrap();
        for n in 1..8 {
            assert_eq!(d.incidence_window(n, win, win).unwrap(), first, "{} level {n}", d.name());
        }
    }
}

#[test]
fn window_description_is_stable() {
    let d = catalog::tridiag_b();
    let w = LevelWindow::uniform(d.indexing(), 2, Interval::new(-1, 1)).unwrap();
    assert_eq!(w.describe(), LevelWindow::uniform(d.indexing(), 2, Interval::new(-1, 1)).unwrap().describe());
}

proptest! {
    #[test]
    fn canonical_enumeration_round_trips(k in 0u64..100_000, base in -50i64..50) {
        for idx in [gbd_kit::VertexIndexing::TwoSided, gbd_kit::VertexIndexing::OneSidedFrom(base)] {
            let v = idx.from_canonical_index(k);
            prop_assert!(idx.contains(v));
            prop_assert_eq!(idx.canonical_index(v), k);
        }
    }
}
