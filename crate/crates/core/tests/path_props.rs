use gbd_kit::paths::{backward_reach_set, count_paths, enumerate_paths};
use gbd_kit::{catalog, DiagramHandle, Interval};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn diagram() -> impl Strategy<Value = DiagramHandle> {
    let all = catalog::all_default();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

fn endpoints(d: &DiagramHandle, a: i64, b: i64) -> (i64, i64) {
    let win = d.indexing().centered(6);
    (win.lo + a.rem_euclid(win.len() as i64), win.lo + b.rem_euclid(win.len() as i64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn counts_factor_through_intermediate_levels(
        d in diagram(), a in 0i64..13, b in 0i64..13, n in 0usize..3, len in 0usize..5, cut in 0usize..5,
    ) {
        let (w, v) = endpoints(&d, a, b);
        let m = n + len;
        let k = n + cut.min(len);
        prop_assume!(d.has_vertex(n, w) && d.has_vertex(m, v));
        let total = count_paths(&d, w, n, v, m).unwrap();
        let mut sum = BigUint::zero();
        for u in backward_reach_set(&d, v, m, k).unwrap() {
            if d.has_vertex(k, u) && d.has_vertex(n, w) {
                sum += count_paths(&d, w, n, u, k).unwrap() * count_paths(&d, u, k, v, m).unwrap();
            }
        }
        prop_assert_eq!(total, sum);
    }

    #[test]
    fn counts_match_windowed_products(d in diagram(), a in 0i64..13, b in 0i64..13, len in 0usize..5) {
        let (w, v) = endpoints(&d, a, b);
        prop_assume!(d.has_vertex(0, w) && d.has_vertex(len, v));
        // every backward reach set lies in the window, so the product is exact
        let mut hull = Interval::point(v);
        for k in 0..=len {
            for u in backward_reach_set(&d, v, len, k).unwrap() {
                hull = hull.hull(u);
            }
        }
        let hull = hull.hull(w);
        let size = hull.len();
        let mut acc: Vec<Vec<BigUint>> = (0..size)
            .map(|i| (0..size).map(|j| if i == j { BigUint::one() } else { BigUint::zero() }).collect())
            .collect();
        for k in 0..len {
            let f = d.incidence_window(k, hull, hull).unwrap();
            let mut next = vec![vec![BigUint::zero(); size]; size];
            for i in 0..size {
                for j in 0..size {
                    if f[i][j] == 0 {
                        continue;
                    }
                    for (c, x) in acc[j].iter().enumerate() {
                        next[i][c] += x * BigUint::from(f[i][j]);
                    }
                }
            }
            acc = next;
        }
        let got = acc[(v - hull.lo) as usize][(w - hull.lo) as usize].clone();
        prop_assert_eq!(count_paths(&d, w, 0, v, len).unwrap(), got);
    }

    #[test]
    fn backward_reach_is_union_over_predecessors(d in diagram(), b in 0i64..13, len in 1usize..5) {
        let (_, v) = endpoints(&d, 0, b);
        prop_assume!(d.has_vertex(len, v));
        let direct = backward_reach_set(&d, v, len, 0).unwrap();
        let mut union = std::collections::BTreeSet::new();
        for (u, _) in d.in_edges(len - 1, v).unwrap() {
            union.extend(backward_reach_set(&d, u, len - 1, 0).unwrap());
        }
        prop_assert_eq!(direct, union);
    }

    #[test]
    fn enumeration_is_exhaustive_and_valid(d in diagram(), a in 0i64..13, b in 0i64..13, len in 0usize..4) {
        let (w, v) = endpoints(&d, a, b);
        prop_assume!(d.has_vertex(0, w) && d.has_vertex(len, v));
        let count = count_paths(&d, w, 0, v, len).unwrap();
        prop_assume!(count <= BigUint::from(5000u32));
        let (paths, truncated) = enumerate_paths(&d, w, 0, v, len, None).unwrap();
        prop_assert!(!truncated);
        prop_assert_eq!(BigUint::from(paths.len()), count);
        for p in &paths {
            prop_assert!(p.validate(&d).is_ok());
        }
    }
}
