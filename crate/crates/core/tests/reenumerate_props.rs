use std::collections::BTreeMap;

use gbd_kit::dynamics::PathGenerator;
use gbd_kit::probes::{irreducible_probe, InvariantKind, Verdict};
use gbd_kit::reenumerate::{cone_flatten, dense_orbit_reenumeration, toeplitz_reenumeration, triangular_label};
use gbd_kit::relabel::verify_permutation_identity;
use gbd_kit::{catalog, Interval};

#[test]
fn toeplitz_with_four_generators() {
    let d = catalog::tridiag_b();
    let gens = [
        PathGenerator::vertical_from(0),
        PathGenerator::vertical_from(-3),
        PathGenerator::rightmost_slant_from(2),
        PathGenerator::alternating_from(5),
    ];
    let h = 2000;
    let re = toeplitz_reenumeration(&d, &gens, h).unwrap();
    assert!(re.log.levels_distinct());
    for x in &gens {
        let t = x.trace(&d, h).unwrap();
        let mut hits: BTreeMap<i64, usize> = BTreeMap::new();
        for (l, v) in t.iter().enumerate() {
            *hits.entry(re.g.forward(l, *v).unwrap()).or_default() += 1;
        }
        for j in 0..=10 {
            assert!(hits.get(&j).copied().unwrap_or(0) >= 3, "{x} label {j}");
        }
    }
    assert!(verify_permutation_identity(&d, &re.relabeled, &re.g, 30, Interval::new(0, 40), Interval::new(0, 100_000))
        .unwrap());
}

#[test]
fn toeplitz_relabeling_is_irreducible_near_the_generators() {
    let d = catalog::tridiag_b();
    let gens = [PathGenerator::vertical_from(0), PathGenerator::leftmost_slant_from(0), PathGenerator::alternating_from(1)];
    let re = toeplitz_reenumeration(&d, &gens, 400).unwrap();
    for x in &gens {
        let t = x.trace(&d, 4).unwrap();
        for (k, v) in t.iter().enumerate() {
            let label = re.g.forward(k, *v).unwrap();
            for j in 0..=8 {
                let p = irreducible_probe(&re.relabeled, label, j, k, 400).unwrap();
                assert!(p.is_yes(), "{x}: {label}@{k} -> {j}");
            }
        }
    }
}

#[test]
fn flattening_breaks_irreducibility() {
    for d in [catalog::tridiag_b(), catalog::parity_1(), catalog::parity_2()] {
        let f = cone_flatten(&d, (0, 0)).unwrap();
        assert!(matches!(f.certificate.kind, InvariantKind::TriangularSupport { .. }));
        assert!(f.certificate.is_global());
        for w in -4..=4 {
            let v = irreducible_probe(&f.relabeled, w, w + 1, 0, 12).unwrap();
            assert!(matches!(v, Verdict::No(_)), "{}: {w} -> {}", d.name(), w + 1);
        }
    }
}

#[test]
fn flattened_parity_offsets() {
    let f = cone_flatten(&catalog::parity_1(), (0, 0)).unwrap();
    let win = Interval::new(-10, 10);
    for n in 0..4 {
        let block = f.relabeled.incidence_window(n, win, win.widen(3)).unwrap();
        for (i, v) in win.iter().enumerate() {
            for (j, w) in win.widen(3).iter().enumerate() {
                let expect = u64::from(w - v == 0 || w - v == 2);
                assert_eq!(block[i][j], expect, "level {n} row {v} col {w}");
            }
        }
    }
}

#[test]
fn zero_cone_flatten_is_identity() {
    let d = catalog::banded("diag", [(0, 3)].into_iter().collect(), gbd_kit::VertexIndexing::TwoSided).unwrap();
    let f = cone_flatten(&d, (0, 0)).unwrap();
    assert_eq!(f.relabeled.fingerprint(), d.fingerprint());
}

#[test]
fn dense_orbit_labels_follow_the_triangular_sequence() {
    let d = catalog::tridiag_b();
    let x = PathGenerator::alternating_from(0);
    let g = dense_orbit_reenumeration(&d, &x, 300).unwrap();
    let t = x.trace(&d, 300).unwrap();
    let labels: Vec<i64> = t.iter().enumerate().map(|(n, v)| g.forward(n, *v).unwrap()).collect();
    assert_eq!(&labels[..6], &[0, 0, 1, 0, 1, 2]);
    let zeros: Vec<usize> = (0..20).filter(|n| labels[*n] == 0).collect();
    assert_eq!(zeros, vec![0, 1, 3, 6, 10, 15]);
    for big_j in 1..=20usize {
        let tj = big_j * (big_j + 1) / 2;
        for j in 0..big_j {
            let count = labels[..tj].iter().filter(|l| **l == j as i64).count();
            assert_eq!(count, big_j - j);
            assert_eq!(count, (0..tj).filter(|n| triangular_label(*n) == j as i64).count());
        }
    }
}
