//! Constructive relabelings: Toeplitz re-enumeration, the dense-orbit
//! variant and cone flattening, plus the compactness and full-out-column
//! checks used with them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{GbdError, Result};
use crate::model::{ColumnSupport, DiagramHandle, Interval, Level, LevelWindow, Vertex, VertexIndexing};
use crate::dynamics::PathGenerator;
use crate::paths::FinitePath;
use crate::probes::{
    forward_closure, invariant_certificate, t_rule, Bounds, Direction, InvariantKind, InvariantTag,
    NonReachInvariant, Verdict,
};
use crate::relabel::{relabel, ShiftRule, VertexBijectionSeq};

/// One forced label: `g_level(vertex) = label`, where `vertex` is
/// `s(x^generator_level)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub generator: usize,
    pub level: Level,
    pub vertex: Vertex,
    pub label: Vertex,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AssignmentLog {
    pub entries: Vec<Assignment>,
}

impl AssignmentLog {
    /// Entries of one generator, by level.
    pub fn of(&self, generator: usize) -> Vec<Assignment> {
        let mut out: Vec<Assignment> =
            self.entries.iter().filter(|a| a.generator == generator).copied().collect();
        out.sort_by_key(|a| a.level);
        out
    }

    pub fn levels_distinct(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.entries.iter().all(|a| seen.insert(a.level))
    }

    /// One record per line: `generator level vertex label`.
    pub fn export(&self) -> String {
        let mut s = String::from("# generator level vertex label\n");
        let mut sorted = self.entries.clone();
        sorted.sort_by_key(|a| a.level);
        for a in sorted {
            let _ = writeln!(s, "{} {} {} {}", a.generator, a.level, a.vertex, a.label);
        }
        s
    }
}

/// `(generator, level, label)` for every forced position below `horizon`.
///
/// Stage 0 alternates labeled blocks `0..k` on `[k(k-1), k^2)` with gap
/// blocks on `[k^2, k^2 + k)`. Every later stage takes the 1st, 3rd, ...
/// surviving gap block, labels the first half (rounded up) of each from 0,
/// and hands the others on.
pub fn toeplitz_schedule(generators: usize, horizon: Level) -> Vec<(usize, Level, Vertex)> {
    let mut out = Vec::new();
    if generators == 0 {
        return out;
    }
    let mut gaps: Vec<(Level, usize)> = Vec::new();
    let mut k = 1usize;
    while k * (k - 1) < horizon {
        let start = k * (k - 1);
        for j in 0..k {
            if start + j < horizon {
                out.push((0, start + j, j as Vertex));
            }
        }
        if k * k < horizon {
            gaps.push((k * k, k));
        }
        k += 1;
    }
    for stage in 1..generators {
        let mut rest = Vec::new();
        for (idx, (start, len)) in gaps.into_iter().enumerate() {
            if idx % 2 == 1 {
                rest.push((start, len));
                continue;
            }
            for j in 0..len.div_ceil(2) {
                if start + j < horizon {
                    out.push((stage, start + j, j as Vertex));
                }
            }
        }
        gaps = rest;
    }
    out
}

#[derive(Clone, Debug)]
pub struct Reenumeration {
    pub g: VertexBijectionSeq,
    pub relabeled: DiagramHandle,
    pub log: AssignmentLog,
}

/// Relabels `d` so that the given generators pass through every label
/// infinitely often (to `horizon`), following the Toeplitz block schedule.
pub fn toeplitz_reenumeration(
    d: &DiagramHandle,
    generators: &[PathGenerator],
    horizon: Level,
) -> Result<Reenumeration> {
    if generators.is_empty() {
        return Err(GbdError::Generator("at least one generator is required".into()));
    }
    let traces = generators
        .iter()
        .map(|x| x.trace(d, horizon))
        .collect::<Result<Vec<_>>>()?;
    let mut pins: Vec<BTreeMap<Vertex, Vertex>> = vec![BTreeMap::new(); horizon];
    let mut log = AssignmentLog::default();
    for (i, level, label) in toeplitz_schedule(generators.len(), horizon) {
        let vertex = traces[i][level];
        if pins[level].insert(vertex, label).is_some() {
            return Err(GbdError::Conflict(format!("level {level} is forced twice")));
        }
        log.entries.push(Assignment { generator: i, level, vertex, label });
    }
    let g = VertexBijectionSeq::table_fill(d.indexing(), VertexIndexing::OneSidedFrom(0), pins)?;
    let relabeled = relabel(d, &g)?;
    Ok(Reenumeration { g, relabeled, log })
}

/// The `n`-th term of `0, 0, 1, 0, 1, 2, 0, 1, 2, 3, ...`.
pub fn triangular_label(n: usize) -> Vertex {
    let mut block = 1;
    let mut rest = n;
    while rest >= block {
        rest -= block;
        block += 1;
    }
    rest as Vertex
}

/// Pins `g_n(s(x_n))` to the triangular sequence for `n < horizon`.
pub fn dense_orbit_reenumeration(
    d: &DiagramHandle,
    x: &PathGenerator,
    horizon: Level,
) -> Result<VertexBijectionSeq> {
    let t = x.trace(d, horizon)?;
    let pins = t
        .iter()
        .enumerate()
        .map(|(n, v)| BTreeMap::from([(*v, triangular_label(n))]))
        .collect();
    VertexBijectionSeq::table_fill(d.indexing(), VertexIndexing::OneSidedFrom(0), pins)
}

#[derive(Clone, Debug)]
pub struct Flattening {
    pub g: VertexBijectionSeq,
    pub relabeled: DiagramHandle,
    pub certificate: NonReachInvariant,
}

const FLATTEN_HORIZON: Level = 64;

/// Shifts every level so that the lower cone of the anchor becomes
/// triangular: with a source-distance bound `t_n` the cumulative shift
/// `g_n(v) = v - (t_0 + ... + t_{n-1})`; otherwise, on two-sided diagrams
/// with finite columns, a shift that keeps the least reachable vertex of
/// the anchor's forward cone at the anchor (to a horizon).
pub fn cone_flatten(d: &DiagramHandle, anchor: (Vertex, Level)) -> Result<Flattening> {
    let (v, n) = anchor;
    d.check_vertex(n, v)?;
    if let Some(t) = t_rule(d) {
        if t.as_constant() == Some(0) {
            let certificate = triangular_cert(d, Direction::Upper)?;
            return Ok(Flattening {
                g: VertexBijectionSeq::identity(d.indexing()),
                relabeled: d.clone(),
                certificate,
            });
        }
        let g = VertexBijectionSeq::cone_shift(t);
        let relabeled = relabel(d, &g)?;
        let certificate = triangular_cert(&relabeled, Direction::Upper)?;
        return Ok(Flattening { g, relabeled, certificate });
    }
    if d.indexing() != VertexIndexing::TwoSided {
        return Err(GbdError::NoBoundedSizeFlag);
    }
    // least reachable vertex level by level
    let mut reach = BTreeSet::from([v]);
    let mut shifts = vec![0i64; n + 1];
    for k in n..n + FLATTEN_HORIZON {
        let mut next = BTreeSet::new();
        for u in &reach {
            match d.column_support(k, *u)? {
                ColumnSupport::Finite(vs) => next.extend(vs),
                _ => return Err(GbdError::NoBoundedSizeFlag),
            }
        }
        reach = next;
        let lo = *reach.first().ok_or_else(|| GbdError::Invariant(format!("{v}@{n} has a finite cone that dies out")))?;
        shifts.push(v - lo);
    }
    let g = VertexBijectionSeq::shift(ShiftRule::Explicit(shifts));
    let relabeled = relabel(d, &g)?;
    let certificate = NonReachInvariant {
        kind: InvariantKind::LeftmostPath { level: n, vertex: v, horizon: n + FLATTEN_HORIZON },
        window: format!("forward cone of {v}@{n} to level {}", n + FLATTEN_HORIZON),
        verified: true,
        basis: None,
    };
    Ok(Flattening { g, relabeled, certificate })
}

fn triangular_cert(d: &DiagramHandle, direction: Direction) -> Result<NonReachInvariant> {
    let win = LevelWindow::centered(d.indexing(), 4, crate::DEFAULT_RADIUS);
    invariant_certificate(d, &win, &[InvariantTag::Triangular])?
        .into_iter()
        .find(|i| {
            matches!(i.kind, InvariantKind::TriangularSupport { direction: dd, slack: 0 } if dd == direction)
        })
        .ok_or_else(|| GbdError::Invariant("flattened diagram is not triangular on the window".into()))
}

const CLOSURE_CAP: usize = 4096;

/// Whether the cylinder `[c]` is compact: its forward cone must be finite
/// at every level.
pub fn compact_cylinder_check(
    d: &DiagramHandle,
    c: &FinitePath,
    horizon: usize,
) -> Result<Verdict<String, String>> {
    c.validate(d)?;
    let (l, r) = (c.end_level(), c.end());
    if let Some(t) = t_rule(d) {
        let basis = if d.bounded_size().is_some() { "BoundedSize" } else { "Banded" };
        return Ok(Verdict::Yes(format!("cone of {r}@{l} bounded by t = {t:?} ({basis})")));
    }
    if let VertexIndexing::OneSidedFrom(base) = d.indexing() {
        if d.has_flag("UpperTriangularSupport") {
            return Ok(Verdict::Yes(format!(
                "UpperTriangularSupport keeps the cone of {r}@{l} inside [{base}, {r}]"
            )));
        }
    }
    if d.is_stationary() {
        if let Some(set) = forward_closure(d, r, CLOSURE_CAP)? {
            return Ok(Verdict::Yes(format!("forward closure of {r} is the finite set {set:?}")));
        }
    }
    let full = d.full_out_column();
    let mut frontier = BTreeSet::from([r]);
    for k in l..l + horizon {
        let mut next = BTreeSet::new();
        for u in &frontier {
            if Some(*u) == full {
                return Ok(Verdict::No(format!("vertex {u} reached at level {k} has edges to every vertex below")));
            }
            match d.column_support(k, *u)? {
                ColumnSupport::Finite(vs) => next.extend(vs),
                ColumnSupport::Infinite => {
                    return Ok(Verdict::No(format!("vertex {u} reached at level {k} has infinitely many outgoing edges")))
                }
                ColumnSupport::Unknown => {}
            }
        }
        if next.len() > CLOSURE_CAP {
            break;
        }
        frontier = next;
    }
    Ok(Verdict::Unknown(Bounds { depth: horizon, window: format!("forward cone of {r}@{l}") }))
}

/// Per level `n < levels`: Yes(u) when the full-out-column vertex `u` has an
/// edge to every vertex of `window` below it; No when a Banded flag bounds
/// every out-degree while the level is infinite.
pub fn full_out_row_check(
    d: &DiagramHandle,
    levels: Level,
    window: Interval,
) -> Result<Vec<Verdict<Vertex, String>>> {
    let mut out = Vec::with_capacity(levels);
    for n in 0..levels {
        let unknown = || Verdict::Unknown(Bounds { depth: n, window: window.to_string() });
        if let Some(u) = d.full_out_column() {
            let mut ok = d.has_vertex(n, u);
            for v in d.window_vertices(n + 1, window) {
                if !ok {
                    break;
                }
                ok = d.mult(n, v, u)? > 0;
            }
            out.push(if ok { Verdict::Yes(u) } else { unknown() });
        } else if let (Some(offsets), true) = (d.banded_offsets(), d.is_stationary()) {
            out.push(Verdict::No(format!(
                "out-degree at most {} under the band, level {n} is infinite",
                offsets.len()
            )));
        } else {
            out.push(unknown());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;

    #[test]
    fn schedule_matches_block_pattern() {
        let s = toeplitz_schedule(3, 40);
        let of = |i: usize| -> Vec<(Level, Vertex)> {
            s.iter().filter(|e| e.0 == i).map(|e| (e.1, e.2)).collect()
        };
        assert_eq!(&of(0)[..6], &[(0, 0), (2, 0), (3, 1), (6, 0), (7, 1), (8, 2)]);
        assert_eq!(&of(1)[..3], &[(1, 0), (9, 0), (10, 1)]);
        assert_eq!(of(2)[0], (4, 0));
        let mut levels: Vec<Level> = s.iter().map(|e| e.1).collect();
        levels.sort_unstable();
        levels.dedup();
        assert_eq!(levels.len(), s.len());
    }

    #[test]
    fn triangular_sequence() {
        let t: Vec<Vertex> = (0..10).map(triangular_label).collect();
        assert_eq!(t, vec![0, 0, 1, 0, 1, 2, 0, 1, 2, 3]);
    }

    #[test]
    fn flatten_tridiag() {
        let f = cone_flatten(&catalog::tridiag_b(), (0, 0)).unwrap();
        assert_eq!(f.g.forward(3, 5).unwrap(), 2);
        let row = f.relabeled.in_edges(2, 0).unwrap();
        assert_eq!(row, vec![(0, 1), (1, 2), (2, 1)]);
    }

    #[test]
    fn compactness() {
        let c = FinitePath::empty(0, 4);
        assert!(compact_cylinder_check(&catalog::tridiag_b(), &c, 16).unwrap().is_yes());
        assert!(compact_cylinder_check(&catalog::renewal_shift(), &c, 16).unwrap().is_no());
        assert!(compact_cylinder_check(&catalog::b_infinity(), &c, 16).unwrap().is_no());
    }

    #[test]
    fn full_out_rows() {
        let w = Interval::new(1, 12);
        assert!(full_out_row_check(&catalog::renewal_shift(), 3, w).unwrap().iter().all(|v| v.yes() == Some(&1)));
        assert!(full_out_row_check(&catalog::b_infinity(), 3, w).unwrap().iter().all(|v| v.is_yes()));
        let w = Interval::new(-5, 5);
        assert!(full_out_row_check(&catalog::tridiag_b(), 3, w).unwrap().iter().all(|v| v.is_no()));
    }
}
