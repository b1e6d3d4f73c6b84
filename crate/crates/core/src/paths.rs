//! Exact finite-path counting, enumeration and backward reachability.
//!
//! Rows are finite and columns may not be, so every primitive here walks
//! backwards from the target.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{GbdError, Result};
use crate::model::{DiagramHandle, Level, Mult, Vertex};

/// One edge: the `copy`-th parallel edge from `source` at `level` to
/// `target` at `level + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Edge {
    pub level: Level,
    pub source: Vertex,
    pub target: Vertex,
    pub copy: Mult,
}

impl Edge {
    pub fn new(level: Level, source: Vertex, target: Vertex, copy: Mult) -> Self {
        Edge { level, source, target, copy }
    }

    /// Checks that the edge exists in `d`.
    pub fn validate(&self, d: &DiagramHandle) -> Result<()> {
        let m = d.mult(self.level, self.target, self.source).map_err(|_| self.missing())?;
        if self.copy < m && d.has_vertex(self.level, self.source) {
            Ok(())
        } else {
            Err(self.missing())
        }
    }

    fn missing(&self) -> GbdError {
        GbdError::InvalidEdge(self.to_string())
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}->{}#{}", self.source, self.level, self.target, self.copy)
    }
}

/// A finite path starting at `start` on `start_level`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FinitePath {
    pub start_level: Level,
    pub start: Vertex,
    pub edges: Vec<Edge>,
}

impl FinitePath {
    pub fn empty(level: Level, v: Vertex) -> Self {
        FinitePath { start_level: level, start: v, edges: Vec::new() }
    }

    /// Path through the vertex trace `vertices` (levels `start_level..`),
    /// always using copy 0.
    pub fn through(start_level: Level, vertices: &[Vertex]) -> Result<Self> {
        let (&start, rest) = vertices
            .split_first()
            .ok_or_else(|| GbdError::InvalidEdge("empty vertex trace".into()))?;
        let mut edges = Vec::with_capacity(rest.len());
        let mut prev = start;
        for (k, &v) in rest.iter().enumerate() {
            edges.push(Edge::new(start_level + k, prev, v, 0));
            prev = v;
        }
        Ok(FinitePath { start_level, start, edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn end_level(&self) -> Level {
        self.start_level + self.edges.len()
    }

    pub fn end(&self) -> Vertex {
        self.edges.last().map(|e| e.target).unwrap_or(self.start)
    }

    /// Vertices visited, one per level from `start_level` to `end_level`.
    pub fn vertices(&self) -> Vec<Vertex> {
        std::iter::once(self.start).chain(self.edges.iter().map(|e| e.target)).collect()
    }

    /// Checks chaining, levels and that every edge exists in `d`.
    pub fn validate(&self, d: &DiagramHandle) -> Result<()> {
        d.check_vertex(self.start_level, self.start)?;
        let mut at = self.start;
        for (k, e) in self.edges.iter().enumerate() {
            if e.level != self.start_level + k || e.source != at {
                return Err(GbdError::InvalidEdge(format!("edge {e} does not continue the path")));
            }
            e.validate(d)?;
            at = e.target;
        }
        Ok(())
    }

    /// This path followed by `other`, which must start where this one ends.
    pub fn concat(&self, other: &FinitePath) -> Result<FinitePath> {
        if other.start_level != self.end_level() || other.start != self.end() {
            return Err(GbdError::InvalidEdge("paths do not meet".into()));
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Ok(FinitePath { start_level: self.start_level, start: self.start, edges })
    }
}

impl fmt::Display for FinitePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.start, self.start_level)?;
        for e in &self.edges {
            if e.copy == 0 {
                write!(f, " -> {}", e.target)?;
            } else {
                write!(f, " -> {}#{}", e.target, e.copy)?;
            }
        }
        Ok(())
    }
}

fn check_endpoints(d: &DiagramHandle, w: Vertex, n: Level, v: Vertex, m: Level) -> Result<()> {
    if n > m {
        return Err(GbdError::LevelOrder { from: n, to: m });
    }
    d.check_vertex(n, w)?;
    d.check_vertex(m, v)
}

/// Weighted backward layers: `layers[k - n]` maps each vertex `u` at level
/// `k` to the number of paths `u@k -> v@m`.
fn backward_layers(
    d: &DiagramHandle,
    v: Vertex,
    m: Level,
    n: Level,
) -> Result<Vec<BTreeMap<Vertex, BigUint>>> {
    let mut layers = vec![BTreeMap::new(); m - n + 1];
    layers[m - n].insert(v, BigUint::one());
    for k in (n..m).rev() {
        let (lower, upper) = layers.split_at_mut(k - n + 1);
        let here = &mut lower[k - n];
        for (u, c) in &upper[0] {
            for (w, mult) in d.in_edges(k, *u)? {
                *here.entry(w).or_insert_with(BigUint::zero) += c * BigUint::from(mult);
            }
        }
    }
    Ok(layers)
}

/// `|E(w@n -> v@m)|`, exact.
pub fn count_paths(d: &DiagramHandle, w: Vertex, n: Level, v: Vertex, m: Level) -> Result<BigUint> {
    check_endpoints(d, w, n, v, m)?;
    let mut cur: BTreeMap<Vertex, BigUint> = BTreeMap::from([(v, BigUint::one())]);
    for k in (n..m).rev() {
        let mut next: BTreeMap<Vertex, BigUint> = BTreeMap::new();
        for (u, c) in &cur {
            for (s, mult) in d.in_edges(k, *u)? {
                *next.entry(s).or_insert_with(BigUint::zero) += c * BigUint::from(mult);
            }
        }
        cur = next;
    }
    Ok(cur.remove(&w).unwrap_or_else(BigUint::zero))
}

/// `{w : count_paths(w, n, v, m) > 0}`.
pub fn backward_reach_set(
    d: &DiagramHandle,
    v: Vertex,
    m: Level,
    n: Level,
) -> Result<BTreeSet<Vertex>> {
    if n > m {
        return Err(GbdError::LevelOrder { from: n, to: m });
    }
    d.check_vertex(m, v)?;
    let mut cur = BTreeSet::from([v]);
    for k in (n..m).rev() {
        let mut next = BTreeSet::new();
        for u in &cur {
            for (s, _) in d.in_edges(k, *u)? {
                next.insert(s);
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Whether some path joins `w@n` to `v@m`.
pub fn reaches(d: &DiagramHandle, w: Vertex, n: Level, v: Vertex, m: Level) -> Result<bool> {
    Ok(backward_reach_set(d, v, m, n)?.contains(&w))
}

/// Paths `w@n -> v@m` in lexicographic edge order, at most `cap` of them
/// (`None` for no cap). The flag is true iff more than `cap` paths exist.
pub fn enumerate_paths(
    d: &DiagramHandle,
    w: Vertex,
    n: Level,
    v: Vertex,
    m: Level,
    cap: Option<usize>,
) -> Result<(Vec<FinitePath>, bool)> {
    check_endpoints(d, w, n, v, m)?;
    let layers = backward_layers(d, v, m, n)?;
    if !layers[0].contains_key(&w) {
        return Ok((Vec::new(), false));
    }
    let mut out = Vec::new();
    let mut stack: Vec<Edge> = Vec::with_capacity(m - n);
    let limit = cap.map(|c| c + 1);
    dfs(d, &layers, n, m, w, &mut stack, &mut out, limit)?;
    let truncated = matches!(cap, Some(c) if out.len() > c);
    if let Some(c) = cap {
        out.truncate(c);
    }
    Ok((out, truncated))
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    d: &DiagramHandle,
    layers: &[BTreeMap<Vertex, BigUint>],
    n: Level,
    m: Level,
    at: Vertex,
    stack: &mut Vec<Edge>,
    out: &mut Vec<FinitePath>,
    limit: Option<usize>,
) -> Result<bool> {
    let k = n + stack.len();
    if k == m {
        let start = stack.first().map(|e| e.source).unwrap_or(at);
        out.push(FinitePath { start_level: n, start, edges: stack.clone() });
        return Ok(matches!(limit, Some(l) if out.len() >= l));
    }
    for t in layers[k + 1 - n].keys() {
        let mult = d.mult(k, *t, at)?;
        for copy in 0..mult {
            stack.push(Edge::new(k, at, *t, copy));
            let full = dfs(d, layers, n, m, *t, stack, out, limit)?;
            stack.pop();
            if full {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// The first path `w@n -> v@m` in lexicographic order, if any.
pub fn first_path(
    d: &DiagramHandle,
    w: Vertex,
    n: Level,
    v: Vertex,
    m: Level,
) -> Result<Option<FinitePath>> {
    Ok(enumerate_paths(d, w, n, v, m, Some(1))?.0.pop())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{catalog, Interval};

    /// Product of dense windowed blocks, as an independent oracle.
    fn windowed_product(d: &DiagramHandle, n: Level, m: Level, win: Interval) -> Vec<Vec<BigUint>> {
        let size = win.len();
        let mut acc: Vec<Vec<BigUint>> = (0..size)
            .map(|i| (0..size).map(|j| if i == j { BigUint::one() } else { BigUint::zero() }).collect())
            .collect();
        for k in n..m {
            let f = d.incidence_window(k, win, win).unwrap();
            let mut next = vec![vec![BigUint::zero(); size]; size];
            for (i, row) in f.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for c in 0..size {
                        next[i][c] += BigUint::from(x) * &acc[j][c];
                    }
                }
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn tridiag_two_step_return_count() {
        let d = catalog::tridiag_b();
        assert_eq!(count_paths(&d, 0, 0, 0, 2).unwrap(), BigUint::from(6u32));
        let win = Interval::new(-6, 6);
        let prod = windowed_product(&d, 0, 4, win);
        for w in -2..=2 {
            for v in -2..=2 {
                let got = count_paths(&d, w, 0, v, 4).unwrap();
                assert_eq!(got, prod[(v + 6) as usize][(w + 6) as usize], "{w} -> {v}");
            }
        }
    }

    #[test]
    fn renewal_examples() {
        let d = catalog::renewal_shift();
        assert_eq!(count_paths(&d, 3, 0, 1, 2).unwrap(), BigUint::one());
        let (paths, truncated) = enumerate_paths(&d, 3, 0, 1, 2, Some(10)).unwrap();
        assert!(!truncated);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].vertices(), vec![3, 2, 1]);
        assert_eq!(backward_reach_set(&d, 1, 2, 0).unwrap(), BTreeSet::from([1, 2, 3]));
    }

    #[test]
    fn enumeration_cap_and_trivial_cases() {
        let d = catalog::tridiag_b();
        let (paths, truncated) = enumerate_paths(&d, 0, 0, 0, 2, Some(3)).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(truncated);
        for p in &paths {
            p.validate(&d).unwrap();
        }
        assert!(paths.windows(2).all(|w| w[0].edges < w[1].edges));
        assert_eq!(enumerate_paths(&d, 0, 2, 1, 2, None).unwrap(), (Vec::new(), false));
        assert_eq!(count_paths(&d, 4, 3, 4, 3).unwrap(), BigUint::one());
        assert_eq!(
            backward_reach_set(&d, 0, 3, 0).unwrap(),
            (-3..=3).collect::<BTreeSet<_>>()
        );
        assert!(count_paths(&d, 0, 3, 0, 1).is_err());
    }

    #[test]
    fn in_edge_examples() {
        assert_eq!(catalog::renewal_shift().in_edges(5, 1).unwrap(), vec![(1, 1), (2, 1)]);
        assert_eq!(catalog::tridiag_b().in_edges(2, 0).unwrap(), vec![(-1, 1), (0, 2), (1, 1)]);
        assert_eq!(catalog::b_infinity().in_edges(0, 3).unwrap(), vec![(1, 1), (2, 1), (3, 1)]);
        assert!(catalog::renewal_shift().in_edges(0, 0).is_err());
    }
}
