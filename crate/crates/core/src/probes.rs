//! Certified structural probes.
//!
//! A `No` verdict always carries an invariant that was checked edge by edge
//! on a finite window and is backed by a structural flag (or by the diagram
//! being finite), so it holds beyond the window as well.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;

use crate::error::{GbdError, Result};
use crate::model::{
    ColumnSupport, DiagramHandle, Interval, Level, LevelRule, LevelWindow, Rule, Vertex,
    VertexIndexing,
};
use crate::paths::{first_path, reaches, FinitePath};
use crate::reenumerate::{compact_cylinder_check, full_out_row_check};

/// Bounds exhausted by a probe that could not decide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub depth: usize,
    pub window: String,
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "depth {} window {}", self.depth, self.window)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<Y, N> {
    Yes(Y),
    No(N),
    Unknown(Bounds),
}

impl<Y, N> Verdict<Y, N> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Yes(_) => "yes",
            Verdict::No(_) => "no",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn yes(&self) -> Option<&Y> {
        match self {
            Verdict::Yes(y) => Some(y),
            _ => None,
        }
    }

    pub fn no(&self) -> Option<&N> {
        match self {
            Verdict::No(n) => Some(n),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Sources satisfy `w <= v + c`.
    Lower,
    /// Sources satisfy `w >= v + c`.
    Upper,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum InvariantKind {
    TriangularSupport { direction: Direction, slack: i64 },
    /// Every edge `w@n -> v@n+1` has `v + a(n+1) = w + an (mod p)`.
    ResidueClass { p: i64, a: i64 },
    /// The classes of `v + an mod p` are unions of connected components.
    ClopenPartition { p: i64, a: i64 },
    /// Sources of `v in V_{n+1}` lie in `[v - t_n, v + t_n]`.
    ConeBound { t: LevelRule },
    /// Everything reachable from `from` stays in `set` (stationary diagrams).
    ForwardClosed { from: Vertex, set: Vec<Vertex> },
    /// From the anchor no vertex below `vertex` is reachable up to `horizon`.
    LeftmostPath { level: Level, vertex: Vertex, horizon: Level },
}

impl InvariantKind {
    pub fn name(&self) -> &'static str {
        match self {
            InvariantKind::TriangularSupport { .. } => "TriangularSupport",
            InvariantKind::ResidueClass { .. } => "ResidueClass",
            InvariantKind::ClopenPartition { .. } => "ClopenPartition",
            InvariantKind::ConeBound { .. } => "ConeBound",
            InvariantKind::ForwardClosed { .. } => "ForwardClosed",
            InvariantKind::LeftmostPath { .. } => "LeftmostPath",
        }
    }

    fn params(&self) -> String {
        match self {
            InvariantKind::TriangularSupport { direction, slack } => {
                let rel = match direction {
                    Direction::Lower => "<=",
                    Direction::Upper => ">=",
                };
                format!("w {rel} v + {slack}")
            }
            InvariantKind::ResidueClass { p, a } | InvariantKind::ClopenPartition { p, a } => {
                format!("p={p} a={a}")
            }
            InvariantKind::ConeBound { t } => match t.as_constant() {
                Some(c) => format!("t={c}"),
                None => format!("t={t:?}"),
            },
            InvariantKind::ForwardClosed { from, set } => format!("from={from} set={set:?}"),
            InvariantKind::LeftmostPath { level, vertex, horizon } => {
                format!("anchor={vertex}@{level} horizon={horizon}")
            }
        }
    }
}

/// An invariant verified on `window`; `basis` names what makes it global.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NonReachInvariant {
    pub kind: InvariantKind,
    pub window: String,
    pub verified: bool,
    pub basis: Option<String>,
}

impl NonReachInvariant {
    pub fn is_global(&self) -> bool {
        self.verified && self.basis.is_some()
    }

    /// Whether the invariant rules out every path `i@n -> j@m`, `m > n`.
    pub fn excludes(&self, i: Vertex, j: Vertex) -> bool {
        match &self.kind {
            InvariantKind::TriangularSupport { direction: Direction::Lower, slack } => j < i - slack,
            InvariantKind::TriangularSupport { direction: Direction::Upper, slack } => j > i - slack,
            InvariantKind::ResidueClass { p, a } => (j - i).rem_euclid(a.gcd(p)) != 0,
            InvariantKind::ForwardClosed { from, set } => *from == i && !set.contains(&j),
            InvariantKind::LeftmostPath { vertex, .. } => j < *vertex,
            InvariantKind::ClopenPartition { .. } | InvariantKind::ConeBound { .. } => false,
        }
    }

    /// `{kind, params, window, verified}` as one line of structured text.
    pub fn export(&self) -> String {
        format!(
            "{{kind: {}, params: {}, window: {}, verified: {}, basis: {}}}",
            self.kind.name(),
            self.kind.params(),
            self.window,
            self.verified,
            self.basis.as_deref().unwrap_or("window only")
        )
    }
}

impl fmt::Display for NonReachInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind.name(), self.kind.params())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantTag {
    Triangular,
    Residue,
    Clopen,
    Cone,
}

pub const ALL_TAGS: [InvariantTag; 4] =
    [InvariantTag::Triangular, InvariantTag::Residue, InvariantTag::Clopen, InvariantTag::Cone];

/// Every edge `(n, w, v)` with `v` a row of the window at level `n + 1`.
/// Explicit diagrams contribute all of their rows, which makes the check
/// exhaustive for them.
fn window_edges(d: &DiagramHandle, win: &LevelWindow) -> Result<(Vec<(Level, Vertex, Vertex)>, bool)> {
    let mut out = Vec::new();
    if let Rule::Explicit { levels, .. } = d.rule() {
        for (n, table) in levels.iter().enumerate() {
            for (v, row) in table {
                out.extend(row.iter().map(|(w, _)| (n, *w, *v)));
            }
        }
        return Ok((out, true));
    }
    for n in 0..win.max_level() {
        for v in d.window_vertices(n + 1, win.at(n + 1)) {
            for (w, _) in d.in_edges(n, v)? {
                out.push((n, w, v));
            }
        }
    }
    Ok((out, false))
}

/// The sequence `t_n` bounding source distance, when a flag provides it.
pub fn t_rule(d: &DiagramHandle) -> Option<LevelRule> {
    if let Some((t, _)) = d.bounded_size() {
        return Some(t.clone());
    }
    if d.indexing() == VertexIndexing::TwoSided {
        if let Some(offs) = d.banded_offsets() {
            let t = offs.keys().map(|o| o.unsigned_abs()).max().unwrap_or(0);
            return Some(LevelRule::Constant(t));
        }
    }
    None
}

fn triangular_basis(d: &DiagramHandle, direction: Direction, slack: i64, exhaustive: bool) -> Option<String> {
    if exhaustive {
        return Some("ExplicitFiniteLevels".into());
    }
    if d.banded_offsets().is_some() && d.is_stationary() {
        return Some("Banded".into());
    }
    match (direction, slack) {
        (Direction::Lower, 0) if d.has_flag("LowerTriangularSupport") => {
            Some("LowerTriangularSupport".into())
        }
        (Direction::Upper, 0) if d.has_flag("UpperTriangularSupport") => {
            Some("UpperTriangularSupport".into())
        }
        _ => None,
    }
}

/// All invariants of the requested kinds that hold on every edge of the
/// window. Parameters searched: `p <= 6`, `|a| <= 2`, `|c| <= 2`.
pub fn invariant_certificate(
    d: &DiagramHandle,
    win: &LevelWindow,
    tags: &[InvariantTag],
) -> Result<Vec<NonReachInvariant>> {
    let (edges, exhaustive) = window_edges(d, win)?;
    let window = if exhaustive { "all explicit levels".to_string() } else { win.describe() };
    let mut out = Vec::new();
    if tags.contains(&InvariantTag::Triangular) {
        let forms = [
            (Direction::Lower, -2),
            (Direction::Lower, -1),
            (Direction::Lower, 0),
            (Direction::Upper, 0),
            (Direction::Upper, 1),
            (Direction::Upper, 2),
        ];
        for (direction, slack) in forms {
            let ok = edges.iter().all(|&(_, w, v)| match direction {
                Direction::Lower => w <= v + slack,
                Direction::Upper => w >= v + slack,
            });
            if ok && !edges.is_empty() {
                out.push(NonReachInvariant {
                    kind: InvariantKind::TriangularSupport { direction, slack },
                    window: window.clone(),
                    verified: true,
                    basis: triangular_basis(d, direction, slack, exhaustive),
                });
            }
        }
    }
    let residue_basis = if exhaustive {
        Some("ExplicitFiniteLevels".to_string())
    } else if d.banded_offsets().is_some() && d.is_stationary() {
        Some("Banded".to_string())
    } else {
        None
    };
    let want_residue = tags.contains(&InvariantTag::Residue);
    let want_clopen = tags.contains(&InvariantTag::Clopen);
    if (want_residue || want_clopen) && !edges.is_empty() {
        let mut seen = BTreeSet::new();
        for p in 2..=6i64 {
            for a in -2..=2i64 {
                let a = a.rem_euclid(p);
                if !seen.insert((p, a)) {
                    continue;
                }
                if edges.iter().all(|&(_, w, v)| (w - v - a).rem_euclid(p) == 0) {
                    if want_residue {
                        out.push(NonReachInvariant {
                            kind: InvariantKind::ResidueClass { p, a },
                            window: window.clone(),
                            verified: true,
                            basis: residue_basis.clone(),
                        });
                    }
                    if want_clopen {
                        out.push(NonReachInvariant {
                            kind: InvariantKind::ClopenPartition { p, a },
                            window: window.clone(),
                            verified: true,
                            basis: residue_basis.clone(),
                        });
                    }
                }
            }
        }
    }
    if tags.contains(&InvariantTag::Cone) {
        if let Some(t) = t_rule(d) {
            if edges.iter().all(|&(n, w, v)| (w - v).unsigned_abs() <= t.at(n)) {
                let basis = if d.bounded_size().is_some() { "BoundedSize" } else { "Banded" };
                out.push(NonReachInvariant {
                    kind: InvariantKind::ConeBound { t },
                    window: window.clone(),
                    verified: true,
                    basis: Some(basis.into()),
                });
            }
        }
    }
    Ok(out)
}

/// Default verification window for vertices of interest: radius 16 around
/// the centre of the indexing, stretched to cover `extra`.
pub fn default_window(d: &DiagramHandle, levels: Level, extra: &[Vertex]) -> LevelWindow {
    let idx = d.indexing();
    let mut win = idx.centered(crate::DEFAULT_RADIUS);
    for v in extra {
        win = win.hull(*v);
    }
    let win = idx.clip(win.widen(2));
    LevelWindow::uniform(idx, levels, win).expect("clipped window respects the indexing")
}

/// Vertices reachable from `v` at any later level of a stationary diagram,
/// or `None` if a column is infinite or the set exceeds `cap`.
pub fn forward_closure(d: &DiagramHandle, v: Vertex, cap: usize) -> Result<Option<BTreeSet<Vertex>>> {
    if !d.is_stationary() {
        return Ok(None);
    }
    let mut seen = BTreeSet::from([v]);
    let mut todo = vec![v];
    while let Some(u) = todo.pop() {
        match d.column_support(0, u)? {
            ColumnSupport::Finite(vs) => {
                for x in vs {
                    if seen.insert(x) {
                        if seen.len() > cap {
                            return Ok(None);
                        }
                        todo.push(x);
                    }
                }
            }
            _ => return Ok(None),
        }
    }
    Ok(Some(seen))
}

fn closure_invariant(d: &DiagramHandle, from: Vertex) -> Result<Option<NonReachInvariant>> {
    Ok(forward_closure(d, from, 256)?.map(|set| NonReachInvariant {
        kind: InvariantKind::ForwardClosed { from, set: set.into_iter().collect() },
        window: "forward closure".into(),
        verified: true,
        basis: Some("stationary exact column supports".into()),
    }))
}

/// Yes with a witness path if `i@n0` reaches `j` within `depth` levels; No
/// if a global invariant rules it out at every depth.
pub fn irreducible_probe(
    d: &DiagramHandle,
    i: Vertex,
    j: Vertex,
    n0: Level,
    depth: usize,
) -> Result<Verdict<FinitePath, NonReachInvariant>> {
    d.check_vertex(n0, i)?;
    d.indexing().check(n0 + 1, j)?;
    for m in n0 + 1..=n0 + depth {
        if d.has_vertex(m, j) && reaches(d, i, n0, j, m)? {
            let path = first_path(d, i, n0, j, m)?.expect("reachable pair has a path");
            return Ok(Verdict::Yes(path));
        }
    }
    let win = default_window(d, 4.max(n0 + 2), &[i, j]);
    for inv in invariant_certificate(d, &win, &[InvariantTag::Triangular, InvariantTag::Residue])? {
        if inv.is_global() && inv.excludes(i, j) {
            return Ok(Verdict::No(inv));
        }
    }
    if let Some(inv) = closure_invariant(d, i)? {
        if inv.excludes(i, j) {
            return Ok(Verdict::No(inv));
        }
    }
    Ok(Verdict::Unknown(Bounds { depth, window: win.describe() }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connected {
    pub vertices: usize,
    pub edges: usize,
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Undirected connectivity of the window truncation on levels `0..=depth`.
pub fn connected_probe(
    d: &DiagramHandle,
    depth: Level,
    win: Interval,
) -> Result<Verdict<Connected, NonReachInvariant>> {
    let mut ids: BTreeMap<(Level, Vertex), usize> = BTreeMap::new();
    for n in 0..=depth {
        for v in d.window_vertices(n, win) {
            let k = ids.len();
            ids.insert((n, v), k);
        }
    }
    let mut dsu = Dsu::new(ids.len());
    let mut edges = 0;
    for n in 0..depth {
        for v in d.window_vertices(n + 1, win) {
            for (w, _) in d.in_edges(n, v)? {
                if let Some(&a) = ids.get(&(n, w)) {
                    dsu.union(a, ids[&(n + 1, v)]);
                    edges += 1;
                }
            }
        }
    }
    let roots: BTreeSet<usize> = (0..ids.len()).map(|x| dsu.find(x)).collect();
    if roots.len() == 1 {
        return Ok(Verdict::Yes(Connected { vertices: ids.len(), edges }));
    }
    let lw = LevelWindow::uniform(d.indexing(), depth.max(1), d.indexing().clip(win))?;
    for inv in invariant_certificate(d, &lw, &[InvariantTag::Clopen])? {
        if inv.is_global() && win.len() >= 2 {
            return Ok(Verdict::No(inv));
        }
    }
    Ok(Verdict::Unknown(Bounds { depth, window: win.to_string() }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Period {
    pub gcd: Option<u64>,
    pub returns: Vec<usize>,
}

/// gcd of the return lengths `m <= horizon` of `i` in a stationary diagram.
pub fn period_of_index(d: &DiagramHandle, i: Vertex, horizon: usize) -> Result<Period> {
    if !d.is_stationary() {
        return Err(GbdError::NotStationary);
    }
    d.check_vertex(0, i)?;
    let mut returns = Vec::new();
    for m in 1..=horizon {
        if reaches(d, i, 0, i, m)? {
            returns.push(m);
        }
    }
    let gcd = returns.iter().fold(None, |acc: Option<u64>, &m| {
        Some(match acc {
            None => m as u64,
            Some(g) => g.gcd(&(m as u64)),
        })
    });
    Ok(Period { gcd, returns })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedSizeParams {
    pub t_lower: u64,
    pub l_lower: u64,
    pub exact: bool,
}

/// Largest source distance and row sum over the rows of `F_n` in `win`.
pub fn bounded_size_params(d: &DiagramHandle, n: Level, win: Interval) -> Result<BoundedSizeParams> {
    let mut t_lower = 0;
    let mut l_lower = 0;
    for v in d.window_vertices(n + 1, win) {
        let row = d.in_edges(n, v)?;
        t_lower = t_lower.max(row.iter().map(|(w, _)| (w - v).unsigned_abs()).max().unwrap_or(0));
        l_lower = l_lower.max(row.iter().map(|(_, m)| m).sum());
    }
    let exact = (d.banded_offsets().is_some() && d.is_stationary())
        || matches!(d.bounded_size(), Some((t, l)) if t.at(n) == t_lower && l.at(n) == l_lower);
    Ok(BoundedSizeParams { t_lower, l_lower, exact })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub interval: Interval,
    pub reach: BTreeSet<Vertex>,
}

/// Lower cone of `v@n` at level `m`: the bound `v +- (t_n + ... + t_{m-1})`
/// and the exact reachable set, which is asserted to lie inside it.
pub fn cone_bound(d: &DiagramHandle, v: Vertex, n: Level, m: Level) -> Result<Cone> {
    let t = t_rule(d).ok_or(GbdError::NoBoundedSizeFlag)?;
    if m < n {
        return Err(GbdError::LevelOrder { from: n, to: m });
    }
    d.check_vertex(n, v)?;
    let span = t.sum(n, m) as i64;
    let interval = Interval::new(v - span, v + span);
    let search = interval.widen(span + 1);
    let mut reach = BTreeSet::from([v]);
    for k in n..m {
        let mut next = BTreeSet::new();
        for u in &reach {
            for (x, _) in d.out_edges_in_window(k, *u, search)? {
                next.insert(x);
            }
        }
        reach = next;
    }
    if let Some(x) = reach.iter().find(|x| !interval.contains(**x)) {
        return Err(GbdError::Invariant(format!(
            "vertex {x} at level {m} is reachable from {v}@{n} but lies outside the cone {interval}"
        )));
    }
    Ok(Cone { interval, reach })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Whether a level-0 prefix satisfies the slanting-set inequalities for
/// `Z_w^+` (or `Z_w^-`) at every index it covers.
pub fn slanting_membership(d: &DiagramHandle, prefix: &FinitePath, w: Vertex, side: Side) -> Result<bool> {
    let t = t_rule(d).ok_or(GbdError::NoBoundedSizeFlag)?;
    prefix.validate(d)?;
    if prefix.start_level != 0 {
        return Err(GbdError::InvalidEdge("slanting prefixes start at level 0".into()));
    }
    let ok_start = match side {
        Side::Plus => prefix.start >= w,
        Side::Minus => prefix.start <= w,
    };
    if !ok_start {
        return Ok(false);
    }
    for (k, e) in prefix.edges.iter().enumerate() {
        let bound = t.sum(0, k + 1) as i64;
        let ok = match side {
            Side::Plus => e.target >= w + bound,
            Side::Minus => e.target <= w - bound,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IrreducibilityClass {
    CertifiedCompletelyIrreducible(String),
    CertifiedRelativelyIrreducible(String),
    Unknown(String),
}

impl IrreducibilityClass {
    pub fn label(&self) -> &'static str {
        match self {
            IrreducibilityClass::CertifiedCompletelyIrreducible(_) => "completely_irreducible",
            IrreducibilityClass::CertifiedRelativelyIrreducible(_) => "relatively_irreducible",
            IrreducibilityClass::Unknown(_) => "unknown",
        }
    }

    pub fn evidence(&self) -> &str {
        match self {
            IrreducibilityClass::CertifiedCompletelyIrreducible(e)
            | IrreducibilityClass::CertifiedRelativelyIrreducible(e)
            | IrreducibilityClass::Unknown(e) => e,
        }
    }
}

/// A global invariant showing the diagram itself is reducible.
pub fn reducibility_certificate(d: &DiagramHandle, win: &LevelWindow) -> Result<Option<NonReachInvariant>> {
    for inv in invariant_certificate(d, win, &[InvariantTag::Triangular, InvariantTag::Residue])? {
        if !inv.is_global() {
            continue;
        }
        let reducing = match &inv.kind {
            InvariantKind::TriangularSupport { .. } => true,
            InvariantKind::ResidueClass { p, a } => a.gcd(p) > 1,
            _ => false,
        };
        if reducing {
            return Ok(Some(inv));
        }
    }
    let lvl0 = win.at(0);
    for v in d.window_vertices(0, lvl0) {
        if let Some(inv) = closure_invariant(d, v)? {
            return Ok(Some(inv));
        }
    }
    Ok(None)
}

/// Completely vs relatively irreducible, from sufficient conditions only.
pub fn classify_irreducibility_type(
    d: &DiagramHandle,
    horizon: usize,
    win: Interval,
) -> Result<IrreducibilityClass> {
    let levels = 4;
    let lw = LevelWindow::uniform(d.indexing(), levels, d.indexing().clip(win))?;
    if let Some(inv) = reducibility_certificate(d, &lw)? {
        return Ok(IrreducibilityClass::CertifiedRelativelyIrreducible(format!(
            "reducible: {} [{}]",
            inv,
            inv.basis.as_deref().unwrap_or("")
        )));
    }
    let full = full_out_row_check(d, levels, win)?;
    let us: Vec<Vertex> = full.iter().filter_map(|v| v.yes().copied()).collect();
    if us.len() == full.len() {
        if let Some(&u) = us.first() {
            let mut all = true;
            for w in d.window_vertices(0, win) {
                let mut hit = false;
                for m in 0..=horizon {
                    if d.has_vertex(m, u) && reaches(d, w, 0, u, m)? {
                        hit = true;
                        break;
                    }
                }
                if !hit {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(IrreducibilityClass::CertifiedCompletelyIrreducible(format!(
                    "vertex {u} has an edge to every vertex below at levels 0..={levels}; \
                     every vertex of {win} reaches it within {horizon} levels"
                )));
            }
        }
    }
    for v in d.window_vertices(0, win) {
        let c = FinitePath::empty(0, v);
        if let Verdict::Yes(why) = compact_cylinder_check(d, &c, horizon)? {
            return Ok(IrreducibilityClass::CertifiedRelativelyIrreducible(format!(
                "cylinder at {v} has a compact neighbourhood: {why}"
            )));
        }
    }
    Ok(IrreducibilityClass::Unknown(format!("horizon {horizon} window {win}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;

    #[test]
    fn parity_residues() {
        let w = default_window(&catalog::parity_1(), 4, &[]);
        let invs = invariant_certificate(&catalog::parity_1(), &w, &[InvariantTag::Residue]).unwrap();
        assert!(invs.iter().any(|i| i.kind == InvariantKind::ResidueClass { p: 2, a: 1 }));
        let invs = invariant_certificate(&catalog::parity_2(), &w, &[InvariantTag::Residue]).unwrap();
        assert!(invs.iter().any(|i| i.kind == InvariantKind::ResidueClass { p: 2, a: 0 }));
        let t = invariant_certificate(&catalog::tridiag_b(), &w, &[InvariantTag::Triangular, InvariantTag::Residue])
            .unwrap();
        assert!(t.is_empty(), "{t:?}");
    }

    #[test]
    fn periods() {
        let p = period_of_index(&catalog::parity_1(), 0, 6).unwrap();
        assert_eq!(p.gcd, Some(2));
        assert_eq!(period_of_index(&catalog::tridiag_b(), 0, 3).unwrap().gcd, Some(1));
        assert_eq!(period_of_index(&catalog::renewal_shift(), 1, 4).unwrap().gcd, Some(1));
    }

    #[test]
    fn cones_and_slants() {
        let c = cone_bound(&catalog::tridiag_b(), 0, 0, 3).unwrap();
        assert_eq!(c.interval, Interval::new(-3, 3));
        assert_eq!(c.reach, (-3..=3).collect());
        let c = cone_bound(&catalog::parity_1(), 0, 0, 2).unwrap();
        assert_eq!(c.interval, Interval::new(-2, 2));
        assert_eq!(c.reach, BTreeSet::from([-2, 0, 2]));
        assert_eq!(cone_bound(&catalog::renewal_shift(), 1, 0, 2), Err(GbdError::NoBoundedSizeFlag));

        let d = catalog::tridiag_b();
        let up = FinitePath::through(0, &[4, 5, 6]).unwrap();
        assert!(slanting_membership(&d, &up, 4, Side::Plus).unwrap());
        let flat = FinitePath::through(0, &[4, 4]).unwrap();
        assert!(!slanting_membership(&d, &flat, 4, Side::Plus).unwrap());
        let down = FinitePath::through(0, &[4, 3, 2]).unwrap();
        assert!(slanting_membership(&d, &down, 4, Side::Minus).unwrap());
    }

    #[test]
    fn bounded_size_examples() {
        let p = bounded_size_params(&catalog::tridiag_b(), 3, Interval::new(-5, 5)).unwrap();
        assert_eq!(p, BoundedSizeParams { t_lower: 1, l_lower: 4, exact: true });
        let p = bounded_size_params(&catalog::renewal_shift(), 0, Interval::new(1, 9)).unwrap();
        assert_eq!(p, BoundedSizeParams { t_lower: 8, l_lower: 2, exact: false });
    }
}
