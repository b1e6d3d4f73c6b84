//! Vertex bijection sequences, relabeled diagrams and windowed isomorphism.
//!
//! Relabeling by `(g_n)` gives the diagram with
//! `f'_{g_{n+1}(v), g_n(w)} = f_{vw}`. Parallel edges keep their copy index.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::Value;

use crate::error::{GbdError, Result};
use crate::model::catalog::banded_flags;
use crate::model::{
    parse_level_rule, ColumnSupport, DiagramHandle, Flag, Interval, Level, LevelRule, Mult, Rule,
    Vertex, VertexIndexing,
};

/// Per-level additive constant `c_n` of an affine shift `i -> i + c_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ShiftRule {
    Constant(i64),
    /// `c_n = k * n`.
    PerLevel(i64),
    /// `c_n = -(t_0 + ... + t_{n-1})`.
    Cumulative(LevelRule),
    /// Explicit constants; the last one repeats.
    Explicit(Vec<i64>),
}

impl ShiftRule {
    pub fn at(&self, n: Level) -> i64 {
        match self {
            ShiftRule::Constant(c) => *c,
            ShiftRule::PerLevel(k) => k * n as i64,
            ShiftRule::Cumulative(t) => -(t.sum(0, n) as i64),
            ShiftRule::Explicit(cs) => cs.get(n).or(cs.last()).copied().unwrap_or(0),
        }
    }

    /// `c_{n+1} - c_n` when it does not depend on `n`.
    pub fn step(&self) -> Option<i64> {
        match self {
            ShiftRule::Constant(_) => Some(0),
            ShiftRule::PerLevel(k) => Some(*k),
            ShiftRule::Cumulative(t) => t.as_constant().map(|c| -(c as i64)),
            ShiftRule::Explicit(cs) => cs.windows(2).all(|w| w[0] == w[1]).then_some(0),
        }
    }
}

/// Pinned values of one level of a table-plus-fill bijection.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LevelTable {
    pins: BTreeMap<Vertex, Vertex>,
    rev: BTreeMap<Vertex, Vertex>,
    /// Canonical indices of pinned sources, ascending.
    src_idx: Vec<u64>,
    /// Canonical indices of pinned targets, ascending.
    tgt_idx: Vec<u64>,
}

impl LevelTable {
    fn new(
        level: Level,
        pins: BTreeMap<Vertex, Vertex>,
        source: VertexIndexing,
        target: VertexIndexing,
    ) -> Result<Self> {
        let mut rev = BTreeMap::new();
        for (&v, &t) in &pins {
            source.check(level, v)?;
            target.check(level, t)?;
            if let Some(prev) = rev.insert(t, v) {
                return Err(GbdError::Conflict(format!(
                    "label {t} at level {level} pinned for both {prev} and {v}"
                )));
            }
        }
        let mut src_idx: Vec<u64> = pins.keys().map(|v| source.canonical_index(*v)).collect();
        let mut tgt_idx: Vec<u64> = rev.keys().map(|t| target.canonical_index(*t)).collect();
        src_idx.sort_unstable();
        tgt_idx.sort_unstable();
        Ok(LevelTable { pins, rev, src_idx, tgt_idx })
    }

    pub fn pins(&self) -> &BTreeMap<Vertex, Vertex> {
        &self.pins
    }
}

/// The `rank`-th (0-based) canonical index not in `taken` (ascending).
fn nth_free(rank: u64, taken: &[u64]) -> u64 {
    let mut k = rank;
    for &p in taken {
        if p <= k {
            k += 1;
        } else {
            break;
        }
    }
    k
}

fn free_rank(idx: u64, taken: &[u64]) -> u64 {
    idx - taken.partition_point(|&p| p < idx) as u64
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BijectionKind {
    Identity,
    Shift(ShiftRule),
    /// `v -> 2v` for `v >= 0`, `v -> -2v - 1` for `v < 0`.
    Interleave,
    /// Pinned values per level; every other vertex takes the smallest unused
    /// label in canonical order. Levels past the table have no pins.
    TableFill(Vec<LevelTable>),
    Inverse(Box<VertexBijectionSeq>),
}

/// A sequence of bijections `g_n : V_n -> V'_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexBijectionSeq {
    kind: BijectionKind,
    source: VertexIndexing,
    target: VertexIndexing,
}

impl VertexBijectionSeq {
    pub fn identity(indexing: VertexIndexing) -> Self {
        VertexBijectionSeq { kind: BijectionKind::Identity, source: indexing, target: indexing }
    }

    pub fn interleave() -> Self {
        VertexBijectionSeq {
            kind: BijectionKind::Interleave,
            source: VertexIndexing::TwoSided,
            target: VertexIndexing::OneSidedFrom(0),
        }
    }

    /// Affine shift on two-sided levels.
    pub fn shift(rule: ShiftRule) -> Self {
        VertexBijectionSeq {
            kind: BijectionKind::Shift(rule),
            source: VertexIndexing::TwoSided,
            target: VertexIndexing::TwoSided,
        }
    }

    /// `g_n(i) = i + k n`.
    pub fn level_shift(k: i64) -> Self {
        Self::shift(ShiftRule::PerLevel(k))
    }

    /// `g_n(v) = v - (t_0 + ... + t_{n-1})`.
    pub fn cone_shift(t: LevelRule) -> Self {
        Self::shift(ShiftRule::Cumulative(t))
    }

    pub fn table_fill(
        source: VertexIndexing,
        target: VertexIndexing,
        pins: Vec<BTreeMap<Vertex, Vertex>>,
    ) -> Result<Self> {
        let tables = pins
            .into_iter()
            .enumerate()
            .map(|(n, p)| LevelTable::new(n, p, source, target))
            .collect::<Result<Vec<_>>>()?;
        Ok(VertexBijectionSeq { kind: BijectionKind::TableFill(tables), source, target })
    }

    pub fn kind(&self) -> &BijectionKind {
        &self.kind
    }

    pub fn source(&self) -> VertexIndexing {
        self.source
    }

    pub fn target(&self) -> VertexIndexing {
        self.target
    }

    pub fn inverse_seq(&self) -> Self {
        match &self.kind {
            BijectionKind::Inverse(inner) => (**inner).clone(),
            BijectionKind::Identity => self.clone(),
            _ => VertexBijectionSeq {
                kind: BijectionKind::Inverse(Box::new(self.clone())),
                source: self.target,
                target: self.source,
            },
        }
    }

    /// True when `g_n` is the same map at every level.
    pub fn is_level_uniform(&self) -> bool {
        match &self.kind {
            BijectionKind::Identity | BijectionKind::Interleave => true,
            BijectionKind::Shift(r) => r.step() == Some(0),
            BijectionKind::TableFill(t) => t.iter().all(|l| l.pins.is_empty()),
            BijectionKind::Inverse(inner) => inner.is_level_uniform(),
        }
    }

    pub fn forward(&self, n: Level, v: Vertex) -> Result<Vertex> {
        self.source.check(n, v)?;
        Ok(match &self.kind {
            BijectionKind::Identity => v,
            BijectionKind::Shift(r) => v + r.at(n),
            BijectionKind::Interleave => {
                if v >= 0 {
                    2 * v
                } else {
                    -2 * v - 1
                }
            }
            BijectionKind::TableFill(tables) => match tables.get(n) {
                Some(t) => match t.pins.get(&v) {
                    Some(x) => *x,
                    None => {
                        let rank = free_rank(self.source.canonical_index(v), &t.src_idx);
                        self.target.from_canonical_index(nth_free(rank, &t.tgt_idx))
                    }
                },
                None => self.target.from_canonical_index(self.source.canonical_index(v)),
            },
            BijectionKind::Inverse(inner) => inner.inverse(n, v)?,
        })
    }

    pub fn inverse(&self, n: Level, v: Vertex) -> Result<Vertex> {
        self.target.check(n, v)?;
        Ok(match &self.kind {
            BijectionKind::Identity => v,
            BijectionKind::Shift(r) => v - r.at(n),
            BijectionKind::Interleave => {
                if v % 2 == 0 {
                    v / 2
                } else {
                    -(v + 1) / 2
                }
            }
            BijectionKind::TableFill(tables) => match tables.get(n) {
                Some(t) => match t.rev.get(&v) {
                    Some(x) => *x,
                    None => {
                        let rank = free_rank(self.target.canonical_index(v), &t.tgt_idx);
                        self.source.from_canonical_index(nth_free(rank, &t.src_idx))
                    }
                },
                None => self.source.from_canonical_index(self.target.canonical_index(v)),
            },
            BijectionKind::Inverse(inner) => inner.forward(n, v)?,
        })
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            BijectionKind::Identity => "identity".into(),
            BijectionKind::Shift(ShiftRule::Constant(c)) => format!("shift({c})"),
            BijectionKind::Shift(ShiftRule::PerLevel(k)) => format!("level_shift({k})"),
            BijectionKind::Shift(ShiftRule::Cumulative(t)) => format!("cone_shift({t:?})"),
            BijectionKind::Shift(ShiftRule::Explicit(cs)) => format!("explicit_shift({cs:?})"),
            BijectionKind::Interleave => "interleave".into(),
            BijectionKind::TableFill(t) => {
                let pins: usize = t.iter().map(|l| l.pins.len()).sum();
                format!("table_fill({} levels, {pins} pins)", t.len())
            }
            BijectionKind::Inverse(inner) => format!("inverse({})", inner.describe()),
        }
    }
}

impl fmt::Display for VertexBijectionSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

fn param_int(p: &Value, key: &str, default: Option<i64>) -> Result<i64> {
    match p.get(key) {
        Some(v) => v.as_i64().ok_or_else(|| GbdError::Schema(format!("{key} must be an integer"))),
        None => default.ok_or_else(|| GbdError::Schema(format!("missing parameter {key}"))),
    }
}

fn param_indexing(p: &Value, key: &str, default: VertexIndexing) -> Result<VertexIndexing> {
    match p.get(key) {
        Some(v) => crate::model::parse_indexing(v),
        None => Ok(default),
    }
}

fn parse_pins(v: &Value) -> Result<Vec<BTreeMap<Vertex, Vertex>>> {
    let levels =
        v.as_array().ok_or_else(|| GbdError::Schema("tables must be a list of maps".into()))?;
    levels
        .iter()
        .map(|lvl| {
            let m = lvl
                .as_object()
                .ok_or_else(|| GbdError::Schema("each table must be a map".into()))?;
            m.iter()
                .map(|(k, x)| {
                    let v: Vertex = k
                        .trim()
                        .parse()
                        .map_err(|_| GbdError::Schema(format!("table key {k:?}")))?;
                    let t = x
                        .as_i64()
                        .ok_or_else(|| GbdError::Schema("table values must be integers".into()))?;
                    Ok((v, t))
                })
                .collect()
        })
        .collect()
}

/// Named bijection sequences: `identity`, `interleave`, `shift {c}`,
/// `level_shift {k}`, `cone_shift {t}`, `explicit_shift {c: [..]}`,
/// `swap {level, a, b}` and `table {source, target, tables}`.
pub fn builtin_bijection(kind: &str, params: &Value) -> Result<VertexBijectionSeq> {
    let empty = Value::Object(Default::default());
    let p = if params.is_null() { &empty } else { params };
    match kind {
        "identity" => Ok(VertexBijectionSeq::identity(param_indexing(
            p,
            "indexing",
            VertexIndexing::TwoSided,
        )?)),
        "interleave" => Ok(VertexBijectionSeq::interleave()),
        "shift" => Ok(VertexBijectionSeq::shift(ShiftRule::Constant(param_int(p, "c", None)?))),
        "level_shift" => Ok(VertexBijectionSeq::level_shift(param_int(p, "k", Some(1))?)),
        "cone_shift" => {
            let t = match p.get("t") {
                Some(v) => parse_level_rule(v)?,
                None => return Err(GbdError::Schema("cone_shift needs t".into())),
            };
            Ok(VertexBijectionSeq::cone_shift(t))
        }
        "explicit_shift" => {
            let cs = p
                .get("c")
                .and_then(Value::as_array)
                .ok_or_else(|| GbdError::Schema("explicit_shift needs a list c".into()))?
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| GbdError::Schema("c entries".into())))
                .collect::<Result<Vec<_>>>()?;
            Ok(VertexBijectionSeq::shift(ShiftRule::Explicit(cs)))
        }
        "swap" => {
            let idx = param_indexing(p, "indexing", VertexIndexing::TwoSided)?;
            let level = param_int(p, "level", None)?;
            let a = param_int(p, "a", None)?;
            let b = param_int(p, "b", None)?;
            if level < 0 {
                return Err(GbdError::Schema("swap level must be nonnegative".into()));
            }
            let mut pins = vec![BTreeMap::new(); level as usize + 1];
            pins[level as usize] = BTreeMap::from([(a, b), (b, a)]);
            VertexBijectionSeq::table_fill(idx, idx, pins)
        }
        "table" => {
            let source = param_indexing(p, "source", VertexIndexing::TwoSided)?;
            let target = param_indexing(p, "target", source)?;
            let pins = match p.get("tables") {
                Some(v) => parse_pins(v)?,
                None => Vec::new(),
            };
            VertexBijectionSeq::table_fill(source, target, pins)
        }
        other => Err(GbdError::UnknownKind(format!("bijection {other:?}"))),
    }
}

/// The diagram `d'` with `in_edges(d', n, v') = g_n(in_edges(d, n, g_{n+1}^{-1}(v')))`.
/// Flags are recomputed for the new labels.
pub fn relabel(d: &DiagramHandle, g: &VertexBijectionSeq) -> Result<DiagramHandle> {
    if g.source != d.indexing() {
        return Err(GbdError::IndexingMismatch {
            expected: d.indexing().to_string(),
            found: g.source.to_string(),
        });
    }
    let mut flags = Vec::new();
    let mut stationary = d.is_stationary() && g.is_level_uniform();
    match &g.kind {
        BijectionKind::Identity => {
            flags = d.flags().to_vec();
        }
        BijectionKind::Shift(rule) => {
            match (d.banded_offsets(), rule.step()) {
                (Some(offsets), Some(k)) if d.is_stationary() => {
                    let shifted: BTreeMap<i64, Mult> =
                        offsets.iter().map(|(o, m)| (o - k, *m)).collect();
                    flags = banded_flags(&shifted, g.target);
                    stationary = true;
                }
                _ => {}
            }
            if let (ShiftRule::Cumulative(t), Some((bt, _))) = (rule, d.bounded_size()) {
                if t == bt && !flags.contains(&Flag::UpperTriangularSupport) {
                    flags.push(Flag::UpperTriangularSupport);
                }
            }
        }
        _ => {}
    }
    if g.is_level_uniform() {
        for f in d.flags() {
            if let Flag::FullOutColumn(u) = f {
                let fu = Flag::FullOutColumn(g.forward(0, *u)?);
                if !flags.contains(&fu) {
                    flags.push(fu);
                }
            }
        }
    }
    DiagramHandle::build(
        format!("{} relabeled by {}", d.name(), g.describe()),
        g.target,
        Rule::Relabeled { base: d.clone(), map: g.clone() },
        stationary,
        flags,
    )
}

/// Checks `F'_n = P_n F_n P_{n+1}^T` row by row: for `n <= max_level` and
/// every row `v'` of `b` in `rows`, row `v'` of `b` must equal the
/// `g`-image of row `g_{n+1}^{-1}(v')` of `a`. Both rows must lie inside
/// `cols`, otherwise the window cannot decide and `WindowTooSmall` is
/// returned.
pub fn verify_permutation_identity(
    a: &DiagramHandle,
    b: &DiagramHandle,
    g: &VertexBijectionSeq,
    max_level: Level,
    rows: Interval,
    cols: Interval,
) -> Result<bool> {
    for (d, idx, side) in [(a, g.source, "source"), (b, g.target, "target")] {
        if d.indexing() != idx {
            return Err(GbdError::IndexingMismatch {
                expected: format!("{} of the bijection", side),
                found: d.indexing().to_string(),
            });
        }
    }
    for n in 0..=max_level {
        for vp in b.window_vertices(n + 1, rows) {
            let row_b = b.in_edges(n, vp)?;
            if let Some((w, _)) = row_b.iter().find(|(w, _)| !cols.contains(*w)) {
                return Err(GbdError::WindowTooSmall { level: n, vertex: *w });
            }
            let v = g.inverse(n + 1, vp)?;
            if !a.has_vertex(n + 1, v) {
                return Ok(false);
            }
            let mut mapped = Vec::new();
            for (w, m) in a.in_edges(n, v)? {
                let wp = g.forward(n, w)?;
                if !cols.contains(wp) {
                    return Err(GbdError::WindowTooSmall { level: n, vertex: wp });
                }
                mapped.push((wp, m));
            }
            mapped.sort_unstable();
            if mapped != row_b {
                return Ok(false);
            }
        }
        for vp in b.window_vertices(n + 1, rows) {
            let v = g.inverse(n + 1, vp)?;
            if g.forward(n + 1, v)? != vp {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Bijection tables found by [`iso_search`], restricted to the windows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoWitness {
    /// `tables[n]` maps window vertices of `a` at level `n` to `b`.
    pub tables: Vec<BTreeMap<Vertex, Vertex>>,
    pub depth: Level,
    pub window_a: Interval,
    pub window_b: Interval,
    /// Rows compared exactly while searching.
    pub verified_rows: usize,
}

impl IsoWitness {
    /// The tables as a total bijection sequence (canonical fill elsewhere).
    pub fn bijection(&self, source: VertexIndexing, target: VertexIndexing) -> Result<VertexBijectionSeq> {
        VertexBijectionSeq::table_fill(source, target, self.tables.clone())
    }

    /// Re-checks every row whose sources are all tabled on both sides.
    /// Returns the number of rows compared, or `None` on a mismatch.
    pub fn recheck(&self, a: &DiagramHandle, b: &DiagramHandle) -> Result<Option<usize>> {
        let mut compared = 0;
        for n in 0..self.depth {
            let lower = &self.tables[n];
            let lower_img: BTreeSet<Vertex> = lower.values().copied().collect();
            for (&v, &vp) in &self.tables[n + 1] {
                let row_a = a.in_edges(n, v)?;
                let row_b = b.in_edges(n, vp)?;
                if row_a.iter().all(|(w, _)| lower.contains_key(w))
                    && row_b.iter().all(|(w, _)| lower_img.contains(w))
                {
                    let mut mapped: Vec<(Vertex, Mult)> =
                        row_a.iter().map(|(w, m)| (lower[w], *m)).collect();
                    mapped.sort_unstable();
                    if mapped != row_b {
                        return Ok(None);
                    }
                    compared += 1;
                }
            }
        }
        Ok(Some(compared))
    }

    /// Structured-text export: one line per level, `level: v->g(v) ...`.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (n, t) in self.tables.iter().enumerate() {
            let pairs: Vec<String> = t.iter().map(|(v, x)| format!("{v}->{x}")).collect();
            out.push_str(&format!("level {n}: {}\n", pairs.join(" ")));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoSearchResult {
    Witness(IsoWitness),
    /// Not a proof of non-isomorphism.
    NoneWithinBudget { nodes: u64, reason: String },
}

type Sig = (Vec<Mult>, bool);

struct RowInfo {
    v: Vertex,
    inside: Vec<(Vertex, Mult)>,
    sig: Sig,
}

fn row_info(d: &DiagramHandle, n: Level, v: Vertex, win: Interval) -> Result<RowInfo> {
    let row = d.in_edges(n, v)?;
    let inside: Vec<(Vertex, Mult)> = row.iter().copied().filter(|(w, _)| win.contains(*w)).collect();
    let mut mults: Vec<Mult> = inside.iter().map(|(_, m)| *m).collect();
    mults.sort_unstable();
    let complete = inside.len() == row.len();
    Ok(RowInfo { v, inside, sig: (mults, complete) })
}

fn near_key(v: Vertex) -> (u64, Vertex) {
    (v.unsigned_abs(), v)
}

#[derive(Clone)]
struct State {
    maps: Vec<BTreeMap<Vertex, Vertex>>,
    used: Vec<BTreeSet<Vertex>>,
}

struct Search {
    rows_a: Vec<Vec<RowInfo>>,
    rows_b: Vec<Vec<RowInfo>>,
    level0_a: Vec<Vertex>,
    level0_b: Vec<Vertex>,
    budget: u64,
    nodes: Cell<u64>,
    exhausted: Cell<bool>,
}

impl Search {
    /// Pairs the in-window sources of two rows level by level, extending the
    /// map at `level` greedily within each multiplicity group.
    fn unify(&self, st: &mut State, level: Level, a: &RowInfo, b: &RowInfo) -> bool {
        let mut groups: BTreeMap<Mult, (Vec<Vertex>, Vec<Vertex>)> = BTreeMap::new();
        for (w, m) in &a.inside {
            groups.entry(*m).or_default().0.push(*w);
        }
        for (w, m) in &b.inside {
            groups.entry(*m).or_default().1.push(*w);
        }
        for (_, (mut ga, mut gb)) in groups {
            if ga.len() != gb.len() {
                return false;
            }
            ga.sort_by_key(|w| near_key(*w));
            gb.sort_by_key(|w| near_key(*w));
            let mut free_b: Vec<Vertex> = Vec::new();
            let images: BTreeSet<Vertex> =
                ga.iter().filter_map(|w| st.maps[level].get(w).copied()).collect();
            for img in &images {
                if !gb.contains(img) {
                    return false;
                }
            }
            for wb in &gb {
                if !images.contains(wb) {
                    if st.used[level].contains(wb) {
                        return false;
                    }
                    free_b.push(*wb);
                }
            }
            let free_a: Vec<Vertex> =
                ga.iter().copied().filter(|w| !st.maps[level].contains_key(w)).collect();
            for (wa, wb) in free_a.into_iter().zip(free_b) {
                st.maps[level].insert(wa, wb);
                st.used[level].insert(wb);
            }
        }
        true
    }

    fn fill_level0(&self, st: &mut State) -> bool {
        let mut free_b = self.level0_b.iter().filter(|w| !st.used[0].contains(w));
        for w in &self.level0_a {
            if !st.maps[0].contains_key(w) {
                match free_b.next() {
                    Some(x) => {
                        st.maps[0].insert(*w, *x);
                    }
                    None => return false,
                }
            }
        }
        for x in self.level0_b.iter() {
            st.used[0].insert(*x);
        }
        true
    }

    fn run(&self, st: State, level: usize, i: usize) -> Option<State> {
        if level == self.rows_a.len() {
            return Some(st);
        }
        if i == self.rows_a[level].len() {
            let mut st = st;
            if level == 0 && !self.fill_level0(&mut st) {
                return None;
            }
            return self.run(st, level + 1, 0);
        }
        let ra = &self.rows_a[level][i];
        for rb in &self.rows_b[level] {
            if rb.sig != ra.sig || st.used[level + 1].contains(&rb.v) {
                continue;
            }
            self.nodes.set(self.nodes.get() + 1);
            if self.nodes.get() > self.budget {
                self.exhausted.set(true);
                return None;
            }
            let mut next = st.clone();
            if !self.unify(&mut next, level, ra, rb) {
                continue;
            }
            next.maps[level + 1].insert(ra.v, rb.v);
            next.used[level + 1].insert(rb.v);
            if let Some(done) = self.run(next, level, i + 1) {
                return Some(done);
            }
            if self.exhausted.get() {
                return None;
            }
        }
        None
    }
}

/// Backtracking search for level bijections `win_a -> win_b` on levels
/// `0..=depth` matching every windowed row of `F_0 .. F_{depth-1}`.
/// Candidate images are tried nearest to 0 first.
pub fn iso_search(
    a: &DiagramHandle,
    b: &DiagramHandle,
    depth: Level,
    win_a: Interval,
    win_b: Interval,
    budget: u64,
) -> Result<IsoSearchResult> {
    let mut rows_a = Vec::new();
    let mut rows_b = Vec::new();
    for n in 0..depth {
        let order = |d: &DiagramHandle, win: Interval| {
            let idx = d.indexing();
            let mut vs = d.window_vertices(n + 1, win);
            vs.sort_by_key(|v| idx.canonical_index(*v));
            vs
        };
        let ra: Vec<RowInfo> = order(a, win_a)
            .into_iter()
            .map(|v| row_info(a, n, v, win_a))
            .collect::<Result<_>>()?;
        let mut rb: Vec<RowInfo> = order(b, win_b)
            .into_iter()
            .map(|v| row_info(b, n, v, win_b))
            .collect::<Result<_>>()?;
        rb.sort_by_key(|r| near_key(r.v));
        let mut sa: Vec<&Sig> = ra.iter().map(|r| &r.sig).collect();
        let mut sb: Vec<&Sig> = rb.iter().map(|r| &r.sig).collect();
        sa.sort();
        sb.sort();
        if sa != sb {
            return Ok(IsoSearchResult::NoneWithinBudget {
                nodes: 0,
                reason: format!("windowed row signatures of F_{n} differ"),
            });
        }
        rows_a.push(ra);
        rows_b.push(rb);
    }
    let level0_a = a.window_vertices(0, win_a);
    let mut level0_b = b.window_vertices(0, win_b);
    if level0_a.len() != level0_b.len() {
        return Ok(IsoSearchResult::NoneWithinBudget {
            nodes: 0,
            reason: "level 0 windows have different sizes".into(),
        });
    }
    level0_b.sort_by_key(|v| near_key(*v));
    let search = Search {
        rows_a,
        rows_b,
        level0_a,
        level0_b,
        budget,
        nodes: Cell::new(0),
        exhausted: Cell::new(false),
    };
    let start = State {
        maps: vec![BTreeMap::new(); depth + 1],
        used: vec![BTreeSet::new(); depth + 1],
    };
    match search.run(start, 0, 0) {
        Some(mut st) => {
            if depth == 0 {
                search.fill_level0(&mut st);
            }
            let verified_rows = search.rows_a.iter().map(Vec::len).sum();
            Ok(IsoSearchResult::Witness(IsoWitness {
                tables: st.maps,
                depth,
                window_a: win_a,
                window_b: win_b,
                verified_rows,
            }))
        }
        None => Ok(IsoSearchResult::NoneWithinBudget {
            nodes: search.nodes.get(),
            reason: if search.exhausted.get() {
                "node budget exhausted".into()
            } else {
                "search space exhausted on the windows".into()
            },
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumMode {
    Row,
    Col,
}

/// Row sum (always exact) or windowed column sum of `F_n`; a column sum is
/// exact iff the column's targets are known to lie inside `win`.
pub fn row_col_sum(
    d: &DiagramHandle,
    n: Level,
    mode: SumMode,
    index: Vertex,
    win: Interval,
) -> Result<(u64, bool)> {
    match mode {
        SumMode::Row => Ok((d.in_edges(n, index)?.iter().map(|(_, m)| m).sum(), true)),
        SumMode::Col => {
            let sum = d.out_edges_in_window(n, index, win)?.iter().map(|(_, m)| m).sum();
            let exact = match d.column_support(n, index)? {
                ColumnSupport::Finite(vs) => vs.iter().all(|v| win.contains(*v)),
                _ => false,
            };
            Ok((sum, exact))
        }
    }
}

/// The common row sum of `F_n` over `win`, if all rows agree.
pub fn equal_row_sum(d: &DiagramHandle, n: Level, win: Interval) -> Result<Option<u64>> {
    let mut common = None;
    for v in d.window_vertices(n + 1, win) {
        let (s, _) = row_col_sum(d, n, SumMode::Row, v, win)?;
        match common {
            None => common = Some(s),
            Some(c) if c != s => return Ok(None),
            Some(_) => {}
        }
    }
    Ok(common)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;

    #[test]
    fn builtin_examples() {
        let g = VertexBijectionSeq::interleave();
        assert_eq!(g.forward(0, -2).unwrap(), 3);
        assert_eq!(g.forward(5, 3).unwrap(), 6);
        assert_eq!(g.inverse(0, 3).unwrap(), -2);
        let s = builtin_bijection("level_shift", &serde_json::json!({"k": 1})).unwrap();
        assert_eq!(s.forward(3, 5).unwrap(), 8);
        let c = builtin_bijection("cone_shift", &serde_json::json!({"t": 0})).unwrap();
        for n in 0..5 {
            assert_eq!(c.forward(n, -7).unwrap(), -7);
        }
        assert!(matches!(
            builtin_bijection("mirror", &Value::Null),
            Err(GbdError::UnknownKind(_))
        ));
    }

    #[test]
    fn table_fill_is_bijective_with_canonical_fill() {
        let pins = vec![BTreeMap::from([(5, 0), (-1, 3)]), BTreeMap::new()];
        let g = VertexBijectionSeq::table_fill(
            VertexIndexing::TwoSided,
            VertexIndexing::OneSidedFrom(0),
            pins,
        )
        .unwrap();
        let images: BTreeSet<Vertex> = (-30..=30).map(|v| g.forward(0, v).unwrap()).collect();
        assert_eq!(images.len(), 61);
        for v in -30..=30 {
            assert_eq!(g.inverse(0, g.forward(0, v).unwrap()).unwrap(), v);
        }
        assert_eq!(g.forward(0, 0).unwrap(), 1);
        assert_eq!(g.forward(0, 1).unwrap(), 2);
        assert_eq!(g.forward(0, 2).unwrap(), 4);
        assert_eq!(g.forward(1, 1).unwrap(), 1);
    }

    #[test]
    fn interleave_relabel_matches_bprime_entries() {
        let d = relabel(&catalog::tridiag_b(), &VertexBijectionSeq::interleave()).unwrap();
        for (v, w, m) in [(0, 0, 2), (1, 1, 2), (0, 1, 1), (0, 2, 1), (1, 0, 1), (1, 3, 1), (2, 0, 1), (3, 1, 1)] {
            assert_eq!(d.mult(2, v, w).unwrap(), m, "f'_{v}{w}");
        }
    }

    #[test]
    fn iso_search_recovers_interleave() {
        let a = catalog::tridiag_b();
        let b = catalog::interleaved_bprime();
        let r = 8;
        let res = iso_search(
            &a,
            &b,
            3,
            a.indexing().centered(r),
            b.indexing().centered(r),
            1_000_000,
        )
        .unwrap();
        let IsoSearchResult::Witness(w) = res else { panic!("{res:?}") };
        let g = VertexBijectionSeq::interleave();
        for t in &w.tables {
            for (v, x) in t {
                assert_eq!(g.forward(0, *v).unwrap(), *x);
            }
        }
        assert!(w.recheck(&a, &b).unwrap().unwrap() > 0);
    }

    #[test]
    fn iso_search_rejects_renewal_vs_binfinity() {
        let a = catalog::renewal_shift();
        let b = catalog::b_infinity();
        let res = iso_search(&a, &b, 2, a.indexing().centered(8), b.indexing().centered(8), 10_000)
            .unwrap();
        assert!(matches!(res, IsoSearchResult::NoneWithinBudget { .. }));
    }

    #[test]
    fn row_sums() {
        let win = Interval::new(-5, 5);
        assert_eq!(row_col_sum(&catalog::tridiag_b(), 0, SumMode::Row, 3, win).unwrap(), (4, true));
        assert_eq!(equal_row_sum(&catalog::tridiag_b(), 0, win).unwrap(), Some(4));
        let rs = catalog::renewal_shift();
        assert_eq!(equal_row_sum(&rs, 0, Interval::new(1, 9)).unwrap(), Some(2));
        assert_eq!(row_col_sum(&rs, 0, SumMode::Col, 1, Interval::new(1, 9)).unwrap(), (9, false));
        assert_eq!(row_col_sum(&rs, 0, SumMode::Col, 4, Interval::new(1, 9)).unwrap(), (1, true));
        let bi = catalog::b_infinity();
        assert_eq!(row_col_sum(&bi, 0, SumMode::Row, 7, win).unwrap(), (7, true));
        assert_eq!(equal_row_sum(&bi, 0, Interval::new(1, 9)).unwrap(), None);
    }
}
