//! Infinite paths given by rules, the path-space metric, tail equivalence and
//! orbit probes.
//!
//! Generators are evaluated lazily: `trace(d, len)` gives `s(x_0..x_{len-1})`
//! and every emitted edge is checked against the diagram. All generator
//! edges use copy 0.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use serde_json::Value;

use crate::error::{GbdError, Result};
use crate::model::{ColumnSupport, DiagramHandle, Interval, Level, Vertex, VertexIndexing};
use crate::paths::{first_path, reaches, Edge, FinitePath};
use crate::probes::{
    default_window, forward_closure, invariant_certificate, Bounds,
    Direction, InvariantKind, NonReachInvariant, Verdict, ALL_TAGS,
};
use crate::reenumerate::full_out_row_check;
use crate::relabel::{relabel, VertexBijectionSeq};

/// How a generator continues once its prefix is exhausted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TailRule {
    Vertical,
    /// Smallest target of the current column.
    LeftmostSlant,
    /// Largest target of the current column.
    RightmostSlant,
    /// Vertical and leftmost steps in turn, starting with vertical.
    Alternating,
    /// Target `source + 1` when that edge exists, else vertical, else leftmost.
    Climbing,
}

impl TailRule {
    pub fn name(&self) -> &'static str {
        match self {
            TailRule::Vertical => "vertical",
            TailRule::LeftmostSlant => "leftmost_slant",
            TailRule::RightmostSlant => "rightmost_slant",
            TailRule::Alternating => "alternating",
            TailRule::Climbing => "climbing",
        }
    }

    fn parse(s: &str) -> Result<TailRule> {
        Ok(match s {
            "vertical" | "vertical_from" => TailRule::Vertical,
            "leftmost" | "leftmost_slant" | "leftmost_slant_from" => TailRule::LeftmostSlant,
            "rightmost" | "rightmost_slant" | "rightmost_slant_from" => TailRule::RightmostSlant,
            "alternating" | "alternating_from" => TailRule::Alternating,
            "climbing" => TailRule::Climbing,
            other => return Err(GbdError::UnknownKind(format!("tail rule {other:?}"))),
        })
    }

    fn period(&self) -> usize {
        if *self == TailRule::Alternating {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PathGenerator {
    /// `s(x_m) = prefix[m]` while the prefix lasts, then the tail rule
    /// continues from the last prefix vertex.
    Rule { prefix: Vec<Vertex>, tail: TailRule },
    /// The image of `inner` under a relabeling: it lives on
    /// `relabel(d0, map)` whenever `inner` lives on `d0`.
    Mapped { inner: Box<PathGenerator>, map: VertexBijectionSeq },
}

impl PathGenerator {
    pub fn vertical_from(i: Vertex) -> Self {
        PathGenerator::Rule { prefix: vec![i], tail: TailRule::Vertical }
    }

    pub fn leftmost_slant_from(i: Vertex) -> Self {
        PathGenerator::Rule { prefix: vec![i], tail: TailRule::LeftmostSlant }
    }

    pub fn rightmost_slant_from(i: Vertex) -> Self {
        PathGenerator::Rule { prefix: vec![i], tail: TailRule::RightmostSlant }
    }

    pub fn alternating_from(i: Vertex) -> Self {
        PathGenerator::Rule { prefix: vec![i], tail: TailRule::Alternating }
    }

    pub fn climbing(i: Vertex) -> Self {
        PathGenerator::Rule { prefix: vec![i], tail: TailRule::Climbing }
    }

    /// `prefix` on levels `0..prefix.len()`, then vertical at `i`.
    pub fn eventually_vertical(prefix: &[Vertex], i: Vertex) -> Self {
        let mut p = prefix.to_vec();
        p.push(i);
        PathGenerator::Rule { prefix: p, tail: TailRule::Vertical }
    }

    pub fn table_then_rule(prefix: &[Vertex], tail: TailRule) -> Result<Self> {
        if prefix.is_empty() {
            return Err(GbdError::Generator("a prefix table needs at least one vertex".into()));
        }
        Ok(PathGenerator::Rule { prefix: prefix.to_vec(), tail })
    }

    /// `g . x`.
    pub fn mapped(&self, map: &VertexBijectionSeq) -> Self {
        PathGenerator::Mapped { inner: Box::new(self.clone()), map: map.clone() }
    }

    /// `{kind, start}`, `{kind: eventually_vertical, prefix, start}` or
    /// `{kind: table_then_rule, prefix, tail}`; fields may also sit under
    /// `params`.
    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| GbdError::Schema("generator must be a map".into()))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| GbdError::Schema("generator needs a string kind".into()))?;
        let field = |k: &str| obj.get("params").and_then(|p| p.get(k)).or_else(|| obj.get(k));
        let int = |k: &str| -> Result<Vertex> {
            field(k)
                .ok_or_else(|| GbdError::Schema(format!("generator {kind} needs {k}")))?
                .as_i64()
                .ok_or_else(|| GbdError::Schema(format!("generator field {k} must be an integer")))
        };
        let list = |k: &str| -> Result<Vec<Vertex>> {
            let arr = field(k)
                .and_then(Value::as_array)
                .ok_or_else(|| GbdError::Schema(format!("generator {kind} needs a list {k}")))?;
            arr.iter()
                .map(|x| x.as_i64().ok_or_else(|| GbdError::Schema(format!("{k} entries must be integers"))))
                .collect()
        };
        match kind {
            "eventually_vertical" => Ok(Self::eventually_vertical(&list("prefix")?, int("start")?)),
            "table_then_rule" => {
                let tail = field("tail")
                    .and_then(Value::as_str)
                    .ok_or_else(|| GbdError::Schema("table_then_rule needs a tail".into()))?;
                Self::table_then_rule(&list("prefix")?, TailRule::parse(tail)?)
            }
            other => Ok(PathGenerator::Rule { prefix: vec![int("start")?], tail: TailRule::parse(other)? }),
        }
    }

    /// Command-line shorthand: `kind:start`, `eventually_vertical:p0,p1/i`
    /// or `table:p0,p1,p2/tail`. Anything starting with `{` is read as JSON.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let v: Value = serde_json::from_str(s).map_err(|e| GbdError::Parse(e.to_string()))?;
            return Self::from_value(&v);
        }
        let (kind, rest) =
            s.split_once(':').ok_or_else(|| GbdError::Parse(format!("generator {s:?}: expected kind:args")))?;
        let ints = |t: &str| -> Result<Vec<Vertex>> {
            if t.trim().is_empty() {
                return Ok(Vec::new());
            }
            t.split(',')
                .map(|x| x.trim().parse().map_err(|_| GbdError::Parse(format!("generator vertex {x:?}"))))
                .collect()
        };
        match kind {
            "eventually_vertical" => {
                let (p, i) = rest
                    .split_once('/')
                    .ok_or_else(|| GbdError::Parse("eventually_vertical:PREFIX/VERTEX".into()))?;
                let i = ints(i)?;
                match i.as_slice() {
                    [i] => Ok(Self::eventually_vertical(&ints(p)?, *i)),
                    _ => Err(GbdError::Parse("eventually_vertical takes one vertex".into())),
                }
            }
            "table" | "table_then_rule" => {
                let (p, t) =
                    rest.split_once('/').ok_or_else(|| GbdError::Parse("table:PREFIX/TAIL".into()))?;
                Self::table_then_rule(&ints(p)?, TailRule::parse(t.trim())?)
            }
            other => {
                let tail = TailRule::parse(other)?;
                match ints(rest)?.as_slice() {
                    [i] => Ok(PathGenerator::Rule { prefix: vec![*i], tail }),
                    _ => Err(GbdError::Parse(format!("{other} takes one start vertex"))),
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PathGenerator::Rule { prefix, tail } if prefix.len() == 1 => match tail {
                TailRule::Climbing => format!("climbing({})", prefix[0]),
                _ => format!("{}_from({})", tail.name(), prefix[0]),
            },
            PathGenerator::Rule { prefix, tail: TailRule::Vertical } => {
                let (last, head) = prefix.split_last().expect("nonempty prefix");
                format!("eventually_vertical({head:?}, {last})")
            }
            PathGenerator::Rule { prefix, tail } => format!("table_then_rule({prefix:?}, {})", tail.name()),
            PathGenerator::Mapped { inner, map } => format!("{} mapped by {}", inner.describe(), map),
        }
    }

    /// `s(x_0), ..., s(x_{len-1})`.
    pub fn trace(&self, d: &DiagramHandle, len: usize) -> Result<Vec<Vertex>> {
        match self {
            PathGenerator::Rule { prefix, tail } => rule_trace(d, prefix, *tail, len),
            PathGenerator::Mapped { inner, map } => {
                let base = base_of(d, map)?;
                let t = inner.trace(&base, len)?;
                t.iter().enumerate().map(|(m, v)| map.forward(m, *v)).collect()
            }
        }
    }

    /// The first `n` edges `x_0, ..., x_{n-1}`.
    pub fn edges(&self, d: &DiagramHandle, n: usize) -> Result<Vec<Edge>> {
        let t = self.trace(d, n + 1)?;
        Ok(t.windows(2).enumerate().map(|(m, w)| Edge::new(m, w[0], w[1], 0)).collect())
    }

    /// The first `n` edges as a path from level 0.
    pub fn prefix_path(&self, d: &DiagramHandle, n: usize) -> Result<FinitePath> {
        let t = self.trace(d, n + 1)?;
        FinitePath::through(0, &t)
    }

    /// `(tail rule, phase)` once the prefix is used up at level `m`.
    fn tail_state(&self, m: Level) -> Option<(TailRule, usize)> {
        match self {
            PathGenerator::Rule { prefix, tail } if m + 1 >= prefix.len() => {
                Some((*tail, (m + 1 - prefix.len()) % tail.period()))
            }
            _ => None,
        }
    }
}

impl fmt::Display for PathGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// The diagram `d0` with `relabel(d0, map) = d`.
fn base_of(d: &DiagramHandle, map: &VertexBijectionSeq) -> Result<DiagramHandle> {
    if let Some((base, m)) = d.as_relabeled() {
        if m == map {
            return Ok(base.clone());
        }
    }
    relabel(d, &map.inverse_seq())
}

const SCAN_LIMIT: i64 = 1 << 16;

fn leftmost(d: &DiagramHandle, m: Level, c: Vertex) -> Result<Vertex> {
    match d.column_support(m, c)? {
        ColumnSupport::Finite(vs) => vs
            .first()
            .copied()
            .ok_or_else(|| GbdError::Generator(format!("vertex {c} at level {m} has no outgoing edge"))),
        _ => match d.indexing() {
            VertexIndexing::OneSidedFrom(base) => {
                for v in base..base + SCAN_LIMIT {
                    if d.has_vertex(m + 1, v) && d.mult(m, v, c)? > 0 {
                        return Ok(v);
                    }
                }
                Err(GbdError::Generator(format!("no target of {c}@{m} found by scanning")))
            }
            VertexIndexing::TwoSided => Err(GbdError::Generator(format!(
                "column {c}@{m} is infinite on a two-sided level; no leftmost target"
            ))),
        },
    }
}

fn rightmost(d: &DiagramHandle, m: Level, c: Vertex) -> Result<Vertex> {
    match d.column_support(m, c)? {
        ColumnSupport::Finite(vs) => vs
            .last()
            .copied()
            .ok_or_else(|| GbdError::Generator(format!("vertex {c} at level {m} has no outgoing edge"))),
        _ => Err(GbdError::Generator(format!("column {c}@{m} is infinite; no rightmost target"))),
    }
}

fn edge_exists(d: &DiagramHandle, m: Level, w: Vertex, v: Vertex) -> Result<bool> {
    Ok(d.has_vertex(m + 1, v) && d.mult(m, v, w)? > 0)
}

fn step(d: &DiagramHandle, tail: TailRule, phase: usize, m: Level, c: Vertex) -> Result<Vertex> {
    let vertical = |d: &DiagramHandle| -> Result<Vertex> {
        if edge_exists(d, m, c, c)? {
            Ok(c)
        } else {
            Err(GbdError::Generator(format!("no vertical edge at {c}@{m}")))
        }
    };
    match tail {
        TailRule::Vertical => vertical(d),
        TailRule::LeftmostSlant => leftmost(d, m, c),
        TailRule::RightmostSlant => rightmost(d, m, c),
        TailRule::Alternating if phase == 0 => vertical(d),
        TailRule::Alternating => leftmost(d, m, c),
        TailRule::Climbing => {
            if edge_exists(d, m, c, c + 1)? {
                Ok(c + 1)
            } else if edge_exists(d, m, c, c)? {
                Ok(c)
            } else {
                leftmost(d, m, c)
            }
        }
    }
}

fn rule_trace(d: &DiagramHandle, prefix: &[Vertex], tail: TailRule, len: usize) -> Result<Vec<Vertex>> {
    let first = *prefix.first().ok_or_else(|| GbdError::Generator("empty prefix".into()))?;
    d.check_vertex(0, first)?;
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return Ok(out);
    }
    out.push(first);
    for m in 1..len {
        let c = out[m - 1];
        let next = if m < prefix.len() {
            let v = prefix[m];
            if !edge_exists(d, m - 1, c, v)? {
                return Err(GbdError::Generator(format!("prefix edge {c}@{} -> {v} does not exist", m - 1)));
            }
            v
        } else {
            let phase = (m - prefix.len()) % tail.period();
            step(d, tail, phase, m - 1, c)?
        };
        out.push(next);
    }
    Ok(out)
}

/// Eventual shape of a trace: for `m = k + q p + r` with `r < p`,
/// `s(x_m) = base[r] + drift q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceForm {
    pub k: Level,
    pub p: usize,
    pub drift: i64,
    pub base: Vec<Vertex>,
}

impl TraceForm {
    pub fn at(&self, m: Level) -> Option<Vertex> {
        if m < self.k {
            return None;
        }
        let (q, r) = ((m - self.k) / self.p, (m - self.k) % self.p);
        Some(self.base[r] + self.drift * q as i64)
    }
}

impl fmt::Display for TraceForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s(x_{{{}+{}q+r}}) = {:?}[r] + {}q", self.k, self.p, self.base, self.drift)
    }
}

const FORM_SEARCH: usize = 4096;

/// The eventual form of a rule generator's trace on a stationary diagram.
/// Translation invariant diagrams give constant per-step displacements;
/// otherwise the `(vertex, phase)` state must repeat within the search limit.
pub fn trace_form(d: &DiagramHandle, x: &PathGenerator) -> Result<Option<TraceForm>> {
    let (prefix, tail) = match x {
        PathGenerator::Rule { prefix, tail } => (prefix, *tail),
        PathGenerator::Mapped { .. } => return Ok(None),
    };
    if !d.is_stationary() {
        return Ok(None);
    }
    let k0 = prefix.len() - 1;
    let p = tail.period();
    if d.is_translation_invariant() {
        let t = x.trace(d, k0 + 2 * p + 1)?;
        let drift = t[k0 + p] - t[k0];
        return Ok(Some(TraceForm { k: k0, p, drift, base: t[k0..k0 + p].to_vec() }));
    }
    let mut seen: BTreeMap<(Vertex, usize), Level> = BTreeMap::new();
    let mut t = x.trace(d, k0 + 1)?;
    let mut m = k0;
    loop {
        let phase = x.tail_state(m).map(|s| s.1).unwrap_or(0);
        let state = (t[m], phase);
        if let Some(&m0) = seen.get(&state) {
            return Ok(Some(TraceForm { k: m0, p: m - m0, drift: 0, base: t[m0..m].to_vec() }));
        }
        seen.insert(state, m);
        if m >= k0 + FORM_SEARCH {
            return Ok(None);
        }
        t.push(step(d, tail, phase, m, t[m])?);
        m += 1;
    }
}

/// A connecting witness: `path` lies in the cylinder and ends at `s(x_m)`
/// on level `m`, so `path` followed by the tail of `x` is in the orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitVisit {
    pub m: Level,
    pub path: FinitePath,
}

/// Invariants that keep `r(c)` away from the whole trace beyond `|c|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitCertificate {
    pub invariants: Vec<NonReachInvariant>,
    pub form: TraceForm,
    pub frame: String,
}

impl fmt::Display for OrbitCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.invariants.iter().map(|i| i.to_string()).collect();
        write!(f, "{} with trace {} ({})", names.join(" + "), self.form, self.frame)
    }
}

fn map_path(p: &FinitePath, map: &VertexBijectionSeq, inverse: bool) -> Result<FinitePath> {
    let f = |n: Level, v: Vertex| if inverse { map.inverse(n, v) } else { map.forward(n, v) };
    let edges = p
        .edges
        .iter()
        .map(|e| Ok(Edge::new(e.level, f(e.level, e.source)?, f(e.level + 1, e.target)?, e.copy)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FinitePath { start_level: p.start_level, start: f(p.start_level, p.start)?, edges })
}

/// Whether the invariant keeps every vertex reachable from `r@l` away from
/// `s(x_m)` for all `m >= l`, using the trace `t` for `m` below the form's
/// periodic part and the form beyond.
fn separates(inv: &NonReachInvariant, r: Vertex, l: Level, t: &[Vertex], form: &TraceForm) -> bool {
    let m0 = form.k.max(l);
    let explicit = |ok: &dyn Fn(Level, Vertex) -> bool| (l..m0).all(|m| ok(m, t[m]));
    // affine bound `r + s (m - l)`; `below` asks for the trace strictly below it
    let affine = |slope: i64, below: bool| -> bool {
        let ok = |m: Level, v: Vertex| {
            let b = r + slope * (m - l) as i64;
            if below {
                v < b
            } else {
                v > b
            }
        };
        if !explicit(&ok) {
            return false;
        }
        (0..form.p).all(|rr| {
            let q0 = first_q(form, m0, rr);
            let m = form.k + q0 * form.p + rr;
            let a = form.base[rr] + form.drift * q0 as i64 - (r + slope * (m - l) as i64);
            let b = form.drift - slope * form.p as i64;
            if below {
                a < 0 && b <= 0
            } else {
                a > 0 && b >= 0
            }
        })
    };
    match &inv.kind {
        InvariantKind::TriangularSupport { direction: Direction::Lower, slack } => affine(-slack, true),
        InvariantKind::TriangularSupport { direction: Direction::Upper, slack } => affine(-slack, false),
        InvariantKind::ConeBound { t } => match t.as_constant() {
            Some(c) => affine(-(c as i64), true) || affine(c as i64, false),
            None => false,
        },
        InvariantKind::ResidueClass { p, a } => {
            let hit = |m: Level, v: Vertex| (v - r + a * (m - l) as i64).rem_euclid(*p) == 0;
            if !explicit(&|m, v| !hit(m, v)) {
                return false;
            }
            (0..form.p).all(|rr| {
                let q0 = first_q(form, m0, rr);
                (q0..q0 + *p as usize).all(|q| {
                    let m = form.k + q * form.p + rr;
                    !hit(m, form.base[rr] + form.drift * q as i64)
                })
            })
        }
        InvariantKind::ForwardClosed { from, set } => {
            if *from != r {
                return false;
            }
            if !explicit(&|_, v| !set.contains(&v)) {
                return false;
            }
            (0..form.p).all(|rr| {
                let q0 = first_q(form, m0, rr) as i64;
                set.iter().all(|s| {
                    let diff = s - form.base[rr];
                    if form.drift == 0 {
                        diff != 0
                    } else {
                        diff % form.drift != 0 || diff / form.drift < q0
                    }
                })
            })
        }
        InvariantKind::ClopenPartition { .. } | InvariantKind::LeftmostPath { .. } => false,
    }
}

/// Smallest `q` with `k + q p + rr >= m0`.
fn first_q(form: &TraceForm, m0: Level, rr: usize) -> usize {
    let start = form.k + rr;
    if m0 <= start {
        0
    } else {
        (m0 - start).div_ceil(form.p)
    }
}

/// Does the orbit of `x` meet the cylinder `[c]`? Yes when some `s(x_m)`,
/// `|c| <= m <= |c| + depth`, is reachable from `r(c)`.
pub fn orbit_visits_cylinder(
    d: &DiagramHandle,
    x: &PathGenerator,
    c: &FinitePath,
    depth: usize,
) -> Result<Verdict<OrbitVisit, OrbitCertificate>> {
    if c.start_level != 0 {
        return Err(GbdError::InvalidEdge("cylinder prefixes start at level 0".into()));
    }
    c.validate(d)?;
    if let (Some((base, map)), PathGenerator::Mapped { inner, map: xm }) = (d.as_relabeled(), x) {
        if map == xm {
            let back = map_path(c, map, true)?;
            return Ok(match orbit_visits_cylinder(base, inner, &back, depth)? {
                Verdict::Yes(v) => Verdict::Yes(OrbitVisit { m: v.m, path: map_path(&v.path, map, false)? }),
                Verdict::No(mut cert) => {
                    cert.frame = format!("pulled back through {map}; {}", cert.frame);
                    Verdict::No(cert)
                }
                Verdict::Unknown(b) => Verdict::Unknown(b),
            });
        }
    }
    let l = c.len();
    let r = c.end();
    let t = x.trace(d, l + depth + 1)?;
    for m in l..=l + depth {
        if reaches(d, r, l, t[m], m)? {
            let link = first_path(d, r, l, t[m], m)?.expect("reachable pair has a path");
            return Ok(Verdict::Yes(OrbitVisit { m, path: c.concat(&link)? }));
        }
    }
    let unknown = || Verdict::Unknown(Bounds { depth, window: format!("levels {l}..={}", l + depth) });
    let form = match trace_form(d, x)? {
        Some(f) => f,
        None => return Ok(unknown()),
    };
    let mut t = t;
    let need = form.k.max(l) + form.p + 1;
    if t.len() < need {
        t = x.trace(d, need)?;
    }
    let win = default_window(d, 4, &[r, t[l]]);
    let mut candidates: Vec<NonReachInvariant> =
        invariant_certificate(d, &win, &ALL_TAGS)?.into_iter().filter(|i| i.is_global()).collect();
    if let Some(set) = forward_closure(d, r, 256)? {
        candidates.push(NonReachInvariant {
            kind: InvariantKind::ForwardClosed { from: r, set: set.into_iter().collect() },
            window: "forward closure".into(),
            verified: true,
            basis: Some("stationary exact column supports".into()),
        });
    }
    for inv in candidates {
        if separates(&inv, r, l, &t, &form) {
            return Ok(Verdict::No(OrbitCertificate {
                invariants: vec![inv],
                form,
                frame: format!("from {r}@{l}"),
            }));
        }
    }
    Ok(unknown())
}

/// A shortest path from level 0 into `v@k`, following first in-edges.
pub fn representative_prefix(d: &DiagramHandle, k: Level, v: Vertex) -> Result<Option<FinitePath>> {
    let mut verts = vec![v];
    let mut at = v;
    for n in (0..k).rev() {
        match d.in_edges(n, at)?.first() {
            Some((w, _)) => {
                at = *w;
                verts.push(at);
            }
            None => return Ok(None),
        }
    }
    verts.reverse();
    Ok(Some(FinitePath::through(0, &verts)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseEvidence {
    pub cylinders: usize,
    pub deepest_m: Level,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MissedCylinder {
    pub cylinder: FinitePath,
    pub certificate: OrbitCertificate,
}

impl fmt::Display for MissedCylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cylinder [{}] missed: {}", self.cylinder, self.certificate)
    }
}

/// Visits to every cylinder of length `<= cyl_depth` ending in `window`.
/// Whether `x` visits `[c]` only depends on `(|c|, r(c))`, so one
/// representative prefix per end vertex is tested.
pub fn transitivity_probe(
    d: &DiagramHandle,
    x: &PathGenerator,
    cyl_depth: Level,
    window: Interval,
    depth: usize,
) -> Result<Verdict<DenseEvidence, MissedCylinder>> {
    let mut unknown = None;
    let mut cylinders = 0;
    let mut deepest_m = 0;
    for k in 0..=cyl_depth {
        for v in d.window_vertices(k, window) {
            let Some(c) = representative_prefix(d, k, v)? else { continue };
            cylinders += 1;
            match orbit_visits_cylinder(d, x, &c, depth)? {
                Verdict::Yes(hit) => deepest_m = deepest_m.max(hit.m),
                Verdict::No(certificate) => {
                    return Ok(Verdict::No(MissedCylinder { cylinder: c, certificate }))
                }
                Verdict::Unknown(b) => {
                    unknown.get_or_insert(b);
                }
            }
        }
    }
    Ok(match unknown {
        Some(b) => Verdict::Unknown(b),
        None => Verdict::Yes(DenseEvidence { cylinders, deepest_m }),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForcedReturn {
    pub u: Vertex,
    /// `(w, b(w))`: every path from `w@0` meets `u` within `b(w)` steps.
    pub bounds: Vec<(Vertex, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonDenseOrbit {
    pub generator: PathGenerator,
    pub missed: MissedCylinder,
}

impl fmt::Display for NonDenseOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "orbit of {} is not dense: {}", self.generator, self.missed)
    }
}

/// Steps until every path from `w@0` has met `u`, if that happens within
/// `horizon` steps and all out-supports on the way are finite.
fn forced_return(d: &DiagramHandle, w: Vertex, u: Vertex, horizon: usize) -> Result<Option<usize>> {
    let mut alive: BTreeSet<Vertex> = BTreeSet::from([w]);
    alive.remove(&u);
    for k in 0..=horizon {
        if alive.is_empty() {
            return Ok(Some(k));
        }
        let mut next = BTreeSet::new();
        for a in &alive {
            match d.column_support(k, *a)? {
                ColumnSupport::Finite(vs) => next.extend(vs),
                _ => return Ok(None),
            }
        }
        next.remove(&u);
        alive = next;
    }
    Ok(None)
}

const MIN_CANDIDATES: usize = 3;

/// Yes by the forced-return schema; No when some generator's orbit misses a
/// level-0 cylinder under a global invariant.
pub fn minimality_certificate(
    d: &DiagramHandle,
    horizon: usize,
    window: Interval,
) -> Result<Verdict<ForcedReturn, NonDenseOrbit>> {
    let full = full_out_row_check(d, 4, window)?;
    let us: Vec<Vertex> = full.iter().filter_map(|v| v.yes().copied()).collect();
    if d.is_stationary() && us.len() == full.len() {
        if let Some(&u) = us.first() {
            let mut bounds = Vec::new();
            for w in d.window_vertices(0, window) {
                match forced_return(d, w, u, horizon)? {
                    Some(b) => bounds.push((w, b)),
                    None => break,
                }
            }
            if bounds.len() == d.window_vertices(0, window).len() {
                return Ok(Verdict::Yes(ForcedReturn { u, bounds }));
            }
        }
    }
    let full_out: BTreeSet<Vertex> = us.into_iter().collect();
    let mut starts: Vec<Vertex> = d.window_vertices(0, window);
    starts.sort_by_key(|v| d.indexing().canonical_index(*v));
    let starts: Vec<Vertex> =
        starts.into_iter().filter(|v| !full_out.contains(v)).take(MIN_CANDIDATES).collect();
    let depth = crate::DEFAULT_DEPTH;
    let mut candidates = Vec::new();
    for ctor in [PathGenerator::vertical_from, PathGenerator::leftmost_slant_from, PathGenerator::rightmost_slant_from] {
        candidates.extend(starts.iter().map(|&v| ctor(v)));
    }
    for x in candidates {
        if x.trace(d, depth + 2).is_err() {
            continue;
        }
        for v in d.window_vertices(0, window) {
            let c = FinitePath::empty(0, v);
            if let Verdict::No(certificate) = orbit_visits_cylinder(d, &x, &c, depth)? {
                return Ok(Verdict::No(NonDenseOrbit {
                    generator: x,
                    missed: MissedCylinder { cylinder: c, certificate },
                }));
            }
        }
    }
    Ok(Verdict::Unknown(Bounds { depth: horizon, window: window.to_string() }))
}

/// Least `n` with `x_k = y_k` for all `k >= n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailAgreement {
    pub n: Level,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailSeparation {
    pub reason: String,
}

fn last_disagreement(a: &[Vertex], b: &[Vertex]) -> Option<Level> {
    (0..a.len().min(b.len())).rev().find(|&m| a[m] != b[m])
}

/// Tail equivalence of two generators on `d`, checked to `horizon` and
/// decided beyond it by state coincidence or by the eventual trace forms.
pub fn tail_equivalent(
    d: &DiagramHandle,
    x: &PathGenerator,
    y: &PathGenerator,
    horizon: usize,
) -> Result<Verdict<TailAgreement, TailSeparation>> {
    let tx = x.trace(d, horizon + 1)?;
    let ty = y.trace(d, horizon + 1)?;
    // identical deterministic state at some level forces agreement afterwards
    for m in 0..=horizon {
        if tx[m] == ty[m] {
            if let (Some(sx), Some(sy)) = (x.tail_state(m), y.tail_state(m)) {
                if sx == sy {
                    let n = last_disagreement(&tx[..=m], &ty[..=m]).map_or(0, |k| k + 1);
                    return Ok(Verdict::Yes(TailAgreement {
                        n,
                        reason: format!("same rule and phase at vertex {} on level {m}", tx[m]),
                    }));
                }
            }
        }
    }
    if x == y {
        return Ok(Verdict::Yes(TailAgreement { n: 0, reason: "identical generators".into() }));
    }
    if let (Some(fx), Some(fy)) = (trace_form(d, x)?, trace_form(d, y)?) {
        let period = fx.p.lcm(&fy.p);
        let k = fx.k.max(fy.k);
        let slope_x = fx.drift * (period / fx.p) as i64;
        let slope_y = fy.drift * (period / fy.p) as i64;
        if slope_x != slope_y {
            return Ok(Verdict::No(TailSeparation {
                reason: format!("drift {slope_x} vs {slope_y} per {period} levels"),
            }));
        }
        for r in 0..period {
            let m = k + r;
            let (a, b) = (fx.at(m).expect("m >= k"), fy.at(m).expect("m >= k"));
            if a != b {
                return Ok(Verdict::No(TailSeparation {
                    reason: format!("traces differ by {} at every level {m} + {period}q", a - b),
                }));
            }
        }
        let n = match last_disagreement(&tx[..k.min(horizon) + 1], &ty[..k.min(horizon) + 1]) {
            Some(j) => j + 1,
            None => 0,
        };
        return Ok(Verdict::Yes(TailAgreement { n, reason: format!("eventual trace forms agree from level {k}") }));
    }
    Ok(Verdict::Unknown(Bounds { depth: horizon, window: "generator traces".into() }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distance {
    /// `1 / 2^N` with `N` the first index where the edges differ.
    Dyadic(u32),
    AgreeToHorizon,
}

impl Distance {
    pub fn value(&self) -> f64 {
        match self {
            Distance::Dyadic(n) => 0.5f64.powi(*n as i32),
            Distance::AgreeToHorizon => 0.0,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Dyadic(0) => write!(f, "1"),
            Distance::Dyadic(n) => write!(f, "1/2^{n}"),
            Distance::AgreeToHorizon => write!(f, "0 (agree to horizon)"),
        }
    }
}

/// Distance between two edge sequences starting at level 0, compared on
/// their common length.
pub fn metric_dist(x: &[Edge], y: &[Edge]) -> Distance {
    match x.iter().zip(y).position(|(a, b)| a != b) {
        Some(n) => Distance::Dyadic(n as u32),
        None => Distance::AgreeToHorizon,
    }
}

/// Per level `n <= levels`: `(V(x), V_l(x), V_r(x))` restricted to `window`.
pub type Trisection = Vec<(Vec<Vertex>, Vec<Vertex>, Vec<Vertex>)>;

pub fn trace_trisection(
    d: &DiagramHandle,
    x: &PathGenerator,
    levels: Level,
    window: Interval,
) -> Result<Trisection> {
    let t = x.trace(d, levels + 1)?;
    Ok(t.iter()
        .enumerate()
        .map(|(n, &s)| {
            let vs = d.window_vertices(n, window);
            let on: Vec<Vertex> = vs.iter().copied().filter(|v| *v == s).collect();
            let left = vs.iter().copied().filter(|v| *v < s).collect();
            let right = vs.iter().copied().filter(|v| *v > s).collect();
            (on, left, right)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeClass {
    Vertical,
    Slanted,
}

pub fn classify_edge(d: &DiagramHandle, e: &Edge) -> Result<EdgeClass> {
    e.validate(d)?;
    Ok(if e.source == e.target { EdgeClass::Vertical } else { EdgeClass::Slanted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{catalog, DiagonalRule};

    #[test]
    fn alternating_trace_on_two_sided_odometer() {
        let d = catalog::odometer_two_sided(DiagonalRule::Constant(2)).unwrap();
        let t = PathGenerator::alternating_from(0).trace(&d, 6).unwrap();
        assert_eq!(t, vec![0, 0, -1, -1, -2, -2]);
        let kinds: Vec<EdgeClass> = PathGenerator::alternating_from(0)
            .edges(&d, 4)
            .unwrap()
            .iter()
            .map(|e| classify_edge(&d, e).unwrap())
            .collect();
        assert_eq!(kinds, [EdgeClass::Vertical, EdgeClass::Slanted, EdgeClass::Vertical, EdgeClass::Slanted]);
        let f = trace_form(&d, &PathGenerator::alternating_from(0)).unwrap().unwrap();
        assert_eq!((f.p, f.drift), (2, -1));
        assert_eq!(f.at(9), Some(-4));
    }

    #[test]
    fn odometer_orbits() {
        let d = catalog::odometer_two_sided(DiagonalRule::Constant(2)).unwrap();
        let c = FinitePath::empty(0, 2);
        let v = orbit_visits_cylinder(&d, &PathGenerator::vertical_from(3), &c, 8).unwrap();
        assert!(v.is_no(), "{v:?}");
        let c = FinitePath::empty(0, 4);
        let v = orbit_visits_cylinder(&d, &PathGenerator::leftmost_slant_from(3), &c, 8).unwrap();
        assert!(v.is_no(), "{v:?}");
        let v = orbit_visits_cylinder(&d, &PathGenerator::vertical_from(3), &c, 8).unwrap();
        assert!(v.is_yes());
    }

    #[test]
    fn tail_equivalence_examples() {
        let d = catalog::tridiag_b();
        let x = PathGenerator::eventually_vertical(&[1, 2, 3], 5);
        assert!(x.trace(&d, 4).is_err());
        let x = PathGenerator::eventually_vertical(&[2, 3, 4], 5);
        let y = PathGenerator::vertical_from(5);
        assert_eq!(tail_equivalent(&d, &x, &y, 16).unwrap().yes().unwrap().n, 3);
        assert_eq!(tail_equivalent(&d, &y, &y, 16).unwrap().yes().unwrap().n, 0);
        let o = catalog::odometer_one_sided(DiagonalRule::Constant(2)).unwrap();
        let v = tail_equivalent(&o, &PathGenerator::vertical_from(1), &PathGenerator::vertical_from(2), 16);
        assert!(v.unwrap().is_no());
    }

    #[test]
    fn metric_examples() {
        let d = catalog::tridiag_b();
        let x = PathGenerator::vertical_from(0).edges(&d, 6).unwrap();
        let y = PathGenerator::eventually_vertical(&[0, 0, 0], 1).edges(&d, 6).unwrap();
        assert_eq!(metric_dist(&x, &x), Distance::AgreeToHorizon);
        assert_eq!(metric_dist(&x, &y), Distance::Dyadic(2));
        let z = PathGenerator::vertical_from(1).edges(&d, 6).unwrap();
        assert_eq!(metric_dist(&x, &z).value(), 1.0);
    }

    #[test]
    fn generator_specs() {
        let g = PathGenerator::parse("leftmost_slant:3").unwrap();
        assert_eq!(g, PathGenerator::leftmost_slant_from(3));
        let g = PathGenerator::parse("eventually_vertical:1,2/4").unwrap();
        assert_eq!(g, PathGenerator::eventually_vertical(&[1, 2], 4));
        let g = PathGenerator::parse(r#"{"kind":"climbing","params":{"start":1}}"#).unwrap();
        assert_eq!(g, PathGenerator::climbing(1));
        assert!(PathGenerator::parse("sideways:1").is_err());
    }
}
