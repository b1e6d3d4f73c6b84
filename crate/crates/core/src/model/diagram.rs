use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::indexing::{Interval, Level, Mult, Vertex, VertexIndexing};
use crate::error::{GbdError, Result};
use crate::relabel::VertexBijectionSeq;

/// Levels checked when a flag or structural invariant is spot-verified.
pub const FLAG_CHECK_LEVELS: Level = 4;
/// Window radius used for construction-time verification.
pub const FLAG_CHECK_RADIUS: u64 = 16;

/// A per-level nonnegative integer sequence (`t_n`, `L_n`, shift steps).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LevelRule {
    Constant(u64),
    /// Explicit values; the last one repeats beyond the list.
    PerLevel(Vec<u64>),
}

impl LevelRule {
    pub fn at(&self, level: Level) -> u64 {
        match self {
            LevelRule::Constant(c) => *c,
            LevelRule::PerLevel(vals) => match vals.get(level) {
                Some(v) => *v,
                None => vals.last().copied().unwrap_or(0),
            },
        }
    }

    /// Sum of the values at levels `from..to`.
    pub fn sum(&self, from: Level, to: Level) -> u64 {
        match self {
            LevelRule::Constant(c) => c * to.saturating_sub(from) as u64,
            LevelRule::PerLevel(_) => (from..to).map(|n| self.at(n)).sum(),
        }
    }

    pub fn as_constant(&self) -> Option<u64> {
        match self {
            LevelRule::Constant(c) => Some(*c),
            LevelRule::PerLevel(vals) if vals.windows(2).all(|w| w[0] == w[1]) => {
                vals.first().copied()
            }
            LevelRule::PerLevel(_) => None,
        }
    }
}

/// Diagonal multiplicities of an odometer family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DiagonalRule {
    Constant(Mult),
    /// `a(v) = |v| + offset`.
    IndexPlus(i64),
}

impl DiagonalRule {
    pub fn at(&self, v: Vertex) -> Mult {
        match self {
            DiagonalRule::Constant(a) => *a,
            DiagonalRule::IndexPlus(k) => (v.abs() + k) as Mult,
        }
    }

    fn min_over(&self, indexing: VertexIndexing) -> i64 {
        match self {
            DiagonalRule::Constant(a) => *a as i64,
            DiagonalRule::IndexPlus(k) => match indexing {
                VertexIndexing::OneSidedFrom(b) if b >= 0 => b + k,
                _ => *k,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ExtensionPolicy {
    RepeatLast,
    ErrorBeyond,
}

/// Structural tags carried by a diagram. Each is spot-verified at
/// construction; beyond the verified window it is an assumption.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Flag {
    /// Row `v` is exactly `{(v + o, m)}` over the offset map (source minus target).
    Banded(BTreeMap<i64, Mult>),
    /// Every source `w` of a target `v` satisfies `w <= v`.
    LowerTriangularSupport,
    /// Every source `w` of a target `v` satisfies `w >= v`.
    UpperTriangularSupport,
    /// The vertex has an edge to every vertex of the next level, at every level.
    FullOutColumn(Vertex),
    BoundedSize { t: LevelRule, l: LevelRule },
    ExplicitFiniteLevels(ExtensionPolicy),
}

impl Flag {
    pub fn name(&self) -> &'static str {
        match self {
            Flag::Banded(_) => "Banded",
            Flag::LowerTriangularSupport => "LowerTriangularSupport",
            Flag::UpperTriangularSupport => "UpperTriangularSupport",
            Flag::FullOutColumn(_) => "FullOutColumn",
            Flag::BoundedSize { .. } => "BoundedSize",
            Flag::ExplicitFiniteLevels(_) => "ExplicitFiniteLevels",
        }
    }
}

/// Targets of a column of `F_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnSupport {
    /// Exact, ascending.
    Finite(Vec<Vertex>),
    /// Known to have infinitely many targets.
    Infinite,
    Unknown,
}

pub(crate) type ExplicitLevel = BTreeMap<Vertex, Vec<(Vertex, Mult)>>;

#[derive(Clone, Debug)]
pub(crate) enum Rule {
    Banded { offsets: BTreeMap<i64, Mult> },
    RenewalShift,
    BInfinity,
    Odometer { diagonal: DiagonalRule },
    StarOdometer,
    InterleavedPrime,
    Explicit { levels: Vec<ExplicitLevel>, extension: ExtensionPolicy },
    Relabeled { base: DiagramHandle, map: VertexBijectionSeq },
}

struct Inner {
    name: String,
    indexing: VertexIndexing,
    rule: Rule,
    stationary: bool,
    flags: Vec<Flag>,
    fingerprint: String,
}

/// An immutable, cheaply clonable generalized Bratteli diagram given by
/// a lazily evaluated incidence rule.
#[derive(Clone)]
pub struct DiagramHandle {
    inner: Arc<Inner>,
}

impl fmt::Debug for DiagramHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiagramHandle")
            .field("name", &self.inner.name)
            .field("indexing", &self.inner.indexing)
            .field("fingerprint", &self.inner.fingerprint)
            .finish()
    }
}

fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(digest)
}

impl DiagramHandle {
    pub(crate) fn build(
        name: impl Into<String>,
        indexing: VertexIndexing,
        rule: Rule,
        stationary: bool,
        flags: Vec<Flag>,
    ) -> Result<Self> {
        let name = name.into();
        let fingerprint =
            sha256_hex(&format!("{name}|{indexing}|{rule:?}|{stationary}|{flags:?}"));
        let handle = DiagramHandle {
            inner: Arc::new(Inner { name, indexing, rule, stationary, flags, fingerprint }),
        };
        handle.verify_construction()?;
        Ok(handle)
    }

    pub(crate) fn with_fingerprint(self, fingerprint: String) -> Self {
        let inner = &self.inner;
        DiagramHandle {
            inner: Arc::new(Inner {
                name: inner.name.clone(),
                indexing: inner.indexing,
                rule: inner.rule.clone(),
                stationary: inner.stationary,
                flags: inner.flags.clone(),
                fingerprint,
            }),
        }
    }

    /// The same diagram with additional flags, re-verified.
    pub(crate) fn with_extra_flags(&self, extra: Vec<Flag>) -> Result<Self> {
        let mut flags = self.inner.flags.clone();
        for f in extra {
            if !flags.contains(&f) {
                flags.push(f);
            }
        }
        DiagramHandle::build(
            self.inner.name.clone(),
            self.inner.indexing,
            self.inner.rule.clone(),
            self.inner.stationary,
            flags,
        )
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn indexing(&self) -> VertexIndexing {
        self.inner.indexing
    }

    pub fn is_stationary(&self) -> bool {
        self.inner.stationary
    }

    pub fn flags(&self) -> &[Flag] {
        &self.inner.flags
    }

    pub fn fingerprint(&self) -> &str {
        &self.inner.fingerprint
    }

    pub(crate) fn rule(&self) -> &Rule {
        &self.inner.rule
    }

    pub fn as_relabeled(&self) -> Option<(&DiagramHandle, &VertexBijectionSeq)> {
        match &self.inner.rule {
            Rule::Relabeled { base, map } => Some((base, map)),
            _ => None,
        }
    }

    pub fn banded_offsets(&self) -> Option<&BTreeMap<i64, Mult>> {
        self.flags().iter().find_map(|f| match f {
            Flag::Banded(o) => Some(o),
            _ => None,
        })
    }

    pub fn bounded_size(&self) -> Option<(&LevelRule, &LevelRule)> {
        self.flags().iter().find_map(|f| match f {
            Flag::BoundedSize { t, l } => Some((t, l)),
            _ => None,
        })
    }

    pub fn full_out_column(&self) -> Option<Vertex> {
        self.flags().iter().find_map(|f| match f {
            Flag::FullOutColumn(u) => Some(*u),
            _ => None,
        })
    }

    pub fn has_flag(&self, name: &str) -> bool {
        self.flags().iter().any(|f| f.name() == name)
    }

    /// Translation invariance: a banded rule on a two-sided stationary diagram.
    pub fn is_translation_invariant(&self) -> bool {
        self.is_stationary()
            && self.indexing() == VertexIndexing::TwoSided
            && self.banded_offsets().is_some()
    }

    /// Whether `v` is a vertex of level `level`.
    pub fn has_vertex(&self, level: Level, v: Vertex) -> bool {
        if !self.indexing().contains(v) {
            return false;
        }
        match &self.inner.rule {
            Rule::Explicit { levels, extension } => {
                if level == 0 {
                    levels
                        .first()
                        .map(|m| m.values().any(|row| row.iter().any(|(w, _)| *w == v)))
                        .unwrap_or(false)
                } else {
                    match explicit_level(levels, *extension, level - 1) {
                        Ok(m) => m.contains_key(&v),
                        Err(_) => false,
                    }
                }
            }
            Rule::Relabeled { base, map } => match map.inverse(level, v) {
                Ok(u) => base.has_vertex(level, u),
                Err(_) => false,
            },
            _ => true,
        }
    }

    pub fn check_vertex(&self, level: Level, v: Vertex) -> Result<()> {
        if self.has_vertex(level, v) {
            Ok(())
        } else {
            Err(GbdError::InvalidVertex { level, vertex: v })
        }
    }

    /// Vertices of `level` inside `win`, ascending.
    pub fn window_vertices(&self, level: Level, win: Interval) -> Vec<Vertex> {
        let win = self.indexing().clip(win);
        win.iter().filter(|&v| self.has_vertex(level, v)).collect()
    }

    /// Nonzero entries of row `v` of `F_n`: the sources of `v in V_{n+1}`
    /// with multiplicities, ascending by source.
    pub fn in_edges(&self, n: Level, v: Vertex) -> Result<Vec<(Vertex, Mult)>> {
        let idx = self.indexing();
        idx.check(n + 1, v)?;
        let row = match &self.inner.rule {
            Rule::Banded { offsets } => offsets
                .iter()
                .map(|(o, m)| (v + o, *m))
                .filter(|(w, _)| idx.contains(*w))
                .collect(),
            Rule::RenewalShift => {
                let b = idx.base().unwrap_or(1);
                vec![(b, 1), (v + 1, 1)]
            }
            Rule::BInfinity => {
                let b = idx.base().unwrap_or(1);
                (b..=v).map(|w| (w, 1)).collect()
            }
            Rule::Odometer { diagonal } => vec![(v, diagonal.at(v)), (v + 1, 1)],
            Rule::StarOdometer => {
                let b = idx.base().unwrap_or(1);
                if v == b {
                    vec![(b, 2)]
                } else {
                    vec![(b, 1), (v, 3)]
                }
            }
            Rule::InterleavedPrime => match v {
                0 => vec![(0, 2), (1, 1), (2, 1)],
                1 => vec![(0, 1), (1, 2), (3, 1)],
                2 => vec![(0, 1), (2, 2), (4, 1)],
                3 => vec![(1, 1), (3, 2), (5, 1)],
                i => vec![(i - 2, 1), (i, 2), (i + 2, 1)],
            },
            Rule::Explicit { levels, extension } => {
                let table = explicit_level(levels, *extension, n)?;
                table
                    .get(&v)
                    .cloned()
                    .ok_or(GbdError::InvalidVertex { level: n + 1, vertex: v })?
            }
            Rule::Relabeled { base, map } => {
                let u = map.inverse(n + 1, v)?;
                let mut row = Vec::new();
                for (w, m) in base.in_edges(n, u)? {
                    row.push((map.forward(n, w)?, m));
                }
                row.sort_unstable();
                row
            }
        };
        Ok(row)
    }

    /// `f^{(n)}_{vw}`: number of edges from `w in V_n` to `v in V_{n+1}`.
    pub fn mult(&self, n: Level, v: Vertex, w: Vertex) -> Result<Mult> {
        let row = self.in_edges(n, v)?;
        Ok(row.iter().find(|(s, _)| *s == w).map(|(_, m)| *m).unwrap_or(0))
    }

    /// Targets of column `w` of `F_n`.
    pub fn column_support(&self, n: Level, w: Vertex) -> Result<ColumnSupport> {
        let idx = self.indexing();
        idx.check(n, w)?;
        let candidates: Vec<Vertex> = match &self.inner.rule {
            Rule::Banded { offsets } => offsets.keys().rev().map(|o| w - o).collect(),
            Rule::RenewalShift => {
                if Some(w) == idx.base() {
                    return Ok(ColumnSupport::Infinite);
                }
                vec![w - 1]
            }
            Rule::BInfinity => return Ok(ColumnSupport::Infinite),
            Rule::Odometer { .. } => vec![w - 1, w],
            Rule::StarOdometer => {
                if Some(w) == idx.base() {
                    return Ok(ColumnSupport::Infinite);
                }
                vec![w]
            }
            Rule::InterleavedPrime => (w - 3..=w + 3).collect(),
            Rule::Explicit { levels, extension } => {
                let table = explicit_level(levels, *extension, n)?;
                table
                    .iter()
                    .filter(|(_, row)| row.iter().any(|(s, _)| *s == w))
                    .map(|(v, _)| *v)
                    .collect()
            }
            Rule::Relabeled { base, map } => {
                let u = map.inverse(n, w)?;
                return Ok(match base.column_support(n, u)? {
                    ColumnSupport::Finite(vs) => {
                        let mut out = Vec::with_capacity(vs.len());
                        for v in vs {
                            out.push(map.forward(n + 1, v)?);
                        }
                        out.sort_unstable();
                        ColumnSupport::Finite(out)
                    }
                    other => other,
                });
            }
        };
        let mut out = Vec::new();
        for v in candidates {
            if self.has_vertex(n + 1, v) && self.mult(n, v, w)? > 0 {
                out.push(v);
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(ColumnSupport::Finite(out))
    }

    /// All `(v, mult)` with `v` in `win` and `f^{(n)}_{vw} = mult > 0`.
    pub fn out_edges_in_window(
        &self,
        n: Level,
        w: Vertex,
        win: Interval,
    ) -> Result<Vec<(Vertex, Mult)>> {
        self.check_vertex(n, w)?;
        if win.is_empty() {
            return Ok(Vec::new());
        }
        let targets: Vec<Vertex> = match self.column_support(n, w)? {
            ColumnSupport::Finite(vs) => vs.into_iter().filter(|v| win.contains(*v)).collect(),
            _ => self.window_vertices(n + 1, win),
        };
        let mut out = Vec::new();
        for v in targets {
            let m = self.mult(n, v, w)?;
            if m > 0 {
                out.push((v, m));
            }
        }
        Ok(out)
    }

    /// Dense block of `F_n` with rows in `rows` (level `n + 1`) and columns
    /// in `cols` (level `n`).
    pub fn incidence_window(
        &self,
        n: Level,
        rows: Interval,
        cols: Interval,
    ) -> Result<Vec<Vec<Mult>>> {
        let mut out = Vec::with_capacity(rows.len());
        for v in rows.iter() {
            let row = self.in_edges(n, v)?;
            let mut dense = vec![0; cols.len()];
            for (w, m) in row {
                if cols.contains(w) {
                    dense[(w - cols.lo) as usize] = m;
                }
            }
            out.push(dense);
        }
        Ok(out)
    }

    fn verify_construction(&self) -> Result<()> {
        let idx = self.indexing();
        let win = idx.centered(FLAG_CHECK_RADIUS);
        let mut level0_rows: Option<Vec<Vec<(Vertex, Mult)>>> = None;
        for n in 0..=FLAG_CHECK_LEVELS {
            if let Rule::Explicit { levels, extension: ExtensionPolicy::ErrorBeyond } =
                &self.inner.rule
            {
                if n >= levels.len() {
                    break;
                }
            }
            let rows_win = self.row_check_window(n, win);
            let mut rows = Vec::new();
            for v in rows_win {
                let row = self.in_edges(n, v)?;
                if row.is_empty() {
                    return Err(GbdError::Invariant(format!(
                        "row {v} of F_{n} is entirely zero"
                    )));
                }
                if let Some((w, _)) = row.iter().find(|(_, m)| *m == 0) {
                    return Err(GbdError::Invariant(format!(
                        "zero multiplicity listed for edge {w} -> {v} at level {n}"
                    )));
                }
                if let Some((w, _)) = row.iter().find(|(w, _)| !idx.contains(*w)) {
                    return Err(GbdError::InvalidVertex { level: n, vertex: *w });
                }
                rows.push(row);
            }
            for w in self.window_vertices(n, win.widen(-1).max_nonempty(win)) {
                if let ColumnSupport::Finite(vs) = self.column_support(n, w)? {
                    if vs.is_empty() && !matches!(self.inner.rule, Rule::Explicit { .. }) {
                        return Err(GbdError::Invariant(format!(
                            "column {w} of F_{n} is entirely zero"
                        )));
                    }
                }
            }
            if self.is_stationary() {
                match &level0_rows {
                    None => level0_rows = Some(rows),
                    Some(first) if *first != rows => {
                        return Err(GbdError::FlagRejected {
                            flag: "stationary".into(),
                            detail: format!("rows of F_{n} differ from F_0"),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
        for flag in self.flags() {
            self.verify_flag(flag, win)?;
        }
        Ok(())
    }

    fn row_check_window(&self, n: Level, win: Interval) -> Vec<Vertex> {
        match &self.inner.rule {
            Rule::Explicit { levels, extension } => match explicit_level(levels, *extension, n) {
                Ok(m) => m.keys().copied().collect(),
                Err(_) => Vec::new(),
            },
            _ => self.window_vertices(n + 1, win),
        }
    }

    fn verify_flag(&self, flag: &Flag, win: Interval) -> Result<()> {
        let reject = |detail: String| GbdError::FlagRejected { flag: flag.name().into(), detail };
        let idx = self.indexing();
        for n in 0..=FLAG_CHECK_LEVELS {
            if let Rule::Explicit { levels, extension: ExtensionPolicy::ErrorBeyond } =
                &self.inner.rule
            {
                if n >= levels.len() {
                    break;
                }
            }
            for v in self.row_check_window(n, win) {
                let row = self.in_edges(n, v)?;
                match flag {
                    Flag::Banded(offsets) => {
                        let expected: Vec<(Vertex, Mult)> = offsets
                            .iter()
                            .map(|(o, m)| (v + o, *m))
                            .filter(|(w, _)| idx.contains(*w))
                            .collect();
                        if row != expected {
                            return Err(reject(format!(
                                "row {v} of F_{n} is {row:?}, band predicts {expected:?}"
                            )));
                        }
                    }
                    Flag::LowerTriangularSupport => {
                        if let Some((w, _)) = row.iter().find(|(w, _)| *w > v) {
                            return Err(reject(format!("edge {w} -> {v} at level {n}")));
                        }
                    }
                    Flag::UpperTriangularSupport => {
                        if let Some((w, _)) = row.iter().find(|(w, _)| *w < v) {
                            return Err(reject(format!("edge {w} -> {v} at level {n}")));
                        }
                    }
                    Flag::FullOutColumn(u) => {
                        if !row.iter().any(|(w, _)| w == u) {
                            return Err(reject(format!("no edge {u} -> {v} at level {n}")));
                        }
                    }
                    Flag::BoundedSize { t, l } => {
                        if idx != VertexIndexing::TwoSided {
                            return Err(reject("bounded size requires two-sided levels".into()));
                        }
                        let t_n = t.at(n) as i64;
                        if let Some((w, _)) = row.iter().find(|(w, _)| (w - v).abs() > t_n) {
                            return Err(reject(format!(
                                "source {w} of {v} at level {n} is farther than t = {t_n}"
                            )));
                        }
                        let sum: Mult = row.iter().map(|(_, m)| m).sum();
                        if sum > l.at(n) {
                            return Err(reject(format!(
                                "row sum {sum} of {v} at level {n} exceeds L = {}",
                                l.at(n)
                            )));
                        }
                    }
                    Flag::ExplicitFiniteLevels(policy) => match &self.inner.rule {
                        Rule::Explicit { extension, .. } if extension == policy => {}
                        _ => return Err(reject("diagram is not given by explicit levels".into())),
                    },
                }
            }
        }
        if let Flag::FullOutColumn(u) = flag {
            if !idx.contains(*u) {
                return Err(reject(format!("vertex {u} is outside the indexing")));
            }
        }
        Ok(())
    }
}

impl Interval {
    fn max_nonempty(self, fallback: Interval) -> Interval {
        if self.is_empty() {
            fallback
        } else {
            self
        }
    }
}

pub(crate) fn explicit_level(
    levels: &[ExplicitLevel],
    extension: ExtensionPolicy,
    n: Level,
) -> Result<&ExplicitLevel> {
    match levels.get(n) {
        Some(m) => Ok(m),
        None => match extension {
            ExtensionPolicy::RepeatLast => levels.last().ok_or(GbdError::LevelOutOfRange(n)),
            ExtensionPolicy::ErrorBeyond => Err(GbdError::LevelOutOfRange(n)),
        },
    }
}

/// Minimum diagonal multiplicity permitted by an odometer rule on `indexing`.
pub(crate) fn diagonal_min(rule: &DiagonalRule, indexing: VertexIndexing) -> i64 {
    rule.min_over(indexing)
}
