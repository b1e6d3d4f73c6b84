use std::fmt;

use serde::Serialize;

use crate::error::{GbdError, Result};

pub type Vertex = i64;
pub type Level = usize;
pub type Mult = u64;

/// How the vertices of every level are identified with integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VertexIndexing {
    /// Valid ids are `base, base + 1, ...`.
    OneSidedFrom(Vertex),
    /// Every integer is a valid id.
    TwoSided,
}

impl VertexIndexing {
    pub fn contains(&self, v: Vertex) -> bool {
        match *self {
            VertexIndexing::OneSidedFrom(base) => v >= base,
            VertexIndexing::TwoSided => true,
        }
    }

    pub fn check(&self, level: Level, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GbdError::InvalidVertex { level, vertex: v })
        }
    }

    pub fn base(&self) -> Option<Vertex> {
        match *self {
            VertexIndexing::OneSidedFrom(base) => Some(base),
            VertexIndexing::TwoSided => None,
        }
    }

    /// Position of `v` in the canonical enumeration: `0, 1, -1, 2, -2, ...`
    /// for two-sided levels, `base, base + 1, ...` for one-sided ones.
    pub fn canonical_index(&self, v: Vertex) -> u64 {
        match *self {
            VertexIndexing::OneSidedFrom(base) => (v - base) as u64,
            VertexIndexing::TwoSided => {
                if v > 0 {
                    (2 * v - 1) as u64
                } else {
                    (-2 * v) as u64
                }
            }
        }
    }

    pub fn from_canonical_index(&self, k: u64) -> Vertex {
        match *self {
            VertexIndexing::OneSidedFrom(base) => base + k as i64,
            VertexIndexing::TwoSided => {
                let k = k as i64;
                if k % 2 == 1 {
                    (k + 1) / 2
                } else {
                    -k / 2
                }
            }
        }
    }

    /// Window of `2 * radius + 1` vertices: `[-r, r]` when two-sided,
    /// `[base, base + 2r]` when one-sided.
    pub fn centered(&self, radius: u64) -> Interval {
        let r = radius as i64;
        match *self {
            VertexIndexing::OneSidedFrom(base) => Interval::new(base, base + 2 * r),
            VertexIndexing::TwoSided => Interval::new(-r, r),
        }
    }

    /// Intersect an interval with the valid vertex range.
    pub fn clip(&self, win: Interval) -> Interval {
        match *self {
            VertexIndexing::OneSidedFrom(base) => Interval::new(win.lo.max(base), win.hi),
            VertexIndexing::TwoSided => win,
        }
    }

    pub fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for VertexIndexing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexIndexing::OneSidedFrom(b) => write!(f, "one_sided(base={b})"),
            VertexIndexing::TwoSided => write!(f, "two_sided"),
        }
    }
}

/// Inclusive integer interval; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Interval {
    pub lo: Vertex,
    pub hi: Vertex,
}

impl Interval {
    pub const EMPTY: Interval = Interval { lo: 1, hi: 0 };

    pub fn new(lo: Vertex, hi: Vertex) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: Vertex) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> {
        self.lo..=self.hi
    }

    pub fn hull(&self, v: Vertex) -> Interval {
        if self.is_empty() {
            Interval::point(v)
        } else {
            Interval::new(self.lo.min(v), self.hi.max(v))
        }
    }

    pub fn widen(&self, by: i64) -> Interval {
        Interval::new(self.lo - by, self.hi + by)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Per-level finite vertex intervals for levels `0..=max_level`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelWindow {
    intervals: Vec<Interval>,
}

impl LevelWindow {
    pub fn new(indexing: VertexIndexing, intervals: Vec<Interval>) -> Result<Self> {
        for (n, win) in intervals.iter().enumerate() {
            if win.is_empty() {
                return Err(GbdError::Schema(format!("empty window interval at level {n}")));
            }
            indexing.check(n, win.lo)?;
        }
        Ok(LevelWindow { intervals })
    }

    /// The same interval at every level `0..=max_level`.
    pub fn uniform(indexing: VertexIndexing, max_level: Level, win: Interval) -> Result<Self> {
        Self::new(indexing, vec![win; max_level + 1])
    }

    pub fn centered(indexing: VertexIndexing, max_level: Level, radius: u64) -> Self {
        LevelWindow { intervals: vec![indexing.centered(radius); max_level + 1] }
    }

    pub fn max_level(&self) -> Level {
        self.intervals.len().saturating_sub(1)
    }

    pub fn at(&self, level: Level) -> Interval {
        self.intervals.get(level).copied().unwrap_or(Interval::EMPTY)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn describe(&self) -> String {
        let first = self.intervals.first().copied().unwrap_or(Interval::EMPTY);
        if self.intervals.iter().all(|w| *w == first) {
            format!("levels 0..={} x {}", self.max_level(), first)
        } else {
            let parts: Vec<String> = self.intervals.iter().map(|w| w.to_string()).collect();
            format!("levels 0..={} x [{}]", self.max_level(), parts.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_enumeration_round_trips() {
        let two = VertexIndexing::TwoSided;
        let order: Vec<Vertex> = (0..7).map(|k| two.from_canonical_index(k)).collect();
        assert_eq!(order, vec![0, 1, -1, 2, -2, 3, -3]);
        for v in -20..=20 {
            assert_eq!(two.from_canonical_index(two.canonical_index(v)), v);
        }
        let one = VertexIndexing::OneSidedFrom(1);
        assert_eq!(one.canonical_index(1), 0);
        assert_eq!(one.from_canonical_index(4), 5);
    }

    #[test]
    fn centered_windows_have_equal_size() {
        assert_eq!(VertexIndexing::TwoSided.centered(8), Interval::new(-8, 8));
        assert_eq!(VertexIndexing::OneSidedFrom(0).centered(8), Interval::new(0, 16));
        assert_eq!(VertexIndexing::OneSidedFrom(1).centered(8).len(), 17);
    }

    #[test]
    fn window_rejects_vertices_below_base() {
        let idx = VertexIndexing::OneSidedFrom(1);
        assert!(LevelWindow::uniform(idx, 2, Interval::new(0, 4)).is_err());
        assert!(LevelWindow::uniform(idx, 2, Interval::new(1, 4)).is_ok());
    }
}
