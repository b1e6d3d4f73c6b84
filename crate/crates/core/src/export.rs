//! DOT and plain-text renderings of finite truncations.

use std::fmt::Write as _;

use crate::error::Result;
use crate::model::{DiagramHandle, Interval, Level};

/// DOT text for levels `0..=depth` restricted to `window`: one node per
/// `(level, vertex)`, one edge per unit of multiplicity, one rank per level.
/// Output depends only on the arguments.
pub fn render_dot(d: &DiagramHandle, depth: Level, window: Interval) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "digraph gbd {{");
    let _ = writeln!(s, "  label=\"{}\";", d.name().replace('"', "'"));
    let _ = writeln!(s, "  rankdir=TB;");
    let _ = writeln!(s, "  node [shape=circle];");
    if window.is_empty() {
        s.push_str("}\n");
        return Ok(s);
    }
    for n in 0..=depth {
        let vs = d.window_vertices(n, window);
        if vs.is_empty() {
            continue;
        }
        let _ = write!(s, "  {{ rank=same;");
        for v in &vs {
            let _ = write!(s, " \"{n}:{v}\"");
        }
        s.push_str(" }\n");
        for v in &vs {
            let _ = writeln!(s, "  \"{n}:{v}\" [label=\"{v}\"];");
        }
    }
    for n in 0..depth {
        for v in d.window_vertices(n + 1, window) {
            for (w, m) in d.in_edges(n, v)? {
                if !window.contains(w) {
                    continue;
                }
                for _ in 0..m {
                    let _ = writeln!(s, "  \"{n}:{w}\" -> \"{}:{v}\";", n + 1);
                }
            }
        }
    }
    s.push_str("}\n");
    Ok(s)
}

/// Dense block of `F_n`, rows `v` at level `n + 1`, columns `w` at level `n`,
/// as whitespace-separated text with a header row of column labels.
pub fn render_matrix(d: &DiagramHandle, n: Level, rows: Interval, cols: Interval) -> Result<String> {
    let block = d.incidence_window(n, rows, cols)?;
    let mut s = String::new();
    let _ = write!(s, "F_{n}");
    for w in cols.iter() {
        let _ = write!(s, "\t{w}");
    }
    s.push('\n');
    for (v, row) in rows.iter().zip(block) {
        let _ = write!(s, "{v}");
        for x in row {
            let _ = write!(s, "\t{x}");
        }
        s.push('\n');
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;

    #[test]
    fn empty_window_is_header_only() {
        let s = render_dot(&catalog::renewal_shift(), 2, Interval::EMPTY).unwrap();
        assert!(!s.contains("->"));
        assert!(s.starts_with("digraph gbd {"));
    }

    #[test]
    fn renewal_truncation() {
        let s = render_dot(&catalog::renewal_shift(), 1, Interval::new(1, 5)).unwrap();
        for v in 1..=5 {
            assert!(s.contains(&format!("\"0:1\" -> \"1:{v}\"")));
        }
        for v in 1..=4 {
            assert!(s.contains(&format!("\"0:{}\" -> \"1:{v}\"", v + 1)));
        }
        assert_eq!(s.matches("->").count(), 9);
    }
}
