//! Named diagram families.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::diagram::{diagonal_min, DiagonalRule, DiagramHandle, Flag, LevelRule, Rule};
use super::indexing::{Mult, VertexIndexing};
use crate::error::{GbdError, Result};

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub summary: &'static str,
}

pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "tridiag_B",
        params: "",
        summary: "two-sided, f_ii = 2, f_{i,i+-1} = 1",
    },
    CatalogEntry {
        name: "interleaved_Bprime",
        params: "",
        summary: "tridiag_B relabeled onto N0 by the interleaving map",
    },
    CatalogEntry {
        name: "shifted_Bsecond",
        params: "",
        summary: "tridiag_B relabeled by i -> i + n; lower triangular",
    },
    CatalogEntry {
        name: "renewal_shift",
        params: "",
        summary: "one-sided from 1; vertex 1 feeds every vertex, v feeds v - 1",
    },
    CatalogEntry {
        name: "banded",
        params: "offsets {source - target: mult}, side one|two, base",
        summary: "stationary band matrix",
    },
    CatalogEntry { name: "parity_1", params: "", summary: "f_ij = 1 iff |i - j| = 1" },
    CatalogEntry { name: "parity_2", params: "", summary: "f_ij = 1 iff |i - j| = 2" },
    CatalogEntry {
        name: "odometer_one_sided",
        params: "a: integer >= 2 or {index_plus: k}",
        summary: "upper triangular, a(v) on the diagonal, 1 above it",
    },
    CatalogEntry {
        name: "odometer_two_sided",
        params: "a: integer >= 2 or {index_plus: k}",
        summary: "two-sided version of the odometer family",
    },
    CatalogEntry {
        name: "b_infinity",
        params: "",
        summary: "one-sided from 1; ones on and below the diagonal",
    },
    CatalogEntry {
        name: "star_odometer",
        params: "",
        summary: "f_11 = 2, f_ii = 3, f_i1 = 1",
    },
    CatalogEntry {
        name: "growth_odometer",
        params: "",
        summary: "one-sided odometer with a_i = i + 1",
    },
];

/// Flags implied by a stationary band: the band itself, triangularity when
/// the offsets have one sign, and bounded size on two-sided levels.
pub(crate) fn banded_flags(offsets: &BTreeMap<i64, Mult>, indexing: VertexIndexing) -> Vec<Flag> {
    let mut flags = vec![Flag::Banded(offsets.clone())];
    if offsets.keys().all(|o| *o <= 0) {
        flags.push(Flag::LowerTriangularSupport);
    }
    if offsets.keys().all(|o| *o >= 0) {
        flags.push(Flag::UpperTriangularSupport);
    }
    if indexing == VertexIndexing::TwoSided {
        let t = offsets.keys().map(|o| o.unsigned_abs()).max().unwrap_or(0);
        let l = offsets.values().sum();
        flags.push(Flag::BoundedSize { t: LevelRule::Constant(t), l: LevelRule::Constant(l) });
    }
    flags
}

fn offsets(pairs: &[(i64, Mult)]) -> BTreeMap<i64, Mult> {
    pairs.iter().copied().collect()
}

pub fn banded(
    name: &str,
    offsets: BTreeMap<i64, Mult>,
    indexing: VertexIndexing,
) -> Result<DiagramHandle> {
    if offsets.is_empty() {
        return Err(GbdError::Invariant("banded rule with no offsets has empty rows".into()));
    }
    if let Some((o, _)) = offsets.iter().find(|(_, m)| **m == 0) {
        return Err(GbdError::Invariant(format!("offset {o} has multiplicity 0")));
    }
    let flags = banded_flags(&offsets, indexing);
    DiagramHandle::build(name, indexing, Rule::Banded { offsets }, true, flags)
}

pub fn tridiag_b() -> DiagramHandle {
    banded("tridiag_B", offsets(&[(-1, 1), (0, 2), (1, 1)]), VertexIndexing::TwoSided)
        .expect("catalog entry verifies")
}

pub fn interleaved_bprime() -> DiagramHandle {
    DiagramHandle::build(
        "interleaved_Bprime",
        VertexIndexing::OneSidedFrom(0),
        Rule::InterleavedPrime,
        true,
        Vec::new(),
    )
    .expect("catalog entry verifies")
}

pub fn shifted_bsecond() -> DiagramHandle {
    banded("shifted_Bsecond", offsets(&[(-2, 1), (-1, 2), (0, 1)]), VertexIndexing::TwoSided)
        .expect("catalog entry verifies")
}

pub fn renewal_shift() -> DiagramHandle {
    DiagramHandle::build(
        "renewal_shift",
        VertexIndexing::OneSidedFrom(1),
        Rule::RenewalShift,
        true,
        vec![Flag::FullOutColumn(1)],
    )
    .expect("catalog entry verifies")
}

pub fn parity_1() -> DiagramHandle {
    banded("parity_1", offsets(&[(-1, 1), (1, 1)]), VertexIndexing::TwoSided)
        .expect("catalog entry verifies")
}

pub fn parity_2() -> DiagramHandle {
    banded("parity_2", offsets(&[(-2, 1), (2, 1)]), VertexIndexing::TwoSided)
        .expect("catalog entry verifies")
}

fn odometer(name: &str, indexing: VertexIndexing, diagonal: DiagonalRule) -> Result<DiagramHandle> {
    if diagonal_min(&diagonal, indexing) < 2 {
        return Err(GbdError::Invariant(format!(
            "odometer diagonal {diagonal:?} drops below 2 on {indexing}"
        )));
    }
    let flags = match diagonal {
        DiagonalRule::Constant(a) => banded_flags(&offsets(&[(0, a), (1, 1)]), indexing),
        DiagonalRule::IndexPlus(_) => vec![Flag::UpperTriangularSupport],
    };
    DiagramHandle::build(name, indexing, Rule::Odometer { diagonal }, true, flags)
}

pub fn odometer_one_sided(diagonal: DiagonalRule) -> Result<DiagramHandle> {
    odometer("odometer_one_sided", VertexIndexing::OneSidedFrom(1), diagonal)
}

pub fn odometer_two_sided(diagonal: DiagonalRule) -> Result<DiagramHandle> {
    odometer("odometer_two_sided", VertexIndexing::TwoSided, diagonal)
}

pub fn growth_odometer() -> DiagramHandle {
    odometer("growth_odometer", VertexIndexing::OneSidedFrom(1), DiagonalRule::IndexPlus(1))
        .expect("catalog entry verifies")
}

pub fn b_infinity() -> DiagramHandle {
    DiagramHandle::build(
        "b_infinity",
        VertexIndexing::OneSidedFrom(1),
        Rule::BInfinity,
        true,
        vec![Flag::LowerTriangularSupport, Flag::FullOutColumn(1)],
    )
    .expect("catalog entry verifies")
}

pub fn star_odometer() -> DiagramHandle {
    DiagramHandle::build(
        "star_odometer",
        VertexIndexing::OneSidedFrom(1),
        Rule::StarOdometer,
        true,
        vec![Flag::LowerTriangularSupport, Flag::FullOutColumn(1)],
    )
    .expect("catalog entry verifies")
}

/// Every parameterless family plus the default odometers, in catalog order.
pub fn all_default() -> Vec<DiagramHandle> {
    ENTRIES
        .iter()
        .filter(|e| e.name != "banded")
        .map(|e| by_name(e.name).expect("default parameters are valid"))
        .collect()
}

fn int_param(v: &Value, what: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| GbdError::Schema(format!("{what} must be an integer")))
}

fn diagonal_param(params: &Map<String, Value>) -> Result<DiagonalRule> {
    match params.get("a") {
        None => Ok(DiagonalRule::Constant(2)),
        Some(Value::Object(m)) => match m.get("index_plus") {
            Some(k) if m.len() == 1 => Ok(DiagonalRule::IndexPlus(int_param(k, "a.index_plus")?)),
            _ => Err(GbdError::Schema("a must be an integer or {index_plus: k}".into())),
        },
        Some(v) => {
            let a = int_param(v, "a")?;
            if a < 0 {
                return Err(GbdError::Invariant(format!("diagonal multiplicity {a} is negative")));
            }
            Ok(DiagonalRule::Constant(a as Mult))
        }
    }
}

fn check_keys(params: &Map<String, Value>, allowed: &[&str], family: &str) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(GbdError::Schema(format!("unknown parameter {key:?} for {family}")));
        }
    }
    Ok(())
}

fn parse_offsets(v: &Value) -> Result<BTreeMap<i64, Mult>> {
    let map = v
        .as_object()
        .ok_or_else(|| GbdError::Schema("offsets must be a map {offset: mult}".into()))?;
    let mut out = BTreeMap::new();
    for (k, m) in map {
        let o: i64 =
            k.trim().parse().map_err(|_| GbdError::Schema(format!("offset key {k:?}")))?;
        let m = int_param(m, "offset multiplicity")?;
        if m < 0 {
            return Err(GbdError::Invariant(format!("offset {o} has negative multiplicity")));
        }
        out.insert(o, m as Mult);
    }
    Ok(out)
}

/// Build a catalog family by name. `params` holds the family parameters.
pub fn build(name: &str, params: &Map<String, Value>) -> Result<DiagramHandle> {
    match name {
        "banded" => {
            check_keys(params, &["offsets", "side", "base"], name)?;
            let offs = match params.get("offsets") {
                Some(v) => parse_offsets(v)?,
                None => return Err(GbdError::Schema("banded requires offsets".into())),
            };
            let base = match params.get("base") {
                Some(v) => int_param(v, "base")?,
                None => 0,
            };
            let indexing = match params.get("side").map(|s| s.as_str()) {
                None | Some(Some("two")) => VertexIndexing::TwoSided,
                Some(Some("one")) => VertexIndexing::OneSidedFrom(base),
                _ => return Err(GbdError::Schema("side must be \"one\" or \"two\"".into())),
            };
            banded("banded", offs, indexing)
        }
        "odometer_one_sided" => {
            check_keys(params, &["a"], name)?;
            odometer_one_sided(diagonal_param(params)?)
        }
        "odometer_two_sided" => {
            check_keys(params, &["a"], name)?;
            odometer_two_sided(diagonal_param(params)?)
        }
        _ => {
            check_keys(params, &[], name)?;
            Ok(match name {
                "tridiag_B" => tridiag_b(),
                "interleaved_Bprime" => interleaved_bprime(),
                "shifted_Bsecond" => shifted_bsecond(),
                "renewal_shift" => renewal_shift(),
                "parity_1" => parity_1(),
                "parity_2" => parity_2(),
                "b_infinity" => b_infinity(),
                "star_odometer" => star_odometer(),
                "growth_odometer" => growth_odometer(),
                other => return Err(GbdError::UnknownKind(format!("catalog family {other:?}"))),
            })
        }
    }
}

/// Build a parameterless family (or a default-parameter one) by name.
pub fn by_name(name: &str) -> Result<DiagramHandle> {
    if name == "banded" {
        return Err(GbdError::Schema("banded requires offsets".into()));
    }
    build(name, &Map::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_default_entry_builds() {
        let all: Vec<String> = ENTRIES
            .iter()
            .filter(|e| e.name != "banded")
            .map(|e| by_name(e.name).unwrap().name().to_string())
            .collect();
        assert_eq!(all.len(), ENTRIES.len() - 1);
    }

    #[test]
    fn odometer_rejects_small_diagonal() {
        assert!(odometer_one_sided(DiagonalRule::Constant(1)).is_err());
        assert!(odometer_two_sided(DiagonalRule::IndexPlus(1)).is_err());
        assert!(odometer_two_sided(DiagonalRule::IndexPlus(2)).is_ok());
    }

    #[test]
    fn one_sided_band_with_only_negative_offsets_has_empty_rows() {
        let offs = offsets(&[(-1, 1)]);
        assert!(matches!(
            banded("b", offs, VertexIndexing::OneSidedFrom(0)),
            Err(GbdError::Invariant(_))
        ));
    }
}
