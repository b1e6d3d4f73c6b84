//! Serialized diagram specs.
//!
//! A spec is a JSON object or a TOML document with the same shape:
//!
//! ```toml
//! family = "banded"
//! side = "two"
//! [offsets]
//! "-1" = 1
//! "0" = 2
//! "1" = 1
//! ```
//!
//! Integers only; a float anywhere is a parse error.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::catalog;
use super::diagram::{DiagramHandle, ExplicitLevel, ExtensionPolicy, Flag, LevelRule, Rule};
use super::indexing::{Mult, Vertex, VertexIndexing};
use crate::dynamics::PathGenerator;
use crate::error::{GbdError, Result};
use crate::relabel::{builtin_bijection, VertexBijectionSeq};

fn toml_to_json(v: toml::Value, path: &str) -> Result<Value> {
    Ok(match v {
        toml::Value::String(s) => Value::String(s),
        toml::Value::Integer(i) => Value::from(i),
        toml::Value::Boolean(b) => Value::Bool(b),
        toml::Value::Float(_) => {
            return Err(GbdError::Parse(format!("float at {path}: only integers are allowed")))
        }
        toml::Value::Datetime(_) => {
            return Err(GbdError::Parse(format!("datetime at {path} is not allowed")))
        }
        toml::Value::Array(items) => Value::Array(
            items
                .into_iter()
                .enumerate()
                .map(|(i, x)| toml_to_json(x, &format!("{path}[{i}]")))
                .collect::<Result<_>>()?,
        ),
        toml::Value::Table(t) => {
            let mut m = Map::new();
            for (k, x) in t {
                let sub = toml_to_json(x, &format!("{path}.{k}"))?;
                m.insert(k, sub);
            }
            Value::Object(m)
        }
    })
}

fn reject_floats(v: &Value, path: &str) -> Result<()> {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            Err(GbdError::Parse(format!("float at {path}: only integers are allowed")))
        }
        Value::Array(items) => items
            .iter()
            .enumerate()
            .try_for_each(|(i, x)| reject_floats(x, &format!("{path}[{i}]"))),
        Value::Object(m) => m.iter().try_for_each(|(k, x)| reject_floats(x, &format!("{path}.{k}"))),
        _ => Ok(()),
    }
}

/// Parse spec text (JSON if it starts with `{`, TOML otherwise) into a
/// float-free JSON value.
pub fn spec_value(text: &str) -> Result<Value> {
    let trimmed = text.trim_start();
    let value = if trimmed.starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| GbdError::Parse(e.to_string()))?;
        reject_floats(&v, "$")?;
        v
    } else {
        let t: toml::Table = toml::from_str(text).map_err(|e| GbdError::Parse(e.to_string()))?;
        toml_to_json(toml::Value::Table(t), "$")?
    };
    if !value.is_object() {
        return Err(GbdError::Schema("a spec must be a map at top level".into()));
    }
    Ok(value)
}

fn as_int(v: &Value, what: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| GbdError::Schema(format!("{what} must be an integer")))
}

fn as_obj<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| GbdError::Schema(format!("{what} must be a map")))
}

fn parse_key(k: &str, what: &str) -> Result<Vertex> {
    k.trim().parse().map_err(|_| GbdError::Schema(format!("{what} key {k:?} is not an integer")))
}

/// `{mode: one_sided|two_sided, base}`.
pub fn parse_indexing(v: &Value) -> Result<VertexIndexing> {
    let m = as_obj(v, "indexing")?;
    for k in m.keys() {
        if k != "mode" && k != "base" {
            return Err(GbdError::Schema(format!("unknown indexing field {k:?}")));
        }
    }
    let base = match m.get("base") {
        Some(b) => Some(as_int(b, "indexing.base")?),
        None => None,
    };
    match m.get("mode").and_then(Value::as_str) {
        Some("one_sided") | Some("one") => Ok(VertexIndexing::OneSidedFrom(base.unwrap_or(0))),
        Some("two_sided") | Some("two") => {
            if base.is_some() {
                return Err(GbdError::Schema("two-sided indexing takes no base".into()));
            }
            Ok(VertexIndexing::TwoSided)
        }
        _ => Err(GbdError::Schema("indexing.mode must be one_sided or two_sided".into())),
    }
}

/// An integer (constant) or a nonempty list of integers (per level, last repeats).
pub fn parse_level_rule(v: &Value) -> Result<LevelRule> {
    let nonneg = |x: &Value| -> Result<u64> {
        let i = as_int(x, "level rule entry")?;
        u64::try_from(i).map_err(|_| GbdError::Schema(format!("level rule entry {i} is negative")))
    };
    match v {
        Value::Array(items) if !items.is_empty() => {
            Ok(LevelRule::PerLevel(items.iter().map(nonneg).collect::<Result<_>>()?))
        }
        Value::Number(_) => Ok(LevelRule::Constant(nonneg(v)?)),
        _ => Err(GbdError::Schema("level rule must be an integer or a nonempty list".into())),
    }
}

fn parse_extension(v: Option<&Value>) -> Result<ExtensionPolicy> {
    match v.map(|x| x.as_str()) {
        None | Some(Some("error_beyond")) => Ok(ExtensionPolicy::ErrorBeyond),
        Some(Some("repeat_last")) => Ok(ExtensionPolicy::RepeatLast),
        _ => Err(GbdError::Schema("extension must be repeat_last or error_beyond".into())),
    }
}

fn parse_flag(v: &Value) -> Result<Flag> {
    if let Some(s) = v.as_str() {
        return match s {
            "lower_triangular" => Ok(Flag::LowerTriangularSupport),
            "upper_triangular" => Ok(Flag::UpperTriangularSupport),
            other => Err(GbdError::Schema(format!("unknown flag {other:?}"))),
        };
    }
    let m = as_obj(v, "flag")?;
    if m.len() != 1 {
        return Err(GbdError::Schema("a flag map must have exactly one key".into()));
    }
    let (k, x) = m.iter().next().expect("one entry");
    match k.as_str() {
        "full_out_column" => Ok(Flag::FullOutColumn(as_int(x, "full_out_column")?)),
        "banded" => {
            let mut offsets = BTreeMap::new();
            for (o, mult) in as_obj(x, "banded flag")? {
                let mult = as_int(mult, "banded multiplicity")?;
                offsets.insert(parse_key(o, "offset")?, mult.max(0) as Mult);
            }
            Ok(Flag::Banded(offsets))
        }
        "bounded_size" => {
            let b = as_obj(x, "bounded_size")?;
            let t = b.get("t").ok_or_else(|| GbdError::Schema("bounded_size needs t".into()))?;
            let l = b.get("l").ok_or_else(|| GbdError::Schema("bounded_size needs l".into()))?;
            Ok(Flag::BoundedSize { t: parse_level_rule(t)?, l: parse_level_rule(l)? })
        }
        "explicit_finite_levels" => Ok(Flag::ExplicitFiniteLevels(parse_extension(Some(x))?)),
        other => Err(GbdError::Schema(format!("unknown flag {other:?}"))),
    }
}

fn parse_explicit(
    v: &Value,
    indexing: VertexIndexing,
) -> Result<(Vec<ExplicitLevel>, ExtensionPolicy)> {
    let m = as_obj(v, "explicit")?;
    for k in m.keys() {
        if k != "levels" && k != "extension" {
            return Err(GbdError::Schema(format!("unknown explicit field {k:?}")));
        }
    }
    let extension = parse_extension(m.get("extension"))?;
    let raw = m
        .get("levels")
        .and_then(Value::as_array)
        .ok_or_else(|| GbdError::Schema("explicit.levels must be a list".into()))?;
    if raw.is_empty() {
        return Err(GbdError::Invariant("explicit diagram with no levels".into()));
    }
    let mut levels = Vec::with_capacity(raw.len());
    for (n, lvl) in raw.iter().enumerate() {
        let mut table = ExplicitLevel::new();
        for (rk, row) in as_obj(lvl, "explicit level")? {
            let v = parse_key(rk, "row")?;
            if !indexing.contains(v) {
                return Err(GbdError::Schema(format!("row {v} of level {n} is outside {indexing}")));
            }
            let mut entries = Vec::new();
            for (ck, mult) in as_obj(row, "explicit row")? {
                let w = parse_key(ck, "column")?;
                if !indexing.contains(w) {
                    return Err(GbdError::Schema(format!(
                        "column {w} of level {n} is outside {indexing}"
                    )));
                }
                let mult = as_int(mult, "multiplicity")?;
                if mult < 0 {
                    return Err(GbdError::Invariant(format!("negative multiplicity at {w} -> {v}")));
                }
                if mult > 0 {
                    entries.push((w, mult as Mult));
                }
            }
            if entries.is_empty() {
                return Err(GbdError::Invariant(format!("row {v} of level {n} is entirely zero")));
            }
            entries.sort_unstable();
            table.insert(v, entries);
        }
        if table.is_empty() {
            return Err(GbdError::Invariant(format!("level {n} has no rows")));
        }
        levels.push(table);
    }
    let cols = |t: &ExplicitLevel| -> BTreeSet<Vertex> {
        t.values().flat_map(|r| r.iter().map(|(w, _)| *w)).collect()
    };
    for n in 1..levels.len() {
        let rows_prev: BTreeSet<Vertex> = levels[n - 1].keys().copied().collect();
        let cols_here = cols(&levels[n]);
        if let Some(w) = cols_here.difference(&rows_prev).next() {
            return Err(GbdError::Invariant(format!(
                "level {n} uses source {w}, which is not a vertex of that level"
            )));
        }
        if let Some(w) = rows_prev.difference(&cols_here).next() {
            return Err(GbdError::Invariant(format!(
                "column {w} of level {n} is entirely zero"
            )));
        }
    }
    if extension == ExtensionPolicy::RepeatLast {
        let last = levels.last().expect("nonempty");
        let rows: BTreeSet<Vertex> = last.keys().copied().collect();
        if rows != cols(last) {
            return Err(GbdError::Invariant(
                "repeat_last needs the last level's rows and columns to be the same vertex set"
                    .into(),
            ));
        }
    }
    Ok((levels, extension))
}

/// Load a diagram from spec text.
pub fn load_spec(text: &str) -> Result<DiagramHandle> {
    let value = spec_value(text)?;
    let top = value.as_object().expect("checked by spec_value");
    let indexing = match top.get("indexing") {
        Some(v) => Some(parse_indexing(v)?),
        None => None,
    };
    let mut flags = Vec::new();
    if let Some(fs) = top.get("flags") {
        let list = fs.as_array().ok_or_else(|| GbdError::Schema("flags must be a list".into()))?;
        for f in list {
            flags.push(parse_flag(f)?);
        }
    }
    let name = match top.get("name") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(GbdError::Schema("name must be a string".into())),
        None => None,
    };
    let handle = match (top.get("family"), top.get("explicit")) {
        (Some(_), Some(_)) => {
            return Err(GbdError::Schema("give either family or explicit, not both".into()))
        }
        (None, None) => return Err(GbdError::Schema("spec needs family or explicit".into())),
        (Some(fam), None) => {
            let (fname, mut params) = match fam {
                Value::String(s) => {
                    let params: Map<String, Value> = top
                        .iter()
                        .filter(|(k, _)| {
                            !matches!(k.as_str(), "family" | "indexing" | "flags" | "name")
                        })
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect();
                    (s.clone(), params)
                }
                Value::Object(m) => {
                    let fname = m
                        .get("name")
                        .and_then(Value::as_str)
                        .ok_or_else(|| GbdError::Schema("family.name must be a string".into()))?;
                    let params = match m.get("params") {
                        Some(p) => as_obj(p, "family.params")?.clone(),
                        None => Map::new(),
                    };
                    (fname.to_string(), params)
                }
                _ => return Err(GbdError::Schema("family must be a name or {name, params}".into())),
            };
            if fname == "banded" {
                if let Some(idx) = indexing {
                    match idx {
                        VertexIndexing::TwoSided => {
                            params.insert("side".into(), Value::from("two"));
                        }
                        VertexIndexing::OneSidedFrom(b) => {
                            params.insert("side".into(), Value::from("one"));
                            params.insert("base".into(), Value::from(b));
                        }
                    }
                }
            }
            let d = catalog::build(&fname, &params)?;
            if let Some(idx) = indexing {
                if idx != d.indexing() {
                    return Err(GbdError::Schema(format!(
                        "family {fname} is indexed {}, spec says {idx}",
                        d.indexing()
                    )));
                }
            }
            d
        }
        (None, Some(ex)) => {
            for k in top.keys() {
                if !matches!(k.as_str(), "explicit" | "indexing" | "flags" | "name") {
                    return Err(GbdError::Schema(format!("unknown field {k:?}")));
                }
            }
            let idx = indexing.unwrap_or(VertexIndexing::TwoSided);
            let (levels, extension) = parse_explicit(ex, idx)?;
            let stationary = levels.len() == 1 && extension == ExtensionPolicy::RepeatLast;
            DiagramHandle::build(
                name.clone().unwrap_or_else(|| "explicit".into()),
                idx,
                Rule::Explicit { levels, extension },
                stationary,
                vec![Flag::ExplicitFiniteLevels(extension)],
            )?
        }
    };
    let handle = if flags.is_empty() { handle } else { handle.with_extra_flags(flags)? };
    let canonical = serde_json::to_string(&value).expect("json values serialize");
    let fingerprint = hex::encode(Sha256::digest(canonical.as_bytes()));
    Ok(handle.with_fingerprint(fingerprint))
}

/// `{kind, params, tables}` bijection specs; see [`builtin_bijection`].
pub fn parse_bijection_spec(v: &Value) -> Result<VertexBijectionSeq> {
    let m = as_obj(v, "bijection")?;
    let kind = m
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| GbdError::Schema("bijection.kind must be a string".into()))?;
    let mut params = match m.get("params") {
        Some(p) => as_obj(p, "bijection.params")?.clone(),
        None => Map::new(),
    };
    for (k, x) in m {
        if k != "kind" && k != "params" {
            params.insert(k.clone(), x.clone());
        }
    }
    builtin_bijection(kind, &Value::Object(params))
}

/// `{kind, start, prefix}` generator specs; see [`PathGenerator::from_value`].
pub fn parse_generator_spec(v: &Value) -> Result<PathGenerator> {
    PathGenerator::from_value(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_is_a_parse_error() {
        let e = load_spec(r#"{"family":"banded","offsets":{"0":1.5}}"#).unwrap_err();
        assert!(matches!(e, GbdError::Parse(_)), "{e:?}");
        let e = load_spec("family = \"banded\"\n[offsets]\n\"0\" = 1.0\n").unwrap_err();
        assert!(matches!(e, GbdError::Parse(_)), "{e:?}");
    }

    #[test]
    fn toml_and_json_agree() {
        let a = load_spec(r#"{"family":"banded","side":"two","offsets":{"-1":1,"0":2,"1":1}}"#)
            .unwrap();
        let b = load_spec("family = \"banded\"\nside = \"two\"\n[offsets]\n\"-1\" = 1\n\"0\" = 2\n\"1\" = 1\n")
            .unwrap();
        for v in -3..=3 {
            assert_eq!(a.in_edges(0, v).unwrap(), b.in_edges(0, v).unwrap());
        }
    }

    #[test]
    fn explicit_levels_and_extension() {
        let text = r#"{"indexing":{"mode":"one_sided","base":0},
            "explicit":{"levels":[{"0":{"0":1,"1":1},"1":{"1":2}}],"extension":"repeat_last"}}"#;
        let d = load_spec(text).unwrap();
        assert!(d.is_stationary());
        assert_eq!(d.in_edges(7, 1).unwrap(), vec![(1, 2)]);
        assert!(d.in_edges(0, 2).is_err());

        let text = r#"{"explicit":{"levels":[{"0":{"0":1}}]}}"#;
        let d = load_spec(text).unwrap();
        assert_eq!(d.in_edges(1, 0), Err(GbdError::LevelOutOfRange(1)));
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(load_spec("{\"family\": 3}"), Err(GbdError::Schema(_))));
        assert!(matches!(load_spec("[1]"), Err(GbdError::Parse(_) | GbdError::Schema(_))));
        assert!(matches!(
            load_spec(r#"{"family":"renewal_shift","indexing":{"mode":"two_sided"}}"#),
            Err(GbdError::Schema(_))
        ));
        assert!(matches!(
            load_spec(r#"{"family":"tridiag_B","flags":["lower_triangular"]}"#),
            Err(GbdError::FlagRejected { .. })
        ));
    }
}
