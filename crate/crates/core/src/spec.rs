//! JSON descriptions of groups, metrics and quotient maps, with canonical
//! serialization (sorted keys) and stable content hashes for caching.

use std::sync::Arc;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::groups::{
    Family, FiniteGroup, GroupElement, IntMat, MarkedGroup, QuotientMap, SubgroupRule,
};
use crate::metrics::MetricSpec;

/// Canonical text form of a JSON value. `serde_json` maps are ordered by
/// key, so serialization of a freshly built value is already canonical.
pub fn canonical_string(v: &Value) -> String {
    v.to_string()
}

/// Stable 16-hex-digit content hash of a JSON value.
pub fn spec_hash(v: &Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_string(v).as_bytes());
    hex::encode(&hasher.finalize()[..8])
}

pub fn group_to_json(g: &MarkedGroup) -> Value {
    let mut m = Map::new();
    match g.family() {
        Family::Free { rank } => {
            m.insert("family".into(), json!("free"));
            m.insert("rank".into(), json!(rank));
            let gens: Vec<Value> = g.generators().iter().map(|x| json!(x.token())).collect();
            m.insert("generators".into(), Value::Array(gens));
        }
        Family::FreeAbelian { dim } => {
            m.insert("family".into(), json!("free_abelian"));
            m.insert("dim".into(), json!(dim));
            let gens: Vec<Value> = g
                .generators()
                .iter()
                .map(|x| json!(x.as_abelian().unwrap()))
                .collect();
            m.insert("generators".into(), Value::Array(gens));
        }
        Family::Semidirect { dim, finite } => {
            m.insert("family".into(), json!("semidirect"));
            m.insert("dim".into(), json!(dim));
            let order = finite.order();
            let mult: Vec<Vec<u32>> = (0..order)
                .map(|i| (0..order).map(|j| finite.mul(i, j)).collect())
                .collect();
            let mats: Vec<Vec<Vec<i64>>> = (0..order)
                .map(|i| {
                    let mat = finite.matrix(i);
                    (0..mat.dim)
                        .map(|r| (0..mat.dim).map(|c| mat.at(r, c)).collect())
                        .collect()
                })
                .collect();
            m.insert(
                "finite_part".into(),
                json!({"mult_table": mult, "action_matrices": mats}),
            );
            let gens: Vec<Value> = g
                .generators()
                .iter()
                .map(|x| {
                    let (v, f) = x.as_semidirect().unwrap();
                    json!({"v": v, "f": f})
                })
                .collect();
            m.insert("generators".into(), Value::Array(gens));
        }
        Family::Subgroup { ambient, rule } => {
            m.insert("family".into(), json!("subgroup"));
            m.insert("ambient".into(), group_to_json(ambient));
            match rule {
                SubgroupRule::LatticeMultiple { k } => {
                    m.insert("rule".into(), json!({"type": "lattice_multiple", "k": k}));
                }
            }
        }
    }
    Value::Object(m)
}

pub fn group_hash(g: &MarkedGroup) -> String {
    spec_hash(&group_to_json(g))
}

fn get<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::InvalidSpec(format!("missing field {key:?}")))
}

fn as_usize(v: &Value, key: &str) -> Result<usize> {
    get(v, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::InvalidSpec(format!("field {key:?} must be a non-negative integer")))
}

fn parse_vec_i64(v: &Value) -> Result<Vec<i64>> {
    v.as_array()
        .ok_or_else(|| Error::InvalidSpec("expected an integer array".into()))?
        .iter()
        .map(|x| {
            x.as_i64()
                .ok_or_else(|| Error::InvalidSpec("expected an integer".into()))
        })
        .collect()
}

fn parse_matrix(v: &Value) -> Result<IntMat> {
    let rows: Vec<Vec<i64>> = v
        .as_array()
        .ok_or_else(|| Error::InvalidSpec("expected a matrix (array of rows)".into()))?
        .iter()
        .map(parse_vec_i64)
        .collect::<Result<_>>()?;
    IntMat::from_rows(&rows)
}

fn parse_finite_part(v: &Value) -> Result<FiniteGroup> {
    if let Some(n) = v.get("cyclic").and_then(Value::as_u64) {
        let mat = parse_matrix(get(v, "generator_matrix")?)?;
        return FiniteGroup::cyclic(n as u32, mat);
    }
    let table: Vec<Vec<u32>> = get(v, "mult_table")?
        .as_array()
        .ok_or_else(|| Error::InvalidSpec("mult_table must be an array".into()))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::InvalidSpec("mult_table row must be an array".into()))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|y| y as u32)
                        .ok_or_else(|| Error::InvalidSpec("table entry must be an integer".into()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mats: Vec<IntMat> = get(v, "action_matrices")?
        .as_array()
        .ok_or_else(|| Error::InvalidSpec("action_matrices must be an array".into()))?
        .iter()
        .map(parse_matrix)
        .collect::<Result<_>>()?;
    FiniteGroup::new(table, mats)
}

pub fn group_from_json(v: &Value) -> Result<Arc<MarkedGroup>> {
    let family = get(v, "family")?
        .as_str()
        .ok_or_else(|| Error::InvalidSpec("family must be a string".into()))?;
    match family {
        "free" => {
            let rank = as_usize(v, "rank")?;
            match v.get("generators") {
                None => Ok(MarkedGroup::free(rank)),
                Some(gens) => {
                    let words: Vec<Vec<i32>> = gens
                        .as_array()
                        .ok_or_else(|| Error::InvalidSpec("generators must be an array".into()))?
                        .iter()
                        .map(|g| {
                            let tok = g
                                .as_str()
                                .ok_or_else(|| Error::InvalidSpec("free generator must be a word token".into()))?;
                            Ok(GroupElement::parse_token(tok)?.as_free()?.to_vec())
                        })
                        .collect::<Result<_>>()?;
                    MarkedGroup::free_with_words(rank, &words)
                }
            }
        }
        "free_abelian" => {
            let dim = as_usize(v, "dim")?;
            match v.get("generators") {
                None => Ok(MarkedGroup::free_abelian(dim)),
                Some(gens) => {
                    let vecs: Vec<Vec<i64>> = gens
                        .as_array()
                        .ok_or_else(|| Error::InvalidSpec("generators must be an array".into()))?
                        .iter()
                        .map(parse_vec_i64)
                        .collect::<Result<_>>()?;
                    MarkedGroup::free_abelian_with(dim, &vecs)
                }
            }
        }
        "semidirect" => {
            let dim = as_usize(v, "dim")?;
            let finite = parse_finite_part(get(v, "finite_part")?)?;
            let gens: Vec<(Vec<i64>, u32)> = get(v, "generators")?
                .as_array()
                .ok_or_else(|| Error::InvalidSpec("generators must be an array".into()))?
                .iter()
                .map(|g| {
                    let vec = parse_vec_i64(get(g, "v")?)?;
                    let f = get(g, "f")?
                        .as_u64()
                        .ok_or_else(|| Error::InvalidSpec("finite label must be an integer".into()))?;
                    Ok((vec, f as u32))
                })
                .collect::<Result<_>>()?;
            MarkedGroup::semidirect(dim, finite, &gens)
        }
        "subgroup" => {
            let ambient = group_from_json(get(v, "ambient")?)?;
            let rule = get(v, "rule")?;
            let rtype = get(rule, "type")?
                .as_str()
                .ok_or_else(|| Error::InvalidSpec("rule type must be a string".into()))?;
            match rtype {
                "lattice_multiple" => {
                    let k = get(rule, "k")?
                        .as_i64()
                        .ok_or_else(|| Error::InvalidSpec("rule k must be an integer".into()))?;
                    MarkedGroup::subgroup(ambient, SubgroupRule::LatticeMultiple { k })
                }
                other => Err(Error::InvalidSpec(format!("unknown subgroup rule {other:?}"))),
            }
        }
        other => Err(Error::InvalidSpec(format!("unknown family {other:?}"))),
    }
}

pub fn quotient_to_json(q: &QuotientMap) -> Value {
    let images: Vec<Value> = q.images().iter().map(|g| json!(g.token())).collect();
    let mut m = Map::new();
    m.insert("source".into(), group_to_json(q.source()));
    m.insert("target".into(), group_to_json(q.target()));
    m.insert("images".into(), Value::Array(images));
    if let Some(c) = q.declared_compat() {
        m.insert("C".into(), json!(c));
    }
    Value::Object(m)
}

pub fn quotient_from_json(v: &Value) -> Result<Arc<QuotientMap>> {
    let source = group_from_json(get(v, "source")?)?;
    let target = group_from_json(get(v, "target")?)?;
    let images: Vec<GroupElement> = get(v, "images")?
        .as_array()
        .ok_or_else(|| Error::InvalidSpec("images must be an array".into()))?
        .iter()
        .map(|x| {
            let tok = x
                .as_str()
                .ok_or_else(|| Error::InvalidSpec("image must be an element token".into()))?;
            GroupElement::parse_token(tok)
        })
        .collect::<Result<_>>()?;
    let q = QuotientMap::new(source, target, images)?;
    match v.get("C").and_then(Value::as_u64) {
        Some(c) => Ok(q.with_compat(c)),
        None => Ok(q),
    }
}

pub fn metric_to_json(m: &MetricSpec) -> Value {
    match m {
        MetricSpec::Word { group } => json!({"metric": "word", "group": group_to_json(group)}),
        MetricSpec::Scaled { factor, base } => {
            json!({"metric": "scaled", "factor": factor, "base": metric_to_json(base)})
        }
        MetricSpec::Induced { subgroup, ambient } => json!({
            "metric": "induced",
            "group": group_to_json(subgroup),
            "ambient_metric": metric_to_json(ambient),
        }),
        MetricSpec::MaxCombo { d_g, quotient, d_h, m, c_used } => json!({
            "metric": "max_combo",
            "m": m,
            "c": c_used,
            "d_g": metric_to_json(d_g),
            "d_h": metric_to_json(d_h),
            "quotient_images": quotient.images().iter().map(|g| g.token()).collect::<Vec<_>>(),
        }),
    }
}

pub fn metric_hash(m: &MetricSpec) -> String {
    spec_hash(&metric_to_json(m))
}

/// Metric spec over a given group. The JSON names the variant; groups are
/// supplied separately so one group file can serve several metrics.
pub fn metric_from_json(group: Arc<MarkedGroup>, v: &Value) -> Result<Arc<MetricSpec>> {
    let kind = get(v, "metric")?
        .as_str()
        .ok_or_else(|| Error::InvalidSpec("metric must be a string tag".into()))?;
    match kind {
        "word" => Ok(MetricSpec::word(group)),
        "scaled" => {
            let factor = get(v, "factor")?
                .as_u64()
                .ok_or_else(|| Error::InvalidSpec("factor must be a positive integer".into()))?;
            let base = metric_from_json(group, get(v, "base")?)?;
            MetricSpec::scaled(factor, base)
        }
        "induced" => {
            let ambient_group = match group.family() {
                Family::Subgroup { ambient, .. } => ambient.clone(),
                _ => {
                    return Err(Error::InvalidSpec(
                        "induced metrics need a subgroup-family group".into(),
                    ))
                }
            };
            let ambient = metric_from_json(ambient_group, get(v, "ambient_metric")?)?;
            MetricSpec::induced(group, ambient)
        }
        "max_combo" => {
            let m = get(v, "m")?
                .as_u64()
                .ok_or_else(|| Error::InvalidSpec("m must be a positive integer".into()))?;
            let quotient = quotient_from_json(get(v, "quotient")?)?;
            let d_g = metric_from_json(quotient.source().clone(), get(v, "d_g")?)?;
            let d_h = metric_from_json(quotient.target().clone(), get(v, "d_h")?)?;
            let c = get(v, "c")?
                .as_u64()
                .ok_or_else(|| Error::InvalidSpec("c must be a positive integer".into()))?;
            MetricSpec::max_combo_with_compat(d_g, quotient, d_h, m, c)
        }
        other => Err(Error::InvalidSpec(format!("unknown metric {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_json_round_trip() {
        let groups = vec![
            MarkedGroup::free(2),
            MarkedGroup::free_abelian(3),
            MarkedGroup::dihedral_infinite(),
            MarkedGroup::subgroup(
                MarkedGroup::dihedral_infinite(),
                SubgroupRule::LatticeMultiple { k: 3 },
            )
            .unwrap(),
        ];
        for g in groups {
            let v = group_to_json(&g);
            let g2 = group_from_json(&v).unwrap();
            assert_eq!(group_to_json(&g2), v);
            assert_eq!(group_hash(&g2), group_hash(&g));
        }
    }

    #[test]
    fn hashes_are_stable_and_distinct() {
        let f2 = MarkedGroup::free(2);
        let f3 = MarkedGroup::free(3);
        assert_eq!(group_hash(&f2), group_hash(&MarkedGroup::free(2)));
        assert_ne!(group_hash(&f2), group_hash(&f3));
        assert_eq!(group_hash(&f2).len(), 16);
    }

    #[test]
    fn canonical_serialization_sorts_keys() {
        let v: Value = serde_json::from_str(r#"{"zeta": 1, "alpha": 2}"#).unwrap();
        assert_eq!(canonical_string(&v), r#"{"alpha":2,"zeta":1}"#);
    }

    #[test]
    fn quotient_json_round_trip() {
        let pi = QuotientMap::abelianization(MarkedGroup::free(2)).unwrap();
        let v = quotient_to_json(&pi);
        let pi2 = quotient_from_json(&v).unwrap();
        assert_eq!(quotient_to_json(&pi2), v);
    }
}
