//! Canonical JSON for scenarios, models, simulations and LP results.
//!
//! Keys are sorted everywhere (`serde_json` maps are ordered), so equal
//! values serialize to identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::fraction::LpResult;
use crate::model::{DeterministicMorphism, Distribution, EmpiricalModel, OutcomeMap};
use crate::rational::{format as format_prob, parse as parse_prob};
use crate::scenario::names::{assignment_to_string, parse_assignment, parse_measurement, parse_outcome};
use crate::scenario::{Face, Measurement, Outcome, Scenario};
use crate::simulate::Simulation;

/// Pretty-printed with a trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializing a JSON value");
    s.push('\n');
    s
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::invalid(format!("missing key `{key}`")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::invalid(format!("`{what}` must be an array")))
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::invalid(format!("`{what}` must be an object")))
}

fn string<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::invalid(format!("`{what}` must be a string")))
}

fn face_json(f: &Face) -> Value {
    Value::Array(f.iter().map(|m| Value::String(m.to_string())).collect())
}

fn measurements(v: &Value, what: &str) -> Result<Vec<Measurement>> {
    array(v, what)?.iter().map(|m| parse_measurement(string(m, what)?)).collect()
}

pub fn scenario_to_json(s: &Scenario) -> Value {
    let ms: Vec<Value> = s
        .outcome_map()
        .iter()
        .map(|(m, os)| {
            json!({
                "id": m.to_string(),
                "outcomes": os.iter().map(|o| o.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "measurements": ms,
        "facets": s.facets().iter().map(face_json).collect::<Vec<_>>(),
    })
}

pub fn scenario_from_json(v: &Value) -> Result<Scenario> {
    let mut declared = Vec::new();
    for m in array(field(v, "measurements")?, "measurements")? {
        let id = parse_measurement(string(field(m, "id")?, "id")?)?;
        let outcomes = array(field(m, "outcomes")?, "outcomes")?
            .iter()
            .map(|o| parse_outcome(string(o, "outcome")?))
            .collect::<Result<Vec<Outcome>>>()?;
        declared.push((id, outcomes));
    }
    let facets = array(field(v, "facets")?, "facets")?
        .iter()
        .map(|f| measurements(f, "facet"))
        .collect::<Result<Vec<_>>>()?;
    Scenario::from_declared(declared, facets)
}

fn distribution_json(d: &Distribution) -> Value {
    let dist: Map<String, Value> = d
        .iter()
        .map(|(a, p)| (assignment_to_string(a), Value::String(format_prob(p))))
        .collect();
    json!({ "facet": face_json(d.context()), "dist": dist })
}

pub fn model_to_json(e: &EmpiricalModel) -> Value {
    json!({
        "scenario": scenario_to_json(e.scenario()),
        "distributions": e.facet_distributions().values().map(distribution_json).collect::<Vec<_>>(),
    })
}

/// Reads a model whose `scenario` is inline or a path relative to `base`.
pub fn model_from_json(v: &Value, base: Option<&Path>) -> Result<EmpiricalModel> {
    let sv = field(v, "scenario")?;
    let scenario = match sv {
        Value::String(path) => {
            let p = base.map_or_else(|| Path::new(path).to_path_buf(), |b| b.join(path));
            scenario_from_json(&read_json(&p)?)?
        }
        _ => scenario_from_json(sv)?,
    };
    let mut dists = BTreeMap::new();
    for entry in array(field(v, "distributions")?, "distributions")? {
        let facet: Face = measurements(field(entry, "facet")?, "facet")?.into_iter().collect();
        let weights = object(field(entry, "dist")?, "dist")?
            .iter()
            .map(|(a, p)| Ok((parse_assignment(a)?, parse_prob(string(p, "probability")?)?)))
            .collect::<Result<Vec<_>>>()?;
        let d = Distribution::new(facet.clone(), weights)?;
        if dists.insert(facet.clone(), d).is_some() {
            return Err(Error::invalid(format!("facet {} listed twice", crate::scenario::names::face_to_string(&facet))));
        }
    }
    EmpiricalModel::new(scenario, dists)
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_model(path: &Path) -> Result<EmpiricalModel> {
    model_from_json(&read_json(path)?, path.parent())
}

pub fn simulation_to_json(sim: &Simulation) -> Value {
    let vertex_map: Map<String, Value> = sim
        .morphism
        .pi
        .iter()
        .map(|(x, q)| (x.to_string(), Value::String(q.to_string())))
        .collect();
    let outcome_maps: Map<String, Value> = sim
        .morphism
        .h
        .iter()
        .map(|(x, h)| {
            let table: Map<String, Value> = h
                .entries()
                .iter()
                .map(|(r, o)| (r.to_string(), Value::String(o.to_string())))
                .collect();
            (x.to_string(), Value::Object(table))
        })
        .collect();
    json!({
        "source": model_to_json(&sim.source),
        "ancilla": model_to_json(&sim.ancilla),
        "target": model_to_json(&sim.target),
        "depth": sim.depth,
        "vertex_map": vertex_map,
        "outcome_maps": outcome_maps,
    })
}

pub fn simulation_from_json(v: &Value, base: Option<&Path>) -> Result<Simulation> {
    let target = model_from_json(field(v, "target")?, base)?;
    let mut pi = BTreeMap::new();
    for (x, q) in object(field(v, "vertex_map")?, "vertex_map")? {
        pi.insert(parse_measurement(x)?, parse_measurement(string(q, "protocol")?)?);
    }
    let mut h = BTreeMap::new();
    for (x, table) in object(field(v, "outcome_maps")?, "outcome_maps")? {
        let x = parse_measurement(x)?;
        let map = object(table, "outcome map")?
            .iter()
            .map(|(r, o)| Ok((parse_outcome(r)?, parse_outcome(string(o, "outcome")?)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let codomain = target.scenario().outcomes(&x)?.clone();
        h.insert(x, OutcomeMap::new(map, codomain)?);
    }
    let depth = field(v, "depth")?
        .as_u64()
        .ok_or_else(|| Error::invalid("`depth` must be a non-negative integer"))?;
    Ok(Simulation {
        source: model_from_json(field(v, "source")?, base)?,
        ancilla: model_from_json(field(v, "ancilla")?, base)?,
        target,
        morphism: DeterministicMorphism::new(pi, h)?,
        depth: depth as usize,
    })
}

fn table_json(t: &BTreeMap<Face, BTreeMap<crate::scenario::Assignment, crate::rational::Prob>>) -> Value {
    let out: Vec<Value> = t
        .iter()
        .map(|(c, row)| {
            let dist: Map<String, Value> = row
                .iter()
                .map(|(a, p)| (assignment_to_string(a), Value::String(format_prob(p))))
                .collect();
            json!({ "facet": face_json(c), "coefficients": dist })
        })
        .collect();
    Value::Array(out)
}

/// NCF, CF and the global weights; optionally the decomposition and the dual functional.
pub fn lp_to_json(lp: &LpResult, decompose: bool, certificate: bool) -> Value {
    let weights: Map<String, Value> = lp
        .weights
        .iter()
        .map(|(g, w)| (assignment_to_string(g), Value::String(format_prob(w))))
        .collect();
    let mut out = json!({
        "ncf": format_prob(&lp.optimum),
        "cf": format_prob(&(crate::rational::one() - &lp.optimum)),
        "weights": weights,
    });
    if decompose {
        out["noncontextual_part"] = lp.noncontextual_part().as_ref().map_or(Value::Null, model_to_json);
        out["contextual_part"] = lp.contextual_part().as_ref().map_or(Value::Null, model_to_json);
    }
    if certificate {
        out["certificate"] = table_json(&lp.certificate.coefficients);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::simulate::{term_to_simulation, cloning_simulation};
    use crate::terms::parse;

    #[test]
    fn models_round_trip() {
        for e in [gen::pr(), gen::mix_demo(), EmpiricalModel::zero_model(), EmpiricalModel::singleton_model()] {
            let v = model_to_json(&e);
            assert_eq!(model_from_json(&v, None).unwrap(), e);
        }
    }

    #[test]
    fn pr_serializes_canonically() {
        let text = to_canonical_string(&model_to_json(&gen::pr()));
        assert!(text.contains("\"x1=0,y1=0\": \"1/2\""), "{text}");
        let again = to_canonical_string(&model_to_json(&model_from_json(&serde_json::from_str(&text).unwrap(), None).unwrap()));
        assert_eq!(text, again);
    }

    #[test]
    fn loader_rejects_bad_tables() {
        let mut v = model_to_json(&gen::pr());
        v["distributions"][0]["dist"]["x1=0,y1=0"] = json!("1/3");
        assert!(model_from_json(&v, None).is_err());
        let mut dup = scenario_to_json(&Scenario::pr());
        dup["measurements"][1]["id"] = json!("x1");
        assert!(scenario_from_json(&dup).is_err());
        let mut unknown = scenario_to_json(&Scenario::pr());
        unknown["facets"][0][0] = json!("q");
        assert!(scenario_from_json(&unknown).is_err());
    }

    #[test]
    fn simulations_round_trip() {
        let d = gen::pr();
        for sim in [
            term_to_simulation(&parse("v[x1?(0:y1,1:y2)]").unwrap(), "v", &d).unwrap(),
            term_to_simulation(&parse("v +_1/2 v/[x1:{0>1,1>0}]").unwrap(), "v", &d).unwrap(),
            cloning_simulation(&gen::correlated_box()).unwrap(),
        ] {
            let v = simulation_to_json(&sim);
            assert_eq!(simulation_from_json(&v, None).unwrap(), sim);
        }
    }

    #[test]
    fn scenario_file_reference() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("pr.json"), to_canonical_string(&scenario_to_json(&Scenario::pr()))).unwrap();
        let mut v = model_to_json(&gen::pr());
        v["scenario"] = json!("pr.json");
        let path = dir.path().join("model.json");
        fs::write(&path, to_canonical_string(&v)).unwrap();
        assert_eq!(read_model(&path).unwrap(), gen::pr());
    }
}
