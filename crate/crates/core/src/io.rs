//! JSON and CSV formats. Floats are written with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{Extension, Graph};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("string")
}

fn vec_json(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn graph_to_json(g: &Graph) -> String {
    let mut s = String::new();
    writeln!(s, "{{").unwrap();
    writeln!(s, "  \"m\": {},", g.m()).unwrap();
    let ids: Vec<String> = g.ids().iter().map(|i| quote(i)).collect();
    writeln!(s, "  \"vertices\": [{}],", ids.join(", ")).unwrap();
    writeln!(s, "  \"edges\": [").unwrap();
    let edges: Vec<String> = g
        .edges()
        .iter()
        .map(|e| format!("    [{}, {}, {}]", quote(g.id(e.a)), quote(g.id(e.b)), fmt_f64(e.len)))
        .collect();
    writeln!(s, "{}", edges.join(",\n")).unwrap();
    writeln!(s, "  ],").unwrap();
    writeln!(s, "  \"boundary\": {{").unwrap();
    let b: Vec<String> = g
        .boundary_map()
        .iter()
        .map(|(k, v)| format!("    {}: {}", quote(k), vec_json(v)))
        .collect();
    writeln!(s, "{}", b.join(",\n")).unwrap();
    writeln!(s, "  }}").unwrap();
    s.push_str("}\n");
    s
}

pub fn extension_to_json(g: &Graph, u: &Extension) -> String {
    let rows: Vec<String> = (0..g.n())
        .map(|i| format!("    {}: {}", quote(g.id(i)), vec_json(u.get(i))))
        .collect();
    format!("{{\n  \"values\": {{\n{}\n  }}\n}}\n", rows.join(",\n"))
}

fn bad(msg: &str) -> Error {
    Error::Invalid(msg.to_string())
}

fn floats(v: &Value, what: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| bad(&format!("{what}: expected array")))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| bad(&format!("{what}: expected number"))))
        .collect()
}

fn id_of(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(bad("vertex id must be a string")),
    }
}

pub fn graph_from_json(text: &str) -> Result<Graph> {
    let v: Value = serde_json::from_str(text)?;
    let m = v["m"].as_u64().ok_or_else(|| bad("missing m"))? as usize;
    let vertices = v["vertices"]
        .as_array()
        .ok_or_else(|| bad("missing vertices"))?
        .iter()
        .map(id_of)
        .collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::new();
    for e in v["edges"].as_array().ok_or_else(|| bad("missing edges"))? {
        let a = e.as_array().ok_or_else(|| bad("edge must be an array"))?;
        if a.len() != 2 && a.len() != 3 {
            return Err(bad("edge must be [id, id] or [id, id, length]"));
        }
        let len = match a.get(2) {
            Some(l) => l.as_f64().ok_or_else(|| bad("edge length must be a number"))?,
            None => 1.0,
        };
        edges.push((id_of(&a[0])?, id_of(&a[1])?, len));
    }
    let mut boundary = BTreeMap::new();
    for (k, val) in v["boundary"].as_object().ok_or_else(|| bad("missing boundary"))? {
        boundary.insert(k.clone(), floats(val, k)?);
    }
    Graph::new(m, vertices, edges, boundary)
}

pub fn extension_from_json(g: &Graph, text: &str) -> Result<Extension> {
    let v: Value = serde_json::from_str(text)?;
    let mut map = BTreeMap::new();
    for (k, val) in v["values"].as_object().ok_or_else(|| bad("missing values"))? {
        map.insert(k.clone(), floats(val, k)?);
    }
    Extension::from_map(g, &map)
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    graph_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_extension(g: &Graph, path: &Path) -> Result<Extension> {
    extension_from_json(g, &std::fs::read_to_string(path)?)
}

pub fn write_graph(g: &Graph, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, graph_to_json(g))?)
}

pub fn write_extension(g: &Graph, u: &Extension, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, extension_to_json(g, u))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 1.0 - f64::EPSILON] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
            let v: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(v.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn default_edge_length() {
        let g = graph_from_json(r#"{"m":1,"vertices":["a","x"],"edges":[["a","x"]],"boundary":{"a":[0.5]}}"#).unwrap();
        assert_eq!(g.edges()[0].len, 1.0);
    }
}
