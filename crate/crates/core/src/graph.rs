use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub len: f64,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Finite connected weighted graph with boundary data in R^m.
/// Vertices are stored in sorted identifier order.
#[derive(Debug, Clone)]
pub struct Graph {
    m: usize,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
    data: Vec<Option<Vec<f64>>>,
}

impl Graph {
    pub fn new(
        m: usize,
        vertices: Vec<String>,
        edges: Vec<(String, String, f64)>,
        boundary: BTreeMap<String, Vec<f64>>,
    ) -> Result<Graph> {
        if m == 0 {
            return Err(Error::Invalid("m must be positive".into()));
        }
        let mut ids = vertices;
        ids.sort();
        for w in ids.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateVertex(w[0].clone()));
            }
        }
        let index: HashMap<String, usize> =
            ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let n = ids.len();
        let look = |s: &str| index.get(s).copied().ok_or_else(|| Error::UnknownVertex(s.to_string()));

        let mut list = Vec::with_capacity(edges.len());
        for (x, y, len) in &edges {
            let (i, j) = (look(x)?, look(y)?);
            if i == j {
                return Err(Error::SelfLoop(x.clone()));
            }
            if !(len.is_finite() && *len > 0.0) {
                return Err(Error::BadLength(x.clone(), y.clone(), *len));
            }
            list.push(Edge { a: i.min(j), b: i.max(j), len: *len });
        }
        list.sort_by(|e, f| (e.a, e.b).cmp(&(f.a, f.b)));
        for w in list.windows(2) {
            if (w[0].a, w[0].b) == (w[1].a, w[1].b) {
                return Err(Error::DuplicateEdge(ids[w[0].a].clone(), ids[w[0].b].clone()));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (k, e) in list.iter().enumerate() {
            adj[e.a].push((e.b, k));
            adj[e.b].push((e.a, k));
        }
        for a in adj.iter_mut() {
            a.sort();
        }

        if boundary.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        let mut data = vec![None; n];
        for (id, val) in boundary {
            let i = look(&id)?;
            if val.len() != m {
                return Err(Error::Dimension { id, expected: m, got: val.len() });
            }
            if val.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(id));
            }
            data[i] = Some(val);
        }

        let g = Graph { m, ids, index, edges: list, adj, data };
        if !g.connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn connected(&self) -> bool {
        let n = self.ids.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut q = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = q.pop_front() {
            for &(y, _) in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    q.push_back(y);
                }
            }
        }
        count == n
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.ids.len()
    }
    pub fn ids(&self) -> &[String] {
        &self.ids
    }
    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }
    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }
    pub fn is_boundary(&self, i: usize) -> bool {
        self.data[i].is_some()
    }
    pub fn boundary_value(&self, i: usize) -> Option<&[f64]> {
        self.data[i].as_deref()
    }
    pub fn interior(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.is_boundary(i)).collect()
    }
    pub fn boundary_map(&self) -> BTreeMap<String, Vec<f64>> {
        (0..self.n())
            .filter_map(|i| self.data[i].as_ref().map(|v| (self.ids[i].clone(), v.clone())))
            .collect()
    }
    /// Edges with at least one interior endpoint.
    pub fn free_edges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&k| {
                let e = self.edges[k];
                !(self.is_boundary(e.a) && self.is_boundary(e.b))
            })
            .collect()
    }
    pub fn edge_between(&self, x: usize, y: usize) -> Option<usize> {
        self.adj[x].iter().find(|(z, _)| *z == y).map(|&(_, k)| k)
    }

    /// Same graph with extra boundary vertices.
    pub fn with_boundary(&self, extra: &BTreeMap<String, Vec<f64>>) -> Result<Graph> {
        let mut b = self.boundary_map();
        for (k, v) in extra {
            b.insert(k.clone(), v.clone());
        }
        let edges = self
            .edges
            .iter()
            .map(|e| (self.ids[e.a].clone(), self.ids[e.b].clone(), e.len))
            .collect();
        Graph::new(self.m, self.ids.clone(), edges, b)
    }
}

/// Values in R^m for every vertex of a graph, stored flat in vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    m: usize,
    data: Vec<f64>,
}

impl Extension {
    /// Boundary data with every interior vertex set to `fill`.
    pub fn filled(g: &Graph, fill: &[f64]) -> Extension {
        let m = g.m();
        let mut data = Vec::with_capacity(g.n() * m);
        for i in 0..g.n() {
            match g.boundary_value(i) {
                Some(v) => data.extend_from_slice(v),
                None => data.extend_from_slice(fill),
            }
        }
        Extension { m, data }
    }

    pub fn from_flat(g: &Graph, data: Vec<f64>) -> Result<Extension> {
        if data.len() != g.n() * g.m() {
            return Err(Error::Invalid(format!("expected {} values, got {}", g.n() * g.m(), data.len())));
        }
        let u = Extension { m: g.m(), data };
        u.validate(g)?;
        Ok(u)
    }

    pub fn from_map(g: &Graph, values: &BTreeMap<String, Vec<f64>>) -> Result<Extension> {
        let m = g.m();
        for id in values.keys() {
            g.index_of(id)?;
        }
        let mut data = Vec::with_capacity(g.n() * m);
        for id in g.ids() {
            let v = values.get(id).ok_or_else(|| Error::MissingValue(id.clone()))?;
            if v.len() != m {
                return Err(Error::Dimension { id: id.clone(), expected: m, got: v.len() });
            }
            data.extend_from_slice(v);
        }
        Extension::from_flat(g, data)
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.m != g.m() || self.data.len() != g.n() * g.m() {
            return Err(Error::Invalid("extension does not match graph".into()));
        }
        for i in 0..g.n() {
            let v = self.get(i);
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(g.id(i).to_string()));
            }
            if let Some(b) = g.boundary_value(i) {
                if b != v {
                    return Err(Error::BoundaryMismatch(g.id(i).to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }
    pub fn set(&mut self, i: usize, v: &[f64]) {
        self.data[i * self.m..(i + 1) * self.m].copy_from_slice(v);
    }
    pub fn flat(&self) -> &[f64] {
        &self.data
    }
    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn to_map(&self, g: &Graph) -> BTreeMap<String, Vec<f64>> {
        (0..g.n()).map(|i| (g.id(i).to_string(), self.get(i).to_vec())).collect()
    }
    pub fn value(&self, g: &Graph, id: &str) -> Result<&[f64]> {
        Ok(self.get(g.index_of(id)?))
    }

    /// Max-norm distance over all vertices.
    pub fn dist_inf(&self, other: &Extension) -> f64 {
        self.data
            .chunks(self.m)
            .zip(other.data.chunks(other.m))
            .map(|(a, b)| dist(a, b))
            .fold(0.0, f64::max)
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMode {
    #[default]
    Vertex,
    Edge,
}

pub(crate) fn su_index(g: &Graph, u: &Extension, x: usize) -> f64 {
    g.neighbors(x)
        .iter()
        .map(|&(y, k)| dist(u.get(x), u.get(y)) / g.edges()[k].len)
        .fold(0.0, f64::max)
}

pub(crate) fn edge_slope(g: &Graph, u: &Extension, k: usize) -> f64 {
    let e = g.edges()[k];
    dist(u.get(e.a), u.get(e.b)) / e.len
}

pub fn local_lip(g: &Graph, u: &Extension, x: &str) -> Result<f64> {
    let i = g.index_of(x)?;
    if g.is_boundary(i) {
        return Err(Error::BoundaryVertex(x.to_string()));
    }
    Ok(su_index(g, u, i))
}

pub fn edge_lip(g: &Graph, u: &Extension, x: &str, y: &str) -> Result<f64> {
    let (i, j) = (g.index_of(x)?, g.index_of(y)?);
    let k = g.edge_between(i, j).ok_or_else(|| Error::NoEdge(x.to_string(), y.to_string()))?;
    if g.is_boundary(i) && g.is_boundary(j) {
        return Err(Error::BoundaryEdge(x.to_string(), y.to_string()));
    }
    Ok(edge_slope(g, u, k))
}

/// Per-slot Lipschitz values in vertex order (interior vertices) or edge order (free edges).
pub fn lip_field(g: &Graph, u: &Extension, mode: ProfileMode) -> Vec<f64> {
    match mode {
        ProfileMode::Vertex => g.interior().into_iter().map(|x| su_index(g, u, x)).collect(),
        ProfileMode::Edge => g.free_edges().into_iter().map(|k| edge_slope(g, u, k)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipProfile {
    pub entries: Vec<f64>,
}

impl LipProfile {
    pub fn from_values(mut v: Vec<f64>) -> LipProfile {
        v.sort_by(|a, b| b.total_cmp(a));
        LipProfile { entries: v }
    }

    /// Lexicographic order; entries within `tol` count as equal.
    pub fn lex_cmp(&self, other: &LipProfile, tol: f64) -> Ordering {
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if a - b > tol {
                return Ordering::Greater;
            }
            if b - a > tol {
                return Ordering::Less;
            }
        }
        self.entries.len().cmp(&other.entries.len())
    }

    pub fn max(&self) -> f64 {
        self.entries.first().copied().unwrap_or(0.0)
    }
}

pub fn profile(g: &Graph, u: &Extension, mode: ProfileMode) -> LipProfile {
    LipProfile::from_values(lip_field(g, u, mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    FirstTighter,
    SecondTighter,
    Equivalent,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub relation: Relation,
    /// Level at which the decision was made; `-inf` when equivalent.
    #[serde(with = "level")]
    pub witness_level: f64,
}

mod level {
    use serde::{Deserialize, Deserializer, Serializer};
    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

pub fn compare_tighter(
    g: &Graph,
    u: &Extension,
    v: &Extension,
    mode: ProfileMode,
    tol: f64,
) -> Result<Comparison> {
    for i in 0..g.n() {
        if g.is_boundary(i) && u.get(i) != v.get(i) {
            return Err(Error::BoundaryMismatch(g.id(i).to_string()));
        }
    }
    let su = lip_field(g, u, mode);
    let sv = lip_field(g, v, mode);
    let mut worse_u = f64::NEG_INFINITY;
    let mut worse_v = f64::NEG_INFINITY;
    for (&a, &b) in su.iter().zip(&sv) {
        if a > b + tol {
            worse_u = worse_u.max(a);
        }
        if b > a + tol {
            worse_v = worse_v.max(b);
        }
    }
    let relation = if worse_u == f64::NEG_INFINITY && worse_v == f64::NEG_INFINITY {
        Relation::Equivalent
    } else if worse_v > worse_u + tol {
        Relation::FirstTighter
    } else if worse_u > worse_v + tol {
        Relation::SecondTighter
    } else {
        Relation::Incomparable
    };
    Ok(Comparison { relation, witness_level: worse_u.max(worse_v) })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn star(free: [f64; 2]) -> Graph {
        let mut b = BTreeMap::new();
        b.insert("p".to_string(), vec![1.0, 0.0]);
        b.insert("q".to_string(), vec![-1.0, 0.0]);
        b.insert("r".to_string(), free.to_vec());
        Graph::new(
            2,
            ["p", "q", "r", "x"].iter().map(|s| s.to_string()).collect(),
            ["p", "q", "r"].iter().map(|s| (s.to_string(), "x".to_string(), 1.0)).collect(),
            b,
        )
        .unwrap()
    }

    fn path(vals: &[f64]) -> (Graph, Extension) {
        let n = vals.len();
        let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let edges = (0..n - 1).map(|i| (ids[i].clone(), ids[i + 1].clone(), 1.0)).collect();
        let mut b = BTreeMap::new();
        b.insert(ids[0].clone(), vec![vals[0]]);
        b.insert(ids[n - 1].clone(), vec![vals[n - 1]]);
        let g = Graph::new(1, ids, edges, b).unwrap();
        let u = Extension::from_flat(&g, vals.to_vec()).unwrap();
        (g, u)
    }

    #[test]
    fn path_midpoint_lip() {
        let (g, u) = path(&[0.0, 0.5, 1.0]);
        assert_eq!(local_lip(&g, &u, "v1").unwrap(), 0.5);
        assert!(matches!(local_lip(&g, &u, "v0"), Err(Error::BoundaryVertex(_))));
        assert!(matches!(local_lip(&g, &u, "zz"), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn star_hub_lip() {
        let g = star([-1.0, 0.2]);
        let mut u = Extension::filled(&g, &[0.0, 0.1]);
        let s = local_lip(&g, &u, "x").unwrap();
        let oracle = [(1.0f64, -0.1f64), (-1.0, -0.1), (-1.0, 0.1)]
            .iter()
            .map(|(a, b)| (a * a + b * b).sqrt())
            .fold(0.0, f64::max);
        assert!((s - oracle).abs() < 1e-15);
        assert!((s - 1.0049876).abs() < 1e-7);
        assert_eq!(profile(&g, &u, ProfileMode::Vertex).entries, vec![s]);
        u.set(3, &[0.0, 0.0]);
        let c = compare_tighter(&g, &Extension::filled(&g, &[0.0, 0.1]), &u, ProfileMode::Vertex, DEFAULT_TOL).unwrap();
        assert_eq!(c.relation, Relation::FirstTighter);
        assert!((c.witness_level - 1.04f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn edge_lip_values() {
        let mut b = BTreeMap::new();
        b.insert("a".to_string(), vec![0.0, 0.0]);
        for (len, want) in [(1.0, 5.0), (2.0, 2.5)] {
            let g = Graph::new(2, vec!["a".into(), "x".into()], vec![("a".into(), "x".into(), len)], b.clone()).unwrap();
            let mut u = Extension::filled(&g, &[3.0, 4.0]);
            assert_eq!(edge_lip(&g, &u, "x", "a").unwrap(), want);
            u.set(1, &[0.0, 0.0]);
            assert_eq!(edge_lip(&g, &u, "a", "x").unwrap(), 0.0);
        }
    }

    #[test]
    fn boundary_edge_rejected() {
        let mut b = BTreeMap::new();
        b.insert("a".to_string(), vec![0.0]);
        b.insert("b".to_string(), vec![1.0]);
        let g = Graph::new(1, vec!["a".into(), "b".into()], vec![("a".into(), "b".into(), 1.0)], b).unwrap();
        let u = Extension::filled(&g, &[0.0]);
        assert!(matches!(edge_lip(&g, &u, "a", "b"), Err(Error::BoundaryEdge(..))));
        assert!(profile(&g, &u, ProfileMode::Vertex).entries.is_empty());
    }

    #[test]
    fn path_profile() {
        let (g, u) = path(&[0.0, 0.2, 0.9, 1.0]);
        let p = profile(&g, &u, ProfileMode::Vertex);
        assert_eq!(p.entries.len(), 2);
        for e in p.entries {
            assert!((e - 0.7).abs() < 1e-15);
        }
        let c = compare_tighter(&g, &u, &u, ProfileMode::Vertex, DEFAULT_TOL).unwrap();
        assert_eq!(c.relation, Relation::Equivalent);
    }

    #[test]
    fn validation() {
        let b: BTreeMap<String, Vec<f64>> = [("a".to_string(), vec![0.0])].into();
        let v = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert!(matches!(
            Graph::new(1, v(&["a", "b"]), vec![], b.clone()),
            Err(Error::Disconnected)
        ));
        assert!(matches!(
            Graph::new(1, v(&["a", "b"]), vec![("a".into(), "a".into(), 1.0)], b.clone()),
            Err(Error::SelfLoop(_))
        ));
        assert!(matches!(
            Graph::new(1, v(&["a", "b"]), vec![("a".into(), "b".into(), 1.0), ("b".into(), "a".into(), 2.0)], b.clone()),
            Err(Error::DuplicateEdge(..))
        ));
        assert!(matches!(
            Graph::new(1, v(&["a", "b"]), vec![("a".into(), "b".into(), 0.0)], b.clone()),
            Err(Error::BadLength(..))
        ));
        assert!(matches!(
            Graph::new(1, v(&["a", "b"]), vec![("a".into(), "b".into(), 1.0)], BTreeMap::new()),
            Err(Error::EmptyBoundary)
        ));
        let g = Graph::new(1, v(&["a", "b"]), vec![("a".into(), "b".into(), 1.0)], b).unwrap();
        assert!(matches!(Extension::from_flat(&g, vec![0.5, 0.0]), Err(Error::BoundaryMismatch(_))));
    }
}
