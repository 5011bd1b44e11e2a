//! Scalar absolutely minimizing extension by repeated steepest paths.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{Extension, Graph};

#[derive(PartialEq, PartialOrd)]
struct Key(f64);
impl Eq for Key {}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Shortest distances from boundary vertex `a` along paths whose inner vertices are free.
/// Boundary vertices are reached but not expanded. Returns (dist, pred).
fn dijkstra(g: &Graph, fixed: &[bool], a: usize) -> (Vec<f64>, Vec<usize>) {
    let n = g.n();
    let mut d = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    // the start is expanded, any other fixed vertex is terminal
    for &(y, k) in g.neighbors(a) {
        if !fixed[y] {
            let len = g.edges()[k].len;
            if len < d[y] {
                d[y] = len;
                pred[y] = a;
                heap.push(Reverse((Key(len), y)));
            }
        }
    }
    while let Some(Reverse((Key(dx), x))) = heap.pop() {
        if dx > d[x] || fixed[x] {
            continue;
        }
        for &(y, k) in g.neighbors(x) {
            let nd = dx + g.edges()[k].len;
            if nd < d[y] {
                d[y] = nd;
                pred[y] = x;
                if !fixed[y] {
                    heap.push(Reverse((Key(nd), y)));
                }
            }
        }
    }
    (d, pred)
}

pub fn solve_aml_scalar(g: &Graph) -> Result<Extension> {
    if g.m() != 1 {
        return Err(Error::Precondition(format!("scalar extension needs m = 1, got {}", g.m())));
    }
    let n = g.n();
    let mut fixed: Vec<bool> = (0..n).map(|i| g.is_boundary(i)).collect();
    let mut val: Vec<f64> = (0..n).map(|i| g.boundary_value(i).map_or(0.0, |v| v[0])).collect();
    loop {
        if fixed.iter().all(|&f| f) {
            break;
        }
        let mut best: Option<(f64, usize, usize, Vec<f64>, Vec<usize>)> = None;
        for a in 0..n {
            if !fixed[a] || !g.neighbors(a).iter().any(|&(y, _)| !fixed[y]) {
                continue;
            }
            let (d, pred) = dijkstra(g, &fixed, a);
            for b in 0..n {
                if !fixed[b] || !d[b].is_finite() || pred[b] == a {
                    continue;
                }
                let slope = (val[b] - val[a]) / d[b];
                if best.as_ref().is_none_or(|t| slope > t.0) {
                    best = Some((slope, a, b, d.clone(), pred.clone()));
                }
            }
        }
        match best {
            Some((slope, a, b, d, pred)) if slope > 0.0 => {
                let mut x = pred[b];
                while x != a {
                    val[x] = val[a] + slope * d[x];
                    fixed[x] = true;
                    x = pred[x];
                }
            }
            _ => {
                // every remaining component sees a single boundary value
                for x in 0..n {
                    if fixed[x] {
                        continue;
                    }
                    let mut comp = vec![x];
                    let mut seen = vec![false; n];
                    seen[x] = true;
                    let mut i = 0;
                    let mut level = None;
                    while i < comp.len() {
                        let y = comp[i];
                        i += 1;
                        for &(z, _) in g.neighbors(y) {
                            if seen[z] {
                                continue;
                            }
                            seen[z] = true;
                            if fixed[z] {
                                level.get_or_insert(val[z]);
                            } else {
                                comp.push(z);
                            }
                        }
                    }
                    let c = level.unwrap_or(0.0);
                    for y in comp {
                        val[y] = c;
                        fixed[y] = true;
                    }
                }
            }
        }
    }
    Extension::from_flat(g, val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn graph(ids: &[&str], edges: &[(&str, &str)], b: &[(&str, f64)]) -> Graph {
        Graph::new(
            1,
            ids.iter().map(|s| s.to_string()).collect(),
            edges.iter().map(|(x, y)| (x.to_string(), y.to_string(), 1.0)).collect(),
            b.iter().map(|(k, v)| (k.to_string(), vec![*v])).collect::<BTreeMap<_, _>>(),
        )
        .unwrap()
    }

    #[test]
    fn path_and_chain() {
        let g = graph(&["a", "b", "x"], &[("a", "x"), ("x", "b")], &[("a", 0.0), ("b", 1.0)]);
        let u = solve_aml_scalar(&g).unwrap();
        assert_eq!(u.value(&g, "x").unwrap(), &[0.5]);
        let g = graph(&["a", "b", "x", "y"], &[("a", "x"), ("x", "y"), ("y", "b")], &[("a", 0.0), ("b", 3.0)]);
        let u = solve_aml_scalar(&g).unwrap();
        assert!((u.value(&g, "x").unwrap()[0] - 1.0).abs() < 1e-15);
        assert!((u.value(&g, "y").unwrap()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn star_hub() {
        let g = graph(
            &["p", "q", "r", "x"],
            &[("p", "x"), ("q", "x"), ("r", "x")],
            &[("p", 0.0), ("q", 0.0), ("r", 1.0)],
        );
        let u = solve_aml_scalar(&g).unwrap();
        assert_eq!(u.value(&g, "x").unwrap(), &[0.5]);
    }

    #[test]
    fn dangling_takes_neighbor_value() {
        let g = graph(&["a", "b", "x", "y"], &[("a", "x"), ("x", "b"), ("x", "y")], &[("a", 0.0), ("b", 1.0)]);
        let u = solve_aml_scalar(&g).unwrap();
        assert_eq!(u.value(&g, "y").unwrap(), &[0.5]);
    }
}
