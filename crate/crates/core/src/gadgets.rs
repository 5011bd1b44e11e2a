//! Chains of amplifier gadgets: each star c_i with leaves a_i, b_i feeds the next
//! through the edge c_i - c_{i+1}. Two extensions u and v that differ only in the
//! parity of which hubs sit at their gadget midpoints are both tight on the infinite
//! chain.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::graph::{dist, local_lip, Extension, Graph};
use crate::solver::{solve_tight, sweep, SolveConfig};

pub type P2 = [f64; 2];

/// r_0..=r_n and eps_0..=eps_n.
pub fn gadget_sequence(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut r: Vec<f64> = vec![1.0];
    let mut e: Vec<f64> = vec![0.25];
    for i in 0..n {
        let (ri, ei) = (r[i], e[i]);
        r.push((ri * ri + ei * ei / 4.0).sqrt());
        e.push(2.0 * ei * ei / (ri + (ri * ri - ei * ei).sqrt()));
    }
    (r, e)
}

/// Slope-normalized sequences for the chain with edge lengths 2^-i. Half-widths are
/// 2^-i rho_i and shifts 2^-i eta_i.
pub fn weighted_sequence(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut r: Vec<f64> = vec![1.0];
    let mut e: Vec<f64> = vec![0.25];
    for i in 0..n {
        let (ri, ei) = (r[i], e[i]);
        r.push((ri * ri + ei * ei / 4.0).sqrt());
        e.push(4.0 * ei * ei / (ri + (ri * ri - ei * ei).sqrt()));
    }
    (r, e)
}

#[derive(Clone, Debug)]
pub struct GadgetChain {
    pub n: usize,
    pub weighted: bool,
    /// r_0..=r_{n+1}; the last entry is needed for u(c_n) or v(c_n) when n is odd.
    pub r: Vec<f64>,
    pub eps: Vec<f64>,
    /// Edge length inside gadget i.
    pub len: Vec<f64>,
    pub a: Vec<P2>,
    pub b: Vec<P2>,
    pub u: Vec<P2>,
    pub v: Vec<P2>,
}

fn add(p: P2, s: f64, q: P2) -> P2 {
    [p[0] + s * q[0], p[1] + s * q[1]]
}

fn rot(n: P2) -> P2 {
    [n[1], -n[0]]
}

fn mid(p: P2, q: P2) -> P2 {
    [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]
}

fn ids(i: usize) -> (String, String, String) {
    (format!("a{i:02}"), format!("b{i:02}"), format!("c{i:02}"))
}

impl GadgetChain {
    pub fn new(n: usize, weighted: bool) -> GadgetChain {
        let (r, eps) = if weighted { weighted_sequence(n + 1) } else { gadget_sequence(n + 1) };
        let len: Vec<f64> = (0..n + 2).map(|i| if weighted { 0.5f64.powi(i as i32) } else { 1.0 }).collect();
        let mut a = vec![[-1.0, 0.0]];
        let mut b = vec![[1.0, 0.0]];
        let mut dir = [-1.0, 0.0];
        for i in 0..=n {
            let m = add(a[i], len[i] * eps[i], rot(dir));
            dir = rot(dir);
            let h = len[i + 1] * r[i + 1];
            a.push(add(m, h, dir));
            b.push(add(m, -h, dir));
        }
        let hub = |i: usize, even: bool| -> P2 {
            if (i % 2 == 0) == even {
                mid(a[i], b[i])
            } else {
                mid(mid(a[i + 1], b[i + 1]), b[i])
            }
        };
        let u = (0..=n).map(|i| hub(i, true)).collect();
        let v = (0..=n).map(|i| hub(i, false)).collect();
        GadgetChain { n, weighted, r, eps, len, a, b, u, v }
    }

    /// The truncated chain on a_0..a_n, b_0..b_n, c_0..c_n with c_n pinned to `tail`.
    pub fn graph(&self, tail: P2) -> Graph {
        let n = self.n;
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let mut boundary = BTreeMap::new();
        for i in 0..=n {
            let (a, b, c) = ids(i);
            vertices.extend([a.clone(), b.clone(), c.clone()]);
            boundary.insert(a.clone(), self.a[i].to_vec());
            boundary.insert(b.clone(), self.b[i].to_vec());
            edges.push((a, c.clone(), self.len[i]));
            edges.push((b, c.clone(), self.len[i]));
            if i < n {
                edges.push((c, ids(i + 1).2, self.len[i]));
            }
        }
        boundary.insert(ids(n).2, tail.to_vec());
        Graph::new(2, vertices, edges, boundary).expect("chain graph")
    }

    pub fn graph_u(&self) -> Graph {
        self.graph(self.u[self.n])
    }

    pub fn graph_v(&self) -> Graph {
        self.graph(self.v[self.n])
    }

    pub fn extension(&self, g: &Graph, hubs: &[P2]) -> Extension {
        let mut map = g.boundary_map();
        for (i, h) in hubs.iter().enumerate() {
            map.insert(ids(i).2, h.to_vec());
        }
        Extension::from_map(g, &map).expect("chain extension")
    }

    /// Local Lipschitz constants of the hubs c_0..c_{n-1}.
    pub fn su(&self, g: &Graph, hubs: &[P2]) -> Vec<f64> {
        let u = self.extension(g, hubs);
        (0..self.n).map(|i| local_lip(g, &u, &ids(i).2).unwrap()).collect()
    }

    /// Largest recursion residual over all indices.
    pub fn recursion_residual(&self) -> f64 {
        let k = if self.weighted { 4.0 } else { 2.0 };
        (0..self.r.len() - 1)
            .map(|i| {
                let (r, e) = (self.r[i], self.eps[i]);
                let a = (self.r[i + 1].powi(2) - (r * r + e * e / 4.0)).abs();
                let b = (self.eps[i + 1] / k - (r - (r * r - e * e).sqrt())).abs();
                a.max(b)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub n: usize,
    pub weighted: bool,
    pub r: Vec<f64>,
    pub eps: Vec<f64>,
    pub recursion_residual: f64,
    pub width_defect: f64,
    pub su_u: Vec<f64>,
    pub su_v: Vec<f64>,
    pub monotone_u: bool,
    pub monotone_v: bool,
    pub sup_boundary: f64,
    /// max_i |g(a_{i+4}) - g(a_i)| / eps_i
    pub four_step_ratio: f64,
    pub fixed_point_u: f64,
    pub fixed_point_v: f64,
    pub solve_u_error: f64,
    pub solve_v_error: f64,
    /// |u(c_i) - v(c_i)| for i = 0..=n
    pub gap: Vec<f64>,
    pub failures: Vec<String>,
}

fn monotone(s: &[f64]) -> Option<usize> {
    s.windows(2).position(|w| w[1] < w[0] - 1e-12)
}

fn hub_error(chain: &GadgetChain, g: &Graph, sol: &Extension, hubs: &[P2]) -> f64 {
    (0..chain.n)
        .map(|i| dist(sol.value(g, &ids(i).2).unwrap(), &hubs[i]))
        .fold(0.0, f64::max)
}

pub fn verify_chain(chain: &GadgetChain, cfg: &SolveConfig) -> Result<ChainReport> {
    let n = chain.n;
    let gu = chain.graph_u();
    let gv = chain.graph_v();
    let su_u = chain.su(&gu, &chain.u);
    let su_v = chain.su(&gv, &chain.v);
    let mut failures = Vec::new();
    let mu = monotone(&su_u);
    let mv = monotone(&su_v);
    if let Some(i) = mu {
        failures.push(format!("Su(c_i) for u decreases at i = {}", i + 1));
    }
    if let Some(i) = mv {
        failures.push(format!("Su(c_i) for v decreases at i = {}", i + 1));
    }
    let width_defect = (0..=n)
        .map(|i| (dist(&chain.a[i], &chain.b[i]) - 2.0 * chain.len[i] * chain.r[i]).abs())
        .fold(0.0, f64::max);
    let sup_boundary = chain.a.iter().chain(&chain.b).map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    let four_step_ratio = (0..chain.a.len().saturating_sub(4))
        .map(|i| dist(&chain.a[i + 4], &chain.a[i]) / (chain.len[i] * chain.eps[i]))
        .fold(0.0, f64::max);

    let fp = |g: &Graph, hubs: &[P2]| {
        let mut u = chain.extension(g, hubs);
        let active: Vec<usize> = g.interior();
        sweep(g, &mut u, &active, 0.0, 1).1
    };
    let fixed_point_u = fp(&gu, &chain.u);
    let fixed_point_v = fp(&gv, &chain.v);

    let su = solve_tight(&gu, cfg)?;
    let sv = solve_tight(&gv, cfg)?;
    let solve_u_error = hub_error(chain, &gu, su.extension(), &chain.u);
    let solve_v_error = hub_error(chain, &gv, sv.extension(), &chain.v);
    for (name, err) in [("u", solve_u_error), ("v", solve_v_error)] {
        if err > 1e-6 {
            failures.push(format!("tight solve misses {name} by {err:.3e}"));
        }
    }
    let gap = (0..=n).map(|i| dist(&chain.u[i], &chain.v[i])).collect();
    Ok(ChainReport {
        n,
        weighted: chain.weighted,
        r: chain.r[..=n].to_vec(),
        eps: chain.eps[..=n].to_vec(),
        recursion_residual: chain.recursion_residual(),
        width_defect,
        su_u,
        su_v,
        monotone_u: mu.is_none(),
        monotone_v: mv.is_none(),
        sup_boundary,
        four_step_ratio,
        fixed_point_u,
        fixed_point_v,
        solve_u_error,
        solve_v_error,
        gap,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_terms() {
        let (r, e) = gadget_sequence(3);
        assert_eq!((r[0], e[0]), (1.0, 0.25));
        assert!((r[1] - 1.015625f64.sqrt()).abs() < 1e-15);
        assert!((e[1] - 2.0 * (1.0 - 15f64.sqrt() / 4.0)).abs() < 1e-12);
        assert!(e.windows(2).all(|w| w[1] <= 2.0 * w[0] * w[0]));
    }

    #[test]
    fn start_and_levels() {
        let c = GadgetChain::new(8, false);
        assert_eq!(c.a[0], [-1.0, 0.0]);
        assert_eq!(c.b[0], [1.0, 0.0]);
        assert_eq!(c.u[0], [0.0, 0.0]);
        let g = c.graph_u();
        let su = c.su(&g, &c.u);
        assert!((su[0] - c.r[0]).abs() < 1e-14);
        assert!((su[1] - c.r[2]).abs() < 1e-14);
        assert!((su[2] - c.r[2]).abs() < 1e-14);
        assert!((su[3] - c.r[4]).abs() < 1e-14);
        assert!(c.recursion_residual() < 1e-14);
    }

    #[test]
    fn shallow_truncations_are_reproduced() {
        for weighted in [false, true] {
            let c = GadgetChain::new(4, weighted);
            let rep = verify_chain(&c, &SolveConfig::default()).unwrap();
            assert!(rep.failures.is_empty(), "{weighted} {:?}", rep.failures);
            assert!(rep.fixed_point_u < 1e-9 && rep.fixed_point_v < 1e-9);
        }
    }

    #[test]
    fn weighted_chain_is_short() {
        let c = GadgetChain::new(12, true);
        let total: f64 = c.len[..12].iter().sum();
        assert!(total < 4.0);
        let g = c.graph_u();
        let su = c.su(&g, &c.u);
        assert!(monotone(&su).is_none(), "{su:?}");
    }
}
