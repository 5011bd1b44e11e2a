//! Newton solver for the smoothed p-energy E_p(u) = sum_e w_e (|du_e| / d_e)^p.
//!
//! Each vertex row of the Newton system is divided by its largest edge
//! coefficient, computed in the log domain; the row scaling leaves the
//! Newton step unchanged and keeps every quantity finite for p up to 2^14
//! and beyond.

use serde::{Deserialize, Serialize};

use crate::graph::{Extension, Graph, ProfileMode};
use crate::linalg::{rcm, Banded};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stage {
    pub p: f64,
    pub iters: usize,
    pub residual: f64,
    pub log_energy: f64,
    pub converged: bool,
    /// Line search found no acceptable step; the iterate is rounding-limited.
    pub stalled: bool,
}

pub(crate) struct Problem<'a> {
    g: &'a Graph,
    free: Vec<usize>,
    slot: Vec<Option<usize>>,
    /// (graph edge, ln weight)
    edges: Vec<(usize, f64)>,
    inc: Vec<Vec<usize>>,
    bw: usize,
    /// Vertices whose incident differences are all below this count as settled.
    floor: f64,
}

struct Eval {
    f: Vec<f64>,
    lx: Vec<f64>,
    resid: f64,
    jac: Option<Banded>,
}

impl<'a> Problem<'a> {
    /// `ignore` marks vertices whose incident edges are left out of the energy.
    pub fn new(g: &'a Graph, free_mask: &[bool], ignore: &[bool], mode: ProfileMode) -> Problem<'a> {
        let cand: Vec<usize> = (0..g.n()).filter(|&i| free_mask[i]).collect();
        let mut local = vec![usize::MAX; g.n()];
        for (k, &i) in cand.iter().enumerate() {
            local[i] = k;
        }
        let adj: Vec<Vec<usize>> = cand
            .iter()
            .map(|&i| {
                g.neighbors(i)
                    .iter()
                    .filter(|(j, _)| free_mask[*j] && !ignore[*j])
                    .map(|&(j, _)| local[j])
                    .collect()
            })
            .collect();
        let free: Vec<usize> = rcm(&adj).into_iter().map(|k| cand[k]).collect();
        let mut slot = vec![None; g.n()];
        for (k, &i) in free.iter().enumerate() {
            slot[i] = Some(k);
        }
        let mut edges = Vec::new();
        let mut inc = vec![Vec::new(); free.len()];
        let mut bw = 0;
        for (k, e) in g.edges().iter().enumerate() {
            if ignore[e.a] || ignore[e.b] {
                continue;
            }
            let (fa, fb) = (slot[e.a], slot[e.b]);
            let count = fa.is_some() as usize + fb.is_some() as usize;
            if count == 0 {
                continue;
            }
            let w = match mode {
                ProfileMode::Vertex => count as f64,
                ProfileMode::Edge => 1.0,
            };
            let id = edges.len();
            edges.push((k, w.ln()));
            if let Some(a) = fa {
                inc[a].push(id);
            }
            if let Some(b) = fb {
                inc[b].push(id);
            }
            if let (Some(a), Some(b)) = (fa, fb) {
                bw = bw.max(a.abs_diff(b));
            }
        }
        let floor = 1e-8 * (1.0 + crate::oracle::data_box(g).iter().map(|(a, b)| b - a).fold(0.0, f64::max));
        Problem { g, free, slot, edges, inc, bw, floor }
    }

    pub fn is_empty(&self) -> bool {
        self.free.is_empty()
    }

    pub fn log_energy(&self, u: &Extension, p: f64) -> f64 {
        let terms: Vec<f64> = self
            .edges
            .iter()
            .map(|&(k, lw)| {
                let e = self.g.edges()[k];
                let s = crate::graph::dist(u.get(e.a), u.get(e.b)) / e.len;
                lw + p * s.ln()
            })
            .collect();
        logsumexp(&terms)
    }

    fn eval(&self, u: &Extension, p: f64, with_jac: bool) -> Eval {
        let m = self.g.m();
        let nf = self.free.len();
        let mut f = vec![0.0; nf * m];
        let mut lx = vec![f64::NEG_INFINITY; nf];
        let mut resid: f64 = 0.0;
        let mut jac = with_jac.then(|| Banded::zeros(nf * m, (self.bw + 1) * m - 1));
        let mut delta = vec![0.0; m];
        let mut terms: Vec<(usize, f64, f64)> = Vec::new();
        for (x, &gx) in self.free.iter().enumerate() {
            terms.clear();
            for &id in &self.inc[x] {
                let (k, lw) = self.edges[id];
                let e = self.g.edges()[k];
                let y = e.other(gx);
                let s = crate::graph::dist(u.get(gx), u.get(y)) / e.len;
                let ls = s.max(1e-300).ln();
                terms.push((id, lw + (p - 2.0) * ls - 2.0 * e.len.ln(), s));
            }
            let l = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
            lx[x] = l;
            let mut scale: f64 = 0.0;
            let mut widest: f64 = 0.0;
            for &(id, lt, s) in &terms {
                let a = (lt - l).exp();
                if a == 0.0 {
                    continue;
                }
                let (k, _) = self.edges[id];
                let e = self.g.edges()[k];
                let y = e.other(gx);
                let (ux, uy) = (u.get(gx), u.get(y));
                let mut nrm = 0.0;
                for t in 0..m {
                    delta[t] = ux[t] - uy[t];
                    nrm += delta[t] * delta[t];
                }
                let nrm = nrm.sqrt();
                widest = widest.max(nrm);
                for t in 0..m {
                    f[x * m + t] += a * delta[t];
                }
                scale = scale.max(a * nrm);
                if let Some(j) = jac.as_mut() {
                    let aniso = if s > 1e-300 && nrm > 0.0 { p - 2.0 } else { 0.0 };
                    let ys = self.slot[y];
                    for r in 0..m {
                        for c in 0..m {
                            let mut h = a * aniso * delta[r] * delta[c] / (nrm * nrm).max(1e-300);
                            if r == c {
                                h += a;
                            }
                            j.add(x * m + r, x * m + c, h);
                            if let Some(yk) = ys {
                                j.add(x * m + r, yk * m + c, -h);
                            }
                        }
                    }
                }
            }
            let fnorm = (0..m).map(|t| f[x * m + t].powi(2)).sum::<f64>().sqrt();
            if scale > 0.0 && widest >= self.floor {
                resid = resid.max(fnorm / scale);
            }
        }
        Eval { f, lx, resid, jac }
    }

    fn apply(&self, u: &Extension, step: &[f64], t: f64) -> Extension {
        let m = self.g.m();
        let mut v = u.clone();
        for (x, &gx) in self.free.iter().enumerate() {
            let cur = u.get(gx);
            let new: Vec<f64> = (0..m).map(|c| cur[c] + t * step[x * m + c]).collect();
            v.set(gx, &new);
        }
        v
    }

    /// Damped Newton iterations at fixed p, starting from `u`.
    pub fn newton(&self, u: &mut Extension, p: f64, tol: f64, max_iters: usize) -> Stage {
        let m = self.g.m();
        let mut iters = 0;
        let mut ev = self.eval(u, p, true);
        let mut le = self.log_energy(u, p);
        let mut converged = false;
        let mut stalled = false;
        while iters < max_iters {
            if ev.resid < tol || le == f64::NEG_INFINITY || self.is_empty() {
                converged = true;
                break;
            }
            iters += 1;
            let jac = ev.jac.take().expect("jacobian");
            let rhs: Vec<f64> = ev.f.iter().map(|v| -v).collect();
            let step = match jac.solve(&rhs) {
                Some(s) => s,
                None => {
                    // isotropic fallback: a scaled gradient step
                    rhs.clone()
                }
            };
            let mut dd = 0.0;
            for (x, l) in ev.lx.iter().enumerate() {
                let dot: f64 = (0..m).map(|c| ev.f[x * m + c] * step[x * m + c]).sum();
                if dot != 0.0 {
                    dd += p * (l - le).exp() * dot;
                }
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial = self.apply(u, &step, t);
                let lt = self.log_energy(&trial, p);
                let armijo = lt <= le + 1e-4 * t * dd.min(0.0);
                let flat = (lt - le).abs() <= 1e-12 * le.abs().max(1.0);
                if armijo || flat {
                    let te = self.eval(&trial, p, true);
                    if armijo && lt < le || te.resid < ev.resid {
                        accepted = Some((trial, te, lt));
                        break;
                    }
                }
                t *= 0.5;
            }
            match accepted {
                Some((trial, te, lt)) => {
                    *u = trial;
                    ev = te;
                    le = lt;
                }
                None => {
                    stalled = true;
                    break;
                }
            }
        }
        if !converged && (ev.resid < tol || stalled && ev.resid < tol.sqrt()) {
            converged = true;
        }
        Stage { p, iters, residual: ev.resid, log_energy: le, converged, stalled }
    }
}

pub(crate) fn logsumexp(v: &[f64]) -> f64 {
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + v.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}
