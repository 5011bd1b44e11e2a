use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{dist, edge_slope, profile, Extension, Graph, LipProfile, ProfileMode};
use crate::meb::chebyshev_center;
use crate::phar::{Problem, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Plimit,
    Peel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    SoftmaxQNorm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    pub mode: SolveMode,
    pub profile_mode: ProfileMode,
    pub p_schedule: Vec<f64>,
    pub inner_tol: f64,
    pub outer_tol: f64,
    /// Newton iterations per p-stage.
    pub max_iters: usize,
    /// Gauss-Seidel sweeps per polish or fixed-point run.
    pub max_sweeps: usize,
    pub smoothing: Smoothing,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: SolveMode::Peel,
            profile_mode: ProfileMode::Vertex,
            p_schedule: (1..=14).map(|k| 2f64.powi(k)).collect(),
            inner_tol: 1e-10,
            outer_tol: 1e-7,
            max_iters: 200,
            max_sweeps: 100_000,
            smoothing: Smoothing::SoftmaxQNorm,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_schedule.is_empty() {
            return Err(Error::Invalid("empty p schedule".into()));
        }
        if self.p_schedule.iter().any(|p| !(p.is_finite() && *p >= 2.0)) {
            return Err(Error::Invalid("p values must be finite and >= 2".into()));
        }
        if self.p_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("p schedule must be strictly increasing".into()));
        }
        if !(self.inner_tol > 0.0 && self.outer_tol > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn p_max(&self) -> f64 {
        *self.p_schedule.last().unwrap()
    }
}

/// Interior vertices left with at most one neighbor after repeatedly stripping such
/// vertices, in removal order, with the neighbor they copy.
#[derive(Debug, Clone)]
pub(crate) struct Pins {
    pub order: Vec<(usize, usize)>,
    pub mask: Vec<bool>,
}

pub(crate) fn pins(g: &Graph) -> Pins {
    let n = g.n();
    let mut mask = vec![false; n];
    let mut deg: Vec<usize> = (0..n).map(|i| g.neighbors(i).len()).collect();
    let mut q: VecDeque<usize> = (0..n).filter(|&i| !g.is_boundary(i) && deg[i] <= 1).collect();
    let mut order = Vec::new();
    while let Some(x) = q.pop_front() {
        if mask[x] {
            continue;
        }
        let anchor = g.neighbors(x).iter().map(|&(y, _)| y).find(|&y| !mask[y]);
        let Some(y) = anchor else { continue };
        mask[x] = true;
        order.push((x, y));
        deg[y] -= 1;
        if !g.is_boundary(y) && deg[y] <= 1 && !mask[y] {
            q.push_back(y);
        }
    }
    Pins { order, mask }
}

impl Pins {
    pub fn apply(&self, u: &mut Extension) {
        for &(x, y) in self.order.iter().rev() {
            let v = u.get(y).to_vec();
            u.set(x, &v);
        }
    }
}

fn centroid(g: &Graph) -> Vec<f64> {
    let m = g.m();
    let mut c = vec![0.0; m];
    let mut k = 0.0;
    for i in 0..g.n() {
        if let Some(b) = g.boundary_value(i) {
            for t in 0..m {
                c[t] += b[t];
            }
            k += 1.0;
        }
    }
    c.iter().map(|v| v / k).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PharResult {
    #[serde(skip)]
    pub extension: Option<Extension>,
    pub stages: Vec<Stage>,
    pub converged: bool,
}

/// Minimizer of the smoothed p-energy. Without a warm start the schedule entries below
/// `p` are used for continuation.
pub fn solve_p_harmonic(
    g: &Graph,
    p: f64,
    warm_start: Option<&Extension>,
    cfg: &SolveConfig,
) -> Result<(Extension, PharResult)> {
    if !(p.is_finite() && p >= 2.0) {
        return Err(Error::Invalid(format!("p = {p}")));
    }
    let pins = pins(g);
    let mut u = match warm_start {
        Some(w) => {
            w.validate(g)?;
            w.clone()
        }
        None => Extension::filled(g, &centroid(g)),
    };
    let schedule: Vec<f64> = match warm_start {
        Some(_) => vec![p],
        None => cfg.p_schedule.iter().copied().filter(|&q| q < p).chain([p]).collect(),
    };
    let free: Vec<bool> = (0..g.n()).map(|i| !g.is_boundary(i) && !pins.mask[i]).collect();
    let prob = Problem::new(g, &free, &pins.mask, cfg.profile_mode);
    let mut stages = Vec::new();
    for q in schedule {
        stages.push(prob.newton(&mut u, q, cfg.inner_tol, cfg.max_iters));
    }
    pins.apply(&mut u);
    let converged = stages.last().is_some_and(|s| s.converged);
    Ok((u.clone(), PharResult { extension: Some(u), stages, converged }))
}

/// Log of the p-energy I_p in the chosen profile mode (vertex: sum over interior Su^p).
pub fn log_p_energy(g: &Graph, u: &Extension, p: f64, mode: ProfileMode) -> f64 {
    let vals = crate::graph::lip_field(g, u, mode);
    let terms: Vec<f64> = vals.iter().map(|s| p * s.ln()).collect();
    crate::phar::logsumexp(&terms)
}

/// Log of the edge-sum energy minimized by `solve_p_harmonic`, over the same edges.
pub fn log_edge_energy(g: &Graph, u: &Extension, p: f64, mode: ProfileMode) -> f64 {
    let pins = pins(g);
    let free: Vec<bool> = (0..g.n()).map(|i| !g.is_boundary(i) && !pins.mask[i]).collect();
    Problem::new(g, &free, &pins.mask, mode).log_energy(u, p)
}

pub fn local_infinity_harmonic_step(g: &Graph, u: &Extension, x: &str) -> Result<Vec<f64>> {
    let i = g.index_of(x)?;
    if g.is_boundary(i) {
        return Err(Error::BoundaryVertex(x.to_string()));
    }
    Ok(local_step(g, u, i))
}

pub(crate) fn local_step(g: &Graph, u: &Extension, x: usize) -> Vec<f64> {
    let nb = g.neighbors(x);
    let pts: Vec<&[f64]> = nb.iter().map(|&(y, _)| u.get(y)).collect();
    let w: Vec<f64> = nb.iter().map(|&(_, k)| g.edges()[k].len).collect();
    chebyshev_center(&pts, &w).center
}

/// Gauss-Seidel sweeps over the vertices in `active` (index order).
/// Returns (sweeps, last max displacement).
pub(crate) fn sweep(g: &Graph, u: &mut Extension, active: &[usize], tol: f64, max_sweeps: usize) -> (usize, f64) {
    let mut last = f64::INFINITY;
    for s in 1..=max_sweeps {
        let mut mx: f64 = 0.0;
        for &x in active {
            let z = local_step(g, u, x);
            mx = mx.max(dist(&z, u.get(x)));
            u.set(x, &z);
        }
        last = mx;
        if mx < tol {
            return (s, mx);
        }
    }
    (max_sweeps, last)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPoint {
    pub sweeps: usize,
    pub displacement: f64,
    pub converged: bool,
}

pub fn solve_infinity_harmonic(g: &Graph, init: &Extension, cfg: &SolveConfig) -> Result<(Extension, FixedPoint)> {
    init.validate(g)?;
    let mut u = init.clone();
    let active = g.interior();
    let (sweeps, displacement) = sweep(g, &mut u, &active, cfg.inner_tol, cfg.max_sweeps);
    Ok((u, FixedPoint { sweeps, displacement, converged: displacement < cfg.inner_tol }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub final_p: Option<f64>,
    pub peel_levels: Vec<f64>,
    /// Largest single-vertex profile improvement available (0 when none).
    pub single_vertex_gain: f64,
    /// Largest improvement from shrinking or expanding a frozen component about its centroid.
    pub scaling_gain: f64,
    pub fixed_point_displacement: f64,
    pub polish_sweeps: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TightResult {
    #[serde(skip)]
    pub extension: Option<Extension>,
    pub profile: LipProfile,
    pub certificate: Certificate,
    pub residuals: Vec<Stage>,
    pub flagged: bool,
    pub notes: Vec<String>,
}

impl TightResult {
    pub fn extension(&self) -> &Extension {
        self.extension.as_ref().expect("extension")
    }
}

/// Amount by which `b` improves on `a` lexicographically (0 if it does not).
fn lex_gain(a: &LipProfile, b: &LipProfile, tol: f64) -> f64 {
    for (x, y) in a.entries.iter().zip(&b.entries) {
        if x - y > tol {
            return x - y;
        }
        if y - x > tol {
            return 0.0;
        }
    }
    0.0
}

fn components(g: &Graph, set: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in 0..g.n() {
        if !set[s] || seen[s] {
            continue;
        }
        let mut comp = vec![];
        let mut q = VecDeque::from([s]);
        seen[s] = true;
        while let Some(x) = q.pop_front() {
            comp.push(x);
            for &(y, _) in g.neighbors(x) {
                if set[y] && !seen[y] {
                    seen[y] = true;
                    q.push_back(y);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out
}

pub(crate) fn certify(g: &Graph, u: &Extension, groups: &[Vec<usize>], mode: ProfileMode, tol: f64) -> (f64, f64) {
    let base = profile(g, u, mode);
    let mut single: f64 = 0.0;
    for x in g.interior() {
        let z = local_step(g, u, x);
        let mut v = u.clone();
        v.set(x, &z);
        single = single.max(lex_gain(&base, &profile(g, &v, mode), tol));
    }
    let m = g.m();
    let mut scaling: f64 = 0.0;
    for comp in groups {
        let mut c = vec![0.0; m];
        for &x in comp {
            for t in 0..m {
                c[t] += u.get(x)[t] / comp.len() as f64;
            }
        }
        for eta in [1e-3, -1e-3, 1e-6, -1e-6] {
            let mut v = u.clone();
            for &x in comp {
                let val: Vec<f64> = (0..m).map(|t| c[t] + (1.0 - eta) * (u.get(x)[t] - c[t])).collect();
                v.set(x, &val);
            }
            scaling = scaling.max(lex_gain(&base, &profile(g, &v, mode), tol));
        }
    }
    (single, scaling)
}

pub fn solve_tight(g: &Graph, cfg: &SolveConfig) -> Result<TightResult> {
    cfg.validate()?;
    let n = g.n();
    let pins = pins(g);
    let mode = cfg.profile_mode;
    let p_max = cfg.p_max();
    let mut notes = Vec::new();
    let mut flagged = false;

    let mut free: Vec<bool> = (0..n).map(|i| !g.is_boundary(i) && !pins.mask[i]).collect();
    let mut u = Extension::filled(g, &centroid(g));
    let prob = Problem::new(g, &free, &pins.mask, mode);
    let mut residuals = Vec::new();
    for &p in &cfg.p_schedule {
        residuals.push(prob.newton(&mut u, p, cfg.inner_tol, cfg.max_iters));
    }
    if !residuals.last().is_some_and(|s| s.converged) {
        flagged = true;
        notes.push(format!("p-continuation did not converge at p = {p_max}"));
    }
    pins.apply(&mut u);

    let mut levels = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut polish_sweeps = 0;
    let active: Vec<usize> = (0..n).filter(|&i| !g.is_boundary(i) && !pins.mask[i]).collect();

    if cfg.mode == SolveMode::Peel {
        let tau = cfg.outer_tol.max(16.0 / p_max);
        let settled = 1e-8 * (1.0 + crate::oracle::data_box(g).iter().map(|(a, b)| b - a).fold(0.0, f64::max));
        let mut first = true;
        while free.iter().any(|&f| f) {
            if !first {
                let sub = Problem::new(g, &free, &pins.mask, mode);
                let st = sub.newton(&mut u, p_max, cfg.inner_tol, cfg.max_iters);
                if !st.converged {
                    notes.push(format!("peel level {} re-solve not converged", levels.len()));
                }
                residuals.push(st);
            }
            first = false;
            let live: Vec<usize> = (0..g.edges().len())
                .filter(|&k| {
                    let e = g.edges()[k];
                    (free[e.a] || free[e.b]) && !pins.mask[e.a] && !pins.mask[e.b]
                })
                .collect();
            let k_top = live.iter().map(|&k| edge_slope(g, &u, k)).fold(0.0, f64::max);
            let thr = if k_top <= settled { 0.0 } else { k_top * (1.0 - tau) };
            let mut newly = vec![false; n];
            let mut q: VecDeque<usize> = (0..n).filter(|&i| !free[i] && !pins.mask[i]).collect();
            let mut reached = vec![false; n];
            for &i in &q {
                reached[i] = true;
            }
            while let Some(x) = q.pop_front() {
                for &(y, k) in g.neighbors(x) {
                    if free[y] && !reached[y] && edge_slope(g, &u, k) >= thr {
                        reached[y] = true;
                        newly[y] = true;
                        q.push_back(y);
                    }
                }
            }
            let new_set: Vec<usize> = (0..n).filter(|&i| newly[i]).collect();
            if new_set.is_empty() {
                flagged = true;
                notes.push(format!("peel made no progress at level {k_top}; kept p-limit values"));
                break;
            }
            let (s, _) = sweep(g, &mut u, &new_set, cfg.inner_tol, cfg.max_sweeps);
            polish_sweeps += s;
            pins.apply(&mut u);
            let level = new_set
                .iter()
                .flat_map(|&x| g.neighbors(x).iter().map(|&(_, k)| edge_slope(g, &u, k)))
                .fold(0.0, f64::max);
            levels.push(level);
            groups.extend(components(g, &newly));
            for &x in &new_set {
                free[x] = false;
            }
        }
    } else {
        let set: Vec<bool> = (0..n).map(|i| !g.is_boundary(i) && !pins.mask[i]).collect();
        groups = components(g, &set);
    }

    let before = u.clone();
    if cfg.mode == SolveMode::Peel {
        let (s, disp) = sweep(g, &mut u, &active, cfg.inner_tol, cfg.max_sweeps);
        polish_sweeps += s;
        pins.apply(&mut u);
        if disp >= cfg.inner_tol {
            flagged = true;
            notes.push(format!("final polish stopped at displacement {disp:e}"));
        }
        let pb = profile(g, &before, mode);
        let pa = profile(g, &u, mode);
        if pa.lex_cmp(&pb, cfg.outer_tol) == std::cmp::Ordering::Greater {
            notes.push("polish worsened the profile; reverted".into());
            flagged = true;
            u = before;
        }
    }

    // one extra sweep measures how far u is from a fixed point
    let mut probe = u.clone();
    let (_, fp_disp) = sweep(g, &mut probe, &active, 0.0, 1);
    let (single, scaling) = certify(g, &u, &groups, mode, cfg.outer_tol);
    let holds = single <= cfg.outer_tol && scaling <= cfg.outer_tol;
    if !holds {
        notes.push(format!("certificate: single-vertex gain {single:e}, scaling gain {scaling:e}"));
    }
    let certificate = Certificate {
        final_p: (cfg.mode == SolveMode::Plimit).then_some(p_max),
        peel_levels: levels,
        single_vertex_gain: single,
        scaling_gain: scaling,
        fixed_point_displacement: fp_disp,
        polish_sweeps,
        holds,
    };
    Ok(TightResult {
        profile: profile(g, &u, mode),
        extension: Some(u),
        certificate,
        residuals,
        flagged,
        notes,
    })
}
