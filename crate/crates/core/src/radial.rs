//! Radially symmetric tight maps on an annulus, u(r, theta) = phi(r) e^{i alpha theta}.
//! The radius profile phi is affine, a single power curve k r^(+-alpha), or two such
//! pieces glued at a splice radius.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Extension, Graph};
use crate::solver::{solve_tight, SolveConfig};

const PURE_TOL: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialSpec {
    pub alpha: f64,
    pub r1: f64,
    pub m1: f64,
    pub r2: f64,
    pub m2: f64,
}

impl RadialSpec {
    pub fn new(alpha: f64, r1: f64, m1: f64, r2: f64, m2: f64) -> Result<RadialSpec> {
        let s = RadialSpec { alpha, r1, m1, r2, m2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.alpha, self.r1, self.m1, self.r2, self.m2].iter().all(|x| x.is_finite() && *x > 0.0);
        if !ok || self.r1 >= self.r2 {
            return Err(Error::Invalid(format!("radial data needs alpha, M1, M2 > 0 and 0 < R1 < R2: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RadialCase {
    Affine,
    PureConformalPlus,
    PureConformalMinus,
    Glue1,
    Glue2,
    Glue3,
    Glue4,
    Glue5,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Piece {
    /// k r + k0
    Line { k: f64, k0: f64 },
    /// k r^e
    Power { k: f64, e: f64 },
}

impl Piece {
    pub fn eval(&self, r: f64) -> (f64, f64) {
        match *self {
            Piece::Line { k, k0 } => (k * r + k0, k),
            Piece::Power { k, e } => {
                let v = k * r.powf(e);
                (v, e * v / r)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RadialSolution {
    pub spec: RadialSpec,
    pub case: RadialCase,
    /// Piece on [R1, splice] (or the whole interval).
    pub left: Piece,
    /// Piece on [splice, R2] for glued cases.
    pub right: Option<Piece>,
    pub splice: Option<f64>,
}

impl RadialSolution {
    pub fn k(&self) -> Option<f64> {
        match (self.case, self.left) {
            (RadialCase::Affine, Piece::Line { k, .. }) => Some(k),
            (RadialCase::PureConformalPlus | RadialCase::PureConformalMinus, Piece::Power { k, .. }) => Some(k),
            _ => None,
        }
    }

    pub fn k0(&self) -> Option<f64> {
        match (self.case, self.left) {
            (RadialCase::Affine, Piece::Line { k0, .. }) => Some(k0),
            _ => None,
        }
    }

    /// Coefficient of the k1 r^-alpha piece, when present.
    pub fn k1(&self) -> Option<f64> {
        [Some(self.left), self.right].into_iter().flatten().find_map(|p| match p {
            Piece::Power { k, e } if e < 0.0 && self.splice.is_some() => Some(k),
            _ => None,
        })
    }

    /// Coefficient of the k2 r^alpha piece, when present.
    pub fn k2(&self) -> Option<f64> {
        [Some(self.left), self.right].into_iter().flatten().find_map(|p| match p {
            Piece::Power { k, e } if e > 0.0 && self.splice.is_some() => Some(k),
            _ => None,
        })
    }
}

fn affine_through(s: &RadialSpec) -> Piece {
    let k = (s.m2 - s.m1) / (s.r2 - s.r1);
    Piece::Line { k, k0: s.m1 - k * s.r1 }
}

/// Strict slope condition |k| > alpha phi(r) / r at both ends; the ratio is monotone
/// in r along a line, so the ends decide it.
pub fn affine_feasible(s: &RadialSpec) -> bool {
    let Piece::Line { k, .. } = affine_through(s) else { unreachable!() };
    [(s.r1, s.m1), (s.r2, s.m2)].iter().all(|&(r, m)| k.abs() > s.alpha * m / r)
}

/// Root of a sign-changing `f` on [lo, hi] by bisection.
fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::Bracket { lo: flo, hi: fhi });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > ROOT_TOL * b.abs().max(1.0) {
        let c = 0.5 * (a + b);
        if c <= a || c >= b {
            break;
        }
        if f(c).signum() == flo.signum() {
            a = c;
        } else {
            b = c;
        }
    }
    Ok(0.5 * (a + b))
}

/// Splice for a power curve on one side and a line on the other. The line leaves the
/// curve at `t` with slope `sign` times the curve's slope magnitude.
fn power_then_line(s: &RadialSpec, case: RadialCase) -> Result<RadialSolution> {
    let a = s.alpha;
    let k1 = s.m1 * s.r1.powf(a);
    let k2 = s.m2 * s.r2.powf(-a);
    let (left, right, t) = match case {
        // k1 r^-a, then a line continuing with the curve's slope (Glue2, Glue5) or the
        // reflected slope (Glue4)
        RadialCase::Glue2 | RadialCase::Glue5 | RadialCase::Glue4 => {
            let sign = if case == RadialCase::Glue4 { 1.0 } else { -1.0 };
            let end = |t: f64| k1 * t.powf(-a) * (1.0 + sign * a * (s.r2 - t) / t) - s.m2;
            let t = bisect(end, s.r1, s.r2)?;
            let phi = k1 * t.powf(-a);
            let k = sign * a * phi / t;
            (Piece::Power { k: k1, e: -a }, Piece::Line { k, k0: phi - k * t }, t)
        }
        // line rising into k2 r^a with matching slope
        RadialCase::Glue3 => {
            let start = |t: f64| k2 * t.powf(a) * (1.0 - a * (t - s.r1) / t) - s.m1;
            let t = bisect(start, s.r1, s.r2)?;
            let phi = k2 * t.powf(a);
            let k = a * phi / t;
            (Piece::Line { k, k0: phi - k * t }, Piece::Power { k: k2, e: a }, t)
        }
        _ => unreachable!(),
    };
    Ok(RadialSolution { spec: *s, case, left, right: Some(right), splice: Some(t) })
}

pub fn solve_radial(s: &RadialSpec) -> Result<RadialSolution> {
    s.validate()?;
    let a = s.alpha;
    let whole = |case, left| Ok(RadialSolution { spec: *s, case, left, right: None, splice: None });
    // transformed coordinates: each power curve is a level set of one of them
    let (c1a, c1b) = (s.r1.powf(a) / s.m1, s.r2.powf(a) / s.m2);
    let (c2a, c2b) = (s.r1.powf(-a) / s.m1, s.r2.powf(-a) / s.m2);
    let same = |x: f64, y: f64| (x - y).abs() <= PURE_TOL * x.abs().max(y.abs());
    if same(c2a, c2b) {
        return whole(RadialCase::PureConformalMinus, Piece::Power { k: s.m1 * s.r1.powf(a), e: -a });
    }
    if a >= 1.0 && same(c1a, c1b) {
        return whole(RadialCase::PureConformalPlus, Piece::Power { k: s.m1 * s.r1.powf(-a), e: a });
    }
    let lo = s.m1 * (s.r1 / s.r2).powf(a);
    let hi = s.m1 * (s.r2 / s.r1).powf(a);
    if a >= 1.0 && s.m2 > lo && s.m2 < hi {
        let k1 = s.m1 * s.r1.powf(a);
        let k2 = s.m2 * s.r2.powf(-a);
        let t = (k1 / k2).powf(1.0 / (2.0 * a));
        return Ok(RadialSolution {
            spec: *s,
            case: RadialCase::Glue1,
            left: Piece::Power { k: k1, e: -a },
            right: Some(Piece::Power { k: k2, e: a }),
            splice: Some(t),
        });
    }
    if affine_feasible(s) {
        return whole(RadialCase::Affine, affine_through(s));
    }
    let case = match (a >= 1.0, s.m2 < lo) {
        (true, true) => RadialCase::Glue2,
        (true, false) => RadialCase::Glue3,
        (false, true) => RadialCase::Glue5,
        (false, false) => RadialCase::Glue4,
    };
    let sol = power_then_line(s, case)
        .map_err(|e| Error::NoRadialCandidate(format!("{s:?} ({case:?}: {e})")))?;
    match sol.splice {
        Some(t) if t > s.r1 && t < s.r2 => Ok(sol),
        _ => Err(Error::NoRadialCandidate(format!("{s:?}: splice outside the open interval"))),
    }
}

pub fn classify(s: &RadialSpec) -> Result<RadialCase> {
    Ok(solve_radial(s)?.case)
}

/// Value and derivative; at the splice the left-hand piece is used.
pub fn eval_phi(sol: &RadialSolution, r: f64) -> Result<(f64, f64)> {
    eval_phi_side(sol, r, false)
}

/// As `eval_phi`, taking the right-hand piece at the splice when `right` is set.
pub fn eval_phi_side(sol: &RadialSolution, r: f64, right: bool) -> Result<(f64, f64)> {
    let s = &sol.spec;
    if !(r >= s.r1 && r <= s.r2) {
        return Err(Error::OutOfRange(r, s.r1, s.r2));
    }
    let piece = match (sol.splice, sol.right) {
        (Some(t), Some(p)) if r > t || (r == t && right) => p,
        _ => sol.left,
    };
    Ok(piece.eval(r))
}

/// max(|phi'|, alpha phi / r), the larger one-sided derivative at the splice.
pub fn radial_local_lip(sol: &RadialSolution, r: f64) -> Result<f64> {
    let (phi, d1) = eval_phi_side(sol, r, false)?;
    let (_, d2) = eval_phi_side(sol, r, true)?;
    Ok(d1.abs().max(d2.abs()).max(sol.spec.alpha * phi / r))
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionCheck {
    pub endpoint_error: f64,
    pub continuity_error: f64,
    /// Slope defect at the splice: matching cases compare with the touching curve's
    /// slope, the opposite-slope case with its negation. Glue1 has a corner.
    pub slope_error: f64,
    pub affine_margin: Option<f64>,
}

pub fn check_solution(sol: &RadialSolution) -> SolutionCheck {
    let s = &sol.spec;
    let (p1, _) = eval_phi(sol, s.r1).unwrap();
    let (p2, _) = eval_phi_side(sol, s.r2, true).unwrap();
    let endpoint_error = (p1 - s.m1).abs().max((p2 - s.m2).abs());
    let (mut continuity_error, mut slope_error) = (0.0, 0.0);
    if let (Some(t), Some(right)) = (sol.splice, sol.right) {
        let (vl, dl) = sol.left.eval(t);
        let (vr, dr) = right.eval(t);
        continuity_error = (vl - vr).abs();
        slope_error = match sol.case {
            RadialCase::Glue1 => 0.0,
            RadialCase::Glue4 => (dl + dr).abs(),
            _ => (dl - dr).abs(),
        };
    }
    let affine_margin = match sol.left {
        Piece::Line { k, k0 } if sol.right.is_none() => Some(
            [s.r1, s.r2].iter().map(|&r| k.abs() - s.alpha * (k * r + k0) / r).fold(f64::INFINITY, f64::min),
        ),
        _ => None,
    };
    SolutionCheck { endpoint_error, continuity_error, slope_error, affine_margin }
}

/// `n` evenly spaced samples (r, phi, phi', Lu).
pub fn sample(sol: &RadialSolution, n: usize) -> Vec<[f64; 4]> {
    let s = &sol.spec;
    (0..n.max(2))
        .map(|i| {
            let r = if i + 1 == n.max(2) { s.r2 } else { s.r1 + (s.r2 - s.r1) * i as f64 / (n.max(2) - 1) as f64 };
            let (p, d) = eval_phi(sol, r).unwrap();
            [r, p, d, radial_local_lip(sol, r).unwrap()]
        })
        .collect()
}

fn node(i: usize, j: usize) -> String {
    format!("r{i:03}t{j:03}")
}

/// Polar grid on [R1, R2] times one period 2 pi / alpha of angle, inner and outer rings
/// on the boundary carrying M e^{i alpha theta}. Edge lengths are chords.
pub fn discretize_annulus(s: &RadialSpec, n_r: usize, n_theta: usize) -> Result<Graph> {
    s.validate()?;
    if n_r < 2 || n_theta < 3 {
        return Err(Error::Invalid("annulus grid needs n_r >= 2 and n_theta >= 3".into()));
    }
    let dr = (s.r2 - s.r1) / (n_r - 1) as f64;
    let dt = 2.0 * PI / s.alpha / n_theta as f64;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut boundary = BTreeMap::new();
    for i in 0..n_r {
        let r = ring_radius(s, n_r, i);
        for j in 0..n_theta {
            vertices.push(node(i, j));
            edges.push((node(i, j), node(i, (j + 1) % n_theta), 2.0 * r * (dt / 2.0).sin()));
            if i + 1 < n_r {
                edges.push((node(i, j), node(i + 1, j), dr));
            }
            let m = if i == 0 { Some(s.m1) } else if i + 1 == n_r { Some(s.m2) } else { None };
            if let Some(m) = m {
                let th = s.alpha * dt * j as f64;
                boundary.insert(node(i, j), vec![m * th.cos(), m * th.sin()]);
            }
        }
    }
    Graph::new(2, vertices, edges, boundary)
}

fn ring_radius(s: &RadialSpec, n_r: usize, i: usize) -> f64 {
    if i + 1 == n_r {
        s.r2
    } else {
        s.r1 + (s.r2 - s.r1) * i as f64 / (n_r - 1) as f64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub case: RadialCase,
    pub n_r: usize,
    pub n_theta: usize,
    /// (r, phi(r), mean |u| on the ring)
    pub rings: Vec<[f64; 3]>,
    pub max_error: f64,
    pub flagged: bool,
    pub seconds: f64,
}

/// Solves the discretized annulus and compares ring radii with phi.
pub fn annulus_crosscheck(s: &RadialSpec, n_r: usize, n_theta: usize, cfg: &SolveConfig) -> Result<CrossCheck> {
    let sol = solve_radial(s)?;
    let g = discretize_annulus(s, n_r, n_theta)?;
    let t = std::time::Instant::now();
    let res = solve_tight(&g, cfg)?;
    let seconds = t.elapsed().as_secs_f64();
    let u: &Extension = res.extension();
    let mut rings = Vec::new();
    for i in 1..n_r - 1 {
        let r = ring_radius(s, n_r, i);
        let mean = (0..n_theta)
            .map(|j| {
                let v = u.value(&g, &node(i, j)).unwrap();
                v[0].hypot(v[1])
            })
            .sum::<f64>()
            / n_theta as f64;
        rings.push([r, eval_phi(&sol, r)?.0, mean]);
    }
    let max_error = rings.iter().map(|x| (x[1] - x[2]).abs()).fold(0.0, f64::max);
    Ok(CrossCheck { case: sol.case, n_r, n_theta, rings, max_error, flagged: res.flagged, seconds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: f64, r1: f64, m1: f64, r2: f64, m2: f64) -> RadialSpec {
        RadialSpec::new(a, r1, m1, r2, m2).unwrap()
    }

    #[test]
    fn glue1_closed_form() {
        let sol = solve_radial(&spec(1.0, 1.0, 2.0, 4.0, 2.0)).unwrap();
        assert_eq!(sol.case, RadialCase::Glue1);
        assert!((sol.splice.unwrap() - 2.0).abs() < 1e-12);
        let (v, d) = eval_phi(&sol, 2.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12 && (d + 0.5).abs() < 1e-12);
        let (v, d) = eval_phi_side(&sol, 2.0, true).unwrap();
        assert!((v - 1.0).abs() < 1e-12 && (d - 0.5).abs() < 1e-12);
        assert!((radial_local_lip(&sol, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((radial_local_lip(&sol, 4.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_curves() {
        let sol = solve_radial(&spec(2.0, 1.5, 2.25, 3.0, 9.0)).unwrap();
        assert_eq!(sol.case, RadialCase::PureConformalPlus);
        assert!((sol.k().unwrap() - 1.0).abs() < 1e-12);
        let (v, d) = eval_phi(&sol, 3.0).unwrap();
        assert!((v - 9.0).abs() < 1e-12 && (d - 6.0).abs() < 1e-12);
        let sol = solve_radial(&spec(1.0, 2.0, 0.5, 5.0, 0.2)).unwrap();
        assert_eq!(sol.case, RadialCase::PureConformalMinus);
        assert!((sol.k().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_data_is_not_affine() {
        for a in [1.0, 1.5, 3.0] {
            let s = spec(a, 1.0, 1.0, 2.0, 1.0);
            assert!(!affine_feasible(&s));
            assert_ne!(classify(&s).unwrap(), RadialCase::Affine);
        }
    }

    #[test]
    fn affine_eval() {
        let sol = RadialSolution {
            spec: spec(0.5, 1.0, 2.0, 4.0, 8.0),
            case: RadialCase::Affine,
            left: Piece::Line { k: 2.0, k0: 0.0 },
            right: None,
            splice: None,
        };
        assert_eq!(eval_phi(&sol, 3.0).unwrap(), (6.0, 2.0));
        assert_eq!(radial_local_lip(&sol, 3.0).unwrap(), 2.0);
        assert!(eval_phi(&sol, 5.0).is_err());
    }

    #[test]
    fn every_case_is_reached() {
        let cases = [
            (spec(1.0, 1.0, 2.0, 4.0, 2.0), RadialCase::Glue1),
            (spec(2.0, 1.0, 1.0, 2.0, 0.1), RadialCase::Glue2),
            (spec(2.0, 1.0, 1.0, 2.0, 5.0), RadialCase::Glue3),
            (spec(0.5, 1.0, 1.0, 4.0, 1.0), RadialCase::Glue4),
            (spec(0.5, 1.0, 1.0, 4.0, 0.3), RadialCase::Glue5),
            (spec(0.5, 1.0, 1.0, 2.0, 3.0), RadialCase::Affine),
            (spec(2.0, 1.0, 1.0, 1.1, 0.5), RadialCase::Affine),
            (spec(2.0, 1.0, 1.0, 2.0, 4.0), RadialCase::PureConformalPlus),
            (spec(1.0, 1.0, 1.0, 2.0, 0.5), RadialCase::PureConformalMinus),
        ];
        for (s, want) in cases {
            let sol = solve_radial(&s).unwrap();
            assert_eq!(sol.case, want, "{s:?}");
            let c = check_solution(&sol);
            assert!(c.endpoint_error < 1e-10 && c.continuity_error < 1e-10 && c.slope_error < 1e-10, "{s:?} {c:?}");
            if let Some(m) = c.affine_margin {
                assert!(m > 0.0);
            }
        }
    }

    #[test]
    fn two_ring_grid_has_no_interior() {
        let g = discretize_annulus(&spec(1.0, 1.0, 1.0, 2.0, 2.0), 2, 8).unwrap();
        assert!(g.interior().is_empty());
    }
}
