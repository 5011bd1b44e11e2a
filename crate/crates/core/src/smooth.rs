//! Grid checks for smooth planar maps: principal directions and the flow equation
//! -(u_a)_a = 0, the conformal criterion Re[u' u''' / u''^2] <= 2, fans (f(x), y), and
//! the family u_t(z) = t z^2 + (1 - t) z^2 / |z|.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Extension, Graph};

pub const GAP_TOL: f64 = 1e-6;

/// Values of a map R^2 -> R^m on the lattice (x0 + i h, y0 + j h), x fastest.
#[derive(Clone, Debug)]
pub struct FieldSample {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub m: usize,
    pub values: Vec<f64>,
    /// true where the point is excluded
    pub mask: Vec<bool>,
}

impl FieldSample {
    /// Samples `f`; points where it returns None are masked.
    pub fn from_fn(
        x0: f64,
        y0: f64,
        h: f64,
        nx: usize,
        ny: usize,
        m: usize,
        f: impl Fn(f64, f64) -> Option<Vec<f64>>,
    ) -> Result<FieldSample> {
        if !(h > 0.0) || nx == 0 || ny == 0 || m == 0 {
            return Err(Error::Invalid("field grid needs h > 0 and a non-empty lattice".into()));
        }
        let mut values = vec![0.0; nx * ny * m];
        let mut mask = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                match f(x0 + i as f64 * h, y0 + j as f64 * h) {
                    Some(v) if v.len() == m && v.iter().all(|x| x.is_finite()) => {
                        values[k * m..(k + 1) * m].copy_from_slice(&v);
                    }
                    Some(v) if v.len() != m => {
                        return Err(Error::Invalid(format!("field value of length {} (m = {m})", v.len())))
                    }
                    _ => mask[k] = true,
                }
            }
        }
        Ok(FieldSample { x0, y0, h, nx, ny, m, values, mask })
    }

    /// Square lattice covering [-half, half]^2.
    pub fn square(half: f64, h: f64, m: usize, f: impl Fn(f64, f64) -> Option<Vec<f64>>) -> Result<FieldSample> {
        let n = (2.0 * half / h).round() as usize + 1;
        FieldSample::from_fn(-half, -half, h, n, n, m, f)
    }

    pub fn xy(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    fn at(&self, i: usize, j: usize) -> Option<&[f64]> {
        let k = j * self.nx + i;
        (!self.mask[k]).then(|| &self.values[k * self.m..(k + 1) * self.m])
    }

    fn at_off(&self, i: usize, j: usize, di: isize, dj: isize) -> Option<&[f64]> {
        let (a, b) = (i as isize + di, j as isize + dj);
        if a < 0 || b < 0 || a >= self.nx as isize || b >= self.ny as isize {
            return None;
        }
        self.at(a as usize, b as usize)
    }

    /// Centered-difference Jacobian (m x 2) with lattice step `step` h.
    pub fn jacobian(&self, i: usize, j: usize, step: usize) -> Option<DMatrix<f64>> {
        let s = step as isize;
        let hh = 2.0 * self.h * step as f64;
        let (xp, xm) = (self.at_off(i, j, s, 0)?, self.at_off(i, j, -s, 0)?);
        let (yp, ym) = (self.at_off(i, j, 0, s)?, self.at_off(i, j, 0, -s)?);
        self.at(i, j)?;
        let mut jac = DMatrix::zeros(self.m, 2);
        for t in 0..self.m {
            jac[(t, 0)] = (xp[t] - xm[t]) / hh;
            jac[(t, 1)] = (yp[t] - ym[t]) / hh;
        }
        Some(jac)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y");
        for t in 1..=self.m {
            write!(s, ",u{t}").unwrap();
        }
        s.push('\n');
        for j in 0..self.ny {
            for i in 0..self.nx {
                if let Some(v) = self.at(i, j) {
                    let (x, y) = self.xy(i, j);
                    write!(s, "{},{}", crate::io::fmt_f64(x), crate::io::fmt_f64(y)).unwrap();
                    for c in v {
                        write!(s, ",{}", crate::io::fmt_f64(*c)).unwrap();
                    }
                    s.push('\n');
                }
            }
        }
        s
    }

    /// Parses `x,y,u1..um` rows. The lattice is inferred from the coordinates; missing
    /// lattice points are masked. `h` overrides the inferred spacing.
    pub fn from_csv(text: &str, h: Option<f64>) -> Result<FieldSample> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Invalid("empty field file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 3 || cols[0] != "x" || cols[1] != "y" {
            return Err(Error::Invalid("field header must be x,y,u1..um".into()));
        }
        let m = cols.len() - 2;
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let v: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Invalid(format!("row {}: {e}", n + 2)))?;
            if v.len() != m + 2 {
                return Err(Error::Invalid(format!("row {} has {} columns", n + 2, v.len())));
            }
            rows.push(v);
        }
        if rows.is_empty() {
            return Err(Error::Invalid("field has no rows".into()));
        }
        let x0 = rows.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
        let y0 = rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
        let h = match h {
            Some(h) => h,
            None => {
                let mut d: Vec<f64> = rows
                    .iter()
                    .flat_map(|r| [r[0] - x0, r[1] - y0])
                    .filter(|&d| d > 1e-12)
                    .collect();
                d.sort_by(f64::total_cmp);
                *d.first().ok_or_else(|| Error::Invalid("cannot infer grid spacing".into()))?
            }
        };
        let idx = |c: f64, o: f64| ((c - o) / h).round() as usize;
        let nx = rows.iter().map(|r| idx(r[0], x0)).max().unwrap() + 1;
        let ny = rows.iter().map(|r| idx(r[1], y0)).max().unwrap() + 1;
        let mut values = vec![0.0; nx * ny * m];
        let mut mask = vec![true; nx * ny];
        for r in &rows {
            let k = idx(r[1], y0) * nx + idx(r[0], x0);
            mask[k] = false;
            values[k * m..(k + 1) * m].copy_from_slice(&r[2..]);
        }
        Ok(FieldSample { x0, y0, h, nx, ny, m, values, mask })
    }

    pub fn read_csv(path: &Path, h: Option<f64>) -> Result<FieldSample> {
        FieldSample::from_csv(&std::fs::read_to_string(path)?, h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Principal {
    Direction(Vec<f64>),
    NotPrincipal,
}

/// Unit top eigenvector of J^t J when its eigenvalue is simple (relative gap above
/// `gap_tol`), with its first nonzero component positive.
pub fn principal_direction(j: &DMatrix<f64>, gap_tol: f64) -> Principal {
    let n = j.ncols();
    if n == 0 || j.iter().all(|&x| x == 0.0) {
        return Principal::NotPrincipal;
    }
    let jtj = j.transpose() * j;
    let eig = SymmetricEigen::new(jtj);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let l1 = eig.eigenvalues[order[0]];
    let l2 = if n > 1 { eig.eigenvalues[order[1]].max(0.0) } else { 0.0 };
    if !(l1 > 0.0) || l1 - l2 <= gap_tol * l1 {
        return Principal::NotPrincipal;
    }
    let mut a: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let nrm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let lead = a.iter().copied().find(|x| x.abs() > 1e-12 * nrm).unwrap_or(1.0);
    let sgn = if lead < 0.0 { -1.0 } else { 1.0 };
    for x in &mut a {
        *x *= sgn / nrm;
    }
    Principal::Direction(a)
}

/// Operator norm, the largest singular value.
pub fn op_norm(a: &DMatrix<f64>) -> f64 {
    let ev = SymmetricEigen::new(a.transpose() * a).eigenvalues;
    ev.iter().copied().fold(0.0, f64::max).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct Stats {
    pub evaluated: usize,
    pub masked: usize,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(field: &[Option<f64>]) -> Stats {
        let mut v: Vec<f64> = field.iter().flatten().copied().collect();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| if v.is_empty() { f64::NAN } else { v[((v.len() - 1) as f64 * p).round() as usize] };
        Stats {
            evaluated: v.len(),
            masked: field.len() - v.len(),
            p50: q(0.5),
            p90: q(0.9),
            p99: q(0.99),
            max: v.last().copied().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PdeResidual {
    /// |(u_a)_a| per lattice point; None where masked, not principal, or off-stencil.
    #[serde(skip)]
    pub values: Vec<Option<f64>>,
    pub stats: Stats,
    /// log2 of the median residual ratio between steps 2h and h.
    pub order: Option<f64>,
}

fn flow_residual(f: &FieldSample, step: usize, gap_tol: f64) -> Vec<Option<f64>> {
    let mut dirs: Vec<Option<(DMatrix<f64>, Vec<f64>)>> = Vec::with_capacity(f.nx * f.ny);
    for j in 0..f.ny {
        for i in 0..f.nx {
            dirs.push(f.jacobian(i, j, step).and_then(|jac| match principal_direction(&jac, gap_tol) {
                Principal::Direction(a) => Some((jac, a)),
                Principal::NotPrincipal => None,
            }));
        }
    }
    let s = step as isize;
    let hh = 2.0 * f.h * step as f64;
    let mut out = vec![None; f.nx * f.ny];
    for j in 0..f.ny {
        for i in 0..f.nx {
            let Some((_, a)) = &dirs[j * f.nx + i] else { continue };
            // u_a at a neighbor, with the neighbor's direction aligned to a
            let w = |di: isize, dj: isize| -> Option<Vec<f64>> {
                let (p, q) = (i as isize + di, j as isize + dj);
                if p < 0 || q < 0 || p >= f.nx as isize || q >= f.ny as isize {
                    return None;
                }
                let (jac, b) = dirs[q as usize * f.nx + p as usize].as_ref()?;
                let sgn = if a[0] * b[0] + a[1] * b[1] < 0.0 { -1.0 } else { 1.0 };
                Some((0..f.m).map(|t| sgn * (jac[(t, 0)] * b[0] + jac[(t, 1)] * b[1])).collect())
            };
            let (Some(xp), Some(xm), Some(yp), Some(ym)) = (w(s, 0), w(-s, 0), w(0, s), w(0, -s)) else {
                continue;
            };
            let r: f64 = (0..f.m)
                .map(|t| {
                    let d = (a[0] * (xp[t] - xm[t]) + a[1] * (yp[t] - ym[t])) / hh;
                    d * d
                })
                .sum::<f64>()
                .sqrt();
            out[j * f.nx + i] = Some(r);
        }
    }
    out
}

fn median(v: &[Option<f64>]) -> Option<f64> {
    let mut x: Vec<f64> = v.iter().flatten().copied().collect();
    if x.is_empty() {
        return None;
    }
    x.sort_by(f64::total_cmp);
    Some(x[x.len() / 2])
}

/// Pointwise |(u_a)_a| where a is the principal direction field of Du.
pub fn principal_pde_residual(f: &FieldSample, gap_tol: f64) -> PdeResidual {
    let values = flow_residual(f, 1, gap_tol);
    let coarse = flow_residual(f, 2, gap_tol);
    let order = match (median(&values), median(&coarse)) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((b / a).log2()),
        _ => None,
    };
    PdeResidual { stats: Stats::of(&values), values, order }
}

/// Largest singular value of the finite-difference Jacobian at each point.
pub fn lip_field_fd(f: &FieldSample) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(f.nx * f.ny);
    for j in 0..f.ny {
        for i in 0..f.nx {
            out.push(f.jacobian(i, j, 1).map(|jac| op_norm(&jac)));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalJet {
    pub z: Complex64,
    pub u1: Complex64,
    pub u2: Complex64,
    pub u3: Complex64,
}

impl ConformalJet {
    /// Closed-form jet of z^m.
    pub fn power(m: Complex64, z: Complex64) -> ConformalJet {
        let one = Complex64::new(1.0, 0.0);
        ConformalJet {
            z,
            u1: m * z.powc(m - one),
            u2: m * (m - one) * z.powc(m - 2.0 * one),
            u3: m * (m - one) * (m - 2.0 * one) * z.powc(m - 3.0 * one),
        }
    }

    /// Jet from the four-point stencil on the circle |w - z| = h (Cauchy coefficients
    /// by the trapezoid rule).
    pub fn from_fn(f: impl Fn(Complex64) -> Complex64, z: Complex64, h: f64) -> ConformalJet {
        let n = 4;
        let mut c = [Complex64::new(0.0, 0.0); 4];
        for j in 0..n {
            let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            let fz = f(z + h * w);
            for (k, ck) in c.iter_mut().enumerate() {
                *ck += fz * w.powi(-(k as i32)) / n as f64;
            }
        }
        ConformalJet { z, u1: c[1] / h, u2: 2.0 * c[2] / (h * h), u3: 6.0 * c[3] / (h * h * h) }
    }
}

/// Re(u' u''' / u''^2). Jets with u'' = u''' = 0 (affine to third order) return 0.
pub fn conformal_criterion(j: &ConformalJet) -> Result<f64> {
    if j.u2 == Complex64::new(0.0, 0.0) {
        if j.u1.norm() != 0.0 && j.u3.norm() != 0.0 {
            return Err(Error::Singular);
        }
        return Ok(0.0);
    }
    Ok((j.u1 * j.u3 / (j.u2 * j.u2)).re)
}

/// Whether z^m passes the criterion: m outside the open disk of radius 1/2 about 1/2.
pub fn conformal_criterion_complex_m(m: Complex64) -> bool {
    (m - 0.5).norm() >= 0.5
}

/// The same test written as Re (m - 1)^-1 >= -1.
pub fn conformal_criterion_complex_m_direct(m: Complex64) -> bool {
    (1.0 / (m - 1.0)).re >= -1.0
}

/// For real m outside {0, 1}: u = z^m passes the criterion exactly when its inverse
/// v = z^(1/m) has Re[v' v''' / v''^2] >= 1. Returns the shared truth value.
pub fn inverse_criterion_crosscheck(m: f64) -> Result<bool> {
    if m == 0.0 || m == 1.0 || !m.is_finite() {
        return Err(Error::Precondition(format!("m = {m}")));
    }
    let z = Complex64::new(0.7, 0.4);
    let cu = conformal_criterion(&ConformalJet::power(Complex64::new(m, 0.0), z))?;
    let cv = conformal_criterion(&ConformalJet::power(Complex64::new(1.0 / m, 0.0), z))?;
    let forward = cu <= 2.0;
    let inverse = cv >= 1.0;
    if forward != inverse {
        return Err(Error::Invalid(format!("criterion {cu} and inverse criterion {cv} disagree at m = {m}")));
    }
    Ok(forward)
}

/// Re(u' u''' / u''^2) for a sampled planar map read as u1 + i u2, with complex
/// derivatives taken along x by centered differences. Locally affine points give 0;
/// None off-stencil or where u'' vanishes but u''' does not.
pub fn conformal_field(f: &FieldSample, gap_tol: f64) -> Result<Vec<Option<f64>>> {
    if f.m != 2 {
        return Err(Error::Invalid(format!("conformal check needs m = 2, got {}", f.m)));
    }
    let h = f.h;
    let mut out = vec![None; f.nx * f.ny];
    for j in 0..f.ny {
        for i in 0..f.nx {
            let z = |d: isize| f.at_off(i, j, d, 0).map(|v| Complex64::new(v[0], v[1]));
            let (Some(m2), Some(m1), Some(c), Some(p1), Some(p2)) = (z(-2), z(-1), z(0), z(1), z(2)) else {
                continue;
            };
            let u1 = (p1 - m1) / (2.0 * h);
            let u2 = (p1 - 2.0 * c + m1) / (h * h);
            let u3 = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h);
            let scale = gap_tol * u1.norm().max(1.0);
            if u2.norm() <= scale {
                if u3.norm() <= scale / h {
                    out[j * f.nx + i] = Some(0.0);
                }
                continue;
            }
            let (x, y) = f.xy(i, j);
            out[j * f.nx + i] = conformal_criterion(&ConformalJet { z: Complex64::new(x, y), u1, u2, u3 }).ok();
        }
    }
    Ok(out)
}

/// (f(x), y) on the strip [x range of f] x [0, height], f given on a single row.
pub fn fan_build(f: &FieldSample, height: f64) -> Result<FieldSample> {
    if f.ny != 1 || f.m != 1 {
        return Err(Error::Invalid("fan profile must be a single row of scalars".into()));
    }
    let vals: Vec<Option<f64>> = (0..f.nx).map(|i| f.at(i, 0).map(|v| v[0])).collect();
    for i in 0..f.nx.saturating_sub(1) {
        if let (Some(a), Some(b)) = (vals[i], vals[i + 1]) {
            if ((b - a) / f.h).abs() <= 1.0 {
                let x = f.x0 + i as f64 * f.h;
                return Err(Error::Precondition(format!("|f'| <= 1 near x = {x}")));
            }
        }
    }
    let ny = (height / f.h).round() as usize + 1;
    let mut values = vec![0.0; f.nx * ny * 2];
    let mut mask = vec![false; f.nx * ny];
    for j in 0..ny {
        for i in 0..f.nx {
            let k = j * f.nx + i;
            match vals[i] {
                Some(v) => {
                    values[2 * k] = v;
                    values[2 * k + 1] = j as f64 * f.h;
                }
                None => mask[k] = true,
            }
        }
    }
    Ok(FieldSample { x0: f.x0, y0: 0.0, h: f.h, nx: f.nx, ny, m: 2, values, mask })
}

pub fn ut(t: f64, x: f64, y: f64) -> [f64; 2] {
    let r = x.hypot(y);
    let s = t + (1.0 - t) / r;
    [s * (x * x - y * y), s * 2.0 * x * y]
}

pub fn ut_lip(t: f64, r: f64) -> f64 {
    2.0 + 2.0 * t * (r - 1.0)
}

#[derive(Clone, Debug)]
pub struct UtExample {
    pub sample: FieldSample,
    pub lu_fd: Vec<Option<f64>>,
    pub lu_exact: Vec<Option<f64>>,
}

impl UtExample {
    /// Largest |Lu_fd - Lu_exact| over lattice points with lo <= |x| <= hi.
    pub fn max_error(&self, lo: f64, hi: f64) -> f64 {
        let f = &self.sample;
        let mut e: f64 = 0.0;
        for j in 0..f.ny {
            for i in 0..f.nx {
                let (x, y) = f.xy(i, j);
                let r = x.hypot(y);
                let k = j * f.nx + i;
                if r >= lo && r <= hi {
                    match (self.lu_fd[k], self.lu_exact[k]) {
                        (Some(a), Some(b)) => e = e.max((a - b).abs()),
                        _ => return f64::INFINITY,
                    }
                }
            }
        }
        e
    }
}

/// u_t sampled on the unit disk minus the disk of radius `hole`, with a margin of two
/// lattice steps outside so points up to |x| = 1 get full stencils.
pub fn ut_example(t: f64, h: f64, hole: f64) -> Result<UtExample> {
    if !(0.0..=1.0).contains(&t) || !(hole > 0.0) {
        return Err(Error::Precondition(format!("t = {t}, hole = {hole}")));
    }
    let half = 1.0 + 2.0 * h;
    let sample = FieldSample::square(half, h, 2, |x, y| {
        let r = x.hypot(y);
        (r >= hole && r <= 1.0 + 1.5 * h).then(|| ut(t, x, y).to_vec())
    })?;
    let lu_fd = lip_field_fd(&sample);
    let mut lu_exact = Vec::with_capacity(lu_fd.len());
    for j in 0..sample.ny {
        for i in 0..sample.nx {
            let (x, y) = sample.xy(i, j);
            let r = x.hypot(y);
            lu_exact.push((r >= hole && r <= 1.0).then(|| ut_lip(t, r)));
        }
    }
    Ok(UtExample { sample, lu_fd, lu_exact })
}

/// Polar grid on the unit disk with the center and the unit circle on the boundary
/// (data 0 and z^2), interior vertices carrying samples of u_t.
pub fn ut_disk_graph(t: f64, n_r: usize, n_theta: usize) -> Result<(Graph, Extension)> {
    if n_r < 2 || n_theta < 3 {
        return Err(Error::Invalid("disk grid needs n_r >= 2 and n_theta >= 3".into()));
    }
    let dt = 2.0 * PI / n_theta as f64;
    let name = |i: usize, j: usize| format!("r{i:03}t{j:03}");
    let mut vertices = vec!["o".to_string()];
    let mut edges = Vec::new();
    let mut boundary = std::collections::BTreeMap::new();
    boundary.insert("o".to_string(), vec![0.0, 0.0]);
    let mut values = std::collections::BTreeMap::new();
    values.insert("o".to_string(), vec![0.0, 0.0]);
    for i in 1..=n_r {
        let r = i as f64 / n_r as f64;
        for j in 0..n_theta {
            let (x, y) = (r * (dt * j as f64).cos(), r * (dt * j as f64).sin());
            vertices.push(name(i, j));
            edges.push((name(i, j), name(i, (j + 1) % n_theta), 2.0 * r * (dt / 2.0).sin()));
            let inner = if i == 1 { "o".to_string() } else { name(i - 1, j) };
            edges.push((inner, name(i, j), 1.0 / n_r as f64));
            let v = if i == n_r { vec![x * x - y * y, 2.0 * x * y] } else { ut(t, x, y).to_vec() };
            if i == n_r {
                boundary.insert(name(i, j), v.clone());
            }
            values.insert(name(i, j), v);
        }
    }
    let g = Graph::new(2, vertices, edges, boundary)?;
    let u = Extension::from_map(&g, &values)?;
    Ok((g, u))
}

/// (|A + sB|^2 - |A|^2 - 2 s (Aa)^t (Ba)) / s^2 for each s, where a is the principal
/// direction of A. None when A has no simple top singular value.
pub fn dnorm_remainders(a: &DMatrix<f64>, b: &DMatrix<f64>, s: &[f64]) -> Option<Vec<f64>> {
    let Principal::Direction(dir) = principal_direction(a, GAP_TOL) else { return None };
    let dir = nalgebra::DVector::from_vec(dir);
    let na = op_norm(a);
    let lin = 2.0 * (a * &dir).dot(&(b * &dir));
    Some(
        s.iter()
            .map(|&s| {
                let n = op_norm(&(a + b * s));
                (n * n - na * na - s * lin) / (s * s)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }

    #[test]
    fn principal_examples() {
        assert_eq!(principal_direction(&dm(2, 2, &[2.0, 0.0, 0.0, 1.0]), GAP_TOL), Principal::Direction(vec![1.0, 0.0]));
        // Du of z^2 at z = 0.3 + 0.4i is 2z as a rotation-dilation
        let (x, y) = (0.3, 0.4);
        let j = dm(2, 2, &[2.0 * x, -2.0 * y, 2.0 * y, 2.0 * x]);
        assert_eq!(principal_direction(&j, GAP_TOL), Principal::NotPrincipal);
        assert_eq!(principal_direction(&DMatrix::zeros(2, 2), GAP_TOL), Principal::NotPrincipal);
    }

    #[test]
    fn tangential_direction_of_u0() {
        let f = FieldSample::square(1.0, 1e-3, 2, |x, y| Some(ut(0.0, x, y).to_vec())).unwrap();
        let th: f64 = 0.7;
        let i = ((0.5 * th.cos() + 1.0) / 1e-3).round() as usize;
        let j = ((0.5 * th.sin() + 1.0) / 1e-3).round() as usize;
        let (x, y) = f.xy(i, j);
        let th = y.atan2(x);
        let Principal::Direction(a) = principal_direction(&f.jacobian(i, j, 1).unwrap(), GAP_TOL) else {
            panic!("not principal")
        };
        assert!((a[0] - th.sin()).abs() < 1e-6 && (a[1] + th.cos()).abs() < 1e-6, "{a:?}");
    }

    #[test]
    fn criterion_values() {
        let z = Complex64::new(0.8, -0.3);
        for (m, want) in [(2.0, 0.0), (0.5, 3.0), (-1.0, 1.5)] {
            let c = conformal_criterion(&ConformalJet::power(Complex64::new(m, 0.0), z)).unwrap();
            assert!((c - want).abs() < 1e-12, "{m} {c}");
        }
        let jet = ConformalJet { z, u1: 1.0.into(), u2: 0.0.into(), u3: 1.0.into() };
        assert!(matches!(conformal_criterion(&jet), Err(Error::Singular)));
    }

    #[test]
    fn stencil_jets() {
        let m = Complex64::new(4.0 / 3.0, 0.0);
        let z = Complex64::new(1.1, 0.5);
        let jet = ConformalJet::from_fn(|w| w.powc(m), z, 1e-2);
        let c = conformal_criterion(&jet).unwrap();
        assert!((c - (m.re - 2.0) / (m.re - 1.0)).abs() < 1e-6, "{c}");
    }

    #[test]
    fn disk_forms_agree() {
        for m in [Complex64::new(0.5, 0.0), Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.49)] {
            assert_eq!(conformal_criterion_complex_m(m), conformal_criterion_complex_m_direct(m));
        }
        assert!(!conformal_criterion_complex_m(Complex64::new(0.5, 0.0)));
        assert!(conformal_criterion_complex_m(Complex64::new(2.0, 0.0)));
        assert!(!conformal_criterion_complex_m(Complex64::new(0.5, 0.49)));
    }

    #[test]
    fn sampled_power_map() {
        let f = FieldSample::from_fn(0.5, 0.5, 1e-2, 51, 51, 2, |x, y| {
            let w = Complex64::new(x, y).powf(3.0);
            Some(vec![w.re, w.im])
        })
        .unwrap();
        let s = Stats::of(&conformal_field(&f, GAP_TOL).unwrap());
        assert!(s.evaluated > 2000);
        assert!((s.max - 0.5).abs() < 1e-3 && (s.p50 - 0.5).abs() < 1e-3, "{s:?}");
    }

    #[test]
    fn inverse_pairs() {
        assert!(inverse_criterion_crosscheck(2.0).unwrap());
        assert!(!inverse_criterion_crosscheck(0.5).unwrap());
        assert!(inverse_criterion_crosscheck(-1.0).unwrap());
    }

    fn row(f: impl Fn(f64) -> f64) -> FieldSample {
        FieldSample::from_fn(-0.5, 0.0, 0.01, 101, 1, 1, |x, _| Some(vec![f(x)])).unwrap()
    }

    #[test]
    fn fans() {
        for f in [|x: f64| 2.0 * x, |x: f64| -2.0 * x] {
            let u = fan_build(&row(f), 0.5).unwrap();
            let r = principal_pde_residual(&u, GAP_TOL);
            assert!(r.stats.max < 1e-9, "{:?}", r.stats);
        }
        let u = fan_build(&row(|x| if x < 0.0 { 2.0 * x } else { 3.0 * x }), 0.5).unwrap();
        let r = principal_pde_residual(&u, GAP_TOL);
        assert!(r.stats.max > 10.0, "{:?}", r.stats);
        assert!(fan_build(&row(|x| 0.5 * x), 0.5).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let f = FieldSample::from_fn(0.0, 1.0, 0.25, 4, 3, 2, |x, y| (x + y < 2.5).then(|| vec![x, x * y])).unwrap();
        let g = FieldSample::from_csv(&f.to_csv(), None).unwrap();
        assert_eq!((g.nx, g.ny, g.m, g.h), (4, 3, 2, 0.25));
        assert_eq!(g.mask, f.mask);
        for k in 0..f.mask.len() {
            if !f.mask[k] {
                assert_eq!(g.values[2 * k..2 * k + 2], f.values[2 * k..2 * k + 2]);
            }
        }
    }

    #[test]
    fn ut_formula_points() {
        assert_eq!(ut_lip(1.0, 1.0), 2.0);
        assert_eq!(ut_lip(0.0, 0.3), 2.0);
        assert_eq!(ut_lip(0.5, 0.5), 1.5);
    }
}
