//! Weighted Chebyshev centers: argmin_z max_i |z - c_i| / d_i.

use nalgebra::{DMatrix, DVector};

const FEAS: f64 = 1e-12;
const ENUM_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    /// Minimal value of max_i |center - c_i| / d_i.
    pub radius: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Balls with every point of `s` exactly at weighted distance t, center in the affine hull.
fn balls_through(pts: &[&[f64]], w: &[f64], s: &[usize]) -> Vec<(Vec<f64>, f64)> {
    let c0 = pts[s[0]];
    let d0 = w[s[0]];
    if s.len() == 1 {
        return vec![(c0.to_vec(), 0.0)];
    }
    let k = s.len() - 1;
    let m = c0.len();
    let vs: Vec<Vec<f64>> = s[1..].iter().map(|&i| sub(pts[i], c0)).collect();
    let mut gram = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = vs[i].iter().zip(&vs[j]).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    let scale = (0..k).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    if scale == 0.0 {
        return vec![];
    }
    let lu = gram.clone().lu();
    let det = lu.determinant();
    if det.abs() <= 1e-13 * scale.powi(k as i32) {
        return vec![];
    }
    let b = DVector::from_iterator(k, vs.iter().map(|v| norm2(v)));
    let e = DVector::from_iterator(k, s[1..].iter().map(|&i| w[i] * w[i] - d0 * d0));
    let a0 = match lu.solve(&b) {
        Some(x) => x * 0.5,
        None => return vec![],
    };
    let a1 = match lu.solve(&e) {
        Some(x) => x * 0.5,
        None => return vec![],
    };
    let comb = |a: &DVector<f64>| -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (j, v) in vs.iter().enumerate() {
            for t in 0..m {
                out[t] += a[j] * v[t];
            }
        }
        out
    };
    // w(tau) = p - tau q, with |w|^2 = tau d0^2
    let p = comb(&a0);
    let q = comb(&a1);
    let qq = norm2(&q);
    let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
    let pp = norm2(&p);
    let mut taus = Vec::new();
    let lin = 2.0 * pq + d0 * d0;
    if qq <= 1e-300 || qq * pp <= 1e-24 * lin * lin {
        if lin > 0.0 {
            taus.push(pp / lin);
        }
    } else {
        let disc = lin * lin - 4.0 * qq * pp;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // stable roots of qq tau^2 - lin tau + pp = 0
            let big = 0.5 * (lin + lin.signum() * sq);
            if big != 0.0 {
                taus.push(big / qq);
                taus.push(pp / big);
            }
        }
    }
    taus.into_iter()
        .filter(|t| t.is_finite() && *t >= 0.0)
        .map(|tau| {
            let z: Vec<f64> = (0..m).map(|t| c0[t] + p[t] - tau * q[t]).collect();
            (z, tau.sqrt())
        })
        .collect()
}

fn radius_at(pts: &[&[f64]], w: &[f64], z: &[f64]) -> f64 {
    pts.iter().zip(w).map(|(c, d)| norm2(&sub(z, c)).sqrt() / d).fold(0.0, f64::max)
}

fn feasible(pts: &[&[f64]], w: &[f64], z: &[f64], t: f64, tol: f64) -> bool {
    pts.iter()
        .zip(w)
        .all(|(c, d)| c.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= t * d + tol)
}

fn spread(pts: &[&[f64]]) -> f64 {
    1.0 + pts.iter().map(|c| norm2(c).sqrt()).fold(0.0, f64::max)
}

fn binom_sum(k: usize, upto: usize) -> usize {
    let mut total = 0usize;
    let mut c = 1usize;
    for j in 1..=upto.min(k) {
        c = c.saturating_mul(k + 1 - j) / j;
        total = total.saturating_add(c);
    }
    total
}

/// Exact solution by enumerating affinely independent supports of size at most m + 1.
fn enumerate(pts: &[&[f64]], w: &[f64]) -> Option<Ball> {
    let k = pts.len();
    let m = pts[0].len();
    let tol = FEAS * spread(pts);
    let mut best: Option<Ball> = None;
    let mut idx: Vec<usize> = Vec::with_capacity(m + 1);
    fn rec(
        start: usize,
        max: usize,
        idx: &mut Vec<usize>,
        pts: &[&[f64]],
        w: &[f64],
        tol: f64,
        best: &mut Option<Ball>,
    ) {
        if !idx.is_empty() {
            for (z, t) in balls_through(pts, w, idx) {
                if best.as_ref().is_some_and(|b| t >= b.radius) {
                    continue;
                }
                if feasible(pts, w, &z, t, tol) {
                    *best = Some(Ball { center: z, radius: t });
                }
            }
        }
        if idx.len() == max {
            return;
        }
        for i in start..pts.len() {
            idx.push(i);
            rec(i + 1, max, idx, pts, w, tol, best);
            idx.pop();
        }
    }
    rec(0, (m + 1).min(k), &mut idx, pts, w, tol, &mut best);
    best.map(|b| {
        let r = radius_at(pts, w, &b.center);
        Ball { radius: r, ..b }
    })
}

/// Move-to-front Welzl recursion for unit weights.
fn welzl(pts: &[&[f64]]) -> Option<Ball> {
    let m = pts[0].len();
    let w = vec![1.0; pts.len()];
    let tol = FEAS * spread(pts);
    let mut order: Vec<usize> = (0..pts.len()).collect();

    fn ball_of(r: &[usize], pts: &[&[f64]], w: &[f64]) -> Option<Option<Ball>> {
        if r.is_empty() {
            return Some(None);
        }
        let c = balls_through(pts, w, r);
        c.into_iter().next().map(|(z, t)| Some(Ball { center: z, radius: t }))
    }

    fn mtf(
        n: usize,
        order: &mut Vec<usize>,
        r: &mut Vec<usize>,
        pts: &[&[f64]],
        w: &[f64],
        m: usize,
        tol: f64,
    ) -> Option<Option<Ball>> {
        let mut ball = ball_of(r, pts, w)?;
        if r.len() == m + 1 {
            return Some(ball);
        }
        let mut i = 0;
        while i < n {
            let p = order[i];
            let inside = ball
                .as_ref()
                .is_some_and(|b| norm2(&sub(pts[p], &b.center)).sqrt() <= b.radius + tol);
            if !inside {
                r.push(p);
                ball = mtf(i, order, r, pts, w, m, tol)?;
                r.pop();
                let q = order.remove(i);
                order.insert(0, q);
            }
            i += 1;
        }
        Some(ball)
    }

    let mut r = Vec::new();
    let b = mtf(pts.len(), &mut order, &mut r, pts, &w, m, tol)??;
    if !feasible(pts, &w, &b.center, b.radius, 10.0 * tol) {
        return None;
    }
    let radius = radius_at(pts, &w, &b.center);
    Some(Ball { center: b.center, radius })
}

/// Subgradient-free fallback: weighted Badoiu-Clarkson iteration.
fn iterate(pts: &[&[f64]], w: &[f64]) -> Ball {
    let m = pts[0].len();
    let mut z: Vec<f64> = vec![0.0; m];
    let wsum: f64 = w.iter().map(|d| 1.0 / d).sum();
    for (c, d) in pts.iter().zip(w) {
        for t in 0..m {
            z[t] += c[t] / d / wsum;
        }
    }
    let mut best = z.clone();
    let mut best_r = radius_at(pts, w, &z);
    for it in 1..200_000 {
        let (far, _) = pts
            .iter()
            .zip(w)
            .enumerate()
            .map(|(i, (c, d))| (i, norm2(&sub(&z, c)).sqrt() / d))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let step = 1.0 / (it as f64 + 1.0);
        for t in 0..m {
            z[t] += step * (pts[far][t] - z[t]);
        }
        let r = radius_at(pts, w, &z);
        if r < best_r {
            best_r = r;
            best.clone_from(&z);
        }
    }
    Ball { center: best, radius: best_r }
}

const SMALL_LIMIT: usize = 16;

/// Candidate enumeration without allocation for m <= 2: supports of one, two or three
/// points, keeping the feasible candidate with the smallest radius.
fn small(pts: &[&[f64]], w: &[f64]) -> Option<Ball> {
    let m = pts[0].len();
    let n = pts.len();
    let tol = FEAS * spread(pts);
    let mut best: Option<([f64; 2], f64)> = None;
    let offer = |z: [f64; 2], t: f64, best: &mut Option<([f64; 2], f64)>| {
        if t.is_finite() && best.map_or(true, |(_, bt)| t < bt) && feasible(pts, w, &z[..m], t, tol) {
            *best = Some((z, t));
        }
    };
    let at = |i: usize| -> [f64; 2] { if m == 1 { [pts[i][0], 0.0] } else { [pts[i][0], pts[i][1]] } };
    for i in 0..n {
        offer(at(i), 0.0, &mut best);
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (at(i), at(j));
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            let s = w[i] / (w[i] + w[j]);
            let z = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            offer(z, len / (w[i] + w[j]), &mut best);
        }
    }
    if m == 2 {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (at(i), at(j), at(k));
                    // 2 (x - a) . z = |x|^2 - |a|^2 - tau (d_x^2 - d_a^2) for x = b, c
                    let (m11, m12) = (2.0 * (b[0] - a[0]), 2.0 * (b[1] - a[1]));
                    let (m21, m22) = (2.0 * (c[0] - a[0]), 2.0 * (c[1] - a[1]));
                    let det = m11 * m22 - m12 * m21;
                    let sc = (m11.abs() + m12.abs()).max(m21.abs() + m22.abs());
                    if det.abs() <= 1e-13 * sc * sc {
                        continue;
                    }
                    let n2 = |x: [f64; 2]| x[0] * x[0] + x[1] * x[1];
                    let (r1, r2) = (n2(b) - n2(a), n2(c) - n2(a));
                    let (e1, e2) = (w[j] * w[j] - w[i] * w[i], w[k] * w[k] - w[i] * w[i]);
                    let p = [(r1 * m22 - m12 * r2) / det - a[0], (m11 * r2 - r1 * m21) / det - a[1]];
                    let q = [(e1 * m22 - m12 * e2) / det, (m11 * e2 - e1 * m21) / det];
                    // |p - tau q|^2 = tau d_a^2
                    let qq = n2(q);
                    let pq = p[0] * q[0] + p[1] * q[1];
                    let pp = n2(p);
                    let lin = 2.0 * pq + w[i] * w[i];
                    let mut taus = [f64::NAN; 2];
                    if qq <= 1e-300 || qq * pp <= 1e-24 * lin * lin {
                        if lin > 0.0 {
                            taus[0] = pp / lin;
                        }
                    } else {
                        let disc = lin * lin - 4.0 * qq * pp;
                        if disc >= 0.0 {
                            let sq = disc.sqrt();
                            // stable pair of roots
                            let big = (lin + lin.signum() * sq) / (2.0 * qq);
                            taus = [big, if big != 0.0 { pp / (qq * big) } else { f64::NAN }];
                        }
                    }
                    for tau in taus {
                        if tau >= 0.0 {
                            let z = [a[0] + p[0] - tau * q[0], a[1] + p[1] - tau * q[1]];
                            offer(z, tau.sqrt(), &mut best);
                        }
                    }
                }
            }
        }
    }
    best.map(|(z, t)| Ball { center: z[..m].to_vec(), radius: t })
}

/// Minimizer of max_i |z - pts_i| / w_i.
pub fn chebyshev_center(pts: &[&[f64]], w: &[f64]) -> Ball {
    assert!(!pts.is_empty() && pts.len() == w.len());
    let m = pts[0].len();
    if m <= 2 && pts.len() <= SMALL_LIMIT {
        if let Some(b) = small(pts, w) {
            return b;
        }
    }
    let unit = w.iter().all(|&d| d == w[0]);
    if unit {
        let scaled: Option<Ball> = welzl(pts).map(|b| Ball { radius: b.radius / w[0], ..b });
        if let Some(b) = scaled {
            return b;
        }
    }
    if binom_sum(pts.len(), m + 1) <= ENUM_LIMIT {
        if let Some(b) = enumerate(pts, w) {
            return b;
        }
    }
    iterate(pts, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(pts: &[[f64; 2]], w: &[f64]) -> Ball {
        let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
        chebyshev_center(&refs, w)
    }

    #[test]
    fn single_and_pair() {
        let b = run(&[[0.0, 0.0]], &[1.0]);
        assert_eq!(b.center, vec![0.0, 0.0]);
        let b = run(&[[0.0, 0.0], [2.0, 0.0]], &[1.0, 1.0]);
        assert!((b.center[0] - 1.0).abs() < 1e-15 && b.center[1].abs() < 1e-15);
    }

    #[test]
    fn star_hub() {
        let b = run(&[[1.0, 0.0], [-1.0, 0.0], [-1.0, 0.2]], &[1.0; 3]);
        assert!(b.center[0].abs() < 1e-14);
        assert!((b.center[1] - 0.1).abs() < 1e-14);
        assert!((b.radius - 1.01f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn weighted_pair() {
        // |z| / 1 = |z - 3| / 2 on the line: z = 1
        let refs: Vec<&[f64]> = vec![&[0.0], &[3.0]];
        let b = chebyshev_center(&refs, &[1.0, 2.0]);
        assert!((b.center[0] - 1.0).abs() < 1e-14);
        assert!((b.radius - 1.0).abs() < 1e-14);
    }

    #[test]
    fn enumeration_matches_welzl() {
        let pts = [[0.3, 1.0], [-0.7, 0.2], [0.9, -0.4], [0.1, 0.1], [-0.2, -0.8]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
        let w = [1.0; 5];
        let a = welzl(&refs).unwrap();
        let b = enumerate(&refs, &w).unwrap();
        assert!((a.radius - b.radius).abs() < 1e-12);
        assert!(super::super::graph::dist(&a.center, &b.center) < 1e-10);
    }
}
