//! Banded LU without pivoting, plus reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

pub struct Banded {
    n: usize,
    bw: usize,
    a: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, bw: usize) -> Banded {
        let bw = bw.min(n.saturating_sub(1));
        Banded { n, bw, a: vec![0.0; n * (2 * bw + 1)] }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i.abs_diff(j) <= self.bw);
        let k = self.at(i, j);
        self.a[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bw {
            0.0
        } else {
            self.a[self.at(i, j)]
        }
    }

    /// Solves in place; returns None on a vanishing pivot.
    pub fn solve(mut self, rhs: &[f64]) -> Option<Vec<f64>> {
        let (n, bw) = (self.n, self.bw);
        let w = 2 * bw + 1;
        for k in 0..n {
            let piv = self.a[k * w + bw];
            if !(piv.is_finite() && piv.abs() > 1e-300) {
                return None;
            }
            let end = (k + bw + 1).min(n);
            for i in k + 1..end {
                let ik = i * w + (k + bw - i);
                let l = self.a[ik] / piv;
                if l == 0.0 {
                    continue;
                }
                self.a[ik] = l;
                for j in k + 1..end {
                    let kj = k * w + (j + bw - k);
                    let ij = i * w + (j + bw - i);
                    self.a[ij] -= l * self.a[kj];
                }
            }
        }
        let mut x = rhs.to_vec();
        for i in 0..n {
            let start = i.saturating_sub(bw);
            let mut s = x[i];
            for j in start..i {
                s -= self.a[i * w + (j + bw - i)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let end = (i + bw + 1).min(n);
            let mut s = x[i];
            for j in i + 1..end {
                s -= self.a[i * w + (j + bw - i)] * x[j];
            }
            x[i] = s / self.a[i * w + bw];
        }
        if x.iter().all(|v| v.is_finite()) {
            Some(x)
        } else {
            None
        }
    }
}

/// Reverse Cuthill-McKee order of an adjacency list. Returns `order[k] = node`.
pub fn rcm(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let deg = |v: usize| adj[v].len();
    while order.len() < n {
        let start = (0..n).filter(|&v| !seen[v]).min_by_key(|&v| (deg(v), v)).unwrap();
        // move to a pseudo-peripheral node of this component
        let mut root = start;
        for _ in 0..4 {
            let (far, _) = bfs_far(adj, root, &seen);
            if far == root {
                break;
            }
            root = far;
        }
        let mut q = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            nb.sort_by_key(|&w| (deg(w), w));
            for w in nb {
                seen[w] = true;
                q.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_far(adj: &[Vec<usize>], root: usize, blocked: &[bool]) -> (usize, usize) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[root] = 0;
    let mut q = VecDeque::from([root]);
    let mut best = (root, 0);
    while let Some(v) = q.pop_front() {
        if dist[v] > best.1 || (dist[v] == best.1 && adj[v].len() < adj[best.0].len()) {
            best = (v, dist[v]);
        }
        for &w in &adj[v] {
            if !blocked[w] && dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                q.push_back(w);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal() {
        let n = 6;
        let mut a = Banded::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
                a.add(i + 1, i, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 * 0.5 - 1.0).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                b[i] += a.get(i, j) * x_true[j];
            }
        }
        let x = a.solve(&b).unwrap();
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rcm_is_permutation() {
        let adj = vec![vec![3], vec![2, 4], vec![1], vec![0, 4], vec![1, 3]];
        let mut o = rcm(&adj);
        o.sort();
        assert_eq!(o, vec![0, 1, 2, 3, 4]);
    }
}
