//! Exhaustive grid search for the lexicographically minimal profile.

use crate::error::{Error, Result};
use crate::graph::{dist, Extension, Graph};

pub const DEFAULT_BUDGET: f64 = 2e8;

/// Grid placements of every interior vertex in `bounds` (one interval per coordinate),
/// spacing `h`. Returns the placement with the smallest vertex profile; ties keep the
/// first placement in coordinate order.
pub fn brute_force_tight(g: &Graph, bounds: &[(f64, f64)], h: f64, budget: f64) -> Result<Extension> {
    let m = g.m();
    if bounds.len() != m {
        return Err(Error::Invalid(format!("box has {} intervals, need {m}", bounds.len())));
    }
    if !(h > 0.0) || bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
        return Err(Error::Invalid("bad box or step".into()));
    }
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| {
            let k = ((hi - lo) / h + 1e-9).floor() as usize;
            (0..=k).map(|i| lo + i as f64 * h).collect()
        })
        .collect();
    // all points of the m-dimensional grid, first coordinate slowest
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for ax in &axes {
        grid = grid.iter().flat_map(|p| ax.iter().map(move |&c| [p.clone(), vec![c]].concat())).collect();
    }
    let free = g.interior();
    let k = free.len();
    let needed = (grid.len() as f64).powi(k as i32);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    let mut u = Extension::filled(g, &vec![0.0; m]);
    if k == 0 {
        return Ok(u);
    }
    let mut slot = vec![usize::MAX; g.n()];
    for (i, &x) in free.iter().enumerate() {
        slot[x] = i;
    }
    // boundary part of Su for each vertex at each grid point
    let bpart: Vec<Vec<f64>> = free
        .iter()
        .map(|&x| {
            grid.iter()
                .map(|p| {
                    g.neighbors(x)
                        .iter()
                        .filter(|(y, _)| g.is_boundary(*y))
                        .map(|&(y, e)| dist(p, g.boundary_value(y).unwrap()) / g.edges()[e].len)
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    let inner: Vec<Vec<(usize, f64)>> = free
        .iter()
        .map(|&x| {
            g.neighbors(x)
                .iter()
                .filter(|(y, _)| !g.is_boundary(*y))
                .map(|&(y, e)| (slot[y], g.edges()[e].len))
                .collect()
        })
        .collect();

    let mut idx = vec![0usize; k];
    let mut best: Option<(Vec<f64>, Vec<usize>)> = None;
    let mut prof = vec![0.0; k];
    loop {
        for i in 0..k {
            let mut s = bpart[i][idx[i]];
            for &(j, len) in &inner[i] {
                s = s.max(dist(&grid[idx[i]], &grid[idx[j]]) / len);
            }
            prof[i] = s;
        }
        prof.sort_by(|a, b| b.total_cmp(a));
        let better = match &best {
            None => true,
            Some((bp, _)) => {
                let mut r = false;
                for (a, b) in prof.iter().zip(bp) {
                    if a < b {
                        r = true;
                        break;
                    }
                    if a > b {
                        break;
                    }
                }
                r
            }
        };
        if better {
            best = Some((prof.clone(), idx.clone()));
        }
        let mut c = k;
        loop {
            if c == 0 {
                let (_, bi) = best.unwrap();
                for (i, &x) in free.iter().enumerate() {
                    u.set(x, &grid[bi[i]]);
                }
                return Ok(u);
            }
            c -= 1;
            idx[c] += 1;
            if idx[c] < grid.len() {
                break;
            }
            idx[c] = 0;
        }
    }
}

/// Bounding box of the boundary data, which contains the tight extension.
pub fn data_box(g: &Graph) -> Vec<(f64, f64)> {
    let m = g.m();
    let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); m];
    for i in 0..g.n() {
        if let Some(v) = g.boundary_value(i) {
            for t in 0..m {
                b[t].0 = b[t].0.min(v[t]);
                b[t].1 = b[t].1.max(v[t]);
            }
        }
    }
    b
}
