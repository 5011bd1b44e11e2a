//! Small bundled instances and seeded random graph generators.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Extension, Graph};

fn s(x: &str) -> String {
    x.to_string()
}

/// Hub `x` joined to boundary vertices at (1,0), (-1,0) and `free`.
pub fn star(free: [f64; 2]) -> Graph {
    let mut b = BTreeMap::new();
    b.insert(s("a"), vec![1.0, 0.0]);
    b.insert(s("b"), vec![-1.0, 0.0]);
    b.insert(s("c"), free.to_vec());
    Graph::new(
        2,
        vec![s("a"), s("b"), s("c"), s("x")],
        vec![(s("a"), s("x"), 1.0), (s("b"), s("x"), 1.0), (s("c"), s("x"), 1.0)],
        b,
    )
    .expect("star")
}

/// Path v0 - v1 - ... - v{n-1} with scalar ends.
pub fn path(n: usize, ends: (f64, f64)) -> Graph {
    let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let edges = (0..n - 1).map(|i| (ids[i].clone(), ids[i + 1].clone(), 1.0)).collect();
    let mut b = BTreeMap::new();
    b.insert(ids[0].clone(), vec![ends.0]);
    b.insert(ids[n - 1].clone(), vec![ends.1]);
    Graph::new(1, ids, edges, b).expect("path")
}

/// Outer triangle A, B, C on the unit circle; inner hexagon P X Q Y R Z with
/// spokes A-P, B-Q, C-R. Its discrete infinity harmonic maps form a continuum.
pub fn triangle_in_triangle() -> Graph {
    let ang = [90f64, 210.0, 330.0].map(f64::to_radians);
    let mut b = BTreeMap::new();
    for (name, a) in ["A", "B", "C"].iter().zip(ang) {
        b.insert(s(name), vec![a.cos(), a.sin()]);
    }
    let pairs = [
        ("A", "P"),
        ("B", "Q"),
        ("C", "R"),
        ("P", "X"),
        ("X", "Q"),
        ("Q", "Y"),
        ("Y", "R"),
        ("R", "Z"),
        ("Z", "P"),
    ];
    let ids = ["A", "B", "C", "P", "Q", "R", "X", "Y", "Z"].map(s).to_vec();
    Graph::new(2, ids, pairs.iter().map(|(x, y)| (s(x), s(y), 1.0)).collect(), b).expect("triangle")
}

/// Two starting maps for `triangle_in_triangle` that settle on different fixed points.
pub fn triangle_inits(g: &Graph) -> (Extension, Extension) {
    let mk = |vals: &[(&str, [f64; 2])]| {
        let mut map = g.boundary_map();
        for (k, v) in vals {
            map.insert(s(k), v.to_vec());
        }
        Extension::from_map(g, &map).expect("init")
    };
    let sym = |t: f64, twist: f64| {
        let rot = |a: f64, r: f64| [r * (a + twist).cos(), r * (a + twist).sin()];
        let d = f64::to_radians;
        [
            ("P", rot(d(90.0), t)),
            ("Q", rot(d(210.0), t)),
            ("R", rot(d(330.0), t)),
            ("X", rot(d(150.0), t / 2.0)),
            ("Y", rot(d(270.0), t / 2.0)),
            ("Z", rot(d(30.0), t / 2.0)),
        ]
    };
    (mk(&sym(0.5, 0.0)), mk(&sym(0.5, 0.6)))
}

/// Connected random graph with `n` vertices, `nb` of them boundary, data uniform in
/// [-1, 1]^m. Edge lengths are 1 unless `weighted`, then uniform in [0.5, 2].
pub fn random_graph(seed: u64, n: usize, nb: usize, m: usize, extra: usize, weighted: bool) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
    let mut set = BTreeSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        set.insert((j, i));
    }
    let mut tries = 0;
    while set.len() < n - 1 + extra && tries < 1000 {
        tries += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            set.insert((a.min(b), a.max(b)));
        }
    }
    let edges = set
        .into_iter()
        .map(|(a, b)| {
            let len = if weighted { rng.gen_range(0.5..2.0) } else { 1.0 };
            (ids[a].clone(), ids[b].clone(), len)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut b = BTreeMap::new();
    for &i in order.iter().take(nb) {
        b.insert(ids[i].clone(), (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    Graph::new(m, ids, edges, b).expect("random graph")
}

/// Planar instance with `hubs` interior vertices, each joined to the corners of its
/// own acute triangle by spokes of a common length, consecutive hubs linked by edges
/// of length 4. Every hub's optimal placement is a circumcenter, a sharp minimum.
pub fn acute_stars(seed: u64, hubs: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = Vec::new();
    let mut edges = Vec::new();
    let mut b = BTreeMap::new();
    for h in 0..hubs {
        let hub = format!("x{h}");
        let c = [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)];
        let rho = rng.gen_range(0.3..0.6);
        let spoke = rng.gen_range(0.5..2.0);
        let t0 = rng.gen_range(0.0..std::f64::consts::TAU);
        for j in 0..3 {
            let t = t0 + std::f64::consts::TAU * j as f64 / 3.0 + rng.gen_range(-0.4..0.4);
            let name = format!("b{h}{j}");
            b.insert(name.clone(), vec![c[0] + rho * t.cos(), c[1] + rho * t.sin()]);
            edges.push((hub.clone(), name.clone(), spoke));
            ids.push(name);
        }
        if h > 0 {
            edges.push((format!("x{}", h - 1), hub.clone(), 4.0));
        }
        ids.push(hub);
    }
    Graph::new(2, ids, edges, b).expect("acute stars")
}
