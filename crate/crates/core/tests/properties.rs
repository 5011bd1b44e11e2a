use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tight::gadgets::GadgetChain;
use tight::instances::random_graph;
use tight::io::{extension_from_json, extension_to_json, graph_from_json, graph_to_json};
use tight::radial::{check_solution, radial_local_lip, solve_radial, RadialSpec};
use tight::smooth::{conformal_criterion_complex_m, conformal_criterion_complex_m_direct, ut_disk_graph};
use tight::solver::log_edge_energy;
use tight::*;

fn random_extension(g: &Graph, rng: &mut ChaCha8Rng, spread: f64) -> Extension {
    let mut map = g.boundary_map();
    for i in g.interior() {
        map.insert(g.id(i).to_string(), (0..g.m()).map(|_| rng.gen_range(-spread..spread)).collect());
    }
    Extension::from_map(g, &map).unwrap()
}

fn cheap() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn comparison_is_antisymmetric(seed in 0u64..10_000, m in 1usize..3) {
        let g = random_graph(seed, 8, 3, m, 3, seed % 2 == 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_extension(&g, &mut rng, 1.0);
        let v = random_extension(&g, &mut rng, 1.0);
        for mode in [ProfileMode::Vertex, ProfileMode::Edge] {
            let a = compare_tighter(&g, &u, &v, mode, 1e-9).unwrap();
            let b = compare_tighter(&g, &v, &u, mode, 1e-9).unwrap();
            let flipped = match a.relation {
                Relation::FirstTighter => Relation::SecondTighter,
                Relation::SecondTighter => Relation::FirstTighter,
                r => r,
            };
            prop_assert_eq!(b.relation, flipped);
            prop_assert_eq!(compare_tighter(&g, &u, &u, mode, 1e-9).unwrap().relation, Relation::Equivalent);
        }
    }

    #[test]
    fn tighter_means_lexicographically_smaller(seed in 0u64..10_000) {
        let g = random_graph(seed, 7, 3, 2, 2, false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let u = random_extension(&g, &mut rng, 1.0);
        let v = random_extension(&g, &mut rng, 1.0);
        let c = compare_tighter(&g, &u, &v, ProfileMode::Vertex, 1e-9).unwrap();
        let lex = profile(&g, &u, ProfileMode::Vertex).lex_cmp(&profile(&g, &v, ProfileMode::Vertex), 1e-9);
        match c.relation {
            Relation::FirstTighter => prop_assert!(lex.is_lt()),
            Relation::SecondTighter => prop_assert!(lex.is_gt()),
            _ => {}
        }
    }

    #[test]
    fn vertex_constant_is_largest_edge_slope(seed in 0u64..10_000, m in 1usize..4) {
        let g = random_graph(seed, 9, 3, m, 4, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_extension(&g, &mut rng, 2.0);
        for i in g.interior() {
            let x = g.id(i);
            let best = g
                .neighbors(i)
                .iter()
                .map(|&(y, _)| edge_lip(&g, &u, x, g.id(y)).unwrap())
                .fold(0.0, f64::max);
            prop_assert_eq!(local_lip(&g, &u, x).unwrap(), best);
        }
    }

    #[test]
    fn json_round_trip(seed in 0u64..10_000, m in 1usize..4) {
        let g = random_graph(seed, 10, 4, m, 3, true);
        let h = graph_from_json(&graph_to_json(&g)).unwrap();
        prop_assert_eq!(graph_to_json(&h), graph_to_json(&g));
        prop_assert_eq!(h.boundary_map(), g.boundary_map());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_extension(&g, &mut rng, 3.0);
        let w = extension_from_json(&h, &extension_to_json(&g, &u)).unwrap();
        prop_assert_eq!(w.flat(), u.flat());
    }

    #[test]
    fn relabeling_does_not_change_the_solution(seed in 0u64..10_000) {
        let g = random_graph(seed, 8, 3, 2, 3, true);
        let rename = |s: &str| format!("z{}", 99 - s[1..].parse::<usize>().unwrap());
        let vertices = g.ids().iter().map(|s| rename(s)).collect();
        let edges = g.edges().iter().map(|e| (rename(g.id(e.a)), rename(g.id(e.b)), e.len)).collect();
        let boundary: BTreeMap<String, Vec<f64>> = g.boundary_map().into_iter().map(|(k, v)| (rename(&k), v)).collect();
        let h = Graph::new(2, vertices, edges, boundary).unwrap();
        let cfg = SolveConfig::default();
        let a = solve_tight(&g, &cfg).unwrap();
        let b = solve_tight(&h, &cfg).unwrap();
        for id in g.ids() {
            let x = a.extension().value(&g, id).unwrap();
            let y = b.extension().value(&h, &rename(id)).unwrap();
            prop_assert!(x.iter().zip(y).all(|(p, q)| (p - q).abs() < 1e-7), "{id}: {x:?} vs {y:?}");
        }
    }

    #[test]
    fn p_harmonic_minimizes_the_energy(seed in 0u64..10_000, k in 1i32..7) {
        let g = random_graph(seed, 7, 3, 2, 2, seed % 2 == 1);
        let p = 2f64.powi(k);
        let cfg = SolveConfig::default();
        let (u, res) = solve_p_harmonic(&g, p, None, &cfg).unwrap();
        prop_assume!(res.converged);
        let e0 = log_edge_energy(&g, &u, p, ProfileMode::Vertex);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..64 {
            let mut w = u.clone();
            for i in g.interior() {
                let v: Vec<f64> = u.get(i).iter().map(|x| x + rng.gen_range(-1e-2..1e-2)).collect();
                w.set(i, &v);
            }
            let e = log_edge_energy(&g, &w, p, ProfileMode::Vertex);
            prop_assert!(e >= e0 - 1e-9, "p = {p}: {e} < {e0}");
        }
    }

    #[test]
    fn tight_beats_random_competitors(seed in 0u64..10_000) {
        let g = random_graph(seed, 8, 3, 2, 3, seed % 2 == 0);
        let cfg = SolveConfig::default();
        let t = solve_tight(&g, &cfg).unwrap();
        let pt = profile(&g, t.extension(), ProfileMode::Vertex);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let v = random_extension(&g, &mut rng, 1.0);
            let pv = profile(&g, &v, ProfileMode::Vertex);
            if pt.lex_cmp(&pv, cfg.outer_tol).is_ne() {
                let c = compare_tighter(&g, t.extension(), &v, ProfileMode::Vertex, 1e-9).unwrap();
                prop_assert_eq!(c.relation, Relation::FirstTighter);
            }
        }
    }

    #[test]
    fn scalar_data_gives_the_aml_extension(seed in 0u64..10_000, n in 4usize..13) {
        let g = random_graph(seed, n, 2 + (seed % 3) as usize, 1, (seed % 4) as usize, seed % 2 == 0);
        let a = solve_tight(&g, &SolveConfig::default()).unwrap();
        let b = solve_aml_scalar(&g).unwrap();
        prop_assert!(a.extension().dist_inf(&b) < 1e-4);
    }

    #[test]
    fn radial_solutions_are_consistent(
        alpha in 0.3f64..3.0,
        r1 in 0.5f64..2.0,
        ratio in 1.1f64..4.0,
        m1 in 0.2f64..3.0,
        m2 in 0.2f64..3.0,
    ) {
        let s = RadialSpec::new(alpha, r1, m1, r1 * ratio, m2).unwrap();
        let sol = solve_radial(&s).unwrap();
        let c = check_solution(&sol);
        let scale = 1.0 + m1.max(m2);
        prop_assert!(c.endpoint_error < 1e-9 * scale, "{:?} {:?}", sol.case, c);
        prop_assert!(c.continuity_error < 1e-9 * scale, "{:?} {:?}", sol.case, c);
        prop_assert!(c.slope_error < 1e-7 * scale, "{:?} {:?}", sol.case, c);
        if let Some(margin) = c.affine_margin {
            prop_assert!(margin > 0.0);
        }
        for k in 0..=10 {
            let r = (s.r1 + (s.r2 - s.r1) * k as f64 / 10.0).min(s.r2);
            prop_assert!(radial_local_lip(&sol, r).unwrap() > 0.0);
        }
    }
}

proptest! {
    #[test]
    fn disk_forms_agree(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let m = Complex64::new(re, im);
        prop_assume!((m - 1.0).norm() > 1e-9);
        prop_assert_eq!(conformal_criterion_complex_m(m), conformal_criterion_complex_m_direct(m));
    }

    #[test]
    fn gadget_recursion_holds(n in 1usize..20, weighted in any::<bool>()) {
        prop_assert!(GadgetChain::new(n, weighted).recursion_residual() < 1e-12);
    }
}

#[test]
fn larger_t_is_tighter_on_the_disk() {
    for (t1, t2) in [(1.0, 0.0), (0.75, 0.25), (0.5, 0.0), (1.0, 0.4), (0.3, 0.1)] {
        let (g, u1) = ut_disk_graph(t1, 16, 32).unwrap();
        let (_, u2) = ut_disk_graph(t2, 16, 32).unwrap();
        let c = compare_tighter(&g, &u1, &u2, ProfileMode::Vertex, 1e-12).unwrap();
        assert_eq!(c.relation, Relation::FirstTighter, "t = {t1} against {t2}");
    }
}

#[test]
fn oracle_matches_on_bundled_small_instances() {
    let cfg = SolveConfig::default();
    let g = tight::instances::star([-1.0, 0.2]);
    let u = brute_force_tight(&g, &[(-1.5, 1.5), (-1.5, 1.5)], 0.05, 2e8).unwrap();
    let t = solve_tight(&g, &cfg).unwrap();
    assert!(u.dist_inf(t.extension()) <= 0.05);
    let p = tight::instances::path(3, (0.0, 1.0));
    let u = brute_force_tight(&p, &[(0.0, 1.0)], 0.01, 2e8).unwrap();
    assert!((u.value(&p, "v1").unwrap()[0] - 0.5).abs() < 1e-12);
}
