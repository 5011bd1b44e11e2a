//! The bundled acceptance suite. Each criterion returns pass/fail with a detail line.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::gadgets::{gadget_sequence, verify_chain, GadgetChain};
use crate::graph::{compare_tighter, profile, Extension, Graph, ProfileMode, Relation};
use crate::instances::{acute_stars, random_graph, star, triangle_in_triangle, triangle_inits};
use crate::oracle::{brute_force_tight, data_box, DEFAULT_BUDGET};
use crate::radial::{annulus_crosscheck, check_solution, solve_radial, RadialCase, RadialSpec};
use crate::scalar::solve_aml_scalar;
use crate::smooth::{
    conformal_criterion, conformal_criterion_complex_m, conformal_criterion_complex_m_direct, dnorm_remainders,
    inverse_criterion_crosscheck, principal_pde_residual, ut, ut_example, ConformalJet, FieldSample, Principal,
    GAP_TOL,
};
use crate::solver::{solve_p_harmonic, solve_tight, SolveConfig};

pub const COUNT: usize = 11;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let tail = if failed.is_empty() { String::new() } else { format!(" [failed: {}]", failed.join(", ")) };
        format!(
            "criterion {:2} {:<32} {} ({:.2} s){}",
            self.id,
            self.title,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            tail
        )
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn new() -> Checks {
        Checks(Vec::new())
    }

    fn add(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.0.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "star gadget",
        2 => "scalar reduction",
        3 => "oracle equivalence",
        4 => "p-limit convergence",
        5 => "vertex and edge tightness",
        6 => "non-unique infinity harmonic",
        7 => "gadget chain",
        8 => "radial interpolants",
        9 => "conformal criterion",
        10 => "u_t family",
        11 => "norm expansion",
        _ => "unknown",
    }
}

pub fn run(id: usize, seed: u64) -> Outcome {
    let t = Instant::now();
    let checks = match id {
        1 => star_gadget(),
        2 => scalar_reduction(seed),
        3 => oracle_equivalence(seed),
        4 => p_limit(seed),
        5 => edge_mode(seed),
        6 => non_unique(),
        7 => gadget_chain(),
        8 => radial(),
        9 => conformal(seed),
        10 => ut_family(),
        11 => dnorm(seed),
        _ => {
            let mut c = Checks::new();
            c.add("known criterion", false, format!("no criterion {id}"));
            c
        }
    }
    .0;
    Outcome { id, title: title(id), passed: checks.iter().all(|c| c.passed), checks, seconds: t.elapsed().as_secs_f64() }
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    (1..=COUNT).map(|id| run(id, seed)).collect()
}

fn value(g: &Graph, u: &Extension, id: &str) -> Vec<f64> {
    u.value(g, id).expect("vertex").to_vec()
}

fn star_gadget() -> Checks {
    let mut c = Checks::new();
    let cfg = SolveConfig::default();
    for eps in [0.2f64, 0.05] {
        for (free, want) in [([-1.0, eps], [0.0, eps / 2.0]), ([-(1.0 - eps * eps).sqrt(), eps], [0.0, 0.0])] {
            let t = Instant::now();
            let g = star(free);
            let name = format!("eps={eps} free=({:.6},{eps})", free[0]);
            match solve_tight(&g, &cfg) {
                Ok(res) => {
                    let x = value(&g, res.extension(), "x");
                    let err = (x[0] - want[0]).hypot(x[1] - want[1]);
                    let secs = t.elapsed().as_secs_f64();
                    c.add(
                        &name,
                        err < 1e-6 && secs < 1.0,
                        format!("hub ({:.9}, {:.9}), error {err:.2e}, {secs:.3} s", x[0], x[1]),
                    );
                }
                Err(e) => c.add(&name, false, e.to_string()),
            }
        }
    }
    c
}

/// Seeded random scalar graphs with at most 12 vertices.
pub fn scalar_instances(seed: u64) -> Vec<Graph> {
    (0..50u64)
        .map(|k| {
            let s = seed.wrapping_mul(1000).wrapping_add(k);
            let n = 5 + (k % 8) as usize;
            let nb = 2 + (k % 3) as usize;
            random_graph(s, n, nb, 1, (k % 4) as usize, k % 2 == 1)
        })
        .collect()
}

fn scalar_reduction(seed: u64) -> Checks {
    let mut c = Checks::new();
    let t = Instant::now();
    let cfg = SolveConfig::default();
    let errs: Vec<Result<f64, String>> = scalar_instances(seed)
        .par_iter()
        .map(|g| {
            let a = solve_tight(g, &cfg).map_err(|e| e.to_string())?;
            let b = solve_aml_scalar(g).map_err(|e| e.to_string())?;
            Ok(a.extension().dist_inf(&b))
        })
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let bad: Vec<String> = errs.iter().filter_map(|e| e.as_ref().err().cloned()).collect();
    let worst = errs.iter().flatten().copied().fold(0.0, f64::max);
    c.add("solver errors", bad.is_empty(), bad.join("; "));
    c.add("max deviation", worst < 1e-4, format!("{worst:.2e} over {} graphs", errs.len()));
    c.add("runtime", secs < 30.0, format!("{secs:.2} s"));
    c
}

/// Instances with at most two interior vertices: five scalar random graphs and five
/// planar acute stars.
pub fn oracle_instances(seed: u64) -> Vec<Graph> {
    (0..10u64)
        .map(|k| {
            let s = seed.wrapping_mul(1000).wrapping_add(500 + k);
            let interior = 1 + (k % 2) as usize;
            if k < 5 {
                let nb = 2 + (k % 3) as usize;
                random_graph(s, nb + interior, nb, 1, 2, k % 2 == 0)
            } else {
                acute_stars(s, interior)
            }
        })
        .collect()
}

fn oracle_equivalence(seed: u64) -> Checks {
    let mut c = Checks::new();
    let t = Instant::now();
    let h = 0.02;
    let cfg = SolveConfig::default();
    let errs: Vec<Result<f64, String>> = oracle_instances(seed)
        .par_iter()
        .map(|g| {
            let a = solve_tight(g, &cfg).map_err(|e| e.to_string())?;
            let b = brute_force_tight(g, &data_box(g), h, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
            Ok(a.extension().dist_inf(&b))
        })
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let bad: Vec<String> = errs.iter().filter_map(|e| e.as_ref().err().cloned()).collect();
    let worst = errs.iter().flatten().copied().fold(0.0, f64::max);
    c.add("solver errors", bad.is_empty(), bad.join("; "));
    c.add("max deviation", worst <= 2.0 * h, format!("{worst:.4} (bound {})", 2.0 * h));
    c.add("runtime", secs < 120.0, format!("{secs:.2} s"));
    c
}

/// Seeded planar instances with at most eight interior vertices.
pub fn plane_instances(seed: u64) -> Vec<Graph> {
    (0..10u64)
        .map(|k| {
            let s = seed.wrapping_mul(1000).wrapping_add(700 + k);
            let nb = 3 + (k % 2) as usize;
            let interior = 4 + (k % 5) as usize;
            random_graph(s, nb + interior, nb, 2, 3, k % 2 == 0)
        })
        .collect()
}

fn p_limit(seed: u64) -> Checks {
    let mut c = Checks::new();
    let cfg = SolveConfig::default();
    let results: Vec<Result<Vec<f64>, String>> = plane_instances(seed)
        .par_iter()
        .map(|g| {
            let tight = solve_tight(g, &cfg).map_err(|e| e.to_string())?;
            let mut u: Option<Extension> = None;
            let mut d = Vec::new();
            for &p in &cfg.p_schedule {
                let (up, _) = solve_p_harmonic(g, p, u.as_ref(), &cfg).map_err(|e| e.to_string())?;
                d.push(up.dist_inf(tight.extension()));
                u = Some(up);
            }
            Ok(d)
        })
        .collect();
    for (k, r) in results.iter().enumerate() {
        match r {
            Ok(d) => {
                let last4 = &d[d.len() - 4..];
                let mono = last4.windows(2).all(|w| w[1] <= w[0] + 1e-12);
                let fin = *d.last().unwrap();
                c.add(
                    &format!("instance {k}"),
                    fin < 1e-3 && mono,
                    format!("|u_p - u| at p=2^11..2^14: {}", last4.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" ")),
                );
            }
            Err(e) => c.add(&format!("instance {k}"), false, e.clone()),
        }
    }
    c
}

fn edge_mode(seed: u64) -> Checks {
    let mut c = Checks::new();
    let vcfg = SolveConfig::default();
    let ecfg = SolveConfig { profile_mode: ProfileMode::Edge, ..SolveConfig::default() };
    let results: Vec<Result<f64, String>> = plane_instances(seed)
        .par_iter()
        .map(|g| {
            let a = solve_tight(g, &vcfg).map_err(|e| e.to_string())?;
            let b = solve_tight(g, &ecfg).map_err(|e| e.to_string())?;
            Ok(a.extension().dist_inf(b.extension()))
        })
        .collect();
    for (k, r) in results.iter().enumerate() {
        match r {
            Ok(d) => c.add(&format!("instance {k}"), *d < 1e-5, format!("{d:.2e}")),
            Err(e) => c.add(&format!("instance {k}"), false, e.clone()),
        }
    }
    c
}

fn non_unique() -> Checks {
    let mut c = Checks::new();
    let g = triangle_in_triangle();
    let cfg = SolveConfig::default();
    let (i1, i2) = triangle_inits(&g);
    let f1 = crate::solver::solve_infinity_harmonic(&g, &i1, &cfg);
    let f2 = crate::solver::solve_infinity_harmonic(&g, &i2, &cfg);
    let (Ok((u1, p1)), Ok((u2, p2))) = (f1, f2) else {
        c.add("fixed points", false, "infinity harmonic solve failed");
        return c;
    };
    c.add(
        "fixed points converge",
        p1.converged && p2.converged,
        format!("displacements {:.1e}, {:.1e}", p1.displacement, p2.displacement),
    );
    let sep = u1.dist_inf(&u2);
    c.add("fixed points differ", sep > 0.1, format!("sup distance {sep:.4}"));
    let worse = if profile(&g, &u1, ProfileMode::Vertex).lex_cmp(&profile(&g, &u2, ProfileMode::Vertex), 1e-9).is_gt() {
        u1
    } else {
        u2
    };
    match solve_tight(&g, &cfg).and_then(|t| compare_tighter(&g, t.extension(), &worse, ProfileMode::Vertex, 1e-9)) {
        Ok(cmp) => c.add(
            "tight beats worse fixed point",
            cmp.relation == Relation::FirstTighter,
            format!("{:?} at level {:.6}", cmp.relation, cmp.witness_level),
        ),
        Err(e) => c.add("tight beats worse fixed point", false, e.to_string()),
    }
    c
}

fn gadget_chain() -> Checks {
    let mut c = Checks::new();
    let (r, e) = gadget_sequence(1);
    let e1 = 2.0 * (1.0 - 15f64.sqrt() / 4.0);
    let r1 = (1.0f64 + 1.0 / 64.0).sqrt();
    c.add(
        "first terms",
        (e[1] - e1).abs() < 1e-10 && (r[1] - r1).abs() < 1e-10 && (e[1] - 0.06350833).abs() < 5e-9 && (r[1] - 1.00778222).abs() < 5e-9,
        format!("eps_1 = {:.10}, r_1 = {:.10}", e[1], r[1]),
    );
    let chain = GadgetChain::new(12, false);
    let res = chain.recursion_residual();
    c.add("recursion residual", res < 1e-12, format!("{res:.1e}"));
    match verify_chain(&chain, &SolveConfig::default()) {
        Ok(rep) => {
            c.add("Su(c_i) non-decreasing for u", rep.monotone_u, format!("{:?}", rep.su_u));
            c.add("Su(c_i) non-decreasing for v", rep.monotone_v, format!("{:?}", rep.su_v));
            c.add("tight solve reproduces u", rep.solve_u_error < 1e-6, format!("{:.2e}", rep.solve_u_error));
            c.add("tight solve reproduces v", rep.solve_v_error < 1e-6, format!("{:.2e}", rep.solve_v_error));
            c.add("u and v meet at c_10", rep.gap[10] < 1e-6, format!("{:.2e}", rep.gap[10]));
        }
        Err(e) => c.add("chain verification", false, e.to_string()),
    }
    c
}

/// One instance per radial case.
pub fn radial_cases() -> Vec<(RadialCase, RadialSpec)> {
    let s = |a, r1, m1, r2, m2| RadialSpec::new(a, r1, m1, r2, m2).expect("radial instance");
    vec![
        (RadialCase::Glue1, s(1.0, 1.0, 2.0, 4.0, 2.0)),
        (RadialCase::Glue2, s(2.0, 1.0, 1.0, 2.0, 0.1)),
        (RadialCase::Glue3, s(2.0, 1.0, 1.0, 2.0, 5.0)),
        (RadialCase::Glue4, s(0.5, 1.0, 1.0, 4.0, 1.0)),
        (RadialCase::Glue5, s(0.5, 1.0, 1.0, 4.0, 0.3)),
        (RadialCase::Affine, s(0.5, 1.0, 1.0, 2.0, 3.0)),
        (RadialCase::PureConformalPlus, s(2.0, 1.0, 1.0, 2.0, 4.0)),
        (RadialCase::PureConformalMinus, s(1.0, 1.0, 1.0, 2.0, 0.5)),
    ]
}

fn radial() -> Checks {
    let mut c = Checks::new();
    let t = Instant::now();
    for (case, spec) in radial_cases() {
        match solve_radial(&spec) {
            Ok(sol) => {
                let chk = check_solution(&sol);
                let worst = chk.endpoint_error.max(chk.continuity_error).max(chk.slope_error);
                let margin_ok = chk.affine_margin.map_or(true, |m| m > 0.0);
                c.add(
                    &format!("{case:?}"),
                    sol.case == case && worst < 1e-10 && margin_ok,
                    format!("case {:?}, max condition error {worst:.1e}", sol.case),
                );
                if case == RadialCase::Glue1 {
                    let rt = sol.splice.unwrap_or(f64::NAN);
                    c.add("Glue1 splice radius", (rt - 2.0).abs() < 1e-12, format!("{rt:.15}"));
                }
            }
            Err(e) => c.add(&format!("{case:?}"), false, e.to_string()),
        }
    }
    let glue1 = radial_cases()[0].1;
    match annulus_crosscheck(&glue1, 33, 64, &SolveConfig::default()) {
        Ok(x) => c.add(
            "annulus 33x64",
            x.max_error < 5e-2 && !x.flagged,
            format!("max ring error {:.4}, flagged {}", x.max_error, x.flagged),
        ),
        Err(e) => c.add("annulus 33x64", false, e.to_string()),
    }
    let secs = t.elapsed().as_secs_f64();
    c.add("runtime", secs < 120.0, format!("{secs:.2} s"));
    c
}

fn conformal(seed: u64) -> Checks {
    let mut c = Checks::new();
    let z = Complex64::new(0.9, 0.35);
    let mut worst: f64 = 0.0;
    for m in [2.0, 3.0, -1.0, 0.5, 4.0 / 3.0] {
        let want = (m - 2.0) / (m - 1.0);
        match conformal_criterion(&ConformalJet::power(Complex64::new(m, 0.0), z)) {
            Ok(v) => worst = worst.max((v - want).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    c.add("closed-form jets", worst < 1e-12, format!("max error {worst:.1e}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9);
    let mut disagree = 0;
    for _ in 0..1000 {
        let m = Complex64::new(rng.gen_range(-1.0..2.0), rng.gen_range(-1.5..1.5));
        if conformal_criterion_complex_m(m) != conformal_criterion_complex_m_direct(m) {
            disagree += 1;
        }
    }
    c.add("disk and inverse forms agree", disagree == 0, format!("{disagree} of 1000 disagree"));
    let mut errors = Vec::new();
    for _ in 0..20 {
        let mut m: f64 = rng.gen_range(-3.0..3.0);
        while m.abs() < 1e-3 || (m - 1.0).abs() < 1e-3 {
            m = rng.gen_range(-3.0..3.0);
        }
        if let Err(e) = inverse_criterion_crosscheck(m) {
            errors.push(e.to_string());
        }
    }
    c.add("inverse cross-check", errors.is_empty(), format!("{} failures {}", errors.len(), errors.join("; ")));
    c
}

fn ut_family() -> Checks {
    let mut c = Checks::new();
    let h = 1e-3;
    for t in [0.0, 0.5, 1.0] {
        match ut_example(t, h, 0.1) {
            Ok(ex) => {
                let e = ex.max_error(0.2, 1.0);
                c.add(&format!("Lu at t={t}"), e < 1e-2, format!("max error {e:.2e} (C = {:.2})", e / h));
            }
            Err(e) => c.add(&format!("Lu at t={t}"), false, e.to_string()),
        }
    }
    let h = 2e-3;
    let f = FieldSample::square(1.0 + 3.0 * h, h, 2, |x, y| {
        let r = x.hypot(y);
        (r >= 0.2 - 5.0 * h).then(|| ut(0.0, x, y).to_vec())
    });
    match f {
        Ok(f) => {
            let res = principal_pde_residual(&f, GAP_TOL);
            let mut worst: f64 = 0.0;
            let mut missing = 0;
            for j in 0..f.ny {
                for i in 0..f.nx {
                    let (x, y) = f.xy(i, j);
                    let r = x.hypot(y);
                    if (0.2..=1.0).contains(&r) {
                        match res.values[j * f.nx + i] {
                            Some(v) => worst = worst.max((v * r / 4.0 - 1.0).abs()),
                            None => missing += 1,
                        }
                    }
                }
            }
            c.add(
                "flow residual of u_0 is 4/r",
                worst < 0.05 && missing == 0,
                format!("max relative error {worst:.2e}, {missing} points unevaluated"),
            );
        }
        Err(e) => c.add("flow residual of u_0 is 4/r", false, e.to_string()),
    }
    c
}

fn dnorm(seed: u64) -> Checks {
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
    let s = [1e-2, 1e-3, 1e-4];
    let mut worst: f64 = 1.0;
    let mut pairs = 0;
    while pairs < 100 {
        let a = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-1.0..1.0));
        let b = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-1.0..1.0));
        // random principal A: top singular value separated by at least 10%
        let sv = a.singular_values();
        let (s1, s2) = (sv.max(), sv.min());
        if s1 - s2 < 0.1 * s1 || matches!(crate::smooth::principal_direction(&a, GAP_TOL), Principal::NotPrincipal) {
            continue;
        }
        let Some(r) = dnorm_remainders(&a, &b, &s) else { continue };
        let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x.abs()), hi.max(x.abs())));
        worst = worst.max(if lo > 0.0 { hi / lo } else { f64::INFINITY });
        pairs += 1;
    }
    c.add("remainder variation", worst < 10.0, format!("max ratio {worst:.3} over {pairs} pairs"));
    c
}
