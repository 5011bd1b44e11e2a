use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use tight::gadgets::{verify_chain, GadgetChain};
use tight::graph::{compare_tighter, profile, Extension, ProfileMode};
use tight::io::{read_extension, read_graph, write_extension, write_graph};
use tight::oracle::{data_box, DEFAULT_BUDGET};
use tight::radial::{annulus_crosscheck, sample, solve_radial, RadialSpec};
use tight::smooth::{conformal_field, principal_pde_residual, FieldSample, Stats, GAP_TOL};
use tight::solver::{solve_infinity_harmonic, solve_tight, SolveConfig, SolveMode};
use tight::{brute_force_tight, selftest, solve_aml_scalar, Error, Stage};

#[derive(Parser)]
#[command(name = "tight", version, about = "Tight Lipschitz extensions on weighted graphs")]
struct Cli {
    /// Seed for randomized instances; TIGHT_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for data-parallel loops.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write a JSON run report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Peel,
    Plimit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Principal,
    Conformal,
}

#[derive(Args)]
struct RadialArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    r1: f64,
    #[arg(long, allow_hyphen_values = true)]
    m1: f64,
    #[arg(long, allow_hyphen_values = true)]
    r2: f64,
    #[arg(long, allow_hyphen_values = true)]
    m2: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tight extension of a graph's boundary data.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "peel")]
        mode: Mode,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Largest p of the schedule 2, 4, ..., p_max.
        #[arg(long, default_value_t = 16384.0)]
        p_max: f64,
        /// Use edge slopes instead of vertex constants.
        #[arg(long)]
        edges: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Which of two extensions is tighter.
    Compare {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        edges: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Scalar AML extension by steepest paths.
    ScalarAml {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gauss-Seidel Chebyshev-center iteration to a discrete infinity harmonic map.
    InfinityHarmonic {
        #[arg(long)]
        graph: PathBuf,
        /// Starting extension; defaults to the boundary mean.
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive grid search over interior placements.
    Oracle {
        #[arg(long)]
        graph: PathBuf,
        /// "lo,hi" for every coordinate or "lo,hi;lo,hi;..." per coordinate.
        #[arg(long, allow_hyphen_values = true)]
        r#box: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Amplifier gadget chain and its certificates.
    Gadget {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long)]
        weighted: bool,
        /// Truncated chain with c_n pinned to u(c_n).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Truncated chain with c_n pinned to v(c_n).
        #[arg(long)]
        out_v: Option<PathBuf>,
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long)]
        v: Option<PathBuf>,
    },
    /// Radial profile phi on [R1, R2].
    Radial {
        #[command(flatten)]
        spec: RadialArgs,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare phi with a tight solve on a polar grid.
    RadialXcheck {
        #[command(flatten)]
        spec: RadialArgs,
        #[arg(long, default_value_t = 33)]
        nr: usize,
        #[arg(long, default_value_t = 64)]
        ntheta: usize,
        #[arg(long, default_value_t = 5e-2)]
        tol: f64,
    },
    /// Residuals of a sampled map: the principal flow equation or the conformal criterion.
    VerifyPde {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Grid spacing; inferred from the coordinates when omitted.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = GAP_TOL)]
        gap_tol: f64,
        /// Principal: bound on the largest residual. Conformal: slack above 2.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Bundled acceptance suite.
    Selftest {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(Serialize)]
struct RunReport {
    command: Vec<String>,
    seed: u64,
    threads: Option<usize>,
    config: Value,
    stages: Vec<Stage>,
    certificate: Value,
    result: Value,
    seconds: f64,
    artifacts: Vec<String>,
    summary: String,
}

struct Run {
    config: Value,
    stages: Vec<Stage>,
    certificate: Value,
    result: Value,
    artifacts: Vec<String>,
    summary: String,
    flagged: bool,
}

impl Run {
    fn new(summary: String) -> Run {
        Run {
            config: Value::Null,
            stages: Vec::new(),
            certificate: Value::Null,
            result: Value::Null,
            artifacts: Vec::new(),
            summary,
            flagged: false,
        }
    }
}

fn save(path: &Option<PathBuf>, text: &str, artifacts: &mut Vec<String>) -> tight::Result<()> {
    if let Some(p) = path {
        std::fs::write(p, text)?;
        artifacts.push(p.display().to_string());
    }
    Ok(())
}

fn parse_box(s: &str, m: usize) -> tight::Result<Vec<(f64, f64)>> {
    let bad = || Error::Invalid(format!("bad box `{s}`"));
    let parts: Vec<(f64, f64)> = s
        .split(';')
        .map(|p| {
            let v: Vec<f64> = p.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
            if v.len() != 2 {
                return Err(bad());
            }
            Ok((v[0], v[1]))
        })
        .collect::<tight::Result<_>>()?;
    match parts.len() {
        1 => Ok(vec![parts[0]; m]),
        k if k == m => Ok(parts),
        _ => Err(bad()),
    }
}

fn mode(edges: bool) -> ProfileMode {
    if edges {
        ProfileMode::Edge
    } else {
        ProfileMode::Vertex
    }
}

fn spec(r: &RadialArgs) -> tight::Result<RadialSpec> {
    RadialSpec::new(r.alpha, r.r1, r.m1, r.r2, r.m2)
}

fn execute(cmd: &Cmd, seed: u64) -> tight::Result<Run> {
    match cmd {
        Cmd::Solve { graph, mode: m, tol, p_max, edges, out, cert } => {
            let g = read_graph(graph)?;
            let mut p_schedule = vec![2.0];
            while *p_schedule.last().unwrap() * 2.0 <= *p_max {
                p_schedule.push(p_schedule.last().unwrap() * 2.0);
            }
            if *p_schedule.last().unwrap() < *p_max {
                p_schedule.push(*p_max);
            }
            let cfg = SolveConfig {
                mode: match m {
                    Mode::Peel => SolveMode::Peel,
                    Mode::Plimit => SolveMode::Plimit,
                },
                profile_mode: mode(*edges),
                p_schedule,
                outer_tol: *tol,
                seed,
                ..SolveConfig::default()
            };
            let res = solve_tight(&g, &cfg)?;
            let u = res.extension();
            let mut run = Run::new(format!(
                "solved {} interior vertices, max Su {:.12}, certificate {}{}",
                g.interior().len(),
                res.profile.max(),
                if res.certificate.holds { "holds" } else { "fails" },
                if res.flagged { ", flagged" } else { "" }
            ));
            save(out, &tight::io::extension_to_json(&g, u), &mut run.artifacts)?;
            let certificate = serde_json::to_value(&res)?;
            save(cert, &serde_json::to_string_pretty(&certificate)?, &mut run.artifacts)?;
            run.config = serde_json::to_value(&cfg)?;
            run.stages = res.residuals.clone();
            run.certificate = certificate;
            run.result = serde_json::to_value(u.to_map(&g))?;
            run.flagged = res.flagged;
            Ok(run)
        }
        Cmd::Compare { graph, u, v, edges, tol } => {
            let g = read_graph(graph)?;
            let (a, b) = (read_extension(&g, u)?, read_extension(&g, v)?);
            let c = compare_tighter(&g, &a, &b, mode(*edges), *tol)?;
            let mut run = Run::new(format!("{:?} (witness level {})", c.relation, c.witness_level));
            run.result = json!({
                "comparison": c,
                "profile_u": profile(&g, &a, mode(*edges)),
                "profile_v": profile(&g, &b, mode(*edges)),
            });
            Ok(run)
        }
        Cmd::ScalarAml { graph, out } => {
            let g = read_graph(graph)?;
            let u = solve_aml_scalar(&g)?;
            let mut run = Run::new(format!("scalar AML extension, max Su {:.12}", profile(&g, &u, ProfileMode::Vertex).max()));
            save(out, &tight::io::extension_to_json(&g, &u), &mut run.artifacts)?;
            run.result = serde_json::to_value(u.to_map(&g))?;
            Ok(run)
        }
        Cmd::InfinityHarmonic { graph, init, tol, out } => {
            let g = read_graph(graph)?;
            let start = match init {
                Some(p) => read_extension(&g, p)?,
                None => {
                    let b = g.boundary_map();
                    let mut mean = vec![0.0; g.m()];
                    for v in b.values() {
                        for (t, x) in v.iter().enumerate() {
                            mean[t] += x / b.len() as f64;
                        }
                    }
                    Extension::filled(&g, &mean)
                }
            };
            let cfg = SolveConfig { inner_tol: *tol, seed, ..SolveConfig::default() };
            let (u, fp) = solve_infinity_harmonic(&g, &start, &cfg)?;
            let mut run = Run::new(format!(
                "fixed point after {} sweeps, displacement {:.2e}{}",
                fp.sweeps,
                fp.displacement,
                if fp.converged { "" } else { ", not converged" }
            ));
            save(out, &tight::io::extension_to_json(&g, &u), &mut run.artifacts)?;
            run.config = serde_json::to_value(&cfg)?;
            run.certificate = serde_json::to_value(&fp)?;
            run.result = serde_json::to_value(u.to_map(&g))?;
            run.flagged = !fp.converged;
            Ok(run)
        }
        Cmd::Oracle { graph, r#box, h, budget, out } => {
            let g = read_graph(graph)?;
            let bounds = match r#box {
                Some(s) => parse_box(s, g.m())?,
                None => data_box(&g),
            };
            let u = brute_force_tight(&g, &bounds, *h, *budget)?;
            let mut run = Run::new(format!("grid optimum, max Su {:.12}", profile(&g, &u, ProfileMode::Vertex).max()));
            save(out, &tight::io::extension_to_json(&g, &u), &mut run.artifacts)?;
            run.config = json!({ "box": bounds, "h": h, "budget": budget });
            run.result = serde_json::to_value(u.to_map(&g))?;
            Ok(run)
        }
        Cmd::Gadget { n, weighted, out, out_v, u, v } => {
            if *n < 1 {
                return Err(Error::Invalid("n must be at least 1".into()));
            }
            let chain = GadgetChain::new(*n, *weighted);
            let cfg = SolveConfig { seed, ..SolveConfig::default() };
            let rep = verify_chain(&chain, &cfg)?;
            let (gu, gv) = (chain.graph_u(), chain.graph_v());
            let mut run = Run::new(format!(
                "chain n={n}: Su non-decreasing {}/{}, solve errors {:.2e}/{:.2e}, {} failed checks",
                rep.monotone_u,
                rep.monotone_v,
                rep.solve_u_error,
                rep.solve_v_error,
                rep.failures.len()
            ));
            let mut artifacts = Vec::new();
            if let Some(p) = out {
                write_graph(&gu, p)?;
                artifacts.push(p.display().to_string());
            }
            if let Some(p) = out_v {
                write_graph(&gv, p)?;
                artifacts.push(p.display().to_string());
            }
            if let Some(p) = u {
                write_extension(&gu, &chain.extension(&gu, &chain.u), p)?;
                artifacts.push(p.display().to_string());
            }
            if let Some(p) = v {
                write_extension(&gv, &chain.extension(&gv, &chain.v), p)?;
                artifacts.push(p.display().to_string());
            }
            run.artifacts = artifacts;
            run.config = serde_json::to_value(&cfg)?;
            run.result = serde_json::to_value(&rep)?;
            Ok(run)
        }
        Cmd::Radial { spec: r, samples, out } => {
            let sol = solve_radial(&spec(r)?)?;
            let mut run = Run::new(match sol.splice {
                Some(t) => format!("case {:?}, splice radius {}", sol.case, t),
                None => format!("case {:?}", sol.case),
            });
            let mut csv = format!("# case {:?}\nr,phi,dphi,lu\n", sol.case);
            for row in sample(&sol, *samples) {
                let cells: Vec<String> = row.iter().map(|&x| tight::io::fmt_f64(x)).collect();
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            save(out, &csv, &mut run.artifacts)?;
            run.result = serde_json::to_value(&sol)?;
            Ok(run)
        }
        Cmd::RadialXcheck { spec: r, nr, ntheta, tol } => {
            let cfg = SolveConfig { seed, ..SolveConfig::default() };
            let x = annulus_crosscheck(&spec(r)?, *nr, *ntheta, &cfg)?;
            let pass = x.max_error < *tol;
            let mut run = Run::new(format!(
                "case {:?}, max ring error {:.4} ({} against {tol})",
                x.case,
                x.max_error,
                if pass { "pass" } else { "fail" }
            ));
            run.config = serde_json::to_value(&cfg)?;
            run.result = serde_json::to_value(&x)?;
            run.flagged = x.flagged || !pass;
            Ok(run)
        }
        Cmd::VerifyPde { field, kind, h, gap_tol, tol } => {
            let f = FieldSample::read_csv(field, *h)?;
            let mut run;
            match kind {
                Kind::Principal => {
                    let res = principal_pde_residual(&f, *gap_tol);
                    let pass = res.stats.evaluated > 0 && res.stats.max <= *tol;
                    run = Run::new(format!(
                        "principal residual p50 {:.2e} p99 {:.2e} max {:.2e} ({})",
                        res.stats.p50,
                        res.stats.p99,
                        res.stats.max,
                        if pass { "pass" } else { "fail" }
                    ));
                    run.result = json!({ "residual": res, "pass": pass });
                    run.flagged = !pass;
                }
                Kind::Conformal => {
                    let stats = Stats::of(&conformal_field(&f, *gap_tol)?);
                    let pass = stats.evaluated > 0 && stats.max <= 2.0 + tol;
                    run = Run::new(format!(
                        "conformal criterion p50 {:.4} max {:.4} ({})",
                        stats.p50,
                        stats.max,
                        if pass { "pass" } else { "fail" }
                    ));
                    run.result = json!({ "criterion": stats, "pass": pass });
                    run.flagged = !pass;
                }
            }
            run.config = json!({ "h": f.h, "nx": f.nx, "ny": f.ny, "m": f.m, "gap_tol": gap_tol, "tol": tol });
            Ok(run)
        }
        Cmd::Selftest { only } => {
            let ids: Vec<usize> = if only.is_empty() { (1..=selftest::COUNT).collect() } else { only.clone() };
            let mut outcomes = Vec::new();
            for id in ids {
                let o = selftest::run(id, seed);
                println!("{}", o.line());
                outcomes.push(o);
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            let mut run = Run::new(format!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len()));
            run.result = serde_json::to_value(&outcomes)?;
            run.flagged = failed > 0;
            Ok(run)
        }
    }
}

fn write_report(path: &Path, report: &RunReport) -> tight::Result<()> {
    Ok(std::fs::write(path, serde_json::to_string_pretty(report)?)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let seed = match std::env::var("TIGHT_SEED") {
        Ok(s) => match s.trim().parse::<u64>() {
            Ok(v) => v,
            Err(_) => {
                eprintln!("error: TIGHT_SEED `{s}` is not an unsigned integer");
                return ExitCode::from(1);
            }
        },
        Err(_) => cli.seed,
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let t = Instant::now();
    let run = match execute(&cli.cmd, seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    println!("{}", run.summary);
    if let Some(path) = &cli.report {
        let report = RunReport {
            command: std::env::args().collect(),
            seed,
            threads: cli.threads,
            config: run.config,
            stages: run.stages,
            certificate: run.certificate,
            result: run.result,
            seconds: t.elapsed().as_secs_f64(),
            artifacts: run.artifacts,
            summary: run.summary,
        };
        if let Err(e) = write_report(path, &report) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if run.flagged {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        super::Cli::command().debug_assert();
    }
}
