//! One function per subcommand. Each resolves its settings, validates them,
//! computes, and writes exactly one artifact.

use std::time::Instant;

use serde::Serialize;

use rieszlab::analysis::{
    curvature_c2, curvature_csv, dense_operator_norm, joint_norm_experiment, norm_sweep, operator_norm_with,
    sweep_csv, NormEstimate, PowerOptions, Summation,
};
use rieszlab::construction::{
    measure_diagnostics, run_construction, verify_construction, write_result_dir, ConstructionConfig,
    DiagnosticsOptions, VerifyOptions,
};
use rieszlab::generators::{
    gen_cantor, gen_four_corners, gen_lipschitz_graph, gen_plane, gen_segment, gen_sparse_cantor,
    mixed_test_measure, GraphSpec, MixedSpec,
};
use rieszlab::measure::{density_profile, fmt_f64, write_measure_string};
use rieszlab::riesz::riesz_apply;
use rieszlab::treecode::{build_tree, treecode_apply, TreecodeParams};
use rieszlab::{DiscreteMeasure, KernelConfig};

use crate::config::*;
use crate::output::{emit, header, load, with_header, Loaded};
use crate::CliError;

fn power_options(s: &SolverSettings) -> PowerOptions {
    let mut o = PowerOptions::new(s.tol, s.max_iter);
    o.seed = s.seed;
    if s.treecode {
        o.summation = Summation::Treecode(s.params());
    }
    o
}

fn estimate(mu: &DiscreteMeasure, cfg: &KernelConfig, s: &SolverSettings) -> Result<NormEstimate, CliError> {
    Ok(match s.method {
        Method::Power => operator_norm_with(mu, cfg, &power_options(s))?,
        Method::Dense => dense_operator_norm(mu, cfg)?,
    })
}

fn estimate_row(label: &str, e: &NormEstimate) -> String {
    format!(
        "{label},{},{},{},{}\n",
        fmt_f64(e.epsilon),
        fmt_f64(e.value),
        e.iterations,
        fmt_f64(e.residual)
    )
}

pub fn gen(s: &Settings) -> Result<(), CliError> {
    let c = resolve_gen(s)?;
    let mu = match c.kind {
        Kind::Segment => gen_segment(c.count, c.d)?,
        Kind::Plane => gen_plane(c.n, c.d, c.extent, c.spacing)?,
        Kind::Graph => {
            if c.d != c.n + 1 {
                return Err(CliError::Validation(format!("graph needs d = n + 1, got n={} d={}", c.n, c.d)));
            }
            let mut g = GraphSpec::new(c.n, c.slope, c.extent, c.spacing, c.seed);
            g.bumps = c.bumps;
            gen_lipschitz_graph(&g)?
        }
        Kind::Cantor => gen_cantor(&c.ratios)?,
        Kind::FourCorners => gen_four_corners(c.level)?,
        Kind::SparseCantor => gen_sparse_cantor(&c.ratios)?.measure,
        Kind::Mixed => mixed_test_measure(&MixedSpec {
            segment_points: c.count,
            ..MixedSpec::default()
        })?,
    };
    #[derive(Serialize)]
    struct Echo<'a> {
        generator: &'a GenConfig,
    }
    let head = header("gen", &[], &Echo { generator: &c })?;
    emit(s.output.as_deref(), &write_measure_string(&mu, &head))
}

pub fn density(s: &Settings) -> Result<(), CliError> {
    let input = load(s.input()?)?;
    let mu = &input.measure;
    let g = resolve_grid(s, mu)?;
    let grid = g.grid();
    #[derive(Serialize)]
    struct Echo<'a> {
        point: Option<&'a [f64]>,
        grid: &'a GridSettings,
    }
    let mut body = String::new();
    match &s.point {
        Some(x) => {
            if x.len() != mu.ambient_dim() {
                return Err(CliError::Validation(format!(
                    "point has {} coordinates, measure lives in R^{}",
                    x.len(),
                    mu.ambient_dim()
                )));
            }
            let prof = density_profile(mu, x, &grid)?;
            body.push_str("r,ratio\n");
            for (r, q) in prof.ratios {
                body.push_str(&format!("{},{}\n", fmt_f64(r), fmt_f64(q)));
            }
        }
        None => {
            body.push_str("index,lower,upper\n");
            for i in 0..mu.len() {
                let prof = density_profile(mu, mu.point(i), &grid)?;
                body.push_str(&format!("{i},{},{}\n", fmt_f64(prof.lower), fmt_f64(prof.upper)));
            }
        }
    }
    let head = header("density", &[("input", &input)], &Echo { point: s.point.as_deref(), grid: &g })?;
    emit(s.output.as_deref(), &with_header(&head, &body))
}

pub fn norm(s: &Settings) -> Result<(), CliError> {
    let input = load(s.input()?)?;
    let mu = &input.measure;
    let k = resolve_kernel(s, mu, Mode::Truncated)?;
    let solver = resolve_solver(s, mu.len())?;
    #[derive(Serialize)]
    struct Echo<'a> {
        kernel: &'a KernelSettings,
        solver: &'a SolverSettings,
    }
    let head = header("norm", &[("input", &input)], &Echo { kernel: &k, solver: &solver })?;
    let e = estimate(mu, &k.config(mu), &solver)?;
    let body = format!("measure,epsilon,norm,iterations,residual\n{}", estimate_row("input", &e));
    emit(s.output.as_deref(), &with_header(&head, &body))
}

pub fn sweep(s: &Settings) -> Result<(), CliError> {
    let input = load(s.input()?)?;
    let mu = &input.measure;
    let k = resolve_kernel(s, mu, Mode::Truncated)?;
    let epsilons = resolve_epsilons(s, mu)?;
    let solver = resolve_solver(s, mu.len())?;
    if solver.method == Method::Dense {
        return Err(CliError::Validation("sweep uses power iteration only".into()));
    }
    #[derive(Serialize)]
    struct Echo<'a> {
        mode: Mode,
        epsilons: &'a [f64],
        solver: &'a SolverSettings,
    }
    let head = header(
        "sweep",
        &[("input", &input)],
        &Echo { mode: k.mode, epsilons: &epsilons, solver: &solver },
    )?;
    let rows = norm_sweep(mu, &k.config(mu), &epsilons, &power_options(&solver))?;
    emit(s.output.as_deref(), &with_header(&head, &sweep_csv(&rows)))
}

pub fn curvature(s: &Settings) -> Result<(), CliError> {
    let input = load(s.input()?)?;
    let mode = resolve_curvature(s)?;
    #[derive(Serialize)]
    struct Echo {
        curvature: rieszlab::analysis::CurvatureMode,
    }
    let head = header("curvature", &[("input", &input)], &Echo { curvature: mode })?;
    let est = curvature_c2(&input.measure, mode)?;
    emit(s.output.as_deref(), &with_header(&head, &curvature_csv(&[est])))
}

pub fn construct(s: &Settings) -> Result<(), CliError> {
    let input = load(s.input()?)?;
    let config = resolve_construction(s)?;
    let out = s
        .output
        .as_deref()
        .ok_or_else(|| CliError::Validation("construct needs --output <dir>".into()))?;
    let verify = s.verify.unwrap_or(true);
    let vopts = VerifyOptions::default();
    let dopts = DiagnosticsOptions {
        seed: s.seed.unwrap_or(DiagnosticsOptions::default().seed),
        ..DiagnosticsOptions::default()
    };
    #[derive(Serialize)]
    struct Echo<'a> {
        verify: bool,
        construction: &'a ConstructionConfig,
        verification: &'a VerifyOptions,
        diagnostics: &'a DiagnosticsOptions,
    }
    let head = header(
        "construct",
        &[("input", &input)],
        &Echo { verify, construction: &config, verification: &vopts, diagnostics: &dopts },
    )?;
    let r = run_construction(&input.measure, &config)?;
    let (v, d) = if verify {
        (Some(verify_construction(&r, &[], &vopts)?), Some(measure_diagnostics(&r, &dopts)?))
    } else {
        (None, None)
    };
    write_result_dir(&r, v, d, &head, out)?;
    Ok(())
}

pub fn joint(s: &Settings) -> Result<(), CliError> {
    let input = load(s.input()?)?;
    let sigma_path = s
        .sigma
        .as_deref()
        .ok_or_else(|| CliError::Validation("joint needs --sigma".into()))?;
    let sigma = load(sigma_path)?;
    let mu = &input.measure;
    let k = resolve_kernel(s, mu, Mode::Truncated)?;
    let solver = resolve_solver(s, mu.len() + sigma.measure.len())?;
    if solver.method == Method::Dense {
        return Err(CliError::Validation("joint uses power iteration only".into()));
    }
    #[derive(Serialize)]
    struct Echo<'a> {
        kernel: &'a KernelSettings,
        solver: &'a SolverSettings,
    }
    let head = header("joint", &[("input", &input), ("sigma", &sigma)], &Echo { kernel: &k, solver: &solver })?;
    let j = joint_norm_experiment(mu, &sigma.measure, &k.config(mu), &power_options(&solver))?;
    let body = format!(
        "measure,epsilon,norm,iterations,residual\n{}{}{}",
        estimate_row("mu", &j.norm_mu),
        estimate_row("sigma", &j.norm_sigma),
        estimate_row("sum", &j.norm_sum)
    );
    emit(s.output.as_deref(), &with_header(&head, &body))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn time<T>(reps: usize, mut f: impl FnMut() -> T) -> (f64, T) {
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let t = Instant::now();
        last = Some(f());
        times.push(t.elapsed().as_secs_f64());
    }
    (median(times), last.expect("reps >= 1"))
}

pub fn bench(s: &Settings) -> Result<(), CliError> {
    let b = resolve_bench(s)?;
    let input = s.input.as_deref().map(load).transpose()?;
    let measures: Vec<DiscreteMeasure> = match &input {
        Some(l) => vec![l.measure.clone()],
        None => b.sizes.iter().map(|&n| gen_segment(n, 2)).collect::<Result<_, _>>()?,
    };
    let params = TreecodeParams::new(b.theta, b.leaf_cap, b.order).expect("validated");
    #[derive(Serialize)]
    struct Echo<'a> {
        bench: &'a BenchSettings,
        measure: &'a str,
    }
    let inputs: Vec<(&str, &Loaded)> = input.iter().map(|l| ("input", l)).collect();
    let head = header(
        "bench",
        &inputs,
        &Echo { bench: &b, measure: if input.is_some() { "input" } else { "segment" } },
    )?;
    let mut body = String::from("n,direct_s,treecode_s,build_s,speedup,max_rel_err,direct_pairs_per_s\n");
    for mu in &measures {
        let cfg = KernelConfig::truncated(mu.hausdorff_dim(), b.epsilon_factor * mu.resolution())?;
        let f = vec![1.0; mu.len()];
        let (t_build, tree) = time(b.reps, || build_tree(mu, &params));
        let (t_direct, direct) = time(b.reps, || riesz_apply(mu, &f, &cfg, mu.coords()));
        let direct = direct?;
        let (t_tree, approx) = time(b.reps, || treecode_apply(mu, &f, &cfg, &tree, &params, mu.coords()));
        let approx = approx?;
        let scale = direct.max_norm().max(f64::MIN_POSITIVE);
        let err = approx.max_abs_diff(&direct) / scale;
        let n = mu.len() as f64;
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            mu.len(),
            fmt_f64(t_direct),
            fmt_f64(t_tree),
            fmt_f64(t_build),
            fmt_f64(t_direct / t_tree),
            fmt_f64(err),
            fmt_f64(n * n / t_direct)
        ));
    }
    emit(s.output.as_deref(), &with_header(&head, &body))
}
