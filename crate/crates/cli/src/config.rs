//! Flag/file settings and their resolution into a fully explicit experiment config.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use rieszlab::analysis::CurvatureMode;
use rieszlab::construction::{ConstructionConfig, PlanePolicy};
use rieszlab::measure::support_diameter;
use rieszlab::treecode::TreecodeParams;
use rieszlab::{DiscreteMeasure, KernelConfig, KernelMode, ScaleGrid};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Segment,
    Plane,
    Graph,
    Cantor,
    FourCorners,
    SparseCantor,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Truncated,
    Regularized,
}

impl From<Mode> for KernelMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Truncated => KernelMode::Truncated,
            Mode::Regularized => KernelMode::Regularized,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Power,
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureKind {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    LeastSquares,
    FixedAxes,
}

/// Every tunable, optional both on the command line and in a `--config` file.
/// Values from the file take precedence over flags.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// TOML file with any of these settings (kebab-case keys).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Input measure file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file (a directory for `construct`); stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Second measure for `joint`.
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Hausdorff dimension n.
    #[arg(long)]
    pub n: Option<usize>,
    /// Ambient dimension d.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub slope: Option<f64>,
    #[arg(long)]
    pub bumps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,

    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Truncation scale; defaults to `epsilon-factor · h`.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub epsilon_factor: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    #[arg(long)]
    pub eps_count: Option<usize>,

    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub grid_count: Option<usize>,
    /// Point at which to sample the density profile.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub point: Option<Vec<f64>>,

    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,

    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub leaf_cap: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    /// Force direct summation.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exact: Option<bool>,
    /// Above this many points, operator applications use the treecode unless `--exact`.
    #[arg(long)]
    pub treecode_threshold: Option<usize>,

    #[arg(long = "curvature", value_enum)]
    pub curvature: Option<CurvatureKind>,
    #[arg(long)]
    pub samples: Option<usize>,

    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub floor_factor: Option<f64>,
    #[arg(long)]
    pub overlap_cap: Option<usize>,
    #[arg(long, value_enum)]
    pub plane_policy: Option<Policy>,
    #[arg(long)]
    pub patch_divisions: Option<usize>,
    #[arg(long)]
    pub background_spacing: Option<f64>,
    #[arg(long)]
    pub extent_factor: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub verify: Option<bool>,

    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub reps: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl Settings {
    /// Apply the `--config` file, if any, on top of the flags.
    pub fn merged(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let file: Settings =
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        overlay!(self, file;
            input, output, sigma, threads, seed, kind, level, count, n, d, extent, spacing, slope, bumps,
            ratios, mode, epsilon, epsilon_factor, epsilons, eps_min, eps_max, eps_count, r_min, r_max,
            grid_count, point, method, tol, max_iter, theta, leaf_cap, order, exact, treecode_threshold,
            curvature, samples, p, s, floor_factor, overlap_cap, plane_policy, patch_divisions,
            background_spacing, extent_factor, verify, sizes, reps,
        );
        Ok(self)
    }

    pub fn input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Validation("--input is required".into()))
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Validation(msg()))
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenConfig {
    pub kind: Kind,
    pub level: usize,
    pub count: usize,
    pub n: usize,
    pub d: usize,
    pub extent: f64,
    pub spacing: f64,
    pub slope: f64,
    pub bumps: usize,
    pub ratios: Vec<f64>,
    pub seed: u64,
}

pub fn resolve_gen(s: &Settings) -> Result<GenConfig, CliError> {
    let kind = s.kind.ok_or_else(|| CliError::Validation("--kind is required".into()))?;
    let n = s.n.unwrap_or(1);
    let ratios = match (&s.ratios, kind) {
        (Some(r), _) => r.clone(),
        (None, Kind::SparseCantor) => rieszlab::generators::default_sparse_ratios(),
        (None, _) => vec![0.25; s.level.unwrap_or(4)],
    };
    let c = GenConfig {
        kind,
        level: s.level.unwrap_or(4),
        count: s.count.unwrap_or(1024),
        n,
        d: s.d.unwrap_or(n + 1),
        extent: s.extent.unwrap_or(1.0),
        spacing: s.spacing.unwrap_or(1.0 / 64.0),
        slope: s.slope.unwrap_or(1.0),
        bumps: s.bumps.unwrap_or(8),
        ratios,
        seed: s.seed.unwrap_or(1),
    };
    check(c.level <= 12, || format!("level {} above 12", c.level))?;
    check(c.count >= 1, || "count must be >= 1".into())?;
    check(c.n >= 1 && c.d > c.n, || format!("need 1 <= n < d, got n={} d={}", c.n, c.d))?;
    check(c.extent > 0.0 && c.spacing > 0.0 && c.spacing <= c.extent, || {
        "need 0 < spacing <= extent".into()
    })?;
    check(c.slope >= 0.0 && c.slope.is_finite(), || "slope must be finite and >= 0".into())?;
    check(c.bumps >= 1, || "bumps must be >= 1".into())?;
    check(c.ratios.iter().all(|r| *r > 0.0 && *r < 0.5), || "ratios must lie in (0, 1/2)".into())?;
    Ok(c)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct KernelSettings {
    pub mode: Mode,
    pub epsilon: f64,
}

impl KernelSettings {
    pub fn config(&self, mu: &DiscreteMeasure) -> KernelConfig {
        KernelConfig::new(mu.hausdorff_dim(), self.epsilon, self.mode.into()).expect("validated")
    }
}

pub fn resolve_kernel(s: &Settings, mu: &DiscreteMeasure, default_mode: Mode) -> Result<KernelSettings, CliError> {
    let factor = s.epsilon_factor.unwrap_or(4.0);
    let k = KernelSettings {
        mode: s.mode.unwrap_or(default_mode),
        epsilon: s.epsilon.unwrap_or(factor * mu.resolution()),
    };
    KernelConfig::new(mu.hausdorff_dim(), k.epsilon, k.mode.into()).map_err(|e| CliError::Validation(e.to_string()))?;
    check(k.epsilon >= mu.resolution(), || {
        format!("epsilon {} is below the measure resolution {}", k.epsilon, mu.resolution())
    })?;
    Ok(k)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GridSettings {
    pub r_min: f64,
    pub r_max: f64,
    pub grid_count: usize,
}

impl GridSettings {
    pub fn grid(&self) -> ScaleGrid {
        ScaleGrid::geometric(self.r_min, self.r_max, self.grid_count).expect("validated")
    }
}

pub fn resolve_grid(s: &Settings, mu: &DiscreteMeasure) -> Result<GridSettings, CliError> {
    let h = mu.resolution();
    let diam = support_diameter(mu);
    let g = GridSettings {
        r_min: s.r_min.unwrap_or(4.0 * h),
        r_max: s.r_max.unwrap_or(diam.max(4.0 * h)),
        grid_count: s.grid_count.unwrap_or(24),
    };
    check(g.r_min >= h, || format!("r-min {} is below the resolution {h}", g.r_min))?;
    ScaleGrid::geometric(g.r_min, g.r_max, g.grid_count).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(g)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SolverSettings {
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Whether operator applications go through the treecode.
    pub treecode: bool,
    pub theta: f64,
    pub leaf_cap: usize,
    pub order: usize,
}

impl SolverSettings {
    pub fn params(&self) -> TreecodeParams {
        TreecodeParams::new(self.theta, self.leaf_cap, self.order).expect("validated")
    }
}

pub fn resolve_treecode(s: &Settings) -> Result<TreecodeParams, CliError> {
    let d = TreecodeParams::default();
    TreecodeParams::new(
        s.theta.unwrap_or(d.theta),
        s.leaf_cap.unwrap_or(d.leaf_cap),
        s.order.unwrap_or(d.order),
    )
    .map_err(|e| CliError::Validation(e.to_string()))
}

pub fn resolve_solver(s: &Settings, n_points: usize) -> Result<SolverSettings, CliError> {
    let tc = resolve_treecode(s)?;
    let threshold = s.treecode_threshold.unwrap_or(8192);
    let r = SolverSettings {
        method: s.method.unwrap_or(Method::Power),
        tol: s.tol.unwrap_or(1e-8),
        max_iter: s.max_iter.unwrap_or(10_000),
        seed: s.seed.unwrap_or(0x5eed),
        treecode: !s.exact.unwrap_or(false) && n_points > threshold,
        theta: tc.theta,
        leaf_cap: tc.leaf_cap,
        order: tc.order,
    };
    check(r.tol > 0.0 && r.tol < 1.0, || format!("tol {} outside (0, 1)", r.tol))?;
    check(r.max_iter >= 1, || "max-iter must be >= 1".into())?;
    check(r.method == Method::Power || n_points <= 4096, || {
        format!("dense method limited to 4096 points, input has {n_points}")
    })?;
    Ok(r)
}

pub fn resolve_epsilons(s: &Settings, mu: &DiscreteMeasure) -> Result<Vec<f64>, CliError> {
    if let Some(e) = &s.epsilons {
        check(!e.is_empty(), || "--epsilons is empty".into())?;
        check(e.iter().all(|x| *x >= mu.resolution() && x.is_finite()), || {
            format!("every epsilon must be >= the resolution {}", mu.resolution())
        })?;
        return Ok(e.clone());
    }
    let lo = s.eps_min.unwrap_or(4.0 * mu.resolution());
    let hi = s.eps_max.unwrap_or((support_diameter(mu) / 4.0).max(lo));
    let count = s.eps_count.unwrap_or(8);
    check(lo >= mu.resolution(), || format!("eps-min {lo} is below the resolution {}", mu.resolution()))?;
    let grid = ScaleGrid::geometric(lo, hi, count).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(grid.radii().to_vec())
}

pub fn resolve_curvature(s: &Settings) -> Result<CurvatureMode, CliError> {
    match s.curvature.unwrap_or(CurvatureKind::Exact) {
        CurvatureKind::Exact => Ok(CurvatureMode::Exact),
        CurvatureKind::Sampled => {
            let count = s.samples.unwrap_or(100_000);
            check(count >= 2, || "samples must be >= 2".into())?;
            Ok(CurvatureMode::Sampled {
                count,
                seed: s.seed.unwrap_or(17),
            })
        }
    }
}

pub fn resolve_construction(s: &Settings) -> Result<ConstructionConfig, CliError> {
    let mut c = ConstructionConfig::new(s.p.unwrap_or(2), s.s.unwrap_or(2));
    if let Some(v) = s.grid_count {
        c.grid_count = v;
    }
    if let Some(v) = s.floor_factor {
        c.floor_factor = v;
    }
    c.overlap_cap = s.overlap_cap.or(c.overlap_cap);
    if let Some(v) = s.plane_policy {
        c.plane_policy = match v {
            Policy::LeastSquares => PlanePolicy::LeastSquares,
            Policy::FixedAxes => PlanePolicy::FixedAxes,
        };
    }
    if let Some(v) = s.patch_divisions {
        c.patch_divisions = v;
    }
    c.background_spacing = s.background_spacing.or(c.background_spacing);
    if let Some(v) = s.extent_factor {
        c.extent_factor = v;
    }
    check(c.p >= 1 && c.s >= 1, || "p and s must be >= 1".into())?;
    check(c.grid_count >= 1 && c.floor_factor > 0.0 && c.extent_factor > 0.0, || {
        "grid-count, floor-factor and extent-factor must be positive".into()
    })?;
    check(c.patch_divisions >= 1, || "patch-divisions must be >= 1".into())?;
    check(c.background_spacing.is_none_or(|b| b > 0.0), || "background-spacing must be positive".into())?;
    Ok(c)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BenchSettings {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub theta: f64,
    pub leaf_cap: usize,
    pub order: usize,
    pub epsilon_factor: f64,
}

pub fn resolve_bench(s: &Settings) -> Result<BenchSettings, CliError> {
    let tc = resolve_treecode(s)?;
    let b = BenchSettings {
        sizes: s.sizes.clone().unwrap_or_else(|| vec![1000, 10_000]),
        reps: s.reps.unwrap_or(5),
        theta: tc.theta,
        leaf_cap: tc.leaf_cap,
        order: tc.order,
        epsilon_factor: s.epsilon_factor.unwrap_or(4.0),
    };
    check(!b.sizes.is_empty() && b.sizes.iter().all(|n| *n >= 2), || "sizes must be >= 2".into())?;
    check(b.reps >= 1, || "reps must be >= 1".into())?;
    check(b.epsilon_factor >= 1.0, || "epsilon-factor must be >= 1".into())?;
    Ok(b)
}
