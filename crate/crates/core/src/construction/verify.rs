//! Pass/fail checks on a finished construction, and measured operator diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::operators::{comparison_operator_t, interaction, local_nonlocal_apply, transfer_ball_averages};
use super::ConstructionResult;
use crate::exec::Exec;
use crate::measure::{ad_constants, ScaleGrid};
use crate::riesz::{riesz_apply_on_support, KernelConfig};
use crate::spatial::dist;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub ad_grid_count: usize,
    /// AD grid floor in units of the finest patch spacing.
    pub ad_floor_factor: f64,
    /// Required lower AD constant is `1/(lower_slack · p · s)`.
    pub lower_slack: f64,
    pub matching_tol: f64,
    pub queries: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            ad_grid_count: 24,
            ad_floor_factor: 16.0,
            lower_slack: 64.0,
            matching_tol: 1e-10,
            queries: 200,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    /// Measured quantity.
    pub value: f64,
    /// Bound it is compared with.
    pub bound: f64,
}

impl Check {
    fn at_most(value: f64, bound: f64) -> Self {
        Check {
            pass: value <= bound,
            value,
            bound,
        }
    }

    fn at_least(value: f64, bound: f64) -> Self {
        Check {
            pass: value >= bound,
            value,
            bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub ad_lower: f64,
    pub ad_upper: f64,
    pub ad_r_min: f64,
    pub ad_r_max: f64,
    /// Lower constant against `1/(slack·p·s)`; the upper constant must be finite.
    pub ad: Check,
    /// max relative |ν(B_x) − σ(B_x)|.
    pub matching: Check,
    /// min gap between same-colour balls `B(x, d(x))`; must be positive.
    pub disjointness: Check,
    /// max over targets of the distance outside the nearest cover ball.
    pub coverage: Check,
    /// min over queries of `Σ_k μ_k(A) / μ(A)`.
    pub domination: Check,
    /// max c_x against `p · max_x H^n(P_x)/r(x)^n`.
    pub coefficient_bound: Check,
    pub family_size: usize,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        [
            self.ad,
            self.matching,
            self.disjointness,
            self.coverage,
            self.domination,
            self.coefficient_bound,
        ]
        .iter()
        .all(|c| c.pass)
    }
}

/// Checks (i)-(v) plus the coefficient bound. `family` is the set of `μ_{p,s}` used for
/// the domination check; when empty, the result's own `μ_{p,s}` is used.
pub fn verify_construction(
    result: &ConstructionResult,
    family: &[&ConstructionResult],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let mu = &result.source;
    let n = mu.hausdorff_dim() as i32;
    let (p, s) = (result.config.p as f64, result.config.s as f64);

    let finest = result
        .patches
        .iter()
        .map(|q| q.spacing)
        .fold(result.background.spacing, f64::min);
    let floor = (opts.ad_floor_factor * finest).max(result.mu_ps.resolution());
    let r_max = result.params.grid.r_max();
    let grid = if floor < r_max {
        ScaleGrid::geometric(floor, r_max, opts.ad_grid_count.max(2))?
    } else {
        ScaleGrid::from_radii(vec![floor])?
    };
    let ad = ad_constants(&result.mu_ps, &grid)?;
    let lower_bound = 1.0 / (opts.lower_slack * p * s);
    let ad_check = Check {
        pass: ad.lower >= lower_bound && ad.upper.is_finite(),
        value: ad.lower,
        bound: lower_bound,
    };

    let balls = &result.balls;
    let mut matching = 0.0f64;
    if let (Some(nu), Some(pm)) = (&result.nu.nu, &result.patch_measure) {
        let (ni, si) = (nu.index(), pm.index());
        for k in 0..balls.len() {
            let a = ni.ball_mass(balls.center(k), balls.radii[k]);
            let b = si.ball_mass(balls.center(k), balls.radii[k]);
            matching = matching.max((a - b).abs() / b);
        }
    }

    let mut min_gap = f64::INFINITY;
    let mut coverage = f64::NEG_INFINITY;
    let mut cmax = 0.0f64;
    let mut wmax = 0.0f64;
    if let Some(cover) = &result.cover {
        for a in 0..cover.len() {
            for b in 0..a {
                if cover.colors[a] == cover.colors[b] {
                    let g = dist(mu.point(cover.centers[a]), mu.point(cover.centers[b])) - cover.radii[a] - cover.radii[b];
                    min_gap = min_gap.min(g);
                }
            }
        }
        let excess = Exec::default().map(result.targets.len(), |t| {
            let y = mu.point(result.targets[t]);
            cover
                .centers
                .iter()
                .zip(&cover.radii)
                .map(|(&c, &r)| dist(mu.point(c), y) - r)
                .fold(f64::INFINITY, f64::min)
        });
        coverage = excess.into_iter().fold(f64::NEG_INFINITY, f64::max);
        for (k, q) in result.patches.iter().enumerate() {
            cmax = cmax.max(result.nu.coefficients[k]);
            wmax = wmax.max(q.weight / balls.radii[k].powi(n));
        }
    }

    let own = [result];
    let family: &[&ConstructionResult] = if family.is_empty() { &own } else { family };
    let indices: Vec<_> = family.iter().map(|r| r.mu_ps.index()).collect();
    let mu_index = mu.index();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let d = mu.ambient_dim();
    let (lo, hi) = ((4.0 * mu.resolution()).ln(), r_max.max(4.0 * mu.resolution()).ln());
    let queries: Vec<(Vec<f64>, f64)> = (0..opts.queries)
        .map(|_| {
            let r = rng.gen_range(lo..=hi).exp();
            let i = rng.gen_range(0..mu.len());
            let c = (0..d).map(|a| mu.point(i)[a] + r * rng.gen_range(-1.0..=1.0)).collect();
            (c, r)
        })
        .collect();
    let ratios = Exec::default().map(queries.len(), |q| {
        let (c, r) = &queries[q];
        let m = mu_index.ball_mass(c, *r);
        if m == 0.0 {
            return f64::INFINITY;
        }
        indices.iter().map(|ix| ix.ball_mass(c, *r)).sum::<f64>() / m
    });
    let domination = ratios.into_iter().fold(f64::INFINITY, f64::min);

    Ok(VerificationReport {
        ad_lower: ad.lower,
        ad_upper: ad.upper,
        ad_r_min: ad.r_min,
        ad_r_max: ad.r_max,
        ad: ad_check,
        matching: Check::at_most(matching, opts.matching_tol),
        disjointness: Check {
            pass: min_gap > 0.0,
            value: min_gap,
            bound: 0.0,
        },
        coverage: Check::at_most(coverage.max(0.0), 0.0),
        domination: Check::at_least(domination, 1.0 - 1e-12),
        coefficient_bound: Check::at_most(cmax, p * wmax * (1.0 + 1e-12)),
        family_size: family.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticsOptions {
    /// Kernel truncation in units of the resolution of μ.
    pub epsilon_factor: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            epsilon_factor: 4.0,
            samples: 4,
            seed: 0x5eed,
        }
    }
}

/// Operator-level measurements. All values are recorded, none is asserted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub epsilon: f64,
    /// max relative |R^loc f + R^nl f − R f| on ν for random f.
    pub split_residual: f64,
    /// max matching residual after transferring random g from σ to ν.
    pub transfer_matching: f64,
    /// min of ‖g‖_σ − ‖f‖_ν over the samples; nonnegative when the norm transfers.
    pub transfer_norm_slack: f64,
    /// max over samples of I(f, g) / (‖f‖² + ‖g‖²).
    pub interaction_ratio: f64,
    /// ‖T_ν 1‖ / ‖1‖ in L²(ν).
    pub t_nu_ratio: f64,
}

pub fn measure_diagnostics(result: &ConstructionResult, opts: &DiagnosticsOptions) -> Result<Diagnostics> {
    let eps = opts.epsilon_factor * result.source.resolution();
    let cfg = KernelConfig::truncated(result.source.hausdorff_dim(), eps)?;
    let (nu, pm) = match (&result.nu.nu, &result.patch_measure) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Ok(Diagnostics {
                epsilon: eps,
                ..Default::default()
            })
        }
    };
    let balls = &result.balls;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Diagnostics {
        epsilon: eps,
        transfer_norm_slack: f64::INFINITY,
        ..Default::default()
    };
    for _ in 0..opts.samples.max(1) {
        let f: Vec<f64> = (0..nu.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (loc, nl) = local_nonlocal_apply(nu, balls, &f, &cfg)?;
        let full = riesz_apply_on_support(nu, &f, &cfg)?;
        let scale = full.max_norm().max(f64::MIN_POSITIVE);
        let worst = loc
            .values()
            .iter()
            .zip(nl.values())
            .zip(full.values())
            .map(|((a, b), c)| (a + b - c).abs())
            .fold(0.0, f64::max);
        out.split_residual = out.split_residual.max(worst / scale);

        let g: Vec<f64> = (0..pm.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = transfer_ball_averages(&g, pm, nu, balls)?;
        out.transfer_matching = out.transfer_matching.max(t.matching_residual);
        out.transfer_norm_slack = out.transfer_norm_slack.min(t.norm_g - t.norm_f);
        let i = interaction(nu, pm, balls, &t.f, &g, &cfg)?;
        out.interaction_ratio = out.interaction_ratio.max(i.ratio);
    }
    let ones = vec![1.0; nu.len()];
    let t = comparison_operator_t(nu, balls, &ones)?;
    let num: f64 = t.iter().zip(nu.weights()).map(|(v, w)| v * v * w).sum();
    let den: f64 = nu.weights().iter().sum();
    out.t_nu_ratio = (num / den).sqrt();
    Ok(out)
}
