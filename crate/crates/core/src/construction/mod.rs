//! The AD-regularisation pipeline.
//!
//! Given μ and thresholds `p`, `s`:
//! 1. `F_p` and `F_{p,s}` from ball-mass thresholds on a radius grid;
//! 2. a bounded-overlap cover of `F_p ∖ F_{p,s}` by balls `B(x, d(x))`, coloured
//!    into disjoint families;
//! 3. planar patches `P_x` of radius `d(x)/2` and a background plane through `F_{p,s}`;
//! 4. `σ`, `μ_{p,s} = σ + μ⌊F_{p,s}` and `ν = Σ c_x μ⌊B_x`.
//!
//! [`verify_construction`] checks the resulting claims, [`measure_diagnostics`]
//! records the operator-level quantities.

mod cover;
mod manifest;
mod operators;
mod patches;
mod verify;

pub use cover::{
    besicovitch_cover, default_overlap_cap, distance_function, extract_fp, extract_fps, CoverReport,
    DensitySubsetParams,
};
pub use manifest::{write_result_dir, Manifest};
pub use operators::{
    build_mu_ps, build_nu, build_nu_with, comparison_operator_t, interaction, local_nonlocal_apply, nonlocal_apply,
    transfer_ball_averages, BallFamily, Interaction, NuParts, Transfer,
};
pub use patches::{
    attach_patches, background_plane, principal_basis, unit_ball_volume, BackgroundPlane, PlanarPatch, PlanePolicy,
};
pub use verify::{
    measure_diagnostics, verify_construction, Check, Diagnostics, DiagnosticsOptions, VerificationReport,
    VerifyOptions,
};

use serde::{Deserialize, Serialize};

use crate::measure::{support_diameter, DiscreteMeasure};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstructionConfig {
    pub p: u32,
    pub s: u32,
    /// Radii in the threshold grid.
    pub grid_count: usize,
    /// Grid floor in units of the resolution.
    pub floor_factor: f64,
    /// Defaults to `5^d`.
    pub overlap_cap: Option<usize>,
    pub plane_policy: PlanePolicy,
    /// Patch spacing is `r(x)/patch_divisions`.
    pub patch_divisions: usize,
    /// Defaults to the resolution of μ.
    pub background_spacing: Option<f64>,
    /// Side of the sampled background square in units of the support diameter.
    pub extent_factor: f64,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            p: 2,
            s: 2,
            grid_count: 32,
            floor_factor: 4.0,
            overlap_cap: None,
            plane_policy: PlanePolicy::LeastSquares,
            patch_divisions: 16,
            background_spacing: None,
            extent_factor: 3.0,
        }
    }
}

impl ConstructionConfig {
    pub fn new(p: u32, s: u32) -> Self {
        ConstructionConfig {
            p,
            s,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionResult {
    pub config: ConstructionConfig,
    pub params: DensitySubsetParams,
    pub source: DiscreteMeasure,
    pub diameter: f64,
    pub f_p: Vec<usize>,
    pub f_ps: Vec<usize>,
    /// `F_p ∖ F_{p,s}`.
    pub targets: Vec<usize>,
    pub cover: Option<CoverReport>,
    pub balls: BallFamily,
    pub patches: Vec<PlanarPatch>,
    /// `Σ H^n⌊P_x`, the part of σ that is matched against ν.
    pub patch_measure: Option<DiscreteMeasure>,
    pub background: BackgroundPlane,
    pub sigma: DiscreteMeasure,
    pub mu_ps: DiscreteMeasure,
    pub nu: NuParts,
}

impl ConstructionResult {
    pub fn coefficients(&self) -> &[f64] {
        &self.nu.coefficients
    }

    /// Copy with `c_x` of ball `k` multiplied by `factor` and ν rebuilt.
    pub fn with_scaled_coefficient(&self, k: usize, factor: f64) -> Result<Self> {
        if k >= self.nu.coefficients.len() {
            return Err(Error::Precondition(format!("no ball with index {k}")));
        }
        let mut out = self.clone();
        out.nu.coefficients[k] *= factor;
        out.nu.nu = operators::nu_measure(&self.source, &out.nu.sources, &out.nu.labels, &out.nu.coefficients)?;
        Ok(out)
    }
}

/// Run the pipeline for one `(p, s)`.
pub fn run_construction(mu: &DiscreteMeasure, config: &ConstructionConfig) -> Result<ConstructionResult> {
    if !(config.floor_factor > 0.0 && config.extent_factor > 0.0) || config.grid_count == 0 {
        return Err(Error::Precondition("grid and extent factors must be positive".into()));
    }
    let params = DensitySubsetParams::for_measure(mu, config.p, config.s, config.grid_count, config.floor_factor)?;
    let diameter = support_diameter(mu);
    let f_p = extract_fp(mu, &params);
    if f_p.is_empty() {
        return Err(Error::Precondition(format!("F_p is empty for p = {}", config.p)));
    }
    let f_ps = extract_fps(mu, &f_p, &params);
    if f_ps.is_empty() {
        return Err(Error::EmptyExclusion);
    }
    let mut in_fps = vec![false; mu.len()];
    f_ps.iter().for_each(|&i| in_fps[i] = true);
    let targets: Vec<usize> = f_p.iter().copied().filter(|&i| !in_fps[i]).collect();

    let cover = if targets.is_empty() {
        None
    } else {
        let cap = config.overlap_cap.unwrap_or_else(|| default_overlap_cap(mu.ambient_dim()));
        Some(besicovitch_cover(mu, &targets, &f_ps, cap)?)
    };
    let (patches, patch_measure, balls, nu) = match &cover {
        Some(c) => {
            let index = mu.index();
            let (patches, pm) = attach_patches(mu, &index, c, config.plane_policy, config.patch_divisions)?;
            let nu = build_nu(mu, c, &patches)?;
            (patches, pm, BallFamily::from_cover(mu, c), nu)
        }
        None => (
            Vec::new(),
            None,
            BallFamily {
                dim: mu.ambient_dim(),
                n: mu.hausdorff_dim(),
                centers: Vec::new(),
                radii: Vec::new(),
            },
            NuParts {
                nu: None,
                sources: Vec::new(),
                labels: Vec::new(),
                coefficients: Vec::new(),
                ball_masses: Vec::new(),
            },
        ),
    };
    let spacing = config.background_spacing.unwrap_or(mu.resolution());
    let (background, plane) = background_plane(mu, &f_ps, diameter, config.extent_factor, spacing)?;
    let sigma = match &patch_measure {
        Some(pm) => pm.concat(&plane)?,
        None => plane,
    };
    let mu_ps = build_mu_ps(mu, &f_ps, Some(&sigma))?;
    Ok(ConstructionResult {
        config: config.clone(),
        params,
        source: mu.clone(),
        diameter,
        f_p,
        f_ps,
        targets,
        cover,
        balls,
        patches,
        patch_measure,
        background,
        sigma,
        mu_ps,
        nu,
    })
}

/// Run every `(p, s)` pair; pairs whose pipeline fails are reported with their error.
pub fn construction_sweep(
    mu: &DiscreteMeasure,
    base: &ConstructionConfig,
    values: &[u32],
) -> Vec<((u32, u32), Result<ConstructionResult>)> {
    let mut out = Vec::new();
    for &p in values {
        for &s in values {
            let cfg = ConstructionConfig { p, s, ..base.clone() };
            out.push(((p, s), run_construction(mu, &cfg)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_segment, mixed_test_measure, MixedSpec};

    #[test]
    fn trivial_segment_has_no_patches() {
        let seg = gen_segment(256, 2).unwrap();
        let r = run_construction(&seg, &ConstructionConfig::new(2, 2)).unwrap();
        assert_eq!(r.f_ps.len(), seg.len());
        assert!(r.cover.is_none() && r.patches.is_empty() && r.nu.nu.is_none());
        assert_eq!(r.mu_ps.len(), r.sigma.len() + seg.len());
    }

    #[test]
    fn mixed_measure_has_patches() {
        let mu = mixed_test_measure(&MixedSpec::default()).unwrap();
        let r = run_construction(&mu, &ConstructionConfig::new(2, 2)).unwrap();
        assert!(!r.targets.is_empty());
        let cover = r.cover.as_ref().unwrap();
        assert_eq!(r.patches.len(), cover.len());
        assert_eq!(r.nu.coefficients.len(), cover.len());
        for (k, &c) in cover.centers.iter().enumerate() {
            assert!(r.f_p.contains(&c));
            assert!((r.nu.coefficients[k] * r.nu.ball_masses[k] - r.patches[k].weight).abs() <= 1e-12 * r.patches[k].weight);
        }
    }

    #[test]
    fn scaled_coefficient_rebuilds_nu() {
        let mu = mixed_test_measure(&MixedSpec::default()).unwrap();
        let r = run_construction(&mu, &ConstructionConfig::new(2, 2)).unwrap();
        let c = r.with_scaled_coefficient(0, 2.0).unwrap();
        assert_eq!(c.coefficients()[0], 2.0 * r.coefficients()[0]);
        let (a, b) = (r.nu.nu.as_ref().unwrap(), c.nu.nu.as_ref().unwrap());
        let first = r.nu.labels.iter().position(|&l| l == 0).unwrap();
        assert_eq!(b.weight(first), 2.0 * a.weight(first));
    }
}
