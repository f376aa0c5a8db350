//! On-disk form of a construction: measure files plus `manifest.toml`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::patches::{BackgroundPlane, PlanarPatch};
use super::verify::{Diagnostics, VerificationReport};
use super::{ConstructionConfig, ConstructionResult};
use crate::measure::{write_measure_string, DiscreteMeasure};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub config: ConstructionConfig,
    pub diameter: f64,
    pub grid: Vec<f64>,
    pub f_p_count: usize,
    pub f_ps_count: usize,
    pub target_count: usize,
    pub f_p: Vec<usize>,
    pub f_ps: Vec<usize>,
    pub centers: Vec<usize>,
    pub radii: Vec<f64>,
    pub colors: Vec<usize>,
    pub n_colors: usize,
    pub max_overlap: usize,
    pub coefficients: Vec<f64>,
    pub sigma_points: usize,
    pub mu_ps_points: usize,
    pub nu_points: usize,
    pub background: BackgroundPlane,
    pub patches: Vec<PlanarPatch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

impl Manifest {
    pub fn new(r: &ConstructionResult, verification: Option<VerificationReport>, diagnostics: Option<Diagnostics>) -> Self {
        let cover = r.cover.as_ref();
        Manifest {
            config: r.config.clone(),
            diameter: r.diameter,
            grid: r.params.grid.radii().to_vec(),
            f_p_count: r.f_p.len(),
            f_ps_count: r.f_ps.len(),
            target_count: r.targets.len(),
            f_p: r.f_p.clone(),
            f_ps: r.f_ps.clone(),
            centers: cover.map(|c| c.centers.clone()).unwrap_or_default(),
            radii: cover.map(|c| c.radii.clone()).unwrap_or_default(),
            colors: cover.map(|c| c.colors.clone()).unwrap_or_default(),
            n_colors: cover.map_or(0, |c| c.n_colors),
            max_overlap: cover.map_or(0, |c| c.max_overlap),
            coefficients: r.nu.coefficients.clone(),
            sigma_points: r.sigma.len(),
            mu_ps_points: r.mu_ps.len(),
            nu_points: r.nu.nu.as_ref().map_or(0, DiscreteMeasure::len),
            background: r.background.clone(),
            patches: r.patches.clone(),
            verification,
            diagnostics,
        }
    }

    pub fn to_toml(&self, header: &[String]) -> Result<String> {
        let body = toml::to_string(self)
            .map_err(|e| Error::Precondition(format!("manifest serialisation failed: {e}")))?;
        let mut out = String::new();
        for h in header {
            out.push_str("# ");
            out.push_str(h);
            out.push('\n');
        }
        out.push_str(&body);
        Ok(out)
    }
}

/// Write `contents` through a temporary file in the same directory, then rename.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Write `sigma.txt`, `mu_ps.txt`, `nu.txt` (when ν is nonempty) and `manifest.toml` into `dir`.
pub fn write_result_dir(
    r: &ConstructionResult,
    verification: Option<VerificationReport>,
    diagnostics: Option<Diagnostics>,
    header: &[String],
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_atomic(&dir.join("sigma.txt"), write_measure_string(&r.sigma, header).as_bytes())?;
    write_atomic(&dir.join("mu_ps.txt"), write_measure_string(&r.mu_ps, header).as_bytes())?;
    if let Some(nu) = &r.nu.nu {
        write_atomic(&dir.join("nu.txt"), write_measure_string(nu, header).as_bytes())?;
    }
    let m = Manifest::new(r, verification, diagnostics);
    write_atomic(&dir.join("manifest.toml"), m.to_toml(header)?.as_bytes())
}
