//! Planar patches `P_x` and the background plane.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::cover::CoverReport;
use crate::measure::{DiscreteMeasure, BallIndex};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanePolicy {
    /// Least-squares n-plane through the centre fitted to the μ-points of the ball.
    LeastSquares,
    /// Span of the first n coordinate axes.
    FixedAxes,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanarPatch {
    pub center: Vec<f64>,
    pub radius: f64,
    /// n orthonormal d-vectors.
    pub basis: Vec<Vec<f64>>,
    pub spacing: f64,
    /// Range of this patch's samples inside the patch measure.
    pub start: usize,
    pub end: usize,
    /// Exact n-volume of the disk, equal to the sum of the sample weights.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackgroundPlane {
    pub origin: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    /// Centre of the sampled square, on the plane.
    pub center: Vec<f64>,
    pub extent: f64,
    pub spacing: f64,
    pub count: usize,
}

/// Volume of the unit n-ball, `π^{n/2}/Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let mut k = n % 2;
    let mut out = if k == 0 { 1.0 } else { 2.0 };
    while k < n {
        k += 2;
        out *= 2.0 * std::f64::consts::PI / k as f64;
    }
    out
}

fn axes(n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|a| {
            let mut e = vec![0.0; d];
            e[a] = 1.0;
            e
        })
        .collect()
}

/// Top-n principal directions of `Σ w (y − c)(y − c)ᵀ`, sign-normalised; `None` if rank < n.
pub fn principal_basis(points: &[&[f64]], weights: &[f64], c: &[f64], n: usize) -> Option<Vec<Vec<f64>>> {
    let d = c.len();
    let mut m = DMatrix::<f64>::zeros(d, d);
    for (y, &w) in points.iter().zip(weights) {
        for a in 0..d {
            for b in 0..d {
                m[(a, b)] += w * (y[a] - c[a]) * (y[b] - c[b]);
            }
        }
    }
    let trace = m.trace();
    if !(trace > 0.0) {
        return None;
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    if eig.eigenvalues[order[n - 1]] <= 1e-12 * trace {
        return None;
    }
    let basis: Vec<Vec<f64>> = order[..n]
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = v
                .iter()
                .copied()
                .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect();
    Some(gram_schmidt(basis))
}

fn gram_schmidt(mut basis: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for i in 0..basis.len() {
        for j in 0..i {
            let dot: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
            let bj = basis[j].clone();
            basis[i].iter_mut().zip(&bj).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = basis[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        basis[i].iter_mut().for_each(|x| *x /= norm);
    }
    basis
}

/// Midpoints of a grid of `2·divisions` cells per axis over `[−r, r]^n` that lie in the closed n-ball.
fn disk_offsets(n: usize, radius: f64, divisions: usize) -> Vec<Vec<f64>> {
    let cells = 2 * divisions;
    let s = radius / divisions as f64;
    let total = cells.pow(n as u32);
    let mut out = Vec::new();
    for flat in 0..total {
        let mut rem = flat;
        let mut u = vec![0.0; n];
        for a in (0..n).rev() {
            u[a] = (rem % cells) as f64 * s + 0.5 * s - radius;
            rem /= cells;
        }
        if u.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius {
            out.push(u);
        }
    }
    out
}

fn embed(origin: &[f64], basis: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    let mut p = origin.to_vec();
    for (b, &ub) in basis.iter().zip(u) {
        for a in 0..p.len() {
            p[a] += ub * b[a];
        }
    }
    p
}

/// Discretised n-disks of radius `d(x)/2` around each cover centre, with sample
/// spacing `radius/divisions`, weights scaled to the exact disk volume.
/// Returns the patches and the patch measure (`None` without centres).
pub fn attach_patches(
    mu: &DiscreteMeasure,
    index: &BallIndex<'_>,
    cover: &CoverReport,
    policy: PlanePolicy,
    divisions: usize,
) -> Result<(Vec<PlanarPatch>, Option<DiscreteMeasure>)> {
    if divisions == 0 {
        return Err(Error::Precondition("patch divisions must be >= 1".into()));
    }
    let (n, d) = (mu.hausdorff_dim(), mu.ambient_dim());
    let vol = unit_ball_volume(n);
    let mut patches = Vec::with_capacity(cover.len());
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut finest = f64::INFINITY;
    for (k, &c) in cover.centers.iter().enumerate() {
        let x = mu.point(c);
        let radius = cover.half_radius(k);
        let basis = match policy {
            PlanePolicy::FixedAxes => axes(n, d),
            PlanePolicy::LeastSquares => {
                let idx = index.indices_in_ball(x, radius);
                let pts: Vec<&[f64]> = idx.iter().map(|&i| mu.point(i)).collect();
                let w: Vec<f64> = idx.iter().map(|&i| mu.weight(i)).collect();
                principal_basis(&pts, &w, x, n).unwrap_or_else(|| axes(n, d))
            }
        };
        let offsets = disk_offsets(n, radius, divisions);
        let weight = vol * radius.powi(n as i32);
        let each = weight / offsets.len() as f64;
        let start = weights.len();
        for u in &offsets {
            coords.extend(embed(x, &basis, u));
            weights.push(each);
        }
        let spacing = radius / divisions as f64;
        finest = finest.min(spacing);
        patches.push(PlanarPatch {
            center: x.to_vec(),
            radius,
            basis,
            spacing,
            start,
            end: weights.len(),
            weight,
        });
    }
    if patches.is_empty() {
        return Ok((patches, None));
    }
    let sigma = DiscreteMeasure::new(d, n, coords, weights, finest)?;
    Ok((patches, Some(sigma)))
}

/// Least-squares n-plane through `F_ps`, moved to pass through its first point and
/// sampled on a square of side `extent_factor · D` centred at the projection of μ's centroid.
pub fn background_plane(
    mu: &DiscreteMeasure,
    fps: &[usize],
    diameter: f64,
    extent_factor: f64,
    spacing: f64,
) -> Result<(BackgroundPlane, DiscreteMeasure)> {
    let first = *fps.first().ok_or(Error::EmptyMeasure)?;
    if !(spacing > 0.0) {
        return Err(Error::Precondition("background spacing must be positive".into()));
    }
    let (n, d) = (mu.hausdorff_dim(), mu.ambient_dim());
    let pts: Vec<&[f64]> = fps.iter().map(|&i| mu.point(i)).collect();
    let w: Vec<f64> = fps.iter().map(|&i| mu.weight(i)).collect();
    let wsum: f64 = w.iter().sum();
    let mut c = vec![0.0; d];
    for (p, wi) in pts.iter().zip(&w) {
        for a in 0..d {
            c[a] += wi * p[a] / wsum;
        }
    }
    let basis = principal_basis(&pts, &w, &c, n).unwrap_or_else(|| axes(n, d));
    let origin = mu.point(first).to_vec();
    let centroid = mu.centroid();
    let rel: Vec<f64> = centroid.iter().zip(&origin).map(|(a, b)| a - b).collect();
    let proj: Vec<f64> = basis
        .iter()
        .map(|b| b.iter().zip(&rel).map(|(x, y)| x * y).sum())
        .collect();
    let center = embed(&origin, &basis, &proj);
    let extent = (extent_factor * diameter).max(spacing);
    let m = (extent / spacing).ceil() as usize;
    let total = m.checked_pow(n as u32).filter(|t| *t <= 20_000_000).ok_or_else(|| {
        Error::Precondition("background plane sample count too large".into())
    })?;
    let mut coords = Vec::with_capacity(total * d);
    for flat in 0..total {
        let mut rem = flat;
        let mut u = vec![0.0; n];
        for a in (0..n).rev() {
            u[a] = ((rem % m) as f64 + 0.5) * spacing - 0.5 * m as f64 * spacing;
            rem /= m;
        }
        coords.extend(embed(&center, &basis, &u));
    }
    let plane = BackgroundPlane {
        origin,
        basis,
        center,
        extent: m as f64 * spacing,
        spacing,
        count: total,
    };
    let measure = DiscreteMeasure::new(d, n, coords, vec![spacing.powi(n as i32); total], spacing)?;
    Ok((plane, measure))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::total_mass;

    fn one_center_cover(radius: f64) -> CoverReport {
        CoverReport {
            centers: vec![0],
            radii: vec![2.0 * radius],
            colors: vec![1],
            max_overlap: 1,
            n_colors: 1,
            overlap_cap: 25,
        }
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn segment_patch_weight() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 0.0], vec![1.0], 0.1).unwrap();
        let idx = mu.index();
        let (p, sigma) = attach_patches(&mu, &idx, &one_center_cover(0.5), PlanePolicy::FixedAxes, 16).unwrap();
        let sigma = sigma.unwrap();
        assert!((total_mass(&sigma) - 1.0).abs() <= 1.0 / 16.0);
        assert_eq!(p[0].end - p[0].start, 32);
        for y in sigma.points() {
            assert!(y[1] == 0.0 && y[0].abs() <= 0.5);
        }
    }

    #[test]
    fn disk_patch_weight() {
        let mu = DiscreteMeasure::new(3, 2, vec![0.0, 0.0, 0.0], vec![1.0], 0.1).unwrap();
        let idx = mu.index();
        let (p, sigma) = attach_patches(&mu, &idx, &one_center_cover(1.0), PlanePolicy::FixedAxes, 16).unwrap();
        let m = total_mass(&sigma.unwrap());
        assert!((m / std::f64::consts::PI - 1.0).abs() < 0.05);
        assert!((p[0].weight - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn zero_centers_give_no_patches() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 0.0], vec![1.0], 0.1).unwrap();
        let idx = mu.index();
        let empty = CoverReport {
            centers: vec![],
            radii: vec![],
            colors: vec![],
            max_overlap: 0,
            n_colors: 0,
            overlap_cap: 25,
        };
        let (p, s) = attach_patches(&mu, &idx, &empty, PlanePolicy::LeastSquares, 16).unwrap();
        assert!(p.is_empty() && s.is_none());
    }

    #[test]
    fn least_squares_plane_follows_points() {
        let c: Vec<f64> = (0..21).flat_map(|i| {
            let t = (i as f64 - 10.0) * 0.01;
            [t, t]
        }).collect();
        let mu = DiscreteMeasure::new(2, 1, c, vec![1.0; 21], 0.01).unwrap();
        let idx = mu.index();
        let mut cover = one_center_cover(0.05);
        cover.centers = vec![10];
        let (p, sigma) = attach_patches(&mu, &idx, &cover, PlanePolicy::LeastSquares, 16).unwrap();
        let b = &p[0].basis[0];
        assert!((b[0] - b[1]).abs() < 1e-12 && (b[0] * b[0] + b[1] * b[1] - 1.0).abs() < 1e-12);
        for y in sigma.unwrap().points() {
            assert!((y[0] - y[1]).abs() < 1e-12);
        }
    }
}
