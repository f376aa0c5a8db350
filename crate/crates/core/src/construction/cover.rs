//! Density subsets and the bounded-overlap ball cover.

use serde::Serialize;

use crate::exec::Exec;
use crate::measure::{restrict_indices, support_diameter, DiscreteMeasure, ScaleGrid};
use crate::spatial::dist;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DensitySubsetParams {
    pub p: u32,
    pub s: u32,
    pub grid: ScaleGrid,
}

impl DensitySubsetParams {
    /// Grid of `count` radii from `floor_factor · h` up to the support diameter.
    pub fn for_measure(mu: &DiscreteMeasure, p: u32, s: u32, count: usize, floor_factor: f64) -> Result<Self> {
        if p == 0 || s == 0 {
            return Err(Error::Precondition("p and s must be >= 1".into()));
        }
        let diam = support_diameter(mu);
        let floor = floor_factor * mu.resolution();
        let grid = if diam == 0.0 {
            ScaleGrid::from_radii(vec![mu.resolution()])?
        } else if floor >= diam {
            ScaleGrid::from_radii(vec![diam])?
        } else {
            ScaleGrid::geometric(floor, diam, count)?
        };
        Ok(DensitySubsetParams { p, s, grid })
    }
}

fn passes(mu: &DiscreteMeasure, x: &[f64], grid: &ScaleGrid, threshold: f64, index: &crate::measure::BallIndex<'_>) -> bool {
    let n = mu.hausdorff_dim() as i32;
    grid.radii()
        .iter()
        .all(|&r| index.ball_mass(x, r) >= r.powi(n) * threshold)
}

/// Points with μ(B(x,r)) ≥ r^n/p at every grid radius. A one-point measure returns itself.
pub fn extract_fp(mu: &DiscreteMeasure, params: &DensitySubsetParams) -> Vec<usize> {
    if mu.len() == 1 {
        return vec![0];
    }
    let index = mu.index();
    let t = 1.0 / params.p as f64;
    let keep = Exec::default().map(mu.len(), |i| passes(mu, mu.point(i), &params.grid, t, &index));
    (0..mu.len()).filter(|&i| keep[i]).collect()
}

/// Points of `F_p` with μ(F_p ∩ B(x,r)) ≥ r^n/(ps) at every grid radius.
pub fn extract_fps(mu: &DiscreteMeasure, fp: &[usize], params: &DensitySubsetParams) -> Vec<usize> {
    if fp.is_empty() {
        return Vec::new();
    }
    let sub = restrict_indices(mu, fp).expect("nonempty selection");
    if sub.len() == 1 {
        return fp.to_vec();
    }
    let index = sub.index();
    let t = 1.0 / (params.p as f64 * params.s as f64);
    let keep = Exec::default().map(sub.len(), |k| passes(&sub, sub.point(k), &params.grid, t, &index));
    fp.iter().zip(keep).filter(|(_, k)| *k).map(|(&i, _)| i).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverReport {
    /// Indices into the source measure, in selection order.
    pub centers: Vec<usize>,
    /// `d(x) = dist(x, exclusion)/10` for each center; the cover balls are `B(x, d(x))`.
    pub radii: Vec<f64>,
    /// Color class per center, in `1..=n_colors`.
    pub colors: Vec<usize>,
    pub max_overlap: usize,
    pub n_colors: usize,
    pub overlap_cap: usize,
}

impl CoverReport {
    /// Radius `r(x) = d(x)/2` of the comparison ball `B_x`.
    pub fn half_radius(&self, k: usize) -> f64 {
        0.5 * self.radii[k]
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

pub fn default_overlap_cap(dim: usize) -> usize {
    5usize.pow(dim as u32)
}

/// `d(x)` for every target.
pub fn distance_function(mu: &DiscreteMeasure, targets: &[usize], exclusion: &[usize]) -> Result<Vec<f64>> {
    if exclusion.is_empty() {
        return Err(Error::EmptyExclusion);
    }
    let ex = restrict_indices(mu, exclusion)?;
    let index = ex.index();
    Ok(Exec::default().map(targets.len(), |k| index.nearest(mu.point(targets[k])).0 / 10.0))
}

/// Greedy cover of `targets` by balls `B(x, d(x))`, largest `d` first, skipping
/// targets already covered; then greedy coloring into pairwise-disjoint families.
pub fn besicovitch_cover(
    mu: &DiscreteMeasure,
    targets: &[usize],
    exclusion: &[usize],
    overlap_cap: usize,
) -> Result<CoverReport> {
    let dvals = distance_function(mu, targets, exclusion)?;
    if let Some(k) = dvals.iter().position(|d| *d == 0.0) {
        return Err(Error::Precondition(format!(
            "target {} coincides with an excluded point",
            targets[k]
        )));
    }
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| dvals[b].total_cmp(&dvals[a]).then(targets[a].cmp(&targets[b])));
    let mut centers: Vec<usize> = Vec::new();
    let mut radii: Vec<f64> = Vec::new();
    for &k in &order {
        let x = mu.point(targets[k]);
        let covered = centers
            .iter()
            .zip(&radii)
            .any(|(&c, &r)| dist(mu.point(c), x) <= r);
        if !covered {
            centers.push(targets[k]);
            radii.push(dvals[k]);
        }
    }
    let mut colors = vec![0usize; centers.len()];
    let mut n_colors = 0;
    for a in 0..centers.len() {
        let mut color = 1;
        loop {
            let clash = (0..a).any(|b| {
                colors[b] == color && dist(mu.point(centers[a]), mu.point(centers[b])) <= radii[a] + radii[b]
            });
            if !clash {
                break;
            }
            color += 1;
        }
        colors[a] = color;
        n_colors = n_colors.max(color);
    }
    let probe: Vec<usize> = targets.iter().chain(&centers).copied().collect();
    let max_overlap = Exec::default()
        .map(probe.len(), |k| {
            let y = mu.point(probe[k]);
            centers
                .iter()
                .zip(&radii)
                .filter(|(&c, &r)| dist(mu.point(c), y) <= r)
                .count()
        })
        .into_iter()
        .max()
        .unwrap_or(0);
    if max_overlap > overlap_cap {
        return Err(Error::OverlapCap {
            overlap: max_overlap,
            cap: overlap_cap,
        });
    }
    Ok(CoverReport {
        centers,
        radii,
        colors,
        max_overlap,
        n_colors,
        overlap_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_segment, gen_union};

    fn pts(coords: &[[f64; 2]]) -> DiscreteMeasure {
        let c: Vec<f64> = coords.iter().flatten().copied().collect();
        DiscreteMeasure::new(2, 1, c, vec![1.0; coords.len()], 0.01).unwrap()
    }

    #[test]
    fn fp_examples() {
        let seg = gen_segment(512, 2).unwrap();
        let params = DensitySubsetParams::for_measure(&seg, 2, 1, 24, 4.0).unwrap();
        assert_eq!(extract_fp(&seg, &params).len(), seg.len());

        let one = DiscreteMeasure::new(2, 1, vec![0.0, 0.0], vec![1.0], 1.0).unwrap();
        let params = DensitySubsetParams::for_measure(&one, 2, 1, 24, 4.0).unwrap();
        assert_eq!(extract_fp(&one, &params), vec![0]);

        let out = DiscreteMeasure::new(2, 1, vec![0.5, 0.5], vec![1e-6], 1.0).unwrap();
        let mixed = seg.concat(&out).unwrap();
        let params = DensitySubsetParams::for_measure(&mixed, 2, 1, 24, 4.0).unwrap();
        let fp = extract_fp(&mixed, &params);
        assert!(!fp.contains(&seg.len()));
        assert_eq!(fp.len(), seg.len());
    }

    #[test]
    fn fps_examples() {
        let seg = gen_segment(256, 2).unwrap();
        let params = DensitySubsetParams::for_measure(&seg, 2, 1, 24, 4.0).unwrap();
        let fp = extract_fp(&seg, &params);
        assert_eq!(extract_fps(&seg, &fp, &params), fp);
        assert!(extract_fps(&seg, &[], &params).is_empty());

        let two = gen_union(&[seg.clone(), seg], 0.5).unwrap();
        let params = DensitySubsetParams::for_measure(&two, 2, 2, 24, 4.0).unwrap();
        let fp = extract_fp(&two, &params);
        assert_eq!(fp.len(), two.len());
        assert_eq!(extract_fps(&two, &fp, &params).len(), two.len());
    }

    #[test]
    fn cover_single_ball() {
        let mu = pts(&[[0.0, 0.0], [10.0, 0.0]]);
        let c = besicovitch_cover(&mu, &[0], &[1], 25).unwrap();
        assert_eq!(c.centers, vec![0]);
        assert_eq!(c.radii, vec![1.0]);
        assert_eq!((c.n_colors, c.colors.clone()), (1, vec![1]));
    }

    #[test]
    fn cover_two_far_points_share_color() {
        let mu = pts(&[[0.0, 0.0], [100.0, 0.0], [50.0, 300.0]]);
        let c = besicovitch_cover(&mu, &[0, 1], &[2], 25).unwrap();
        assert_eq!(c.centers.len(), 2);
        assert_eq!(c.colors, vec![1, 1]);
    }

    #[test]
    fn cover_circle() {
        let mut coords: Vec<[f64; 2]> = (0..50)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 50.0;
                [t.cos(), t.sin()]
            })
            .collect();
        coords.push([0.0, 0.0]);
        let mu = pts(&coords);
        let targets: Vec<usize> = (0..50).collect();
        let c = besicovitch_cover(&mu, &targets, &[50], 25).unwrap();
        assert!(c.n_colors >= 2);
        assert!(c.max_overlap <= 25);
        for &t in &targets {
            assert!(c
                .centers
                .iter()
                .zip(&c.radii)
                .any(|(&x, &r)| dist(mu.point(x), mu.point(t)) <= r));
        }
        for a in 0..c.len() {
            for b in 0..a {
                if c.colors[a] == c.colors[b] {
                    assert!(dist(mu.point(c.centers[a]), mu.point(c.centers[b])) > c.radii[a] + c.radii[b]);
                }
            }
        }
    }

    #[test]
    fn empty_exclusion_is_an_error() {
        let mu = pts(&[[0.0, 0.0]]);
        assert!(matches!(besicovitch_cover(&mu, &[0], &[], 25), Err(Error::EmptyExclusion)));
    }

    #[test]
    fn overlap_cap_enforced() {
        let mut coords: Vec<[f64; 2]> = (0..50)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 50.0;
                [t.cos(), t.sin()]
            })
            .collect();
        coords.push([0.0, 0.0]);
        let mu = pts(&coords);
        let targets: Vec<usize> = (0..50).collect();
        let c = besicovitch_cover(&mu, &targets, &[50], 25).unwrap();
        if c.max_overlap > 1 {
            assert!(matches!(
                besicovitch_cover(&mu, &targets, &[50], c.max_overlap - 1),
                Err(Error::OverlapCap { .. })
            ));
        }
    }
}
