//! Deterministic test measures.
//!
//! Cantor-type sets are represented by their level-k cell centres, each
//! carrying the cell's share of the mass. The level is the object under study:
//! a level-k measure is not a quadrature of the limit set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::measure::{ad_constants, DiscreteMeasure, ScaleGrid};
use crate::{Error, Result};

pub const MAX_CANTOR_LEVEL: usize = 12;

/// Uniform grid on the axis n-plane patch `[0, extent]^n × {0}^{d-n}`, weight `spacing^n`.
pub fn gen_plane(n: usize, d: usize, extent: f64, spacing: f64) -> Result<DiscreteMeasure> {
    if n == 0 || n >= d {
        return Err(Error::Precondition(format!("plane needs 0 < n < d, got n={n}, d={d}")));
    }
    if !(extent > 0.0 && spacing > 0.0 && spacing <= extent) {
        return Err(Error::Precondition("plane needs 0 < spacing <= extent".into()));
    }
    let m = (extent / spacing).round() as usize + 1;
    let count = m.checked_pow(n as u32).filter(|c| *c <= 50_000_000).ok_or_else(|| {
        Error::Precondition("plane point count too large".into())
    })?;
    let mut coords = Vec::with_capacity(count * d);
    let mut idx = vec![0usize; n];
    for _ in 0..count {
        for a in 0..d {
            coords.push(if a < n { idx[a] as f64 * spacing } else { 0.0 });
        }
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
    }
    DiscreteMeasure::new(d, n, coords, vec![spacing.powi(n as i32); count], spacing)
}

/// `count` midpoints of a uniform partition of `[0,1] × {0}^{d-1}`, unit total mass, `h = 1/count`.
pub fn gen_segment(count: usize, d: usize) -> Result<DiscreteMeasure> {
    if count == 0 || d < 2 {
        return Err(Error::Precondition("segment needs count >= 1 and d >= 2".into()));
    }
    let h = 1.0 / count as f64;
    let mut coords = vec![0.0; count * d];
    for i in 0..count {
        coords[i * d] = (i as f64 + 0.5) * h;
    }
    DiscreteMeasure::new(d, 1, coords, vec![h; count], h)
}

/// Parameters for [`gen_lipschitz_graph`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    /// Graph dimension, 1 or 2; ambient dimension is `n + 1`.
    pub n: usize,
    pub slope_bound: f64,
    pub extent: f64,
    pub spacing: f64,
    pub seed: u64,
    /// Number of disjoint tents per axis.
    pub bumps: usize,
}

impl GraphSpec {
    pub fn new(n: usize, slope_bound: f64, extent: f64, spacing: f64, seed: u64) -> Self {
        GraphSpec {
            n,
            slope_bound,
            extent,
            spacing,
            seed,
            bumps: 8,
        }
    }
}

/// Piecewise-linear profile on `[0, extent]`: one tent per equal sub-interval,
/// signed heights drawn so that every slope is at most `slope`.
fn tent_profile(rng: &mut ChaCha8Rng, extent: f64, bumps: usize, slope: f64) -> impl Fn(f64) -> f64 {
    let width = extent / bumps as f64;
    let heights: Vec<f64> = (0..bumps)
        .map(|_| rng.gen_range(-1.0..=1.0) * slope * 0.5 * width)
        .collect();
    move |x: f64| {
        let k = ((x / width).floor() as isize).clamp(0, bumps as isize - 1) as usize;
        let t = (x - k as f64 * width) / width;
        let tent = 1.0 - (2.0 * t - 1.0).abs();
        heights[k] * tent.max(0.0)
    }
}

/// Graph of a seeded piecewise-linear function over `[0, extent]^n` in `R^{n+1}`.
///
/// Weights are `spacing^n · sqrt(1 + |∇φ|²)` with the gradient taken from
/// adjacent grid differences, so `L = 0` reproduces [`gen_plane`] exactly and
/// for `n = 1` the total mass lies in `[extent, (extent + spacing)·sqrt(1 + L²)]`.
pub fn gen_lipschitz_graph(spec: &GraphSpec) -> Result<DiscreteMeasure> {
    let GraphSpec {
        n,
        slope_bound,
        extent,
        spacing,
        seed,
        bumps,
    } = *spec;
    if !(n == 1 || n == 2) {
        return Err(Error::Precondition("graphs are supported for n = 1, 2".into()));
    }
    if !(slope_bound >= 0.0 && slope_bound.is_finite()) || bumps == 0 {
        return Err(Error::Precondition("slope bound must be >= 0 and bumps >= 1".into()));
    }
    let base = gen_plane(n, n + 1, extent, spacing)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis_slope = slope_bound / (n as f64).sqrt();
    let profiles: Vec<_> = (0..n)
        .map(|_| tent_profile(&mut rng, extent, bumps, axis_slope))
        .collect();
    let m = (extent / spacing).round() as usize + 1;
    let height = |idx: &[usize]| -> f64 {
        idx.iter()
            .zip(&profiles)
            .map(|(&i, p)| p(i as f64 * spacing))
            .sum::<f64>()
            + 0.0
    };
    let d = n + 1;
    let mut coords = base.coords().to_vec();
    let mut weights = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let idx: Vec<usize> = (0..n).map(|a| (base.point(i)[a] / spacing).round() as usize).collect();
        coords[i * d + n] = height(&idx);
        let mut grad2 = 0.0;
        for a in 0..n {
            let mut sq = 0.0;
            let mut cnt = 0.0;
            for (lo, hi) in [(idx[a].wrapping_sub(1), idx[a]), (idx[a], idx[a] + 1)] {
                if lo < m && hi < m {
                    let mut il = idx.clone();
                    let mut ih = idx.clone();
                    il[a] = lo;
                    ih[a] = hi;
                    let s = (height(&ih) - height(&il)) / spacing;
                    sq += s * s;
                    cnt += 1.0;
                }
            }
            if cnt > 0.0 {
                grad2 += sq / cnt;
            }
        }
        weights.push(spacing.powi(n as i32) * (1.0 + grad2).sqrt());
    }
    DiscreteMeasure::new(d, n, coords, weights, spacing)
}

/// Planar Cantor set with four corner cells per level: cell side shrinks by `ratios[i]`
/// at level `i`. Points are level-k cell centres of weight `4^{-k}`; `h` is the final side.
pub fn gen_cantor(ratios: &[f64]) -> Result<DiscreteMeasure> {
    if ratios.len() > MAX_CANTOR_LEVEL {
        return Err(Error::Precondition(format!(
            "Cantor depth {} exceeds the point-count guard {MAX_CANTOR_LEVEL}",
            ratios.len()
        )));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 0.5)) {
        return Err(Error::Precondition(format!("ratio {r} outside (0, 1/2)")));
    }
    let mut pts = vec![[0.5f64, 0.5f64]];
    let mut side = 1.0;
    for &l in ratios {
        let ns = side * l;
        let off = 0.5 * (side - ns);
        let mut next = Vec::with_capacity(pts.len() * 4);
        for p in &pts {
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    next.push([p[0] + sx * off, p[1] + sy * off]);
                }
            }
        }
        pts = next;
        side = ns;
    }
    let w = 1.0 / pts.len() as f64;
    let coords: Vec<f64> = pts.iter().flatten().copied().collect();
    let count = pts.len();
    DiscreteMeasure::new(2, 1, coords, vec![w; count], side)
}

/// Four-corners Cantor set at level k (ratio 1/4). Level 0 is the unit-square centre.
pub fn gen_four_corners(k: usize) -> Result<DiscreteMeasure> {
    gen_cantor(&vec![0.25; k])
}

/// Ratio list alternating `a_i` and `1/(16 a_i)`: two levels shrink the side by
/// exactly 1/16, as four-corners does, but the intermediate scale is distorted.
pub fn oscillating_ratios(a: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|&x| [x, 1.0 / (16.0 * x)]).collect()
}

/// The default vanishing-density schedule used in experiments.
pub fn default_sparse_ratios() -> Vec<f64> {
    oscillating_ratios(&[0.26, 0.36, 0.46])
}

#[derive(Clone, Debug)]
pub struct SparseCantor {
    pub measure: DiscreteMeasure,
    /// Lower density constant of the depth-2 prefix.
    pub lower_shallow: f64,
    /// Lower density constant at full depth.
    pub lower_deep: f64,
    /// `lower_deep < lower_shallow / 2`. False flags a non-decaying schedule.
    pub decaying: bool,
}

/// Lower density constant over 48 geometric radii from the resolution to the diameter.
fn cantor_lower(mu: &DiscreteMeasure) -> Result<f64> {
    let diam = crate::measure::support_diameter(mu);
    if mu.len() < 2 || diam <= mu.resolution() {
        return Ok(f64::INFINITY);
    }
    let grid = ScaleGrid::geometric(mu.resolution(), diam, 48)?;
    Ok(ad_constants(mu, &grid)?.lower)
}

/// Cantor measure with per-level ratios, checked for decaying lower density.
pub fn gen_sparse_cantor(ratios: &[f64]) -> Result<SparseCantor> {
    let measure = gen_cantor(ratios)?;
    if ratios.len() < 3 {
        let lower = cantor_lower(&measure)?;
        return Ok(SparseCantor {
            measure,
            lower_shallow: lower,
            lower_deep: lower,
            decaying: false,
        });
    }
    let shallow = gen_cantor(&ratios[..2])?;
    let lower_shallow = cantor_lower(&shallow)?;
    let lower_deep = cantor_lower(&measure)?;
    Ok(SparseCantor {
        measure,
        lower_shallow,
        lower_deep,
        decaying: lower_deep < 0.5 * lower_shallow,
    })
}

/// Concatenate translated copies, stacked along the last axis with gaps of at least `separation`.
pub fn gen_union(parts: &[DiscreteMeasure], separation: f64) -> Result<DiscreteMeasure> {
    let first = parts.first().ok_or(Error::EmptyMeasure)?;
    if !(separation >= 0.0) {
        return Err(Error::Precondition("separation must be >= 0".into()));
    }
    let d = first.ambient_dim();
    let mut out = first.clone();
    let mut top = first.bounding_box().1[d - 1];
    for part in &parts[1..] {
        let (lo, hi) = part.bounding_box();
        let mut shift = vec![0.0; d];
        shift[d - 1] = top + separation - lo[d - 1];
        let moved = part.translate(&shift)?;
        top = hi[d - 1] + shift[d - 1];
        out = out.concat(&moved)?;
    }
    Ok(out)
}

/// Parameters of the mixed measure: a full-density segment plus a sparse row of
/// light dust and heavier atoms above it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedSpec {
    pub segment_points: usize,
    pub row_height: f64,
    /// Dust spacing in units of the segment spacing.
    pub dust_step: usize,
    /// Dust mass as a fraction of the dust spacing.
    pub dust_density: f64,
    pub atom_spacing: f64,
    /// Atom mass as a fraction of the atom spacing.
    pub atom_density: f64,
}

impl Default for MixedSpec {
    fn default() -> Self {
        MixedSpec {
            segment_points: 1024,
            row_height: 0.25,
            dust_step: 8,
            dust_density: 0.2,
            atom_spacing: 0.04,
            atom_density: 0.15,
        }
    }
}

/// Segment `[0,1]×{0}` plus a row at height `row_height` carrying dust (too light for
/// density 1/2 at small scales) and atoms (dense enough alone, but isolated from
/// each other at intermediate scales). Dust within `dust_step/2` segment spacings of an
/// atom is dropped.
pub fn mixed_test_measure(spec: &MixedSpec) -> Result<DiscreteMeasure> {
    let seg = gen_segment(spec.segment_points, 2)?;
    let h = seg.resolution();
    let dust_gap = spec.dust_step as f64 * h;
    let atoms: Vec<f64> = {
        let count = (1.0 / spec.atom_spacing).round() as usize;
        (0..count)
            .map(|m| (m as f64 + 0.5) * spec.atom_spacing)
            .collect()
    };
    let mut coords = seg.coords().to_vec();
    let mut weights = seg.weights().to_vec();
    let dust_count = (1.0 / dust_gap).floor() as usize;
    for j in 0..dust_count {
        let x = (j as f64 + 0.5) * dust_gap;
        if atoms.iter().any(|a| (a - x).abs() < 0.5 * dust_gap) {
            continue;
        }
        coords.extend([x, spec.row_height]);
        weights.push(spec.dust_density * dust_gap);
    }
    for &a in &atoms {
        coords.extend([a, spec.row_height]);
        weights.push(spec.atom_density * spec.atom_spacing);
    }
    DiscreteMeasure::new(2, 1, coords, weights, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{ball_mass, density_profile, total_mass};

    #[test]
    fn plane_examples() {
        let p = gen_plane(1, 2, 1.0, 0.25).unwrap();
        assert_eq!(p.len(), 5);
        assert!((total_mass(&p) - 1.25).abs() < 1e-12);
        let q = gen_plane(2, 3, 1.0, 0.5).unwrap();
        assert_eq!(q.len(), 9);
        assert!(q.weights().iter().all(|w| *w == 0.25));
        assert!((total_mass(&q) - 2.25).abs() < 1e-12);
        assert!(gen_plane(2, 2, 1.0, 0.5).is_err());
    }

    #[test]
    fn plane_center_density() {
        let p = gen_plane(1, 2, 1.0, 1.0 / 256.0).unwrap();
        let g = ScaleGrid::geometric(0.05, 0.2, 4).unwrap();
        let prof = density_profile(&p, &[0.5, 0.0], &g).unwrap();
        assert!(prof.ratios.iter().all(|(_, q)| (q - 2.0).abs() < 0.05));
    }

    #[test]
    fn flat_graph_is_plane() {
        for n in [1, 2] {
            let g = gen_lipschitz_graph(&GraphSpec::new(n, 0.0, 1.0, 1.0 / 16.0, 7)).unwrap();
            let p = gen_plane(n, n + 1, 1.0, 1.0 / 16.0).unwrap();
            assert_eq!(g, p);
        }
    }

    #[test]
    fn graph_is_deterministic_and_mass_bounded() {
        let spec = GraphSpec::new(1, 1.0, 1.0, 1.0 / 512.0, 42);
        let a = gen_lipschitz_graph(&spec).unwrap();
        let b = gen_lipschitz_graph(&spec).unwrap();
        assert_eq!(a, b);
        let c = gen_lipschitz_graph(&GraphSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, c);
        let m = total_mass(&a);
        assert!(m >= 1.0 && m <= (1.0 + spec.spacing) * 2f64.sqrt(), "{m}");
        for w in a.points().collect::<Vec<_>>().windows(2) {
            assert!(((w[1][1] - w[0][1]) / spec.spacing).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn four_corners_examples() {
        let z = gen_four_corners(0).unwrap();
        assert_eq!((z.len(), z.point(0), z.weight(0)), (1, &[0.5, 0.5][..], 1.0));
        let one = gen_four_corners(1).unwrap();
        let mut pts: Vec<[f64; 2]> = one.points().map(|p| [p[0], p[1]]).collect();
        pts.sort_by(|a, b| a[1].total_cmp(&b[1]).then(a[0].total_cmp(&b[0])));
        assert_eq!(
            pts,
            vec![[0.125, 0.125], [0.875, 0.125], [0.125, 0.875], [0.875, 0.875]]
        );
        assert!(one.weights().iter().all(|w| *w == 0.25));
        for k in 0..7 {
            let m = gen_four_corners(k).unwrap();
            assert_eq!(m.len(), 4usize.pow(k as u32));
            assert!((total_mass(&m) - 1.0).abs() < 1e-12);
            assert_eq!(m.resolution(), 4f64.powi(-(k as i32)));
        }
        assert!(gen_four_corners(13).is_err());
    }

    #[test]
    fn four_corners_self_similarity() {
        for k in 0..=5usize {
            let m = gen_four_corners(k).unwrap();
            for j in 0..=k {
                let r = 2f64.sqrt() * 4f64.powi(-(j as i32));
                let expect = 4f64.powi((k - j) as i32) / 4f64.powi(k as i32);
                for x in m.points().step_by(7) {
                    let got = ball_mass(&m, x, r);
                    assert!((got - expect).abs() < 1e-12, "k={k} j={j}");
                }
            }
        }
    }

    #[test]
    fn sparse_cantor_examples() {
        let control = gen_sparse_cantor(&[0.25; 6]).unwrap();
        assert!(!control.decaying);
        let sparse = gen_sparse_cantor(&default_sparse_ratios()).unwrap();
        assert!(sparse.decaying, "{} vs {}", sparse.lower_deep, sparse.lower_shallow);
        assert_eq!(sparse.measure.len(), 4096);
        let empty = gen_sparse_cantor(&[]).unwrap();
        assert_eq!(empty.measure.len(), 1);
        assert_eq!(total_mass(&empty.measure), 1.0);
    }

    #[test]
    fn ratios_below_quarter_raise_density() {
        let r: Vec<f64> = (4..10).map(|k| 1.0 / k as f64).collect();
        let s = gen_sparse_cantor(&r).unwrap();
        assert!(!s.decaying);
        assert!(s.lower_deep > s.lower_shallow);
    }

    #[test]
    fn union_examples() {
        let a = gen_four_corners(2).unwrap();
        assert_eq!(gen_union(&[a.clone()], 10.0).unwrap(), a);
        let u = gen_union(&[a.clone(), a.clone()], 10.0).unwrap();
        assert!((total_mass(&u) - 2.0).abs() < 1e-12);
        let seg = gen_segment(64, 2).unwrap();
        let u = gen_union(&[seg, a], 10.0).unwrap();
        assert!(crate::measure::support_diameter(&u) >= 10.0);
    }

    #[test]
    fn mixed_measure_layout() {
        let mu = mixed_test_measure(&MixedSpec::default()).unwrap();
        let h = 1.0 / 1024.0;
        let row: Vec<usize> = (0..mu.len()).filter(|&i| mu.point(i)[1] > 0.0).collect();
        let atoms: Vec<usize> = row.iter().copied().filter(|&i| mu.weight(i) > 0.005).collect();
        assert_eq!(atoms.len(), 25);
        for &i in &row {
            for &a in &atoms {
                if i != a {
                    assert!((mu.point(i)[0] - mu.point(a)[0]).abs() >= 4.0 * h - 1e-15);
                }
            }
        }
    }
}
