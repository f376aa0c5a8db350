//! Discrete measures and their geometric functionals.
//!
//! A [`DiscreteMeasure`] is a weighted point cloud standing in for `H^n` on a
//! set. Density-type quantities are evaluated on a finite [`ScaleGrid`] whose
//! floor must not go below the sampling resolution; every report carries the
//! grid bounds it was computed on.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::exec::Exec;
use crate::spatial::{dist, BoxTree};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    ambient_dim: usize,
    hausdorff_dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    resolution_h: f64,
}

impl DiscreteMeasure {
    /// Validate and build. `coords` is row-major with `ambient_dim` entries per point.
    pub fn new(
        ambient_dim: usize,
        hausdorff_dim: usize,
        coords: Vec<f64>,
        weights: Vec<f64>,
        resolution_h: f64,
    ) -> Result<Self> {
        if ambient_dim == 0 || hausdorff_dim == 0 {
            return Err(Error::InvalidMeasure("dimensions must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if coords.len() != weights.len() * ambient_dim {
            return Err(Error::InvalidMeasure(format!(
                "{} coordinates for {} points in R^{}",
                coords.len(),
                weights.len(),
                ambient_dim
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidMeasure(format!(
                "weight {} at index {i} is not positive and finite",
                weights[i]
            )));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                index: i / ambient_dim,
            });
        }
        if !(resolution_h.is_finite() && resolution_h > 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "resolution {resolution_h} must be positive"
            )));
        }
        let mu = DiscreteMeasure {
            ambient_dim,
            hausdorff_dim,
            coords,
            weights,
            resolution_h,
        };
        if mu.len() >= 2 && resolution_h > mu.diameter_lower_bound() {
            let diam = support_diameter(&mu);
            if diam > 0.0 && resolution_h > diam {
                return Err(Error::InvalidMeasure(format!(
                    "resolution {resolution_h} exceeds support diameter {diam}"
                )));
            }
        }
        Ok(mu)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn hausdorff_dim(&self) -> usize {
        self.hausdorff_dim
    }

    pub fn resolution(&self) -> f64 {
        self.resolution_h
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.ambient_dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Same points, weights multiplied by `factor > 0`.
    pub fn scale_mass(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.ambient_dim,
            self.hausdorff_dim,
            self.coords.clone(),
            self.weights.iter().map(|w| w * factor).collect(),
            self.resolution_h,
        )
    }

    /// Apply `map` to every point (rigid motions, dilations); weights scaled by `weight_factor`,
    /// resolution by `length_factor`.
    pub fn transform(
        &self,
        map: impl Fn(&[f64]) -> Vec<f64>,
        length_factor: f64,
        weight_factor: f64,
    ) -> Result<Self> {
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.points() {
            let q = map(p);
            assert_eq!(q.len(), self.ambient_dim);
            coords.extend(q);
        }
        Self::new(
            self.ambient_dim,
            self.hausdorff_dim,
            coords,
            self.weights.iter().map(|w| w * weight_factor).collect(),
            self.resolution_h * length_factor,
        )
    }

    pub fn translate(&self, offset: &[f64]) -> Result<Self> {
        self.transform(
            |p| p.iter().zip(offset).map(|(a, b)| a + b).collect(),
            1.0,
            1.0,
        )
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.ambient_dim];
        let mut hi = vec![f64::NEG_INFINITY; self.ambient_dim];
        for p in self.points() {
            for a in 0..self.ambient_dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    /// Weighted centroid.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.ambient_dim];
        for (p, w) in self.points().zip(&self.weights) {
            for a in 0..self.ambient_dim {
                c[a] += w * p[a];
            }
        }
        let m = total_mass(self);
        c.iter_mut().for_each(|x| *x /= m);
        c
    }

    fn diameter_lower_bound(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        let extent = lo.iter().zip(&hi).fold(0.0f64, |m, (l, h)| m.max(h - l));
        let p0 = self.point(0);
        let far = self.points().map(|p| dist(p, p0)).fold(0.0, f64::max);
        extent.max(far)
    }

    /// Build the ball-query index over this measure.
    pub fn index(&self) -> BallIndex<'_> {
        BallIndex::new(self)
    }

    /// Concatenate two measures with the same dimensions. Resolution is the smaller one.
    pub fn concat(&self, other: &DiscreteMeasure) -> Result<Self> {
        if self.ambient_dim != other.ambient_dim || self.hausdorff_dim != other.hausdorff_dim {
            return Err(Error::Precondition(
                "measures with different (n, d) cannot be combined".into(),
            ));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        Self::new(
            self.ambient_dim,
            self.hausdorff_dim,
            coords,
            weights,
            self.resolution_h.min(other.resolution_h),
        )
    }
}

/// Finite geometric progression of radii, possibly with extra radii inserted.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleGrid {
    radii: Vec<f64>,
}

impl ScaleGrid {
    pub fn geometric(r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_min.is_finite() && r_max.is_finite() && r_min < r_max) {
            return Err(Error::Precondition(format!(
                "scale grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if count < 2 {
            return Err(Error::Precondition("scale grid needs at least 2 radii".into()));
        }
        let ratio = (r_max / r_min).ln() / (count - 1) as f64;
        let mut radii: Vec<f64> = (0..count)
            .map(|i| r_min * (ratio * i as f64).exp())
            .collect();
        radii[0] = r_min;
        radii[count - 1] = r_max;
        Ok(ScaleGrid { radii })
    }

    /// Grid from explicit radii (sorted, deduplicated).
    pub fn from_radii(mut radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Precondition("radii must be positive and finite".into()));
        }
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        Ok(ScaleGrid { radii })
    }

    /// Copy of the grid that contains `r` exactly.
    pub fn with_radius(&self, r: f64) -> Self {
        let mut radii = self.radii.clone();
        if !radii.contains(&r) {
            radii.push(r);
            radii.sort_by(f64::total_cmp);
        }
        ScaleGrid { radii }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn r_min(&self) -> f64 {
        self.radii[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Ball queries backed by a box tree with aggregated node weights.
pub struct BallIndex<'a> {
    mu: &'a DiscreteMeasure,
    tree: BoxTree,
}

impl<'a> BallIndex<'a> {
    pub fn new(mu: &'a DiscreteMeasure) -> Self {
        let tree = BoxTree::build(mu.coords(), mu.weights(), mu.ambient_dim(), 16);
        BallIndex { mu, tree }
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        self.mu
    }

    /// μ(B(center, r)), closed ball.
    pub fn ball_mass(&self, center: &[f64], r: f64) -> f64 {
        let mut total = 0.0;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.tree.nodes[id];
            if node.min_dist(center) > r {
                continue;
            }
            if node.max_dist(center) <= r {
                total += node.weight;
                continue;
            }
            if node.is_leaf() {
                for &i in self.tree.indices(node) {
                    if dist(self.mu.point(i), center) <= r {
                        total += self.mu.weight(i);
                    }
                }
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        total
    }

    /// Visit the indices of all points in the closed ball, in tree order.
    pub fn for_each_in_ball(&self, center: &[f64], r: f64, mut visit: impl FnMut(usize)) {
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.tree.nodes[id];
            if node.min_dist(center) > r {
                continue;
            }
            if node.max_dist(center) <= r {
                for &i in self.tree.indices(node) {
                    visit(i);
                }
                continue;
            }
            if node.is_leaf() {
                for &i in self.tree.indices(node) {
                    if dist(self.mu.point(i), center) <= r {
                        visit(i);
                    }
                }
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
    }

    /// Indices in the closed ball, ascending.
    pub fn indices_in_ball(&self, center: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_in_ball(center, r, |i| out.push(i));
        out.sort_unstable();
        out
    }

    /// Points within `r` of `center` as `(distance, index)`, sorted by distance then index.
    pub fn neighbors_sorted(&self, center: &[f64], r: f64) -> Vec<(f64, usize)> {
        let mut out = Vec::new();
        self.for_each_in_ball(center, r, |i| out.push((dist(self.mu.point(i), center), i)));
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    /// Distance from `center` to the nearest support point, with its index (first index on ties).
    pub fn nearest(&self, center: &[f64]) -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.tree.nodes[id];
            if node.min_dist(center) > best.0 {
                continue;
            }
            if node.is_leaf() {
                for &i in self.tree.indices(node) {
                    let d = dist(self.mu.point(i), center);
                    if d < best.0 || (d == best.0 && i < best.1) {
                        best = (d, i);
                    }
                }
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        best
    }
}

pub fn total_mass(mu: &DiscreteMeasure) -> f64 {
    mu.weights().iter().sum()
}

/// μ(B(center, r)) by direct summation in index order.
pub fn ball_mass(mu: &DiscreteMeasure, center: &[f64], r: f64) -> f64 {
    mu.points()
        .zip(mu.weights())
        .filter(|(p, _)| dist(p, center) <= r)
        .map(|(_, w)| *w)
        .sum()
}

fn check_grid_floor(mu: &DiscreteMeasure, grid: &ScaleGrid) -> Result<()> {
    if grid.r_min() < mu.resolution() {
        return Err(Error::Precondition(format!(
            "grid floor {} is below the measure resolution {}",
            grid.r_min(),
            mu.resolution()
        )));
    }
    Ok(())
}

/// Per-center extremes of μ(B(x,r))/r^n over the grid: `(min, max)` for each support point.
fn ratio_extremes(mu: &DiscreteMeasure, grid: &ScaleGrid) -> Vec<(f64, f64)> {
    let index = mu.index();
    let n = mu.hausdorff_dim() as i32;
    Exec::default().map(mu.len(), |i| {
        let x = mu.point(i);
        grid.radii().iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| {
            let q = index.ball_mass(x, r) / r.powi(n);
            (lo.min(q), hi.max(q))
        })
    })
}

/// max over support points and grid radii of μ(B(x,r))/r^n.
pub fn growth_constant(mu: &DiscreteMeasure, grid: &ScaleGrid) -> Result<f64> {
    check_grid_floor(mu, grid)?;
    Ok(ratio_extremes(mu, grid)
        .into_iter()
        .fold(0.0, |m, (_, hi)| m.max(hi)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    /// `(r, μ(B(x,r))/r^n)` per grid radius.
    pub ratios: Vec<(f64, f64)>,
    /// Max ratio over the grid; scale-range proxy for the upper density.
    pub upper: f64,
    /// Min ratio over the grid; scale-range proxy for the lower density.
    pub lower: f64,
    pub r_min: f64,
    pub r_max: f64,
}

pub fn density_profile(mu: &DiscreteMeasure, x: &[f64], grid: &ScaleGrid) -> Result<DensityProfile> {
    if x.len() != mu.ambient_dim() {
        return Err(Error::Precondition("center has wrong dimension".into()));
    }
    let (lo, hi) = mu.bounding_box();
    let slack = grid.r_max();
    if x
        .iter()
        .zip(lo.iter().zip(&hi))
        .any(|(c, (l, h))| *c < l - slack || *c > h + slack)
    {
        return Err(Error::Precondition(
            "profile center lies outside the support box inflated by r_max".into(),
        ));
    }
    let index = mu.index();
    let n = mu.hausdorff_dim() as i32;
    let ratios: Vec<(f64, f64)> = grid
        .radii()
        .iter()
        .map(|&r| (r, index.ball_mass(x, r) / r.powi(n)))
        .collect();
    let upper = ratios.iter().fold(0.0f64, |m, p| m.max(p.1));
    let lower = ratios.iter().fold(f64::INFINITY, |m, p| m.min(p.1));
    Ok(DensityProfile {
        ratios,
        upper,
        lower,
        r_min: grid.r_min(),
        r_max: grid.r_max(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdConstants {
    pub lower: f64,
    pub upper: f64,
    pub r_min: f64,
    pub r_max: f64,
}

/// Lower/upper AD-regularity constants measured on the grid.
pub fn ad_constants(mu: &DiscreteMeasure, grid: &ScaleGrid) -> Result<AdConstants> {
    check_grid_floor(mu, grid)?;
    let (lower, upper) = ratio_extremes(mu, grid)
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |(l, u), (a, b)| (l.min(a), u.max(b)));
    Ok(AdConstants {
        lower,
        upper,
        r_min: grid.r_min(),
        r_max: grid.r_max(),
    })
}

/// Sub-measure on the points selected by `keep`, weights unchanged.
pub fn restrict(mu: &DiscreteMeasure, keep: impl Fn(usize) -> bool) -> Result<DiscreteMeasure> {
    let idx: Vec<usize> = (0..mu.len()).filter(|&i| keep(i)).collect();
    restrict_indices(mu, &idx)
}

/// Sub-measure on the given indices (in the given order).
pub fn restrict_indices(mu: &DiscreteMeasure, idx: &[usize]) -> Result<DiscreteMeasure> {
    if idx.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let d = mu.ambient_dim();
    let mut coords = Vec::with_capacity(idx.len() * d);
    let mut weights = Vec::with_capacity(idx.len());
    for &i in idx {
        coords.extend_from_slice(mu.point(i));
        weights.push(mu.weight(i));
    }
    let mut h = mu.resolution();
    if idx.len() >= 2 {
        let probe = DiscreteMeasure {
            ambient_dim: d,
            hausdorff_dim: mu.hausdorff_dim(),
            coords: coords.clone(),
            weights: weights.clone(),
            resolution_h: h,
        };
        if h > probe.diameter_lower_bound() {
            let diam = support_diameter(&probe);
            if diam > 0.0 {
                h = h.min(diam);
            }
        }
    }
    DiscreteMeasure::new(d, mu.hausdorff_dim(), coords, weights, h)
}

/// Max pairwise distance (0 for a single point).
pub fn support_diameter(mu: &DiscreteMeasure) -> f64 {
    let n = mu.len();
    Exec::default()
        .map(n, |i| {
            let p = mu.point(i);
            ((i + 1)..n).map(|j| dist(p, mu.point(j))).fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max)
}

fn parse_header_field<T: std::str::FromStr>(header: &str, key: &str) -> Result<T> {
    let tag = format!("{key}=");
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(tag.as_str()))
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("missing `{key}=` in header"),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            line: 1,
            msg: format!("bad value for `{key}`"),
        })
}

/// Format a float so that parsing it back is exact (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serialize in the text measure format. `extra_header` lines are emitted as `# ` comments
/// after the mandatory first line.
pub fn write_measure_string(mu: &DiscreteMeasure, extra_header: &[String]) -> String {
    let mut s = String::with_capacity(mu.len() * 24 * (mu.ambient_dim() + 1));
    let _ = writeln!(
        s,
        "# d={} n={} count={} h={}",
        mu.ambient_dim(),
        mu.hausdorff_dim(),
        mu.len(),
        fmt_f64(mu.resolution())
    );
    for line in extra_header {
        let _ = writeln!(s, "# {line}");
    }
    for (p, w) in mu.points().zip(mu.weights()) {
        for x in p {
            s.push_str(&fmt_f64(*x));
            s.push(' ');
        }
        s.push_str(&fmt_f64(*w));
        s.push('\n');
    }
    s
}

pub fn write_measure<W: Write>(mu: &DiscreteMeasure, mut out: W) -> std::io::Result<()> {
    out.write_all(write_measure_string(mu, &[]).as_bytes())
}

pub fn read_measure<R: Read>(input: R) -> Result<DiscreteMeasure> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(l))) => l,
        Some((_, Err(e))) => return Err(Error::io("<measure>", e)),
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty file".into(),
            })
        }
    };
    if !header.starts_with('#') {
        return Err(Error::Parse {
            line: 1,
            msg: "first line must be the `# d=.. n=.. count=.. h=..` header".into(),
        });
    }
    let d: usize = parse_header_field(&header, "d")?;
    let n: usize = parse_header_field(&header, "n")?;
    let count: usize = parse_header_field(&header, "count")?;
    let h: f64 = parse_header_field(&header, "h")?;
    let mut coords = Vec::with_capacity(count * d);
    let mut weights = Vec::with_capacity(count);
    for (ln, line) in lines {
        let line = line.map_err(|e| Error::io("<measure>", e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> = t.split_whitespace().map(str::parse).collect();
        let vals = vals.map_err(|_| Error::Parse {
            line: ln + 1,
            msg: "non-numeric field".into(),
        })?;
        if vals.len() != d + 1 {
            return Err(Error::Parse {
                line: ln + 1,
                msg: format!("expected {} fields, found {}", d + 1, vals.len()),
            });
        }
        coords.extend_from_slice(&vals[..d]);
        weights.push(vals[d]);
    }
    if weights.len() != count {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header says count={count}, file has {} rows", weights.len()),
        });
    }
    DiscreteMeasure::new(d, n, coords, weights, h)
}

pub fn read_measure_file(path: &Path) -> Result<DiscreteMeasure> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_measure(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_four_corners, gen_segment};

    fn point_mass(x: &[f64], w: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(x.len(), 1, x.to_vec(), vec![w], 1.0).unwrap()
    }

    #[test]
    fn total_mass_examples() {
        assert_eq!(total_mass(&point_mass(&[0.0, 0.0], 1.0)), 1.0);
        let two = DiscreteMeasure::new(2, 1, vec![0.0, 0.0, 1.0, 0.0], vec![0.25, 0.75], 1.0).unwrap();
        assert_eq!(total_mass(&two), 1.0);
        let fc = gen_four_corners(3).unwrap();
        assert!((total_mass(&fc) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_mass_examples() {
        let o = point_mass(&[0.0, 0.0], 1.0);
        assert_eq!(ball_mass(&o, &[0.0, 0.0], 1.0), 1.0);
        let far = point_mass(&[2.0, 0.0], 1.0);
        assert_eq!(ball_mass(&far, &[0.0, 0.0], 1.0), 0.0);
        let h = 2f64.powi(-10);
        let seg = gen_segment(1024, 2).unwrap();
        let m = ball_mass(&seg, &[0.5, 0.0], 0.25);
        assert!((m - 0.5).abs() <= 2.0 * h);
        assert_eq!(seg.index().ball_mass(&[0.5, 0.0], 0.25), m);
    }

    #[test]
    fn closed_ball_includes_boundary() {
        let mu = point_mass(&[1.0, 0.0], 1.0);
        assert_eq!(ball_mass(&mu, &[0.0, 0.0], 1.0), 1.0);
        assert_eq!(mu.index().ball_mass(&[0.0, 0.0], 1.0), 1.0);
    }

    #[test]
    fn growth_examples() {
        let one = point_mass(&[0.0, 0.0], 1.0);
        let g = ScaleGrid::geometric(1.0, 2.0, 2).unwrap();
        assert_eq!(growth_constant(&one, &g).unwrap(), 1.0);

        let seg = gen_segment(1024, 2).unwrap();
        let h = seg.resolution();
        let g = ScaleGrid::geometric(16.0 * h, 0.5, 12).unwrap();
        let c = growth_constant(&seg, &g).unwrap();
        assert!((c - 2.0).abs() <= 0.2, "{c}");

        let below = ScaleGrid::geometric(h / 2.0, 0.5, 4).unwrap();
        assert!(matches!(growth_constant(&seg, &below), Err(Error::Precondition(_))));
    }

    #[test]
    fn growth_of_four_corners_brute_force() {
        let k = 3usize;
        let fc = gen_four_corners(k).unwrap();
        let g = ScaleGrid::geometric(4f64.powi(1 - k as i32), 1.0, 10).unwrap();
        let fast = growth_constant(&fc, &g).unwrap();
        let mut brute = 0.0f64;
        for x in fc.points() {
            for &r in g.radii() {
                brute = brute.max(ball_mass(&fc, x, r) / r);
            }
        }
        assert!((fast - brute).abs() <= 1e-12 * brute);
        // At r = 1/16 each ball holds its point and the two edge neighbours in its level-2 cell.
        assert!((0.75..=4.0).contains(&fast), "{fast}");
    }

    #[test]
    fn density_profile_examples() {
        let o = point_mass(&[0.0, 0.0], 1.0);
        let g = ScaleGrid::from_radii(vec![1.0, 2.0]).unwrap();
        let p = density_profile(&o, &[0.0, 0.0], &g).unwrap();
        assert_eq!(p.ratios, vec![(1.0, 1.0), (2.0, 0.5)]);
        assert_eq!((p.upper, p.lower), (1.0, 0.5));

        let seg = gen_segment(4096, 2).unwrap();
        let h = seg.resolution();
        let g = ScaleGrid::geometric(8.0 * h, 0.05, 8).unwrap();
        let p = density_profile(&seg, &[0.5, 0.0], &g).unwrap();
        for (r, q) in p.ratios {
            assert!((q - 2.0).abs() <= 2.0 * h / r + 1e-12, "{q}");
        }
        assert!(density_profile(&seg, &[5.0, 0.0], &g).is_err());
    }

    #[test]
    fn ad_constants_examples() {
        let seg = gen_segment(1024, 2).unwrap();
        let h = seg.resolution();
        let g = ScaleGrid::geometric(16.0 * h, 0.25, 10).unwrap();
        let ad = ad_constants(&seg, &g).unwrap();
        // Counting error of a ball of radius r on a grid of spacing h is at most 2h/r.
        assert!((ad.lower - 1.0).abs() <= 0.125, "{}", ad.lower);
        assert!((ad.upper - 2.0).abs() <= 0.125, "{}", ad.upper);

        let one = point_mass(&[0.0, 0.0], 1.0);
        let a = ad_constants(&one, &ScaleGrid::geometric(1.0, 2.0, 3).unwrap()).unwrap();
        let b = ad_constants(&one, &ScaleGrid::geometric(1.0, 4.0, 3).unwrap()).unwrap();
        assert!(a.lower > 0.0 && a.lower / b.lower >= 1.0);
    }

    #[test]
    fn planar_patch_ad_constants_near_pi() {
        let plane = crate::generators::gen_plane(2, 3, 1.0, 1.0 / 64.0).unwrap();
        let x = [0.5, 0.5, 0.0];
        let g = ScaleGrid::geometric(0.1, 0.4, 6).unwrap();
        let p = density_profile(&plane, &x, &g).unwrap();
        for (_, q) in &p.ratios {
            assert!((q / std::f64::consts::PI - 1.0).abs() < 0.1, "{q}");
        }
        let ad = ad_constants(&plane, &g).unwrap();
        let pi = std::f64::consts::PI;
        assert!(ad.lower >= pi / 4.0 && ad.upper <= 4.0 * pi);
    }

    #[test]
    fn restrict_examples() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 0.0, 1.0, 0.0], vec![0.1, 0.9], 0.5).unwrap();
        assert_eq!(restrict(&mu, |_| true).unwrap(), mu);
        assert!(matches!(restrict(&mu, |_| false), Err(Error::EmptyMeasure)));
        let eta = 0.5;
        let heavy = restrict(&mu, |i| mu.weight(i) > eta).unwrap();
        assert_eq!(heavy.len(), 1);
        assert_eq!(total_mass(&heavy), 0.9);
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(support_diameter(&point_mass(&[0.3, 0.1], 1.0)), 0.0);
        let two = DiscreteMeasure::new(2, 1, vec![0.0, 0.0, 3.0, 4.0], vec![1.0, 1.0], 1.0).unwrap();
        assert_eq!(support_diameter(&two), 5.0);
        let seg = gen_segment(1000, 2).unwrap();
        assert!((support_diameter(&seg) - 1.0).abs() <= seg.resolution());
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(DiscreteMeasure::new(2, 1, vec![], vec![], 1.0).is_err());
        assert!(DiscreteMeasure::new(2, 1, vec![0.0, 0.0], vec![0.0], 1.0).is_err());
        assert!(DiscreteMeasure::new(2, 1, vec![0.0, 0.0], vec![f64::NAN], 1.0).is_err());
        assert!(DiscreteMeasure::new(2, 1, vec![0.0, 0.0], vec![1.0], 0.0).is_err());
        assert!(DiscreteMeasure::new(2, 1, vec![0.0, 0.0, 1.0, 0.0], vec![1.0, 1.0], 2.0).is_err());
    }

    #[test]
    fn scale_grid_is_geometric() {
        let g = ScaleGrid::geometric(0.01, 1.0, 9).unwrap();
        let q = g.radii()[1] / g.radii()[0];
        for w in g.radii().windows(2) {
            assert!((w[1] / w[0] / q - 1.0).abs() < 1e-12);
        }
        assert_eq!((g.r_min(), g.r_max()), (0.01, 1.0));
        assert!(ScaleGrid::geometric(1.0, 1.0, 3).is_err());
        assert!(ScaleGrid::geometric(1.0, 2.0, 1).is_err());
        let e = g.with_radius(0.3);
        assert!(e.radii().contains(&0.3) && e.len() == 10);
    }

    #[test]
    fn file_round_trip() {
        let fc = gen_four_corners(2).unwrap();
        let mut buf = Vec::new();
        write_measure(&fc, &mut buf).unwrap();
        let back = read_measure(buf.as_slice()).unwrap();
        assert_eq!(back, fc);
        assert!(String::from_utf8(buf).unwrap().starts_with("# d=2 n=1 count=16 h="));
    }

    #[test]
    fn malformed_files_rejected() {
        assert!(read_measure("".as_bytes()).is_err());
        assert!(read_measure("0 0 1\n".as_bytes()).is_err());
        assert!(read_measure("# d=2 n=1 count=2 h=1\n0 0 1\n".as_bytes()).is_err());
        assert!(read_measure("# d=2 n=1 count=1 h=1\n0 x 1\n".as_bytes()).is_err());
        let ok = read_measure("# d=2 n=1 count=1 h=1\n# comment\n0 0 1\n".as_bytes()).unwrap();
        assert_eq!(ok.len(), 1);
    }

    #[test]
    fn nearest_matches_brute_force() {
        let fc = gen_four_corners(4).unwrap();
        let idx = fc.index();
        for q in [[0.3, 0.7], [0.0, 0.0], [0.51, 0.49]] {
            let (d, i) = idx.nearest(&q);
            let brute = (0..fc.len())
                .map(|j| (dist(fc.point(j), &q), j))
                .fold((f64::INFINITY, 0), |b, c| if c.0 < b.0 { c } else { b });
            assert_eq!((d, i), brute);
        }
    }
}
