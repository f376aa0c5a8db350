//! Menger curvature of triples and the curvature `c²(μ)` of a measure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exec::Exec;
use crate::measure::{fmt_f64, DiscreteMeasure};
use crate::spatial::dist;
use crate::{Error, Result};

pub const EXACT_CAP: usize = 2000;

/// `1/R(x,y,z) = 4·Area/(|x−y||y−z||z−x|)`; 0 for collinear triples.
pub fn menger_curvature(x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
    let (a, b, c) = (dist(x, y), dist(y, z), dist(z, x));
    if a == 0.0 || b == 0.0 || c == 0.0 {
        return Err(Error::DegenerateTriple);
    }
    Ok(menger_unchecked(x, y, z, a * b * c))
}

/// `2|u ∧ v| / abc` with `u = y − x`, `v = z − x`; the wedge norm is summed over
/// coordinate planes so that exactly collinear inputs give exactly 0 on axis-aligned data.
#[inline]
fn menger_unchecked(x: &[f64], y: &[f64], z: &[f64], abc: f64) -> f64 {
    let d = x.len();
    let mut wedge = 0.0;
    for p in 0..d {
        let (up, vp) = (y[p] - x[p], z[p] - x[p]);
        for q in (p + 1)..d {
            let (uq, vq) = (y[q] - x[q], z[q] - x[q]);
            let m = up * vq - uq * vp;
            wedge += m * m;
        }
    }
    2.0 * wedge.sqrt() / abc
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CurvatureMode {
    Exact,
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureEstimate {
    pub value: f64,
    /// Ordered nondegenerate triples evaluated (exact) or samples drawn (sampled).
    pub triples_evaluated: u64,
    pub mode: CurvatureMode,
    pub stderr: f64,
    pub rel_stderr: f64,
    /// Set when N < 3 and there are no triples.
    pub too_few_points: bool,
}

pub fn curvature_c2(mu: &DiscreteMeasure, mode: CurvatureMode) -> Result<CurvatureEstimate> {
    curvature_c2_capped(mu, mode, EXACT_CAP)
}

/// `c²(μ) = Σ (1/R)² w_i w_j w_k` over ordered triples of pairwise-distinct points.
pub fn curvature_c2_capped(mu: &DiscreteMeasure, mode: CurvatureMode, cap: usize) -> Result<CurvatureEstimate> {
    let n = mu.len();
    if n < 3 {
        return Ok(CurvatureEstimate {
            value: 0.0,
            triples_evaluated: 0,
            mode,
            stderr: 0.0,
            rel_stderr: 0.0,
            too_few_points: true,
        });
    }
    match mode {
        CurvatureMode::Exact => {
            if n > cap {
                return Err(Error::Precondition(format!(
                    "exact curvature is O(N^3); N = {n} exceeds the cap {cap}"
                )));
            }
            let rows = Exec::default().map(n, |i| {
                let xi = mu.point(i);
                let mut s = 0.0;
                let mut count = 0u64;
                for j in (i + 1)..n {
                    let xj = mu.point(j);
                    let a = dist(xi, xj);
                    if a == 0.0 {
                        continue;
                    }
                    let wij = mu.weight(i) * mu.weight(j);
                    for k in (j + 1)..n {
                        let xk = mu.point(k);
                        let (b, c) = (dist(xj, xk), dist(xk, xi));
                        if b == 0.0 || c == 0.0 {
                            continue;
                        }
                        let m = menger_unchecked(xi, xj, xk, a * b * c);
                        s += m * m * wij * mu.weight(k);
                        count += 1;
                    }
                }
                (s, count)
            });
            let (s, count) = rows.iter().fold((0.0, 0u64), |(s, c), r| (s + r.0, c + r.1));
            Ok(CurvatureEstimate {
                value: 6.0 * s,
                triples_evaluated: 6 * count,
                mode,
                stderr: 0.0,
                rel_stderr: 0.0,
                too_few_points: false,
            })
        }
        CurvatureMode::Sampled { count, seed } => {
            if count < 2 {
                return Err(Error::Precondition("sampled curvature needs at least 2 samples".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let mut k = rng.gen_range(0..n - 2);
                for m in [i.min(j), i.max(j)] {
                    if k >= m {
                        k += 1;
                    }
                }
                let v = match menger_curvature(mu.point(i), mu.point(j), mu.point(k)) {
                    Ok(c) => c * c * mu.weight(i) * mu.weight(j) * mu.weight(k),
                    Err(_) => 0.0,
                };
                sum += v;
                sum_sq += v * v;
            }
            let m = count as f64;
            let mean = sum / m;
            let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
            let scale = n as f64 * (n - 1) as f64 * (n - 2) as f64;
            let value = scale * mean;
            let stderr = scale * (var / m).sqrt();
            Ok(CurvatureEstimate {
                value,
                triples_evaluated: count as u64,
                mode,
                stderr,
                rel_stderr: if value > 0.0 { stderr / value } else { 0.0 },
                too_few_points: false,
            })
        }
    }
}

pub fn curvature_csv(rows: &[CurvatureEstimate]) -> String {
    let mut s = String::from("mode,value,triples,stderr\n");
    for e in rows {
        let mode = match e.mode {
            CurvatureMode::Exact => "exact",
            CurvatureMode::Sampled { .. } => "sampled",
        };
        s.push_str(&format!(
            "{mode},{},{},{}\n",
            fmt_f64(e.value),
            e.triples_evaluated,
            fmt_f64(e.stderr)
        ));
    }
    s
}
