//! ν, the local/non-local split, ball-average transfer and the comparison operator `T`.

use serde::Serialize;

use super::cover::CoverReport;
use super::patches::PlanarPatch;
use crate::exec::Exec;
use crate::measure::{restrict_indices, DiscreteMeasure};
use crate::riesz::{check_density, kernel_scalar, KernelConfig, VectorField};
use crate::spatial::dist;
use crate::{Error, Result};

/// The comparison balls `B_x = B(x, r(x))`, pairwise disjoint and closed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallFamily {
    pub dim: usize,
    pub n: usize,
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
}

impl BallFamily {
    pub fn new(dim: usize, n: usize, centers: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        if dim == 0 || centers.len() != dim * radii.len() {
            return Err(Error::Precondition("ball centres and radii do not match".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Precondition("ball radii must be positive".into()));
        }
        Ok(BallFamily { dim, n, centers, radii })
    }

    pub fn from_cover(mu: &DiscreteMeasure, cover: &CoverReport) -> Self {
        let centers = cover.centers.iter().flat_map(|&c| mu.point(c).to_vec()).collect();
        let radii = (0..cover.len()).map(|k| cover.half_radius(k)).collect();
        BallFamily {
            dim: mu.ambient_dim(),
            n: mu.hausdorff_dim(),
            centers,
            radii,
        }
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn center(&self, k: usize) -> &[f64] {
        &self.centers[k * self.dim..(k + 1) * self.dim]
    }

    /// Gap `|c_a − c_b| − r_a − r_b` between two balls.
    pub fn gap(&self, a: usize, b: usize) -> f64 {
        dist(self.center(a), self.center(b)) - self.radii[a] - self.radii[b]
    }

    /// The first ball containing `z`.
    pub fn locate(&self, z: &[f64]) -> Option<usize> {
        (0..self.len()).find(|&k| dist(self.center(k), z) <= self.radii[k])
    }

    /// Ball label of every point of `measure`; an error names the first point in no ball.
    pub fn assign(&self, measure: &DiscreteMeasure) -> Result<Vec<usize>> {
        let mut labels = vec![usize::MAX; measure.len()];
        let index = measure.index();
        for k in 0..self.len() {
            index.for_each_in_ball(self.center(k), self.radii[k], |i| {
                if labels[i] == usize::MAX {
                    labels[i] = k;
                }
            });
        }
        match labels.iter().position(|&l| l == usize::MAX) {
            Some(i) => Err(Error::UnassignedPoint { index: i }),
            None => Ok(labels),
        }
    }
}

/// ν as a weighted restriction of μ to the balls.
#[derive(Clone, Debug, PartialEq)]
pub struct NuParts {
    pub nu: Option<DiscreteMeasure>,
    /// Index into μ of each ν-point.
    pub sources: Vec<usize>,
    /// Ball of each ν-point.
    pub labels: Vec<usize>,
    /// `c_x = H^n(P_x)/μ(B_x)` per ball.
    pub coefficients: Vec<f64>,
    /// μ(B_x) per ball.
    pub ball_masses: Vec<f64>,
}

pub fn build_mu_ps(mu: &DiscreteMeasure, fps: &[usize], sigma: Option<&DiscreteMeasure>) -> Result<DiscreteMeasure> {
    match (sigma, fps.is_empty()) {
        (Some(s), true) => Ok(s.clone()),
        (Some(s), false) => s.concat(&restrict_indices(mu, fps)?),
        (None, false) => restrict_indices(mu, fps),
        (None, true) => Err(Error::EmptyMeasure),
    }
}

pub fn build_nu(mu: &DiscreteMeasure, cover: &CoverReport, patches: &[PlanarPatch]) -> Result<NuParts> {
    let balls = BallFamily::from_cover(mu, cover);
    let weights: Vec<f64> = patches.iter().map(|p| p.weight).collect();
    build_nu_with(mu, &balls, &cover.centers, &weights)
}

/// ν for arbitrary balls with target masses `patch_weights`; `ids` name the balls in errors.
pub fn build_nu_with(mu: &DiscreteMeasure, balls: &BallFamily, ids: &[usize], patch_weights: &[f64]) -> Result<NuParts> {
    let index = mu.index();
    let mut sources = Vec::new();
    let mut labels = Vec::new();
    let mut coefficients = Vec::with_capacity(balls.len());
    let mut ball_masses = Vec::with_capacity(balls.len());
    for k in 0..balls.len() {
        let members = index.indices_in_ball(balls.center(k), balls.radii[k]);
        let mass: f64 = members.iter().map(|&i| mu.weight(i)).sum();
        if !(mass > 0.0) {
            return Err(Error::ZeroMassBall { center: ids[k] });
        }
        coefficients.push(patch_weights[k] / mass);
        ball_masses.push(mass);
        labels.extend(std::iter::repeat(k).take(members.len()));
        sources.extend(members);
    }
    let nu = nu_measure(mu, &sources, &labels, &coefficients)?;
    Ok(NuParts {
        nu,
        sources,
        labels,
        coefficients,
        ball_masses,
    })
}

pub(crate) fn nu_measure(
    mu: &DiscreteMeasure,
    sources: &[usize],
    labels: &[usize],
    coefficients: &[f64],
) -> Result<Option<DiscreteMeasure>> {
    if sources.is_empty() {
        return Ok(None);
    }
    let base = restrict_indices(mu, sources)?;
    let weights = base
        .weights()
        .iter()
        .zip(labels)
        .map(|(w, &k)| w * coefficients[k])
        .collect();
    DiscreteMeasure::new(
        base.ambient_dim(),
        base.hausdorff_dim(),
        base.coords().to_vec(),
        weights,
        base.resolution(),
    )
    .map(Some)
}

/// Per-target split of `Σ K(z−y) q(y)` into same-ball and other-ball sources.
fn split_sum(
    measure: &DiscreteMeasure,
    labels: &[usize],
    q: &[f64],
    cfg: &KernelConfig,
    targets: &[f64],
    target_labels: &[Option<usize>],
) -> (VectorField, VectorField) {
    let d = measure.ambient_dim();
    let rows = Exec::default().map(target_labels.len(), |t| {
        let z = &targets[t * d..(t + 1) * d];
        let mut local = vec![0.0; d];
        let mut far = vec![0.0; d];
        let mut diff = vec![0.0; d];
        for (j, y) in measure.points().enumerate() {
            let mut r2 = 0.0;
            for a in 0..d {
                diff[a] = z[a] - y[a];
                r2 += diff[a] * diff[a];
            }
            let s = kernel_scalar(r2, cfg) * q[j];
            let out = if target_labels[t] == Some(labels[j]) { &mut local } else { &mut far };
            for a in 0..d {
                out[a] += diff[a] * s;
            }
        }
        (local, far)
    });
    let mut lv = Vec::with_capacity(rows.len() * d);
    let mut fv = Vec::with_capacity(rows.len() * d);
    for (l, f) in rows {
        lv.extend(l);
        fv.extend(f);
    }
    (VectorField::from_raw(d, lv), VectorField::from_raw(d, fv))
}

/// `(R^loc f, R^nl f)` on the support of `measure`, which must lie in the balls.
pub fn local_nonlocal_apply(
    measure: &DiscreteMeasure,
    balls: &BallFamily,
    f: &[f64],
    cfg: &KernelConfig,
) -> Result<(VectorField, VectorField)> {
    cfg.validate()?;
    check_density(measure, f)?;
    let labels = balls.assign(measure)?;
    let q: Vec<f64> = f.iter().zip(measure.weights()).map(|(a, b)| a * b).collect();
    let tl: Vec<Option<usize>> = labels.iter().map(|&l| Some(l)).collect();
    Ok(split_sum(measure, &labels, &q, cfg, measure.coords(), &tl))
}

/// `R^nl f` at arbitrary targets; a target outside every ball sees all sources.
pub fn nonlocal_apply(
    measure: &DiscreteMeasure,
    balls: &BallFamily,
    f: &[f64],
    cfg: &KernelConfig,
    targets: &[f64],
) -> Result<VectorField> {
    cfg.validate()?;
    check_density(measure, f)?;
    let labels = balls.assign(measure)?;
    let q: Vec<f64> = f.iter().zip(measure.weights()).map(|(a, b)| a * b).collect();
    let d = measure.ambient_dim();
    let tl: Vec<Option<usize>> = targets.chunks_exact(d).map(|z| balls.locate(z)).collect();
    Ok(split_sum(measure, &labels, &q, cfg, targets, &tl).1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transfer {
    /// f on ν, constant on each ball.
    pub f: Vec<f64>,
    /// max over balls of |∫_B f dν − ∫_B g dσ| / ∫_B |g| dσ.
    pub matching_residual: f64,
    pub norm_f: f64,
    pub norm_g: f64,
}

fn ball_sums(measure: &DiscreteMeasure, labels: &[usize], f: &[f64], k: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut mass = vec![0.0; k];
    let mut fm = vec![0.0; k];
    let mut am = vec![0.0; k];
    for (i, &l) in labels.iter().enumerate() {
        let w = measure.weight(i);
        mass[l] += w;
        fm[l] += f[i] * w;
        am[l] += f[i].abs() * w;
    }
    (mass, fm, am)
}

fn l2(measure: &DiscreteMeasure, f: &[f64]) -> f64 {
    f.iter().zip(measure.weights()).map(|(v, w)| v * v * w).sum::<f64>().sqrt()
}

/// `f = (∫_{B_x} g dσ)/ν(B_x)` on each ball.
pub fn transfer_ball_averages(
    g: &[f64],
    sigma: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    balls: &BallFamily,
) -> Result<Transfer> {
    check_density(sigma, g)?;
    let ls = balls.assign(sigma)?;
    let ln = balls.assign(nu)?;
    let k = balls.len();
    let (_, gm, gabs) = ball_sums(sigma, &ls, g, k);
    let (nm, _, _) = ball_sums(nu, &ln, &vec![0.0; nu.len()], k);
    let mut value = vec![0.0; k];
    for b in 0..k {
        if gm[b] != 0.0 && !(nm[b] > 0.0) {
            return Err(Error::ZeroMassBall { center: b });
        }
        if nm[b] > 0.0 {
            value[b] = gm[b] / nm[b];
        }
    }
    let f: Vec<f64> = ln.iter().map(|&b| value[b]).collect();
    let (_, fm, _) = ball_sums(nu, &ln, &f, k);
    let matching_residual = (0..k)
        .map(|b| if gabs[b] > 0.0 { (fm[b] - gm[b]).abs() / gabs[b] } else { fm[b].abs() })
        .fold(0.0, f64::max);
    Ok(Transfer {
        norm_f: l2(nu, &f),
        norm_g: l2(sigma, g),
        f,
        matching_residual,
    })
}

/// `T f(z) = Σ_{x: z∉B_x} r(x) · gap(B(z), B_x)^{-(n+1)} · ∫_{B_x} f`, per point.
pub fn comparison_operator_t(measure: &DiscreteMeasure, balls: &BallFamily, f: &[f64]) -> Result<Vec<f64>> {
    check_density(measure, f)?;
    let labels = balls.assign(measure)?;
    let k = balls.len();
    let (_, fm, _) = ball_sums(measure, &labels, f, k);
    let e = (balls.n + 1) as i32;
    let per_ball = Exec::default().map(k, |b| {
        (0..k)
            .filter(|&x| x != b)
            .map(|x| balls.radii[x] * balls.gap(b, x).powi(-e) * fm[x])
            .sum::<f64>()
    });
    Ok(labels.iter().map(|&b| per_ball[b]).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interaction {
    /// `∫ |R^nl_ν f − R^nl_σ g|² d(ν+σ)`.
    pub value: f64,
    pub norm_f_sq: f64,
    pub norm_g_sq: f64,
    pub ratio: f64,
}

/// The interaction functional for one pair (f on ν, g on σ).
pub fn interaction(
    nu: &DiscreteMeasure,
    sigma: &DiscreteMeasure,
    balls: &BallFamily,
    f: &[f64],
    g: &[f64],
    cfg: &KernelConfig,
) -> Result<Interaction> {
    let targets: Vec<f64> = nu.coords().iter().chain(sigma.coords()).copied().collect();
    let a = nonlocal_apply(nu, balls, f, cfg, &targets)?;
    let b = nonlocal_apply(sigma, balls, g, cfg, &targets)?;
    let w: Vec<f64> = nu.weights().iter().chain(sigma.weights()).copied().collect();
    let value: f64 = a
        .rows()
        .zip(b.rows())
        .zip(&w)
        .map(|((x, y), wi)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() * wi)
        .sum();
    let norm_f_sq = l2(nu, f).powi(2);
    let norm_g_sq = l2(sigma, g).powi(2);
    let denom = norm_f_sq + norm_g_sq;
    Ok(Interaction {
        value,
        norm_f_sq,
        norm_g_sq,
        ratio: if denom > 0.0 { value / denom } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riesz::riesz_apply_on_support;

    fn line(xs: &[f64], w: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(2, 1, xs.iter().flat_map(|&x| [x, 0.0]).collect(), vec![w; xs.len()], 0.01).unwrap()
    }

    fn two_balls() -> BallFamily {
        BallFamily::new(2, 1, vec![0.0, 0.0, 1.0, 0.0], vec![0.1, 0.1]).unwrap()
    }

    #[test]
    fn single_ball_split() {
        let m = line(&[-0.05, 0.0, 0.03], 0.5);
        let balls = BallFamily::new(2, 1, vec![0.0, 0.0], vec![0.1]).unwrap();
        let cfg = KernelConfig::truncated(1, 0.001).unwrap();
        let f = [1.0, -2.0, 0.5];
        let (loc, nl) = local_nonlocal_apply(&m, &balls, &f, &cfg).unwrap();
        assert!(nl.values().iter().all(|v| *v == 0.0));
        assert_eq!(loc, riesz_apply_on_support(&m, &f, &cfg).unwrap());
    }

    #[test]
    fn two_ball_split() {
        let m = line(&[0.0, 1.0], 1.0);
        let cfg = KernelConfig::truncated(1, 0.001).unwrap();
        let (loc, nl) = local_nonlocal_apply(&m, &two_balls(), &[1.0, 0.0], &cfg).unwrap();
        assert_eq!(loc.get(1), &[0.0, 0.0]);
        assert_eq!(nl.get(1), riesz_apply_on_support(&m, &[1.0, 0.0], &cfg).unwrap().get(1));
    }

    #[test]
    fn unassigned_point_is_an_error() {
        let m = line(&[0.0, 0.5], 1.0);
        let cfg = KernelConfig::truncated(1, 0.001).unwrap();
        assert!(matches!(
            local_nonlocal_apply(&m, &two_balls(), &[1.0, 1.0], &cfg),
            Err(Error::UnassignedPoint { index: 1 })
        ));
    }

    #[test]
    fn nu_coefficients() {
        let mu = line(&[0.0, 0.05, 1.0], 0.25);
        let balls = two_balls();
        let parts = build_nu_with(&mu, &balls, &[0, 2], &[0.2, 0.2]).unwrap();
        assert_eq!(parts.ball_masses, vec![0.5, 0.25]);
        assert_eq!(parts.coefficients, vec![0.4, 0.8]);
        let nu = parts.nu.unwrap();
        assert!((nu.weights().iter().sum::<f64>() - 0.4).abs() < 1e-15);

        let far = line(&[5.0], 1.0);
        assert!(matches!(
            build_nu_with(&far, &balls, &[7, 8], &[0.2, 0.2]),
            Err(Error::ZeroMassBall { center: 7 })
        ));
    }

    #[test]
    fn transfer_examples() {
        let sigma = line(&[-0.05, 0.05, 0.95, 1.05], 0.1);
        let nu = line(&[0.0, 1.0], 0.2);
        let balls = two_balls();
        let t = transfer_ball_averages(&[3.0; 4], &sigma, &nu, &balls).unwrap();
        assert!(t.f.iter().all(|v| (v - 3.0).abs() < 1e-15));
        let z = transfer_ball_averages(&[0.0; 4], &sigma, &nu, &balls).unwrap();
        assert!(z.f.iter().all(|v| *v == 0.0));
        let r = transfer_ball_averages(&[1.0, -2.0, 4.0, 0.5], &sigma, &nu, &balls).unwrap();
        assert!(r.matching_residual <= 1e-12);
        assert!(r.norm_f <= r.norm_g);
    }

    #[test]
    fn comparison_operator_examples() {
        let one = BallFamily::new(2, 1, vec![0.0, 0.0], vec![0.1]).unwrap();
        let m = line(&[0.0], 1.0);
        assert_eq!(comparison_operator_t(&m, &one, &[1.0]).unwrap(), vec![0.0]);

        let m = line(&[0.0, 1.0, 1.05], 0.5);
        let t = comparison_operator_t(&m, &two_balls(), &[1.0; 3]).unwrap();
        let gap = 0.8f64;
        assert!((t[0] - 0.1 * 1.0 / gap.powi(2)).abs() < 1e-14);
        assert_eq!(t[1], t[2]);
    }
}
