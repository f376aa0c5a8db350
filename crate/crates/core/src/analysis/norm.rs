//! Operator norm of `f ↦ R_{μ,ε} f` on `L²(μ)`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::measure::DiscreteMeasure;
use crate::riesz::{apply_charges, kernel_scalar, KernelConfig, VectorField};
use crate::treecode::{apply_charges_tree, build_tree, SpatialTree, TreecodeParams};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    PowerIteration,
    DenseDecomposition,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Relative change of the estimate at the last step.
    pub residual: f64,
    pub epsilon: f64,
    pub method: NormMethod,
}

/// How each operator application is summed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Summation {
    Direct,
    Treecode(TreecodeParams),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the second, random start vector.
    pub seed: u64,
    pub exec: Exec,
    pub summation: Summation,
}

impl PowerOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        PowerOptions {
            tol,
            max_iter,
            seed: 0x5eed,
            exec: Exec::default(),
            summation: Summation::Direct,
        }
    }
}

/// Forward and adjoint application on a fixed measure.
struct Operator<'a> {
    mu: &'a DiscreteMeasure,
    cfg: KernelConfig,
    exec: Exec,
    tree: Option<(SpatialTree, TreecodeParams)>,
}

impl<'a> Operator<'a> {
    fn new(mu: &'a DiscreteMeasure, cfg: &KernelConfig, opts: &PowerOptions) -> Self {
        let tree = match opts.summation {
            Summation::Direct => None,
            Summation::Treecode(p) => Some((build_tree(mu, &p), p)),
        };
        Operator {
            mu,
            cfg: *cfg,
            exec: opts.exec,
            tree,
        }
    }

    fn charges(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(self.mu.weights()).map(|(a, w)| a * w).collect()
    }

    fn forward(&self, f: &[f64]) -> VectorField {
        let q = self.charges(f);
        match &self.tree {
            None => apply_charges(self.exec, self.mu, &q, &self.cfg, self.mu.coords()),
            Some((tree, p)) => apply_charges_tree(self.exec, tree, &q, &self.cfg, p, self.mu.coords()),
        }
    }

    fn adjoint(&self, field: &VectorField) -> Vec<f64> {
        match &self.tree {
            None => adjoint_direct(self.exec, self.mu, &self.cfg, field),
            Some((tree, p)) => {
                // A*F(x_j) = −Σ_a [R(F_a w)](x_j)_a by oddness of the kernel.
                let d = self.mu.ambient_dim();
                let mut out = vec![0.0; self.mu.len()];
                for a in 0..d {
                    let q: Vec<f64> = field
                        .rows()
                        .zip(self.mu.weights())
                        .map(|(v, w)| v[a] * w)
                        .collect();
                    let r = apply_charges_tree(self.exec, tree, &q, &self.cfg, p, self.mu.coords());
                    for (o, row) in out.iter_mut().zip(r.rows()) {
                        *o -= row[a];
                    }
                }
                out
            }
        }
    }
}

fn adjoint_direct(exec: Exec, mu: &DiscreteMeasure, cfg: &KernelConfig, field: &VectorField) -> Vec<f64> {
    let d = mu.ambient_dim();
    exec.map(mu.len(), |j| {
        let xj = mu.point(j);
        let mut s = 0.0;
        for (i, (xi, fi)) in mu.points().zip(field.rows()).enumerate() {
            let mut r2 = 0.0;
            let mut dot = 0.0;
            for a in 0..d {
                let t = xi[a] - xj[a];
                r2 += t * t;
                dot += t * fi[a];
            }
            s += kernel_scalar(r2, cfg) * dot * mu.weight(i);
        }
        s
    })
}

/// `R*_{μ,ε} F(x_j) = Σ_i K(x_i − x_j)·F_i w_i`, the adjoint of `riesz_apply` on the support.
pub fn adjoint_apply(mu: &DiscreteMeasure, cfg: &KernelConfig, field: &VectorField) -> Result<Vec<f64>> {
    cfg.validate()?;
    if field.len() != mu.len() || field.dim() != mu.ambient_dim() {
        return Err(Error::Precondition("vector field is not aligned with the measure".into()));
    }
    Ok(adjoint_direct(Exec::default(), mu, cfg, field))
}

pub(crate) fn weighted_norm(f: &[f64], w: &[f64]) -> f64 {
    f.iter().zip(w).map(|(a, b)| a * a * b).sum::<f64>().sqrt()
}

struct Run {
    value: f64,
    iterations: usize,
    residual: f64,
}

fn power_run(op: &Operator<'_>, start: Vec<f64>, tol: f64, max_iter: usize) -> Result<Run> {
    let w = op.mu.weights();
    let mut v = start;
    let nv = weighted_norm(&v, w);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut prev = f64::NAN;
    let mut last = f64::INFINITY;
    for it in 1..=max_iter {
        let av = op.forward(&v);
        let est = av.weighted_norm_sq(w).sqrt();
        let residual = if prev.is_nan() {
            f64::INFINITY
        } else if est == 0.0 {
            0.0
        } else {
            (est - prev).abs() / est
        };
        if residual < tol {
            return Ok(Run {
                value: est,
                iterations: it,
                residual,
            });
        }
        prev = est;
        last = residual;
        let mut z = op.adjoint(&av);
        let nz = weighted_norm(&z, w);
        if nz == 0.0 {
            return Ok(Run {
                value: 0.0,
                iterations: it,
                residual: 0.0,
            });
        }
        z.iter_mut().for_each(|x| *x /= nz);
        v = z;
    }
    Err(Error::NotConverged {
        estimate: prev,
        iterations: max_iter,
        residual: last,
    })
}

/// Largest singular value by power iteration on `R*R`, started from all-ones and
/// from a seeded random vector; the larger of the two certified lower bounds is returned.
pub fn operator_norm(mu: &DiscreteMeasure, cfg: &KernelConfig, tol: f64, max_iter: usize) -> Result<NormEstimate> {
    operator_norm_with(mu, cfg, &PowerOptions::new(tol, max_iter))
}

pub fn operator_norm_with(mu: &DiscreteMeasure, cfg: &KernelConfig, opts: &PowerOptions) -> Result<NormEstimate> {
    cfg.validate()?;
    if !(opts.tol > 0.0 && opts.tol < 0.1) {
        return Err(Error::Precondition(format!("tolerance {} outside (0, 0.1)", opts.tol)));
    }
    if let Summation::Treecode(p) = opts.summation {
        p.validate()?;
    }
    if mu.len() == 1 {
        return Ok(NormEstimate {
            value: 0.0,
            iterations: 0,
            residual: 0.0,
            epsilon: cfg.epsilon,
            method: NormMethod::PowerIteration,
        });
    }
    let op = Operator::new(mu, cfg, opts);
    let ones = vec![1.0; mu.len()];
    let a = power_run(&op, ones, opts.tol, opts.max_iter)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random: Vec<f64> = (0..mu.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = power_run(&op, random, opts.tol, opts.max_iter)?;
    let best = if b.value > a.value { b } else { a };
    Ok(NormEstimate {
        value: best.value,
        iterations: best.iterations,
        residual: best.residual,
        epsilon: cfg.epsilon,
        method: NormMethod::PowerIteration,
    })
}

/// The `(N·d) × N` matrix of the operator in orthonormal coordinates:
/// `M_{(i,a),j} = sqrt(w_i w_j) K_a(x_i − x_j)`.
pub fn dense_matrix(mu: &DiscreteMeasure, cfg: &KernelConfig) -> DMatrix<f64> {
    let (n, d) = (mu.len(), mu.ambient_dim());
    let sw: Vec<f64> = mu.weights().iter().map(|w| w.sqrt()).collect();
    let mut m = DMatrix::zeros(n * d, n);
    for i in 0..n {
        for j in 0..n {
            let diff: Vec<f64> = mu.point(i).iter().zip(mu.point(j)).map(|(a, b)| a - b).collect();
            let r2: f64 = diff.iter().map(|v| v * v).sum();
            let s = kernel_scalar(r2, cfg) * sw[i] * sw[j];
            for a in 0..d {
                m[(i * d + a, j)] = diff[a] * s;
            }
        }
    }
    m
}

pub const DENSE_CAP: usize = 4096;

/// Largest singular value by full SVD of the dense operator matrix.
pub fn dense_operator_norm(mu: &DiscreteMeasure, cfg: &KernelConfig) -> Result<NormEstimate> {
    cfg.validate()?;
    if mu.len() > DENSE_CAP {
        return Err(Error::Precondition(format!(
            "dense decomposition is capped at {DENSE_CAP} points"
        )));
    }
    let m = dense_matrix(mu, cfg);
    let sv = m.singular_values();
    let value = sv.iter().copied().fold(0.0, f64::max);
    Ok(NormEstimate {
        value,
        iterations: 1,
        residual: 0.0,
        epsilon: cfg.epsilon,
        method: NormMethod::DenseDecomposition,
    })
}

/// One power-iteration estimate per ε, in input order.
pub fn norm_sweep(
    mu: &DiscreteMeasure,
    cfg: &KernelConfig,
    epsilons: &[f64],
    opts: &PowerOptions,
) -> Result<Vec<(f64, NormEstimate)>> {
    if let Some(e) = epsilons.iter().find(|e| **e < mu.resolution()) {
        return Err(Error::Precondition(format!(
            "epsilon {e} is below the measure resolution {}",
            mu.resolution()
        )));
    }
    epsilons
        .iter()
        .map(|&e| Ok((e, operator_norm_with(mu, &cfg.with_epsilon(e), opts)?)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointNorms {
    pub norm_mu: NormEstimate,
    pub norm_sigma: NormEstimate,
    pub norm_sum: NormEstimate,
}

/// μ + σ with coincident points merged by adding weights (first occurrence keeps its slot).
pub fn merge_measures(mu: &DiscreteMeasure, sigma: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    if mu.ambient_dim() != sigma.ambient_dim() || mu.hausdorff_dim() != sigma.hausdorff_dim() {
        return Err(Error::Precondition("μ and σ have different (n, d)".into()));
    }
    let mut slot: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
    let mut coords = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for m in [mu, sigma] {
        for (p, &w) in m.points().zip(m.weights()) {
            let key: Vec<u64> = p.iter().map(|x| (x + 0.0).to_bits()).collect();
            match slot.get(&key) {
                Some(&k) => weights[k] += w,
                None => {
                    slot.insert(key, weights.len());
                    coords.extend_from_slice(p);
                    weights.push(w);
                }
            }
        }
    }
    DiscreteMeasure::new(
        mu.ambient_dim(),
        mu.hausdorff_dim(),
        coords,
        weights,
        mu.resolution().min(sigma.resolution()),
    )
}

pub fn joint_norm_experiment(
    mu: &DiscreteMeasure,
    sigma: &DiscreteMeasure,
    cfg: &KernelConfig,
    opts: &PowerOptions,
) -> Result<JointNorms> {
    let sum = merge_measures(mu, sigma)?;
    Ok(JointNorms {
        norm_mu: operator_norm_with(mu, cfg, opts)?,
        norm_sigma: operator_norm_with(sigma, cfg, opts)?,
        norm_sum: operator_norm_with(&sum, cfg, opts)?,
    })
}

pub fn sweep_csv(rows: &[(f64, NormEstimate)]) -> String {
    let mut s = String::from("epsilon,norm,iterations,residual\n");
    for (e, est) in rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            crate::measure::fmt_f64(*e),
            crate::measure::fmt_f64(est.value),
            est.iterations,
            crate::measure::fmt_f64(est.residual)
        ));
    }
    s
}
