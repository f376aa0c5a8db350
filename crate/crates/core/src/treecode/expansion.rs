//! Cartesian Taylor expansion of the Riesz kernel about a cluster centre.
//!
//! With `x = t − c` and `h = c − y`, the scalar part `|x + h|^{-2ν}`
//! (`2ν = n + 1`) has Taylor coefficients `b_k(x)` obeying
//!
//! ```text
//! ‖k‖ |x|² b_k = −Σ_i (2‖k‖ − 2 + 2ν) x_i b_{k−e_i} − Σ_i (‖k‖ − 2 + 2ν) b_{k−2e_i}
//! ```
//!
//! and the vector kernel `(x + h)_a |x + h|^{-2ν}` has coefficients
//! `x_a b_k + b_{k−e_a}`.

const NONE: usize = usize::MAX;

/// All multi-indices in `d` variables with total degree `≤ order`, graded.
#[derive(Clone, Debug)]
pub struct MultiIndexSet {
    pub dim: usize,
    pub order: usize,
    /// Row-major `len × dim` exponents.
    exps: Vec<u8>,
    degree: Vec<usize>,
    /// Index of `k − e_i`, or `NONE`.
    minus1: Vec<usize>,
    /// Index of `k − 2e_i`, or `NONE`.
    minus2: Vec<usize>,
}

impl MultiIndexSet {
    pub fn new(dim: usize, order: usize) -> Self {
        let mut list: Vec<Vec<u8>> = Vec::new();
        for deg in 0..=order {
            let mut cur = vec![0u8; dim];
            graded(&mut list, &mut cur, 0, deg);
        }
        let find = |k: &[u8]| list.iter().position(|m| m.as_slice() == k).unwrap_or(NONE);
        let len = list.len();
        let mut minus1 = vec![NONE; len * dim];
        let mut minus2 = vec![NONE; len * dim];
        for (idx, k) in list.iter().enumerate() {
            for i in 0..dim {
                if k[i] >= 1 {
                    let mut m = k.clone();
                    m[i] -= 1;
                    minus1[idx * dim + i] = find(&m);
                }
                if k[i] >= 2 {
                    let mut m = k.clone();
                    m[i] -= 2;
                    minus2[idx * dim + i] = find(&m);
                }
            }
        }
        MultiIndexSet {
            dim,
            order,
            degree: list.iter().map(|k| k.iter().map(|&e| e as usize).sum()).collect(),
            exps: list.into_iter().flatten().collect(),
            minus1,
            minus2,
        }
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn exponents(&self, idx: usize) -> &[u8] {
        &self.exps[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Index of the unit multi-index `e_a`.
    pub fn unit(&self, a: usize) -> usize {
        (0..self.len())
            .find(|&i| self.degree[i] == 1 && self.exponents(i)[a] == 1)
            .expect("order >= 1")
    }

    /// Accumulate `q · h^k` for every multi-index into `out`.
    pub fn add_monomials(&self, h: &[f64], q: f64, pows: &mut [f64], out: &mut [f64]) {
        let d = self.dim;
        let stride = self.order + 1;
        for a in 0..d {
            pows[a * stride] = 1.0;
            for e in 1..stride {
                pows[a * stride + e] = pows[a * stride + e - 1] * h[a];
            }
        }
        for (idx, o) in out.iter_mut().enumerate() {
            let k = &self.exps[idx * d..(idx + 1) * d];
            let mut m = q;
            for a in 0..d {
                m *= pows[a * stride + k[a] as usize];
            }
            *o += m;
        }
    }

    /// Fill `b` with the Taylor coefficients of `|x + h|^{-2ν}` in `h`, where `two_nu = n + 1`.
    pub fn scalar_coefficients(&self, x: &[f64], r2: f64, b0: f64, two_nu: f64, b: &mut [f64]) {
        let d = self.dim;
        b[0] = b0;
        let inv_r2 = 1.0 / r2;
        for idx in 1..self.len() {
            let deg = self.degree[idx] as f64;
            let mut s = 0.0;
            for i in 0..d {
                let m1 = self.minus1[idx * d + i];
                if m1 != NONE {
                    s -= (2.0 * deg - 2.0 + two_nu) * x[i] * b[m1];
                }
                let m2 = self.minus2[idx * d + i];
                if m2 != NONE {
                    s -= (deg - 2.0 + two_nu) * b[m2];
                }
            }
            b[idx] = s * inv_r2 / deg;
        }
    }

    /// `out_a += Σ_k (x_a b_k + b_{k−e_a}) M_k`.
    pub fn contract(&self, x: &[f64], b: &[f64], moments: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for a in 0..d {
            let mut s = 0.0;
            for idx in 0..self.len() {
                let mut c = x[a] * b[idx];
                let m1 = self.minus1[idx * d + a];
                if m1 != NONE {
                    c += b[m1];
                }
                s += c * moments[idx];
            }
            out[a] += s;
        }
    }
}

fn graded(list: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, axis: usize, remaining: usize) {
    if axis + 1 == cur.len() {
        cur[axis] = remaining as u8;
        list.push(cur.clone());
        return;
    }
    for e in (0..=remaining).rev() {
        cur[axis] = e as u8;
        graded(list, cur, axis + 1, remaining - e);
    }
    cur[axis] = 0;
}
