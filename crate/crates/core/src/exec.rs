//! Execution policy for the data-parallel loops.
//!
//! Every parallel loop in the crate maps an index range to owned results and
//! reduces them afterwards in index order, so the parallel and sequential
//! paths produce bit-identical output.

/// How per-target loops are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Rayon work-stealing. Falls back to sequential when the `parallel`
    /// feature is disabled.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Evaluate `f(i)` for `i in 0..n`, results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Fill `out` in chunks of `width`; chunk `i` is written by `f(i, chunk)`.
    pub fn fill_chunks<T, F>(self, out: &mut [T], width: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        if width == 0 {
            return;
        }
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                out.par_chunks_mut(width)
                    .enumerate()
                    .for_each(|(i, c)| f(i, c));
            }
            _ => out
                .chunks_mut(width)
                .enumerate()
                .for_each(|(i, c)| f(i, c)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = Exec::Sequential.map(1000, f);
        let b = Exec::Parallel.map(1000, f);
        assert_eq!(a, b);

        let mut x = vec![0.0; 30];
        let mut y = vec![0.0; 30];
        let g = |i: usize, c: &mut [f64]| {
            for (k, v) in c.iter_mut().enumerate() {
                *v = (i * 3 + k) as f64;
            }
        };
        Exec::Sequential.fill_chunks(&mut x, 3, g);
        Exec::Parallel.fill_chunks(&mut y, 3, g);
        assert_eq!(x, y);
        assert_eq!(x[7], 7.0);
    }
}
