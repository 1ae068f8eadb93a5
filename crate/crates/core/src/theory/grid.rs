//! Derivative-free maximization by nested grid search with refinement.
//!
//! A coarse rectangular grid is scanned, then the search repeatedly zooms
//! into a small window around the incumbent with a step `zoom` times finer.
//! Nothing here knows about the closed-form solutions it is used to check.

use super::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearch {
    /// Coarse points per free dimension (one- and two-dimensional searches).
    pub points: usize,
    /// Refinement passes after the coarse scan.
    pub refinements: usize,
    /// Step reduction per refinement.
    pub zoom: usize,
    /// Half-width of each refinement window, in units of the previous step.
    pub window: usize,
    /// Upper bound on coarse-grid evaluations; higher-dimensional searches
    /// use fewer points per axis and make up the resolution with extra
    /// refinement passes.
    pub max_coarse_evaluations: usize,
}

impl Default for GridSearch {
    fn default() -> Self {
        GridSearch { points: 2001, refinements: 2, zoom: 10, window: 5, max_coarse_evaluations: 2001 * 2001 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub argmax: Vec<f64>,
    pub value: f64,
    /// Spacing of the final grid.
    pub final_step: f64,
}

impl GridSearch {
    /// Six refinement passes. Used where values at a grid argmax feed
    /// further differences (contribution bounds).
    pub fn fine() -> Self {
        GridSearch { refinements: 6, ..GridSearch::default() }
    }

    /// Symmetric bracket `[-2A / max(a, b, 1), 2A / max(a, b, 1)]`.
    pub fn bracket(params: &ModelParams) -> (f64, f64) {
        let scale = params.common_effect.max(params.private_effect).max(1.0);
        let half = 2.0 * params.market_size / scale;
        (-half, half)
    }

    /// Maximizes `f` over the box `[lo, hi]^dims`.
    pub fn maximize<F>(&self, dims: usize, lo: f64, hi: f64, f: F) -> GridOptimum
    where
        F: Fn(&[f64]) -> f64,
    {
        assert!(dims >= 1 && self.points >= 2 && hi > lo);
        let mut per_axis = self.points;
        while dims > 1 && (per_axis as f64).powi(dims as i32) > self.max_coarse_evaluations as f64 {
            per_axis -= 1;
        }
        let mut step = (hi - lo) / (per_axis - 1) as f64;
        // Extra passes so the final step matches the full-resolution search.
        let target_step = (hi - lo) / (self.points - 1) as f64;
        let mut extra = 0;
        let mut s = step;
        while s > target_step * (1.0 + 1e-12) {
            s /= self.zoom as f64;
            extra += 1;
        }

        let mut lower = vec![lo; dims];
        let mut counts = vec![per_axis; dims];
        let (mut best, mut best_value) = scan(&lower, step, &counts, &f);

        for _ in 0..self.refinements + extra {
            let next = step / self.zoom as f64;
            let half = (self.window * self.zoom) as f64;
            for d in 0..dims {
                lower[d] = best[d] - half * next;
                counts[d] = 2 * self.window * self.zoom + 1;
            }
            let (cand, value) = scan(&lower, next, &counts, &f);
            if value >= best_value {
                best = cand;
                best_value = value;
            }
            step = next;
        }
        GridOptimum { argmax: best, value: best_value, final_step: step }
    }
}

fn scan<F>(lower: &[f64], step: f64, counts: &[usize], f: &F) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let dims = lower.len();
    let mut idx = vec![0usize; dims];
    let mut x = lower.to_vec();
    let mut best = x.clone();
    let mut best_value = f64::NEG_INFINITY;
    loop {
        for d in 0..dims {
            x[d] = lower[d] + step * idx[d] as f64;
        }
        let v = f(&x);
        if v > best_value {
            best_value = v;
            best.copy_from_slice(&x);
        }
        // Odometer increment.
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < counts[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == dims {
                return (best, best_value);
            }
        }
    }
}
