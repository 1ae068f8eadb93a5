//! Within transformation by alternating projections.
//!
//! Each sweep projects every column off each fixed-effect subspace in turn:
//! group means for categorical effects, and a per-group intercept and slope
//! in time for industry trends. Sweeps repeat until the largest change to
//! any cell falls below `TOLERANCE` relative to the column's scale.

/// Convergence threshold on the max cell change, relative to `max(1, max|x|)`.
pub const TOLERANCE: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, Default)]
pub struct FixedEffects {
    /// Dense group id per row, one vector per absorbed categorical effect.
    pub groups: Vec<Vec<usize>>,
    /// Group-specific linear trends: dense group id and time value per row.
    pub trends: Option<(Vec<usize>, Vec<f64>)>,
}

impl FixedEffects {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty() && self.trends.is_none()
    }

    fn n_groups(ids: &[usize]) -> usize {
        ids.iter().copied().max().map_or(0, |m| m + 1)
    }
}

#[derive(Debug, Clone)]
pub struct Demeaned {
    pub columns: Vec<Vec<f64>>,
    /// Largest number of sweeps any column needed.
    pub sweeps: usize,
    pub converged: bool,
}

struct GroupMeans {
    ids: Vec<usize>,
    counts: Vec<f64>,
    sums: Vec<f64>,
}

impl GroupMeans {
    fn new(ids: &[usize]) -> Self {
        let n = FixedEffects::n_groups(ids);
        let mut counts = vec![0.0; n];
        for &g in ids {
            counts[g] += 1.0;
        }
        GroupMeans { ids: ids.to_vec(), counts, sums: vec![0.0; n] }
    }

    fn project_out(&mut self, x: &mut [f64]) -> f64 {
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        for (&g, &v) in self.ids.iter().zip(x.iter()) {
            self.sums[g] += v;
        }
        let mut max_change: f64 = 0.0;
        for (&g, v) in self.ids.iter().zip(x.iter_mut()) {
            let m = self.sums[g] / self.counts[g];
            *v -= m;
            max_change = max_change.max(m.abs());
        }
        max_change
    }
}

struct GroupTrends {
    ids: Vec<usize>,
    time: Vec<f64>,
    n: Vec<f64>,
    st: Vec<f64>,
    stt: Vec<f64>,
}

impl GroupTrends {
    fn new(ids: &[usize], time: &[f64]) -> Self {
        let g = FixedEffects::n_groups(ids);
        let (mut n, mut st, mut stt) = (vec![0.0; g], vec![0.0; g], vec![0.0; g]);
        for (&k, &t) in ids.iter().zip(time) {
            n[k] += 1.0;
            st[k] += t;
            stt[k] += t * t;
        }
        GroupTrends { ids: ids.to_vec(), time: time.to_vec(), n, st, stt }
    }

    fn project_out(&self, x: &mut [f64]) -> f64 {
        let g = self.n.len();
        let (mut sx, mut stx) = (vec![0.0; g], vec![0.0; g]);
        for ((&k, &t), &v) in self.ids.iter().zip(&self.time).zip(x.iter()) {
            sx[k] += v;
            stx[k] += t * v;
        }
        let mut coef = vec![(0.0, 0.0); g];
        for k in 0..g {
            let (n, st, stt) = (self.n[k], self.st[k], self.stt[k]);
            let det = n * stt - st * st;
            coef[k] = if det > 1e-12 * n * n.max(stt) {
                let slope = (n * stx[k] - st * sx[k]) / det;
                ((sx[k] - slope * st) / n, slope)
            } else {
                (sx[k] / n, 0.0)
            };
        }
        let mut max_change: f64 = 0.0;
        for ((&k, &t), v) in self.ids.iter().zip(&self.time).zip(x.iter_mut()) {
            let fit = coef[k].0 + coef[k].1 * t;
            *v -= fit;
            max_change = max_change.max(fit.abs());
        }
        max_change
    }
}

/// Demeans every column against the fixed effects.
pub fn within_transform(columns: &[Vec<f64>], fe: &FixedEffects) -> Demeaned {
    if fe.is_empty() {
        return Demeaned { columns: columns.to_vec(), sweeps: 0, converged: true };
    }
    let mut means: Vec<GroupMeans> = fe.groups.iter().map(|g| GroupMeans::new(g)).collect();
    let trends = fe.trends.as_ref().map(|(ids, t)| GroupTrends::new(ids, t));
    // A single projection is exact.
    let single = means.len() + usize::from(trends.is_some()) == 1;

    let mut out = Vec::with_capacity(columns.len());
    let mut sweeps = 0;
    let mut converged = true;
    for col in columns {
        let mut x = col.clone();
        let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut done = false;
        let mut s = 0;
        while s < MAX_SWEEPS {
            s += 1;
            let mut change: f64 = 0.0;
            for m in &mut means {
                change = change.max(m.project_out(&mut x));
            }
            if let Some(t) = &trends {
                change = change.max(t.project_out(&mut x));
            }
            if single || change < TOLERANCE * scale {
                done = true;
                break;
            }
        }
        sweeps = sweeps.max(s);
        converged &= done;
        out.push(x);
    }
    Demeaned { columns: out, sweeps, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_way_exact() {
        let ids = vec![0, 0, 1, 1, 1, 2];
        let x = vec![1.0, 3.0, 2.0, 4.0, 9.0, 7.0];
        let d = within_transform(&[x], &FixedEffects { groups: vec![ids.clone()], trends: None });
        assert_eq!(d.sweeps, 1);
        for g in 0..3 {
            let s: f64 = ids.iter().zip(&d.columns[0]).filter(|(&i, _)| i == g).map(|(_, v)| v).sum();
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn balanced_two_way_matches_double_demeaning() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (n_i, n_t) = (6, 5);
        let unit: Vec<usize> = (0..n_i * n_t).map(|r| r / n_t).collect();
        let time: Vec<usize> = (0..n_i * n_t).map(|r| r % n_t).collect();
        let x: Vec<f64> = (0..n_i * n_t).map(|_| rng.random_range(-5.0..5.0)).collect();
        let d = within_transform(std::slice::from_ref(&x), &FixedEffects { groups: vec![unit.clone(), time.clone()], trends: None });
        let grand: f64 = x.iter().sum::<f64>() / x.len() as f64;
        for r in 0..x.len() {
            let mi: f64 = (0..n_t).map(|t| x[unit[r] * n_t + t]).sum::<f64>() / n_t as f64;
            let mt: f64 = (0..n_i).map(|i| x[i * n_t + time[r]]).sum::<f64>() / n_i as f64;
            assert!((d.columns[0][r] - (x[r] - mi - mt + grand)).abs() < 1e-12);
        }
        assert!(d.converged);
    }

    #[test]
    fn trend_projection_removes_group_lines() {
        let ids = vec![0, 0, 0, 1, 1, 1];
        let t = vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0];
        let x: Vec<f64> = ids.iter().zip(&t).map(|(&g, &tt)| if g == 0 { 2.0 + 3.0 * tt } else { -1.0 + 0.5 * tt }).collect();
        let d = within_transform(&[x], &FixedEffects { groups: vec![], trends: Some((ids, t)) });
        assert!(d.columns[0].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn unbalanced_two_way_converges_to_orthogonal_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut unit = vec![];
        let mut time = vec![];
        for i in 0..15 {
            for t in 0..8 {
                if rng.random_bool(0.7) {
                    unit.push(i);
                    time.push(t);
                }
            }
        }
        // Relabel densely.
        let mut map = std::collections::HashMap::new();
        let unit: Vec<usize> = unit.iter().map(|u| { let n = map.len(); *map.entry(*u).or_insert(n) }).collect();
        let x: Vec<f64> = (0..unit.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = within_transform(&[x], &FixedEffects { groups: vec![unit.clone(), time.clone()], trends: None });
        assert!(d.converged);
        for ids in [&unit, &time] {
            let g = ids.iter().max().unwrap() + 1;
            let mut sums = vec![0.0; g];
            for (&k, v) in ids.iter().zip(&d.columns[0]) {
                sums[k] += v;
            }
            assert!(sums.iter().all(|s| s.abs() < 1e-8));
        }
    }
}
