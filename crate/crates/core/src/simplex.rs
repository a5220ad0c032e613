//! Maximization over the probability simplex.
//!
//! [`maximize_concave`] is a pairwise conditional-gradient method with an
//! exact one-dimensional line search; for a concave objective its Frank-Wolfe
//! gap `max_k g_k - <g, x>` bounds the suboptimality. [`ascend_projected`] is
//! projected gradient ascent with backtracking for objectives that are only
//! smooth; it returns a stationary point.

use crate::error::{Error, Result};

/// Smooth objective on the simplex. `value_grad` overwrites `grad`.
pub(crate) trait Objective: Sync {
    fn dim(&self) -> usize;
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn value(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim()];
        self.value_grad(x, &mut g)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Optimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
}

pub(crate) const GAP_TOLERANCE: f64 = 1e-9;
pub(crate) const MAX_ITERATIONS: usize = 100_000;

/// `max_k g_k - <g, x>`, clamped at zero.
pub(crate) fn fw_gap(x: &[f64], g: &[f64]) -> f64 {
    let max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inner: f64 = x.iter().zip(g).map(|(a, b)| a * b).sum();
    (max - inner).max(0.0)
}

/// Pairwise Frank-Wolfe from `start` until the gap is at most `tol`.
pub(crate) fn maximize_concave<O: Objective>(
    obj: &O,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Optimum> {
    let d = obj.dim();
    let mut x = start.to_vec();
    let mut g = vec![0.0; d];
    let mut value = obj.value_grad(&x, &mut g);
    let mut gap = fw_gap(&x, &g);
    let mut iterations = 0;
    let mut scratch = vec![0.0; d];
    while gap > tol {
        if iterations == max_iter {
            return Err(Error::NonConvergence { iterations, gap });
        }
        iterations += 1;
        // Toward the best vertex, away from the worst active one.
        let s = argmax(&g, |_| true);
        let a = argmin(&g, |k| x[k] > 0.0);
        if s == a {
            break;
        }
        let gamma_max = x[a];
        let slope = |gamma: f64, scratch: &mut [f64]| -> f64 {
            let mut y = x.clone();
            y[s] += gamma;
            y[a] -= gamma;
            obj.value_grad(&y, scratch);
            scratch[s] - scratch[a]
        };
        let gamma = if slope(gamma_max, &mut scratch) >= 0.0 {
            gamma_max
        } else {
            line_search(|t| slope(t, &mut vec![0.0; d]), gamma_max)
        };
        let before = value;
        x[s] += gamma;
        x[a] = if gamma == gamma_max { 0.0 } else { x[a] - gamma };
        value = obj.value_grad(&x, &mut g);
        gap = fw_gap(&x, &g);
        // No representable progress left: the gap is rounding noise.
        if gamma == 0.0 || (value <= before && gap <= tol * 1e3) {
            break;
        }
    }
    if gap > tol * 1e3 {
        return Err(Error::NonConvergence { iterations, gap });
    }
    Ok(Optimum {
        point: x,
        value,
        gap,
        iterations,
    })
}

/// Root of the decreasing function `slope` on `[0, hi]`, given
/// `slope(0) > 0 > slope(hi)`. Illinois regula falsi with a bisection guard.
fn line_search(mut slope: impl FnMut(f64) -> f64, hi: f64) -> f64 {
    let (mut a, mut b) = (0.0, hi);
    let (mut fa, mut fb) = (slope(a), slope(b));
    if fa <= 0.0 {
        return 0.0;
    }
    let mut side = 0i8;
    for i in 0..200 {
        if b - a <= f64::EPSILON * hi {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) || i % 8 == 7 {
            c = 0.5 * (a + b);
        }
        let fc = slope(c);
        if fc == 0.0 {
            return c;
        }
        if fc > 0.0 {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

fn argmax(v: &[f64], keep: impl Fn(usize) -> bool) -> usize {
    let mut best = usize::MAX;
    for k in 0..v.len() {
        if keep(k) && (best == usize::MAX || v[k] > v[best]) {
            best = k;
        }
    }
    best
}

fn argmin(v: &[f64], keep: impl Fn(usize) -> bool) -> usize {
    let mut best = usize::MAX;
    for k in 0..v.len() {
        if keep(k) && (best == usize::MAX || v[k] < v[best]) {
            best = k;
        }
    }
    best
}

/// Euclidean projection onto the simplex (sort-based).
pub(crate) fn project(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    let mut x: Vec<f64> = v.iter().map(|&vi| (vi - theta).max(0.0)).collect();
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|xi| *xi /= s);
    x
}

/// Projected gradient ascent with Armijo backtracking. Stops when the
/// Frank-Wolfe gap falls below `tol`, when steps stop moving, or after
/// `max_iter` iterations; the final gap is reported either way.
pub(crate) fn ascend_projected<O: Objective>(
    obj: &O,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Optimum {
    let d = obj.dim();
    let mut x = start.to_vec();
    let mut g = vec![0.0; d];
    let mut value = obj.value_grad(&x, &mut g);
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    let mut gap = fw_gap(&x, &g);
    while gap > tol && iterations < max_iter {
        iterations += 1;
        let mut moved = false;
        step = (step * 2.0).min(1e6);
        while step > 1e-14 {
            let trial: Vec<f64> = project(
                &x.iter()
                    .zip(&g)
                    .map(|(a, b)| a + step * b)
                    .collect::<Vec<_>>(),
            );
            let ascent: f64 = trial.iter().zip(&x).zip(&g).map(|((t, a), b)| (t - a) * b).sum();
            let v = obj.value(&trial);
            if v >= value + 1e-4 * ascent && trial != x {
                x = trial;
                moved = v > value;
                value = obj.value_grad(&x, &mut g);
                break;
            }
            step *= 0.5;
        }
        gap = fw_gap(&x, &g);
        if !moved {
            break;
        }
    }
    Optimum {
        point: x,
        value,
        gap,
        iterations,
    }
}
