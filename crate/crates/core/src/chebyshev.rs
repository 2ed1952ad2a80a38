//! Chebyshev–Lobatto machinery on the unit interval `[0, 1]`.
//!
//! Nodes are ordered from `x = 0` to `x = 1`:
//! `x_j = (1 - cos(pi j / n)) / 2`, `j = 0..=n`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

/// Lobatto nodes on `[0, 1]`, `x_0 = 0`, `x_{n} = 1`.
pub fn lobatto_nodes(count: usize) -> Vec<f64> {
    let n = count - 1;
    (0..count)
        .map(|j| {
            if j == 0 {
                0.0
            } else if j == n {
                1.0
            } else {
                // (1 - cos t)/2 = sin^2(t/2), exact near both ends
                let s = (0.5 * PI * j as f64 / n as f64).sin();
                s * s
            }
        })
        .collect()
}

/// First-derivative collocation matrix on the nodes of [`lobatto_nodes`].
pub fn diff_matrix(count: usize) -> DMatrix<f64> {
    let n = count - 1;
    let theta: Vec<f64> = (0..count).map(|j| PI * j as f64 / n as f64).collect();
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let mut d = DMatrix::<f64>::zeros(count, count);
    for i in 0..count {
        let mut row_sum = 0.0;
        for j in 0..count {
            if i == j {
                continue;
            }
            // t_i - t_j with t = cos(theta), via the product formula
            let dt = -2.0 * (0.5 * (theta[i] + theta[j])).sin() * (0.5 * (theta[i] - theta[j])).sin();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            // d/dx = -2 d/dt
            let entry = -2.0 * c(i) / c(j) * sign / dt;
            d[(i, j)] = entry;
            row_sum += entry;
        }
        d[(i, i)] = -row_sum;
    }
    d
}

/// Barycentric interpolation weights for Lobatto nodes.
pub fn barycentric_weights(count: usize) -> Vec<f64> {
    let n = count - 1;
    (0..count)
        .map(|j| {
            let w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * w
            } else {
                w
            }
        })
        .collect()
}

/// Evaluates the polynomial interpolant of `values` (given at `nodes`) at `x`.
pub fn barycentric_eval(nodes: &[f64], weights: &[f64], values: &[f64], x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&xj, &wj), &fj) in nodes.iter().zip(weights).zip(values) {
        let diff = x - xj;
        if diff == 0.0 {
            return fj;
        }
        let t = wj / diff;
        num += t * fj;
        den += t;
    }
    num / den
}

/// Clenshaw–Curtis rule with `m + 1` points on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct ClenshawCurtis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ClenshawCurtis {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "Clenshaw-Curtis needs at least 3 points");
        let theta: Vec<f64> = (0..=m).map(|j| PI * j as f64 / m as f64).collect();
        let nodes: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
        let mf = m as f64;
        let mut weights = vec![0.0; m + 1];
        let mut v = vec![1.0; m - 1];
        if m.is_multiple_of(2) {
            weights[0] = 1.0 / (mf * mf - 1.0);
            weights[m] = weights[0];
            for k in 1..m / 2 {
                let kf = k as f64;
                for (vi, th) in v.iter_mut().zip(&theta[1..m]) {
                    *vi -= 2.0 * (2.0 * kf * th).cos() / (4.0 * kf * kf - 1.0);
                }
            }
            for (vi, th) in v.iter_mut().zip(&theta[1..m]) {
                *vi -= (mf * th).cos() / (mf * mf - 1.0);
            }
        } else {
            weights[0] = 1.0 / (mf * mf);
            weights[m] = weights[0];
            for k in 1..=(m - 1) / 2 {
                let kf = k as f64;
                for (vi, th) in v.iter_mut().zip(&theta[1..m]) {
                    *vi -= 2.0 * (2.0 * kf * th).cos() / (4.0 * kf * kf - 1.0);
                }
            }
        }
        for (w, vi) in weights[1..m].iter_mut().zip(&v) {
            *w = 2.0 * vi / mf;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        if b == a {
            return 0.0;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * t);
        }
        acc * half
    }
}
