//! The linearized boundary value problem
//!
//! ```text
//! Lap u = F in (0,1) x S^1,   B u = (0, G1, G2) on {0} x S^1,   u = phi on {1} x S^1,
//! B u = (u1 + u2 + u3, d_n u2 - d_n u3, d_n u1 - (d_n u2 + d_n u3)/2),
//! ```
//!
//! decoupled by `v1 = u1 + u2 + u3` (Dirichlet), `v2 = u2 - u3` and
//! `v3 = u1 - (u2 + u3)/2` (Neumann at `x = 0`, Dirichlet at `x = 1`), and solved
//! one Fourier mode at a time: `a'' - (2 pi k)^2 a = f_k`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::chebyshev::{barycentric_eval, ClenshawCurtis};
use crate::error::{Error, Result};
use crate::field::{End, Grid, Periodic, ScalarField, TripleField};
use crate::fourier::RealSpectrum;
use crate::sampling::{random_field, random_periodic, SampleRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// `a(0) = 0`, `a(1) = phi_k`.
    Dirichlet,
    /// `a'(0) = -g_k` (i.e. `d_n a = g_k` with `d_n = -d_x`), `a(1) = phi_k`.
    Mixed,
}

/// How a single mode is solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModePath {
    /// Chebyshev collocation with boundary rows replaced by the boundary conditions.
    Collocation,
    /// Variation-of-constants formulas with Clenshaw–Curtis quadrature.
    Formula,
}

/// One Fourier mode's two-point problem; `forcing` is sampled on the grid's x-nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeProblem {
    pub k: usize,
    pub kind: BoundaryKind,
    pub forcing: Vec<f64>,
    /// Neumann datum `g_k` at `x = 0` (ignored for Dirichlet problems).
    pub neumann: f64,
    /// Dirichlet datum `phi_k` at `x = 1`.
    pub dirichlet: f64,
}

fn wavenumber(k: usize) -> f64 {
    2.0 * PI * k as f64
}

/// LU-factored collocation operator for one `(k, kind)`.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    k: usize,
    kind: BoundaryKind,
    matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

impl ModeOperator {
    pub fn new(grid: &Grid, k: usize, kind: BoundaryKind) -> Self {
        let n = grid.nx();
        let kappa = wavenumber(k);
        let mut a: DMatrix<f64> = grid.d2().clone();
        for i in 0..n {
            a[(i, i)] -= kappa * kappa;
        }
        for j in 0..n {
            a[(0, j)] = match kind {
                BoundaryKind::Dirichlet => 0.0,
                BoundaryKind::Mixed => grid.d1()[(0, j)],
            };
            a[(n - 1, j)] = 0.0;
        }
        if kind == BoundaryKind::Dirichlet {
            a[(0, 0)] = 1.0;
        }
        a[(n - 1, n - 1)] = 1.0;
        Self { k, kind, lu: a.clone().lu(), matrix: a }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn solve(&self, forcing: &[f64], neumann: f64, dirichlet: f64) -> Vec<f64> {
        let n = forcing.len();
        let mut rhs = DVector::from_column_slice(forcing);
        rhs[0] = match self.kind {
            BoundaryKind::Dirichlet => 0.0,
            BoundaryKind::Mixed => -neumann,
        };
        rhs[n - 1] = dirichlet;
        let mut sol = self.lu.solve(&rhs).expect("mode operator is nonsingular");
        // one step of iterative refinement
        let residual = &rhs - &self.matrix * &sol;
        sol += self.lu.solve(&residual).expect("mode operator is nonsingular");
        sol.iter().copied().collect()
    }
}

/// Max of `|a'' - (2 pi k)^2 a - f|` over interior collocation nodes.
pub fn mode_residual(grid: &Grid, problem: &ModeProblem, a: &[f64]) -> f64 {
    let kappa = wavenumber(problem.k);
    let d2a = grid.diff_x_column(a, 2);
    (1..grid.nx() - 1)
        .map(|j| (d2a[j] - kappa * kappa * a[j] - problem.forcing[j]).abs())
        .fold(0.0, f64::max)
}

pub fn mode_solve(grid: &Grid, problem: &ModeProblem, path: ModePath) -> Vec<f64> {
    match path {
        ModePath::Collocation => {
            ModeOperator::new(grid, problem.k, problem.kind).solve(&problem.forcing, problem.neumann, problem.dirichlet)
        }
        ModePath::Formula => formula::solve(grid, problem),
    }
}

/// Dirichlet mode solve, collocation path.
pub fn mode_solve_dirichlet(grid: &Grid, problem: &ModeProblem) -> Result<Vec<f64>> {
    if problem.kind != BoundaryKind::Dirichlet {
        return Err(Error::Config("mode_solve_dirichlet given a mixed problem".into()));
    }
    Ok(mode_solve(grid, problem, ModePath::Collocation))
}

/// Mixed mode solve, collocation path.
pub fn mode_solve_mixed(grid: &Grid, problem: &ModeProblem) -> Result<Vec<f64>> {
    if problem.kind != BoundaryKind::Mixed {
        return Err(Error::Config("mode_solve_mixed given a Dirichlet problem".into()));
    }
    Ok(mode_solve(grid, problem, ModePath::Collocation))
}

/// Closed-form mode solutions.
///
/// For `k >= 1`, with `kappa = 2 pi k`,
/// `a(x) = ((int_1^x f e^{-kappa t} dt + C1) e^{kappa x} - (int_0^x f e^{kappa t} dt + C2) e^{-kappa x}) / (2 kappa)`
/// where the constants `C1, C2` fit the boundary conditions. Every exponential is
/// rewritten with a non-positive argument: the constants' numerators and
/// denominators are divided by `e^{2 kappa}` and the growing factors are folded
/// into the kernels `e^{kappa (t - x)}` (`t <= x`) and `e^{kappa (x - t)}` (`t >= x`).
pub mod formula {
    use super::*;

    struct Interp<'a> {
        grid: &'a Grid,
        values: &'a [f64],
    }

    impl Interp<'_> {
        fn at(&self, t: f64) -> f64 {
            barycentric_eval(self.grid.x(), self.grid.barycentric_weights(), self.values, t)
        }
    }

    fn rule_size(nx: usize, kappa: f64) -> usize {
        let m = (nx + 2).max(32 + (8.0 * kappa.sqrt()).ceil() as usize);
        m + m % 2
    }

    pub fn solve(grid: &Grid, p: &ModeProblem) -> Vec<f64> {
        if p.k == 0 {
            solve_zero_mode(grid, p)
        } else {
            solve_oscillatory_mode(grid, p)
        }
    }

    fn solve_zero_mode(grid: &Grid, p: &ModeProblem) -> Vec<f64> {
        let f = Interp { grid, values: &p.forcing };
        let cc = ClenshawCurtis::new(rule_size(grid.nx(), 0.0));
        // int_0^x int_0^s f(t) dt ds = int_0^x (x - t) f(t) dt
        let double = |x: f64| cc.integrate(0.0, x, |t| (x - t) * f.at(t));
        let total = double(1.0);
        let (phi, g) = (p.dirichlet, p.neumann);
        grid.x()
            .iter()
            .map(|&x| match p.kind {
                BoundaryKind::Dirichlet => double(x) + (phi - total) * x,
                BoundaryKind::Mixed => double(x) - g * x + phi - total + g,
            })
            .collect()
    }

    fn solve_oscillatory_mode(grid: &Grid, p: &ModeProblem) -> Vec<f64> {
        let kappa = wavenumber(p.k);
        let f = Interp { grid, values: &p.forcing };
        let cc = ClenshawCurtis::new(rule_size(grid.nx(), kappa));
        // left(x) = int_0^x f(t) e^{kappa (t - x)} dt, right(x) = int_x^1 f(t) e^{kappa (x - t)} dt
        let left = |x: f64| cc.integrate(0.0, x, |t| f.at(t) * (kappa * (t - x)).exp());
        let right = |x: f64| cc.integrate(x, 1.0, |t| f.at(t) * (kappa * (x - t)).exp());
        // I- = int_0^1 f e^{-kappa t},  J+ = e^{-kappa} int_0^1 f e^{kappa t}
        let i_minus = right(0.0);
        let j_plus = left(1.0);
        let (phi, g) = (p.dirichlet, p.neumann);
        let e2 = (-2.0 * kappa).exp();
        let two_kappa = 2.0 * kappa;
        grid.x()
            .iter()
            .map(|&x| {
                let up = (kappa * (x - 1.0)).exp(); // e^{kappa x} / e^{kappa}
                let up2 = (kappa * (x - 2.0)).exp(); // e^{kappa x} / e^{2 kappa}
                let down = (-kappa * x).exp();
                let down1 = (-kappa * (1.0 + x)).exp();
                // C1 e^{kappa x} and C2 e^{-kappa x}
                let (c1_term, c2_term) = match p.kind {
                    BoundaryKind::Dirichlet => (
                        (two_kappa * phi * up - i_minus * up2 + j_plus * up) / (1.0 - e2),
                        (two_kappa * phi * down1 - i_minus * down + j_plus * down1) / (1.0 - e2),
                    ),
                    BoundaryKind::Mixed => (
                        (two_kappa * phi * up - 2.0 * g * up2 + i_minus * up2 + j_plus * up) / (1.0 + e2),
                        (-two_kappa * phi * down1 - 2.0 * g * down + i_minus * down - j_plus * down1) / (1.0 + e2),
                    ),
                };
                (-right(x) + c1_term - left(x) - c2_term) / two_kappa
            })
            .collect()
    }
}

/// One scalar problem of the decoupled system.
#[derive(Clone, Debug)]
pub struct ScalarProblem {
    pub kind: BoundaryKind,
    pub forcing: ScalarField,
    /// Neumann data on `{0} x S^1` (mixed problems only).
    pub neumann: Option<Periodic>,
    pub dirichlet: Periodic,
}

/// Splits the coupled system into the problems for `v1`, `v2`, `v3`.
pub fn decouple(f: &TripleField, g: &(Periodic, Periodic), phi: &crate::field::BoundaryTriple) -> Result<[ScalarProblem; 3]> {
    let ny = f.grid().ny();
    if phi.len() != ny || g.0.len() != ny || g.1.len() != ny {
        return Err(Error::GridMismatch("boundary data length differs from the field's y-grid".into()));
    }
    let [f1, f2, f3] = f.comps();
    let [p1, p2, p3] = phi.comps();
    let half_sum = |a: &ScalarField, b: &ScalarField| a.zip_with(b, |x, y| 0.5 * (x + y));
    Ok([
        ScalarProblem {
            kind: BoundaryKind::Dirichlet,
            forcing: &(f1 + f2) + f3,
            neumann: None,
            dirichlet: Periodic::new((0..ny).map(|m| p1.values()[m] + p2.values()[m] + p3.values()[m]).collect()),
        },
        ScalarProblem {
            kind: BoundaryKind::Mixed,
            forcing: f2 - f3,
            neumann: Some(g.0.clone()),
            dirichlet: p2.zip_with(p3, |a, b| a - b),
        },
        ScalarProblem {
            kind: BoundaryKind::Mixed,
            forcing: f1 - &half_sum(f2, f3),
            neumann: Some(g.1.clone()),
            dirichlet: Periodic::new(
                (0..ny)
                    .map(|m| p1.values()[m] - 0.5 * (p2.values()[m] + p3.values()[m]))
                    .collect(),
            ),
        },
    ])
}

/// Inverts `v1 = u1 + u2 + u3`, `v2 = u2 - u3`, `v3 = u1 - (u2 + u3)/2`.
pub fn recompose(v1: &ScalarField, v2: &ScalarField, v3: &ScalarField) -> Result<TripleField> {
    let grid = v1.grid();
    let n = v1.values().len();
    let mut u1 = Vec::with_capacity(n);
    let mut u2 = Vec::with_capacity(n);
    let mut u3 = Vec::with_capacity(n);
    for ((&a, &b), &c) in v1.values().iter().zip(v2.values()).zip(v3.values()) {
        u1.push((a + 2.0 * c) / 3.0);
        let common = (a - c) / 3.0;
        u2.push(common + 0.5 * b);
        u3.push(common - 0.5 * b);
    }
    TripleField::new(
        ScalarField::new(grid, u1)?,
        ScalarField::new(v2.grid(), u2)?,
        ScalarField::new(v3.grid(), u3)?,
    )
}

/// The forward map of [`recompose`].
pub fn decompose(u: &TripleField) -> [ScalarField; 3] {
    let [u1, u2, u3] = u.comps();
    let v1 = &(u1 + u2) + u3;
    let v2 = u2 - u3;
    let v3 = u1 - &u2.zip_with(u3, |a, b| 0.5 * (a + b));
    [v1, v2, v3]
}

/// `B u` on `{0} x S^1`.
pub fn boundary_operator(u: &TripleField) -> [Periodic; 3] {
    let t = u.traces(End::Inner);
    let dn: Vec<Periodic> = (0..3).map(|i| u.comp(i).normal_derivative_inner()).collect();
    let ny = u.grid().ny();
    let sum = Periodic::new((0..ny).map(|m| t[0].values()[m] + t[1].values()[m] + t[2].values()[m]).collect());
    let b2 = dn[1].zip_with(&dn[2], |a, b| a - b);
    let b3 = Periodic::new(
        (0..ny)
            .map(|m| dn[0].values()[m] - 0.5 * (dn[1].values()[m] + dn[2].values()[m]))
            .collect(),
    );
    [sum, b2, b3]
}

/// Per-mode diagnostics from a field solve.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeRecord {
    pub k: usize,
    pub kind: BoundaryKind,
    /// `"cos"` or `"sin"`.
    pub part: &'static str,
    pub residual: f64,
    pub path: ModePath,
}

/// Writes `k,kind,part,residual,path` rows.
pub fn write_mode_dump<W: Write>(mut out: W, records: &[ModeRecord]) -> std::io::Result<()> {
    writeln!(out, "k,kind,part,residual,path")?;
    for r in records {
        writeln!(out, "{},{:?},{},{:e},{:?}", r.k, r.kind, r.part, r.residual, r.path)?;
    }
    Ok(())
}

/// Fourier-mode solver with cached collocation factorizations for every `k <= ny/2`.
#[derive(Clone, Debug)]
pub struct LinearSolver {
    grid: Grid,
    path: ModePath,
    dirichlet: Vec<ModeOperator>,
    mixed: Vec<ModeOperator>,
}

impl LinearSolver {
    pub fn new(grid: &Grid) -> Self {
        Self::with_path(grid, ModePath::Collocation)
    }

    pub fn with_path(grid: &Grid, path: ModePath) -> Self {
        let half = grid.ny() / 2;
        let build = |kind| (0..=half).map(|k| ModeOperator::new(grid, k, kind)).collect();
        Self {
            grid: grid.clone(),
            path,
            dirichlet: build(BoundaryKind::Dirichlet),
            mixed: build(BoundaryKind::Mixed),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn path(&self) -> ModePath {
        self.path
    }

    fn solve_mode(&self, problem: &ModeProblem) -> Vec<f64> {
        match self.path {
            ModePath::Collocation => {
                let ops = match problem.kind {
                    BoundaryKind::Dirichlet => &self.dirichlet,
                    BoundaryKind::Mixed => &self.mixed,
                };
                ops[problem.k].solve(&problem.forcing, problem.neumann, problem.dirichlet)
            }
            ModePath::Formula => formula::solve(&self.grid, problem),
        }
    }

    /// Solves one scalar problem, returning the field and per-mode records.
    pub fn solve_scalar_with_records(&self, p: &ScalarProblem) -> Result<(ScalarField, Vec<ModeRecord>)> {
        let grid = &self.grid;
        if p.forcing.grid() != grid {
            return Err(Error::GridMismatch(format!("{:?} vs solver {:?}", p.forcing.grid(), grid)));
        }
        let (nx, ny) = (grid.nx(), grid.ny());
        if p.dirichlet.len() != ny || p.neumann.as_ref().is_some_and(|g| g.len() != ny) {
            return Err(Error::GridMismatch("boundary data length differs from the y-grid".into()));
        }
        let fourier = grid.fourier();
        let half = ny / 2;
        let rows: Vec<RealSpectrum> = (0..nx).map(|j| fourier.analyze(p.forcing.row(j))).collect();
        let phi = p.dirichlet.spectrum(fourier);
        let g = match &p.neumann {
            Some(g) => g.spectrum(fourier),
            None => RealSpectrum::zeros(half),
        };
        let mut out: Vec<RealSpectrum> = (0..nx).map(|_| RealSpectrum::zeros(half)).collect();
        let mut records = Vec::with_capacity(2 * half);
        for k in 0..=half {
            let parts: &[(&'static str, bool)] = if k == 0 || k == half {
                &[("cos", true)]
            } else {
                &[("cos", true), ("sin", false)]
            };
            for &(part, is_cos) in parts {
                let pick = |s: &RealSpectrum| if is_cos { s.cos[k] } else { s.sin[k] };
                let problem = ModeProblem {
                    k,
                    kind: p.kind,
                    forcing: rows.iter().map(pick).collect(),
                    neumann: pick(&g),
                    dirichlet: pick(&phi),
                };
                let a = self.solve_mode(&problem);
                records.push(ModeRecord {
                    k,
                    kind: p.kind,
                    part,
                    residual: mode_residual(grid, &problem, &a),
                    path: self.path,
                });
                for (j, v) in a.into_iter().enumerate() {
                    if is_cos {
                        out[j].cos[k] = v;
                    } else {
                        out[j].sin[k] = v;
                    }
                }
            }
        }
        let values: Vec<Vec<f64>> = out.iter().map(|s| fourier.synthesize(s)).collect();
        Ok((ScalarField::from_rows(grid, &values), records))
    }

    pub fn solve_scalar(&self, p: &ScalarProblem) -> Result<ScalarField> {
        Ok(self.solve_scalar_with_records(p)?.0)
    }

    /// `Lap v = f`, `v(0, .) = 0`, `v(1, .) = phi`.
    pub fn solve_dirichlet(&self, f: &ScalarField, phi: &Periodic) -> Result<ScalarField> {
        self.solve_scalar(&ScalarProblem {
            kind: BoundaryKind::Dirichlet,
            forcing: f.clone(),
            neumann: None,
            dirichlet: phi.clone(),
        })
    }

    /// `Lap v = f`, `d_n v(0, .) = g`, `v(1, .) = phi`.
    pub fn solve_mixed(&self, f: &ScalarField, g: &Periodic, phi: &Periodic) -> Result<ScalarField> {
        self.solve_scalar(&ScalarProblem {
            kind: BoundaryKind::Mixed,
            forcing: f.clone(),
            neumann: Some(g.clone()),
            dirichlet: phi.clone(),
        })
    }

    /// Decouple, solve the three scalar problems, recompose.
    pub fn solve_system(
        &self,
        f: &TripleField,
        g: &(Periodic, Periodic),
        phi: &crate::field::BoundaryTriple,
    ) -> Result<TripleField> {
        let [a, b, c] = decouple(f, g, phi)?;
        let v1 = self.solve_scalar(&a)?;
        let v2 = self.solve_scalar(&b)?;
        let v3 = self.solve_scalar(&c)?;
        recompose(&v1, &v2, &v3)
    }
}

pub fn solve_dirichlet(f: &ScalarField, phi: &Periodic) -> Result<ScalarField> {
    LinearSolver::new(f.grid()).solve_dirichlet(f, phi)
}

pub fn solve_mixed(f: &ScalarField, g: &Periodic, phi: &Periodic) -> Result<ScalarField> {
    LinearSolver::new(f.grid()).solve_mixed(f, g, phi)
}

pub fn solve_linear_system(
    f: &TripleField,
    g: &(Periodic, Periodic),
    phi: &crate::field::BoundaryTriple,
) -> Result<TripleField> {
    LinearSolver::new(f.grid()).solve_system(f, g, phi)
}

/// Empirical and structural constants of the fixed-point argument.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionEstimates {
    /// Schauder-type constant: `proxy(u) <= C_lin (proxy(F) + proxy(G) + proxy(phi))`.
    pub c_lin: f64,
    /// `proxy(A(u)) <= C1 (proxy(u)^2 + proxy(phi))`.
    pub c1: f64,
    /// `proxy(A(u) - A(v)) <= C2 proxy(u - v) (proxy(u) + proxy(v))`.
    pub c2: f64,
    /// `min{1/C1, 1/(4 C2), 1}`.
    pub r_tilde: f64,
}

impl ContractionEstimates {
    pub fn new(c_lin: f64, c1: f64, c2: f64) -> Self {
        let r_tilde = (1.0 / c1).min(1.0 / (4.0 * c2)).min(1.0);
        Self { c_lin, c1, c2, r_tilde }
    }

    /// Data threshold `r (1/C1 - r)` for a ball of radius `r`, clamped at zero.
    pub fn epsilon(&self, r: f64) -> f64 {
        (r * (1.0 / self.c1 - r)).max(0.0)
    }
}

/// Ratio `proxy(solution) / (proxy(F)_{0,a} + proxy(G)_{1,a} + proxy(phi)_{2,a})`.
pub fn schauder_ratio(
    solver: &LinearSolver,
    f: &TripleField,
    g: &(Periodic, Periodic),
    phi: &crate::field::BoundaryTriple,
    alpha: f64,
) -> Result<f64> {
    let u = solver.solve_system(f, g, phi)?;
    let fourier = solver.grid().fourier();
    let data = f.comps().iter().map(|c| c.holder_proxy(0, alpha)).sum::<f64>()
        + g.0.holder_proxy(fourier, 1, alpha)
        + g.1.holder_proxy(fourier, 1, alpha)
        + phi.norm_proxy(fourier, alpha);
    Ok(u.norm_proxy(alpha) / data)
}

/// Result of [`schauder_probe`].
#[derive(Clone, Debug, PartialEq)]
pub struct SchauderProbe {
    /// Largest observed ratio, an empirical stand-in for the Schauder constant.
    pub c_lin: f64,
    pub samples: usize,
}

/// Samples random unit-order `(F, G, phi)` and records the largest [`schauder_ratio`].
pub fn schauder_probe(grid: &Grid, n_samples: usize, alpha: f64, seed: u64) -> Result<SchauderProbe> {
    let solver = LinearSolver::new(grid);
    let mut rng = SampleRng::new(seed);
    let mut best: f64 = 0.0;
    for _ in 0..n_samples {
        let f = TripleField::new(random_field(grid, &mut rng), random_field(grid, &mut rng), random_field(grid, &mut rng))?;
        let g = (random_periodic(grid.ny(), &mut rng), random_periodic(grid.ny(), &mut rng));
        let phi = crate::field::BoundaryTriple::new(
            random_periodic(grid.ny(), &mut rng),
            random_periodic(grid.ny(), &mut rng),
            random_periodic(grid.ny(), &mut rng),
        )?;
        best = best.max(schauder_ratio(&solver, &f, &g, &phi, alpha)?);
    }
    Ok(SchauderProbe {
        c_lin: best,
        samples: n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BoundaryTriple;

    fn grid(nx: usize, ny: usize) -> Grid {
        Grid::new(nx, ny).unwrap()
    }

    fn problem(grid: &Grid, k: usize, kind: BoundaryKind, f: impl Fn(f64) -> f64, g: f64, phi: f64) -> ModeProblem {
        ModeProblem {
            k,
            kind,
            forcing: grid.x().iter().map(|&x| f(x)).collect(),
            neumann: g,
            dirichlet: phi,
        }
    }

    #[test]
    fn harmonic_dirichlet_mode() {
        let g = grid(32, 8);
        let p = problem(&g, 1, BoundaryKind::Dirichlet, |_| 0.0, 0.0, 1.0);
        for path in [ModePath::Collocation, ModePath::Formula] {
            let a = mode_solve(&g, &p, path);
            for (&x, &v) in g.x().iter().zip(&a) {
                let exact = (2.0 * PI * x).sinh() / (2.0 * PI).sinh();
                assert!((v - exact).abs() < 1e-12, "{path:?} at {x}");
            }
            // x = 1/2 is the middle Lobatto node for odd counts; evaluate via interpolation
            let mid = barycentric_eval(g.x(), g.barycentric_weights(), &a, 0.5);
            assert!((mid - PI.sinh() / (2.0 * PI).sinh()).abs() < 1e-12);
            assert!((mid - 0.0431334).abs() < 1e-7);
        }
    }

    #[test]
    fn harmonic_mixed_mode() {
        let g = grid(32, 8);
        let p = problem(&g, 1, BoundaryKind::Mixed, |_| 0.0, 0.0, 1.0);
        for path in [ModePath::Collocation, ModePath::Formula] {
            let a = mode_solve(&g, &p, path);
            assert!((a[0] - 0.00373487).abs() < 1e-8);
            for (&x, &v) in g.x().iter().zip(&a) {
                let exact = (2.0 * PI * x).cosh() / (2.0 * PI).cosh();
                assert!((v - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_modes() {
        let g = grid(16, 8);
        let d = problem(&g, 0, BoundaryKind::Dirichlet, |_| 0.0, 0.0, 0.7);
        let m = problem(&g, 0, BoundaryKind::Mixed, |_| 0.0, 1.0, 0.0);
        for path in [ModePath::Collocation, ModePath::Formula] {
            for (&x, &v) in g.x().iter().zip(&mode_solve(&g, &d, path)) {
                assert!((v - 0.7 * x).abs() < 1e-13);
            }
            for (&x, &v) in g.x().iter().zip(&mode_solve(&g, &m, path)) {
                assert!((v - (1.0 - x)).abs() < 1e-13);
            }
        }
        assert!(mode_solve_dirichlet(&g, &m).is_err());
        assert!(mode_solve_mixed(&g, &d).is_err());
    }

    #[test]
    fn paths_agree_with_forcing() {
        let g = grid(48, 8);
        for kind in [BoundaryKind::Dirichlet, BoundaryKind::Mixed] {
            for k in [0, 1, 3, 8, 16] {
                let p = problem(&g, k, kind, |x| (3.0 * x).sin() + x * x, 0.3, -0.2);
                let a = mode_solve(&g, &p, ModePath::Collocation);
                let b = mode_solve(&g, &p, ModePath::Formula);
                let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let diff = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                assert!(diff <= 1e-8 * scale, "{kind:?} k={k}: {diff:e}");
                assert!(mode_residual(&g, &p, &a) < 1e-8 * (1.0 + scale));
            }
        }
    }

    #[test]
    fn very_high_modes_stay_finite() {
        let g = grid(48, 8);
        for kind in [BoundaryKind::Dirichlet, BoundaryKind::Mixed] {
            let p = problem(&g, 512, kind, |x| 1.0 + x, 0.5, 1.0);
            for path in [ModePath::Collocation, ModePath::Formula] {
                assert!(mode_solve(&g, &p, path).iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn manufactured_field_solutions() {
        let g = grid(48, 16);
        let solver = LinearSolver::new(&g);
        let f = ScalarField::from_fn(&g, |x, y| -5.0 * PI * PI * (PI * x).sin() * (2.0 * PI * y).sin());
        let v = solver.solve_dirichlet(&f, &Periodic::zeros(16)).unwrap();
        let exact = ScalarField::from_fn(&g, |x, y| (PI * x).sin() * (2.0 * PI * y).sin());
        assert!((&v - &exact).sup_norm() < 1e-8);

        let phi = Periodic::from_fn(16, |y| (2.0 * PI * y).cos());
        let v = solver.solve_mixed(&ScalarField::zeros(&g), &Periodic::zeros(16), &phi).unwrap();
        let exact = ScalarField::from_fn(&g, |x, y| (2.0 * PI * x).cosh() * (2.0 * PI * y).cos() / (2.0 * PI).cosh());
        assert!((&v - &exact).sup_norm() < 1e-8);

        let zero = solver.solve_dirichlet(&ScalarField::zeros(&g), &Periodic::zeros(16)).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
    }

    #[test]
    fn mixed_solution_attains_neumann_trace() {
        let g = grid(40, 16);
        let mut rng = SampleRng::new(3);
        let solver = LinearSolver::new(&g);
        let gdata = random_periodic(16, &mut rng);
        let phi = random_periodic(16, &mut rng);
        let f = random_field(&g, &mut rng);
        let v = solver.solve_mixed(&f, &gdata, &phi).unwrap();
        let dn = v.normal_derivative_inner();
        for (a, b) in dn.values().iter().zip(gdata.values()) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in v.trace(End::Outer).values().iter().zip(phi.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        let lap = v.laplacian();
        for j in 1..g.nx() - 1 {
            for m in 0..16 {
                assert!((lap.at(j, m) - f.at(j, m)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn decouple_examples() {
        let g = grid(8, 8);
        let zero = TripleField::zeros(&g);
        let zg = (Periodic::zeros(8), Periodic::zeros(8));
        let [a, b, c] = decouple(&zero, &zg, &BoundaryTriple::constants(8, [1.0, 1.0, 1.0])).unwrap();
        assert!(a.dirichlet.values().iter().all(|&v| v == 3.0));
        assert!(b.dirichlet.values().iter().all(|&v| v == 0.0));
        assert!(c.dirichlet.values().iter().all(|&v| v == 0.0));
        assert_eq!(a.kind, BoundaryKind::Dirichlet);

        let f = TripleField::from_fns(&g, |i, _, _| (i + 1) as f64);
        let [a, b, c] = decouple(&f, &zg, &BoundaryTriple::zeros(8)).unwrap();
        assert!(a.forcing.values().iter().all(|&v| v == 6.0));
        assert!(b.forcing.values().iter().all(|&v| v == -1.0));
        assert!(c.forcing.values().iter().all(|&v| v == -1.5));
    }

    #[test]
    fn recompose_examples() {
        let g = grid(8, 8);
        let k = |c: f64| ScalarField::from_fn(&g, move |_, _| c);
        let u = recompose(&k(3.0), &k(0.0), &k(0.0)).unwrap();
        assert!(u.comps().iter().all(|c| c.values().iter().all(|&v| v == 1.0)));
        let u = recompose(&k(0.0), &k(2.0), &k(0.0)).unwrap();
        assert_eq!(u.comp(0).at(0, 0), 0.0);
        assert_eq!(u.comp(1).at(0, 0), 1.0);
        assert_eq!(u.comp(2).at(0, 0), -1.0);
    }

    #[test]
    fn system_solution_satisfies_coupled_boundary_operator() {
        let g = grid(40, 16);
        let mut rng = SampleRng::new(9);
        let f = TripleField::new(random_field(&g, &mut rng), random_field(&g, &mut rng), random_field(&g, &mut rng)).unwrap();
        let gd = (random_periodic(16, &mut rng), random_periodic(16, &mut rng));
        let phi = BoundaryTriple::new(
            random_periodic(16, &mut rng),
            random_periodic(16, &mut rng),
            random_periodic(16, &mut rng),
        )
        .unwrap();
        let u = solve_linear_system(&f, &gd, &phi).unwrap();
        let [b1, b2, b3] = boundary_operator(&u);
        assert!(b1.sup_norm() < 1e-14, "{}", b1.sup_norm());
        assert!(b2.zip_with(&gd.0, |a, b| a - b).sup_norm() < 1e-8);
        assert!(b3.zip_with(&gd.1, |a, b| a - b).sup_norm() < 1e-8);
        for i in 0..3 {
            let lap = u.comp(i).laplacian();
            for j in 1..g.nx() - 1 {
                for m in 0..16 {
                    assert!((lap.at(j, m) - f.comp(i).at(j, m)).abs() < 1e-8);
                }
            }
            let tr = u.comp(i).trace(End::Outer);
            assert!(tr.zip_with(phi.comp(i), |a, b| a - b).sup_norm() < 1e-13);
        }
        let zero = solve_linear_system(&TripleField::zeros(&g), &(Periodic::zeros(16), Periodic::zeros(16)), &BoundaryTriple::zeros(16)).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
    }

    #[test]
    fn mode_dump_lists_every_mode() {
        let g = grid(16, 8);
        let solver = LinearSolver::new(&g);
        let p = ScalarProblem {
            kind: BoundaryKind::Mixed,
            forcing: ScalarField::from_fn(&g, |x, y| x * (2.0 * PI * y).sin()),
            neumann: Some(Periodic::zeros(8)),
            dirichlet: Periodic::zeros(8),
        };
        let (_, records) = solver.solve_scalar_with_records(&p).unwrap();
        // k = 0 and k = 4 (Nyquist) have a cosine part only
        assert_eq!(records.len(), 2 + 2 * 3);
        let mut buf = Vec::new();
        write_mode_dump(&mut buf, &records).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), records.len() + 1);
    }

    #[test]
    fn schauder_probe_is_finite_and_phi_only_ratio_at_least_one() {
        let g = grid(24, 16);
        let probe = schauder_probe(&g, 4, 0.5, 1).unwrap();
        assert!(probe.c_lin.is_finite() && probe.c_lin > 0.0);
        let solver = LinearSolver::new(&g);
        let mut rng = SampleRng::new(2);
        let phi = BoundaryTriple::new(
            random_periodic(16, &mut rng),
            random_periodic(16, &mut rng),
            random_periodic(16, &mut rng),
        )
        .unwrap();
        let zg = (Periodic::zeros(16), Periodic::zeros(16));
        let r = schauder_ratio(&solver, &TripleField::zeros(&g), &zg, &phi, 0.5).unwrap();
        assert!(r >= 1.0);
    }
}
