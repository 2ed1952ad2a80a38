//! Independent low-order checks of the spectral machinery.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{BoundaryTriple, Grid, TripleField};
use crate::geometry::{dot3, CutoffProfile, JunctionFrame, SheetEmbedding, TripleIndex, Vec3};
use crate::nonlinearity::conormal_xi;

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Mean curvature `tr(g^{-1} II)` of sheet `i` at `(x, y)`, from embedding samples
/// only: second-order centered differences on a 3 x 3 stencil of spacing `h`.
///
/// The normal is oriented to have a positive component along `(nu_i, 0)`.
pub fn fd_mean_curvature(
    i: TripleIndex,
    u: &TripleField,
    point: (f64, f64),
    h: f64,
    frame: &JunctionFrame,
    cutoff: &CutoffProfile,
) -> Result<f64> {
    fd_mean_curvature_with(&SheetEmbedding::new(u, frame, cutoff), i, point, h, frame)
}

/// As [`fd_mean_curvature`] with a prebuilt embedding, for repeated sampling.
pub fn fd_mean_curvature_with(
    emb: &SheetEmbedding,
    i: TripleIndex,
    (x, y): (f64, f64),
    h: f64,
    frame: &JunctionFrame,
) -> Result<f64> {
    if !(1e-5..=1e-2).contains(&h) {
        return Err(Error::OutOfRange { what: "h", value: h, range: "[1e-5, 1e-2]" });
    }
    if !(x - h >= 0.0 && x + h <= 1.0) {
        return Err(Error::OutOfRange { what: "x", value: x, range: "[h, 1 - h] (stencil leaves the domain)" });
    }
    let p = |a: i32, b: i32| emb.point(i, x + a as f64 * h, y + b as f64 * h);
    let c = p(0, 0)?;
    let (xp, xm, yp, ym) = (p(1, 0)?, p(-1, 0)?, p(0, 1)?, p(0, -1)?);
    let (pp, pm, mp, mm) = (p(1, 1)?, p(1, -1)?, p(-1, 1)?, p(-1, -1)?);
    let d1 = |a: Vec3, b: Vec3| sub(a, b).map(|v| v / (2.0 * h));
    let d2 = |a: Vec3, b: Vec3| [0, 1, 2].map(|k| (a[k] - 2.0 * c[k] + b[k]) / (h * h));
    let px = d1(xp, xm);
    let py = d1(yp, ym);
    let pxx = d2(xp, xm);
    let pyy = d2(yp, ym);
    let pxy = [0, 1, 2].map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h));
    let mut normal = cross(px, py);
    let len = dot3(normal, normal).sqrt();
    normal = normal.map(|v| v / len);
    let nu = frame.nu(i);
    if normal[0] * nu[0] + normal[1] * nu[1] < 0.0 {
        normal = normal.map(|v| -v);
    }
    let (e, f, g) = (dot3(px, px), dot3(px, py), dot3(py, py));
    let (l, m, n) = (dot3(pxx, normal), dot3(pxy, normal), dot3(pyy, normal));
    let det = e * g - f * f;
    Ok((g * l - 2.0 * f * m + e * n) / det)
}

/// Values on the uniform grid `x_j = j / nx` (`j = 0..=nx`), `y_m = m / ny` (`m < ny`).
#[derive(Clone, Debug, PartialEq)]
pub struct UniformField {
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `(nx + 1) x ny`.
    pub values: Vec<f64>,
}

impl UniformField {
    pub fn at(&self, j: usize, m: usize) -> f64 {
        self.values[j * self.ny + m]
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.nx as f64
    }

    pub fn y(&self, m: usize) -> f64 {
        m as f64 / self.ny as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |self - reference(x, y)|` over all nodes.
    pub fn max_error(&self, reference: impl Fn(f64, f64) -> f64) -> f64 {
        let mut err: f64 = 0.0;
        for j in 0..=self.nx {
            for m in 0..self.ny {
                err = err.max((self.at(j, m) - reference(self.x(j), self.y(m))).abs());
            }
        }
        err
    }
}

/// Real DFT by direct summation: cosine and sine coefficients for `k = 0..=n/2`.
fn direct_dft(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let half = n / 2;
    let mut c = vec![0.0; half + 1];
    let mut s = vec![0.0; half + 1];
    for k in 0..=half {
        let w = if k == 0 || k == half { 1.0 } else { 2.0 } / n as f64;
        for (m, &val) in v.iter().enumerate() {
            let arg = 2.0 * PI * (k * m % n) as f64 / n as f64;
            c[k] += w * val * arg.cos();
            s[k] += w * val * arg.sin();
        }
    }
    s[0] = 0.0;
    s[half] = 0.0;
    (c, s)
}

fn direct_idft(c: &[f64], s: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|m| {
            (0..c.len())
                .map(|k| {
                    let arg = 2.0 * PI * (k * m % n) as f64 / n as f64;
                    c[k] * arg.cos() + s[k] * arg.sin()
                })
                .sum()
        })
        .collect()
}

/// Thomas algorithm for `lower[j] a[j-1] + diag[j] a[j] + upper[j] a[j+1] = rhs[j]`.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for j in 1..n {
        let denom = diag[j] - lower[j] * c[j - 1];
        c[j] = if j + 1 < n { upper[j] / denom } else { 0.0 };
        d[j] = (rhs[j] - lower[j] * d[j - 1]) / denom;
    }
    let mut a = vec![0.0; n];
    a[n - 1] = d[n - 1];
    for j in (0..n - 1).rev() {
        a[j] = d[j] - c[j] * a[j + 1];
    }
    a
}

/// Second-order finite-difference solution of `Lap v = f` on `[0,1] x S^1` with
/// `v(1, .) = phi` and, at `x = 0`, either `v = 0` (`neumann = None`) or
/// `-d_x v = g` imposed with a ghost point.
///
/// Uses `n` intervals in x and `n` points in y (`n` even), a direct DFT in y with
/// the discrete eigenvalues `-(2 sin(pi k / n) / h)^2`, and a tridiagonal solve per mode.
pub fn fd_linear_solve(
    f: impl Fn(f64, f64) -> f64,
    neumann: Option<&dyn Fn(f64) -> f64>,
    phi: impl Fn(f64) -> f64,
    n: usize,
) -> Result<UniformField> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("fd grid size {n} must be even and >= 4")));
    }
    let h = 1.0 / n as f64;
    let ys: Vec<f64> = (0..n).map(|m| m as f64 * h).collect();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..=n)
        .map(|j| direct_dft(&ys.iter().map(|&y| f(j as f64 * h, y)).collect::<Vec<_>>()))
        .collect();
    let phi_hat = direct_dft(&ys.iter().map(|&y| phi(y)).collect::<Vec<_>>());
    let g_hat = neumann.map(|g| direct_dft(&ys.iter().map(|&y| g(y)).collect::<Vec<_>>()));
    let half = n / 2;
    // unknowns a_0..a_{n-1}; a_n = phi_k
    let mut coeff_c = vec![vec![0.0; half + 1]; n + 1];
    let mut coeff_s = vec![vec![0.0; half + 1]; n + 1];
    for k in 0..=half {
        let lambda = -(2.0 * (PI * k as f64 / n as f64).sin() / h).powi(2);
        for part in 0..2 {
            if part == 1 && (k == 0 || k == half) {
                continue;
            }
            let pick = |p: &(Vec<f64>, Vec<f64>)| if part == 0 { p.0[k] } else { p.1[k] };
            let inv = 1.0 / (h * h);
            let mut lower = vec![inv; n];
            let mut diag = vec![-2.0 * inv + lambda; n];
            let mut upper = vec![inv; n];
            let mut rhs: Vec<f64> = (0..n).map(|j| pick(&rows[j])).collect();
            let phik = pick(&phi_hat);
            rhs[n - 1] -= inv * phik;
            upper[n - 1] = 0.0;
            lower[0] = 0.0;
            match &g_hat {
                None => {
                    diag[0] = 1.0;
                    upper[0] = 0.0;
                    rhs[0] = 0.0;
                }
                Some(gh) => {
                    // ghost a_{-1} = a_1 + 2 h g
                    upper[0] = 2.0 * inv;
                    rhs[0] -= 2.0 * pick(gh) / h;
                }
            }
            let a = thomas(&lower, &diag, &upper, &rhs);
            let target = if part == 0 { &mut coeff_c } else { &mut coeff_s };
            for j in 0..n {
                target[j][k] = a[j];
            }
            target[n][k] = phik;
        }
    }
    let mut values = Vec::with_capacity((n + 1) * n);
    for j in 0..=n {
        values.extend(direct_idft(&coeff_c[j], &coeff_s[j], n));
    }
    Ok(UniformField { nx: n, ny: n, values })
}

/// Pairwise angles `(xi1, xi2)`, `(xi2, xi3)`, `(xi3, xi1)` at each spine node.
pub fn junction_angle_check(u: &TripleField, frame: &JunctionFrame) -> Result<Vec<[f64; 3]>> {
    let xis = [
        conormal_xi(TripleIndex::ALL[0], u, frame)?,
        conormal_xi(TripleIndex::ALL[1], u, frame)?,
        conormal_xi(TripleIndex::ALL[2], u, frame)?,
    ];
    let angle = |a: Vec3, b: Vec3| dot3(a, b).clamp(-1.0, 1.0).acos();
    Ok((0..xis[0].len())
        .map(|m| {
            [
                angle(xis[0][m], xis[1][m]),
                angle(xis[1][m], xis[2][m]),
                angle(xis[2][m], xis[0][m]),
            ]
        })
        .collect())
}

/// Largest `|angle - 2 pi / 3|` in a [`junction_angle_check`] report.
pub fn max_angle_deviation(angles: &[[f64; 3]]) -> f64 {
    angles
        .iter()
        .flatten()
        .fold(0.0, |m, a| m.max((a - 2.0 * PI / 3.0).abs()))
}

/// Stationary families with closed-form solutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExactFamily {
    /// Rigid translation of the cone by `c`: `u_i = <c, nu_i>`.
    Translate([f64; 2]),
    /// Rotation of each half-plane about the spine: `u_i = beta x`.
    Rotate(f64),
}

impl ExactFamily {
    pub fn magnitude(&self) -> f64 {
        match *self {
            ExactFamily::Translate(c) => c[0].hypot(c[1]),
            ExactFamily::Rotate(b) => b.abs(),
        }
    }

    /// Boundary data and exact solution on `grid`; rejects `|c|, |beta| > delta / 20`.
    pub fn generate(&self, grid: &Grid, delta: f64) -> Result<(BoundaryTriple, TripleField)> {
        let mag = self.magnitude();
        if !(mag <= delta / 20.0) {
            return Err(Error::Magnitude(format!("family magnitude {mag} exceeds delta/20 = {}", delta / 20.0)));
        }
        let frame = JunctionFrame::default();
        let ny = grid.ny();
        Ok(match *self {
            ExactFamily::Translate(c) => {
                let vals = [0, 1, 2].map(|i| c[0] * frame.nu[i][0] + c[1] * frame.nu[i][1]);
                (
                    BoundaryTriple::constants(ny, vals),
                    TripleField::from_fns(grid, |i, _, _| vals[i]),
                )
            }
            ExactFamily::Rotate(beta) => (
                BoundaryTriple::constants(ny, [beta; 3]),
                TripleField::from_fns(grid, |_, x, _| beta * x),
            ),
        })
    }
}

pub fn exact_family(family: ExactFamily, grid: &Grid, delta: f64) -> Result<(BoundaryTriple, TripleField)> {
    family.generate(grid, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Periodic, ScalarField};
    use crate::geometry::DEFAULT_DELTA;
    use crate::linear::LinearSolver;
    use crate::nonlinearity::{evaluate, mean_curvature_scalar};
    use crate::sampling::{random_compatible_triple, SampleRng};

    fn slope(hs: &[f64], errs: &[f64]) -> f64 {
        let k = hs.len() - 1;
        (errs[k - 1] / errs[k]).ln() / (hs[k - 1] / hs[k]).ln()
    }

    #[test]
    fn flat_and_translated_sheets_have_zero_curvature() {
        let grid = Grid::new(16, 16).unwrap();
        let cutoff = CutoffProfile::new(DEFAULT_DELTA).unwrap();
        let frame = JunctionFrame::default();
        let zero = TripleField::zeros(&grid);
        let (_, shifted) = exact_family(ExactFamily::Translate([0.01, 0.0]), &grid, DEFAULT_DELTA).unwrap();
        for i in TripleIndex::ALL {
            for &(x, y) in &[(0.1, 0.2), (0.35, 0.5), (0.8, 0.9)] {
                assert!(fd_mean_curvature(i, &zero, (x, y), 1e-3, &frame, &cutoff).unwrap().abs() < 1e-8);
                assert!(fd_mean_curvature(i, &shifted, (x, y), 1e-3, &frame, &cutoff).unwrap().abs() < 1e-6);
            }
        }
    }

    #[test]
    fn fd_mean_curvature_domain_checks() {
        let grid = Grid::new(16, 16).unwrap();
        let cutoff = CutoffProfile::new(DEFAULT_DELTA).unwrap();
        let frame = JunctionFrame::default();
        let zero = TripleField::zeros(&grid);
        let i = TripleIndex::ALL[0];
        assert!(fd_mean_curvature(i, &zero, (0.0, 0.5), 1e-3, &frame, &cutoff).is_err());
        assert!(fd_mean_curvature(i, &zero, (0.5, 0.5), 0.1, &frame, &cutoff).is_err());
    }

    #[test]
    fn fd_mean_curvature_is_second_order() {
        let grid = Grid::new(32, 16).unwrap();
        let cutoff = CutoffProfile::new(DEFAULT_DELTA).unwrap();
        let frame = JunctionFrame::default();
        let u = random_compatible_triple(&grid, &mut SampleRng::new(11), 0.02, 0.5);
        let i = TripleIndex::ALL[1];
        let spectral = mean_curvature_scalar(i, &u, &cutoff, &frame).unwrap();
        let j = grid.x().iter().position(|&x| x > 0.3).unwrap();
        let (x, y) = (grid.x()[j], grid.y()[5]);
        let hs = [0.01, 0.005, 0.0025, 0.00125];
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| (fd_mean_curvature(i, &u, (x, y), h, &frame, &cutoff).unwrap() - spectral.at(j, 5)).abs())
            .collect();
        let p = slope(&hs, &errs);
        assert!((p - 2.0).abs() < 0.2, "slope {p}, errors {errs:?}");
    }

    #[test]
    fn fd_linear_solver_converges_at_second_order() {
        let exact = |x: f64, y: f64| (PI * x).sin() * (2.0 * PI * y).sin();
        let f = |x: f64, y: f64| -5.0 * PI * PI * exact(x, y);
        let ns = [16usize, 32, 64];
        let errs: Vec<f64> = ns
            .iter()
            .map(|&n| fd_linear_solve(f, None, |_| 0.0, n).unwrap().max_error(exact))
            .collect();
        let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        let p = slope(&hs, &errs);
        assert!((p - 2.0).abs() < 0.2, "slope {p}");
        let zero = fd_linear_solve(|_, _| 0.0, Some(&|_| 0.0), |_| 0.0, 8).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
    }

    #[test]
    fn fd_linear_solver_agrees_with_spectral_mixed_solve() {
        let grid = Grid::new(32, 16).unwrap();
        let f = |x: f64, y: f64| (1.0 + x * x) * (2.0 * PI * y).cos() + x;
        let g = |y: f64| 0.5 * (2.0 * PI * y).sin();
        let phi = |y: f64| 0.3 + 0.2 * (4.0 * PI * y).cos();
        let spectral = LinearSolver::new(&grid)
            .solve_mixed(&ScalarField::from_fn(&grid, f), &Periodic::from_fn(16, g), &Periodic::from_fn(16, phi))
            .unwrap();
        let interp = spectral.interpolant();
        for n in [16usize, 32] {
            let fd = fd_linear_solve(f, Some(&g), phi, n).unwrap();
            let err = fd.max_error(|x, y| interp.eval(x, y));
            assert!(err < 5.0 / (n * n) as f64, "n = {n}: {err}");
        }
    }

    #[test]
    fn junction_angles() {
        let grid = Grid::new(16, 16).unwrap();
        let frame = JunctionFrame::default();
        let zero = junction_angle_check(&TripleField::zeros(&grid), &frame).unwrap();
        assert!(max_angle_deviation(&zero) < 1e-15);
        let (_, rot) = exact_family(ExactFamily::Rotate(0.01), &grid, DEFAULT_DELTA).unwrap();
        assert!(max_angle_deviation(&junction_angle_check(&rot, &frame).unwrap()) < 1e-12);
    }

    #[test]
    fn exact_families() {
        let grid = Grid::new(16, 16).unwrap();
        let cutoff = CutoffProfile::new(DEFAULT_DELTA).unwrap();
        let frame = JunctionFrame::default();
        let (phi, _) = exact_family(ExactFamily::Translate([0.01, 0.0]), &grid, DEFAULT_DELTA).unwrap();
        assert_eq!(phi.comp(0).values()[0], 0.0);
        assert!((phi.comp(1).values()[0] - 0.00866025).abs() < 1e-8);
        assert!((phi.comp(2).values()[0] + 0.00866025).abs() < 1e-8);
        let (phi, _) = exact_family(ExactFamily::Rotate(0.01), &grid, DEFAULT_DELTA).unwrap();
        assert!(phi.comps().iter().all(|p| p.values().iter().all(|&v| v == 0.01)));
        for fam in [ExactFamily::Translate([0.01, 0.0]), ExactFamily::Rotate(0.01)] {
            let (_, u) = fam.generate(&grid, DEFAULT_DELTA).unwrap();
            let t = evaluate(&u, &cutoff, &frame).unwrap();
            assert!(t.f.sup_norm() < 1e-12);
            assert!(t.g.0.sup_norm() < 1e-12 && t.g.1.sup_norm() < 1e-12);
        }
        assert!(matches!(
            exact_family(ExactFamily::Rotate(0.02), &grid, DEFAULT_DELTA),
            Err(Error::Magnitude(_))
        ));
    }
}
