//! Fields on the Chebyshev x Fourier tensor grid over `[0, 1] x S^1`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::chebyshev;
use crate::error::{Error, Result};
use crate::fourier::{Fourier, RealSpectrum};

pub const DEFAULT_NX: usize = 48;
pub const DEFAULT_NY: usize = 64;

/// Tensor grid: `nx` Lobatto points in `x`, `ny` equispaced points on the circle.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    x: Vec<f64>,
    y: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    bary: Vec<f64>,
    fourier: Fourier,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({}x{})", self.nx(), self.ny())
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.nx() == other.nx() && self.ny() == other.ny()
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::new(DEFAULT_NX, DEFAULT_NY).expect("default grid is valid")
    }
}

impl Grid {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 8 {
            return Err(Error::InvalidGrid(format!("nx = {nx} must be at least 8")));
        }
        if ny < 8 || !ny.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("ny = {ny} must be even and at least 8")));
        }
        let d1 = chebyshev::diff_matrix(nx);
        let d2 = &d1 * &d1;
        Ok(Self {
            inner: Arc::new(GridInner {
                x: chebyshev::lobatto_nodes(nx),
                y: (0..ny).map(|m| m as f64 / ny as f64).collect(),
                d1,
                d2,
                bary: chebyshev::barycentric_weights(nx),
                fourier: Fourier::new(ny),
            }),
        })
    }

    pub fn nx(&self) -> usize {
        self.inner.x.len()
    }

    pub fn ny(&self) -> usize {
        self.inner.y.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.inner.x
    }

    pub fn y(&self) -> &[f64] {
        &self.inner.y
    }

    pub fn d1(&self) -> &DMatrix<f64> {
        &self.inner.d1
    }

    pub fn d2(&self) -> &DMatrix<f64> {
        &self.inner.d2
    }

    pub fn fourier(&self) -> &Fourier {
        &self.inner.fourier
    }

    pub fn barycentric_weights(&self) -> &[f64] {
        &self.inner.bary
    }

    /// Applies the x-derivative matrix of the given order to a column of nodal values.
    pub fn diff_x_column(&self, column: &[f64], order: u32) -> Vec<f64> {
        let d = match order {
            0 => return column.to_vec(),
            1 => self.d1(),
            _ => self.d2(),
        };
        let n = self.nx();
        (0..n).map(|i| (0..n).map(|j| d[(i, j)] * column[j]).sum()).collect()
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Which boundary circle a trace is taken on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    /// `{0} x S^1`, the spine side.
    Inner,
    /// `{1} x S^1`, where boundary data is prescribed.
    Outer,
}

/// Samples of a 1-periodic function on the y-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Periodic {
    values: Vec<f64>,
}

impl Periodic {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: (0..n).map(|m| f(m as f64 / n as f64)).collect(),
        }
    }

    /// Synthesizes samples from `(k, cos, sin)` mode triples.
    pub fn from_modes(n: usize, modes: &[(usize, f64, f64)]) -> Result<Self> {
        let half = n / 2;
        let mut spectrum = RealSpectrum::zeros(half);
        for &(k, c, s) in modes {
            if k > half {
                return Err(Error::Config(format!("mode k = {k} exceeds the Nyquist wavenumber {half}")));
            }
            if !c.is_finite() || !s.is_finite() {
                return Err(Error::Config(format!("non-finite coefficient for mode {k}")));
            }
            spectrum.cos[k] += c;
            spectrum.sin[k] += s;
        }
        Ok(Self::from_fn(n, |y| spectrum.eval(y)))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spectrum(&self, fourier: &Fourier) -> RealSpectrum {
        fourier.analyze(&self.values)
    }

    pub fn derivative(&self, fourier: &Fourier, order: u32) -> Periodic {
        Periodic::new(fourier.derivative(&self.values, order))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, t: f64) -> Periodic {
        Periodic::new(self.values.iter().map(|v| t * v).collect())
    }

    pub fn zip_with(&self, other: &Periodic, f: impl Fn(f64, f64) -> f64) -> Periodic {
        assert_eq!(self.len(), other.len(), "periodic maps on different grids");
        Periodic::new(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    /// Discrete `C^{order, alpha}` proxy: sup norms of derivatives up to `order`
    /// plus the Hölder quotient of the top derivative over lagged node pairs.
    pub fn holder_proxy(&self, fourier: &Fourier, order: u32, alpha: f64) -> f64 {
        let mut total = 0.0;
        let mut top = self.clone();
        for r in 0..=order {
            top = self.derivative(fourier, r);
            total += top.sup_norm();
        }
        total + periodic_holder_quotient(&top.values, alpha)
    }
}

fn periodic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

fn lags(n: usize) -> impl Iterator<Item = usize> {
    std::iter::successors(Some(1usize), |l| Some(l * 2)).take_while(move |&l| l < n)
}

fn periodic_holder_quotient(values: &[f64], alpha: f64) -> f64 {
    let n = values.len();
    let mut best: f64 = 0.0;
    for lag in lags(n) {
        let dist = periodic_distance(0.0, lag as f64 / n as f64);
        if dist == 0.0 {
            continue;
        }
        let denom = dist.powf(alpha);
        for m in 0..n {
            let q = (values[m] - values[(m + lag) % n]).abs() / denom;
            best = best.max(q);
        }
    }
    best
}

/// A real field sampled on a [`Grid`], stored row-major with rows indexed by x.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx() * grid.ny() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx(),
                grid.ny()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("field contains non-finite values".into()));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.nx() * grid.ny());
        Self { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_raw(grid, vec![0.0; grid.nx() * grid.ny()])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.nx() * grid.ny());
        for &x in grid.x() {
            for &y in grid.y() {
                values.push(f(x, y));
            }
        }
        Self::from_raw(grid, values)
    }

    /// Builds a field from per-row periodic samples (`rows[j]` at `x_j`).
    pub fn from_rows(grid: &Grid, rows: &[Vec<f64>]) -> Self {
        let mut values = Vec::with_capacity(grid.nx() * grid.ny());
        for row in rows {
            values.extend_from_slice(row);
        }
        Self::from_raw(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, j: usize, m: usize) -> f64 {
        self.values[j * self.grid.ny() + m]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let ny = self.grid.ny();
        &self.values[j * ny..(j + 1) * ny]
    }

    pub fn column(&self, m: usize) -> Vec<f64> {
        (0..self.grid.nx()).map(|j| self.at(j, m)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid, other.grid, "fields on different grids");
        Self::from_raw(
            &self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    /// Spectral derivative: Chebyshev in x, Fourier in y.
    pub fn diff(&self, order_x: u32, order_y: u32) -> Result<ScalarField> {
        if order_x + order_y > 2 {
            return Err(Error::OutOfRange {
                what: "derivative order",
                value: (order_x + order_y) as f64,
                range: "[0, 2]",
            });
        }
        let mut out = self.clone();
        if order_y > 0 {
            let fourier = self.grid.fourier();
            let ny = self.grid.ny();
            for j in 0..self.grid.nx() {
                let d = fourier.derivative(out.row(j), order_y);
                out.values[j * ny..(j + 1) * ny].copy_from_slice(&d);
            }
        }
        if order_x > 0 {
            let d = if order_x == 1 { self.grid.d1() } else { self.grid.d2() };
            let (nx, ny) = (self.grid.nx(), self.grid.ny());
            let src = out.values.clone();
            for i in 0..nx {
                let dst = &mut out.values[i * ny..(i + 1) * ny];
                dst.iter_mut().for_each(|v| *v = 0.0);
                for j in 0..nx {
                    let dij = d[(i, j)];
                    if dij == 0.0 {
                        continue;
                    }
                    let row = &src[j * ny..(j + 1) * ny];
                    for (o, &r) in dst.iter_mut().zip(row) {
                        *o += dij * r;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn laplacian(&self) -> ScalarField {
        let xx = self.diff(2, 0).expect("order 2");
        let yy = self.diff(0, 2).expect("order 2");
        &xx + &yy
    }

    pub fn trace(&self, end: End) -> Periodic {
        let j = match end {
            End::Inner => 0,
            End::Outer => self.grid.nx() - 1,
        };
        Periodic::new(self.row(j).to_vec())
    }

    /// `-du/dx` on `{0} x S^1`: the outward normal of the inner circle points in `-x`.
    pub fn normal_derivative_inner(&self) -> Periodic {
        let d = self.grid.d1();
        let ny = self.grid.ny();
        let mut out = vec![0.0; ny];
        for j in 0..self.grid.nx() {
            let w = d[(0, j)];
            for (o, &v) in out.iter_mut().zip(self.row(j)) {
                *o -= w * v;
            }
        }
        Periodic::new(out)
    }

    /// Cached row spectra for evaluating the spectral interpolant off the grid.
    pub fn interpolant(&self) -> FieldInterpolant {
        let fourier = self.grid.fourier();
        FieldInterpolant {
            grid: self.grid.clone(),
            rows: (0..self.grid.nx()).map(|j| fourier.analyze(self.row(j))).collect(),
        }
    }

    /// Evaluates the spectral interpolant at an arbitrary point.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.interpolant().eval(x, y)
    }

    /// Discrete `C^{order, alpha}` norm proxy (order 0, 1 or 2).
    pub fn holder_proxy(&self, order: u32, alpha: f64) -> f64 {
        let mut total = 0.0;
        let mut tops = Vec::new();
        for r in 0..=order.min(2) {
            for ox in (0..=r).rev() {
                let d = self.diff(ox, r - ox).expect("order <= 2");
                total += d.sup_norm();
                if r == order {
                    tops.push(d);
                }
            }
        }
        total + tops.iter().map(|d| d.holder_quotient(alpha)).sum::<f64>()
    }

    /// Max of `|f(p) - f(q)| / dist(p, q)^alpha` over node pairs at power-of-two
    /// lags along every grid row and column.
    pub fn holder_quotient(&self, alpha: f64) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut best: f64 = 0.0;
        for j in 0..nx {
            best = best.max(periodic_holder_quotient(self.row(j), alpha));
        }
        let x = self.grid.x();
        for lag in lags(nx) {
            for j in 0..nx - lag {
                let denom = (x[j + lag] - x[j]).powf(alpha);
                for m in 0..ny {
                    let q = (self.at(j, m) - self.at(j + lag, m)).abs() / denom;
                    best = best.max(q);
                }
            }
        }
        best
    }

    /// Writes `nx,ny,delta` then one line of `ny` values per x-row.
    pub fn write_csv<W: Write>(&self, mut out: W, delta: f64) -> std::io::Result<()> {
        writeln!(out, "nx,ny,delta")?;
        writeln!(out, "{},{},{}", self.grid.nx(), self.grid.ny(), delta)?;
        for j in 0..self.grid.nx() {
            let line: Vec<String> = self.row(j).iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Parses the format written by [`ScalarField::write_csv`]; returns the field and `delta`.
    /// Leading `#` comment lines are skipped.
    pub fn read_csv<R: BufRead>(input: R, name: &str) -> Result<(ScalarField, f64)> {
        let parse_err = |msg: String| Error::Parse { file: name.to_string(), msg };
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| parse_err("unexpected end of file".into()))?
                .map_err(Error::from)
        };
        let mut header = next()?;
        while header.starts_with('#') {
            header = next()?;
        }
        if header.trim() != "nx,ny,delta" {
            return Err(parse_err(format!("bad header {header:?}")));
        }
        let dims = next()?;
        let parts: Vec<&str> = dims.trim().split(',').collect();
        if parts.len() != 3 {
            return Err(parse_err(format!("bad dimension line {dims:?}")));
        }
        let nx: usize = parts[0].parse().map_err(|e| parse_err(format!("nx: {e}")))?;
        let ny: usize = parts[1].parse().map_err(|e| parse_err(format!("ny: {e}")))?;
        let delta: f64 = parts[2].parse().map_err(|e| parse_err(format!("delta: {e}")))?;
        let grid = Grid::new(nx, ny)?;
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..nx {
            let line = next()?;
            let row: std::result::Result<Vec<f64>, _> = line.trim().split(',').map(str::parse::<f64>).collect();
            let row = row.map_err(|e| parse_err(format!("row {j}: {e}")))?;
            if row.len() != ny {
                return Err(parse_err(format!("row {j} has {} values, expected {ny}", row.len())));
            }
            values.extend(row);
        }
        Ok((ScalarField::new(&grid, values)?, delta))
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<&ScalarField> for f64 {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        rhs.map(|v| self * v)
    }
}

/// Spectral interpolant of a [`ScalarField`]: Fourier rows, barycentric in x.
#[derive(Clone, Debug)]
pub struct FieldInterpolant {
    grid: Grid,
    rows: Vec<RealSpectrum>,
}

impl FieldInterpolant {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let half = self.grid.ny() / 2;
        let trig: Vec<(f64, f64)> = (0..=half)
            .map(|k| {
                let a = 2.0 * PI * k as f64 * y;
                (a.cos(), a.sin())
            })
            .collect();
        let column: Vec<f64> = self
            .rows
            .iter()
            .map(|s| {
                s.cos
                    .iter()
                    .zip(&s.sin)
                    .zip(&trig)
                    .map(|((c, sn), (tc, ts))| c * tc + sn * ts)
                    .sum()
            })
            .collect();
        chebyshev::barycentric_eval(self.grid.x(), self.grid.barycentric_weights(), &column, x)
    }
}

/// The unknown `u = (u1, u2, u3)` on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleField {
    comps: [ScalarField; 3],
}

impl TripleField {
    pub fn new(u1: ScalarField, u2: ScalarField, u3: ScalarField) -> Result<Self> {
        u1.grid.check_same(&u2.grid)?;
        u1.grid.check_same(&u3.grid)?;
        Ok(Self { comps: [u1, u2, u3] })
    }

    pub fn zeros(grid: &Grid) -> Self {
        let z = ScalarField::zeros(grid);
        Self {
            comps: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_fns(grid: &Grid, f: impl Fn(usize, f64, f64) -> f64) -> Self {
        Self {
            comps: [0, 1, 2].map(|i| ScalarField::from_fn(grid, |x, y| f(i, x, y))),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    /// Component by zero-based index.
    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn comps(&self) -> &[ScalarField; 3] {
        &self.comps
    }

    pub fn into_comps(self) -> [ScalarField; 3] {
        self.comps
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> TripleField {
        Self {
            comps: [f(&self.comps[0]), f(&self.comps[1]), f(&self.comps[2])],
        }
    }

    pub fn scale(&self, t: f64) -> TripleField {
        self.map(|c| t * c)
    }

    pub fn sub(&self, other: &TripleField) -> TripleField {
        Self {
            comps: [0, 1, 2].map(|i| &self.comps[i] - &other.comps[i]),
        }
    }

    pub fn add(&self, other: &TripleField) -> TripleField {
        Self {
            comps: [0, 1, 2].map(|i| &self.comps[i] + &other.comps[i]),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().map(ScalarField::sup_norm).fold(0.0, f64::max)
    }

    /// Traces on a boundary circle, one per sheet.
    pub fn traces(&self, end: End) -> [Periodic; 3] {
        [0, 1, 2].map(|i| self.comps[i].trace(end))
    }

    /// Triple `C^{2,alpha}` proxy: sum of the component proxies.
    pub fn norm_proxy(&self, alpha: f64) -> f64 {
        self.comps.iter().map(|c| c.holder_proxy(2, alpha)).sum()
    }

    pub fn laplacian(&self) -> TripleField {
        self.map(ScalarField::laplacian)
    }
}

/// Free-function spelling of [`TripleField::norm_proxy`].
pub fn norm_proxy(u: &TripleField, alpha: f64) -> f64 {
    u.norm_proxy(alpha)
}

/// Prescribed outer data `phi = (phi1, phi2, phi3)` on `{1} x S^1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTriple {
    comps: [Periodic; 3],
}

impl BoundaryTriple {
    pub fn new(p1: Periodic, p2: Periodic, p3: Periodic) -> Result<Self> {
        if p1.len() != p2.len() || p1.len() != p3.len() {
            return Err(Error::GridMismatch("boundary components of different lengths".into()));
        }
        if [&p1, &p2, &p3].iter().any(|p| p.values().iter().any(|v| !v.is_finite())) {
            return Err(Error::Config("boundary data contains non-finite values".into()));
        }
        Ok(Self { comps: [p1, p2, p3] })
    }

    pub fn zeros(ny: usize) -> Self {
        let z = Periodic::zeros(ny);
        Self {
            comps: [z.clone(), z.clone(), z],
        }
    }

    pub fn constants(ny: usize, c: [f64; 3]) -> Self {
        Self {
            comps: c.map(|v| Periodic::constant(ny, v)),
        }
    }

    /// Per-sheet lists of `(k, cos, sin)` mode triples.
    pub fn from_modes(ny: usize, modes: [&[(usize, f64, f64)]; 3]) -> Result<Self> {
        let [a, b, c] = modes;
        Self::new(
            Periodic::from_modes(ny, a)?,
            Periodic::from_modes(ny, b)?,
            Periodic::from_modes(ny, c)?,
        )
    }

    pub fn comp(&self, i: usize) -> &Periodic {
        &self.comps[i]
    }

    pub fn comps(&self) -> &[Periodic; 3] {
        &self.comps
    }

    pub fn len(&self) -> usize {
        self.comps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps[0].is_empty()
    }

    pub fn scale(&self, t: f64) -> BoundaryTriple {
        Self {
            comps: [0, 1, 2].map(|i| self.comps[i].scale(t)),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().map(Periodic::sup_norm).fold(0.0, f64::max)
    }

    /// Triple `C^{2,alpha}` proxy on the circle.
    pub fn norm_proxy(&self, fourier: &Fourier, alpha: f64) -> f64 {
        self.comps.iter().map(|p| p.holder_proxy(fourier, 2, alpha)).sum()
    }

    /// True when any component has more than `1e-8` of its energy in the top third of the spectrum.
    pub fn aliasing_flag(&self, fourier: &Fourier) -> bool {
        self.comps
            .iter()
            .any(|p| p.spectrum(fourier).top_third_energy_fraction() > ALIASING_FRACTION)
    }
}

/// Relative energy in the top third of the y-spectrum above which aliasing is flagged.
pub const ALIASING_FRACTION: f64 = 1e-8;

/// Largest top-third energy fraction over the rows of a field.
pub fn aliasing_fraction(field: &ScalarField) -> f64 {
    let fourier = field.grid().fourier();
    (0..field.grid().nx())
        .map(|j| fourier.analyze(field.row(j)).top_third_energy_fraction())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize) -> Grid {
        Grid::new(nx, ny).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid::new(7, 16).is_err());
        assert!(Grid::new(16, 15).is_err());
        assert!(Grid::new(16, 6).is_err());
        let g = grid(16, 16);
        assert_eq!(g.x()[0], 0.0);
        assert_eq!(g.x()[15], 1.0);
        assert!((g.y()[1] - 1.0 / 16.0).abs() < 1e-16);
    }

    #[test]
    fn second_x_derivative_of_square() {
        let g = grid(16, 8);
        let f = ScalarField::from_fn(&g, |x, _| x * x);
        let d = f.diff(2, 0).unwrap();
        assert!(d.values().iter().all(|v| (v - 2.0).abs() < 1e-10));
    }

    #[test]
    fn y_derivative_of_sine() {
        let g = grid(8, 16);
        let f = ScalarField::from_fn(&g, |_, y| (2.0 * PI * y).sin());
        let d = f.diff(0, 1).unwrap();
        let e = ScalarField::from_fn(&g, |_, y| 2.0 * PI * (2.0 * PI * y).cos());
        assert!((&d - &e).sup_norm() < 1e-10);
    }

    #[test]
    fn manufactured_laplacian() {
        let g = grid(32, 16);
        let f = ScalarField::from_fn(&g, |x, y| (2.0 * PI * y).sin() * (PI * x).sin());
        let lap = f.laplacian();
        let expected = (-5.0 * PI * PI) * &f;
        assert!((&lap - &expected).sup_norm() < 1e-8);
    }

    #[test]
    fn harmonic_function_has_small_laplacian() {
        let g = grid(48, 16);
        let f = ScalarField::from_fn(&g, |x, y| (2.0 * PI * x).sinh() * (2.0 * PI * y).sin());
        assert!(f.laplacian().sup_norm() < 1e-6 * f.sup_norm());
        let c = ScalarField::from_fn(&g, |_, _| 3.5);
        assert!(c.laplacian().sup_norm() < 1e-8);
        let lin = ScalarField::from_fn(&g, |x, _| 0.7 * x);
        assert!(lin.laplacian().sup_norm() < 1e-8);
    }

    #[test]
    fn order_above_two_rejected() {
        let g = grid(8, 8);
        assert!(ScalarField::zeros(&g).diff(2, 1).is_err());
    }

    #[test]
    fn traces_and_normal_derivative() {
        let g = grid(16, 8);
        let beta = 0.3;
        let f = ScalarField::from_fn(&g, |x, _| beta * x);
        assert!(f.trace(End::Outer).values().iter().all(|v| (v - beta).abs() < 1e-15));
        assert!(f.trace(End::Inner).values().iter().all(|v| v.abs() < 1e-15));
        assert!(f.normal_derivative_inner().values().iter().all(|v| (v + beta).abs() < 1e-12));
        let c = ScalarField::from_fn(&g, |_, _| 2.0);
        assert!(c.normal_derivative_inner().sup_norm() < 1e-12);

        let g = grid(48, 16);
        let h = ScalarField::from_fn(&g, |x, y| (2.0 * PI * x).sinh() * (2.0 * PI * y).sin());
        let dn = h.normal_derivative_inner();
        for (m, &y) in g.y().iter().enumerate() {
            assert!((dn.values()[m] + 2.0 * PI * (2.0 * PI * y).sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn random_field_trace_matches_direct_sampling() {
        let g = grid(12, 10);
        let f = ScalarField::from_fn(&g, |x, y| (x * 3.1 + y * 7.3).sin() + x * x * y);
        for (m, &y) in g.y().iter().enumerate() {
            assert_eq!(f.trace(End::Inner).values()[m], (y * 7.3).sin());
            assert_eq!(f.trace(End::Outer).values()[m], (3.1 + y * 7.3).sin() + y);
        }
    }

    #[test]
    fn interpolant_reproduces_resolved_function() {
        let g = grid(24, 16);
        let f = |x: f64, y: f64| x.powi(3) * (2.0 * PI * y).cos() + (4.0 * PI * y).sin();
        let field = ScalarField::from_fn(&g, f);
        let interp = field.interpolant();
        for (x, y) in [(0.1, 0.2), (0.77, 0.93), (0.5, 0.0)] {
            assert!((interp.eval(x, y) - f(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_proxy_counts_constants_only() {
        let g = grid(48, 64);
        let c = [0.0, 0.01 * 3f64.sqrt() / 2.0, -0.01 * 3f64.sqrt() / 2.0];
        let u = TripleField::from_fns(&g, |i, _, _| c[i]);
        let p = u.norm_proxy(0.5);
        assert!((p - 0.01732050807568877).abs() < 1e-9, "{p}");
        assert_eq!(TripleField::zeros(&g).norm_proxy(0.5), 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let g = grid(9, 8);
        let f = ScalarField::from_fn(&g, |x, y| (x - y).exp() / 3.0);
        let mut buf = Vec::new();
        f.write_csv(&mut buf, 0.25).unwrap();
        let (back, delta) = ScalarField::read_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(delta, 0.25);
        assert_eq!(back, f);
    }

    #[test]
    fn boundary_modes_beyond_nyquist_rejected() {
        assert!(Periodic::from_modes(8, &[(5, 1.0, 0.0)]).is_err());
        let p = Periodic::from_modes(8, &[(0, 1.0, 0.0), (1, 0.0, 2.0)]).unwrap();
        assert!((p.values()[2] - (1.0 + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn aliasing_flag_detects_top_modes() {
        let f = Fourier::new(16);
        let low = BoundaryTriple::from_modes(16, [&[(1, 1.0, 0.0)], &[], &[]]).unwrap();
        assert!(!low.aliasing_flag(&f));
        let high = BoundaryTriple::from_modes(16, [&[(1, 1.0, 0.0), (7, 0.01, 0.0)], &[], &[]]).unwrap();
        assert!(high.aliasing_flag(&f));
    }
}
