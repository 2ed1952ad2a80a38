//! Static geometry of `Y x S^1`: the junction frame, the cutoff profile,
//! spine reconstruction and the sheet parametrization
//!
//! `M_i = { (-x n_i + u_i(x, y) nu_i + eta(x) w_i(y), y) }`.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{End, FieldInterpolant, Periodic, TripleField};
use crate::fourier::{Fourier, RealSpectrum};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Absolute tolerance on `|u1 + u2 + u3|` along the spine.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

pub const DEFAULT_DELTA: f64 = 0.25;

/// Sheet index in `{1, 2, 3}` with cyclic neighbours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TripleIndex(u8);

impl TripleIndex {
    pub const ALL: [TripleIndex; 3] = [TripleIndex(1), TripleIndex(2), TripleIndex(3)];

    pub fn new(i: usize) -> Result<Self> {
        match i {
            1..=3 => Ok(Self(i as u8)),
            _ => Err(Error::OutOfRange {
                what: "sheet index",
                value: i as f64,
                range: "{1, 2, 3}",
            }),
        }
    }

    /// One-based value.
    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Zero-based position, for indexing arrays.
    pub fn idx(self) -> usize {
        self.0 as usize - 1
    }

    pub fn pred(self) -> Self {
        Self(if self.0 == 1 { 3 } else { self.0 - 1 })
    }

    pub fn succ(self) -> Self {
        Self(if self.0 == 3 { 1 } else { self.0 + 1 })
    }
}

impl fmt::Display for TripleIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Vec2 = [f64; 2];
pub type Vec3 = [f64; 3];

pub fn dot2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Conormals `n_i` of the spine in the flat sheets and the sheet normals `nu_i`
/// (each `n_i` rotated counterclockwise by 90 degrees).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JunctionFrame {
    pub n: [Vec2; 3],
    pub nu: [Vec2; 3],
}

impl Default for JunctionFrame {
    fn default() -> Self {
        frame_vectors()
    }
}

pub fn frame_vectors() -> JunctionFrame {
    let h = 0.5 * SQRT3;
    JunctionFrame {
        n: [[-1.0, 0.0], [0.5, -h], [0.5, h]],
        nu: [[0.0, -1.0], [h, 0.5], [-h, 0.5]],
    }
}

impl JunctionFrame {
    pub fn n(&self, i: TripleIndex) -> Vec2 {
        self.n[i.idx()]
    }

    pub fn nu(&self, i: TripleIndex) -> Vec2 {
        self.nu[i.idx()]
    }
}

/// `C^2` cutoff: 1 on `[0, delta]`, 0 on `[2 delta, 1]`, quintic smoothstep between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffProfile {
    delta: f64,
}

impl CutoffProfile {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::OutOfRange {
                what: "delta",
                value: delta,
                range: "(0, 1/2)",
            });
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `(eta, eta', eta'')` at `x`, which must lie in `[0, 1]`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange {
                what: "x",
                value: x,
                range: "[0, 1]",
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> (f64, f64, f64) {
        let d = self.delta;
        if x <= d {
            return (1.0, 0.0, 0.0);
        }
        if x >= 2.0 * d {
            return (0.0, 0.0, 0.0);
        }
        let t = (2.0 * d - x) / d;
        let s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
        let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        let dds = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
        // dt/dx = -1/delta
        (s, -ds / d, dds / (d * d))
    }
}

/// Free-function spelling of [`CutoffProfile::eval`].
pub fn cutoff_eval(profile: &CutoffProfile, x: f64) -> Result<(f64, f64, f64)> {
    profile.eval(x)
}

/// Scalar `(u_{i-1}(0, y) - u_{i+1}(0, y)) / sqrt(3)`, the length of `w_i` along `n_i`.
pub fn wall_coefficient(traces: &[Periodic; 3], i: TripleIndex) -> Periodic {
    traces[i.pred().idx()].zip_with(&traces[i.succ().idx()], |a, b| (a - b) / SQRT3)
}

/// `w_i(y) = ((u_{i-1}(0,y) - u_{i+1}(0,y)) / sqrt 3) n_i` on the y-grid.
pub fn wall_offset(traces: &[Periodic; 3], i: TripleIndex, frame: &JunctionFrame) -> Result<Vec<Vec2>> {
    check_trace_lengths(traces)?;
    let n = frame.n(i);
    Ok(wall_coefficient(traces, i)
        .values()
        .iter()
        .map(|&s| [s * n[0], s * n[1]])
        .collect())
}

fn check_trace_lengths(traces: &[Periodic; 3]) -> Result<()> {
    if traces[0].len() != traces[1].len() || traces[0].len() != traces[2].len() {
        return Err(Error::GridMismatch(format!(
            "trace lengths {}, {}, {}",
            traces[0].len(),
            traces[1].len(),
            traces[2].len()
        )));
    }
    Ok(())
}

/// Largest `|u1(0,y) + u2(0,y) + u3(0,y)|` over the y-grid.
pub fn max_trace_sum(traces: &[Periodic; 3]) -> f64 {
    (0..traces[0].len())
        .map(|m| (traces[0].values()[m] + traces[1].values()[m] + traces[2].values()[m]).abs())
        .fold(0.0, f64::max)
}

/// The junction curve `y -> v(y)` in the plane.
#[derive(Clone, Debug)]
pub struct SpineCurve {
    components: [RealSpectrum; 2],
    samples: [Periodic; 2],
    derivative: [Periodic; 2],
}

impl SpineCurve {
    fn from_samples(v1: Periodic, v2: Periodic, fourier: &Fourier) -> Self {
        let derivative = [v1.derivative(fourier, 1), v2.derivative(fourier, 1)];
        Self {
            components: [v1.spectrum(fourier), v2.spectrum(fourier)],
            samples: [v1, v2],
            derivative,
        }
    }

    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples[0].is_empty()
    }

    /// `v(y_m)` at grid node `m`.
    pub fn at(&self, m: usize) -> Vec2 {
        [self.samples[0].values()[m], self.samples[1].values()[m]]
    }

    /// `v'(y_m)` at grid node `m`.
    pub fn derivative_at(&self, m: usize) -> Vec2 {
        [self.derivative[0].values()[m], self.derivative[1].values()[m]]
    }

    pub fn eval(&self, y: f64) -> Vec2 {
        [self.components[0].eval(y), self.components[1].eval(y)]
    }

    pub fn eval_derivative(&self, y: f64) -> Vec2 {
        [
            self.components[0].eval_derivative(y, 1),
            self.components[1].eval_derivative(y, 1),
        ]
    }

    pub fn coefficients(&self) -> &[RealSpectrum; 2] {
        &self.components
    }

    /// `sup_y |v(y)|` over the grid.
    pub fn sup_norm(&self) -> f64 {
        (0..self.len())
            .map(|m| {
                let v = self.at(m);
                dot2(v, v).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// The three candidate spine points `v_i = w_i + u_i(0, y) nu_i`, which coincide
/// when the traces are compatible.
pub fn spine_reconstructions(traces: &[Periodic; 3], frame: &JunctionFrame) -> [Vec<Vec2>; 3] {
    TripleIndex::ALL.map(|i| {
        let s = wall_coefficient(traces, i);
        let (n, nu) = (frame.n(i), frame.nu(i));
        s.values()
            .iter()
            .zip(traces[i.idx()].values())
            .map(|(&s, &t)| [s * n[0] + t * nu[0], s * n[1] + t * nu[1]])
            .collect()
    })
}

pub fn spine_from_traces(traces: &[Periodic; 3], frame: &JunctionFrame, fourier: &Fourier) -> Result<SpineCurve> {
    spine_from_traces_with_tol(traces, frame, fourier, COMPATIBILITY_TOL)
}

pub fn spine_from_traces_with_tol(
    traces: &[Periodic; 3],
    frame: &JunctionFrame,
    fourier: &Fourier,
    tol: f64,
) -> Result<SpineCurve> {
    check_trace_lengths(traces)?;
    if traces[0].len() != fourier.len() {
        return Err(Error::GridMismatch(format!(
            "{} trace samples for a {}-point circle",
            traces[0].len(),
            fourier.len()
        )));
    }
    let max_sum = max_trace_sum(traces);
    if max_sum > tol {
        return Err(Error::CompatibilityViolation { max_sum, tol });
    }
    let [first, _, _] = spine_reconstructions(traces, frame);
    let v1 = Periodic::new(first.iter().map(|p| p[0]).collect());
    let v2 = Periodic::new(first.iter().map(|p| p[1]).collect());
    Ok(SpineCurve::from_samples(v1, v2, fourier))
}

/// Evaluates the sheet parametrization anywhere in `[0, 1] x S^1`.
#[derive(Clone, Debug)]
pub struct SheetEmbedding {
    frame: JunctionFrame,
    cutoff: CutoffProfile,
    heights: [FieldInterpolant; 3],
    traces: [RealSpectrum; 3],
}

impl SheetEmbedding {
    pub fn new(u: &TripleField, frame: &JunctionFrame, cutoff: &CutoffProfile) -> Self {
        let fourier = u.grid().fourier();
        let traces = u.traces(End::Inner);
        Self {
            frame: *frame,
            cutoff: *cutoff,
            heights: [0, 1, 2].map(|i| u.comp(i).interpolant()),
            traces: [0, 1, 2].map(|i| traces[i].spectrum(fourier)),
        }
    }

    /// `(p1, p2, y)` of sheet `i` at parameter `(x, y)`.
    pub fn point(&self, i: TripleIndex, x: f64, y: f64) -> Result<Vec3> {
        let (eta, _, _) = self.cutoff.eval(x)?;
        if !y.is_finite() {
            return Err(Error::OutOfRange {
                what: "y",
                value: y,
                range: "finite reals",
            });
        }
        let h = self.heights[i.idx()].eval(x, y);
        let s = (self.traces[i.pred().idx()].eval(y) - self.traces[i.succ().idx()].eval(y)) / SQRT3;
        let (n, nu) = (self.frame.n(i), self.frame.nu(i));
        let a = -x + eta * s;
        Ok([a * n[0] + h * nu[0], a * n[1] + h * nu[1], y])
    }
}

pub fn embed_point(
    i: TripleIndex,
    x: f64,
    y: f64,
    u: &TripleField,
    frame: &JunctionFrame,
    cutoff: &CutoffProfile,
) -> Result<Vec3> {
    SheetEmbedding::new(u, frame, cutoff).point(i, x, y)
}

/// Outcome of the `C^0` compatibility and embeddedness checks.
#[derive(Clone, Debug, PartialEq)]
pub struct C0Diagnostics {
    /// `max_y |u1(0,y) + u2(0,y) + u3(0,y)|`.
    pub max_trace_sum: f64,
    /// `min_{i,x,y} 1 - eta'(x) (u_{i-1}(0,y) - u_{i+1}(0,y)) / sqrt 3`; positive means
    /// each sheet's radial coordinate is strictly monotone, so no self-intersection.
    pub monotonicity_margin: f64,
    pub norm_proxy: f64,
    /// `norm_proxy < delta / 10`.
    pub small: bool,
}

impl C0Diagnostics {
    pub fn passes(&self) -> bool {
        self.max_trace_sum <= COMPATIBILITY_TOL && self.monotonicity_margin > 0.0 && self.small
    }
}

pub fn check_c0_compatibility(u: &TripleField, cutoff: &CutoffProfile, alpha: f64) -> C0Diagnostics {
    let traces = u.traces(End::Inner);
    let d = cutoff.delta();
    // eta' is supported on [delta, 2 delta]; sample it densely there
    let samples = 400;
    let slopes: Vec<f64> = (0..=samples)
        .map(|k| cutoff.eval_unchecked(d + d * k as f64 / samples as f64).1)
        .collect();
    let mut margin: f64 = 1.0;
    for i in TripleIndex::ALL {
        for &s in wall_coefficient(&traces, i).values() {
            for &slope in &slopes {
                margin = margin.min(1.0 - slope * s);
            }
        }
    }
    let norm_proxy = u.norm_proxy(alpha);
    C0Diagnostics {
        max_trace_sum: max_trace_sum(&traces),
        monotonicity_margin: margin,
        norm_proxy,
        small: norm_proxy < d / 10.0,
    }
}
