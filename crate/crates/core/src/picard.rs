//! Fixed-point iteration `u_{n+1} = A(u_n)`, where `A(u)` solves the linear system
//! with the nonlinear forcings frozen at `u`:
//!
//! ```text
//! Lap w = F(u),   B w = (0, G1(u), G2(u)),   w(1, .) = phi.
//! ```

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::field::{aliasing_fraction, BoundaryTriple, End, Grid, TripleField, ALIASING_FRACTION};
use crate::geometry::{check_c0_compatibility, dot3, max_trace_sum, CutoffProfile, JunctionFrame, TripleIndex};
use crate::linear::{boundary_operator, schauder_probe, ContractionEstimates, LinearSolver};
use crate::nonlinearity::{conormal_defect, evaluate, mean_curvature_scalar};
use crate::sampling::{random_boundary, random_compatible_triple, SampleRng};

/// Default Hölder exponent of the norm proxy.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Gate on the mean-curvature, boundary-operator and conormal residuals.
pub const GEOMETRIC_GATE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    /// Sup-norm update tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Radius of the guard ball in the norm proxy.
    pub r_guard: f64,
    pub alpha: f64,
    /// Data threshold above which a warning is recorded.
    pub epsilon: Option<f64>,
}

impl SolveOptions {
    pub fn new(delta: f64) -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            r_guard: default_r_guard(delta),
            alpha: DEFAULT_ALPHA,
            epsilon: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::OutOfRange { what: "tol", value: self.tol, range: "(0, inf)" });
        }
        if !(self.r_guard > 0.0) {
            return Err(Error::OutOfRange { what: "r_guard", value: self.r_guard, range: "(0, inf)" });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::OutOfRange { what: "alpha", value: self.alpha, range: "(0, 1)" });
        }
        if self.max_iter == 0 {
            return Err(Error::OutOfRange { what: "max_iter", value: 0.0, range: "[1, inf)" });
        }
        Ok(())
    }
}

/// `min{delta / 10, 0.05}`.
pub fn default_r_guard(delta: f64) -> f64 {
    (delta / 10.0).min(0.05)
}

/// Residuals of a (converged) iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct FinalResiduals {
    /// `max |Lap u_i - F_i(u)|` over interior nodes, i.e. the mean curvature there.
    pub laplace: f64,
    /// `max |B u - (0, G1(u), G2(u))|` on the spine.
    pub boundary_operator: f64,
    /// `max_y |xi_1 + xi_2 + xi_3|`.
    pub conormal: f64,
    /// `max |u_i(1, .) - phi_i|`.
    pub outer_trace: f64,
    /// `max_y |u_1 + u_2 + u_3|(0, y)`.
    pub trace_sum: f64,
}

impl FinalResiduals {
    /// Names and values in report order.
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("laplace_residual", self.laplace),
            ("boundary_operator_residual", self.boundary_operator),
            ("conormal_defect", self.conormal),
            ("outer_trace_error", self.outer_trace),
            ("trace_sum_error", self.trace_sum),
        ]
    }

    /// Value-level checks at `10 tol`, geometric checks at [`GEOMETRIC_GATE`].
    pub fn gates(&self, tol: f64) -> [(&'static str, bool); 5] {
        [
            ("laplace_residual", self.laplace <= GEOMETRIC_GATE),
            ("boundary_operator_residual", self.boundary_operator <= GEOMETRIC_GATE),
            ("conormal_defect", self.conormal <= GEOMETRIC_GATE),
            ("outer_trace_error", self.outer_trace <= 10.0 * tol),
            ("trace_sum_error", self.trace_sum <= 10.0 * tol),
        ]
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.gates(tol).iter().all(|g| g.1)
    }
}

pub fn final_residuals(
    u: &TripleField,
    phi: &BoundaryTriple,
    cutoff: &CutoffProfile,
    frame: &JunctionFrame,
) -> Result<FinalResiduals> {
    let grid = u.grid();
    let trace_sum = max_trace_sum(&u.traces(End::Inner));
    let mut laplace: f64 = 0.0;
    for i in TripleIndex::ALL {
        let h = mean_curvature_scalar(i, u, cutoff, frame)?;
        for j in 1..grid.nx() - 1 {
            for &v in h.row(j) {
                laplace = laplace.max(v.abs());
            }
        }
    }
    let g = crate::nonlinearity::g_eval(u, frame)?;
    let [b1, b2, b3] = boundary_operator(u);
    let boundary = b1
        .sup_norm()
        .max(b2.zip_with(&g.0, |a, b| a - b).sup_norm())
        .max(b3.zip_with(&g.1, |a, b| a - b).sup_norm());
    let conormal = conormal_defect(u, frame)?
        .iter()
        .map(|s| dot3(*s, *s).sqrt())
        .fold(0.0, f64::max);
    let outer = u.traces(End::Outer);
    let outer_trace = (0..3)
        .map(|i| outer[i].zip_with(phi.comp(i), |a, b| a - b).sup_norm())
        .fold(0.0, f64::max);
    Ok(FinalResiduals {
        laplace,
        boundary_operator: boundary,
        conormal,
        outer_trace,
        trace_sum,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GuardStatus {
    /// Norm proxy of the last iterate.
    pub norm_proxy: f64,
    pub r_guard: f64,
    /// Monotonicity margin of the last iterate; positive means embedded sheets.
    pub embeddedness_margin: f64,
    /// `C^{2,alpha}` proxy of the boundary data.
    pub data_proxy: f64,
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `|u_{n+1} - u_n|_inf` for every step taken.
    pub update_norms: Vec<f64>,
    /// `update_norms[j + 1] / update_norms[j]`; NaN where the denominator vanishes.
    pub contraction_ratios: Vec<f64>,
    /// Norm proxy of each iterate.
    pub proxy_history: Vec<f64>,
    pub final_residuals: Option<FinalResiduals>,
    pub guards: GuardStatus,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub tol: f64,
}

impl SolveReport {
    pub fn last_update(&self) -> f64 {
        self.update_norms.last().copied().unwrap_or(f64::NAN)
    }

    pub fn gates_passed(&self) -> bool {
        self.converged && self.final_residuals.as_ref().is_some_and(|r| r.passes(self.tol))
    }

    /// One row per iteration: `iteration,update_norm,contraction_ratio,norm_proxy`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,update_norm,contraction_ratio,norm_proxy")?;
        for (j, (u, p)) in self.update_norms.iter().zip(&self.proxy_history).enumerate() {
            let ratio = if j == 0 { f64::NAN } else { ratio(self.update_norms[j - 1], *u) };
            writeln!(out, "{},{:e},{:e},{:e}", j + 1, u, ratio, p)?;
        }
        Ok(())
    }

    /// `key = value` summary block.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "converged = {}", self.converged);
        let _ = writeln!(s, "iterations = {}", self.iterations);
        let _ = writeln!(s, "last_update = {:e}", self.last_update());
        let _ = writeln!(s, "tol = {:e}", self.tol);
        let _ = writeln!(s, "norm_proxy = {:e}", self.guards.norm_proxy);
        let _ = writeln!(s, "r_guard = {:e}", self.guards.r_guard);
        let _ = writeln!(s, "embeddedness_margin = {:e}", self.guards.embeddedness_margin);
        let _ = writeln!(s, "data_proxy = {:e}", self.guards.data_proxy);
        if let Some(eps) = self.guards.epsilon {
            let _ = writeln!(s, "epsilon = {eps:e}");
        }
        if let Some(r) = &self.final_residuals {
            for (name, v) in r.entries() {
                let _ = writeln!(s, "{name} = {v:e}");
            }
        }
        let _ = writeln!(s, "gates_passed = {}", self.gates_passed());
        for w in &self.warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        s
    }
}

fn ratio(prev: f64, next: f64) -> f64 {
    if prev > 0.0 {
        next / prev
    } else {
        f64::NAN
    }
}

/// Report plus last iterate of a failed solve.
#[derive(Clone, Debug)]
pub struct SolveFailure {
    pub report: SolveReport,
    pub last_iterate: TripleField,
}

/// Iteration context: cached linear solver, cutoff and frame.
#[derive(Clone, Debug)]
pub struct PicardSolver {
    linear: LinearSolver,
    cutoff: CutoffProfile,
    frame: JunctionFrame,
}

impl PicardSolver {
    pub fn new(grid: &Grid, cutoff: CutoffProfile) -> Self {
        Self {
            linear: LinearSolver::new(grid),
            cutoff,
            frame: JunctionFrame::default(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.linear.grid()
    }

    pub fn cutoff(&self) -> &CutoffProfile {
        &self.cutoff
    }

    pub fn frame(&self) -> &JunctionFrame {
        &self.frame
    }

    pub fn linear(&self) -> &LinearSolver {
        &self.linear
    }

    /// `A(u)`.
    pub fn step(&self, u: &TripleField, phi: &BoundaryTriple) -> Result<TripleField> {
        let terms = evaluate(u, &self.cutoff, &self.frame)?;
        self.linear.solve_system(&terms.f, &terms.g, phi)
    }

    pub fn solve(&self, phi: &BoundaryTriple, opts: &SolveOptions) -> Result<(TripleField, SolveReport)> {
        opts.validate()?;
        let grid = self.grid();
        if phi.len() != grid.ny() {
            return Err(Error::GridMismatch(format!("boundary data has {} samples, grid ny = {}", phi.len(), grid.ny())));
        }
        let fourier = grid.fourier();
        let data_proxy = phi.norm_proxy(fourier, opts.alpha);
        let mut warnings = Vec::new();
        if let Some(eps) = opts.epsilon {
            if data_proxy >= eps {
                warnings.push(format!(
                    "data proxy {data_proxy:e} is not below epsilon {eps:e}; outside the certified small-data regime"
                ));
            }
        }
        if phi.aliasing_flag(fourier) {
            warnings.push("boundary data has significant energy in the top third of the spectrum".into());
        }
        let mut report = SolveReport {
            iterations: 0,
            update_norms: Vec::new(),
            contraction_ratios: Vec::new(),
            proxy_history: Vec::new(),
            final_residuals: None,
            guards: GuardStatus {
                norm_proxy: 0.0,
                r_guard: opts.r_guard,
                embeddedness_margin: 1.0,
                data_proxy,
                epsilon: opts.epsilon,
            },
            converged: false,
            warnings,
            tol: opts.tol,
        };
        let mut u = TripleField::zeros(grid);
        let mut aliasing_noted = false;
        for _ in 0..opts.max_iter {
            let next = match self.step(&u, phi) {
                Ok(next) => next,
                Err(e @ (Error::DegenerateMetric { .. } | Error::CompatibilityViolation { .. })) => {
                    report.warnings.push(format!("iterate {} left the admissible regime: {e}", report.iterations));
                    return Err(Error::GuardViolation(Box::new(SolveFailure { report, last_iterate: u })));
                }
                Err(e) => return Err(e),
            };
            let update = next.sub(&u).sup_norm();
            if let Some(&prev) = report.update_norms.last() {
                report.contraction_ratios.push(ratio(prev, update));
            }
            report.update_norms.push(update);
            report.iterations += 1;
            let proxy = next.norm_proxy(opts.alpha);
            report.proxy_history.push(proxy);
            report.guards.norm_proxy = proxy;
            if !aliasing_noted && next.comps().iter().any(|c| aliasing_fraction(c) > ALIASING_FRACTION) {
                report.warnings.push(format!("iterate {} is under-resolved in y", report.iterations));
                aliasing_noted = true;
            }
            u = next;
            if !update.is_finite() || !proxy.is_finite() {
                report.warnings.push("non-finite iterate".into());
                return Err(Error::NoConvergence(Box::new(SolveFailure { report, last_iterate: u })));
            }
            report.guards.embeddedness_margin = check_c0_compatibility(&u, &self.cutoff, opts.alpha).monotonicity_margin;
            if proxy > opts.r_guard {
                return Err(Error::GuardViolation(Box::new(SolveFailure { report, last_iterate: u })));
            }
            if update < opts.tol {
                report.converged = true;
                break;
            }
        }
        if !report.converged {
            return Err(Error::NoConvergence(Box::new(SolveFailure { report, last_iterate: u })));
        }
        let residuals = final_residuals(&u, phi, &self.cutoff, &self.frame)?;
        for (name, ok) in residuals.gates(opts.tol) {
            if !ok {
                report.warnings.push(format!("residual gate failed: {name}"));
            }
        }
        report.final_residuals = Some(residuals);
        Ok((u, report))
    }

    /// Iterates from `0` and from a random start of the data's size side by side,
    /// recording `proxy(A u - A v) / proxy(u - v)` per step.
    pub fn contraction_diagnostics(&self, phi: &BoundaryTriple, opts: &SolveOptions, seed: u64) -> Result<ContractionCurve> {
        opts.validate()?;
        let grid = self.grid();
        let data_proxy = phi.norm_proxy(grid.fourier(), opts.alpha);
        let mut u = TripleField::zeros(grid);
        let mut v = if data_proxy > 0.0 {
            random_compatible_triple(grid, &mut SampleRng::new(seed), data_proxy, opts.alpha)
        } else {
            TripleField::zeros(grid)
        };
        let mut ratios = Vec::new();
        let mut guard_exceeded = false;
        for _ in 0..opts.max_iter {
            // below the update tolerance the ratios only measure round-off
            let diff = v.sub(&u);
            if !(diff.sup_norm() >= opts.tol) {
                break;
            }
            let before = diff.norm_proxy(opts.alpha);
            let (au, av) = match (self.step(&u, phi), self.step(&v, phi)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => {
                    guard_exceeded = true;
                    break;
                }
            };
            let after = av.sub(&au).norm_proxy(opts.alpha);
            ratios.push(after / before);
            if au.norm_proxy(opts.alpha).max(av.norm_proxy(opts.alpha)) > opts.r_guard {
                guard_exceeded = true;
                break;
            }
            u = au;
            v = av;
        }
        Ok(ContractionCurve { ratios, guard_exceeded })
    }
}

/// Result of [`PicardSolver::contraction_diagnostics`].
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionCurve {
    pub ratios: Vec<f64>,
    /// The iteration left the guard ball or the admissible regime.
    pub guard_exceeded: bool,
}

pub fn picard_step(u: &TripleField, phi: &BoundaryTriple, cutoff: &CutoffProfile) -> Result<TripleField> {
    PicardSolver::new(u.grid(), *cutoff).step(u, phi)
}

pub fn solve_nonlinear(
    grid: &Grid,
    cutoff: &CutoffProfile,
    phi: &BoundaryTriple,
    opts: &SolveOptions,
) -> Result<(TripleField, SolveReport)> {
    PicardSolver::new(grid, *cutoff).solve(phi, opts)
}

pub fn contraction_diagnostics(
    grid: &Grid,
    cutoff: &CutoffProfile,
    phi: &BoundaryTriple,
    opts: &SolveOptions,
) -> Result<ContractionCurve> {
    PicardSolver::new(grid, *cutoff).contraction_diagnostics(phi, opts, 0)
}

/// Empirical stand-ins for the fixed-point constants, measured on the discrete
/// map `A` over random compatible fields of proxy at most `radius` and random data
/// of proxy at most `radius^2`:
///
/// - `C1 = max proxy(A(u; phi)) / (proxy(u)^2 + proxy(phi))`
/// - `C2 = max proxy(A(u; 0) - A(v; 0)) / (proxy(u - v) (proxy(u) + proxy(v)))`
pub fn estimate_contraction_constants(
    grid: &Grid,
    cutoff: &CutoffProfile,
    alpha: f64,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<ContractionEstimates> {
    let solver = PicardSolver::new(grid, *cutoff);
    let fourier = grid.fourier();
    let c_lin = schauder_probe(grid, samples, alpha, seed)?.c_lin;
    let mut rng = SampleRng::new(seed.wrapping_add(1));
    let zero = BoundaryTriple::zeros(grid.ny());
    let (mut c1, mut c2): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let r = radius * rng.uniform(0.25, 1.0);
        let u = random_compatible_triple(grid, &mut rng, r, alpha);
        let rv = r * rng.uniform(0.25, 1.0);
        let v = random_compatible_triple(grid, &mut rng, rv, alpha);
        let phi = random_boundary(grid.ny(), &mut rng, r * r, alpha);
        let (pu, pv) = (u.norm_proxy(alpha), v.norm_proxy(alpha));
        let au = solver.step(&u, &phi)?;
        c1 = c1.max(au.norm_proxy(alpha) / (pu * pu + phi.norm_proxy(fourier, alpha)));
        let diff = solver.step(&u, &zero)?.sub(&solver.step(&v, &zero)?);
        c2 = c2.max(diff.norm_proxy(alpha) / (u.sub(&v).norm_proxy(alpha) * (pu + pv)));
    }
    Ok(ContractionEstimates::new(c_lin, c1, c2))
}

/// Sup norm of an update, exposed for callers that run their own loops.
pub fn update_norm(a: &TripleField, b: &TripleField) -> f64 {
    a.sub(b).sup_norm()
}
