//! Run configuration and the `solve`, `verify`, `sweep` and `export-mesh` workflows.
//!
//! Configuration is a flat `key = value` file (`#` starts a comment); command-line
//! flags override it. Keys: `delta`, `alpha`, `nx`, `ny`, `tol`, `max_iter`,
//! `r_guard`, `epsilon`, `family` (`translate:cx,cy` or `rotate:beta`),
//! `modes1`..`modes3` (`k:cos:sin;k:cos:sin;...`), `mesh` (`MXxMY`), `out`.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::{BoundaryTriple, End, Grid, Periodic, ScalarField, TripleField, DEFAULT_NX, DEFAULT_NY};
use crate::geometry::{spine_from_traces, CutoffProfile, JunctionFrame, SheetEmbedding, TripleIndex, DEFAULT_DELTA};
use crate::mesh::mesh_surface;
use crate::oracles::{fd_mean_curvature_with, junction_angle_check, max_angle_deviation, ExactFamily};
use crate::picard::{
    default_r_guard, estimate_contraction_constants, final_residuals, PicardSolver, SolveFailure, SolveOptions,
    SolveReport, DEFAULT_ALPHA, GEOMETRIC_GATE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

/// Mean-curvature bound for the finite-difference oracle at `h = 1e-3`.
pub const FD_CURVATURE_GATE: f64 = 1e-4;
/// Junction-angle bound in radians.
pub const ANGLE_GATE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub enum BoundarySpec {
    Family(ExactFamily),
    /// Per-sheet `(k, cos, sin)` lists.
    Modes([Vec<(usize, f64, f64)>; 3]),
}

impl BoundarySpec {
    /// Same shape, scaled to magnitude `scale` (families) or by `scale` (modes).
    pub fn scaled(&self, scale: f64) -> BoundarySpec {
        match self {
            BoundarySpec::Family(ExactFamily::Translate(c)) => {
                let len = c[0].hypot(c[1]);
                let dir = if len > 0.0 { [c[0] / len, c[1] / len] } else { [1.0, 0.0] };
                BoundarySpec::Family(ExactFamily::Translate([scale * dir[0], scale * dir[1]]))
            }
            BoundarySpec::Family(ExactFamily::Rotate(b)) => {
                BoundarySpec::Family(ExactFamily::Rotate(if *b < 0.0 { -scale } else { scale }))
            }
            BoundarySpec::Modes(m) => {
                BoundarySpec::Modes(m.clone().map(|l| l.into_iter().map(|(k, c, s)| (k, scale * c, scale * s)).collect()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub delta: f64,
    pub alpha: f64,
    pub nx: usize,
    pub ny: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Defaults to `min{delta/10, 0.05}`.
    pub r_guard: Option<f64>,
    /// Data warning threshold; estimated when absent.
    pub epsilon: Option<f64>,
    pub boundary: BoundarySpec,
    pub mesh: (usize, usize),
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            alpha: DEFAULT_ALPHA,
            nx: DEFAULT_NX,
            ny: DEFAULT_NY,
            tol: 1e-10,
            max_iter: 50,
            r_guard: None,
            epsilon: None,
            boundary: BoundarySpec::Modes(Default::default()),
            mesh: (24, 48),
            out: PathBuf::from("out"),
        }
    }
}

fn cfg_err(key: &str, value: &str, what: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key} = {value:?}: {what}"))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| cfg_err(key, value, e))
}

/// `translate:cx,cy` or `rotate:beta`.
pub fn parse_family(value: &str) -> Result<ExactFamily> {
    let (name, args) = value
        .trim()
        .split_once(':')
        .ok_or_else(|| cfg_err("family", value, "expected translate:cx,cy or rotate:beta"))?;
    match name {
        "translate" => {
            let parts: Vec<f64> = args.split(',').map(|p| parse_num("family", p)).collect::<Result<_>>()?;
            match parts[..] {
                [cx, cy] => Ok(ExactFamily::Translate([cx, cy])),
                _ => Err(cfg_err("family", value, "translate needs two components")),
            }
        }
        "rotate" => Ok(ExactFamily::Rotate(parse_num("family", args)?)),
        _ => Err(cfg_err("family", value, "unknown family")),
    }
}

/// `k:cos:sin;k:cos:sin;...` (empty means zero data).
pub fn parse_modes(key: &str, value: &str) -> Result<Vec<(usize, f64, f64)>> {
    value
        .split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let parts: Vec<&str> = t.split(':').collect();
            if parts.len() != 3 {
                return Err(cfg_err(key, value, format!("mode {t:?} is not k:cos:sin")));
            }
            Ok((parse_num(key, parts[0])?, parse_num(key, parts[1])?, parse_num(key, parts[2])?))
        })
        .collect()
}

fn format_modes(modes: &[(usize, f64, f64)]) -> String {
    modes.iter().map(|(k, c, s)| format!("{k}:{c:e}:{s:e}")).collect::<Vec<_>>().join(";")
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "delta" => self.delta = parse_num(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "nx" => self.nx = parse_num(key, value)?,
            "ny" => self.ny = parse_num(key, value)?,
            "tol" => self.tol = parse_num(key, value)?,
            "max_iter" => self.max_iter = parse_num(key, value)?,
            "r_guard" => self.r_guard = Some(parse_num(key, value)?),
            "epsilon" => self.epsilon = Some(parse_num(key, value)?),
            "family" => self.boundary = BoundarySpec::Family(parse_family(value)?),
            "modes1" | "modes2" | "modes3" => {
                let i = (key.as_bytes()[5] - b'1') as usize;
                let mut modes = match &self.boundary {
                    BoundarySpec::Modes(m) => m.clone(),
                    BoundarySpec::Family(_) => Default::default(),
                };
                modes[i] = parse_modes(key, value)?;
                self.boundary = BoundarySpec::Modes(modes);
            }
            "mesh" => {
                let (a, b) = value
                    .trim()
                    .split_once('x')
                    .ok_or_else(|| cfg_err(key, value, "expected MXxMY"))?;
                self.mesh = (parse_num(key, a)?, parse_num(key, b)?);
            }
            "out" => self.out = PathBuf::from(value.trim()),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Effective configuration in the input format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "nx = {}", self.nx);
        let _ = writeln!(s, "ny = {}", self.ny);
        let _ = writeln!(s, "tol = {:e}", self.tol);
        let _ = writeln!(s, "max_iter = {}", self.max_iter);
        let _ = writeln!(s, "r_guard = {}", self.r_guard());
        if let Some(eps) = self.epsilon {
            let _ = writeln!(s, "epsilon = {eps:e}");
        }
        match &self.boundary {
            BoundarySpec::Family(ExactFamily::Translate(c)) => {
                let _ = writeln!(s, "family = translate:{},{}", c[0], c[1]);
            }
            BoundarySpec::Family(ExactFamily::Rotate(b)) => {
                let _ = writeln!(s, "family = rotate:{b}");
            }
            BoundarySpec::Modes(m) => {
                for (i, modes) in m.iter().enumerate() {
                    let _ = writeln!(s, "modes{} = {}", i + 1, format_modes(modes));
                }
            }
        }
        let _ = writeln!(s, "mesh = {}x{}", self.mesh.0, self.mesh.1);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }

    pub fn r_guard(&self) -> f64 {
        self.r_guard.unwrap_or_else(|| default_r_guard(self.delta))
    }

    pub fn validate(&self) -> Result<()> {
        CutoffProfile::new(self.delta)?;
        Grid::new(self.nx, self.ny)?;
        self.options().validate()?;
        if let BoundarySpec::Modes(m) = &self.boundary {
            for list in m {
                for &(k, c, s) in list {
                    if !c.is_finite() || !s.is_finite() {
                        return Err(Error::Config("boundary coefficients must be finite".into()));
                    }
                    if k > self.ny / 2 {
                        return Err(Error::Config(format!("mode k = {k} exceeds ny/2 = {}", self.ny / 2)));
                    }
                }
            }
        }
        if self.mesh.0 < 2 || self.mesh.1 < 3 {
            return Err(Error::Config("mesh resolution below 2x3".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.nx, self.ny)
    }

    pub fn cutoff(&self) -> Result<CutoffProfile> {
        CutoffProfile::new(self.delta)
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            r_guard: self.r_guard(),
            alpha: self.alpha,
            epsilon: self.epsilon,
        }
    }

    /// Boundary data; families also return their exact solution.
    pub fn boundary_data(&self, grid: &Grid) -> Result<(BoundaryTriple, Option<TripleField>)> {
        match &self.boundary {
            BoundarySpec::Family(f) => {
                let (phi, exact) = f.generate(grid, self.delta)?;
                Ok((phi, Some(exact)))
            }
            BoundarySpec::Modes(m) => Ok((BoundaryTriple::from_modes(grid.ny(), [&m[0], &m[1], &m[2]])?, None)),
        }
    }
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))?;
    Ok(())
}

fn config_comment(cfg: &RunConfig) -> String {
    cfg.to_text().lines().map(|l| format!("# {l}\n")).collect()
}

fn field_csv(cfg: &RunConfig, field: &ScalarField) -> Result<Vec<u8>> {
    let mut buf = config_comment(cfg).into_bytes();
    field.write_csv(&mut buf, cfg.delta)?;
    Ok(buf)
}

fn boundary_csv(cfg: &RunConfig, phi: &BoundaryTriple, grid: &Grid) -> Vec<u8> {
    let mut s = config_comment(cfg);
    s.push_str("y,phi1,phi2,phi3\n");
    for (m, y) in grid.y().iter().enumerate() {
        let _ = writeln!(s, "{y:e},{:e},{:e},{:e}", phi.comp(0).values()[m], phi.comp(1).values()[m], phi.comp(2).values()[m]);
    }
    s.into_bytes()
}

fn read_boundary_csv(path: &Path, ny: usize) -> Result<BoundaryTriple> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { file: name.clone(), msg: e.to_string() })?;
        if vals.len() != 4 {
            return Err(Error::Parse { file: name.clone(), msg: format!("expected 4 columns, got {}", vals.len()) });
        }
        for i in 0..3 {
            cols[i].push(vals[i + 1]);
        }
    }
    if cols[0].len() != ny {
        return Err(Error::Parse { file: name, msg: format!("{} rows, expected {ny}", cols[0].len()) });
    }
    let [a, b, c] = cols;
    BoundaryTriple::new(Periodic::new(a), Periodic::new(b), Periodic::new(c))
}

fn report_csv(cfg: &RunConfig, report: &SolveReport) -> Result<Vec<u8>> {
    let mut buf = config_comment(cfg).into_bytes();
    report.write_csv(&mut buf)?;
    Ok(buf)
}

fn spine_csv(cfg: &RunConfig, u: &TripleField) -> Result<Vec<u8>> {
    let grid = u.grid();
    let spine = spine_from_traces(&u.traces(End::Inner), &JunctionFrame::default(), grid.fourier())?;
    let mut s = config_comment(cfg);
    s.push_str("y,v1,v2\n");
    for (m, y) in grid.y().iter().enumerate() {
        let v = spine.at(m);
        let _ = writeln!(s, "{y:e},{:e},{:e}", v[0], v[1]);
    }
    Ok(s.into_bytes())
}

fn mesh_obj(cfg: &RunConfig, u: &TripleField, cutoff: &CutoffProfile, mesh: (usize, usize)) -> Result<Vec<u8>> {
    let mut m = mesh_surface(u, &JunctionFrame::default(), cutoff, mesh)?;
    m.header.extend(cfg.to_text().lines().map(String::from));
    let mut buf = Vec::new();
    m.write_obj(&mut buf)?;
    Ok(buf)
}

/// Outcome of a command: exit code plus human-readable text.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutcome {
    pub code: i32,
    pub message: String,
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NoConvergence(_) => EXIT_NO_CONVERGENCE,
        Error::GuardViolation(_) => EXIT_GUARD,
        Error::Config(_) | Error::OutOfRange { .. } | Error::InvalidGrid(_) | Error::Magnitude(_) => EXIT_CONFIG,
        _ => EXIT_FAILED_CHECK,
    }
}

fn write_fields(cfg: &RunConfig, dir: &Path, u: &TripleField) -> Result<()> {
    for (i, c) in u.comps().iter().enumerate() {
        write_atomic(dir, &format!("u{}.csv", i + 1), &field_csv(cfg, c)?)?;
    }
    Ok(())
}

/// Runs the fixed-point solve and writes all artifacts to `cfg.out`.
pub fn cmd_solve(cfg: &RunConfig) -> CommandOutcome {
    match solve_inner(cfg) {
        Ok(o) => o,
        Err(e) => CommandOutcome { code: exit_code_for(&e), message: format!("error: {e}") },
    }
}

fn solve_inner(cfg: &RunConfig) -> Result<CommandOutcome> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let cutoff = cfg.cutoff()?;
    let (phi, exact) = cfg.boundary_data(&grid)?;
    let mut opts = cfg.options();
    let mut extra = String::new();
    if opts.epsilon.is_none() {
        let radius = opts.r_guard.min(cutoff.delta() / 10.0);
        let est = estimate_contraction_constants(&grid, &cutoff, opts.alpha, radius, 6, 0)?;
        opts.epsilon = Some(est.epsilon(opts.r_guard));
        let _ = writeln!(
            extra,
            "empirical C_lin = {:e}\nempirical C1 = {:e}\nempirical C2 = {:e}\nempirical r_tilde = {:e}",
            est.c_lin, est.c1, est.c2, est.r_tilde
        );
    }
    let dir = &cfg.out;
    write_atomic(dir, "config.txt", cfg.to_text().as_bytes())?;
    write_atomic(dir, "phi.csv", &boundary_csv(cfg, &phi, &grid))?;
    let solver = PicardSolver::new(&grid, cutoff);
    match solver.solve(&phi, &opts) {
        Ok((u, report)) => {
            if let Some(exact) = &exact {
                let _ = writeln!(extra, "exact_family_error = {:e}", u.sub(exact).sup_norm());
            }
            write_fields(cfg, dir, &u)?;
            write_atomic(dir, "report.csv", &report_csv(cfg, &report)?)?;
            write_atomic(dir, "summary.txt", summary_text(cfg, &report, &extra).as_bytes())?;
            write_atomic(dir, "spine.csv", &spine_csv(cfg, &u)?)?;
            write_atomic(dir, "mesh.obj", &mesh_obj(cfg, &u, &cutoff, cfg.mesh)?)?;
            let code = if report.gates_passed() { EXIT_OK } else { EXIT_FAILED_CHECK };
            Ok(CommandOutcome { code, message: summary_text(cfg, &report, &extra) })
        }
        Err(e) => {
            let code = exit_code_for(&e);
            if let Error::NoConvergence(f) | Error::GuardViolation(f) = &e {
                write_failure(cfg, dir, f, &extra)?;
            }
            Ok(CommandOutcome { code, message: format!("error: {e}") })
        }
    }
}

fn summary_text(cfg: &RunConfig, report: &SolveReport, extra: &str) -> String {
    format!("{}{}{}", config_comment(cfg), report.summary(), extra)
}

fn write_failure(cfg: &RunConfig, dir: &Path, f: &SolveFailure, extra: &str) -> Result<()> {
    write_fields(cfg, dir, &f.last_iterate)?;
    write_atomic(dir, "report.csv", &report_csv(cfg, &f.report)?)?;
    write_atomic(dir, "summary.txt", summary_text(cfg, &f.report, extra).as_bytes())
}

/// Reloaded solve artifacts.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub config: RunConfig,
    pub u: TripleField,
    pub phi: BoundaryTriple,
    /// `key = value` pairs from `summary.txt`.
    pub summary: Vec<(String, String)>,
}

pub fn load_artifacts(dir: &Path) -> Result<Artifacts> {
    let config = {
        let mut c = RunConfig::default();
        c.apply_file(&dir.join("config.txt"))?;
        c
    };
    let mut comps = Vec::with_capacity(3);
    for i in 1..=3 {
        let path = dir.join(format!("u{i}.csv"));
        let file = fs::File::open(&path)?;
        comps.push(ScalarField::read_csv(BufReader::new(file), &path.display().to_string())?.0);
    }
    let [a, b, c]: [ScalarField; 3] = comps.try_into().expect("three components");
    let u = TripleField::new(a, b, c)?;
    let phi = read_boundary_csv(&dir.join("phi.csv"), u.grid().ny())?;
    let summary = fs::read_to_string(dir.join("summary.txt"))
        .unwrap_or_default()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split_once('=').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())))
        .collect();
    Ok(Artifacts { config, u, phi, summary })
}

/// One row of the verification table.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn upper(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

/// Re-runs the oracles on loaded artifacts.
pub fn verify_artifacts(art: &Artifacts) -> Result<Vec<Check>> {
    let cfg = &art.config;
    let cutoff = cfg.cutoff()?;
    let frame = JunctionFrame::default();
    let u = &art.u;
    let mut checks = Vec::new();

    let emb = SheetEmbedding::new(u, &frame, &cutoff);
    let mut fd_max: f64 = 0.0;
    for i in TripleIndex::ALL {
        for a in 0..10 {
            let x = 0.05 + 0.1 * a as f64;
            for b in 0..8 {
                let y = (b as f64 + 0.5) / 8.0;
                fd_max = fd_max.max(fd_mean_curvature_with(&emb, i, (x, y), 1e-3, &frame)?.abs());
            }
        }
    }
    checks.push(Check::upper("fd_mean_curvature", fd_max, FD_CURVATURE_GATE));
    let angles = max_angle_deviation(&junction_angle_check(u, &frame)?);
    checks.push(Check::upper("junction_angle_deviation", angles, ANGLE_GATE));

    let residuals = final_residuals(u, &art.phi, &cutoff, &frame)?;
    for ((name, value), (_, _)) in residuals.entries().into_iter().zip(residuals.gates(cfg.tol)) {
        let threshold = match name {
            "outer_trace_error" | "trace_sum_error" => 10.0 * cfg.tol,
            _ => GEOMETRIC_GATE,
        };
        checks.push(Check::upper(name, value, threshold));
        if let Some((_, stored)) = art.summary.iter().find(|(k, _)| k == name) {
            if let Ok(stored) = stored.parse::<f64>() {
                let diff = (stored - value).abs();
                let scale = stored.abs().max(value.abs());
                checks.push(Check::upper(
                    &format!("{name}_reproduced"),
                    diff,
                    1e-9 * scale + f64::MIN_POSITIVE,
                ));
            }
        }
    }
    Ok(checks)
}

pub fn format_checks(checks: &[Check]) -> String {
    let mut s = format!("{:<36} {:>12} {:>12}  result\n", "check", "value", "threshold");
    for c in checks {
        let _ = writeln!(
            s,
            "{:<36} {:>12.3e} {:>12.3e}  {}",
            c.name,
            c.value,
            c.threshold,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    s
}

pub fn cmd_verify(dir: &Path) -> CommandOutcome {
    let result = load_artifacts(dir).and_then(|art| verify_artifacts(&art));
    match result {
        Ok(checks) => {
            let all = checks.iter().all(|c| c.pass);
            let mut message = format_checks(&checks);
            let _ = writeln!(message, "overall: {}", if all { "PASS" } else { "FAIL" });
            CommandOutcome { code: if all { EXIT_OK } else { EXIT_FAILED_CHECK }, message }
        }
        Err(e) => CommandOutcome { code: EXIT_FAILED_CHECK, message: format!("verify failed: {e}\noverall: FAIL\n") },
    }
}

/// One row of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub scale: f64,
    pub status: String,
    pub iterations: usize,
    /// Largest final residual (NaN when the solve failed).
    pub final_residual: f64,
    /// Last observed update ratio (NaN when fewer than two updates).
    pub contraction_ratio: f64,
}

/// Solves at each scale of the configured boundary data; failures are recorded, not fatal.
pub fn sweep(cfg: &RunConfig, scales: &[f64]) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let solver = PicardSolver::new(&grid, cfg.cutoff()?);
    let opts = cfg.options();
    let mut rows = Vec::with_capacity(scales.len());
    for &scale in scales {
        let scaled = RunConfig { boundary: cfg.boundary.scaled(scale), ..cfg.clone() };
        let row = match scaled.boundary_data(&grid).and_then(|(phi, _)| solver.solve(&phi, &opts)) {
            Ok((_, report)) => SweepRow {
                scale,
                status: if report.gates_passed() { "ok" } else { "gate_failed" }.into(),
                iterations: report.iterations,
                final_residual: report
                    .final_residuals
                    .as_ref()
                    .map(|r| r.entries().iter().fold(0.0f64, |m, e| m.max(e.1)))
                    .unwrap_or(f64::NAN),
                contraction_ratio: report.contraction_ratios.last().copied().unwrap_or(f64::NAN),
            },
            Err(Error::NoConvergence(f)) | Err(Error::GuardViolation(f)) => SweepRow {
                scale,
                status: if f.report.converged { "gate_failed" } else { "failed" }.into(),
                iterations: f.report.iterations,
                final_residual: f64::NAN,
                contraction_ratio: f.report.contraction_ratios.last().copied().unwrap_or(f64::NAN),
            },
            Err(e) => SweepRow {
                scale,
                status: format!("error: {e}").replace(',', ";"),
                iterations: 0,
                final_residual: f64::NAN,
                contraction_ratio: f64::NAN,
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

pub fn sweep_csv(cfg: &RunConfig, rows: &[SweepRow]) -> String {
    let mut s = config_comment(cfg);
    s.push_str("scale,status,iterations,final_residual,contraction_ratio\n");
    for r in rows {
        let _ = writeln!(s, "{:e},{},{},{:e},{:e}", r.scale, r.status, r.iterations, r.final_residual, r.contraction_ratio);
    }
    s
}

pub fn cmd_sweep(cfg: &RunConfig, scales: &[f64]) -> CommandOutcome {
    let run = || -> Result<String> {
        let rows = sweep(cfg, scales)?;
        let csv = sweep_csv(cfg, &rows);
        write_atomic(&cfg.out, "sweep.csv", csv.as_bytes())?;
        Ok(csv)
    };
    match run() {
        Ok(csv) => CommandOutcome { code: EXIT_OK, message: csv },
        Err(e) => CommandOutcome { code: exit_code_for(&e), message: format!("error: {e}") },
    }
}

/// Rewrites `mesh.obj` in `dir` from stored fields at the given resolution.
pub fn cmd_export_mesh(dir: &Path, mesh: (usize, usize)) -> CommandOutcome {
    let run = || -> Result<String> {
        let art = load_artifacts(dir)?;
        let cutoff = art.config.cutoff()?;
        let obj = mesh_obj(&art.config, &art.u, &cutoff, mesh)?;
        write_atomic(dir, "mesh.obj", &obj)?;
        Ok(format!("wrote {} ({}x{})", dir.join("mesh.obj").display(), mesh.0, mesh.1))
    };
    match run() {
        Ok(message) => CommandOutcome { code: EXIT_OK, message },
        Err(e) => CommandOutcome { code: exit_code_for(&e), message: format!("error: {e}") },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("delta = 0.2\nnx = 24 # comment\nmodes2 = 1:0.001:0;2:0:0.0005\n").unwrap();
        assert_eq!(cfg.delta, 0.2);
        assert_eq!(cfg.nx, 24);
        let back = RunConfig::parse_text(&cfg.to_text()).unwrap();
        assert_eq!(back.delta, cfg.delta);
        assert_eq!(back.boundary, cfg.boundary);
        assert_eq!(back.r_guard(), cfg.r_guard());
    }

    #[test]
    fn config_errors() {
        assert!(RunConfig::parse_text("bogus = 1").is_err());
        assert!(RunConfig::parse_text("nx 12").is_err());
        assert!(parse_family("spin:1").is_err());
        assert!(parse_family("translate:1").is_err());
        assert_eq!(parse_family("rotate:0.01").unwrap(), ExactFamily::Rotate(0.01));
        assert!(parse_modes("modes1", "1:2").is_err());
        let cfg = RunConfig { ny: 15, ..RunConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig { delta: 0.5, ..RunConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn scaling_families() {
        let spec = BoundarySpec::Family(ExactFamily::Translate([0.01, 0.0]));
        assert_eq!(spec.scaled(0.005), BoundarySpec::Family(ExactFamily::Translate([0.005, 0.0])));
        let spec = BoundarySpec::Modes([vec![(1, 1.0, 2.0)], vec![], vec![]]);
        assert_eq!(spec.scaled(0.5), BoundarySpec::Modes([vec![(1, 0.5, 1.0)], vec![], vec![]]));
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.txt", b"hello").unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("a.txt")).unwrap(), "hello");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
