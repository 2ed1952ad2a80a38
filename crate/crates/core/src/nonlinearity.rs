//! Exact geometric defects of the perturbed surface.
//!
//! For each sheet the mean curvature `tr(g^{-1} h)` is evaluated in closed form
//! from the tangent frame `e1 = d/dx`, `e2 = d/dy` of the parametrization, and the
//! nonlinear forcing is `F_i = Lap u_i - tr(g^{-1} h)`. On the spine the unit
//! conormals `xi_i` are formed exactly and their sum `S` is projected onto a
//! basis of the plane orthogonal to the spine tangent, giving the boundary
//! forcings `G1`, `G2`.

use crate::error::{Error, Result};
use crate::field::{End, Grid, Periodic, ScalarField, TripleField};
use crate::geometry::{
    dot3, max_trace_sum, spine_from_traces, wall_coefficient, CutoffProfile, JunctionFrame, TripleIndex, Vec2, Vec3,
    COMPATIBILITY_TOL, SQRT3,
};
use crate::sampling::{random_compatible_triple, SampleRng};

/// Smallest admissible `det g` of the induced metric.
pub const MIN_METRIC_DET: f64 = 1e-6;

/// Induced metric, unit normal and second fundamental form at one point of one sheet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricShapeData {
    pub e1: Vec3,
    pub e2: Vec3,
    pub g: [[f64; 2]; 2],
    pub g_inv: [[f64; 2]; 2],
    pub normal: Vec3,
    pub beta: f64,
    pub gamma: f64,
    pub h11: f64,
    pub h12: f64,
    pub h22: f64,
}

/// Pointwise inputs of [`MetricShapeData`]: height derivatives, cutoff values and
/// the wall coefficient `s = <w_i, n_i>` with its y-derivatives.
#[derive(Clone, Copy, Debug, Default)]
pub struct LocalJet {
    pub u_x: f64,
    pub u_y: f64,
    pub u_xx: f64,
    pub u_xy: f64,
    pub u_yy: f64,
    pub eta: f64,
    pub deta: f64,
    pub ddeta: f64,
    pub s: f64,
    pub ds: f64,
    pub dds: f64,
}

fn lift(v: Vec2, z: f64) -> Vec3 {
    [v[0], v[1], z]
}

fn comb(a: f64, n: Vec2, b: f64, nu: Vec2) -> Vec2 {
    [a * n[0] + b * nu[0], a * n[1] + b * nu[1]]
}

impl MetricShapeData {
    pub fn compute(jet: &LocalJet, n: Vec2, nu: Vec2) -> Self {
        let radial = jet.deta * jet.s - 1.0;
        let twist = jet.eta * jet.ds;
        let e1 = lift(comb(radial, n, jet.u_x, nu), 0.0);
        let e2 = lift(comb(twist, n, jet.u_y, nu), 1.0);
        let g11 = dot3(e1, e1);
        let g12 = dot3(e1, e2);
        let g22 = dot3(e2, e2);
        let det = g11 * g22 - g12 * g12;
        let g_inv = [[g22 / det, -g12 / det], [-g12 / det, g11 / det]];

        let beta = jet.u_x / (1.0 - jet.deta * jet.s);
        let gamma = -jet.u_y - beta * twist;
        let scale = (1.0 + beta * beta + gamma * gamma).sqrt().recip();
        let normal = lift(comb(beta * scale, n, scale, nu), gamma * scale);

        // <(a n + b nu, 0), normal> = (a beta + b) * scale
        let h11 = (jet.ddeta * jet.s * beta + jet.u_xx) * scale;
        let h12 = (jet.deta * jet.ds * beta + jet.u_xy) * scale;
        let h22 = (jet.eta * jet.dds * beta + jet.u_yy) * scale;
        Self {
            e1,
            e2,
            g: [[g11, g12], [g12, g22]],
            g_inv,
            normal,
            beta,
            gamma,
            h11,
            h12,
            h22,
        }
    }

    pub fn det_g(&self) -> f64 {
        self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[1][0]
    }

    /// `tr(g^{-1} h)`.
    pub fn mean_curvature(&self) -> f64 {
        self.g_inv[0][0] * self.h11 + 2.0 * self.g_inv[0][1] * self.h12 + self.g_inv[1][1] * self.h22
    }
}

struct SheetDerivatives {
    u_x: ScalarField,
    u_y: ScalarField,
    u_xx: ScalarField,
    u_xy: ScalarField,
    u_yy: ScalarField,
    s: Periodic,
    ds: Periodic,
    dds: Periodic,
}

impl SheetDerivatives {
    fn new(u: &TripleField, i: TripleIndex) -> Self {
        let c = u.comp(i.idx());
        let fourier = u.grid().fourier();
        let s = wall_coefficient(&u.traces(End::Inner), i);
        Self {
            u_x: c.diff(1, 0).expect("order 1"),
            u_y: c.diff(0, 1).expect("order 1"),
            u_xx: c.diff(2, 0).expect("order 2"),
            u_xy: c.diff(1, 1).expect("order 2"),
            u_yy: c.diff(0, 2).expect("order 2"),
            ds: s.derivative(fourier, 1),
            dds: s.derivative(fourier, 2),
            s,
        }
    }

    fn jet(&self, j: usize, m: usize, cutoff: (f64, f64, f64)) -> LocalJet {
        LocalJet {
            u_x: self.u_x.at(j, m),
            u_y: self.u_y.at(j, m),
            u_xx: self.u_xx.at(j, m),
            u_xy: self.u_xy.at(j, m),
            u_yy: self.u_yy.at(j, m),
            eta: cutoff.0,
            deta: cutoff.1,
            ddeta: cutoff.2,
            s: self.s.values()[m],
            ds: self.ds.values()[m],
            dds: self.dds.values()[m],
        }
    }
}

/// Metric/shape data for every grid node of sheet `i`, row-major.
pub fn metric_shape_data(
    i: TripleIndex,
    u: &TripleField,
    cutoff: &CutoffProfile,
    frame: &JunctionFrame,
) -> Result<Vec<MetricShapeData>> {
    let grid = u.grid();
    let sheet = SheetDerivatives::new(u, i);
    let (n, nu) = (frame.n(i), frame.nu(i));
    let mut out = Vec::with_capacity(grid.nx() * grid.ny());
    for (j, &x) in grid.x().iter().enumerate() {
        let cut = cutoff.eval_unchecked(x);
        for (m, &y) in grid.y().iter().enumerate() {
            let jet = sheet.jet(j, m, cut);
            let data = MetricShapeData::compute(&jet, n, nu);
            let det = data.det_g();
            if !(det >= MIN_METRIC_DET) || !(1.0 - jet.deta * jet.s > 0.0) || !data.mean_curvature().is_finite() {
                return Err(Error::DegenerateMetric {
                    sheet: i.get(),
                    det,
                    x,
                    y,
                });
            }
            out.push(data);
        }
    }
    Ok(out)
}

/// Pointwise `tr(g^{-1} h)` of sheet `i` on the grid.
pub fn mean_curvature_scalar(
    i: TripleIndex,
    u: &TripleField,
    cutoff: &CutoffProfile,
    frame: &JunctionFrame,
) -> Result<ScalarField> {
    let data = metric_shape_data(i, u, cutoff, frame)?;
    Ok(ScalarField::from_raw(
        u.grid(),
        data.iter().map(MetricShapeData::mean_curvature).collect(),
    ))
}

/// `F_i = Lap u_i - tr(g^{-1} h)` for each sheet.
pub fn f_eval(u: &TripleField, cutoff: &CutoffProfile, frame: &JunctionFrame) -> Result<TripleField> {
    let mut comps = Vec::with_capacity(3);
    for i in TripleIndex::ALL {
        let h = mean_curvature_scalar(i, u, cutoff, frame)?;
        let c = u.comp(i.idx());
        let lap = &c.diff(2, 0)? + &c.diff(0, 2)?;
        comps.push(&lap - &h);
    }
    let [a, b, c]: [ScalarField; 3] = comps.try_into().expect("three sheets");
    TripleField::new(a, b, c)
}

/// Unit conormal `xi_i(y_m)` of the spine inside sheet `i`, on the y-grid.
pub fn conormal_xi(i: TripleIndex, u: &TripleField, frame: &JunctionFrame) -> Result<Vec<Vec3>> {
    let grid = u.grid();
    let spine = spine_from_traces(&u.traces(End::Inner), frame, grid.fourier())?;
    let slope = u.comp(i.idx()).normal_derivative_inner().scale(-1.0);
    let (n, nu) = (frame.n(i), frame.nu(i));
    Ok((0..grid.ny())
        .map(|m| {
            let vp = spine.derivative_at(m);
            let tangent = [vp[0], vp[1], 1.0];
            let tau = lift(comb(-1.0, n, slope.values()[m], nu), 0.0);
            let c = dot3(tau, tangent) / dot3(tangent, tangent);
            let xi = [tau[0] - c * tangent[0], tau[1] - c * tangent[1], tau[2] - c * tangent[2]];
            let len = dot3(xi, xi).sqrt();
            [xi[0] / len, xi[1] / len, xi[2] / len]
        })
        .collect())
}

/// `S(y) = xi_1 + xi_2 + xi_3`; vanishes exactly when the sheets meet at 120 degrees.
pub fn conormal_defect(u: &TripleField, frame: &JunctionFrame) -> Result<Vec<Vec3>> {
    let xis = TripleIndex::ALL.map(|i| conormal_xi(i, u, frame));
    let [a, b, c] = xis;
    let (a, b, c) = (a?, b?, c?);
    Ok((0..a.len())
        .map(|m| [0, 1, 2].map(|d| a[m][d] + b[m][d] + c[m][d]))
        .collect())
}

/// Boundary forcings `(G1, G2)`.
///
/// With `b1 = (n1, (d_y u2 - d_y u3)(0,y)/sqrt 3)`, `b2 = (nu1, -d_y u1(0,y))`
/// spanning the plane orthogonal to the spine tangent and `P_k = <S, b_k>`:
/// `G1 = (d_n u2 - d_n u3) - (2/sqrt 3) P1`, `G2 = (d_n u1 - (d_n u2 + d_n u3)/2) + P2`.
/// The linear parts cancel, so `G` is quadratic in `Du(0, .)`.
pub fn g_eval(u: &TripleField, frame: &JunctionFrame) -> Result<(Periodic, Periodic)> {
    let grid = u.grid();
    let fourier = grid.fourier();
    let traces = u.traces(End::Inner);
    let dy: Vec<Periodic> = traces.iter().map(|t| t.derivative(fourier, 1)).collect();
    let dn: Vec<Periodic> = (0..3).map(|i| u.comp(i).normal_derivative_inner()).collect();
    let defect = conormal_defect(u, frame)?;
    let (n1, nu1) = (frame.n[0], frame.nu[0]);
    let ny = grid.ny();
    let mut g1 = Vec::with_capacity(ny);
    let mut g2 = Vec::with_capacity(ny);
    for m in 0..ny {
        let b1 = lift(n1, (dy[1].values()[m] - dy[2].values()[m]) / SQRT3);
        let b2 = lift(nu1, -dy[0].values()[m]);
        let p1 = dot3(defect[m], b1);
        let p2 = dot3(defect[m], b2);
        let (d1, d2, d3) = (dn[0].values()[m], dn[1].values()[m], dn[2].values()[m]);
        g1.push((d2 - d3) - 2.0 / SQRT3 * p1);
        g2.push((d1 - 0.5 * (d2 + d3)) + p2);
    }
    Ok((Periodic::new(g1), Periodic::new(g2)))
}

/// Both nonlinear right-hand sides at once.
#[derive(Clone, Debug)]
pub struct NonlinearTerms {
    pub f: TripleField,
    pub g: (Periodic, Periodic),
}

pub fn evaluate(u: &TripleField, cutoff: &CutoffProfile, frame: &JunctionFrame) -> Result<NonlinearTerms> {
    let traces = u.traces(End::Inner);
    let max_sum = max_trace_sum(&traces);
    if max_sum > COMPATIBILITY_TOL {
        return Err(Error::CompatibilityViolation {
            max_sum,
            tol: COMPATIBILITY_TOL,
        });
    }
    Ok(NonlinearTerms {
        f: f_eval(u, cutoff, frame)?,
        g: g_eval(u, frame)?,
    })
}

/// Empirical constants in `|F(u)|_inf <= C_F proxy(u)^2`, `|G(u)|_inf <= C_G proxy(u)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuralCertificate {
    pub c_f: f64,
    pub c_g: f64,
    pub samples: usize,
    pub radius: f64,
    pub alpha: f64,
}

impl StructuralCertificate {
    pub fn report(&self) -> String {
        format!(
            "structural certificate (empirical)\n  samples     = {}\n  radius      = {:e}\n  alpha       = {}\n  C_F estimate = {:e}\n  C_G estimate = {:e}\n",
            self.samples, self.radius, self.alpha, self.c_f, self.c_g
        )
    }
}

/// Estimates the quadratic-smallness constants over random compatible fields
/// with norm proxy in `(0, sample_radius]`.
pub fn structural_certificate(
    grid: &Grid,
    cutoff: &CutoffProfile,
    frame: &JunctionFrame,
    sample_radius: f64,
    n_samples: usize,
    alpha: f64,
    seed: u64,
) -> Result<StructuralCertificate> {
    if !(sample_radius > 0.0 && sample_radius <= cutoff.delta() / 10.0) {
        return Err(Error::OutOfRange {
            what: "sample_radius",
            value: sample_radius,
            range: "(0, delta/10]",
        });
    }
    let mut rng = SampleRng::new(seed);
    let mut c_f: f64 = 0.0;
    let mut c_g: f64 = 0.0;
    let mut used = 0;
    while used < n_samples {
        let radius = sample_radius * rng.uniform(0.25, 1.0);
        let u = random_compatible_triple(grid, &mut rng, radius, alpha);
        let proxy = u.norm_proxy(alpha);
        if proxy == 0.0 {
            continue;
        }
        let terms = evaluate(&u, cutoff, frame)?;
        let g_sup = terms.g.0.sup_norm().max(terms.g.1.sup_norm());
        c_f = c_f.max(terms.f.sup_norm() / (proxy * proxy));
        c_g = c_g.max(g_sup / (proxy * proxy));
        used += 1;
    }
    Ok(StructuralCertificate {
        c_f,
        c_g,
        samples: used,
        radius: sample_radius,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dot2, frame_vectors};

    fn setup(nx: usize, ny: usize) -> (Grid, CutoffProfile, JunctionFrame) {
        (Grid::new(nx, ny).unwrap(), CutoffProfile::new(0.25).unwrap(), frame_vectors())
    }

    fn sup_g(g: &(Periodic, Periodic)) -> f64 {
        g.0.sup_norm().max(g.1.sup_norm())
    }

    #[test]
    fn flat_and_exact_families_have_zero_defects() {
        let (grid, cut, frame) = setup(24, 16);
        let zero = TripleField::zeros(&grid);
        let rot = TripleField::from_fns(&grid, |_, x, _| 0.01 * x);
        let tr = TripleField::from_fns(&grid, |i, _, _| dot2([0.01, 0.0], frame.nu[i]));
        for u in [&zero, &rot, &tr] {
            for i in TripleIndex::ALL {
                assert!(mean_curvature_scalar(i, u, &cut, &frame).unwrap().sup_norm() < 1e-12);
            }
            let terms = evaluate(u, &cut, &frame).unwrap();
            assert!(terms.f.sup_norm() < 1e-12);
            assert!(sup_g(&terms.g) < 1e-12);
            let s = conormal_defect(u, &frame).unwrap();
            assert!(s.iter().all(|v| dot3(*v, *v).sqrt() < 1e-14));
        }
        assert_eq!(f_eval(&zero, &cut, &frame).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn conormal_examples() {
        let (grid, _, frame) = setup(16, 8);
        for i in TripleIndex::ALL {
            let xi = conormal_xi(i, &TripleField::zeros(&grid), &frame).unwrap();
            let n = frame.n(i);
            assert!(xi.iter().all(|v| (0..3).all(|d| (v[d] - [-n[0], -n[1], 0.0][d]).abs() <= 4.0 * f64::EPSILON)));
        }
        let beta = 0.01;
        let rot = TripleField::from_fns(&grid, |_, x, _| beta * x);
        for i in TripleIndex::ALL {
            let (n, nu) = (frame.n(i), frame.nu(i));
            let r = (1.0 + beta * beta).sqrt();
            let expected = [(-n[0] + beta * nu[0]) / r, (-n[1] + beta * nu[1]) / r, 0.0];
            for v in conormal_xi(i, &rot, &frame).unwrap() {
                for d in 0..3 {
                    assert!((v[d] - expected[d]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn normal_is_unit_and_orthogonal_for_random_fields() {
        let (grid, cut, frame) = setup(20, 16);
        let mut rng = SampleRng::new(7);
        for _ in 0..3 {
            let u = random_compatible_triple(&grid, &mut rng, 0.02, 0.5);
            for i in TripleIndex::ALL {
                for d in metric_shape_data(i, &u, &cut, &frame).unwrap() {
                    assert!((dot3(d.normal, d.normal) - 1.0).abs() < 1e-13);
                    assert!(dot3(d.normal, d.e1).abs() < 1e-13);
                    assert!(dot3(d.normal, d.e2).abs() < 1e-13);
                }
            }
            // xi_i is a unit vector orthogonal to the spine tangent
            let spine = spine_from_traces(&u.traces(End::Inner), &frame, grid.fourier()).unwrap();
            for i in TripleIndex::ALL {
                for (m, v) in conormal_xi(i, &u, &frame).unwrap().into_iter().enumerate() {
                    let t = spine.derivative_at(m);
                    assert!((dot3(v, v) - 1.0).abs() < 1e-14);
                    assert!(dot3(v, [t[0], t[1], 1.0]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn quadratic_smallness_of_defects() {
        let (grid, cut, frame) = setup(24, 16);
        let mut rng = SampleRng::new(11);
        let u = random_compatible_triple(&grid, &mut rng, 0.0125, 0.5);
        let norms: Vec<(f64, f64)> = [1.0, 0.5, 0.25]
            .iter()
            .map(|&t| {
                let terms = evaluate(&u.scale(t), &cut, &frame).unwrap();
                (terms.f.sup_norm() / (t * t), sup_g(&terms.g) / (t * t))
            })
            .collect();
        for w in norms.windows(2) {
            assert!((w[0].0 / w[1].0 - 1.0).abs() < 0.2);
            assert!((w[0].1 / w[1].1 - 1.0).abs() < 0.2);
        }
        // |S| itself is first order
        let s1 = conormal_defect(&u, &frame).unwrap();
        assert!(s1.iter().map(|v| dot3(*v, *v).sqrt()).fold(0.0, f64::max) > 0.0);
    }

    #[test]
    fn degenerate_metric_reported() {
        let (grid, cut, frame) = setup(16, 8);
        // huge radial slope folds sheet 1 inside the cutoff band
        let u = TripleField::new(
            ScalarField::zeros(&grid),
            ScalarField::from_fn(&grid, |x, _| 0.5 * (1.0 - x)),
            ScalarField::from_fn(&grid, |x, _| -0.5 * (1.0 - x)),
        )
        .unwrap();
        assert!(matches!(
            mean_curvature_scalar(TripleIndex::ALL[0], &u, &cut, &frame),
            Err(Error::DegenerateMetric { sheet: 1, .. })
        ));
    }

    #[test]
    fn certificate_is_finite_and_stable() {
        let (grid, cut, frame) = setup(24, 16);
        assert!(structural_certificate(&grid, &cut, &frame, 0.03, 4, 0.5, 1).is_err());
        let a = structural_certificate(&grid, &cut, &frame, 0.0125, 12, 0.5, 5).unwrap();
        let b = structural_certificate(&grid, &cut, &frame, 0.0125, 24, 0.5, 5).unwrap();
        assert!(a.c_f.is_finite() && a.c_g.is_finite() && a.c_f > 0.0 && a.c_g > 0.0);
        assert!((b.c_f / a.c_f - 1.0).abs() <= 0.2, "{} vs {}", a.c_f, b.c_f);
        assert!((b.c_g / a.c_g - 1.0).abs() <= 0.2, "{} vs {}", a.c_g, b.c_g);
        assert!(a.report().contains("C_F estimate"));
    }
}
