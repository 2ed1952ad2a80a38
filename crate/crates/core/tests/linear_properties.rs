use proptest::prelude::*;

use triple_junction::field::{BoundaryTriple, Grid, Periodic, ScalarField, TripleField};
use triple_junction::linear::{decompose, recompose, LinearSolver};

fn grid() -> Grid {
    Grid::new(16, 8).unwrap()
}

fn field_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 16 * 8)
}

fn periodic_strategy() -> impl Strategy<Value = Periodic> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3).prop_map(|c| {
        let modes: Vec<(usize, f64, f64)> = c.iter().enumerate().map(|(k, &(a, b))| (k, a, b)).collect();
        Periodic::from_modes(8, &modes).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decompose_recompose_round_trip(a in field_strategy(), b in field_strategy(), c in field_strategy()) {
        let g = grid();
        let u = TripleField::new(
            ScalarField::new(&g, a).unwrap(),
            ScalarField::new(&g, b).unwrap(),
            ScalarField::new(&g, c).unwrap(),
        ).unwrap();
        let [v1, v2, v3] = decompose(&u);
        let back = recompose(&v1, &v2, &v3).unwrap();
        for k in 0..16 * 8 {
            let scale = (0..3).map(|i| u.comp(i).values()[k].abs()).fold(0.0, f64::max);
            for i in 0..3 {
                let err = (back.comp(i).values()[k] - u.comp(i).values()[k]).abs();
                prop_assert!(err <= 4.0 * f64::EPSILON * scale);
            }
        }
    }

    #[test]
    fn mixed_solve_is_linear(g1 in periodic_strategy(), g2 in periodic_strategy(),
                              p1 in periodic_strategy(), p2 in periodic_strategy(), t in -2.0f64..2.0) {
        let grid = grid();
        let solver = LinearSolver::new(&grid);
        let f = ScalarField::from_fn(&grid, |x, y| x * (y * 6.0).cos());
        let a = solver.solve_mixed(&f, &g1, &p1).unwrap();
        let b = solver.solve_mixed(&f, &g2, &p2).unwrap();
        let mix = |u: &Periodic, v: &Periodic| u.zip_with(v, |x, y| x + t * y);
        let f2 = f.zip_with(&f, |x, y| x + t * y);
        let c = solver.solve_mixed(&f2, &mix(&g1, &g2), &mix(&p1, &p2)).unwrap();
        let expected = a.zip_with(&b, |x, y| x + t * y);
        prop_assert!((&c - &expected).sup_norm() < 1e-10);
    }

    #[test]
    fn system_solution_has_zero_trace_sum(p in periodic_strategy(), q in periodic_strategy(), r in periodic_strategy()) {
        let grid = grid();
        let phi = BoundaryTriple::new(p, q, r).unwrap();
        let zero_g = (Periodic::zeros(8), Periodic::zeros(8));
        let u = LinearSolver::new(&grid).solve_system(&TripleField::zeros(&grid), &zero_g, &phi).unwrap();
        let t = u.traces(triple_junction::field::End::Inner);
        for m in 0..8 {
            prop_assert!((t[0].values()[m] + t[1].values()[m] + t[2].values()[m]).abs() < 1e-13);
        }
    }
}
