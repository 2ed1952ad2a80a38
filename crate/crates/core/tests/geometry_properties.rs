use proptest::prelude::*;

use triple_junction::field::Grid;
use triple_junction::geometry::{check_c0_compatibility, CutoffProfile, JunctionFrame, TripleIndex};
use triple_junction::nonlinearity::evaluate;
use triple_junction::oracles::fd_mean_curvature;
use triple_junction::nonlinearity::mean_curvature_scalar;
use triple_junction::sampling::{random_compatible_triple, SampleRng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cutoff_stays_in_unit_interval(delta in 0.05f64..0.45, x in 0.0f64..=1.0) {
        let (eta, _, _) = CutoffProfile::new(delta).unwrap().eval(x).unwrap();
        prop_assert!((0.0..=1.0).contains(&eta));
    }

    #[test]
    fn small_fields_are_compatible_and_nearly_stationary_to_second_order(seed in 0u64..1000) {
        let grid = Grid::new(24, 16).unwrap();
        let cutoff = CutoffProfile::new(0.25).unwrap();
        let u = random_compatible_triple(&grid, &mut SampleRng::new(seed), 0.01, 0.5);
        let d = check_c0_compatibility(&u, &cutoff, 0.5);
        prop_assert!(d.passes());
        let terms = evaluate(&u, &cutoff, &JunctionFrame::default()).unwrap();
        // quadratic in a field of proxy 0.01
        prop_assert!(terms.f.sup_norm() < 1e-2);
    }

    #[test]
    fn fd_and_spectral_mean_curvature_agree(seed in 0u64..1000) {
        let grid = Grid::new(32, 16).unwrap();
        let cutoff = CutoffProfile::new(0.25).unwrap();
        let frame = JunctionFrame::default();
        let u = random_compatible_triple(&grid, &mut SampleRng::new(seed), 0.02, 0.5);
        for i in TripleIndex::ALL {
            let h = mean_curvature_scalar(i, &u, &cutoff, &frame).unwrap();
            for (j, m) in [(8usize, 3usize), (20, 11)] {
                let fd = fd_mean_curvature(i, &u, (grid.x()[j], grid.y()[m]), 1e-3, &frame, &cutoff).unwrap();
                prop_assert!((fd - h.at(j, m)).abs() < 1e-5);
            }
        }
    }
}
