//! Randomized invariant checks on the analysis and parameter-formula APIs.

use num_complex::Complex64;
use proptest::prelude::*;

/// Points snapped to a 1e-3 lattice so cell-index arithmetic in the box
/// counter is exact for the power-of-two scales used below.
fn lattice_points() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-5000i32..5000, -5000i32..5000), 1..200).prop_map(|raw| {
        raw.into_iter()
            .map(|(x, y)| Complex64::new(x as f64 * 1e-3, y as f64 * 1e-3))
            .collect()
    })
}

proptest! {
    /// Halving the box scale refines the cover: every occupied coarse cell
    /// splits into at most four fine cells, and every occupied fine cell
    /// lies inside an occupied coarse cell.
    #[test]
    fn box_counts_nest_under_grid_refinement(
        points in lattice_points(),
        scale_pow in 1u32..6,
    ) {
        let eps = 0.5f64.powi(scale_pow as i32);
        let fine = slekit::analysis::box_count(&points, eps).unwrap();
        let coarse = slekit::analysis::box_count(&points, 2.0 * eps).unwrap();
        prop_assert!(coarse <= fine, "coarse {coarse} > fine {fine}");
        prop_assert!(fine <= 4 * coarse, "fine {fine} > 4 * coarse {coarse}");
    }

    /// Densifying a polyline bounds every consecutive gap by max_gap and
    /// keeps the original vertices, in order and bitwise unchanged.
    #[test]
    fn densified_polylines_bound_gaps_and_keep_vertices(
        raw in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..50),
        max_gap in 0.05f64..2.0,
    ) {
        let points: Vec<Complex64> =
            raw.into_iter().map(|(x, y)| Complex64::new(x, y)).collect();
        let dense = slekit::analysis::densify_polyline(&points, max_gap).unwrap();
        for pair in dense.windows(2) {
            let gap = (pair[1] - pair[0]).norm();
            prop_assert!(
                gap <= max_gap * (1.0 + 1e-9),
                "gap {gap} exceeds max_gap {max_gap}"
            );
        }
        let mut next_original = 0;
        for p in &dense {
            if next_original < points.len() && *p == points[next_original] {
                next_original += 1;
            }
        }
        prop_assert_eq!(
            next_original,
            points.len(),
            "original vertices missing or reordered"
        );
    }

    /// The angle and force-point weight formulas invert each other for
    /// every kappa away from 4.
    #[test]
    fn angle_and_weight_formulas_are_inverse(
        kappa in 0.05f64..3.95,
        rho in -6.0f64..6.0,
    ) {
        let theta = slekit::sle::theta_of_rho(kappa, rho).unwrap();
        let back = slekit::sle::rho_of_theta(kappa, theta).unwrap();
        prop_assert!(
            (back - rho).abs() <= 1e-9 * (1.0 + rho.abs()),
            "roundtrip {rho} -> {theta} -> {back}"
        );
    }

    /// The two-sample KS statistic vanishes on identical samples and is
    /// symmetric in its arguments.
    #[test]
    fn ks_statistic_is_symmetric_and_zero_on_self(
        a in prop::collection::vec(-100.0f64..100.0, 2..60),
        b in prop::collection::vec(-100.0f64..100.0, 2..60),
    ) {
        let self_stat = slekit::analysis::ks_two_sample(&a, &a);
        prop_assert!(self_stat.abs() < 1e-12, "ks(a, a) = {self_stat}");
        let ab = slekit::analysis::ks_two_sample(&a, &b);
        let ba = slekit::analysis::ks_two_sample(&b, &a);
        prop_assert!((ab - ba).abs() < 1e-12, "asymmetric: {ab} vs {ba}");
        prop_assert!((0.0..=1.0).contains(&ab), "out of range: {ab}");
    }

    /// Phase classification is exhaustive and consistent with the
    /// simple/reversible summary flags across the parameter plane.
    #[test]
    fn phase_flags_match_the_decision_boundaries(
        kappa in 0.05f64..3.99,
        rho in -6.0f64..4.0,
    ) {
        let phase = slekit::sle::classify_phase(kappa, rho).unwrap();
        let expect_defined = rho > -2.0 - kappa / 2.0;
        prop_assert_eq!(
            phase != slekit::sle::Phase::NotDefined,
            expect_defined,
            "definability mismatch at ({}, {})", kappa, rho
        );
        prop_assert_eq!(
            phase.is_simple(),
            rho >= -2.0,
            "simplicity boundary mismatch at ({}, {})", kappa, rho
        );
    }
}
