//! Ensemble-level behavior checks: pocket formation in the light-cone phase,
//! growth of covered area with the angle gap, transience of trunk traces,
//! and the pocket pipeline end to end.

use num_complex::Complex64;
use slekit::{analysis, lightcone, rng, sle};

/// Light-cone traces pinch off complementary pockets as they go; simple
/// traces enclose almost nothing beyond raster noise. The pocket count at a
/// fixed grid is a robust desk-scale discriminator between the phases.
#[test]
fn lightcone_traces_enclose_pockets_where_simple_traces_do_not() {
    let dt = 1e-4;
    let horizon = 1.0;
    let grid_eps = 0.02;

    let mut lc_counts = Vec::new();
    let mut simple_counts = Vec::new();
    for seed in 0..3u64 {
        let mut rng_lc = rng::stream(101 + seed, 0);
        let lc = lightcone::lightcone_via_sle(3.0, -2.3, horizon, dt, &mut rng_lc).unwrap();
        lc_counts.push(lightcone::detect_pockets_trace(&lc.points, grid_eps).unwrap().len() as f64);

        let mut rng_simple = rng::stream(101 + seed, 1);
        let simple = sle::sample_sle_trace(3.0, 0.0, horizon, dt, &mut rng_simple).unwrap();
        simple_counts
            .push(lightcone::detect_pockets_trace(&simple.points, grid_eps).unwrap().len() as f64);
    }
    let lc_median = analysis::median(&lc_counts).unwrap();
    let simple_median = analysis::median(&simple_counts).unwrap();

    println!("median pocket count: light cone {lc_median}, simple {simple_median}");
    assert!(
        lc_median >= 30.0,
        "light-cone traces should enclose pockets pervasively, got {lc_counts:?}"
    );
    assert!(
        simple_median <= 20.0,
        "simple traces should enclose almost nothing, got {simple_counts:?}"
    );
    assert!(
        lc_median >= 2.0 * simple_median,
        "phases should separate clearly: {lc_counts:?} vs {simple_counts:?}"
    );
}

#[test]
fn lightcone_area_grows_with_the_angle_gap() {
    let kappa = 2.5;
    let area_eps = 0.05;
    let gaps = [0.4, 0.9, 1.4];
    let mut medians = Vec::new();
    for &theta2 in &gaps {
        let mut areas = Vec::new();
        for seed in 0..10u64 {
            let approx = lightcone::build_ln(
                kappa,
                0.0,
                theta2,
                1,
                &[(1, 2)],
                0.05,
                5e-4,
                lightcone::Seed::BoundaryPoint { x: 0.0 },
                seed,
            )
            .unwrap();
            let count = analysis::box_count(&approx.all_points(), area_eps).unwrap();
            areas.push(count as f64 * area_eps * area_eps);
        }
        medians.push(analysis::median(&areas).unwrap());
    }
    println!("median covered area by angle gap: {medians:?}");
    for pair in medians.windows(2) {
        assert!(
            pair[1] > 0.9 * pair[0],
            "wider angle gaps should cover no less area: {medians:?}"
        );
    }
    assert!(
        medians[2] > medians[0],
        "the widest gap should cover strictly more area: {medians:?}"
    );
}

/// Transience is a tail property: the tip keeps making short returns toward
/// the origin while sweeping pockets, so the meaningful question at a
/// checkpoint t is whether the disk sees any visits AFTER t on a common
/// simulated horizon. Evaluating suffixes makes the fraction nondecreasing
/// in the checkpoint by construction; the content of the test is the level
/// reached by the last checkpoint.
#[test]
fn trunk_traces_are_transient() {
    let dt = 1e-3;
    let horizon = 16.0;
    let radius = 1.0;
    let n_paths = 30;
    let mut ensemble = Vec::with_capacity(n_paths);
    for seed in 0..n_paths as u64 {
        let mut r = rng::stream(7000 + seed, 0);
        let trace = sle::sample_sle_trace(3.0, -2.5, horizon, dt, &mut r).unwrap();
        ensemble.push(trace.points);
    }
    let mut fractions = Vec::new();
    for &t in &[1.0f64, 4.0, 16.0] {
        let start = (t / dt).round() as usize;
        let suffixes: Vec<Vec<Complex64>> = ensemble
            .iter()
            .map(|p| p[start.min(p.len() - 1)..].to_vec())
            .collect();
        fractions.push(analysis::transience_stat(&suffixes, radius).unwrap());
    }
    println!("no-return fraction from t = 1, 4, 16: {fractions:?}");
    assert!(
        fractions.windows(2).all(|w| w[1] >= w[0] - 1e-12),
        "escape fraction should not decrease with the checkpoint: {fractions:?}"
    );
    assert!(
        fractions[1] >= 0.8,
        "most disk visiting should be over by t = 4: {fractions:?}"
    );
    assert!(
        fractions[2] >= 0.9,
        "trunk traces should be clear of the unit disk by t = 16: {fractions:?}"
    );
}

#[test]
fn pocket_pipeline_runs_end_to_end() {
    let approx = lightcone::build_ln(
        2.5,
        -0.3,
        0.8,
        2,
        &[(1, 2)],
        0.08,
        5e-4,
        lightcone::Seed::BoundaryPoint { x: 0.0 },
        31,
    )
    .unwrap();
    let grid_eps = 0.02;
    let pockets = lightcone::detect_pockets(&approx, grid_eps).unwrap();
    println!(
        "segments {}, pockets {} with diameters {:?}",
        approx.segments.len(),
        pockets.len(),
        pockets.iter().map(|p| p.diameter).collect::<Vec<_>>()
    );
    assert!(
        !pockets.is_empty(),
        "a two-switch light cone at this budget should enclose at least one pocket"
    );

    let (ordered, report) = lightcone::order_pockets(pockets.clone(), None, 1.0).unwrap();
    assert!(!report.used_merge_criterion);
    let visits: Vec<usize> = ordered.iter().map(|p| p.opening_visit).collect();
    assert!(visits.windows(2).all(|w| w[0] <= w[1]), "visit order broken: {visits:?}");

    let path = lightcone::exploration_path(&ordered, grid_eps).unwrap();
    assert!(path.points.len() >= ordered.iter().map(|p| p.side1.len()).sum::<usize>());

    // The pipeline is deterministic: same seed, same pockets.
    let again = lightcone::detect_pockets(&approx, grid_eps).unwrap();
    assert_eq!(again.len(), ordered.len());
}
