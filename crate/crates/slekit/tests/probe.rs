//! Temporary calibration probe - deleted before commit.

use num_complex::Complex64;
use slekit::lightcone::{self, Seed};
use slekit::{analysis, bessel, loewner, rng, sle};
use std::time::Instant;

/// Trace extraction with iterative welding refinement: where the tip leaps
/// far in one step, pull boundary points between the two driving values back
/// through the prefix chain, then repeatedly subdivide sub-intervals whose
/// image gaps stay wide, until gaps close or the per-arc budget is spent.
#[allow(dead_code)]
fn refined_trace(driving: &[f64], dt: f64, gap_target: f64) -> Vec<Complex64> {
    let tips = loewner::trace_from_driving(driving, dt).unwrap();
    let leaps: Vec<f64> = tips.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let mut sorted = leaps.clone();
    sorted.sort_by(f64::total_cmp);
    let median_leap = sorted[sorted.len() / 2];
    let threshold = (2.0 * median_leap).max(gap_target);
    let delta = dt.sqrt() * 0.1;

    let mut arcs: Vec<(usize, Vec<(f64, Complex64)>)> = Vec::new();
    for m in 0..leaps.len() {
        if leaps[m] > threshold && m > 0 {
            arcs.push((m, Vec::new()));
        }
    }
    for (m, nodes) in &mut arcs {
        let a = driving[*m];
        let b = driving[*m + 1];
        let prefix = &driving[..=*m];
        nodes.push((0.0, tips[*m]));
        nodes.push((1.0, tips[*m + 1]));
        for _pass in 0..6 {
            let mut new_fracs = Vec::new();
            for w in nodes.windows(2) {
                let gap = (w[1].1 - w[0].1).norm();
                if gap > gap_target {
                    let k = ((gap / gap_target).ceil() as usize).min(32);
                    for i in 1..=k {
                        new_fracs.push(w[0].0 + (w[1].0 - w[0].0) * i as f64 / (k + 1) as f64);
                    }
                }
            }
            if new_fracs.is_empty() || nodes.len() + new_fracs.len() > 2048 {
                break;
            }
            let mut pts: Vec<Complex64> = new_fracs
                .iter()
                .map(|f| Complex64::new(a + (b - a) * f, delta))
                .collect();
            loewner::pull_back_points(prefix, dt, &mut pts).unwrap();
            nodes.extend(new_fracs.into_iter().zip(pts));
            nodes.sort_by(|x, y| x.0.total_cmp(&y.0));
        }
    }

    let mut by_step: Vec<Option<usize>> = vec![None; leaps.len()];
    for (i, arc) in arcs.iter().enumerate() {
        by_step[arc.0] = Some(i);
    }
    let mut out = Vec::with_capacity(tips.len() * 3);
    out.push(tips[0]);
    for m in 0..leaps.len() {
        if let Some(i) = by_step[m] {
            let nodes = &arcs[i].1;
            out.extend(nodes[1..nodes.len() - 1].iter().map(|e| e.1));
        }
        out.push(tips[m + 1]);
    }
    out
}

#[test]
fn probe_c4b() {
    let t0 = Instant::now();
    let (delta, dt, steps) = (0.5, 2e-5, 500_000usize);
    let mut changed = 0usize;
    let n = 1000usize;
    for i in 0..n {
        let mut r = rng::stream(80_000 + i as u64, 0);
        let path = bessel::sample_bes_with_driver(delta, 0.0, dt, steps, &mut r).unwrap();
        let has_pos = path.u.iter().any(|&u| u > 0.0);
        let has_neg = path.u.iter().any(|&u| u < 0.0);
        if has_pos && has_neg {
            changed += 1;
        }
    }
    println!(
        "c4b: fraction {:.4} over {n} paths in {:.0} s",
        changed as f64 / n as f64,
        t0.elapsed().as_secs_f64()
    );
}

#[test]
fn probe_c8() {
    let dt = 2.5e-4f64;
    let horizon = 5.0f64;
    for rho in [-2.5f64, -2.2] {
        let t0 = Instant::now();
        let filling = rho <= 3.0 / 2.0 - 4.0 + 1e-12;
        let mut fracs = Vec::new();
        for seed in 0..10u64 {
            let mut r = rng::stream(30_000 + seed, if rho == -2.5 { 0 } else { 1 });
            let pair = sle::sample_driving_pair(3.0, rho, horizon, dt, &mut r).unwrap();
            let mut pts = loewner::trace_from_driving(&pair.w, dt).unwrap();
            if filling {
                let mut x = -1.02f64;
                while x <= 0.02 {
                    if let loewner::BoundaryFate::Swallowed { .. } =
                        loewner::boundary_transport(&pair.w, dt, x).unwrap()
                    {
                        pts.push(Complex64::new(x, 0.0));
                    }
                    x += 0.01;
                }
            }
            fracs.push(analysis::boundary_hit_fraction(&pts, (-1.0, 0.0), 0.05, 200).unwrap());
        }
        let txt: Vec<String> = fracs.iter().map(|f| format!("{f:.2}")).collect();
        println!(
            "c8 rho {rho} (filling {filling}): med {:.3} [{}] in {:.0} s",
            analysis::median(&fracs).unwrap(),
            txt.join(", "),
            t0.elapsed().as_secs_f64()
        );
    }
}

/// Range reconstruction normalized by absorbed-boundary reach: the swallowed
/// negative-axis points form an interval [l, 0), so each realization is
/// rescaled by 1/|l| to make its absorbed left boundary reach exactly -1.
/// In boundary-filling phases the absorbed part of the boundary segment is
/// appended (absorbed boundary is traced boundary at/below the threshold).
/// `mirror` reflects the process across the imaginary axis (force point on
/// the other side of the seed), implemented by negating the driving.
fn normalized_range(
    kappa: f64,
    rho: f64,
    i: u64,
    which: u64,
    mirror: bool,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let dt = 2.5e-4;
    let mut r = rng::stream(20_000 + i, which);
    let mut pair = sle::sample_driving_pair(kappa, rho, 10.0, dt, &mut r).unwrap();
    if mirror {
        for w in &mut pair.w {
            *w = -*w;
        }
    }
    // the swallowed negative-axis points form an interval [l, 0); find l by
    // bisection and rescale so the absorbed left reach is exactly -1
    let absorbed = |x: f64| {
        matches!(
            loewner::boundary_transport(&pair.w, dt, x).unwrap(),
            loewner::BoundaryFate::Swallowed { .. }
        )
    };
    let (mut lo, mut hi) = (-64.0f64, -0.01);
    if absorbed(lo) {
        hi = lo;
    } else {
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if absorbed(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let s = -hi;
    let tips = loewner::trace_from_driving(&pair.w, dt).unwrap();
    let scaled: Vec<Complex64> = tips.iter().map(|p| p / s).collect();
    let mut pts = analysis::densify_polyline(&scaled, 0.02).unwrap();
    if rho <= kappa / 2.0 - 4.0 + 1e-12 {
        let mut x = -1.02f64;
        while x <= 0.02 {
            if absorbed(x * s) {
                pts.push(Complex64::new(x, 0.0));
            }
            x += 0.01;
        }
    }
    (pts, tips)
}

#[test]
fn probe_c9() {
    let t0 = Instant::now();
    let n = 100usize;
    let markers: Vec<Complex64> =
        (0..8).map(|j| Complex64::new(-0.125 * (j + 1) as f64, 0.1)).collect();
    let mut summaries = [Vec::new(), Vec::new(), Vec::new()];
    let mut orders: [Vec<Vec<Option<usize>>>; 2] = [Vec::new(), Vec::new()];
    for (which, (kappa, rho, mirror)) in
        [(3.0, -2.5, false), (16.0 / 3.0, -4.0 / 3.0, true), (3.0, -2.1, false)]
            .into_iter()
            .enumerate()
    {
        let mut lens = Vec::new();
        for i in 0..n {
            let (pts, tips) = normalized_range(kappa, rho, i as u64, which as u64, mirror);
            lens.push(pts.len() as f64);
            summaries[which].push(analysis::range_summaries(&pts, 0.05).unwrap());
            if which < 2 {
                orders[which].push(analysis::visit_order(&tips, &markers, 0.15).unwrap());
            }
        }
        let med = |f: &dyn Fn(&analysis::RangeSummaries) -> f64| {
            let v: Vec<f64> = summaries[which].iter().map(f).collect();
            analysis::median(&v).unwrap()
        };
        println!(
            "c9 ensemble {which} ({kappa:.3},{rho:.3}): median pts {:.0}; area {:.3} bf {:.3} cov {:.3} in {:.0} s",
            analysis::median(&lens).unwrap(),
            med(&|s| s.neighborhood_area),
            med(&|s| s.boundary_fraction),
            med(&|s| s.grid_coverage),
            t0.elapsed().as_secs_f64()
        );
    }
    let main = analysis::range_equivalence_stat(&summaries[0], &summaries[1], 0.01).unwrap();
    let neg = analysis::range_equivalence_stat(&summaries[0], &summaries[2], 0.01).unwrap();
    for c in &main.comparisons {
        println!("c9 main {}: stat {:.4} crit {:.4} pass {}", c.name, c.statistic, c.critical, c.passes);
    }
    for c in &neg.comparisons {
        println!("c9 neg  {}: stat {:.4} crit {:.4} pass {}", c.name, c.statistic, c.critical, c.passes);
    }
    // visit-order: Kendall tau between the two traces' first-visit orders of
    // the fixed marker grid, paired by index; significantly below 1 confirms
    // a different point-visit order.
    let mut cross = Vec::new();
    for i in 0..n {
        if let Some(t) = analysis::visit_order_tau(&orders[0][i], &orders[1][i]).unwrap() {
            cross.push(t);
        }
    }
    let mean = cross.iter().sum::<f64>() / cross.len() as f64;
    let var = cross.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>()
        / (cross.len() - 1) as f64;
    let se = (var / cross.len() as f64).sqrt();
    println!(
        "c9 tau: cross n {} median {:.3} mean {:.3} se {:.3} mean+3se {:.3} below1 {}",
        cross.len(),
        analysis::median(&cross).unwrap_or(f64::NAN),
        mean,
        se,
        mean + 3.0 * se,
        cross.iter().filter(|t| **t < 1.0 - 1e-9).count()
    );
    println!("c9 total {:.0} s", t0.elapsed().as_secs_f64());
}

#[test]
fn probe_c9_tau() {
    let dt = 2.5e-4;
    let n = 20usize;
    let targets: Vec<Complex64> =
        (0..8).map(|j| Complex64::new(-0.125 * (j + 1) as f64, 0.1)).collect();
    let mut orders: [Vec<Vec<Option<usize>>>; 2] = [Vec::new(), Vec::new()];
    for (which, (kappa, rho, mirror)) in
        [(3.0, -2.5, false), (16.0 / 3.0, -4.0 / 3.0, true)].into_iter().enumerate()
    {
        for i in 0..n as u64 {
            let mut r = rng::stream(20_000 + i, which as u64);
            let mut pair = sle::sample_driving_pair(kappa, rho, 10.0, dt, &mut r).unwrap();
            if mirror {
                for w in &mut pair.w {
                    *w = -*w;
                }
            }
            let tips = loewner::trace_from_driving(&pair.w, dt).unwrap();
            let order = analysis::visit_order(&tips, &targets, 0.15).unwrap();
            if i < 4 {
                let txt: Vec<String> = order
                    .iter()
                    .map(|v| v.map(|s| s.to_string()).unwrap_or_else(|| "-".into()))
                    .collect();
                println!("c9tau ({kappa:.2},{rho:.2}) seed {i}: steps [{}]", txt.join(", "));
            }
            orders[which].push(order);
        }
    }
    let mut cross = Vec::new();
    let mut within = [Vec::new(), Vec::new()];
    for i in 0..n {
        if let Some(t) = analysis::visit_order_tau(&orders[0][i], &orders[1][i]).unwrap() {
            cross.push(t);
        }
        for e in 0..2 {
            let j = (i + 1) % n;
            if let Some(t) = analysis::visit_order_tau(&orders[e][i], &orders[e][j]).unwrap() {
                within[e].push(t);
            }
        }
    }
    println!(
        "c9tau: cross n {} median {:.3}; within0 n {} median {:.3}; within1 n {} median {:.3}",
        cross.len(),
        analysis::median(&cross).unwrap_or(f64::NAN),
        within[0].len(),
        analysis::median(&within[0]).unwrap_or(f64::NAN),
        within[1].len(),
        analysis::median(&within[1]).unwrap_or(f64::NAN),
    );
}

#[test]
fn probe_c9_levels() {
    let dt = 2.5e-4;
    for (which, (kappa, rho, mirror)) in
        [(3.0, -2.5, false), (16.0 / 3.0, -4.0 / 3.0, true), (3.0, -2.1, false)]
            .into_iter()
            .enumerate()
    {
        let mut absorbed = Vec::new();
        let mut finals = Vec::new();
        let mut mins = Vec::new();
        for i in 0..10u64 {
            let mut r = rng::stream(20_000 + i, which as u64);
            let mut pair = sle::sample_driving_pair(kappa, rho, 10.0, dt, &mut r).unwrap();
            if mirror {
                for w in &mut pair.w {
                    *w = -*w;
                }
            }
            let profile = loewner::conformal_radius_profile(&pair.w, dt).unwrap();
            finals.push(*profile.last().unwrap());
            mins.push(profile.iter().cloned().fold(f64::INFINITY, f64::min));
            let mut n = 0usize;
            for g in 0..200 {
                let x = -1.0 + g as f64 / 199.0;
                if let loewner::BoundaryFate::Swallowed { .. } =
                    loewner::boundary_transport(&pair.w, dt, x).unwrap()
                {
                    n += 1;
                }
            }
            absorbed.push(n as f64 / 200.0);
        }
        let ftxt: Vec<String> = finals.iter().map(|f| format!("{f:.2}")).collect();
        println!(
            "c9lev ({kappa:.2},{rho:.2}) mirror {mirror}: absorbed med {:.3} min {:.3}; final crad [{}]; min crad med {:.3}",
            analysis::median(&absorbed).unwrap(),
            absorbed.iter().cloned().fold(f64::INFINITY, f64::min),
            ftxt.join(", "),
            analysis::median(&mins).unwrap()
        );
    }
}

#[test]
fn probe_c10() {
    let t0 = Instant::now();
    for delta_rho in [0.2f64, 0.1, 0.05] {
        let mut hds = Vec::new();
        for seed in 0..8u64 {
            let mut r1 = rng::stream(40_000 + seed, 0);
            let a = sle::sample_sle_trace(3.0, -2.3, 1.0, 1e-4, &mut r1).unwrap();
            let mut r2 = rng::stream(40_000 + seed, 0);
            let b = sle::sample_sle_trace(3.0, -2.3 + delta_rho, 1.0, 1e-4, &mut r2).unwrap();
            hds.push(analysis::hausdorff_distance(&a.points, &b.points).unwrap());
        }
        println!(
            "c10 delta {delta_rho}: median HD {:.4} in {:.0} s",
            analysis::median(&hds).unwrap(),
            t0.elapsed().as_secs_f64()
        );
    }
}

#[test]
fn probe_c11() {
    let t0 = Instant::now();
    let kappa = 2.5;
    let rho = -2.2;
    let theta2 = sle::theta_of_rho(kappa, rho).unwrap();
    for (budget, horizon) in [(0.5f64, 0.3f64), (0.5, 0.5), (0.8, 0.5)] {
        let mut h1s = Vec::new();
        let mut h3s = Vec::new();
        for seed in 0..6u64 {
            let l1 = lightcone::build_ln(
                kappa, 0.0, theta2, 1, &[(1, 2)], budget, 5e-4,
                Seed::BoundaryPoint { x: 0.0 }, 200 + seed,
            )
            .unwrap();
            let l3 = lightcone::build_ln(
                kappa, 0.0, theta2, 3, &[(1, 2)], budget, 5e-4,
                Seed::BoundaryPoint { x: 0.0 }, 200 + seed,
            )
            .unwrap();
            // bitwise nesting of the shared prefix
            assert!(l3.segments.len() > l1.segments.len());
            for (a, b) in l1.segments.iter().zip(&l3.segments) {
                assert_eq!(a.node_id, b.node_id);
                assert_eq!(a.points, b.points);
            }
            let mut rd = rng::stream(300 + seed, 9);
            let direct = lightcone::lightcone_via_sle(kappa, rho, horizon, 2.5e-4, &mut rd)
                .unwrap();
            h1s.push(
                analysis::hausdorff_distance(&l1.all_points(), &direct.points).unwrap(),
            );
            h3s.push(
                analysis::hausdorff_distance(&l3.all_points(), &direct.points).unwrap(),
            );
        }
        println!(
            "c11 budget {budget} horizon {horizon}: median HD L1 {:.4} L3 {:.4} in {:.0} s",
            analysis::median(&h1s).unwrap(),
            analysis::median(&h3s).unwrap(),
            t0.elapsed().as_secs_f64()
        );
    }
    // pocket-count stability under grid refinement
    let mut c_coarse = 0usize;
    let mut c_fine = 0usize;
    for seed in 0..8u64 {
        let l3 = lightcone::build_ln(
            kappa, 0.0, theta2, 2, &[(1, 2)], 0.5, 5e-4,
            Seed::BoundaryPoint { x: 0.0 }, 200 + seed,
        )
        .unwrap();
        let p1 = lightcone::detect_pockets(&l3, 0.02).unwrap();
        let p2 = lightcone::detect_pockets(&l3, 0.0125).unwrap();
        c_coarse += p1.iter().filter(|p| p.diameter >= 0.1).count();
        c_fine += p2.iter().filter(|p| p.diameter >= 0.1).count();
    }
    println!(
        "c11 pockets diameter>=0.1: coarse {} fine {} in {:.0} s",
        c_coarse,
        c_fine,
        t0.elapsed().as_secs_f64()
    );
}
