//! Light-cone constructions: iterated angle-switching flow-line trees, the
//! direct SLE_κ(ρ) realization of the same set, pocket detection in the
//! complement, pocket ordering by the merge criterion, and the exploration
//! path assembled from ordered pocket sides.
//!
//! The constructive route grows a tree of flow-line segments restricted to
//! the two extremal angles: each tree node is one segment drawn in its own
//! half-plane chart (the ancestral hull mapped out, boundary data carried
//! along), and every chart is pulled back to the original domain for
//! geometric post-processing. The direct route simulates SLE_κ(ρ) in the
//! regime where its range fills the same light cone; it is the reference
//! realization, and the constructive tree is an approximation whose quality
//! is measured, never assumed.

use crate::error::{Error, Result};
use crate::imaginary_geometry as ig;
use crate::loewner::{self, Trace};
use crate::rng;
use crate::sle;
use num_complex::Complex64;
use rand::Rng;
use std::collections::HashMap;
use std::collections::VecDeque;

pub use crate::sle::{rho_of_theta, theta_of_rho};

/// Where a light-cone tree starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seed {
    /// A boundary point with locally neutral field data: the ambient values
    /// are chosen so that both extremal-angle root segments are drawable
    /// whenever theta2 − theta1 ≤ π.
    BoundaryPoint { x: f64 },
    /// A point strictly on the negative ray under the one-sided field data
    /// (value −λ along the ray). A zero-angle root from here sits exactly at
    /// the continuation threshold and is skipped, matching the boundary-
    /// tracing behavior of the zero-angle line from the ray.
    OnNegativeRay { x: f64 },
}

/// One flow-line segment of the tree, pulled back to the original domain.
#[derive(Debug, Clone)]
pub struct AngledSegment {
    /// Stable node id (level-order in the tree; ids are reused verbatim when
    /// the same tree is rebuilt with more switches).
    pub node_id: usize,
    pub parent: Option<usize>,
    /// Number of direction changes before this segment.
    pub depth: usize,
    /// The segment's angle: always one of the two extremal angles.
    pub angle: f64,
    /// Rational fraction of the parent's capacity budget at which this
    /// segment branched off (numerator, denominator); None for roots.
    pub switch_fraction: Option<(u32, u32)>,
    /// Segment points in the original domain. Roots include their seed;
    /// children start at their first grown point (the switch point itself
    /// already lies on the parent).
    pub points: Vec<Complex64>,
}

/// A segment that was requested but whose induced force-point weight sat at
/// or below the continuation threshold −2; reported, never fabricated.
#[derive(Debug, Clone)]
pub struct SkippedSegment {
    pub node_id: usize,
    pub parent: Option<usize>,
    pub angle: f64,
    pub reason: String,
}

/// Finite approximation of a light cone: all segments reachable with at
/// most `n_switches` direction changes between the two extremal angles.
#[derive(Debug, Clone)]
pub struct LightConeApprox {
    pub theta1: f64,
    pub theta2: f64,
    pub n_switches: usize,
    pub segments: Vec<AngledSegment>,
    pub pockets: Vec<Pocket>,
    pub skipped: Vec<SkippedSegment>,
}

impl LightConeApprox {
    /// Every segment point, in build order (root segments first).
    pub fn all_points(&self) -> Vec<Complex64> {
        self.segments.iter().flat_map(|s| s.points.iter().copied()).collect()
    }
}

/// A bounded complementary component of a light-cone point set.
#[derive(Debug, Clone)]
pub struct Pocket {
    /// First boundary point reached by the generating path.
    pub opening: Complex64,
    /// Seal point where the two sides meet (last boundary point written).
    pub closing: Complex64,
    /// First-traversed (or first-angle) side, oriented opening → closing.
    pub side1: Vec<Complex64>,
    /// The other side, oriented opening → closing. A two-point stub when
    /// the boundary is covered in a single pass (one-sided pocket).
    pub side2: Vec<Complex64>,
    /// Diameter of the pocket (interior plus boundary).
    pub diameter: f64,
    /// Position in the pocket order once ordered; None until then.
    pub order_index: Option<usize>,
    /// Visit index of the opening point along the generating path.
    pub opening_visit: usize,
}

/// How pocket ordering was decided.
#[derive(Debug, Clone)]
pub struct OrderingReport {
    /// True when the merge criterion decided every pair; false when the
    /// ordering fell back to the visit order of opening points.
    pub used_merge_criterion: bool,
    /// Pairs (by input position) whose merge side could not be resolved.
    pub ambiguous_pairs: Vec<(usize, usize)>,
}

/// Concatenated exploration path and its continuity report.
#[derive(Debug, Clone)]
pub struct ExplorationPath {
    pub points: Vec<Complex64>,
    /// (pocket position, jump size) for joints wider than 10·grid_eps.
    pub gap_reports: Vec<(usize, f64)>,
}

/// One chart-change step on the way from a node's frame back to the
/// original domain.
enum FrameStep {
    /// Root translation: original = node + x.
    Translate(f64),
    /// Child chart: parent = (inverse Loewner flow of the prefix)(node + wk).
    LoewnerPrefix { driving: Vec<f64>, wk: f64 },
}

fn apply_chain(chain: &[FrameStep], dt: f64, points: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let mut pts = points;
    for step in chain.iter().rev() {
        match step {
            FrameStep::Translate(x) => {
                for p in &mut pts {
                    p.re += x;
                }
            }
            FrameStep::LoewnerPrefix { driving, wk } => {
                for p in &mut pts {
                    p.re += wk;
                }
                loewner::pull_back_points(driving, dt, &mut pts)?;
            }
        }
    }
    Ok(pts)
}

struct PendingNode {
    id: usize,
    parent: Option<usize>,
    depth: usize,
    angle: f64,
    switch_fraction: Option<(u32, u32)>,
    /// Ambient boundary values (λ-units) flanking the node's seed.
    ambient: (f64, f64),
    /// Chart chain from the original domain down to this node's frame.
    chain: Vec<FrameStep>,
}

/// Grow the angle-switching tree approximating L_n(θ₁, θ₂).
///
/// Each node runs one flow-line segment for the full `segment_budget` of
/// half-plane capacity at resolution `dt`; children branch off at the given
/// rational fractions of that budget (positive rational switch times) and
/// switch to the other extremal angle, up to `n_switches` changes. Segment
/// randomness comes from per-node streams of `rng_seed`, so rebuilding with
/// a larger `n_switches` extends the tree without altering existing
/// segments. Requested segments whose induced weights sit at or below the
/// continuation threshold are skipped and reported.
#[allow(clippy::too_many_arguments)]
pub fn build_ln(
    kappa: f64,
    theta1: f64,
    theta2: f64,
    n_switches: usize,
    switch_fractions: &[(u32, u32)],
    segment_budget: f64,
    dt: f64,
    seed: Seed,
    rng_seed: u64,
) -> Result<LightConeApprox> {
    if !(kappa > 0.0 && kappa < 4.0) {
        return Err(Error::param(format!(
            "light-cone trees need kappa in (0, 4), got {kappa}"
        )));
    }
    if !(theta1 <= theta2) {
        return Err(Error::param(format!(
            "angles must satisfy theta1 <= theta2, got ({theta1}, {theta2})"
        )));
    }
    if theta2 - theta1 > std::f64::consts::PI + 1e-12 {
        return Err(Error::param(format!(
            "angle gap {} exceeds π; such cones are outside this construction",
            theta2 - theta1
        )));
    }
    if !(segment_budget > 0.0 && dt > 0.0) {
        return Err(Error::param(format!(
            "need segment_budget > 0 and dt > 0, got ({segment_budget}, {dt})"
        )));
    }
    let steps = (segment_budget / dt).round() as usize;
    if steps < 2 {
        return Err(Error::param(format!(
            "segment budget {segment_budget} is shorter than two steps of {dt}"
        )));
    }
    for &(num, den) in switch_fractions {
        if num == 0 || den == 0 || num > den {
            return Err(Error::param(format!(
                "switch fraction {num}/{den} is not a rational in (0, 1]"
            )));
        }
    }
    if n_switches > 0 && switch_fractions.is_empty() && theta1 != theta2 {
        return Err(Error::param(
            "switching requested but no switch times given".to_string(),
        ));
    }

    let (chi, lambda, _) = ig::derived_constants(kappa)?;
    let twist = |theta: f64| theta * chi / lambda;
    let (seed_x, root_ambient) = match seed {
        Seed::BoundaryPoint { x } => {
            if !x.is_finite() {
                return Err(Error::param(format!("seed must be finite, got {x}")));
            }
            (x, (-1.0 - twist(theta1), 1.0 - twist(theta2)))
        }
        Seed::OnNegativeRay { x } => {
            if !(x < 0.0) {
                return Err(Error::param(format!(
                    "negative-ray seed must satisfy x < 0, got {x}"
                )));
            }
            (x, (-1.0, -1.0))
        }
    };

    // θ1 == θ2 degenerates to a single flow line: one root, no switches.
    let single = theta1 == theta2;
    let root_angles: &[f64] = if single { &[theta1] } else { &[theta1, theta2] };

    let mut segments = Vec::new();
    let mut skipped = Vec::new();
    let mut queue: VecDeque<PendingNode> = VecDeque::new();
    let mut next_id = 0usize;
    for &angle in root_angles {
        queue.push_back(PendingNode {
            id: next_id,
            parent: None,
            depth: 0,
            angle,
            switch_fraction: None,
            ambient: root_ambient,
            chain: vec![FrameStep::Translate(seed_x)],
        });
        next_id += 1;
    }

    while let Some(node) = queue.pop_front() {
        let weights = match ig::force_points_for_ambient(kappa, node.ambient.0, node.ambient.1, node.angle)
        {
            Ok(w) => w,
            Err(e) => {
                skipped.push(SkippedSegment {
                    node_id: node.id,
                    parent: node.parent,
                    angle: node.angle,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let mut node_rng = rng::stream(rng_seed, node.id as u64);
        let driving = sle::sample_multi_force_driving(
            kappa,
            weights.0,
            weights.1,
            0.0,
            0.0,
            segment_budget,
            dt,
            &mut node_rng,
        )?;
        let trace = loewner::solve_forward(&driving.w, dt)?;
        // Children: map out the prefix hull up to the switch step, then grow
        // at the other angle from the (translated) tip, flanked by the data
        // the just-drawn angle leaves behind.
        if node.depth < n_switches && !single {
            let child_ambient = ig::angle_line_flank_values(kappa, node.angle)?;
            let other = if node.angle == theta1 { theta2 } else { theta1 };
            for &(num, den) in switch_fractions {
                let k = ((num as f64 / den as f64) * steps as f64).round() as usize;
                let k = k.clamp(1, steps);
                let mut chain: Vec<FrameStep> = Vec::with_capacity(node.chain.len() + 1);
                chain.extend(node.chain.iter().map(|s| match s {
                    FrameStep::Translate(x) => FrameStep::Translate(*x),
                    FrameStep::LoewnerPrefix { driving, wk } => FrameStep::LoewnerPrefix {
                        driving: driving.clone(),
                        wk: *wk,
                    },
                }));
                chain.push(FrameStep::LoewnerPrefix {
                    driving: driving.w[..=k].to_vec(),
                    wk: driving.w[k],
                });
                queue.push_back(PendingNode {
                    id: next_id,
                    parent: Some(node.id),
                    depth: node.depth + 1,
                    angle: other,
                    switch_fraction: Some((num, den)),
                    ambient: child_ambient,
                    chain,
                });
                next_id += 1;
            }
        }
        // Pull the segment back to the original domain. Children drop their
        // seed point: it is the parent's switch-point tip, already present
        // in the parent's segment.
        let local: Vec<Complex64> = if node.parent.is_some() {
            trace.points[1..].to_vec()
        } else {
            trace.points.clone()
        };
        let points = apply_chain(&node.chain, dt, local)?;
        segments.push(AngledSegment {
            node_id: node.id,
            parent: node.parent,
            depth: node.depth,
            angle: node.angle,
            switch_fraction: node.switch_fraction,
            points,
        });
    }

    Ok(LightConeApprox {
        theta1,
        theta2,
        n_switches,
        segments,
        pockets: Vec::new(),
        skipped,
    })
}

/// Direct realization of the light cone: an SLE_κ(ρ) trace in the regime
/// where its range fills the light cone of opening angle θ_ρ (including the
/// one-sided critical edge ρ = κ/2 − 4).
pub fn lightcone_via_sle(
    kappa: f64,
    rho: f64,
    horizon: f64,
    dt: f64,
    rng: &mut impl Rng,
) -> Result<Trace> {
    let phase = sle::classify_phase(kappa, rho)?;
    let at_one_sided_edge = (rho - (kappa / 2.0 - 4.0)).abs() < 1e-12;
    if phase != sle::Phase::LightCone && !at_one_sided_edge {
        return Err(Error::param(format!(
            "({kappa}, {rho}) classifies as {}; the direct route needs the \
             light-cone regime or its one-sided edge rho = kappa/2 - 4",
            phase.label()
        )));
    }
    sle::sample_sle_trace(kappa, rho, horizon, dt, rng)
}

/// How pocket boundary points are split into the two sides.
enum SideRule {
    /// Split by polyline label (constructive route: label 0 = θ₁ segments).
    ByLabel,
    /// Split by visit-index runs (direct route: the trace passes a pocket's
    /// boundary in one or two separate stretches of its time parameter).
    ByRuns,
}

struct WriterRecord {
    label: usize,
    visit: usize,
    point: Complex64,
}

/// Bounded complementary components of a single trace's range, rasterized
/// at resolution `grid_eps`. Sides are split by time-parameter runs.
pub fn detect_pockets_trace(points: &[Complex64], grid_eps: f64) -> Result<Vec<Pocket>> {
    raster_pockets(&[(0usize, points)], grid_eps, SideRule::ByRuns)
}

/// Bounded complementary components of a light-cone approximation's point
/// set. Sides are split by segment angle label: side1 collects boundary
/// written by θ₁-angle segments, side2 by θ₂-angle ones.
pub fn detect_pockets(approx: &LightConeApprox, grid_eps: f64) -> Result<Vec<Pocket>> {
    let polys: Vec<(usize, &[Complex64])> = approx
        .segments
        .iter()
        .map(|s| {
            let label = if s.angle == approx.theta1 { 0 } else { 1 };
            (label, s.points.as_slice())
        })
        .collect();
    raster_pockets(&polys, grid_eps, SideRule::ByLabel)
}

fn raster_pockets(
    polys: &[(usize, &[Complex64])],
    grid_eps: f64,
    rule: SideRule,
) -> Result<Vec<Pocket>> {
    if !(grid_eps > 0.0 && grid_eps.is_finite()) {
        return Err(Error::param(format!("grid_eps must be > 0, got {grid_eps}")));
    }
    let total_points: usize = polys.iter().map(|(_, p)| p.len()).sum();
    if total_points < 2 {
        return Ok(Vec::new());
    }
    // Densify each polyline at half the cell size so rasterized walls have
    // no diagonal leaks, tagging every sample with the visit index of its
    // originating vertex (global across polylines, in input order).
    let mut samples: Vec<WriterRecord> = Vec::new();
    let mut visit_base = 0usize;
    let max_gap = grid_eps * 0.5;
    for &(label, pts) in polys {
        for (k, w) in pts.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            samples.push(WriterRecord { label, visit: visit_base + k, point: a });
            let gap = (b - a).norm();
            if gap > max_gap {
                let pieces = (gap / max_gap).ceil() as usize;
                for j in 1..pieces {
                    samples.push(WriterRecord {
                        label,
                        visit: visit_base + k,
                        point: a + (b - a) * (j as f64 / pieces as f64),
                    });
                }
            }
        }
        if let Some(last) = pts.last() {
            samples.push(WriterRecord {
                label,
                visit: visit_base + pts.len() - 1,
                point: *last,
            });
        }
        visit_base += pts.len();
    }

    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for s in &samples {
        if !s.point.re.is_finite() || !s.point.im.is_finite() {
            return Err(Error::numerical("non-finite point in pocket detection".to_string()));
        }
        lo_x = lo_x.min(s.point.re);
        lo_y = lo_y.min(s.point.im);
        hi_x = hi_x.max(s.point.re);
        hi_y = hi_y.max(s.point.im);
    }
    // Two-cell pad on every side gives the flood fill a connected frame.
    let nx = ((hi_x - lo_x) / grid_eps).ceil() as usize + 5;
    let ny = ((hi_y - lo_y) / grid_eps).ceil() as usize + 5;
    if nx.saturating_mul(ny) > 30_000_000 {
        return Err(Error::param(format!(
            "raster grid {nx}x{ny} too large; increase grid_eps"
        )));
    }
    let cell_of = |p: Complex64| -> (usize, usize) {
        let ix = ((p.re - lo_x) / grid_eps).floor() as isize + 2;
        let iy = ((p.im - lo_y) / grid_eps).floor() as isize + 2;
        (ix.clamp(0, nx as isize - 1) as usize, iy.clamp(0, ny as isize - 1) as usize)
    };
    let idx = |ix: usize, iy: usize| iy * nx + ix;

    // First writer wins each cell; samples are in global visit order.
    let mut occupied: Vec<i32> = vec![-1; nx * ny];
    for (s_idx, s) in samples.iter().enumerate() {
        let (ix, iy) = cell_of(s.point);
        let slot = &mut occupied[idx(ix, iy)];
        if *slot < 0 {
            *slot = s_idx as i32;
        }
    }

    // Flood the outside from the frame (4-connected through empty cells).
    const UNKNOWN: u8 = 0;
    const OUTSIDE: u8 = 1;
    const TAKEN: u8 = 2;
    let mut state = vec![UNKNOWN; nx * ny];
    let mut bfs: VecDeque<(usize, usize)> = VecDeque::new();
    for ix in 0..nx {
        for iy in [0, ny - 1] {
            if occupied[idx(ix, iy)] < 0 && state[idx(ix, iy)] == UNKNOWN {
                state[idx(ix, iy)] = OUTSIDE;
                bfs.push_back((ix, iy));
            }
        }
    }
    for iy in 0..ny {
        for ix in [0, nx - 1] {
            if occupied[idx(ix, iy)] < 0 && state[idx(ix, iy)] == UNKNOWN {
                state[idx(ix, iy)] = OUTSIDE;
                bfs.push_back((ix, iy));
            }
        }
    }
    let neighbors = |ix: usize, iy: usize| -> [Option<(usize, usize)>; 4] {
        [
            (ix > 0).then(|| (ix - 1, iy)),
            (ix + 1 < nx).then(|| (ix + 1, iy)),
            (iy > 0).then(|| (ix, iy - 1)),
            (iy + 1 < ny).then(|| (ix, iy + 1)),
        ]
    };
    while let Some((ix, iy)) = bfs.pop_front() {
        for n in neighbors(ix, iy).into_iter().flatten() {
            let j = idx(n.0, n.1);
            if occupied[j] < 0 && state[j] == UNKNOWN {
                state[j] = OUTSIDE;
                bfs.push_back(n);
            }
        }
    }

    // Remaining empty cells are bounded components: collect each.
    let mut pockets = Vec::new();
    for start_iy in 0..ny {
        for start_ix in 0..nx {
            let j0 = idx(start_ix, start_iy);
            if occupied[j0] >= 0 || state[j0] != UNKNOWN {
                continue;
            }
            let mut cells = Vec::new();
            state[j0] = TAKEN;
            let mut comp: VecDeque<(usize, usize)> = VecDeque::from([(start_ix, start_iy)]);
            let mut boundary_slots: Vec<i32> = Vec::new();
            while let Some((ix, iy)) = comp.pop_front() {
                cells.push((ix, iy));
                for n in neighbors(ix, iy).into_iter().flatten() {
                    let j = idx(n.0, n.1);
                    if occupied[j] >= 0 {
                        boundary_slots.push(occupied[j]);
                    } else if state[j] == UNKNOWN {
                        state[j] = TAKEN;
                        comp.push_back(n);
                    }
                }
            }
            boundary_slots.sort_unstable();
            boundary_slots.dedup();
            if boundary_slots.is_empty() {
                continue;
            }
            let center = |&(ix, iy): &(usize, usize)| -> (f64, f64) {
                (
                    lo_x + (ix as f64 - 2.0 + 0.5) * grid_eps,
                    lo_y + (iy as f64 - 2.0 + 0.5) * grid_eps,
                )
            };
            let mut hull_pts: Vec<(f64, f64)> = cells.iter().map(center).collect();
            hull_pts.extend(
                boundary_slots
                    .iter()
                    .map(|&s| (samples[s as usize].point.re, samples[s as usize].point.im)),
            );
            let diameter = diameter_of(&mut hull_pts);
            if diameter < 2.0 * grid_eps {
                continue;
            }
            let mut records: Vec<&WriterRecord> =
                boundary_slots.iter().map(|&s| &samples[s as usize]).collect();
            records.sort_by_key(|r| r.visit);
            if let Some(pocket) = assemble_pocket(&records, &rule, total_points) {
                pockets.push(pocket);
            }
        }
    }
    pockets.sort_by_key(|p| p.opening_visit);
    Ok(pockets)
}

/// Split sorted boundary records into sides and marked points.
fn assemble_pocket(records: &[&WriterRecord], rule: &SideRule, total_points: usize) -> Option<Pocket> {
    if records.len() < 2 {
        return None;
    }
    let opening = records[0].point;
    let opening_visit = records[0].visit;
    let closing = records[records.len() - 1].point;
    let (mut side1, mut side2): (Vec<Complex64>, Vec<Complex64>) = match rule {
        SideRule::ByLabel => {
            let s1: Vec<Complex64> =
                records.iter().filter(|r| r.label == 0).map(|r| r.point).collect();
            let s2: Vec<Complex64> =
                records.iter().filter(|r| r.label != 0).map(|r| r.point).collect();
            (s1, s2)
        }
        SideRule::ByRuns => {
            // Split the visit-index sequence at large gaps; the run holding
            // the opening is the first-traversed side.
            let run_gap = (total_points / 64).max(16);
            let mut runs: Vec<Vec<&WriterRecord>> = vec![vec![records[0]]];
            for pair in records.windows(2) {
                if pair[1].visit - pair[0].visit > run_gap {
                    runs.push(Vec::new());
                }
                runs.last_mut().unwrap().push(pair[1]);
            }
            let first_run = runs.remove(0);
            let s1: Vec<Complex64> = first_run.iter().map(|r| r.point).collect();
            let s2: Vec<Complex64> = runs.iter().flatten().map(|r| r.point).collect();
            (s1, s2)
        }
    };
    // The sides share the pocket's marked endpoints by construction of the
    // continuum object; enforce it on the rasterized polylines.
    let snap = |side: &mut Vec<Complex64>| {
        if side.first() != Some(&opening) {
            side.insert(0, opening);
        }
        if side.last() != Some(&closing) {
            side.push(closing);
        }
    };
    snap(&mut side1);
    snap(&mut side2);
    let mut hull: Vec<(f64, f64)> = records.iter().map(|r| (r.point.re, r.point.im)).collect();
    let diameter = diameter_of(&mut hull);
    Some(Pocket {
        opening,
        closing,
        side1,
        side2,
        diameter,
        order_index: None,
        opening_visit,
    })
}

/// Max pairwise distance, via convex hull (Andrew monotone chain).
fn diameter_of(pts: &mut Vec<(f64, f64)>) -> f64 {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 2 {
        return 0.0;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| -> f64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    let mut best = 0.0f64;
    for i in 0..hull.len() {
        for j in (i + 1)..hull.len() {
            let dx = hull[i].0 - hull[j].0;
            let dy = hull[i].1 - hull[j].1;
            best = best.max((dx * dx + dy * dy).sqrt());
        }
    }
    best
}

/// Which of two pockets comes first, by the merge criterion.
enum PairVerdict {
    FirstBeforeSecond,
    SecondBeforeFirst,
    Ambiguous,
}

/// Order pockets. With `theta2_lines` (one polyline per pocket: the θ₂-angle
/// flow line from its opening point), a pocket comes before another exactly
/// when its line merges into the other's line on that line's right side.
/// Without lines (direct route), the order is the visit order of opening
/// points. Unresolvable merge sides cause a fallback to visit order, with
/// the ambiguous pairs reported.
pub fn order_pockets(
    mut pockets: Vec<Pocket>,
    theta2_lines: Option<&[Vec<Complex64>]>,
    merge_tol: f64,
) -> Result<(Vec<Pocket>, OrderingReport)> {
    if pockets.is_empty() {
        return Ok((pockets, OrderingReport { used_merge_criterion: false, ambiguous_pairs: vec![] }));
    }
    let by_visit = |pockets: &mut Vec<Pocket>| {
        pockets.sort_by_key(|p| p.opening_visit);
        for (i, p) in pockets.iter_mut().enumerate() {
            p.order_index = Some(i);
        }
    };
    let lines = match theta2_lines {
        None => {
            by_visit(&mut pockets);
            return Ok((
                pockets,
                OrderingReport { used_merge_criterion: false, ambiguous_pairs: vec![] },
            ));
        }
        Some(lines) => lines,
    };
    if lines.len() != pockets.len() {
        return Err(Error::param(format!(
            "{} pockets but {} merge lines",
            pockets.len(),
            lines.len()
        )));
    }
    if !(merge_tol > 0.0) {
        return Err(Error::param(format!("merge tolerance must be > 0, got {merge_tol}")));
    }
    let n = pockets.len();
    let mut wins = vec![0usize; n];
    let mut ambiguous_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            match pair_order(&lines[i], &lines[j], merge_tol) {
                PairVerdict::FirstBeforeSecond => wins[i] += 1,
                PairVerdict::SecondBeforeFirst => wins[j] += 1,
                PairVerdict::Ambiguous => ambiguous_pairs.push((i, j)),
            }
        }
    }
    if !ambiguous_pairs.is_empty() {
        by_visit(&mut pockets);
        return Ok((pockets, OrderingReport { used_merge_criterion: false, ambiguous_pairs }));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        wins[b]
            .cmp(&wins[a])
            .then(pockets[a].opening_visit.cmp(&pockets[b].opening_visit))
    });
    let mut ordered: Vec<Pocket> = Vec::with_capacity(n);
    for (rank, &src) in order.iter().enumerate() {
        let mut p = pockets[src].clone();
        p.order_index = Some(rank);
        ordered.push(p);
    }
    Ok((ordered, OrderingReport { used_merge_criterion: true, ambiguous_pairs: vec![] }))
}

/// Decide which line's pocket comes first: the line that merges into the
/// other on the other's RIGHT side belongs to the earlier pocket; merging
/// on the left means the other pocket is earlier.
fn pair_order(line_a: &[Complex64], line_b: &[Complex64], tol: f64) -> PairVerdict {
    match merge_side(line_a, line_b, tol) {
        Some(side) if side < 0.0 => PairVerdict::FirstBeforeSecond,
        Some(side) if side > 0.0 => PairVerdict::SecondBeforeFirst,
        Some(_) => PairVerdict::Ambiguous,
        None => match merge_side(line_b, line_a, tol) {
            Some(side) if side < 0.0 => PairVerdict::SecondBeforeFirst,
            Some(side) if side > 0.0 => PairVerdict::FirstBeforeSecond,
            _ => PairVerdict::Ambiguous,
        },
    }
}

/// Signed side from which `incoming` first merges into `host`: negative for
/// the host's right side, positive for its left, None if the lines never
/// come within `tol`. Zero (ambiguous) when the approach is numerically
/// tangent.
fn merge_side(incoming: &[Complex64], host: &[Complex64], tol: f64) -> Option<f64> {
    if incoming.len() < 2 || host.len() < 2 {
        return None;
    }
    // Hash host vertices on a tol-sized grid for O(1) proximity lookups.
    let key = |p: Complex64| ((p.re / tol).floor() as i64, (p.im / tol).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (m, p) in host.iter().enumerate() {
        grid.entry(key(*p)).or_default().push(m);
    }
    for (k, p) in incoming.iter().enumerate() {
        let (cx, cy) = key(*p);
        let mut hit: Option<usize> = None;
        let mut best = f64::INFINITY;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ms) = grid.get(&(cx + dx, cy + dy)) {
                    for &m in ms {
                        let d = (host[m] - p).norm();
                        if d <= tol && d < best {
                            best = d;
                            hit = Some(m);
                        }
                    }
                }
            }
        }
        if let Some(m) = hit {
            // Approach direction taken from the last point outside the tube.
            let approach = incoming[k.saturating_sub(1)];
            let dir = if m + 1 < host.len() {
                host[m + 1] - host[m]
            } else {
                host[m] - host[m - 1]
            };
            let rel = approach - host[m];
            let cross = dir.re * rel.im - dir.im * rel.re;
            let scale = dir.norm() * rel.norm();
            if scale == 0.0 || cross.abs() < 1e-12 * scale {
                return Some(0.0);
            }
            return Some(cross.signum());
        }
    }
    None
}

/// Concatenate the side1 polylines of ordered pockets into the exploration
/// path. Joints wider than 10·grid_eps are reported (tolerance of the
/// rasterized construction), not bridged with fabricated geometry.
pub fn exploration_path(pockets: &[Pocket], grid_eps: f64) -> Result<ExplorationPath> {
    if pockets.is_empty() {
        return Err(Error::param("exploration path of zero pockets".to_string()));
    }
    if !(grid_eps > 0.0) {
        return Err(Error::param(format!("grid_eps must be > 0, got {grid_eps}")));
    }
    let mut points: Vec<Complex64> = Vec::new();
    let mut gap_reports = Vec::new();
    for (k, p) in pockets.iter().enumerate() {
        if p.side1.len() < 2 {
            return Err(Error::param(format!(
                "pocket {k} is missing its side decomposition"
            )));
        }
        if let Some(&prev) = points.last() {
            let gap = (p.side1[0] - prev).norm();
            if gap > 10.0 * grid_eps {
                gap_reports.push((k, gap));
            }
        }
        points.extend_from_slice(&p.side1);
    }
    Ok(ExplorationPath { points, gap_reports })
}
