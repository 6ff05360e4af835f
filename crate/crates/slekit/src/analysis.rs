//! Statistics and geometry utilities used to verify simulated paths:
//! box-counting dimension estimates, Hausdorff distance between point sets,
//! boundary-filling and transience diagnostics, range-equivalence testing,
//! two-sample tests, rank correlation, and simple least squares.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::{HashMap, HashSet};

/// Result of a box-counting dimension fit.
#[derive(Debug, Clone)]
pub struct DimensionEstimate {
    /// Least-squares slope of ln N(ε) against ln(1/ε), clamped to the
    /// planar range [0, 2].
    pub value: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    /// Fit quality R² of the log-log regression.
    pub r_squared: f64,
    /// Intercept of the fit (log prefactor).
    pub intercept: f64,
    /// The scales ε that entered the fit.
    pub scales_used: Vec<f64>,
    /// Occupied-box counts N(ε), parallel to `scales_used`.
    pub counts: Vec<usize>,
}

/// Insert intermediate points along a polyline so that consecutive points are
/// at most `max_gap` apart. Needed before box counting: bare vertices
/// undercount boxes crossed by long segments.
pub fn densify_polyline(points: &[Complex64], max_gap: f64) -> Result<Vec<Complex64>> {
    if !(max_gap > 0.0) {
        return Err(Error::param(format!("max_gap must be > 0, got {max_gap}")));
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = vec![points[0]];
    for k in 1..points.len() {
        let a = points[k - 1];
        let b = points[k];
        let gap = (b - a).norm();
        if gap > max_gap {
            let pieces = (gap / max_gap).ceil() as usize;
            for j in 1..pieces {
                out.push(a + (b - a) * (j as f64 / pieces as f64));
            }
        }
        out.push(b);
    }
    Ok(out)
}

/// Geometric ladder of box scales adapted to the point set's extent:
/// diag/512 up to diag/16, doubling, where diag is the bounding-box diagonal.
/// Scales below diag/512 are polluted by polyline discreteness.
pub fn default_box_scales(points: &[Complex64]) -> Result<Vec<f64>> {
    let (min, max) = bounding_box(points)?;
    let diag = (max - min).norm();
    if !(diag > 0.0) {
        return Err(Error::param("point set is a single point; no scales".to_string()));
    }
    Ok((0..6).map(|k| diag / 512.0 * (1 << k) as f64).collect())
}

fn bounding_box(points: &[Complex64]) -> Result<(Complex64, Complex64)> {
    if points.is_empty() {
        return Err(Error::param("empty point set".to_string()));
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        if !p.re.is_finite() || !p.im.is_finite() {
            return Err(Error::numerical("non-finite point".to_string()));
        }
        lo.re = lo.re.min(p.re);
        lo.im = lo.im.min(p.im);
        hi.re = hi.re.max(p.re);
        hi.im = hi.im.max(p.im);
    }
    Ok((lo, hi))
}

/// Number of ε-grid cells occupied by the point set.
pub fn box_count(points: &[Complex64], eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be > 0, got {eps}")));
    }
    let mut cells: HashSet<(i64, i64)> = HashSet::new();
    for p in points {
        cells.insert(((p.re / eps).floor() as i64, (p.im / eps).floor() as i64));
    }
    Ok(cells.len())
}

/// Box-counting dimension over an explicit list of scales: least-squares
/// slope of ln N(ε) versus ln(1/ε). Callers should densify polylines first
/// so that segments longer than the smallest scale do not skip cells.
pub fn box_counting_dimension(points: &[Complex64], scales: &[f64]) -> Result<DimensionEstimate> {
    if scales.len() < 2 {
        return Err(Error::param("need at least two scales".to_string()));
    }
    let mut counts = Vec::with_capacity(scales.len());
    let mut xs = Vec::with_capacity(scales.len());
    let mut ys = Vec::with_capacity(scales.len());
    for &eps in scales {
        let n = box_count(points, eps)?;
        if n == 0 {
            return Err(Error::numerical("empty box count".to_string()));
        }
        counts.push(n);
        xs.push(-(eps.ln()));
        ys.push((n as f64).ln());
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(DimensionEstimate {
        value: fit.slope.clamp(0.0, 2.0),
        stderr: fit.slope_std_error,
        r_squared: fit.r_squared,
        intercept: fit.intercept,
        scales_used: scales.to_vec(),
        counts,
    })
}

/// Box-counting dimension over a geometric scale ladder from `scale_min` to
/// `scale_max` with `n_scales` rungs. Requires a sample large enough for the
/// counts to mean anything (≥ 1000 points) and a scale range inside the
/// point cloud's extent.
pub fn box_dimension(
    points: &[Complex64],
    scale_min: f64,
    scale_max: f64,
    n_scales: usize,
) -> Result<DimensionEstimate> {
    if points.len() < 1000 {
        return Err(Error::param(format!(
            "box_dimension needs at least 1000 points, got {}",
            points.len()
        )));
    }
    if !(scale_min > 0.0 && scale_min < scale_max) || n_scales < 2 {
        return Err(Error::param(format!(
            "degenerate scale range ({scale_min}, {scale_max}) with {n_scales} scales"
        )));
    }
    let (lo, hi) = bounding_box(points)?;
    let diag = (hi - lo).norm();
    if scale_max > diag {
        return Err(Error::param(format!(
            "largest scale {scale_max} exceeds the point-cloud extent {diag}"
        )));
    }
    let ratio = scale_max / scale_min;
    let scales: Vec<f64> = (0..n_scales)
        .map(|k| scale_min * ratio.powf(k as f64 / (n_scales - 1) as f64))
        .collect();
    box_counting_dimension(points, &scales)
}

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (residual-based; zero for a perfect fit
    /// or when only two points are given).
    pub slope_std_error: f64,
    /// Coefficient of determination (1 when the y-values are constant).
    pub r_squared: f64,
}

/// Least squares fit of y against x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::param("need two same-length samples of size >= 2".to_string()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::numerical("degenerate fit: all x equal".to_string()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut sse = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - intercept - slope * x;
        sse += r * r;
    }
    let slope_std_error = if xs.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LinearFit { slope, intercept, slope_std_error, r_squared })
}

/// Uniform-grid nearest-neighbor index over a fixed point set. Queries use
/// an expanding ring scan with a geometric stopping bound, so typical cost
/// is O(1) per query for uniformly spread points and queries near the set.
pub struct NearestIndex {
    cell: f64,
    grid: HashMap<(i64, i64), Vec<Complex64>>,
    /// Bounding box of occupied cell keys: (kx_min, kx_max, ky_min, ky_max).
    key_bounds: (i64, i64, i64, i64),
}

/// Cell key coordinate, clamped so that key arithmetic cannot overflow even
/// for queries astronomically far from the indexed set.
fn key_coord(x: f64, cell: f64) -> i64 {
    (x / cell).floor().clamp(-4.0e15, 4.0e15) as i64
}

impl NearestIndex {
    /// Index a nonempty point set.
    pub fn build(points: &[Complex64]) -> Result<Self> {
        let (lo, hi) = bounding_box(points)?;
        let diag = (hi - lo).norm().max(1e-300);
        // Cell size targeting O(1) points per cell for uniformly spread sets.
        let cell = (diag / (points.len() as f64).sqrt()).max(diag * 1e-9);
        let mut grid: HashMap<(i64, i64), Vec<Complex64>> = HashMap::new();
        let mut bounds = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for p in points {
            let k = (key_coord(p.re, cell), key_coord(p.im, cell));
            bounds.0 = bounds.0.min(k.0);
            bounds.1 = bounds.1.max(k.0);
            bounds.2 = bounds.2.min(k.1);
            bounds.3 = bounds.3.max(k.1);
            grid.entry(k).or_default().push(*p);
        }
        Ok(NearestIndex { cell, grid, key_bounds: bounds })
    }

    /// Ring scan around `p`, clipped to the occupied-cell bounding box.
    /// Returns early with the running best as soon as it is ≤ `good_enough`,
    /// or once no unscanned cell can hold a point within `give_up_beyond`
    /// (cells at Chebyshev ring r+1 and beyond are at distance ≥ r·cell).
    /// Otherwise runs to the exact nearest distance.
    fn scan(&self, p: Complex64, good_enough: f64, give_up_beyond: f64) -> f64 {
        let (kx0, kx1, ky0, ky1) = self.key_bounds;
        let cx = key_coord(p.re, self.cell);
        let cy = key_coord(p.im, self.cell);
        // Rings closer than the box are empty; start where cells exist.
        let ring_start = 0
            .max(kx0 - cx)
            .max(cx - kx1)
            .max(ky0 - cy)
            .max(cy - ky1);
        let extent = (kx1 - kx0).max(ky1 - ky0);
        if ring_start > 2 * extent + 8 {
            // Far outside the set: ring bookkeeping buys nothing, scan all.
            return self
                .grid
                .values()
                .flatten()
                .map(|q| (q - p).norm())
                .fold(f64::INFINITY, f64::min);
        }
        // Past this ring every occupied cell has been scanned.
        let ring_end = (cx - kx0).max(kx1 - cx).max(cy - ky0).max(ky1 - cy);
        let mut best = f64::INFINITY;
        let mut ring = ring_start;
        loop {
            let xs = (cx - ring).max(kx0)..=(cx + ring).min(kx1);
            for kx in xs {
                let on_column = (kx - cx).abs() == ring;
                let ys: &[i64] = &[cy - ring, cy + ring];
                if on_column {
                    // Full clipped column.
                    for ky in (cy - ring).max(ky0)..=(cy + ring).min(ky1) {
                        if let Some(pts) = self.grid.get(&(kx, ky)) {
                            for q in pts {
                                best = best.min((q - p).norm());
                            }
                        }
                    }
                } else {
                    // Interior column: only the top and bottom ring rows.
                    for &ky in ys {
                        if ky >= ky0 && ky <= ky1 {
                            if let Some(pts) = self.grid.get(&(kx, ky)) {
                                for q in pts {
                                    best = best.min((q - p).norm());
                                }
                            }
                        }
                    }
                }
            }
            if best <= good_enough {
                return best;
            }
            if ring >= ring_end {
                return best; // everything occupied has been scanned
            }
            let unseen_at_least = ring as f64 * self.cell;
            if unseen_at_least > best {
                return best; // exact: nothing unscanned can beat it
            }
            if unseen_at_least > give_up_beyond && best > give_up_beyond {
                return best; // nothing lies within the cutoff
            }
            ring += 1;
        }
    }

    /// Exact distance from `p` to the nearest indexed point.
    pub fn nearest(&self, p: Complex64) -> f64 {
        self.scan(p, 0.0, f64::INFINITY)
    }

    /// Whether some indexed point lies within `eps` of `p`.
    pub fn within(&self, p: Complex64, eps: f64) -> bool {
        self.scan(p, eps, eps) <= eps
    }
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("hausdorff distance of an empty set".to_string()));
    }
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// Directed Hausdorff distance sup_{p∈a} dist(p, b).
pub fn directed_hausdorff(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::param("hausdorff distance of an empty set".to_string()));
    }
    let index = NearestIndex::build(b)?;
    Ok(a.iter().map(|p| index.nearest(*p)).fold(0.0, f64::max))
}

/// Fraction of `n_test` equispaced probe points on the real segment
/// `[segment.0, segment.1]` (endpoints included) that lie within `eps` of
/// the point set.
pub fn boundary_hit_fraction(
    points: &[Complex64],
    segment: (f64, f64),
    eps: f64,
    n_test: usize,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be > 0, got {eps}")));
    }
    if n_test < 2 || !(segment.0 < segment.1) {
        return Err(Error::param(format!(
            "need at least 2 probes on a nondegenerate segment, got {n_test} on {segment:?}"
        )));
    }
    let index = NearestIndex::build(points)?;
    let hits = (0..n_test)
        .filter(|&k| {
            let x = segment.0 + (segment.1 - segment.0) * k as f64 / (n_test - 1) as f64;
            index.within(Complex64::new(x, 0.0), eps)
        })
        .count();
    Ok(hits as f64 / n_test as f64)
}

/// Whether a path escapes the disk of the given radius and never returns:
/// the indices of points inside the disk form a prefix of the path and the
/// path ends outside.
pub fn is_transient(points: &[Complex64], radius: f64) -> bool {
    let first_out = match points.iter().position(|p| p.norm() > radius) {
        Some(k) => k,
        None => return false,
    };
    points[first_out..].iter().all(|p| p.norm() > radius)
}

/// Fraction of an ensemble of paths that escape the disk of radius
/// `radius` and never return within their simulated horizon. Meaningful
/// from ~30 paths up; any nonempty ensemble is accepted.
pub fn transience_stat(ensemble: &[Vec<Complex64>], radius: f64) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::param("transience fraction of an empty ensemble".to_string()));
    }
    if !(radius > 0.0) {
        return Err(Error::param(format!("radius must be > 0, got {radius}")));
    }
    let n = ensemble.iter().filter(|path| is_transient(path, radius)).count();
    Ok(n as f64 / ensemble.len() as f64)
}

/// Window of the fixed probe grid used by [`range_summaries`]: traces are
/// expected scale-normalized to unit size near the origin, so the grid
/// spans [−2, 2] × (0, 2] with 40×25 midpoint probes.
const COVERAGE_X: (f64, f64) = (-2.0, 2.0);
const COVERAGE_Y: (f64, f64) = (0.0, 2.0);
const COVERAGE_NX: usize = 40;
const COVERAGE_NY: usize = 25;
/// Probe segment and count for the boundary-fraction summary.
const BOUNDARY_SEGMENT: (f64, f64) = (-1.0, 0.0);
const BOUNDARY_PROBES: usize = 200;

/// Scalar summaries of one path's range, used for distributional
/// comparisons. All three are computed at the stored `eps`, which doubles
/// as the normalization tag: only summaries computed at the same eps are
/// comparable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSummaries {
    pub eps: f64,
    /// Area of the ε-box cover of the range (occupied boxes × ε²).
    pub neighborhood_area: f64,
    /// Fraction of [−1, 0] within ε of the range.
    pub boundary_fraction: f64,
    /// Fraction of the fixed probe grid within ε of the range.
    pub grid_coverage: f64,
}

/// Compute the three range summaries of a path at resolution `eps`.
pub fn range_summaries(points: &[Complex64], eps: f64) -> Result<RangeSummaries> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be > 0, got {eps}")));
    }
    let neighborhood_area = box_count(points, eps)? as f64 * eps * eps;
    let boundary_fraction = boundary_hit_fraction(points, BOUNDARY_SEGMENT, eps, BOUNDARY_PROBES)?;
    let index = NearestIndex::build(points)?;
    let mut covered = 0usize;
    for i in 0..COVERAGE_NX {
        let x = COVERAGE_X.0
            + (COVERAGE_X.1 - COVERAGE_X.0) * (i as f64 + 0.5) / COVERAGE_NX as f64;
        for j in 0..COVERAGE_NY {
            let y = COVERAGE_Y.0
                + (COVERAGE_Y.1 - COVERAGE_Y.0) * (j as f64 + 0.5) / COVERAGE_NY as f64;
            if index.within(Complex64::new(x, y), eps) {
                covered += 1;
            }
        }
    }
    let grid_coverage = covered as f64 / (COVERAGE_NX * COVERAGE_NY) as f64;
    Ok(RangeSummaries { eps, neighborhood_area, boundary_fraction, grid_coverage })
}

/// One summary's two-sample comparison inside an equivalence report.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryComparison {
    pub name: &'static str,
    /// Two-sample KS statistic between the ensembles.
    pub statistic: f64,
    /// Critical value at the Bonferroni-adjusted level.
    pub critical: f64,
    pub passes: bool,
}

/// Verdict of a range-equivalence test between two ensembles.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// Family significance level.
    pub alpha: f64,
    /// Per-summary level after the Bonferroni split.
    pub per_summary_alpha: f64,
    pub comparisons: Vec<SummaryComparison>,
    /// True when every summary's KS statistic is below its critical value.
    pub passes: bool,
}

/// Two-sample KS comparison of each range summary between two ensembles,
/// at family significance `alpha` with a Bonferroni split across the three
/// summaries. Ensembles must share the normalization eps. Symmetric in its
/// two ensemble arguments.
pub fn range_equivalence_stat(
    a: &[RangeSummaries],
    b: &[RangeSummaries],
    alpha: f64,
) -> Result<EquivalenceReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("range equivalence needs two nonempty ensembles".to_string()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("significance must be in (0,1), got {alpha}")));
    }
    let eps = a[0].eps;
    if a.iter().chain(b).any(|s| s.eps != eps) {
        return Err(Error::param(
            "mismatched normalization: ensembles computed at different eps".to_string(),
        ));
    }
    #[allow(clippy::type_complexity)]
    let pulls: [(&'static str, fn(&RangeSummaries) -> f64); 3] = [
        ("neighborhood_area", |s| s.neighborhood_area),
        ("boundary_fraction", |s| s.boundary_fraction),
        ("grid_coverage", |s| s.grid_coverage),
    ];
    let per_summary_alpha = alpha / pulls.len() as f64;
    let critical = ks_two_sample_critical(a.len(), b.len(), per_summary_alpha);
    let comparisons: Vec<SummaryComparison> = pulls
        .iter()
        .map(|(name, pull)| {
            let xs: Vec<f64> = a.iter().map(pull).collect();
            let ys: Vec<f64> = b.iter().map(pull).collect();
            let statistic = ks_two_sample(&xs, &ys);
            SummaryComparison { name, statistic, critical, passes: statistic < critical }
        })
        .collect();
    let passes = comparisons.iter().all(|c| c.passes);
    Ok(EquivalenceReport { alpha, per_summary_alpha, comparisons, passes })
}

/// First-visit index of each target: the smallest point index within `eps`
/// of the target, or None if the path never comes that close.
pub fn visit_order(
    points: &[Complex64],
    targets: &[Complex64],
    eps: f64,
) -> Result<Vec<Option<usize>>> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be > 0, got {eps}")));
    }
    let mut first: Vec<Option<usize>> = vec![None; targets.len()];
    let mut remaining = targets.len();
    for (k, p) in points.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        for (t, slot) in targets.iter().zip(first.iter_mut()) {
            if slot.is_none() && (p - t).norm() <= eps {
                *slot = Some(k);
                remaining -= 1;
            }
        }
    }
    Ok(first)
}

/// Kendall rank correlation between two visit orders, restricted to targets
/// visited in both. None when fewer than two targets are common.
pub fn visit_order_tau(a: &[Option<usize>], b: &[Option<usize>]) -> Result<Option<f64>> {
    if a.len() != b.len() {
        return Err(Error::param("visit orders cover different targets".to_string()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (va, vb) in a.iter().zip(b) {
        if let (Some(ia), Some(ib)) = (va, vb) {
            xs.push(*ia as f64);
            ys.push(*ib as f64);
        }
    }
    if xs.len() < 2 {
        return Ok(None);
    }
    kendall_tau(&xs, &ys).map(Some)
}

/// Two-sample Kolmogorov–Smirnov statistic D = sup |F_a − F_b|.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut sa: Vec<f64> = a.to_vec();
    let mut sb: Vec<f64> = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        let fa = i as f64 / sa.len() as f64;
        let fb = j as f64 / sb.len() as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Large-sample critical value for the two-sample KS test at level `alpha`:
/// c(α)·√((n + m)/(n·m)) with c(α) = √(−ln(α/2)/2).
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Kendall rank correlation (tau-a), computed by the O(n²) pair scan.
/// Tied pairs contribute zero.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::param("need two same-length samples of size >= 2".to_string()));
    }
    let n = x.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            // Ordering casts to −1/0/1, with 0 for ties.
            let cx = (x[i] - x[j]).partial_cmp(&0.0).unwrap() as i64;
            let cy = (y[i] - y[j]).partial_cmp(&0.0).unwrap() as i64;
            s += cx * cy;
        }
    }
    Ok(s as f64 / (n * (n - 1) / 2) as f64)
}

/// Median of a sample (average of middle pair for even length).
pub fn median(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::param("median of empty sample".to_string()));
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Ok(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}
