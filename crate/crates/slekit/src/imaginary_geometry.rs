//! Boundary-data bookkeeping for Gaussian-free-field couplings of SLE:
//! piecewise-constant boundary values with a winding constant, transport of
//! that data under the toolkit's conformal primitives, angle ↔ force-point
//! conversion for flow lines, interaction classification of flow-line pairs,
//! and the conditional boundary data after a path segment has been drawn.
//!
//! Values are stored in λ-units (multiples of λ = π/√κ) throughout: every
//! formula in this module is linear in λ, so λ-units remove a redundant
//! factor and make the examples integers or simple rationals.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// χ, λ, λ′ for a κ in the flow-line range. Accepts the closed right
/// endpoint κ = 4 (where χ = 0 and λ = λ′).
pub fn derived_constants(kappa: f64) -> Result<(f64, f64, f64)> {
    if !(kappa > 0.0 && kappa <= 4.0) {
        return Err(Error::param(format!(
            "flow-line constants need kappa in (0, 4], got {kappa}"
        )));
    }
    let sqrt_k = kappa.sqrt();
    let chi = 2.0 / sqrt_k - sqrt_k / 2.0;
    let lambda = PI / sqrt_k;
    let lambda_prime = PI / (16.0 / kappa).sqrt();
    Ok((chi, lambda, lambda_prime))
}

/// Critical angle πκ/(4−κ): the largest opening angle a light cone can have.
pub fn critical_angle(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 4.0) {
        return Err(Error::param(format!(
            "critical angle needs kappa in (0, 4), got {kappa}"
        )));
    }
    Ok(PI * kappa / (4.0 - kappa))
}

/// One boundary interval carrying a constant value in λ-units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryInterval {
    /// Left endpoint; may be −∞.
    pub left: f64,
    /// Right endpoint; may be +∞.
    pub right: f64,
    /// Boundary value in λ-units.
    pub value: f64,
}

/// Piecewise-constant boundary data on the real line, in λ-units, together
/// with the winding constant χ used when the data is read in a rotated
/// chart. Stored normalized: empty intervals dropped, adjacent intervals
/// with equal values merged.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub intervals: Vec<BoundaryInterval>,
    pub winding_chi: f64,
}

impl BoundaryData {
    /// Validate and normalize: the intervals must partition the line
    /// (first left = −∞, last right = +∞, consecutive endpoints shared,
    /// weakly increasing), with finite values.
    pub fn new(intervals: Vec<BoundaryInterval>, winding_chi: f64) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::param("boundary data needs at least one interval".to_string()));
        }
        if !winding_chi.is_finite() {
            return Err(Error::param(format!("winding constant must be finite, got {winding_chi}")));
        }
        if intervals[0].left != f64::NEG_INFINITY {
            return Err(Error::param("first interval must start at −∞".to_string()));
        }
        if intervals[intervals.len() - 1].right != f64::INFINITY {
            return Err(Error::param("last interval must end at +∞".to_string()));
        }
        for (k, iv) in intervals.iter().enumerate() {
            if !(iv.left <= iv.right) {
                return Err(Error::param(format!(
                    "interval {k} has decreasing endpoints ({}, {})",
                    iv.left, iv.right
                )));
            }
            if !iv.value.is_finite() {
                return Err(Error::param(format!("interval {k} has non-finite value")));
            }
            if k > 0 && intervals[k - 1].right != iv.left {
                return Err(Error::param(format!(
                    "intervals {} and {k} do not share an endpoint",
                    k - 1
                )));
            }
        }
        let mut normalized: Vec<BoundaryInterval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            if iv.left == iv.right {
                continue; // empty interval carries no data
            }
            match normalized.last_mut() {
                Some(prev) if prev.value == iv.value => prev.right = iv.right,
                _ => normalized.push(iv),
            }
        }
        Ok(BoundaryData { intervals: normalized, winding_chi })
    }

    /// The value at a boundary point (right-continuous convention: each
    /// interval is treated as (left, right]).
    pub fn value_at(&self, x: f64) -> f64 {
        for iv in &self.intervals {
            if x <= iv.right {
                return iv.value;
            }
        }
        self.intervals[self.intervals.len() - 1].value
    }
}

/// A primitive conformal map of the upper half-plane, with computable
/// action on the boundary. All four act with real positive derivative on
/// the real axis (away from slit bases), so the χ-winding correction they
/// induce on boundary values vanishes; rotating charts enter the toolkit
/// only through explicit angle offsets handled algebraically by
/// [`force_points_for_ambient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapPrimitive {
    /// z ↦ z + c.
    Translate(f64),
    /// z ↦ r·z with r > 0.
    Scale(f64),
    /// One mapping-out step of capacity `dt` rooted at `w`:
    /// z ↦ w + √((z−w)² + 4dt). Expands |x−w| on the boundary.
    ForwardSlit { w: f64, dt: f64 },
    /// One slit-growing step of capacity `dt` rooted at `w`:
    /// z ↦ w + √((z−w)² − 4dt). Boundary points with |x−w| ≤ 2√dt are
    /// swallowed by the slit and collapse to `w`.
    InverseSlit { w: f64, dt: f64 },
}

impl MapPrimitive {
    fn validate(&self) -> Result<()> {
        match *self {
            MapPrimitive::Translate(c) if c.is_finite() => Ok(()),
            MapPrimitive::Scale(r) if r > 0.0 && r.is_finite() => Ok(()),
            MapPrimitive::ForwardSlit { w, dt } | MapPrimitive::InverseSlit { w, dt }
                if w.is_finite() && dt >= 0.0 && dt.is_finite() =>
            {
                Ok(())
            }
            _ => Err(Error::param(format!("invalid map primitive {self:?}"))),
        }
    }

    /// Action on a boundary point (±∞ are fixed points of every primitive).
    pub fn apply_boundary(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return x;
        }
        match *self {
            MapPrimitive::Translate(c) => x + c,
            MapPrimitive::Scale(r) => r * x,
            MapPrimitive::ForwardSlit { w, dt } => {
                let d = x - w;
                w + d.signum() * (d * d + 4.0 * dt).sqrt()
            }
            MapPrimitive::InverseSlit { w, dt } => {
                let d = x - w;
                if d * d <= 4.0 * dt {
                    w
                } else {
                    w + d.signum() * (d * d - 4.0 * dt).sqrt()
                }
            }
        }
    }
}

/// Transport boundary data through a composition of primitives, applied in
/// list order (the first element acts first). Interval endpoints move by
/// the boundary action; values are unchanged because every primitive has
/// real positive boundary derivative, making the winding term −χ·arg φ′
/// vanish interval-wise. Endpoints swallowed by an [`MapPrimitive::InverseSlit`]
/// collapse to the slit base and the partition is re-normalized.
pub fn coordinate_change(bd: &BoundaryData, phi: &[MapPrimitive]) -> Result<BoundaryData> {
    for p in phi {
        p.validate()?;
    }
    let transport = |mut x: f64| -> f64 {
        for p in phi {
            x = p.apply_boundary(x);
        }
        x
    };
    let intervals = bd
        .intervals
        .iter()
        .map(|iv| BoundaryInterval {
            left: transport(iv.left),
            right: transport(iv.right),
            value: iv.value,
        })
        .collect();
    BoundaryData::new(intervals, bd.winding_chi)
}

/// Solve the flank equations for a path of angle `theta` drawn in ambient
/// boundary data (`v_left`, `v_right`) given in λ-units:
///
///   −λ(1+ρ_left) = λ·v_left + θχ,    λ(1+ρ_right) = λ·v_right + θχ,
///
/// i.e. ρ_left = −1 − v_left − θχ/λ and ρ_right = v_right + θχ/λ − 1.
/// Refuses weights ≤ −2, where the segment cannot be drawn.
pub fn force_points_for_ambient(
    kappa: f64,
    v_left: f64,
    v_right: f64,
    theta: f64,
) -> Result<(f64, f64)> {
    let (chi, lambda, _) = derived_constants(kappa)?;
    if !(v_left.is_finite() && v_right.is_finite() && theta.is_finite()) {
        return Err(Error::param(format!(
            "ambient values and angle must be finite, got ({v_left}, {v_right}, {theta})"
        )));
    }
    let twist = theta * chi / lambda;
    let rho_left = -1.0 - v_left - twist;
    let rho_right = v_right + twist - 1.0;
    if rho_left <= -2.0 || rho_right <= -2.0 {
        return Err(Error::param(format!(
            "angle {theta} in ambient ({v_left}λ, {v_right}λ) would need weights \
             ({rho_left}, {rho_right}); at or below −2 the segment would hit its \
             continuation threshold immediately"
        )));
    }
    Ok((rho_left, rho_right))
}

/// Force-point weights for a flow line of angle `theta` in the standard
/// one-sided ambient data (−λ, λ(1+ρ)). At θ = 0 this returns (0, ρ).
pub fn flow_line_force_points(kappa: f64, rho: f64, theta: f64) -> Result<(f64, f64)> {
    if !rho.is_finite() {
        return Err(Error::param(format!("rho must be finite, got {rho}")));
    }
    force_points_for_ambient(kappa, -1.0, 1.0 + rho, theta)
}

/// Boundary values in λ-units immediately left and right of a flow line of
/// angle `theta`, in the line's own chart: (−1 − θχ/λ, 1 − θχ/λ).
pub fn angle_line_flank_values(kappa: f64, theta: f64) -> Result<(f64, f64)> {
    let (chi, lambda, _) = derived_constants(kappa)?;
    if !theta.is_finite() {
        return Err(Error::param(format!("angle must be finite, got {theta}")));
    }
    let twist = theta * chi / lambda;
    Ok((-1.0 - twist, 1.0 - twist))
}

/// How two flow lines of the same field interact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionOutcome {
    /// The left-seeded line stays to the left of (possibly bouncing off)
    /// the other.
    StaysLeft,
    /// The lines merge upon intersecting and never separate.
    Merge,
    /// The left-seeded line crosses the other exactly once and does not
    /// cross back.
    CrossOnce,
}

/// Classify the interaction of a flow line of angle `theta1` seeded at x₁
/// with one of angle `theta2` seeded at x₂. `seeds_ordered` says whether
/// x₁ ≤ x₂; the outcome always describes the left-seeded line relative to
/// the right-seeded one. With ordered seeds: θ₁ > θ₂ stays left, equal
/// angles merge, θ₂ − π < θ₁ < θ₂ crosses once; θ₁ ≤ θ₂ − π is outside
/// the classified range and is reported as an error, as is an angle gap
/// of 2π or more.
pub fn interaction(theta1: f64, theta2: f64, seeds_ordered: bool) -> Result<InteractionOutcome> {
    if !(theta1.is_finite() && theta2.is_finite()) {
        return Err(Error::param(format!("angles must be finite, got ({theta1}, {theta2})")));
    }
    if (theta1 - theta2).abs() >= 2.0 * PI {
        return Err(Error::param(format!(
            "angle gap {} is 2π or more; the classification does not apply",
            (theta1 - theta2).abs()
        )));
    }
    let (a, b) = if seeds_ordered { (theta1, theta2) } else { (theta2, theta1) };
    if a > b {
        Ok(InteractionOutcome::StaysLeft)
    } else if a == b {
        Ok(InteractionOutcome::Merge)
    } else if a > b - PI {
        Ok(InteractionOutcome::CrossOnce)
    } else {
        Err(Error::param(format!(
            "left-seeded angle is {} below the other; behavior past a π gap is unclassified",
            b - a
        )))
    }
}

/// Boundary data conditioned on a drawn initial segment, observed at a time
/// when the driving function sits at `w_tau` and the force point at `v_tau`:
/// −λ left of the path base, λ on the swallowed stretch (w, v], and the
/// original λ(1+ρ) beyond the force point.
pub fn conditional_boundary_data(
    kappa: f64,
    rho: f64,
    w_tau: f64,
    v_tau: f64,
) -> Result<BoundaryData> {
    let (chi, _, _) = derived_constants(kappa)?;
    if !rho.is_finite() {
        return Err(Error::param(format!("rho must be finite, got {rho}")));
    }
    if !(w_tau <= v_tau) {
        return Err(Error::param(format!(
            "need w_tau ≤ v_tau, got ({w_tau}, {v_tau})"
        )));
    }
    BoundaryData::new(
        vec![
            BoundaryInterval { left: f64::NEG_INFINITY, right: w_tau, value: -1.0 },
            BoundaryInterval { left: w_tau, right: v_tau, value: 1.0 },
            BoundaryInterval { left: v_tau, right: f64::INFINITY, value: 1.0 + rho },
        ],
        chi,
    )
}
