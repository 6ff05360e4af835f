//! SLE_κ(ρ) processes: derived constants, phase classification, and the
//! driving-function samplers that feed the Loewner solver.
//!
//! The driving pair (W, V) of a one-sided SLE_κ(ρ) with force point at 0⁺ is
//! assembled from a Bessel path X of dimension δ = 1 + 2(ρ+2)/κ started at 0:
//!
//!   V_t = (2/√κ) · p.v.∫₀ᵗ 1/X_s ds,   W_t = V_t − √κ · X_t.
//!
//! For ρ > −2 (δ > 1) the principal value is a plain integral and V is
//! nondecreasing; for ρ < −2 (δ < 1) the compensation makes V oscillate and
//! the force point leaves the boundary — the regime that produces light
//! cones. The construction is valid for every ρ > −2 − κ/2 except ρ = −2,
//! where δ = 1 and the inversion identity behind U degenerates.

use crate::bessel;
use crate::error::{Error, Result};
use crate::loewner::{self, Trace};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Derived constants for a (κ, ρ) pair.
#[derive(Debug, Clone, Copy)]
pub struct PhaseParams {
    pub kappa: f64,
    pub rho: f64,
    /// Bessel dimension δ = 1 + 2(ρ+2)/κ of the driving pair.
    pub delta: f64,
    /// χ = 2/√κ − √κ/2.
    pub chi: f64,
    /// λ = π/√κ.
    pub lambda: f64,
    /// λ′ = π/√κ′ with κ′ = 16/κ; equals λ − (π/2)χ.
    pub lambda_prime: f64,
    /// Opening angle θ_ρ = π(ρ+2)/(κ/2−2); absent at κ = 4.
    pub theta_rho: Option<f64>,
    /// Critical angle θ_c = πκ/(4−κ); absent for κ ≥ 4.
    pub theta_c: Option<f64>,
    /// Light-cone curve dimension (κ−2(2+ρ))(κ+2(6+ρ))/(8κ). Meaningful in
    /// and at the edges of the light-cone regime; reduces to 1+κ/8 at ρ = −2
    /// and to 1+2/κ at ρ = κ/2−4.
    pub dimension: f64,
}

/// All derived constants for a parameter pair. Any κ > 0 is accepted;
/// the angle fields are present only where their formulas are defined.
pub fn params(kappa: f64, rho: f64) -> Result<PhaseParams> {
    if !(kappa > 0.0) || !rho.is_finite() {
        return Err(Error::param(format!(
            "need kappa > 0 and finite rho, got ({kappa}, {rho})"
        )));
    }
    let sqrt_k = kappa.sqrt();
    Ok(PhaseParams {
        kappa,
        rho,
        delta: 1.0 + 2.0 * (rho + 2.0) / kappa,
        chi: 2.0 / sqrt_k - sqrt_k / 2.0,
        lambda: PI / sqrt_k,
        lambda_prime: PI / (16.0 / kappa).sqrt(),
        theta_rho: if kappa == 4.0 { None } else { Some(theta_of_rho(kappa, rho)?) },
        theta_c: if kappa < 4.0 { Some(PI * kappa / (4.0 - kappa)) } else { None },
        dimension: lightcone_dimension(kappa, rho),
    })
}

/// Light-cone curve dimension formula (κ−2(2+ρ))(κ+2(6+ρ))/(8κ).
pub fn lightcone_dimension(kappa: f64, rho: f64) -> f64 {
    (kappa - 2.0 * (2.0 + rho)) * (kappa + 2.0 * (6.0 + rho)) / (8.0 * kappa)
}

/// Opening angle θ = π(ρ+2)/(κ/2−2) of the light cone matching SLE_κ(ρ).
pub fn theta_of_rho(kappa: f64, rho: f64) -> Result<f64> {
    if !(kappa > 0.0) || kappa == 4.0 {
        return Err(Error::param(format!(
            "angle formula needs kappa > 0, kappa != 4, got {kappa}"
        )));
    }
    Ok(PI * (rho + 2.0) / (kappa / 2.0 - 2.0))
}

/// Inverse of [`theta_of_rho`]: ρ = (θ/π)(κ/2−2) − 2.
pub fn rho_of_theta(kappa: f64, theta: f64) -> Result<f64> {
    if !(kappa > 0.0) || kappa == 4.0 {
        return Err(Error::param(format!(
            "angle formula needs kappa > 0, kappa != 4, got {kappa}"
        )));
    }
    Ok(theta / PI * (kappa / 2.0 - 2.0) - 2.0)
}

/// Qualitative behavior of the SLE_κ(ρ) trace, by (κ, ρ) region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// δ ≤ 0: the driving Bessel dimension is nonpositive; no process.
    NotDefined,
    /// ρ ≤ κ/2−4 (only reachable for κ > 2): a counterflow-type trunk
    /// decorated with loops.
    TrunkPlusLoops,
    /// ρ ∈ ((−2−κ/2)∨(κ/2−4), −2): the trace fills a light cone; the force
    /// point leaves the boundary.
    LightCone,
    /// ρ = −2: the trace runs along the boundary.
    BoundaryTracing,
    /// ρ ∈ (−2, κ/2−2): simple curve that touches the boundary.
    BoundaryHitting,
    /// ρ ≥ κ/2−2: simple curve avoiding the boundary.
    BoundaryAvoiding,
}

impl Phase {
    /// Snake-case label used in serialized output.
    pub fn label(self) -> &'static str {
        match self {
            Phase::NotDefined => "not_defined",
            Phase::TrunkPlusLoops => "trunk_plus_loops",
            Phase::LightCone => "light_cone",
            Phase::BoundaryTracing => "boundary_tracing",
            Phase::BoundaryHitting => "boundary_hitting",
            Phase::BoundaryAvoiding => "boundary_avoiding",
        }
    }

    /// Whether the trace is a simple curve (no self-intersections).
    pub fn is_simple(self) -> bool {
        matches!(
            self,
            Phase::BoundaryTracing | Phase::BoundaryHitting | Phase::BoundaryAvoiding
        )
    }

    /// Whether the process is reversible (metadata; not verified here).
    pub fn is_reversible(self) -> bool {
        self.is_simple()
    }
}

/// Classify a (κ, ρ) pair. Total for κ > 0; the TrunkPlusLoops interval
/// (−2−κ/2, κ/2−4] is empty when κ ≤ 2, which merges everything below −2
/// into the light-cone phase there.
pub fn classify_phase(kappa: f64, rho: f64) -> Result<Phase> {
    if !(kappa > 0.0) || !rho.is_finite() {
        return Err(Error::param(format!(
            "need kappa > 0 and finite rho, got ({kappa}, {rho})"
        )));
    }
    Ok(if rho <= -2.0 - kappa / 2.0 {
        Phase::NotDefined
    } else if rho < -2.0 {
        if rho <= kappa / 2.0 - 4.0 {
            Phase::TrunkPlusLoops
        } else {
            Phase::LightCone
        }
    } else if rho == -2.0 {
        Phase::BoundaryTracing
    } else if rho < kappa / 2.0 - 2.0 {
        Phase::BoundaryHitting
    } else {
        Phase::BoundaryAvoiding
    })
}

/// Trace dimension for the phase of (κ, ρ): the light-cone formula inside the
/// light cone, 1+2/κ for the trunk regime, 1 for boundary tracing, 1+κ/8 for
/// the simple-curve phases, and none where the process is undefined.
pub fn phase_dimension(kappa: f64, rho: f64) -> Result<Option<f64>> {
    Ok(match classify_phase(kappa, rho)? {
        Phase::NotDefined => None,
        Phase::TrunkPlusLoops => Some(1.0 + 2.0 / kappa),
        Phase::LightCone => Some(lightcone_dimension(kappa, rho)),
        Phase::BoundaryTracing => Some(1.0),
        Phase::BoundaryHitting | Phase::BoundaryAvoiding => Some(1.0 + kappa / 8.0),
    })
}

/// Discretized Loewner driving pair (W, V) of a one-sided SLE_κ(ρ) with
/// force point at 0⁺.
#[derive(Debug, Clone)]
pub struct DrivingPair {
    pub dt: f64,
    /// Driving function W, origin-seeded.
    pub w: Vec<f64>,
    /// Force-point process V ≥ W.
    pub v: Vec<f64>,
    pub kappa: f64,
    pub rho: f64,
}

impl DrivingPair {
    /// Smallest gap V − W along the path. Gaps below 10⁻⁸ times the
    /// diffusive scale √horizon count as collisions for diagnostics.
    pub fn min_gap(&self) -> f64 {
        self.w
            .iter()
            .zip(&self.v)
            .map(|(w, v)| v - w)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Sample the driving pair of SLE_κ(ρ) on a uniform capacity grid up to
/// `horizon` (rounded to whole steps).
///
/// Requires a defined phase (ρ > −2−κ/2) and ρ away from −2, where the
/// principal-value reconstruction degenerates.
pub fn sample_driving_pair(
    kappa: f64,
    rho: f64,
    horizon: f64,
    dt: f64,
    rng: &mut impl Rng,
) -> Result<DrivingPair> {
    if !(kappa > 0.0) {
        return Err(Error::param(format!("kappa must be > 0, got {kappa}")));
    }
    if classify_phase(kappa, rho)? == Phase::NotDefined {
        return Err(Error::param(format!(
            "rho = {rho} is at or below the definability bound −2−κ/2 = {}",
            -2.0 - kappa / 2.0
        )));
    }
    if (rho + 2.0).abs() < 1e-6 {
        return Err(Error::param(
            "rho = −2 is excluded: the driving construction degenerates there".to_string(),
        ));
    }
    let steps = steps_for(horizon, dt)?;
    let delta = 1.0 + 2.0 * (rho + 2.0) / kappa;
    let path = bessel::sample_bes_with_driver(delta, 0.0, dt, steps, rng)?;
    let sqrt_k = kappa.sqrt();
    let scale = 2.0 / sqrt_k;
    let v: Vec<f64> = path.u.iter().map(|u| scale * u).collect();
    let w: Vec<f64> = v.iter().zip(&path.x).map(|(v, x)| v - sqrt_k * x).collect();
    Ok(DrivingPair { dt, w, v, kappa, rho })
}

fn steps_for(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::param(format!(
            "need horizon > 0 and dt > 0, got ({horizon}, {dt})"
        )));
    }
    let steps = (horizon / dt).round() as usize;
    if steps == 0 {
        return Err(Error::param(format!("horizon {horizon} shorter than one step {dt}")));
    }
    Ok(steps)
}

/// Driving function with one force point on each side, for flow-line
/// segments. Both weights must exceed −2 (the semimartingale regime).
#[derive(Debug, Clone)]
pub struct MultiForceDriving {
    pub dt: f64,
    pub w: Vec<f64>,
    pub v_left: Vec<f64>,
    pub v_right: Vec<f64>,
    pub kappa: f64,
    pub rho_left: f64,
    pub rho_right: f64,
}

impl MultiForceDriving {
    /// Smallest gap between W and either force point along the path.
    pub fn min_gap(&self) -> f64 {
        let mut min = f64::INFINITY;
        for k in 0..self.w.len() {
            min = min.min(self.w[k] - self.v_left[k]);
            min = min.min(self.v_right[k] - self.w[k]);
        }
        min
    }
}

/// Euler scheme for dW = √κ dB + [ρ_L/(W−V_L) + ρ_R/(W−V_R)] dt with
/// dV_i = 2/(V_i−W) dt, preserving the ordering V_L ≤ W ≤ V_R.
///
/// The singular drifts are tamed by flooring gaps at half a noise standard
/// deviation inside the drift denominators, and order violations after a step
/// are resolved by mirror reflection — the discrete analogue of the
/// instantaneous reflection the continuum process performs at collisions.
/// The taming biases behavior only within an O(√dt) boundary layer.
#[allow(clippy::too_many_arguments)]
pub fn sample_multi_force_driving(
    kappa: f64,
    rho_left: f64,
    rho_right: f64,
    x_left: f64,
    x_right: f64,
    horizon: f64,
    dt: f64,
    rng: &mut impl Rng,
) -> Result<MultiForceDriving> {
    if !(kappa > 0.0) {
        return Err(Error::param(format!("kappa must be > 0, got {kappa}")));
    }
    if !(rho_left > -2.0) || !(rho_right > -2.0) {
        return Err(Error::param(format!(
            "both weights must exceed −2 (got {rho_left}, {rho_right}); \
             at or below −2 the segment cannot be continued"
        )));
    }
    if !(x_left <= 0.0 && 0.0 <= x_right) {
        return Err(Error::param(format!(
            "force points must straddle the seed: x_left = {x_left}, x_right = {x_right}"
        )));
    }
    let steps = steps_for(horizon, dt)?;
    let sigma = (kappa * dt).sqrt();
    let floor = 0.5 * sigma;
    let mut w = Vec::with_capacity(steps + 1);
    let mut vl = Vec::with_capacity(steps + 1);
    let mut vr = Vec::with_capacity(steps + 1);
    w.push(0.0);
    vl.push(x_left);
    vr.push(x_right);
    let (mut wk, mut vlk, mut vrk) = (0.0f64, x_left, x_right);
    for _ in 0..steps {
        let gl = (wk - vlk).max(floor);
        let gr = (vrk - wk).max(floor);
        let xi: f64 = rng.sample(StandardNormal);
        let mut wn = wk + (rho_left / gl - rho_right / gr) * dt + sigma * xi;
        let vln = vlk - 2.0 * dt / gl;
        let vrn = vrk + 2.0 * dt / gr;
        if wn < vln {
            wn = 2.0 * vln - wn;
        }
        if wn > vrn {
            wn = 2.0 * vrn - wn;
        }
        wn = wn.clamp(vln, vrn);
        wk = wn;
        vlk = vln;
        vrk = vrn;
        w.push(wk);
        vl.push(vlk);
        vr.push(vrk);
    }
    Ok(MultiForceDriving {
        dt,
        w,
        v_left: vl,
        v_right: vr,
        kappa,
        rho_left,
        rho_right,
    })
}

/// Simulate an SLE_κ(ρ) trace: driving pair plus Loewner trace extraction,
/// with (κ, ρ) recorded in the trace metadata.
pub fn sample_sle_trace(
    kappa: f64,
    rho: f64,
    horizon: f64,
    dt: f64,
    rng: &mut impl Rng,
) -> Result<Trace> {
    let pair = sample_driving_pair(kappa, rho, horizon, dt, rng)?;
    let mut trace = loewner::solve_forward(&pair.w, dt)?;
    trace.kappa = Some(kappa);
    trace.rho = Some(rho);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{ks_two_sample, ks_two_sample_critical};
    use crate::rng::stream;

    #[test]
    fn derived_constants_reference_points() {
        let p = params(4.0, 0.0).unwrap();
        assert_eq!(p.chi, 0.0);
        assert!(p.theta_rho.is_none() && p.theta_c.is_none());
        let p = params(3.0, -2.0).unwrap();
        assert_eq!(p.delta, 1.0);
        assert!((p.dimension - 1.375).abs() < 1e-12);
        let p = params(3.0, -2.5).unwrap();
        assert!((p.theta_rho.unwrap() - PI).abs() < 1e-14);
        assert!((p.dimension - 5.0 / 3.0).abs() < 1e-12);
        let p = params(2.0, 0.0).unwrap();
        assert!((p.theta_c.unwrap() - PI).abs() < 1e-14);
        let p = params(1.0, 0.0).unwrap();
        assert!((p.chi - 1.5).abs() < 1e-14);
    }

    #[test]
    fn lambda_identity_on_grid() {
        for kappa in [0.3, 0.5, 1.0, 1.7, 2.0, 2.9, 3.5, 3.99, 4.0, 5.0, 8.0] {
            let p = params(kappa, 0.0).unwrap();
            let expect = p.lambda - (PI / 2.0) * p.chi;
            assert!(
                (p.lambda_prime - expect).abs() < 1e-12 * p.lambda_prime.abs(),
                "kappa = {kappa}: {} vs {expect}",
                p.lambda_prime
            );
        }
    }

    #[test]
    fn dimension_formula_reduces_at_phase_edges() {
        for kappa in [0.5f64, 1.0, 2.0, 2.5, 3.0, 3.9] {
            let at_tracing = lightcone_dimension(kappa, -2.0);
            assert!(
                (at_tracing - (1.0 + kappa / 8.0)).abs() < 1e-12,
                "kappa {kappa}: {at_tracing}"
            );
            let at_trunk = lightcone_dimension(kappa, kappa / 2.0 - 4.0);
            assert!(
                (at_trunk - (1.0 + 2.0 / kappa)).abs() < 1e-12,
                "kappa {kappa}: {at_trunk}"
            );
        }
    }

    #[test]
    fn phase_table_reference_rows() {
        use Phase::*;
        let cases = [
            (3.0, -3.6, NotDefined),
            (3.0, -3.5, NotDefined), // closed at the definability bound
            (3.0, -3.0, TrunkPlusLoops),
            (3.0, -2.5, TrunkPlusLoops), // closed right end of the trunk interval
            (3.0, -2.2, LightCone),
            (3.0, -2.0, BoundaryTracing),
            (3.0, -1.0, BoundaryHitting),
            (3.0, -0.5, BoundaryAvoiding), // boundary ρ = κ/2−2 avoids
            (3.0, 0.0, BoundaryAvoiding),
            (1.5, -2.5, LightCone), // κ ≤ 2: trunk interval is empty
            (2.0, -2.9, LightCone),
            (1.0, -2.45, LightCone),
        ];
        for (kappa, rho, want) in cases {
            let got = classify_phase(kappa, rho).unwrap();
            assert_eq!(got, want, "({kappa}, {rho})");
        }
    }

    #[test]
    fn phase_is_defined_exactly_when_delta_positive() {
        for kappa in [0.7, 1.5, 2.0, 3.0, 3.9, 5.0] {
            for rho in [-5.0, -3.75, -3.5, -3.0, -2.5, -2.0, -1.0, 0.0, 2.0] {
                let delta = 1.0 + 2.0 * (rho + 2.0) / kappa;
                let phase = classify_phase(kappa, rho).unwrap();
                assert_eq!(
                    delta > 0.0,
                    phase != Phase::NotDefined,
                    "({kappa}, {rho}): delta {delta}, phase {phase:?}"
                );
            }
        }
    }

    #[test]
    fn phase_metadata_and_dimensions() {
        assert!(classify_phase(3.0, 0.0).unwrap().is_simple());
        assert!(classify_phase(3.0, -2.0).unwrap().is_simple());
        assert!(!classify_phase(3.0, -2.2).unwrap().is_simple());
        assert!(!classify_phase(3.0, -3.0).unwrap().is_reversible());
        assert_eq!(phase_dimension(3.0, -2.0).unwrap(), Some(1.0));
        assert_eq!(phase_dimension(3.0, -4.0).unwrap(), None);
        assert!((phase_dimension(3.0, -3.0).unwrap().unwrap() - (1.0 + 2.0 / 3.0)).abs() < 1e-12);
        assert!((phase_dimension(2.0, 0.0).unwrap().unwrap() - 1.25).abs() < 1e-12);
        assert!(
            (phase_dimension(3.0, -2.2).unwrap().unwrap() - lightcone_dimension(3.0, -2.2)).abs()
                < 1e-12
        );
    }

    #[test]
    fn angle_maps_are_inverse() {
        for kappa in [1.0, 2.5, 3.0, 3.9] {
            for rho in [-2.9, -2.5, -2.0, -1.0, 0.5] {
                let theta = theta_of_rho(kappa, rho).unwrap();
                let back = rho_of_theta(kappa, theta).unwrap();
                assert!((back - rho).abs() < 1e-12, "({kappa}, {rho}) -> {theta} -> {back}");
            }
            assert!((theta_of_rho(kappa, -2.0).unwrap()).abs() < 1e-14);
        }
        assert!(theta_of_rho(4.0, 0.0).is_err());
        assert!(rho_of_theta(4.0, 1.0).is_err());
        // κ=3: θ = π pairs with ρ = −2.5.
        assert!((rho_of_theta(3.0, PI).unwrap() + 2.5).abs() < 1e-12);
    }

    #[test]
    fn critical_angle_meets_opening_angle_at_definability_bound() {
        for kappa in [1.0f64, 1.5, 2.0, 2.5, 3.0, 3.9] {
            let p = params(kappa, 0.0).unwrap();
            let theta_c = p.theta_c.unwrap();
            // θ_ρ at ρ = −2−κ/2 equals θ_c exactly.
            let at_bound = theta_of_rho(kappa, -2.0 - kappa / 2.0).unwrap();
            assert!((at_bound - theta_c).abs() < 1e-12 * theta_c, "kappa {kappa}");
            // Strictly inside the light-cone interval, θ_ρ ∈ (0, θ_c).
            let lo = (-2.0 - kappa / 2.0).max(kappa / 2.0 - 4.0);
            for f in [0.1, 0.5, 0.9] {
                let rho = lo + f * (-2.0 - lo);
                let theta = theta_of_rho(kappa, rho).unwrap();
                assert!(theta > 0.0 && theta < theta_c, "kappa {kappa}, rho {rho}: {theta}");
            }
        }
    }

    #[test]
    fn driving_pair_invariants_hold_pathwise() {
        let mut rng = stream(31, 0);
        let pair = sample_driving_pair(3.0, -2.5, 1.0, 1e-3, &mut rng).unwrap();
        assert_eq!(pair.w[0], 0.0);
        assert_eq!(pair.v[0], 0.0);
        assert_eq!(pair.w.len(), 1001);
        for k in 0..pair.w.len() {
            assert!(pair.w[k] <= pair.v[k], "ordering violated at {k}");
        }
        assert!(pair.min_gap() >= 0.0);
    }

    #[test]
    fn zero_weight_driving_is_brownian() {
        // At ρ = 0 the force-point drift and the V-compensation cancel and W
        // has the law of √κ B. Two-sample KS against a direct Gaussian draw.
        let kappa = 2.0;
        let n = 4000;
        let mut rng = stream(31, 1);
        let sims: Vec<f64> = (0..n)
            .map(|_| *sample_driving_pair(kappa, 0.0, 1.0, 1e-3, &mut rng).unwrap().w.last().unwrap())
            .collect();
        let direct: Vec<f64> = (0..n)
            .map(|_| kappa.sqrt() * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let d = ks_two_sample(&sims, &direct);
        assert!(d < 0.05, "KS distance {d}");
    }

    #[test]
    fn force_point_is_nonmonotone_in_the_lightcone_regime() {
        // For δ < 1 the principal value oscillates, so V must have decreasing
        // segments on almost every path.
        let mut rng = stream(31, 2);
        let n = 200;
        let with_decrease = (0..n)
            .filter(|_| {
                let pair = sample_driving_pair(3.0, -2.5, 1.0, 1e-4, &mut rng).unwrap();
                pair.v.windows(2).any(|ab| ab[1] < ab[0])
            })
            .count();
        assert!(
            with_decrease as f64 / n as f64 >= 0.95,
            "only {with_decrease}/{n} paths had a decreasing V segment"
        );
        // Contrast: at ρ = 0 (δ > 1) V is nondecreasing in the continuum.
        // Per-step increments of the reconstructed V carry mean-zero noise of
        // the same order as their drift, so monotonicity is only visible at
        // coarser time scales; at stride 100 (τ = 10⁻²) the downward share of
        // total variation collapses for ρ = 0 but stays macroscopic in the
        // compensated regime, where V genuinely oscillates at every scale.
        let downward_share = |rho: f64, rng: &mut rand_chacha::ChaCha8Rng| {
            let pair = sample_driving_pair(3.0, rho, 1.0, 1e-4, rng).unwrap();
            let coarse: Vec<f64> = pair.v.iter().step_by(100).copied().collect();
            let (mut down, mut total) = (0.0, 0.0);
            for ab in coarse.windows(2) {
                let d = ab[1] - ab[0];
                total += d.abs();
                if d < 0.0 {
                    down += -d;
                }
            }
            down / total
        };
        let plain = downward_share(0.0, &mut rng);
        let compensated = downward_share(-2.5, &mut rng);
        assert!(plain < 0.05, "coarse downward share at rho = 0: {plain}");
        assert!(
            compensated > 0.2,
            "coarse downward share at rho = −2.5: {compensated}"
        );
    }

    #[test]
    fn drift_regression_and_quadratic_variation() {
        // Pooled over paths: regressing ΔW on dt/(W−V) (restricted to
        // well-separated configurations) recovers ρ within 2 SE, and the
        // quadratic variation of W over [0,1] is κ within 5%.
        let (kappa, rho) = (3.0, -1.0);
        let dt = 1e-4;
        let mut rng = stream(31, 3);
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut qvs = Vec::new();
        for _ in 0..20 {
            let pair = sample_driving_pair(kappa, rho, 1.0, dt, &mut rng).unwrap();
            let mut qv = 0.0;
            for k in 0..pair.w.len() - 1 {
                let dw = pair.w[k + 1] - pair.w[k];
                qv += dw * dw;
                let gap = pair.w[k] - pair.v[k];
                if gap < -0.05 {
                    let x = dt / gap;
                    sxx += x * x;
                    sxy += x * dw;
                }
            }
            qvs.push(qv);
        }
        let slope = sxy / sxx;
        let se = (kappa * dt / sxx).sqrt();
        assert!(
            (slope - rho).abs() <= 2.0 * se,
            "drift slope {slope} vs {rho} (se {se})"
        );
        let mean_qv = qvs.iter().sum::<f64>() / qvs.len() as f64;
        assert!(
            (mean_qv - kappa).abs() < 0.05 * kappa,
            "quadratic variation {mean_qv} vs {kappa}"
        );
    }

    #[test]
    fn driving_pair_is_scale_invariant_in_law() {
        // (W under (t, x) ↦ (αt, √α x)) matches the law of W; the Euler
        // scheme from x0 = 0 makes this exact at matched resolutions.
        let kappa = 3.0;
        let rho = -2.5;
        let alpha = 4.0;
        let n = 2000;
        let mut rng = stream(31, 4);
        let base: Vec<f64> = (0..n)
            .map(|_| *sample_driving_pair(kappa, rho, 1.0, 2.5e-4, &mut rng).unwrap().w.last().unwrap())
            .collect();
        let scaled: Vec<f64> = (0..n)
            .map(|_| {
                *sample_driving_pair(kappa, rho, alpha, alpha * 2.5e-4, &mut rng)
                    .unwrap()
                    .w
                    .last()
                    .unwrap()
                    / alpha.sqrt()
            })
            .collect();
        let d = ks_two_sample(&base, &scaled);
        let crit = ks_two_sample_critical(n, n, 0.01);
        assert!(d < crit && d < 0.05, "KS distance {d} (critical {crit})");
    }

    #[test]
    fn multi_force_preserves_ordering_and_brownian_limit() {
        let mut rng = stream(31, 5);
        let run =
            sample_multi_force_driving(3.0, -0.5, -0.5, -0.1, 0.1, 1.0, 1e-3, &mut rng).unwrap();
        for k in 0..run.w.len() {
            assert!(
                run.v_left[k] <= run.w[k] && run.w[k] <= run.v_right[k],
                "ordering violated at {k}"
            );
        }
        // Far-away force points exert no visible drift: W ≈ √κ B in law.
        let kappa = 3.0;
        let n = 2000;
        let sims: Vec<f64> = (0..n)
            .map(|_| {
                *sample_multi_force_driving(kappa, 0.0, 0.0, -1e6, 1e6, 1.0, 1e-2, &mut rng)
                    .unwrap()
                    .w
                    .last()
                    .unwrap()
            })
            .collect();
        let direct: Vec<f64> = (0..n)
            .map(|_| kappa.sqrt() * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let d = ks_two_sample(&sims, &direct);
        assert!(d < 0.05, "KS distance {d}");
    }

    #[test]
    fn multi_force_no_collision_at_log_boundary_weight() {
        // At ρ_right = κ/2−2 the gap process behaves like a Bessel of
        // dimension 2, which stays away from 0; the discrete path should
        // essentially never come within the collision tolerance from
        // x_right = 1.
        let kappa = 3.0;
        let mut rng = stream(31, 6);
        let n = 300;
        let collided = (0..n)
            .filter(|_| {
                let run = sample_multi_force_driving(
                    kappa,
                    0.0,
                    kappa / 2.0 - 2.0,
                    -1e6,
                    1.0,
                    1.0,
                    1e-3,
                    &mut rng,
                )
                .unwrap();
                run.w
                    .iter()
                    .zip(&run.v_right)
                    .any(|(w, v)| v - w < 1e-8)
            })
            .count();
        assert!(
            collided as f64 / n as f64 <= 0.01,
            "{collided}/{n} paths touched the right force point"
        );
    }

    #[test]
    fn sle_trace_is_origin_seeded_with_metadata() {
        let mut rng = stream(31, 7);
        let trace = sample_sle_trace(2.0, 0.0, 0.25, 1e-3, &mut rng).unwrap();
        assert_eq!(trace.points[0], num_complex::Complex64::new(0.0, 0.0));
        assert_eq!(trace.kappa, Some(2.0));
        assert_eq!(trace.rho, Some(0.0));
        assert_eq!(trace.points.len(), 251);
        assert!(trace.points.iter().skip(1).all(|p| p.im > 0.0));
    }

    #[test]
    fn parameter_domain_errors() {
        let mut rng = stream(1, 0);
        assert!(params(0.0, 0.0).is_err());
        assert!(classify_phase(-1.0, 0.0).is_err());
        assert!(sample_driving_pair(3.0, -3.6, 1.0, 1e-3, &mut rng).is_err());
        assert!(sample_driving_pair(3.0, -2.0, 1.0, 1e-3, &mut rng).is_err());
        assert!(sample_driving_pair(3.0, 0.0, 0.0, 1e-3, &mut rng).is_err());
        assert!(
            sample_multi_force_driving(3.0, -2.0, 0.0, -1.0, 1.0, 1.0, 1e-3, &mut rng).is_err()
        );
        assert!(
            sample_multi_force_driving(3.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1e-3, &mut rng).is_err()
        );
    }
}
