//! Closed-form geodesics of the Fisher metric.
//!
//! A unit-speed geodesic through `μ = p·λ` with initial velocity `τ = q·λ`
//! has density `(cos(t/2) + (q/p)·sin(t/2))²·p`. Everything here (initial and
//! boundary value problems, exponential and logarithm maps, the three-term
//! representation, midpoint, tangent-line intersection) is evaluated from
//! that formula or its derivatives; no ODE is integrated.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::means::geometric_mean;
use crate::mesh::{ensure_same, sup_gap, Density, NonnegativeDensity, TangentDensity};
use crate::metric::{fisher_inner, fisher_norm, HalfAngle};

/// Tolerance on the unit-speed condition.
pub const UNIT_TOL: f64 = 1e-10;
/// Endpoints closer than this in sup norm are treated as coincident.
pub const COINCIDENT_TOL: f64 = 1e-12;
/// Below this Hellinger affinity a segment is flagged as near-antipodal.
pub const NEAR_ANTIPODAL_AFFINITY: f64 = 1e-8;
/// Slack allowed when a parameter is compared against a segment end.
const PARAM_SLACK: f64 = 1e-12;

/// A geodesic segment from `base` with unit initial velocity and arc length
/// in `(0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSegment {
    base: Density,
    unit_velocity: TangentDensity,
    length: f64,
    near_antipodal: bool,
    /// `√(p₁/p)` per node when the segment was built from its endpoints.
    root_ratio: Option<Vec<f64>>,
}

impl GeodesicSegment {
    pub fn new(base: Density, unit_velocity: TangentDensity, length: f64) -> Result<Self> {
        let norm = fisher_norm(&base, &unit_velocity)?;
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Precondition(format!(
                "initial velocity has norm {norm}, expected 1"
            )));
        }
        if !(length > 0.0 && length < PI) {
            return Err(Error::Domain(format!(
                "segment length {length} not in (0, π)"
            )));
        }
        Ok(GeodesicSegment {
            base,
            unit_velocity,
            length,
            near_antipodal: false,
            root_ratio: None,
        })
    }

    pub fn base(&self) -> &Density {
        &self.base
    }

    pub fn unit_velocity(&self) -> &TangentDensity {
        &self.unit_velocity
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Set when the endpoints have Hellinger affinity below
    /// [`NEAR_ANTIPODAL_AFFINITY`]; the closed forms still hold but are
    /// poorly conditioned.
    pub fn near_antipodal(&self) -> bool {
        self.near_antipodal
    }

    /// Density at arc length `t`. Any `t` in `(−π, π)` is accepted as long as
    /// the curve stays positive.
    ///
    /// Segments built by [`geodesic_bvp`] use the endpoint form
    /// `((sin((ℓ−t)/2) + sin(t/2)·√(p₁/p)) / sin(ℓ/2))²·p`, whose terms are
    /// both positive on `[0, ℓ]`; the velocity form loses relative accuracy
    /// at nodes where `p₁ ≪ p`.
    pub fn sample(&self, t: f64) -> Result<Density> {
        let Some(ratio) = &self.root_ratio else {
            return geodesic_ivp(&self.base, &self.unit_velocity, t);
        };
        if !t.is_finite() || t.abs() >= PI {
            return Err(Error::Domain(format!("arc length {t} outside (−π, π)")));
        }
        let sl = (0.5 * self.length).sin();
        let (a, b) = ((0.5 * (self.length - t)).sin() / sl, (0.5 * t).sin() / sl);
        let mut values = Vec::with_capacity(ratio.len());
        for (node, (p, r)) in self.base.values().iter().zip(ratio).enumerate() {
            let amplitude = a + b * r;
            if amplitude <= 0.0 {
                return Err(Error::NonPositive {
                    node,
                    value: amplitude * amplitude.abs() * p,
                });
            }
            values.push(amplitude * amplitude * p);
        }
        Density::new(self.base.mesh().clone(), values, false)
    }

    pub fn end(&self) -> Result<Density> {
        self.sample(self.length)
    }

    /// Exact velocity `dγ/dt` at arc length `t`.
    pub fn velocity(&self, t: f64) -> Result<TangentDensity> {
        let (s, c) = (0.5 * t).sin_cos();
        let values = self
            .base
            .values()
            .iter()
            .zip(self.unit_velocity.values())
            .map(|(p, q)| {
                let r = q / p;
                (c + r * s) * (-s + r * c) * p
            })
            .collect();
        TangentDensity::new(self.base.mesh().clone(), values, true)
    }
}

/// Geodesic with initial point `μ` and initial velocity `τ` (any speed),
/// evaluated at parameter `t`.
///
/// With speed `s = |τ|_μ` the density is `(cos(st/2) + (q/ps)·sin(st/2))²·p`.
/// Fails if `s·|t| ≥ π` or if the curve has left the positive densities
/// before reaching `t`.
pub fn geodesic_ivp(mu: &Density, tau: &TangentDensity, t: f64) -> Result<Density> {
    let speed = fisher_norm(mu, tau)?;
    let arc = speed * t;
    if !arc.is_finite() || arc.abs() >= PI {
        return Err(Error::Domain(format!(
            "arc length |t|·|τ| = {} outside (−π, π)",
            arc.abs()
        )));
    }
    if speed == 0.0 || t == 0.0 {
        return Ok(mu.clone());
    }
    let (s, c) = (0.5 * arc).sin_cos();
    let k = s / speed;
    let mut values = Vec::with_capacity(mu.len());
    for (node, (p, q)) in mu.values().iter().zip(tau.values()).enumerate() {
        let amplitude = c + k * q / p;
        if amplitude <= 0.0 {
            return Err(Error::NonPositive {
                node,
                value: amplitude * amplitude.abs() * p,
            });
        }
        values.push(amplitude * amplitude * p);
    }
    Density::new(mu.mesh().clone(), values, false)
}

/// The geodesic segment joining `μ` to `μ₁`.
///
/// The unit initial velocity is `(√(p₁/p) − cos(ℓ/2))·p / sin(ℓ/2)`, which is
/// `cot(ℓ/2)(φ(μ, μ₁) − μ)`.
pub fn geodesic_bvp(mu: &Density, mu1: &Density) -> Result<GeodesicSegment> {
    ensure_same(mu.mesh(), mu1.mesh())?;
    if sup_gap(mu.values(), mu1.values()) <= COINCIDENT_TOL {
        return Err(Error::Degenerate(
            "endpoints coincide; no direction to follow".into(),
        ));
    }
    let half = HalfAngle::of(mu, mu1)?;
    let raw: Vec<f64> = mu
        .values()
        .iter()
        .zip(mu1.values())
        .map(|(p, p1)| ((p1 / p).sqrt() - half.cos) * p)
        .collect();
    let direction = TangentDensity::new(mu.mesh().clone(), raw, true)?;
    // |direction|_μ equals sin(ℓ/2) analytically; dividing by the computed
    // norm keeps the unit-speed invariant at rounding level.
    let norm = fisher_norm(mu, &direction)?;
    if norm == 0.0 {
        return Err(Error::Degenerate("zero initial velocity".into()));
    }
    let unit_velocity = direction.scaled(1.0 / norm);
    let length = half.length().min(PI * (1.0 - f64::EPSILON));
    let mut seg = GeodesicSegment::new(mu.clone(), unit_velocity, length)?;
    seg.near_antipodal = half.cos < NEAR_ANTIPODAL_AFFINITY;
    seg.root_ratio = Some(
        mu.values()
            .iter()
            .zip(mu1.values())
            .map(|(p, p1)| (p1 / p).sqrt())
            .collect(),
    );
    Ok(seg)
}

/// Weights of the representation `γ(t) = a₁μ + a₂μ₁ + a₃φ(μ, μ₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeTermCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl ThreeTermCoefficients {
    pub fn sum(&self) -> f64 {
        self.a1 + self.a2 + self.a3
    }
}

pub fn three_term_coeffs(l: f64, t: f64) -> Result<ThreeTermCoefficients> {
    if !(l > 0.0 && l < PI) {
        return Err(Error::Domain(format!("segment length {l} not in (0, π)")));
    }
    if !(t >= -PARAM_SLACK && t <= l + PARAM_SLACK) {
        return Err(Error::Domain(format!("t = {t} outside [0, {l}]")));
    }
    let t = t.clamp(0.0, l);
    let (sl, cl) = (0.5 * l).sin_cos();
    let st = (0.5 * t).sin();
    let sr = (0.5 * (l - t)).sin();
    Ok(ThreeTermCoefficients {
        a1: (sr / sl).powi(2),
        a2: (st / sl).powi(2),
        a3: 2.0 * cl * st * sr / (sl * sl),
    })
}

/// `γ(t) = a₁(t)μ + a₂(t)μ₁ + a₃(t)φ(μ, μ₁)` for `t ∈ [0, ℓ(μ, μ₁)]`.
pub fn geodesic_three_term(mu: &Density, mu1: &Density, t: f64) -> Result<Density> {
    ensure_same(mu.mesh(), mu1.mesh())?;
    if sup_gap(mu.values(), mu1.values()) <= COINCIDENT_TOL {
        return Err(Error::Degenerate("endpoints coincide".into()));
    }
    let l = HalfAngle::of(mu, mu1)?.length();
    let k = three_term_coeffs(l, t)?;
    let phi = geometric_mean(mu, mu1)?;
    let values = mu
        .values()
        .iter()
        .zip(mu1.values())
        .zip(phi.values())
        .map(|((p, p1), g)| k.a1 * p + k.a2 * p1 + k.a3 * g)
        .collect();
    Density::new(mu.mesh().clone(), values, false)
}

/// Midpoint of the segment: `(1 + √(p₁/p))²·p / (4cos²(ℓ/4))`.
pub fn midpoint(mu: &Density, mu1: &Density) -> Result<Density> {
    ensure_same(mu.mesh(), mu1.mesh())?;
    if sup_gap(mu.values(), mu1.values()) <= COINCIDENT_TOL {
        return Err(Error::Degenerate("endpoints coincide".into()));
    }
    let half = HalfAngle::of(mu, mu1)?;
    // 4cos²(ℓ/4) = 2(1 + cos(ℓ/2))
    let denom = 2.0 * (1.0 + half.cos);
    let values = mu
        .values()
        .iter()
        .zip(mu1.values())
        .map(|(p, p1)| (1.0 + (p1 / p).sqrt()).powi(2) * p / denom)
        .collect();
    Density::new(mu.mesh().clone(), values, false)
}

/// Membership in the exponential-map domain of radius `eps`:
/// `|τ|_μ < eps` and `min(q/p) > −|τ|_μ·cot(|τ|_μ/2)` (bound `−2` at zero).
pub fn exp_domain_contains(mu: &Density, tau: &TangentDensity, eps: f64) -> bool {
    let Ok(norm) = fisher_norm(mu, tau) else {
        return false;
    };
    let eps = eps.min(PI);
    if !(eps > 0.0) || norm >= eps {
        return false;
    }
    let bound = if norm == 0.0 {
        -2.0
    } else {
        -norm / (0.5 * norm).tan()
    };
    mu.values()
        .iter()
        .zip(tau.values())
        .all(|(p, q)| q / p > bound)
}

/// `exp_μ τ = (cos(|τ|/2) + sin(|τ|/2)·(q/p)/|τ|)²·μ`.
pub fn exp_map(mu: &Density, tau: &TangentDensity) -> Result<Density> {
    ensure_same(mu.mesh(), tau.mesh())?;
    if tau.is_zero() {
        return Ok(mu.clone());
    }
    if !exp_domain_contains(mu, tau, PI) {
        return Err(Error::Domain(
            "tangent vector outside the exponential-map domain".into(),
        ));
    }
    geodesic_ivp(mu, tau, 1.0)
}

/// Inverse of [`exp_map`]: `ℓ·cot(ℓ/2)(φ(μ, μ₁) − μ)/…`, i.e. the segment's
/// unit velocity scaled by its length. Equal inputs give the zero vector.
pub fn log_map(mu: &Density, mu1: &Density) -> Result<TangentDensity> {
    match geodesic_bvp(mu, mu1) {
        Ok(seg) => Ok(seg.unit_velocity.scaled(seg.length)),
        Err(Error::Degenerate(_)) => Ok(TangentDensity::zero(mu.mesh().clone())),
        Err(e) => Err(e),
    }
}

/// First parameter `t > 0` at which the ray `t ↦ geodesic_ivp(μ, τ, t)`
/// touches zero somewhere, or `None` for the zero vector.
///
/// Node `i` vanishes when `tan(st/2) = −s/rᵢ` with `rᵢ = qᵢ/pᵢ < 0`.
pub fn positivity_breakdown(mu: &Density, tau: &TangentDensity) -> Result<Option<f64>> {
    let speed = fisher_norm(mu, tau)?;
    if speed == 0.0 {
        return Ok(None);
    }
    let worst = mu
        .values()
        .iter()
        .zip(tau.values())
        .map(|(p, q)| q / p)
        .fold(f64::INFINITY, f64::min);
    if worst >= 0.0 {
        return Ok(None);
    }
    Ok(Some(2.0 / speed * (speed / -worst).atan()))
}

/// Intersection of the tangent lines `μ + s·γ̇(0)` and `μ₁ + s′·γ̇(ℓ)`.
///
/// The velocities come from differentiating the closed-form curve. The 2×2
/// system is solved on the pair of nodes with the largest determinant and
/// the residual is checked on every node. When every pair is singular the
/// lines coincide (a one-dimensional mesh); the symmetric solution
/// `s′ = −s` is then taken.
pub fn tangent_line_intersection(mu: &Density, mu1: &Density) -> Result<Density> {
    let seg = geodesic_bvp(mu, mu1)?;
    let v0 = seg.unit_velocity.values();
    let vl_field = seg.velocity(seg.length)?;
    let vl = vl_field.values();
    let rhs: Vec<f64> = mu1
        .values()
        .iter()
        .zip(mu.values())
        .map(|(a, b)| a - b)
        .collect();
    let n = mu.len();

    // s·v0 − s′·vl = p₁ − p
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let det = -v0[i] * vl[j] + vl[i] * v0[j];
            if best.is_none_or(|(d, _, _)| det.abs() > d.abs()) {
                best = Some((det, i, j));
            }
        }
    }
    let scale = v0.iter().chain(vl).fold(0.0f64, |m, v| m.max(v.abs()));
    let (s, s_prime) = match best {
        Some((det, i, j)) if det.abs() > 1e-9 * scale * scale => {
            let s = (-rhs[i] * vl[j] + vl[i] * rhs[j]) / det;
            let s_prime = (v0[i] * rhs[j] - rhs[i] * v0[j]) / det;
            (s, s_prime)
        }
        _ => {
            let sum: Vec<f64> = v0.iter().zip(vl).map(|(a, b)| a + b).collect();
            let num: f64 = sum.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            let den: f64 = sum.iter().map(|a| a * a).sum();
            if den == 0.0 {
                return Err(Error::Inconsistent("tangent lines are parallel".into()));
            }
            (num / den, -num / den)
        }
    };
    let point: Vec<f64> = mu.values().iter().zip(v0).map(|(p, v)| p + s * v).collect();
    let other: Vec<f64> = mu1
        .values()
        .iter()
        .zip(vl)
        .map(|(p, v)| p + s_prime * v)
        .collect();
    let residual = sup_gap(&point, &other);
    if residual > 1e-10 {
        return Err(Error::Inconsistent(format!(
            "tangent lines miss each other by {residual:e}"
        )));
    }
    Density::new(mu.mesh().clone(), point, false)
}

/// Maximum over nodes of `|d/dt(ṗ/p) + ½(ṗ/p)² + ½|` along `curve` at `t`.
///
/// Both derivatives use the fourth-order central stencil of step `h`, nested,
/// so the curve is sampled on `t + kh` for `k = −4..=4`. A second-order
/// stencil leaves an `O(h²)` truncation term that on steep curves (density
/// ratios near 100 between endpoints) is already of order `10⁻⁶` at
/// `h = 10⁻⁴`.
pub fn ode_residual<F>(curve: F, t: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    if !(h > 0.0) {
        return Err(Error::Precondition(format!(
            "step h = {h} must be positive"
        )));
    }
    let samples: Vec<Vec<f64>> = (-4..=4)
        .map(|k| curve(t + k as f64 * h))
        .collect::<Result<_>>()?;
    let at = |k: i32| &samples[(k + 4) as usize];
    let d4 = |m2: f64, m1: f64, p1: f64, p2: f64| (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let mut worst = 0.0f64;
    for i in 0..at(0).len() {
        // logarithmic derivative at t + jh, j = −2..=2
        let g = |j: i32| d4(at(j - 2)[i], at(j - 1)[i], at(j + 1)[i], at(j + 2)[i]) / at(j)[i];
        let dg = d4(g(-2), g(-1), g(1), g(2));
        let g0 = g(0);
        worst = worst.max((dg + 0.5 * g0 * g0 + 0.5).abs());
    }
    Ok(worst)
}

/// [`ode_residual`] along a segment; the stencil `t ± 4h` must stay inside
/// `(0, ℓ)`.
pub fn geodesic_ode_residual(seg: &GeodesicSegment, t: f64, h: f64) -> Result<f64> {
    if !(t - 4.0 * h > 0.0 && t + 4.0 * h < seg.length) {
        return Err(Error::Domain(format!(
            "stencil [{}, {}] leaves (0, {})",
            t - 4.0 * h,
            t + 4.0 * h,
            seg.length
        )));
    }
    ode_residual(|s| seg.sample(s).map(Density::into_values), t, h)
}

/// `G_{f(t,τ)}(∂f/∂t, ∂f/∂τ(δτ))` for `f(t, τ) = exp_μ(tτ)` with unit `τ` and
/// `δτ ⟂ τ`, evaluated from the closed-form partial derivatives.
pub fn gauss_orthogonality(
    mu: &Density,
    tau: &TangentDensity,
    delta_tau: &TangentDensity,
    t: f64,
) -> Result<f64> {
    ensure_same(mu.mesh(), delta_tau.mesh())?;
    let norm = fisher_norm(mu, tau)?;
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::Precondition(format!(
            "τ has norm {norm}, expected 1"
        )));
    }
    let cross = fisher_inner(mu, tau, delta_tau)?;
    if cross.abs() > UNIT_TOL {
        return Err(Error::Precondition(format!(
            "δτ is not orthogonal to τ (G = {cross:e})"
        )));
    }
    if !(t > 0.0 && t < PI) {
        return Err(Error::Domain(format!("t = {t} outside (0, π)")));
    }
    let (s, c) = (0.5 * t).sin_cos();
    let mut total = 0.0;
    for (node, (((w, p), q), dq)) in mu
        .mesh()
        .weights()
        .iter()
        .zip(mu.values())
        .zip(tau.values())
        .zip(delta_tau.values())
        .enumerate()
    {
        let r = q / p;
        let dr = dq / p;
        let amp = c + s * r;
        let f = amp * amp * p;
        if !(f > 0.0) || amp <= 0.0 {
            return Err(Error::NonPositive { node, value: f });
        }
        let df_dt = amp * (-s + c * r) * p;
        let df_dtau = 2.0 * amp * s * dr * p;
        total += w * (df_dt / f) * (df_dtau / f) * f;
    }
    Ok(total)
}

/// Unit-speed closed form at any real `t`, allowing zeros. Periodic in `t`
/// with period `2π`; at `t = ±π` it equals `(q/p)²·μ`.
pub fn extended_geodesic(mu: &Density, tau: &TangentDensity, t: f64) -> Result<NonnegativeDensity> {
    let norm = fisher_norm(mu, tau)?;
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::Precondition(format!(
            "τ has norm {norm}, expected 1"
        )));
    }
    let (s, c) = (0.5 * t).sin_cos();
    let values = mu
        .values()
        .iter()
        .zip(tau.values())
        .map(|(p, q)| (c + s * q / p).powi(2) * p)
        .collect();
    NonnegativeDensity::new(mu.mesh().clone(), values)
}

/// Output of [`relaxed_antipodal`].
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedAntipodal {
    /// `+φᵢ` on the half-mass node set, `−φᵢ` elsewhere.
    pub tau1: Vec<f64>,
    /// Indices of the half-mass node set (always contains node 0).
    pub subset: Vec<usize>,
    /// `cos(ℓ/2)` of the pair.
    pub cos_half_length: f64,
    /// The curve at `t = π`, which reproduces `μ₁`.
    pub endpoint: Density,
}

/// Largest mesh the half-mass subset search accepts.
pub const RELAXED_MAX_NODES: usize = 24;

/// A curve from `μ` reaching `μ₁` at `t = π` whose initial velocity is
/// `cos(ℓ/2)·τ₁`, with `τ₁ = ±φ(μ, μ₁)` split over a node set of φ-mass ½.
///
/// The velocity is discontinuous in general, so it is returned as raw node
/// values rather than a [`TangentDensity`].
pub fn relaxed_antipodal(mu: &Density, mu1: &Density) -> Result<RelaxedAntipodal> {
    ensure_same(mu.mesh(), mu1.mesh())?;
    if sup_gap(mu.values(), mu1.values()) <= COINCIDENT_TOL {
        return Err(Error::Degenerate("endpoints coincide".into()));
    }
    let n = mu.len();
    if n > RELAXED_MAX_NODES {
        return Err(Error::Precondition(format!(
            "half-mass search limited to {RELAXED_MAX_NODES} nodes, mesh has {n}"
        )));
    }
    let phi = geometric_mean(mu, mu1)?;
    let masses: Vec<f64> = mu
        .mesh()
        .weights()
        .iter()
        .zip(phi.values())
        .map(|(w, g)| w * g)
        .collect();
    let subset = half_mass_subset(&masses, 1e-12).ok_or_else(|| {
        Error::Precondition("no node subset carries exactly half the geometric-mean mass".into())
    })?;
    let mut inside = vec![false; n];
    for &i in &subset {
        inside[i] = true;
    }
    let tau1: Vec<f64> = phi
        .values()
        .iter()
        .zip(&inside)
        .map(|(g, &on)| if on { *g } else { -*g })
        .collect();
    let cos_half = HalfAngle::of(mu, mu1)?.cos;
    let endpoint_values = relaxed_curve(mu, &tau1, cos_half, PI);
    let endpoint = Density::new(mu.mesh().clone(), endpoint_values, false)?;
    let miss = endpoint.sup_distance(mu1);
    if miss > 1e-10 {
        return Err(Error::Inconsistent(format!(
            "relaxed curve misses the target by {miss:e}"
        )));
    }
    Ok(RelaxedAntipodal {
        tau1,
        subset,
        cos_half_length: cos_half,
        endpoint,
    })
}

/// `(cos(t/2) + sin(t/2)·cos(ℓ/2)·τ₁/p)²·p`.
pub fn relaxed_curve(mu: &Density, tau1: &[f64], cos_half_length: f64, t: f64) -> Vec<f64> {
    let (s, c) = (0.5 * t).sin_cos();
    mu.values()
        .iter()
        .zip(tau1)
        .map(|(p, v)| (c + s * cos_half_length * v / p).powi(2) * p)
        .collect()
}

/// Meet-in-the-middle search for a subset with total `½` within `tol`.
fn half_mass_subset(masses: &[f64], tol: f64) -> Option<Vec<usize>> {
    let n = masses.len();
    let (lo, hi) = masses.split_at(n / 2);
    let sums = |part: &[f64]| -> Vec<(f64, u32)> {
        (0u32..(1 << part.len()))
            .map(|mask| {
                let total = part
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, m)| m)
                    .sum();
                (total, mask)
            })
            .collect()
    };
    let left = sums(lo);
    let mut right = sums(hi);
    right.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut found: Option<(f64, u32, u32)> = None;
    for &(a, lmask) in &left {
        let want = 0.5 - a;
        let k = right.partition_point(|x| x.0 < want);
        for idx in [k.wrapping_sub(1), k] {
            if let Some(&(b, rmask)) = right.get(idx) {
                let err = (a + b - 0.5).abs();
                if err <= tol && found.is_none_or(|(e, _, _)| err < e) {
                    found = Some((err, lmask, rmask));
                }
            }
        }
    }
    let (_, lmask, rmask) = found?;
    let mut subset: Vec<usize> = (0..lo.len()).filter(|i| lmask >> i & 1 == 1).collect();
    subset.extend(
        (0..hi.len())
            .filter(|i| rmask >> i & 1 == 1)
            .map(|i| i + lo.len()),
    );
    if !subset.contains(&0) {
        subset = (0..n).filter(|i| !subset.contains(i)).collect();
    }
    Some(subset)
}
