//! Exponential charts centred at a density.
//!
//! At a base `μ = p·λ` a density `ν` has coordinate
//! `u = log(n/p) − E_μ[log(n/p)]`, and `u` maps back to
//! `exp(u)·p / E_μ[exp u]`. On a finite mesh every centred function is an
//! admissible coordinate, transitions between charts are affine, and the
//! Fisher metric becomes the covariance of coordinate velocities.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::means::geometric_mean;
use crate::mesh::{ensure_same, sup_gap, Density, QuadratureMesh, TangentDensity, MASS_TOL};

/// A chart coordinate at `base`: node values with `E_μ[u] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartVector {
    base: Density,
    values: Vec<f64>,
}

impl ChartVector {
    pub fn new(base: Density, values: Vec<f64>) -> Result<Self> {
        if values.len() != base.len() {
            return Err(Error::Length {
                expected: base.len(),
                actual: values.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NotFinite {
                node,
                value: values[node],
            });
        }
        let mean = expectation(&base, &values);
        if mean.abs() > MASS_TOL {
            return Err(Error::Mass {
                expected: 0.0,
                actual: mean,
                tolerance: MASS_TOL,
            });
        }
        Ok(ChartVector { base, values })
    }

    /// Subtracts `E_μ[v]` so that the result is a valid coordinate.
    pub fn centered(base: Density, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != base.len() {
            return Err(Error::Length {
                expected: base.len(),
                actual: values.len(),
            });
        }
        let mean = expectation(&base, &values);
        values.iter_mut().for_each(|v| *v -= mean);
        Self::new(base, values)
    }

    pub fn zero(base: Density) -> Self {
        let values = vec![0.0; base.len()];
        ChartVector { base, values }
    }

    pub fn base(&self) -> &Density {
        &self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh> {
        self.base.mesh()
    }
}

/// `E_μ[f] = Σ wᵢ fᵢ pᵢ`.
fn expectation(mu: &Density, f: &[f64]) -> f64 {
    mu.mesh().inner(f, mu.values())
}

/// `σ_μ(u) = exp(u)·μ / E_μ[exp u]`.
pub fn chart_inverse(u: &ChartVector) -> Result<Density> {
    let mut raw = Vec::with_capacity(u.values.len());
    for (node, (x, p)) in u.values.iter().zip(u.base.values()).enumerate() {
        let e = x.exp();
        if !e.is_finite() {
            return Err(Error::NonFinite(format!("exp(u) overflows at node {node}")));
        }
        raw.push(e * p);
    }
    if let Some(node) = raw.iter().position(|&v| v <= 0.0) {
        return Err(Error::NonFinite(format!(
            "exp(u) underflows at node {node}"
        )));
    }
    Density::new(u.base.mesh().clone(), raw, true)
}

/// `s_μ(ν) = log(n/p) − E_μ[log(n/p)]`.
pub fn chart_forward(base: &Density, nu: &Density) -> Result<ChartVector> {
    ensure_same(base.mesh(), nu.mesh())?;
    let logs: Vec<f64> = nu
        .values()
        .iter()
        .zip(base.values())
        .map(|(n, p)| n.ln() - p.ln())
        .collect();
    ChartVector::centered(base.clone(), logs)
}

/// Re-expresses `u` (a coordinate at `μ`) in the chart at `new_base`:
/// `u + log(p/p₁) − E_{μ₁}[u + log(p/p₁)]`.
pub fn chart_transition(u: &ChartVector, new_base: &Density) -> Result<ChartVector> {
    ensure_same(u.mesh(), new_base.mesh())?;
    let shifted: Vec<f64> = u
        .values
        .iter()
        .zip(u.base.values().iter().zip(new_base.values()))
        .map(|(x, (p, p1))| x + p.ln() - p1.ln())
        .collect();
    ChartVector::centered(new_base.clone(), shifted)
}

/// `Cov_μ(v₁, v₂) = E_μ[v₁v₂] − E_μ[v₁]E_μ[v₂]`.
pub fn covariance_metric(mu: &Density, v1: &[f64], v2: &[f64]) -> Result<f64> {
    for v in [v1, v2] {
        if v.len() != mu.len() {
            return Err(Error::Length {
                expected: mu.len(),
                actual: v.len(),
            });
        }
    }
    let m1 = expectation(mu, v1);
    let m2 = expectation(mu, v2);
    // centred form; equal to E[v₁v₂] − E[v₁]E[v₂] without the cancellation
    Ok(mu
        .mesh()
        .weights()
        .iter()
        .zip(mu.values())
        .zip(v1.iter().zip(v2))
        .map(|((w, p), (a, b))| w * p * (a - m1) * (b - m2))
        .sum())
}

/// Coordinate of `φ(σ_μ(u), σ_μ′(u′))` in the chart at
/// `μ₁ = φ(μ, μ′)`: the centred half-sum `½(u + u′) − E_{μ₁}[½(u + u′)]`.
pub fn geometric_mean_in_coords(
    u: &ChartVector,
    u_p: &ChartVector,
    mu1: &Density,
) -> Result<ChartVector> {
    ensure_same(u.mesh(), u_p.mesh())?;
    ensure_same(u.mesh(), mu1.mesh())?;
    let expected = geometric_mean(&u.base, &u_p.base)?;
    let gap = sup_gap(expected.values(), mu1.values());
    if gap > 1e-10 {
        return Err(Error::Precondition(format!(
            "chart base is not the geometric mean of the input bases (gap {gap:e})"
        )));
    }
    let mean_u = expectation(&u.base, &u.values);
    let mean_up = expectation(&u_p.base, &u_p.values);
    let half: Vec<f64> = u
        .values
        .iter()
        .zip(&u_p.values)
        .map(|(a, b)| 0.5 * ((a - mean_u) + (b - mean_up)))
        .collect();
    ChartVector::centered(mu1.clone(), half)
}

/// `(min p₁/p, max p₁/p)`; the mixture segment between the two densities
/// extends past both ends exactly when these are finite and positive.
pub fn mixture_arc_bounds(mu: &Density, mu1: &Density) -> Result<(f64, f64)> {
    ensure_same(mu.mesh(), mu1.mesh())?;
    Ok(mu
        .values()
        .iter()
        .zip(mu1.values())
        .map(|(p, p1)| p1 / p)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        }))
}

/// Largest `ε` with `μ + tτ` positive for all `|t| < ε`: `min pᵢ/|qᵢ|`
/// over nodes with `qᵢ ≠ 0`, infinite for `τ = 0`.
pub fn positivity_radius(mu: &Density, tau: &TangentDensity) -> Result<f64> {
    ensure_same(mu.mesh(), tau.mesh())?;
    Ok(mu
        .values()
        .iter()
        .zip(tau.values())
        .filter(|(_, q)| **q != 0.0)
        .map(|(p, q)| p / q.abs())
        .fold(f64::INFINITY, f64::min))
}
