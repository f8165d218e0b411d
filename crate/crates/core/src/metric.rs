//! Fisher information metric, Hellinger quantities and the Levi-Civita
//! connection on discrete densities.

use crate::error::Result;
use crate::mesh::{ensure_same, Density, TangentDensity};

/// `G_μ(τ₁, τ₂) = Σ wᵢ (q₁ᵢ/pᵢ)(q₂ᵢ/pᵢ) pᵢ`.
pub fn fisher_inner(mu: &Density, tau1: &TangentDensity, tau2: &TangentDensity) -> Result<f64> {
    ensure_same(mu.mesh(), tau1.mesh())?;
    ensure_same(mu.mesh(), tau2.mesh())?;
    Ok(mu
        .mesh()
        .weights()
        .iter()
        .zip(mu.values())
        .zip(tau1.values().iter().zip(tau2.values()))
        .map(|((w, p), (a, b))| w * (a / p) * (b / p) * p)
        .sum())
}

pub fn fisher_norm(mu: &Density, tau: &TangentDensity) -> Result<f64> {
    Ok(fisher_inner(mu, tau, tau)?.max(0.0).sqrt())
}

/// Hellinger affinity `C_H = Σ wᵢ √(p₁ᵢ p₂ᵢ)`.
pub fn hellinger_affinity(mu1: &Density, mu2: &Density) -> Result<f64> {
    ensure_same(mu1.mesh(), mu2.mesh())?;
    Ok(mu1
        .mesh()
        .weights()
        .iter()
        .zip(mu1.values().iter().zip(mu2.values()))
        .map(|(w, (a, b))| w * (a * b).sqrt())
        .sum())
}

/// Half-angle data of a pair: `cos(ℓ/2) = C_H` and an accurate `sin(ℓ/2)`.
///
/// `1 − C_H` is taken from `½‖√p₁ − √p‖²` so that nearby pairs do not lose
/// the sine to cancellation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HalfAngle {
    pub cos: f64,
    pub sin: f64,
}

impl HalfAngle {
    pub fn of(mu: &Density, mu1: &Density) -> Result<Self> {
        ensure_same(mu.mesh(), mu1.mesh())?;
        let mesh = mu.mesh();
        let mut affinity = 0.0;
        let mut gap = 0.0;
        for ((w, p), p1) in mesh.weights().iter().zip(mu.values()).zip(mu1.values()) {
            let (a, b) = (p.sqrt(), p1.sqrt());
            affinity += w * a * b;
            gap += w * (a - b) * (a - b);
        }
        let cos = affinity.clamp(0.0, 1.0);
        let one_minus = (0.5 * gap).clamp(0.0, 1.0);
        let sin = (one_minus * (1.0 + cos)).sqrt();
        Ok(HalfAngle { cos, sin })
    }

    /// `ℓ = 2·atan2(sin, cos)`.
    pub fn length(&self) -> f64 {
        2.0 * self.sin.atan2(self.cos)
    }
}

/// Riemannian distance `ℓ = 2·arccos C_H`, valued in `[0, π)`.
///
/// Evaluated as `2·atan2(sin(ℓ/2), C_H)`, which stays accurate for nearby
/// densities where `arccos` is ill-conditioned.
pub fn fisher_rao_distance(mu1: &Density, mu2: &Density) -> Result<f64> {
    Ok(HalfAngle::of(mu1, mu2)?.length())
}

/// Hellinger distance `√(2(1 − C_H))`.
///
/// Summed as `‖√p₁ − √p₂‖` in weighted L₂; going through `1 − C_H` would
/// cost half the digits near coincidence.
pub fn hellinger_distance(mu1: &Density, mu2: &Density) -> Result<f64> {
    ensure_same(mu1.mesh(), mu2.mesh())?;
    let gap: f64 = mu1
        .mesh()
        .weights()
        .iter()
        .zip(mu1.values().iter().zip(mu2.values()))
        .map(|(w, (a, b))| w * (a.sqrt() - b.sqrt()).powi(2))
        .sum();
    Ok(gap.sqrt())
}

/// Covariant derivative `∇_{τ₁}τ₂` of constant fields at `μ`.
///
/// Per node: `−½((q₁/p)(q₂/p) − G_μ(τ₁, τ₂))·p`.
pub fn levi_civita(
    mu: &Density,
    tau1: &TangentDensity,
    tau2: &TangentDensity,
) -> Result<TangentDensity> {
    let g = fisher_inner(mu, tau1, tau2)?;
    let values = mu
        .values()
        .iter()
        .zip(tau1.values().iter().zip(tau2.values()))
        .map(|(p, (a, b))| -0.5 * ((a / p) * (b / p) - g) * p)
        .collect();
    TangentDensity::new(mu.mesh().clone(), values, false)
}

/// Square-root embedding `p ↦ √p` into weighted L₂.
pub fn l2_embed(mu: &Density) -> Vec<f64> {
    mu.values().iter().map(|p| p.sqrt()).collect()
}

/// Differential of the square-root embedding: `q ↦ q/(2√p)`.
pub fn l2_embed_differential(mu: &Density, tau: &TangentDensity) -> Result<Vec<f64>> {
    ensure_same(mu.mesh(), tau.mesh())?;
    Ok(mu
        .values()
        .iter()
        .zip(tau.values())
        .map(|(p, q)| q / (2.0 * p.sqrt()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{NodeField, QuadratureMesh};
    use approx::assert_abs_diff_eq;

    fn d(v: &[f64]) -> Density {
        Density::new(QuadratureMesh::two_atom(), v.to_vec(), false).unwrap()
    }

    fn t(v: &[f64]) -> TangentDensity {
        TangentDensity::new(QuadratureMesh::two_atom(), v.to_vec(), false).unwrap()
    }

    #[test]
    fn inner_and_norm() {
        let tau = t(&[1.0, -1.0]);
        assert_abs_diff_eq!(fisher_inner(&d(&[1.0, 1.0]), &tau, &tau).unwrap(), 1.0);
        assert_abs_diff_eq!(
            fisher_inner(&d(&[1.6, 0.4]), &tau, &tau).unwrap(),
            1.5625,
            epsilon = 1e-14
        );
        let zero = t(&[0.0, 0.0]);
        assert_eq!(fisher_inner(&d(&[1.6, 0.4]), &tau, &zero).unwrap(), 0.0);
        assert_abs_diff_eq!(fisher_norm(&d(&[1.0, 1.0]), &tau).unwrap(), 1.0);
        assert_eq!(fisher_norm(&d(&[1.0, 1.0]), &zero).unwrap(), 0.0);
        let mu = d(&[1.6, 0.4]);
        assert_abs_diff_eq!(
            fisher_norm(&mu, &tau.scaled(2.0)).unwrap(),
            2.0 * fisher_norm(&mu, &tau).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn hellinger_examples() {
        let u = d(&[1.0, 1.0]);
        let a = d(&[1.6, 0.4]);
        let b = d(&[0.4, 1.6]);
        assert_abs_diff_eq!(hellinger_affinity(&a, &a).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            hellinger_affinity(&u, &a).unwrap(),
            3.0 / 10f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(hellinger_affinity(&a, &b).unwrap(), 0.8, epsilon = 1e-15);

        assert_eq!(fisher_rao_distance(&a, &a).unwrap(), 0.0);
        assert_abs_diff_eq!(
            fisher_rao_distance(&u, &a).unwrap(),
            2.0 * (1.0f64 / 3.0).atan(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            fisher_rao_distance(&a, &b).unwrap(),
            1.2870022,
            epsilon = 1e-7
        );

        assert_eq!(hellinger_distance(&a, &a).unwrap(), 0.0);
        assert_abs_diff_eq!(
            hellinger_distance(&u, &a).unwrap(),
            0.3203645,
            epsilon = 1e-7
        );
        let l2 = u.mesh().l2_distance(&l2_embed(&u), &l2_embed(&a));
        assert_abs_diff_eq!(hellinger_distance(&u, &a).unwrap(), l2, epsilon = 1e-14);
    }

    #[test]
    fn connection_examples() {
        let tau = t(&[1.0, -1.0]);
        let zero = t(&[0.0, 0.0]);
        let r = levi_civita(&d(&[1.6, 0.4]), &tau, &zero).unwrap();
        assert!(r.values().iter().all(|&v| v == 0.0));
        let r = levi_civita(&d(&[1.0, 1.0]), &tau, &tau).unwrap();
        assert!(r.values().iter().all(|&v| v.abs() < 1e-15));
        let r = levi_civita(&d(&[1.6, 0.4]), &tau, &tau).unwrap();
        // G = 0.5/1.6 + 0.5/0.4 = 1.5625
        assert_abs_diff_eq!(r.values()[0], 0.9375, epsilon = 1e-13);
        assert_abs_diff_eq!(r.values()[1], -0.9375, epsilon = 1e-13);
        assert!(r.mass().abs() < 1e-12);
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(l2_embed(&d(&[1.0, 1.0])), vec![1.0, 1.0]);
        let a = d(&[1.6, 0.4]);
        let x = l2_embed(&a);
        assert_abs_diff_eq!(x[0], 1.2649111, epsilon = 1e-7);
        assert_abs_diff_eq!(x[1], 0.6324555, epsilon = 1e-7);
        assert_abs_diff_eq!(a.mesh().l2_norm(&x), 1.0, epsilon = 1e-15);
        let tau = t(&[1.0, -1.0]);
        let dr = l2_embed_differential(&a, &tau).unwrap();
        assert_abs_diff_eq!(
            4.0 * a.mesh().inner(&dr, &dr),
            fisher_inner(&a, &tau, &tau).unwrap(),
            epsilon = 1e-13
        );
    }
}
