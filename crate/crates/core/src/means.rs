//! Normalized geometric and α-power means, plus the continuity bounds for
//! the distance and the geometric mean written as checkable inequalities.

use crate::error::{Error, Result};
use crate::mesh::{ensure_same, Density};
use crate::metric::{hellinger_affinity, l2_embed};

/// Normalized geometric mean `φ(μ₁, μ₂) = √(p₁p₂)/C_H`.
///
/// Symmetric in its arguments bit for bit.
pub fn geometric_mean(mu1: &Density, mu2: &Density) -> Result<Density> {
    ensure_same(mu1.mesh(), mu2.mesh())?;
    let roots: Vec<f64> = mu1
        .values()
        .iter()
        .zip(mu2.values())
        .map(|(a, b)| (a * b).sqrt())
        .collect();
    // the normalizer Σ wᵢ √(p₁ᵢp₂ᵢ) is exactly the Hellinger affinity
    Density::new(mu1.mesh().clone(), roots, true)
}

/// `ln cosh y` without overflow.
fn ln_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Normalized α-power mean: `{1 + (p₂/p₁)^α}^{1/α}·p₁`, rescaled to unit mass.
///
/// `alpha == 0` returns the geometric mean. The weights are evaluated as
/// `ln p₁ + ½ ln r + ln cosh(α ln r / 2)/α` with `r = p₂/p₁`, which equals the
/// logarithm of the raw weight minus the node-independent constant `ln 2 / α`.
/// This keeps small |α| free of the `2^{1/α}` overflow.
pub fn alpha_power_mean(mu1: &Density, mu2: &Density, alpha: f64) -> Result<Density> {
    ensure_same(mu1.mesh(), mu2.mesh())?;
    if !alpha.is_finite() {
        return Err(Error::NonFinite(format!("alpha = {alpha}")));
    }
    if alpha == 0.0 {
        return geometric_mean(mu1, mu2);
    }
    let logs: Vec<f64> = mu1
        .values()
        .iter()
        .zip(mu2.values())
        .map(|(&p1, &p2)| {
            let lr = p2.ln() - p1.ln();
            p1.ln() + 0.5 * lr + ln_cosh(0.5 * alpha * lr) / alpha
        })
        .collect();
    if let Some(i) = logs.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("log-weight at node {i}")));
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|v| (v - top).exp()).collect();
    if let Some(i) = raw.iter().position(|&v| v <= 0.0) {
        return Err(Error::NonFinite(format!(
            "weight underflow at node {i} for alpha = {alpha}"
        )));
    }
    Density::new(mu1.mesh().clone(), raw, true)
}

/// Both sides of the cosine-difference bound
/// `|cos(ℓ(μ,μ₁)/2) − cos(ℓ(μ′,μ₁′)/2)| ≤ ‖√p−√p′‖ + ‖√p₁−√p₁′‖`.
pub fn ell_continuity_gap(
    mu: &Density,
    mu1: &Density,
    mu_p: &Density,
    mu1_p: &Density,
) -> Result<(f64, f64)> {
    let lhs = (hellinger_affinity(mu, mu1)? - hellinger_affinity(mu_p, mu1_p)?).abs();
    let rhs = sqrt_gap_sum(mu, mu1, mu_p, mu1_p)?;
    Ok((lhs, rhs))
}

/// Both sides of the geometric-mean bound
/// `‖√P − √P′‖² ≤ (2/C_H(μ,μ₁))·(‖√p−√p′‖ + ‖√p₁−√p₁′‖)`.
pub fn phi_continuity_gap(
    mu: &Density,
    mu1: &Density,
    mu_p: &Density,
    mu1_p: &Density,
) -> Result<(f64, f64)> {
    let big = geometric_mean(mu, mu1)?;
    let big_p = geometric_mean(mu_p, mu1_p)?;
    let mesh = mu.mesh();
    let lhs = mesh.l2_distance(&l2_embed(&big), &l2_embed(&big_p)).powi(2);
    let rhs = 2.0 / hellinger_affinity(mu, mu1)? * sqrt_gap_sum(mu, mu1, mu_p, mu1_p)?;
    Ok((lhs, rhs))
}

fn sqrt_gap_sum(mu: &Density, mu1: &Density, mu_p: &Density, mu1_p: &Density) -> Result<f64> {
    for other in [mu1, mu_p, mu1_p] {
        ensure_same(mu.mesh(), other.mesh())?;
    }
    let mesh = mu.mesh();
    Ok(mesh.l2_distance(&l2_embed(mu), &l2_embed(mu_p))
        + mesh.l2_distance(&l2_embed(mu1), &l2_embed(mu1_p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::QuadratureMesh;
    use approx::assert_abs_diff_eq;

    fn d(v: &[f64]) -> Density {
        Density::new(QuadratureMesh::two_atom(), v.to_vec(), false).unwrap()
    }

    #[test]
    fn geometric_mean_examples() {
        let u = d(&[1.0, 1.0]);
        let a = d(&[1.6, 0.4]);
        let b = d(&[0.4, 1.6]);
        assert!(geometric_mean(&a, &a).unwrap().sup_distance(&a) < 1e-15);
        let g = geometric_mean(&u, &a).unwrap();
        assert_abs_diff_eq!(g.values()[0], 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.values()[1], 2.0 / 3.0, epsilon = 1e-14);
        let g = geometric_mean(&a, &b).unwrap();
        assert_abs_diff_eq!(g.values()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.values()[1], 1.0, epsilon = 1e-14);
        assert_eq!(
            geometric_mean(&u, &a).unwrap(),
            geometric_mean(&a, &u).unwrap()
        );
    }

    #[test]
    fn alpha_examples() {
        let u = d(&[1.0, 1.0]);
        let a = d(&[1.6, 0.4]);
        let m = alpha_power_mean(&u, &a, 1.0).unwrap();
        assert_abs_diff_eq!(m.values()[0], 1.3, epsilon = 1e-14);
        assert_abs_diff_eq!(m.values()[1], 0.7, epsilon = 1e-14);
        let m = alpha_power_mean(&u, &a, 0.0).unwrap();
        assert_abs_diff_eq!(m.values()[0], 4.0 / 3.0, epsilon = 1e-14);
        for alpha in [-3.0, -0.5, 0.25, 2.0, 7.5] {
            let m = alpha_power_mean(&a, &a, alpha).unwrap();
            assert!(m.sup_distance(&a) < 1e-14);
        }
        assert!(alpha_power_mean(&u, &a, f64::NAN).is_err());
    }

    #[test]
    fn alpha_matches_direct_formula() {
        // direct evaluation where it cannot overflow
        let mesh = QuadratureMesh::uniform(4).unwrap();
        let p1 = Density::new(mesh.clone(), vec![0.5, 1.5, 0.8, 1.2], true).unwrap();
        let p2 = Density::new(mesh.clone(), vec![2.0, 0.3, 1.1, 0.6], true).unwrap();
        for alpha in [-2.0, -1.0, 0.5, 1.0, 3.0] {
            let raw: Vec<f64> = p1
                .values()
                .iter()
                .zip(p2.values())
                .map(|(a, b)| (1.0 + (b / a).powf(alpha)).powf(1.0 / alpha) * a)
                .collect();
            let direct = Density::new(mesh.clone(), raw, true).unwrap();
            let m = alpha_power_mean(&p1, &p2, alpha).unwrap();
            assert!(m.sup_distance(&direct) < 1e-13, "alpha {alpha}");
        }
    }

    #[test]
    fn extreme_alpha_stays_finite() {
        let a = d(&[1.99, 0.01]);
        let b = d(&[0.01, 1.99]);
        for alpha in [-50.0, 50.0, 1e-9] {
            let m = alpha_power_mean(&a, &b, alpha).unwrap();
            assert!(m.values().iter().all(|v| v.is_finite() && *v > 0.0));
        }
    }

    #[test]
    fn ell_gap_examples() {
        let u = d(&[1.0, 1.0]);
        let a = d(&[1.6, 0.4]);
        assert_eq!(ell_continuity_gap(&u, &u, &u, &u).unwrap(), (0.0, 0.0));
        assert_eq!(ell_continuity_gap(&u, &a, &u, &a).unwrap(), (0.0, 0.0));
        let (lhs, rhs) = ell_continuity_gap(&u, &a, &a, &a).unwrap();
        assert_abs_diff_eq!(lhs, 0.0513167, epsilon = 1e-7);
        assert_abs_diff_eq!(rhs, 0.3203645, epsilon = 1e-7);
        assert!(lhs <= rhs);
    }

    #[test]
    fn phi_gap_examples() {
        let u = d(&[1.0, 1.0]);
        let a = d(&[1.6, 0.4]);
        let (lhs, rhs) = phi_continuity_gap(&u, &a, &u, &a).unwrap();
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
        let (lhs, _) = phi_continuity_gap(&u, &a, &a, &u).unwrap();
        assert_eq!(lhs, 0.0);
    }
}
