//! Seeded random draws used by the verification suite and property tests.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::mesh::{Density, QuadratureMesh, TangentDensity};
use crate::metric::{fisher_inner, fisher_norm};

/// Default seed when `FRG_SEED` is not set.
pub const DEFAULT_SEED: u64 = 42;

/// Reads `FRG_SEED`, falling back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("FRG_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// The three meshes the property suite cycles through: two atoms, four
/// uniform atoms and a 16-node circle.
pub fn standard_meshes() -> Vec<Arc<QuadratureMesh>> {
    vec![
        QuadratureMesh::two_atom(),
        QuadratureMesh::uniform(4).expect("4-atom mesh"),
        QuadratureMesh::circle(16).expect("16-node circle"),
    ]
}

/// Log-normal node values, normalized. `spread` is the standard deviation
/// of the log-values.
pub fn random_density<R: Rng + ?Sized>(
    rng: &mut R,
    mesh: &Arc<QuadratureMesh>,
    spread: f64,
) -> Density {
    let raw = (0..mesh.len())
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            (spread * z).exp()
        })
        .collect();
    Density::new(mesh.clone(), raw, true).expect("log-normal values are positive")
}

/// Gaussian direction at `mu`: `(z − E_μ z)·p`.
pub fn random_tangent<R: Rng + ?Sized>(rng: &mut R, mu: &Density) -> TangentDensity {
    let z: Vec<f64> = (0..mu.len()).map(|_| StandardNormal.sample(rng)).collect();
    let mean = mu.mesh().inner(&z, mu.values());
    let raw = z
        .iter()
        .zip(mu.values())
        .map(|(zi, p)| (zi - mean) * p)
        .collect();
    TangentDensity::new(mu.mesh().clone(), raw, true).expect("finite tangent")
}

/// A random tangent of unit Fisher norm.
pub fn random_unit_tangent<R: Rng + ?Sized>(rng: &mut R, mu: &Density) -> Result<TangentDensity> {
    loop {
        let t = random_tangent(rng, mu);
        let n = fisher_norm(mu, &t)?;
        if n > 1e-6 {
            return Ok(t.scaled(1.0 / n));
        }
    }
}

/// Removes the `basis` component from `tau` in the Fisher inner product.
pub fn orthogonalize(
    mu: &Density,
    tau: &TangentDensity,
    basis: &TangentDensity,
) -> Result<TangentDensity> {
    let coef = fisher_inner(mu, tau, basis)? / fisher_inner(mu, basis, basis)?;
    tau.axpy(-coef, basis)
}
