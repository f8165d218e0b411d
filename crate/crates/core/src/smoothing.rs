//! Mollification on circle meshes.
//!
//! Densities are convolved with the bump `exp(1/((d/δ)² − 1))` of angular
//! radius `δ`, sampled at the mesh nodes and renormalized discretely.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{ensure_same, Density, MeshKind, QuadratureMesh, TangentDensity};

/// Sampled bump kernel indexed by circular node offset.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpKernel {
    mesh: Arc<QuadratureMesh>,
    delta: f64,
    /// Kernel value at offset `k` (node `i + k` seen from node `i`).
    taps: Vec<f64>,
}

impl BumpKernel {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh> {
        &self.mesh
    }

    /// Number of offsets with positive weight.
    pub fn support(&self) -> usize {
        self.taps.iter().filter(|&&k| k > 0.0).count()
    }

    fn convolve(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let w = self.mesh.weights();
        let active: Vec<(usize, f64)> = self
            .taps
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0.0)
            .map(|(i, &k)| (i, k))
            .collect();
        (0..n)
            .map(|i| {
                active
                    .iter()
                    .map(|&(k, tap)| {
                        let j = (i + k) % n;
                        tap * w[j] * values[j]
                    })
                    .sum()
            })
            .collect()
    }
}

fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (1.0 / (x * x - 1.0)).exp()
    } else {
        0.0
    }
}

/// Builds the kernel of radius `delta` on a circle mesh, normalized so that
/// `Σ_k K_k w_k = 1`.
pub fn make_kernel(mesh: &Arc<QuadratureMesh>, delta: f64) -> Result<BumpKernel> {
    let positions = match (mesh.kind(), mesh.positions()) {
        (MeshKind::Circle, Some(p)) => p,
        _ => {
            return Err(Error::InvalidMesh(
                "mollification needs a circle mesh with node positions".into(),
            ))
        }
    };
    let n = mesh.len();
    let spacing = 2.0 * PI / n as f64;
    if !(delta > spacing && delta < PI) {
        return Err(Error::Precondition(format!(
            "delta {delta} must lie in ({spacing}, π)"
        )));
    }
    debug_assert_eq!(positions.len(), n);
    // Distances from integer offsets keep the taps exactly symmetric.
    let mut taps: Vec<f64> = (0..n)
        .map(|k| bump(k.min(n - k) as f64 * spacing / delta))
        .collect();
    let total: f64 = taps.iter().zip(mesh.weights()).map(|(k, w)| k * w).sum();
    taps.iter_mut().for_each(|k| *k /= total);
    Ok(BumpKernel {
        mesh: mesh.clone(),
        delta,
        taps,
    })
}

/// Mollified density plus the factor applied to restore unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollified {
    pub density: Density,
    /// Mass of the raw convolution before renormalization.
    pub raw_mass: f64,
}

pub fn mollify_with_report(p: &Density, kernel: &BumpKernel) -> Result<Mollified> {
    ensure_same(p.mesh(), &kernel.mesh)?;
    let raw = kernel.convolve(p.values());
    let raw_mass = p.mesh().integrate(&raw);
    let density = Density::new(p.mesh().clone(), raw, true)?;
    Ok(Mollified { density, raw_mass })
}

/// Circular convolution with the kernel followed by exact renormalization.
pub fn mollify(p: &Density, kernel: &BumpKernel) -> Result<Density> {
    Ok(mollify_with_report(p, kernel)?.density)
}

/// Convolution of a tangent vector, re-centred to zero mass.
pub fn mollify_tangent(q: &TangentDensity, kernel: &BumpKernel) -> Result<TangentDensity> {
    ensure_same(q.mesh(), &kernel.mesh)?;
    TangentDensity::new(q.mesh().clone(), kernel.convolve(q.values()), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::NodeField;

    #[test]
    fn kernel_support_and_symmetry() {
        let mesh = QuadratureMesh::circle(16).unwrap();
        let k = make_kernel(&mesh, 1.5 * 2.0 * PI / 16.0).unwrap();
        assert_eq!(k.support(), 3);
        assert!(k.taps()[0] > 0.0 && k.taps()[1] > 0.0 && k.taps()[15] > 0.0);
        let norm: f64 = k
            .taps()
            .iter()
            .zip(mesh.weights())
            .map(|(a, b)| a * b)
            .sum();
        assert!((norm - 1.0).abs() < 1e-12);
        let k = make_kernel(&mesh, 1.3).unwrap();
        for i in 1..16 {
            assert!((k.taps()[i] - k.taps()[16 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_errors() {
        let mesh = QuadratureMesh::circle(16).unwrap();
        assert!(make_kernel(&mesh, 0.1).is_err());
        assert!(make_kernel(&mesh, PI).is_err());
        assert!(make_kernel(&QuadratureMesh::uniform(16).unwrap(), 1.0).is_err());
    }

    #[test]
    fn constant_is_fixed() {
        let mesh = QuadratureMesh::circle(32).unwrap();
        let k = make_kernel(&mesh, 0.7).unwrap();
        let p = Density::uniform(mesh.clone());
        let out = mollify(&p, &k).unwrap();
        assert!(out.sup_distance(&p) < 1e-12);
    }

    #[test]
    fn spike_flattens() {
        let mesh = QuadratureMesh::circle(20).unwrap();
        let mut raw = vec![0.1 / 19.0 * 20.0; 20];
        raw[7] = 0.9 * 20.0;
        let p = Density::new(mesh.clone(), raw, true).unwrap();
        let k = make_kernel(&mesh, 0.8).unwrap();
        let out = mollify(&p, &k).unwrap();
        let max = |v: &[f64]| v.iter().copied().fold(f64::MIN, f64::max);
        let min = |v: &[f64]| v.iter().copied().fold(f64::MAX, f64::min);
        assert!(max(out.values()) < max(p.values()));
        assert!(min(out.values()) >= min(p.values()) * (1.0 - 1e-14));
        assert!(out.values()[8] > p.values()[8] && out.values()[6] > p.values()[6]);
        assert!((out.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_smoothing() {
        let mesh = QuadratureMesh::circle(24).unwrap();
        let k = make_kernel(&mesh, 0.9).unwrap();
        let zero = TangentDensity::zero(mesh.clone());
        assert!(mollify_tangent(&zero, &k).unwrap().is_zero());
        let mut raw = vec![0.0; 24];
        raw[3] = 12.0;
        raw[15] = -12.0;
        let q = TangentDensity::new(mesh.clone(), raw, false).unwrap();
        let s = mollify_tangent(&q, &k).unwrap();
        assert!(s.mass().abs() < 1e-15);
        assert!(s.values()[3] < 12.0 && s.values()[4] > 0.0);
        let scaled = mollify_tangent(&q.scaled(2.5), &k).unwrap();
        for (a, b) in scaled.values().iter().zip(s.values()) {
            assert!((a - 2.5 * b).abs() < 1e-13);
        }
    }
}
