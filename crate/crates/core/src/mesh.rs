//! Discrete model of a compact measured space.
//!
//! A [`QuadratureMesh`] is a finite node set with positive weights of total
//! mass one. Densities and tangent vectors are stored as per-node values
//! relative to the reference measure, so every integral is a weighted sum.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total weight of a mesh.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Tolerance on the mass of densities (1) and tangent vectors (0).
pub const MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    TwoAtom,
    NAtomUniform,
    Circle,
}

impl MeshKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeshKind::TwoAtom => "two_atom",
            MeshKind::NAtomUniform => "n_atom_uniform",
            MeshKind::Circle => "circle",
        }
    }
}

impl std::str::FromStr for MeshKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_atom" => Ok(MeshKind::TwoAtom),
            "n_atom_uniform" => Ok(MeshKind::NAtomUniform),
            "circle" => Ok(MeshKind::Circle),
            other => Err(Error::InvalidMesh(format!("unknown mesh kind `{other}`"))),
        }
    }
}

/// Finite node set with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMesh {
    kind: MeshKind,
    weights: Vec<f64>,
    positions: Option<Vec<f64>>,
}

impl QuadratureMesh {
    /// Builds a mesh of the given kind.
    ///
    /// `two_atom` requires `n == 2`. `circle` places nodes at angles
    /// `2πk/n` with uniform weights; custom weights are accepted only if
    /// they are uniform.
    pub fn build(kind: MeshKind, n: usize, custom_weights: Option<&[f64]>) -> Result<Arc<Self>> {
        if n < 2 {
            return Err(Error::InvalidMesh(format!(
                "need at least 2 nodes, got {n}"
            )));
        }
        if kind == MeshKind::TwoAtom && n != 2 {
            return Err(Error::InvalidMesh(format!(
                "two_atom mesh has exactly 2 nodes, got {n}"
            )));
        }
        let uniform = vec![1.0 / n as f64; n];
        let weights = match custom_weights {
            None => uniform,
            Some(w) => {
                if w.len() != n {
                    return Err(Error::Length {
                        expected: n,
                        actual: w.len(),
                    });
                }
                check_weights(w)?;
                if kind == MeshKind::Circle
                    && w.iter()
                        .any(|&x| (x - 1.0 / n as f64).abs() > WEIGHT_SUM_TOL)
                {
                    return Err(Error::InvalidMesh(
                        "circle meshes carry uniform weights".into(),
                    ));
                }
                w.to_vec()
            }
        };
        let positions = (kind == MeshKind::Circle)
            .then(|| (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect());
        Ok(Arc::new(QuadratureMesh {
            kind,
            weights,
            positions,
        }))
    }

    pub fn two_atom() -> Arc<Self> {
        Self::build(MeshKind::TwoAtom, 2, None).expect("uniform two-atom mesh")
    }

    pub fn uniform(n: usize) -> Result<Arc<Self>> {
        Self::build(MeshKind::NAtomUniform, n, None)
    }

    pub fn circle(n: usize) -> Result<Arc<Self>> {
        Self::build(MeshKind::Circle, n, None)
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node angles in radians, present for circle meshes only.
    pub fn positions(&self) -> Option<&[f64]> {
        self.positions.as_deref()
    }

    /// `Σ wᵢ fᵢ`, the integral against the reference measure.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Weighted inner product `Σ wᵢ fᵢ gᵢ`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Weighted L₂ norm.
    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// Weighted L₂ distance between two node-value vectors.
    pub fn l2_distance(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::Length {
                expected: self.len(),
                actual: values.len(),
            });
        }
        Ok(())
    }
}

fn check_weights(w: &[f64]) -> Result<()> {
    for (i, &x) in w.iter().enumerate() {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::InvalidMesh(format!(
                "weight {i} = {x} is not positive"
            )));
        }
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidMesh(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// True if both handles describe the same nodes and weights. The mesh kind
/// label is not compared.
pub fn same_mesh(a: &Arc<QuadratureMesh>, b: &Arc<QuadratureMesh>) -> bool {
    Arc::ptr_eq(a, b) || (a.weights == b.weights && a.positions == b.positions)
}

pub(crate) fn ensure_same(a: &Arc<QuadratureMesh>, b: &Arc<QuadratureMesh>) -> Result<()> {
    if same_mesh(a, b) {
        Ok(())
    } else {
        Err(Error::MeshMismatch)
    }
}

/// Anything carried as per-node values on a mesh.
pub trait NodeField {
    fn mesh(&self) -> &Arc<QuadratureMesh>;
    fn values(&self) -> &[f64];

    /// Total mass `Σ wᵢ vᵢ` against the reference measure.
    fn mass(&self) -> f64 {
        self.mesh().integrate(self.values())
    }
}

macro_rules! node_field {
    ($ty:ident) => {
        impl NodeField for $ty {
            fn mesh(&self) -> &Arc<QuadratureMesh> {
                &self.mesh
            }
            fn values(&self) -> &[f64] {
                &self.values
            }
        }

        impl $ty {
            pub fn mesh(&self) -> &Arc<QuadratureMesh> {
                &self.mesh
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn into_values(self) -> Vec<f64> {
                self.values
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }
        }
    };
}

/// A positive probability density `p = dμ/dλ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    mesh: Arc<QuadratureMesh>,
    values: Vec<f64>,
}

/// A signed measure of zero total mass, stored as `q = dτ/dλ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentDensity {
    mesh: Arc<QuadratureMesh>,
    values: Vec<f64>,
}

/// A probability density allowed to vanish at some nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegativeDensity {
    mesh: Arc<QuadratureMesh>,
    values: Vec<f64>,
}

node_field!(Density);
node_field!(TangentDensity);
node_field!(NonnegativeDensity);

impl Density {
    /// Validates (or normalizes) raw per-node values into a density.
    pub fn new(mesh: Arc<QuadratureMesh>, raw: Vec<f64>, normalize: bool) -> Result<Self> {
        mesh.check_len(&raw)?;
        for (node, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NotFinite { node, value });
            }
            if value <= 0.0 {
                return Err(Error::NonPositive { node, value });
            }
        }
        let mass = mesh.integrate(&raw);
        let values = if normalize {
            raw.into_iter().map(|v| v / mass).collect()
        } else {
            if (mass - 1.0).abs() > MASS_TOL {
                return Err(Error::Mass {
                    expected: 1.0,
                    actual: mass,
                    tolerance: MASS_TOL,
                });
            }
            raw
        };
        Ok(Density { mesh, values })
    }

    /// The reference density `p ≡ 1`.
    pub fn uniform(mesh: Arc<QuadratureMesh>) -> Self {
        let values = vec![1.0; mesh.len()];
        Density { mesh, values }
    }

    pub fn sup_distance(&self, other: &Density) -> f64 {
        sup_gap(&self.values, &other.values)
    }
}

impl TangentDensity {
    /// Validates (or centers) raw values into a zero-mass tangent vector.
    pub fn new(mesh: Arc<QuadratureMesh>, raw: Vec<f64>, center: bool) -> Result<Self> {
        mesh.check_len(&raw)?;
        for (node, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NotFinite { node, value });
            }
        }
        let total = mesh.integrate(&raw);
        let values = if center {
            raw.into_iter().map(|v| v - total).collect()
        } else {
            if total.abs() > MASS_TOL {
                return Err(Error::Mass {
                    expected: 0.0,
                    actual: total,
                    tolerance: MASS_TOL,
                });
            }
            raw
        };
        Ok(TangentDensity { mesh, values })
    }

    pub fn zero(mesh: Arc<QuadratureMesh>) -> Self {
        let values = vec![0.0; mesh.len()];
        TangentDensity { mesh, values }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        TangentDensity {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `self + factor·other`.
    pub fn axpy(&self, factor: f64, other: &TangentDensity) -> Result<Self> {
        ensure_same(&self.mesh, &other.mesh)?;
        Ok(TangentDensity {
            mesh: self.mesh.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + factor * b)
                .collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

impl NonnegativeDensity {
    pub fn new(mesh: Arc<QuadratureMesh>, raw: Vec<f64>) -> Result<Self> {
        mesh.check_len(&raw)?;
        for (node, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NotFinite { node, value });
            }
            if value < 0.0 {
                return Err(Error::NonPositive { node, value });
            }
        }
        let mass = mesh.integrate(&raw);
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::Mass {
                expected: 1.0,
                actual: mass,
                tolerance: MASS_TOL,
            });
        }
        Ok(NonnegativeDensity { mesh, values: raw })
    }
}

impl From<Density> for NonnegativeDensity {
    fn from(d: Density) -> Self {
        NonnegativeDensity {
            mesh: d.mesh,
            values: d.values,
        }
    }
}

/// `dν/dμ` as per-node values `(dν/dλ)/(dμ/dλ)`.
pub fn radon_nikodym<F: NodeField + ?Sized>(num: &F, den: &Density) -> Result<Vec<f64>> {
    ensure_same(num.mesh(), den.mesh())?;
    Ok(num
        .values()
        .iter()
        .zip(den.values())
        .map(|(n, d)| n / d)
        .collect())
}

/// Measure to integrate against.
#[derive(Debug, Clone, Copy)]
pub enum Against<'a> {
    Reference(&'a QuadratureMesh),
    Density(&'a Density),
}

impl<'a> From<&'a QuadratureMesh> for Against<'a> {
    fn from(m: &'a QuadratureMesh) -> Self {
        Against::Reference(m)
    }
}

impl<'a> From<&'a Density> for Against<'a> {
    fn from(d: &'a Density) -> Self {
        Against::Density(d)
    }
}

/// `Σ wᵢ fᵢ` against λ, or `Σ wᵢ fᵢ pᵢ` against a density.
pub fn integrate<'a>(values: &[f64], against: impl Into<Against<'a>>) -> Result<f64> {
    match against.into() {
        Against::Reference(mesh) => {
            mesh.check_len(values)?;
            Ok(mesh.integrate(values))
        }
        Against::Density(mu) => {
            mu.mesh.check_len(values)?;
            Ok(mu.mesh.inner(values, &mu.values))
        }
    }
}

pub(crate) fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn build_uniform_and_custom() {
        let m = QuadratureMesh::two_atom();
        assert_eq!(m.weights(), &[0.5, 0.5]);
        let m = QuadratureMesh::uniform(4).unwrap();
        assert_eq!(m.weights(), &[0.25; 4]);
        let m = QuadratureMesh::build(MeshKind::TwoAtom, 2, Some(&[0.3, 0.7])).unwrap();
        assert_eq!(m.weights(), &[0.3, 0.7]);
        assert!(m.positions().is_none());
    }

    #[test]
    fn circle_positions() {
        let m = QuadratureMesh::circle(8).unwrap();
        let pos = m.positions().unwrap();
        assert_eq!(pos.len(), 8);
        assert_abs_diff_eq!(pos[2], PI / 2.0, epsilon = 1e-15);
        assert_eq!(m.weights(), &[0.125; 8]);
    }

    #[test]
    fn mesh_errors() {
        assert!(QuadratureMesh::uniform(1).is_err());
        assert!(QuadratureMesh::build(MeshKind::TwoAtom, 2, Some(&[0.0, 1.0])).is_err());
        assert!(QuadratureMesh::build(MeshKind::TwoAtom, 2, Some(&[0.4, 0.5])).is_err());
        assert!(QuadratureMesh::build(MeshKind::TwoAtom, 3, None).is_err());
        assert!(QuadratureMesh::build(MeshKind::Circle, 2, Some(&[0.3, 0.7])).is_err());
    }

    #[test]
    fn density_construction() {
        let m = QuadratureMesh::two_atom();
        let d = Density::new(m.clone(), vec![1.0, 1.0], false).unwrap();
        assert_eq!(d.values(), &[1.0, 1.0]);
        let d = Density::new(m.clone(), vec![3.2, 0.8], true).unwrap();
        assert_abs_diff_eq!(d.values()[0], 1.6, epsilon = 1e-15);
        assert_abs_diff_eq!(d.values()[1], 0.4, epsilon = 1e-15);
        assert!(matches!(
            Density::new(m.clone(), vec![1.0, -1.0], true),
            Err(Error::NonPositive { node: 1, .. })
        ));
        assert!(matches!(
            Density::new(m, vec![1.0, 2.0], false),
            Err(Error::Mass { .. })
        ));
    }

    #[test]
    fn tangent_construction() {
        let m = QuadratureMesh::two_atom();
        let t = TangentDensity::new(m.clone(), vec![1.0, -1.0], false).unwrap();
        assert_eq!(t.values(), &[1.0, -1.0]);
        let t = TangentDensity::new(m.clone(), vec![2.0, 0.0], true).unwrap();
        assert_eq!(t.values(), &[1.0, -1.0]);
        assert!(TangentDensity::new(m, vec![1.0, 0.0], false).is_err());
    }

    #[test]
    fn radon_nikodym_examples() {
        let m = QuadratureMesh::two_atom();
        let mu = Density::new(m.clone(), vec![1.6, 0.4], false).unwrap();
        let one = Density::uniform(m.clone());
        assert_eq!(radon_nikodym(&mu, &one).unwrap(), vec![1.6, 0.4]);
        let tau = TangentDensity::new(m.clone(), vec![1.0, -1.0], false).unwrap();
        let r = radon_nikodym(&tau, &mu).unwrap();
        assert_abs_diff_eq!(r[0], 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], -2.5, epsilon = 1e-15);
        assert_eq!(radon_nikodym(&mu, &mu).unwrap(), vec![1.0, 1.0]);

        let other = Density::uniform(QuadratureMesh::uniform(3).unwrap());
        assert_eq!(radon_nikodym(&mu, &other), Err(Error::MeshMismatch));
    }

    #[test]
    fn integrate_examples() {
        let m = QuadratureMesh::two_atom();
        let mu = Density::new(m.clone(), vec![1.6, 0.4], false).unwrap();
        assert_abs_diff_eq!(integrate(&[1.0, 1.0], &mu).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(integrate(&[1.6, 0.4], &*m).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(integrate(&[1.0, -1.0], &*m).unwrap(), 0.0);
        assert!(integrate(&[1.0], &*m).is_err());
    }

    #[test]
    fn mass_of_radon_nikodym_is_total_mass() {
        let m = QuadratureMesh::uniform(5).unwrap();
        let mu = Density::new(m.clone(), vec![0.3, 1.2, 2.0, 0.7, 0.8], true).unwrap();
        let nu = Density::new(m.clone(), vec![1.0, 0.2, 0.5, 3.0, 0.3], true).unwrap();
        let tau = TangentDensity::new(m.clone(), vec![1.0, -2.0, 0.5, 0.25, 3.0], true).unwrap();
        let a = integrate(&radon_nikodym(&nu, &mu).unwrap(), &mu).unwrap();
        let b = integrate(&radon_nikodym(&tau, &mu).unwrap(), &mu).unwrap();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-12);
    }
}
