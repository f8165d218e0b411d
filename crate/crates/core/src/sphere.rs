//! Independent verification backend.
//!
//! The map `p ↦ √p` sends densities onto the positive part of the unit sphere
//! of weighted L₂, and the Fisher metric onto four times the round metric.
//! Fisher–Rao geodesics are therefore great circles traversed at half speed,
//! and distances are twice the sphere angle. The code here works only with
//! sphere points and great-circle interpolation so that it can cross-check
//! the density formulas in [`crate::geodesic`].

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geodesic::log_map;
use crate::mesh::{ensure_same, sup_gap, Density, QuadratureMesh};
use crate::metric::{fisher_inner, fisher_norm, fisher_rao_distance};

/// A point of the unit sphere in weighted L₂.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    mesh: Arc<QuadratureMesh>,
    coords: Vec<f64>,
}

/// Tolerance on the unit-norm invariant.
pub const SPHERE_NORM_TOL: f64 = 1e-12;

impl SpherePoint {
    pub fn new(mesh: Arc<QuadratureMesh>, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != mesh.len() {
            return Err(Error::Length {
                expected: mesh.len(),
                actual: coords.len(),
            });
        }
        let norm2 = mesh.inner(&coords, &coords);
        if (norm2 - 1.0).abs() > SPHERE_NORM_TOL {
            return Err(Error::Mass {
                expected: 1.0,
                actual: norm2,
                tolerance: SPHERE_NORM_TOL,
            });
        }
        Ok(SpherePoint { mesh, coords })
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh> {
        &self.mesh
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Round-sphere angle to `other`, via `2·atan2(‖x−y‖, ‖x+y‖)`.
    pub fn angle(&self, other: &SpherePoint) -> f64 {
        let (mut diff, mut sum) = (0.0, 0.0);
        for ((w, a), b) in self
            .mesh
            .weights()
            .iter()
            .zip(&self.coords)
            .zip(&other.coords)
        {
            diff += w * (a - b) * (a - b);
            sum += w * (a + b) * (a + b);
        }
        2.0 * diff.sqrt().atan2(sum.sqrt())
    }
}

pub fn embed(mu: &Density) -> SpherePoint {
    SpherePoint {
        mesh: mu.mesh().clone(),
        coords: mu.values().iter().map(|p| p.sqrt()).collect(),
    }
}

pub fn unembed(x: &SpherePoint) -> Result<Density> {
    for (node, &value) in x.coords.iter().enumerate() {
        if !(value > 0.0) {
            return Err(Error::NonPositive { node, value });
        }
    }
    Density::new(
        x.mesh.clone(),
        x.coords.iter().map(|c| c * c).collect(),
        false,
    )
}

/// Great-circle interpolation `(sin((1−s)θ)·x + sin(sθ)·y)/sin θ`.
pub fn slerp(x: &SpherePoint, y: &SpherePoint, s: f64) -> Result<SpherePoint> {
    ensure_same(&x.mesh, &y.mesh)?;
    if sup_gap(&x.coords, &y.coords) <= 1e-12 {
        return Err(Error::Degenerate("slerp between coincident points".into()));
    }
    let theta = x.angle(y);
    if theta >= PI - 1e-12 {
        return Err(Error::Degenerate("slerp between antipodal points".into()));
    }
    let st = theta.sin();
    let (a, b) = (((1.0 - s) * theta).sin() / st, (s * theta).sin() / st);
    let coords: Vec<f64> = x
        .coords
        .iter()
        .zip(&y.coords)
        .map(|(u, v)| a * u + b * v)
        .collect();
    SpherePoint::new(x.mesh.clone(), coords)
}

/// Fisher–Rao geodesic at arc length `t`, computed on the sphere.
pub fn oracle_geodesic(mu: &Density, mu1: &Density, t: f64) -> Result<Density> {
    let (x, y) = (embed(mu), embed(mu1));
    ensure_same(&x.mesh, &y.mesh)?;
    let length = 2.0 * x.angle(&y);
    if !(t >= -1e-12 && t <= length + 1e-12) {
        return Err(Error::Domain(format!("t = {t} outside [0, {length}]")));
    }
    unembed(&slerp(&x, &y, (t / length).clamp(0.0, 1.0))?)
}

/// Twice the round-sphere angle between `√p₁` and `√p₂` in weighted L₂.
pub fn oracle_distance(mu: &Density, mu1: &Density) -> Result<f64> {
    let (x, y) = (embed(mu), embed(mu1));
    ensure_same(&x.mesh, &y.mesh)?;
    Ok(2.0 * x.angle(&y))
}

/// Side lengths, vertex angle and law-of-cosines residual of a triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleReport {
    /// Side opposite the first vertex.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Riemannian angle at the first vertex.
    pub angle: f64,
    /// `|cos(a/2) − cos(b/2)cos(c/2) − sin(b/2)sin(c/2)cos A|`.
    pub residual: f64,
}

/// Law of cosines for constant curvature ¼ (a sphere of radius 2), with the
/// vertex angle taken intrinsically from logarithm maps.
pub fn spherical_triangle(a_d: &Density, b_d: &Density, c_d: &Density) -> Result<TriangleReport> {
    ensure_same(a_d.mesh(), b_d.mesh())?;
    ensure_same(a_d.mesh(), c_d.mesh())?;
    if a_d.mesh().len() < 3 {
        return Err(Error::Degenerate(
            "a two-node space is one-dimensional; every triangle is flat".into(),
        ));
    }
    for (x, y) in [(a_d, b_d), (a_d, c_d), (b_d, c_d)] {
        if sup_gap(x.values(), y.values()) <= 1e-12 {
            return Err(Error::Degenerate("triangle has coincident vertices".into()));
        }
    }
    let a = fisher_rao_distance(b_d, c_d)?;
    let b = fisher_rao_distance(a_d, c_d)?;
    let c = fisher_rao_distance(a_d, b_d)?;
    let to_b = log_map(a_d, b_d)?;
    let to_c = log_map(a_d, c_d)?;
    let cos_angle =
        fisher_inner(a_d, &to_b, &to_c)? / (fisher_norm(a_d, &to_b)? * fisher_norm(a_d, &to_c)?);
    if cos_angle.abs() > 1.0 - 1e-10 {
        return Err(Error::Degenerate("vertices are collinear".into()));
    }
    let residual = ((0.5 * a).cos()
        - (0.5 * b).cos() * (0.5 * c).cos()
        - (0.5 * b).sin() * (0.5 * c).sin() * cos_angle)
        .abs();
    Ok(TriangleReport {
        a,
        b,
        c,
        angle: cos_angle.acos(),
        residual,
    })
}

pub fn spherical_triangle_residual(a_d: &Density, b_d: &Density, c_d: &Density) -> Result<f64> {
    Ok(spherical_triangle(a_d, b_d, c_d)?.residual)
}

/// Two densities concentrated on complementary halves of the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DiameterWitness {
    pub mu: Density,
    pub mu1: Density,
    pub ell: f64,
    /// Relative value `10^(−sharpness)` off the peak.
    pub floor: f64,
}

/// Densities equal to 1 on one half of the nodes and `10^(−sharpness)` on the
/// other (normalized), and the mirror image. Their distance approaches π as
/// the sharpness grows but never reaches it.
pub fn diameter_witness(mesh: &Arc<QuadratureMesh>, sharpness: f64) -> Result<DiameterWitness> {
    if mesh.len() < 8 {
        return Err(Error::Precondition(format!(
            "diameter witness needs at least 8 nodes, mesh has {}",
            mesh.len()
        )));
    }
    if !(sharpness >= 0.0 && sharpness.is_finite()) {
        return Err(Error::Precondition(format!(
            "sharpness {sharpness} must be a non-negative finite number"
        )));
    }
    let floor = 10f64.powf(-sharpness);
    let half = mesh.len() / 2;
    let profile = |first: bool| -> Vec<f64> {
        (0..mesh.len())
            .map(|i| if (i < half) == first { 1.0 } else { floor })
            .collect()
    };
    let mu = Density::new(mesh.clone(), profile(true), true)?;
    let mu1 = Density::new(mesh.clone(), profile(false), true)?;
    let ell = fisher_rao_distance(&mu, &mu1)?;
    Ok(DiameterWitness {
        mu,
        mu1,
        ell,
        floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn d(v: &[f64]) -> Density {
        Density::new(QuadratureMesh::two_atom(), v.to_vec(), false).unwrap()
    }

    #[test]
    fn embed_unembed() {
        assert_eq!(embed(&d(&[1.0, 1.0])).coords(), &[1.0, 1.0]);
        let x = embed(&d(&[1.6, 0.4]));
        assert_abs_diff_eq!(x.coords()[0], 1.2649111, epsilon = 1e-7);
        assert_abs_diff_eq!(x.coords()[1], 0.6324555, epsilon = 1e-7);
        assert_abs_diff_eq!(x.mesh().inner(x.coords(), x.coords()), 1.0, epsilon = 1e-15);
        let back = unembed(&x).unwrap();
        assert!(back.sup_distance(&d(&[1.6, 0.4])) < 1e-15);
        let bad = SpherePoint::new(QuadratureMesh::two_atom(), vec![2f64.sqrt(), 0.0]).unwrap();
        assert!(unembed(&bad).is_err());
    }

    #[test]
    fn slerp_cases() {
        let m = QuadratureMesh::two_atom();
        let x = SpherePoint::new(m.clone(), vec![2f64.sqrt(), 0.0]).unwrap();
        let y = SpherePoint::new(m.clone(), vec![0.0, 2f64.sqrt()]).unwrap();
        let mid = slerp(&x, &y, 0.5).unwrap();
        assert_abs_diff_eq!(mid.coords()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mid.coords()[1], 1.0, epsilon = 1e-15);
        assert!(sup_gap(slerp(&x, &y, 0.0).unwrap().coords(), x.coords()) < 1e-15);
        assert!(sup_gap(slerp(&x, &y, 1.0).unwrap().coords(), y.coords()) < 1e-15);
        let theta = x.angle(&y);
        for s in [0.1, 0.35, 0.8] {
            assert_abs_diff_eq!(
                x.angle(&slerp(&x, &y, s).unwrap()),
                s * theta,
                epsilon = 1e-12
            );
        }
        assert!(slerp(&x, &x, 0.5).is_err());
        let neg = SpherePoint::new(m, vec![-(2f64.sqrt()), 0.0]).unwrap();
        assert!(slerp(&x, &neg, 0.5).is_err());
    }

    #[test]
    fn oracle_examples() {
        let u = d(&[1.0, 1.0]);
        let a = d(&[1.6, 0.4]);
        let l = oracle_distance(&u, &a).unwrap();
        assert_abs_diff_eq!(l, 0.6435011, epsilon = 1e-7);
        assert_eq!(oracle_distance(&a, &a).unwrap(), 0.0);
        assert!(oracle_geodesic(&u, &a, 0.0).unwrap().sup_distance(&u) < 1e-15);
        let m = oracle_geodesic(&u, &a, l / 2.0).unwrap();
        assert_abs_diff_eq!(m.values()[0], 1.3162278, epsilon = 1e-7);
        assert_abs_diff_eq!(m.values()[1], 0.6837722, epsilon = 1e-7);
    }

    #[test]
    fn flat_triangle_rejected() {
        let r = spherical_triangle_residual(&d(&[1.0, 1.0]), &d(&[1.6, 0.4]), &d(&[0.4, 1.6]));
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn witness_behaviour() {
        let mesh = QuadratureMesh::circle(64).unwrap();
        let w = diameter_witness(&mesh, 6.0).unwrap();
        // C_H = 2√f/(1+f) for halves of equal weight
        let f: f64 = 1e-6;
        let expected = 2.0 * (2.0 * f.sqrt() / (1.0 + f)).acos();
        assert_abs_diff_eq!(w.ell, expected, epsilon = 1e-12);
        assert!(w.ell >= PI - 0.05 && w.ell < PI);
        let w0 = diameter_witness(&mesh, 0.0).unwrap();
        assert!(w0.ell < 1e-7);
        let mut last = 0.0;
        for s in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let w = diameter_witness(&mesh, s).unwrap();
            assert!(w.ell > last && w.ell < PI);
            assert!(w.mu.values().iter().all(|&v| v > 0.0));
            last = w.ell;
        }
        assert!(diameter_witness(&QuadratureMesh::uniform(4).unwrap(), 3.0).is_err());
    }
}
