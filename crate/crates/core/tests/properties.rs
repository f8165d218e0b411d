use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use fisher_rao::chart::{chart_forward, chart_inverse};
use fisher_rao::geodesic::{
    exp_domain_contains, exp_map, geodesic_bvp, geodesic_ivp, geodesic_three_term, log_map,
};
use fisher_rao::means::{alpha_power_mean, ell_continuity_gap, geometric_mean};
use fisher_rao::mesh::{Density, NodeField, QuadratureMesh, TangentDensity};
use fisher_rao::metric::{fisher_inner, fisher_norm, fisher_rao_distance, l2_embed_differential};
use fisher_rao::smoothing::{make_kernel, mollify};
use fisher_rao::sphere::oracle_distance;

fn mesh_strategy() -> impl Strategy<Value = Arc<QuadratureMesh>> {
    prop_oneof![
        Just(QuadratureMesh::two_atom()),
        (3usize..9).prop_map(|n| QuadratureMesh::uniform(n).unwrap()),
        (8usize..24).prop_map(|n| QuadratureMesh::circle(n).unwrap()),
    ]
}

fn density_on(mesh: Arc<QuadratureMesh>) -> impl Strategy<Value = Density> {
    let n = mesh.len();
    prop::collection::vec(-1.5f64..1.5, n).prop_map(move |logs| {
        Density::new(mesh.clone(), logs.iter().map(|x| x.exp()).collect(), true).unwrap()
    })
}

fn pair() -> impl Strategy<Value = (Density, Density)> {
    mesh_strategy().prop_flat_map(|m| (density_on(m.clone()), density_on(m)))
}

fn triple() -> impl Strategy<Value = (Density, Density, Density)> {
    mesh_strategy().prop_flat_map(|m| (density_on(m.clone()), density_on(m.clone()), density_on(m)))
}

fn with_tangent() -> impl Strategy<Value = (Density, TangentDensity)> {
    mesh_strategy().prop_flat_map(|m| {
        let n = m.len();
        (
            density_on(m.clone()),
            prop::collection::vec(-1.0f64..1.0, n),
        )
            .prop_map(move |(mu, z)| {
                let raw = z.iter().zip(mu.values()).map(|(a, p)| a * p).collect();
                let tau = TangentDensity::new(mu.mesh().clone(), raw, true).unwrap();
                (mu, tau)
            })
    })
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_is_symmetric_and_below_pi((a, b) in pair()) {
        let ab = fisher_rao_distance(&a, &b).unwrap();
        let ba = fisher_rao_distance(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-15);
        prop_assert!((0.0..PI).contains(&ab));
        prop_assert!(fisher_rao_distance(&a, &a).unwrap() < 1e-7);
        prop_assert!((ab - oracle_distance(&a, &b).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn triangle_inequality((a, b, c) in triple()) {
        let ac = fisher_rao_distance(&a, &c).unwrap();
        let ab = fisher_rao_distance(&a, &b).unwrap();
        let bc = fisher_rao_distance(&b, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn embedding_pulls_back_a_quarter((mu, tau) in with_tangent()) {
        let d = l2_embed_differential(&mu, &tau).unwrap();
        let sphere = mu.mesh().inner(&d, &d);
        let g = fisher_inner(&mu, &tau, &tau).unwrap();
        prop_assert!((g - 4.0 * sphere).abs() <= 1e-13 * g.max(1.0));
    }

    #[test]
    fn three_term_matches_ivp((a, b) in pair()) {
        prop_assume!(sup(a.values(), b.values()) > 1e-6);
        let seg = geodesic_bvp(&a, &b).unwrap();
        for k in 0..=32 {
            let t = seg.length() * k as f64 / 32.0;
            let x = geodesic_three_term(&a, &b, t).unwrap();
            let y = geodesic_ivp(seg.base(), seg.unit_velocity(), t).unwrap();
            prop_assert!(x.sup_distance(&y) < 1e-12, "t = {t}: {}", x.sup_distance(&y));
        }
        prop_assert!(seg.end().unwrap().sup_distance(&b) < 1e-10);
    }

    #[test]
    fn geodesics_have_unit_speed((a, b) in pair()) {
        prop_assume!(sup(a.values(), b.values()) > 1e-3);
        let seg = geodesic_bvp(&a, &b).unwrap();
        let h = 1e-4;
        let t = 0.5 * seg.length();
        let (lo, hi) = (seg.sample(t - h).unwrap(), seg.sample(t + h).unwrap());
        let raw: Vec<f64> = hi.values().iter().zip(lo.values()).map(|(x, y)| (x - y) / (2.0 * h)).collect();
        let vel = TangentDensity::new(a.mesh().clone(), raw, true).unwrap();
        let at = seg.sample(t).unwrap();
        let speed = fisher_norm(&at, &vel).unwrap();
        prop_assert!((speed - 1.0).abs() < 1e-6, "{speed}");
    }

    #[test]
    fn exp_inverts_log((a, b) in pair()) {
        let tau = log_map(&a, &b).unwrap();
        prop_assert!(exp_map(&a, &tau).unwrap().sup_distance(&b) < 1e-10);
    }

    #[test]
    fn log_inverts_exp((mu, tau) in with_tangent(), scale in 0.05f64..2.5) {
        let n = fisher_norm(&mu, &tau).unwrap();
        prop_assume!(n > 1e-3);
        let tau = tau.scaled(scale / n);
        prop_assume!(exp_domain_contains(&mu, &tau, PI));
        let back = log_map(&mu, &exp_map(&mu, &tau).unwrap()).unwrap();
        prop_assert!(sup(back.values(), tau.values()) < 1e-10);
    }

    #[test]
    fn power_means_within_1e_5_for_nearby_pairs(
        (a, z) in mesh_strategy().prop_flat_map(|m| {
            let n = m.len();
            (density_on(m), prop::collection::vec(-0.12f64..0.12, n))
        })
    ) {
        let raw = a.values().iter().zip(&z).map(|(p, e)| p * e.exp()).collect();
        let b = Density::new(a.mesh().clone(), raw, true).unwrap();
        let g = geometric_mean(&a, &b).unwrap();
        for alpha in [1e-3, -1e-3, 1e-4] {
            prop_assert!(alpha_power_mean(&a, &b, alpha).unwrap().sup_distance(&g) < 1e-5);
        }
    }

    #[test]
    fn chart_round_trip((a, b) in pair()) {
        let u = chart_forward(&a, &b).unwrap();
        prop_assert!(chart_inverse(&u).unwrap().sup_distance(&b) < 1e-12);
    }

    // ln m = ln g + ln cosh(αL/2)/α + const with L = ln(p₂/p₁), and
    // 0 ≤ ln cosh x ≤ x²/2, so |m − g| ≤ g·(exp(|α|·max L²/4) − 1).
    #[test]
    fn power_means_approach_geometric((a, b) in pair()) {
        let g = geometric_mean(&a, &b).unwrap();
        let l2 = a.values().iter().zip(b.values()).map(|(x, y)| (y / x).ln().powi(2)).fold(0.0, f64::max);
        let gmax = g.values().iter().copied().fold(0.0, f64::max);
        for alpha in [1e-3, -1e-3, 1e-4] {
            let m = alpha_power_mean(&a, &b, alpha).unwrap();
            let bound = gmax * ((alpha.abs() * l2 / 4.0).exp() - 1.0) + 1e-14;
            prop_assert!(m.sup_distance(&g) <= bound, "{} > {bound}", m.sup_distance(&g));
        }
        let sym = geometric_mean(&b, &a).unwrap();
        prop_assert_eq!(g.values(), sym.values());
    }

    #[test]
    fn mollified_lengths_obey_the_continuity_bound(
        n in 16usize..64,
        logs in prop::collection::vec(-1.0f64..1.0, 128),
        delta_frac in 0.1f64..0.9,
    ) {
        let mesh = QuadratureMesh::circle(n).unwrap();
        let make = |off: usize| {
            Density::new(mesh.clone(), logs[off..off + n].iter().map(|x| x.exp()).collect(), true).unwrap()
        };
        let (a, b) = (make(0), make(64));
        let lo = 2.0 * PI / n as f64;
        let kernel = make_kernel(&mesh, lo + delta_frac * (PI - lo)).unwrap();
        let (sa, sb) = (mollify(&a, &kernel).unwrap(), mollify(&b, &kernel).unwrap());
        prop_assert!((sa.mass() - 1.0).abs() < 1e-12);
        prop_assert!(sa.values().iter().all(|&v| v > 0.0));
        let (lhs, rhs) = ell_continuity_gap(&a, &b, &sa, &sb).unwrap();
        prop_assert!(lhs <= rhs, "{lhs} > {rhs}");
        let spread = |d: &Density| {
            let v = d.values();
            v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min)
        };
        prop_assert!(spread(&sa) <= spread(&a) * (1.0 + 1e-12));
    }
}
