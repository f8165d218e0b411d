//! The property suite: seeded random checks of every closed form against an
//! independent computation, grouped into numbered criteria.
//!
//! Each [`Check`] records the worst residual seen over its samples and the
//! tolerance it is held to. [`Suite::run_all`] drives the whole thing; the
//! CLI `verify` command and the `acceptance` test both call it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::chart::{
    chart_forward, chart_inverse, chart_transition, covariance_metric, geometric_mean_in_coords,
    ChartVector,
};
use crate::error::{Error, Result};
use crate::geodesic::{
    exp_domain_contains, exp_map, gauss_orthogonality, geodesic_bvp, geodesic_ode_residual,
    geodesic_three_term, log_map, midpoint, positivity_breakdown, relaxed_antipodal, relaxed_curve,
    tangent_line_intersection, three_term_coeffs, GeodesicSegment,
};
use crate::means::{alpha_power_mean, ell_continuity_gap, geometric_mean, phi_continuity_gap};
use crate::mesh::{sup_gap, Density, NodeField, QuadratureMesh, TangentDensity};
use crate::metric::{fisher_inner, fisher_rao_distance, hellinger_affinity, hellinger_distance};
use crate::sampling::{
    orthogonalize, random_density, random_tangent, random_unit_tangent, rng, standard_meshes,
};
use crate::smoothing::{make_kernel, mollify, mollify_with_report};
use crate::sphere::{
    diameter_witness, embed, oracle_distance, oracle_geodesic, spherical_triangle_residual,
};

/// Step for every finite-difference check.
pub const FD_STEP: f64 = 1e-4;

/// Log-normal spread of random densities.
const SPREAD: f64 = 0.8;

/// One property with its worst residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
    /// `worst <= tolerance` passes rather than `worst < tolerance`.
    pub inclusive: bool,
    /// Set when the check could not be evaluated.
    pub note: Option<String>,
}

impl Check {
    /// Passes when `worst < tolerance`.
    pub fn below(name: impl Into<String>, worst: f64, tolerance: f64, samples: usize) -> Self {
        Check {
            name: name.into(),
            worst,
            tolerance,
            samples,
            passed: worst < tolerance,
            inclusive: false,
            note: None,
        }
    }

    /// Passes when `worst <= tolerance`; used for inequalities where
    /// `worst` is the largest violation.
    pub fn at_most(name: impl Into<String>, worst: f64, tolerance: f64, samples: usize) -> Self {
        Check {
            passed: worst <= tolerance,
            inclusive: true,
            ..Check::below(name, worst, tolerance, samples)
        }
    }

    pub fn failed(name: impl Into<String>, err: &Error) -> Self {
        Check {
            name: name.into(),
            worst: f64::NAN,
            tolerance: f64::NAN,
            samples: 0,
            passed: false,
            inclusive: false,
            note: Some(err.to_string()),
        }
    }

    /// Re-judges the check against a different tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        if self.note.is_none() {
            self.tolerance = tolerance;
            self.passed = if self.inclusive {
                self.worst <= tolerance
            } else {
                self.worst < tolerance
            };
        }
        self
    }

    /// The name reduced to lowercase ASCII words joined by `-`, used to
    /// address a check from the command line.
    pub fn slug(&self) -> String {
        slug(&self.name)
    }
}

pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_end_matches('-').to_string()
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "pass" } else { "FAIL" };
        match &self.note {
            Some(note) => write!(f, "{status} {}: {note}", self.name),
            None => write!(
                f,
                "{status} {}: worst {:.3e} (tol {:.1e}, n = {})",
                self.name, self.worst, self.tolerance, self.samples
            ),
        }
    }
}

/// A numbered group of checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// `PASS [03] title` or `FAIL [03] title (failing check names)`.
    pub fn summary(&self) -> String {
        if self.passed() {
            format!("PASS [{:02}] {}", self.id, self.title)
        } else {
            let bad: Vec<&str> = self
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            format!("FAIL [{:02}] {} ({})", self.id, self.title, bad.join(", "))
        }
    }
}

/// Running maximum of a residual.
#[derive(Debug, Default, Clone, Copy)]
struct Worst {
    value: f64,
    count: usize,
}

impl Worst {
    fn push(&mut self, x: f64) {
        // NaN must not hide behind max()
        self.value = if x.is_nan() {
            f64::NAN
        } else {
            self.value.max(x)
        };
        self.count += 1;
    }
}

/// Seeded sampler plus the largest distance evaluated so far.
pub struct Suite {
    rng: ChaCha8Rng,
    seed: u64,
    max_ell: f64,
    ell_evaluations: usize,
}

impl Suite {
    pub fn new(seed: u64) -> Self {
        Suite {
            rng: rng(seed),
            seed,
            max_ell: 0.0,
            ell_evaluations: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Largest Fisher–Rao distance computed by any criterion so far.
    pub fn max_ell(&self) -> f64 {
        self.max_ell
    }

    fn note_ell(&mut self, ell: f64) -> f64 {
        self.ell_evaluations += 1;
        if ell.is_nan() || ell > self.max_ell {
            self.max_ell = if ell.is_nan() { f64::NAN } else { ell };
        }
        ell
    }

    fn ell(&mut self, a: &Density, b: &Density) -> Result<f64> {
        let ell = fisher_rao_distance(a, b)?;
        Ok(self.note_ell(ell))
    }

    fn density(&mut self, mesh: &Arc<QuadratureMesh>) -> Density {
        random_density(&mut self.rng, mesh, SPREAD)
    }

    /// Random pair with distinct members.
    fn pair(&mut self, mesh: &Arc<QuadratureMesh>) -> (Density, Density) {
        loop {
            let a = self.density(mesh);
            let b = self.density(mesh);
            if sup_gap(a.values(), b.values()) > 1e-6 {
                return (a, b);
            }
        }
    }

    /// Every criterion, in order. The diameter criterion is evaluated last
    /// so that it sees the distances computed by all the others.
    pub fn run_all(&mut self) -> Vec<Criterion> {
        let mut out = vec![
            self.oracle_equivalence(),
            self.worked_example(),
            self.three_term_suite(),
            self.tangent_intersection(),
            self.metric_exp_log(),
            self.curvature(),
        ];
        let rest = vec![
            self.continuity(),
            self.charts(),
            self.relaxed(),
            self.mollifier(),
        ];
        out.push(self.diameter());
        out.extend(rest);
        out
    }

    /// Three-term geodesic and distance against the sphere computations.
    pub fn oracle_equivalence(&mut self) -> Criterion {
        let start = Instant::now();
        let meshes = standard_meshes();
        let (mut geo, mut dist) = (Worst::default(), Worst::default());
        let mut error = None;
        for i in 0..500 {
            let mesh = &meshes[i % meshes.len()];
            let (a, b) = self.pair(mesh);
            let res = (|| -> Result<()> {
                let ell = self.ell(&a, &b)?;
                let oracle = oracle_distance(&a, &b)?;
                self.note_ell(oracle);
                dist.push((ell - oracle).abs());
                for k in 0..=32 {
                    let t = ell * k as f64 / 32.0;
                    let g = geodesic_three_term(&a, &b, t)?;
                    let o = oracle_geodesic(&a, &b, t)?;
                    geo.push(g.sup_distance(&o));
                }
                Ok(())
            })();
            if let Err(e) = res {
                error = Some(e);
                break;
            }
        }
        let secs = start.elapsed().as_secs_f64();
        let checks = match error {
            Some(e) => vec![Check::failed("oracle sampling", &e)],
            None => vec![
                Check::below("three-term vs slerp (sup)", geo.value, 1e-10, geo.count),
                Check::below("distance vs sphere angle", dist.value, 1e-14, dist.count),
                Check::below("runtime seconds", secs, 10.0, 1),
            ],
        };
        Criterion {
            id: 1,
            title: "oracle equivalence",
            checks,
        }
    }

    /// The two-atom pair (1, 1), (1.6, 0.4) against hand-derived values.
    pub fn worked_example(&mut self) -> Criterion {
        let checks = match self.worked_example_checks() {
            Ok(c) => c,
            Err(e) => vec![Check::failed("worked example", &e)],
        };
        Criterion {
            id: 2,
            title: "two-atom worked example",
            checks,
        }
    }

    fn worked_example_checks(&mut self) -> Result<Vec<Check>> {
        let mesh = QuadratureMesh::two_atom();
        let mu = Density::new(mesh.clone(), vec![1.0, 1.0], false)?;
        let mu1 = Density::new(mesh.clone(), vec![1.6, 0.4], false)?;
        let tol = 1e-7;
        let gap = |got: &[f64], want: &[f64]| sup_gap(got, want);
        let mut checks = Vec::new();

        // sphere path: inner product of the embeddings
        let (x, y) = (embed(&mu), embed(&mu1));
        let c_oracle = mesh.inner(x.coords(), y.coords());
        let c_lib = hellinger_affinity(&mu, &mu1)?;
        let c_want = 0.948_683_3;
        checks.push(Check::below(
            "affinity",
            (c_lib - c_want).abs().max((c_oracle - c_want).abs()),
            tol,
            2,
        ));

        let l_lib = self.ell(&mu, &mu1)?;
        let l_oracle = self.note_ell(oracle_distance(&mu, &mu1)?);
        let l_want = 0.643_501_1;
        checks.push(Check::below(
            "distance",
            (l_lib - l_want).abs().max((l_oracle - l_want).abs()),
            tol,
            2,
        ));

        let phi_want = [4.0 / 3.0, 2.0 / 3.0];
        let phi_lib = geometric_mean(&mu, &mu1)?;
        let phi_oracle: Vec<f64> = x
            .coords()
            .iter()
            .zip(y.coords())
            .map(|(a, b)| a * b / c_oracle)
            .collect();
        checks.push(Check::below(
            "geometric mean",
            gap(phi_lib.values(), &phi_want).max(gap(&phi_oracle, &phi_want)),
            tol,
            2,
        ));

        let seg = geodesic_bvp(&mu, &mu1)?;
        // the sphere tangent at √p toward √p1, pulled back by 2√p·(·)
        let half = 0.5 * l_oracle;
        let vel_oracle: Vec<f64> = x
            .coords()
            .iter()
            .zip(y.coords())
            .map(|(a, b)| 2.0 * a * (b - c_oracle * a) / half.sin() / 2.0)
            .collect();
        let vel_want = [1.0, -1.0];
        checks.push(Check::below(
            "unit velocity",
            gap(seg.unit_velocity().values(), &vel_want).max(gap(&vel_oracle, &vel_want)),
            tol,
            2,
        ));

        let mut path = Worst::default();
        for k in 0..=16 {
            let t = l_lib * k as f64 / 16.0;
            let want = [1.0 + t.sin(), 1.0 - t.sin()];
            let lib = geodesic_three_term(&mu, &mu1, t)?;
            let oracle = oracle_geodesic(&mu, &mu1, t)?;
            path.push(gap(lib.values(), &want).max(gap(oracle.values(), &want)));
        }
        checks.push(Check::below(
            "geodesic 1 +- sin t",
            path.value,
            tol,
            path.count,
        ));

        let mid_want = [1.316_227_8, 0.683_772_2];
        let mid_lib = midpoint(&mu, &mu1)?;
        let mid_oracle = oracle_geodesic(&mu, &mu1, half)?;
        checks.push(Check::below(
            "midpoint",
            gap(mid_lib.values(), &mid_want).max(gap(mid_oracle.values(), &mid_want)),
            tol,
            2,
        ));
        Ok(checks)
    }

    /// Coefficient simplex, endpoint velocities and the midpoint identities.
    pub fn three_term_suite(&mut self) -> Criterion {
        let meshes = standard_meshes();
        let (mut simplex, mut vel, mut mid, mut equi) = Default::default();
        let mut error = None;
        for i in 0..500 {
            let mesh = &meshes[i % meshes.len()];
            let (a, b) = self.pair(mesh);
            if let Err(e) =
                self.three_term_pair(&a, &b, &mut simplex, &mut vel, &mut mid, &mut equi)
            {
                error = Some(e);
                break;
            }
        }
        let checks = match error {
            Some(e) => vec![Check::failed("three-term sampling", &e)],
            None => vec![
                Check::below("coefficient simplex", simplex.value, 1e-12, simplex.count),
                Check::below("endpoint velocities vs FD", vel.value, 1e-6, vel.count),
                Check::below("midpoint = power mean ½", mid.value, 1e-12, mid.count),
                Check::below("midpoint equidistance", equi.value, 1e-10, equi.count),
            ],
        };
        Criterion {
            id: 3,
            title: "three-term representation",
            checks,
        }
    }

    fn three_term_pair(
        &mut self,
        a: &Density,
        b: &Density,
        simplex: &mut Worst,
        vel: &mut Worst,
        mid: &mut Worst,
        equi: &mut Worst,
    ) -> Result<()> {
        let seg = geodesic_bvp(a, b)?;
        let l = self.note_ell(seg.length());
        for k in 0..=512 {
            let c = three_term_coeffs(l, l * k as f64 / 512.0)?;
            let neg = (-c.a1).max(-c.a2).max(-c.a3).max(0.0);
            simplex.push(neg.max((c.sum() - 1.0).abs()));
        }
        vel.push(endpoint_velocity_gap(&seg, a, b)?);

        let m = midpoint(a, b)?;
        let m_alpha = alpha_power_mean(a, b, 0.5)?;
        let m_three = geodesic_three_term(a, b, 0.5 * l)?;
        mid.push(m.sup_distance(&m_alpha).max(m.sup_distance(&m_three)));

        let da = self.ell(a, &m)?;
        let db = self.ell(&m, b)?;
        equi.push((da - 0.5 * l).abs().max((db - 0.5 * l).abs()));
        Ok(())
    }

    /// Tangent lines at both ends meet at the geometric mean.
    pub fn tangent_intersection(&mut self) -> Criterion {
        let meshes = standard_meshes();
        let mut w = Worst::default();
        let mut error = None;
        for i in 0..200 {
            let (a, b) = self.pair(&meshes[i % meshes.len()]);
            let res = tangent_line_intersection(&a, &b)
                .and_then(|x| Ok(x.sup_distance(&geometric_mean(&a, &b)?)));
            match res {
                Ok(g) => w.push(g),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        let checks = match error {
            Some(e) => vec![Check::failed("tangent-line intersection", &e)],
            None => vec![Check::below(
                "intersection = geometric mean",
                w.value,
                1e-10,
                w.count,
            )],
        };
        Criterion {
            id: 4,
            title: "tangent lines meet at the geometric mean",
            checks,
        }
    }

    /// Triangle inequality, exp/log inverses, geodesic ODE and Gauss lemma.
    pub fn metric_exp_log(&mut self) -> Criterion {
        let checks = match self.metric_exp_log_checks() {
            Ok(c) => c,
            Err(e) => vec![Check::failed("metric/exp-log sampling", &e)],
        };
        Criterion {
            id: 5,
            title: "metric, exp/log, ODE and Gauss lemma",
            checks,
        }
    }

    fn metric_exp_log_checks(&mut self) -> Result<Vec<Check>> {
        let meshes = standard_meshes();
        let mut tri = Worst::default();
        for i in 0..1000 {
            let mesh = &meshes[i % meshes.len()];
            let (a, b, c) = (self.density(mesh), self.density(mesh), self.density(mesh));
            let excess = self.ell(&a, &c)? - self.ell(&a, &b)? - self.ell(&b, &c)?;
            tri.push(excess.max(0.0));
        }

        let (mut exp_log, mut log_exp) = (Worst::default(), Worst::default());
        for i in 0..500 {
            let mesh = &meshes[i % meshes.len()];
            let (a, b) = self.pair(mesh);
            let back = exp_map(&a, &log_map(&a, &b)?)?;
            exp_log.push(back.sup_distance(&b));

            let tau = self.domain_tangent(&a, 2.5)?;
            let image = exp_map(&a, &tau)?;
            self.ell(&a, &image)?;
            let again = log_map(&a, &image)?;
            log_exp.push(sup_gap(again.values(), tau.values()));
        }

        let (mut ode, mut gauss) = (Worst::default(), Worst::default());
        for i in 0..300 {
            let mesh = &meshes[i % meshes.len()];
            let (a, b) = self.pair(mesh);
            let seg = geodesic_bvp(&a, &b)?;
            let l = self.note_ell(seg.length());
            if l > 16.0 * FD_STEP {
                for _ in 0..3 {
                    let t = self.rng.gen_range(5.0 * FD_STEP..l - 5.0 * FD_STEP);
                    ode.push(geodesic_ode_residual(&seg, t, FD_STEP)?);
                }
            }

            let tau = random_unit_tangent(&mut self.rng, &a)?;
            let raw = random_tangent(&mut self.rng, &a);
            let dtau = orthogonalize(&a, &raw, &tau)?;
            let reach = positivity_breakdown(&a, &tau)?.unwrap_or(PI).min(PI);
            let t = self.rng.gen_range(0.05..0.95) * reach;
            gauss.push(gauss_orthogonality(&a, &tau, &dtau, t)?.abs());
        }

        Ok(vec![
            Check::at_most("triangle inequality excess", tri.value, 1e-12, tri.count),
            Check::below("exp of log", exp_log.value, 1e-10, exp_log.count),
            Check::below("log of exp", log_exp.value, 1e-10, log_exp.count),
            Check::below("geodesic ODE residual", ode.value, 1e-6, ode.count),
            Check::below("Gauss orthogonality", gauss.value, 1e-10, gauss.count),
        ])
    }

    /// A random tangent with norm below `max_norm` inside the exp domain.
    fn domain_tangent(&mut self, mu: &Density, max_norm: f64) -> Result<TangentDensity> {
        loop {
            let dir = random_unit_tangent(&mut self.rng, mu)?;
            let tau = dir.scaled(self.rng.gen_range(0.05..max_norm));
            if exp_domain_contains(mu, &tau, PI) {
                return Ok(tau);
            }
        }
    }

    /// Law of cosines on the radius-2 sphere.
    pub fn curvature(&mut self) -> Criterion {
        let meshes = [
            QuadratureMesh::uniform(4).expect("4-atom mesh"),
            QuadratureMesh::circle(16).expect("16-node circle"),
        ];
        let mut w = Worst::default();
        let mut error = None;
        let mut skipped = 0usize;
        while w.count < 200 && error.is_none() {
            let mesh = &meshes[w.count % 2];
            let (a, b, c) = (self.density(mesh), self.density(mesh), self.density(mesh));
            match spherical_triangle_residual(&a, &b, &c) {
                Ok(r) => {
                    for (x, y) in [(&a, &b), (&b, &c), (&a, &c)] {
                        if let Err(e) = self.ell(x, y) {
                            error = Some(e);
                        }
                    }
                    w.push(r);
                }
                Err(Error::Degenerate(_)) if skipped < 1000 => skipped += 1,
                Err(e) => error = Some(e),
            }
        }
        let checks = match error {
            Some(e) => vec![Check::failed("triangle sampling", &e)],
            None => vec![Check::below(
                "law-of-cosines residual",
                w.value,
                1e-8,
                w.count,
            )],
        };
        Criterion {
            id: 6,
            title: "curvature one quarter",
            checks,
        }
    }

    /// Diameter witness, plus the bound `ℓ < π` over every distance the
    /// suite has computed up to this point.
    pub fn diameter(&mut self) -> Criterion {
        let mut checks = Vec::new();
        match QuadratureMesh::circle(64).and_then(|m| diameter_witness(&m, 6.0)) {
            Ok(wit) => {
                let ell = self.note_ell(wit.ell);
                checks.push(Check::at_most(
                    "pi minus witness distance",
                    PI - ell,
                    0.05,
                    1,
                ));
                let floor = wit
                    .mu
                    .values()
                    .iter()
                    .chain(wit.mu1.values())
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                checks.push(Check::below("witness positivity", -floor, 0.0, 2));
            }
            Err(e) => checks.push(Check::failed("diameter witness", &e)),
        }
        checks.push(Check::below(
            "max ℓ over the suite",
            self.max_ell,
            PI,
            self.ell_evaluations,
        ));
        Criterion {
            id: 7,
            title: "diameter approaches π",
            checks,
        }
    }

    /// Continuity bounds and the two distance-ball properties.
    pub fn continuity(&mut self) -> Criterion {
        let checks = match self.continuity_checks() {
            Ok(c) => c,
            Err(e) => vec![Check::failed("continuity sampling", &e)],
        };
        Criterion {
            id: 8,
            title: "continuity and distance balls",
            checks,
        }
    }

    fn continuity_checks(&mut self) -> Result<Vec<Check>> {
        let meshes = standard_meshes();
        let (mut ell_gap, mut phi_gap) = (Worst::default(), Worst::default());
        for i in 0..1000 {
            let mesh = &meshes[i % meshes.len()];
            let (a, b) = self.pair(mesh);
            // half the primes are small perturbations, half independent
            let (ap, bp) = if i % 2 == 0 {
                (self.perturb(&a, 0.05)?, self.perturb(&b, 0.05)?)
            } else {
                (self.density(mesh), self.density(mesh))
            };
            let (l, r) = ell_continuity_gap(&a, &b, &ap, &bp)?;
            ell_gap.push((l - r).max(0.0));
            let (l, r) = phi_continuity_gap(&a, &b, &ap, &bp)?;
            phi_gap.push((l - r).max(0.0));
        }

        let mut mismatches = 0usize;
        for i in 0..1000 {
            let mesh = &meshes[i % meshes.len()];
            let (a, b) = self.pair(mesh);
            let eps = self.rng.gen_range(0.05..PI);
            let inside_ell = self.ell(&a, &b)? < eps;
            let radius = (2.0 - 2.0 * (0.5 * eps).cos()).sqrt();
            let l2 = mesh.l2_distance(embed(&a).coords(), embed(&b).coords());
            if inside_ell != (l2 < radius) {
                mismatches += 1;
            }
        }

        let eps = 0.2;
        let mut ratio = Worst::default();
        let mut outside = 0usize;
        for i in 0..1000 {
            let mesh = &meshes[i % meshes.len()];
            let centre = self.density(mesh);
            let m1 = self.ball_point(&centre, eps)?;
            let m2 = self.ball_point(&centre, eps)?;
            if self.ell(&centre, &m1)? >= eps || self.ell(&centre, &m2)? >= eps {
                outside += 1;
            }
            ratio.push(self.ell(&m1, &m2)? / (4.0 * eps));
        }

        Ok(vec![
            Check::at_most("distance bound excess", ell_gap.value, 0.0, ell_gap.count),
            Check::at_most(
                "geometric-mean bound excess",
                phi_gap.value,
                0.0,
                phi_gap.count,
            ),
            Check::at_most("L2-ball disagreements", mismatches as f64, 0.0, 1000),
            Check::at_most("ball draws outside the eps ball", outside as f64, 0.0, 1000),
            Check::below("ball pair distance / 4 eps", ratio.value, 1.0, ratio.count),
        ])
    }

    /// Multiplicative log-normal jitter of relative size `scale`.
    fn perturb(&mut self, mu: &Density, scale: f64) -> Result<Density> {
        let jitter = random_density(&mut self.rng, mu.mesh(), scale);
        let raw = mu
            .values()
            .iter()
            .zip(jitter.values())
            .map(|(p, j)| p * j)
            .collect();
        Density::new(mu.mesh().clone(), raw, true)
    }

    /// `exp_μ(τ)` with `|τ|` uniform in `(0, ε)`.
    fn ball_point(&mut self, centre: &Density, eps: f64) -> Result<Density> {
        let dir = random_unit_tangent(&mut self.rng, centre)?;
        let r = self.rng.gen_range(0.0..eps);
        exp_map(centre, &dir.scaled(r))
    }

    /// Exponential coordinates.
    pub fn charts(&mut self) -> Criterion {
        let checks = match self.chart_checks() {
            Ok(c) => c,
            Err(e) => vec![Check::failed("chart sampling", &e)],
        };
        Criterion {
            id: 9,
            title: "exponential charts",
            checks,
        }
    }

    fn chart_checks(&mut self) -> Result<Vec<Check>> {
        let meshes = standard_meshes();
        let (mut round, mut trans, mut cov, mut gm) = (
            Worst::default(),
            Worst::default(),
            Worst::default(),
            Worst::default(),
        );
        for i in 0..500 {
            let mesh = &meshes[i % meshes.len()];
            let (mu, nu, rho) = (self.density(mesh), self.density(mesh), self.density(mesh));

            let u = chart_forward(&mu, &nu)?;
            round.push(chart_inverse(&u)?.sup_distance(&nu));
            let v = ChartVector::centered(
                mu.clone(),
                random_tangent(&mut self.rng, &mu).into_values(),
            )?;
            round.push(sup_gap(
                chart_forward(&mu, &chart_inverse(&v)?)?.values(),
                v.values(),
            ));

            let direct = chart_transition(&u, &rho)?;
            let via = chart_transition(&chart_transition(&u, &nu)?, &rho)?;
            trans.push(sup_gap(direct.values(), via.values()));
            trans.push(chart_inverse(&direct)?.sup_distance(&nu));

            let (t1, t2) = (
                random_tangent(&mut self.rng, &mu),
                random_tangent(&mut self.rng, &mu),
            );
            let coord = |t: &TangentDensity| -> Vec<f64> {
                t.values()
                    .iter()
                    .zip(mu.values())
                    .map(|(q, p)| q / p)
                    .collect()
            };
            let c = covariance_metric(&mu, &coord(&t1), &coord(&t2))?;
            cov.push((c - fisher_inner(&mu, &t1, &t2)?).abs());

            let up = chart_forward(&nu, &rho)?;
            let base = geometric_mean(&mu, &nu)?;
            let w = geometric_mean_in_coords(&u, &up, &base)?;
            let want = geometric_mean(&chart_inverse(&u)?, &chart_inverse(&up)?)?;
            gm.push(chart_inverse(&w)?.sup_distance(&want));
        }
        Ok(vec![
            Check::below("chart round trips", round.value, 1e-12, round.count),
            Check::below("transition composition", trans.value, 1e-12, trans.count),
            Check::below("covariance = Fisher metric", cov.value, 1e-12, cov.count),
            Check::below("geometric mean in coordinates", gm.value, 1e-12, gm.count),
        ])
    }

    /// The split-velocity curve on the symmetric two-atom pair.
    pub fn relaxed(&mut self) -> Criterion {
        let run = || -> Result<Vec<Check>> {
            let mesh = QuadratureMesh::two_atom();
            let mu = Density::new(mesh.clone(), vec![1.6, 0.4], false)?;
            let mu1 = Density::new(mesh.clone(), vec![0.4, 1.6], false)?;
            let r = relaxed_antipodal(&mu, &mu1)?;
            let end = relaxed_curve(&mu, &r.tau1, r.cos_half_length, PI);
            let norm_sq: f64 = mesh
                .weights()
                .iter()
                .zip(&r.tau1)
                .zip(mu.values())
                .map(|((w, v), p)| w * (r.cos_half_length * v).powi(2) / p)
                .sum();
            Ok(vec![
                Check::below("endpoint at t = π", sup_gap(&end, mu1.values()), 1e-12, 2),
                Check::below("unit initial speed", (norm_sq - 1.0).abs(), 1e-12, 1),
            ])
        };
        let checks = run().unwrap_or_else(|e| vec![Check::failed("relaxed curve", &e)]);
        Criterion {
            id: 10,
            title: "relaxed antipodal curve",
            checks,
        }
    }

    /// Mass, positivity and convergence of the mollifier.
    pub fn mollifier(&mut self) -> Criterion {
        let checks = match self.mollifier_checks() {
            Ok(c) => c,
            Err(e) => vec![Check::failed("mollifier", &e)],
        };
        Criterion {
            id: 11,
            title: "mollifier",
            checks,
        }
    }

    fn mollifier_checks(&mut self) -> Result<Vec<Check>> {
        let (mut mass, mut pos) = (Worst::default(), 0usize);
        let mut samples = 0usize;
        for n in [16usize, 64, 256] {
            let mesh = QuadratureMesh::circle(n)?;
            for _ in 0..100 {
                let p = random_density(&mut self.rng, &mesh, 1.5);
                let lo = 2.0 * PI / n as f64;
                let delta = self.rng.gen_range(1.05 * lo..0.9 * PI);
                let out = mollify_with_report(&p, &make_kernel(&mesh, delta)?)?.density;
                mass.push((out.mass() - 1.0).abs());
                if out.values().iter().any(|&v| !(v > 0.0)) {
                    pos += 1;
                }
                samples += 1;
            }
        }

        let mesh = QuadratureMesh::circle(256)?;
        let tent = tent_density(&mesh)?;
        let mut converge = Worst::default();
        for delta in [0.045, 0.03] {
            converge.push(mollify(&tent, &make_kernel(&mesh, delta)?)?.sup_distance(&tent));
        }
        let errs: Vec<f64> = [0.4, 0.2, 0.1]
            .iter()
            .map(|&d| Ok(mollify(&tent, &make_kernel(&mesh, d)?)?.sup_distance(&tent)))
            .collect::<Result<_>>()?;
        let rise = errs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);

        Ok(vec![
            Check::below("unit mass", mass.value, 1e-12, mass.count),
            Check::at_most("non-positive outputs", pos as f64, 0.0, samples),
            Check::below(
                "sup gap at delta < 0.05 (n = 256)",
                converge.value,
                0.01,
                converge.count,
            ),
            Check::below("halving delta shrinks the gap", rise, 0.0, 3),
        ])
    }
}

/// `1 + ½·(1 − 2|θ − π|/π)` on a circle mesh: mean one, Lipschitz with
/// constant `1/π`, not differentiable at `θ = 0` and `θ = π`.
pub fn tent_density(mesh: &Arc<QuadratureMesh>) -> Result<Density> {
    let pos = mesh
        .positions()
        .ok_or_else(|| Error::InvalidMesh("tent density needs a circle mesh".into()))?;
    let raw = pos
        .iter()
        .map(|th| 1.0 + 0.5 * (1.0 - 2.0 * (th - PI).abs() / PI))
        .collect();
    Density::new(mesh.clone(), raw, true)
}

/// Sup-norm gap between central differences of the segment at `0` and `ℓ`
/// and the closed forms `cot(ℓ/2)(φ − μ)` and `−cot(ℓ/2)(φ − μ₁)`.
fn endpoint_velocity_gap(seg: &GeodesicSegment, a: &Density, b: &Density) -> Result<f64> {
    let l = seg.length();
    let phi = geometric_mean(a, b)?;
    let cot = 1.0 / (0.5 * l).tan();
    let h = FD_STEP;
    let fd = |t: f64| -> Result<Vec<f64>> {
        let (lo, hi) = (seg.sample(t - h)?, seg.sample(t + h)?);
        Ok(hi
            .values()
            .iter()
            .zip(lo.values())
            .map(|(x, y)| (x - y) / (2.0 * h))
            .collect())
    };
    let start: Vec<f64> = phi
        .values()
        .iter()
        .zip(a.values())
        .map(|(g, p)| cot * (g - p))
        .collect();
    let end: Vec<f64> = phi
        .values()
        .iter()
        .zip(b.values())
        .map(|(g, p)| -cot * (g - p))
        .collect();
    Ok(sup_gap(&fd(0.0)?, &start).max(sup_gap(&fd(l)?, &end)))
}

/// Checks on one user-supplied pair: the CLI `verify` command on files.
pub fn verify_pair(mu: &Density, mu1: &Density) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let ell = fisher_rao_distance(mu, mu1)?;
    let oracle = oracle_distance(mu, mu1)?;
    checks.push(Check::below(
        "distance vs sphere angle",
        (ell - oracle).abs(),
        1e-14,
        1,
    ));
    checks.push(Check::below("distance below pi", ell, PI, 1));
    let c = hellinger_affinity(mu, mu1)?;
    checks.push(Check::below(
        "Hellinger squared = 2(1 - affinity)",
        (hellinger_distance(mu, mu1)?.powi(2) - 2.0 * (1.0 - c)).abs(),
        1e-12,
        1,
    ));
    checks.push(Check::at_most(
        "affinity in (0, 1]",
        (c - 1.0).max(0.0),
        1e-15,
        1,
    ));

    if sup_gap(mu.values(), mu1.values()) <= 1e-12 {
        let back = log_map(mu, mu1)?;
        checks.push(Check::below(
            "log of equal pair is zero",
            sup_gap(back.values(), &vec![0.0; mu.len()]),
            1e-15,
            1,
        ));
        return Ok(checks);
    }

    let seg = geodesic_bvp(mu, mu1)?;
    let l = seg.length();
    let mut geo = Worst::default();
    let mut simplex = Worst::default();
    for k in 0..=32 {
        let t = l * k as f64 / 32.0;
        geo.push(geodesic_three_term(mu, mu1, t)?.sup_distance(&oracle_geodesic(mu, mu1, t)?));
        let cf = three_term_coeffs(l, t)?;
        let neg = (-cf.a1).max(-cf.a2).max(-cf.a3).max(0.0);
        simplex.push(neg.max((cf.sum() - 1.0).abs()));
    }
    checks.push(Check::below(
        "three-term vs slerp (sup)",
        geo.value,
        1e-10,
        geo.count,
    ));
    checks.push(Check::below(
        "coefficient simplex",
        simplex.value,
        1e-12,
        simplex.count,
    ));
    checks.push(Check::below(
        "endpoint velocities vs FD",
        endpoint_velocity_gap(&seg, mu, mu1)?,
        1e-6,
        2,
    ));
    let m = midpoint(mu, mu1)?;
    checks.push(Check::below(
        "midpoint = power mean ½",
        m.sup_distance(&alpha_power_mean(mu, mu1, 0.5)?),
        1e-12,
        1,
    ));
    let equi = (fisher_rao_distance(mu, &m)? - 0.5 * l)
        .abs()
        .max((fisher_rao_distance(&m, mu1)? - 0.5 * l).abs());
    checks.push(Check::below("midpoint equidistance", equi, 1e-10, 2));
    checks.push(Check::below(
        "intersection = geometric mean",
        tangent_line_intersection(mu, mu1)?.sup_distance(&geometric_mean(mu, mu1)?),
        1e-10,
        1,
    ));
    let back = exp_map(mu, &log_map(mu, mu1)?)?;
    checks.push(Check::below("exp of log", back.sup_distance(mu1), 1e-10, 1));
    if l > 16.0 * FD_STEP {
        let mut ode = Worst::default();
        for k in 1..8 {
            ode.push(geodesic_ode_residual(&seg, l * k as f64 / 8.0, FD_STEP)?);
        }
        checks.push(Check::below(
            "geodesic ODE residual",
            ode.value,
            1e-6,
            ode.count,
        ));
    }
    let back = chart_inverse(&chart_forward(mu, mu1)?)?;
    checks.push(Check::below(
        "chart round trip",
        back.sup_distance(mu1),
        1e-12,
        1,
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("exp of log"), "exp-of-log");
        assert_eq!(slug("three-term vs slerp (sup)"), "three-term-vs-slerp-sup");
        assert_eq!(slug("  L2-ball disagreements "), "l2-ball-disagreements");
    }

    #[test]
    fn retolerance() {
        let c = Check::below("x", 1e-8, 1e-6, 3);
        assert!(c.passed);
        assert!(!c.clone().with_tolerance(1e-9).passed);
        let z = Check::at_most("count", 0.0, 0.0, 5);
        assert!(z.passed);
        assert!(!Check::below("count", 0.0, 0.0, 5).passed);
        let f = Check::failed("broken", &Error::MeshMismatch).with_tolerance(1.0);
        assert!(!f.passed);
    }

    #[test]
    fn worked_example_criterion() {
        let c = Suite::new(1).worked_example();
        assert!(c.passed(), "{}", c.summary());
        assert_eq!(c.checks.len(), 6);
    }

    #[test]
    fn single_pair_checks_pass() {
        let mesh = QuadratureMesh::circle(16).unwrap();
        let mut r = rng(5);
        let a = random_density(&mut r, &mesh, 0.8);
        let b = random_density(&mut r, &mesh, 0.8);
        let checks = verify_pair(&a, &b).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        let same = verify_pair(&a, &a).unwrap();
        assert!(same.iter().all(|c| c.passed), "{same:?}");
    }
}
