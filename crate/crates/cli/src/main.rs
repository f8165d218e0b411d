//! `frg`: distances, geodesics, means and checks for densities on a
//! quadrature mesh.
//!
//! Exit status is 0 on success, 1 when an input or precondition is rejected
//! and 2 when `verify` finds a failing property.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use fisher_rao::geodesic::{exp_map, geodesic_three_term, log_map};
use fisher_rao::io::{
    field_to_json, fmt_report, read_density, read_mesh, read_tangent, write_field,
};
use fisher_rao::means::{alpha_power_mean, geometric_mean};
use fisher_rao::mesh::{same_mesh, Density, NodeField, QuadratureMesh, TangentDensity};
use fisher_rao::metric::{fisher_rao_distance, hellinger_affinity, hellinger_distance};
use fisher_rao::sampling::seed_from_env;
use fisher_rao::smoothing::{make_kernel, mollify};
use fisher_rao::sphere::{diameter_witness, embed};
use fisher_rao::verify::{slug, verify_pair, Check, Criterion, Suite};
use fisher_rao::Error;

#[derive(Parser, Debug)]
#[command(
    name = "frg",
    version,
    about = "Fisher–Rao geometry of discrete densities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print ℓ, the Hellinger affinity and the Hellinger distance as JSON.
    Distance(Pair),
    /// Write the geodesic from A to B over a t-grid as CSV (t, one column per node).
    Geodesic {
        #[command(flatten)]
        pair: Pair,
        /// Point count (evenly spaced on [0, ℓ]) or a comma-separated list;
        /// the token `l` stands for ℓ.
        #[arg(long, default_value = "33")]
        t_grid: String,
    },
    /// Write the normalized geometric mean, or the α-power mean with --alpha.
    Mean {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
    },
    /// Write exp_A(T) for a tangent file T.
    Exp {
        #[command(flatten)]
        input: Single,
        #[arg(long)]
        tangent: PathBuf,
    },
    /// Write the tangent log_A(B).
    Log(Pair),
    /// Run the property suite, or the per-input checks when densities are given.
    Verify {
        #[arg(long)]
        density_a: Option<PathBuf>,
        #[arg(long)]
        density_b: Option<PathBuf>,
        #[arg(long)]
        mesh: Option<String>,
        /// Override a check's tolerance, as `check-name=value` (repeatable).
        #[arg(long, value_name = "NAME=VALUE")]
        tolerance: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the density smoothed by the bump kernel of radius --delta.
    Mollify {
        #[command(flatten)]
        input: Single,
        #[arg(long)]
        delta: f64,
    },
    /// Print the distance between the two-level witness densities.
    DiameterWitness {
        #[arg(long, default_value = "circle:64")]
        mesh: String,
        /// The low level is 10^(−sharpness).
        #[arg(long, default_value_t = 6.0)]
        sharpness: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Pair {
    #[arg(long)]
    density_a: PathBuf,
    #[arg(long)]
    density_b: PathBuf,
    /// `KIND:N` or a JSON mesh file; inputs must live on it.
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Single {
    #[arg(long)]
    density_a: PathBuf,
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A message and the exit status it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::input(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Distance(pair) => {
            let (a, b) = load_pair(&pair)?;
            let report = format!(
                "{{\"ell\": {}, \"hellinger_affinity\": {}, \"hellinger_distance\": {}}}\n",
                fmt_report(fisher_rao_distance(&a, &b)?),
                fmt_report(hellinger_affinity(&a, &b)?),
                fmt_report(hellinger_distance(&a, &b)?),
            );
            emit_text(pair.out.as_deref(), &report)
        }
        Command::Geodesic { pair, t_grid } => {
            let (a, b) = load_pair(&pair)?;
            let ell = fisher_rao_distance(&a, &b)?;
            let grid = parse_grid(&t_grid, ell)?;
            let mut csv = String::from("t");
            for i in 0..a.len() {
                let _ = write!(csv, ",p{i}");
            }
            csv.push('\n');
            for t in grid {
                let p = geodesic_three_term(&a, &b, t)?;
                csv.push_str(&fmt_report(t));
                for v in p.values() {
                    csv.push(',');
                    csv.push_str(&fmt_report(*v));
                }
                csv.push('\n');
            }
            emit_text(pair.out.as_deref(), &csv)
        }
        Command::Mean { pair, alpha } => {
            let (a, b) = load_pair(&pair)?;
            let m = match alpha {
                Some(alpha) => alpha_power_mean(&a, &b, alpha)?,
                None => geometric_mean(&a, &b)?,
            };
            emit_field(pair.out.as_deref(), m.mesh(), m.values())
        }
        Command::Exp { input, tangent } => {
            let base = load_single(&input)?;
            let tau = load_tangent(&tangent)?;
            if !same_mesh(base.mesh(), tau.mesh()) {
                return Err(Failure::input(format!(
                    "tangent ({}): mesh differs from density-a",
                    tangent.display()
                )));
            }
            let image = exp_map(&base, &tau)?;
            emit_field(input.out.as_deref(), image.mesh(), image.values())
        }
        Command::Log(pair) => {
            let (a, b) = load_pair(&pair)?;
            let tau = log_map(&a, &b)?;
            emit_field(pair.out.as_deref(), tau.mesh(), tau.values())
        }
        Command::Verify {
            density_a,
            density_b,
            mesh,
            tolerance,
            out,
        } => verify(density_a, density_b, mesh, &tolerance, out.as_deref()),
        Command::Mollify { input, delta } => {
            let p = load_single(&input)?;
            let kernel = make_kernel(p.mesh(), delta)?;
            let smooth = mollify(&p, &kernel)?;
            emit_field(input.out.as_deref(), smooth.mesh(), smooth.values())
        }
        Command::DiameterWitness {
            mesh,
            sharpness,
            out,
        } => {
            let mesh = read_mesh(&mesh).map_err(|e| Failure::input(format!("mesh: {e}")))?;
            let w = diameter_witness(&mesh, sharpness)?;
            let report = format!(
                "{{\"ell\": {}, \"pi_minus_ell\": {}, \"floor\": {}, \"nodes\": {}}}\n",
                fmt_report(w.ell),
                fmt_report(std::f64::consts::PI - w.ell),
                fmt_report(w.floor),
                mesh.len(),
            );
            emit_text(out.as_deref(), &report)
        }
    }
}

fn verify(
    density_a: Option<PathBuf>,
    density_b: Option<PathBuf>,
    mesh: Option<String>,
    overrides: &[String],
    out: Option<&Path>,
) -> Outcome {
    let overrides = parse_overrides(overrides)?;
    let mesh = mesh.as_deref().map(load_mesh).transpose()?;
    let criteria = match (density_a, density_b) {
        (None, None) => Suite::new(seed_from_env()).run_all(),
        (Some(a), b) => {
            let a = load_density("density-a", &a, mesh.as_ref())?;
            let checks = match b {
                Some(b) => {
                    let b = load_density("density-b", &b, mesh.as_ref())?;
                    if !same_mesh(a.mesh(), b.mesh()) {
                        return Err(Failure::input("density-b: mesh differs from density-a"));
                    }
                    verify_pair(&a, &b)?
                }
                None => single_checks(&a),
            };
            vec![Criterion {
                id: 0,
                title: "input checks",
                checks,
            }]
        }
        (None, Some(_)) => return Err(Failure::input("density-b given without density-a")),
    };

    let mut unused: Vec<&str> = overrides.iter().map(|(k, _)| k.as_str()).collect();
    let mut report = String::new();
    let mut all_passed = true;
    for mut c in criteria {
        c.checks = c
            .checks
            .into_iter()
            .map(|check| {
                let key = check.slug();
                match overrides.iter().find(|(k, _)| *k == key) {
                    Some((_, tol)) => {
                        unused.retain(|k| *k != key);
                        check.with_tolerance(*tol)
                    }
                    None => check,
                }
            })
            .collect();
        all_passed &= c.passed();
        report.push_str(&c.summary());
        report.push('\n');
        for check in &c.checks {
            report.push_str(&check_line(check));
            report.push('\n');
        }
    }
    if let Some(key) = unused.first() {
        return Err(Failure::input(format!(
            "--tolerance: no check named `{key}`"
        )));
    }
    emit_text(out, &report)?;
    if all_passed {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: "verification failed".into(),
        })
    }
}

fn check_line(c: &Check) -> String {
    let status = if c.passed { "pass" } else { "FAIL" };
    match &c.note {
        Some(note) => format!("  {status} {}: {note}", c.slug()),
        None => format!(
            "  {status} {} worst={} tol={} n={}",
            c.slug(),
            fmt_report(c.worst),
            fmt_report(c.tolerance),
            c.samples
        ),
    }
}

/// Checks that need only one density: mass and the unit-sphere embedding.
fn single_checks(p: &Density) -> Vec<Check> {
    let x = embed(p);
    let norm = p.mesh().l2_norm(x.coords());
    vec![
        Check::below("unit mass", (p.mass() - 1.0).abs(), 1e-10, 1),
        Check::below("root on unit sphere", (norm - 1.0).abs(), 1e-12, 1),
    ]
}

fn parse_overrides(raw: &[String]) -> std::result::Result<Vec<(String, f64)>, Failure> {
    raw.iter()
        .map(|item| {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Failure::input(format!("--tolerance `{item}`: expected NAME=VALUE"))
            })?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| Failure::input(format!("--tolerance `{item}`: {e}")))?;
            Ok((slug(k), v))
        })
        .collect()
}

/// `N` evenly spaced points on `[0, ℓ]`, or an explicit comma-separated list
/// where `l` denotes `ℓ`.
fn parse_grid(spec: &str, ell: f64) -> std::result::Result<Vec<f64>, Failure> {
    let spec = spec.trim();
    if !spec.contains(',') {
        if let Ok(n) = spec.parse::<usize>() {
            if n < 2 {
                return Err(Failure::input("--t-grid: a point count must be at least 2"));
            }
            return Ok((0..n).map(|k| ell * k as f64 / (n - 1) as f64).collect());
        }
    }
    spec.split(',')
        .map(|tok| {
            let tok = tok.trim();
            if tok == "l" || tok == "ell" {
                Ok(ell)
            } else {
                tok.parse::<f64>()
                    .map_err(|e| Failure::input(format!("--t-grid value `{tok}`: {e}")))
            }
        })
        .collect()
}

fn load_mesh(spec: &str) -> std::result::Result<Arc<QuadratureMesh>, Failure> {
    read_mesh(spec).map_err(|e| Failure::input(format!("mesh ({spec}): {e}")))
}

fn load_density(
    field: &str,
    path: &Path,
    mesh: Option<&Arc<QuadratureMesh>>,
) -> std::result::Result<Density, Failure> {
    let d = read_density(path)
        .map_err(|e| Failure::input(format!("{field} ({}): {e}", path.display())))?;
    if let Some(mesh) = mesh {
        if !same_mesh(d.mesh(), mesh) {
            return Err(Failure::input(format!(
                "{field} ({}): mesh differs from --mesh",
                path.display()
            )));
        }
    }
    Ok(d)
}

fn load_tangent(path: &Path) -> std::result::Result<TangentDensity, Failure> {
    read_tangent(path).map_err(|e| Failure::input(format!("tangent ({}): {e}", path.display())))
}

fn load_pair(pair: &Pair) -> std::result::Result<(Density, Density), Failure> {
    let mesh = pair.mesh.as_deref().map(load_mesh).transpose()?;
    let a = load_density("density-a", &pair.density_a, mesh.as_ref())?;
    let b = load_density("density-b", &pair.density_b, mesh.as_ref())?;
    if !same_mesh(a.mesh(), b.mesh()) {
        return Err(Failure::input("density-b: mesh differs from density-a"));
    }
    Ok((a, b))
}

fn load_single(input: &Single) -> std::result::Result<Density, Failure> {
    let mesh = input.mesh.as_deref().map(load_mesh).transpose()?;
    load_density("density-a", &input.density_a, mesh.as_ref())
}

fn emit_text(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::input(format!("out ({}): {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Field files go to `--out` (CSV or JSON by extension), JSON to stdout otherwise.
fn emit_field(out: Option<&Path>, mesh: &QuadratureMesh, values: &[f64]) -> Outcome {
    match out {
        Some(path) => write_field(path, mesh, values).map_err(Failure::from),
        None => {
            print!("{}", field_to_json(mesh, values));
            Ok(())
        }
    }
}
