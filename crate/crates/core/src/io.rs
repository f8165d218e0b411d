//! Density and tangent files.
//!
//! JSON: `{"mesh": {"kind": "...", "n": N, "weights": [...], "positions": [...]}, "values": [...]}`
//! with `positions` present for circle meshes only. CSV: a `weight,value`
//! header and one row per node, plus a `position` column for circle meshes.
//!
//! Writers use a fixed field order and fixed scientific formatting so that
//! identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mesh::{Density, MeshKind, QuadratureMesh, TangentDensity};

/// Mass tolerance applied to files; values are rescaled (densities) or
/// re-centred (tangents) when within it.
pub const FILE_MASS_TOL: f64 = 1e-6;

/// Nine significant digits, scientific notation.
pub fn fmt_report(x: f64) -> String {
    format!("{x:.8e}")
}

/// Seventeen significant digits; reparses to the same `f64`.
pub fn fmt_exact(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Deserialize)]
struct MeshSpec {
    kind: MeshKind,
    n: usize,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    positions: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
struct FieldFile {
    mesh: MeshSpec,
    values: Vec<f64>,
}

/// Mesh and raw node values from a JSON or CSV file (chosen by extension).
pub fn read_field(path: &Path) -> Result<(Arc<QuadratureMesh>, Vec<f64>)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        parse_csv(&text)
    } else {
        parse_json(&text)
    }
}

pub fn parse_json(text: &str) -> Result<(Arc<QuadratureMesh>, Vec<f64>)> {
    let file: FieldFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let spec = file.mesh;
    let mesh = QuadratureMesh::build(spec.kind, spec.n, spec.weights.as_deref())?;
    if let (Some(given), Some(expected)) = (&spec.positions, mesh.positions()) {
        check_positions(given, expected)?;
    }
    Ok((mesh, file.values))
}

pub fn parse_csv(text: &str) -> Result<(Arc<QuadratureMesh>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(wi), Some(vi)) = (col("weight"), col("value")) else {
        return Err(Error::Parse(
            "CSV needs `weight` and `value` columns".into(),
        ));
    };
    let pi = col("position");
    let (mut weights, mut values, mut positions) = (Vec::new(), Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            record
                .get(i)
                .ok_or_else(|| Error::Parse(format!("row {row}: missing column {i}")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {row}: {e}")))
        };
        weights.push(num(wi)?);
        values.push(num(vi)?);
        if let Some(pi) = pi {
            positions.push(num(pi)?);
        }
    }
    let kind = if pi.is_some() {
        MeshKind::Circle
    } else if weights.len() == 2 {
        MeshKind::TwoAtom
    } else {
        MeshKind::NAtomUniform
    };
    let mesh = QuadratureMesh::build(kind, weights.len(), Some(&weights))?;
    if let Some(expected) = mesh.positions() {
        check_positions(&positions, expected)?;
    }
    Ok((mesh, values))
}

/// A mesh from `KIND:N` (for example `circle:64`) or from a JSON file
/// holding either a bare mesh object or a full field file.
pub fn read_mesh(spec: &str) -> Result<Arc<QuadratureMesh>> {
    if let Some((kind, n)) = spec.split_once(':') {
        if let Ok(kind) = kind.parse::<MeshKind>() {
            let n = n
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("mesh size `{n}`: {e}")))?;
            return QuadratureMesh::build(kind, n, None);
        }
    }
    let path = Path::new(spec);
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_mesh_json(&text)
}

pub fn parse_mesh_json(text: &str) -> Result<Arc<QuadratureMesh>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum MeshFile {
        Wrapped { mesh: MeshSpec },
        Bare(MeshSpec),
    }
    let spec = match serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))? {
        MeshFile::Wrapped { mesh } => mesh,
        MeshFile::Bare(spec) => spec,
    };
    let mesh = QuadratureMesh::build(spec.kind, spec.n, spec.weights.as_deref())?;
    if let (Some(given), Some(expected)) = (&spec.positions, mesh.positions()) {
        check_positions(given, expected)?;
    }
    Ok(mesh)
}

fn check_positions(given: &[f64], expected: &[f64]) -> Result<()> {
    if given.len() != expected.len()
        || given
            .iter()
            .zip(expected)
            .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::InvalidMesh("circle positions must be 2πk/n".into()));
    }
    Ok(())
}

/// Loads a density, rescaling when the mass is within [`FILE_MASS_TOL`] of 1.
pub fn density_from_values(mesh: Arc<QuadratureMesh>, values: Vec<f64>) -> Result<Density> {
    let checked = Density::new(mesh.clone(), values.clone(), false);
    match checked {
        Err(Error::Mass { actual, .. }) if (actual - 1.0).abs() <= FILE_MASS_TOL => {
            Density::new(mesh, values, true)
        }
        Err(Error::Mass { actual, .. }) => Err(Error::Mass {
            expected: 1.0,
            actual,
            tolerance: FILE_MASS_TOL,
        }),
        other => other,
    }
}

/// Loads a tangent vector, re-centring when the mass is within
/// [`FILE_MASS_TOL`] of 0.
pub fn tangent_from_values(mesh: Arc<QuadratureMesh>, values: Vec<f64>) -> Result<TangentDensity> {
    let total = mesh.integrate(&values);
    if values.len() == mesh.len() && total.abs() > FILE_MASS_TOL {
        return Err(Error::Mass {
            expected: 0.0,
            actual: total,
            tolerance: FILE_MASS_TOL,
        });
    }
    TangentDensity::new(mesh, values, true)
}

pub fn read_density(path: &Path) -> Result<Density> {
    let (mesh, values) = read_field(path)?;
    density_from_values(mesh, values)
}

pub fn read_tangent(path: &Path) -> Result<TangentDensity> {
    let (mesh, values) = read_field(path)?;
    tangent_from_values(mesh, values)
}

fn json_array(out: &mut String, xs: &[f64], fmt: fn(f64) -> String) {
    out.push('[');
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&fmt(*x));
    }
    out.push(']');
}

/// JSON text for a field; `values` are written at full precision.
pub fn field_to_json(mesh: &QuadratureMesh, values: &[f64]) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"mesh\": {{\"kind\": \"{}\", \"n\": {}, \"weights\": ",
        mesh.kind().as_str(),
        mesh.len()
    );
    json_array(&mut out, mesh.weights(), fmt_exact);
    if let Some(pos) = mesh.positions() {
        out.push_str(", \"positions\": ");
        json_array(&mut out, pos, fmt_exact);
    }
    out.push_str("}, \"values\": ");
    json_array(&mut out, values, fmt_exact);
    out.push_str("}\n");
    out
}

/// CSV text for a field (`weight,value[,position]`).
pub fn field_to_csv(mesh: &QuadratureMesh, values: &[f64]) -> String {
    let mut out = String::from("weight,value");
    if mesh.positions().is_some() {
        out.push_str(",position");
    }
    out.push('\n');
    for (i, (w, v)) in mesh.weights().iter().zip(values).enumerate() {
        let _ = write!(out, "{},{}", fmt_exact(*w), fmt_exact(*v));
        if let Some(pos) = mesh.positions() {
            let _ = write!(out, ",{}", fmt_exact(pos[i]));
        }
        out.push('\n');
    }
    out
}

/// Writes a field as CSV when the path ends in `.csv`, JSON otherwise.
pub fn write_field(path: &Path, mesh: &QuadratureMesh, values: &[f64]) -> Result<()> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let text = if is_csv {
        field_to_csv(mesh, values)
    } else {
        field_to_json(mesh, values)
    };
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
