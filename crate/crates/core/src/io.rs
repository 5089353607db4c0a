//! Text file formats: geometry and box files (JSON), the basis file (JSON),
//! and whitespace-delimited sample and point tables.
//!
//! JSON floats are written in shortest round-trip form and parsed with
//! correct rounding, so saving and loading a basis reproduces every float
//! bit for bit. Tables are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CubeUnion, GeometryError, Partition, Rect};
use crate::kernels::{CoefficientTable, KernelError, KernelSet};
use crate::reconstruct::{Lattice, SampleSet};
use crate::shifts::ShiftVector;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("unsupported format_version {0}")]
    Version(u32),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// `{"dim": .., "beta": .., "corners": [[..], ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub dim: usize,
    pub beta: f64,
    pub corners: Vec<Vec<f64>>,
}

impl GeometrySpec {
    pub fn from_union(union: &CubeUnion) -> Self {
        Self {
            dim: union.dim(),
            beta: union.beta(),
            corners: union.corners().to_vec(),
        }
    }

    pub fn to_union(&self) -> Result<CubeUnion, GeometryError> {
        CubeUnion::new(self.dim, self.beta, self.corners.clone())
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("geometry serializes") + "\n"
    }
}

pub fn load_geometry(path: &Path) -> Result<CubeUnion, FormatError> {
    Ok(GeometrySpec::parse(&read_text(path)?)?.to_union()?)
}

/// `{"dim": .., "boxes": [{"lo": [..], "hi": [..]}, ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxesSpec {
    pub dim: usize,
    pub boxes: Vec<Rect>,
}

impl BoxesSpec {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let spec: Self = serde_json::from_str(text)?;
        for (index, b) in spec.boxes.iter().enumerate() {
            if b.lo.len() != spec.dim || b.hi.len() != spec.dim {
                return Err(GeometryError::Dimension {
                    index,
                    expected: spec.dim,
                    found: b.lo.len().max(b.hi.len()),
                }
                .into());
            }
            if let Some(axis) = (0..spec.dim).find(|&t| !(b.lo[t] < b.hi[t])) {
                return Err(GeometryError::EmptyBox { index, axis }.into());
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub k: Vec<Vec<f64>>,
    pub seed: u64,
    pub tau: f64,
    pub certificate: f64,
    pub tries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub l: usize,
    pub j: usize,
    pub s: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub max_system_residual: f64,
}

/// Everything needed to reload a constructed basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisFile {
    pub format_version: u32,
    pub geometry: GeometrySpec,
    pub shifts: ShiftRecord,
    pub cell_count: usize,
    pub coefficients: Vec<CoefficientRecord>,
    pub residuals: Residuals,
}

impl BasisFile {
    pub fn from_kernels(kernels: &KernelSet) -> Self {
        let k = kernels.shifts();
        let table = kernels.coefficients();
        let (p, cells) = (table.cubes(), table.cells());
        let mut coefficients = Vec::with_capacity(p * p * cells);
        for j in 0..p {
            for s in 0..cells {
                for l in 0..p {
                    let x = table.get(l, j, s);
                    coefficients.push(CoefficientRecord {
                        l,
                        j,
                        s,
                        re: x.re,
                        im: x.im,
                    });
                }
            }
        }
        Self {
            format_version: FORMAT_VERSION,
            geometry: GeometrySpec::from_union(kernels.union()),
            shifts: ShiftRecord {
                k: k.shifts.clone(),
                seed: k.seed,
                tau: k.tau,
                certificate: k.min_norm_det,
                tries: k.tries,
            },
            cell_count: cells,
            coefficients,
            residuals: Residuals {
                max_system_residual: table.max_residual,
            },
        }
    }

    /// Rebuilds the kernel set. The partition is recomputed from the
    /// geometry; coefficients are taken verbatim, not re-solved.
    pub fn to_kernels(&self) -> Result<KernelSet, FormatError> {
        if self.format_version != FORMAT_VERSION {
            return Err(FormatError::Version(self.format_version));
        }
        let union = self.geometry.to_union()?;
        let partition = Partition::build(&union)?;
        let (p, cells) = (union.len(), partition.cell_count());
        if self.cell_count != cells {
            return Err(KernelError::Mismatch(format!(
                "file records {} cells, geometry yields {}",
                self.cell_count, cells
            ))
            .into());
        }
        let mut x = vec![Complex64::new(f64::NAN, f64::NAN); p * p * cells];
        let mut seen = vec![false; x.len()];
        for r in &self.coefficients {
            if r.l >= p || r.j >= p || r.s >= cells {
                return Err(KernelError::Mismatch(format!("coefficient index ({}, {}, {})", r.l, r.j, r.s)).into());
            }
            let idx = (r.j * cells + r.s) * p + r.l;
            x[idx] = Complex64::new(r.re, r.im);
            seen[idx] = true;
        }
        if seen.iter().any(|v| !v) {
            return Err(KernelError::Mismatch("coefficient table is incomplete".into()).into());
        }
        let table = CoefficientTable::from_values(p, cells, x, self.residuals.max_system_residual)?;
        let shifts = ShiftVector {
            shifts: self.shifts.k.clone(),
            min_norm_det: self.shifts.certificate,
            seed: self.shifts.seed,
            tau: self.shifts.tau,
            tries: self.shifts.tries,
        };
        Ok(KernelSet::from_parts(union, partition, shifts, table)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("basis serializes") + "\n"
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn save_basis(path: &Path, kernels: &KernelSet) -> Result<(), FormatError> {
    write_text(path, &BasisFile::from_kernels(kernels).to_json())
}

pub fn load_basis(path: &Path) -> Result<KernelSet, FormatError> {
    BasisFile::parse(&read_text(path)?)?.to_kernels()
}

/// Float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T, FormatError> {
    field.parse().map_err(|_| FormatError::Row {
        line,
        message: format!("cannot parse {what} from {field:?}"),
    })
}

/// Sample rows `l n_1 .. n_d re im`. The truncation radius is the largest
/// `|n|_inf` present; missing lattice points are zero.
pub fn parse_samples(text: &str, lattice_of: impl Fn(usize) -> Lattice, dim: usize, cubes: usize) -> Result<SampleSet, FormatError> {
    let mut rows = Vec::new();
    for (line, content) in data_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != dim + 3 {
            return Err(FormatError::Row {
                line,
                message: format!("expected {} fields, found {}", dim + 3, fields.len()),
            });
        }
        let l: usize = parse_field(line, fields[0], "coset index")?;
        if l >= cubes {
            return Err(FormatError::Row {
                line,
                message: format!("coset index {l} out of range (p = {cubes})"),
            });
        }
        let n = fields[1..=dim]
            .iter()
            .map(|f| parse_field::<i64>(line, f, "lattice index"))
            .collect::<Result<Vec<_>, _>>()?;
        let re: f64 = parse_field(line, fields[dim + 1], "real part")?;
        let im: f64 = parse_field(line, fields[dim + 2], "imaginary part")?;
        rows.push((line, l, n, Complex64::new(re, im)));
    }
    let radius = rows
        .iter()
        .flat_map(|(_, _, n, _)| n.iter().map(|v| v.unsigned_abs() as usize))
        .max()
        .unwrap_or(0);
    let mut set = SampleSet::zeros(lattice_of(radius));
    for (line, l, n, v) in rows {
        if !set.set(l, &n, v) {
            return Err(FormatError::Row {
                line,
                message: "lattice index outside the truncation".into(),
            });
        }
    }
    Ok(set)
}

pub fn format_samples(samples: &SampleSet) -> String {
    let lattice = samples.lattice();
    let mut out = String::new();
    for (idx, v) in samples.values().iter().enumerate() {
        let (l, n) = lattice.index_of(idx);
        let _ = write!(out, "{l}");
        for m in n {
            let _ = write!(out, " {m}");
        }
        let _ = writeln!(out, " {} {}", fmt_f64(v.re), fmt_f64(v.im));
    }
    out
}

/// Point rows with exactly `dim` floats each.
pub fn parse_points(text: &str, dim: usize) -> Result<Vec<Vec<f64>>, FormatError> {
    data_lines(text)
        .map(|(line, content)| {
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != dim {
                return Err(FormatError::Row {
                    line,
                    message: format!("expected {dim} coordinates, found {}", fields.len()),
                });
            }
            fields
                .iter()
                .map(|f| parse_field::<f64>(line, f, "coordinate"))
                .collect()
        })
        .collect()
}

/// One row per point: coordinates followed by `re im`.
pub fn format_values(points: &[Vec<f64>], values: &[Complex64]) -> String {
    let mut out = String::new();
    for (pt, v) in points.iter().zip(values) {
        let coords: Vec<String> = pt.iter().map(|x| fmt_f64(*x)).collect();
        let _ = writeln!(out, "{} {} {}", coords.join(" "), fmt_f64(v.re), fmt_f64(v.im));
    }
    out
}
