use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rieszcube::io::{self, BasisFile, BoxesSpec, FormatError, GeometrySpec};
use rieszcube::reconstruct::reconstruct_many;
use rieszcube::shifts::{DEFAULT_MAX_TRIES, DEFAULT_TAU};
use rieszcube::verify::{self, CoverError, Tolerances, VerifyError};
use rieszcube::{demo, GeometryError, KernelError, KernelSet, Lattice, ShiftError};
use serde_json::json;

const EXIT_MALFORMED: u8 = 2;
const EXIT_SEARCH: u8 = 3;
const EXIT_SINGULAR: u8 = 4;
const EXIT_VERIFY: u8 = 5;
const EXIT_EMPTY_INNER: u8 = 6;
const EXIT_USAGE: u8 = 64;
const EXIT_WRITE: u8 = 74;

#[derive(Parser)]
#[command(name = "rieszcube", version, about = "Sampling lattices and interpolation kernels for unions of cubes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choose shifts, solve for the kernel coefficients and write a basis file.
    Build {
        geometry: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_TRIES)]
        max_tries: usize,
        /// Explicit shifts instead of a search, e.g. `0;1.5708` or `0,1;2,0.5`.
        #[arg(long, conflicts_with_all = ["seed", "tau", "max_tries"])]
        shifts: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a basis file and write a JSON report.
    Verify {
        basis: PathBuf,
        /// Gram section radii, e.g. `-N 2,4,8`.
        #[arg(short = 'N', long = "radius", value_delimiter = ',', required = true, num_args = 1..)]
        radius: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Biorthogonality tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        residual_tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        poisson_tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate the reconstruction series at the given points.
    Reconstruct {
        basis: PathBuf,
        samples: PathBuf,
        points: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Inner and outer cube covers of a union of boxes.
    Cover {
        boxes: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Directory receiving inner.json, outer.json and audit.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Beurling density of the truncated lattice.
    Density {
        basis: PathBuf,
        #[arg(short = 'N', long = "radius", default_value_t = 30)]
        radius: usize,
        /// Window side; defaults to 50 lattice steps.
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate the kernels S_l at the given points.
    EvalKernel {
        basis: PathBuf,
        points: PathBuf,
        /// Kernel index; all kernels when omitted.
        #[arg(long)]
        l: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Write one of the shipped demo geometries.
    Demo {
        /// d1p2, d1p3, d2p2, d2p3 or d3p2.
        name: String,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    line: Option<usize>,
    checks: Vec<String>,
}

impl Failure {
    fn new(code: u8, kind: &'static str, message: impl ToString) -> Self {
        Self {
            code,
            kind,
            message: message.to_string(),
            line: None,
            checks: Vec::new(),
        }
    }

    fn usage(message: impl ToString) -> Self {
        Self::new(EXIT_USAGE, "usage", message)
    }

    fn report(&self) {
        let mut body = json!({ "error": self.kind, "code": self.code, "message": self.message });
        if let Some(line) = self.line {
            body["line"] = json!(line);
        }
        if !self.checks.is_empty() {
            body["checks"] = json!(self.checks);
        }
        eprintln!("{body}");
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Row { line, .. } => Self {
                line: Some(line),
                ..Self::new(EXIT_MALFORMED, "malformed_row", &e)
            },
            FormatError::Io { .. } => Self::new(EXIT_MALFORMED, "io", e),
            FormatError::Json(_) => Self::new(EXIT_MALFORMED, "parse", e),
            FormatError::Version(_) => Self::new(EXIT_MALFORMED, "version", e),
            FormatError::Geometry(g) => g.into(),
            FormatError::Kernel(k) => k.into(),
        }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Self::new(EXIT_MALFORMED, "geometry", e)
    }
}

impl From<KernelError> for Failure {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::SingularSystem { .. } => Self::new(EXIT_SINGULAR, "singular_system", e),
            KernelError::Shift(ShiftError::SearchExhausted { .. }) => Self::new(EXIT_SEARCH, "shift_search_exhausted", e),
            KernelError::Shift(ShiftError::InvalidThreshold(_) | ShiftError::NoTries | ShiftError::Shape { .. }) => {
                Self::usage(e)
            }
            KernelError::Geometry(g) => g.into(),
            other => Self::new(EXIT_MALFORMED, "basis", other),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Convergence { .. } => Self::new(EXIT_VERIFY, "convergence", e),
            other => Self::usage(other),
        }
    }
}

impl From<CoverError> for Failure {
    fn from(e: CoverError) -> Self {
        match e {
            CoverError::EmptyInner { .. } | CoverError::TooFine { .. } => Self::new(EXIT_EMPTY_INNER, "empty_inner", e),
            CoverError::InvalidTolerance(_) => Self::usage(e),
            other => Self::new(EXIT_MALFORMED, "geometry", other),
        }
    }
}

fn write_to(path: &Path, text: &str) -> Result<(), Failure> {
    io::write_text(path, text).map_err(|e| Failure::new(EXIT_WRITE, "write", e))
}

fn emit(out: &Output, text: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => write_to(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn positive(name: &str, value: f64) -> Result<(), Failure> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!("--{name} must be positive, got {value}")))
    }
}

fn load_basis(path: &Path) -> Result<KernelSet, Failure> {
    Ok(io::load_basis(path)?)
}

fn load_points(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>, Failure> {
    Ok(io::parse_points(&io::read_text(path)?, dim)?)
}

fn parse_shifts(text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    text.split(';')
        .map(|k| {
            k.split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::usage(format!("--shifts {text:?}: {e}")))
        })
        .collect()
}

fn pretty(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Build {
            geometry,
            seed,
            tau,
            max_tries,
            shifts,
            out,
        } => {
            let union = io::load_geometry(&geometry)?;
            let kernels = match shifts {
                Some(text) => KernelSet::with_shifts(union, parse_shifts(&text)?)?,
                None => KernelSet::build(union, seed, tau, max_tries)?,
            };
            let file = BasisFile::from_kernels(&kernels);
            write_to(&out, &file.to_json())?;
            let summary = json!({
                "cubes": kernels.cubes(),
                "dim": kernels.dim(),
                "cells": kernels.partition().cell_count(),
                "certificate": kernels.shifts().min_norm_det,
                "tries": kernels.shifts().tries,
                "max_system_residual": kernels.coefficients().max_residual,
            });
            println!("{summary}");
            Ok(())
        }
        Command::Verify {
            basis,
            radius,
            trials,
            seed,
            tol,
            residual_tol,
            poisson_tol,
            out,
        } => {
            positive("tol", tol)?;
            positive("residual-tol", residual_tol)?;
            positive("poisson-tol", poisson_tol)?;
            if trials == 0 {
                return Err(Failure::usage("--trials must be at least 1"));
            }
            let kernels = load_basis(&basis)?;
            let tolerances = Tolerances {
                system_residual: residual_tol,
                interpolation: tol,
                poisson: poisson_tol,
                ..Tolerances::default()
            };
            let report = verify::verify_basis(&kernels, &radius, trials, seed, &tolerances)?;
            emit(&out, &pretty(&report))?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure {
                    checks: report.failed.clone(),
                    ..Failure::new(EXIT_VERIFY, "verify_failed", format!("failed checks: {}", report.failed.join(", ")))
                })
            }
        }
        Command::Reconstruct {
            basis,
            samples,
            points,
            out,
        } => {
            let kernels = load_basis(&basis)?;
            let text = io::read_text(&samples)?;
            let set = io::parse_samples(
                &text,
                |r| Lattice::new(kernels.shifts(), kernels.beta(), r),
                kernels.dim(),
                kernels.cubes(),
            )?;
            let pts = load_points(&points, kernels.dim())?;
            let values = reconstruct_many(&kernels, &set, &pts);
            emit(&out, &io::format_values(&pts, &values))
        }
        Command::Cover { boxes, eps, out } => {
            positive("eps", eps)?;
            let spec = BoxesSpec::parse(&io::read_text(&boxes)?)?;
            let cover = verify::approximate_cover(&spec.boxes, eps)?;
            std::fs::create_dir_all(&out).map_err(|e| Failure::new(EXIT_WRITE, "write", format!("{}: {e}", out.display())))?;
            write_to(&out.join("inner.json"), &GeometrySpec::from_union(&cover.inner).to_json())?;
            write_to(&out.join("outer.json"), &GeometrySpec::from_union(&cover.outer).to_json())?;
            let audit = json!({
                "eps": eps,
                "beta": cover.beta,
                "refinements": cover.refinements,
                "cubes_inner": cover.inner.len(),
                "cubes_outer": cover.outer.len(),
                "measure_inner": cover.measure_inner,
                "measure_union": cover.measure_union,
                "measure_outer": cover.measure_outer,
                "gap_inner": cover.measure_union - cover.measure_inner,
                "gap_outer": cover.measure_outer - cover.measure_union,
            });
            write_to(&out.join("audit.json"), &pretty(&audit))?;
            println!("{audit}");
            Ok(())
        }
        Command::Density { basis, radius, h, out } => {
            let kernels = load_basis(&basis)?;
            let h = h.unwrap_or(verify::DENSITY_WINDOWS * kernels.w_scale());
            positive("h", h)?;
            let lattice = Lattice::new(kernels.shifts(), kernels.beta(), radius);
            let report = verify::beurling_density(&lattice, h)?;
            emit(&out, &pretty(&report))
        }
        Command::EvalKernel { basis, points, l, out } => {
            let kernels = load_basis(&basis)?;
            if let Some(l) = l.filter(|l| *l >= kernels.cubes()) {
                return Err(Failure::usage(format!("--l {l} out of range (p = {})", kernels.cubes())));
            }
            let pts = load_points(&points, kernels.dim())?;
            let text = match l {
                Some(l) => {
                    let values: Vec<Complex64> = pts.iter().map(|t| kernels.eval_kernel(l, t)).collect();
                    io::format_values(&pts, &values)
                }
                None => {
                    let mut text = String::new();
                    for t in &pts {
                        let mut fields: Vec<String> = t.iter().map(|x| io::fmt_f64(*x)).collect();
                        for v in kernels.eval_kernels(t) {
                            fields.push(io::fmt_f64(v.re));
                            fields.push(io::fmt_f64(v.im));
                        }
                        text.push_str(&fields.join(" "));
                        text.push('\n');
                    }
                    text
                }
            };
            emit(&out, &text)
        }
        Command::Demo { name, out } => {
            let d = demo::by_name(&name).ok_or_else(|| Failure::usage(format!("unknown demo {name:?}")))?;
            emit(&out, &GeometrySpec::from_union(&d.union).to_json())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            Failure::usage(e.render().to_string().trim()).report();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.code)
        }
    }
}
