//! Python bindings. Build with `--features extension-module` and import the
//! resulting shared library as `rieszcube`.

use num_complex::Complex64;
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rieszcube::io::{self, BasisFile, FormatError, GeometrySpec};
use rieszcube::reconstruct::reconstruct_many;
use rieszcube::shifts::{DEFAULT_MAX_TRIES, DEFAULT_TAU};
use rieszcube::verify::{self, CoverError, Tolerances, VerifyError};
use rieszcube::{GeometryError, KernelError, Lattice, Rect, SampleSet};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kernel_error(e: KernelError) -> PyErr {
    match e {
        KernelError::Geometry(_) => value_error(e),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn format_error(e: FormatError) -> PyErr {
    match e {
        FormatError::Kernel(k) => kernel_error(k),
        other => value_error(other),
    }
}

fn verify_error(e: VerifyError) -> PyErr {
    match e {
        VerifyError::Convergence { .. } => PyRuntimeError::new_err(e.to_string()),
        other => value_error(other),
    }
}

fn cover_error(e: CoverError) -> PyErr {
    match e {
        CoverError::EmptyInner { .. } | CoverError::TooFine { .. } => PyRuntimeError::new_err(e.to_string()),
        other => value_error(other),
    }
}

/// Round-trips a serializable report through `json.loads`.
fn to_python<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn check_dim(point: &[f64], dim: usize) -> PyResult<()> {
    if point.len() == dim {
        Ok(())
    } else {
        Err(value_error(format!("expected a point of dimension {dim}, got {}", point.len())))
    }
}

/// A finite union of pairwise disjoint axis-parallel cubes of common side.
#[pyclass(name = "CubeUnion", module = "rieszcube", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCubeUnion {
    inner: rieszcube::CubeUnion,
}

#[pymethods]
impl PyCubeUnion {
    #[new]
    fn new(beta: f64, corners: Vec<Vec<f64>>) -> PyResult<Self> {
        let dim = corners.first().map_or(0, Vec::len);
        let inner = rieszcube::CubeUnion::new(dim, beta, corners).map_err(|e: GeometryError| value_error(e))?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = GeometrySpec::parse(text).map_err(format_error)?;
        Ok(Self {
            inner: spec.to_union().map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        GeometrySpec::from_union(&self.inner).to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    #[getter]
    fn corners(&self) -> Vec<Vec<f64>> {
        self.inner.corners().to_vec()
    }

    fn measure(&self) -> f64 {
        self.inner.measure()
    }

    fn nyquist_rate(&self) -> f64 {
        self.inner.nyquist_rate()
    }

    /// Index of the cube containing `point`, or None.
    fn cube_of(&self, point: Vec<f64>) -> PyResult<Option<usize>> {
        check_dim(&point, self.inner.dim())?;
        Ok(self.inner.cube_of(&point))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "CubeUnion(dim={}, beta={}, cubes={})",
            self.inner.dim(),
            self.inner.beta(),
            self.inner.len()
        )
    }
}

/// Shifts, kernel coefficients and the operations built on them.
#[pyclass(name = "Basis", module = "rieszcube", frozen)]
struct PyBasis {
    inner: rieszcube::KernelSet,
}

impl PyBasis {
    fn check_l(&self, l: usize) -> PyResult<()> {
        if l < self.inner.cubes() {
            Ok(())
        } else {
            Err(PyIndexError::new_err(format!("kernel index {l} out of range (p = {})", self.inner.cubes())))
        }
    }

    fn lattice(&self, radius: usize) -> Lattice {
        Lattice::new(self.inner.shifts(), self.inner.beta(), radius)
    }
}

#[pymethods]
impl PyBasis {
    /// Searches for admissible shifts and solves the kernel systems.
    #[staticmethod]
    #[pyo3(signature = (union, seed = 0, tau = DEFAULT_TAU, max_tries = DEFAULT_MAX_TRIES))]
    fn build(union: &PyCubeUnion, seed: u64, tau: f64, max_tries: usize) -> PyResult<Self> {
        let inner = rieszcube::KernelSet::build(union.inner.clone(), seed, tau, max_tries).map_err(kernel_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn with_shifts(union: &PyCubeUnion, shifts: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = rieszcube::KernelSet::with_shifts(union.inner.clone(), shifts).map_err(kernel_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = BasisFile::parse(text).map_err(format_error)?;
        Ok(Self {
            inner: file.to_kernels().map_err(format_error)?,
        })
    }

    fn to_json(&self) -> String {
        BasisFile::from_kernels(&self.inner).to_json()
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_basis(&path).map_err(format_error)?,
        })
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        io::save_basis(&path, &self.inner).map_err(format_error)
    }

    #[getter]
    fn union(&self) -> PyCubeUnion {
        PyCubeUnion {
            inner: self.inner.union().clone(),
        }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn cubes(&self) -> usize {
        self.inner.cubes()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    #[getter]
    fn shifts(&self) -> Vec<Vec<f64>> {
        self.inner.shifts().shifts.clone()
    }

    #[getter]
    fn certificate(&self) -> f64 {
        self.inner.shifts().min_norm_det
    }

    #[getter]
    fn max_residual(&self) -> f64 {
        self.inner.coefficients().max_residual
    }

    fn eval_kernel(&self, l: usize, t: Vec<f64>) -> PyResult<Complex64> {
        self.check_l(l)?;
        check_dim(&t, self.inner.dim())?;
        Ok(self.inner.eval_kernel(l, &t))
    }

    /// All kernels at one point.
    fn eval_kernels(&self, t: Vec<f64>) -> PyResult<Vec<Complex64>> {
        check_dim(&t, self.inner.dim())?;
        Ok(self.inner.eval_kernels(&t))
    }

    fn eval_spectral(&self, l: usize, omega: Vec<f64>) -> PyResult<Complex64> {
        self.check_l(l)?;
        check_dim(&omega, self.inner.dim())?;
        Ok(self.inner.eval_spectral(l, &omega))
    }

    /// `(l, n, point)` for every point of the truncated lattice.
    fn lattice_points(&self, radius: usize) -> Vec<(usize, Vec<i64>, Vec<f64>)> {
        let lattice = self.lattice(radius);
        (0..lattice.len())
            .map(|idx| {
                let (l, n) = lattice.index_of(idx);
                let point = lattice.point(l, &n);
                (l, n, point)
            })
            .collect()
    }

    /// Evaluates the series from `(l, n, value)` samples; missing lattice
    /// points count as zero.
    fn reconstruct(&self, samples: Vec<(usize, Vec<i64>, Complex64)>, points: Vec<Vec<f64>>) -> PyResult<Vec<Complex64>> {
        let dim = self.inner.dim();
        for p in &points {
            check_dim(p, dim)?;
        }
        for (l, n, _) in &samples {
            self.check_l(*l)?;
            if n.len() != dim {
                return Err(value_error(format!("expected a lattice index of dimension {dim}, got {}", n.len())));
            }
        }
        let radius = samples
            .iter()
            .flat_map(|(_, n, _)| n.iter().map(|v| v.unsigned_abs() as usize))
            .max()
            .unwrap_or(0);
        let mut set = SampleSet::zeros(self.lattice(radius));
        for (l, n, v) in &samples {
            set.set(*l, n, *v);
        }
        Ok(reconstruct_many(&self.inner, &set, &points))
    }

    /// Largest deviation of `S_l(lambda_{l',n} - k_l)` from the Kronecker delta.
    fn check_interpolation(&self, radius: usize) -> f64 {
        verify::check_interpolation(&self.inner, radius)
    }

    #[pyo3(signature = (trials = 100, seed = 0))]
    fn poisson_residual(&self, trials: usize, seed: u64) -> f64 {
        verify::check_poisson_residual(&self.inner, trials, seed)
    }

    fn frame_bounds<'py>(&self, py: Python<'py>, radius: usize) -> PyResult<Bound<'py, PyAny>> {
        let report = verify::frame_bounds(self.inner.union(), self.inner.shifts(), radius).map_err(verify_error)?;
        to_python(py, &report)
    }

    /// Beurling densities of the lattice truncated at `radius`; `h` defaults
    /// to 50 lattice steps.
    #[pyo3(signature = (radius = 30, h = None))]
    fn density<'py>(&self, py: Python<'py>, radius: usize, h: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
        let h = h.unwrap_or(verify::DENSITY_WINDOWS * self.inner.w_scale());
        let report = verify::beurling_density(&self.lattice(radius), h).map_err(verify_error)?;
        to_python(py, &report)
    }

    #[pyo3(signature = (radii, trials = 100, seed = 0))]
    fn verify<'py>(&self, py: Python<'py>, radii: Vec<usize>, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let report =
            verify::verify_basis(&self.inner, &radii, trials, seed, &Tolerances::default()).map_err(verify_error)?;
        to_python(py, &report)
    }

    fn __repr__(&self) -> String {
        format!(
            "Basis(dim={}, cubes={}, certificate={:.3e})",
            self.inner.dim(),
            self.inner.cubes(),
            self.inner.shifts().min_norm_det
        )
    }
}

/// Inner and outer cube covers of a union of boxes given as `(lo, hi)` pairs.
#[pyfunction]
fn approximate_cover<'py>(py: Python<'py>, boxes: Vec<(Vec<f64>, Vec<f64>)>, eps: f64) -> PyResult<Bound<'py, PyDict>> {
    let rects = boxes
        .into_iter()
        .map(|(lo, hi)| Rect::new(lo, hi).map_err(value_error))
        .collect::<PyResult<Vec<_>>>()?;
    let cover = verify::approximate_cover(&rects, eps).map_err(cover_error)?;
    let out = PyDict::new(py);
    out.set_item("beta", cover.beta)?;
    out.set_item("refinements", cover.refinements)?;
    out.set_item("inner", PyCubeUnion { inner: cover.inner })?;
    out.set_item("outer", PyCubeUnion { inner: cover.outer })?;
    out.set_item("measure_inner", cover.measure_inner)?;
    out.set_item("measure_union", cover.measure_union)?;
    out.set_item("measure_outer", cover.measure_outer)?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "rieszcube")]
fn rieszcube_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCubeUnion>()?;
    m.add_class::<PyBasis>()?;
    m.add_function(wrap_pyfunction!(approximate_cover, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
