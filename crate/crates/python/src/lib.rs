//! Python bindings: the hypothesis tests, their correction constants, the
//! limiting densities and the Monte Carlo harness.

use clrt::corrections::{self, CorrectionConstants, FourthMomentInfo, PopulationCase};
use clrt::fisher_lsd::FisherLsd;
use clrt::hypothesis::{self, Tail};
use clrt::mp_law::MpLaw;
use clrt::numerics::Variate;
use clrt::sim::{self, AlternativeKind, AlternativeSpec, Scenario, SimulationConfig};
use clrt::spectral::ObservationMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: clrt::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Rows are observations, columns are variables.
pub fn observations(rows: Vec<Vec<f64>>) -> Result<ObservationMatrix, clrt::Error> {
    ObservationMatrix::from_rows(&rows)
}

pub fn parse_tail(tail: &str) -> Result<Tail, clrt::Error> {
    match tail {
        "two_sided" | "two-sided" => Ok(Tail::TwoSided),
        "upper" => Ok(Tail::Upper),
        other => Err(clrt::Error::Domain(format!(
            "tail must be 'two_sided' or 'upper', got '{other}'"
        ))),
    }
}

fn parse_case(complex: bool) -> PopulationCase {
    if complex {
        PopulationCase::Complex
    } else {
        PopulationCase::Real
    }
}

/// Outcome of one test.
#[pyclass(frozen, name = "TestResult", module = "pyclrt")]
pub struct PyTestResult {
    inner: hypothesis::TestResult,
}

#[pymethods]
impl PyTestResult {
    #[getter]
    fn method(&self) -> String {
        serde_json::to_value(self.inner.method)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }

    #[getter]
    fn raw_statistic(&self) -> f64 {
        self.inner.raw_statistic
    }

    /// z-score for the corrected tests, χ² value for the classical ones.
    #[getter]
    fn standardized(&self) -> f64 {
        self.inner.standardized
    }

    #[getter]
    fn p_value(&self) -> f64 {
        self.inner.p_value
    }

    #[getter]
    fn alpha(&self) -> Option<f64> {
        self.inner.reject_at
    }

    #[getter]
    fn rejected(&self) -> Option<bool> {
        self.inner.rejected
    }

    #[getter]
    fn beta(&self) -> Option<f64> {
        self.inner.beta
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.ratios.p
    }

    #[getter]
    fn n1(&self) -> usize {
        self.inner.ratios.n1
    }

    #[getter]
    fn n2(&self) -> Option<usize> {
        self.inner.ratios.n2
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "TestResult(method={}, raw_statistic={}, standardized={}, p_value={}, rejected={})",
            self.method(),
            self.inner.raw_statistic,
            self.inner.standardized,
            self.inner.p_value,
            match self.inner.rejected {
                Some(true) => "True",
                Some(false) => "False",
                None => "None",
            }
        )
    }
}

fn wrap(r: Result<hypothesis::TestResult, clrt::Error>) -> PyResult<PyTestResult> {
    r.map(|inner| PyTestResult { inner }).map_err(to_py)
}

/// Corrected one-sample test of `Σ = I`.
#[pyfunction]
#[pyo3(signature = (data, alpha = 0.05, tail = "two_sided"))]
fn clrt_one_sample(data: Vec<Vec<f64>>, alpha: f64, tail: &str) -> PyResult<PyTestResult> {
    let x = observations(data).map_err(to_py)?;
    wrap(hypothesis::clrt_one_sample(&x, alpha, parse_tail(tail).map_err(to_py)?))
}

/// Classical χ² one-sample likelihood-ratio test.
#[pyfunction]
#[pyo3(signature = (data, alpha = 0.05))]
fn lrt_one_sample(data: Vec<Vec<f64>>, alpha: f64) -> PyResult<PyTestResult> {
    let x = observations(data).map_err(to_py)?;
    wrap(hypothesis::lrt_one_sample(&x, alpha))
}

/// Corrected two-sample test of `Σ1 = Σ2`.
#[pyfunction]
#[pyo3(signature = (x, y, alpha = 0.05, beta = 0.0, tail = "two_sided"))]
fn clrt_two_sample(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, alpha: f64, beta: f64, tail: &str) -> PyResult<PyTestResult> {
    let x = observations(x).map_err(to_py)?;
    let y = observations(y).map_err(to_py)?;
    wrap(hypothesis::clrt_two_sample(&x, &y, alpha, beta, parse_tail(tail).map_err(to_py)?))
}

/// Classical χ² two-sample likelihood-ratio test.
#[pyfunction]
#[pyo3(signature = (x, y, alpha = 0.05))]
fn lrt_two_sample(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, alpha: f64) -> PyResult<PyTestResult> {
    let x = observations(x).map_err(to_py)?;
    let y = observations(y).map_err(to_py)?;
    wrap(hypothesis::lrt_two_sample(&x, &y, alpha))
}

/// Pooled excess-kurtosis estimate from standardized entries.
#[pyfunction]
fn estimate_beta(samples: Vec<Vec<Vec<f64>>>) -> PyResult<f64> {
    let mats = samples
        .into_iter()
        .map(observations)
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    let refs: Vec<&ObservationMatrix> = mats.iter().collect();
    hypothesis::estimate_beta(&refs).map_err(to_py)
}

fn constants_dict<'py>(py: Python<'py>, c: CorrectionConstants, p: usize) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("functional", c.centering / p as f64)?;
    d.set_item("centering", c.centering)?;
    d.set_item("mean", c.mean)?;
    d.set_item("variance", c.variance)?;
    Ok(d)
}

/// Centering, mean and variance of the one-sample statistic.
#[pyfunction]
#[pyo3(signature = (p, n, complex = false))]
fn one_sample_constants(py: Python<'_>, p: usize, n: usize, complex: bool) -> PyResult<Bound<'_, PyDict>> {
    let c = corrections::one_sample_constants(p, n, parse_case(complex)).map_err(to_py)?;
    constants_dict(py, c, p)
}

/// Centering, mean and variance of the two-sample statistic.
#[pyfunction]
#[pyo3(signature = (p, n1, n2, beta = 0.0, complex = false))]
fn two_sample_constants(
    py: Python<'_>,
    p: usize,
    n1: usize,
    n2: usize,
    beta: f64,
    complex: bool,
) -> PyResult<Bound<'_, PyDict>> {
    let case = parse_case(complex);
    let fm = FourthMomentInfo::new(beta, case).map_err(to_py)?;
    let c = corrections::two_sample_constants(p, n1, n2, case, fm).map_err(to_py)?;
    constants_dict(py, c, p)
}

/// Marčenko–Pastur density at each point of `x`.
#[pyfunction]
fn mp_pdf(y: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
    let law = MpLaw::new(y).map_err(to_py)?;
    Ok(x.into_iter().map(|v| law.pdf(v)).collect())
}

/// F-matrix limiting density at each point of `x`.
#[pyfunction]
fn fisher_pdf(y1: f64, y2: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
    let lsd = FisherLsd::new(y1, y2).map_err(to_py)?;
    Ok(x.into_iter().map(|v| lsd.pdf(v)).collect())
}

/// Rejection rates of the corrected and classical tests over a Monte Carlo
/// run.
#[pyclass(frozen, name = "SimulationResult", module = "pyclrt")]
pub struct PySimulationResult {
    report: sim::SimulationReport,
}

#[pymethods]
impl PySimulationResult {
    #[getter]
    fn clrt_rate(&self) -> f64 {
        self.report.clrt.rate
    }

    #[getter]
    fn lrt_rate(&self) -> f64 {
        self.report.lrt.rate
    }

    #[getter]
    fn mc_std_error(&self) -> f64 {
        self.report.mc_std_error
    }

    #[getter]
    fn replications(&self) -> usize {
        self.report.config.replications
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.report.config.seed
    }

    #[getter]
    fn z_scores(&self) -> Vec<f64> {
        self.report.clrt_z_scores()
    }

    #[getter]
    fn raw_statistics(&self) -> Vec<f64> {
        self.report.outcomes.iter().map(|o| o.raw_statistic).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "SimulationResult(clrt_rate={}, lrt_rate={}, replications={}, seed={})",
            self.report.clrt.rate, self.report.lrt.rate, self.report.config.replications, self.report.config.seed
        )
    }
}

/// Runs `replications` simulated tests. Supplying both `alt_leading` and
/// `alt_rest` scales the first sample's covariance to
/// `diag(alt_leading, alt_rest, …)`.
#[pyfunction]
#[pyo3(signature = (
    p, n1, n2 = None, replications = 1000, seed = 42, alpha = 0.05,
    generator = "gaussian", tail = "two_sided", beta = None,
    alt_leading = None, alt_rest = None, workers = 1
))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    p: usize,
    n1: usize,
    n2: Option<usize>,
    replications: usize,
    seed: u64,
    alpha: f64,
    generator: &str,
    tail: &str,
    beta: Option<f64>,
    alt_leading: Option<f64>,
    alt_rest: Option<f64>,
    workers: usize,
) -> PyResult<PySimulationResult> {
    let scenario = if n2.is_some() { Scenario::TwoSample } else { Scenario::OneSample };
    let generator = match generator {
        "gaussian" => Variate::Gaussian,
        "scaled_t5" | "scaled-t5" => Variate::ScaledT5,
        other => {
            return Err(PyValueError::new_err(format!(
                "generator must be 'gaussian' or 'scaled_t5', got '{other}'"
            )))
        }
    };
    let alternative = match (alt_leading, alt_rest) {
        (Some(leading), Some(rest)) => Some(AlternativeSpec {
            kind: match scenario {
                Scenario::OneSample => AlternativeKind::OneSampleDiag,
                Scenario::TwoSample => AlternativeKind::TwoSampleRatioDiag,
            },
            leading,
            rest,
        }),
        (None, None) => None,
        _ => return Err(PyValueError::new_err("alt_leading and alt_rest go together")),
    };
    let cfg = SimulationConfig {
        scenario,
        p,
        n1,
        n2,
        replications,
        alpha,
        generator,
        alternative,
        seed,
        tail: parse_tail(tail).map_err(to_py)?,
        beta,
    };
    let report = py
        .detach(|| sim::run_simulation_with_workers(&cfg, workers))
        .map_err(to_py)?;
    Ok(PySimulationResult { report })
}

#[pymodule]
fn pyclrt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTestResult>()?;
    m.add_class::<PySimulationResult>()?;
    m.add_function(wrap_pyfunction!(clrt_one_sample, m)?)?;
    m.add_function(wrap_pyfunction!(lrt_one_sample, m)?)?;
    m.add_function(wrap_pyfunction!(clrt_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(lrt_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_beta, m)?)?;
    m.add_function(wrap_pyfunction!(one_sample_constants, m)?)?;
    m.add_function(wrap_pyfunction!(two_sample_constants, m)?)?;
    m.add_function(wrap_pyfunction!(mp_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
