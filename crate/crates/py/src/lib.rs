//! Python bindings. Structured results are handed over as Python objects
//! decoded from the same JSON the command line prints.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyList;
use serde_json::Value;

use spohnci::encoder::{self, EncodingCertificate, TargetVariety};
use spohnci::solver::{self, Tolerance};
use spohnci::{cli, euler, linmap, m2, spohn, Error, StrategyProfile};

create_exception!(spohnci_py, SpohnError, PyException);

fn err(e: Error) -> PyErr {
    SpohnError::new_err(format!("{}: {e}", e.kind()))
}

fn to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| SpohnError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn ser<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| SpohnError::new_err(e.to_string()))?;
    Ok(to_py(py, &v)?.unbind())
}

fn parse_json(text: &str) -> PyResult<Value> {
    serde_json::from_str(text).map_err(|e| SpohnError::new_err(format!("Json: {e}")))
}

fn tolerance(eps: f64, newton_iters: usize) -> PyResult<Tolerance> {
    Tolerance::new(eps, newton_iters).map_err(err)
}

/// An n-player binary game with exact rational payoffs.
#[pyclass(frozen, skip_from_py_object, module = "spohnci_py")]
#[derive(Clone)]
pub struct Game {
    inner: spohnci::Game,
}

#[pymethods]
impl Game {
    /// Parse the JSON game format (labelled or positional).
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Game { inner: spohnci::Game::from_json(&parse_json(text)?).map_err(err)? })
    }

    /// Seeded random game with integer payoffs in `[-bound, bound]`.
    #[staticmethod]
    fn random(n: usize, seed: u64, bound: u64) -> PyResult<Self> {
        if n < 2 || bound == 0 {
            return Err(SpohnError::new_err("Precondition: need n >= 2 and bound >= 1"));
        }
        Ok(Game { inner: spohnci::Game::random(n, seed, bound) })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn players(&self) -> usize {
        self.inner.players()
    }

    /// Payoff of `player` at a profile label such as `"121"`, as `"p/q"`.
    fn payoff(&self, player: usize, profile: &str) -> PyResult<String> {
        let profile = StrategyProfile::parse(profile).map_err(err)?;
        Ok(self.inner.payoff_at(player, &profile).map_err(err)?.to_string())
    }

    /// The CI polynomials `F_1..F_n` as strings.
    #[pyo3(signature = (dehomogenize = false))]
    fn ci_polynomials(&self, dehomogenize: bool) -> PyResult<Vec<String>> {
        (1..=self.inner.players())
            .map(|i| {
                spohn::ci_polynomial(&self.inner, i)
                    .map(|p| if dehomogenize { p.dehomogenize().to_string() } else { p.to_string() })
                    .map_err(err)
            })
            .collect()
    }

    /// The Nash polynomials `G_1..G_n` as strings.
    fn nash_polynomials(&self) -> PyResult<Vec<String>> {
        (1..=self.inner.players())
            .map(|i| spohn::nash_polynomial(&self.inner, i).map(|p| p.to_string()).map_err(err))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Game(players={})", self.inner.players())
    }
}

/// Degree, genus and Euler characteristic of the curve for `n` players.
#[pyfunction]
fn invariants(py: Python<'_>, n: usize) -> PyResult<Py<PyAny>> {
    if n < 2 {
        return Err(SpohnError::new_err("Precondition: need n >= 2"));
    }
    ser(py, &euler::curve_invariants(n))
}

#[pyfunction]
fn invariants_table(py: Python<'_>, max_n: usize) -> PyResult<Py<PyAny>> {
    ser(py, &euler::invariants_table(max_n))
}

#[pyfunction]
fn image_dimension(py: Python<'_>, n: usize) -> PyResult<Py<PyAny>> {
    if n < 3 {
        return Err(SpohnError::new_err("Precondition: need n >= 3"));
    }
    ser(py, &linmap::image_dimension(n).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (game, eps = 1e-9, newton_iters = 50))]
fn nash(py: Python<'_>, game: &Game, eps: f64, newton_iters: usize) -> PyResult<Py<PyAny>> {
    let tol = tolerance(eps, newton_iters)?;
    let count = solver::nash_count3(&game.inner, &tol).map_err(err)?;
    let points = solver::totally_mixed_nash3(&game.inner, &tol).map_err(err)?;
    ser(py, &serde_json::json!({"count": count, "points": points}))
}

#[pyfunction]
#[pyo3(signature = (game, seed = 1))]
fn degree_witness(py: Python<'_>, game: &Game, seed: u64) -> PyResult<Py<PyAny>> {
    ser(py, &solver::degree_witness3(&game.inner, seed).map_err(err)?)
}

/// Sample the curve over `t` values given as rational strings.
#[pyfunction]
#[pyo3(signature = (game, grid, eps = 1e-9, newton_iters = 50))]
fn sample(py: Python<'_>, game: &Game, grid: Vec<String>, eps: f64, newton_iters: usize) -> PyResult<Py<PyAny>> {
    let ts = grid.iter().map(|s| spohnci::parse_rational(s)).collect::<spohnci::Result<Vec<_>>>().map_err(err)?;
    let tol = tolerance(eps, newton_iters)?;
    let sample = py.detach(|| solver::fiber_sample3(&game.inner, &ts, &tol)).map_err(err)?;
    ser(py, &sample)
}

/// Encode a target variety (JSON with "vars") or a game into a game plus
/// its certificate (as a dict).
#[pyfunction]
fn encode(py: Python<'_>, text: &str) -> PyResult<(Game, Py<PyAny>)> {
    let value = parse_json(text)?;
    let (game, cert) = if value.get("vars").is_some() {
        encoder::encode_variety(&TargetVariety::from_json(&value).map_err(err)?).map_err(err)?
    } else {
        encoder::encode_product_r1(&spohnci::Game::from_json(&value).map_err(err)?).map_err(err)?
    };
    Ok((Game { inner: game }, to_py(py, &cert.to_json())?.unbind()))
}

/// Transport sample points (lists of rational strings) through an encoding.
#[pyfunction]
fn verify(py: Python<'_>, target: &str, game: &Game, certificate: &str, points: Vec<Vec<String>>) -> PyResult<Py<PyAny>> {
    let target = TargetVariety::from_json(&parse_json(target)?).map_err(err)?;
    let cert = EncodingCertificate::from_json(&parse_json(certificate)?).map_err(err)?;
    let samples = points
        .iter()
        .map(|p| p.iter().map(|s| spohnci::parse_rational(s)).collect())
        .collect::<spohnci::Result<Vec<Vec<_>>>>()
        .map_err(err)?;
    ser(py, &encoder::verify_isomorphism(&target, &game.inner, &cert, &samples).map_err(err)?)
}

#[pyfunction]
fn export_m2(game: &Game) -> PyResult<String> {
    m2::export_macaulay2(&game.inner).map_err(err)
}

/// Run a command-line invocation in-process; returns `(exit_code, output)`.
#[pyfunction]
fn run(py: Python<'_>, args: Bound<'_, PyList>) -> PyResult<(i32, String)> {
    let args: Vec<String> = args.extract()?;
    let result = py.detach(|| cli::run_command(args));
    Ok((result.exit_code, result.output))
}

#[pymodule]
fn spohnci_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Add the classes and functions of the extension module to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SpohnError", m.py().get_type::<SpohnError>())?;
    m.add_class::<Game>()?;
    m.add_function(wrap_pyfunction!(invariants, m)?)?;
    m.add_function(wrap_pyfunction!(invariants_table, m)?)?;
    m.add_function(wrap_pyfunction!(image_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(nash, m)?)?;
    m.add_function(wrap_pyfunction!(degree_witness, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(export_m2, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
