//! Python bindings: configuration, closed-form analysis, simulation and
//! sweeps. Results come back as plain dicts and lists.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use relay_secrecy::analysis::{self, OutageTriple};
use relay_secrecy::config::{RunConfig as CoreConfig, KEYS};
use relay_secrecy::engine::{self, Metrics, SweepRecord};
use relay_secrecy::protocol::{ActionKind, Protocol};
use relay_secrecy::{channel, report, validation, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn value_text(v: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(b) = v.extract::<bool>() {
        return Ok(b.to_string());
    }
    if let Ok(items) = v.cast::<PyList>() {
        let parts: PyResult<Vec<String>> = items.iter().map(|x| value_text(&x)).collect();
        return Ok(parts?.join(","));
    }
    Ok(v.str()?.to_string())
}

/// Simulation and sweep configuration. Keyword arguments use the config
/// file key names, e.g. `Config(P_S=30, protocol="adaptive")`.
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone, Default)]
struct Config {
    inner: CoreConfig,
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut cfg = Self::default();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                cfg.set(&k.extract::<String>()?, &v)?;
            }
        }
        cfg.inner.validate().map_err(to_py)?;
        Ok(cfg)
    }

    /// Parses `key=value` text, such as a manifest.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: CoreConfig::parse_str(text).map_err(to_py)? })
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner.set(key, &value_text(value)?).map_err(to_py)
    }

    fn manifest(&self) -> String {
        self.inner.to_manifest()
    }

    /// Current settings as a dict of strings.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for line in self.inner.to_manifest().lines().filter(|l| !l.starts_with('#')) {
            if let Some((k, v)) = line.split_once('=') {
                d.set_item(k, v)?;
            }
        }
        Ok(d)
    }

    #[staticmethod]
    fn keys() -> Vec<(&'static str, &'static str)> {
        KEYS.to_vec()
    }

    fn __repr__(&self) -> String {
        let sim = &self.inner.sim;
        format!(
            "Config(protocol={}, P_S={}, P_R={}, R={}, lambda_s={}, E_max={}, C_R={}, n_slots={}, seed={})",
            sim.protocol, sim.params.p_s, sim.params.p_r, sim.params.rate, sim.params.lambda_s, sim.params.e_max,
            sim.params.c_r, sim.n_slots, sim.seed
        )
    }
}

fn protocol_of(cfg: &Config, protocol: Option<&str>) -> PyResult<Protocol> {
    match protocol {
        Some(p) => p.parse().map_err(to_py),
        None => Ok(cfg.inner.sim.protocol),
    }
}

fn triple(cfg: &Config, protocol: Option<&str>) -> PyResult<OutageTriple> {
    let sim = &cfg.inner.sim;
    Ok(analysis::outage_triple(&sim.params, &sim.stats, protocol_of(cfg, protocol)?))
}

/// Secrecy capacity in bits/s/Hz for one slot's gains.
#[pyfunction]
#[pyo3(signature = (power, g_main, g_eave, kappa_w = 1.0))]
fn secrecy_capacity(power: f64, g_main: f64, g_eave: f64, kappa_w: f64) -> PyResult<f64> {
    channel::secrecy_capacity(power, g_main, g_eave, kappa_w).map_err(to_py)
}

/// Rayleigh secrecy outage probability.
#[pyfunction]
#[pyo3(signature = (power, sigma_main, sigma_eave, rate, kappa_w = 1.0))]
fn closed_form_outage(power: f64, sigma_main: f64, sigma_eave: f64, rate: f64, kappa_w: f64) -> f64 {
    channel::closed_form_outage(power, sigma_main, sigma_eave, rate, kappa_w)
}

/// Outage probabilities, maximum service rate and the energy threshold.
#[pyfunction]
#[pyo3(signature = (config, protocol = None))]
fn analyze<'py>(py: Python<'py>, config: &Config, protocol: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let t = triple(config, protocol)?;
    let sim = &config.inner.sim;
    let chain = analysis::saturated_transition_probs(&t, sim.params.c_r).map_err(to_py)?;
    let gamma = analysis::stationary_distribution(&chain);
    let mu = analysis::analytic_throughput_saturated(&t, &gamma);
    let d = PyDict::new(py);
    d.set_item("outage_sd", t.sd)?;
    d.set_item("outage_sr", t.sr)?;
    d.set_item("outage_rd", t.rd)?;
    d.set_item("approximate", t.approximate)?;
    d.set_item("mu_max", analysis::mu_max(&t))?;
    d.set_item("source_saturated", analysis::source_saturated(sim.params.lambda_s, &t))?;
    d.set_item("energy_threshold", analysis::energy_saturation_threshold(&sim.params, &sim.stats, t.rd))?;
    d.set_item("energy_saturated", analysis::energy_saturation_condition(&sim.params, &sim.stats, t.rd))?;
    d.set_item("stationary", gamma.probabilities().to_vec())?;
    d.set_item("stationary_degenerate", gamma.degenerate)?;
    d.set_item("analytic_throughput", mu.throughput)?;
    Ok(d)
}

/// Stationary relay-queue distribution of the saturated chain.
#[pyfunction]
#[pyo3(signature = (config, protocol = None))]
fn stationary_distribution(config: &Config, protocol: Option<&str>) -> PyResult<Vec<f64>> {
    let t = triple(config, protocol)?;
    let chain = analysis::saturated_transition_probs(&t, config.inner.sim.params.c_r).map_err(to_py)?;
    Ok(analysis::stationary_distribution(&chain).probabilities().to_vec())
}

fn metrics_dict<'py>(py: Python<'py>, m: &Metrics) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("protocol", m.protocol.id())?;
    d.set_item("n_slots", m.n_slots)?;
    d.set_item("warmup", m.warmup)?;
    d.set_item("delivered", m.delivered)?;
    d.set_item("throughput", m.throughput())?;
    d.set_item("throughput_post_warmup", m.throughput_post_warmup())?;
    d.set_item("source_busy_fraction", m.source_busy_fraction())?;
    d.set_item("qr_occupancy", m.qr_occupancy())?;
    d.set_item("mean_energy", m.mean_energy())?;
    d.set_item("frac_energy_ge_et", m.frac_energy_ge_et())?;
    d.set_item("clipping_loss", m.clipping_loss)?;
    d.set_item("drops", m.drops)?;
    d.set_item("outage", m.outage_frequencies().to_vec())?;
    d.set_item("signaling_overhead", m.signaling_overhead())?;
    let states = PyDict::new(py);
    for k in ActionKind::ALL {
        states.set_item(format!("{k:?}"), m.state_histogram[k.index()])?;
    }
    d.set_item("states", states)?;
    Ok(d)
}

/// One simulation run of `config`.
#[pyfunction]
fn run<'py>(py: Python<'py>, config: &Config) -> PyResult<Bound<'py, PyDict>> {
    let sim = config.inner.sim.clone();
    let m = py.detach(|| engine::run(&sim)).map_err(to_py)?;
    metrics_dict(py, &m)
}

fn sweep_records(py: Python<'_>, config: &Config) -> PyResult<Vec<SweepRecord>> {
    let cfg = config.inner.clone();
    py.detach(|| {
        let s = &cfg.sweep;
        engine::sweep_protocols(&cfg.sim, &s.protocols, s.axis, &s.values, s.replicates)
    })
    .map_err(to_py)
}

/// Sweep described by `config`; one dict per (protocol, value).
#[pyfunction]
fn sweep<'py>(py: Python<'py>, config: &Config) -> PyResult<Vec<Bound<'py, PyDict>>> {
    sweep_records(py, config)?
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("protocol", r.protocol.id())?;
            d.set_item("axis", r.axis.name())?;
            d.set_item("value", r.value)?;
            d.set_item("throughput_mean", r.throughput_mean)?;
            d.set_item("throughput_stderr", r.throughput_stderr)?;
            d.set_item("analytic_throughput", r.analytic_throughput)?;
            d.set_item("analytic_outage", r.analytic_outage.to_vec())?;
            d.set_item("empirical_outage", r.empirical_outage.to_vec())?;
            d.set_item("mean_battery", r.mean_battery)?;
            d.set_item("drops_mean", r.drops_mean)?;
            Ok(d)
        })
        .collect()
}

/// Same sweep rendered as the CSV the command-line tool writes.
#[pyfunction]
fn sweep_csv(py: Python<'_>, config: &Config) -> PyResult<String> {
    report::csv_string(&sweep_records(py, config)?).map_err(to_py)
}

/// Built-in self-checks as `(name, passed, detail)` tuples.
#[pyfunction]
#[pyo3(signature = (quick = true, seed = 1))]
fn validate(py: Python<'_>, quick: bool, seed: u64) -> PyResult<Vec<(String, bool, String)>> {
    let results = py.detach(|| validation::run_all(quick, seed)).map_err(to_py)?;
    Ok(results.into_iter().map(|r| (r.name, r.passed, r.detail)).collect())
}

#[pymodule]
fn relay_secrecy_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add("PROTOCOLS", Protocol::ALL.iter().map(|p| p.id()).collect::<Vec<_>>())?;
    m.add("SCHEMA_VERSION", report::SCHEMA_VERSION)?;
    m.add_function(wrap_pyfunction!(secrecy_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_outage, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::types::PyModule;

    fn module(py: Python<'_>) -> Bound<'_, PyModule> {
        let m = PyModule::new(py, "relay_secrecy_py").unwrap();
        relay_secrecy_py(&m).unwrap();
        m
    }

    #[test]
    fn config_from_kwargs() {
        Python::attach(|py| {
            let m = module(py);
            let kw = PyDict::new(py);
            kw.set_item("P_S", 30).unwrap();
            kw.set_item("protocols", vec!["fixed", "adaptive"]).unwrap();
            kw.set_item("halfslot_direct", false).unwrap();
            let cfg: Config = m.getattr("Config").unwrap().call((), Some(&kw)).unwrap().extract().unwrap();
            assert_eq!(cfg.inner.sim.params.p_s, 30.0);
            assert_eq!(cfg.inner.sweep.protocols, vec![Protocol::Fixed, Protocol::Adaptive]);
            assert!(!cfg.inner.sim.halfslot_direct_link);

            kw.set_item("E_max", 1).unwrap();
            let err = m.getattr("Config").unwrap().call((), Some(&kw)).unwrap_err();
            assert!(err.is_instance_of::<PyValueError>(py));
        });
    }

    #[test]
    fn run_and_analyze() {
        Python::attach(|py| {
            let mut cfg = Config::default();
            cfg.set("n_slots", &20_000u64.into_pyobject(py).unwrap().into_any()).unwrap();
            let m = run(py, &cfg).unwrap();
            let thr: f64 = m.get_item("throughput").unwrap().unwrap().extract().unwrap();
            let a = analyze(py, &cfg, None).unwrap();
            let mu: f64 = a.get_item("analytic_throughput").unwrap().unwrap().extract().unwrap();
            assert!((thr - mu).abs() < 0.03, "{thr} vs {mu}");
            assert!(analyze(py, &cfg, Some("nope")).is_err());
        });
    }

    #[test]
    fn csv_round_trips_through_manifest() {
        Python::attach(|py| {
            let cfg = Config {
                inner: CoreConfig::parse_str("n_slots=500\nreplicates=2\nvalues=1,2\nprotocols=fixed").unwrap(),
            };
            let csv = sweep_csv(py, &cfg).unwrap();
            let again = Config::from_text(&cfg.manifest()).unwrap();
            assert_eq!(csv, sweep_csv(py, &again).unwrap());
            assert_eq!(sweep(py, &cfg).unwrap().len(), 2);
        });
    }
}
