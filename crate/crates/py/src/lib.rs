//! Python bindings: channel traces, PHY formulas, the five batch
//! policies, the Monte-Carlo engine and the analytic delay recursion.
//!
//! Build with `cargo build -p ancsat-py --release`; the cdylib in
//! `target/release` imports as `ancsat_py` (see python/smoke_test.py).

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use ancsat::{
    ChannelSpec, ChannelTrace, CsiMode, LmsParameters, Modulation, PhyConfig, Policy, PolicyConfig,
    PolicyDecision, PolicyKind, PolicyState, SimConfig, StateSpace,
};

fn to_py_err(e: ancsat::Error) -> PyErr {
    match e {
        ancsat::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn modulation(name: &str) -> PyResult<Modulation> {
    Modulation::from_name(name).map_err(to_py_err)
}

fn scheme(name: &str) -> PyResult<PolicyKind> {
    PolicyKind::from_name(name).map_err(to_py_err)
}

fn csi(name: &str) -> PyResult<CsiMode> {
    match name {
        "genie" => Ok(CsiMode::Genie),
        "hold" => Ok(CsiMode::Hold),
        other => Err(PyValueError::new_err(format!(
            "csi_mode must be `genie` or `hold`, found `{other}`"
        ))),
    }
}

/// Per-slot channel states: E_s/N0 in dB plus shadowing labels.
#[pyclass(name = "Trace", skip_from_py_object)]
#[derive(Clone)]
struct PyTrace {
    inner: ChannelTrace,
}

#[pymethods]
impl PyTrace {
    /// Flat trace at one E_s/N0.
    #[staticmethod]
    #[pyo3(signature = (esn0_db, n_slots, slot_duration_s=1e-3))]
    fn constant(esn0_db: f64, n_slots: usize, slot_duration_s: f64) -> PyResult<Self> {
        if n_slots < 1 {
            return Err(PyValueError::new_err("n_slots must be >= 1"));
        }
        if !esn0_db.is_finite() || slot_duration_s.is_nan() || slot_duration_s <= 0.0 {
            return Err(PyValueError::new_err(
                "esn0_db must be finite and slot_duration_s > 0",
            ));
        }
        Ok(PyTrace {
            inner: ChannelTrace::constant(esn0_db, n_slots, slot_duration_s),
        })
    }

    /// Shadowed fading trace from the representative open-area GEO set,
    /// re-anchored at `mean_esn0_db`.
    #[staticmethod]
    #[pyo3(signature = (n_slots, seed, mean_esn0_db=10.0))]
    fn open_area(n_slots: usize, seed: u64, mean_esn0_db: f64) -> PyResult<Self> {
        let mut params = LmsParameters::open_area_default();
        params.mean_esn0_db = mean_esn0_db;
        Ok(PyTrace {
            inner: ancsat::generate_trace(&params, n_slots, seed).map_err(to_py_err)?,
        })
    }

    /// Parse a trace CSV file (`slot,esn0_db,state`).
    #[staticmethod]
    #[pyo3(signature = (path, slot_duration_s=1e-3))]
    fn load(path: &str, slot_duration_s: f64) -> PyResult<Self> {
        let file =
            std::fs::File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Ok(PyTrace {
            inner: ancsat::load_trace(file, slot_duration_s).map_err(to_py_err)?,
        })
    }

    /// Write the trace CSV; round-trips byte-wise with `load`.
    fn save(&self, path: &str) -> PyResult<()> {
        let mut buf = Vec::new();
        ancsat::save_trace(&self.inner, &mut buf).map_err(|e| PyIOError::new_err(e.to_string()))?;
        std::fs::write(path, buf).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))
    }

    #[getter]
    fn esn0_db(&self) -> Vec<f64> {
        self.inner.esn0_db.clone()
    }

    #[getter]
    fn state_labels(&self) -> Vec<usize> {
        self.inner.state_labels.clone()
    }

    #[getter]
    fn slot_duration_s(&self) -> f64 {
        self.inner.slot_duration_s
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(slots={}, slot_duration_s={})",
            self.inner.len(),
            self.inner.slot_duration_s
        )
    }
}

/// One round's policy output.
#[pyclass(name = "Decision", skip_from_py_object)]
#[derive(Clone)]
struct PyDecision {
    #[pyo3(get)]
    batch_size: u32,
    #[pyo3(get)]
    modulation: String,
    #[pyo3(get)]
    silent: bool,
}

impl From<PolicyDecision> for PyDecision {
    fn from(d: PolicyDecision) -> Self {
        PyDecision {
            batch_size: d.batch_size,
            modulation: d.modulation.name().to_string(),
            silent: d.silent,
        }
    }
}

#[pymethods]
impl PyDecision {
    fn __repr__(&self) -> String {
        if self.silent {
            "Decision(silent)".to_string()
        } else {
            format!(
                "Decision(batch_size={}, modulation={})",
                self.batch_size, self.modulation
            )
        }
    }
}

// ---- PHY formulas -----------------------------------------------------

/// E_b/N0 in dB from E_s/N0 in dB for the named modulation.
#[pyfunction]
fn ebn0_from_esn0(esn0_db: f64, modulation_name: &str) -> PyResult<f64> {
    Ok(ancsat::ebn0_from_esn0(
        esn0_db,
        modulation(modulation_name)?,
    ))
}

/// AWGN bit error probability at symbol SNR `esn0_db`.
#[pyfunction]
fn bit_error_prob(esn0_db: f64, modulation_name: &str) -> PyResult<f64> {
    Ok(ancsat::bit_error_prob(
        esn0_db,
        modulation(modulation_name)?,
    ))
}

/// Packet erasure probability 1 - (1 - p_b)^B.
#[pyfunction]
fn erasure_prob(p_b: f64, packet_bits: u32) -> PyResult<f64> {
    if !(0.0..=1.0).contains(&p_b) {
        return Err(PyValueError::new_err("p_b must lie in [0, 1]"));
    }
    Ok(ancsat::erasure_prob(p_b, packet_bits))
}

/// Symbol energy in mW at the given spectral noise level.
#[pyfunction]
fn symbol_energy_mw(esn0_db: f64, n0_dbm: f64) -> f64 {
    ancsat::symbol_energy_mw(esn0_db, n0_dbm)
}

/// Symbols in one B-bit packet: ceil(B / log2 m).
#[pyfunction]
fn packet_symbols(packet_bits: u32, modulation_name: &str) -> PyResult<u32> {
    Ok(ancsat::packet_symbols(
        packet_bits,
        modulation(modulation_name)?,
    ))
}

// ---- policy decisions -------------------------------------------------

#[pyfunction]
fn decide_nc(i: u32) -> PyResult<PyDecision> {
    if i < 1 {
        return Err(PyValueError::new_err("i must be >= 1"));
    }
    Ok(ancsat::decide_nc(i, &[]).into())
}

#[pyfunction]
#[pyo3(signature = (i, window, batch_cap=16))]
fn decide_anc(i: u32, window: Vec<f64>, batch_cap: u32) -> PyResult<PyDecision> {
    let cfg = PolicyConfig {
        batch_cap,
        ..PolicyConfig::default()
    };
    if i < 1 || window.len() < batch_cap as usize {
        return Err(PyValueError::new_err(
            "need i >= 1 and a window at least batch_cap long",
        ));
    }
    Ok(ancsat::decide_anc(i, &window, &cfg).into())
}

#[pyfunction]
#[pyo3(signature = (i, window, p_b_now, batch_cap=16, qos_pb_threshold=1e-5))]
fn decide_ancef(
    i: u32,
    window: Vec<f64>,
    p_b_now: f64,
    batch_cap: u32,
    qos_pb_threshold: f64,
) -> PyResult<PyDecision> {
    let cfg = PolicyConfig {
        batch_cap,
        qos_pb_threshold,
        ..PolicyConfig::default()
    };
    if i < 1 || window.len() < i as usize {
        return Err(PyValueError::new_err(
            "need i >= 1 and a window at least i long",
        ));
    }
    Ok(ancsat::decide_ancef(i, &window, p_b_now, &cfg).into())
}

/// Returns (decision, next_delta).
#[pyfunction]
#[pyo3(signature = (i, window, p_b_now, delta=0, batch_cap=16, qos_pb_threshold=1e-5))]
fn decide_stancef(
    i: u32,
    window: Vec<f64>,
    p_b_now: f64,
    delta: u32,
    batch_cap: u32,
    qos_pb_threshold: f64,
) -> PyResult<(PyDecision, u32)> {
    let cfg = PolicyConfig {
        batch_cap,
        qos_pb_threshold,
        ..PolicyConfig::default()
    };
    if i < 1 || window.len() < (i + delta) as usize {
        return Err(PyValueError::new_err(
            "need i >= 1 and a window at least i + delta long",
        ));
    }
    let state = PolicyState {
        delta,
        trial_count: 0,
    };
    let (d, next) = ancsat::decide_stancef(i, &window, p_b_now, &state, &cfg);
    Ok((d.into(), next.delta))
}

#[pyfunction]
#[pyo3(signature = (i, esn0_now_db, window_esn0_db, packet_bits=1000, batch_cap=16, qos_pb_threshold=1e-5))]
fn decide_ancmef(
    i: u32,
    esn0_now_db: f64,
    window_esn0_db: Vec<f64>,
    packet_bits: u32,
    batch_cap: u32,
    qos_pb_threshold: f64,
) -> PyResult<PyDecision> {
    let cfg = PolicyConfig {
        batch_cap,
        qos_pb_threshold,
        ..PolicyConfig::default()
    };
    let phy = PhyConfig {
        packet_bits,
        qos_pb_threshold,
        ..PhyConfig::default()
    };
    if i < 1 || window_esn0_db.len() < 4 * i as usize {
        return Err(PyValueError::new_err(
            "need i >= 1 and a window at least 4 * i long",
        ));
    }
    Ok(ancsat::decide_ancmef(i, esn0_now_db, &window_esn0_db, &phy, &cfg).into())
}

// ---- simulation -------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn build_sim(
    scheme_name: &str,
    dof_target: u32,
    batch_cap: u32,
    max_trials: u32,
    qos_pb_threshold: f64,
    csi_mode: &str,
    packet_bits: u32,
    n0_dbm: f64,
    symbol_rate: f64,
    t_w_ack_wait_s: f64,
    max_slots: usize,
    use_real_codec: bool,
    n_runs: u32,
    seed: u64,
) -> PyResult<SimConfig> {
    let kind = scheme(scheme_name)?;
    let phy = PhyConfig {
        packet_bits,
        n0_dbm,
        symbol_rate,
        qos_pb_threshold,
    };
    let policy = Policy::new(
        kind,
        PolicyConfig {
            batch_cap,
            max_trials,
            qos_pb_threshold,
            csi_mode: csi(csi_mode)?,
        },
    );
    let cfg = SimConfig {
        dof_target,
        t_p_packet_duration_s: phy.packet_duration(Modulation::Bpsk),
        t_w_ack_wait_s,
        policy,
        phy,
        n_runs,
        seed,
        use_real_codec,
        max_slots,
        ack_advance: ancsat::AckAdvance::SingleSlot,
    };
    cfg.validate().map_err(to_py_err)?;
    Ok(cfg)
}

/// Outcome of one simulated delivery attempt.
#[pyclass(name = "RunMetrics", skip_from_py_object)]
#[derive(Clone)]
struct PyRunMetrics {
    #[pyo3(get)]
    packets_sent: u64,
    #[pyo3(get)]
    symbols_sent: u64,
    #[pyo3(get)]
    delivery_delay_s: f64,
    #[pyo3(get)]
    delivered: bool,
    #[pyo3(get)]
    energy_mw_s: f64,
    #[pyo3(get)]
    silent_slots: u64,
    #[pyo3(get)]
    trials_used: u32,
}

#[pymethods]
impl PyRunMetrics {
    fn __repr__(&self) -> String {
        format!(
            "RunMetrics(delivered={}, packets_sent={}, delay_s={:.4}, energy_mw_s={:.3e})",
            self.delivered, self.packets_sent, self.delivery_delay_s, self.energy_mw_s
        )
    }
}

/// Simulate one delivery attempt of `dof_target` coded packets.
#[pyfunction]
#[pyo3(signature = (scheme, trace, seed=0, dof_target=4, batch_cap=16, max_trials=10,
    qos_pb_threshold=1e-5, csi_mode="genie", packet_bits=1000, n0_dbm=-107.0,
    symbol_rate=1e6, t_w_ack_wait_s=0.2388, max_slots=3000, use_real_codec=false))]
#[allow(clippy::too_many_arguments)]
fn run_once(
    scheme: &str,
    trace: &PyTrace,
    seed: u64,
    dof_target: u32,
    batch_cap: u32,
    max_trials: u32,
    qos_pb_threshold: f64,
    csi_mode: &str,
    packet_bits: u32,
    n0_dbm: f64,
    symbol_rate: f64,
    t_w_ack_wait_s: f64,
    max_slots: usize,
    use_real_codec: bool,
) -> PyResult<PyRunMetrics> {
    let cfg = build_sim(
        scheme,
        dof_target,
        batch_cap,
        max_trials,
        qos_pb_threshold,
        csi_mode,
        packet_bits,
        n0_dbm,
        symbol_rate,
        t_w_ack_wait_s,
        max_slots,
        use_real_codec,
        1,
        seed,
    )?;
    let m = ancsat::run_once(&cfg, &trace.inner, seed).map_err(to_py_err)?;
    Ok(PyRunMetrics {
        packets_sent: m.packets_sent,
        symbols_sent: m.symbols_sent,
        delivery_delay_s: m.delivery_delay_s,
        delivered: m.delivered,
        energy_mw_s: m.energy_mw_s,
        silent_slots: m.silent_slots,
        trials_used: m.trials_used,
    })
}

/// One sweep point: means and standard errors over the runs.
#[pyclass(name = "SweepPoint", skip_from_py_object)]
#[derive(Clone)]
struct PySweepPoint {
    #[pyo3(get)]
    esn0_db: f64,
    #[pyo3(get)]
    n_runs: u32,
    #[pyo3(get)]
    avg_packets: f64,
    #[pyo3(get)]
    se_packets: f64,
    #[pyo3(get)]
    avg_delay_s: f64,
    #[pyo3(get)]
    se_delay_s: f64,
    #[pyo3(get)]
    throughput_bps: f64,
    #[pyo3(get)]
    se_throughput: f64,
    #[pyo3(get)]
    energy_mw_s: f64,
    #[pyo3(get)]
    se_energy: f64,
    #[pyo3(get)]
    delivery_rate: f64,
    #[pyo3(get)]
    silent_frac: f64,
}

#[pymethods]
impl PySweepPoint {
    fn __repr__(&self) -> String {
        format!(
            "SweepPoint(esn0_db={}, avg_packets={:.3}, throughput_bps={:.1}, energy_mw_s={:.3e})",
            self.esn0_db, self.avg_packets, self.throughput_bps, self.energy_mw_s
        )
    }
}

/// Monte-Carlo sweep of one scheme over an E_s/N0 grid.
///
/// `channel` is `constant` (flat trace per point) or `lms` (open-area
/// fading re-anchored per point).
#[pyfunction]
#[pyo3(signature = (scheme, esn0_grid_db, n_runs=1000, seed=0, channel="constant",
    slot_duration_s=1e-3, dof_target=4, batch_cap=16, max_trials=10,
    qos_pb_threshold=1e-5, csi_mode="genie", packet_bits=1000, n0_dbm=-107.0,
    symbol_rate=1e6, t_w_ack_wait_s=0.2388, max_slots=3000, use_real_codec=false))]
#[allow(clippy::too_many_arguments)]
fn run_sweep(
    scheme: &str,
    esn0_grid_db: Vec<f64>,
    n_runs: u32,
    seed: u64,
    channel: &str,
    slot_duration_s: f64,
    dof_target: u32,
    batch_cap: u32,
    max_trials: u32,
    qos_pb_threshold: f64,
    csi_mode: &str,
    packet_bits: u32,
    n0_dbm: f64,
    symbol_rate: f64,
    t_w_ack_wait_s: f64,
    max_slots: usize,
    use_real_codec: bool,
) -> PyResult<Vec<PySweepPoint>> {
    let cfg = build_sim(
        scheme,
        dof_target,
        batch_cap,
        max_trials,
        qos_pb_threshold,
        csi_mode,
        packet_bits,
        n0_dbm,
        symbol_rate,
        t_w_ack_wait_s,
        max_slots,
        use_real_codec,
        n_runs,
        seed,
    )?;
    let channel = match channel {
        "constant" => ChannelSpec::Constant { slot_duration_s },
        "lms" => {
            let mut params = LmsParameters::open_area_default();
            params.slot_duration_s = slot_duration_s;
            ChannelSpec::Lms(params)
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "channel must be `constant` or `lms`, found `{other}`"
            )))
        }
    };
    let points = ancsat::run_sweep(&cfg, &esn0_grid_db, &channel).map_err(to_py_err)?;
    Ok(points
        .into_iter()
        .map(|p| PySweepPoint {
            esn0_db: p.esn0_db,
            n_runs: p.n_runs,
            avg_packets: p.avg_packets,
            se_packets: p.se_packets,
            avg_delay_s: p.avg_delay_s,
            se_delay_s: p.se_delay_s,
            throughput_bps: p.throughput_bps,
            se_throughput: p.se_throughput,
            energy_mw_s: p.energy_mw_s,
            se_energy: p.se_energy,
            delivery_rate: p.delivery_rate,
            silent_frac: p.silent_frac,
        })
        .collect())
}

/// Expected delivery delay from the chain recursion, evaluated for
/// `dof_target` dof at slot 0. Returns (delay_s, residual_mass), where the
/// residual is the probability mass cut off by the horizon.
#[pyfunction]
#[pyo3(signature = (scheme, trace, dof_target=4, horizon=None, t_p_s=None,
    t_w_s=0.2388, batch_cap=16, qos_pb_threshold=1e-5, packet_bits=1000,
    symbol_rate=1e6, csi_mode="genie"))]
#[allow(clippy::too_many_arguments)]
fn expected_delay(
    scheme: &str,
    trace: &PyTrace,
    dof_target: u32,
    horizon: Option<usize>,
    t_p_s: Option<f64>,
    t_w_s: f64,
    batch_cap: u32,
    qos_pb_threshold: f64,
    packet_bits: u32,
    symbol_rate: f64,
    csi_mode: &str,
) -> PyResult<(f64, f64)> {
    let kind = PolicyKind::from_name(scheme).map_err(to_py_err)?;
    let phy = PhyConfig {
        packet_bits,
        symbol_rate,
        qos_pb_threshold,
        ..PhyConfig::default()
    };
    let policy = Policy::new(
        kind,
        PolicyConfig {
            batch_cap,
            qos_pb_threshold,
            csi_mode: csi(csi_mode)?,
            ..PolicyConfig::default()
        },
    );
    let horizon = horizon.unwrap_or(trace.inner.len());
    let space = StateSpace::new(dof_target, horizon).map_err(to_py_err)?;
    let t_p = t_p_s.unwrap_or(phy.packet_duration(Modulation::Bpsk));
    let table = ancsat::expected_delay(
        &trace.inner,
        &phy,
        Modulation::Bpsk,
        &policy,
        &space,
        t_p,
        t_w_s,
    )
    .map_err(to_py_err)?;
    Ok((
        table.expected_delay(dof_target, 0),
        table.residual_mass(dof_target, 0),
    ))
}

/// Parse a TOML experiment config, run the sweep, and write sweep.csv and
/// manifest.txt. Returns (sweep_csv_path, manifest_path).
#[pyfunction]
fn run_experiment(config_toml: &str) -> PyResult<(String, String)> {
    let cfg = ancsat::parse_config(config_toml).map_err(to_py_err)?;
    let arts = ancsat::run_experiment(&cfg).map_err(to_py_err)?;
    Ok((
        arts.sweep_csv.display().to_string(),
        arts.manifest.display().to_string(),
    ))
}

#[pymodule]
fn ancsat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyDecision>()?;
    m.add_class::<PyRunMetrics>()?;
    m.add_class::<PySweepPoint>()?;
    m.add_function(wrap_pyfunction!(ebn0_from_esn0, m)?)?;
    m.add_function(wrap_pyfunction!(bit_error_prob, m)?)?;
    m.add_function(wrap_pyfunction!(erasure_prob, m)?)?;
    m.add_function(wrap_pyfunction!(symbol_energy_mw, m)?)?;
    m.add_function(wrap_pyfunction!(packet_symbols, m)?)?;
    m.add_function(wrap_pyfunction!(decide_nc, m)?)?;
    m.add_function(wrap_pyfunction!(decide_anc, m)?)?;
    m.add_function(wrap_pyfunction!(decide_ancef, m)?)?;
    m.add_function(wrap_pyfunction!(decide_stancef, m)?)?;
    m.add_function(wrap_pyfunction!(decide_ancmef, m)?)?;
    m.add_function(wrap_pyfunction!(run_once, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(expected_delay, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
