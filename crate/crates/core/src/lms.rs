//! Land-mobile-satellite channel traces.
//!
//! Slow shadowing is a Markov chain over a small set of states; within a
//! state the received amplitude follows the Loo distribution (lognormal
//! direct component plus Rayleigh diffuse component). Each slot draws a
//! fresh amplitude and then steps the shadowing chain, so the state
//! transition matrix is pre-scaled to the slot duration.
//!
//! The generator ships a representative 3-state open-area GEO parameter
//! set (implementer-sourced, not a published table); tests and acceptance
//! runs that need exact values use constant or loaded traces instead.

use std::io::{BufRead, BufReader, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Loo parameters of one shadowing state.
///
/// `loo_alpha_db`/`loo_psi_db` are the mean and standard deviation of the
/// direct component in dB (lognormal amplitude); `loo_mp_db` is the average
/// multipath power in dB relative to the unshadowed direct component.
/// `f64::NEG_INFINITY` switches the diffuse component off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowState {
    pub loo_alpha_db: f64,
    pub loo_psi_db: f64,
    pub loo_mp_db: f64,
}

impl ShadowState {
    fn validate(&self) -> Result<()> {
        if self.loo_psi_db.is_nan() || self.loo_psi_db < 0.0 {
            return Err(Error::InvalidParameter("loo_psi_db must be >= 0".into()));
        }
        if !self.loo_alpha_db.is_finite() {
            return Err(Error::InvalidParameter(
                "loo_alpha_db must be finite".into(),
            ));
        }
        if self.loo_mp_db.is_nan() || self.loo_mp_db == f64::INFINITY {
            return Err(Error::InvalidParameter(
                "loo_mp_db must be finite or -inf".into(),
            ));
        }
        Ok(())
    }
}

/// Full channel description for the trace generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LmsParameters {
    pub states: Vec<ShadowState>,
    /// Row-stochastic transition matrix over `states`, one step per slot.
    pub state_transition: Vec<Vec<f64>>,
    pub slot_duration_s: f64,
    pub mobile_speed_ms: f64,
    /// Link-budget anchor: E_s/N0 in dB of the unshadowed direct path.
    pub mean_esn0_db: f64,
}

impl LmsParameters {
    /// Representative open-area GEO set, three states (line of sight,
    /// light shadow, deep shadow), reversible chain with stationary
    /// occupancy 0.5 / 0.3 / 0.2.
    pub fn open_area_default() -> Self {
        LmsParameters {
            states: vec![
                ShadowState {
                    loo_alpha_db: 0.0,
                    loo_psi_db: 0.5,
                    loo_mp_db: -22.0,
                },
                ShadowState {
                    loo_alpha_db: -8.0,
                    loo_psi_db: 3.0,
                    loo_mp_db: -17.0,
                },
                ShadowState {
                    loo_alpha_db: -17.0,
                    loo_psi_db: 3.5,
                    loo_mp_db: -14.0,
                },
            ],
            state_transition: vec![
                vec![0.998, 0.0015, 0.0005],
                vec![0.0025, 0.9955, 0.002],
                vec![0.00125, 0.003, 0.99575],
            ],
            slot_duration_s: 1e-3,
            mobile_speed_ms: 10.0,
            mean_esn0_db: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one state required".into(),
            ));
        }
        for s in &self.states {
            s.validate()?;
        }
        let n = self.states.len();
        if self.state_transition.len() != n {
            return Err(Error::InvalidParameter(format!(
                "state_transition has {} rows for {} states",
                self.state_transition.len(),
                n
            )));
        }
        for (i, row) in self.state_transition.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "state_transition row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "state_transition row {i} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "state_transition row {i} sums to {sum}, expected 1"
                )));
            }
        }
        if self.slot_duration_s.is_nan() || self.slot_duration_s <= 0.0 {
            return Err(Error::InvalidParameter("slot_duration must be > 0".into()));
        }
        if self.mobile_speed_ms.is_nan() || self.mobile_speed_ms < 0.0 {
            return Err(Error::InvalidParameter("mobile_speed must be >= 0".into()));
        }
        if !self.mean_esn0_db.is_finite() {
            return Err(Error::InvalidParameter(
                "mean_esn0_db must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Per-slot channel states: E_s/N0 in dB plus the shadowing label.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    pub esn0_db: Vec<f64>,
    pub state_labels: Vec<usize>,
    pub slot_duration_s: f64,
}

impl ChannelTrace {
    pub fn new(esn0_db: Vec<f64>, state_labels: Vec<usize>, slot_duration_s: f64) -> Result<Self> {
        if esn0_db.is_empty() || esn0_db.len() != state_labels.len() {
            return Err(Error::InvalidParameter(
                "esn0_db and state_labels must have equal nonzero length".into(),
            ));
        }
        if esn0_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "trace contains a non-finite E_s/N0 value".into(),
            ));
        }
        if slot_duration_s.is_nan() || slot_duration_s <= 0.0 {
            return Err(Error::InvalidParameter("slot_duration must be > 0".into()));
        }
        Ok(ChannelTrace {
            esn0_db,
            state_labels,
            slot_duration_s,
        })
    }

    /// Flat trace: every slot at `esn0_db`, single state label 0.
    pub fn constant(esn0_db: f64, n_slots: usize, slot_duration_s: f64) -> Self {
        assert!(n_slots >= 1, "n_slots must be >= 1");
        assert!(esn0_db.is_finite(), "esn0_db must be finite");
        assert!(slot_duration_s > 0.0, "slot_duration must be > 0");
        ChannelTrace {
            esn0_db: vec![esn0_db; n_slots],
            state_labels: vec![0; n_slots],
            slot_duration_s,
        }
    }

    pub fn len(&self) -> usize {
        self.esn0_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.esn0_db.is_empty()
    }
}

/// Generate a shadowed fading trace. Deterministic given
/// `(params, n_slots, seed)`.
///
/// Per slot: the direct amplitude is drawn lognormal (normal in dB around
/// `loo_alpha_db` with spread `loo_psi_db`), the diffuse component is
/// complex Gaussian with power `loo_mp_db`, and the slot's E_s/N0 is
/// `mean_esn0_db` shifted by the power of the summed field. The shadow
/// state then advances one step of `state_transition`. The chain starts in
/// state 0.
pub fn generate_trace(params: &LmsParameters, n_slots: usize, seed: u64) -> Result<ChannelTrace> {
    params.validate()?;
    if n_slots < 1 {
        return Err(Error::InvalidParameter("n_slots must be >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut esn0 = Vec::with_capacity(n_slots);
    let mut labels = Vec::with_capacity(n_slots);
    let mut state = 0usize;
    for _ in 0..n_slots {
        let s = &params.states[state];
        let z_direct: f64 = rng.sample(StandardNormal);
        let z_x: f64 = rng.sample(StandardNormal);
        let z_y: f64 = rng.sample(StandardNormal);
        let direct = 10f64.powf((s.loo_alpha_db + s.loo_psi_db * z_direct) / 20.0);
        // per-component variance is half the multipath power
        let sigma = (10f64.powf(s.loo_mp_db / 10.0) / 2.0).sqrt();
        let r = f64::hypot(direct + sigma * z_x, sigma * z_y).max(1e-300);
        esn0.push(params.mean_esn0_db + 20.0 * r.log10());
        labels.push(state);

        let u: f64 = rng.random();
        state = step_state(&params.state_transition[state], u);
    }
    Ok(ChannelTrace {
        esn0_db: esn0,
        state_labels: labels,
        slot_duration_s: params.slot_duration_s,
    })
}

fn step_state(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    row.len() - 1
}

pub const TRACE_CSV_HEADER: &str = "slot,esn0_db,state";

/// Write a trace in the trace CSV format: `slot,esn0_db,state` header, one
/// row per slot, decimal dot, LF line endings.
pub fn save_trace<W: Write>(trace: &ChannelTrace, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for (i, (v, s)) in trace.esn0_db.iter().zip(&trace.state_labels).enumerate() {
        writeln!(w, "{i},{v},{s}")?;
    }
    Ok(())
}

/// Parse a trace CSV. The byte stream does not carry the slot duration, so
/// callers supply it. Round-trips byte-wise with [`save_trace`].
pub fn load_trace<R: Read>(r: R, slot_duration_s: f64) -> Result<ChannelTrace> {
    let reader = BufReader::new(r);
    let mut esn0 = Vec::new();
    let mut labels = Vec::new();
    let mut line_no = 0usize;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| Error::TraceParse {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line_no == 1 {
            if line != TRACE_CSV_HEADER {
                return Err(Error::TraceParse {
                    line: 1,
                    message: format!("expected header `{TRACE_CSV_HEADER}`, found `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::TraceParse {
                line: line_no,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let slot: usize = fields[0].parse().map_err(|_| Error::TraceParse {
            line: line_no,
            message: format!("bad slot index `{}`", fields[0]),
        })?;
        if slot != esn0.len() {
            return Err(Error::TraceParse {
                line: line_no,
                message: format!("slot index {slot} out of order, expected {}", esn0.len()),
            });
        }
        let v: f64 = fields[1].parse().map_err(|_| Error::TraceParse {
            line: line_no,
            message: format!("bad esn0_db value `{}`", fields[1]),
        })?;
        if !v.is_finite() {
            return Err(Error::TraceParse {
                line: line_no,
                message: format!("non-finite esn0_db value `{}`", fields[1]),
            });
        }
        let s: usize = fields[2].parse().map_err(|_| Error::TraceParse {
            line: line_no,
            message: format!("bad state label `{}`", fields[2]),
        })?;
        esn0.push(v);
        labels.push(s);
    }
    if esn0.is_empty() {
        return Err(Error::TraceParse {
            line: line_no.max(1),
            message: "no data rows".into(),
        });
    }
    ChannelTrace::new(esn0, labels, slot_duration_s)
}
