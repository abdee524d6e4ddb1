//! Experiment configuration: TOML schema, defaults, validation.
//!
//! The schema is a handful of key-value sections; unknown keys are
//! rejected with the offending key and line in the diagnostic. A minimal
//! config needs only the scheme list and the E_s/N0 grid:
//!
//! ```toml
//! [experiment]
//! schemes = ["nc", "ancef"]
//! esn0_grid_db = [0.0, 6.0, 12.0]
//! ```
//!
//! Everything else defaults to the reference scenario: 4 dof, batch cap
//! 16, 10 trials, T_w = 0.2388 s, B = 1000 bits, N0 = -107 dBm, QoS
//! ceiling 1e-5, genie CSI, a constant channel per grid point, and
//! 1 Msym/s (so a BPSK packet lasts 1 ms).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lms::{LmsParameters, ShadowState};
use crate::phy::PhyConfig;
use crate::policy::{CsiMode, Policy, PolicyConfig, PolicyKind};
use crate::sim::{AckAdvance, ChannelSpec, SimConfig};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: ExperimentSection,
    #[serde(default)]
    channel: ChannelSection,
    #[serde(default)]
    sim: SimSection,
    #[serde(default)]
    phy: PhySection,
    #[serde(default)]
    policy: PolicySection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    schemes: Vec<String>,
    esn0_grid_db: Vec<f64>,
    #[serde(default = "default_output_dir")]
    output_dir: String,
    #[serde(default)]
    seed: u64,
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct ChannelSection {
    /// `constant` or `lms`.
    kind: String,
    slot_duration_s: f64,
    mobile_speed_ms: f64,
    /// Link-budget anchor for generated traces; sweeps re-anchor per point.
    mean_esn0_db: f64,
    /// Loo state set; defaults to the representative open-area triple.
    states: Option<Vec<StateSection>>,
    state_transition: Option<Vec<Vec<f64>>>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            kind: "constant".into(),
            slot_duration_s: 1e-3,
            mobile_speed_ms: 10.0,
            mean_esn0_db: 10.0,
            states: None,
            state_transition: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct StateSection {
    loo_alpha_db: f64,
    loo_psi_db: f64,
    loo_mp_db: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct SimSection {
    dof_target: u32,
    t_w_ack_wait_s: f64,
    /// BPSK packet duration; derived from packet_bits / symbol_rate when
    /// absent.
    t_p_packet_duration_s: Option<f64>,
    n_runs: u32,
    max_slots: usize,
    use_real_codec: bool,
    /// `single_slot` or `scaled`.
    ack_advance: String,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            dof_target: 4,
            t_w_ack_wait_s: 0.2388,
            t_p_packet_duration_s: None,
            n_runs: 1000,
            max_slots: 3000,
            use_real_codec: false,
            ack_advance: "single_slot".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct PhySection {
    packet_bits: u32,
    n0_dbm: f64,
    symbol_rate: f64,
    qos_pb_threshold: f64,
}

impl Default for PhySection {
    fn default() -> Self {
        let p = PhyConfig::default();
        PhySection {
            packet_bits: p.packet_bits,
            n0_dbm: p.n0_dbm,
            symbol_rate: p.symbol_rate,
            qos_pb_threshold: p.qos_pb_threshold,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct PolicySection {
    batch_cap: u32,
    max_trials: u32,
    /// `genie` or `hold`.
    csi_mode: String,
}

impl Default for PolicySection {
    fn default() -> Self {
        PolicySection {
            batch_cap: 16,
            max_trials: 10,
            csi_mode: "genie".into(),
        }
    }
}

/// Fully resolved and validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: Vec<PolicyKind>,
    pub esn0_grid_db: Vec<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub channel: ChannelSpec,
    pub phy: PhyConfig,
    pub policy_cfg: PolicyConfig,
    pub dof_target: u32,
    pub t_p_packet_duration_s: f64,
    pub t_w_ack_wait_s: f64,
    pub n_runs: u32,
    pub max_slots: usize,
    pub use_real_codec: bool,
    pub ack_advance: AckAdvance,
}

impl ExperimentConfig {
    /// Simulator configuration for one scheme of the experiment.
    pub fn sim_config(&self, kind: PolicyKind) -> SimConfig {
        SimConfig {
            dof_target: self.dof_target,
            t_p_packet_duration_s: self.t_p_packet_duration_s,
            t_w_ack_wait_s: self.t_w_ack_wait_s,
            policy: Policy::new(kind, self.policy_cfg.clone()),
            phy: self.phy.clone(),
            n_runs: self.n_runs,
            seed: self.seed,
            use_real_codec: self.use_real_codec,
            max_slots: self.max_slots,
            ack_advance: self.ack_advance,
        }
    }

    /// Render the resolved configuration as TOML; parsing it back yields
    /// the same experiment, which is what the run manifest relies on.
    pub fn to_toml(&self) -> String {
        let (kind, states, transition) = match &self.channel {
            ChannelSpec::Constant { .. } => ("constant".to_string(), None, None),
            ChannelSpec::Lms(p) => (
                "lms".to_string(),
                Some(
                    p.states
                        .iter()
                        .map(|s| StateSection {
                            loo_alpha_db: s.loo_alpha_db,
                            loo_psi_db: s.loo_psi_db,
                            loo_mp_db: s.loo_mp_db,
                        })
                        .collect(),
                ),
                Some(p.state_transition.clone()),
            ),
        };
        let (mobile_speed_ms, mean_esn0_db) = match &self.channel {
            ChannelSpec::Constant { .. } => (10.0, 10.0),
            ChannelSpec::Lms(p) => (p.mobile_speed_ms, p.mean_esn0_db),
        };
        let file = ConfigFile {
            experiment: ExperimentSection {
                schemes: self.schemes.iter().map(|s| s.name().to_string()).collect(),
                esn0_grid_db: self.esn0_grid_db.clone(),
                output_dir: self.output_dir.display().to_string(),
                seed: self.seed,
            },
            channel: ChannelSection {
                kind,
                slot_duration_s: self.channel.slot_duration(),
                mobile_speed_ms,
                mean_esn0_db,
                states,
                state_transition: transition,
            },
            sim: SimSection {
                dof_target: self.dof_target,
                t_w_ack_wait_s: self.t_w_ack_wait_s,
                t_p_packet_duration_s: Some(self.t_p_packet_duration_s),
                n_runs: self.n_runs,
                max_slots: self.max_slots,
                use_real_codec: self.use_real_codec,
                ack_advance: match self.ack_advance {
                    AckAdvance::SingleSlot => "single_slot".into(),
                    AckAdvance::Scaled => "scaled".into(),
                },
            },
            phy: PhySection {
                packet_bits: self.phy.packet_bits,
                n0_dbm: self.phy.n0_dbm,
                symbol_rate: self.phy.symbol_rate,
                qos_pb_threshold: self.phy.qos_pb_threshold,
            },
            policy: PolicySection {
                batch_cap: self.policy_cfg.batch_cap,
                max_trials: self.policy_cfg.max_trials,
                csi_mode: match self.policy_cfg.csi_mode {
                    CsiMode::Genie => "genie".into(),
                    CsiMode::Hold => "hold".into(),
                },
            },
        };
        toml::to_string(&file).expect("resolved config serializes")
    }
}

/// Parse and validate a TOML experiment document, applying defaults.
pub fn parse_config(source: &str) -> Result<ExperimentConfig> {
    let file: ConfigFile = toml::from_str(source).map_err(|e| Error::Config(e.to_string()))?;

    let mut schemes = Vec::new();
    for name in &file.experiment.schemes {
        let kind = PolicyKind::from_name(name).map_err(|e| Error::Config(e.to_string()))?;
        if !schemes.contains(&kind) {
            schemes.push(kind);
        }
    }
    if schemes.is_empty() {
        return Err(Error::Config("experiment.schemes must not be empty".into()));
    }

    let grid = &file.experiment.esn0_grid_db;
    if grid.is_empty() {
        return Err(Error::Config(
            "experiment.esn0_grid_db must not be empty".into(),
        ));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(
            "experiment.esn0_grid_db contains a non-finite value".into(),
        ));
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Config(format!(
                "experiment.esn0_grid_db must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
    }

    let phy = PhyConfig {
        packet_bits: file.phy.packet_bits,
        n0_dbm: file.phy.n0_dbm,
        symbol_rate: file.phy.symbol_rate,
        qos_pb_threshold: file.phy.qos_pb_threshold,
    };
    phy.validate().map_err(|e| Error::Config(e.to_string()))?;

    let csi_mode = match file.policy.csi_mode.as_str() {
        "genie" => CsiMode::Genie,
        "hold" => CsiMode::Hold,
        other => {
            return Err(Error::Config(format!(
                "policy.csi_mode must be `genie` or `hold`, found `{other}`"
            )))
        }
    };
    let policy_cfg = PolicyConfig {
        batch_cap: file.policy.batch_cap,
        max_trials: file.policy.max_trials,
        qos_pb_threshold: phy.qos_pb_threshold,
        csi_mode,
    };
    policy_cfg
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;

    let channel = match file.channel.kind.as_str() {
        "constant" => ChannelSpec::Constant {
            slot_duration_s: file.channel.slot_duration_s,
        },
        "lms" => {
            let defaults = LmsParameters::open_area_default();
            let states = match &file.channel.states {
                Some(list) => list
                    .iter()
                    .map(|s| ShadowState {
                        loo_alpha_db: s.loo_alpha_db,
                        loo_psi_db: s.loo_psi_db,
                        loo_mp_db: s.loo_mp_db,
                    })
                    .collect(),
                None => defaults.states.clone(),
            };
            let state_transition = file
                .channel
                .state_transition
                .clone()
                .unwrap_or(defaults.state_transition);
            let params = LmsParameters {
                states,
                state_transition,
                slot_duration_s: file.channel.slot_duration_s,
                mobile_speed_ms: file.channel.mobile_speed_ms,
                mean_esn0_db: file.channel.mean_esn0_db,
            };
            params
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
            ChannelSpec::Lms(params)
        }
        other => {
            return Err(Error::Config(format!(
                "channel.kind must be `constant` or `lms`, found `{other}`"
            )))
        }
    };
    if file.channel.slot_duration_s.is_nan() || file.channel.slot_duration_s <= 0.0 {
        return Err(Error::Config("channel.slot_duration_s must be > 0".into()));
    }

    let ack_advance = match file.sim.ack_advance.as_str() {
        "single_slot" => AckAdvance::SingleSlot,
        "scaled" => AckAdvance::Scaled,
        other => {
            return Err(Error::Config(format!(
                "sim.ack_advance must be `single_slot` or `scaled`, found `{other}`"
            )))
        }
    };
    let t_p = file
        .sim
        .t_p_packet_duration_s
        .unwrap_or(phy.packet_bits as f64 / phy.symbol_rate);

    let cfg = ExperimentConfig {
        schemes,
        esn0_grid_db: grid.clone(),
        output_dir: PathBuf::from(file.experiment.output_dir),
        seed: file.experiment.seed,
        channel,
        phy,
        policy_cfg,
        dof_target: file.sim.dof_target,
        t_p_packet_duration_s: t_p,
        t_w_ack_wait_s: file.sim.t_w_ack_wait_s,
        n_runs: file.sim.n_runs,
        max_slots: file.sim.max_slots,
        use_real_codec: file.sim.use_real_codec,
        ack_advance,
    };
    cfg.sim_config(cfg.schemes[0])
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}
