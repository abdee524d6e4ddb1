//! # ancsat
//!
//! Link-level simulator and analysis library for energy-efficient adaptive
//! network-coded transmission over time-varying land-mobile-satellite
//! channels.
//!
//! The crate models a GEO forward link sending RLNC generations over a
//! shadowed fading channel and compares five batch-size strategies: two
//! benchmarks (`nc`, `anc`) and three QoS-gated adaptive schemes (`ancef`,
//! `stancef`, `ancmef`). Two evaluation routes share one policy interface:
//! a Markov delay recursion over (dof, slot) states and a Monte-Carlo
//! engine sweeping E_s/N0 for packet-count, delay, throughput and energy
//! curves.
//!
//! ```
//! use ancsat::{ChannelTrace, PolicyKind, SimConfig};
//!
//! let cfg = SimConfig::with_policy(PolicyKind::Ancef);
//! let trace = ChannelTrace::constant(12.0, cfg.max_slots + cfg.trace_margin(), 1e-3);
//! let metrics = ancsat::run_once(&cfg, &trace, 42).unwrap();
//! assert!(metrics.delivered);
//! ```

pub mod config;
pub mod error;
pub mod experiment;
pub mod lms;
pub mod markov;
pub mod phy;
pub mod policy;
pub mod rlnc;
pub mod sim;

pub use config::{parse_config, ExperimentConfig};
pub use error::{Error, Result};
pub use experiment::{analyze_delay, run_experiment};
pub use lms::{generate_trace, load_trace, save_trace, ChannelTrace, LmsParameters, ShadowState};
pub use markov::{build_matrix, expected_delay, n_step, DelayTable, StateSpace, TransitionMatrix};
pub use phy::{
    bit_error_prob, ebn0_from_esn0, erasure_prob, packet_symbols, symbol_energy_mw, Modulation,
    PhyConfig,
};
pub use policy::{
    decide_anc, decide_ancef, decide_ancmef, decide_nc, decide_stancef, effective_window,
    select_modulation, ChannelView, CsiMode, Policy, PolicyConfig, PolicyDecision, PolicyKind,
    PolicyState,
};
pub use rlnc::{encode, CodedPacket, DecoderState, Generation, Gf256};
pub use sim::{
    derive_seed, ideal_dof_channel, run_once, run_sweep, AckAdvance, ChannelSpec, RunMetrics,
    SimConfig, SweepPoint,
};
