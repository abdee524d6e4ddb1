//! Monte-Carlo link engine.
//!
//! A run walks a channel trace slot by slot: the policy decides a batch
//! (or silence) for the dof still outstanding, each packet of the batch
//! occupies one slot and is erased independently with that slot's P_e,
//! then the transmitter waits one ACK period. Delivery needs dof_target
//! innovative receptions; runs stop on delivery, on the trial cap, or at
//! the horizon.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lms::{generate_trace, ChannelTrace, LmsParameters};
use crate::phy::{self, Modulation, PhyConfig};
use crate::policy::{ChannelView, Policy, PolicyKind, PolicyState};
use crate::rlnc::{encode_one, DecoderState, Generation};

/// How an ACK wait advances the channel slot index. Time always advances
/// by the full `t_w`: the choice only affects how much channel evolution
/// the wait consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AckAdvance {
    /// One slot per ACK, matching the analytic recursion's "+1".
    SingleSlot,
    /// ceil(t_w / slot_duration) slots: fine-grained slotting where the
    /// channel keeps moving during the wait.
    Scaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Coded packets per generation (dof to deliver).
    pub dof_target: u32,
    /// Duration of one BPSK-length packet in seconds; other orders scale
    /// by their symbol count.
    pub t_p_packet_duration_s: f64,
    /// ACK round-trip wait in seconds (GEO default 0.2388).
    pub t_w_ack_wait_s: f64,
    pub policy: Policy,
    pub phy: PhyConfig,
    pub n_runs: u32,
    pub seed: u64,
    /// Route receptions through the GF(256) decoder instead of counting
    /// every reception as innovative.
    pub use_real_codec: bool,
    /// Horizon in channel slots; no new round starts at or past it.
    pub max_slots: usize,
    pub ack_advance: AckAdvance,
}

impl SimConfig {
    pub fn with_policy(kind: PolicyKind) -> Self {
        let phy = PhyConfig::default();
        SimConfig {
            dof_target: 4,
            t_p_packet_duration_s: phy.packet_duration(Modulation::Bpsk),
            t_w_ack_wait_s: 0.2388,
            policy: Policy::new(kind, Default::default()),
            phy,
            n_runs: 1000,
            seed: 0,
            use_real_codec: false,
            max_slots: 3000,
            ack_advance: AckAdvance::SingleSlot,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.phy.validate()?;
        self.policy.cfg.validate()?;
        if self.dof_target < 1 {
            return Err(Error::InvalidParameter("dof_target must be >= 1".into()));
        }
        if self.t_p_packet_duration_s.is_nan() || self.t_p_packet_duration_s <= 0.0 {
            return Err(Error::InvalidParameter(
                "t_p_packet_duration_s must be > 0".into(),
            ));
        }
        if self.t_w_ack_wait_s.is_nan() || self.t_w_ack_wait_s < 0.0 {
            return Err(Error::InvalidParameter(
                "t_w_ack_wait_s must be >= 0".into(),
            ));
        }
        if self.n_runs < 1 {
            return Err(Error::InvalidParameter("n_runs must be >= 1".into()));
        }
        if self.max_slots < 1 {
            return Err(Error::InvalidParameter("max_slots must be >= 1".into()));
        }
        Ok(())
    }

    /// Slots a point trace needs beyond the horizon so that end-of-horizon
    /// batches and decision windows stay inside the trace.
    pub fn trace_margin(&self) -> usize {
        self.policy
            .max_lookahead(self.dof_target)
            .max(self.policy.cfg.batch_cap as usize)
            + 1
    }

    fn packet_duration_for(&self, m: Modulation) -> f64 {
        let base = phy::packet_symbols(self.phy.packet_bits, Modulation::Bpsk) as f64;
        self.t_p_packet_duration_s * phy::packet_symbols(self.phy.packet_bits, m) as f64 / base
    }
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub packets_sent: u64,
    pub symbols_sent: u64,
    /// Time to delivery, or total elapsed time when not delivered.
    pub delivery_delay_s: f64,
    pub delivered: bool,
    /// Transmit energy in mW*s (per-Hz normalized); silence costs nothing.
    pub energy_mw_s: f64,
    pub silent_slots: u64,
    pub trials_used: u32,
    /// Slots consumed in total: transmissions, silences and ACK waits.
    pub channel_slots: u64,
}

/// Idealized receiver: every received coded packet is innovative.
pub fn ideal_dof_channel(i: u32, successes: u32) -> u32 {
    i.saturating_sub(successes)
}

/// SplitMix64 step, used to derive decorrelated per-run seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seed for (master, point, run); splittable so parallel runs stay
/// decorrelated and reproducible.
pub fn derive_seed(master: u64, point: u64, run: u64) -> u64 {
    let a = splitmix64(master ^ 0xA076_1D64_78BD_642F);
    let b = splitmix64(a ^ splitmix64(point));
    splitmix64(b ^ splitmix64(run))
}

/// Simulate one delivery attempt on `trace` with the given seed.
pub fn run_once(cfg: &SimConfig, trace: &ChannelTrace, seed: u64) -> Result<RunMetrics> {
    cfg.validate()?;
    let view = ChannelView::new(trace, &cfg.phy);
    run_once_with_view(cfg, &view, seed)
}

/// Hot path: the caller owns the precomputed per-slot tables.
pub fn run_once_with_view(cfg: &SimConfig, view: &ChannelView, seed: u64) -> Result<RunMetrics> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let horizon = cfg.max_slots.min(view.len());
    let slot_duration = view.trace.slot_duration_s;

    let mut codec = if cfg.use_real_codec {
        let payload_bytes = (cfg.phy.packet_bits as usize).div_ceil(8);
        let gen = Generation::random(
            cfg.dof_target as usize,
            payload_bytes,
            splitmix64(seed ^ 0x5DEECE66D),
        )?;
        let dec = DecoderState::new(cfg.dof_target as usize, payload_bytes);
        Some((gen, dec))
    } else {
        None
    };

    let mut i = cfg.dof_target;
    let mut state = PolicyState::initial();
    let mut slot = 0usize;
    let mut time = 0.0f64;
    let mut delivered = false;
    let mut delivery_delay = 0.0f64;
    let mut packets_sent = 0u64;
    let mut symbols_sent = 0u64;
    let mut energy = 0.0f64;
    let mut silent_slots = 0u64;
    let mut channel_slots = 0u64;

    while i > 0 && state.trial_count < cfg.policy.cfg.max_trials && slot < horizon {
        let (decision, next_state) = cfg.policy.decide_at(i, view, slot, &state);
        state = next_state;
        if decision.silent {
            slot += 1;
            channel_slots += 1;
            silent_slots += 1;
            time += slot_duration;
            continue;
        }
        let m = decision.modulation;
        let n = decision.batch_size;
        let syms = phy::packet_symbols(cfg.phy.packet_bits, m) as u64;
        let mut successes = 0u32;
        for _ in 0..n {
            if slot >= view.len() {
                return Err(Error::TraceExhausted { slot });
            }
            let pe = view.pe(m, slot);
            let u: f64 = rng.random();
            let received = u >= pe;
            packets_sent += 1;
            symbols_sent += syms;
            energy += phy::symbol_energy_mw(view.esn0(slot), cfg.phy.n0_dbm) * syms as f64
                / cfg.phy.symbol_rate;
            if received {
                if let Some((gen, dec)) = codec.as_mut() {
                    let pkt = encode_one(gen, &mut rng);
                    dec.absorb(&pkt)?;
                } else {
                    successes += 1;
                }
            }
            slot += 1;
            channel_slots += 1;
        }
        time += n as f64 * cfg.packet_duration_for(m) + cfg.t_w_ack_wait_s;
        let ack_slots = match cfg.ack_advance {
            AckAdvance::SingleSlot => 1usize,
            AckAdvance::Scaled => ((cfg.t_w_ack_wait_s / slot_duration).ceil() as usize).max(1),
        };
        slot += ack_slots;
        channel_slots += ack_slots as u64;
        i = match codec.as_ref() {
            Some((_, dec)) => cfg.dof_target - dec.rank() as u32,
            None => ideal_dof_channel(i, successes),
        };
        if i == 0 {
            delivered = true;
            delivery_delay = time;
        }
    }
    if !delivered {
        delivery_delay = time;
    }
    Ok(RunMetrics {
        packets_sent,
        symbols_sent,
        delivery_delay_s: delivery_delay,
        delivered,
        energy_mw_s: energy,
        silent_slots,
        trials_used: state.trial_count,
        channel_slots,
    })
}

/// Channel used by a sweep: a flat trace per grid point, or LMS fading
/// re-anchored so its link-budget mean sits at the grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Constant { slot_duration_s: f64 },
    Lms(LmsParameters),
}

impl ChannelSpec {
    pub fn slot_duration(&self) -> f64 {
        match self {
            ChannelSpec::Constant { slot_duration_s } => *slot_duration_s,
            ChannelSpec::Lms(p) => p.slot_duration_s,
        }
    }

    /// Trace for one sweep point. Deterministic given (cfg.seed, point).
    pub fn trace_for_point(
        &self,
        cfg: &SimConfig,
        esn0_db: f64,
        point: usize,
    ) -> Result<ChannelTrace> {
        let n_slots = cfg.max_slots + cfg.trace_margin();
        match self {
            ChannelSpec::Constant { slot_duration_s } => {
                Ok(ChannelTrace::constant(esn0_db, n_slots, *slot_duration_s))
            }
            ChannelSpec::Lms(params) => {
                let mut params = params.clone();
                params.mean_esn0_db = esn0_db;
                let seed = derive_seed(cfg.seed, 0xC4A2_2C1A ^ point as u64, 0);
                generate_trace(&params, n_slots, seed)
            }
        }
    }
}

/// Aggregated metrics of one sweep point: means with standard errors over
/// `n_runs` independent runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub esn0_db: f64,
    pub n_runs: u32,
    pub avg_packets: f64,
    pub se_packets: f64,
    pub avg_delay_s: f64,
    pub se_delay_s: f64,
    /// Delivered information rate dof*B/delay, zero for failed runs.
    pub throughput_bps: f64,
    pub se_throughput: f64,
    pub energy_mw_s: f64,
    pub se_energy: f64,
    pub delivery_rate: f64,
    pub silent_frac: f64,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn aggregate(esn0_db: f64, cfg: &SimConfig, runs: &[RunMetrics]) -> SweepPoint {
    let packets: Vec<f64> = runs.iter().map(|r| r.packets_sent as f64).collect();
    let delays: Vec<f64> = runs.iter().map(|r| r.delivery_delay_s).collect();
    let energy: Vec<f64> = runs.iter().map(|r| r.energy_mw_s).collect();
    let bits = cfg.dof_target as f64 * cfg.phy.packet_bits as f64;
    let throughput: Vec<f64> = runs
        .iter()
        .map(|r| {
            if r.delivered && r.delivery_delay_s > 0.0 {
                bits / r.delivery_delay_s
            } else {
                0.0
            }
        })
        .collect();
    let silent: Vec<f64> = runs
        .iter()
        .map(|r| {
            if r.channel_slots == 0 {
                0.0
            } else {
                r.silent_slots as f64 / r.channel_slots as f64
            }
        })
        .collect();
    let (avg_packets, se_packets) = mean_se(&packets);
    let (avg_delay_s, se_delay_s) = mean_se(&delays);
    let (throughput_bps, se_throughput) = mean_se(&throughput);
    let (energy_mw_s, se_energy) = mean_se(&energy);
    let delivery_rate = runs.iter().filter(|r| r.delivered).count() as f64 / runs.len() as f64;
    let (silent_frac, _) = mean_se(&silent);
    SweepPoint {
        esn0_db,
        n_runs: runs.len() as u32,
        avg_packets,
        se_packets,
        avg_delay_s,
        se_delay_s,
        throughput_bps,
        se_throughput,
        energy_mw_s,
        se_energy,
        delivery_rate,
        silent_frac,
    }
}

/// Run `cfg.n_runs` independent simulations per grid point.
///
/// Runs execute in parallel with per-run seeds derived from
/// (seed, point, run); aggregation folds the run vector in index order, so
/// parallel and serial sweeps produce identical numbers.
pub fn run_sweep(
    cfg: &SimConfig,
    esn0_grid: &[f64],
    channel: &ChannelSpec,
) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    if esn0_grid.is_empty() {
        return Err(Error::InvalidParameter("esn0 grid is empty".into()));
    }
    let mut points = Vec::with_capacity(esn0_grid.len());
    for (pi, &esn0) in esn0_grid.iter().enumerate() {
        let trace = channel.trace_for_point(cfg, esn0, pi)?;
        let view = ChannelView::new(&trace, &cfg.phy);
        let runs: Result<Vec<RunMetrics>> = (0..cfg.n_runs)
            .into_par_iter()
            .map(|run| {
                let seed = derive_seed(cfg.seed, pi as u64, run as u64);
                run_once_with_view(cfg, &view, seed)
            })
            .collect();
        points.push(aggregate(esn0, cfg, &runs?));
    }
    Ok(points)
}
