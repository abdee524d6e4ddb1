//! The five transmission strategies behind one decision interface.
//!
//! Given the remaining degrees of freedom, a window of per-slot erasure
//! probabilities and the PHY constants, each policy emits a batch size,
//! a modulation, or silence:
//!
//! * `nc`      - non-adaptive: always send i coded packets.
//! * `anc`     - rate-driven: smallest batch whose expected successes
//!   cover i, capped.
//! * `ancef`   - energy-driven: batch = rounded sum of success
//!   probabilities over the next i slots; silent when the current slot
//!   misses the QoS bit-error ceiling.
//! * `stancef` - ancef plus a self-tracing carry: the previous round's
//!   dof shortfall extends the summation window.
//! * `ancmef`  - ancef plus adaptive modulation: the highest
//!   QoS-qualifying order (among those packing B bits without extra
//!   padding) shortens packets and scales the window by log2(m).
//!
//! Silence consumes one channel slot and zero energy; the decision is
//! re-evaluated at the next slot.

use crate::error::{Error, Result};
use crate::lms::ChannelTrace;
use crate::phy::{self, Modulation, PhyConfig};

/// Policy selector, by the names used in configs and CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Nc,
    Anc,
    Ancef,
    Stancef,
    Ancmef,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Nc,
        PolicyKind::Anc,
        PolicyKind::Ancef,
        PolicyKind::Stancef,
        PolicyKind::Ancmef,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Nc => "nc",
            PolicyKind::Anc => "anc",
            PolicyKind::Ancef => "ancef",
            PolicyKind::Stancef => "stancef",
            PolicyKind::Ancmef => "ancmef",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "nc" => Ok(PolicyKind::Nc),
            "anc" => Ok(PolicyKind::Anc),
            "ancef" => Ok(PolicyKind::Ancef),
            "stancef" => Ok(PolicyKind::Stancef),
            "ancmef" => Ok(PolicyKind::Ancmef),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme `{other}` (expected nc, anc, ancef, stancef or ancmef)"
            ))),
        }
    }
}

/// How the policy observes the channel window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiMode {
    /// True per-slot erasure probabilities of the upcoming slots. Matches
    /// the analytic model's assumptions.
    Genie,
    /// The current slot's erasure probability held over the window.
    Hold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub batch_cap: u32,
    pub max_trials: u32,
    pub qos_pb_threshold: f64,
    pub csi_mode: CsiMode,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            batch_cap: 16,
            max_trials: 10,
            qos_pb_threshold: 1e-5,
            csi_mode: CsiMode::Genie,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_cap < 1 {
            return Err(Error::InvalidParameter("batch_cap must be >= 1".into()));
        }
        if self.max_trials < 1 {
            return Err(Error::InvalidParameter("max_trials must be >= 1".into()));
        }
        if self.qos_pb_threshold.is_nan()
            || self.qos_pb_threshold <= 0.0
            || self.qos_pb_threshold >= 1.0
        {
            return Err(Error::InvalidParameter(
                "qos_pb_threshold must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Carry state across rounds. `delta` is the STANCEF shortfall i - N from
/// the previous transmission; zero at the first round and for every other
/// policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PolicyState {
    pub delta: u32,
    pub trial_count: u32,
}

impl PolicyState {
    pub fn initial() -> Self {
        PolicyState::default()
    }
}

/// One round's output: how many coded packets to send and how, or silence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyDecision {
    /// 0 means a silent slot.
    pub batch_size: u32,
    pub modulation: Modulation,
    pub silent: bool,
}

impl PolicyDecision {
    pub fn transmit(batch_size: u32, modulation: Modulation) -> Self {
        debug_assert!(batch_size >= 1);
        PolicyDecision {
            batch_size,
            modulation,
            silent: false,
        }
    }

    pub fn silence() -> Self {
        PolicyDecision {
            batch_size: 0,
            modulation: Modulation::Bpsk,
            silent: true,
        }
    }
}

/// Packet counts are integers: round half up.
fn round_half_up(x: f64) -> u32 {
    debug_assert!(x >= 0.0);
    (x + 0.5).floor() as u32
}

/// Non-adaptive benchmark: resend the missing dof count, always BPSK.
pub fn decide_nc(i: u32, _window: &[f64]) -> PolicyDecision {
    debug_assert!(i >= 1);
    PolicyDecision::transmit(i, Modulation::Bpsk)
}

/// Rate-driven benchmark: smallest batch whose expected successes cover i,
/// capped at `batch_cap`.
pub fn decide_anc(i: u32, window: &[f64], cfg: &PolicyConfig) -> PolicyDecision {
    debug_assert!(i >= 1);
    assert!(
        window.len() >= cfg.batch_cap as usize,
        "anc window shorter than batch_cap"
    );
    let mut expected = 0.0;
    for n in 1..=cfg.batch_cap {
        expected += 1.0 - window[(n - 1) as usize];
        if expected >= i as f64 {
            return PolicyDecision::transmit(n, Modulation::Bpsk);
        }
    }
    PolicyDecision::transmit(cfg.batch_cap, Modulation::Bpsk)
}

/// Energy-driven adaptation: N = rounded sum of per-slot success
/// probabilities over the next i slots, silent when the current slot's
/// bit error probability exceeds the QoS ceiling (or when N rounds to 0).
pub fn decide_ancef(i: u32, window: &[f64], p_b_now: f64, cfg: &PolicyConfig) -> PolicyDecision {
    debug_assert!(i >= 1);
    assert!(window.len() >= i as usize, "ancef window shorter than i");
    if p_b_now > cfg.qos_pb_threshold {
        return PolicyDecision::silence();
    }
    let sum: f64 = window[..i as usize].iter().map(|pe| 1.0 - pe).sum();
    let n = round_half_up(sum).min(cfg.batch_cap);
    if n == 0 {
        PolicyDecision::silence()
    } else {
        PolicyDecision::transmit(n, Modulation::Bpsk)
    }
}

/// Self-tracing variant: the previous shortfall extends the window to
/// i + delta slots; the new shortfall max(0, i - N) is carried to the round
/// after the ACK. A QoS-silenced slot leaves the carry untouched (no
/// transmission was attempted); an N that rounds to zero is a transmission
/// strategy outcome and carries delta = i.
pub fn decide_stancef(
    i: u32,
    window: &[f64],
    p_b_now: f64,
    state: &PolicyState,
    cfg: &PolicyConfig,
) -> (PolicyDecision, PolicyState) {
    debug_assert!(i >= 1);
    let span = (i + state.delta) as usize;
    assert!(
        window.len() >= span,
        "stancef window shorter than i + delta"
    );
    if p_b_now > cfg.qos_pb_threshold {
        return (PolicyDecision::silence(), *state);
    }
    let sum: f64 = window[..span].iter().map(|pe| 1.0 - pe).sum();
    let n = round_half_up(sum).min(cfg.batch_cap);
    let decision = if n == 0 {
        PolicyDecision::silence()
    } else {
        PolicyDecision::transmit(n, Modulation::Bpsk)
    };
    let next = PolicyState {
        delta: i.saturating_sub(n),
        trial_count: state.trial_count + (n > 0) as u32,
    };
    (decision, next)
}

/// Bits on air per packet at modulation `m`: ceil(B / log2 m) * log2 m.
/// Exceeds B when log2(m) does not divide B (8PSK at B = 1000 pads to
/// 1002 bits); a batch of i*log2(m) packets then costs more symbols per
/// dof than a lower order would.
fn padded_packet_bits(packet_bits: u32, m: Modulation) -> u32 {
    phy::packet_symbols(packet_bits, m) * m.bits_per_symbol()
}

/// Modulation chosen by ANCMEF at the given slot: the highest order that
/// meets QoS without exceeding the least per-packet padding available at
/// this SNR. For packet sizes every order divides, this is simply the
/// highest QoS-qualifying order. `None` when all four orders fail QoS.
pub fn select_modulation(
    esn0_now_db: f64,
    phy: &PhyConfig,
    cfg: &PolicyConfig,
) -> Option<Modulation> {
    let min_cost = Modulation::ALL
        .into_iter()
        .filter(|&m| phy::bit_error_prob(esn0_now_db, m) <= cfg.qos_pb_threshold)
        .map(|m| padded_packet_bits(phy.packet_bits, m))
        .min()?;
    Modulation::ALL.into_iter().rev().find(|&m| {
        phy::bit_error_prob(esn0_now_db, m) <= cfg.qos_pb_threshold
            && padded_packet_bits(phy.packet_bits, m) == min_cost
    })
}

/// Modulation-adaptive variant: pick the modulation per
/// [`select_modulation`] (silent when every order fails QoS), then sum
/// success probabilities over i * log2(m) slots using that modulation's
/// erasures. Packets shrink to ceil(B / log2 m) symbols.
pub fn decide_ancmef(
    i: u32,
    esn0_now_db: f64,
    window_esn0_db: &[f64],
    phy: &PhyConfig,
    cfg: &PolicyConfig,
) -> PolicyDecision {
    debug_assert!(i >= 1);
    let Some(m) = select_modulation(esn0_now_db, phy, cfg) else {
        return PolicyDecision::silence();
    };
    let span = (i * m.bits_per_symbol()) as usize;
    assert!(
        window_esn0_db.len() >= span,
        "ancmef window shorter than i * log2(m)"
    );
    let sum: f64 = window_esn0_db[..span]
        .iter()
        .map(|&esn0| 1.0 - phy::erasure_prob(phy::bit_error_prob(esn0, m), phy.packet_bits))
        .sum();
    let n = round_half_up(sum).min(cfg.batch_cap);
    if n == 0 {
        PolicyDecision::silence()
    } else {
        PolicyDecision::transmit(n, m)
    }
}

/// Erasure probabilities a policy sees from slot `j`, for `len` slots.
pub fn effective_window(
    trace: &ChannelTrace,
    j: usize,
    len: usize,
    mode: CsiMode,
    phy: &PhyConfig,
    m: Modulation,
) -> Result<Vec<f64>> {
    debug_assert!(len >= 1);
    let pe = |esn0: f64| phy::erasure_prob(phy::bit_error_prob(esn0, m), phy.packet_bits);
    match mode {
        CsiMode::Genie => {
            if j + len > trace.len() {
                return Err(Error::SlotRange(format!(
                    "genie window [{j}, {}) exceeds trace length {}",
                    j + len,
                    trace.len()
                )));
            }
            Ok(trace.esn0_db[j..j + len].iter().map(|&e| pe(e)).collect())
        }
        CsiMode::Hold => {
            if j >= trace.len() {
                return Err(Error::SlotRange(format!(
                    "slot {j} exceeds trace length {}",
                    trace.len()
                )));
            }
            Ok(vec![pe(trace.esn0_db[j]); len])
        }
    }
}

/// Per-slot bit-error and erasure probabilities for all four modulations,
/// precomputed once per trace so simulation runs share the work.
///
/// Lookups past the end of the trace are served from the final slot, so
/// decision windows near the horizon stay well defined. Traces built with
/// a lookahead margin (as the sweep driver does) never hit the padding.
pub struct ChannelView<'a> {
    pub trace: &'a ChannelTrace,
    pub phy: &'a PhyConfig,
    pb: [Vec<f64>; 4],
    pe: [Vec<f64>; 4],
}

fn mod_index(m: Modulation) -> usize {
    match m {
        Modulation::Bpsk => 0,
        Modulation::Qpsk => 1,
        Modulation::Psk8 => 2,
        Modulation::Qam16 => 3,
    }
}

impl<'a> ChannelView<'a> {
    pub fn new(trace: &'a ChannelTrace, phy: &'a PhyConfig) -> Self {
        let build = |m: Modulation| -> (Vec<f64>, Vec<f64>) {
            trace
                .esn0_db
                .iter()
                .map(|&e| {
                    let pb = phy::bit_error_prob(e, m);
                    (pb, phy::erasure_prob(pb, phy.packet_bits))
                })
                .unzip()
        };
        let (pb0, pe0) = build(Modulation::Bpsk);
        let (pb1, pe1) = build(Modulation::Qpsk);
        let (pb2, pe2) = build(Modulation::Psk8);
        let (pb3, pe3) = build(Modulation::Qam16);
        ChannelView {
            trace,
            phy,
            pb: [pb0, pb1, pb2, pb3],
            pe: [pe0, pe1, pe2, pe3],
        }
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace.is_empty()
    }

    fn clamp(&self, slot: usize) -> usize {
        slot.min(self.len() - 1)
    }

    pub fn esn0(&self, slot: usize) -> f64 {
        self.trace.esn0_db[self.clamp(slot)]
    }

    pub fn pb(&self, m: Modulation, slot: usize) -> f64 {
        self.pb[mod_index(m)][self.clamp(slot)]
    }

    pub fn pe(&self, m: Modulation, slot: usize) -> f64 {
        self.pe[mod_index(m)][self.clamp(slot)]
    }

    /// Window of erasure probabilities from the tables. Unlike
    /// [`effective_window`], slots past the trace end repeat the final slot.
    pub fn erasure_window(&self, m: Modulation, j: usize, len: usize, mode: CsiMode) -> Vec<f64> {
        match mode {
            CsiMode::Genie => (j..j + len).map(|s| self.pe(m, s)).collect(),
            CsiMode::Hold => vec![self.pe(m, j); len],
        }
    }
}

/// A policy bound to its configuration; the interface the simulator and
/// the analytic recursion drive.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub kind: PolicyKind,
    pub cfg: PolicyConfig,
}

impl Policy {
    pub fn new(kind: PolicyKind, cfg: PolicyConfig) -> Self {
        Policy { kind, cfg }
    }

    /// Decide the round starting at slot `j` with `i` dof outstanding.
    /// `trial_count` in the returned state increments on transmissions.
    pub fn decide_at(
        &self,
        i: u32,
        view: &ChannelView,
        j: usize,
        state: &PolicyState,
    ) -> (PolicyDecision, PolicyState) {
        debug_assert!(i >= 1);
        let csi = self.cfg.csi_mode;
        let bump = |d: &PolicyDecision, st: &PolicyState| PolicyState {
            delta: 0,
            trial_count: st.trial_count + (!d.silent) as u32,
        };
        match self.kind {
            PolicyKind::Nc => {
                let d = decide_nc(i, &[]);
                let next = bump(&d, state);
                (d, next)
            }
            PolicyKind::Anc => {
                let window =
                    view.erasure_window(Modulation::Bpsk, j, self.cfg.batch_cap as usize, csi);
                let d = decide_anc(i, &window, &self.cfg);
                let next = bump(&d, state);
                (d, next)
            }
            PolicyKind::Ancef => {
                let p_b_now = view.pb(Modulation::Bpsk, j);
                if p_b_now > self.cfg.qos_pb_threshold {
                    // QoS silence decided before the window is even built
                    let d = PolicyDecision::silence();
                    let next = bump(&d, state);
                    return (d, next);
                }
                let window = view.erasure_window(Modulation::Bpsk, j, i as usize, csi);
                let d = decide_ancef(i, &window, p_b_now, &self.cfg);
                let next = bump(&d, state);
                (d, next)
            }
            PolicyKind::Stancef => {
                let p_b_now = view.pb(Modulation::Bpsk, j);
                if p_b_now > self.cfg.qos_pb_threshold {
                    return (PolicyDecision::silence(), *state);
                }
                let span = (i + state.delta) as usize;
                let window = view.erasure_window(Modulation::Bpsk, j, span, csi);
                decide_stancef(i, &window, p_b_now, state, &self.cfg)
            }
            PolicyKind::Ancmef => {
                let qos = self.cfg.qos_pb_threshold;
                let min_cost = Modulation::ALL
                    .into_iter()
                    .filter(|&m| view.pb(m, j) <= qos)
                    .map(|m| padded_packet_bits(view.phy.packet_bits, m))
                    .min();
                let m_star = min_cost.and_then(|cost| {
                    Modulation::ALL.into_iter().rev().find(|&m| {
                        view.pb(m, j) <= qos && padded_packet_bits(view.phy.packet_bits, m) == cost
                    })
                });
                let Some(m) = m_star else {
                    return (PolicyDecision::silence(), *state);
                };
                let span = (i * m.bits_per_symbol()) as usize;
                let window = view.erasure_window(m, j, span, csi);
                let sum: f64 = window.iter().map(|pe| 1.0 - pe).sum();
                let n = round_half_up(sum).min(self.cfg.batch_cap);
                let d = if n == 0 {
                    PolicyDecision::silence()
                } else {
                    PolicyDecision::transmit(n, m)
                };
                let next = bump(&d, state);
                (d, next)
            }
        }
    }

    /// Longest window `decide_at` may read past the round's start slot.
    pub fn max_lookahead(&self, dof_target: u32) -> usize {
        match self.kind {
            PolicyKind::Nc => 1,
            PolicyKind::Anc => self.cfg.batch_cap as usize,
            PolicyKind::Ancef => dof_target as usize,
            // delta never exceeds the dof outstanding at a round
            PolicyKind::Stancef => 2 * dof_target as usize,
            PolicyKind::Ancmef => 4 * dof_target as usize,
        }
    }
}
