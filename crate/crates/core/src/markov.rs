//! Markov chain over (remaining dof, slot) states and the expected-delay
//! recursion.
//!
//! Each chain state couples the dof still outstanding with the current
//! slot. A transmitted packet either decrements the dof (probability
//! 1 - P_e of the slot) or leaves it unchanged, and the slot always
//! advances; one extra state absorbs both delivery and the end of the
//! horizon. The expected time to deliver is evaluated backward over the
//! slots: each round contributes N*T_p + T_w and lands on the N-step
//! transition distribution, one further slot ahead for the ACK.

use std::io::Write;

use crate::error::{Error, Result};
use crate::lms::ChannelTrace;
use crate::phy::{self, Modulation, PhyConfig};
use crate::policy::{ChannelView, Policy, PolicyKind, PolicyState};

/// Index space: dof 1..=i_max crossed with slots 0..J, plus one absorbing
/// state. Dimension i_max*J + 1 (401 for the 4 x 100 default).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    i_max: u32,
    n_slots_j: usize,
}

impl Default for StateSpace {
    fn default() -> Self {
        StateSpace {
            i_max: 4,
            n_slots_j: 100,
        }
    }
}

impl StateSpace {
    pub fn new(i_max: u32, n_slots_j: usize) -> Result<Self> {
        if i_max < 1 || n_slots_j < 1 {
            return Err(Error::InvalidParameter(
                "i_max and n_slots_j must be >= 1".into(),
            ));
        }
        Ok(StateSpace { i_max, n_slots_j })
    }

    pub fn i_max(&self) -> u32 {
        self.i_max
    }

    pub fn n_slots_j(&self) -> usize {
        self.n_slots_j
    }

    pub fn dim(&self) -> usize {
        self.i_max as usize * self.n_slots_j + 1
    }

    /// Row index of (i, j); i in 1..=i_max, j in 0..J.
    pub fn index(&self, i: u32, j: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.i_max && j < self.n_slots_j);
        (i as usize - 1) * self.n_slots_j + j
    }

    pub fn absorbing(&self) -> usize {
        self.dim() - 1
    }

    /// Inverse of [`StateSpace::index`]; `None` for the absorbing state.
    pub fn state_at(&self, idx: usize) -> Option<(u32, usize)> {
        if idx >= self.absorbing() {
            return None;
        }
        Some(((idx / self.n_slots_j) as u32 + 1, idx % self.n_slots_j))
    }
}

/// Sparse row-stochastic matrix; interior rows carry at most two entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from]
            .iter()
            .find(|(c, _)| *c == to)
            .map_or(0.0, |(_, p)| *p)
    }

    /// Largest |row sum - 1| over all rows.
    pub fn max_row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Sparse product self * rhs.
    pub fn multiply(&self, rhs: &TransitionMatrix) -> TransitionMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut scratch = vec![0.0f64; self.dim];
        let mut seen = vec![false; self.dim];
        let mut touched: Vec<usize> = Vec::new();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                for &(mid, p) in row {
                    for &(col, q) in &rhs.rows[mid] {
                        if !seen[col] {
                            seen[col] = true;
                            touched.push(col);
                        }
                        scratch[col] += p * q;
                    }
                }
                touched.sort_unstable();
                let out: Vec<(usize, f64)> = touched.iter().map(|&c| (c, scratch[c])).collect();
                for &c in &touched {
                    scratch[c] = 0.0;
                    seen[c] = false;
                }
                touched.clear();
                out
            })
            .collect();
        TransitionMatrix {
            dim: self.dim,
            rows,
        }
    }

    /// Debug dump as `row,col,prob` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,prob")?;
        for (r, row) in self.rows.iter().enumerate() {
            for (c, p) in row {
                writeln!(w, "{r},{c},{p}")?;
            }
        }
        Ok(())
    }
}

/// Build the one-step matrix for a trace and modulation.
///
/// From (i, j): mass 1 - P_e(h_j) moves to (i-1, j+1) and mass P_e(h_j)
/// stays at dof i in slot j+1. A success out of dof 1 absorbs (delivery),
/// and every transition out of the final slot absorbs (horizon). Only the
/// absorbing state self-loops.
pub fn build_matrix(
    trace: &ChannelTrace,
    phy: &PhyConfig,
    m: Modulation,
    space: &StateSpace,
) -> Result<TransitionMatrix> {
    if trace.len() < space.n_slots_j {
        return Err(Error::Dimension(format!(
            "trace has {} slots, horizon needs {}",
            trace.len(),
            space.n_slots_j
        )));
    }
    let j_max = space.n_slots_j;
    let absorbing = space.absorbing();
    let mut rows = vec![Vec::new(); space.dim()];
    for i in 1..=space.i_max {
        for j in 0..j_max {
            let pb = phy::bit_error_prob(trace.esn0_db[j], m);
            let pe = phy::erasure_prob(pb, phy.packet_bits);
            let success_to = if i == 1 || j + 1 == j_max {
                absorbing
            } else {
                space.index(i - 1, j + 1)
            };
            let fail_to = if j + 1 == j_max {
                absorbing
            } else {
                space.index(i, j + 1)
            };
            let row = &mut rows[space.index(i, j)];
            if success_to == fail_to {
                row.push((success_to, 1.0));
            } else {
                let (a, b) = if success_to < fail_to {
                    ((success_to, 1.0 - pe), (fail_to, pe))
                } else {
                    ((fail_to, pe), (success_to, 1.0 - pe))
                };
                for (to, p) in [a, b] {
                    if p > 0.0 {
                        row.push((to, p));
                    }
                }
            }
        }
    }
    rows[absorbing].push((absorbing, 1.0));
    Ok(TransitionMatrix {
        dim: space.dim(),
        rows,
    })
}

/// Exact n-th power by repeated sparse multiplication.
pub fn n_step(matrix: &TransitionMatrix, n: u32) -> TransitionMatrix {
    assert!(n >= 1, "n must be >= 1");
    let mut acc = matrix.clone();
    for _ in 1..n {
        acc = acc.multiply(matrix);
    }
    acc
}

/// Expected delivery times T(i, j) from the backward recursion, plus the
/// probability mass that ran past the horizon before absorbing.
#[derive(Debug, Clone)]
pub struct DelayTable {
    i_max: u32,
    horizon: usize,
    values: Vec<f64>,
    residual: Vec<f64>,
}

impl DelayTable {
    fn idx(&self, i: u32, j: usize) -> usize {
        debug_assert!(i <= self.i_max && j < self.horizon);
        i as usize * self.horizon + j
    }

    pub fn i_max(&self) -> u32 {
        self.i_max
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Expected seconds to deliver i dof starting at slot j. Zero for i = 0.
    pub fn expected_delay(&self, i: u32, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    /// Probability mass whose delivery fell past the horizon; contributes
    /// zero time to `expected_delay`.
    pub fn residual_mass(&self, i: u32, j: usize) -> f64 {
        self.residual[self.idx(i, j)]
    }

    /// True when the horizon cut off more than `threshold` of the mass.
    pub fn truncated(&self, i: u32, j: usize, threshold: f64) -> bool {
        self.residual_mass(i, j) > threshold
    }
}

/// Evaluate the delay recursion for a policy over a trace.
///
/// `t_p` is the duration of one packet at modulation `m`; batches sent at
/// another order scale it by their symbol count. Silent rounds advance one
/// slot of the trace's duration. States whose continuation falls past the
/// horizon contribute zero time and are tallied in the residual mass, so
/// callers pick a horizon large enough for the residual they can accept.
pub fn expected_delay(
    trace: &ChannelTrace,
    phy: &PhyConfig,
    m: Modulation,
    policy: &Policy,
    space: &StateSpace,
    t_p: f64,
    t_w: f64,
) -> Result<DelayTable> {
    if t_p.is_nan() || t_p <= 0.0 {
        return Err(Error::InvalidParameter("t_p must be > 0".into()));
    }
    if t_w.is_nan() || t_w < 0.0 {
        return Err(Error::InvalidParameter("t_w must be >= 0".into()));
    }
    if trace.len() < space.n_slots_j {
        return Err(Error::Dimension(format!(
            "trace has {} slots, horizon needs {}",
            trace.len(),
            space.n_slots_j
        )));
    }
    let view = ChannelView::new(trace, phy);
    let i_max = space.i_max;
    let horizon = space.n_slots_j;
    let base_symbols = phy::packet_symbols(phy.packet_bits, m) as f64;
    let t_p_for =
        |bm: Modulation| t_p * phy::packet_symbols(phy.packet_bits, bm) as f64 / base_symbols;
    // delta only matters for the self-tracing policy
    let delta_dim = if policy.kind == PolicyKind::Stancef {
        i_max as usize + 1
    } else {
        1
    };
    let cell = |i: u32, j: usize, d: usize| ((i as usize) * horizon + j) * delta_dim + d;
    let mut values = vec![0.0f64; (i_max as usize + 1) * horizon * delta_dim];
    let mut residual = vec![0.0f64; values.len()];

    for j in (0..horizon).rev() {
        for i in 1..=i_max {
            for d in 0..delta_dim {
                let state = PolicyState {
                    delta: d as u32,
                    trial_count: 0,
                };
                let (decision, next) = policy.decide_at(i, &view, j, &state);
                let next_d = (next.delta as usize).min(delta_dim - 1);
                let (t, r) = if decision.silent {
                    if j + 1 >= horizon {
                        (trace.slot_duration_s, 1.0)
                    } else {
                        (
                            trace.slot_duration_s + values[cell(i, j + 1, next_d)],
                            residual[cell(i, j + 1, next_d)],
                        )
                    }
                } else {
                    let n = decision.batch_size;
                    let bm = decision.modulation;
                    // landing distribution over remaining dof after the
                    // batch; index 0 collects delivery inside the batch
                    let mut dist = vec![0.0f64; i as usize + 1];
                    dist[i as usize] = 1.0;
                    for k in 0..n {
                        let pe = view.pe(bm, j + k as usize);
                        for l in 1..=i as usize {
                            let p = dist[l];
                            if p == 0.0 {
                                continue;
                            }
                            dist[l] = p * pe;
                            dist[l - 1] += p * (1.0 - pe);
                        }
                    }
                    let t_d = n as f64 * t_p_for(bm) + t_w;
                    let cont = j + n as usize + 1; // +1 for the ACK slot
                    let mut t = t_d;
                    let mut r = 0.0;
                    for l in 1..=i {
                        let p = dist[l as usize];
                        if p == 0.0 {
                            continue;
                        }
                        if cont >= horizon {
                            r += p;
                        } else {
                            t += p * values[cell(l, cont, next_d)];
                            r += p * residual[cell(l, cont, next_d)];
                        }
                    }
                    (t, r)
                };
                values[cell(i, j, d)] = t;
                residual[cell(i, j, d)] = r;
            }
        }
    }

    // keep the delta = 0 slice: every delivery starts with no carry
    let mut out_values = vec![0.0f64; (i_max as usize + 1) * horizon];
    let mut out_residual = vec![0.0f64; out_values.len()];
    for i in 1..=i_max {
        for j in 0..horizon {
            out_values[i as usize * horizon + j] = values[cell(i, j, 0)];
            out_residual[i as usize * horizon + j] = residual[cell(i, j, 0)];
        }
    }
    Ok(DelayTable {
        i_max,
        horizon,
        values: out_values,
        residual: out_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::PolicyConfig;
    use proptest::prelude::*;

    const LOSSLESS_DB: f64 = 40.0; // P_e is exactly 0 in f64 here
    const BLOCKED_DB: f64 = -40.0; // P_e is exactly 1 in f64 here

    fn phy() -> PhyConfig {
        PhyConfig::default()
    }

    fn nc() -> Policy {
        Policy::new(PolicyKind::Nc, PolicyConfig::default())
    }

    #[test]
    fn erasure_extremes_are_exact() {
        let p = phy();
        let pe0 = phy::erasure_prob(
            phy::bit_error_prob(LOSSLESS_DB, Modulation::Bpsk),
            p.packet_bits,
        );
        assert_eq!(pe0, 0.0);
        let pe1 = phy::erasure_prob(
            phy::bit_error_prob(BLOCKED_DB, Modulation::Bpsk),
            p.packet_bits,
        );
        assert_eq!(pe1, 1.0);
    }

    #[test]
    fn state_space_dimension_is_401_for_defaults() {
        let space = StateSpace::default();
        assert_eq!(space.dim(), 401);
        assert_eq!(space.i_max(), 4);
        assert_eq!(space.n_slots_j(), 100);
        // bijection
        for idx in 0..space.absorbing() {
            let (i, j) = space.state_at(idx).unwrap();
            assert_eq!(space.index(i, j), idx);
        }
        assert!(space.state_at(space.absorbing()).is_none());
    }

    #[test]
    fn lossless_single_dof_chain_absorbs_immediately() {
        let space = StateSpace::new(1, 2).unwrap();
        let tr = ChannelTrace::constant(LOSSLESS_DB, 2, 1e-3);
        let m = build_matrix(&tr, &phy(), Modulation::Bpsk, &space).unwrap();
        assert_eq!(m.prob(space.index(1, 0), space.absorbing()), 1.0);
        assert!(m.max_row_sum_error() < 1e-12);
    }

    #[test]
    fn total_erasure_never_decrements_dof() {
        let space = StateSpace::new(3, 5).unwrap();
        let tr = ChannelTrace::constant(BLOCKED_DB, 5, 1e-3);
        let m = build_matrix(&tr, &phy(), Modulation::Bpsk, &space).unwrap();
        for i in 1..=3 {
            for j in 0..4 {
                assert_eq!(m.prob(space.index(i, j), space.index(i, j + 1)), 1.0);
            }
        }
    }

    #[test]
    fn trace_shorter_than_horizon_is_a_dimension_error() {
        let space = StateSpace::new(2, 10).unwrap();
        let tr = ChannelTrace::constant(0.0, 5, 1e-3);
        assert!(matches!(
            build_matrix(&tr, &phy(), Modulation::Bpsk, &space),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn one_step_power_is_identity_power() {
        let space = StateSpace::new(2, 3).unwrap();
        let tr = ChannelTrace::constant(8.0, 3, 1e-3);
        let m = build_matrix(&tr, &phy(), Modulation::Bpsk, &space).unwrap();
        assert_eq!(n_step(&m, 1), m);
    }

    #[test]
    fn two_step_power_on_lossless_7x7_chain() {
        // i_max = 2, J = 3: dimension 7; from (2,0) two lossless steps
        // reach absorption with probability one
        let space = StateSpace::new(2, 3).unwrap();
        assert_eq!(space.dim(), 7);
        let tr = ChannelTrace::constant(LOSSLESS_DB, 3, 1e-3);
        let m = build_matrix(&tr, &phy(), Modulation::Bpsk, &space).unwrap();
        let m2 = n_step(&m, 2);
        assert_eq!(m2.prob(space.index(2, 0), space.absorbing()), 1.0);
        // hand product: (2,0) -> (1,1) -> absorbing
        assert_eq!(m.prob(space.index(2, 0), space.index(1, 1)), 1.0);
        assert_eq!(m.prob(space.index(1, 1), space.absorbing()), 1.0);
    }

    #[test]
    fn powers_stay_row_stochastic() {
        let space = StateSpace::new(4, 30).unwrap();
        let tr = ChannelTrace::constant(7.5, 30, 1e-3);
        let m = build_matrix(&tr, &phy(), Modulation::Bpsk, &space).unwrap();
        for n in [1, 2, 4, 8, 16] {
            let p = n_step(&m, n);
            assert!(p.max_row_sum_error() < 1e-9, "n = {n}");
        }
    }

    proptest! {
        // row sums of P^n stay 1 within 1e-9 on random valid chains
        #[test]
        fn random_chain_powers_row_stochastic(
            esn0 in proptest::collection::vec(-10.0f64..=20.0, 12),
            n in 1u32..=16,
        ) {
            let tr = ChannelTrace::new(esn0, vec![0; 12], 1e-3).unwrap();
            let space = StateSpace::new(3, 12).unwrap();
            let m = build_matrix(&tr, &phy(), Modulation::Bpsk, &space).unwrap();
            let p = n_step(&m, n);
            prop_assert!(p.max_row_sum_error() < 1e-9);
        }
    }

    #[test]
    fn landing_distribution_matches_matrix_power() {
        // the recursion's in-batch stepping must agree with P^n entries on
        // interior states
        let space = StateSpace::new(4, 40).unwrap();
        let tr = ChannelTrace::constant(8.2, 40, 1e-3);
        let p = phy();
        let m = build_matrix(&tr, &p, Modulation::Bpsk, &space).unwrap();
        let view = ChannelView::new(&tr, &p);
        let n = 4u32;
        let pn = n_step(&m, n);
        let (i, j) = (4u32, 3usize);
        let mut dist = [0.0f64; 5];
        dist[4] = 1.0;
        for k in 0..n {
            let pe = view.pe(Modulation::Bpsk, j + k as usize);
            for l in 1..=4usize {
                let q = dist[l];
                dist[l] = q * pe;
                dist[l - 1] += q * (1.0 - pe);
            }
        }
        for l in 1..=4u32 {
            let got = pn.prob(space.index(i, j), space.index(l, j + n as usize));
            assert!(
                (got - dist[l as usize]).abs() < 1e-12,
                "l={l}: {got} vs {}",
                dist[l as usize]
            );
        }
        assert!((pn.prob(space.index(i, j), space.absorbing()) - dist[0]).abs() < 1e-12);
    }

    #[test]
    fn lossless_single_packet_delay_is_exact() {
        let t_p = 1e-3;
        let t_w = 0.2388;
        let tr = ChannelTrace::constant(LOSSLESS_DB, 20, 1e-3);
        let space = StateSpace::new(1, 20).unwrap();
        let table = expected_delay(&tr, &phy(), Modulation::Bpsk, &nc(), &space, t_p, t_w).unwrap();
        assert_eq!(table.expected_delay(1, 0), t_p + t_w);
        assert_eq!(table.expected_delay(1, 0), 0.2398);
        assert_eq!(table.residual_mass(1, 0), 0.0);
        assert_eq!(table.expected_delay(0, 5), 0.0);
    }

    #[test]
    fn geometric_retransmission_delay() {
        // i = 1 at constant P_e = 0.5 with N = 1 per round: the delay is
        // the geometric series sum_k 0.5^k (k+1) (t_p + t_w) = 2 (t_p+t_w)
        let pb = 0.0006929070095; // erasure 0.5 at B = 1000
        let esn0 = {
            // invert Q(sqrt(2 gamma)) = pb
            let mut lo = 0.0f64;
            let mut hi = 20.0f64;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if phy::bit_error_prob(mid, Modulation::Bpsk) > pb {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let p = phy();
        let pe = phy::erasure_prob(phy::bit_error_prob(esn0, Modulation::Bpsk), p.packet_bits);
        assert!((pe - 0.5).abs() < 1e-9, "pe = {pe}");
        let t_p = 1e-3;
        let t_w = 0.2388;
        let tr = ChannelTrace::constant(esn0, 60, 1e-3);
        let space = StateSpace::new(1, 60).unwrap();
        let table = expected_delay(&tr, &p, Modulation::Bpsk, &nc(), &space, t_p, t_w).unwrap();
        let expect = 2.0 * (t_p + t_w);
        let got = table.expected_delay(1, 0);
        assert!(
            (got - expect).abs() / expect < 0.05,
            "got {got}, expect {expect}"
        );
    }

    #[test]
    fn delay_monotone_in_dof() {
        let pb = 0.000356611343; // erasure 0.3 at B = 1000
        let esn0 = {
            let mut lo = 0.0f64;
            let mut hi = 20.0f64;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if phy::bit_error_prob(mid, Modulation::Bpsk) > pb {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let tr = ChannelTrace::constant(esn0, 200, 1e-3);
        let space = StateSpace::new(4, 200).unwrap();
        let table =
            expected_delay(&tr, &phy(), Modulation::Bpsk, &nc(), &space, 1e-3, 0.2388).unwrap();
        for j in [0usize, 10, 50] {
            for i in 1..4u32 {
                assert!(
                    table.expected_delay(i + 1, j) >= table.expected_delay(i, j),
                    "i={i} j={j}"
                );
            }
        }
    }

    #[test]
    fn analytic_matches_monte_carlo_means() {
        // constant erasures, dof 3, uncapped retransmissions: the
        // recursion must sit within 3 standard errors of 1e5 runs
        use crate::sim::{run_sweep, ChannelSpec, SimConfig};
        let p = phy();
        for pe_target in [0.1, 0.3, 0.5] {
            let esn0 = {
                let mut lo = 0.0f64;
                let mut hi = 20.0f64;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let pe = phy::erasure_prob(
                        phy::bit_error_prob(mid, Modulation::Bpsk),
                        p.packet_bits,
                    );
                    if pe > pe_target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let mut sim = SimConfig::with_policy(PolicyKind::Nc);
            sim.dof_target = 3;
            sim.policy.cfg.max_trials = 1_000_000;
            sim.n_runs = 100_000;
            sim.max_slots = 800;
            sim.seed = 424_242;
            let trace = ChannelTrace::constant(esn0, 800 + sim.trace_margin(), 1e-3);
            let space = StateSpace::new(3, 800).unwrap();
            let table = expected_delay(
                &trace,
                &p,
                Modulation::Bpsk,
                &sim.policy,
                &space,
                1e-3,
                0.2388,
            )
            .unwrap();
            let analytic = table.expected_delay(3, 0);
            let channel = ChannelSpec::Constant {
                slot_duration_s: 1e-3,
            };
            let mc = &run_sweep(&sim, &[esn0], &channel).unwrap()[0];
            assert!(
                (mc.avg_delay_s - analytic).abs() <= 3.0 * mc.se_delay_s + 1e-9,
                "pe={pe_target}: {} vs {analytic} (se {})",
                mc.avg_delay_s,
                mc.se_delay_s
            );
        }
    }

    #[test]
    fn blocked_channel_truncates() {
        let tr = ChannelTrace::constant(BLOCKED_DB, 50, 1e-3);
        let space = StateSpace::new(2, 50).unwrap();
        let table =
            expected_delay(&tr, &phy(), Modulation::Bpsk, &nc(), &space, 1e-3, 0.2388).unwrap();
        assert!(table.truncated(2, 0, 1e-6));
        assert!((table.residual_mass(2, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn silent_policy_walks_the_horizon() {
        let cfg = PolicyConfig::default();
        let pol = Policy::new(PolicyKind::Ancef, cfg);
        let tr = ChannelTrace::constant(BLOCKED_DB, 30, 1e-3);
        let space = StateSpace::new(2, 30).unwrap();
        let table =
            expected_delay(&tr, &phy(), Modulation::Bpsk, &pol, &space, 1e-3, 0.2388).unwrap();
        // every slot is silent: 30 slots of slot_duration, all mass residual
        let got = table.expected_delay(2, 0);
        assert!((got - 30.0 * 1e-3).abs() < 1e-12, "got {got}");
        assert!(table.truncated(2, 0, 1e-6));
    }

    #[test]
    fn matrix_csv_dump_shape() {
        let space = StateSpace::new(1, 2).unwrap();
        let tr = ChannelTrace::constant(8.0, 2, 1e-3);
        let m = build_matrix(&tr, &phy(), Modulation::Bpsk, &space).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("row,col,prob"));
        assert!(text.ends_with('\n'));
        assert!(text.lines().count() >= 4);
    }
}
