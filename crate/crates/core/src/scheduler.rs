//! Downlink slot scheduler: MU-MIMO pairing on orthogonal PMIs with equal
//! power split, proportional-fair whole-band single-user grants otherwise, and
//! HARQ bookkeeping that forces retransmissions back to single-user mode.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::codebook::is_orthogonal_pair;
use crate::csi::CsiReport;
use crate::{domain, Result, UeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SingleUser,
    MuMimo,
}

/// One UE's share of an allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grant {
    pub ue_id: UeId,
    pub pmi: u8,
    /// Amplitude power coefficient α.
    pub alpha: f64,
}

/// Scheduler output for one slot. All grants share the RB range and MCS.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub grants: Vec<Grant>,
    pub start_rb: u32,
    pub num_rb: u32,
    pub mcs_index: u8,
    pub mode: Mode,
}

impl Allocation {
    pub fn single_user(ue_id: UeId, pmi: u8, num_rb: u32, mcs_index: u8) -> Self {
        Self {
            grants: vec![Grant { ue_id, pmi, alpha: 1.0 }],
            start_rb: 0,
            num_rb,
            mcs_index,
            mode: Mode::SingleUser,
        }
    }

    /// Pairs two UEs on the same RBs with `α₁ = α₂ = √(1/2)`.
    pub fn mu_mimo(first: (UeId, u8), second: (UeId, u8), num_rb: u32, mcs_index: u8) -> Result<Self> {
        if !is_orthogonal_pair(first.1, second.1)? {
            return Err(domain(format!(
                "PMIs {} and {} are not an orthogonal pair",
                first.1, second.1
            )));
        }
        let grant = |(ue_id, pmi): (UeId, u8)| Grant {
            ue_id,
            pmi,
            alpha: FRAC_1_SQRT_2,
        };
        Ok(Self {
            grants: vec![grant(first), grant(second)],
            start_rb: 0,
            num_rb,
            mcs_index,
            mode: Mode::MuMimo,
        })
    }

    /// `Σ α²`, which must be 1.
    pub fn power_sum(&self) -> f64 {
        self.grants.iter().map(|g| g.alpha * g.alpha).sum()
    }

    pub fn ue_ids(&self) -> impl Iterator<Item = UeId> + '_ {
        self.grants.iter().map(|g| g.ue_id)
    }
}

/// Which transmission schemes the scheduler may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchedulerMode {
    /// Pair orthogonal-PMI UEs when possible, proportional fair otherwise.
    MuMimoEnabled,
    /// Proportional fair across all UEs, one UE per slot.
    ProportionalFairOnly,
    /// Reference single-user link: only the first UE is active.
    SingleUserOnly,
}

impl SchedulerMode {
    pub fn name(&self) -> &'static str {
        match self {
            SchedulerMode::MuMimoEnabled => "mumimo",
            SchedulerMode::ProportionalFairOnly => "pf",
            SchedulerMode::SingleUserOnly => "su",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "mumimo" => Some(SchedulerMode::MuMimoEnabled),
            "pf" => Some(SchedulerMode::ProportionalFairOnly),
            "su" => Some(SchedulerMode::SingleUserOnly),
            _ => None,
        }
    }
}

/// Per-UE scheduler state.
#[derive(Debug, Clone, PartialEq)]
pub struct UeSchedState {
    pub ue_id: UeId,
    /// Exponentially averaged delivered bits per slot, never below the floor.
    pub avg_rate: f64,
    pub pending_retx: bool,
    pub last_report: CsiReport,
    /// Single-user post-precoding SINR (linear) behind the last report.
    pub reported_sinr: f64,
    pub buffered_bytes: u64,
    /// Transmissions so far of the current transport block.
    pub harq_attempts: u8,
    pub last_served_slot: Option<u64>,
}

impl UeSchedState {
    pub fn new(report: CsiReport, reported_sinr: f64, buffered_bytes: u64) -> Self {
        Self {
            ue_id: report.ue_id,
            avg_rate: DEFAULT_RATE_FLOOR,
            pending_retx: false,
            last_report: report,
            reported_sinr,
            buffered_bytes,
            harq_attempts: 0,
            last_served_slot: None,
        }
    }

    pub fn has_data(&self) -> bool {
        self.buffered_bytes > 0
    }

    /// Achievable spectral efficiency from the reported SINR.
    pub fn instantaneous_rate(&self) -> f64 {
        (1.0 + self.reported_sinr).log2()
    }
}

pub const DEFAULT_PF_BETA: f64 = 0.05;
pub const DEFAULT_RATE_FLOOR: f64 = 1e-6;
pub const DEFAULT_MAX_HARQ_ATTEMPTS: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerConfig {
    pub mode: SchedulerMode,
    /// Fixed MCS applied to every grant.
    pub mcs_index: u8,
    pub pf_beta: f64,
    pub rate_floor: f64,
    /// Transmissions of one TB before it is discarded.
    pub max_harq_attempts: u8,
}

impl SchedulerConfig {
    pub fn new(mode: SchedulerMode, mcs_index: u8) -> Self {
        Self {
            mode,
            mcs_index,
            pf_beta: DEFAULT_PF_BETA,
            rate_floor: DEFAULT_RATE_FLOOR,
            max_harq_attempts: DEFAULT_MAX_HARQ_ATTEMPTS,
        }
    }
}

/// First pair of UEs (in `ue_id` order) with orthogonal PMIs, data queued and
/// no retransmission pending. The lower id comes first and becomes UE_1.
pub fn try_mu_pairing(states: &[UeSchedState]) -> Option<(UeId, UeId)> {
    let mut order: Vec<&UeSchedState> = states.iter().filter(|s| s.has_data() && !s.pending_retx).collect();
    order.sort_by_key(|s| s.ue_id);
    for (i, a) in order.iter().enumerate() {
        for b in &order[i + 1..] {
            if is_orthogonal_pair(a.last_report.pmi, b.last_report.pmi).unwrap_or(false) {
                return Some((a.ue_id, b.ue_id));
            }
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct Scheduler {
    cfg: SchedulerConfig,
    slot: u64,
}

impl Scheduler {
    pub fn new(cfg: SchedulerConfig) -> Self {
        Self { cfg, slot: 0 }
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.cfg
    }

    /// Slots scheduled so far.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    /// Grants for the next slot. Served UEs get their `last_served_slot` stamped.
    pub fn schedule_slot(&mut self, states: &mut [UeSchedState], total_rb: u32) -> Vec<Allocation> {
        let slot = self.slot;
        self.slot += 1;
        let allocs = match self.cfg.mode {
            SchedulerMode::MuMimoEnabled => match try_mu_pairing(states) {
                Some((a, b)) => {
                    let pmi = |id| {
                        states
                            .iter()
                            .find(|s| s.ue_id == id)
                            .map(|s| s.last_report.pmi)
                            .unwrap()
                    };
                    vec![
                        Allocation::mu_mimo((a, pmi(a)), (b, pmi(b)), total_rb, self.cfg.mcs_index)
                            .expect("pairing only returns orthogonal PMIs"),
                    ]
                }
                None => self.pf_schedule(states, total_rb),
            },
            SchedulerMode::ProportionalFairOnly | SchedulerMode::SingleUserOnly => self.pf_schedule(states, total_rb),
        };
        for alloc in &allocs {
            for id in alloc.ue_ids() {
                if let Some(s) = states.iter_mut().find(|s| s.ue_id == id) {
                    s.last_served_slot = Some(slot);
                }
            }
        }
        allocs
    }

    fn pf_metric(&self, s: &UeSchedState) -> f64 {
        s.instantaneous_rate() / s.avg_rate.max(self.cfg.rate_floor)
    }

    /// Whole-band grant to the UE with the highest rate-to-average ratio.
    /// Ties go to the least recently served UE, then the lowest id.
    pub fn pf_schedule(&self, states: &[UeSchedState], total_rb: u32) -> Vec<Allocation> {
        let mut best: Option<(&UeSchedState, f64)> = None;
        for s in states.iter().filter(|s| s.has_data()) {
            let m = self.pf_metric(s);
            best = match best {
                None => Some((s, m)),
                Some((b, bm)) => {
                    let tol = 1e-12 * bm.abs().max(m.abs());
                    let better = if (m - bm).abs() <= tol {
                        (s.last_served_slot, s.ue_id) < (b.last_served_slot, b.ue_id)
                    } else {
                        m > bm
                    };
                    Some(if better { (s, m) } else { (b, bm) })
                }
            };
        }
        best.map(|(s, _)| {
            vec![Allocation::single_user(
                s.ue_id,
                s.last_report.pmi,
                total_rb,
                self.cfg.mcs_index,
            )]
        })
        .unwrap_or_default()
    }

    fn update_average(&self, state: &mut UeSchedState, delivered_bits: f64) {
        let beta = self.cfg.pf_beta;
        state.avg_rate = ((1.0 - beta) * state.avg_rate + beta * delivered_bits).max(self.cfg.rate_floor);
    }

    /// HARQ ACK/NACK for a served UE. A NACK marks a retransmission pending
    /// unless the TB has used up its attempts, in which case it is dropped.
    pub fn on_harq_feedback(&self, state: &mut UeSchedState, ack: bool, tb_bits: u64) {
        self.update_average(state, if ack { tb_bits as f64 } else { 0.0 });
        if ack {
            state.pending_retx = false;
            state.harq_attempts = 0;
        } else {
            state.harq_attempts += 1;
            if state.harq_attempts >= self.cfg.max_harq_attempts {
                state.pending_retx = false;
                state.harq_attempts = 0;
            } else {
                state.pending_retx = true;
            }
        }
    }

    /// Average decay for a UE that was not served this slot.
    pub fn on_idle(&self, state: &mut UeSchedState) {
        self.update_average(state, 0.0);
    }
}
