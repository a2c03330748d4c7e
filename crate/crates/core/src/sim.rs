//! Monte-Carlo experiment engine.
//!
//! A grid point `(snr, mcs)` runs one scheduler instance over consecutive
//! slots: CSI reports at the start of every drop, then per slot scheduling,
//! transport block transmission, block decisions and HARQ feedback, until
//! every UE has attempted `tb_per_point` transport blocks. Throughput counts
//! acknowledged bits over elapsed downlink slots.

use rayon::prelude::*;

use crate::channel::{ideal_channels, noise_from_snr, sample_rayleigh, ChannelVector};
use crate::csi::{build_report, estimate_channel, generate_csirs, post_precoding_sinr, receive_pilots};
use crate::mcs::{compute_tbs, mcs_lookup, TbsParams, DEFAULT_DATA_RE_PER_RB, MAX_MCS, RE_PER_RB_SLOT};
use crate::phy::{transmit_allocation, LinkModel, TransportBlock, UeLink, DEFAULT_EPSILON};
use crate::rng::{self, point_seed, Purpose, SimRng};
use crate::scheduler::{Mode, Scheduler, SchedulerConfig, SchedulerMode, UeSchedState, DEFAULT_MAX_HARQ_ATTEMPTS};
use crate::{domain, Result, UeId};

/// How the UE channels are produced for each drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelMode {
    /// `h₁ = [1, j]`, `h₂ = [1, −j]`.
    Ideal,
    /// Fresh i.i.d. Rayleigh channels every drop.
    Rayleigh,
    /// Fixed user-supplied channels for UE 1 and UE 2.
    Forced(ChannelVector, ChannelVector),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkModelKind {
    /// Bounded-distance bit-error budget.
    Bdd,
    Threshold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub num_rb: u32,
    pub scs_khz: u32,
    pub channel_mode: ChannelMode,
    pub snr_grid_db: Vec<f64>,
    pub mcs_list: Vec<u8>,
    pub scheduler_mode: SchedulerMode,
    /// Transport blocks attempted per UE at each grid point.
    pub tb_per_point: u32,
    pub seed: u64,
    pub link_model: LinkModelKind,
    pub epsilon: f64,
    pub threshold_margin_db: f64,
    pub data_re_per_rb: u32,
    /// Slots between channel redraws and CSI reports.
    pub slots_per_drop: u32,
    pub csirs_length: usize,
    pub max_harq_attempts: u8,
    /// Worker threads for the sweep; 0 lets rayon decide.
    pub threads: usize,
}

/// `lo, lo + step, …` up to `hi` inclusive (with a little slack for round-off).
pub fn snr_range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            num_rb: 106,
            scs_khz: 30,
            channel_mode: ChannelMode::Ideal,
            snr_grid_db: snr_range(0.0, 40.0, 2.0),
            mcs_list: (10..=MAX_MCS).collect(),
            scheduler_mode: SchedulerMode::MuMimoEnabled,
            tb_per_point: 100,
            seed: 1,
            link_model: LinkModelKind::Bdd,
            epsilon: DEFAULT_EPSILON,
            threshold_margin_db: 0.0,
            data_re_per_rb: DEFAULT_DATA_RE_PER_RB,
            slots_per_drop: 100,
            csirs_length: 32,
            max_harq_attempts: DEFAULT_MAX_HARQ_ATTEMPTS,
            threads: 0,
        }
    }
}

impl SimConfig {
    /// Slot length for the numerology: `1 ms / 2^μ` with `SCS = 15·2^μ kHz`.
    pub fn slot_duration_s(&self) -> f64 {
        1e-3 * 15.0 / self.scs_khz as f64
    }

    pub fn link(&self) -> LinkModel {
        match self.link_model {
            LinkModelKind::Bdd => LinkModel::BitBudget { epsilon: self.epsilon },
            LinkModelKind::Threshold => LinkModel::Threshold {
                margin_db: self.threshold_margin_db,
            },
        }
    }

    pub fn ue_ids(&self) -> Vec<UeId> {
        match self.scheduler_mode {
            SchedulerMode::SingleUserOnly => vec![1],
            _ => vec![1, 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.scs_khz, 15 | 30 | 60 | 120) {
            return Err(domain(format!("subcarrier spacing {} kHz is not 15·2^μ", self.scs_khz)));
        }
        if !(1..=275).contains(&self.num_rb) {
            return Err(domain(format!("num_rb {} outside 1..=275", self.num_rb)));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(domain("SNR grid must be non-empty and finite"));
        }
        if self.mcs_list.is_empty() {
            return Err(domain("MCS list is empty"));
        }
        for &m in &self.mcs_list {
            mcs_lookup(m)?;
        }
        if self.tb_per_point == 0 {
            return Err(domain("tb_per_point must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(domain(format!("epsilon {} outside (0, 1]", self.epsilon)));
        }
        if !self.threshold_margin_db.is_finite() {
            return Err(domain("threshold margin must be finite"));
        }
        if self.data_re_per_rb == 0 || self.data_re_per_rb > RE_PER_RB_SLOT {
            return Err(domain(format!(
                "data_re_per_rb {} outside 1..={RE_PER_RB_SLOT}",
                self.data_re_per_rb
            )));
        }
        if self.slots_per_drop == 0 {
            return Err(domain("slots_per_drop must be at least 1"));
        }
        if self.csirs_length < 2 {
            return Err(domain("CSI-RS needs at least one pilot per antenna port"));
        }
        if self.max_harq_attempts == 0 {
            return Err(domain("max_harq_attempts must be at least 1"));
        }
        if let ChannelMode::Forced(h1, h2) = &self.channel_mode {
            if !h1.is_finite() || !h2.is_finite() {
                return Err(domain("forced channels must be finite"));
            }
        }
        Ok(())
    }
}

/// Counters for one UE at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UeMetrics {
    pub ue_id: UeId,
    pub blocks_attempted: u64,
    pub block_errors: u64,
    pub bits_delivered: u64,
    pub bit_errors: u64,
    pub bits_sent: u64,
}

impl UeMetrics {
    pub fn bler(&self) -> f64 {
        if self.blocks_attempted == 0 {
            0.0
        } else {
            self.block_errors as f64 / self.blocks_attempted as f64
        }
    }

    pub fn ber(&self) -> f64 {
        if self.bits_sent == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits_sent as f64
        }
    }
}

/// Results for one `(snr, mcs)` grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMetrics {
    pub snr_db: f64,
    pub mcs_index: u8,
    pub tbs: u64,
    pub ues: Vec<UeMetrics>,
    pub slots_elapsed: u64,
    pub rb_slots_used: u64,
    /// Slots that carried a MU-MIMO allocation.
    pub mu_slots: u64,
    pub slot_duration_s: f64,
}

impl PointMetrics {
    pub fn bits_delivered(&self) -> u64 {
        self.ues.iter().map(|u| u.bits_delivered).sum()
    }

    pub fn total_throughput_bps(&self) -> f64 {
        throughput_from_counters(self.bits_delivered(), self.slots_elapsed, self.slot_duration_s).unwrap_or(0.0)
    }

    pub fn ue_throughput_bps(&self, ue: &UeMetrics) -> f64 {
        throughput_from_counters(ue.bits_delivered, self.slots_elapsed, self.slot_duration_s).unwrap_or(0.0)
    }

    pub fn max_bler(&self) -> f64 {
        self.ues.iter().map(UeMetrics::bler).fold(0.0, f64::max)
    }

    pub fn avg_bler(&self) -> f64 {
        self.ues.iter().map(UeMetrics::bler).sum::<f64>() / self.ues.len() as f64
    }
}

/// A full sweep: points in SNR-major order over `snr_grid × mcs_list`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub mode: SchedulerMode,
    pub snr_grid_db: Vec<f64>,
    pub mcs_list: Vec<u8>,
    pub points: Vec<PointMetrics>,
}

impl RunMetrics {
    pub fn point(&self, snr_index: usize, mcs_pos: usize) -> &PointMetrics {
        &self.points[snr_index * self.mcs_list.len() + mcs_pos]
    }

    pub fn find(&self, snr_db: f64, mcs_index: u8) -> Option<&PointMetrics> {
        self.points
            .iter()
            .find(|p| p.mcs_index == mcs_index && (p.snr_db - snr_db).abs() < 1e-9)
    }

    /// Best total throughput per SNR among MCSs whose worst-UE BLER is below
    /// `bler_limit`; `None` where no MCS qualifies.
    pub fn achievable_envelope(&self, bler_limit: f64) -> Vec<(f64, Option<(u8, f64)>)> {
        self.snr_grid_db
            .iter()
            .enumerate()
            .map(|(si, &snr)| {
                let best = (0..self.mcs_list.len())
                    .map(|mi| self.point(si, mi))
                    .filter(|p| p.max_bler() < bler_limit)
                    .map(|p| (p.mcs_index, p.total_throughput_bps()))
                    .fold(None, |acc: Option<(u8, f64)>, cand| match acc {
                        Some(a) if a.1 >= cand.1 => Some(a),
                        _ => Some(cand),
                    });
                (snr, best)
            })
            .collect()
    }
}

/// `bits / (slots · slot_duration)`.
pub fn throughput_from_counters(bits_acked: u64, slots_elapsed: u64, slot_duration_s: f64) -> Result<f64> {
    if slots_elapsed == 0 {
        return Err(domain("throughput needs at least one elapsed slot"));
    }
    Ok(bits_acked as f64 / (slots_elapsed as f64 * slot_duration_s))
}

struct UeRuntime {
    id: UeId,
    link: UeLink,
    channel_rng: SimRng,
    noise_rng: SimRng,
    payload_rng: SimRng,
    attempts_left: u64,
    current_tb: Option<TransportBlock>,
}

fn drop_channels(cfg: &SimConfig, ues: &mut [UeRuntime]) {
    let (ideal1, ideal2) = ideal_channels();
    for ue in ues.iter_mut() {
        let h = match cfg.channel_mode {
            ChannelMode::Ideal => {
                if ue.id == 1 {
                    ideal1
                } else {
                    ideal2
                }
            }
            ChannelMode::Forced(h1, h2) => {
                if ue.id == 1 {
                    h1
                } else {
                    h2
                }
            }
            ChannelMode::Rayleigh => sample_rayleigh(&mut ue.channel_rng, ue.id),
        };
        ue.link.h = ChannelVector::new(ue.id, h.entries);
    }
}

/// Simulates one grid point. Deterministic in `(cfg, snr_db, mcs_index, seed)`.
pub fn run_point(cfg: &SimConfig, snr_db: f64, mcs_index: u8, seed: u64) -> Result<PointMetrics> {
    cfg.validate()?;
    let mcs = mcs_lookup(mcs_index)?;
    let tbs = compute_tbs(&TbsParams {
        num_rb: cfg.num_rb,
        data_re_per_rb: cfg.data_re_per_rb,
        mcs,
    })?;
    let model = cfg.link();

    let mut ues: Vec<UeRuntime> = cfg
        .ue_ids()
        .into_iter()
        .map(|id| UeRuntime {
            id,
            link: UeLink {
                h: ChannelVector::new(id, Default::default()),
                noise: crate::channel::NoiseSpec::noiseless(),
            },
            channel_rng: rng::stream(seed, Purpose::Channel, id),
            noise_rng: rng::stream(seed, Purpose::Noise, id),
            payload_rng: rng::stream(seed, Purpose::Payload, id),
            attempts_left: cfg.tb_per_point as u64,
            current_tb: None,
        })
        .collect();
    let mut metrics: Vec<UeMetrics> = ues
        .iter()
        .map(|u| UeMetrics {
            ue_id: u.id,
            ..Default::default()
        })
        .collect();

    let mut sched_cfg = SchedulerConfig::new(cfg.scheduler_mode, mcs_index);
    sched_cfg.max_harq_attempts = cfg.max_harq_attempts;
    let mut scheduler = Scheduler::new(sched_cfg);
    let mut states: Vec<UeSchedState> = Vec::with_capacity(ues.len());

    let buffered = |attempts_left: u64| attempts_left * tbs / 8;
    let mut out = PointMetrics {
        snr_db,
        mcs_index,
        tbs,
        ues: Vec::new(),
        slots_elapsed: 0,
        rb_slots_used: 0,
        mu_slots: 0,
        slot_duration_s: cfg.slot_duration_s(),
    };

    let mut drop_index = 0u64;
    'drops: loop {
        // CSI reporting at the start of each drop, before the first slot
        drop_channels(cfg, &mut ues);
        let pilots = generate_csirs(rng::mix_seed(&[seed, drop_index]), cfg.csirs_length)?;
        for (k, ue) in ues.iter_mut().enumerate() {
            ue.link.noise = noise_from_snr(snr_db, &ue.link.h)?;
            let rx = receive_pilots(&ue.link.h, &pilots, &ue.link.noise, &mut ue.noise_rng);
            let est = estimate_channel(&rx, &pilots, ue.id)?;
            let report = build_report(ue.id, &est, &ue.link.noise);
            let sinr = post_precoding_sinr(&est, report.pmi, &ue.link.noise);
            match states.get_mut(k) {
                Some(s) => {
                    s.last_report = report;
                    s.reported_sinr = sinr;
                }
                None => states.push(UeSchedState::new(report, sinr, buffered(ue.attempts_left))),
            }
        }
        drop_index += 1;

        for _ in 0..cfg.slots_per_drop {
            let allocs = scheduler.schedule_slot(&mut states, cfg.num_rb);
            if allocs.is_empty() {
                break 'drops;
            }
            let mut served = vec![false; ues.len()];
            for alloc in &allocs {
                let pos: Vec<usize> = alloc
                    .ue_ids()
                    .map(|id| ues.iter().position(|u| u.id == id).expect("scheduled UE exists"))
                    .collect();
                debug_assert!(pos.windows(2).all(|w| w[0] < w[1]));
                for &k in &pos {
                    let ue = &mut ues[k];
                    if ue.current_tb.is_none() {
                        ue.current_tb = Some(TransportBlock::random(ue.id, tbs, &mut ue.payload_rng));
                    }
                }
                let blocks: Vec<&TransportBlock> = pos.iter().map(|&k| ues[k].current_tb.as_ref().unwrap()).collect();
                let links: Vec<UeLink> = pos.iter().map(|&k| ues[k].link).collect();
                let mut noise_rngs = Vec::with_capacity(pos.len());
                // grant order is ascending UE position, so a filtered pass keeps it
                for (k, ue) in ues.iter().enumerate() {
                    if pos.contains(&k) {
                        noise_rngs.push(ue.noise_rng.clone());
                    }
                }
                let results = transmit_allocation(alloc, &blocks, &links, &mcs, model, &mut noise_rngs)?;
                for (&k, rng) in pos.iter().zip(noise_rngs) {
                    ues[k].noise_rng = rng;
                }

                for (&k, r) in pos.iter().zip(&results) {
                    let m = &mut metrics[k];
                    m.blocks_attempted += 1;
                    m.bits_sent += r.total_bits;
                    m.bit_errors += r.bit_errors;
                    if r.block_error {
                        m.block_errors += 1;
                    } else {
                        m.bits_delivered += r.total_bits;
                    }
                    let ue = &mut ues[k];
                    ue.attempts_left -= 1;
                    let state = &mut states[k];
                    scheduler.on_harq_feedback(state, !r.block_error, r.total_bits);
                    if !state.pending_retx {
                        ue.current_tb = None;
                    }
                    state.buffered_bytes = buffered(ue.attempts_left);
                    served[k] = true;
                }
                if alloc.mode == Mode::MuMimo {
                    out.mu_slots += 1;
                }
            }
            for (k, s) in states.iter_mut().enumerate() {
                if !served[k] {
                    scheduler.on_idle(s);
                }
            }
            out.slots_elapsed += 1;
            out.rb_slots_used += cfg.num_rb as u64;
        }
    }
    out.ues = metrics;
    Ok(out)
}

/// Runs every `(snr, mcs)` point of the grid; results are independent of the
/// worker count.
pub fn run_sweep(cfg: &SimConfig) -> Result<RunMetrics> {
    cfg.validate()?;
    let grid: Vec<(usize, usize)> = (0..cfg.snr_grid_db.len())
        .flat_map(|si| (0..cfg.mcs_list.len()).map(move |mi| (si, mi)))
        .collect();
    let work = || -> Result<Vec<PointMetrics>> {
        grid.par_iter()
            .map(|&(si, mi)| run_point(cfg, cfg.snr_grid_db[si], cfg.mcs_list[mi], point_seed(cfg.seed, si, mi)))
            .collect()
    };
    let points = if cfg.threads == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| domain(format!("cannot start worker pool: {e}")))?
            .install(work)?
    };
    Ok(RunMetrics {
        mode: cfg.scheduler_mode,
        snr_grid_db: cfg.snr_grid_db.clone(),
        mcs_list: cfg.mcs_list.clone(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: SchedulerMode) -> SimConfig {
        SimConfig {
            num_rb: 4,
            scheduler_mode: mode,
            tb_per_point: 50,
            ..Default::default()
        }
    }

    #[test]
    fn slot_duration_follows_numerology() {
        let mut cfg = SimConfig::default();
        assert_eq!(cfg.slot_duration_s(), 5e-4);
        cfg.scs_khz = 15;
        assert_eq!(cfg.slot_duration_s(), 1e-3);
        cfg.scs_khz = 120;
        assert_eq!(cfg.slot_duration_s(), 1.25e-4);
    }

    #[test]
    fn snr_range_inclusive() {
        assert_eq!(snr_range(0.0, 40.0, 2.0).len(), 21);
        assert_eq!(snr_range(0.0, 1.0, 0.1).len(), 11);
        assert_eq!(snr_range(5.0, 5.0, 1.0), vec![5.0]);
    }

    #[test]
    fn throughput_arithmetic() {
        assert_eq!(throughput_from_counters(1_000_000, 200, 5e-4).unwrap(), 1e7);
        assert_eq!(throughput_from_counters(0, 200, 5e-4).unwrap(), 0.0);
        let a = throughput_from_counters(5000, 100, 5e-4).unwrap();
        let b = throughput_from_counters(5000, 200, 5e-4).unwrap();
        assert_eq!(a, 2.0 * b);
        assert!(throughput_from_counters(1, 0, 5e-4).is_err());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let bad = [
            SimConfig {
                num_rb: 0,
                ..Default::default()
            },
            SimConfig {
                scs_khz: 20,
                ..Default::default()
            },
            SimConfig {
                mcs_list: vec![29],
                ..Default::default()
            },
            SimConfig {
                snr_grid_db: vec![],
                ..Default::default()
            },
            SimConfig {
                epsilon: 0.0,
                ..Default::default()
            },
            SimConfig {
                tb_per_point: 0,
                ..Default::default()
            },
            SimConfig {
                data_re_per_rb: 200,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(SimConfig::default().validate().is_ok());
    }

    #[test]
    fn high_snr_is_error_free_and_all_mu() {
        let cfg = small(SchedulerMode::MuMimoEnabled);
        for mcs in [10, 19, 28] {
            let p = run_point(&cfg, 60.0, mcs, 3).unwrap();
            assert_eq!(p.max_bler(), 0.0);
            assert_eq!(p.slots_elapsed, 50);
            assert_eq!(p.mu_slots, 50);
            assert_eq!(p.bits_delivered(), 2 * 50 * p.tbs);
            for u in &p.ues {
                assert_eq!(u.blocks_attempted, 50);
                assert_eq!(u.bit_errors, 0);
            }
        }
    }

    #[test]
    fn very_low_snr_fails_everything() {
        let cfg = small(SchedulerMode::MuMimoEnabled);
        let p = run_point(&cfg, -20.0, 28, 3).unwrap();
        assert_eq!(p.max_bler(), 1.0);
        assert_eq!(p.bits_delivered(), 0);
        // after the first NACK every slot is a single-user retransmission or new TB
        assert!(p.mu_slots < p.slots_elapsed);
    }

    #[test]
    fn run_point_is_deterministic() {
        let cfg = small(SchedulerMode::MuMimoEnabled);
        assert_eq!(
            run_point(&cfg, 8.0, 22, 9).unwrap(),
            run_point(&cfg, 8.0, 22, 9).unwrap()
        );
        let mut r = small(SchedulerMode::ProportionalFairOnly);
        r.channel_mode = ChannelMode::Rayleigh;
        r.slots_per_drop = 7;
        assert_eq!(run_point(&r, 8.0, 14, 9).unwrap(), run_point(&r, 8.0, 14, 9).unwrap());
    }

    #[test]
    fn pf_serves_each_ue_in_turn() {
        let cfg = small(SchedulerMode::ProportionalFairOnly);
        let p = run_point(&cfg, 50.0, 16, 1).unwrap();
        assert_eq!(p.slots_elapsed, 100);
        assert_eq!(p.mu_slots, 0);
        assert!(p.ues.iter().all(|u| u.blocks_attempted == 50 && u.block_errors == 0));
    }

    #[test]
    fn single_user_only_has_one_ue() {
        let cfg = small(SchedulerMode::SingleUserOnly);
        let p = run_point(&cfg, 50.0, 16, 1).unwrap();
        assert_eq!(p.ues.len(), 1);
        assert_eq!(p.slots_elapsed, 50);
    }

    #[test]
    fn sweep_points_match_standalone_runs() {
        let cfg = SimConfig {
            snr_grid_db: vec![5.0, 15.0],
            mcs_list: vec![12, 24],
            ..small(SchedulerMode::MuMimoEnabled)
        };
        let sweep = run_sweep(&cfg).unwrap();
        assert_eq!(sweep.points.len(), 4);
        for (si, &snr) in cfg.snr_grid_db.iter().enumerate() {
            for (mi, &mcs) in cfg.mcs_list.iter().enumerate() {
                let alone = run_point(&cfg, snr, mcs, point_seed(cfg.seed, si, mi)).unwrap();
                assert_eq!(sweep.point(si, mi), &alone);
            }
        }
    }

    #[test]
    fn non_orthogonal_forced_channels_fall_back_to_pf() {
        use num_complex::Complex64;
        let one = Complex64::new(1.0, 0.0);
        let cfg = SimConfig {
            channel_mode: ChannelMode::Forced(
                ChannelVector::new(1, [one, one]),
                ChannelVector::new(2, [one, Complex64::new(0.0, -1.0)]),
            ),
            ..small(SchedulerMode::MuMimoEnabled)
        };
        // PMIs 0 and 1 are not orthogonal
        let p = run_point(&cfg, 40.0, 10, 2).unwrap();
        assert_eq!(p.mu_slots, 0);
        assert_eq!(p.slots_elapsed, 100);
    }
}
