//! Per-RE baseband for one slot: Gray QAM mapping, superposition precoding,
//! flat-channel reception, scalar zero-forcing and hard-decision demapping,
//! and the block-error rule standing in for LDPC decoding.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{add_awgn, apply_channel, ChannelVector, NoiseSpec};
use crate::codebook::get_precoder;
use crate::mcs::{sinr_threshold_db, McsEntry};
use crate::scheduler::{Allocation, Mode};
use crate::{domain, Result, UeId};

/// Effective gains below this are treated as a lost link.
pub const MIN_EFFECTIVE_GAIN: f64 = 1e-9;

/// Default fraction of the code's redundancy usable for error correction.
pub const DEFAULT_EPSILON: f64 = 0.5;

/// Square Gray-mapped QAM with unit average energy, bit order as in 38.211:
/// even-numbered bits drive the in-phase axis, odd-numbered bits quadrature.
#[derive(Debug)]
pub struct Constellation {
    qm: u8,
    points: Vec<Complex64>,
    /// Amplitude normalization (`√2`, `√10`, `√42`).
    scale: f64,
    /// Axis level index (lowest amplitude first) → symbol bits on that axis,
    /// already spread to their positions in the symbol index.
    i_bits: Vec<usize>,
    q_bits: Vec<usize>,
}

/// PAM amplitude (odd integer) for the bits of one axis, MSB first.
fn pam_level(bits: &[u8]) -> i32 {
    fn magnitude(bits: &[u8]) -> i32 {
        match bits.split_first() {
            None => 1,
            Some((&b, rest)) => (1 << bits.len()) - (1 - 2 * b as i32) * magnitude(rest),
        }
    }
    (1 - 2 * bits[0] as i32) * magnitude(&bits[1..])
}

impl Constellation {
    fn build(qm: u8) -> Self {
        let per_axis = (qm / 2) as usize;
        let levels = 1usize << per_axis;
        let scale = (2.0 * ((levels * levels) as f64 - 1.0) / 3.0).sqrt();
        let bit = |idx: usize, i: usize| ((idx >> (qm as usize - 1 - i)) & 1) as u8;
        let mut points = Vec::with_capacity(1 << qm);
        let mut i_bits = vec![0; levels];
        let mut q_bits = vec![0; levels];
        for idx in 0..1usize << qm {
            let ib: Vec<u8> = (0..per_axis).map(|k| bit(idx, 2 * k)).collect();
            let qb: Vec<u8> = (0..per_axis).map(|k| bit(idx, 2 * k + 1)).collect();
            let (li, lq) = (pam_level(&ib), pam_level(&qb));
            points.push(Complex64::new(li as f64, lq as f64) / scale);
            let i_mask = (0..per_axis).fold(0, |m, k| m | (1 << (qm as usize - 1 - 2 * k)));
            let slot = |l: i32| ((l + levels as i32 - 1) / 2) as usize;
            i_bits[slot(li)] = idx & i_mask;
            q_bits[slot(lq)] = idx & !i_mask;
        }
        Self {
            qm,
            points,
            scale,
            i_bits,
            q_bits,
        }
    }

    pub fn qm(&self) -> u8 {
        self.qm
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    #[inline]
    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Index of the nearest constellation point.
    #[inline]
    pub fn slice(&self, x: Complex64) -> usize {
        let levels = self.i_bits.len();
        let top = (levels - 1) as f64;
        let axis = |v: f64| ((v * self.scale + top) / 2.0).round().clamp(0.0, top) as usize;
        self.i_bits[axis(x.re)] | self.q_bits[axis(x.im)]
    }
}

/// The shared constellation for modulation order 2, 4 or 6.
pub fn constellation(qm: u8) -> Result<&'static Constellation> {
    static TABLES: [OnceLock<Constellation>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let slot = match qm {
        2 => 0,
        4 => 1,
        6 => 2,
        _ => return Err(domain(format!("unsupported modulation order {qm}"))),
    };
    Ok(TABLES[slot].get_or_init(|| Constellation::build(qm)))
}

fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
}

fn index_to_bits(index: usize, qm: u8, out: &mut Vec<u8>) {
    out.extend((0..qm).rev().map(|k| ((index >> k) & 1) as u8));
}

/// Maps bits (one per byte, 0 or 1) to unit-energy Gray QAM symbols.
pub fn modulate(bits: &[u8], qm: u8) -> Result<Vec<Complex64>> {
    let c = constellation(qm)?;
    if !bits.len().is_multiple_of(qm as usize) {
        return Err(domain(format!(
            "{} bits do not fill a whole number of {qm}-bit symbols",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(qm as usize)
        .map(|chunk| c.point(bits_to_index(chunk)))
        .collect())
}

/// Hard-decision demapping back to bits.
pub fn demodulate_hard(symbols: &[Complex64], qm: u8) -> Result<Vec<u8>> {
    let c = constellation(qm)?;
    let mut bits = Vec::with_capacity(symbols.len() * qm as usize);
    for &x in symbols {
        index_to_bits(c.slice(x), qm, &mut bits);
    }
    Ok(bits)
}

/// Per-UE transmit weights `α·w` in grant order.
pub fn tx_weights(alloc: &Allocation) -> Result<Vec<[Complex64; 2]>> {
    alloc
        .grants
        .iter()
        .map(|g| {
            let w = get_precoder(g.pmi)?.entries();
            Ok([w[0] * g.alpha, w[1] * g.alpha])
        })
        .collect()
}

#[inline]
fn superpose(weights: &[[Complex64; 2]], symbols: &[Complex64]) -> [Complex64; 2] {
    let mut s = [Complex64::new(0.0, 0.0); 2];
    for (w, &x) in weights.iter().zip(symbols) {
        s[0] += w[0] * x;
        s[1] += w[1] * x;
    }
    s
}

/// Transmit sample `α₁w₁x₁ + α₂w₂x₂` (MU-MIMO) or `α·w·x` (single user).
pub fn precode_superpose(x1: Complex64, x2: Option<Complex64>, alloc: &Allocation) -> Result<[Complex64; 2]> {
    let weights = tx_weights(alloc)?;
    match (alloc.mode, x2) {
        (Mode::SingleUser, None) => Ok(superpose(&weights, &[x1])),
        (Mode::MuMimo, Some(x2)) => Ok(superpose(&weights, &[x1, x2])),
        (Mode::SingleUser, Some(_)) => Err(domain("second UE symbol given for a single-user allocation")),
        (Mode::MuMimo, None) => Err(domain("MU-MIMO allocation needs a symbol for each UE")),
    }
}

/// Received sample `h·s + n`.
#[inline]
pub fn receive<R: Rng + ?Sized>(h: &ChannelVector, s: &[Complex64; 2], noise: &NoiseSpec, rng: &mut R) -> Complex64 {
    add_awgn(apply_channel(h, s), noise, rng)
}

/// What UE `ue_index` of an allocation sees after precoding: its own scalar
/// gain `α·h·w` and the power leaking in from the co-scheduled stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveLink {
    pub gain: Complex64,
    pub interference_power: f64,
    pub noise_variance: f64,
}

impl EffectiveLink {
    pub fn new(h: &ChannelVector, alloc: &Allocation, ue_index: usize, noise: &NoiseSpec) -> Result<Self> {
        let weights = tx_weights(alloc)?;
        if ue_index >= weights.len() {
            return Err(domain(format!("allocation has no UE at position {ue_index}")));
        }
        let gain = h.dot(&weights[ue_index]);
        let interference_power = weights
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != ue_index)
            .map(|(_, w)| h.dot(w).norm_sqr())
            .sum();
        Ok(Self {
            gain,
            interference_power,
            noise_variance: noise.variance,
        })
    }

    pub fn usable(&self) -> bool {
        self.gain.norm() >= MIN_EFFECTIVE_GAIN
    }

    /// Post-equalization SINR for unit-energy symbols (linear).
    pub fn sinr(&self) -> f64 {
        let signal = self.gain.norm_sqr();
        let impairment = self.noise_variance + self.interference_power;
        if impairment == 0.0 {
            f64::INFINITY
        } else {
            signal / impairment
        }
    }

    pub fn sinr_db(&self) -> f64 {
        10.0 * self.sinr().log10()
    }
}

/// Hard decisions for one received RE.
#[derive(Debug, Clone, PartialEq)]
pub enum Demapped {
    Bits {
        bits: Vec<u8>,
        post_sinr_db: f64,
    },
    /// The effective channel vanished; every bit of the block counts as wrong.
    Failure,
}

/// Zero-forcing equalization `y/g` followed by nearest-point demapping.
pub fn equalize_demap(
    y: Complex64,
    h: &ChannelVector,
    alloc: &Allocation,
    ue_index: usize,
    noise: &NoiseSpec,
    qm: u8,
) -> Result<Demapped> {
    let link = EffectiveLink::new(h, alloc, ue_index, noise)?;
    if !link.usable() {
        return Ok(Demapped::Failure);
    }
    let c = constellation(qm)?;
    let mut bits = Vec::with_capacity(qm as usize);
    index_to_bits(c.slice(y / link.gain), qm, &mut bits);
    Ok(Demapped::Bits {
        bits,
        post_sinr_db: link.sinr_db(),
    })
}

/// Bounded-distance block decision: the block fails when raw bit errors exceed
/// `⌊ε·(1 − R)·total_bits⌋`.
pub fn decide_block_error(bit_errors: u64, total_bits: u64, mcs: &McsEntry, epsilon: f64) -> bool {
    bit_errors > error_budget(total_bits, mcs, epsilon)
}

pub fn error_budget(total_bits: u64, mcs: &McsEntry, epsilon: f64) -> u64 {
    (epsilon * (1.0 - mcs.code_rate()) * total_bits as f64).floor() as u64
}

/// How a transport block's success is decided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkModel {
    /// Raw bit-error count against the code's correction budget.
    BitBudget { epsilon: f64 },
    /// Post-equalization SINR against the Shannon-inverse MCS threshold.
    Threshold { margin_db: f64 },
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel::BitBudget {
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Payload of one transport block, one bit per byte.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportBlock {
    pub ue_id: UeId,
    pub bits: Vec<u8>,
}

impl TransportBlock {
    pub fn random<R: Rng + ?Sized>(ue_id: UeId, tbs: u64, rng: &mut R) -> Self {
        let mut bits = Vec::with_capacity(tbs as usize);
        while bits.len() < tbs as usize {
            let word: u64 = rng.random();
            let take = (tbs as usize - bits.len()).min(64);
            bits.extend((0..take).map(|k| ((word >> k) & 1) as u8));
        }
        Self { ue_id, bits }
    }

    pub fn tbs(&self) -> u64 {
        self.bits.len() as u64
    }

    /// Symbol indices; the last symbol is zero-padded when `qm` does not divide the TBS.
    fn symbol_indices(&self, qm: u8) -> Vec<usize> {
        self.bits
            .chunks(qm as usize)
            .map(|chunk| bits_to_index(chunk) << (qm as usize - chunk.len()))
            .collect()
    }
}

/// Decode outcome for one transport block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkResult {
    pub ue_id: UeId,
    pub bit_errors: u64,
    pub total_bits: u64,
    pub block_error: bool,
    pub post_sinr_db: f64,
}

/// Channel and noise seen by one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeLink {
    pub h: ChannelVector,
    pub noise: NoiseSpec,
}

/// Sends one transport block per grant over the allocation's REs and decodes
/// each at its UE. `blocks`, `links` and `noise_rngs` follow grant order; all
/// blocks must have the same size (MU-MIMO UEs share TBS and MCS).
pub fn transmit_allocation<R: Rng>(
    alloc: &Allocation,
    blocks: &[&TransportBlock],
    links: &[UeLink],
    mcs: &McsEntry,
    model: LinkModel,
    noise_rngs: &mut [R],
) -> Result<Vec<LinkResult>> {
    let n = alloc.grants.len();
    if blocks.len() != n || links.len() != n || noise_rngs.len() != n {
        return Err(domain("one block, link and noise stream is needed per grant"));
    }
    let tbs = blocks[0].tbs();
    if blocks.iter().any(|b| b.tbs() != tbs) {
        return Err(domain("co-scheduled transport blocks differ in size"));
    }
    let c = constellation(mcs.qm)?;
    let qm = mcs.qm as usize;
    let weights = tx_weights(alloc)?;
    let tx: Vec<Vec<usize>> = blocks.iter().map(|b| b.symbol_indices(mcs.qm)).collect();
    let n_sym = tx[0].len();
    let pad = n_sym * qm - tbs as usize;

    let eff: Vec<EffectiveLink> = links
        .iter()
        .enumerate()
        .map(|(k, l)| EffectiveLink::new(&l.h, alloc, k, &l.noise))
        .collect::<Result<_>>()?;
    let mut errors = vec![0u64; n];
    let mut symbols = [Complex64::new(0.0, 0.0); 2];
    let full_mask = (1usize << qm) - 1;
    for re in 0..n_sym {
        for (k, idx) in tx.iter().enumerate() {
            symbols[k] = c.point(idx[re]);
        }
        let s = superpose(&weights, &symbols[..n]);
        let mask = if re + 1 == n_sym {
            full_mask & !((1 << pad) - 1)
        } else {
            full_mask
        };
        for k in 0..n {
            if !eff[k].usable() {
                continue;
            }
            let y = receive(&links[k].h, &s, &links[k].noise, &mut noise_rngs[k]);
            let decided = c.slice(y / eff[k].gain);
            errors[k] += ((decided ^ tx[k][re]) & mask).count_ones() as u64;
        }
    }

    Ok((0..n)
        .map(|k| {
            let bit_errors = if eff[k].usable() { errors[k] } else { tbs };
            let post_sinr_db = eff[k].sinr_db();
            let block_error = !eff[k].usable()
                || match model {
                    LinkModel::BitBudget { epsilon } => decide_block_error(bit_errors, tbs, mcs, epsilon),
                    LinkModel::Threshold { margin_db } => post_sinr_db < sinr_threshold_db(mcs, margin_db),
                };
            LinkResult {
                ue_id: blocks[k].ue_id,
                bit_errors,
                total_bits: tbs,
                block_error,
                post_sinr_db,
            }
        })
        .collect())
}
