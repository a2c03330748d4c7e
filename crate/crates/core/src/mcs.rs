//! MCS table 5.1.3.1-1 (64QAM) and transport block sizing.

use crate::{domain, Error, Result};

/// Resource elements per RB per slot (12 subcarriers × 14 symbols).
pub const RE_PER_RB_SLOT: u32 = 168;

/// Default data REs per RB: 168 minus 12 DMRS and 12 control REs.
pub const DEFAULT_DATA_RE_PER_RB: u32 = 144;

/// Highest index of the 64QAM MCS table.
pub const MAX_MCS: u8 = 28;

/// One row of the MCS table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McsEntry {
    pub index: u8,
    /// Modulation order (bits per symbol).
    pub qm: u8,
    /// Target code rate × 1024.
    pub code_rate_x1024: u16,
}

impl McsEntry {
    pub fn code_rate(&self) -> f64 {
        self.code_rate_x1024 as f64 / 1024.0
    }

    /// Information bits per modulated symbol, `Qm·R`.
    pub fn spectral_efficiency(&self) -> f64 {
        self.qm as f64 * self.code_rate()
    }
}

// (Qm, R×1024) for indices 0..=28.
const TABLE: [(u8, u16); 29] = [
    (2, 120),
    (2, 157),
    (2, 193),
    (2, 251),
    (2, 308),
    (2, 379),
    (2, 449),
    (2, 526),
    (2, 602),
    (2, 679),
    (4, 340),
    (4, 378),
    (4, 434),
    (4, 490),
    (4, 553),
    (4, 616),
    (4, 658),
    (6, 438),
    (6, 466),
    (6, 517),
    (6, 567),
    (6, 616),
    (6, 666),
    (6, 719),
    (6, 772),
    (6, 822),
    (6, 873),
    (6, 910),
    (6, 948),
];

pub fn mcs_lookup(index: u8) -> Result<McsEntry> {
    let &(qm, code_rate_x1024) = TABLE.get(index as usize).ok_or(Error::InvalidMcs(index))?;
    Ok(McsEntry {
        index,
        qm,
        code_rate_x1024,
    })
}

/// Inputs to the transport block size rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbsParams {
    pub num_rb: u32,
    pub data_re_per_rb: u32,
    pub mcs: McsEntry,
}

impl TbsParams {
    pub fn new(num_rb: u32, mcs: McsEntry) -> Self {
        Self {
            num_rb,
            data_re_per_rb: DEFAULT_DATA_RE_PER_RB,
            mcs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_rb == 0 {
            return Err(domain("TBS needs at least one RB"));
        }
        if self.data_re_per_rb == 0 || self.data_re_per_rb > RE_PER_RB_SLOT {
            return Err(domain(format!(
                "data REs per RB must be in 1..={RE_PER_RB_SLOT}, got {}",
                self.data_re_per_rb
            )));
        }
        Ok(())
    }
}

/// Linear TBS rule: `8·⌊N_RE·Qm·R / 8⌋` bits with `N_RE = num_rb·data_re_per_rb`.
///
/// This replaces the quantized N_info procedure of 38.214; only the number of
/// bits per RB matters for throughput accounting.
pub fn compute_tbs(p: &TbsParams) -> Result<u64> {
    p.validate()?;
    let numerator = p.num_rb as u64 * p.data_re_per_rb as u64 * p.mcs.qm as u64 * p.mcs.code_rate_x1024 as u64;
    // numerator / 1024 / 8, floored, in integer arithmetic
    Ok(8 * (numerator / (1024 * 8)))
}

/// Shannon-inverse SINR (dB) for the MCS spectral efficiency, plus a margin.
pub fn sinr_threshold_db(mcs: &McsEntry, margin_db: f64) -> f64 {
    10.0 * (2f64.powf(mcs.spectral_efficiency()) - 1.0).log10() + margin_db
}
