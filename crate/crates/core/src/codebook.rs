//! Type I single-layer codebook for two TX antenna ports.
//!
//! Every codeword is `(1/√2)·[1, φ]ᵀ` with `φ = jⁿ` for PMI `n`, so codewords
//! `n` and `n + 2` point in opposite phase on the second port and are
//! orthogonal to each other.

use num_complex::Complex64;

use crate::channel::ChannelVector;
use crate::{Error, Result};

/// Number of codewords in the 2-port single-layer codebook.
pub const NUM_PMI: u8 = 4;

/// Tolerance used for quantities that are analytically zero.
pub const EXACT_TOL: f64 = 1e-12;

/// A unit-norm precoding vector from the codebook.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecodingVector {
    entries: [Complex64; 2],
    pmi: u8,
}

impl PrecodingVector {
    pub fn entries(&self) -> [Complex64; 2] {
        self.entries
    }

    pub fn pmi(&self) -> u8 {
        self.pmi
    }

    pub fn norm(&self) -> f64 {
        (self.entries[0].norm_sqr() + self.entries[1].norm_sqr()).sqrt()
    }

    /// Hermitian inner product `⟨self, other⟩ = selfᴴ·other`.
    pub fn inner(&self, other: &PrecodingVector) -> Complex64 {
        self.entries[0].conj() * other.entries[0] + self.entries[1].conj() * other.entries[1]
    }
}

fn check_pmi(pmi: u8) -> Result<()> {
    if pmi < NUM_PMI {
        Ok(())
    } else {
        Err(Error::InvalidPmi(pmi))
    }
}

/// Second-port phase `jⁿ`, written out so the entries are exact.
fn co_phase(pmi: u8) -> Complex64 {
    match pmi {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Returns codeword `pmi`.
pub fn get_precoder(pmi: u8) -> Result<PrecodingVector> {
    check_pmi(pmi)?;
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    Ok(PrecodingVector {
        entries: [Complex64::new(scale, 0.0), co_phase(pmi) * scale],
        pmi,
    })
}

/// All four codewords in PMI order.
pub fn all_precoders() -> [PrecodingVector; 4] {
    [0, 1, 2, 3].map(|pmi| get_precoder(pmi).expect("index in range"))
}

/// True iff the two codewords are orthogonal, i.e. `{a, b}` is `{0, 2}` or `{1, 3}`.
pub fn is_orthogonal_pair(pmi_a: u8, pmi_b: u8) -> Result<bool> {
    let a = get_precoder(pmi_a)?;
    let b = get_precoder(pmi_b)?;
    Ok(a.inner(&b).norm() < EXACT_TOL)
}

/// `|h·w_pmi|`, the magnitude of the effective scalar channel.
pub fn effective_gain(h: &ChannelVector, pmi: u8) -> Result<f64> {
    let w = get_precoder(pmi)?;
    Ok(h.dot(&w.entries()).norm())
}
