//! Link-level simulator for two-user MU-MIMO on the 5G NR PDSCH.
//!
//! A 2-TX-antenna gNB serves two single-antenna UEs on the same resource
//! blocks by superposing their symbols with orthogonal Type I codebook
//! precoders. UEs estimate the channel from CSI-RS and report CQI/RI/PMI; the
//! scheduler pairs UEs whose PMIs are orthogonal and otherwise falls back to
//! proportional-fair single-user grants. The [`sim`] engine runs Monte-Carlo
//! sweeps over SNR and MCS and reports BLER and throughput.
//!
//! ```
//! use nr_mumimo::{channel, csi};
//!
//! let (h1, h2) = channel::ideal_channels();
//! assert_eq!(csi::select_pmi(&h1), 3);
//! assert_eq!(csi::select_pmi(&h2), 1);
//! ```

pub mod channel;
pub mod cli;
pub mod codebook;
pub mod csi;
mod error;
pub mod mcs;
pub mod phy;
pub mod rng;
pub mod scheduler;
pub mod sim;

pub(crate) use error::domain;
pub use error::{Error, Result};

/// Identifier of a UE within a simulation drop.
pub type UeId = u32;
