//! CSI reporting: CSI-RS pilots, least-squares channel estimation at the UE,
//! and CQI/RI/PMI report construction.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{add_awgn, apply_channel, ChannelVector, NoiseSpec, CSIRS_PORT_POWER};
use crate::codebook::{effective_gain, NUM_PMI};
use crate::rng::{self, Purpose};
use crate::{domain, Result, UeId};

/// Spectral efficiency of CQI 1..=15 (4-bit CQI table 1). CQI 0 is out of range.
const CQI_EFFICIENCY: [f64; 15] = [
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152,
    5.5547,
];

/// SNR gap between Shannon capacity and a practical code, in dB.
const SHANNON_GAP_DB: f64 = 3.0;

/// Feedback from one UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsiReport {
    pub ue_id: UeId,
    pub cqi: u8,
    /// Always 1: a single RX antenna supports one layer.
    pub ri: u8,
    pub pmi: u8,
}

/// CSI-RS pilots. RE `k` carries a pilot on antenna port `k % 2` only; the
/// other port is silent there.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBlock {
    symbols: Vec<Complex64>,
}

impl PilotBlock {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn antenna_of(re: usize) -> usize {
        re % 2
    }

    /// Transmitted `[port0, port1]` sample on pilot RE `re`.
    pub fn tx_sample(&self, re: usize) -> [Complex64; 2] {
        let mut s = [Complex64::new(0.0, 0.0); 2];
        s[Self::antenna_of(re)] = self.symbols[re];
        s
    }
}

/// Deterministic QPSK pilots with per-port power `CSIRS_PORT_POWER`.
pub fn generate_csirs(seed: u64, length: usize) -> Result<PilotBlock> {
    if length < 1 {
        return Err(domain("CSI-RS needs at least one pilot RE"));
    }
    let mut rng = rng::stream(seed, Purpose::Pilots, 0);
    // QPSK point (±1 ± j)/√2 scaled to amplitude √(1/2)
    let amp = (CSIRS_PORT_POWER / 2.0).sqrt();
    let symbols = (0..length)
        .map(|_| {
            let b: u8 = rng.random_range(0..4);
            let re = if b & 1 == 0 { amp } else { -amp };
            let im = if b & 2 == 0 { amp } else { -amp };
            Complex64::new(re, im)
        })
        .collect();
    Ok(PilotBlock { symbols })
}

/// Passes the pilots through `h` and adds noise, producing what the UE receives.
pub fn receive_pilots<R: Rng + ?Sized>(
    h: &ChannelVector,
    pilots: &PilotBlock,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Vec<Complex64> {
    (0..pilots.len())
        .map(|re| add_awgn(apply_channel(h, &pilots.tx_sample(re)), noise, rng))
        .collect()
}

/// Per-port least-squares estimate: the mean of `rx/pilot` over that port's REs.
pub fn estimate_channel(rx: &[Complex64], pilots: &PilotBlock, ue_id: UeId) -> Result<ChannelVector> {
    if rx.len() != pilots.len() {
        return Err(domain(format!(
            "received {} pilot samples for {} pilots",
            rx.len(),
            pilots.len()
        )));
    }
    let mut sums = [Complex64::new(0.0, 0.0); 2];
    let mut counts = [0usize; 2];
    for (re, (y, p)) in rx.iter().zip(pilots.symbols()).enumerate() {
        let port = PilotBlock::antenna_of(re);
        sums[port] += y / p;
        counts[port] += 1;
    }
    if counts.contains(&0) {
        return Err(domain("an antenna port has no pilot REs"));
    }
    Ok(ChannelVector::new(
        ue_id,
        [sums[0] / counts[0] as f64, sums[1] / counts[1] as f64],
    ))
}

/// PMI maximizing `|h·w|`; ties go to the lowest index.
pub fn select_pmi(h_est: &ChannelVector) -> u8 {
    let mut best = (0u8, f64::NEG_INFINITY);
    for pmi in 0..NUM_PMI {
        let g = effective_gain(h_est, pmi).expect("pmi in range");
        // strict improvement beyond round-off keeps the lowest index on ties
        if g > best.1 + 1e-12 {
            best = (pmi, g);
        }
    }
    best.0
}

/// Post-precoding SINR (linear) for a single-user transmission with unit power.
pub fn post_precoding_sinr(h_est: &ChannelVector, pmi: u8, noise: &NoiseSpec) -> f64 {
    let g = effective_gain(h_est, pmi).expect("pmi in range");
    if noise.variance == 0.0 {
        return f64::INFINITY;
    }
    g * g / noise.variance
}

/// Largest CQI whose table efficiency the gap-adjusted Shannon rate supports.
pub fn compute_cqi(post_precoding_sinr_db: f64) -> u8 {
    let sinr = 10f64.powf(post_precoding_sinr_db / 10.0);
    let eff = (1.0 + sinr / 10f64.powf(SHANNON_GAP_DB / 10.0)).log2();
    CQI_EFFICIENCY
        .iter()
        .rposition(|&e| e <= eff)
        .map_or(0, |i| i as u8 + 1)
}

pub fn build_report(ue_id: UeId, h_est: &ChannelVector, noise: &NoiseSpec) -> CsiReport {
    let pmi = select_pmi(h_est);
    let sinr_db = 10.0 * post_precoding_sinr(h_est, pmi, noise).log10();
    CsiReport {
        ue_id,
        cqi: compute_cqi(sinr_db),
        ri: 1,
        pmi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ideal_channels, noise_from_snr, sample_rayleigh};
    use crate::codebook::is_orthogonal_pair;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mse(a: &ChannelVector, b: &ChannelVector) -> f64 {
        (a.entries[0] - b.entries[0]).norm_sqr() + (a.entries[1] - b.entries[1]).norm_sqr()
    }

    #[test]
    fn pilots_deterministic_and_interleaved() {
        assert_eq!(generate_csirs(9, 16).unwrap(), generate_csirs(9, 16).unwrap());
        assert_ne!(generate_csirs(9, 16).unwrap(), generate_csirs(10, 16).unwrap());
        assert!(generate_csirs(9, 0).is_err());
        let p = generate_csirs(1, 8).unwrap();
        let per_port = |port: usize| (0..8).filter(|&re| p.tx_sample(re)[port].norm() > 0.0).count();
        assert_eq!(per_port(0), 4);
        assert_eq!(per_port(1), 4);
        for re in 0..8 {
            assert!((p.symbols()[re].norm() - CSIRS_PORT_POWER.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn pilot_power_per_port() {
        let p = generate_csirs(2, 20_000).unwrap();
        for port in 0..2 {
            let (sum, n) = (0..p.len())
                .filter(|&re| PilotBlock::antenna_of(re) == port)
                .fold((0.0, 0), |(s, n), re| (s + p.tx_sample(re)[port].norm_sqr(), n + 1));
            assert!((sum / n as f64 - 0.5).abs() < 0.005);
        }
    }

    #[test]
    fn ls_exact_without_noise() {
        let (h1, _) = ideal_channels();
        let p = generate_csirs(3, 32).unwrap();
        let rx = receive_pilots(&h1, &p, &NoiseSpec::noiseless(), &mut rng::stream(0, Purpose::Noise, 1));
        let est = estimate_channel(&rx, &p, 1).unwrap();
        assert!(mse(&est, &h1) < 1e-24);
    }

    #[test]
    fn ls_rejects_bad_input() {
        let p = generate_csirs(3, 1).unwrap();
        assert!(estimate_channel(&[c(1.0, 0.0)], &p, 1).is_err());
        let p = generate_csirs(3, 4).unwrap();
        assert!(estimate_channel(&[c(1.0, 0.0)], &p, 1).is_err());
    }

    fn monte_carlo_mse(snr_db: f64, pilots: usize, trials: usize) -> f64 {
        let (h1, _) = ideal_channels();
        let noise = noise_from_snr(snr_db, &h1).unwrap();
        let mut rng = rng::stream(11, Purpose::Noise, 1);
        (0..trials)
            .map(|t| {
                let p = generate_csirs(t as u64, pilots).unwrap();
                let rx = receive_pilots(&h1, &p, &noise, &mut rng);
                mse(&estimate_channel(&rx, &p, 1).unwrap(), &h1)
            })
            .sum::<f64>()
            / trials as f64
    }

    #[test]
    fn ls_mse_high_snr() {
        assert!(monte_carlo_mse(60.0, 32, 1000) < 1e-3);
    }

    #[test]
    fn ls_mse_halves_with_double_pilots() {
        let a = monte_carlo_mse(10.0, 32, 20_000);
        let b = monte_carlo_mse(10.0, 64, 20_000);
        let ratio = a / b;
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn pmi_selection_examples() {
        let (h1, h2) = ideal_channels();
        assert_eq!(select_pmi(&h1), 3);
        assert_eq!(select_pmi(&h2), 1);
        assert_eq!(select_pmi(&ChannelVector::new(0, [c(1.0, 0.0), c(0.0, 0.0)])), 0);
    }

    #[test]
    fn cqi_mapping() {
        assert_eq!(compute_cqi(-40.0), 0);
        assert_eq!(compute_cqi(30.0), 15);
        // gap-adjusted rate at 0 dB is log2(1 + 1/1.995) ≈ 0.585: CQI 3 (0.377) but not 4 (0.6016)
        assert_eq!(compute_cqi(0.0), 3);
        let mut last = 0;
        for tenth in -400..=400 {
            let q = compute_cqi(tenth as f64 / 10.0);
            assert!(q >= last);
            last = q;
        }
    }

    #[test]
    fn report_examples() {
        let (h1, h2) = ideal_channels();
        let hi = noise_from_snr(40.0, &h1).unwrap();
        assert_eq!(
            build_report(1, &h1, &hi),
            CsiReport {
                ue_id: 1,
                cqi: 15,
                ri: 1,
                pmi: 3
            }
        );
        for snr in [-10.0, 0.0, 10.0] {
            let r = build_report(2, &h2, &noise_from_snr(snr, &h2).unwrap());
            assert_eq!((r.pmi, r.ri), (1, 1));
        }
        let r1 = build_report(1, &h1, &hi);
        let r2 = build_report(2, &h2, &hi);
        assert!(is_orthogonal_pair(r1.pmi, r2.pmi).unwrap());
    }

    #[test]
    fn estimated_pmi_agrees_at_high_snr() {
        let (h1, h2) = ideal_channels();
        let mut nz = rng::stream(5, Purpose::Noise, 1);
        for t in 0..1000 {
            let h = if t % 2 == 0 { h1 } else { h2 };
            let noise = noise_from_snr(60.0, &h).unwrap();
            let p = generate_csirs(t, 32).unwrap();
            let est = estimate_channel(&receive_pilots(&h, &p, &noise, &mut nz), &p, 1).unwrap();
            assert_eq!(select_pmi(&est), select_pmi(&h), "trial {t}");
        }
    }

    #[test]
    fn estimated_pmi_mostly_agrees_on_rayleigh() {
        // random channels can sit arbitrarily close to a decision boundary
        let mut ch = rng::stream(5, Purpose::Channel, 1);
        let mut nz = rng::stream(5, Purpose::Noise, 1);
        let agree = (0..1000)
            .filter(|&t| {
                let h = sample_rayleigh(&mut ch, 1);
                let noise = noise_from_snr(60.0, &h).unwrap();
                let p = generate_csirs(t, 32).unwrap();
                let est = estimate_channel(&receive_pilots(&h, &p, &noise, &mut nz), &p, 1).unwrap();
                select_pmi(&est) == select_pmi(&h)
            })
            .count();
        assert!(agree >= 990, "{agree}");
    }

    proptest! {
        #[test]
        fn pmi_phase_invariant(
            v in proptest::array::uniform4(-4.0f64..4.0),
            theta in 0.0f64..std::f64::consts::TAU,
        ) {
            let h = ChannelVector::new(0, [c(v[0], v[1]), c(v[2], v[3])]);
            let rotated = h.scaled(Complex64::from_polar(1.0, theta));
            // skip channels sitting within round-off of a decision boundary
            let mut gains: Vec<f64> = (0..4).map(|p| effective_gain(&h, p).unwrap()).collect();
            gains.sort_by(|a, b| b.partial_cmp(a).unwrap());
            prop_assume!(gains[0] - gains[1] > 1e-9);
            prop_assert_eq!(select_pmi(&h), select_pmi(&rotated));
        }
    }
}
