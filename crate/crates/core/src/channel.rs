//! Flat downlink channels from the two gNB antenna ports to a single-antenna
//! UE, plus AWGN referenced to the received CSI-RS power.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{domain, Result, UeId};

/// CSI-RS power per antenna port; total pilot power across both ports is 1.
pub const CSIRS_PORT_POWER: f64 = 0.5;

/// A `1×2` channel row `h` for one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelVector {
    pub ue_id: UeId,
    pub entries: [Complex64; 2],
}

impl ChannelVector {
    pub fn new(ue_id: UeId, entries: [Complex64; 2]) -> Self {
        Self { ue_id, entries }
    }

    /// `h·s` (no conjugation).
    #[inline]
    pub fn dot(&self, s: &[Complex64; 2]) -> Complex64 {
        self.entries[0] * s[0] + self.entries[1] * s[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries[0].norm_sqr() + self.entries[1].norm_sqr()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::new(self.ue_id, [self.entries[0] * c, self.entries[1] * c])
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.re.is_finite() && e.im.is_finite())
    }
}

/// Noise statistics for one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// SNR relative to the received CSI-RS power.
    pub snr_db: f64,
    /// Complex noise variance per sample.
    pub variance: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            snr_db: f64::INFINITY,
            variance: 0.0,
        }
    }
}

/// The fixed pair `h₁ = [1, j]`, `h₂ = [1, −j]` for UE ids 1 and 2.
pub fn ideal_channels() -> (ChannelVector, ChannelVector) {
    let one = Complex64::new(1.0, 0.0);
    let j = Complex64::new(0.0, 1.0);
    (ChannelVector::new(1, [one, j]), ChannelVector::new(2, [one, -j]))
}

/// Draws an i.i.d. unit-variance circularly-symmetric Gaussian channel.
pub fn sample_rayleigh<R: Rng + ?Sized>(rng: &mut R, ue_id: UeId) -> ChannelVector {
    let mut entry = || complex_gaussian(rng, 1.0);
    let entries = [entry(), entry()];
    ChannelVector::new(ue_id, entries)
}

#[inline]
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sigma, im * sigma)
}

/// Noiseless received sample `h·s`.
#[inline]
pub fn apply_channel(h: &ChannelVector, s: &[Complex64; 2]) -> Complex64 {
    h.dot(s)
}

/// Adds circularly-symmetric complex Gaussian noise with `noise.variance`.
#[inline]
pub fn add_awgn<R: Rng + ?Sized>(y: Complex64, noise: &NoiseSpec, rng: &mut R) -> Complex64 {
    if noise.variance == 0.0 {
        return y;
    }
    y + complex_gaussian(rng, noise.variance)
}

/// Received CSI-RS power at a UE with channel `h`.
pub fn csirs_rx_power(h: &ChannelVector) -> f64 {
    h.entries.iter().map(|e| e.norm_sqr() * CSIRS_PORT_POWER).sum()
}

/// Noise whose power sits `snr_db` below the UE's received CSI-RS power.
pub fn noise_from_snr(snr_db: f64, h: &ChannelVector) -> Result<NoiseSpec> {
    if !snr_db.is_finite() {
        return Err(domain(format!("SNR must be finite, got {snr_db}")));
    }
    if !h.is_finite() {
        return Err(domain("channel has non-finite entries"));
    }
    Ok(NoiseSpec {
        snr_db,
        variance: csirs_rx_power(h) / 10f64.powf(snr_db / 10.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::get_precoder;
    use crate::rng::{stream, Purpose};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ideal_pair() {
        let (h1, h2) = ideal_channels();
        assert_eq!(h1.entries, [c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(h2.entries, [c(1.0, 0.0), c(0.0, -1.0)]);
        assert_eq!(h1.norm_sqr(), 2.0);
        assert_eq!(h1.norm_sqr(), h2.norm_sqr());
        // h₁·h₂ᴴ
        let ip = h1.entries[0] * h2.entries[0].conj() + h1.entries[1] * h2.entries[1].conj();
        assert_eq!(ip, c(0.0, 0.0));
    }

    #[test]
    fn rayleigh_deterministic() {
        let a = sample_rayleigh(&mut stream(42, Purpose::Channel, 1), 1);
        let b = sample_rayleigh(&mut stream(42, Purpose::Channel, 1), 1);
        assert_eq!(a, b);
        assert_eq!(a.ue_id, 1);
    }

    #[test]
    fn rayleigh_power_and_independence() {
        let n = 100_000;
        let mut r1 = stream(7, Purpose::Channel, 1);
        let mut r2 = stream(7, Purpose::Channel, 2);
        let mut power = 0.0;
        let mut cross = c(0.0, 0.0);
        let (mut p1, mut p2) = (0.0, 0.0);
        for _ in 0..n {
            let a = sample_rayleigh(&mut r1, 1);
            let b = sample_rayleigh(&mut r2, 2);
            power += a.norm_sqr();
            cross += a.entries[0] * b.entries[0].conj();
            p1 += a.entries[0].norm_sqr();
            p2 += b.entries[0].norm_sqr();
        }
        let mean_power = power / n as f64;
        assert!((mean_power - 2.0).abs() < 0.05, "{mean_power}");
        let rho = cross.norm() / (p1 * p2).sqrt();
        assert!(rho < 0.02, "{rho}");
    }

    #[test]
    fn apply_channel_examples() {
        let (h1, h2) = ideal_channels();
        assert_eq!(apply_channel(&h1, &[c(1.0, 0.0), c(0.0, 0.0)]), c(1.0, 0.0));
        let w3 = get_precoder(3).unwrap().entries();
        let a = 0.5f64.sqrt();
        let s = [w3[0] * a, w3[1] * a];
        assert_abs_diff_eq!((apply_channel(&h1, &s) - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(apply_channel(&h2, &s).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn awgn_zero_variance_passthrough() {
        let mut rng = stream(1, Purpose::Noise, 1);
        let y = c(0.3, -0.7);
        let spec = NoiseSpec {
            snr_db: 0.0,
            variance: 0.0,
        };
        assert_eq!(add_awgn(y, &spec, &mut rng), y);
    }

    #[test]
    fn awgn_statistics() {
        let n = 1_000_000;
        let mut rng = stream(3, Purpose::Noise, 1);
        let spec = NoiseSpec {
            snr_db: 0.0,
            variance: 2.0,
        };
        let y = c(1.0, 1.0);
        let (mut total, mut re2, mut im2) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let e = add_awgn(y, &spec, &mut rng) - y;
            total += e.norm_sqr();
            re2 += e.re * e.re;
            im2 += e.im * e.im;
        }
        let n = n as f64;
        assert!((total / n - 2.0).abs() < 0.02);
        assert!((re2 / n - 1.0).abs() < 0.01);
        assert!((im2 / n - 1.0).abs() < 0.01);
    }

    #[test]
    fn snr_normalization() {
        let (h1, h2) = ideal_channels();
        assert_abs_diff_eq!(noise_from_snr(0.0, &h1).unwrap().variance, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(noise_from_snr(10.0, &h1).unwrap().variance, 0.1, epsilon = 1e-15);
        assert_eq!(noise_from_snr(7.0, &h1).unwrap(), noise_from_snr(7.0, &h2).unwrap());
        assert!(noise_from_snr(f64::NAN, &h1).is_err());
        assert!(noise_from_snr(f64::INFINITY, &h1).is_err());
    }

    proptest! {
        #[test]
        fn noise_decreasing_in_snr(a in -50.0f64..60.0, d in 0.01f64..20.0) {
            let (h1, _) = ideal_channels();
            let lo = noise_from_snr(a, &h1).unwrap().variance;
            let hi = noise_from_snr(a + d, &h1).unwrap().variance;
            prop_assert!(hi < lo);
        }

        #[test]
        fn channel_is_linear(v in proptest::collection::vec(-3.0f64..3.0, 12)) {
            let h = ChannelVector::new(0, [c(v[0], v[1]), c(v[2], v[3])]);
            let s1 = [c(v[4], v[5]), c(v[6], v[7])];
            let s2 = [c(v[8], v[9]), c(v[10], v[11])];
            let (a, b) = (c(v[1], v[4]), c(v[7], v[2]));
            let mixed = [a * s1[0] + b * s2[0], a * s1[1] + b * s2[1]];
            let lhs = apply_channel(&h, &mixed);
            let rhs = a * apply_channel(&h, &s1) + b * apply_channel(&h, &s2);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
