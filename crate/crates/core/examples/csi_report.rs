//! CSI-RS estimation and reporting for one UE across SNR.
//!
//! ```text
//! cargo run --release --example csi_report -- [rayleigh]
//! ```

use nr_mumimo::channel::{ideal_channels, noise_from_snr, sample_rayleigh};
use nr_mumimo::csi::{build_report, estimate_channel, generate_csirs, receive_pilots};
use nr_mumimo::rng::{stream, Purpose};

fn main() -> Result<(), nr_mumimo::Error> {
    let rayleigh = std::env::args().nth(1).is_some_and(|a| a == "rayleigh");
    let mut channel_rng = stream(7, Purpose::Channel, 1);
    let mut noise_rng = stream(7, Purpose::Noise, 1);
    let h = if rayleigh {
        sample_rayleigh(&mut channel_rng, 1)
    } else {
        ideal_channels().0
    };
    println!("channel h = [{:.3}, {:.3}]", h.entries[0], h.entries[1]);

    let pilots = generate_csirs(7, 32)?;
    println!(
        "{:>6}  {:>10}  {:>3}  {:>3}  {:>2}",
        "SNR dB", "est MSE", "PMI", "CQI", "RI"
    );
    for snr in [-10.0, 0.0, 10.0, 20.0, 30.0, 60.0] {
        let noise = noise_from_snr(snr, &h)?;
        let est = estimate_channel(&receive_pilots(&h, &pilots, &noise, &mut noise_rng), &pilots, h.ue_id)?;
        let mse = (est.entries[0] - h.entries[0]).norm_sqr() + (est.entries[1] - h.entries[1]).norm_sqr();
        let report = build_report(h.ue_id, &est, &noise);
        println!(
            "{snr:>6.1}  {mse:>10.2e}  {:>3}  {:>3}  {:>2}",
            report.pmi, report.cqi, report.ri
        );
    }
    Ok(())
}
