//! One MU-MIMO slot on the reference channels: both UEs share the band on
//! orthogonal beams and each decodes its own block.
//!
//! ```text
//! cargo run --release --example mu_mimo_slot -- [snr_db] [mcs]
//! ```

use nr_mumimo::channel::{ideal_channels, noise_from_snr};
use nr_mumimo::mcs::{compute_tbs, mcs_lookup, TbsParams};
use nr_mumimo::phy::{transmit_allocation, EffectiveLink, LinkModel, TransportBlock, UeLink};
use nr_mumimo::rng::{stream, Purpose};
use nr_mumimo::scheduler::Allocation;

fn main() -> Result<(), nr_mumimo::Error> {
    let mut args = std::env::args().skip(1);
    let snr_db: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(20.0);
    let mcs_index: u8 = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);

    let (h1, h2) = ideal_channels();
    let links = [
        UeLink {
            h: h1,
            noise: noise_from_snr(snr_db, &h1)?,
        },
        UeLink {
            h: h2,
            noise: noise_from_snr(snr_db, &h2)?,
        },
    ];
    let mcs = mcs_lookup(mcs_index)?;
    let tbs = compute_tbs(&TbsParams::new(106, mcs))?;
    let alloc = Allocation::mu_mimo((1, 3), (2, 1), 106, mcs_index)?;
    println!(
        "MCS {mcs_index} (Qm {}, R {:.4}), TBS {tbs} bits per UE",
        mcs.qm,
        mcs.code_rate()
    );

    for (i, link) in links.iter().enumerate() {
        let eff = EffectiveLink::new(&link.h, &alloc, i, &link.noise)?;
        println!(
            "UE {}: gain {:.3}, interference {:.2e}, SINR {:.2} dB",
            link.h.ue_id,
            eff.gain,
            eff.interference_power,
            eff.sinr_db()
        );
    }

    let mut payload = stream(1, Purpose::Payload, 0);
    let blocks = [
        TransportBlock::random(1, tbs, &mut payload),
        TransportBlock::random(2, tbs, &mut payload),
    ];
    let mut noise = vec![stream(1, Purpose::Noise, 1), stream(1, Purpose::Noise, 2)];
    let results = transmit_allocation(
        &alloc,
        &[&blocks[0], &blocks[1]],
        &links,
        &mcs,
        LinkModel::default(),
        &mut noise,
    )?;
    for r in results {
        println!(
            "UE {}: {} / {} bit errors, block {}",
            r.ue_id,
            r.bit_errors,
            r.total_bits,
            if r.block_error { "failed" } else { "decoded" }
        );
    }
    Ok(())
}
