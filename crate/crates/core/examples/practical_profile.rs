//! 20 MHz profile (52 RB at 30 kHz) over Rayleigh channels, single-user
//! reference against MU-MIMO.
//!
//! ```text
//! cargo run --release --example practical_profile
//! ```

use nr_mumimo::scheduler::SchedulerMode;
use nr_mumimo::sim::{run_sweep, snr_range, ChannelMode, SimConfig};

fn main() -> Result<(), nr_mumimo::Error> {
    let base = SimConfig {
        num_rb: 52,
        channel_mode: ChannelMode::Rayleigh,
        snr_grid_db: snr_range(10.0, 40.0, 5.0),
        mcs_list: vec![16],
        tb_per_point: 1000,
        ..Default::default()
    };
    println!(
        "{:>6}  {:>6}  {:>10}  {:>10}  {:>8}",
        "mode", "SNR dB", "BLER", "Mbit/s", "MU slots"
    );
    for mode in [SchedulerMode::SingleUserOnly, SchedulerMode::MuMimoEnabled] {
        let run = run_sweep(&SimConfig {
            scheduler_mode: mode,
            ..base.clone()
        })?;
        for p in &run.points {
            println!(
                "{:>6}  {:>6.1}  {:>10.4}  {:>10.2}  {:>7.0}%",
                mode.name(),
                p.snr_db,
                p.avg_bler(),
                p.total_throughput_bps() / 1e6,
                100.0 * p.mu_slots as f64 / p.slots_elapsed.max(1) as f64
            );
        }
    }
    Ok(())
}
