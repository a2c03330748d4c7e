//! MU-MIMO against proportional-fair single-user scheduling, with the
//! best-MCS throughput envelope for each.
//!
//! ```text
//! cargo run --release --example mu_vs_pf -- [tb_per_point]
//! ```

use nr_mumimo::scheduler::SchedulerMode;
use nr_mumimo::sim::{run_sweep, snr_range, SimConfig};

fn main() -> Result<(), nr_mumimo::Error> {
    let tb_per_point = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let base = SimConfig {
        snr_grid_db: snr_range(0.0, 30.0, 3.0),
        mcs_list: (10..=28).step_by(3).collect(),
        tb_per_point,
        ..Default::default()
    };
    let mu = run_sweep(&SimConfig {
        scheduler_mode: SchedulerMode::MuMimoEnabled,
        ..base.clone()
    })?;
    let pf = run_sweep(&SimConfig {
        scheduler_mode: SchedulerMode::ProportionalFairOnly,
        ..base
    })?;

    println!(
        "{:>6}  {:>16}  {:>16}  {:>5}",
        "SNR dB", "MU-MIMO Mbit/s", "PF Mbit/s", "gain"
    );
    for ((snr, m), (_, p)) in mu.achievable_envelope(0.1).into_iter().zip(pf.achievable_envelope(0.1)) {
        let show = |e: Option<(u8, f64)>| match e {
            Some((mcs, rate)) => format!("{:>7.1} (MCS {mcs:>2})", rate / 1e6),
            None => format!("{:>16}", "-"),
        };
        let gain = match (m, p) {
            (Some((_, a)), Some((_, b))) => format!("{:>5.2}", a / b),
            _ => format!("{:>5}", "-"),
        };
        println!("{snr:>6.1}  {}  {}  {gain}", show(m), show(p));
    }
    Ok(())
}
