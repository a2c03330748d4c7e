//! BLER versus SNR under the ideal channels, one column per MCS.
//!
//! ```text
//! cargo run --release --example bler_sweep -- [tb_per_point]
//! ```

use std::time::Instant;

use nr_mumimo::sim::{run_sweep, snr_range, SimConfig};

fn main() -> Result<(), nr_mumimo::Error> {
    let tb_per_point = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    let cfg = SimConfig {
        snr_grid_db: snr_range(0.0, 30.0, 2.0),
        mcs_list: vec![10, 13, 16, 19, 22, 25, 28],
        tb_per_point,
        ..Default::default()
    };
    let start = Instant::now();
    let run = run_sweep(&cfg)?;

    print!("{:>8}", "SNR dB");
    for m in &cfg.mcs_list {
        print!("{:>9}", format!("MCS {m}"));
    }
    println!();
    for (si, snr) in cfg.snr_grid_db.iter().enumerate() {
        print!("{snr:>8.1}");
        for mi in 0..cfg.mcs_list.len() {
            print!("{:>9.3}", run.point(si, mi).avg_bler());
        }
        println!();
    }

    println!("\nlowest SNR with both UEs below 10% BLER:");
    for (mi, m) in cfg.mcs_list.iter().enumerate() {
        let frontier = (0..cfg.snr_grid_db.len()).find(|&si| run.point(si, mi).max_bler() < 0.1);
        match frontier {
            Some(si) => println!("  MCS {m:>2}: {:.1} dB", cfg.snr_grid_db[si]),
            None => println!("  MCS {m:>2}: not reached"),
        }
    }
    eprintln!("{} points in {:.1?}", run.points.len(), start.elapsed());
    Ok(())
}
