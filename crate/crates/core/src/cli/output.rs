use std::fmt::Write;
use std::path::Path;

use super::Preset;
use crate::sim::{RunMetrics, SimConfig};

pub const CSV_HEADER: &str = "mode,snr_db,mcs,ue,bler,bler_avg,throughput_bps,slots,bits";

/// Rows for one sweep: each grid point emits one row per UE and an `all` row
/// whose `bler` is the worst UE's BLER and whose throughput is the total.
pub fn csv_rows(run: &RunMetrics) -> Vec<String> {
    let mode = run.mode.name();
    let mut rows = Vec::with_capacity(run.points.len() * 3);
    for p in &run.points {
        let avg = p.avg_bler();
        for ue in &p.ues {
            rows.push(format!(
                "{mode},{},{},{},{:.6},{avg:.6},{:.1},{},{}",
                p.snr_db,
                p.mcs_index,
                ue.ue_id,
                ue.bler(),
                p.ue_throughput_bps(ue),
                p.slots_elapsed,
                ue.bits_delivered
            ));
        }
        rows.push(format!(
            "{mode},{},{},all,{:.6},{avg:.6},{:.1},{},{}",
            p.snr_db,
            p.mcs_index,
            p.max_bler(),
            p.total_throughput_bps(),
            p.slots_elapsed,
            p.bits_delivered()
        ));
    }
    rows
}

pub fn render_csv(runs: &[RunMetrics]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for run in runs {
        for row in csv_rows(run) {
            out.push_str(&row);
            out.push('\n');
        }
    }
    out
}

/// gnuplot script that plots the CSV written to `csv`.
pub fn plot_script(preset: Option<Preset>, csv: &Path, sim: &SimConfig) -> String {
    let file = csv
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let png = csv.with_extension("png");
    let png = png
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mcs: Vec<String> = sim.mcs_list.iter().map(u8::to_string).collect();
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot {file}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 1000,700");
    let _ = writeln!(s, "set output '{png}'");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "set xlabel 'SNR (dB)'");
    let _ = writeln!(s, "MCS = \"{}\"", mcs.join(" "));
    // column 4 is the UE (or "all"), column 1 the scheduler mode
    let all = "strcol(4) eq 'all'";
    match preset {
        Some(Preset::BlerVsSnr) | None => {
            let _ = writeln!(s, "set ylabel 'Average BLER of the UEs'");
            let _ = writeln!(s, "set logscale y");
            let _ = writeln!(s, "set yrange [1e-3:1.2]");
            let _ = writeln!(s, "set arrow from graph 0, first 0.1 to graph 1, first 0.1 nohead dt 2");
            let _ = writeln!(
                s,
                "plot for [m in MCS] '{file}' every ::1 using ({all} && $3 == m+0 ? $2 : 1/0):($6 > 0 ? $6 : 1e-3) \\\n    with linespoints title 'MCS '.m"
            );
        }
        Some(Preset::RateVsSnr) => {
            let _ = writeln!(s, "set ylabel 'Total downlink rate (Mbit/s)'");
            let _ = writeln!(
                s,
                "plot for [m in MCS] '{file}' every ::1 using ({all} && $3 == m+0 ? $2 : 1/0):($7/1e6) \\\n    with linespoints title 'MCS '.m"
            );
        }
        Some(Preset::MuVsPf) | Some(Preset::PracticalProfile) => {
            let modes = match preset {
                Some(Preset::MuVsPf) => "mumimo pf",
                _ => "su mumimo",
            };
            let _ = writeln!(s, "set ylabel 'Total downlink rate (Mbit/s), BLER < 0.1'");
            let _ = writeln!(s, "MODES = \"{modes}\"");
            let _ = writeln!(
                s,
                "plot for [md in MODES] '{file}' every ::1 using ({all} && strcol(1) eq md && $5 < 0.1 ? $2 : 1/0):($7/1e6) \\\n    with points title md"
            );
        }
    }
    s
}
