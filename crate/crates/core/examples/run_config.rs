//! Loads a config file the same way the binary does and writes the CSV and
//! gnuplot script.
//!
//! ```text
//! cargo run --release --example run_config -- path/to/run.conf [out.csv]
//! ```

use std::path::PathBuf;
use std::process::ExitCode;

use nr_mumimo::cli::{parse_config, run, Args, RunError};

fn main() -> ExitCode {
    let mut argv = std::env::args_os().skip(1);
    let args = Args {
        config: argv.next().map(PathBuf::from),
        out: argv.next().map(PathBuf::from),
        ..Default::default()
    };
    let result = parse_config(&args).map_err(RunError::from).and_then(|cfg| {
        println!("{:#?}", cfg.sim);
        run(&cfg).map(|()| cfg.out)
    });
    match result {
        Ok(out) => {
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
