//! Run the named reproduction experiments and print every check line.
//!
//! Usage: `run_experiments [ID...]` — no arguments runs the full suite.

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ids: Vec<&str> = if args.is_empty() {
        momentsig::repro::EXPERIMENTS.to_vec()
    } else {
        args.iter().map(|s| s.as_str()).collect()
    };
    let mut failed = false;
    for id in ids {
        match momentsig::repro::run(id, 0) {
            Ok(report) => {
                failed |= !report.pass;
                for line in report.lines() {
                    println!("{line}");
                }
            }
            Err(e) => {
                failed = true;
                println!("{id}: ERROR {e}");
            }
        }
    }
    if failed {
        std::process::exit(1);
    }
}
