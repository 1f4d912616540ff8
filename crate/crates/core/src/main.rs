use std::process::ExitCode;

fn main() -> ExitCode {
    let config = match gpmood::cli::parse_config(std::env::args()) {
        Ok(c) => c,
        Err(gpmood::Error::Help(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match gpmood::cli::run(config) {
        Ok(sim) => {
            println!("finished t={} steps={}", sim.t, sim.step);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            ExitCode::FAILURE
        }
    }
}
