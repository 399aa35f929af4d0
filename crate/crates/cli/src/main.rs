use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use selfprop_cli::{init_threads, resolve_config, run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            return ExitCode::from(e.code() as u8);
        }
    };
    if cli.print_config {
        print!("{}", cfg.to_text());
        return ExitCode::SUCCESS;
    }
    init_threads(&cfg);
    let start = Instant::now();
    match run(cli.command, &cfg) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            println!("done in {:.1} s; artifacts in {}", start.elapsed().as_secs_f64(), cfg.output.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::from(e.code() as u8)
        }
    }
}
