use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    spohnci::cli::configure_threads();
    let result = spohnci::cli::run_command(std::env::args().skip(1));
    if result.exit_code == 0 {
        print!("{}", result.output);
        if !result.output.ends_with('\n') {
            println!();
        }
    } else {
        eprintln!("{}", result.output);
    }
    ExitCode::from(result.exit_code as u8)
}
