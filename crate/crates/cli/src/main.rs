use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let outcome = solmap_cli::run(&args);
    if outcome.code == 0 {
        println!("{}", outcome.message.trim_end());
    } else {
        eprintln!("{}", outcome.message.trim_end());
    }
    ExitCode::from(outcome.code)
}
