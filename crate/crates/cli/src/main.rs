use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let pretty = std::env::args().any(|a| a == "--pretty");
    let outcome = dlim_cli::run_args(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    let body = serde_json::to_string(&outcome.report).unwrap_or_else(|_| "{}".into());
    let _ = writeln!(stdout, "{body}");
    if pretty {
        let mut stderr = std::io::stderr().lock();
        for line in &outcome.summary {
            let _ = writeln!(stderr, "{line}");
        }
    }
    ExitCode::from(outcome.exit_code)
}
