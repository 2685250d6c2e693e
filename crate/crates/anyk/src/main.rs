use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = anyk::cli::main_with(std::env::args_os(), &mut out, &mut io::stderr());
    let code = if out.flush().is_err() && code == 0 { 1 } else { code };
    ExitCode::from(code)
}
