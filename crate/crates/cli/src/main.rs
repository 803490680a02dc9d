use std::io::Read;
use std::process::ExitCode;

use anyhow::Context;
use termwpo::pipeline::analyze_source;
use termwpo_cli::parse_args;

fn run() -> anyhow::Result<ExitCode> {
    let inv = match parse_args(std::env::args_os()) {
        Ok(inv) => inv,
        Err(termwpo_cli::ArgsError::Clap(e)) => e.exit(),
        Err(e) => {
            eprintln!("termwpo: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let source = match &inv.input {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .context("cannot read standard input")?;
            buf
        }
    };
    if let Some(path) = &inv.config.solver.transcript {
        std::fs::write(path, "").with_context(|| format!("cannot create {}", path.display()))?;
    }
    let verdict = analyze_source(&source, &inv.strategy, &inv.config).context("syntax error")?;
    print!("{verdict}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("termwpo: {e:#}");
            ExitCode::FAILURE
        }
    }
}
