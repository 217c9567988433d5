use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use isoent_cli::commands::{execute, Cli};
use isoent_cli::write_atomic;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors; --help and --version are not
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let env_seed = std::env::var("ISOENT_SEED").ok();
    let artifact = match execute(cli, env_seed.as_deref()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code as u8);
        }
    };
    for (path, text) in &artifact.side_files {
        if let Err(e) = write_atomic(path, text.as_bytes()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    let written = match &artifact.out {
        Some(path) => write_atomic(path, artifact.text.as_bytes()),
        None => std::io::stdout().lock().write_all(artifact.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
