use std::process::ExitCode;

use clap::Parser;

use sparsecone_cli::{apply_env_tolerance, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match apply_env_tolerance().and_then(|()| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
