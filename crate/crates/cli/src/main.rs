use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cubelab_cli::{catalog, load_config, run, Format, EXIT_ASSERTION, EXIT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(
    name = "cubelab",
    version,
    about = "Ergodic cube averages and finite oracles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Write the record here instead of the config's `output` (or stdout).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Record format; overrides the config's `format`.
        #[arg(long)]
        format: Option<Format>,
        /// Worker threads. Results do not depend on this.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// List the experiment kinds.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", catalog::render());
            ExitCode::from(EXIT_OK as u8)
        }
        Command::Run {
            config,
            output,
            format,
            threads,
        } => ExitCode::from(run_command(config, output, format, threads) as u8),
    }
}

fn run_command(
    path: PathBuf,
    output: Option<PathBuf>,
    format: Option<Format>,
    threads: usize,
) -> i32 {
    let loaded = match load_config(&path) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("config error in {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    let record = match run(&loaded, threads) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let format = format.or(loaded.config.format).unwrap_or_default();
    let written = match output.or_else(|| loaded.config.output.clone()) {
        Some(p) => File::create(&p).and_then(|f| {
            let mut w = BufWriter::new(f);
            record.write(&mut w, format)?;
            w.flush()
        }),
        None => record.write(&mut std::io::stdout().lock(), format),
    };
    if let Err(e) = written {
        eprintln!("cannot write record: {e}");
        return EXIT_CONFIG;
    }
    for a in &record.assertions {
        let status = if a.passed { "PASS" } else { "FAIL" };
        eprintln!("{status} {}: {}", a.name, a.detail);
    }
    if record.passed() {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    }
}
