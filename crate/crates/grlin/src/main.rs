use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use grlin::commands::parse_perm;
use grlin::{run, Command, Options};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Parser, Debug)]
#[command(name = "grlin", version, about = "Graded bundles, linearisation and symmetric k-fold vector bundles")]
struct Cli {
    command: Command,
    /// Bundle file; standard input when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Where to write the emitted presentation.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long = "degree-cap", default_value_t = 2)]
    degree_cap: u32,
    /// Permutation in one-line notation, `21` or `2,1`.
    #[arg(long)]
    g: Option<String>,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("grlin: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = match cli.g.as_deref().map(parse_perm).transpose() {
        Ok(g) => g,
        Err(e) => return usage(format!("--g: {e}")),
    };
    let src = match &cli.input {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => return usage(format!("cannot read {}: {e}", path.display())),
        },
        None => {
            let mut s = String::new();
            if let Err(e) = std::io::stdin().read_to_string(&mut s) {
                return usage(format!("cannot read standard input: {e}"));
            }
            s
        }
    };
    let opts = Options { seed: cli.seed, samples: cli.samples, degree_cap: cli.degree_cap, g };
    let report = run(cli.command, &src, &opts);
    if let (Some(path), Some(text)) = (&cli.output, &report.emitted) {
        if let Err(e) = std::fs::write(path, text) {
            return usage(format!("cannot write {}: {e}", path.display()));
        }
    }
    match cli.format {
        Format::Machine => print!("{}", report.machine()),
        Format::Text => print!("{}", report.text(cli.output.is_none())),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
