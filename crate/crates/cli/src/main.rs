use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ionturn::analysis::{emit_table, Format};

mod commands;
mod config;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "ionturn",
    version,
    about = "Ion-string rotation and reordering in segmented Paul traps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One-point turn of an ion string; writes the result and trajectory.
    Swap,
    /// Acquired energy against swap duration.
    Sweep,
    /// Quadrupole strength against electrode aspect ratio.
    Design,
    /// Critical transverse-to-axial frequency ratio against ion number.
    Zigzag,
    /// RF barrier for an ion displaced from the RF null.
    Barrier,
    /// Upper bound on the mean energy from loss statistics.
    Lossbound,
    /// Three-point turn through the surrogate trap, with jittered reruns.
    Threepoint,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Swap => "swap",
            Command::Sweep => "sweep",
            Command::Design => "design",
            Command::Zigzag => "zigzag",
            Command::Barrier => "barrier",
            Command::Lossbound => "lossbound",
            Command::Threepoint => "threepoint",
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum OutputFormat {
    Csv,
    Json,
}

enum Failure {
    Config(String),
    Numeric(ionturn::Error),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "{m}"),
            Failure::Numeric(e) => write!(f, "error: {e}"),
            Failure::Io(m) => write!(f, "error: {m}"),
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, Failure> {
    let name = cli.command.name();
    let text = match &cli.config {
        Some(path) => {
            fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?
        }
        None => String::new(),
    };
    let cfg = RunConfig::parse(&text, name).map_err(|e| Failure::Config(e.to_string()))?;
    let outputs = match cli.command {
        Command::Swap => commands::swap(&cfg),
        Command::Sweep => commands::sweep(&cfg, cli.jobs),
        Command::Design => commands::design(&cfg),
        Command::Zigzag => commands::zigzag(&cfg),
        Command::Barrier => commands::barrier(&cfg),
        Command::Lossbound => commands::lossbound(&cfg),
        Command::Threepoint => commands::threepoint(&cfg),
    }
    .map_err(Failure::Numeric)?;

    let format = match cli.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    fs::create_dir_all(&cli.out).map_err(|e| Failure::Io(format!("cannot create {}: {e}", cli.out.display())))?;
    let mut written = Vec::new();
    for (stem, table) in outputs {
        let bytes = emit_table(&table, format).map_err(Failure::Numeric)?;
        let path = cli.out.join(format!("{stem}.{}", format.extension()));
        fs::write(&path, bytes).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    let resolved = toml::to_string(&cfg.resolved).map_err(|e| Failure::Io(e.to_string()))?;
    let path = cli.out.join(format!("{name}.resolved.toml"));
    fs::write(&path, resolved).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    written.push(path);
    Ok(written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprint!("{e}");
            if !matches!(e, Failure::Config(_)) {
                eprintln!();
            }
            ExitCode::from(e.code())
        }
    }
}
