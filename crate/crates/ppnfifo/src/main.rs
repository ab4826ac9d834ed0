use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ppnfifo::error::{AppError, AppResult};
use ppnfifo::model::{load_ppn, load_tilings, save_ppn};
use ppnfifo::pipeline::{self, Options};
use ppnfifo::report::{report_delta, Report};
use ppnfifo_core::ppn::DEFAULT_BUDGET;
use ppnfifo_core::ParamAssignment;

/// Classify process network channels, split them into FIFOs after tiling,
/// and size the buffers.
#[derive(Parser)]
#[command(name = "ppnfifo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify and size every channel, before and after an optional tiling.
    Analyze {
        model: PathBuf,
        #[arg(long)]
        tiling: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tile, split channels into FIFOs and report both networks.
    Fifoize {
        model: PathBuf,
        #[arg(long)]
        tiling: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Write the transformed network here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Buffer size of the replaced channels before and after splitting.
    ReportDelta {
        /// Report whose tiled network holds the original channels.
        original: PathBuf,
        /// Report produced by `fifoize`.
        split: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Parameter values, `T=8,N=8`; declared defaults fill the rest.
    #[arg(long, default_value = "")]
    params: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Skip the enumeration cross-check.
    #[arg(long)]
    no_oracle: bool,
    /// Write per-channel traces as JSON into this directory.
    #[arg(long)]
    dump_trace: Option<PathBuf>,
    /// Enumeration budget in points or pairs.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl Common {
    fn options(&self) -> AppResult<(ParamAssignment, Options)> {
        let pa: ParamAssignment = self.params.parse()?;
        if let Some(dir) = &self.dump_trace {
            fs::create_dir_all(dir).map_err(|source| AppError::Io { path: dir.clone(), source })?;
        }
        Ok((pa, Options { budget: self.budget, oracle: !self.no_oracle, dump_trace: self.dump_trace.clone() }))
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
    }
}

fn emit(text: &str, out: Option<&Path>) -> AppResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| AppError::Io { path: path.to_path_buf(), source }),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn check_oracle(report: &Report) -> AppResult<()> {
    if report.oracle_agreement == Some(false) {
        let bad: Vec<String> = report
            .stages()
            .flat_map(|s| s.channels.iter().filter(|c| c.oracle_agrees() == Some(false)).map(move |c| format!("{}/{}", s.label, c.id)))
            .collect();
        return Err(AppError::OracleDisagreement(bad.join(", ")));
    }
    Ok(())
}

fn read_report(path: &Path) -> AppResult<Report> {
    let text = fs::read_to_string(path).map_err(|source| AppError::Io { path: path.to_path_buf(), source })?;
    Report::from_json(&text).map_err(|source| AppError::Json { path: path.to_path_buf(), source })
}

fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Analyze { model, tiling, common, out } => {
            let (pa, opts) = common.options()?;
            let ppn = load_ppn(&model)?;
            let plan = tiling.as_deref().map(load_tilings).transpose()?;
            let report = pipeline::analyze(&ppn, plan.as_deref(), &pa, &opts)?;
            emit(&render(&report, common.format), out.as_deref())?;
            check_oracle(&report)
        }
        Command::Fifoize { model, tiling, common, out } => {
            let (pa, opts) = common.options()?;
            let ppn = load_ppn(&model)?;
            let plan = load_tilings(&tiling)?;
            let (report, transformed) = pipeline::fifoize(&ppn, &plan, &pa, &opts)?;
            if let Some(path) = &out {
                save_ppn(&transformed, path)?;
            }
            emit(&render(&report, common.format), None)?;
            check_oracle(&report)
        }
        Command::ReportDelta { original, split, format, out } => {
            let row = report_delta(&read_report(&original)?, &read_report(&split)?)?;
            let text = match format {
                Format::Text => row.to_text(),
                Format::Json => serde_json::to_string_pretty(&row).expect("row serializes") + "\n",
            };
            emit(&text, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
