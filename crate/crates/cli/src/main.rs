use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use maslov_cli::{canonical_json, emit, parse_problem, render, run, Format, Report, RunError, RunOptions};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "maslov", version, about = "Spectral flow and Maslov index computations from problem files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// output path (a directory for `verify`); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// multiply the element count and integration steps
    #[arg(long, default_value_t = 1.0)]
    grid_scale: f64,
    /// record wall time in the report (makes output non-reproducible)
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem file
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Solve one problem with an eigenvalue sweep and emit the trace
    Trace {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// number of parameter samples
        #[arg(long, default_value_t = 41)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Solve every *.json problem in a directory
    Verify {
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
}

fn solve(file: &Path, common: &Common, trace: Option<usize>) -> Result<Report, RunError> {
    let resolved = parse_problem(file, common.grid_scale)?;
    run(&resolved, &RunOptions { trace, timing: common.timing })
}

fn fail(e: &RunError) -> ExitCode {
    eprint!("{}", canonical_json(&e.diagnostic()));
    ExitCode::from(e.exit_code())
}

fn single(file: &Path, format: Format, common: &Common, trace: Option<usize>) -> ExitCode {
    let report = match solve(file, common, trace) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let written = match &common.out {
        Some(out) => emit(&report, format, out),
        None => render(&report, format).map(|s| print!("{s}")),
    };
    if let Err(e) = written {
        return fail(&e);
    }
    if report.certification.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("certification failed: {}", file.display());
        ExitCode::from(1)
    }
}

fn verify(dir: &Path, format: Format, common: &Common) -> ExitCode {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            return fail(&RunError::Io {
                path: dir.display().to_string(),
                message: e.to_string(),
            })
        }
    };
    files.sort();
    let out_dir = common.out.clone().unwrap_or_else(|| dir.join("reports"));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail(&RunError::Io {
            path: out_dir.display().to_string(),
            message: e.to_string(),
        });
    }
    let ext = match format {
        Format::Json => "report.json",
        Format::Csv => "trace.csv",
    };
    let outcomes: Vec<(u8, String)> = files
        .par_iter()
        .map(|f| {
            let stem = f.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let res = solve(f, common, None).and_then(|r| {
                emit(&r, format, &out_dir.join(format!("{stem}.{ext}")))?;
                Ok(r)
            });
            match res {
                Ok(r) if r.certification.passed => (0, format!("PASS {stem}")),
                Ok(_) => (1, format!("FAIL {stem}: certification failed")),
                Err(e) => (e.exit_code(), format!("FAIL {stem}: {e}")),
            }
        })
        .collect();
    let mut code = 0;
    for (c, line) in &outcomes {
        println!("{line}");
        code = code.max(*c);
    }
    let passed = outcomes.iter().filter(|(c, _)| *c == 0).count();
    println!("{passed}/{} problems passed", outcomes.len());
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { file, format, common } => single(file, *format, common, None),
        Command::Trace {
            file,
            format,
            samples,
            common,
        } => single(file, *format, common, Some((*samples).max(2))),
        Command::Verify { dir, format, common } => verify(dir, *format, common),
    }
}
