//! `virtlab serve | run | grade`.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use virtlab::dsl::parse;
use virtlab::grading::{evaluate_program, render_report, AssignmentSpec, ReportFormat};

use crate::{App, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "virtlab", version, about = "Virtual robotics lab: serve assignments, run and grade programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Start the HTTP service.
    Serve {
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Concurrent episodes; defaults to the number of CPUs.
        #[arg(long)]
        workers: Option<usize>,
        /// Wall-clock cap per episode, in seconds.
        #[arg(long, default_value_t = 10.0)]
        timeout: f64,
    },
    /// Simulate one program and print its report. Exits 0 iff every test passes.
    Run {
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long)]
        program: PathBuf,
        /// Write the full trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the grade report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Grade every program in a directory into one CSV.
    Grade {
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long)]
        submissions: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn init_logging() {
    let filter = tracing_subscriber::EnvFilter::try_from_env("VIRTLAB_LOG")
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let _ = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).try_init();
}

pub fn main() -> ExitCode {
    init_logging();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

pub fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Serve {
            assignments,
            data,
            port,
            host,
            workers,
            timeout,
        } => {
            let mut config = ServiceConfig::new(assignments, data);
            if let Some(w) = workers {
                config.workers = w;
            }
            config.run_timeout = std::time::Duration::from_secs_f64(timeout);
            serve(config, SocketAddr::new(host, port))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            assignment,
            program,
            trace,
            report,
        } => run(&assignment, &program, trace.as_deref(), report.as_deref()),
        Command::Grade {
            assignment,
            submissions,
            out,
        } => {
            let rows = grade_dir(&assignment, &submissions, &out)?;
            eprintln!("graded {rows} programs into {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn serve(config: ServiceConfig, addr: SocketAddr) -> Result<()> {
    let app = App::new(&config).with_context(|| format!("reading {}", config.assignments_dir.display()))?;
    tracing::info!(assignments = app.assignment_ids().count(), data = %config.data_dir.display(), "starting");
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        tracing::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app.router())
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn load_assignment(path: &Path) -> Result<AssignmentSpec> {
    AssignmentSpec::load(path).with_context(|| format!("loading {}", path.display()))
}

fn run(assignment: &Path, program: &Path, trace_out: Option<&Path>, report_out: Option<&Path>) -> Result<ExitCode> {
    let assignment = load_assignment(assignment)?;
    let source = std::fs::read_to_string(program).with_context(|| format!("reading {}", program.display()))?;
    let program = match parse(&source) {
        Ok(p) => p,
        Err(errors) => {
            for e in &errors.0 {
                eprintln!("{}:{e}", program.display());
            }
            return Ok(ExitCode::from(1));
        }
    };
    let eval = evaluate_program(&assignment, &program)?;
    if let Some(p) = trace_out {
        std::fs::write(p, eval.trace.to_json_pretty()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = report_out {
        std::fs::write(p, render_report(&eval.report, ReportFormat::Json))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    println!("{}", String::from_utf8_lossy(&render_report(&eval.report, ReportFormat::Text)));
    Ok(if eval.report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Column names for the per-test flags; repeated kinds get `#2`, `#3`, ...
fn test_columns(assignment: &AssignmentSpec) -> Vec<String> {
    let mut seen = std::collections::HashMap::new();
    assignment
        .tests
        .iter()
        .map(|t| {
            let name = t.kind().name();
            let n = seen.entry(name).or_insert(0);
            *n += 1;
            if *n == 1 {
                name.to_string()
            } else {
                format!("{name}#{n}")
            }
        })
        .collect()
}

/// Grades every regular file in `dir` (sorted by name) and writes
/// `file,score,<test>...` rows. Unparsable programs score 0 with all flags 0.
pub fn grade_dir(assignment: &Path, dir: &Path, out: &Path) -> Result<usize> {
    let assignment = load_assignment(assignment)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();

    let mut w = csv::Writer::from_path(out).with_context(|| format!("creating {}", out.display()))?;
    let mut header = vec!["file".to_string(), "score".to_string()];
    header.extend(test_columns(&assignment));
    w.write_record(&header)?;

    for path in &files {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let source = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut row = vec![name.clone()];
        match parse(&source) {
            Ok(program) => {
                let eval = evaluate_program(&assignment, &program)?;
                row.push(format!("{:.2}", eval.report.rounded_score()));
                row.extend(eval.results.iter().map(|r| if r.passed { "1" } else { "0" }.to_string()));
            }
            Err(e) => {
                tracing::warn!(file = %name, "does not parse: {}", e.first().map(ToString::to_string).unwrap_or_default());
                row.push(format!("{:.2}", 0.0));
                row.extend(assignment.tests.iter().map(|_| "0".to_string()));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(files.len())
}
