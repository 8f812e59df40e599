//! `mpead`: check, render, expand, run and format mpEAd diagrams.
//!
//! Exit status is 0 on success, 1 when the input has errors (diagnostics,
//! expansion or engine failures) and 2 for I/O and usage problems.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mpead_core::diag::has_errors;
use mpead_core::{expand, parse_with_diagnostics, serialize, stats, validate, Diagnostic, Diagram, FlatGraph, Severity};
use mpead_engine::kernel::Registry;
use mpead_engine::{compile, run, Emigrant, EngineError, Replace, RunConfig, Subject};
use mpead_render::{render_dot, render_svg, LayoutAlgorithm, LayoutConfig};

#[derive(Parser)]
#[command(name = "mpead", version, about = "Toolchain for multi-population EA diagrams")]
struct Cli {
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for the engine (0 = one per core). Results do not
    /// depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Svg,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Layered,
    Force,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmigrantArg {
    Best,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReplaceArg {
    Worst,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate diagrams.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Draw a diagram as SVG or DOT.
    Render {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "svg")]
        format: RenderFormat,
        /// Seed for the force layout.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "layered")]
        layout: LayoutArg,
        /// Draw the fully expanded graph instead of the abbreviated one.
        #[arg(long)]
        expand: bool,
        /// Output file (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Expand macro boxes and repeats into a flat graph.
    Expand {
        file: PathBuf,
        /// Print node and edge counts instead of the graph.
        #[arg(long)]
        stats: bool,
        /// Emit JSON instead of canonical text.
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Execute the described system and write per-generation statistics.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        generations: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Statistics file (default: standard output).
        #[arg(long)]
        stats_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: StatsFormat,
        #[arg(long, default_value_t = 5)]
        migration_interval: u32,
        #[arg(long, value_enum, default_value = "best")]
        emigrant: EmigrantArg,
        #[arg(long, value_enum, default_value = "worst")]
        replace: ReplaceArg,
        /// Bind a selector name used in the diagram to a built-in selector,
        /// as NAME=BUILTIN.
        #[arg(long = "bind-selector", value_parser = parse_binding)]
        bind_selector: Vec<(String, String)>,
    },
    /// Rewrite a diagram in canonical form.
    Fmt {
        file: PathBuf,
        /// Fail instead of printing if the file is not canonical.
        #[arg(long)]
        check: bool,
        /// Overwrite the file in place.
        #[arg(long, conflicts_with = "check")]
        write: bool,
    },
}

fn parse_binding(s: &str) -> Result<(String, String), String> {
    let (a, b) = s.split_once('=').ok_or("expected NAME=BUILTIN")?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

enum Failure {
    /// Already reported on standard error.
    Input,
    Io(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    quiet: bool,
    workers: usize,
}

impl Ctx {
    fn report(&self, diags: &[Diagnostic]) {
        let mut err = io::stderr().lock();
        for d in diags {
            if d.severity == Severity::Error || !self.quiet {
                let _ = writeln!(err, "{d}");
            }
        }
    }

    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    /// Reads, parses and validates; diagnostics are printed here.
    fn load(&self, path: &Path) -> Result<Diagram, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let (diagram, mut diags) = parse_with_diagnostics(&path.display().to_string(), &text);
        if let Some(d) = &diagram {
            diags.extend(validate(d));
        }
        self.report(&diags);
        match diagram {
            Some(d) if !has_errors(&diags) => Ok(d),
            _ => Err(Failure::Input),
        }
    }

    fn flatten(&self, d: &Diagram) -> Result<FlatGraph, Failure> {
        expand(d).map_err(|e| {
            self.report(&[e.to_diagnostic(d)]);
            Failure::Input
        })
    }
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => match io::stdout().lock().write_all(text.as_bytes()) {
            // A closed pipe (`mpead ... | head`) is not an error.
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn engine_diagnostic(e: &EngineError, flat: &FlatGraph) -> Diagnostic {
    let span = match e.subject() {
        Some(Subject::Node(id)) => flat.source_map.node(id),
        Some(Subject::Edge(id)) => flat.source_map.edge(id),
        None => None,
    };
    Diagnostic::error(e.code(), e.to_string(), span.cloned())
}

fn check(ctx: &Ctx, files: &[PathBuf]) -> Outcome {
    let mut failure = None;
    for f in files {
        match ctx.load(f) {
            Ok(_) => {}
            Err(Failure::Io(m)) => failure = Some(Failure::Io(m)),
            Err(Failure::Input) => {
                if failure.is_none() {
                    failure = Some(Failure::Input);
                }
            }
        }
    }
    failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { quiet: cli.quiet, workers: cli.workers };
    let outcome = match cli.command {
        Command::Check { files } => check(&ctx, &files),
        Command::Render { file, format, seed, layout, expand: flat, output } => (|| {
            let d = ctx.load(&file)?;
            let d = if flat { ctx.flatten(&d)?.into_inner() } else { d };
            let text = match format {
                RenderFormat::Dot => render_dot(&d),
                RenderFormat::Svg => {
                    let algorithm = match layout {
                        LayoutArg::Layered => LayoutAlgorithm::Layered,
                        LayoutArg::Force => LayoutAlgorithm::Force,
                    };
                    let cfg = LayoutConfig { seed, algorithm, ..LayoutConfig::default() };
                    render_svg(&d, &cfg).map_err(|e| {
                        eprintln!("{}: {e}", file.display());
                        Failure::Input
                    })?
                }
            };
            emit(output.as_deref(), &text)
        })(),
        Command::Expand { file, stats: counts, json, output } => (|| {
            let d = ctx.load(&file)?;
            let flat = ctx.flatten(&d)?;
            let text = if counts {
                stats(&flat).to_string()
            } else if json {
                mpead_core::expand::to_json(&flat)
            } else {
                serialize(&flat)
            };
            emit(output.as_deref(), &text)
        })(),
        Command::Run { file, generations, seed, stats_out, format, migration_interval, emigrant, replace, bind_selector } => (|| {
            let d = ctx.load(&file)?;
            let flat = ctx.flatten(&d)?;
            let mut cfg = RunConfig::new(generations, seed);
            cfg.workers = ctx.workers;
            cfg.migration.interval = migration_interval;
            cfg.migration.emigrant = match emigrant {
                EmigrantArg::Best => Emigrant::Best,
                EmigrantArg::Random => Emigrant::Random,
            };
            cfg.migration.replace = match replace {
                ReplaceArg::Worst => Replace::Worst,
                ReplaceArg::Random => Replace::Random,
            };
            cfg.selectors.extend(bind_selector);
            let fail = |e: EngineError| {
                ctx.report(&[engine_diagnostic(&e, &flat)]);
                Failure::Input
            };
            let plan = compile(&flat, &cfg, &Registry::with_builtins()).map_err(fail)?;
            let result = run(&plan).map_err(fail)?;
            let text = match format {
                StatsFormat::Csv => result.to_csv(),
                StatsFormat::Json => result.to_json(),
            };
            emit(stats_out.as_deref(), &text)?;
            if let Some(p) = &stats_out {
                ctx.note(&format!("wrote {} generations to {}", generations, p.display()));
            }
            Ok(())
        })(),
        Command::Fmt { file, check, write } => (|| {
            let d = ctx.load(&file)?;
            let text = serialize(&d);
            if check {
                let current = fs::read_to_string(&file)?;
                if current != text {
                    eprintln!("{}: not in canonical form", file.display());
                    return Err(Failure::Input);
                }
                Ok(())
            } else if write {
                emit(Some(&file), &text)
            } else {
                emit(None, &text)
            }
        })(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input) => ExitCode::from(1),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
