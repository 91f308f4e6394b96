use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nlta::diagnostics::{render, Format};
use nlta::frontend::{parse_description_sentence, parse_specification_sentence, Sentence};
use nlta::pipeline::{compile, Options, Output};

#[derive(Parser)]
#[command(name = "nlta", version, about = "Compile structured English into UPPAAL timed automata")]
struct Cli {
    /// Diagnostic format on stderr.
    #[arg(long, value_enum, default_value_t = DiagFormat::Human, global = true)]
    format: DiagFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagFormat {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build a UPPAAL model and, optionally, a query file.
    Build {
        #[arg(long)]
        desc: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(short = 'q', long = "queries")]
        queries: Option<PathBuf>,
        /// Keep one clock per time condition.
        #[arg(long)]
        no_reduce: bool,
        /// Print the final network to stdout.
        #[arg(long)]
        dump_ir: bool,
        /// Cross-check clock reduction on runs sampled with this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report diagnostics without writing anything.
    Check {
        #[arg(long)]
        desc: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Show how a single sentence parses.
    Explain { sentence: String },
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn explain(kind: &str, rule: &str, ast: &dyn std::fmt::Debug, canonical: &dyn std::fmt::Display) {
    emit(&format!("{kind}: {rule}\ncanonical: {canonical}\n{ast:#?}\n"));
}

fn read(path: &Path) -> Result<String, ExitCode> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn write(path: &Path, contents: &str) -> Result<(), ExitCode> {
    fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn report(out: &Output, format: DiagFormat) {
    let format = match format {
        DiagFormat::Human => Format::Human,
        DiagFormat::Json => Format::Structured,
    };
    let text = render(&out.diagnostics, format);
    if !text.is_empty() {
        eprint!("{text}");
        if !text.ends_with('\n') {
            eprintln!();
        }
    }
}

fn load(desc: &Path, spec: Option<&PathBuf>) -> Result<(String, Option<String>), ExitCode> {
    let d = read(desc)?;
    let s = spec.map(|p| read(p)).transpose()?;
    Ok((d, s))
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Build { desc, spec, output, queries, no_reduce, dump_ir, seed } => {
            let (d, s) = load(&desc, spec.as_ref())?;
            let options = Options { reduce: !no_reduce, seed, ..Options::new() };
            let out = compile(&d, s.as_deref(), &options);
            report(&out, cli.format);
            if out.has_errors() {
                return Ok(ExitCode::from(1));
            }
            if dump_ir {
                emit(&out.network.to_string());
            }
            write(&output, out.xml.as_deref().unwrap_or_default())?;
            if let Some(q) = queries {
                write(&q, out.query_file.as_deref().unwrap_or_default())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { desc, spec } => {
            let (d, s) = load(&desc, spec.as_ref())?;
            let out = compile(&d, s.as_deref(), &Options::new());
            report(&out, cli.format);
            Ok(if out.has_errors() { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Explain { sentence } => {
            let sentence = Sentence::detached(sentence.trim());
            match parse_description_sentence(&sentence) {
                Ok(ast) => {
                    explain("description", ast.rule(), &ast, &ast);
                    Ok(ExitCode::SUCCESS)
                }
                Err(desc_err) => match parse_specification_sentence(&sentence) {
                    Ok(ast) => {
                        explain("specification", ast.rule(), &ast, &ast);
                        Ok(ExitCode::SUCCESS)
                    }
                    Err(spec_err) => {
                        let out = Output { diagnostics: vec![desc_err, spec_err], ..Output::default() };
                        report(&out, cli.format);
                        Ok(ExitCode::from(1))
                    }
                },
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    run(cli).unwrap_or_else(|code| code)
}
