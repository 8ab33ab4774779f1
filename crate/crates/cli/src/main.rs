mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Grammar-fragment workbench: check grammars, compose languages, parse
/// documents, dump editor features, run actions and serve editors.
#[derive(Parser, Debug)]
#[command(name = "fragmentc", version)]
pub struct Cli {
    /// Root directory of grammar packages; repeatable. Falls back to
    /// FRAGMENTC_GRAMMAR_PATH, then the directory of the config or grammar.
    #[arg(long = "grammar-path", global = true, value_name = "DIR")]
    pub grammar_path: Vec<PathBuf>,
    /// Write the command's main output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Append a debug log (including served requests) to this file.
    #[arg(long = "log-file", global = true, value_name = "FILE")]
    pub log_file: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate grammar files (.mc) or tool configs (.mctool).
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Compose a tool config and summarize the language.
    Compose { tool: PathBuf },
    /// Parse a document and print its syntax tree.
    Parse { tool: PathBuf, document: PathBuf },
    /// Dump highlights, folds, outline and diagnostics as JSON.
    Features { tool: PathBuf, document: PathBuf },
    /// Pretty-print a document.
    Format {
        tool: PathBuf,
        document: PathBuf,
        /// Rewrite the document in place.
        #[arg(long)]
        write: bool,
    },
    /// Run an editor or navigator action headlessly and write its files.
    Action {
        tool: PathBuf,
        action: String,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Emit a bundle manifest; each TOOL may name extensions as TOOL=ext,ext.
    Bundle {
        #[arg(required = true, value_name = "TOOL[=EXT,...]")]
        tools: Vec<String>,
    },
    /// Serve a tool config or a bundle manifest (.json) over stdio.
    Serve {
        target: PathBuf,
        /// File extensions served for a single tool config; default: all.
        #[arg(long = "ext")]
        extensions: Vec<String>,
    },
}

fn init_logging(cli: &Cli) -> Result<(), String> {
    let mut builder = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if let Some(path) = &cli.log_file {
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| format!("cannot open log file {}: {e}", path.display()))?;
        builder.filter_level(log::LevelFilter::Debug).target(env_logger::Target::Pipe(Box::new(file)));
    }
    builder.try_init().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_logging(&cli) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match commands::run(&cli) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
