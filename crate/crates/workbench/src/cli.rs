//! The `signwriting` command line.
//!
//! Exit codes: 0 success, 1 domain failure (invalid sign, unreadable input,
//! failed match), 2 usage error.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use signwriting_core::closure::closure_report;
use signwriting_core::document::{validate, SignDocument};
use signwriting_core::policy::{Role, Viewer};
use signwriting_core::recognition::{FormIndex, StrokeSketch};
use signwriting_core::registry::Registry;
use signwriting_core::search::corpus_stats;
use signwriting_core::store::Store;

use crate::service::{self, ServiceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "signwriting", version, about = "SignWriting composition workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Records,
    Json,
}

#[derive(Debug, clap::Args)]
struct ManifestArg {
    /// Glyph registry manifest.
    #[arg(long, env = "SIGNWRITING_MANIFEST")]
    manifest: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a sign document; prints diagnostics, silent when clean.
    Validate {
        sign: PathBuf,
        #[command(flatten)]
        manifest: ManifestArg,
        /// Store holding the user glyphs the sign refers to.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, default_value = "user", value_parser = parse_role)]
        role: Role,
        #[arg(long)]
        session: Option<String>,
    },
    /// Complete the motion lattice and report the synthesized glyphs.
    Closure {
        #[command(flatten)]
        manifest: ManifestArg,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Glyph frequencies by function class over a sign store.
    Stats {
        #[arg(long)]
        store: PathBuf,
        #[command(flatten)]
        manifest: ManifestArg,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Render a sign document to SVG.
    Render {
        sign: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[command(flatten)]
        manifest: ManifestArg,
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Rank registry glyphs against a freehand sketch.
    Recognize {
        sketch: PathBuf,
        #[arg(short, default_value_t = service::DEFAULT_MATCHES)]
        k: usize,
        #[command(flatten)]
        manifest: ManifestArg,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        manifest: ManifestArg,
        /// Store directory; kept in memory when absent.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Acceptability rule configuration.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

fn parse_role(s: &str) -> Result<Role, String> {
    s.parse()
}

/// A failure already worded for the user.
struct Failure(String);

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn registry(arg: &ManifestArg) -> Result<Registry, Failure> {
    Registry::load(&arg.manifest).map_err(|e| Failure(format!("{}: {e}", arg.manifest.display())))
}

fn sign(path: &Path) -> Result<SignDocument, Failure> {
    SignDocument::from_xml(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn store(path: Option<&Path>) -> Result<Store, Failure> {
    match path {
        Some(p) => Store::open(p).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => Ok(Store::in_memory()),
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_FAILURE
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Validate { sign: path, manifest, store: dir, role, session } => {
            let registry = registry(&manifest)?;
            let doc = sign(&path)?;
            let store = store(dir.as_deref())?;
            let diagnostics = validate(&doc, &registry, &store, &Viewer { role, session });
            for d in &diagnostics {
                writeln!(out, "{}: {d}", path.display())?;
            }
            Ok(if diagnostics.is_empty() { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Closure { manifest, format } => {
            let report = closure_report(&registry(&manifest)?);
            let text = match format {
                Format::Text => report.render_text(),
                Format::Records => report.render_records(),
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
            };
            out.write_all(text.as_bytes())?;
            Ok(if report.failures.is_empty() { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Stats { store: dir, manifest, format } => {
            let registry = registry(&manifest)?;
            if !dir.is_dir() {
                return Err(Failure(format!("{}: no such store", dir.display())));
            }
            let stats = corpus_stats(&store(Some(&dir))?, &registry);
            let text = match format {
                Format::Text => stats.render_text(),
                Format::Records => stats.render_records(),
                Format::Json => serde_json::to_string_pretty(&stats)? + "\n",
            };
            out.write_all(text.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Render { sign: path, output, scale, manifest, store: dir } => {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Failure("scale must be positive".into()));
            }
            let registry = registry(&manifest)?;
            let store = store(dir.as_deref())?;
            let svg = sign(&path)?.render_svg(&(&registry, &store), scale)?;
            std::fs::write(&output, svg).map_err(|e| Failure(format!("{}: {e}", output.display())))?;
            Ok(EXIT_OK)
        }
        Command::Recognize { sketch, k, manifest } => {
            let index = FormIndex::build(&registry(&manifest)?);
            let parsed = StrokeSketch::parse(&read(&sketch)?).map_err(|e| Failure(format!("{}: {e}", sketch.display())))?;
            for (rank, m) in index.match_sketch(&parsed, k)?.iter().enumerate() {
                writeln!(out, "{}\t{}\t{:.6}", rank + 1, m.id, m.distance)?;
            }
            Ok(EXIT_OK)
        }
        Command::Serve { manifest, store, rules, bind } => {
            let config = ServiceConfig { manifest: manifest.manifest, store, rules, bind };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(service::serve(config))?;
            Ok(EXIT_OK)
        }
    }
}
