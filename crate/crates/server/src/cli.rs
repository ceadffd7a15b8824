//! Command line front end. `main.rs` only parses and calls [`run`].

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use etable_core::translate::{translate_dir, RelationManifest, TranslateOptions};
use etable_core::{emit_sql, QueryPattern};

use crate::config::{ServerConfig, DEFAULT_PORT, PAGE_SIZE_VAR, PORT_VAR};
use crate::script::{parse_script, run_script, ScriptFormat};
use crate::{load_graph, serve};

#[derive(Debug, Parser)]
#[command(name = "etable", version, about = "Explore relational data as typed graphs and enriched tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Translate a relation manifest and its CSV files into a graph file.
    Translate {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory holding one `<relation>.csv` per relation.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fail on dangling references, bad values and duplicate keys.
        #[arg(long)]
        strict: bool,
        /// Write the translation report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Serve the HTTP API over a graph file.
    Serve {
        #[arg(long)]
        tgdb: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, env = PORT_VAR, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = PAGE_SIZE_VAR)]
        page_size: Option<usize>,
        /// Seconds a session may sit idle before it is dropped; 0 keeps it.
        #[arg(long, default_value_t = 1800)]
        idle_timeout: u64,
        /// Directory of static files served for non-API paths.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Replay a JSON array of action envelopes and print the final table.
    Script {
        #[arg(long)]
        tgdb: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(long, default_value = "json")]
        format: ScriptFormat,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the SQL statement a pattern stands for.
    Sql {
        /// JSON query pattern.
        #[arg(long)]
        pattern: PathBuf,
        /// Graph file whose schema the pattern refers to.
        #[arg(long)]
        tgdb: PathBuf,
    },
}

pub type CliResult = Result<(), Box<dyn std::error::Error + Send + Sync>>;

fn read(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(out: Option<&PathBuf>, text: &str) -> CliResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()).into()),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", text.trim_end()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Translate { manifest, data, out, strict, report } => {
            let m = RelationManifest::load(&manifest)?;
            let t = translate_dir(&m, &data, TranslateOptions { strict })?;
            t.graph.save(&out)?;
            if let Some(path) = report {
                fs::write(&path, serde_json::to_string_pretty(&t.report)?)?;
            }
            eprintln!(
                "wrote {}: {} node types, {} edge types, {} nodes, {} edges{}",
                out.display(),
                t.graph.schema().node_types().len(),
                t.graph.schema().edge_types().len(),
                t.report.node_count,
                t.report.edge_count,
                if t.report.is_clean() { "" } else { " (report has findings)" }
            );
            Ok(())
        }
        Command::Serve { tgdb, host, port, page_size, idle_timeout, static_dir } => {
            let mut config = ServerConfig::new(tgdb);
            config.addr = SocketAddr::new(host, port);
            if let Some(size) = page_size {
                config.page_size = size;
            }
            config.idle_timeout = Duration::from_secs(idle_timeout);
            config.static_dir = static_dir;
            config.validate()?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(config))
        }
        Command::Script { tgdb, script, format, out } => {
            let graph = Arc::new(load_graph(&tgdb)?);
            let actions = parse_script(&read(&script)?)?;
            let text = run_script(graph, &actions, format)?;
            emit(out.as_ref(), &text)
        }
        Command::Sql { pattern, tgdb } => {
            let graph = load_graph(&tgdb)?;
            let p: QueryPattern = serde_json::from_str(&read(&pattern)?)?;
            let sql = emit_sql(&p, graph.schema())?;
            emit(None, &sql.statement)
        }
    }
}
