mod commands;
mod tokens;

use std::io::{self, Read, Write};
use std::net::{SocketAddr, ToSocketAddrs};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};
use vanilla_server::{ServerConfig, DEFAULT_MAX_SESSIONS, DEFAULT_TCP_LISTEN, TABLES_DIR_ENV};

use commands::{TableSource, EXIT_INVALID, EXIT_IO, EXIT_OK};

const SHUTDOWN_GRACE: Duration = Duration::from_secs(5);

#[derive(Debug, Parser)]
#[command(
    name = "vanilla",
    version,
    about = "Table-driven input method engine and text-service server"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a .cin table; diagnostics go to stderr.
    Validate { table: PathBuf },
    /// Type a key-token script and print the resulting text.
    Convert {
        #[arg(required_unless_present = "db")]
        table: Option<PathBuf>,
        /// Use an imported database instead of a .cin file.
        #[arg(long, conflicts_with = "table")]
        db: Option<PathBuf>,
        /// Token script to read; standard input when absent.
        #[arg(long, short)]
        keys: Option<PathBuf>,
        /// Also print one line per commit, passthrough and beep to stderr.
        #[arg(long)]
        record_events: bool,
    },
    /// Write a .cin table into an SQLite database.
    Import { table: PathBuf, db: PathBuf },
    /// Type interactively, one token per line; `:q` quits.
    Repl {
        #[arg(required_unless_present = "db")]
        table: Option<PathBuf>,
        #[arg(long, conflicts_with = "table")]
        db: Option<PathBuf>,
    },
    /// Run the text-service server.
    Serve {
        #[arg(long, default_value = DEFAULT_TCP_LISTEN, value_parser = parse_addr, value_name = "HOST:PORT")]
        tcp: SocketAddr,
        /// Also accept WebSocket clients at /ws on this address.
        #[arg(long, value_parser = parse_addr, value_name = "HOST:PORT")]
        ws: Option<SocketAddr>,
        #[arg(long, env = TABLES_DIR_ENV, default_value = "tables")]
        tables: PathBuf,
        /// Module used when a client opens a session without naming one.
        #[arg(long)]
        default_module: Option<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_SESSIONS)]
        max_sessions: usize,
    },
}

fn parse_addr(s: &str) -> Result<SocketAddr, String> {
    s.to_socket_addrs()
        .map_err(|e| format!("{s:?} is not HOST:PORT ({e})"))?
        .next()
        .ok_or_else(|| format!("{s:?} resolves to no address"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return ExitCode::SUCCESS;
            }
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", usage());
            }
            return ExitCode::from(EXIT_INVALID);
        }
    };
    ExitCode::from(run(cli.command))
}

/// Usage of the subcommand named on the command line, if any.
fn usage() -> String {
    let mut cli = Cli::command();
    cli.build();
    let name = std::env::args().nth(1).unwrap_or_default();
    match cli.find_subcommand_mut(&name) {
        Some(sub) => sub.render_usage().to_string(),
        None => cli.render_usage().to_string(),
    }
}

fn table_source<'a>(table: &'a Option<PathBuf>, db: &'a Option<PathBuf>) -> TableSource<'a> {
    match (table, db) {
        (_, Some(db)) => TableSource::Db(db),
        (Some(table), None) => TableSource::Cin(table),
        (None, None) => unreachable!("clap requires one of them"),
    }
}

fn run(command: Command) -> u8 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    let result = match command {
        Command::Validate { table } => Ok(commands::validate_cmd(&table, &mut err)),
        Command::Import { table, db } => Ok(commands::import_cmd(&table, &db, &mut out, &mut err)),
        Command::Convert {
            table,
            db,
            keys,
            record_events,
        } => {
            let script = match &keys {
                Some(path) => std::fs::read_to_string(path),
                None => {
                    let mut s = String::new();
                    io::stdin().read_to_string(&mut s).map(|_| s)
                }
            };
            let script = match script {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "cannot read key tokens: {e}");
                    return EXIT_IO;
                }
            };
            match commands::open_session(table_source(&table, &db), &mut err) {
                Ok(mut session) => {
                    commands::convert(&mut session, &script, record_events, &mut out, &mut err)
                }
                Err(code) => Ok(code),
            }
        }
        Command::Repl { table, db } => match commands::open_session(table_source(&table, &db), &mut err) {
            Ok(mut session) => commands::repl(&mut session, &mut io::stdin().lock(), &mut out, &mut err),
            Err(code) => Ok(code),
        },
        Command::Serve {
            tcp,
            ws,
            tables,
            default_module,
            max_sessions,
        } => {
            drop((out, err));
            let mut config = ServerConfig::new(tcp, tables);
            config.ws_listen = ws;
            config.default_module = default_module;
            config.max_sessions_per_conn = max_sessions;
            return serve(config);
        }
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(io::stderr(), "{e}");
        EXIT_IO
    })
}

fn serve(config: ServerConfig) -> u8 {
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("cannot start runtime: {e}");
            return EXIT_IO;
        }
    };
    runtime.block_on(async {
        match vanilla_server::serve(config).await {
            Ok(server) => {
                // scripts started with port 0 read the bound addresses here
                println!("tcp {}", server.tcp_addr());
                if let Some(ws) = server.ws_addr() {
                    println!("ws {ws}");
                }
                let _ = io::stdout().flush();
                server.run_until_ctrl_c(SHUTDOWN_GRACE).await;
                EXIT_OK
            }
            Err(e) => {
                tracing::error!("{e}");
                EXIT_INVALID
            }
        }
    })
}
