use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::net::IpAddr;
use std::path::PathBuf;
use std::sync::Arc;

use conceptflow::pipeline::{run_pipeline, PipelineConfig, Session};
use conceptflow_cli::commands::{self, ProjectArgs, SliceArgs};
use conceptflow_cli::server;

#[derive(Debug, Parser)]
#[command(name = "conceptflow", version, about = "Concept flows for timestamped, topic-labeled text")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every stage and write revision 0 under the output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Serve the latest revision under a state directory over HTTP.
    Serve {
        /// Output directory of a previous `run`.
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory of static files for the web client.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Detect slice boundaries and print the slice manifest.
    Slice(SliceArgs),
    /// Project the slices of a manifest and print the frames.
    Project(ProjectArgs),
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config } => {
            let cfg = PipelineConfig::load(&config)?;
            let state = run_pipeline(&cfg)?;
            println!(
                "{}: {} slices, {} concepts",
                state.revision_dir().display(),
                state.manifest.len(),
                state.concepts().len()
            );
        }
        Command::Serve { state, port, host, static_dir } => {
            let session = Arc::new(Session::open(&state)?);
            let app = server::router(session, static_dir.as_deref());
            let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host, port)).await.context("binding")?;
                // Tests and scripts read the bound address from this line.
                println!("listening on http://{}", listener.local_addr()?);
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
                    .context("serving")
            })?;
        }
        Command::Slice(args) => commands::emit(&commands::slice(&args)?, args.out.as_deref())?,
        Command::Project(args) => commands::emit(&commands::project(&args)?, args.out.as_deref())?,
    }
    Ok(())
}
