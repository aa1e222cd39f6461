use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::Parser;
use rfd_recorder::server::serve;
use rfd_recorder::Recorder;

#[derive(Parser)]
#[command(name = "rfd-recorder", version, about = "Serve the demonstration recorder")]
struct Cli {
    #[arg(long, env = "RFD_RECORDER_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "RFD_RECORDER_HOST", default_value = "127.0.0.1")]
    host: IpAddr,
    /// Where saved demonstrations are written.
    #[arg(long, env = "RFD_DEMOS_DIR", default_value = "demos")]
    demos_dir: PathBuf,
    /// Built client assets to serve at `/`.
    #[arg(long, env = "RFD_RECORDER_ASSETS")]
    assets: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let addr = SocketAddr::new(cli.host, cli.port);
    let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    eprintln!("recorder listening on ws://{}/ws, saving to {}", listener.local_addr()?, cli.demos_dir.display());
    serve(listener, Arc::new(Recorder::new(cli.demos_dir)), cli.assets).await?;
    Ok(())
}
