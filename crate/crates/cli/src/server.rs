//! TCP transport for the session protocol: one JSON object per line in,
//! one per line out, in order, per connection.

use std::net::SocketAddr;
use std::sync::Arc;

use anyhow::{Context, Result};
use scaffold_core::protocol::Service;
use scaffold_core::Config;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};

pub fn run_blocking(config: Config, bind: &str) -> Result<()> {
    let service = Arc::new(Service::new(config)?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = TcpListener::bind(bind)
            .await
            .with_context(|| format!("binding {bind}"))?;
        eprintln!("listening on {}", listener.local_addr()?);
        tokio::select! {
            r = serve(listener, service) => r,
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    })
}

/// Accepts connections until the listener fails.
pub async fn serve(listener: TcpListener, service: Arc<Service>) -> Result<()> {
    loop {
        let (stream, peer) = listener.accept().await?;
        let service = Arc::clone(&service);
        tokio::spawn(async move {
            if let Err(e) = connection(stream, service).await {
                eprintln!("{peer}: {e}");
            }
        });
    }
}

/// Binds an ephemeral port and serves in the background.
pub async fn spawn(config: Config, bind: &str) -> Result<SocketAddr> {
    let service = Arc::new(Service::new(config)?);
    let listener = TcpListener::bind(bind).await?;
    let addr = listener.local_addr()?;
    tokio::spawn(serve(listener, service));
    Ok(addr)
}

async fn connection(stream: TcpStream, service: Arc<Service>) -> Result<()> {
    let (read, mut write) = stream.into_split();
    let mut reader = BufReader::new(read);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf).await? == 0 {
            return Ok(());
        }
        let line = String::from_utf8_lossy(&buf);
        let line = line.trim_end_matches(['\n', '\r']);
        let service = Arc::clone(&service);
        let line = line.to_string();
        let mut reply = tokio::task::spawn_blocking(move || service.handle_line(&line)).await?;
        reply.push('\n');
        write.write_all(reply.as_bytes()).await?;
    }
}
