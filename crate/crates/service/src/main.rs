//! `causalkit-server`: serves the REST routes.
//!
//! Environment: `CAUSALKIT_ADDR` (default `127.0.0.1:8080`), `CAUSALKIT_DATA`
//! (default `./causalkit-data`).

use std::path::PathBuf;

use causalkit_service::{app, AppState};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt().with_max_level(tracing::Level::INFO).init();
    let addr = std::env::var("CAUSALKIT_ADDR").unwrap_or_else(|_| "127.0.0.1:8080".into());
    let data = PathBuf::from(std::env::var("CAUSALKIT_DATA").unwrap_or_else(|_| "causalkit-data".into()));
    let state = AppState::open(&data)?;
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    tracing::info!(%addr, data = %data.display(), "listening");
    axum::serve(listener, app(state)).await?;
    Ok(())
}
