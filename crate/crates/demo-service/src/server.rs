//! HTTP side: the WebSocket endpoint and the static client assets.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

use crate::protocol::ServerMessage;
use crate::session::{Connection, Recorder};

/// `/ws` speaks the record protocol; everything else is served from
/// `assets` when given.
pub fn router(recorder: Arc<Recorder>, assets: Option<PathBuf>) -> Router {
    let app = Router::new().route("/ws", get(upgrade)).with_state(recorder);
    match assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

pub async fn serve(listener: TcpListener, recorder: Arc<Recorder>, assets: Option<PathBuf>) -> std::io::Result<()> {
    axum::serve(listener, router(recorder, assets)).await
}

async fn upgrade(ws: WebSocketUpgrade, State(recorder): State<Arc<Recorder>>) -> Response {
    ws.on_upgrade(move |socket| session(socket, recorder))
}

/// Records on one socket are handled strictly in arrival order.
async fn session(mut socket: WebSocket, recorder: Arc<Recorder>) {
    let mut conn = Connection::new(&recorder);
    while let Some(Ok(msg)) = socket.recv().await {
        let reply = match msg {
            Message::Text(text) => conn.handle(text.as_str()),
            Message::Binary(_) => ServerMessage::Error {
                message: "records are text frames".into(),
            },
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        if socket.send(Message::Text(reply.encode().into())).await.is_err() {
            break;
        }
    }
}
