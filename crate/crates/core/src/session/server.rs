//! Web-socket transport for [`Session`].
//!
//! Clients connect to `/ws`. The server ticks the session at a fixed rate
//! whether or not anyone is connected, and stops when the run converges,
//! reaches its tick budget, a client sends `stop`, or the shutdown future
//! resolves.

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, watch};

use super::{ClientId, Outgoing, Recipient, Session, SessionSummary};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServerConfig {
    /// Ticks per second.
    pub tick_hz: f64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { tick_hz: 30.0 }
    }
}

struct Hub {
    session: Session,
    clients: HashMap<ClientId, mpsc::UnboundedSender<String>>,
}

impl Hub {
    fn dispatch(&self, out: Vec<Outgoing>) {
        for o in out {
            let text = o.message.to_json();
            match o.to {
                Recipient::All => {
                    for tx in self.clients.values() {
                        let _ = tx.send(text.clone());
                    }
                }
                Recipient::Client(id) => {
                    if let Some(tx) = self.clients.get(&id) {
                        let _ = tx.send(text);
                    }
                }
            }
        }
    }
}

#[derive(Clone)]
struct Shared {
    hub: Arc<Mutex<Hub>>,
    ended: watch::Receiver<bool>,
}

/// A listening socket, bound before the session starts so a busy port is
/// reported up front.
pub struct BoundServer {
    listener: TcpListener,
}

pub async fn bind(addr: SocketAddr) -> Result<BoundServer, Error> {
    let listener = TcpListener::bind(addr)
        .await
        .map_err(|e| Error::Io(format!("cannot listen on {addr}: {e}")))?;
    Ok(BoundServer { listener })
}

impl BoundServer {
    pub fn local_addr(&self) -> Result<SocketAddr, Error> {
        self.listener.local_addr().map_err(|e| Error::Io(e.to_string()))
    }

    /// Serves `session` until it ends or `shutdown` resolves.
    pub async fn serve(
        self,
        session: Session,
        config: ServerConfig,
        shutdown: impl Future<Output = ()> + Send + 'static,
    ) -> Result<SessionSummary, Error> {
        if !(config.tick_hz > 0.0 && config.tick_hz.is_finite()) {
            return Err(Error::Config("tick rate must be positive".into()));
        }
        let (ended_tx, ended_rx) = watch::channel(false);
        let hub = Arc::new(Mutex::new(Hub { session, clients: HashMap::new() }));
        let shared = Shared { hub: hub.clone(), ended: ended_rx.clone() };
        let app = Router::new()
            .route("/", get(|| async { "mas planner session; connect a web socket to /ws\n" }))
            .route("/ws", get(upgrade))
            .with_state(shared);

        let mut stop_http = ended_rx.clone();
        let http = tokio::spawn(async move {
            axum::serve(self.listener, app)
                .with_graceful_shutdown(async move {
                    let _ = stop_http.wait_for(|e| *e).await;
                })
                .await
        });

        let mut ticker = tokio::time::interval(Duration::from_secs_f64(1.0 / config.tick_hz));
        ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        tokio::pin!(shutdown);
        loop {
            tokio::select! {
                _ = ticker.tick() => {
                    let mut h = hub.lock().expect("hub lock");
                    let out = h.session.step();
                    h.dispatch(out);
                    if h.session.ended().is_some() {
                        break;
                    }
                }
                _ = &mut shutdown => {
                    let mut h = hub.lock().expect("hub lock");
                    let out = h.session.stop();
                    h.dispatch(out);
                    break;
                }
            }
        }
        let summary = {
            let mut h = hub.lock().expect("hub lock");
            // Dropping the senders lets each writer flush and close its socket.
            h.clients.clear();
            h.session.summary()
        };
        let _ = ended_tx.send(true);
        let _ = tokio::time::timeout(Duration::from_secs(2), http).await;
        Ok(summary)
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Shared>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client(socket, shared))
}

async fn client(socket: WebSocket, shared: Shared) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::unbounded_channel::<String>();
    let id = {
        let mut h = shared.hub.lock().expect("hub lock");
        if *shared.ended.borrow() {
            return;
        }
        let (id, out) = h.session.connect();
        h.clients.insert(id, tx);
        h.dispatch(out);
        id
    };

    let writer = tokio::spawn(async move {
        while let Some(text) = rx.recv().await {
            if sink.send(Message::Text(text)).await.is_err() {
                return;
            }
        }
        let _ = sink.send(Message::Close(None)).await;
    });

    let mut ended = shared.ended.clone();
    loop {
        tokio::select! {
            msg = stream.next() => match msg {
                Some(Ok(Message::Text(text))) => {
                    let mut h = shared.hub.lock().expect("hub lock");
                    let out = h.session.handle(id, &text);
                    h.dispatch(out);
                }
                Some(Ok(Message::Binary(_))) => {
                    let mut h = shared.hub.lock().expect("hub lock");
                    let out = h.session.handle(id, "<binary frame>");
                    h.dispatch(out);
                }
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => {}
            },
            _ = ended.wait_for(|e| *e) => break,
        }
    }
    {
        let mut h = shared.hub.lock().expect("hub lock");
        h.session.disconnect(id);
        h.clients.remove(&id);
    }
    let _ = writer.await;
}
