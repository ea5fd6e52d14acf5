//! Network side: one task owns the [`Session`]; connection handlers reach it
//! only through a serialized command queue and a frame broadcast.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, oneshot};

use crate::command::Reply;
use crate::session::Session;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServeOptions {
    /// Simulated seconds per wall-clock second.
    pub speed: f64,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self { speed: 1.0 }
    }
}

type Request = (String, oneshot::Sender<Reply>);

/// Handles shared by every connection.
#[derive(Debug, Clone)]
pub struct LiveState {
    commands: mpsc::Sender<Request>,
    frames: broadcast::Sender<String>,
    scenario: Arc<RwLock<String>>,
    /// Connection currently holding the pilot lock.
    pilot: Arc<Mutex<Option<u64>>>,
    next_id: Arc<AtomicU64>,
}

impl LiveState {
    /// Sends one command to the simulation and waits for its reply.
    pub async fn command(&self, text: String) -> Reply {
        let (tx, rx) = oneshot::channel();
        if self.commands.send((text, tx)).await.is_err() {
            return Reply::error("simulation stopped");
        }
        rx.await.unwrap_or_else(|_| Reply::error("simulation stopped"))
    }

    pub fn subscribe(&self) -> broadcast::Receiver<String> {
        self.frames.subscribe()
    }

    /// JSON of the scenario the running world was built from.
    pub fn scenario_json(&self) -> String {
        self.scenario.read().expect("scenario lock").clone()
    }

    fn try_pilot(&self, id: u64) -> bool {
        let mut p = self.pilot.lock().expect("pilot lock");
        match *p {
            Some(owner) => owner == id,
            None => {
                *p = Some(id);
                true
            }
        }
    }

    fn release(&self, id: u64) {
        let mut p = self.pilot.lock().expect("pilot lock");
        if *p == Some(id) {
            *p = None;
        }
    }
}

fn scenario_text(session: &Session) -> String {
    session.scenario().to_json()
}

/// Starts the simulation task stepping `session` in real time (scaled by
/// `opts.speed`). Must be called inside a tokio runtime.
pub fn spawn(mut session: Session, opts: ServeOptions) -> LiveState {
    let (cmd_tx, mut cmd_rx) = mpsc::channel::<Request>(64);
    let (frame_tx, _) = broadcast::channel(64);
    let state = LiveState {
        commands: cmd_tx,
        frames: frame_tx.clone(),
        scenario: Arc::new(RwLock::new(scenario_text(&session))),
        pilot: Arc::new(Mutex::new(None)),
        next_id: Arc::new(AtomicU64::new(0)),
    };
    let scenario = state.scenario.clone();
    let period = move |s: &Session| Duration::from_secs_f64(s.scenario().dt / opts.speed.max(1e-3));
    tokio::spawn(async move {
        let mut interval = tokio::time::interval(period(&session));
        interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            tokio::select! {
                req = cmd_rx.recv() => {
                    let Some((text, reply_to)) = req else { break };
                    let reply = session.handle_text(&text);
                    if matches!(&reply, Reply::Ack { command, .. } if command == "reset") {
                        *scenario.write().expect("scenario lock") = scenario_text(&session);
                        interval = tokio::time::interval(period(&session));
                        interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
                    }
                    let _ = reply_to.send(reply);
                }
                _ = interval.tick() => {
                    if let Some(frame) = session.tick() {
                        // no subscribers is fine
                        let _ = frame_tx.send(frame);
                    }
                }
            }
        }
    });
    state
}

pub fn router(state: LiveState) -> Router {
    Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/scenario", get(get_scenario))
        .with_state(state)
}

/// Runs the simulation and serves it on `listener` until the process ends.
pub async fn serve(listener: TcpListener, session: Session, opts: ServeOptions) -> std::io::Result<()> {
    let state = spawn(session, opts);
    axum::serve(listener, router(state)).await
}

async fn get_scenario(State(state): State<LiveState>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], state.scenario_json())
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<LiveState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client(socket, state))
}

async fn client(mut socket: WebSocket, state: LiveState) {
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let mut frames = state.subscribe();
    log::info!("client {id} connected");
    loop {
        tokio::select! {
            msg = socket.recv() => {
                let text = match msg {
                    Some(Ok(Message::Text(t))) => t.to_string(),
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let reply = if state.try_pilot(id) {
                    state.command(text).await
                } else {
                    Reply::error("another client is piloting")
                };
                if socket.send(Message::Text(reply.to_json().into())).await.is_err() {
                    break;
                }
            }
            frame = frames.recv() => match frame {
                Ok(f) => {
                    if socket.send(Message::Text(f.into())).await.is_err() {
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => log::debug!("client {id} skipped {n} frames"),
                Err(broadcast::error::RecvError::Closed) => break,
            }
        }
    }
    state.release(id);
    log::info!("client {id} disconnected");
}
