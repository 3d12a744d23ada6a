//! Bot-side SDK: an HTTP service that routes the four bot endpoints to a
//! [`BotHandler`], plus the reference Lina bot.

pub mod lina;

use std::io;
use std::net::{SocketAddr, TcpListener, ToSocketAddrs};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::serve::ListenerExt;
use axum::Router;
use tokio::sync::oneshot;

use solomid_core::protocol::{
    decode_chat_event, decode_entity_snapshot, encode_bot_command, encode_select_response,
    BotCommand, ChatEvent, EndpointFn, EntitySnapshot, HeroSelection, CONTENT_TYPE,
};

pub use lina::{LinaBot, LinaConfig, Phase, Transition};

/// A bot. Calls for one instance never overlap.
pub trait BotHandler: Send + 'static {
    fn on_select(&mut self) -> HeroSelection;

    /// Must return a command for every snapshot.
    fn on_update(&mut self, snapshot: &EntitySnapshot) -> BotCommand;

    fn on_chat(&mut self, _event: &ChatEvent) {}

    fn on_test(&mut self) {}
}

/// Replies NOOP to everything.
#[derive(Debug, Clone)]
pub struct NoopBot {
    pub hero: String,
}

impl BotHandler for NoopBot {
    fn on_select(&mut self) -> HeroSelection {
        HeroSelection::new(self.hero.clone())
    }

    fn on_update(&mut self, _snapshot: &EntitySnapshot) -> BotCommand {
        BotCommand::Noop
    }
}

/// A running bot service. Dropping it stops the server.
pub struct ServiceHandle<H> {
    addr: SocketAddr,
    handler: Arc<Mutex<H>>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl<H> ServiceHandle<H> {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}/", self.addr)
    }

    /// Lock the handler, e.g. to inspect bot state between matches.
    pub fn handler(&self) -> MutexGuard<'_, H> {
        self.handler.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn stop(mut self) -> io::Result<()> {
        self.shutdown_inner()
    }

    fn shutdown_inner(&mut self) -> io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(thread) => thread
                .join()
                .unwrap_or_else(|_| Err(io::Error::other("bot service thread panicked"))),
            None => Ok(()),
        }
    }
}

impl<H> Drop for ServiceHandle<H> {
    fn drop(&mut self) {
        let _ = self.shutdown_inner();
    }
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, CONTENT_TYPE)], body).into_response()
}

fn bad_request(reason: impl std::fmt::Display) -> Response {
    json(StatusCode::BAD_REQUEST, serde_json::json!({ "error": reason.to_string() }).to_string())
}

fn dispatch<H: BotHandler>(handler: &Mutex<H>, method: &Method, uri: &Uri, body: &[u8]) -> Response {
    let name = uri.path().trim_end_matches('/').rsplit('/').next().unwrap_or("");
    let Ok(function) = name.parse::<EndpointFn>() else {
        return json(StatusCode::NOT_FOUND, r#"{"error":"no such endpoint"}"#.into());
    };
    if method != Method::POST {
        return json(StatusCode::METHOD_NOT_ALLOWED, r#"{"error":"use POST"}"#.into());
    }
    let mut bot = handler.lock().unwrap_or_else(|e| e.into_inner());
    match function {
        EndpointFn::Select => {
            if let Err(e) = serde_json::from_slice::<serde_json::Value>(body) {
                return bad_request(e);
            }
            json(StatusCode::OK, encode_select_response(&bot.on_select()))
        }
        EndpointFn::Update => match decode_entity_snapshot(body) {
            Ok(snapshot) => json(StatusCode::OK, encode_bot_command(&bot.on_update(&snapshot))),
            Err(e) => bad_request(e),
        },
        EndpointFn::Chat => match decode_chat_event(body) {
            Ok(event) => {
                bot.on_chat(&event);
                json(StatusCode::OK, "{}".into())
            }
            Err(e) => bad_request(e),
        },
        EndpointFn::Test => {
            if let Err(e) = serde_json::from_slice::<serde_json::Value>(body) {
                return bad_request(e);
            }
            bot.on_test();
            json(StatusCode::OK, "{}".into())
        }
    }
}

/// Start serving `handler` on `addr` from a background thread. Endpoints are
/// matched on the last path segment, so `/select` and `/bot/select` both
/// work.
pub fn serve<H: BotHandler>(handler: H, addr: impl ToSocketAddrs) -> io::Result<ServiceHandle<H>> {
    let listener = TcpListener::bind(addr)?;
    listener.set_nonblocking(true)?;
    let local = listener.local_addr()?;
    let handler = Arc::new(Mutex::new(handler));
    let (tx, rx) = oneshot::channel::<()>();

    let shared = handler.clone();
    let app = Router::new().fallback(move |method: Method, uri: Uri, body: Bytes| {
        let shared = shared.clone();
        async move { dispatch(&shared, &method, &uri, &body) }
    });

    let runtime = tokio::runtime::Builder::new_current_thread().enable_io().build()?;
    let thread = std::thread::Builder::new()
        .name(format!("bot-service-{}", local.port()))
        .spawn(move || {
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener)?.tap_io(|tcp| {
                    let _ = tcp.set_nodelay(true);
                });
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
            })
        })?;
    Ok(ServiceHandle { addr: local, handler, shutdown: Some(tx), thread: Some(thread) })
}
