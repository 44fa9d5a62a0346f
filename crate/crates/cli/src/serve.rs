//! Session host. Each connection gets one actor task that owns its session;
//! the socket reader and writer run as separate tasks and talk to the actor
//! only through channels.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use anyhow::Result;
use clap::ValueEnum;
use cwip_avr_core::config::EngineConfig;
use cwip_avr_core::geometry::RoomModel;
use cwip_avr_core::service::{ClientMessage, ServerMessage, Session};
use futures_util::{SinkExt, StreamExt};
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;
use tokio::time::{interval, MissedTickBehavior};
use tokio_tungstenite::tungstenite::Message;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Transport {
    /// JSON text messages over WebSocket.
    Ws,
    /// Newline-delimited JSON over plain TCP.
    Tcp,
}

struct Defaults {
    room: RoomModel,
    config: EngineConfig,
    next_id: AtomicU64,
}

pub async fn run(
    host: &str,
    port: u16,
    transport: Transport,
    room: RoomModel,
    config: EngineConfig,
) -> Result<()> {
    let listener = TcpListener::bind((host, port)).await?;
    // tests and scripts read the bound address from the first stdout line
    println!("listening on {}", listener.local_addr()?);
    let defaults = Arc::new(Defaults {
        room,
        config,
        next_id: AtomicU64::new(1),
    });
    loop {
        let (stream, peer) = listener.accept().await?;
        let defaults = defaults.clone();
        tokio::spawn(async move {
            let result = match transport {
                Transport::Tcp => serve_tcp(stream, defaults).await,
                Transport::Ws => serve_ws(stream, defaults).await,
            };
            if let Err(e) = result {
                eprintln!("{peer}: {e:#}");
            }
        });
    }
}

async fn serve_tcp(stream: TcpStream, defaults: Arc<Defaults>) -> Result<()> {
    let (read, mut write) = stream.into_split();
    let (in_tx, in_rx) = mpsc::channel::<String>(64);
    let (out_tx, mut out_rx) = mpsc::channel::<String>(64);
    let actor = tokio::spawn(session_actor(in_rx, out_tx, defaults));
    let writer = tokio::spawn(async move {
        while let Some(mut line) = out_rx.recv().await {
            line.push('\n');
            if write.write_all(line.as_bytes()).await.is_err() {
                break;
            }
        }
    });
    let mut lines = BufReader::new(read).lines();
    while let Some(line) = lines.next_line().await? {
        if in_tx.send(line).await.is_err() {
            break;
        }
    }
    drop(in_tx);
    actor.await?;
    writer.await?;
    Ok(())
}

async fn serve_ws(stream: TcpStream, defaults: Arc<Defaults>) -> Result<()> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut sink, mut source) = ws.split();
    let (in_tx, in_rx) = mpsc::channel::<String>(64);
    let (out_tx, mut out_rx) = mpsc::channel::<String>(64);
    let actor = tokio::spawn(session_actor(in_rx, out_tx, defaults));
    let writer = tokio::spawn(async move {
        while let Some(text) = out_rx.recv().await {
            if sink.send(Message::text(text)).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });
    while let Some(msg) = source.next().await {
        match msg? {
            Message::Text(text) => {
                if in_tx.send(text.to_string()).await.is_err() {
                    break;
                }
            }
            Message::Close(_) => break,
            _ => {}
        }
    }
    drop(in_tx);
    actor.await?;
    writer.await?;
    Ok(())
}

fn encode(msg: &ServerMessage) -> String {
    serde_json::to_string(msg).expect("server messages serialize")
}

fn error(message: impl Into<String>) -> String {
    encode(&ServerMessage::Error {
        message: message.into(),
    })
}

/// Owns one session: applies commands as they arrive and ticks at the
/// configured fixed rate once the client has said hello.
async fn session_actor(
    mut inbox: mpsc::Receiver<String>,
    outbox: mpsc::Sender<String>,
    defaults: Arc<Defaults>,
) {
    let mut session: Option<Session> = None;
    let mut dt = defaults.config.service.tick;
    let mut ticker = interval(Duration::from_secs_f64(dt));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    loop {
        tokio::select! {
            msg = inbox.recv() => {
                let Some(text) = msg else { break };
                let reply = match serde_json::from_str::<ClientMessage>(&text) {
                    Err(e) => Some(error(format!("bad message: {e}"))),
                    Ok(ClientMessage::Hello { .. }) if session.is_some() => {
                        Some(error("session already started"))
                    }
                    Ok(ClientMessage::Hello { room, config }) => {
                        let room = room.map_or_else(|| defaults.room.clone(), |r| *r);
                        let config = config.map_or_else(|| defaults.config.clone(), |c| *c);
                        let id = format!("s{}", defaults.next_id.fetch_add(1, Ordering::Relaxed));
                        match Session::new(id.clone(), room.clone(), config.clone()) {
                            Ok(s) => {
                                dt = config.service.tick;
                                ticker = interval(Duration::from_secs_f64(dt));
                                ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
                                session = Some(s);
                                Some(encode(&ServerMessage::Welcome { session: id, room }))
                            }
                            Err(e) => Some(error(e.to_string())),
                        }
                    }
                    Ok(ClientMessage::Input(cmd)) => match session.as_mut() {
                        Some(s) => {
                            s.apply_input(cmd);
                            None
                        }
                        None => Some(error("send hello first")),
                    },
                };
                if let Some(reply) = reply {
                    if outbox.send(reply).await.is_err() {
                        break;
                    }
                }
            }
            _ = ticker.tick(), if session.is_some() => {
                let s = session.as_mut().expect("guarded");
                let out = match s.tick(dt) {
                    Ok(frame) => encode(&ServerMessage::Frame(frame)),
                    Err(e) => error(e.to_string()),
                };
                if outbox.send(out).await.is_err() {
                    break;
                }
            }
        }
    }
}
