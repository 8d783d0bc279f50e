//! WebSocket service. Each connection gets its own session, driven by a
//! dedicated thread against 1 ms deadlines. Socket I/O never blocks that
//! thread: snapshots go through a bounded queue and are dropped when it is
//! full, replies through an unbounded one.

use std::io;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self as std_mpsc, RecvTimeoutError, TryRecvError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream, ToSocketAddrs};
use tokio::sync::mpsc;
use tokio_tungstenite::tungstenite::Message;

use gyrohaptic::session::{DeviceId, Session, SessionConfig, SessionError, SourceSpec};

use crate::config::preset;
use crate::protocol::{codes, decode_client, encode, ClientMessage, ServerMessage};

/// Snapshots buffered per connection before new ones are dropped.
pub const SNAPSHOT_QUEUE: usize = 32;

/// Kernel send buffer per connection. Fixed rather than autotuned so a slow
/// reader backs up into the snapshot queue, where stale frames are dropped,
/// instead of seconds of backlog piling up in the socket.
pub const SEND_BUFFER_BYTES: usize = 32 * 1024;

/// Falling further behind than this abandons catch-up and re-anchors the clock.
const MAX_BACKLOG: Duration = Duration::from_millis(100);

/// Per-connection counters, readable while the connection runs.
#[derive(Debug, Default)]
pub struct ConnectionStats {
    pub ticks: AtomicU64,
    pub snapshots_sent: AtomicU64,
    pub snapshots_dropped: AtomicU64,
    /// Worst delay between a tick's deadline and its start, µs.
    pub max_lateness_us: AtomicU64,
    /// Times the driver gave up catching up.
    pub resyncs: AtomicU64,
}

pub type StatsRegistry = Arc<Mutex<Vec<Arc<ConnectionStats>>>>;

pub struct Server {
    listener: TcpListener,
    config: SessionConfig,
    stats: StatsRegistry,
}

impl Server {
    /// Binds the listening socket; fails if the address is taken or the config is invalid.
    pub async fn bind<A: ToSocketAddrs>(addr: A, config: SessionConfig) -> io::Result<Self> {
        config.validate().map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
        let listener = TcpListener::bind(addr).await?;
        Ok(Self { listener, config, stats: StatsRegistry::default() })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn stats(&self) -> StatsRegistry {
        self.stats.clone()
    }

    pub async fn run(self) -> io::Result<()> {
        loop {
            let (stream, _) = self.listener.accept().await?;
            let stats = Arc::new(ConnectionStats::default());
            self.stats.lock().expect("stats lock").push(stats.clone());
            let config = self.config.clone();
            tokio::spawn(async move {
                // a failed handshake only affects that client
                let _ = serve_connection(stream, config, stats).await;
            });
        }
    }
}

async fn serve_connection(stream: TcpStream, config: SessionConfig, stats: Arc<ConnectionStats>) -> io::Result<()> {
    stream.set_nodelay(true)?;
    socket2::SockRef::from(&stream).set_send_buffer_size(SEND_BUFFER_BYTES)?;
    let ws = tokio_tungstenite::accept_async(stream).await.map_err(io::Error::other)?;
    let (mut sink, mut source) = ws.split();

    let (ctrl_tx, mut ctrl_rx) = mpsc::unbounded_channel::<ServerMessage>();
    let (snap_tx, mut snap_rx) = mpsc::channel::<ServerMessage>(SNAPSHOT_QUEUE);
    let (cmd_tx, cmd_rx) = std_mpsc::channel::<ClientMessage>();

    let _ = ctrl_tx.send(ServerMessage::Hello { config: Box::new(config.clone()) });
    let driver_ctrl = ctrl_tx.clone();
    let driver_stats = stats.clone();
    thread::Builder::new()
        .name("session-driver".into())
        .spawn(move || drive(config, cmd_rx, driver_ctrl, snap_tx, driver_stats))?;

    let writer = tokio::spawn(async move {
        loop {
            let msg = tokio::select! {
                biased;
                Some(m) = ctrl_rx.recv() => m,
                Some(m) = snap_rx.recv() => m,
                else => break,
            };
            if sink.send(Message::text(encode(&msg))).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    while let Some(frame) = source.next().await {
        let Ok(frame) = frame else { break };
        match frame {
            Message::Text(text) => match decode_client(text.as_str()) {
                Ok(msg) => {
                    if cmd_tx.send(msg).is_err() {
                        break;
                    }
                }
                Err(e) => {
                    let _ = ctrl_tx.send(e.into_message());
                }
            },
            Message::Binary(_) => {
                let _ = ctrl_tx.send(ServerMessage::Error {
                    reference: None,
                    code: codes::MALFORMED.into(),
                    message: "binary frames are not supported; send JSON text frames".into(),
                });
            }
            Message::Close(_) => break,
            _ => {}
        }
    }
    drop(cmd_tx);
    drop(ctrl_tx);
    let _ = writer.await;
    Ok(())
}

struct Driver {
    base: SessionConfig,
    session: Session,
    /// Connection tick of the current session's tick 0; keeps ticks increasing across resets.
    offset: u64,
    running: bool,
    ctrl: mpsc::UnboundedSender<ServerMessage>,
}

impl Driver {
    fn reply(&self, msg: ServerMessage) {
        let _ = self.ctrl.send(msg);
    }

    fn ack(&self, reference: u64, effective_tick: u64) {
        self.reply(ServerMessage::Ack { reference, effective_tick });
    }

    fn error(&self, reference: u64, code: &str, message: String) {
        self.reply(ServerMessage::Error { reference: Some(reference), code: code.into(), message });
    }

    fn next_tick(&self) -> u64 {
        self.offset + self.session.tick_index() + 1
    }

    fn restart(&mut self, config: SessionConfig) -> Result<(), SessionError> {
        let session = Session::new(config)?;
        self.offset += self.session.tick_index();
        self.session = session;
        Ok(())
    }

    /// Returns true when the tick clock must be re-anchored.
    fn handle(&mut self, msg: ClientMessage) -> bool {
        let reference = msg.reference();
        match msg {
            ClientMessage::SetParams { params, .. } => match self.session.set_params(params) {
                Ok(tick) => self.ack(reference, self.offset + tick),
                Err(e) => self.error(reference, codes::INVALID_PARAMS, e.to_string()),
            },
            ClientMessage::Pointer { device, position, .. } => {
                let spec = match device {
                    DeviceId::A => &self.session.config().devices.a,
                    DeviceId::B => &self.session.config().devices.b,
                };
                if *spec != SourceSpec::Interactive {
                    self.error(reference, codes::NOT_INTERACTIVE, format!("device {device:?} is not interactive"));
                } else if !position.is_finite() {
                    self.error(reference, codes::INVALID_POINTER, "position must be finite".into());
                } else {
                    self.session.pose_slot(device).store(position);
                    self.ack(reference, self.next_tick());
                }
            }
            ClientMessage::Start { .. } => {
                let was_running = self.running;
                self.running = true;
                self.ack(reference, self.next_tick());
                return !was_running;
            }
            ClientMessage::Pause { .. } => {
                self.running = false;
                self.ack(reference, self.next_tick());
            }
            ClientMessage::Reset { .. } => {
                let config = self.session.config().clone();
                match self.restart(config) {
                    Ok(()) => self.ack(reference, self.next_tick()),
                    Err(e) => self.error(reference, codes::INVALID_PARAMS, e.to_string()),
                }
                return true;
            }
            ClientMessage::LoadPreset { name, .. } => match preset(&name, &self.base) {
                None => self.error(reference, codes::UNKNOWN_PRESET, format!("no preset named {name:?}")),
                Some(config) => match self.restart(config.clone()) {
                    Ok(()) => {
                        self.ack(reference, self.next_tick());
                        self.reply(ServerMessage::Hello { config: Box::new(config) });
                        return true;
                    }
                    Err(e) => self.error(reference, codes::INVALID_PARAMS, e.to_string()),
                },
            },
        }
        false
    }
}

fn drive(
    config: SessionConfig,
    commands: std_mpsc::Receiver<ClientMessage>,
    ctrl: mpsc::UnboundedSender<ServerMessage>,
    snapshots: mpsc::Sender<ServerMessage>,
    stats: Arc<ConnectionStats>,
) {
    let period = Duration::from_secs_f64(config.dt);
    let session = Session::new(config.clone()).expect("config validated at bind");
    let mut d = Driver { base: config, session, offset: 0, running: true, ctrl };
    let mut deadline = Instant::now() + period;
    loop {
        loop {
            match commands.try_recv() {
                Ok(msg) => {
                    if d.handle(msg) {
                        deadline = Instant::now() + period;
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => return,
            }
        }
        if !d.running || d.session.is_halted() {
            match commands.recv_timeout(Duration::from_millis(50)) {
                Ok(msg) => {
                    d.handle(msg);
                    deadline = Instant::now() + period;
                }
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => return,
            }
            continue;
        }
        let now = Instant::now();
        if now < deadline {
            thread::sleep(deadline - now);
            continue;
        }
        let lateness = (now - deadline).as_micros() as u64;
        stats.max_lateness_us.fetch_max(lateness, Ordering::Relaxed);
        match d.session.tick() {
            Ok(snap) => {
                stats.ticks.fetch_add(1, Ordering::Relaxed);
                if let Some(mut snap) = snap {
                    snap.tick += d.offset;
                    match snapshots.try_send(ServerMessage::Snapshot(snap)) {
                        Ok(()) => stats.snapshots_sent.fetch_add(1, Ordering::Relaxed),
                        Err(mpsc::error::TrySendError::Full(_)) => stats.snapshots_dropped.fetch_add(1, Ordering::Relaxed),
                        Err(mpsc::error::TrySendError::Closed(_)) => return,
                    };
                }
            }
            Err(e) => {
                let tick = d.offset + d.session.tick_index() + 1;
                d.reply(ServerMessage::Error {
                    reference: None,
                    code: codes::BLOWUP.into(),
                    message: format!("{e}; send Reset or LoadPreset to continue (connection tick {tick})"),
                });
            }
        }
        deadline += period;
        if Instant::now().saturating_duration_since(deadline) > MAX_BACKLOG {
            deadline = Instant::now() + period;
            stats.resyncs.fetch_add(1, Ordering::Relaxed);
        }
    }
}
