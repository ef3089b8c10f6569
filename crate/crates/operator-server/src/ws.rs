//! WebSocket transport for the gateway. One thread per UI connection; each
//! owns a hub session and never touches simulation state.

use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use log::{debug, info, warn};
use tungstenite::{Message, WebSocket};

use crate::error::ServerError;
use crate::gateway::{error_message, GatewayHub, OperatorInput};

/// How long a connection thread waits for input before flushing frames.
const POLL: Duration = Duration::from_millis(10);

pub struct WsServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
}

impl WsServer {
    /// Binds `addr` and starts accepting UI connections for `hub`.
    pub fn bind(addr: impl std::net::ToSocketAddrs, hub: Arc<GatewayHub>) -> Result<Self, ServerError> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let accept = std::thread::Builder::new().name("gateway-accept".into()).spawn(move || {
            for conn in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                match conn {
                    Ok(stream) => {
                        let hub = hub.clone();
                        let spawned = std::thread::Builder::new()
                            .name("gateway-session".into())
                            .spawn(move || serve_connection(stream, &hub));
                        if let Err(e) = spawned {
                            warn!("cannot start session thread: {e}");
                        }
                    }
                    Err(e) => warn!("accept failed: {e}"),
                }
            }
        })?;
        info!("gateway listening on ws://{addr}");
        Ok(Self {
            addr,
            stop,
            accept: Some(accept),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting new connections. Open sessions end when their peer
    /// disconnects.
    pub fn shutdown(mut self) {
        self.stop_accepting();
    }

    fn stop_accepting(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // wake the blocking accept
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

impl Drop for WsServer {
    fn drop(&mut self) {
        if self.accept.is_some() {
            self.stop_accepting();
        }
    }
}

fn is_timeout(e: &tungstenite::Error) -> bool {
    matches!(e, tungstenite::Error::Io(io) if matches!(io.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut))
}

fn serve_connection(stream: TcpStream, hub: &GatewayHub) {
    let peer = stream.peer_addr().ok();
    let mut ws = match tungstenite::accept(stream) {
        Ok(ws) => ws,
        Err(e) => {
            debug!("handshake with {peer:?} failed: {e}");
            return;
        }
    };
    if let Err(e) = ws.get_ref().set_read_timeout(Some(POLL)) {
        warn!("cannot set read timeout: {e}");
        return;
    }
    let session = hub.connect();
    debug!("UI session {} from {peer:?}", session.id);
    if let Err(e) = pump(&mut ws, &session) {
        debug!("UI session {} closed: {e}", session.id);
    }
}

fn pump(ws: &mut WebSocket<TcpStream>, session: &crate::gateway::Session) -> Result<(), Box<tungstenite::Error>> {
    loop {
        while let Some(frame) = session.try_next() {
            ws.send(Message::Text(frame.to_string()))?;
        }
        match ws.read() {
            Ok(Message::Text(text)) => match OperatorInput::parse(&text) {
                Ok(input) => session.submit(input),
                Err(e) => ws.send(Message::Text(error_message(&e)))?,
            },
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(e) if is_timeout(&e) => {}
            Err(e) => return Err(Box::new(e)),
        }
    }
}
