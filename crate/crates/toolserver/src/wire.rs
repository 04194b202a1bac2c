//! Newline-delimited JSON transport over TCP or stdio.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use randcrypto_core::transcript::ToolCall;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::server::{ToolError, ToolOutput, ToolServer};

/// Longest request line accepted.
pub const MAX_LINE_BYTES: usize = 4 * 1024 * 1024;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Request {
    pub id: String,
    pub session: String,
    pub name: String,
    #[serde(default = "empty_object")]
    pub inputs: Value,
}

fn empty_object() -> Value {
    json!({})
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Response {
    pub id: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
}

fn error_value(e: &ToolError) -> Value {
    let mut v = serde_json::to_value(e).unwrap_or_else(|_| json!({}));
    if let Value::Object(map) = &mut v {
        map.insert("message".into(), Value::String(e.to_string()));
        map.insert("restartable".into(), Value::Bool(e.restartable()));
    }
    v
}

impl Response {
    fn from_result(id: String, r: Result<Value, ToolError>) -> Response {
        match r {
            Ok(v) => Response { id, ok: true, result: Some(v), error: None },
            Err(e) => Response { id, ok: false, result: None, error: Some(error_value(&e)) },
        }
    }
}

/// Handles one request line. Malformed JSON yields an error response with
/// whatever id could be recovered.
pub fn handle_line(server: &ToolServer, line: &str) -> Response {
    match serde_json::from_str::<Request>(line) {
        Ok(req) => {
            let r = server.handle_named(&req.session, &req.name, &req.inputs);
            Response::from_result(req.id, r)
        }
        Err(e) => {
            let id = serde_json::from_str::<Value>(line)
                .ok()
                .and_then(|v| v.get("id").and_then(Value::as_str).map(str::to_string))
                .unwrap_or_default();
            Response::from_result(id, Err(ToolError::InvalidRequest { message: e.to_string() }))
        }
    }
}

/// Serves requests from `input` until EOF, one response line per request line.
pub fn serve_stream(server: &ToolServer, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    let mut input = input.take(MAX_LINE_BYTES as u64);
    let mut line = String::new();
    loop {
        line.clear();
        input.set_limit(MAX_LINE_BYTES as u64);
        if input.read_line(&mut line)? == 0 {
            return Ok(());
        }
        if !line.ends_with('\n') && line.len() >= MAX_LINE_BYTES {
            let resp = Response::from_result(String::new(), Err(ToolError::InvalidRequest { message: "request line too long".into() }));
            writeln!(output, "{}", serde_json::to_string(&resp)?)?;
            return Ok(());
        }
        if line.trim().is_empty() {
            continue;
        }
        let resp = handle_line(server, line.trim_end());
        writeln!(output, "{}", serde_json::to_string(&resp)?)?;
        output.flush()?;
    }
}

pub fn serve_stdio(server: &ToolServer) -> io::Result<()> {
    serve_stream(server, io::stdin().lock(), io::stdout().lock())
}

/// Accepts connections forever, one thread per connection.
pub fn serve_tcp(server: Arc<ToolServer>, listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        };
        let server = server.clone();
        thread::spawn(move || {
            let reader = match stream.try_clone() {
                Ok(s) => BufReader::new(s),
                Err(_) => return,
            };
            let _ = serve_stream(&server, reader, stream);
        });
    }
    Ok(())
}

/// Binds `addr` and serves on a background thread; returns the bound address.
pub fn spawn_tcp(server: Arc<ToolServer>, addr: impl ToSocketAddrs) -> io::Result<std::net::SocketAddr> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    thread::Builder::new().name("toolserver-accept".into()).spawn(move || serve_tcp(server, listener))?;
    Ok(local)
}

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("tool server i/o: {0}")]
    Io(#[from] io::Error),
    #[error("tool server protocol: {0}")]
    Protocol(String),
}

/// Anything that can carry a tool call to a session.
pub trait ToolDispatch: Send + Sync {
    fn dispatch(&self, session: &str, call: &ToolCall) -> Result<Result<ToolOutput, ToolError>, TransportError>;
    fn close(&self, session: &str) -> Result<(), TransportError>;
}

impl ToolDispatch for ToolServer {
    fn dispatch(&self, session: &str, call: &ToolCall) -> Result<Result<ToolOutput, ToolError>, TransportError> {
        Ok(self.handle_call(session, call))
    }

    fn close(&self, session: &str) -> Result<(), TransportError> {
        self.close_session(session);
        Ok(())
    }
}

impl<T: ToolDispatch + ?Sized> ToolDispatch for Arc<T> {
    fn dispatch(&self, session: &str, call: &ToolCall) -> Result<Result<ToolOutput, ToolError>, TransportError> {
        (**self).dispatch(session, call)
    }

    fn close(&self, session: &str) -> Result<(), TransportError> {
        (**self).close(session)
    }
}

struct Connection {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

/// NDJSON client with a small pool of reusable connections.
pub struct TcpClient {
    addr: std::net::SocketAddr,
    timeout: Duration,
    next_id: AtomicU64,
    idle: Mutex<Vec<Connection>>,
}

impl TcpClient {
    pub fn new(addr: impl ToSocketAddrs, timeout: Duration) -> io::Result<TcpClient> {
        let addr = addr
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "address resolved to nothing"))?;
        Ok(TcpClient { addr, timeout, next_id: AtomicU64::new(1), idle: Mutex::new(Vec::new()) })
    }

    fn connect(&self) -> io::Result<Connection> {
        let stream = TcpStream::connect_timeout(&self.addr, self.timeout)?;
        stream.set_read_timeout(Some(self.timeout))?;
        stream.set_nodelay(true)?;
        Ok(Connection { reader: BufReader::new(stream.try_clone()?), writer: stream })
    }

    /// Sends one request and waits for its response.
    pub fn request(&self, session: &str, name: &str, inputs: Value) -> Result<Response, TransportError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed).to_string();
        let req = Request { id: id.clone(), session: session.to_string(), name: name.to_string(), inputs };
        let mut line = serde_json::to_string(&req).map_err(|e| TransportError::Protocol(e.to_string()))?;
        line.push('\n');
        let pooled = self.idle.lock().unwrap_or_else(|p| p.into_inner()).pop();
        let mut conn = match pooled {
            Some(c) => c,
            None => self.connect()?,
        };
        conn.writer.write_all(line.as_bytes())?;
        let mut reply = String::new();
        if conn.reader.read_line(&mut reply)? == 0 {
            return Err(TransportError::Protocol("connection closed".into()));
        }
        let resp: Response = serde_json::from_str(&reply).map_err(|e| TransportError::Protocol(e.to_string()))?;
        if resp.id != id {
            return Err(TransportError::Protocol(format!("response id {} for request {id}", resp.id)));
        }
        self.idle.lock().unwrap_or_else(|p| p.into_inner()).push(conn);
        Ok(resp)
    }
}

impl ToolDispatch for TcpClient {
    fn dispatch(&self, session: &str, call: &ToolCall) -> Result<Result<ToolOutput, ToolError>, TransportError> {
        let resp = self.request(session, call.name.as_str(), call.inputs())?;
        let decode = |v: Option<Value>, what: &str| v.ok_or_else(|| TransportError::Protocol(format!("response without {what}")));
        if resp.ok {
            let out = serde_json::from_value(decode(resp.result, "result")?).map_err(|e| TransportError::Protocol(e.to_string()))?;
            Ok(Ok(out))
        } else {
            let err = serde_json::from_value(decode(resp.error, "error")?).map_err(|e| TransportError::Protocol(e.to_string()))?;
            Ok(Err(err))
        }
    }

    fn close(&self, session: &str) -> Result<(), TransportError> {
        self.request(session, "close_session", json!({}))?;
        Ok(())
    }
}
