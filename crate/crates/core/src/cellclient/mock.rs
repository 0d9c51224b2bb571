//! In-process stand-in for the execution service, used by tests.
//!
//! `POST /service` answers with the reply registered for the exact decoded
//! `code` value (or the fallback). `GET /_requests` returns
//! `{"count": N}` with the number of `/service` requests seen so far.

use std::collections::HashMap;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockReply {
    pub status: u16,
    pub body: Vec<u8>,
    pub delay: Option<Duration>,
}

impl MockReply {
    pub fn ok(body: impl Into<Vec<u8>>) -> Self {
        Self {
            status: 200,
            body: body.into(),
            delay: None,
        }
    }

    pub fn status(status: u16, body: impl Into<Vec<u8>>) -> Self {
        Self {
            status,
            body: body.into(),
            delay: None,
        }
    }

    pub fn delayed(mut self, delay: Duration) -> Self {
        self.delay = Some(delay);
        self
    }
}

/// One request as the mock received it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedRequest {
    pub method: String,
    pub path: String,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
    /// Decoded `code` form field, if present.
    pub code: Option<String>,
}

#[derive(Debug, Default)]
struct State {
    requests: Vec<RecordedRequest>,
}

#[derive(Debug, Clone)]
pub struct MockServerBuilder {
    replies: HashMap<String, MockReply>,
    fallback: MockReply,
}

impl Default for MockServerBuilder {
    fn default() -> Self {
        Self {
            replies: HashMap::new(),
            fallback: MockReply::status(404, "no fixture for this code"),
        }
    }
}

impl MockServerBuilder {
    pub fn reply(mut self, code: impl Into<String>, reply: MockReply) -> Self {
        self.replies.insert(code.into(), reply);
        self
    }

    pub fn fallback(mut self, reply: MockReply) -> Self {
        self.fallback = reply;
        self
    }

    pub fn start(self) -> io::Result<MockServer> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let state = Arc::new(Mutex::new(State::default()));
        let shutdown = Arc::new(AtomicBool::new(false));
        let fixtures = Arc::new(self);

        let handle = {
            let state = Arc::clone(&state);
            let shutdown = Arc::clone(&shutdown);
            thread::spawn(move || {
                for stream in listener.incoming() {
                    if shutdown.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let state = Arc::clone(&state);
                    let fixtures = Arc::clone(&fixtures);
                    thread::spawn(move || {
                        let _ = handle_connection(stream, &state, &fixtures);
                    });
                }
            })
        };

        Ok(MockServer {
            addr,
            state,
            shutdown,
            handle: Some(handle),
        })
    }
}

/// A running mock; stops when dropped.
#[derive(Debug)]
pub struct MockServer {
    addr: SocketAddr,
    state: Arc<Mutex<State>>,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn builder() -> MockServerBuilder {
        MockServerBuilder::default()
    }

    /// Base URL without trailing slash, e.g. `http://127.0.0.1:40123`.
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Number of `/service` requests received.
    pub fn request_count(&self) -> usize {
        self.state.lock().unwrap().requests.len()
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.state.lock().unwrap().requests.clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(
    stream: TcpStream,
    state: &Mutex<State>,
    fixtures: &MockServerBuilder,
) -> io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(10)))?;
    let mut reader = BufReader::new(stream.try_clone()?);

    let mut request_line = String::new();
    if reader.read_line(&mut request_line)? == 0 {
        return Ok(());
    }
    let mut parts = request_line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_owned();
    let path = parts.next().unwrap_or_default().to_owned();

    let mut content_length = 0usize;
    let mut content_type = None;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            let value = value.trim();
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value.parse().unwrap_or(0);
            } else if name.eq_ignore_ascii_case("content-type") {
                content_type = Some(value.to_owned());
            }
        }
    }
    let mut body = vec![0; content_length];
    reader.read_exact(&mut body)?;

    let reply = match (method.as_str(), path.as_str()) {
        ("POST", "/service") => {
            let code = url::form_urlencoded::parse(&body)
                .find(|(k, _)| k == "code")
                .map(|(_, v)| v.into_owned());
            let reply = code
                .as_ref()
                .and_then(|c| fixtures.replies.get(c))
                .unwrap_or(&fixtures.fallback)
                .clone();
            state.lock().unwrap().requests.push(RecordedRequest {
                method,
                path,
                content_type,
                body,
                code,
            });
            reply
        }
        ("GET", "/_requests") => {
            let count = state.lock().unwrap().requests.len();
            MockReply::ok(format!("{{\"count\": {count}}}"))
        }
        _ => MockReply::status(404, "not found"),
    };

    if let Some(delay) = reply.delay {
        thread::sleep(delay);
    }
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        reply.status,
        reason(reply.status),
        reply.body.len()
    )?;
    stream.write_all(&reply.body)?;
    stream.flush()
}

fn reason(status: u16) -> &'static str {
    match status {
        200 => "OK",
        404 => "Not Found",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    }
}
