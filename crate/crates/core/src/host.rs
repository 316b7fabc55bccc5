//! Line-oriented front ends for sessions: a REPL over any reader/writer pair
//! and a TCP server.
//!
//! The server keeps one shared session (`s0`) built from the scenario. A
//! request `{"op":"open"}` creates an isolated session and returns its id;
//! later requests select it with a `"session"` field. Requests without that
//! field go to `s0`.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

use crate::scenario::Scenario;
use crate::session::{Reply, Session};

pub const DEFAULT_SESSION: &str = "s0";

/// Runs `session` over a line stream until end of input or `quit`.
pub fn repl<R: BufRead, W: Write>(session: &mut Session, input: R, mut output: W) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed == "quit" || trimmed == "exit" {
            break;
        }
        writeln!(output, "{}", session.handle_line(trimmed))?;
        output.flush()?;
    }
    Ok(())
}

pub struct SessionHost {
    scenario: Scenario,
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Session>>>>,
}

impl SessionHost {
    pub fn new(scenario: Scenario) -> Self {
        let mut sessions = BTreeMap::new();
        sessions.insert(
            DEFAULT_SESSION.to_string(),
            Arc::new(Mutex::new(Session::new(DEFAULT_SESSION, scenario.clone()))),
        );
        SessionHost {
            scenario,
            sessions: Mutex::new(sessions),
        }
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.lock().unwrap().keys().cloned().collect()
    }

    fn open(&self) -> String {
        let mut sessions = self.sessions.lock().unwrap();
        let id = format!("s{}", sessions.len());
        sessions.insert(
            id.clone(),
            Arc::new(Mutex::new(Session::new(id.clone(), self.scenario.clone()))),
        );
        id
    }

    /// Routes one request line and returns the reply line.
    pub fn handle_line(&self, line: &str) -> String {
        let parsed: Option<Value> = serde_json::from_str(line.trim()).ok();
        let target = parsed
            .as_ref()
            .and_then(|v| v.get("session"))
            .and_then(Value::as_str)
            .unwrap_or(DEFAULT_SESSION)
            .to_string();
        if parsed.as_ref().and_then(|v| v.get("op")).and_then(Value::as_str) == Some("open") {
            return Reply::Ok(json!({ "session": self.open() })).to_line();
        }
        let session = self.sessions.lock().unwrap().get(&target).cloned();
        match session {
            Some(s) => s.lock().unwrap().handle_line(line),
            None => Reply::error("unknown-session", format!("unknown session `{target}`")).to_line(),
        }
    }

    fn serve_connection(&self, stream: TcpStream) -> io::Result<()> {
        let reader = BufReader::new(stream.try_clone()?);
        let mut writer = stream;
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            writeln!(writer, "{}", self.handle_line(&line))?;
            writer.flush()?;
        }
        Ok(())
    }
}

/// Accepts connections forever, one thread per connection.
pub fn serve(listener: TcpListener, host: Arc<SessionHost>) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let host = Arc::clone(&host);
        thread::spawn(move || {
            let _ = host.serve_connection(stream);
        });
    }
    Ok(())
}
