//! External clustering functions behind a line protocol on stdin/stdout.
//!
//! Request: `{"n": 3, "k": 2, "edges": [{"i": 1, "j": 2, "w": "1/1"}, ...]}`
//! with edges in universal order. Response: `{"clusters": [[1, 2], [3]]}`.
//! One request is in flight per subprocess.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::clusterers::{check_k, ClusteringFunction};
use crate::distance::{edge_order, DistanceFunction, Edge};
use crate::error::{Error, Result};
use crate::partition::Partitioning;
use crate::weight::Weight;

pub const DEFAULT_TIMEOUT_MS: u64 = 5_000;
pub const DEFAULT_MAX_FAILURES: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluginEndpoint {
    pub program: String,
    pub args: Vec<String>,
    pub timeout_ms: u64,
    /// Consecutive failed requests after which the subprocess is no longer
    /// restarted.
    pub max_failures: u32,
}

impl PluginEndpoint {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        PluginEndpoint {
            program: program.into(),
            args,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            max_failures: DEFAULT_MAX_FAILURES,
        }
    }

    /// Splits a shell-style command line into program and arguments.
    pub fn from_command_line(cmd: &str) -> Result<Self> {
        let words = shlex::split(cmd)
            .ok_or_else(|| Error::InvalidConfig(format!("cannot split {cmd:?}")))?;
        let (program, args) = words
            .split_first()
            .ok_or_else(|| Error::InvalidConfig("empty plugin command".into()))?;
        Ok(PluginEndpoint::new(program.clone(), args.to_vec()))
    }

    pub fn with_timeout_ms(mut self, timeout_ms: u64) -> Result<Self> {
        if timeout_ms == 0 {
            return Err(Error::InvalidConfig(
                "plugin timeout must be positive".into(),
            ));
        }
        self.timeout_ms = timeout_ms;
        Ok(self)
    }

    pub fn with_max_failures(mut self, max_failures: u32) -> Self {
        self.max_failures = max_failures;
        self
    }

    pub fn command_line(&self) -> String {
        shlex::try_join(
            std::iter::once(self.program.as_str()).chain(self.args.iter().map(String::as_str)),
        )
        .unwrap_or_else(|_| self.program.clone())
    }
}

#[derive(Serialize)]
struct Request<'a> {
    n: usize,
    k: usize,
    edges: &'a [Edge],
}

#[derive(Deserialize)]
struct Response {
    clusters: Vec<Vec<i64>>,
}

/// The request line for `(d, k)`, without the trailing newline.
pub fn encode_request(d: &DistanceFunction, k: usize) -> String {
    let order = edge_order(d);
    serde_json::to_string(&Request {
        n: d.n(),
        k,
        edges: order.edges(),
    })
    .expect("request serializes")
}

/// Parses and validates one response line.
pub fn decode_response(line: &str, n: usize, k: usize) -> Result<Partitioning> {
    let resp: Response = serde_json::from_str(line.trim_end())
        .map_err(|e| Error::PluginProtocolError(format!("{e}: {line:?}")))?;
    let invalid = |msg: String| Err(Error::PluginInvalidPartition(msg));
    if resp.clusters.len() != k {
        return invalid(format!("expected {k} blocks, got {}", resp.clusters.len()));
    }
    let mut seen = vec![false; n + 1];
    let mut blocks = Vec::with_capacity(k);
    for block in &resp.clusters {
        if block.is_empty() {
            return invalid("empty block".into());
        }
        let mut b = Vec::with_capacity(block.len());
        for &x in block {
            if x < 1 || x as u64 > n as u64 {
                return invalid(format!("point {x} outside 1..={n}"));
            }
            let x = x as usize;
            if std::mem::replace(&mut seen[x], true) {
                return invalid(format!("point {x} appears twice"));
            }
            b.push(x);
        }
        blocks.push(b);
    }
    if let Some(x) = (1..=n).find(|&x| !seen[x]) {
        return invalid(format!("point {x} is missing"));
    }
    Partitioning::from_blocks(n, &blocks).map_err(|e| Error::PluginInvalidPartition(e.to_string()))
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Process {
    fn spawn(ep: &PluginEndpoint) -> Result<Self> {
        let mut child = Command::new(&ep.program)
            .args(&ep.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::PluginLaunchFailure(format!("{}: {e}", ep.command_line())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Process {
            child,
            stdin,
            lines,
        })
    }

    fn request(&mut self, line: &str, timeout: Duration) -> Result<String> {
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::PluginProtocolError(format!("writing request: {e}")))?;
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(Error::PluginProtocolError(format!("reading response: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(Error::PluginTimeout(timeout.as_millis() as u64)),
            Err(RecvTimeoutError::Disconnected) => Err(Error::PluginProtocolError(
                "plugin closed its output".into(),
            )),
        }
    }
}

impl Drop for Process {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

struct State {
    process: Option<Process>,
    failures: u32,
}

/// A running plugin. Requests are serialized through a mutex.
pub struct PluginHandle {
    endpoint: PluginEndpoint,
    state: Mutex<State>,
    deterministic: bool,
}

/// Instance used for the warm-up determinism probe.
fn probe_instance() -> DistanceFunction {
    DistanceFunction::from_fn(5, |i, j| Weight::from(((i * 7 + j * 3) % 11 + 1) as i64))
        .expect("positive weights")
}

impl PluginHandle {
    /// Launches the plugin and evaluates the probe instance twice.
    pub fn connect(endpoint: PluginEndpoint) -> Result<Self> {
        if endpoint.timeout_ms == 0 {
            return Err(Error::InvalidConfig(
                "plugin timeout must be positive".into(),
            ));
        }
        let process = Process::spawn(&endpoint)?;
        let mut handle = PluginHandle {
            endpoint,
            state: Mutex::new(State {
                process: Some(process),
                failures: 0,
            }),
            deterministic: true,
        };
        let probe = probe_instance();
        let first = handle.evaluate(&probe, 2)?;
        let second = handle.evaluate(&probe, 2)?;
        handle.deterministic = first == second;
        Ok(handle)
    }

    pub fn endpoint(&self) -> &PluginEndpoint {
        &self.endpoint
    }

    fn evaluate(&self, d: &DistanceFunction, k: usize) -> Result<Partitioning> {
        check_k(d.n(), k)?;
        let request = encode_request(d, k);
        let mut state = self.state.lock().unwrap_or_else(|e| e.into_inner());
        if state.process.is_none() {
            if state.failures >= self.endpoint.max_failures {
                return Err(Error::PluginLaunchFailure(format!(
                    "{} failed {} times in a row; not restarting",
                    self.endpoint.command_line(),
                    state.failures
                )));
            }
            state.process = Some(Process::spawn(&self.endpoint)?);
        }
        let timeout = Duration::from_millis(self.endpoint.timeout_ms);
        let outcome = state
            .process
            .as_mut()
            .expect("process started")
            .request(&request, timeout)
            .and_then(|line| decode_response(&line, d.n(), k));
        match &outcome {
            Ok(_) => state.failures = 0,
            // the stream is still in sync after a well-formed but wrong answer
            Err(Error::PluginInvalidPartition(_)) => state.failures += 1,
            Err(_) => {
                state.failures += 1;
                state.process = None;
            }
        }
        outcome
    }
}

impl ClusteringFunction for PluginHandle {
    fn name(&self) -> String {
        format!("plugin:{}", self.endpoint.command_line())
    }

    fn cluster(&self, d: &DistanceFunction, k: usize) -> Result<Partitioning> {
        self.evaluate(d, k)
    }

    fn is_deterministic(&self) -> bool {
        self.deterministic
    }
}
