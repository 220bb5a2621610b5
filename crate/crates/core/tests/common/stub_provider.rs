//! Minimal HTTP server speaking the similarity wire protocol, for tests.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

#[derive(Clone, Copy, Debug)]
pub enum Behavior {
    /// 1.0 for identical strings, 0.5 otherwise.
    Conforming,
    /// 1.0 for identical strings, 1.2 otherwise.
    OutOfRange,
    /// 0.5 for everything, including identical strings.
    BrokenIdentity,
    /// Answers with a body that is not JSON.
    Garbage,
    /// Answers with one score too few.
    ShortResponse,
    /// Sleeps before answering.
    Slow(Duration),
}

pub struct StubProvider {
    pub url: String,
    requests: Arc<AtomicUsize>,
    pairs_seen: Arc<AtomicUsize>,
}

impl StubProvider {
    pub fn start(behavior: Behavior) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub provider");
        let url = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(AtomicUsize::new(0));
        let pairs_seen = Arc::new(AtomicUsize::new(0));
        let (r, p) = (requests.clone(), pairs_seen.clone());
        thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let (r, p) = (r.clone(), p.clone());
                thread::spawn(move || {
                    let _ = serve(stream, behavior, &r, &p);
                });
            }
        });
        Self { url, requests, pairs_seen }
    }

    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn pairs_seen(&self) -> usize {
        self.pairs_seen.load(Ordering::SeqCst)
    }
}

fn serve(
    stream: TcpStream,
    behavior: Behavior,
    requests: &AtomicUsize,
    pairs_seen: &AtomicUsize,
) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut content_length = 0usize;
    loop {
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let header = header.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some((name, value)) = header.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    requests.fetch_add(1, Ordering::SeqCst);

    let (status, payload) = if !request_line.starts_with("POST /similarity ") {
        ("404 Not Found", "{}".to_string())
    } else {
        let request: serde_json::Value = serde_json::from_slice(&body).unwrap_or_default();
        let pairs: Vec<(String, String)> = request["pairs"]
            .as_array()
            .map(|a| {
                a.iter()
                    .map(|p| {
                        (
                            p[0].as_str().unwrap_or_default().to_string(),
                            p[1].as_str().unwrap_or_default().to_string(),
                        )
                    })
                    .collect()
            })
            .unwrap_or_default();
        pairs_seen.fetch_add(pairs.len(), Ordering::SeqCst);
        let score = |(a, b): &(String, String), other: f64| if a == b { 1.0 } else { other };
        let payload = match behavior {
            Behavior::Conforming => scores(pairs.iter().map(|p| score(p, 0.5))),
            Behavior::OutOfRange => scores(pairs.iter().map(|p| score(p, 1.2))),
            Behavior::BrokenIdentity => scores(pairs.iter().map(|_| 0.5)),
            Behavior::Garbage => "this is not json".to_string(),
            Behavior::ShortResponse => scores(pairs.iter().skip(1).map(|p| score(p, 0.5))),
            Behavior::Slow(delay) => {
                thread::sleep(delay);
                scores(pairs.iter().map(|p| score(p, 0.5)))
            }
        };
        ("200 OK", payload)
    };

    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    )?;
    stream.flush()
}

fn scores(values: impl Iterator<Item = f64>) -> String {
    serde_json::json!({ "scores": values.collect::<Vec<_>>() }).to_string()
}
