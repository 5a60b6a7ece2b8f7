use std::sync::{Arc, Mutex};

use codesim::harness::{run_with, Backend, BackendSpec, Request, RetryPolicy, RunConfig};
use codesim::metrics::ErrorCategory;
use codesim::prompting::PromptStyle;
use codesim::taskgen::{Answer, GenParams, Rendering, TaskFamily};
use serde_json::Value;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpListener;

#[derive(Default)]
struct Seen {
    bodies: Vec<Value>,
    auth: Vec<Option<String>>,
}

/// Serves one scripted status per request (the last repeats forever).
async fn server(statuses: Vec<u16>) -> (String, Arc<Mutex<Seen>>) {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Seen::default()));
    let log = seen.clone();
    tokio::spawn(async move {
        let mut i = 0;
        loop {
            let (mut sock, _) = listener.accept().await.unwrap();
            let status = statuses[i.min(statuses.len() - 1)];
            i += 1;
            let mut buf = Vec::new();
            let mut chunk = [0u8; 4096];
            let body_start = loop {
                let n = sock.read(&mut chunk).await.unwrap();
                buf.extend_from_slice(&chunk[..n]);
                if let Some(p) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                    break p + 4;
                }
            };
            let head = String::from_utf8_lossy(&buf[..body_start]).to_string();
            let len: usize = head
                .lines()
                .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(|v| v.trim().parse().unwrap()))
                .unwrap_or(0);
            while buf.len() < body_start + len {
                let n = sock.read(&mut chunk).await.unwrap();
                buf.extend_from_slice(&chunk[..n]);
            }
            {
                let mut s = log.lock().unwrap();
                s.bodies.push(serde_json::from_slice(&buf[body_start..body_start + len]).unwrap());
                s.auth.push(
                    head.lines()
                        .find_map(|l| l.to_ascii_lowercase().starts_with("authorization:").then(|| l[14..].trim().to_string())),
                );
            }
            let body = if status == 200 {
                r#"{"choices":[{"message":{"role":"assistant","content":"Answer: 7"}}],"usage":{"prompt_tokens":11,"completion_tokens":2}}"#
            } else {
                r#"{"error":"busy"}"#
            };
            let resp = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            sock.write_all(resp.as_bytes()).await.unwrap();
        }
    });
    (url, seen)
}

fn spec(endpoint: String, auth_env: Option<&str>) -> BackendSpec {
    BackendSpec::HttpChat {
        endpoint,
        model: "test-model".into(),
        temperature: 0.0,
        max_tokens: 4096,
        presence_penalty: 0.0,
        auth_env: auth_env.map(String::from),
        timeout_secs: 5,
        retry: RetryPolicy { max_attempts: 5, base_delay_ms: 1, max_delay_ms: 4 },
        logprobs: false,
    }
}

fn request(truth: &Answer) -> Request<'_> {
    Request {
        instance_id: "x",
        rendering: Rendering::Synthetic,
        style: PromptStyle::Direct,
        prompt: "a0=7\n\nWhat is the value of a0 at the end?",
        truth,
    }
}

#[tokio::test]
async fn transient_failures_are_retried() {
    let (url, seen) = server(vec![503, 429, 200]).await;
    std::env::set_var("CODESIM_TEST_TOKEN", "secret");
    let backend = Backend::from_spec(&spec(url, Some("CODESIM_TEST_TOKEN"))).unwrap();
    let truth = Answer::Int(7);
    let reply = backend.complete(&request(&truth)).await.unwrap();
    assert_eq!(reply.text, "Answer: 7");
    assert_eq!((reply.input_tokens, reply.output_tokens), (Some(11), Some(2)));
    let seen = seen.lock().unwrap();
    assert_eq!(seen.bodies.len(), 3);
    let body = &seen.bodies[0];
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["max_tokens"], 4096);
    assert_eq!(body["presence_penalty"], 0.0);
    assert_eq!(body["messages"][0]["role"], "user");
    assert_eq!(seen.auth[0].as_deref(), Some("Bearer secret"));
}

#[tokio::test]
async fn client_errors_are_not_retried() {
    let (url, seen) = server(vec![400]).await;
    let backend = Backend::from_spec(&spec(url, None)).unwrap();
    let truth = Answer::Int(7);
    assert!(backend.complete(&request(&truth)).await.is_err());
    assert_eq!(seen.lock().unwrap().bodies.len(), 1);
}

#[tokio::test]
async fn exhausted_retries_become_backend_errors() {
    let (url, seen) = server(vec![500]).await;
    let dir = tempfile::tempdir().unwrap();
    let mut p = GenParams::new(TaskFamily::StraightLine);
    p.n_ops = 10;
    let config = RunConfig {
        backend: spec(url, None),
        grid: vec![p],
        styles: vec![PromptStyle::Direct],
        renderings: vec![Rendering::Synthetic],
        repeats: 1,
        batch_size: 2,
        seed: 0,
        max_in_flight: 1,
        output_dir: dir.path().to_path_buf(),
    };
    let backend = Backend::from_spec(&config.backend).unwrap();
    let out = run_with(&config, &backend).await.unwrap();
    assert_eq!(out.records.len(), 2);
    assert!(out.records.iter().all(|r| !r.correct && r.error == Some(ErrorCategory::BackendError)));
    assert_eq!(seen.lock().unwrap().bodies.len(), 10);
}

#[test]
fn missing_token_variable_is_a_config_error() {
    assert!(Backend::from_spec(&spec("http://127.0.0.1:9/".into(), Some("CODESIM_UNSET_VARIABLE"))).is_err());
}
