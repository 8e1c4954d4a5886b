//! Helpers shared by the CLI test targets: a scripted chat-completions
//! server and a wrapper around the built binary.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use cogscreen_core::augment::CASE_CUES;
use cogscreen_core::llmjudge::CLASSIFICATION_PROMPT;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JudgeMode {
    Oracle,
    AntiOracle,
    Ambiguous,
}

#[derive(Default)]
pub struct Log {
    pub generation_prompts: Vec<String>,
    pub judge_requests: usize,
    pub hits: usize,
}

#[derive(Clone)]
struct Mock {
    truth: Arc<HashMap<String, String>>,
    mode: JudgeMode,
    fail: bool,
    log: Arc<Mutex<Log>>,
}

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ter", "shan", "po", "ril", "da", "ven", "su", "gor", "ne", "tha", "bi", "mel", "cor", "an", "fi", "rup", "es",
    "wol", "dri", "ja", "qua",
];

/// A transcript-like text determined by the request seed. Slot 4 of every
/// nine answers too briefly on its first attempt so that retries happen.
fn synthetic_text(seed: u64, system: &str) -> String {
    let attempt = seed & 0xffff;
    let slot = seed >> 16;
    if attempt == 1 && slot % 9 == 4 {
        return "the boy falls.".into();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let lower = system.to_lowercase();
    let case = system.trim_end().ends_with("Label: ADRD") || CASE_CUES.iter().any(|c| lower.contains(c));
    let n = rng.random_range(25..70);
    let mut words = Vec::with_capacity(n);
    for i in 0..n {
        if case && rng.random_bool(0.2) {
            words.push("um".to_string());
        }
        let k = rng.random_range(1..4);
        words.push((0..k).map(|_| *SYLLABLES.choose(&mut rng).unwrap()).collect::<String>());
        if i % 9 == 8 {
            words.push(".".into());
        }
    }
    words.join(" ") + " ."
}

async fn chat(State(m): State<Mock>, Json(req): Json<Value>) -> (StatusCode, Json<Value>) {
    m.log.lock().unwrap().hits += 1;
    if m.fail {
        return (StatusCode::SERVICE_UNAVAILABLE, Json(json!({"error": "down"})));
    }
    let first = req["messages"][0]["content"].as_str().unwrap_or_default().to_string();
    let content = if first.starts_with(&CLASSIFICATION_PROMPT[..60]) {
        m.log.lock().unwrap().judge_requests += 1;
        let text = first.rsplit("Transcript:\n").next().unwrap_or_default().trim();
        let truth = m.truth.get(text).map(String::as_str).unwrap_or("unknown");
        let flip = |l: &str| if l == "case" { "Healthy" } else { "AD" };
        match m.mode {
            JudgeMode::Oracle => format!("{{\"label\": \"{}\"}}", if truth == "case" { "AD" } else { "Healthy" }),
            JudgeMode::AntiOracle => format!("{{\"label\": \"{}\"}}", flip(truth)),
            JudgeMode::Ambiguous => "Hard to say, perhaps AD, perhaps Healthy.".into(),
        }
    } else {
        m.log.lock().unwrap().generation_prompts.push(first.clone());
        synthetic_text(req["seed"].as_u64().unwrap_or(0), &first)
    };
    (StatusCode::OK, Json(json!({"choices": [{"message": {"role": "assistant", "content": content}}]})))
}

pub struct MockServer {
    pub url: String,
    pub log: Arc<Mutex<Log>>,
    _rt: tokio::runtime::Runtime,
}

impl MockServer {
    /// `truth` maps transcript text to "case" or "control" for judge answers.
    pub fn start(truth: HashMap<String, String>, mode: JudgeMode, fail: bool) -> Self {
        let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
        let log = Arc::new(Mutex::new(Log::default()));
        let state = Mock { truth: Arc::new(truth), mode, fail, log: log.clone() };
        let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
        let addr = listener.local_addr().unwrap();
        let app = Router::new().route("/v1/chat/completions", post(chat)).with_state(state);
        rt.spawn(async move { axum::serve(listener, app).await.unwrap() });
        Self { url: format!("http://{addr}/v1/chat/completions"), log, _rt: rt }
    }
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cogscreen"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "exit {:?}\nstderr: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

/// Writes a toy dataset into `dir` and returns the config path.
pub fn make_toy(dir: &Path, shape: &str) -> PathBuf {
    let o = run(&["make-toy", "--dest", dir.to_str().unwrap(), "--shape", shape]);
    stdout_json(&o);
    dir.join("config.toml")
}

/// Appends a mock provider, two generators and a judge section.
pub fn add_mock_provider(config: &Path, url: &str) {
    let extra = format!(
        r#"
[[providers]]
id = "mock"
url = "{url}"
requests_per_second = 0.0
max_in_flight = 16
http = {{ timeout_ms = 10000, retry = {{ max_attempts = 2, base_delay_ms = 1, max_delay_ms = 2, jitter_seed = 0 }} }}

[augment]
model = "linguistic"
generators = [
  {{ name = "small", provider = "mock", preset = "llama-3.1-8b" }},
  {{ name = "cued", provider = "mock", preset = "gpt-4o", conditioning = {{ mode = "cue_prompted" }} }},
]

[judge]
provider = "mock"
model = "llama-3.1-8b"
"#
    );
    let mut text = std::fs::read_to_string(config).unwrap();
    text.push_str(&extra);
    std::fs::write(config, text).unwrap();
}

/// Transcript text to label, read from a toy manifest.
pub fn truth_map(dir: &Path) -> HashMap<String, String> {
    let mut rdr = csv::Reader::from_path(dir.join("manifest.csv")).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            let text = std::fs::read_to_string(dir.join(&r[3])).unwrap();
            (text.trim().to_string(), r[1].to_string())
        })
        .collect()
}
