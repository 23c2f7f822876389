//! Translation backends: the deterministic tagged mock used by tests and
//! fixtures, the HTTP client for a real service, and a persistent cache
//! layer that makes reruns free and deterministic.

use crate::text::Language;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

/// Environment variable naming the remote translation endpoint.
pub const ENDPOINT_ENV: &str = "MIXSUM_TRANSLATE_URL";
/// Environment variable holding an optional bearer token.
pub const TOKEN_ENV: &str = "MIXSUM_TRANSLATE_TOKEN";

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("translation endpoint returned status {status}")]
    Status { status: u16 },
    #[error("request failed after {attempts} attempt(s): {message}")]
    Request { attempts: u32, message: String },
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("missing environment variable {0}")]
    MissingEnv(&'static str),
}

/// A machine-translation service. Implementations must be deterministic for
/// fixed inputs within one run and must return the input unchanged when
/// source and target coincide.
pub trait TranslationBackend {
    fn translate(
        &self,
        text: &str,
        source: Language,
        target: Language,
    ) -> Result<String, TransportError>;
}

/// Returns every input unchanged. Round-trip scores are always 100.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityBackend;

impl TranslationBackend for IdentityBackend {
    fn translate(
        &self,
        text: &str,
        _source: Language,
        _target: Language,
    ) -> Result<String, TransportError> {
        Ok(text.to_string())
    }
}

/// Optional noise applied on the forward pass of the mock backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MockNoise {
    /// Perfect round trips; scores are always 100.
    None,
    /// Delete the last whitespace token on every forward translation.
    DropLastToken,
    /// Seeded per-token drop/substitution, deterministic per input.
    Random {
        drop_prob: f64,
        substitute_prob: f64,
    },
}

/// Deterministic "tagged round-trip" mock: forward translation prefixes
/// every whitespace token with the target language code ("cat." becomes
/// "de:cat."), back translation strips the prefix. Noise makes scores fall
/// below 100 in a hand-computable way.
#[derive(Debug, Clone)]
pub struct MockBackend {
    pub seed: u64,
    pub noise: MockNoise,
}

impl MockBackend {
    pub fn new(seed: u64) -> Self {
        MockBackend {
            seed,
            noise: MockNoise::None,
        }
    }

    pub fn with_noise(seed: u64, noise: MockNoise) -> Self {
        MockBackend { seed, noise }
    }

    fn strip_tags(text: &str, source: Language) -> String {
        let prefix = format!("{}:", source.code());
        text.split_whitespace()
            .map(|tok| tok.strip_prefix(&prefix).unwrap_or(tok))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn apply_noise(&self, tokens: Vec<String>, text: &str, target: Language) -> Vec<String> {
        match self.noise {
            MockNoise::None => tokens,
            MockNoise::DropLastToken => {
                let mut tokens = tokens;
                tokens.pop();
                tokens
            }
            MockNoise::Random {
                drop_prob,
                substitute_prob,
            } => {
                let key = self.seed ^ fnv1a(text.as_bytes()) ^ fnv1a(target.code().as_bytes());
                let mut rng = ChaCha8Rng::seed_from_u64(key);
                let mut out = Vec::with_capacity(tokens.len());
                for (i, token) in tokens.into_iter().enumerate() {
                    let roll: f64 = rng.random();
                    if roll < drop_prob {
                        continue;
                    }
                    if roll < drop_prob + substitute_prob {
                        out.push(format!("sub{i}"));
                    } else {
                        out.push(token);
                    }
                }
                out
            }
        }
    }
}

impl TranslationBackend for MockBackend {
    fn translate(
        &self,
        text: &str,
        source: Language,
        target: Language,
    ) -> Result<String, TransportError> {
        if source == target {
            return Ok(text.to_string());
        }
        // pivot through untagged text
        let plain = if source == Language::En {
            text.to_string()
        } else {
            Self::strip_tags(text, source)
        };
        if target == Language::En {
            return Ok(plain);
        }
        let tokens: Vec<String> = plain.split_whitespace().map(str::to_string).collect();
        let noisy = self.apply_noise(tokens, text, target);
        Ok(noisy
            .into_iter()
            .map(|tok| format!("{}:{}", target.code(), tok))
            .collect::<Vec<_>>()
            .join(" "))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Remote HTTP backend: POST {"text", "source", "target"} as JSON, expect
/// {"text"} back. Endpoint and optional bearer token come from the
/// environment; timeout and retry count from the builder configuration.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    endpoint: String,
    token: Option<String>,
    timeout: Duration,
    retries: u32,
}

impl HttpBackend {
    pub fn new(endpoint: String, token: Option<String>, timeout: Duration, retries: u32) -> Self {
        HttpBackend {
            endpoint,
            token,
            timeout,
            retries,
        }
    }

    pub fn from_env(timeout: Duration, retries: u32) -> Result<Self, TransportError> {
        let endpoint =
            std::env::var(ENDPOINT_ENV).map_err(|_| TransportError::MissingEnv(ENDPOINT_ENV))?;
        let token = std::env::var(TOKEN_ENV).ok();
        Ok(HttpBackend::new(endpoint, token, timeout, retries))
    }
}

#[derive(serde::Serialize)]
struct TranslateRequest<'a> {
    text: &'a str,
    source: &'a str,
    target: &'a str,
}

#[derive(serde::Deserialize)]
struct TranslateResponse {
    text: String,
}

impl TranslationBackend for HttpBackend {
    fn translate(
        &self,
        text: &str,
        source: Language,
        target: Language,
    ) -> Result<String, TransportError> {
        if source == target {
            return Ok(text.to_string());
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let attempts = self.retries.max(1);
        let mut last_error = String::new();
        for attempt in 1..=attempts {
            let mut request = agent.post(&self.endpoint);
            if let Some(token) = &self.token {
                request = request.header("Authorization", &format!("Bearer {token}"));
            }
            let body = TranslateRequest {
                text,
                source: source.code(),
                target: target.code(),
            };
            match request.send_json(&body) {
                Ok(mut response) => {
                    let status = response.status().as_u16();
                    if status != 200 {
                        return Err(TransportError::Status { status });
                    }
                    let parsed: TranslateResponse = response
                        .body_mut()
                        .read_json()
                        .map_err(|e| TransportError::BadResponse(e.to_string()))?;
                    return Ok(parsed.text);
                }
                Err(ureq::Error::StatusCode(status)) => {
                    return Err(TransportError::Status { status });
                }
                Err(e) => {
                    last_error = e.to_string();
                    if attempt < attempts {
                        std::thread::sleep(Duration::from_millis(50 * attempt as u64));
                    }
                }
            }
        }
        Err(TransportError::Request {
            attempts,
            message: last_error,
        })
    }
}

/// Memoizing wrapper with optional on-disk persistence. Entries are keyed
/// by (hash of text, source, target); disk reads verify the stored text so
/// a hash collision degrades to a miss, never a wrong translation.
pub struct CachedBackend<B> {
    inner: B,
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<(u64, Language, Language), String>>,
}

impl<B: TranslationBackend> CachedBackend<B> {
    pub fn new(inner: B, dir: Option<PathBuf>) -> Self {
        CachedBackend {
            inner,
            dir,
            memory: Mutex::new(HashMap::new()),
        }
    }

    fn disk_path(&self, key: u64, source: Language, target: Language) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| {
            d.join(format!(
                "{}-{}-{key:016x}.json",
                source.code(),
                target.code()
            ))
        })
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct CacheEntry {
    text: String,
    translation: String,
}

impl<B: TranslationBackend> TranslationBackend for CachedBackend<B> {
    fn translate(
        &self,
        text: &str,
        source: Language,
        target: Language,
    ) -> Result<String, TransportError> {
        if source == target {
            return Ok(text.to_string());
        }
        let key = fnv1a(text.as_bytes());
        if let Some(hit) = self.memory.lock().unwrap().get(&(key, source, target)) {
            return Ok(hit.clone());
        }
        if let Some(path) = self.disk_path(key, source, target) {
            if let Ok(bytes) = std::fs::read(&path) {
                if let Ok(entry) = serde_json::from_slice::<CacheEntry>(&bytes) {
                    if entry.text == text {
                        self.memory
                            .lock()
                            .unwrap()
                            .insert((key, source, target), entry.translation.clone());
                        return Ok(entry.translation);
                    }
                }
            }
        }
        let translation = self.inner.translate(text, source, target)?;
        if let Some(path) = self.disk_path(key, source, target) {
            if let Some(parent) = path.parent() {
                let _ = std::fs::create_dir_all(parent);
            }
            let entry = CacheEntry {
                text: text.to_string(),
                translation: translation.clone(),
            };
            if let Ok(bytes) = serde_json::to_vec(&entry) {
                let _ = std::fs::write(&path, bytes);
            }
        }
        self.memory
            .lock()
            .unwrap()
            .insert((key, source, target), translation.clone());
        Ok(translation)
    }
}
