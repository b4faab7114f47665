use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;
use url::Url;

use crate::assets;
use crate::cache::AnalysisCache;
use crate::gateway::{MockGateway, ModelConfig, ModelGateway, OpenAiCompatibleClient};
use crate::ingest::{
    ExampleRegistry, Extractor, FixtureOcrProvider, HttpOcrProvider, OcrProvider,
    OcrProviderConfig, SourceResolver, DEFAULT_MAX_PDF_BYTES,
};
use crate::pipeline::{Pipeline, DEFAULT_MAX_CONCURRENT_ANALYSES, DEFAULT_QUEUE_CAP, TIMEOUT_SLACK};
use crate::prompt::ProfileRegistry;
use crate::secret::ApiKey;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";
pub const DEFAULT_CACHE_DIR: &str = ".insightmap-cache";
/// Timeout budget used for fixture providers, which have none of their own.
const FIXTURE_TIMEOUT_S: u64 = 30;

#[derive(Debug, Clone)]
pub enum OcrSetup {
    Http(OcrProviderConfig),
    /// Replay recorded responses from a directory.
    Fixtures(PathBuf),
}

impl OcrSetup {
    fn timeout_s(&self) -> u64 {
        match self {
            OcrSetup::Http(cfg) => cfg.timeout_s,
            OcrSetup::Fixtures(_) => FIXTURE_TIMEOUT_S,
        }
    }

    pub fn provider(&self) -> Result<Arc<dyn OcrProvider>, StartupError> {
        Ok(match self {
            OcrSetup::Http(cfg) => Arc::new(
                HttpOcrProvider::new(cfg.clone()).map_err(|e| StartupError::Provider(e.to_string()))?,
            ),
            OcrSetup::Fixtures(dir) => Arc::new(FixtureOcrProvider::new(dir.clone())),
        })
    }
}

#[derive(Debug, Clone)]
pub enum ModelSetup {
    OpenAi(Box<ModelConfig>),
    /// Mock gateway driven by a `routes.json` file.
    Mock(PathBuf),
}

impl ModelSetup {
    fn timeout_s(&self) -> u64 {
        match self {
            ModelSetup::OpenAi(cfg) => cfg.timeout_s,
            ModelSetup::Mock(_) => FIXTURE_TIMEOUT_S,
        }
    }

    pub fn gateway(&self) -> Result<Arc<dyn ModelGateway>, StartupError> {
        Ok(match self {
            ModelSetup::OpenAi(cfg) => Arc::new(
                OpenAiCompatibleClient::new((**cfg).clone())
                    .map_err(|e| StartupError::Provider(e.to_string()))?,
            ),
            ModelSetup::Mock(routes) => Arc::new(
                MockGateway::from_routes_file(routes)
                    .map_err(|e| StartupError::Provider(e.to_string()))?,
            ),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen_addr: SocketAddr,
    pub ocr: OcrSetup,
    pub model: ModelSetup,
    pub prompt_config_path: PathBuf,
    pub cache_dir: PathBuf,
    pub example_dir: PathBuf,
    pub max_concurrent_analyses: usize,
    pub max_pdf_bytes: u64,
    /// `None` allows any origin.
    pub cors_origin: Option<String>,
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("environment variable {name} is not set{hint}")]
    MissingVar { name: &'static str, hint: &'static str },
    #[error("environment variable {name} is invalid: {message}")]
    InvalidVar { name: &'static str, message: String },
    #[error("{what} {path} does not exist")]
    MissingPath { what: &'static str, path: String },
    #[error("max_concurrent_analyses must be at least 1")]
    Concurrency,
    #[error(transparent)]
    Config(#[from] crate::prompt::ConfigError),
    #[error(transparent)]
    Examples(#[from] crate::ingest::ExampleError),
    #[error("provider setup failed: {0}")]
    Provider(String),
    #[error("creating cache directory {path}: {source}")]
    CacheDir {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("binding {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
}

const LIVE_HINT: &str = " (or run with --mock to use fixture providers)";

impl ServiceConfig {
    /// Config wired to the bundled fixtures and example papers.
    pub fn mock() -> Self {
        ServiceConfig {
            listen_addr: DEFAULT_LISTEN.parse().expect("static address"),
            ocr: OcrSetup::Fixtures(assets::ocr_fixtures_dir()),
            model: ModelSetup::Mock(assets::model_routes_path()),
            prompt_config_path: assets::prompts_path(),
            cache_dir: PathBuf::from(DEFAULT_CACHE_DIR),
            example_dir: assets::examples_dir(),
            max_concurrent_analyses: DEFAULT_MAX_CONCURRENT_ANALYSES,
            max_pdf_bytes: DEFAULT_MAX_PDF_BYTES,
            cors_origin: None,
        }
    }

    pub fn from_env(mock: bool) -> Result<Self, StartupError> {
        Self::from_lookup(mock, |k| std::env::var(k).ok().filter(|v| !v.is_empty()))
    }

    /// Builds the config from a variable lookup; `mock` swaps both providers
    /// for fixtures and makes the provider variables optional.
    pub fn from_lookup(
        mock: bool,
        get: impl Fn(&str) -> Option<String>,
    ) -> Result<Self, StartupError> {
        let mut cfg = ServiceConfig::mock();
        let required = |name: &'static str| {
            get(name).ok_or(StartupError::MissingVar { name, hint: LIVE_HINT })
        };
        let parse_url = |name: &'static str, v: String| {
            Url::parse(&v).map_err(|e| StartupError::InvalidVar {
                name,
                message: e.to_string(),
            })
        };

        if let Some(addr) = get("INSIGHT_LISTEN") {
            cfg.listen_addr = addr.parse().map_err(|e: std::net::AddrParseError| {
                StartupError::InvalidVar {
                    name: "INSIGHT_LISTEN",
                    message: e.to_string(),
                }
            })?;
        }
        if !mock {
            let ocr_url = parse_url("INSIGHT_OCR_URL", required("INSIGHT_OCR_URL")?)?;
            let ocr_key = ApiKey::new(get("INSIGHT_OCR_KEY").unwrap_or_default());
            cfg.ocr = OcrSetup::Http(OcrProviderConfig::new(ocr_url, ocr_key));

            let model_url = parse_url("INSIGHT_MODEL_URL", required("INSIGHT_MODEL_URL")?)?;
            let model_key = ApiKey::new(get("INSIGHT_MODEL_KEY").unwrap_or_default());
            let model_id = required("INSIGHT_MODEL_ID")?;
            cfg.model = ModelSetup::OpenAi(Box::new(ModelConfig::new(model_url, model_key, model_id)));
        }
        if let Some(p) = get("INSIGHT_PROMPTS") {
            cfg.prompt_config_path = p.into();
        }
        if let Some(p) = get("INSIGHT_CACHE") {
            cfg.cache_dir = p.into();
        }
        if let Some(p) = get("INSIGHT_EXAMPLES") {
            cfg.example_dir = p.into();
        }
        if let Some(n) = get("INSIGHT_MAX_CONCURRENT") {
            cfg.max_concurrent_analyses = n.parse().map_err(|e: std::num::ParseIntError| {
                StartupError::InvalidVar {
                    name: "INSIGHT_MAX_CONCURRENT",
                    message: e.to_string(),
                }
            })?;
        }
        cfg.cors_origin = get("INSIGHT_CORS_ORIGIN");
        Ok(cfg)
    }

    pub fn timeout_budget(&self) -> Duration {
        Duration::from_secs(self.ocr.timeout_s() + self.model.timeout_s()) + TIMEOUT_SLACK
    }

    pub fn validate(&self) -> Result<(), StartupError> {
        if self.max_concurrent_analyses == 0 {
            return Err(StartupError::Concurrency);
        }
        if !self.prompt_config_path.is_file() {
            return Err(StartupError::MissingPath {
                what: "prompt config",
                path: self.prompt_config_path.display().to_string(),
            });
        }
        if !self.example_dir.is_dir() {
            return Err(StartupError::MissingPath {
                what: "example directory",
                path: self.example_dir.display().to_string(),
            });
        }
        Ok(())
    }

    /// Loads every startup artifact and wires the pipeline. Fails fast on a
    /// missing prompt config, an invalid example manifest or a bad provider.
    pub fn build_pipeline(&self) -> Result<Pipeline, StartupError> {
        self.validate()?;
        let profiles = Arc::new(ProfileRegistry::from_path(&self.prompt_config_path)?);
        let examples = Arc::new(ExampleRegistry::load(&self.example_dir)?);
        std::fs::create_dir_all(&self.cache_dir).map_err(|source| StartupError::CacheDir {
            path: self.cache_dir.display().to_string(),
            source,
        })?;
        let resolver = SourceResolver::new(
            examples,
            self.max_pdf_bytes,
            Duration::from_secs(self.ocr.timeout_s()),
        )
        .map_err(|e| StartupError::Provider(e.to_string()))?;
        let extractor = Extractor::new(self.ocr.provider()?);
        Ok(Pipeline::new(resolver, extractor, self.model.gateway()?, profiles)
            .with_cache(AnalysisCache::new(&self.cache_dir))
            .with_limits(self.max_concurrent_analyses, DEFAULT_QUEUE_CAP)
            .with_budget(self.timeout_budget()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn lookup(vars: &[(&str, &str)]) -> impl Fn(&str) -> Option<String> {
        let map: HashMap<String, String> =
            vars.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        move |k| map.get(k).cloned()
    }

    #[test]
    fn live_mode_requires_provider_vars() {
        let err = ServiceConfig::from_lookup(false, lookup(&[])).unwrap_err();
        assert!(matches!(err, StartupError::MissingVar { name: "INSIGHT_OCR_URL", .. }));
        let cfg = ServiceConfig::from_lookup(
            false,
            lookup(&[
                ("INSIGHT_OCR_URL", "http://ocr/v1/ocr"),
                ("INSIGHT_OCR_KEY", "sk-ocr"),
                ("INSIGHT_MODEL_URL", "http://llm/v1"),
                ("INSIGHT_MODEL_KEY", "sk-llm"),
                ("INSIGHT_MODEL_ID", "some-model"),
                ("INSIGHT_LISTEN", "0.0.0.0:9000"),
            ]),
        )
        .unwrap();
        assert_eq!(cfg.listen_addr.port(), 9000);
        assert!(matches!(&cfg.model, ModelSetup::OpenAi(m) if m.model_id == "some-model"));
        let dbg = format!("{cfg:?}");
        assert!(!dbg.contains("sk-ocr") && !dbg.contains("sk-llm"), "{dbg}");
    }

    #[test]
    fn missing_prompt_config_refuses_to_start() {
        let cfg = ServiceConfig::from_lookup(true, lookup(&[("INSIGHT_PROMPTS", "/nonexistent.yaml")]))
            .unwrap();
        assert!(matches!(
            cfg.build_pipeline(),
            Err(StartupError::MissingPath { what: "prompt config", .. })
        ));
    }

    #[test]
    fn budget_is_provider_timeouts_plus_slack() {
        let cfg = ServiceConfig::mock();
        assert_eq!(cfg.timeout_budget(), Duration::from_secs(2 * FIXTURE_TIMEOUT_S + 10));
    }
}
