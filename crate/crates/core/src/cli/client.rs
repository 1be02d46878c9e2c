use std::time::Duration;

use reqwest::blocking::Client as Http;
use reqwest::Url;

use super::CliError;
use crate::service::{parse_exception_report, requests as rq};

/// Blocking client for one service endpoint.
pub struct Client {
    endpoint: Url,
    http: Http,
}

impl Client {
    pub fn new(endpoint: &str, timeout: Duration) -> Result<Self, CliError> {
        let endpoint = Url::parse(endpoint).map_err(|e| CliError::Usage(format!("bad endpoint '{endpoint}': {e}")))?;
        let http = Http::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| CliError::Network(e.to_string()))?;
        Ok(Client { endpoint, http })
    }

    pub fn endpoint(&self) -> &str {
        self.endpoint.as_str()
    }

    /// URL of a sibling route: `/sps` maps to `/sps/<path>`, the root to `/<path>`.
    fn url(&self, path: &str, query: &[(&str, &str)]) -> Url {
        let mut u = self.endpoint.clone();
        let base = u.path().trim_end_matches('/');
        let full = if path.starts_with('/') {
            path.to_string()
        } else {
            format!("{base}/{path}")
        };
        u.set_path(&full);
        u.set_query(None);
        if !query.is_empty() {
            u.query_pairs_mut().extend_pairs(query);
        }
        u
    }

    fn finish(resp: reqwest::Result<reqwest::blocking::Response>) -> Result<String, CliError> {
        let resp = resp.map_err(|e| CliError::Network(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| CliError::Network(e.to_string()))?;
        if (200..300).contains(&status) {
            return Ok(body);
        }
        Err(match parse_exception_report(&body) {
            Some((code, locator, texts)) => CliError::Service {
                status,
                code,
                locator,
                texts,
            },
            None => CliError::Network(format!("HTTP {status}: {}", body.trim())),
        })
    }

    /// Posts one operation document to the endpoint.
    pub fn operation(&self, xml: &str) -> Result<String, CliError> {
        log::debug!("POST {}: {xml}", self.endpoint);
        Self::finish(
            self.http
                .post(self.endpoint.clone())
                .header("Content-Type", "application/xml")
                .body(xml.to_string())
                .send(),
        )
    }

    pub fn get(&self, path: &str, query: &[(&str, &str)]) -> Result<String, CliError> {
        Self::finish(self.http.get(self.url(path, query)).send())
    }

    pub fn post(&self, path: &str, query: &[(&str, &str)], body: String) -> Result<String, CliError> {
        Self::finish(self.http.post(self.url(path, query)).body(body).send())
    }

    pub fn topics(&self) -> Result<String, CliError> {
        self.get("topics", &[])
    }

    pub fn subscribe(&self, filter: &str) -> Result<String, CliError> {
        self.post("subscriptions", &[], rq::subscribe(filter))
    }

    pub fn drain(&self, subscription: &str, wait: f64, max: Option<usize>) -> Result<String, CliError> {
        let wait = wait.to_string();
        let max = max.map(|m| m.to_string());
        let mut q = vec![("wait", wait.as_str())];
        if let Some(m) = &max {
            q.push(("max", m.as_str()));
        }
        self.get(&format!("subscriptions/{subscription}/events"), &q)
    }

    pub fn unsubscribe(&self, subscription: &str) -> Result<(), CliError> {
        let resp = self.http.delete(self.url(&format!("subscriptions/{subscription}"), &[])).send();
        Self::finish(resp).map(|_| ())
    }

    /// Advances the virtual clock. A 403 means clock control is off.
    pub fn advance(&self, seconds: u64) -> Result<String, CliError> {
        self.post("/clock/advance", &[("seconds", &seconds.to_string())], String::new())
    }

    pub fn clock(&self) -> Result<String, CliError> {
        self.get("/clock", &[])
    }
}
