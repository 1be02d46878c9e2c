use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Deserialize;

use crate::asset::{AssetError, AssetProfile};
use crate::swe::{parse_tasking_description, ParameterDescription, SchemaError};

pub const DEFAULT_PORT: u16 = 8484;
pub const CONFIG_ENV: &str = "SPS_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    Virtual,
    System,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockConfig {
    pub mode: ClockMode,
    /// Start instant of the virtual clock.
    #[serde(default)]
    pub start: Option<DateTime<Utc>>,
}

fn default_lifetime() -> u64 {
    300
}

fn default_queue() -> usize {
    crate::notify::DEFAULT_QUEUE_CAPACITY
}

fn default_port() -> u16 {
    DEFAULT_PORT
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ServiceConfig {
    pub title: String,
    #[serde(default)]
    pub provider: String,
    #[serde(default = "default_port")]
    pub port: u16,
    /// Assets file, relative to the service config file.
    pub assets: String,
    #[serde(default = "default_lifetime")]
    pub reservation_lifetime_s: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub debug_clock: bool,
    pub clock: ClockConfig,
    #[serde(default = "default_queue")]
    pub queue_capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ProcedureEntry {
    procedure_id: String,
    tasking_description: String,
    sensor_description: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssetsFile {
    procedures: Vec<ProcedureEntry>,
    assets: Vec<AssetProfile>,
}

/// A procedure with its tasking description and stored sensor document.
#[derive(Debug, Clone, PartialEq)]
pub struct Procedure {
    pub id: String,
    pub description: ParameterDescription,
    pub sensor_document: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub service: ServiceConfig,
    pub procedures: BTreeMap<String, Procedure>,
    pub assets: Vec<AssetProfile>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error("{path}: {source}")]
    Description { path: String, source: SchemaError },
    #[error(transparent)]
    Asset(#[from] AssetError),
    #[error("{0}")]
    Invalid(String),
}

fn read_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn json<T: for<'de> Deserialize<'de>>(path: &str, text: &str) -> Result<T, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Json {
        path: path.to_string(),
        message: e.to_string(),
    })
}

/// Joins `rel` onto the directory of `base`, normalizing `..` lexically.
fn resolve(base: &str, rel: &str) -> String {
    let mut parts: Vec<&str> = base.split('/').collect();
    parts.pop();
    for seg in rel.split('/') {
        match seg {
            "." | "" => {}
            ".." if parts.last().is_some_and(|p| !p.is_empty() && *p != "..") => {
                parts.pop();
            }
            s => parts.push(s),
        }
    }
    parts.join("/")
}

/// Loads the service config and everything it references through `read`,
/// which maps a path (relative paths resolved against the referring file)
/// to file contents.
pub fn load_with(
    service_path: &str,
    read: &dyn Fn(&str) -> Result<String, ConfigError>,
) -> Result<LoadedConfig, ConfigError> {
    let service: ServiceConfig = json(service_path, &read(service_path)?)?;
    let assets_path = resolve(service_path, &service.assets);
    let file: AssetsFile = json(&assets_path, &read(&assets_path)?)?;
    let mut procedures = BTreeMap::new();
    for p in file.procedures {
        let dpath = resolve(&assets_path, &p.tasking_description);
        let description = parse_tasking_description(&read(&dpath)?).map_err(|source| ConfigError::Description {
            path: dpath.clone(),
            source,
        })?;
        if description.procedure_id() != p.procedure_id {
            return Err(ConfigError::Invalid(format!(
                "{dpath} describes '{}', expected '{}'",
                description.procedure_id(),
                p.procedure_id
            )));
        }
        let sensor_document = read(&resolve(&assets_path, &p.sensor_description))?;
        if procedures.contains_key(&p.procedure_id) {
            return Err(ConfigError::Invalid(format!("procedure '{}' listed twice", p.procedure_id)));
        }
        procedures.insert(
            p.procedure_id.clone(),
            Procedure {
                id: p.procedure_id,
                description,
                sensor_document,
            },
        );
    }
    let mut seen = std::collections::BTreeSet::new();
    for a in &file.assets {
        a.validate()?;
        if !procedures.contains_key(&a.procedure_id) {
            return Err(ConfigError::Invalid(format!(
                "asset '{}' serves unknown procedure '{}'",
                a.asset_id, a.procedure_id
            )));
        }
        if !seen.insert(a.asset_id.clone()) {
            return Err(ConfigError::Invalid(format!("asset '{}' listed twice", a.asset_id)));
        }
    }
    if service.clock.mode == ClockMode::Virtual && service.clock.start.is_none() {
        return Err(ConfigError::Invalid("virtual clock needs a start instant".into()));
    }
    Ok(LoadedConfig {
        service,
        procedures,
        assets: file.assets,
    })
}

pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let p: PathBuf = path.to_path_buf();
    load_with(&p.to_string_lossy(), &|f| read_file(Path::new(f)))
}

const EMBEDDED: [(&str, &str); 6] = [
    ("config/service.json", include_str!("../../config/service.json")),
    ("config/assets.json", include_str!("../../config/assets.json")),
    (
        "fixtures/descriptions/pointable-imager-01.xml",
        include_str!("../../fixtures/descriptions/pointable-imager-01.xml"),
    ),
    (
        "fixtures/descriptions/weather-station-01.xml",
        include_str!("../../fixtures/descriptions/weather-station-01.xml"),
    ),
    (
        "fixtures/sensors/pointable-imager-01.xml",
        include_str!("../../fixtures/sensors/pointable-imager-01.xml"),
    ),
    (
        "fixtures/sensors/weather-station-01.xml",
        include_str!("../../fixtures/sensors/weather-station-01.xml"),
    ),
];

/// The built-in two-asset configuration.
pub fn default_config() -> LoadedConfig {
    load_with("config/service.json", &|p| {
        EMBEDDED
            .iter()
            .find(|(name, _)| *name == p)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| ConfigError::Io {
                path: p.to_string(),
                message: "not in the embedded bundle".into(),
            })
    })
    .expect("embedded configuration is valid")
}

/// `explicit`, else `$SPS_CONFIG`, else the built-in configuration.
pub fn load_from_args(explicit: Option<&Path>) -> Result<LoadedConfig, ConfigError> {
    match explicit {
        Some(p) => load(p),
        None => match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => load(Path::new(&p)),
            _ => Ok(default_config()),
        },
    }
}
