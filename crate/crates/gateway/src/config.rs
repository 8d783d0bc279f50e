//! Loading session configs from disk and the named presets offered over the socket.

use std::path::{Path, PathBuf};

use thiserror::Error;

use gyrohaptic::dynamics::{InertiaModel, WheelParams};
use gyrohaptic::session::{SessionConfig, SessionError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: SessionError },
}

pub fn load_config(path: &Path) -> Result<SessionConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let config: SessionConfig =
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
    config.validate().map_err(|source| ConfigError::Invalid { path: path.into(), source })?;
    Ok(config)
}

pub const PRESET_NAMES: [&str; 6] = ["default", "demo_sweep", "no_spin", "slow_spin", "fast_spin", "solid_disk"];

/// Named variations of `base` (the config the server was started with).
pub fn preset(name: &str, base: &SessionConfig) -> Option<SessionConfig> {
    let with_wheel = |wheel: WheelParams| SessionConfig { wheel, schedule: Vec::new(), ..base.clone() };
    let spin = |rate: f64| with_wheel(WheelParams { spin_rate_rad_s: rate, ..base.wheel });
    match name {
        "default" => Some(base.clone()),
        "demo_sweep" => Some(SessionConfig::default()),
        "no_spin" => Some(spin(0.0)),
        "slow_spin" => Some(spin(10.0)),
        "fast_spin" => Some(spin(60.0)),
        "solid_disk" => Some(with_wheel(WheelParams { inertia_model: InertiaModel::Disk, ..base.wheel })),
        _ => None,
    }
}
