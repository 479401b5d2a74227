//! Declarative TOML configuration. Every field has a default; CLI flags
//! override whatever the file sets.

use crate::action::ActionBounds;
use crate::agents::{MppiConfig, ScriptedParams};
use crate::episode::EpisodeConfig;
use crate::error::SimError;
use crate::observation::CameraModel;
use crate::reward::RewardWeights;
use crate::scene::{SceneParams, VehicleGeometry};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub scene: SceneParams,
    pub geometry: VehicleGeometry,
    pub episode: EpisodeConfig,
    pub camera: CameraModel,
    pub bounds: ActionBounds,
    pub reward: RewardWeights,
    pub scripted: ScriptedParams,
    pub mppi: MppiConfig,
}

impl RunConfig {
    pub fn from_file<P: AsRef<Path>>(path: P) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::ConfigParse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg.scene, SceneParams::default());
        assert_eq!(cfg.mppi.samples, 256);
    }

    #[test]
    fn partial_overrides_apply() {
        let cfg = RunConfig::from_toml(
            "[scene]\nfriction_mu = 0.2\n\n[mppi]\nhorizon = 10\n\n[episode]\nmax_steps = 50\n",
        )
        .unwrap();
        assert_eq!(cfg.scene.friction_mu, 0.2);
        assert_eq!(cfg.scene.object_mass, 0.5);
        assert_eq!(cfg.mppi.horizon, 10);
        assert_eq!(cfg.episode.max_steps, 50);
    }

    #[test]
    fn bad_toml_is_a_parse_error() {
        assert!(RunConfig::from_toml("scene = nonsense").is_err());
    }
}
