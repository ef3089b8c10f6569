//! Scenario files: everything a headless run needs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use teleop_core::VelocityLimits;
use teleop_netlink::LinkConfig;
use teleop_robot::AgentConfig;
use teleop_worldsim::{SensorNoise, WorldModel};

use crate::error::ServerError;
use crate::twin::TwinParams;

pub const SCENARIO_SCHEMA: u32 = 1;

/// One scripted operator action, fired at `at` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScriptAction {
    /// Teleop at 20 Hz from `at` until `until`.
    Drive { at: f64, v: f64, w: f64, until: f64 },
    Goal { at: f64, x: f64, y: f64, theta: Option<f64> },
    OutageStart { at: f64 },
    OutageEnd { at: f64 },
}

impl ScriptAction {
    pub fn at(&self) -> f64 {
        match *self {
            Self::Drive { at, .. } | Self::Goal { at, .. } | Self::OutageStart { at } | Self::OutageEnd { at } => at,
        }
    }
}

fn default_noise() -> SensorNoise {
    SensorNoise::off(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    /// World file, relative to the scenario file.
    pub world: PathBuf,
    /// Simulated seconds to run.
    pub duration: f64,
    /// Seeds the link and the sensor noise; overrides their own seeds.
    pub seed: u64,
    #[serde(default)]
    pub link: LinkConfig,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub twin: TwinParams,
    #[serde(default = "default_noise")]
    pub noise: SensorNoise,
    #[serde(default)]
    pub limits: VelocityLimits,
    #[serde(default)]
    pub script: Vec<ScriptAction>,
}

/// Scenario with its world loaded and seeds applied.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub world: WorldModel,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ServerError> {
        serde_json::from_str(text).map_err(|e| ServerError::Scenario(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ServerError> {
        let bad = |m: String| Err(ServerError::Scenario(m));
        if self.schema != SCENARIO_SCHEMA {
            return bad(format!("unsupported schema {}", self.schema));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        let t = &self.twin;
        if !(t.staleness > 0.0 && t.v_pred >= 0.0 && t.smoothing_t >= 0.0 && t.correction_t >= 0.0) {
            return bad("twin parameters out of range".into());
        }
        if !self.noise.is_valid() {
            return bad("noise parameters must be non-negative".into());
        }
        if !(self.limits.v_max > 0.0 && self.limits.w_max > 0.0) {
            return bad("velocity limits must be positive".into());
        }
        for a in &self.script {
            if !(a.at().is_finite() && a.at() >= 0.0) {
                return bad(format!("script time {} out of range", a.at()));
            }
            if let ScriptAction::Drive { at, until, v, w } = *a {
                if !(until >= at && v.is_finite() && w.is_finite()) {
                    return bad(format!("drive at {at} is malformed"));
                }
            }
            if let ScriptAction::Goal { x, y, .. } = *a {
                if !(x.is_finite() && y.is_finite()) {
                    return bad("goal coordinates must be finite".into());
                }
            }
        }
        let mut link = self.link.clone();
        link.seed = self.seed;
        link.validate()?;
        self.agent.validate()?;
        Ok(())
    }
}

impl Scenario {
    /// Loads and validates a scenario file and the world it names.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServerError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServerError::Scenario(format!("{}: {e}", path.display())))?;
        let config = ScenarioConfig::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::with_base(config, base)
    }

    /// Resolves the world path against `base`.
    pub fn with_base(config: ScenarioConfig, base: &Path) -> Result<Self, ServerError> {
        config.validate()?;
        let world = WorldModel::load(base.join(&config.world))?;
        Ok(Self::new(config, world))
    }

    pub fn new(mut config: ScenarioConfig, world: WorldModel) -> Self {
        config.script.sort_by(|a, b| a.at().total_cmp(&b.at()));
        let seed = config.seed;
        config.link.seed = seed;
        config.noise.rng_seed = seed;
        Self { config, world }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.config.seed = seed;
        self.config.link.seed = seed;
        self.config.noise.rng_seed = seed;
        self
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"schema":1,"world":"w.json","duration":10,"seed":3,
        "script":[{"action":"goal","at":2,"x":1,"y":1},
                  {"action":"drive","at":1,"v":0.3,"w":0,"until":4}]}"#;

    #[test]
    fn parses_with_defaults() {
        let c = ScenarioConfig::from_json(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.twin, TwinParams::default());
        assert_eq!(c.agent, AgentConfig::default());
        assert_eq!(c.script.len(), 2);
        assert_eq!(c.script[0], ScriptAction::Goal { at: 2.0, x: 1.0, y: 1.0, theta: None });
    }

    #[test]
    fn unknown_fields_and_bad_values_rejected() {
        assert!(ScenarioConfig::from_json(&MINIMAL.replace("\"seed\"", "\"sead\"")).is_err());
        let mut c = ScenarioConfig::from_json(MINIMAL).unwrap();
        c.schema = 2;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::from_json(MINIMAL).unwrap();
        c.link.loss_prob = 1.5;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::from_json(MINIMAL).unwrap();
        c.script.push(ScriptAction::Drive { at: 5.0, v: 0.1, w: 0.0, until: 4.0 });
        assert!(c.validate().is_err());
    }

    #[test]
    fn seed_propagates_and_script_sorts() {
        let c = ScenarioConfig::from_json(MINIMAL).unwrap();
        let bounds = teleop_worldsim::Bounds {
            min_x: 0.0,
            min_y: 0.0,
            max_x: 2.0,
            max_y: 2.0,
        };
        let s = Scenario::new(c, WorldModel::empty(bounds)).with_seed(11);
        assert_eq!(s.config.link.seed, 11);
        assert_eq!(s.config.noise.rng_seed, 11);
        assert_eq!(s.config.script[0].at(), 1.0);
    }
}
