//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! scheme = "spacemeta"          # spacemeta | spacertc | via
//! seeds = [1, 2, 3]
//! output_dir = "out/desk"       # optional
//!
//! [shell]                       # num_orbits, sats_per_orbit, altitude_km,
//! num_orbits = 10               # inclination_deg, phase_factor (1),
//! sats_per_orbit = 20           # earth_radius_km (6371), epoch_s (0)
//! altitude_km = 550.0
//! inclination_deg = 53.0
//!
//! [graph]                       # lambda, isl_capacity_mbps, usl_capacity_mbps
//! [selection]                   # k, delta_km, alpha, slot_duration_s
//! [regions]                     # n_max, d_max
//! [traffic]                     # n_users, p_join, horizon_s, up_bw_min, up_bw_max
//! [via]                         # k, path_stretch, fiber_speed_factor, smoothing
//! [routing]                     # path_cap
//! ```
//!
//! Every section except `[shell]` may be omitted and then takes the defaults
//! below. The number of slots is `floor(horizon_s / slot_duration_s)`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use spacemeta_core::baselines::ViaParams;
use spacemeta_core::flow::DEFAULT_PATH_CAP;
use spacemeta_core::region::RegionParams;
use spacemeta_core::relay::SelectionParams;
use spacemeta_core::sessions::SessionPolicy;
use spacemeta_core::{GraphParams, ShellConfig};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Spacemeta,
    Spacertc,
    Via,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Spacemeta, Scheme::Spacertc, Scheme::Via];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Spacemeta => "spacemeta",
            Scheme::Spacertc => "spacertc",
            Scheme::Via => "via",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spacemeta" => Ok(Scheme::Spacemeta),
            "spacertc" => Ok(Scheme::Spacertc),
            "via" => Ok(Scheme::Via),
            other => Err(HarnessError::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Traffic {
    pub n_users: usize,
    pub p_join: f64,
    pub horizon_s: f64,
    pub up_bw_min: f64,
    pub up_bw_max: f64,
}

impl Default for Traffic {
    fn default() -> Self {
        Self {
            n_users: 500,
            p_join: 0.8,
            horizon_s: 300.0,
            up_bw_min: 2.0,
            up_bw_max: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Routing {
    pub path_cap: usize,
}

impl Default for Routing {
    fn default() -> Self {
        Self {
            path_cap: DEFAULT_PATH_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub scheme: Scheme,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub shell: ShellConfig,
    #[serde(default)]
    pub graph: GraphParams,
    #[serde(default)]
    pub selection: SelectionParams,
    #[serde(default)]
    pub regions: RegionParams,
    #[serde(default)]
    pub traffic: Traffic,
    #[serde(default)]
    pub via: ViaParams,
    #[serde(default)]
    pub routing: Routing,
}

impl Scenario {
    /// 10 x 20 shell, 500 users, 3 seeds, 20 slots of 15 s.
    pub fn desk() -> Self {
        Self {
            scheme: Scheme::Spacemeta,
            seeds: vec![1, 2, 3],
            output_dir: None,
            shell: ShellConfig::new(10, 20, 550.0, 53.0, 1).expect("valid"),
            graph: GraphParams::default(),
            selection: SelectionParams::default(),
            regions: RegionParams::default(),
            traffic: Traffic::default(),
            via: ViaParams::default(),
            routing: Routing::default(),
        }
    }

    /// 24 x 66 shell at 550 km with 5000 users.
    pub fn full_scale() -> Self {
        Self {
            shell: ShellConfig::starlink_phase1(),
            traffic: Traffic {
                n_users: 5000,
                ..Traffic::default()
            },
            ..Self::desk()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let s: Scenario = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| HarnessError::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let cfg = |e: spacemeta_core::ConfigError| HarnessError::Config(e.to_string());
        self.shell.validate().map_err(cfg)?;
        self.graph.validate().map_err(cfg)?;
        self.selection.validate().map_err(cfg)?;
        self.regions.validate().map_err(cfg)?;
        self.via.validate().map_err(cfg)?;
        self.session_policy().validate().map_err(cfg)?;
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }
        if self.traffic.horizon_s < self.selection.slot_duration_s {
            return Err(HarnessError::Config(
                "horizon_s must be at least one slot long".into(),
            ));
        }
        if self.routing.path_cap == 0 {
            return Err(HarnessError::Config("path_cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn num_slots(&self) -> u32 {
        (self.traffic.horizon_s / self.selection.slot_duration_s).floor() as u32
    }

    pub fn session_policy(&self) -> SessionPolicy {
        SessionPolicy {
            p_join: self.traffic.p_join,
            horizon_s: self.traffic.horizon_s,
            up_bw_min: self.traffic.up_bw_min,
            up_bw_max: self.traffic.up_bw_max,
            usl_capacity: self.graph.usl_capacity_mbps,
        }
    }

    /// True when the two scenarios differ at most in `scheme` and `output_dir`.
    pub fn same_except_scheme(&self, other: &Scenario) -> bool {
        let norm = |s: &Scenario| Scenario {
            scheme: Scheme::Spacemeta,
            output_dir: None,
            ..s.clone()
        };
        norm(self) == norm(other)
    }
}
