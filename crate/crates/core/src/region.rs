//! First-fit division of a session into size- and diameter-capped regions.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geo::great_circle_km;
use crate::sessions::{Session, User};
use crate::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionParams {
    pub n_max: usize,
    /// Great-circle diameter cap (km).
    pub d_max: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            n_max: 50,
            d_max: 1000.0,
        }
    }
}

impl RegionParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_max == 0 {
            return Err(ConfigError::Invalid("n_max must be at least 1"));
        }
        if !(self.d_max > 0.0) {
            return Err(ConfigError::Invalid("d_max must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub region_id: u32,
    pub session_id: u32,
    /// Nonempty, ascending by user id.
    pub members: Vec<User>,
}

impl Region {
    /// Largest pairwise great-circle distance among members (km).
    pub fn diameter_km(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.members.iter().enumerate() {
            for b in &self.members[i + 1..] {
                d = d.max(great_circle_km(&a.location, &b.location));
            }
        }
        d
    }
}

/// Users are visited in ascending id; each goes to the lowest-id region it
/// fits in without breaking either cap, otherwise opens a new region.
pub fn divide(session: &Session, params: &RegionParams) -> Vec<Region> {
    let mut members: Vec<&User> = session.members.iter().collect();
    members.sort_by_key(|u| u.id);
    let mut regions: Vec<Region> = Vec::new();
    for user in members {
        let slot = regions.iter_mut().find(|r| {
            r.members.len() < params.n_max
                && r.members
                    .iter()
                    .all(|m| great_circle_km(&m.location, &user.location) <= params.d_max)
        });
        match slot {
            Some(r) => r.members.push(user.clone()),
            None => regions.push(Region {
                region_id: regions.len() as u32,
                session_id: session.session_id,
                members: alloc::vec![user.clone()],
            }),
        }
    }
    regions
}
