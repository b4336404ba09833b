//! Seeded user generation and per-slot session rosters.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geo::GroundPoint;
use crate::population::PopulationModel;
use crate::topology::NodeId;
use crate::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: NodeId,
    pub location: GroundPoint,
    /// Upstream demand (Mbps).
    pub up_bw: f64,
    /// Downstream demand (Mbps).
    pub down_bw: f64,
    /// Seconds after scenario start.
    pub join_time: f64,
    pub session_id: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub session_id: u32,
    /// Sorted by user id.
    pub members: Vec<User>,
}

impl Session {
    pub fn member_count(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionPolicy {
    /// Probability a new user joins an existing session.
    pub p_join: f64,
    /// Join times are drawn uniformly from `[0, horizon_s)`.
    pub horizon_s: f64,
    pub up_bw_min: f64,
    pub up_bw_max: f64,
    /// Downstream demand is capped so that up + down fit one USL.
    pub usl_capacity: f64,
}

impl Default for SessionPolicy {
    fn default() -> Self {
        Self {
            p_join: 0.8,
            horizon_s: 300.0,
            up_bw_min: 2.0,
            up_bw_max: 4.0,
            usl_capacity: 5.0,
        }
    }
}

impl SessionPolicy {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.p_join) {
            return Err(ConfigError::Invalid("p_join must lie in [0, 1]"));
        }
        if !(self.horizon_s >= 0.0) || !self.horizon_s.is_finite() {
            return Err(ConfigError::Invalid(
                "horizon must be finite and non-negative",
            ));
        }
        if !(self.up_bw_min > 0.0 && self.up_bw_min <= self.up_bw_max) {
            return Err(ConfigError::Invalid(
                "upstream bandwidth range must be positive and ordered",
            ));
        }
        if !(self.usl_capacity > 0.0) {
            return Err(ConfigError::Invalid("USL capacity must be positive"));
        }
        Ok(())
    }

    /// Downstream demand paired with an upstream demand: the same rate,
    /// reduced if needed so both directions share one USL.
    pub fn downstream_for(&self, up_bw: f64) -> f64 {
        up_bw.min(self.usl_capacity - up_bw).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("population model has no cells")]
    EmptyModel,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn pick_cell(model: &PopulationModel, r: f64) -> usize {
    let mut acc = 0.0;
    for (i, c) in model.cells().iter().enumerate() {
        acc += c.weight;
        if r < acc {
            return i;
        }
    }
    model.cells().len() - 1
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Draws `n` users from `model`. Users are numbered `0..n`; session
/// membership is assigned in join-time order so that "existing session"
/// means one somebody has already joined.
pub fn generate_users(
    n: usize,
    model: &PopulationModel,
    policy: &SessionPolicy,
    seed: u64,
) -> Result<Vec<User>, SessionError> {
    policy.validate()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if model.is_empty() {
        return Err(SessionError::EmptyModel);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut users: Vec<User> = (0..n)
        .map(|i| {
            let cell = &model.cells()[pick_cell(model, rng.gen::<f64>())];
            let latitude = uniform(&mut rng, cell.lat_min, cell.lat_max);
            let longitude = uniform(&mut rng, cell.lon_min, cell.lon_max);
            let up_bw = uniform(&mut rng, policy.up_bw_min, policy.up_bw_max);
            let join_time = uniform(&mut rng, 0.0, policy.horizon_s);
            User {
                id: NodeId::user(i as u32),
                location: GroundPoint::new(latitude, longitude),
                up_bw,
                down_bw: policy.downstream_for(up_bw),
                join_time,
                session_id: 0,
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        users[a]
            .join_time
            .total_cmp(&users[b].join_time)
            .then(a.cmp(&b))
    });
    let mut sessions = 0u32;
    for i in order {
        let join_existing = sessions > 0 && rng.gen::<f64>() < policy.p_join;
        users[i].session_id = if join_existing {
            rng.gen_range(0..sessions)
        } else {
            sessions += 1;
            sessions - 1
        };
    }
    Ok(users)
}

/// Sessions whose members have joined by time `t` (inclusive), ordered by
/// session id. Sessions with no joined member are omitted.
pub fn roster_at(users: &[User], t: f64) -> Vec<Session> {
    let mut by_session: BTreeMap<u32, Vec<User>> = BTreeMap::new();
    for u in users.iter().filter(|u| u.join_time <= t) {
        by_session.entry(u.session_id).or_default().push(u.clone());
    }
    by_session
        .into_iter()
        .map(|(session_id, mut members)| {
            members.sort_by_key(|u| u.id);
            Session {
                session_id,
                members,
            }
        })
        .collect()
}
