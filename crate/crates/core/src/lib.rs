//! Core algorithms for multi-user virtual-interaction sessions carried over a
//! LEO constellation: shell propagation, per-slot network graphs, region
//! division, ingress relay selection, min-hop flow allocation, latency
//! metrics and the two comparison schemes.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem lives in the `spacemeta` harness crate.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`constellation`] | Walker shell, circular propagation, ISL/USL visibility |
//! | [`topology`] | Slot graph, link ledger, reservation, constraint audit |
//! | [`sessions`] | Population-weighted user generation and rosters |
//! | [`region`] | Greedy size/diameter-capped region division |
//! | [`relay`] | Top-k candidate scoring and handover |
//! | [`flow`] | Min-hop path enumeration and activated-link reuse |
//! | [`metrics`] | Pair latency, session objective, quartiles |
//! | [`baselines`] | Single-unit satellite scheme and terrestrial cloud relays |

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baselines;
pub mod constellation;
pub mod flow;
pub mod geo;
pub mod metrics;
pub mod population;
pub mod region;
pub mod relay;
pub mod sessions;
pub mod topology;

pub use constellation::{propagate, propagation_latency_ms, SatelliteState, ShellConfig};
pub use geo::{great_circle_km, GroundPoint, Vec3};
pub use topology::{GraphParams, LinkId, NetworkGraph, NodeId, NodeKind};

/// Invalid configuration values.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(&'static str),
}
