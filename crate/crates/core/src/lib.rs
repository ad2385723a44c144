//! Adaptive scaffolding decision engine.
//!
//! A partner model tracks a human's processing capacity, gaze distribution
//! and per-task awareness. Its classified observation triple is reduced by a
//! configurable scoring table to one of six cognitive states, and a tabular
//! Q-learner, optionally seeded from the same table, picks a scaffolding
//! action (negation type x hesitation type). Rewards come from timed task
//! performance on two dimensions, comprehension and enabledness.
//!
//! The [`simulation`] module replays the learner against scripted user types
//! and [`protocol`] exposes sessions over a line-delimited JSON protocol.

pub mod config;
mod error;
pub mod partner_model;
pub mod policy;
pub mod protocol;
pub mod scoring;
pub mod session;
pub mod simulation;

pub use config::Config;
pub use error::{Error, Result};
pub use partner_model::{
    CapacityClass, CapacityState, GazeClass, GazeState, ObservationTriple, PartnerModel,
    PartnerModelConfig, TaskAwareness, TaskClass,
};
pub use policy::{PolicyParams, QTable, Selection};
pub use scoring::{
    Action, Category, CognitiveState, GroundTruthMap, HesitationType, NegationType, Observation,
    ReductionBins, ScoringTable, Strategy,
};
pub use session::{
    reward, tp_score, Agent, Decision, DimensionOutcome, EpisodeLog, EpisodeRecord, RewardParams,
    Session, TaskPerformance,
};
