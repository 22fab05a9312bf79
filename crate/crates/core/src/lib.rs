//! Socially grounded paper recommendations for group chats.
//!
//! The crate is organised around the four stages of the recommendation loop:
//!
//! - [`kb`] ingests chat events into an event-sourced social knowledge base
//!   (papers joined with the posts, reactions, comments and members around them).
//! - [`signals`] detects and ranks the social signals that relate a candidate
//!   paper to a channel.
//! - [`generation`] turns selected signals into a chained prompt, runs it
//!   against a completion client and assembles the final bot message.
//! - [`agent`] schedules cycles per channel, posts through a connector and
//!   feeds reactions back into the knowledge base.
//!
//! [`clients`] holds the pluggable metadata, recommendation and completion
//! clients (with deterministic in-process mocks) and [`sim`] replays chat
//! transcripts in virtual time and computes engagement analytics.
//!
//! Similarity math in [`scalar`] is generic over the float type; the rest of
//! the crate fixes it to [`Scalar`].

pub mod agent;
pub mod clients;
pub mod generation;
pub mod kb;
pub mod scalar;
pub mod signals;
pub mod sim;

#[cfg(test)]
mod testkit;

/// Float type used for embeddings and signal scores throughout the crate.
pub type Scalar = f64;

/// Embedding vector at the crate's working precision.
pub type Embedding = Vec<Scalar>;

/// Single-precision embedding, for callers that store vectors compactly.
pub type EmbeddingF32 = Vec<f32>;

pub use agent::{Agent, ChannelConfig, CycleResult, CycleStatus, Frequency};
pub use clients::{CompletionClient, PaperRecord, PaperSource, Recommender};
pub use generation::{BotMessage, Condition};
pub use kb::{KnowledgeBase, PaperRef, Sentiment, SocialEvent};
pub use signals::{Category, Heuristic, SelectedSignals, SocialSignal};
