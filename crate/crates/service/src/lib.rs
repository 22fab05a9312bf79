//! HTTP service and command-line front end for the socialrag engine.

pub mod api;
pub mod cli;
pub mod config;
pub mod state;

pub use api::router;
pub use config::ServiceConfig;
pub use state::{Service, ServiceError, SharedService};
