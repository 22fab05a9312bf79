//! Deterministic transcript replay in virtual time, and usage analytics.

mod analytics;
mod replay;
mod transcript;

pub use analytics::{
    engagement_report, export_report, parse_json_lines, AnalyticsError, CumulativeSeries,
    ReportFormat, SeriesRow, CSV_HEADER,
};
pub use replay::{replay, ReplayError, ReplayResult, TICK};
pub use transcript::{Audience, Transcript, TranscriptError, DEFAULT_SPAN_DAYS};

#[cfg(test)]
mod tests;
