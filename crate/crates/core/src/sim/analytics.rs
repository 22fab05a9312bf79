use std::io::BufRead;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{ChannelState, Payload};

pub const CSV_HEADER: [&str; 5] = ["day", "human_recs", "bot_recs", "emoji_reactions", "comments"];

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("invalid input: unknown report format {0:?}")]
    UnknownFormat(String),
    #[error("export: {0}")]
    Io(String),
    #[error("json-lines line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Cumulative counts at the end of one day.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRow {
    /// Days since the first bot recommendation; negative before it.
    pub day: i64,
    pub human_recs: u64,
    pub bot_recs: u64,
    pub emoji_reactions: u64,
    pub comments: u64,
    /// Share of `emoji_reactions` aimed at bot posts.
    pub reactions_on_bot_posts: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CumulativeSeries {
    pub rows: Vec<SeriesRow>,
}

impl CumulativeSeries {
    pub fn last(&self) -> SeriesRow {
        self.rows.last().copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    JsonLines,
}

impl FromStr for ReportFormat {
    type Err = AnalyticsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" | "jsonl" | "json-lines" => Ok(ReportFormat::JsonLines),
            other => Err(AnalyticsError::UnknownFormat(other.to_string())),
        }
    }
}

/// Per-day cumulative usage counts for one channel.
///
/// Human recommendations are member messages with at least one paper link;
/// reactions and comments count when their target thread carries a paper,
/// whether a member or the agent shared it.
pub fn engagement_report(channel: &ChannelState) -> CumulativeSeries {
    let log = channel.log();
    let day0: Option<NaiveDate> = channel
        .bot_posts()
        .next()
        .map(|(e, _)| e.ts.date_naive())
        .or_else(|| log.first().map(|e| e.ts.date_naive()));
    let Some(day0) = day0 else {
        return CumulativeSeries {
            rows: vec![SeriesRow::default()],
        };
    };
    let day = |e: &crate::kb::SocialEvent| (e.ts.date_naive() - day0).num_days();
    let first = log.iter().map(day).min().unwrap_or(0).min(0);
    let last = log.iter().map(day).max().unwrap_or(0).max(0);
    let mut rows: Vec<SeriesRow> = (first..=last)
        .map(|d| SeriesRow {
            day: d,
            ..Default::default()
        })
        .collect();
    for e in log {
        let row = &mut rows[usize::try_from(day(e) - first).expect("day within range")];
        match &e.payload {
            Payload::Message(_) if !channel.is_agent(&e.actor) && !channel.post_papers(e.seq).is_empty() => {
                row.human_recs += 1;
            }
            Payload::BotPost(_) => row.bot_recs += 1,
            Payload::Reaction(r) if !channel.post_papers(r.target_seq).is_empty() => {
                row.emoji_reactions += 1;
                if channel
                    .event(r.target_seq)
                    .is_some_and(|t| matches!(t.payload, Payload::BotPost(_)))
                {
                    row.reactions_on_bot_posts += 1;
                }
            }
            Payload::Reply(_) if !channel.post_papers(channel.thread_root(e.seq)).is_empty() => {
                row.comments += 1;
            }
            _ => {}
        }
    }
    let mut acc = SeriesRow::default();
    for row in &mut rows {
        acc.human_recs += row.human_recs;
        acc.bot_recs += row.bot_recs;
        acc.emoji_reactions += row.emoji_reactions;
        acc.comments += row.comments;
        acc.reactions_on_bot_posts += row.reactions_on_bot_posts;
        *row = SeriesRow { day: row.day, ..acc };
    }
    CumulativeSeries { rows }
}

/// Serializes the series. Output is a pure function of the series.
pub fn export_report(series: &CumulativeSeries, format: ReportFormat) -> Result<Vec<u8>, AnalyticsError> {
    let io = |e: &dyn std::fmt::Display| AnalyticsError::Io(e.to_string());
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).map_err(|e| io(&e))?;
            for r in &series.rows {
                w.write_record([
                    r.day.to_string(),
                    r.human_recs.to_string(),
                    r.bot_recs.to_string(),
                    r.emoji_reactions.to_string(),
                    r.comments.to_string(),
                ])
                .map_err(|e| io(&e))?;
            }
            w.into_inner().map_err(|e| io(&e))
        }
        ReportFormat::JsonLines => {
            let mut out = Vec::new();
            for r in &series.rows {
                serde_json::to_writer(&mut out, r).map_err(|e| io(&e))?;
                out.push(b'\n');
            }
            Ok(out)
        }
    }
}

pub fn parse_json_lines<R: BufRead>(input: R) -> Result<CumulativeSeries, AnalyticsError> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let err = |msg: String| AnalyticsError::Parse { line: i + 1, msg };
        let line = line.map_err(|e| err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line).map_err(|e| err(e.to_string()))?);
    }
    Ok(CumulativeSeries { rows })
}
