//! The work behind `replay` and `report`, kept apart from argument parsing.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use socialrag::kb::{read_events, KnowledgeBase};
use socialrag::sim::{engagement_report, export_report, replay, ReplayResult, ReportFormat, Transcript};

/// Report format implied by a file name: json-lines for `.json`/`.jsonl`, csv otherwise.
pub fn format_for(path: &Path) -> ReportFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json" | "jsonl") => ReportFormat::JsonLines,
        _ => ReportFormat::Csv,
    }
}

/// Replays a transcript file and optionally writes its engagement report.
pub fn run_replay(transcript: &Path, seed: u64, report: Option<&Path>) -> anyhow::Result<ReplayResult> {
    let t = Transcript::load(transcript)?;
    let result = replay(&t, seed)?;
    if let Some(out) = report {
        std::fs::write(out, export_report(&result.series, format_for(out))?)?;
    }
    Ok(result)
}

pub fn replay_summary(r: &ReplayResult) -> String {
    let last = r.series.last();
    let mut out = format!(
        "{} cycles, {} bot posts\nfinal totals: human_recs {} bot_recs {} emoji_reactions {} comments {}\n",
        r.cycles.len(),
        r.bot_posts.len(),
        last.human_recs,
        last.bot_recs,
        last.emoji_reactions,
        last.comments
    );
    for e in &r.bot_posts {
        out.push_str(&format!("{} #{}\n", e.ts.format("%Y-%m-%d %H:%M"), e.seq));
    }
    out
}

/// Engagement report for `channel`, computed from an event log.
pub fn run_report(events: &Path, channel: &str, format: ReportFormat) -> anyhow::Result<Vec<u8>> {
    let f = File::open(events).map_err(|e| anyhow::anyhow!("{}: {e}", events.display()))?;
    let kb = KnowledgeBase::from_events(read_events(BufReader::new(f))?)?;
    let ch = kb.channel_or_err(channel)?;
    Ok(export_report(&engagement_report(ch), format)?)
}
