mod common;

use std::sync::Arc;

use axum::http::{Method, StatusCode};
use chrono::TimeDelta;
use common::*;
use serde_json::json;
use socialrag::agent::ManualClock;
use socialrag::sim::{export_report, parse_json_lines, ReportFormat};
use socialrag_service::cli::{format_for, replay_summary, run_replay, run_report};
use socialrag_service::{router, Service, ServiceConfig};

#[test]
fn replay_writes_the_requested_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    std::fs::write(&path, serde_json::to_string(&transcript(60)).unwrap()).unwrap();

    let csv = dir.path().join("out.csv");
    let r = run_replay(&path, 3, Some(&csv)).unwrap();
    assert_eq!(std::fs::read(&csv).unwrap(), export_report(&r.series, ReportFormat::Csv).unwrap());
    let summary = replay_summary(&r);
    assert!(summary.starts_with(&format!("{} cycles, {} bot posts", r.cycles.len(), r.bot_posts.len())));

    let jsonl = dir.path().join("out.jsonl");
    let again = run_replay(&path, 3, Some(&jsonl)).unwrap();
    let parsed = parse_json_lines(std::io::BufReader::new(std::fs::File::open(&jsonl).unwrap())).unwrap();
    assert_eq!(parsed, again.series);
    assert_eq!(again.series, r.series);

    assert!(run_replay(&dir.path().join("missing.json"), 3, None).is_err());
}

#[test]
fn report_file_extension_picks_the_format() {
    assert_eq!(format_for("a/b.json".as_ref()), ReportFormat::JsonLines);
    assert_eq!(format_for("b.jsonl".as_ref()), ReportFormat::JsonLines);
    assert_eq!(format_for("b.csv".as_ref()), ReportFormat::Csv);
    assert_eq!(format_for("b".as_ref()), ReportFormat::Csv);
}

fn write_config(dir: &std::path::Path) -> std::path::PathBuf {
    let corpus = dir.join("corpus.jsonl");
    fixture().write(std::fs::File::create(&corpus).unwrap()).unwrap();
    let path = dir.join("svc.toml");
    std::fs::write(
        &path,
        "corpus = \"corpus.jsonl\"\nevent_log = \"data/events.jsonl\"\nseed = 11\n\n[[channels]]\nchannel = \"team\"\nfrequency = \"daily\"\n",
    )
    .unwrap();
    path
}

#[tokio::test]
async fn the_event_log_survives_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServiceConfig::load(write_config(dir.path())).unwrap();
    let clock = Arc::new(ManualClock::new(t0()));

    let s = Arc::new(Service::open(&cfg, clock.clone()).unwrap());
    let app = router(s.clone());
    let shared = call(&app, Method::POST, "/channels/team/messages", Some(json!({"actor": "ana", "text": link(6)}))).await;
    assert_eq!(shared.status, StatusCode::CREATED);
    let seq = shared.json()["seq"].as_u64().unwrap();
    assert_eq!(seq, 2, "the config event comes first");
    call(&app, Method::POST, &format!("/channels/team/messages/{seq}/reactions"), Some(json!({"actor": "bo", "emoji": "thumbsup"}))).await;
    clock.advance(TimeDelta::hours(1));
    assert_eq!(s.tick().len(), 1);
    let before = s.agent().kb().clone();
    drop(app);
    drop(s);

    // same config: nothing new is appended on start
    let s = Service::open(&cfg, clock.clone()).unwrap();
    assert!(*s.agent().kb() == before);

    // a changed config appends one config event
    let mut changed = cfg.clone();
    changed.channels[0].frequency = socialrag::Frequency::Weekly;
    let s = Service::open(&changed, clock).unwrap();
    let log = s.agent().kb().channel("team").unwrap().log().len();
    assert_eq!(log, before.channel("team").unwrap().log().len() + 1);
    assert_eq!(s.config("team").frequency, socialrag::Frequency::Weekly);

    let csv = run_report(&cfg.event_log, "team", ReportFormat::Csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text, "day,human_recs,bot_recs,emoji_reactions,comments\n0,1,1,1,0\n");
    assert!(run_report(&cfg.event_log, "elsewhere", ReportFormat::Csv).is_err());
}

#[test]
fn broken_log_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ServiceConfig::load(write_config(dir.path())).unwrap();
    std::fs::create_dir_all(cfg.event_log.parent().unwrap()).unwrap();
    std::fs::write(&cfg.event_log, "{not json}\n").unwrap();
    let clock = Arc::new(ManualClock::new(t0()));
    assert!(Service::open(&cfg, clock.clone()).is_err());
    cfg.corpus = Some(dir.path().join("absent.jsonl"));
    assert!(Service::open(&cfg, clock).is_err());
}
