use super::*;
use crate::agent::{ChannelConfig, Frequency};
use crate::kb::{Payload, SocialEvent};
use crate::testkit::*;

fn corpus() -> Vec<crate::clients::PaperRecord> {
    (1..=60)
        .map(|n| rec(n, &[(&format!("x{n}"), &format!("Author {n}"))], Some("CHI"), 1.0 - f64::from(n) / 80.0))
        .collect()
}

fn ev(seq: u64, d: i64, actor: &str, payload: Payload) -> SocialEvent {
    SocialEvent {
        seq,
        ts: day(d),
        channel: "lab".into(),
        actor: actor.into(),
        payload,
    }
}

/// Paper 1 shared and liked before the start at day 5.
fn transcript(frequency: Frequency) -> Transcript {
    Transcript {
        channel: "lab".into(),
        start: day(5),
        end: None,
        config: ChannelConfig::new("lab").with_roster(roster()).with_frequency(frequency),
        corpus_path: None,
        corpus: corpus(),
        events: vec![
            ev(1, 1, "cy", Payload::message(format!("see {}", link(1)))),
            ev(2, 1, "bo", Payload::reaction(1, "thumbsup")),
            ev(3, 9, "ada", Payload::message(format!("also {}", link(2)))),
            ev(4, 9, "bo", Payload::reply(3, "thanks")),
        ],
        audience: None,
    }
}

#[test]
fn validation_rejects_malformed_transcripts() {
    let good = transcript(Frequency::Daily);
    let c = good.corpus().unwrap();
    assert!(good.validate(&c).is_ok());
    type Mutant = (&'static str, Box<dyn Fn(&mut Transcript)>);
    let mutants: Vec<Mutant> = vec![
        ("channel", Box::new(|t| t.config.channel = "x".into())),
        ("gap", Box::new(|t| t.events[2].seq = 7)),
        ("agent", Box::new(|t| t.events[0].actor = "agent".into())),
        ("backwards", Box::new(|t| t.events[3].ts = day(0))),
        ("forward target", Box::new(|t| t.events[1].payload = Payload::reaction(2, "x"))),
        ("unknown paper", Box::new(|t| t.events[0].payload = Payload::message(link(999)))),
        ("bot post", Box::new(|t| t.events[0].payload = Payload::Config(Box::new(ChannelConfig::new("lab"))))),
        ("end", Box::new(|t| t.end = Some(t.start))),
        ("event channel", Box::new(|t| t.events[0].channel = "x".into())),
        (
            "audience",
            Box::new(|t| {
                t.audience = Some(Audience {
                    members: vec!["bo".into(), "bo".into()],
                    react_prob: 0.5,
                    reply_prob: 0.0,
                    positive_share: 0.5,
                })
            }),
        ),
    ];
    for (name, m) in mutants {
        let mut t = good.clone();
        m(&mut t);
        assert!(matches!(t.validate(&c), Err(TranscriptError::Invalid(_))), "{name}");
    }
}

#[test]
fn post_counts_follow_frequency() {
    for (f, want) in [(Frequency::Daily, 30), (Frequency::EveryOtherDay, 15), (Frequency::Weekly, 5)] {
        let r = replay(&transcript(f), 1).unwrap();
        assert_eq!(r.bot_posts.len(), want, "{f}");
        let ts: Vec<_> = r.bot_posts.iter().map(|e| e.ts).collect();
        for w in ts.windows(2) {
            assert_eq!(w[1] - w[0], f.period());
        }
        assert_eq!(ts[0], day(5));
    }
}

#[test]
fn replay_interleaves_and_renumbers() {
    let r = replay(&transcript(Frequency::Daily), 1).unwrap();
    let ch = r.kb.channel("lab").unwrap();
    let log = ch.log();
    for (i, e) in log.iter().enumerate() {
        assert_eq!(e.seq, i as u64 + 1);
    }
    // pre-start history, then the config, then the first post
    assert_eq!(log[0].actor, "cy");
    assert!(matches!(log[2].payload, Payload::Config(_)));
    assert!(matches!(log[3].payload, Payload::BotPost(_)));
    // the reply to ada's day-9 share still points at that share
    let reply = log.iter().find(|e| e.actor == "bo" && matches!(e.payload, Payload::Reply(_))).unwrap();
    let target = ch.event(reply.target_seq().unwrap()).unwrap();
    assert_eq!(target.actor, "ada");
    let recs: std::collections::BTreeSet<_> = ch.recommended_refs().into_iter().collect();
    assert_eq!(recs.len(), r.bot_posts.len());
}

#[test]
fn replay_is_a_function_of_seed() {
    let mut t = transcript(Frequency::Daily);
    t.audience = Some(Audience {
        members: vec!["ada".into(), "bo".into(), "cy".into()],
        react_prob: 0.6,
        reply_prob: 0.3,
        positive_share: 0.7,
    });
    let a = replay(&t, 42).unwrap();
    let b = replay(&t, 42).unwrap();
    assert_eq!(a.kb, b.kb);
    assert_eq!(a.series, b.series);
    let c = replay(&t, 43).unwrap();
    assert_ne!(a.kb.channel("lab").unwrap().log(), c.kb.channel("lab").unwrap().log());
    assert!(a.series.last().reactions_on_bot_posts > 0);
}

#[test]
fn report_counts_and_cumulates() {
    let k = channel_kb(
        vec![
            (0, "cy", Payload::message(format!("see {}", link(1)))),
            (0, "bo", Payload::message("no link here")),
            (1, "bo", Payload::reaction(2, "thumbsup")),
            (1, "bo", Payload::reaction(3, "thumbsup")),
            (2, "ada", Payload::reply(2, "nice")),
            (2, "ada", Payload::reply(6, "nested")),
            (2, "ada", Payload::reply(3, "no paper here")),
        ],
        &[],
    );
    let s = engagement_report(k.channel("lab").unwrap());
    // no bot post: day 0 is the first event's date
    let days: Vec<i64> = s.rows.iter().map(|r| r.day).collect();
    assert_eq!(days, vec![0, 1, 2]);
    let last = s.last();
    assert_eq!((last.human_recs, last.bot_recs, last.emoji_reactions, last.comments), (1, 0, 1, 2));
    assert_eq!(s.rows[0].human_recs, 1);
    assert_eq!(s.rows[0].emoji_reactions, 0);
    assert_eq!(s.rows[1].emoji_reactions, 1);
}

#[test]
fn empty_channel_reports_one_zero_row() {
    let ch = crate::kb::ChannelState::new("x");
    assert_eq!(engagement_report(&ch).rows, vec![SeriesRow::default()]);
}

#[test]
fn days_before_first_bot_post_are_negative() {
    let r = replay(&transcript(Frequency::Weekly), 1).unwrap();
    assert_eq!(r.series.rows[0].day, -4);
    let zero = r.series.rows.iter().find(|x| x.day == 0).unwrap();
    assert_eq!(zero.bot_recs, 1);
    for w in r.series.rows.windows(2) {
        assert_eq!(w[1].day, w[0].day + 1);
        assert!(w[1].human_recs >= w[0].human_recs && w[1].comments >= w[0].comments);
    }
}

#[test]
fn exports_round_trip() {
    let r = replay(&transcript(Frequency::EveryOtherDay), 3).unwrap();
    let csv = export_report(&r.series, ReportFormat::Csv).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(text.lines().count(), r.series.rows.len() + 1);
    assert_eq!(export_report(&r.series, ReportFormat::Csv).unwrap(), csv);
    let json = export_report(&r.series, ReportFormat::JsonLines).unwrap();
    assert_eq!(parse_json_lines(json.as_slice()).unwrap(), r.series);
    assert!(matches!(
        parse_json_lines("{\"day\":1}\nnope\n".as_bytes()),
        Err(AnalyticsError::Parse { line: 1, .. })
    ));
    assert_eq!("json".parse::<ReportFormat>().unwrap(), ReportFormat::JsonLines);
    assert!("xml".parse::<ReportFormat>().is_err());
}
