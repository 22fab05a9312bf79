use std::collections::BTreeSet;

use super::{normalize_text, same_author, SignalContext, SignalPayload, SocialSignal};
use crate::clients::{Author, PaperRecord};
use crate::kb::IndexedPaper;
use crate::signals::Heuristic;
use crate::Scalar;

fn ratio(k: usize) -> Scalar {
    k as Scalar / (k as Scalar + 1.0)
}

/// h1-h4: the candidate's authors, affiliations and venue against the
/// channel's members and recently engaged papers.
pub fn detect_metadata_signals(candidate: &PaperRecord, ctx: &SignalContext) -> Vec<SocialSignal> {
    let members = ctx.members();
    let recent: Vec<(&IndexedPaper, &PaperRecord)> = ctx
        .priors(candidate)
        .filter(|(ip, _)| ip.human_engaged_within(ctx.window, ctx.now))
        .collect();
    let mut out = Vec::new();

    // h1
    for a in candidate.authors.iter().filter(|a| !a.author_id.is_empty()) {
        for m in &members {
            if m.linked_author_id.as_deref() == Some(a.author_id.as_str()) {
                out.push(SocialSignal::new(
                    Heuristic::H1,
                    SignalPayload::AuthorIsMember {
                        member_id: m.member_id.clone(),
                        author_name: a.name.clone(),
                    },
                    1.0,
                ));
            }
        }
    }

    // h2, once per distinct author
    let mut seen: Vec<&Author> = Vec::new();
    for a in &candidate.authors {
        if seen.iter().any(|s| same_author(s, a)) {
            continue;
        }
        seen.push(a);
        let hits: Vec<&(&IndexedPaper, &PaperRecord)> = recent
            .iter()
            .filter(|(_, r)| r.authors.iter().any(|b| same_author(a, b)))
            .collect();
        if !hits.is_empty() {
            out.push(
                SocialSignal::new(
                    Heuristic::H2,
                    SignalPayload::AuthorRecent {
                        author_name: a.name.clone(),
                        count: hits.len(),
                        papers: hits.iter().map(|(ip, _)| ip.paper_ref.clone()).collect(),
                    },
                    ratio(hits.len()),
                )
                .with_engagement(hits.iter().map(|(ip, _)| ip.engagement_count()).sum())
                .with_evidence(hits.iter().flat_map(|(ip, _)| ip.evidence_seqs()).collect()),
            );
        }
    }

    // h3, once per distinct affiliation
    let mut affiliations: BTreeSet<String> = BTreeSet::new();
    for a in &candidate.authors {
        for aff in &a.affiliations {
            let key = normalize_text(aff);
            if key.is_empty() || !affiliations.insert(key.clone()) {
                continue;
            }
            let ids: Vec<String> = members
                .iter()
                .filter(|m| m.affiliation.as_deref().is_some_and(|x| normalize_text(x) == key))
                .map(|m| m.member_id.clone())
                .collect();
            if !ids.is_empty() {
                out.push(SocialSignal::new(
                    Heuristic::H3,
                    SignalPayload::Affiliation {
                        affiliation: aff.trim().to_string(),
                        member_ids: ids,
                    },
                    0.5,
                ));
            }
        }
    }

    // h4
    if let Some(venue) = candidate.venue.as_deref() {
        let key = normalize_text(venue);
        if !key.is_empty() {
            let hits: Vec<&(&IndexedPaper, &PaperRecord)> = recent
                .iter()
                .filter(|(_, r)| r.venue.as_deref().is_some_and(|v| normalize_text(v) == key))
                .collect();
            if !hits.is_empty() {
                out.push(
                    SocialSignal::new(
                        Heuristic::H4,
                        SignalPayload::VenueRecent {
                            venue: venue.trim().to_string(),
                            count: hits.len(),
                            papers: hits.iter().map(|(ip, _)| ip.paper_ref.clone()).collect(),
                        },
                        ratio(hits.len()),
                    )
                    .with_engagement(hits.iter().map(|(ip, _)| ip.engagement_count()).sum())
                    .with_evidence(hits.iter().flat_map(|(ip, _)| ip.evidence_seqs()).collect()),
                );
            }
        }
    }
    out
}
