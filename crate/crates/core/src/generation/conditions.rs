use super::chain::MemberNames;
use super::markup::split_sentences;
use crate::clients::PaperRecord;
use crate::signals::{
    InterestVariant, PriorThread, Relation, SelectedSignals, SignalPayload, SocialSignal,
};

/// Limit for the summary used by the summary-only conditions.
pub const SUMMARY_LIMIT: usize = 350;

/// TLDR when available, else leading abstract sentences, else the title.
pub fn summary(paper: &PaperRecord) -> String {
    if let Some(t) = paper.tldr.as_deref().map(str::trim).filter(|t| !t.is_empty()) {
        return t.to_string();
    }
    let Some(abs) = paper.abstract_text.as_deref().filter(|a| !a.trim().is_empty()) else {
        return paper.title.clone();
    };
    let mut out = String::new();
    for s in split_sentences(abs) {
        let next = if out.is_empty() { s.clone() } else { format!("{out} {s}") };
        if next.chars().count() > SUMMARY_LIMIT {
            break;
        }
        out = next;
    }
    if out.is_empty() {
        // first sentence alone is too long: cut at a word boundary
        let cut: String = abs.chars().take(SUMMARY_LIMIT - 3).collect();
        let cut = cut.rsplit_once(' ').map_or(cut.as_str(), |(a, _)| a).trim_end();
        out = format!("{cut}...");
    }
    out
}

fn plural(n: usize, one: &str, many: &str) -> String {
    format!("{n} {}", if n == 1 { one } else { many })
}

fn shared_in_thread(prior: &PriorThread, names: &MemberNames) -> String {
    if prior.sharer.is_empty() || names.is_agent(&prior.sharer) {
        "recommended earlier in a thread".to_string()
    } else {
        format!("{} shared in a thread", names.refer(&prior.sharer))
    }
}

fn clip(text: &str, max: usize) -> String {
    let t = text.trim();
    if t.chars().count() <= max {
        return t.to_string();
    }
    let cut: String = t.chars().take(max).collect();
    format!("{}...", cut.rsplit_once(' ').map_or(cut.as_str(), |(a, _)| a))
}

/// One fixed-template sentence for a signal.
pub fn template_sentence(signal: &SocialSignal, names: &MemberNames) -> String {
    match &signal.payload {
        SignalPayload::AuthorIsMember { member_id, .. } => {
            format!("Congrats {} on this paper!", names.refer(member_id))
        }
        SignalPayload::AuthorRecent { author_name, count, .. } => format!(
            "{author_name} also authored {} recently discussed in the channel.",
            plural(*count, "paper", "papers")
        ),
        SignalPayload::Affiliation { affiliation, .. } => format!("A paper from {affiliation}."),
        SignalPayload::VenueRecent { venue, .. } => {
            format!("The channel recently engaged with other papers from {venue}.")
        }
        SignalPayload::PaperConnection {
            prior,
            relation,
            citation_contexts,
            shared_authors,
            ..
        } => match relation {
            Relation::SharedAuthors => format!(
                "Shared authors: {}, also contributed to {} that {}.",
                shared_authors.join(", "),
                prior.paper.title,
                shared_in_thread(prior, names)
            ),
            _ => {
                let mut s = format!(
                    "{}: {} ({})",
                    relation.label(),
                    prior.paper.title,
                    shared_in_thread(prior, names)
                );
                if let Some(c) = citation_contexts.first() {
                    s.push_str(&format!(", citing it as: \"{}\"", clip(c, 160)));
                }
                s.push('.');
                s
            }
        },
        SignalPayload::PriorEngagement {
            prior,
            reply_count,
            reaction_counts,
            sample_comment,
            ..
        } => {
            let mut s = format!(
                "Related paper: {} that {}, which received {} and {}",
                prior.paper.title,
                shared_in_thread(prior, names),
                plural(*reply_count, "reply", "replies"),
                plural(reaction_counts.total(), "reaction", "reactions")
            );
            if let Some(c) = sample_comment {
                s.push_str(&format!(
                    ", including {} (\"{}\")",
                    names.refer(&c.actor),
                    clip(&c.text, 120)
                ));
            }
            s.push('.');
            s
        }
        SignalPayload::PriorByMember { prior, member_ids } => {
            let authors: Vec<String> = member_ids.iter().map(|m| names.refer(m)).collect();
            format!(
                "Related paper: {} by channel member {}, {}.",
                prior.paper.title,
                authors.join(", "),
                shared_in_thread(prior, names)
            )
        }
        SignalPayload::MemberInterest { member_id, .. } => {
            format!("Possibly of interest to {}.", names.refer(member_id))
        }
        SignalPayload::MemberRelation {
            member_id,
            variant,
            detail,
            ..
        } => {
            let reason = match variant {
                InterestVariant::LikedSimilar => "you've liked several similar papers in the channel".to_string(),
                InterestVariant::LikedAuthor => format!(
                    "you've liked several of {}'s papers in the channel",
                    detail.as_deref().unwrap_or("this author")
                ),
                InterestVariant::LikedVenue => format!(
                    "you've liked several {} papers in the channel",
                    detail.as_deref().unwrap_or("same-venue")
                ),
                InterestVariant::OwnPublicationsSimilar => "several of your publications are similar".to_string(),
                InterestVariant::CitesRelated => "you've cited similar papers before".to_string(),
            };
            format!("Possibly of interest to {}, because {reason}.", names.refer(member_id))
        }
    }
}

/// Template sentences for every selected signal, in category order.
pub fn template_body(selected: &SelectedSignals, names: &MemberNames) -> String {
    selected
        .iter()
        .map(|s| template_sentence(s, names))
        .collect::<Vec<_>>()
        .join(" ")
}
