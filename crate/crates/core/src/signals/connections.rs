use std::collections::BTreeSet;

use super::{
    cosine, same_author, Heuristic, ReactionCounts, Relation, SignalContext, SignalPayload,
    SocialSignal,
};
use crate::clients::PaperRecord;
use crate::kb::Sentiment;
use crate::Scalar;

/// h5-h7: relations between the candidate and each previously shared paper.
pub fn detect_paper_connection_signals(candidate: &PaperRecord, ctx: &SignalContext) -> Vec<SocialSignal> {
    let linked: Vec<(String, String)> = ctx
        .members()
        .into_iter()
        .filter_map(|m| m.linked_author_id.clone().map(|a| (a, m.member_id)))
        .collect();
    let mut out = Vec::new();
    for (ip, prior) in ctx.priors(candidate) {
        let thread = ctx.prior_thread(ip, prior);
        let mention_seqs: Vec<u64> = ip.mention_posts.iter().map(|m| m.seq).collect();
        let engagement = ip.engagement_count();
        let shared: Vec<String> = candidate
            .authors
            .iter()
            .filter(|a| prior.authors.iter().any(|b| same_author(a, b)))
            .map(|a| a.name.clone())
            .collect();
        let similarity = cosine(candidate, prior);

        let relation = if candidate.cites(&prior.paper_ref) {
            Some((Relation::Cites, 1.0))
        } else if prior.cites(&candidate.paper_ref) || candidate.cited_by.contains(&prior.paper_ref) {
            Some((Relation::CitedBy, 1.0))
        } else if !shared.is_empty() {
            Some((Relation::SharedAuthors, 0.8))
        } else {
            similarity
                .filter(|c| *c >= ctx.tau)
                .map(|c| (Relation::Semantic, 0.75 * c))
        };

        if let Some((relation, score)) = relation {
            let contexts = match relation {
                Relation::Cites => candidate.citation_contexts.get(&prior.paper_ref),
                Relation::CitedBy => prior.citation_contexts.get(&candidate.paper_ref),
                _ => None,
            }
            .cloned()
            .unwrap_or_default();
            out.push(
                SocialSignal::new(
                    Heuristic::H5,
                    SignalPayload::PaperConnection {
                        prior: thread.clone(),
                        relation,
                        citation_contexts: contexts,
                        shared_authors: shared.clone(),
                        similarity,
                    },
                    score,
                )
                .with_engagement(engagement)
                .with_evidence(mention_seqs.clone()),
            );

            // h6 decorates the same prior with its engagement
            if engagement > 0 {
                let mut counts = ReactionCounts::default();
                for r in &ip.reactions {
                    match r.sentiment {
                        Sentiment::Positive => counts.positive += 1,
                        Sentiment::Negative => counts.negative += 1,
                        Sentiment::Neutral => counts.neutral += 1,
                    }
                }
                let reactors: BTreeSet<String> = ip.reactions.iter().map(|r| r.actor.clone()).collect();
                let e = engagement as Scalar;
                out.push(
                    SocialSignal::new(
                        Heuristic::H6,
                        SignalPayload::PriorEngagement {
                            prior: thread.clone(),
                            relation,
                            reply_count: ip.comments.len(),
                            reaction_counts: counts,
                            reactors: reactors.into_iter().collect(),
                            sample_comment: thread.comments.first().cloned(),
                        },
                        score * e / (e + 1.0),
                    )
                    .with_engagement(engagement)
                    .with_evidence(
                        ip.reactions
                            .iter()
                            .map(|r| r.seq)
                            .chain(ip.comments.iter().map(|c| c.seq))
                            .collect(),
                    ),
                );
            }
        }

        let authors: BTreeSet<String> = linked
            .iter()
            .filter(|(a, _)| prior.has_author(a))
            .map(|(_, m)| m.clone())
            .collect();
        if !authors.is_empty() {
            out.push(
                SocialSignal::new(
                    Heuristic::H7,
                    SignalPayload::PriorByMember {
                        prior: thread,
                        member_ids: authors.into_iter().collect(),
                    },
                    0.5,
                )
                .with_engagement(engagement)
                .with_evidence(mention_seqs),
            );
        }
    }
    out
}
