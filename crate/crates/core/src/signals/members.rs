use super::{
    cosine, normalize_text, same_author, Heuristic, InterestVariant, PaperBrief, SignalContext,
    SignalPayload, SocialSignal,
};
use crate::clients::PaperRecord;
use crate::kb::{IndexedPaper, Member};
use crate::Scalar;

/// h8-h9: the candidate against each member's interest papers (posted,
/// positively reacted to, or commented on) and linked publications.
pub fn detect_member_signals(candidate: &PaperRecord, ctx: &SignalContext) -> Vec<SocialSignal> {
    let mut out = Vec::new();
    for m in ctx.members() {
        let interests: Vec<(&IndexedPaper, &PaperRecord)> = ctx
            .priors(candidate)
            .filter(|(ip, _)| ip.interested_members.contains(&m.member_id))
            .collect();
        let evidence: Vec<u64> = interests
            .iter()
            .flat_map(|(ip, _)| member_seqs(ip, &m.member_id))
            .collect();

        // Best similarity; the smaller ref wins ties since priors come in ref order.
        let sims: Vec<(Scalar, &PaperRecord)> = interests
            .iter()
            .filter_map(|(_, r)| cosine(candidate, r).map(|c| (c, *r)))
            .collect();
        let best = sims
            .iter()
            .fold(None::<(Scalar, &PaperRecord)>, |acc, &(c, r)| match acc {
                Some((b, _)) if b >= c => acc,
                _ => Some((c, r)),
            });

        if let Some((c, r)) = best.filter(|(c, _)| *c >= ctx.tau) {
            let (ip, _) = interests
                .iter()
                .find(|(ip, _)| ip.paper_ref == r.paper_ref)
                .expect("best interest comes from interests");
            out.push(
                SocialSignal::new(
                    Heuristic::H8,
                    SignalPayload::MemberInterest {
                        member_id: m.member_id.clone(),
                        interest: PaperBrief::of(r),
                        similarity: c,
                    },
                    c,
                )
                .with_engagement(interests.len())
                .with_evidence(member_seqs(ip, &m.member_id)),
            );
        }

        let variants = interest_variants(candidate, ctx, &m, &interests, &sims, best);
        let chosen = variants
            .into_iter()
            .reduce(|a, b| if b.1 > a.1 { b } else { a });
        if let Some((variant, score, related, detail, similarity)) = chosen {
            out.push(
                SocialSignal::new(
                    Heuristic::H9,
                    SignalPayload::MemberRelation {
                        member_id: m.member_id.clone(),
                        variant,
                        related,
                        detail,
                        similarity,
                    },
                    score,
                )
                .with_engagement(interests.len())
                .with_evidence(evidence),
            );
        }
    }
    out
}

fn member_seqs(ip: &IndexedPaper, member: &str) -> Vec<u64> {
    ip.mention_posts
        .iter()
        .filter(|p| p.actor == member)
        .map(|p| p.seq)
        .chain(ip.reactions.iter().filter(|r| r.actor == member).map(|r| r.seq))
        .chain(ip.comments.iter().filter(|c| c.actor == member).map(|c| c.seq))
        .collect()
}

type Variant = (InterestVariant, Scalar, Option<PaperBrief>, Option<String>, Option<Scalar>);

/// Every h9 variant that holds for `m`, in variant order.
fn interest_variants(
    candidate: &PaperRecord,
    ctx: &SignalContext,
    m: &Member,
    interests: &[(&IndexedPaper, &PaperRecord)],
    sims: &[(Scalar, &PaperRecord)],
    best: Option<(Scalar, &PaperRecord)>,
) -> Vec<Variant> {
    let mut out = Vec::new();

    if sims.iter().filter(|(c, _)| *c >= ctx.tau).count() >= 2 {
        let (c, r) = best.expect("two similar interests imply a best one");
        out.push((InterestVariant::LikedSimilar, c, Some(PaperBrief::of(r)), None, Some(c)));
    }

    if let Some(a) = candidate.authors.iter().find(|a| {
        interests
            .iter()
            .filter(|(_, r)| r.authors.iter().any(|b| same_author(a, b)))
            .count()
            >= 2
    }) {
        out.push((InterestVariant::LikedAuthor, 0.8, None, Some(a.name.clone()), None));
    }

    if let Some(venue) = candidate.venue.as_deref().filter(|v| !v.trim().is_empty()) {
        let key = normalize_text(venue);
        let n = interests
            .iter()
            .filter(|(_, r)| r.venue.as_deref().is_some_and(|v| normalize_text(v) == key))
            .count();
        if n >= 2 {
            out.push((InterestVariant::LikedVenue, 0.6, None, Some(venue.trim().to_string()), None));
        }
    }

    let own_id = m.linked_author_id.as_deref().unwrap_or("");
    let pubs: Vec<&PaperRecord> = ctx
        .member_publications
        .get(&m.member_id)
        .into_iter()
        .flatten()
        .filter(|q| q.paper_ref != candidate.paper_ref)
        .collect();
    if !own_id.is_empty() {
        let coauthored = pubs.iter().find(|q| {
            candidate
                .authors
                .iter()
                .filter(|a| a.author_id != own_id)
                .any(|a| q.authors.iter().any(|b| same_author(a, b)))
        });
        let similar = pubs
            .iter()
            .filter_map(|q| cosine(candidate, q).filter(|c| *c >= ctx.tau).map(|c| (c, *q)))
            .fold(None::<(Scalar, &PaperRecord)>, |acc, (c, q)| match acc {
                Some((b, _)) if b >= c => acc,
                _ => Some((c, q)),
            });
        match (coauthored, similar) {
            (Some(q), _) => out.push((
                InterestVariant::OwnPublicationsSimilar,
                0.8,
                Some(PaperBrief::of(q)),
                None,
                cosine(candidate, q),
            )),
            (None, Some((c, q))) => out.push((
                InterestVariant::OwnPublicationsSimilar,
                c,
                Some(PaperBrief::of(q)),
                None,
                Some(c),
            )),
            (None, None) => {}
        }

        if let Some(q) = pubs.iter().find(|q| {
            q.cites(&candidate.paper_ref) || q.citations.iter().any(|c| candidate.cites(c))
        }) {
            out.push((InterestVariant::CitesRelated, 1.0, Some(PaperBrief::of(q)), None, None));
        }
    }
    out
}
