use std::cmp::Ordering;

use super::{SelectedSignals, SocialSignal};

/// Total order used for selection: score, then engagement, then most
/// recent evidence (all descending), then lower heuristic number, then
/// subject key.
pub fn ranking_order(a: &SocialSignal, b: &SocialSignal) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| b.engagement.cmp(&a.engagement))
        .then_with(|| b.latest_evidence().cmp(&a.latest_evidence()))
        .then_with(|| a.heuristic.cmp(&b.heuristic))
        .then_with(|| a.payload.key().cmp(&b.payload.key()))
}

/// Keeps the top-ranked signal of each category.
pub fn rank_and_select(signals: &[SocialSignal]) -> SelectedSignals {
    let mut ranked: Vec<&SocialSignal> = signals.iter().collect();
    ranked.sort_by(|a, b| ranking_order(a, b));
    let mut out = SelectedSignals::default();
    for s in ranked {
        let slot = out.slot(s.category);
        if slot.is_none() {
            *slot = Some(s.clone());
        }
    }
    out
}
