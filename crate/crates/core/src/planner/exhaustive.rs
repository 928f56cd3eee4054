use alloc::vec;
use alloc::vec::Vec;

use super::schedule::{sequence_cost, Sequence};
use super::{CandidateAction, EventKind, PlanError, Schedule, Vessel};

/// Largest instance (drop plus pick events) the brute force accepts.
pub const MAX_EXHAUSTIVE_EVENTS: usize = 10;

/// Strict-improvement margin, so float noise cannot reorder exact ties.
const TIE_EPS: f64 = 1e-9;

/// Minimum-makespan schedule by complete enumeration.
///
/// Assignments are enumerated as tuples `(vessel of action 0, vessel of
/// action 1, ...)` in lexicographic order; each vessel's events are ordered
/// lexicographically by `(action index, Drop < Pick)`. The first schedule
/// that is strictly better than everything before it wins, which makes ties
/// resolve to the lexicographically first event order.
pub fn exhaustive_schedule(
    vessels: &[Vessel],
    actions: &[CandidateAction],
) -> Result<Schedule, PlanError> {
    let events = 2 * actions.len();
    if events > MAX_EXHAUSTIVE_EVENTS {
        return Err(PlanError::TooLarge {
            events,
            limit: MAX_EXHAUSTIVE_EVENTS,
        });
    }
    if vessels.iter().any(|v| !v.is_valid()) {
        return Err(PlanError::Invalid(
            "vessel speed must be positive and capacity at least 1",
        ));
    }
    if actions.is_empty() {
        let seqs: Vec<Sequence> = vessels.iter().map(|_| Vec::new()).collect();
        return Schedule::from_sequences(vessels, actions, &seqs);
    }
    if vessels.is_empty() {
        return Err(PlanError::Infeasible(
            "no vessels to carry out the actions".into(),
        ));
    }

    let n = actions.len();
    let nv = vessels.len();
    // best[v][mask] = per-vessel optimum for the action subset `mask`
    let mut best: Vec<Vec<Option<(f64, Sequence)>>> = vec![vec![None; 1 << n]; nv];
    for (v, table) in vessels.iter().zip(best.iter_mut()) {
        for (mask, slot) in table.iter_mut().enumerate() {
            *slot = best_sequence(v, actions, mask);
        }
    }

    // base-`nv` counter with action 0 as the most significant digit
    let mut winner: Option<(f64, Vec<usize>)> = None;
    for code in 0..nv.pow(n as u32) {
        let mut masks = vec![0usize; nv];
        let mut rest = code;
        for a in (0..n).rev() {
            masks[rest % nv] |= 1 << a;
            rest /= nv;
        }
        let span = masks
            .iter()
            .enumerate()
            .map(|(v, &m)| best[v][m].as_ref().map_or(f64::INFINITY, |b| b.0))
            .fold(0.0, f64::max);
        if winner
            .as_ref()
            .map_or(span.is_finite(), |w| span < w.0 - TIE_EPS)
        {
            winner = Some((span, masks));
        }
    }
    let (_, masks) =
        winner.ok_or_else(|| PlanError::Infeasible("no feasible assignment".into()))?;
    let seqs: Vec<Sequence> = masks
        .iter()
        .enumerate()
        .map(|(v, &m)| best[v][m].as_ref().map(|b| b.1.clone()).unwrap_or_default())
        .collect();
    Schedule::from_sequences(vessels, actions, &seqs)
}

/// Lexicographically first minimum-makespan order of the actions in `mask`.
fn best_sequence(
    vessel: &Vessel,
    actions: &[CandidateAction],
    mask: usize,
) -> Option<(f64, Sequence)> {
    if mask == 0 {
        return Some((0.0, Vec::new()));
    }
    let members: Vec<usize> = (0..actions.len())
        .filter(|a| mask & (1 << a) != 0)
        .collect();
    let mut seq = Vec::with_capacity(2 * members.len());
    let mut best: Option<(f64, Sequence)> = None;
    search(vessel, actions, &members, &mut seq, &mut best);
    best
}

fn search(
    vessel: &Vessel,
    actions: &[CandidateAction],
    members: &[usize],
    seq: &mut Sequence,
    best: &mut Option<(f64, Sequence)>,
) {
    // finish time never decreases along a sequence, so prefixes that are
    // already no better than the incumbent can be cut
    let Some((now, _)) = sequence_cost(vessel, seq, actions) else {
        return;
    };
    if let Some((b, _)) = best {
        if now >= *b - TIE_EPS {
            return;
        }
    }
    if seq.len() == 2 * members.len() {
        *best = Some((now, seq.clone()));
        return;
    }
    for &a in members {
        let dropped = seq.contains(&(a, EventKind::Drop));
        let picked = seq.contains(&(a, EventKind::Pick));
        let next = match (dropped, picked) {
            (false, _) => EventKind::Drop,
            (true, false) => EventKind::Pick,
            (true, true) => continue,
        };
        seq.push((a, next));
        search(vessel, actions, members, seq, best);
        seq.pop();
    }
}
