//! Decentralised MCTS over per-vessel event sequences.
//!
//! Every vessel grows its own tree of drop/pick orders. Between rounds the
//! vessels swap their best few sequences with softmax weights; inside a round
//! each vessel scores its rollouts with a difference reward against plans
//! sampled from the other vessels' last published distributions. Nothing a
//! vessel does within a round depends on another vessel's progress in the
//! same round, so the result is a function of the seed and round count only.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::schedule::{sequence_cost, Sequence};
use super::{CandidateAction, EventKind, PlanError, PlannerConfig, Schedule, Vessel};
use crate::flowfield::FlowField;
use crate::math;

/// Visit and reward decay applied to every tree at a round boundary.
const ROUND_DISCOUNT: f64 = 0.9;
/// Softmax temperature of published plans, as a fraction of the reference cost.
const TEMPERATURE: f64 = 0.02;
/// Upper bound on plan combinations scored in the final joint pass.
const MAX_COMBINATIONS: usize = 4096;
/// Best covered combinations that get the local-search polish.
const POLISHED: usize = 4;
const IMPROVE_EPS: f64 = 1e-9;

type Move = Option<(usize, EventKind)>;

struct Node {
    mv: Move,
    children: Vec<usize>,
    untried: Vec<Move>,
    visits: f64,
    total: f64,
    terminal: bool,
}

/// Joint objective shared by all vessels.
struct Objective<'a> {
    vessels: &'a [Vessel],
    actions: &'a [CandidateAction],
    penalty: f64,
    missing_cost: f64,
}

impl Objective<'_> {
    /// Makespan plus unattended penalty, plus `missing_cost` per action that
    /// no vessel performs. Invalid sequences cost infinity.
    fn cost(&self, seqs: &[&[(usize, EventKind)]]) -> f64 {
        let mut span: f64 = 0.0;
        let mut idle = 0.0;
        for (v, seq) in self.vessels.iter().zip(seqs) {
            match sequence_cost(v, seq, self.actions) {
                Some((end, u)) => {
                    span = span.max(end);
                    idle += u;
                }
                None => return f64::INFINITY,
            }
        }
        let missing = (0..self.actions.len())
            .filter(|&a| !seqs.iter().any(|s| s.contains(&(a, EventKind::Drop))))
            .count();
        span + self.penalty * idle + self.missing_cost * missing as f64
    }
}

fn legal_moves(seq: &[(usize, EventKind)], n: usize, capacity: usize) -> Vec<Move> {
    let adrift = seq.iter().filter(|e| e.1 == EventKind::Drop).count()
        - seq.iter().filter(|e| e.1 == EventKind::Pick).count();
    let mut out = Vec::new();
    for a in 0..n {
        let dropped = seq.contains(&(a, EventKind::Drop));
        if !dropped {
            if adrift < capacity {
                out.push(Some((a, EventKind::Drop)));
            }
        } else if !seq.contains(&(a, EventKind::Pick)) {
            out.push(Some((a, EventKind::Pick)));
        }
    }
    if adrift == 0 {
        out.push(None);
    }
    out
}

struct VesselSearch {
    index: usize,
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
    lo: f64,
    hi: f64,
    /// Best distinct complete sequences, ascending cost against the others'
    /// most likely plans.
    top: Vec<(f64, Sequence)>,
}

impl VesselSearch {
    fn new(index: usize, seed: u64, n: usize, capacity: usize) -> Self {
        let untried = legal_moves(&[], n, capacity);
        Self {
            index,
            nodes: vec![Node {
                mv: None,
                children: Vec::new(),
                untried,
                visits: 0.0,
                total: 0.0,
                terminal: false,
            }],
            rng: ChaCha8Rng::seed_from_u64(mix(seed, index as u64)),
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
            top: Vec::new(),
        }
    }

    fn discount(&mut self) {
        for n in &mut self.nodes {
            n.visits *= ROUND_DISCOUNT;
            n.total *= ROUND_DISCOUNT;
        }
    }

    fn normalised(&self, x: f64) -> f64 {
        if self.hi > self.lo {
            (x - self.lo) / (self.hi - self.lo)
        } else {
            0.5
        }
    }

    fn iterate(
        &mut self,
        obj: &Objective,
        others: &[Vec<(Sequence, f64)>],
        modes: &[Sequence],
        cfg: &PlannerConfig,
        k: usize,
    ) {
        let vessel = &obj.vessels[self.index];
        let n = obj.actions.len();
        let mut seq: Sequence = Vec::new();
        let mut path = vec![0usize];
        let mut node = 0;
        let mut stopped = false;
        while !self.nodes[node].terminal && self.nodes[node].untried.is_empty() {
            let parent = self.nodes[node].visits.max(1.0);
            let next = *self.nodes[node]
                .children
                .iter()
                .max_by(|&&a, &&b| {
                    let ucb = |c: usize| {
                        let nd = &self.nodes[c];
                        if nd.visits <= 0.0 {
                            return f64::INFINITY;
                        }
                        self.normalised(nd.total / nd.visits)
                            + cfg.exploration * math::sqrt(math::ln(parent) / nd.visits)
                    };
                    ucb(a).total_cmp(&ucb(b)).then(b.cmp(&a))
                })
                .expect("expanded node has children");
            node = next;
            path.push(node);
            match self.nodes[node].mv {
                Some(e) => seq.push(e),
                None => stopped = true,
            }
        }
        if !self.nodes[node].terminal {
            let i = self.rng.random_range(0..self.nodes[node].untried.len());
            let mv = self.nodes[node].untried.swap_remove(i);
            match mv {
                Some(e) => seq.push(e),
                None => stopped = true,
            }
            let untried = if stopped {
                Vec::new()
            } else {
                legal_moves(&seq, n, vessel.capacity)
            };
            let terminal = stopped || untried.is_empty();
            self.nodes.push(Node {
                mv,
                children: Vec::new(),
                untried,
                visits: 0.0,
                total: 0.0,
                terminal,
            });
            let child = self.nodes.len() - 1;
            self.nodes[node].children.push(child);
            path.push(child);
        }
        // random completion
        while !stopped {
            let moves = legal_moves(&seq, n, vessel.capacity);
            match moves[self.rng.random_range(0..moves.len())] {
                Some(e) => seq.push(e),
                None => stopped = true,
            }
        }

        // difference reward against sampled plans of the other vessels
        let mut joint: Vec<&[(usize, EventKind)]> = Vec::with_capacity(others.len());
        for (j, dist) in others.iter().enumerate() {
            if j == self.index || dist.is_empty() {
                joint.push(&[]);
                continue;
            }
            let mut u = self.rng.random::<f64>();
            let mut pick = dist.len() - 1;
            for (m, (_, w)) in dist.iter().enumerate() {
                if u < *w {
                    pick = m;
                    break;
                }
                u -= w;
            }
            joint.push(&dist[pick].0);
        }
        let without = obj.cost(&joint);
        joint[self.index] = &seq;
        let with = obj.cost(&joint);
        let reward = without - with;
        if reward.is_finite() {
            self.lo = self.lo.min(reward);
            self.hi = self.hi.max(reward);
            for &p in &path {
                self.nodes[p].visits += 1.0;
                self.nodes[p].total += reward;
            }
        }
        let c = cost_against(obj, modes, self.index, &seq);
        self.offer(c, seq, k);
    }

    fn offer(&mut self, cost: f64, seq: Sequence, k: usize) {
        if !cost.is_finite() || self.top.iter().any(|t| t.1 == seq) {
            return;
        }
        let at = self.top.partition_point(|t| t.0 <= cost);
        if at < k {
            self.top.insert(at, (cost, seq));
            self.top.truncate(k);
        }
    }

    /// Re-ranks remembered sequences against the latest plans of the others.
    fn rerank(&mut self, obj: &Objective, modes: &[Sequence]) {
        let mut top = core::mem::take(&mut self.top);
        for t in &mut top {
            t.0 = cost_against(obj, modes, self.index, &t.1);
        }
        top.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.top = top;
    }

    fn publish(&self, temperature: f64) -> Vec<(Sequence, f64)> {
        let Some(best) = self.top.first().map(|t| t.0) else {
            return Vec::new();
        };
        let w: Vec<f64> = self
            .top
            .iter()
            .map(|t| math::exp(-(t.0 - best) / temperature))
            .collect();
        let sum: f64 = w.iter().sum();
        self.top
            .iter()
            .zip(w)
            .map(|(t, w)| (t.1.clone(), w / sum))
            .collect()
    }
}

fn cost_against(obj: &Objective, modes: &[Sequence], me: usize, seq: &[(usize, EventKind)]) -> f64 {
    let joint: Vec<&[(usize, EventKind)]> = modes
        .iter()
        .enumerate()
        .map(|(j, m)| if j == me { seq } else { m.as_slice() })
        .collect();
    obj.cost(&joint)
}

/// SplitMix64 finaliser, used to derive per-vessel seeds.
fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D1_049B_B133_111D);
    z ^ (z >> 31)
}

fn joint_cost(obj: &Objective, seqs: &[Sequence]) -> f64 {
    let refs: Vec<&[(usize, EventKind)]> = seqs.iter().map(|s| s.as_slice()).collect();
    obj.cost(&refs)
}

/// Cheapest placement of action `a` into any vessel's sequence.
fn best_insertion(obj: &Objective, seqs: &[Sequence], a: usize) -> Option<(f64, Vec<Sequence>)> {
    let mut best: Option<(f64, Vec<Sequence>)> = None;
    for v in 0..seqs.len() {
        let len = seqs[v].len();
        for i in 0..=len {
            for j in i + 1..=len + 1 {
                let mut s = seqs[v].clone();
                s.insert(i, (a, EventKind::Drop));
                s.insert(j, (a, EventKind::Pick));
                let mut cand = seqs.to_vec();
                cand[v] = s;
                let c = joint_cost(obj, &cand);
                if c.is_finite() && best.as_ref().is_none_or(|b| c < b.0 - IMPROVE_EPS) {
                    best = Some((c, cand));
                }
            }
        }
    }
    best
}

fn remove_action(seqs: &mut [Sequence], a: usize, except: Option<usize>) {
    for (v, s) in seqs.iter_mut().enumerate() {
        if Some(v) != except {
            s.retain(|e| e.0 != a);
        }
    }
}

/// Makes a joint plan perform every action exactly once: duplicates are
/// dropped where that costs least, missing actions inserted where cheapest.
fn cover(obj: &Objective, mut seqs: Vec<Sequence>) -> Vec<Sequence> {
    let n = obj.actions.len();
    for a in 0..n {
        let holders: Vec<usize> = (0..seqs.len())
            .filter(|&v| seqs[v].contains(&(a, EventKind::Drop)))
            .collect();
        if holders.len() > 1 {
            let mut best: Option<(f64, Vec<Sequence>)> = None;
            for &h in &holders {
                let mut cand = seqs.clone();
                remove_action(&mut cand, a, Some(h));
                let c = joint_cost(obj, &cand);
                if best.as_ref().is_none_or(|b| c < b.0 - IMPROVE_EPS) {
                    best = Some((c, cand));
                }
            }
            seqs = best.expect("at least two holders").1;
        }
    }
    for a in 0..n {
        if !seqs.iter().any(|s| s.contains(&(a, EventKind::Drop))) {
            if let Some((_, cand)) = best_insertion(obj, &seqs, a) {
                seqs = cand;
            }
        }
    }
    seqs
}

/// Relocates single actions and pairs of actions while that lowers the
/// joint cost.
fn polish(obj: &Objective, mut seqs: Vec<Sequence>) -> Vec<Sequence> {
    let n = obj.actions.len();
    let mut current = joint_cost(obj, &seqs);
    for _ in 0..n.max(1) * 4 {
        let mut improved = false;
        for a in 0..n {
            let mut without = seqs.clone();
            remove_action(&mut without, a, None);
            if let Some((c, cand)) = best_insertion(obj, &without, a) {
                if c < current - IMPROVE_EPS {
                    seqs = cand;
                    current = c;
                    improved = true;
                }
            }
        }
        // pairs, which escape crossed assignments single moves cannot
        for a in 0..n {
            for b in a + 1..n {
                let mut without = seqs.clone();
                remove_action(&mut without, a, None);
                remove_action(&mut without, b, None);
                for (x, y) in [(a, b), (b, a)] {
                    let Some((_, partial)) = best_insertion(obj, &without, x) else {
                        continue;
                    };
                    if let Some((c, cand)) = best_insertion(obj, &partial, y) {
                        if c < current - IMPROVE_EPS {
                            seqs = cand;
                            current = c;
                            improved = true;
                        }
                    }
                }
                if improved {
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    seqs
}

/// Allocates and orders `actions` across `vessels` with decentralised MCTS.
///
/// The joint cost is `makespan + unattended_penalty * unattended seconds`;
/// every vessel plans its own drop/pick order, sees the others only through
/// their published plan distributions, and is rewarded by how much its plan
/// lowers that cost. Per-vessel generators are derived from `cfg.seed`.
///
/// After the last round every combination of published plans is made to
/// cover each action exactly once (duplicates dropped, missing actions
/// inserted where cheapest). The cheapest few are polished by relocating
/// single actions and pairs, and the best result is validated.
pub fn schedule_decmcts<F: FlowField + ?Sized>(
    vessels: &[Vessel],
    actions: &[CandidateAction],
    field: &F,
    cfg: &PlannerConfig,
) -> Result<Schedule, PlanError> {
    cfg.validate()?;
    if vessels.iter().any(|v| !v.is_valid()) {
        return Err(PlanError::Invalid(
            "vessel speed must be positive and capacity at least 1",
        ));
    }
    for (i, v) in vessels.iter().enumerate() {
        if vessels[..i].iter().any(|w| w.id == v.id) {
            return Err(PlanError::Invalid("vessel ids must be unique"));
        }
    }
    for (i, a) in actions.iter().enumerate() {
        if actions[..i].iter().any(|b| b.id == a.id) {
            return Err(PlanError::Invalid("action ids must be unique"));
        }
    }
    if actions.is_empty() {
        return Schedule::from_sequences(vessels, actions, &vec![Vec::new(); vessels.len()]);
    }
    if vessels.is_empty() {
        return Err(PlanError::Infeasible(
            "no vessels to carry out the actions".into(),
        ));
    }
    let ws = field.workspace();
    for a in actions {
        if !ws.contains(a.drop) {
            return Err(PlanError::Infeasible(alloc::format!(
                "action {} drops outside the workspace",
                a.id
            )));
        }
        if !ws.contains(a.pick) {
            return Err(PlanError::Infeasible(alloc::format!(
                "action {} picks up outside the workspace",
                a.id
            )));
        }
    }

    let n = actions.len();
    // all actions back to back on the first vessel
    let baseline: Sequence = (0..n)
        .flat_map(|a| [(a, EventKind::Drop), (a, EventKind::Pick)])
        .collect();
    let reference = sequence_cost(&vessels[0], &baseline, actions)
        .map(|(end, u)| end + cfg.unattended_penalty * u)
        .expect("back-to-back order is always valid")
        .max(1.0);
    let obj = Objective {
        vessels,
        actions,
        penalty: cfg.unattended_penalty,
        missing_cost: 2.0 * reference,
    };
    let k = cfg.plan_distribution_size;
    let temperature = TEMPERATURE * reference;

    let mut searches: Vec<VesselSearch> = vessels
        .iter()
        .enumerate()
        .map(|(i, v)| VesselSearch::new(i, cfg.seed, n, v.capacity))
        .collect();
    let mut published: Vec<Vec<(Sequence, f64)>> = vec![Vec::new(); vessels.len()];
    for round in 0..cfg.decmcts_rounds {
        let modes: Vec<Sequence> = published
            .iter()
            .map(|d| d.first().map(|p| p.0.clone()).unwrap_or_default())
            .collect();
        for s in &mut searches {
            if round > 0 {
                s.discount();
                s.rerank(&obj, &modes);
            }
            for _ in 0..cfg.decmcts_iterations {
                s.iterate(&obj, &published, &modes, cfg, k);
            }
        }
        published = searches.iter().map(|s| s.publish(temperature)).collect();
    }

    // score combinations of the published plans
    let options: Vec<Vec<Sequence>> = published
        .iter()
        .map(|d| {
            let mut o: Vec<Sequence> = d.iter().map(|p| p.0.clone()).collect();
            if o.is_empty() {
                o.push(Vec::new());
            }
            o
        })
        .collect();
    let mut covered: Vec<(f64, Vec<Sequence>)> = Vec::new();
    let mut idx = vec![0usize; options.len()];
    for _ in 0..MAX_COMBINATIONS {
        let combo: Vec<Sequence> = idx
            .iter()
            .zip(&options)
            .map(|(&i, o)| o[i].clone())
            .collect();
        let fixed = cover(&obj, combo);
        covered.push((joint_cost(&obj, &fixed), fixed));
        let mut d = options.len();
        while d > 0 {
            d -= 1;
            idx[d] += 1;
            if idx[d] < options[d].len() {
                break;
            }
            idx[d] = 0;
        }
        if idx.iter().all(|&i| i == 0) {
            break;
        }
    }
    // stable sort keeps enumeration order among equal costs
    covered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, Vec<Sequence>)> = None;
    for (_, seqs) in covered.into_iter().take(POLISHED) {
        let fixed = polish(&obj, seqs);
        let c = joint_cost(&obj, &fixed);
        if best.as_ref().is_none_or(|b| c < b.0 - IMPROVE_EPS) {
            best = Some((c, fixed));
        }
    }
    let (_, seqs) = best.expect("at least one combination");
    let schedule = Schedule::from_sequences(vessels, actions, &seqs)?;
    schedule.validate(vessels, actions)?;
    Ok(schedule)
}
