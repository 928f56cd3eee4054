use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CandidateAction, PlanError, PlannerConfig, Poi};
use crate::math;

/// Probability that a rollout step takes the greedy move.
const GREEDY_ROLLOUT: f64 = 0.5;

/// POI coverage as a bitset over positions in the POI slice.
#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn union_with(&mut self, o: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a |= b;
        }
    }

    fn gain(&self, o: &Bits) -> usize {
        self.0
            .iter()
            .zip(&o.0)
            .map(|(a, b)| (b & !a).count_ones() as usize)
            .sum()
    }
}

fn coverage_bits(actions: &[CandidateAction], pois: &[Poi]) -> Vec<Bits> {
    actions
        .iter()
        .map(|a| {
            let mut b = Bits::empty(pois.len());
            for (i, q) in pois.iter().enumerate() {
                if a.covered.binary_search(&q.id).is_ok() {
                    b.set(i);
                }
            }
            b
        })
        .collect()
}

/// Number of distinct POIs covered by a set of actions.
pub fn coverage_of(actions: &[CandidateAction], pois: &[Poi]) -> usize {
    let mut all = Bits::empty(pois.len());
    for b in coverage_bits(actions, pois) {
        all.union_with(&b);
    }
    all.count()
}

/// Greedy set cover under a budget: repeatedly add the eligible action with
/// the largest marginal coverage (lowest index on ties) until the budget is
/// spent or nothing adds coverage. Returns indices into `actions`.
pub fn greedy_set_cover(
    actions: &[CandidateAction],
    pois: &[Poi],
    budget: usize,
    allow_exiting: bool,
) -> Vec<usize> {
    let bits = coverage_bits(actions, pois);
    let eligible: Vec<usize> = (0..actions.len())
        .filter(|&i| allow_exiting || !actions[i].exits_workspace)
        .collect();
    let mut covered = Bits::empty(pois.len());
    greedy_completion(&bits, &eligible, &mut covered, Vec::new(), budget)
}

fn greedy_completion(
    bits: &[Bits],
    eligible: &[usize],
    covered: &mut Bits,
    mut chosen: Vec<usize>,
    budget: usize,
) -> Vec<usize> {
    while chosen.len() < budget {
        let best = eligible
            .iter()
            .map(|&i| (covered.gain(&bits[i]), i))
            .filter(|&(g, i)| g > 0 && !chosen.contains(&i))
            .fold(None, |acc: Option<(usize, usize)>, c| match acc {
                Some(a) if a.0 >= c.0 => Some(a),
                _ => Some(c),
            });
        let Some((_, i)) = best else { break };
        covered.union_with(&bits[i]);
        chosen.push(i);
    }
    chosen
}

struct Node {
    /// Action added on the edge into this node; `None` is the stop move.
    mv: Option<usize>,
    children: Vec<usize>,
    untried: Vec<Option<usize>>,
    visits: f64,
    total: f64,
    terminal: bool,
}

struct Search<'a> {
    bits: Vec<Bits>,
    eligible: Vec<usize>,
    npoi: usize,
    budget: usize,
    action_cost: f64,
    nodes: Vec<Node>,
    best: (f64, Vec<usize>),
    rng: ChaCha8Rng,
    cfg: &'a PlannerConfig,
}

impl Search<'_> {
    fn covered(&self, set: &[usize]) -> Bits {
        let mut c = Bits::empty(self.npoi);
        for &i in set {
            c.union_with(&self.bits[i]);
        }
        c
    }

    fn reward(&self, set: &[usize]) -> f64 {
        (self.covered(set).count() as f64 - self.action_cost * set.len() as f64) / self.npoi as f64
    }

    /// Additions with positive marginal coverage, ascending.
    fn moves(&self, set: &[usize]) -> Vec<usize> {
        if set.len() >= self.budget {
            return Vec::new();
        }
        let c = self.covered(set);
        self.eligible
            .iter()
            .copied()
            .filter(|&i| !set.contains(&i) && c.gain(&self.bits[i]) > 0)
            .collect()
    }

    /// A stop edge ends the sequence; so does an exhausted budget or the
    /// absence of any move that adds coverage.
    fn new_node(&mut self, mv: Option<usize>, set: &[usize], root: bool) -> usize {
        let moves = self.moves(set);
        let terminal = (!root && mv.is_none()) || moves.is_empty();
        let mut untried: Vec<Option<usize>> = Vec::new();
        if !terminal {
            untried.push(None);
            untried.extend(moves.into_iter().map(Some));
        }
        self.nodes.push(Node {
            mv,
            children: Vec::new(),
            untried,
            visits: 0.0,
            total: 0.0,
            terminal,
        });
        self.nodes.len() - 1
    }

    fn rollout(&mut self, mut set: Vec<usize>, depth: usize, greedy_prob: f64) -> Vec<usize> {
        for _ in 0..depth {
            let moves = self.moves(&set);
            if moves.is_empty() {
                break;
            }
            let pick = if self.rng.random::<f64>() < greedy_prob {
                let c = self.covered(&set);
                let mut best = moves[0];
                for &m in &moves[1..] {
                    if c.gain(&self.bits[m]) > c.gain(&self.bits[best]) {
                        best = m;
                    }
                }
                best
            } else {
                moves[self.rng.random_range(0..moves.len())]
            };
            set.push(pick);
        }
        set
    }

    fn record(&mut self, set: &[usize], r: f64) {
        if r > self.best.0 {
            self.best = (r, set.to_vec());
        }
    }

    fn iterate(&mut self) {
        let mut path = vec![0usize];
        let mut set: Vec<usize> = Vec::new();
        let mut node = 0;
        // selection
        while !self.nodes[node].terminal && self.nodes[node].untried.is_empty() {
            let parent_visits = self.nodes[node].visits.max(1.0);
            let c = self.cfg.exploration;
            let next = *self.nodes[node]
                .children
                .iter()
                .max_by(|&&a, &&b| {
                    let ucb = |k: usize| {
                        let n = &self.nodes[k];
                        n.total / n.visits + c * math::sqrt(math::ln(parent_visits) / n.visits)
                    };
                    ucb(a).total_cmp(&ucb(b)).then(b.cmp(&a))
                })
                .expect("expanded node has children");
            node = next;
            path.push(node);
            if let Some(a) = self.nodes[node].mv {
                set.push(a);
            }
        }
        // expansion
        let mut stopped = node != 0 && self.nodes[node].mv.is_none();
        if !self.nodes[node].terminal {
            let k = self.rng.random_range(0..self.nodes[node].untried.len());
            let mv = self.nodes[node].untried.swap_remove(k);
            if let Some(a) = mv {
                set.push(a);
            } else {
                stopped = true;
            }
            let child = self.new_node(mv, &set, false);
            self.nodes[node].children.push(child);
            node = child;
            path.push(node);
        }
        let full = if stopped || self.nodes[node].terminal {
            set
        } else {
            self.rollout(set, self.cfg.rollout_depth, GREEDY_ROLLOUT)
        };
        let r = self.reward(&full);
        self.record(&full, r);
        for &k in &path {
            self.nodes[k].visits += 1.0;
            self.nodes[k].total += r;
        }
    }
}

/// Chooses a POI-covering subset of at most `max_actions` actions with UCT.
///
/// The search runs over sequences of additions. A move either adds an
/// action with positive marginal coverage or stops. The reward is
/// `(covered POIs - action_cost * actions) / |POIs|`. Rollouts are
/// epsilon-greedy, and the very first rollout from the root is fully greedy,
/// so the result never covers fewer POIs than greedy set cover. Actions that
/// leave the workspace are skipped unless the config allows them.
///
/// Returns the chosen actions in ascending input order.
pub fn select_actions_mcts(
    actions: &[CandidateAction],
    pois: &[Poi],
    max_actions: usize,
    cfg: &PlannerConfig,
) -> Result<Vec<CandidateAction>, PlanError> {
    if actions.is_empty() {
        return Err(PlanError::NoActions);
    }
    if max_actions == 0 {
        return Err(PlanError::Invalid("action budget must be at least 1"));
    }
    cfg.validate()?;
    if pois.is_empty() {
        return Ok(Vec::new());
    }
    let eligible: Vec<usize> = (0..actions.len())
        .filter(|&i| cfg.allow_exiting_actions || !actions[i].exits_workspace)
        .collect();
    let mut s = Search {
        bits: coverage_bits(actions, pois),
        eligible,
        npoi: pois.len(),
        budget: max_actions,
        action_cost: cfg.action_cost,
        nodes: Vec::new(),
        best: (0.0, Vec::new()),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        cfg,
    };
    s.new_node(None, &[], true);

    let greedy = s.rollout(Vec::new(), max_actions, 1.0);
    let r = s.reward(&greedy);
    s.record(&greedy, r);
    s.nodes[0].visits += 1.0;
    s.nodes[0].total += r;
    for _ in 0..cfg.mcts_iterations {
        s.iterate();
    }
    let mut chosen = s.best.1;
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| actions[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::{Sample, Trajectory};
    use crate::geom::Vec2;

    fn poi(id: usize) -> Poi {
        Poi {
            id,
            position: Vec2::new(id as f64 * 100.0, 0.0),
            r_obs: 5.0,
        }
    }

    fn covering(id: usize, covered: &[usize]) -> CandidateAction {
        let traj = Trajectory {
            dt: 1.0,
            samples: vec![
                Sample {
                    t: 0.0,
                    pos: Vec2::ZERO,
                },
                Sample {
                    t: 1.0,
                    pos: Vec2::ZERO,
                },
            ],
            truncated: false,
        };
        let mut a = CandidateAction::from_trajectory(id, traj, &[]);
        a.covered = covered.to_vec();
        a
    }

    fn cfg(iters: usize, seed: u64) -> PlannerConfig {
        PlannerConfig {
            mcts_iterations: iters,
            seed,
            ..PlannerConfig::default()
        }
    }

    #[test]
    fn dominant_action_wins_single_budget() {
        let pois = [poi(1), poi(2)];
        let acts = [covering(0, &[1, 2]), covering(1, &[1])];
        let sel = select_actions_mcts(&acts, &pois, 1, &cfg(200, 3)).unwrap();
        assert_eq!(sel.len(), 1);
        assert_eq!(sel[0].id, 0);
    }

    #[test]
    fn disjoint_actions_all_selected() {
        let pois = [poi(1), poi(2), poi(3)];
        let acts = [covering(0, &[1]), covering(1, &[2]), covering(2, &[3])];
        let sel = select_actions_mcts(&acts, &pois, 3, &cfg(500, 1)).unwrap();
        assert_eq!(sel.iter().map(|a| a.id).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(coverage_of(&sel, &pois), 3);
    }

    #[test]
    fn redundant_actions_are_not_added() {
        let pois = [poi(1), poi(2)];
        let acts = [covering(0, &[1, 2]), covering(1, &[1]), covering(2, &[2])];
        let sel = select_actions_mcts(&acts, &pois, 3, &cfg(500, 9)).unwrap();
        assert_eq!(sel.len(), 1);
    }

    #[test]
    fn exiting_actions_skipped_by_default() {
        let pois = [poi(1)];
        let mut a = covering(0, &[1]);
        a.exits_workspace = true;
        let acts = [a, covering(1, &[1])];
        let sel = select_actions_mcts(&acts, &pois, 1, &cfg(100, 0)).unwrap();
        assert_eq!(sel[0].id, 1);
        assert_eq!(greedy_set_cover(&acts, &pois, 1, false), vec![1]);
        assert_eq!(greedy_set_cover(&acts, &pois, 1, true), vec![0]);
    }

    #[test]
    fn empty_action_list_is_an_error() {
        assert_eq!(
            select_actions_mcts(&[], &[poi(1)], 2, &cfg(10, 0)).unwrap_err(),
            PlanError::NoActions
        );
    }
}
