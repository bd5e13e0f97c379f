use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::Dag;
use crate::telemetry::DiscreteDataset;

use super::bic::ScoreCache;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HillClimbOptions {
    pub max_parents: usize,
    pub max_iters: usize,
    pub tabu_len: usize,
    /// Minimum score gain for a move to count as an improvement.
    pub epsilon: f64,
    pub use_cache: bool,
    /// Extra climbs, each started from the best graph so far after
    /// `perturb` random moves; kept only when they score higher.
    pub restarts: usize,
    pub perturb: usize,
    /// Seeds the perturbations.
    pub seed: u64,
}

impl Default for HillClimbOptions {
    fn default() -> Self {
        HillClimbOptions {
            max_parents: 4,
            max_iters: 1_000_000,
            tabu_len: 100,
            epsilon: 1e-6,
            use_cache: true,
            restarts: 30,
            perturb: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Add(usize, usize),
    Remove(usize, usize),
    Reverse(usize, usize),
}

impl Move {
    fn inverse(self) -> Move {
        match self {
            Move::Add(u, v) => Move::Remove(u, v),
            Move::Remove(u, v) => Move::Add(u, v),
            Move::Reverse(u, v) => Move::Reverse(v, u),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HillClimbResult {
    pub dag: Dag,
    pub moves: Vec<Move>,
    /// Total score before the first move and after every accepted move.
    /// With restarts, both describe the climb that produced `dag`.
    pub trace: Vec<f64>,
    /// Index of that climb, 0 for the climb from the empty graph.
    pub climb: usize,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

impl HillClimbResult {
    pub fn score(&self) -> f64 {
        *self.trace.last().expect("trace starts with the initial score")
    }
}

/// Greedy BIC hill-climbing over single-edge additions, removals and
/// reversals, starting from the empty graph over the data's variables.
///
/// Candidates are scanned in `(from, to, add|remove|reverse)` order and the
/// first strictly best move wins, so results depend only on the data and
/// the seed.
pub fn hill_climb(data: &DiscreteDataset, opts: &HillClimbOptions) -> Result<HillClimbResult> {
    let names = data.metas().iter().map(|m| m.name.clone()).collect();
    let empty = Dag::new(names)?;
    let mut cache = if opts.use_cache {
        ScoreCache::new()
    } else {
        ScoreCache::disabled()
    };
    let mut best = climb(data, empty, &mut cache, opts)?;
    let mut best_climb = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for r in 1..=opts.restarts {
        let start = perturbed(&best.0, &mut rng, opts.perturb, opts.max_parents)?;
        let next = climb(data, start, &mut cache, opts)?;
        if last(&next.2) > last(&best.2) + opts.epsilon {
            best = next;
            best_climb = r;
        }
    }
    let (dag, moves, trace) = best;
    Ok(HillClimbResult {
        dag,
        moves,
        trace,
        climb: best_climb,
        cache_hits: cache.hits,
        cache_misses: cache.misses,
    })
}

fn last(trace: &[f64]) -> f64 {
    trace[trace.len() - 1]
}

/// `dag` after `k` random legal single-edge moves.
fn perturbed(dag: &Dag, rng: &mut ChaCha8Rng, k: usize, max_parents: usize) -> Result<Dag> {
    let mut dag = dag.clone();
    let n = dag.len();
    if n < 2 {
        return Ok(dag);
    }
    let mut done = 0;
    let mut tries = 0;
    while done < k && tries < 100 * k {
        tries += 1;
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let legal = if dag.has_edge(u, v) {
            if rng.random::<bool>() {
                dag.remove_edge(u, v)?;
                true
            } else if dag.parents(u).len() < max_parents && !has_indirect_path(&dag, u, v) {
                dag.reverse_edge(u, v)?;
                true
            } else {
                false
            }
        } else if !dag.has_edge(v, u) && dag.parents(v).len() < max_parents && !dag.has_path(v, u) {
            dag.add_edge(u, v)?;
            true
        } else {
            false
        };
        done += legal as usize;
    }
    Ok(dag)
}

/// One greedy climb from `dag` until no move improves by more than
/// epsilon.
fn climb(
    data: &DiscreteDataset,
    mut dag: Dag,
    cache: &mut ScoreCache,
    opts: &HillClimbOptions,
) -> Result<(Dag, Vec<Move>, Vec<f64>)> {
    let n = dag.len();
    let mut local: Vec<f64> = (0..n)
        .map(|v| cache.score(data, v, dag.parents(v)))
        .collect::<Result<_>>()?;
    let mut trace = vec![local.iter().sum()];
    let mut moves = Vec::new();
    let mut tabu: VecDeque<Move> = VecDeque::with_capacity(opts.tabu_len);

    for _ in 0..opts.max_iters {
        let mut best: Option<(f64, Move)> = None;
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let candidates: &[Move] = if dag.has_edge(u, v) {
                    &[Move::Remove(u, v), Move::Reverse(u, v)]
                } else if !dag.has_edge(v, u) {
                    &[Move::Add(u, v)]
                } else {
                    &[]
                };
                for &m in candidates {
                    if tabu.contains(&m) {
                        continue;
                    }
                    let Some(delta) = move_delta(data, &dag, cache, &local, m, opts)? else {
                        continue;
                    };
                    if delta > opts.epsilon && best.is_none_or(|(b, _)| delta > b) {
                        best = Some((delta, m));
                    }
                }
            }
        }
        let Some((_, m)) = best else { break };
        apply(&mut dag, m)?;
        for v in touched(m) {
            local[v] = cache.score(data, v, dag.parents(v))?;
        }
        trace.push(local.iter().sum());
        moves.push(m);
        if opts.tabu_len > 0 {
            if tabu.len() == opts.tabu_len {
                tabu.pop_front();
            }
            tabu.push_back(m.inverse());
        }
    }
    Ok((dag, moves, trace))
}

fn touched(m: Move) -> Vec<usize> {
    match m {
        Move::Add(_, v) | Move::Remove(_, v) => vec![v],
        Move::Reverse(u, v) => vec![u, v],
    }
}

fn apply(dag: &mut Dag, m: Move) -> Result<()> {
    match m {
        Move::Add(u, v) => dag.add_edge(u, v),
        Move::Remove(u, v) => dag.remove_edge(u, v),
        Move::Reverse(u, v) => dag.reverse_edge(u, v),
    }
}

fn with(parents: &[usize], u: usize) -> Vec<usize> {
    let mut p = parents.to_vec();
    p.push(u);
    p
}

fn without(parents: &[usize], u: usize) -> Vec<usize> {
    parents.iter().copied().filter(|&p| p != u).collect()
}

/// Score change of a legal move, `None` if the move is not allowed.
fn move_delta(
    data: &DiscreteDataset,
    dag: &Dag,
    cache: &mut ScoreCache,
    local: &[f64],
    m: Move,
    opts: &HillClimbOptions,
) -> Result<Option<f64>> {
    Ok(match m {
        Move::Add(u, v) => {
            if dag.parents(v).len() >= opts.max_parents || dag.has_path(v, u) {
                None
            } else {
                Some(cache.score(data, v, &with(dag.parents(v), u))? - local[v])
            }
        }
        Move::Remove(u, v) => Some(cache.score(data, v, &without(dag.parents(v), u))? - local[v]),
        Move::Reverse(u, v) => {
            if dag.parents(u).len() >= opts.max_parents || has_indirect_path(dag, u, v) {
                None
            } else {
                let dv = cache.score(data, v, &without(dag.parents(v), u))? - local[v];
                let du = cache.score(data, u, &with(dag.parents(u), v))? - local[u];
                Some(dv + du)
            }
        }
    })
}

/// A path `u ~> v` that does not use the direct edge `u -> v`.
fn has_indirect_path(dag: &Dag, u: usize, v: usize) -> bool {
    dag.children(u)
        .iter()
        .any(|&c| c != v && dag.has_path(c, v))
}
