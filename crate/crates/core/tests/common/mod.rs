#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use mbconf_core::graph::Dag;
use mbconf_core::learn::DiscreteBayesNet;

/// Visits every joint state of `cards` in row-major order.
pub fn for_each_state(cards: &[usize], mut f: impl FnMut(&[usize])) {
    if cards.contains(&0) {
        return;
    }
    let mut s = vec![0usize; cards.len()];
    loop {
        f(&s);
        let mut d = cards.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            s[d] += 1;
            if s[d] < cards[d] {
                break;
            }
            s[d] = 0;
        }
    }
}

/// Product of the CPT entries for a full assignment, indexing the tables
/// directly.
pub fn joint(bn: &DiscreteBayesNet, x: &[usize]) -> f64 {
    let mut p = 1.0;
    for (v, cpt) in bn.cpts().iter().enumerate() {
        let mut ctx = 0;
        for (&q, &k) in cpt.parents.iter().zip(&cpt.parent_cards) {
            ctx = ctx * k + x[q];
        }
        p *= cpt.table[ctx * cpt.child_card + x[v]];
    }
    p
}

/// `P(targets | evidence)` by summing the full joint, row-major over the
/// targets in the given order.
pub fn brute_posterior(bn: &DiscreteBayesNet, targets: &[usize], evidence: &BTreeMap<usize, usize>) -> Vec<f64> {
    let cards = bn.cardinalities();
    let tcards: Vec<usize> = targets.iter().map(|&t| cards[t]).collect();
    let mut out = vec![0.0; tcards.iter().product()];
    for_each_state(&cards, |x| {
        if evidence.iter().any(|(&v, &s)| x[v] != s) {
            return;
        }
        let off = targets.iter().fold(0, |o, &t| o * cards[t] + x[t]);
        out[off] += joint(bn, x);
    });
    let z: f64 = out.iter().sum();
    out.iter().map(|p| p / z).collect()
}

/// d-separation by the moralized ancestral graph: `xs` and `ys` are
/// separated by `zs` iff removing `zs` disconnects them in the moral graph
/// of the ancestors of `xs ∪ ys ∪ zs`.
pub fn moral_separated(dag: &Dag, xs: &[usize], ys: &[usize], zs: &[usize]) -> bool {
    let n = dag.len();
    let mut keep = vec![false; n];
    let mut stack: Vec<usize> = xs.iter().chain(ys).chain(zs).copied().collect();
    while let Some(v) = stack.pop() {
        if !keep[v] {
            keep[v] = true;
            stack.extend(dag.parents(v).iter().copied());
        }
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for v in (0..n).filter(|&v| keep[v]) {
        let ps = dag.parents(v);
        for &p in ps {
            adj[p].insert(v);
            adj[v].insert(p);
        }
        for &a in ps {
            for &b in ps {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    let blocked: BTreeSet<usize> = zs.iter().copied().collect();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = xs.iter().copied().filter(|x| !blocked.contains(x)).collect();
    while let Some(v) = stack.pop() {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        if ys.contains(&v) {
            return false;
        }
        for &w in &adj[v] {
            if keep[w] && !blocked.contains(&w) && !seen[w] {
                stack.push(w);
            }
        }
    }
    true
}

/// Parents, children and the children's other parents, read straight off
/// the edge list.
pub fn blanket_by_definition(dag: &Dag, t: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for (u, v) in dag.edges() {
        if v == t {
            out.insert(u);
        }
        if u == t {
            out.insert(v);
            for (p, c) in dag.edges() {
                if c == v && p != t {
                    out.insert(p);
                }
            }
        }
    }
    out
}
