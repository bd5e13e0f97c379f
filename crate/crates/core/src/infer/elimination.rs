use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};

use super::factor::{factor_product, marginalize, Factor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Heuristic {
    MinFill,
    /// Ascending variable index, used when it is strictly narrower than
    /// the min-fill plan.
    Declaration,
    /// Supplied by the caller.
    Given,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationPlan {
    pub ordering: Vec<usize>,
    /// Largest number of variables in any product formed while eliminating.
    pub width: usize,
    pub heuristic: Heuristic,
}

type Graph = BTreeMap<usize, BTreeSet<usize>>;

fn interaction_graph(factors: &[Factor]) -> Graph {
    let mut g: Graph = BTreeMap::new();
    for f in factors {
        for &u in f.scope() {
            let entry = g.entry(u).or_default();
            entry.extend(f.scope().iter().copied().filter(|&w| w != u));
        }
    }
    g
}

fn eliminate_node(g: &mut Graph, v: usize) -> usize {
    let nbrs = g.remove(&v).unwrap_or_default();
    for &a in &nbrs {
        let entry = g.get_mut(&a).expect("neighbour present");
        entry.remove(&v);
        entry.extend(nbrs.iter().copied().filter(|&b| b != a));
    }
    nbrs.len() + 1
}

fn fill_in(g: &Graph, v: usize) -> usize {
    let nbrs: Vec<usize> = g[&v].iter().copied().collect();
    let mut fill = 0;
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            if !g[&a].contains(&b) {
                fill += 1;
            }
        }
    }
    fill
}

/// Width of eliminating `ordering` from `factors`, or an error if the
/// ordering names a variable outside every scope.
pub fn plan_width(factors: &[Factor], ordering: &[usize]) -> Result<usize> {
    let mut g = interaction_graph(factors);
    let mut width = 0;
    for &v in ordering {
        if !g.contains_key(&v) {
            return Err(Error::NotInScope(format!("#{v}")));
        }
        width = width.max(eliminate_node(&mut g, v));
    }
    Ok(width)
}

/// Greedy min-fill ordering for every variable outside `keep`. Ties go to
/// the smaller name, then the smaller index.
pub fn elimination_order(
    factors: &[Factor],
    keep: &BTreeSet<usize>,
    names: &[String],
) -> EliminationPlan {
    let mut g = interaction_graph(factors);
    let mut remaining: Vec<usize> = g.keys().copied().filter(|v| !keep.contains(v)).collect();
    let naive = remaining.clone();
    let name_of = |v: usize| names.get(v).map(String::as_str).unwrap_or("");
    let mut ordering = Vec::with_capacity(remaining.len());
    let mut width = 0;
    while !remaining.is_empty() {
        let (i, &v) = remaining
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| {
                fill_in(&g, a)
                    .cmp(&fill_in(&g, b))
                    .then_with(|| name_of(a).cmp(name_of(b)))
                    .then(a.cmp(&b))
            })
            .expect("nonempty");
        remaining.swap_remove(i);
        width = width.max(eliminate_node(&mut g, v));
        ordering.push(v);
    }
    let naive_width = plan_width(factors, &naive).expect("naive order is in scope");
    if naive_width < width {
        return EliminationPlan {
            ordering: naive,
            width: naive_width,
            heuristic: Heuristic::Declaration,
        };
    }
    EliminationPlan {
        ordering,
        width,
        heuristic: Heuristic::MinFill,
    }
}

/// Sums out `ordering` one variable at a time and returns the remaining
/// factors, whose product is the marginal over the other variables.
pub fn eliminate(mut factors: Vec<Factor>, ordering: &[usize]) -> Result<Vec<Factor>> {
    for &v in ordering {
        let (bucket, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(v));
        factors = rest;
        let mut iter = bucket.into_iter();
        let Some(first) = iter.next() else {
            return Err(Error::NotInScope(format!("#{v}")));
        };
        let product = iter.try_fold(first, |acc, f| factor_product(&acc, &f))?;
        factors.push(marginalize(&product, v)?);
    }
    Ok(factors)
}

/// Product of all factors, or the unit scalar for an empty list.
pub fn product_all(factors: &[Factor]) -> Result<Factor> {
    let mut iter = factors.iter();
    let Some(first) = iter.next() else {
        return Ok(Factor::scalar(1.0));
    };
    iter.try_fold(first.clone(), |acc, f| factor_product(&acc, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{}", (b'A' + i as u8) as char)).collect()
    }

    fn pair(u: usize, v: usize) -> Factor {
        Factor::ones(vec![u, v], vec![2, 2])
    }

    #[test]
    fn chain_eliminates_the_end_first() {
        // A - B - C, keep C: eliminating B first would join A and C
        let factors = vec![Factor::ones(vec![0], vec![2]), pair(0, 1), pair(1, 2)];
        let plan = elimination_order(&factors, &BTreeSet::from([2]), &names(3));
        assert_eq!(plan.ordering, vec![0, 1]);
        assert_eq!(plan.width, 2);
        assert_eq!(plan.heuristic, Heuristic::MinFill);
    }

    #[test]
    fn keeping_everything_leaves_nothing() {
        let factors = vec![pair(0, 1)];
        let plan = elimination_order(&factors, &BTreeSet::from([0, 1]), &names(2));
        assert!(plan.ordering.is_empty());
        assert_eq!(plan.width, 0);
    }

    #[test]
    fn names_break_ties() {
        // star around 0: leaves 1..3 all have zero fill
        let factors = vec![pair(0, 3), pair(0, 1), pair(0, 2)];
        let mut n = names(4);
        n[3] = "AA".into();
        let plan = elimination_order(&factors, &BTreeSet::from([0]), &n);
        assert_eq!(plan.ordering, vec![3, 1, 2]);
    }

    #[test]
    fn eliminate_matches_direct_sum() {
        let a = Factor::new(vec![0], vec![2], vec![0.3, 0.7]).unwrap();
        let b = Factor::new(vec![0, 1], vec![2, 2], vec![0.9, 0.1, 0.2, 0.8]).unwrap();
        let out = eliminate(vec![a, b], &[0]).unwrap();
        let m = product_all(&out).unwrap();
        assert_eq!(m.scope(), &[1]);
        assert!((m.get(&[0]) - (0.3 * 0.9 + 0.7 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn plan_width_rejects_unknown_variables() {
        assert!(plan_width(&[pair(0, 1)], &[5]).is_err());
    }
}
