use std::collections::HashMap;

use crate::error::Result;
use crate::graph::Dag;
use crate::telemetry::{contingency, DiscreteDataset};

/// Local BIC score of one family: maximised log-likelihood minus
/// `ln(N)/2` per free parameter. Empty contexts contribute nothing.
pub fn bic_local(data: &DiscreteDataset, child: usize, parents: &[usize]) -> Result<f64> {
    let counts = contingency(data, child, parents)?;
    let n = data.row_count() as f64;
    let mut ll = 0.0;
    for ctx in 0..counts.contexts() {
        let row = counts.row(ctx);
        let total: u64 = row.iter().sum();
        if total == 0 {
            continue;
        }
        let total = total as f64;
        for &c in row {
            if c > 0 {
                let c = c as f64;
                ll += c * (c / total).ln();
            }
        }
    }
    let params = (counts.child_card as f64 - 1.0) * counts.contexts() as f64;
    let penalty = if n > 0.0 { n.ln() / 2.0 * params } else { 0.0 };
    Ok(ll - penalty)
}

/// Sum of local scores over every family of `dag`. Nodes are matched to
/// data columns by position.
pub fn bic_total(data: &DiscreteDataset, dag: &Dag) -> Result<f64> {
    (0..dag.len())
        .map(|v| bic_local(data, v, dag.parents(v)))
        .sum()
}

/// Memoised local scores keyed by `(child, sorted parents)`.
#[derive(Debug, Default)]
pub struct ScoreCache {
    scores: HashMap<(usize, Vec<usize>), f64>,
    enabled: bool,
    pub hits: u64,
    pub misses: u64,
}

impl ScoreCache {
    pub fn new() -> Self {
        ScoreCache {
            enabled: true,
            ..Default::default()
        }
    }

    /// A cache that never stores anything; every lookup recomputes.
    pub fn disabled() -> Self {
        ScoreCache::default()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score(&mut self, data: &DiscreteDataset, child: usize, parents: &[usize]) -> Result<f64> {
        let mut key = parents.to_vec();
        key.sort_unstable();
        if self.enabled {
            if let Some(&s) = self.scores.get(&(child, key.clone())) {
                self.hits += 1;
                return Ok(s);
            }
        }
        self.misses += 1;
        let s = bic_local(data, child, &key)?;
        if self.enabled {
            self.scores.insert((child, key), s);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::{DiscretizationMap, VariableKind, VariableMeta};
    use approx::assert_abs_diff_eq;

    fn dataset(columns: Vec<Vec<usize>>, cards: &[usize]) -> DiscreteDataset {
        let metas = cards
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                VariableMeta::new(
                    format!("v{i}"),
                    VariableKind::Nominal,
                    "",
                    false,
                    (0..k).map(|s| format!("s{s}")).collect(),
                )
                .unwrap()
            })
            .collect();
        DiscreteDataset::new(metas, columns, DiscretizationMap::default()).unwrap()
    }

    #[test]
    fn balanced_binary_root() {
        let col: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let d = dataset(vec![col], &[2]);
        let ll = 100.0 * 0.5f64.ln();
        let penalty = 100f64.ln() / 2.0;
        assert_abs_diff_eq!(ll, -69.31471805599453, epsilon = 1e-9);
        assert_abs_diff_eq!(penalty, 2.302585092994046, epsilon = 1e-9);
        assert_abs_diff_eq!(bic_local(&d, 0, &[]).unwrap(), -71.61730314898858, epsilon = 1e-9);
    }

    #[test]
    fn independent_parent_lowers_the_score() {
        // a and b are exactly independent and uniform: every (a, b) pair occurs 25 times
        let a: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let b: Vec<usize> = (0..100).map(|i| (i / 2) % 2).collect();
        let d = dataset(vec![a, b], &[2, 2]);
        let alone = bic_local(&d, 1, &[]).unwrap();
        let with = bic_local(&d, 1, &[0]).unwrap();
        let penalty = 100f64.ln() / 2.0;
        // LL unchanged, penalty doubled
        assert_abs_diff_eq!(alone - with, penalty, epsilon = 1e-9);
        assert!(with < alone);
    }

    #[test]
    fn copy_column_prefers_the_parent() {
        let a: Vec<usize> = (0..1000).map(|i| (i * 7 + i / 3) % 3).collect();
        let d = dataset(vec![a.clone(), a], &[3, 3]);
        assert!(bic_local(&d, 1, &[0]).unwrap() > bic_local(&d, 1, &[]).unwrap());
    }

    #[test]
    fn empty_graph_total_is_sum_of_roots() {
        let a: Vec<usize> = (0..50).map(|i| i % 3).collect();
        let b: Vec<usize> = (0..50).map(|i| (i * i) % 2).collect();
        let d = dataset(vec![a, b], &[3, 2]);
        let dag = Dag::new(vec!["v0".into(), "v1".into()]).unwrap();
        let expected = bic_local(&d, 0, &[]).unwrap() + bic_local(&d, 1, &[]).unwrap();
        assert_abs_diff_eq!(bic_total(&d, &dag).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn two_node_score_equivalence() {
        let a: Vec<usize> = (0..300).map(|i| (i * 13) % 3).collect();
        let b: Vec<usize> = a.iter().enumerate().map(|(i, &x)| (x + (i % 5 == 0) as usize) % 2).collect();
        let d = dataset(vec![a, b], &[3, 2]);
        let names = vec!["v0".to_string(), "v1".to_string()];
        let ab = Dag::with_edges(names.clone(), &[(0, 1)]).unwrap();
        let ba = Dag::with_edges(names, &[(1, 0)]).unwrap();
        assert_abs_diff_eq!(
            bic_total(&d, &ab).unwrap(),
            bic_total(&d, &ba).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn cache_matches_fresh_scores() {
        let a: Vec<usize> = (0..200).map(|i| (i * 3) % 4).collect();
        let b: Vec<usize> = (0..200).map(|i| (i / 7) % 2).collect();
        let d = dataset(vec![a, b], &[4, 2]);
        let mut cache = ScoreCache::new();
        let first = cache.score(&d, 1, &[0]).unwrap();
        let again = cache.score(&d, 1, &[0]).unwrap();
        assert_eq!(first, again);
        assert_eq!(first, bic_local(&d, 1, &[0]).unwrap());
        assert_eq!((cache.hits, cache.misses), (1, 1));
    }
}
