use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::Dag;
use crate::learn::{Cpt, DiscreteBayesNet};
use crate::telemetry::{ColumnEncoding, ColumnMap, DiscretizationMap, VariableKind, VariableMeta};

/// A random DAG on `n` nodes named `x0, x1, ...`: each forward pair of a
/// random node order gets an edge with probability `density`, subject to
/// `max_parents`.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, density: f64, max_parents: usize) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut edges = Vec::new();
    for j in 1..n {
        let mut parents = 0;
        for i in 0..j {
            if parents < max_parents && rng.random::<f64>() < density {
                edges.push((order[i], order[j]));
                parents += 1;
            }
        }
    }
    let names = (0..n).map(|i| format!("x{i}")).collect();
    Dag::with_edges(names, &edges).expect("forward edges are acyclic")
}

/// A random network with strictly positive CPTs. Binary variables are
/// boolean; larger ones are numeric with unit-width bins `(-inf, 1], (1,
/// 2], ...`, so that bound and range SLOs can be posed on them.
pub fn random_network(seed: u64, n_vars: usize, max_card: usize, max_parents: usize) -> DiscreteBayesNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dag = random_dag(&mut rng, n_vars, 0.35, max_parents);
    randomize_cpts(&mut rng, dag, max_card).expect("random network is well formed")
}

/// Random cardinalities in `2..=max_card` and random positive CPTs for `dag`.
pub fn randomize_cpts<R: Rng>(rng: &mut R, dag: Dag, max_card: usize) -> Result<DiscreteBayesNet> {
    let cards: Vec<usize> = (0..dag.len()).map(|_| rng.random_range(2..=max_card.max(2))).collect();
    let mut metas = Vec::with_capacity(dag.len());
    let mut columns = Vec::with_capacity(dag.len());
    for (v, &k) in cards.iter().enumerate() {
        let (kind, encoding) = if k == 2 {
            (VariableKind::Boolean, ColumnEncoding::Boolean)
        } else {
            (
                VariableKind::OrdinalNumeric,
                ColumnEncoding::Binned {
                    cuts: (1..k).map(|c| c as f64).collect(),
                    min: 0.0,
                    max: k as f64,
                },
            )
        };
        metas.push(VariableMeta::new(dag.name(v), kind, "", false, encoding.labels())?);
        columns.push(ColumnMap {
            name: dag.name(v).to_string(),
            encoding,
        });
    }
    let mut cpts = Vec::with_capacity(dag.len());
    for v in 0..dag.len() {
        let parents = dag.parents(v).to_vec();
        let parent_cards: Vec<usize> = parents.iter().map(|&p| cards[p]).collect();
        let contexts: usize = parent_cards.iter().product();
        let mut table = Vec::with_capacity(contexts * cards[v]);
        for _ in 0..contexts {
            let row: Vec<f64> = (0..cards[v]).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = row.iter().sum();
            table.extend(row.iter().map(|x| x / total));
        }
        cpts.push(Cpt::new(v, parents, parent_cards, cards[v], table, 0.0)?);
    }
    DiscreteBayesNet::new(metas, DiscretizationMap { columns }, dag, cpts)
}
