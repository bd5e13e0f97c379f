//! Structure learning (BIC hill-climbing) and parameter estimation.

mod bic;
mod cpt;
mod hill_climb;
mod model_io;
mod network;

pub use bic::{bic_local, bic_total, ScoreCache};
pub use cpt::Cpt;
pub use hill_climb::{hill_climb, HillClimbOptions, HillClimbResult, Move};
pub use model_io::{
    load_model, model_from_str, model_to_string, save_model, MODEL_FORMAT, MODEL_VERSION,
};
pub use network::DiscreteBayesNet;

use crate::error::Result;
use crate::graph::Dag;
use crate::telemetry::{contingency, ColumnEncoding, ColumnMap, DiscretizationMap, DiscreteDataset};

/// Default Laplace pseudo-count used by the training pipeline.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Estimates one CPT per node of `dag` from `data`. Nodes are matched to
/// data columns by name; the resulting network follows the DAG's node order.
pub fn fit_cpts(data: &DiscreteDataset, dag: &Dag, alpha: f64) -> Result<DiscreteBayesNet> {
    let columns: Vec<usize> = dag
        .names()
        .iter()
        .map(|n| data.index_of(n))
        .collect::<Result<_>>()?;
    let mut cpts = Vec::with_capacity(dag.len());
    for v in 0..dag.len() {
        let parent_cols: Vec<usize> = dag.parents(v).iter().map(|&p| columns[p]).collect();
        let counts = contingency(data, columns[v], &parent_cols)?;
        let mut cpt = Cpt::from_counts(&counts, alpha)?;
        cpt.variable = v;
        cpt.parents = dag.parents(v).to_vec();
        cpts.push(cpt);
    }
    let metas = columns.iter().map(|&c| data.metas()[c].clone()).collect();
    let map = DiscretizationMap {
        columns: columns
            .iter()
            .map(|&c| column_map(data, c))
            .collect(),
    };
    DiscreteBayesNet::new(metas, map, dag.clone(), cpts)
}

/// Hill-climb then fit, the full training step.
pub fn train(
    data: &DiscreteDataset,
    opts: &HillClimbOptions,
    alpha: f64,
) -> Result<(DiscreteBayesNet, HillClimbResult)> {
    let search = hill_climb(data, opts)?;
    let net = fit_cpts(data, &search.dag, alpha)?;
    Ok((net, search))
}

/// The dataset's mapping for column `c`, or a label-only nominal mapping
/// when the dataset was built without one.
fn column_map(data: &DiscreteDataset, c: usize) -> ColumnMap {
    let meta = &data.metas()[c];
    data.map()
        .columns
        .iter()
        .find(|m| m.name == meta.name)
        .cloned()
        .unwrap_or_else(|| ColumnMap {
            name: meta.name.clone(),
            encoding: ColumnEncoding::Nominal {
                labels: meta.states.clone(),
            },
        })
}
