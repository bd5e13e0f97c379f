//! Versioned JSON model documents.
//!
//! Field order is fixed by the record structs below and floats are written in
//! their shortest round-trip form, so `load(save(m)) == m` bit for bit and
//! identical models serialize to identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::telemetry::{DiscretizationMap, VariableMeta};

use super::{Cpt, DiscreteBayesNet};

pub const MODEL_FORMAT: &str = "mbconf-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    format: String,
    version: u32,
    variables: Vec<VariableMeta>,
    discretization: DiscretizationMap,
    edges: Vec<(String, String)>,
    cpts: Vec<CptRecord>,
}

#[derive(Serialize, Deserialize)]
struct CptRecord {
    variable: String,
    parents: Vec<String>,
    alpha: f64,
    rows: Vec<Vec<f64>>,
}

pub fn model_to_string(net: &DiscreteBayesNet) -> Result<String> {
    let dag = net.dag();
    let record = ModelRecord {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        variables: net.metas().to_vec(),
        discretization: net.map().clone(),
        edges: dag
            .edges()
            .into_iter()
            .map(|(u, v)| (dag.name(u).to_string(), dag.name(v).to_string()))
            .collect(),
        cpts: net
            .cpts()
            .iter()
            .map(|c| CptRecord {
                variable: dag.name(c.variable).to_string(),
                parents: c.parents.iter().map(|&p| dag.name(p).to_string()).collect(),
                alpha: c.alpha,
                rows: (0..c.contexts()).map(|ctx| c.row(ctx).to_vec()).collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&record)?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_str(text: &str) -> Result<DiscreteBayesNet> {
    let record: ModelRecord = serde_json::from_str(text)?;
    if record.format != MODEL_FORMAT {
        return Err(Error::Model(format!("unexpected format `{}`", record.format)));
    }
    if record.version != MODEL_VERSION {
        return Err(Error::Model(format!(
            "unsupported version {} (expected {MODEL_VERSION})",
            record.version
        )));
    }
    let names: Vec<String> = record.variables.iter().map(|m| m.name.clone()).collect();
    let mut dag = Dag::new(names)?;
    for (u, v) in &record.edges {
        let (u, v) = (dag.require(u)?, dag.require(v)?);
        dag.add_edge(u, v)?;
    }
    if record.cpts.len() != dag.len() {
        return Err(Error::Model(format!(
            "{} CPTs for {} variables",
            record.cpts.len(),
            dag.len()
        )));
    }
    let mut cpts = Vec::with_capacity(dag.len());
    for (i, c) in record.cpts.iter().enumerate() {
        if dag.require(&c.variable)? != i {
            return Err(Error::Model(format!("CPT `{}` out of order", c.variable)));
        }
        let parents: Vec<usize> = c
            .parents
            .iter()
            .map(|p| dag.require(p))
            .collect::<Result<_>>()?;
        let parent_cards = parents
            .iter()
            .map(|&p| record.variables[p].cardinality())
            .collect();
        let table = c.rows.iter().flatten().copied().collect();
        cpts.push(Cpt::new(
            i,
            parents,
            parent_cards,
            record.variables[i].cardinality(),
            table,
            c.alpha,
        )?);
    }
    DiscreteBayesNet::new(record.variables, record.discretization, dag, cpts)
}

pub fn save_model(net: &DiscreteBayesNet, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(net)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<DiscreteBayesNet> {
    model_from_str(&std::fs::read_to_string(path)?)
}
