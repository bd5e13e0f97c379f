use crate::error::{Error, Result};
use crate::graph::{merged_blanket, BlanketReport, Dag};
use crate::telemetry::{ColumnEncoding, DiscretizationMap, VariableMeta};

use super::Cpt;

/// A DAG with one CPT per node, plus the metadata needed to translate
/// between raw telemetry and states.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteBayesNet {
    dag: Dag,
    cpts: Vec<Cpt>,
    metas: Vec<VariableMeta>,
    map: DiscretizationMap,
}

impl DiscreteBayesNet {
    pub fn new(
        metas: Vec<VariableMeta>,
        map: DiscretizationMap,
        dag: Dag,
        cpts: Vec<Cpt>,
    ) -> Result<Self> {
        let bad = |m: String| Error::InvalidNetwork(m);
        if metas.len() != dag.len() || cpts.len() != dag.len() {
            return Err(bad(format!(
                "{} variables, {} nodes, {} CPTs",
                metas.len(),
                dag.len(),
                cpts.len()
            )));
        }
        if map.columns.len() != metas.len() {
            return Err(bad(format!(
                "discretization map covers {} of {} variables",
                map.columns.len(),
                metas.len()
            )));
        }
        for (i, meta) in metas.iter().enumerate() {
            meta.validate()?;
            if dag.name(i) != meta.name || map.columns[i].name != meta.name {
                return Err(bad(format!("variable #{i} is named inconsistently")));
            }
            if map.columns[i].encoding.cardinality() != meta.cardinality() {
                return Err(bad(format!(
                    "`{}`: map has {} states, metadata {}",
                    meta.name,
                    map.columns[i].encoding.cardinality(),
                    meta.cardinality()
                )));
            }
            let cpt = &cpts[i];
            cpt.validate()?;
            if cpt.variable != i || cpt.parents != dag.parents(i) {
                return Err(bad(format!(
                    "CPT of `{}` does not match the graph's parents",
                    meta.name
                )));
            }
            if cpt.child_card != meta.cardinality()
                || cpt
                    .parents
                    .iter()
                    .zip(&cpt.parent_cards)
                    .any(|(&p, &k)| metas[p].cardinality() != k)
            {
                return Err(bad(format!("CPT of `{}` has wrong dimensions", meta.name)));
            }
        }
        Ok(DiscreteBayesNet {
            dag,
            cpts,
            metas,
            map,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, v: usize) -> &Cpt {
        &self.cpts[v]
    }

    pub fn metas(&self) -> &[VariableMeta] {
        &self.metas
    }

    pub fn meta(&self, v: usize) -> &VariableMeta {
        &self.metas[v]
    }

    pub fn map(&self) -> &DiscretizationMap {
        &self.map
    }

    pub fn encoding(&self, v: usize) -> &ColumnEncoding {
        &self.map.columns[v].encoding
    }

    pub fn len(&self) -> usize {
        self.metas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metas.is_empty()
    }

    pub fn cardinality(&self, v: usize) -> usize {
        self.metas[v].cardinality()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.metas.iter().map(VariableMeta::cardinality).collect()
    }

    pub fn names(&self) -> &[String] {
        self.dag.names()
    }

    pub fn name(&self, v: usize) -> &str {
        self.dag.name(v)
    }

    pub fn var(&self, name: &str) -> Result<usize> {
        self.dag.require(name)
    }

    /// Resolves `name=value` text into a (variable, state) pair.
    pub fn resolve_assignment(&self, name: &str, value: &str) -> Result<(usize, usize)> {
        let v = self.var(name)?;
        let state = self
            .encoding(v)
            .state_of_text(value)
            .or_else(|| self.metas[v].state_index(value))
            .ok_or_else(|| Error::UnknownState {
                variable: self.metas[v].name.clone(),
                state: value.to_string(),
            })?;
        Ok((v, state))
    }

    pub fn parameterizable(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&v| self.metas[v].parameterizable)
            .collect()
    }

    /// Merged blanket of `targets` with the parameterizable members marked.
    pub fn blanket(&self, targets: &[usize]) -> Result<BlanketReport> {
        let mut report = merged_blanket(&self.dag, targets)?;
        report.parameterizable = report
            .members
            .keys()
            .copied()
            .filter(|&v| self.metas[v].parameterizable)
            .collect();
        Ok(report)
    }

    /// Product of the CPT entries for a full assignment.
    pub fn joint_probability(&self, assignment: &[usize]) -> f64 {
        self.cpts.iter().map(|c| c.prob(assignment)).product()
    }
}
