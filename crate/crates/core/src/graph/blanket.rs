use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};

use super::Dag;

/// Why a node belongs to a blanket. A node may hold several roles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Parent,
    Child,
    CoParent,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Parent => "parent",
            Role::Child => "child",
            Role::CoParent => "co-parent",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlanketReport {
    pub targets: BTreeSet<usize>,
    pub members: BTreeMap<usize, BTreeSet<Role>>,
    /// Members that are parameterizable. Filled in by callers that know the
    /// variable metadata (see `DiscreteBayesNet::blanket`).
    pub parameterizable: BTreeSet<usize>,
}

impl BlanketReport {
    pub fn blanket(&self) -> BTreeSet<usize> {
        self.members.keys().copied().collect()
    }

    pub fn blanket_vec(&self) -> Vec<usize> {
        self.members.keys().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains_key(&v)
    }

    pub fn roles(&self, v: usize) -> Option<&BTreeSet<Role>> {
        self.members.get(&v)
    }

    /// Member names in index order.
    pub fn member_names<'a>(&self, dag: &'a Dag) -> Vec<&'a str> {
        self.members.keys().map(|&v| dag.name(v)).collect()
    }
}

/// Parents, children and the children's other parents of `target`.
pub fn markov_blanket(dag: &Dag, target: usize) -> Result<BlanketReport> {
    if target >= dag.len() {
        return Err(Error::UnknownVariable(format!("#{target}")));
    }
    merged_blanket(dag, &[target])
}

/// Union of the blankets of every target, minus the targets themselves.
pub fn merged_blanket(dag: &Dag, targets: &[usize]) -> Result<BlanketReport> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    if let Some(&bad) = targets.iter().find(|&&t| t >= dag.len()) {
        return Err(Error::UnknownVariable(format!("#{bad}")));
    }
    let target_set: BTreeSet<usize> = targets.iter().copied().collect();
    let mut members: BTreeMap<usize, BTreeSet<Role>> = BTreeMap::new();
    let mut tag = |v: usize, role: Role| {
        if !target_set.contains(&v) {
            members.entry(v).or_default().insert(role);
        }
    };
    for &t in &target_set {
        for &p in dag.parents(t) {
            tag(p, Role::Parent);
        }
        for &c in dag.children(t) {
            tag(c, Role::Child);
            for &cp in dag.parents(c) {
                if cp != t {
                    tag(cp, Role::CoParent);
                }
            }
        }
    }
    Ok(BlanketReport {
        targets: target_set,
        members,
        parameterizable: BTreeSet::new(),
    })
}
