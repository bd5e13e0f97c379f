//! Directed acyclic graphs, d-separation and Markov blankets.

mod blanket;
mod dot;

pub use blanket::{markov_blanket, merged_blanket, BlanketReport, Role};
pub use dot::blanket_dot;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use crate::error::{Error, Result};

/// A DAG over named nodes. Node identity is the index into `nodes()`;
/// adjacency lists are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(names: Vec<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidGraph(format!("duplicate node `{n}`")));
            }
        }
        let n = names.len();
        Ok(Dag {
            names,
            parents: vec![Vec::new(); n],
            children: vec![Vec::new(); n],
        })
    }

    pub fn with_edges(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut dag = Dag::new(names)?;
        for &(u, v) in edges {
            dag.add_edge(u, v)?;
        }
        Ok(dag)
    }

    /// Convenience constructor from name pairs.
    pub fn from_named_edges(names: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let mut dag = Dag::new(names.iter().map(|s| s.to_string()).collect())?;
        for (u, v) in edges {
            let u = dag.require(u)?;
            let v = dag.require(v)?;
            dag.add_edge(u, v)?;
        }
        Ok(dag)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        crate::telemetry::find_name(self.names.iter().map(String::as_str), name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.children[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// Edges in lexicographic `(from, to)` index order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(u, cs)| cs.iter().map(move |&v| (u, v)))
            .collect()
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.len() {
            return Err(Error::UnknownVariable(format!("#{v}")));
        }
        Ok(())
    }

    /// `true` if a directed path `from ~> to` exists.
    pub fn has_path(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for &c in &self.children[u] {
                if c == to {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::SelfLoop(self.names[u].clone()));
        }
        if self.has_edge(u, v) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge {} -> {}",
                self.names[u], self.names[v]
            )));
        }
        if self.has_path(v, u) {
            return Err(Error::Cycle {
                from: self.names[u].clone(),
                to: self.names[v].clone(),
            });
        }
        insert_sorted(&mut self.children[u], v);
        insert_sorted(&mut self.parents[v], u);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        match self.children[u].binary_search(&v) {
            Ok(i) => {
                self.children[u].remove(i);
                let j = self.parents[v].binary_search(&u).expect("adjacency in sync");
                self.parents[v].remove(j);
                Ok(())
            }
            Err(_) => Err(Error::InvalidGraph(format!(
                "no edge {} -> {}",
                self.names[u], self.names[v]
            ))),
        }
    }

    /// Replaces `u -> v` with `v -> u`, leaving the graph untouched if that
    /// would close a cycle.
    pub fn reverse_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.remove_edge(u, v)?;
        if let Err(e) = self.add_edge(v, u) {
            self.add_edge(u, v).expect("restoring a removed edge");
            return Err(e);
        }
        Ok(())
    }

    /// Kahn's algorithm; among ready nodes the earliest declared goes first.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> = indegree
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(v, _)| Reverse(v))
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse(u)) = ready.pop() {
            order.push(u);
            for &c in &self.children[u] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        debug_assert_eq!(order.len(), self.len());
        order
    }

    /// Ancestors of `seeds`, seeds included.
    pub fn ancestors(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mark = vec![false; self.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            mark[s] = true;
        }
        while let Some(u) = stack.pop() {
            for &p in &self.parents[u] {
                if !mark[p] {
                    mark[p] = true;
                    stack.push(p);
                }
            }
        }
        mark
    }

    /// Whether every trail between `xs` and `ys` is blocked by `zs`.
    ///
    /// Reachable-set traversal over (node, direction) pairs: a trail may pass
    /// an unobserved node along a chain or fork, and a collider only if the
    /// collider or one of its descendants is observed.
    pub fn d_separated(&self, xs: &[usize], ys: &[usize], zs: &[usize]) -> Result<bool> {
        for &v in xs.iter().chain(ys).chain(zs) {
            self.check_node(v)?;
        }
        let n = self.len();
        let mut in_x = vec![false; n];
        let mut in_y = vec![false; n];
        let mut in_z = vec![false; n];
        for &x in xs {
            in_x[x] = true;
        }
        for &y in ys {
            if in_x[y] {
                return Err(Error::OverlappingSets(self.names[y].clone()));
            }
            in_y[y] = true;
        }
        for &z in zs {
            if in_x[z] || in_y[z] {
                return Err(Error::OverlappingSets(self.names[z].clone()));
            }
            in_z[z] = true;
        }
        let z_anc = self.ancestors(zs);

        // direction: 0 = arrived from a child (moving up), 1 = arrived from a parent
        const UP: usize = 0;
        const DOWN: usize = 1;
        let mut visited = vec![[false; 2]; n];
        let mut queue: VecDeque<(usize, usize)> = xs.iter().map(|&x| (x, UP)).collect();
        while let Some((v, dir)) = queue.pop_front() {
            if visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            if !in_z[v] && in_y[v] {
                return Ok(false);
            }
            if dir == UP {
                if !in_z[v] {
                    for &p in &self.parents[v] {
                        queue.push_back((p, UP));
                    }
                    for &c in &self.children[v] {
                        queue.push_back((c, DOWN));
                    }
                }
            } else {
                if !in_z[v] {
                    for &c in &self.children[v] {
                        queue.push_back((c, DOWN));
                    }
                }
                if z_anc[v] {
                    for &p in &self.parents[v] {
                        queue.push_back((p, UP));
                    }
                }
            }
        }
        Ok(true)
    }

    /// Name-based variant of [`Dag::d_separated`].
    pub fn d_separated_by_name(&self, xs: &[&str], ys: &[&str], zs: &[&str]) -> Result<bool> {
        let resolve = |set: &[&str]| -> Result<Vec<usize>> {
            set.iter().map(|n| self.require(n)).collect()
        };
        self.d_separated(&resolve(xs)?, &resolve(ys)?, &resolve(zs)?)
    }
}

fn insert_sorted(list: &mut Vec<usize>, v: usize) {
    if let Err(i) = list.binary_search(&v) {
        list.insert(i, v);
    }
}
