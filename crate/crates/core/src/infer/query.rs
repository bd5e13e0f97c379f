use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::learn::DiscreteBayesNet;

use super::elimination::{eliminate, elimination_order, product_all, EliminationPlan, Heuristic};
use super::factor::{factor_from_cpt, reduce, Factor};

/// Observed states keyed by variable index.
pub type Evidence = BTreeMap<usize, usize>;

fn check_targets(bn: &DiscreteBayesNet, targets: &[usize]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::InvalidQuery("no target variables".into()));
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= bn.len() {
            return Err(Error::UnknownVariable(format!("#{t}")));
        }
        if targets[..i].contains(&t) {
            return Err(Error::InvalidQuery(format!("target `{}` repeated", bn.name(t))));
        }
    }
    Ok(())
}

fn check_evidence(bn: &DiscreteBayesNet, evidence: &Evidence) -> Result<()> {
    for (&v, &s) in evidence {
        if v >= bn.len() {
            return Err(Error::UnknownVariable(format!("#{v}")));
        }
        if s >= bn.cardinality(v) {
            return Err(Error::StateOutOfRange {
                variable: bn.name(v).to_string(),
                index: s,
                cardinality: bn.cardinality(v),
            });
        }
    }
    Ok(())
}

fn reduced_factors(bn: &DiscreteBayesNet, vars: &[usize], evidence: &Evidence) -> Result<Vec<Factor>> {
    let ev: Vec<(usize, usize)> = evidence.iter().map(|(&v, &s)| (v, s)).collect();
    vars.iter()
        .map(|&v| reduce(&factor_from_cpt(bn.cpt(v)), &ev))
        .collect()
}

/// Variables whose CPTs can influence a query over `seeds`: their
/// ancestors. Everything else is barren and sums to one.
fn relevant(bn: &DiscreteBayesNet, seeds: &[usize]) -> Vec<usize> {
    let anc = bn.dag().ancestors(seeds);
    (0..bn.len()).filter(|&v| anc[v]).collect()
}

fn finish(factors: &[Factor], targets: &[usize]) -> Result<Factor> {
    product_all(factors)?.normalized()?.permuted(targets)
}

/// `P(targets | evidence)` by variable elimination, with the axes in the
/// requested target order.
///
/// With `scope_limit`, only the CPTs of the limit's relevant variables
/// enter the computation: the limit must contain the targets and the rest
/// of it must d-separate them from every variable outside.
pub fn query(
    bn: &DiscreteBayesNet,
    targets: &[usize],
    evidence: &Evidence,
    scope_limit: Option<&BTreeSet<usize>>,
) -> Result<Factor> {
    check_targets(bn, targets)?;
    check_evidence(bn, evidence)?;
    if let Some(&t) = targets.iter().find(|t| evidence.contains_key(t)) {
        return Err(Error::InvalidQuery(format!(
            "`{}` is both a target and observed",
            bn.name(t)
        )));
    }
    match scope_limit {
        Some(scope) => BlanketModel::compile(bn, targets, scope)?.query(evidence),
        None => {
            let seeds: Vec<usize> = targets.iter().chain(evidence.keys()).copied().collect();
            let vars = relevant(bn, &seeds);
            let factors = reduced_factors(bn, &vars, evidence)?;
            let keep: BTreeSet<usize> = targets.iter().copied().collect();
            let plan = elimination_order(&factors, &keep, bn.names());
            finish(&eliminate(factors, &plan.ordering)?, targets)
        }
    }
}

/// Full-network query along a caller-chosen elimination ordering, which
/// must list every unobserved non-target variable exactly once.
pub fn query_with_order(
    bn: &DiscreteBayesNet,
    targets: &[usize],
    evidence: &Evidence,
    ordering: &[usize],
) -> Result<(Factor, EliminationPlan)> {
    check_targets(bn, targets)?;
    check_evidence(bn, evidence)?;
    let mut expected: BTreeSet<usize> = (0..bn.len())
        .filter(|v| !targets.contains(v) && !evidence.contains_key(v))
        .collect();
    for &v in ordering {
        if !expected.remove(&v) {
            return Err(Error::InvalidQuery(format!("ordering lists `#{v}` wrongly")));
        }
    }
    if !expected.is_empty() {
        return Err(Error::InvalidQuery("ordering misses variables".into()));
    }
    let all: Vec<usize> = (0..bn.len()).collect();
    let factors = reduced_factors(bn, &all, evidence)?;
    let width = super::elimination::plan_width(&factors, ordering)?;
    let result = finish(&eliminate(factors, ordering)?, targets)?;
    Ok((
        result,
        EliminationPlan {
            ordering: ordering.to_vec(),
            width,
            heuristic: Heuristic::Given,
        },
    ))
}

/// The joint of a variable set `S ∪ T` projected out of the network once,
/// so that repeated queries for `T` under evidence inside `S ∪ T` only
/// touch factors over those variables.
#[derive(Clone, Debug)]
pub struct BlanketModel {
    targets: Vec<usize>,
    scope: BTreeSet<usize>,
    factors: Vec<Factor>,
    names: Vec<String>,
    cards: Vec<usize>,
}

impl BlanketModel {
    /// `scope` must contain the targets and its other members must shield
    /// them from the rest of the network.
    pub fn compile(bn: &DiscreteBayesNet, targets: &[usize], scope: &BTreeSet<usize>) -> Result<Self> {
        check_targets(bn, targets)?;
        if let Some(&v) = scope.iter().find(|&&v| v >= bn.len()) {
            return Err(Error::UnknownVariable(format!("#{v}")));
        }
        if let Some(&t) = targets.iter().find(|t| !scope.contains(t)) {
            return Err(Error::InvalidQuery(format!(
                "scope does not contain target `{}`",
                bn.name(t)
            )));
        }
        let shield: Vec<usize> = scope.iter().copied().filter(|v| !targets.contains(v)).collect();
        let outside: Vec<usize> = (0..bn.len()).filter(|v| !scope.contains(v)).collect();
        if !outside.is_empty() && !bn.dag().d_separated(targets, &outside, &shield)? {
            let names: Vec<&str> = targets.iter().map(|&t| bn.name(t)).collect();
            return Err(Error::ScopeNotShielding(names.join(",")));
        }
        let seeds: Vec<usize> = scope.iter().copied().collect();
        let vars = relevant(bn, &seeds);
        let factors = reduced_factors(bn, &vars, &Evidence::new())?;
        let plan = elimination_order(&factors, scope, bn.names());
        let factors = eliminate(factors, &plan.ordering)?;
        Ok(BlanketModel {
            targets: targets.to_vec(),
            scope: scope.clone(),
            factors,
            names: bn.names().to_vec(),
            cards: bn.cardinalities(),
        })
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn scope(&self) -> &BTreeSet<usize> {
        &self.scope
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Posterior over the targets not named in `evidence`, in target order.
    /// Evidence must lie inside the scope.
    pub fn query(&self, evidence: &Evidence) -> Result<Factor> {
        for (&v, &s) in evidence {
            if !self.scope.contains(&v) {
                let name = self.names.get(v).cloned().unwrap_or_else(|| format!("#{v}"));
                return Err(Error::NotInScope(name));
            }
            if s >= self.cards[v] {
                return Err(Error::StateOutOfRange {
                    variable: self.names[v].clone(),
                    index: s,
                    cardinality: self.cards[v],
                });
            }
        }
        let ev: Vec<(usize, usize)> = evidence.iter().map(|(&v, &s)| (v, s)).collect();
        let factors: Vec<Factor> = self
            .factors
            .iter()
            .map(|f| reduce(f, &ev))
            .collect::<Result<_>>()?;
        let free: Vec<usize> = self
            .targets
            .iter()
            .copied()
            .filter(|t| !evidence.contains_key(t))
            .collect();
        let keep: BTreeSet<usize> = free.iter().copied().collect();
        let plan = elimination_order(&factors, &keep, &self.names);
        let mut out = eliminate(factors, &plan.ordering)?;
        // free targets absent from every factor are uniform
        for &t in &free {
            if !out.iter().any(|f| f.contains(t)) {
                out.push(Factor::ones(vec![t], vec![self.cards[t]]));
            }
        }
        finish(&out, &free)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;
    use crate::learn::Cpt;
    use crate::telemetry::{ColumnEncoding, ColumnMap, DiscretizationMap, VariableKind, VariableMeta};
    use approx::assert_abs_diff_eq;

    /// config -> consumption <- gpu
    fn net() -> DiscreteBayesNet {
        let meta = |n: &str, k: usize| {
            VariableMeta::new(n, VariableKind::Nominal, "", false, (0..k).map(|s| format!("s{s}")).collect())
                .unwrap()
        };
        let metas = vec![meta("config", 3), meta("gpu", 2), meta("consumption", 2)];
        let map = DiscretizationMap {
            columns: metas
                .iter()
                .map(|m| ColumnMap {
                    name: m.name.clone(),
                    encoding: ColumnEncoding::Nominal {
                        labels: m.states.clone(),
                    },
                })
                .collect(),
        };
        let dag = Dag::from_named_edges(
            &["config", "gpu", "consumption"],
            &[("config", "consumption"), ("gpu", "consumption")],
        )
        .unwrap();
        let cpts = vec![
            Cpt::new(0, vec![], vec![], 3, vec![0.2, 0.3, 0.5], 0.0).unwrap(),
            Cpt::new(1, vec![], vec![], 2, vec![0.6, 0.4], 0.0).unwrap(),
            Cpt::new(
                2,
                vec![0, 1],
                vec![3, 2],
                2,
                vec![0.9, 0.1, 0.7, 0.3, 0.6, 0.4, 0.5, 0.5, 0.2, 0.8, 0.1, 0.9],
                0.0,
            )
            .unwrap(),
        ];
        DiscreteBayesNet::new(metas, map, dag, cpts).unwrap()
    }

    #[test]
    fn root_query_is_its_prior() {
        let bn = net();
        let q = query(&bn, &[0], &Evidence::new(), None).unwrap();
        assert_eq!(q.values(), &[0.2, 0.3, 0.5]);
    }

    #[test]
    fn posterior_by_hand() {
        let bn = net();
        // P(config | consumption = 1) ∝ P(config) * sum_g P(g) P(c=1 | config, g)
        let q = query(&bn, &[0], &Evidence::from([(2, 1)]), None).unwrap();
        let w = [
            0.2 * (0.6 * 0.1 + 0.4 * 0.3),
            0.3 * (0.6 * 0.4 + 0.4 * 0.5),
            0.5 * (0.6 * 0.8 + 0.4 * 0.9),
        ];
        let z: f64 = w.iter().sum();
        for (x, e) in q.values().iter().zip(w) {
            assert_abs_diff_eq!(*x, e / z, epsilon = 1e-12);
        }
    }

    #[test]
    fn target_order_is_respected() {
        let bn = net();
        let a = query(&bn, &[0, 2], &Evidence::new(), None).unwrap();
        let b = query(&bn, &[2, 0], &Evidence::new(), None).unwrap();
        assert_eq!(b.scope(), &[2, 0]);
        for c in 0..3 {
            for k in 0..2 {
                assert_abs_diff_eq!(a.get(&[c, k]), b.get(&[k, c]), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn blanket_scope_matches_full_query() {
        let bn = net();
        let scope = BTreeSet::from([0, 1, 2]);
        let ev = Evidence::from([(0, 2)]);
        let full = query(&bn, &[2], &ev, None).unwrap();
        let scoped = query(&bn, &[2], &ev, Some(&scope)).unwrap();
        for (x, y) in full.values().iter().zip(scoped.values()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_shielding_scope_is_rejected() {
        let bn = net();
        let scope = BTreeSet::from([0, 2]);
        assert!(matches!(
            query(&bn, &[2], &Evidence::new(), Some(&scope)),
            Err(Error::ScopeNotShielding(_))
        ));
    }

    #[test]
    fn impossible_evidence_is_an_error() {
        let mut bn = net();
        let mut cpts = bn.cpts().to_vec();
        cpts[1] = Cpt::new(1, vec![], vec![], 2, vec![1.0, 0.0], 0.0).unwrap();
        bn = DiscreteBayesNet::new(bn.metas().to_vec(), bn.map().clone(), bn.dag().clone(), cpts).unwrap();
        assert!(matches!(
            query(&bn, &[2], &Evidence::from([(1, 1)]), None),
            Err(Error::InconsistentEvidence)
        ));
    }

    #[test]
    fn rejects_malformed_queries() {
        let bn = net();
        assert!(query(&bn, &[], &Evidence::new(), None).is_err());
        assert!(query(&bn, &[2], &Evidence::from([(2, 0)]), None).is_err());
        assert!(matches!(
            query(&bn, &[2], &Evidence::from([(0, 5)]), None),
            Err(Error::StateOutOfRange { .. })
        ));
    }

    #[test]
    fn orderings_agree() {
        let bn = net();
        let (a, _) = query_with_order(&bn, &[2], &Evidence::new(), &[0, 1]).unwrap();
        let (b, plan) = query_with_order(&bn, &[2], &Evidence::new(), &[1, 0]).unwrap();
        assert_eq!(plan.heuristic, Heuristic::Given);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
        assert!(query_with_order(&bn, &[2], &Evidence::new(), &[0]).is_err());
    }

    #[test]
    fn model_answers_with_clamped_targets() {
        let bn = net();
        let model = BlanketModel::compile(&bn, &[0, 2], &BTreeSet::from([0, 1, 2])).unwrap();
        let q = model.query(&Evidence::from([(0, 1), (1, 0)])).unwrap();
        assert_eq!(q.scope(), &[2]);
        assert_abs_diff_eq!(q.get(&[1]), 0.4, epsilon = 1e-12);
        let scalar = model.query(&Evidence::from([(0, 1), (2, 0)])).unwrap();
        assert_eq!(scalar.values(), &[1.0]);
    }
}
