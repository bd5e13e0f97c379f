use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::infer::Evidence;
use crate::learn::DiscreteBayesNet;
use crate::slo::{SloModel, SloSpec};
use crate::telemetry::VariableMeta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Inferred,
    Naive,
    Random,
    Manual,
}

/// An assignment to parameterizable variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviceConfig {
    pub assignment: Evidence,
    pub provenance: Provenance,
}

impl DeviceConfig {
    pub fn new(assignment: Evidence, provenance: Provenance) -> Self {
        DeviceConfig {
            assignment,
            provenance,
        }
    }

    /// `name=label` pairs in variable order.
    pub fn pairs<'a>(&self, metas: &'a [VariableMeta]) -> Vec<(&'a str, &'a str)> {
        self.assignment
            .iter()
            .map(|(&v, &s)| (metas[v].name.as_str(), metas[v].states[s].as_str()))
            .collect()
    }

    pub fn label(&self, metas: &[VariableMeta]) -> String {
        self.pairs(metas)
            .iter()
            .map(|(n, s)| format!("{n}={s}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Every assignment to the parameterizable variables of `metas`, with
/// constrained parameters pinned. The first variable varies slowest.
pub fn parameter_space(metas: &[VariableMeta], constraints: &Evidence) -> Vec<DeviceConfig> {
    let params: Vec<usize> = (0..metas.len()).filter(|&v| metas[v].parameterizable).collect();
    let mut configs = vec![Evidence::new()];
    for &p in &params {
        let states: Vec<usize> = match constraints.get(&p) {
            Some(&s) => vec![s],
            None => (0..metas[p].cardinality()).collect(),
        };
        configs = configs
            .into_iter()
            .flat_map(|c| {
                states.iter().map(move |&s| {
                    let mut c = c.clone();
                    c.insert(p, s);
                    c
                })
            })
            .collect();
    }
    configs
        .into_iter()
        .map(|a| DeviceConfig::new(a, Provenance::Inferred))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SloScore {
    pub name: String,
    /// Fulfillment probability; absent for minimize SLOs and when the
    /// evidence is impossible under the model.
    pub probability: Option<f64>,
    /// Expected metric value of a minimize SLO.
    pub expected: Option<f64>,
    pub p_min: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigScore {
    pub config: DeviceConfig,
    pub slos: Vec<SloScore>,
    pub feasible: bool,
    /// Sum of the minimize SLOs' expected values (0 without any).
    pub objective: f64,
    /// Smallest probability over the limit SLOs (1 without any).
    pub min_probability: f64,
    pub queries: usize,
    /// Set when the configuration is impossible under the model.
    pub diagnostic: Option<String>,
}

/// SLOs compiled once against a network, for scoring many configurations.
#[derive(Clone, Debug)]
pub struct Scorer {
    models: Vec<SloModel>,
}

impl Scorer {
    pub fn new(bn: &DiscreteBayesNet, slos: &[SloSpec]) -> Result<Self> {
        let models = slos
            .iter()
            .map(|s| SloModel::compile(bn, s))
            .collect::<Result<_>>()?;
        Ok(Scorer { models })
    }

    pub fn models(&self) -> &[SloModel] {
        &self.models
    }

    /// One query per SLO, each seeing only the part of `config ∪
    /// constraints` inside its blanket.
    pub fn score(&self, config: &DeviceConfig, constraints: &Evidence) -> ConfigScore {
        let mut evidence = constraints.clone();
        evidence.extend(config.assignment.iter().map(|(&v, &s)| (v, s)));
        let mut slos = Vec::with_capacity(self.models.len());
        let mut diagnostic = None;
        let mut feasible = true;
        let mut objective = 0.0;
        let mut min_probability: f64 = 1.0;
        for m in &self.models {
            let spec = m.spec();
            let mut entry = SloScore {
                name: spec.name.clone(),
                probability: None,
                expected: None,
                p_min: spec.p_min,
            };
            let result = if spec.is_minimize() {
                m.expected(&evidence).map(|e| entry.expected = Some(e))
            } else {
                m.probability(&evidence).map(|p| entry.probability = Some(p))
            };
            match result {
                Ok(()) => {}
                Err(Error::InconsistentEvidence) => {
                    diagnostic.get_or_insert_with(|| {
                        format!("evidence impossible under the model for `{}`", spec.name)
                    });
                }
                Err(e) => {
                    diagnostic.get_or_insert_with(|| format!("`{}`: {e}", spec.name));
                }
            }
            match (entry.probability, entry.expected, spec.p_min) {
                (Some(p), _, Some(p_min)) => {
                    min_probability = min_probability.min(p);
                    feasible &= p >= p_min;
                }
                (_, Some(e), _) => objective += e,
                _ => {
                    feasible = false;
                    min_probability = 0.0;
                }
            }
            slos.push(entry);
        }
        ConfigScore {
            config: config.clone(),
            slos,
            feasible: feasible && diagnostic.is_none(),
            objective,
            min_probability,
            queries: self.models.len(),
            diagnostic,
        }
    }
}

/// Scores a single configuration; see [`Scorer`] for repeated use.
pub fn score_config(
    bn: &DiscreteBayesNet,
    slos: &[SloSpec],
    config: &DeviceConfig,
    constraints: &Evidence,
) -> Result<ConfigScore> {
    Ok(Scorer::new(bn, slos)?.score(config, constraints))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ranking {
    pub scores: Vec<ConfigScore>,
    pub none_feasible: bool,
    pub queries: usize,
}

impl Ranking {
    pub fn best(&self) -> &ConfigScore {
        &self.scores[0]
    }
}

/// Scores closer than this compare equal, so that summation noise does not
/// decide between configurations.
pub const RANK_RESOLUTION: f64 = 1e-12;

fn quantized(x: f64) -> f64 {
    (x / RANK_RESOLUTION).round()
}

fn rank_order(a: &(usize, ConfigScore), b: &(usize, ConfigScore)) -> Ordering {
    let (ia, a) = a;
    let (ib, b) = b;
    b.feasible.cmp(&a.feasible).then_with(|| {
        let by_objective = quantized(a.objective).total_cmp(&quantized(b.objective));
        let by_min = quantized(b.min_probability).total_cmp(&quantized(a.min_probability));
        if a.feasible {
            by_objective.then(by_min)
        } else {
            by_min.then(by_objective)
        }
        .then(ia.cmp(ib))
    })
}

/// Scores the whole parameter space and ranks it: feasible configurations
/// first by expected objective, then by their weakest SLO probability, then
/// by enumeration order; infeasible ones after, weakest probability first.
pub fn infer_best_config(
    bn: &DiscreteBayesNet,
    slos: &[SloSpec],
    constraints: &Evidence,
) -> Result<Ranking> {
    if slos.is_empty() {
        return Err(Error::InvalidQuery("no SLOs to fulfil".into()));
    }
    let scorer = Scorer::new(bn, slos)?;
    let mut scored: Vec<(usize, ConfigScore)> = parameter_space(bn.metas(), constraints)
        .iter()
        .map(|c| scorer.score(c, constraints))
        .enumerate()
        .collect();
    scored.sort_by(rank_order);
    let scores: Vec<ConfigScore> = scored.into_iter().map(|(_, s)| s).collect();
    Ok(Ranking {
        none_feasible: !scores.iter().any(|s| s.feasible),
        queries: scores.iter().map(|s| s.queries).sum(),
        scores,
    })
}
