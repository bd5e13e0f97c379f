use serde::Serialize;

use crate::error::Result;
use crate::graph::Role;
use crate::infer::Evidence;
use crate::learn::DiscreteBayesNet;
use crate::slo::{empirical_fulfillment, resolve_metrics, FulfillmentReport, SloSpec, Window};
use crate::telemetry::find_name;

use super::score::{infer_best_config, ConfigScore, DeviceConfig, Ranking};

/// A blanket variable of a violated SLO and what the window shows for it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlanketObservation {
    pub variable: String,
    pub roles: Vec<Role>,
    pub parameterizable: bool,
    /// Most frequent state in the window, if the window has the column.
    pub observed: Option<String>,
    /// Share of rows in that state.
    pub share: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Explanation {
    pub slo: String,
    pub rate: Option<f64>,
    pub p_min: Option<f64>,
    /// The SLO's own metrics, with no roles.
    pub metrics: Vec<BlanketObservation>,
    pub blanket: Vec<BlanketObservation>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Adaptation {
    Keep {
        report: FulfillmentReport,
    },
    Switch {
        from: DeviceConfig,
        to: Box<ConfigScore>,
        report: FulfillmentReport,
        explanations: Vec<Explanation>,
        ranking: Ranking,
    },
}

impl Adaptation {
    pub fn is_keep(&self) -> bool {
        matches!(self, Adaptation::Keep { .. })
    }

    pub fn report(&self) -> &FulfillmentReport {
        match self {
            Adaptation::Keep { report } | Adaptation::Switch { report, .. } => report,
        }
    }
}

/// Mode of variable `v` over the window, as (state, share). Raw values
/// are mapped through the network's discretization.
fn mode(bn: &DiscreteBayesNet, window: Window<'_>, v: usize) -> Option<(usize, f64)> {
    let card = bn.cardinality(v);
    let mut counts = vec![0usize; card];
    let rows = window.row_count();
    match window {
        Window::Raw(raw) => {
            let names = raw.names();
            let col = &raw.columns()[find_name(names.iter().copied(), bn.name(v))?];
            let enc = bn.encoding(v);
            for r in 0..rows {
                if let Some(s) = enc.state_of(col.values.get(r)) {
                    counts[s] += 1;
                }
            }
        }
        Window::Discrete(data) => {
            let c = data.index_of(bn.name(v)).ok()?;
            for &s in data.column(c) {
                if s < card {
                    counts[s] += 1;
                }
            }
        }
    }
    let (state, &n) = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
    (n > 0).then(|| (state, n as f64 / rows as f64))
}

/// Checks the window against the SLOs; on any violation, proposes the
/// best-ranked configuration with an explanation per violated SLO.
pub fn adapt<'a>(
    bn: &DiscreteBayesNet,
    slos: &[SloSpec],
    window: impl Into<Window<'a>>,
    current: &DeviceConfig,
    constraints: &Evidence,
) -> Result<Adaptation> {
    let window = window.into();
    let report = empirical_fulfillment(window, slos)?;
    if !report.any_violated() {
        return Ok(Adaptation::Keep { report });
    }
    let ranking = infer_best_config(bn, slos, constraints)?;
    let mut explanations = Vec::new();
    for outcome in report.outcomes.iter().filter(|o| o.violated) {
        let spec = slos
            .iter()
            .find(|s| s.name == outcome.name)
            .expect("report follows the SLO list");
        let metrics = resolve_metrics(spec, bn.map())?;
        let blanket = bn.blanket(&metrics)?;
        let observe = |v: usize, roles: Vec<Role>| {
            let seen = mode(bn, window, v);
            BlanketObservation {
                variable: bn.name(v).to_string(),
                roles,
                parameterizable: bn.meta(v).parameterizable,
                observed: seen.map(|(s, _)| bn.meta(v).states[s].clone()),
                share: seen.map(|(_, f)| f),
            }
        };
        let observations = blanket
            .members
            .iter()
            .map(|(&v, roles)| observe(v, roles.iter().copied().collect()))
            .collect();
        explanations.push(Explanation {
            slo: outcome.name.clone(),
            rate: outcome.rate,
            p_min: outcome.p_min,
            metrics: metrics.iter().map(|&v| observe(v, Vec::new())).collect(),
            blanket: observations,
        });
    }
    Ok(Adaptation::Switch {
        from: current.clone(),
        to: Box::new(ranking.best().clone()),
        report,
        explanations,
        ranking,
    })
}
