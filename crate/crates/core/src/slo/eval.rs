use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::BlanketReport;
use crate::infer::{BlanketModel, Evidence};
use crate::learn::DiscreteBayesNet;
use crate::telemetry::{find_name, DiscreteDataset, RawDataset, RawValue};

use super::event::{resolve_metrics, slo_event, SloEvent};
use super::spec::{SloKind, SloSpec};

/// Telemetry rows to judge SLOs on.
#[derive(Clone, Copy, Debug)]
pub enum Window<'a> {
    /// Raw values, judged exactly.
    Raw(&'a RawDataset),
    /// Discrete states, judged through each SLO's event.
    Discrete(&'a DiscreteDataset),
}

impl<'a> From<&'a RawDataset> for Window<'a> {
    fn from(raw: &'a RawDataset) -> Self {
        Window::Raw(raw)
    }
}

impl<'a> From<&'a DiscreteDataset> for Window<'a> {
    fn from(data: &'a DiscreteDataset) -> Self {
        Window::Discrete(data)
    }
}

impl Window<'_> {
    pub fn row_count(&self) -> usize {
        match self {
            Window::Raw(r) => r.row_count(),
            Window::Discrete(d) => d.row_count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SloOutcome {
    pub name: String,
    pub kind: &'static str,
    pub samples: usize,
    /// Fraction of rows fulfilling the SLO; absent for minimize.
    pub rate: Option<f64>,
    /// Mean of the metric, for bound, range and minimize SLOs.
    pub mean: Option<f64>,
    pub p_min: Option<f64>,
    pub violated: bool,
}

impl SloOutcome {
    /// Binomial standard error of the rate.
    pub fn standard_error(&self) -> Option<f64> {
        let r = self.rate?;
        Some((r * (1.0 - r) / self.samples as f64).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FulfillmentReport {
    pub rows: usize,
    pub outcomes: Vec<SloOutcome>,
}

impl FulfillmentReport {
    pub fn get(&self, slo: &str) -> Option<&SloOutcome> {
        self.outcomes.iter().find(|o| o.name == slo)
    }

    pub fn violated(&self) -> Vec<&str> {
        self.outcomes
            .iter()
            .filter(|o| o.violated)
            .map(|o| o.name.as_str())
            .collect()
    }

    pub fn any_violated(&self) -> bool {
        self.outcomes.iter().any(|o| o.violated)
    }
}

fn has_mean(slo: &SloSpec) -> bool {
    matches!(
        slo.kind,
        SloKind::Bound { .. } | SloKind::Range { .. } | SloKind::Minimize
    )
}

fn outcome(slo: &SloSpec, samples: usize, hits: usize, sum: f64) -> SloOutcome {
    let rate = (!slo.is_minimize()).then(|| hits as f64 / samples as f64);
    let violated = match (rate, slo.p_min) {
        (Some(r), Some(p)) => r < p,
        _ => false,
    };
    SloOutcome {
        name: slo.name.clone(),
        kind: slo.kind.as_str(),
        samples,
        rate,
        mean: has_mean(slo).then(|| sum / samples as f64),
        p_min: slo.p_min,
        violated,
    }
}

/// Per-SLO fulfillment rates over a window: the share of
/// rows meeting each SLO, and the metric's mean where it is meaningful.
pub fn empirical_fulfillment<'a>(window: impl Into<Window<'a>>, slos: &[SloSpec]) -> Result<FulfillmentReport> {
    let window = window.into();
    let rows = window.row_count();
    if rows == 0 {
        return Err(Error::EmptyInput);
    }
    let outcomes = slos
        .iter()
        .map(|slo| match window {
            Window::Raw(raw) => raw_outcome(raw, slo),
            Window::Discrete(data) => discrete_outcome(data, slo),
        })
        .collect::<Result<_>>()?;
    Ok(FulfillmentReport { rows, outcomes })
}

fn raw_outcome(raw: &RawDataset, slo: &SloSpec) -> Result<SloOutcome> {
    let names = raw.names();
    let cols: Vec<usize> = slo
        .metrics
        .iter()
        .map(|m| find_name(names.iter().copied(), m).ok_or_else(|| Error::UnknownVariable(m.clone())))
        .collect::<Result<_>>()?;
    let columns = raw.columns();
    let bad = |row: usize| Error::InvalidSlo {
        slo: slo.name.clone(),
        message: format!("row {} has a value of the wrong type", row + 1),
    };
    let (mut hits, mut sum) = (0usize, 0.0);
    let mut values: Vec<RawValue<'_>> = Vec::with_capacity(cols.len());
    for row in 0..raw.row_count() {
        values.clear();
        values.extend(cols.iter().map(|&c| columns[c].values.get(row)));
        if !slo.is_minimize() && slo.satisfied_by(&values).ok_or_else(|| bad(row))? {
            hits += 1;
        }
        if has_mean(slo) {
            sum += match values[0] {
                RawValue::Num(x) => x,
                RawValue::Bool(b) => b as u8 as f64,
                RawValue::Text(t) => t.trim().parse().map_err(|_| bad(row))?,
            };
        }
    }
    Ok(outcome(slo, raw.row_count(), hits, sum))
}

fn discrete_outcome(data: &DiscreteDataset, slo: &SloSpec) -> Result<SloOutcome> {
    let map = data.map();
    let metrics = resolve_metrics(slo, map)?;
    let cols: Vec<usize> = metrics
        .iter()
        .map(|&m| data.index_of(&map.columns[m].name))
        .collect::<Result<_>>()?;
    let event = (!slo.is_minimize()).then(|| slo_event(slo, map)).transpose()?;
    let reps: Vec<f64> = if has_mean(slo) {
        let enc = &map.columns[metrics[0]].encoding;
        (0..enc.cardinality())
            .map(|s| {
                enc.representative(s).ok_or_else(|| Error::InvalidSlo {
                    slo: slo.name.clone(),
                    message: format!("`{}` is not numeric", slo.metrics[0]),
                })
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let (mut hits, mut sum) = (0usize, 0.0);
    let mut states = vec![0; cols.len()];
    for row in 0..data.row_count() {
        for (s, &c) in states.iter_mut().zip(&cols) {
            *s = data.column(c)[row];
        }
        if event.as_ref().is_some_and(|e| e.contains(&states)) {
            hits += 1;
        }
        if !reps.is_empty() {
            sum += reps[states[0]];
        }
    }
    Ok(outcome(slo, data.row_count(), hits, sum))
}

/// An SLO compiled against a network: its event, the merged Markov blanket
/// of its metrics and the joint of blanket and metrics projected out once,
/// ready for repeated queries.
#[derive(Clone, Debug)]
pub struct SloModel {
    spec: SloSpec,
    metrics: Vec<usize>,
    event: Option<SloEvent>,
    blanket: BlanketReport,
    model: BlanketModel,
    reps: Vec<f64>,
}

impl SloModel {
    pub fn compile(bn: &DiscreteBayesNet, slo: &SloSpec) -> Result<Self> {
        slo.validate()?;
        let metrics = resolve_metrics(slo, bn.map())?;
        let event = (!slo.is_minimize()).then(|| slo_event(slo, bn.map())).transpose()?;
        let blanket = bn.blanket(&metrics)?;
        let mut scope = blanket.blanket();
        scope.extend(metrics.iter().copied());
        let model = BlanketModel::compile(bn, &metrics, &scope)?;
        let reps = if slo.is_minimize() {
            let enc = bn.encoding(metrics[0]);
            (0..enc.cardinality())
                .map(|s| {
                    enc.representative(s).ok_or_else(|| Error::InvalidSlo {
                        slo: slo.name.clone(),
                        message: format!("cannot minimize non-numeric `{}`", slo.metrics[0]),
                    })
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(SloModel {
            spec: slo.clone(),
            metrics,
            event,
            blanket,
            model,
            reps,
        })
    }

    pub fn spec(&self) -> &SloSpec {
        &self.spec
    }

    pub fn metrics(&self) -> &[usize] {
        &self.metrics
    }

    pub fn event(&self) -> Option<&SloEvent> {
        self.event.as_ref()
    }

    pub fn blanket(&self) -> &BlanketReport {
        &self.blanket
    }

    /// Variables whose evidence is used: the blanket and the metrics.
    pub fn scope(&self) -> &BTreeSet<usize> {
        self.model.scope()
    }

    /// The part of `evidence` inside the blanket or on the metrics.
    pub fn restrict(&self, evidence: &Evidence) -> Evidence {
        evidence
            .iter()
            .filter(|(v, _)| self.model.scope().contains(v))
            .map(|(&v, &s)| (v, s))
            .collect()
    }

    /// Probability that the SLO holds given the relevant part of
    /// `evidence`. Observed metrics are fixed at their states.
    pub fn probability(&self, evidence: &Evidence) -> Result<f64> {
        let event = self.event.as_ref().ok_or_else(|| Error::InvalidSlo {
            slo: self.spec.name.clone(),
            message: "minimize SLOs have no probability".into(),
        })?;
        let ev = self.restrict(evidence);
        let post = self.model.query(&ev)?;
        let mut states: Vec<usize> = self.metrics.iter().map(|m| ev.get(m).copied().unwrap_or(0)).collect();
        let free: Vec<usize> = (0..self.metrics.len())
            .filter(|&i| !ev.contains_key(&self.metrics[i]))
            .collect();
        let mut p = 0.0;
        let mut cell = vec![0usize; free.len()];
        for &x in post.values() {
            for (&i, &s) in free.iter().zip(&cell) {
                states[i] = s;
            }
            if event.contains(&states) {
                p += x;
            }
            for d in (0..cell.len()).rev() {
                cell[d] += 1;
                if cell[d] < post.cards()[d] {
                    break;
                }
                cell[d] = 0;
            }
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// Expected value of a minimize SLO's metric, using each state's
    /// representative value.
    pub fn expected(&self, evidence: &Evidence) -> Result<f64> {
        if !self.spec.is_minimize() {
            return Err(Error::InvalidSlo {
                slo: self.spec.name.clone(),
                message: "only minimize SLOs have an objective".into(),
            });
        }
        let ev = self.restrict(evidence);
        if let Some(&s) = ev.get(&self.metrics[0]) {
            return Ok(self.reps[s]);
        }
        let post = self.model.query(&ev)?;
        Ok(post.values().iter().zip(&self.reps).map(|(p, r)| p * r).sum())
    }
}

/// `P(slo holds | evidence ∩ (blanket ∪ metrics))` via a blanket-scoped
/// query.
pub fn slo_probability(bn: &DiscreteBayesNet, slo: &SloSpec, evidence: &Evidence) -> Result<f64> {
    if slo.is_minimize() {
        return Err(Error::InvalidSlo {
            slo: slo.name.clone(),
            message: "minimize SLOs have no probability".into(),
        });
    }
    SloModel::compile(bn, slo)?.probability(evidence)
}

/// Posterior mean of a minimize SLO's metric under blanket-scoped evidence.
pub fn expected_objective(bn: &DiscreteBayesNet, slo: &SloSpec, evidence: &Evidence) -> Result<f64> {
    SloModel::compile(bn, slo)?.expected(evidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;
    use crate::learn::Cpt;
    use crate::slo::parse_slos;
    use crate::telemetry::{
        ColumnEncoding, ColumnMap, ColumnValues, DiscretizationMap, RawColumn, VariableKind,
        VariableMeta,
    };
    use approx::assert_abs_diff_eq;

    /// config -> consumption <- gpu, consumption binned at 5 and 7 W
    fn net() -> DiscreteBayesNet {
        let encs = [
            ("config", ColumnEncoding::Nominal { labels: vec!["2C".into(), "4C".into()] }),
            ("gpu", ColumnEncoding::Boolean),
            (
                "consumption",
                ColumnEncoding::Binned { cuts: vec![5.0, 7.0], min: 3.0, max: 11.0 },
            ),
        ];
        let metas = encs
            .iter()
            .map(|(n, e)| {
                let kind = if e.is_numeric() { VariableKind::OrdinalNumeric } else { VariableKind::Nominal };
                VariableMeta::new(*n, kind, if e.is_numeric() { "W" } else { "" }, *n == "config", e.labels())
                    .unwrap()
            })
            .collect();
        let map = DiscretizationMap {
            columns: encs
                .iter()
                .map(|(n, e)| ColumnMap { name: n.to_string(), encoding: e.clone() })
                .collect(),
        };
        let dag = Dag::from_named_edges(
            &["config", "gpu", "consumption"],
            &[("config", "consumption"), ("gpu", "consumption")],
        )
        .unwrap();
        let cpts = vec![
            Cpt::new(0, vec![], vec![], 2, vec![0.4, 0.6], 0.0).unwrap(),
            Cpt::new(1, vec![], vec![], 2, vec![0.7, 0.3], 0.0).unwrap(),
            Cpt::new(
                2,
                vec![0, 1],
                vec![2, 2],
                3,
                vec![0.6, 0.3, 0.1, 0.5, 0.3, 0.2, 0.2, 0.5, 0.3, 0.1, 0.4, 0.5],
                0.0,
            )
            .unwrap(),
        ];
        DiscreteBayesNet::new(metas, map, dag, cpts).unwrap()
    }

    fn one(text: &str) -> SloSpec {
        parse_slos(text).unwrap().remove(0)
    }

    #[test]
    fn bound_probability_by_hand() {
        let bn = net();
        let slo = one("[e]\nkind = bound\nmetric = consumption\nop = <=\nvalue = 7\n");
        // bins (-inf,5] and (5,7] satisfy
        let p = slo_probability(&bn, &slo, &Evidence::from([(0, 1)])).unwrap();
        let want = 0.7 * (0.2 + 0.5) + 0.3 * (0.1 + 0.4);
        assert_abs_diff_eq!(p, want, epsilon = 1e-12);
        let p_all = slo_probability(&bn, &slo, &Evidence::new()).unwrap();
        let want_all = 0.4 * (0.7 * 0.9 + 0.3 * 0.8) + 0.6 * want;
        assert_abs_diff_eq!(p_all, want_all, epsilon = 1e-12);
    }

    #[test]
    fn tautology_has_probability_one() {
        let bn = net();
        let slo = one("[g]\nkind = bound\nmetric = gpu\nop = <=\nvalue = 1\n");
        let m = SloModel::compile(&bn, &slo).unwrap();
        assert_eq!(m.event().unwrap().count(), 2);
        for ev in [Evidence::new(), Evidence::from([(0, 0), (2, 2)])] {
            assert_abs_diff_eq!(m.probability(&ev).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn expected_objective_uses_representatives() {
        let bn = net();
        let slo = one("[e]\nkind = minimize\nmetric = consumption\n");
        // representatives: 5 (inner edge), 6 (midpoint), 7 (inner edge)
        let e = expected_objective(&bn, &slo, &Evidence::from([(0, 0), (1, 0)])).unwrap();
        assert_abs_diff_eq!(e, 0.6 * 5.0 + 0.3 * 6.0 + 0.1 * 7.0, epsilon = 1e-12);
        let point = expected_objective(&bn, &slo, &Evidence::from([(2, 1)])).unwrap();
        assert_abs_diff_eq!(point, 6.0, epsilon = 0.0);
    }

    #[test]
    fn evidence_outside_the_blanket_is_dropped() {
        let bn = net();
        let slo = one("[e]\nkind = bound\nmetric = consumption\nop = <=\nvalue = 7\n");
        let m = SloModel::compile(&bn, &slo).unwrap();
        assert_eq!(m.scope(), &BTreeSet::from([0, 1, 2]));
        assert!(m.blanket().contains(0) && m.blanket().contains(1));
    }

    fn window(delay: &[f64], fps: &[f64]) -> RawDataset {
        let col = |name: &str, values: &[f64]| RawColumn {
            name: name.into(),
            kind: VariableKind::OrdinalNumeric,
            unit: String::new(),
            parameterizable: false,
            values: ColumnValues::Numeric(values.to_vec()),
        };
        RawDataset::new(vec![col("delay", delay), col("fps", fps)]).unwrap()
    }

    #[test]
    fn counts_rows_within_time() {
        let mut delay = vec![30.0; 9];
        delay.push(40.0);
        let raw = window(&delay, &[30.0; 10]);
        let slos = parse_slos(
            "[w]\nkind = composite\nformula = within_time\nmetrics = delay, fps\np_min = 0.95\n\
             [d]\nkind = bound\nmetric = delay\nop = <=\nvalue = 100\n",
        )
        .unwrap();
        let r = empirical_fulfillment(&raw, &slos).unwrap();
        assert_eq!(r.rows, 10);
        let w = r.get("w").unwrap();
        assert_abs_diff_eq!(w.rate.unwrap(), 0.9, epsilon = 1e-15);
        assert!(w.violated);
        let d = r.get("d").unwrap();
        assert_eq!(d.rate, Some(1.0));
        assert_abs_diff_eq!(d.mean.unwrap(), 31.0, epsilon = 1e-12);
        assert_eq!(r.violated(), vec!["w"]);
    }

    #[test]
    fn empty_window_is_an_error() {
        let raw = window(&[], &[]);
        assert!(matches!(empirical_fulfillment(&raw, &[]), Err(Error::EmptyInput)));
    }
}
