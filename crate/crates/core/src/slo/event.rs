use crate::error::{Error, Result};
use crate::telemetry::{find_name, parse_bool, ColumnEncoding, DiscretizationMap};

use super::spec::{BoundOp, Formula, SloKind, SloSpec};

/// The joint discrete states of an SLO's metrics that fulfil it, as a
/// dense mask in row-major order over `metrics`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SloEvent {
    pub slo: String,
    /// Column indices into the map, in metric order.
    pub metrics: Vec<usize>,
    pub cards: Vec<usize>,
    pub satisfying: Vec<bool>,
}

impl SloEvent {
    pub fn contains(&self, states: &[usize]) -> bool {
        let off = states
            .iter()
            .zip(&self.cards)
            .fold(0, |off, (&s, &k)| off * k + s);
        self.satisfying[off]
    }

    pub fn count(&self) -> usize {
        self.satisfying.iter().filter(|&&b| b).count()
    }

    /// Satisfying joint states in row-major order.
    pub fn states(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for (off, _) in self.satisfying.iter().enumerate().filter(|(_, &b)| b) {
            let mut states = vec![0; self.cards.len()];
            let mut rest = off;
            for d in (0..self.cards.len()).rev() {
                states[d] = rest % self.cards[d];
                rest /= self.cards[d];
            }
            out.push(states);
        }
        out
    }
}

pub(crate) fn resolve_metrics(slo: &SloSpec, map: &DiscretizationMap) -> Result<Vec<usize>> {
    slo.metrics
        .iter()
        .map(|m| {
            find_name(map.columns.iter().map(|c| c.name.as_str()), m)
                .ok_or_else(|| Error::UnknownVariable(m.clone()))
        })
        .collect()
}

fn truth(enc: &ColumnEncoding, state: usize) -> Option<bool> {
    match enc {
        ColumnEncoding::Boolean => Some(state == 1),
        ColumnEncoding::Nominal { labels } => parse_bool(&labels[state]),
        ColumnEncoding::Levels { values } => Some(values[state] == 1.0),
        ColumnEncoding::Binned { .. } => None,
    }
}

/// Interval of a numeric state; booleans count as the points 0 and 1.
fn span(enc: &ColumnEncoding, state: usize) -> Option<(f64, f64)> {
    match enc {
        ColumnEncoding::Boolean => Some((state as f64, state as f64)),
        _ => enc.interval(state),
    }
}

/// Maps an SLO onto the discrete states of `map`. A state counts as
/// satisfying only if its whole region does: a `<=` bound needs the upper
/// edge within the threshold, a `>=` bound the lower edge, and
/// `within_time` needs the delay's upper edge within `1000 / fps` at the
/// fps state's upper edge.
pub fn slo_event(slo: &SloSpec, map: &DiscretizationMap) -> Result<SloEvent> {
    let invalid = |message: String| Error::InvalidSlo {
        slo: slo.name.clone(),
        message,
    };
    if slo.is_minimize() {
        return Err(invalid("minimize SLOs have no event".into()));
    }
    let metrics = resolve_metrics(slo, map)?;
    let encs: Vec<&ColumnEncoding> = metrics.iter().map(|&m| &map.columns[m].encoding).collect();
    let cards: Vec<usize> = encs.iter().map(|e| e.cardinality()).collect();
    let numeric = |i: usize, s: usize| {
        span(encs[i], s).ok_or_else(|| invalid(format!("`{}` is not numeric", slo.metrics[i])))
    };
    let satisfying = match slo.kind {
        SloKind::Rate => (0..cards[0])
            .map(|s| {
                truth(encs[0], s)
                    .ok_or_else(|| invalid(format!("`{}` is not boolean", slo.metrics[0])))
            })
            .collect::<Result<_>>()?,
        SloKind::Bound { op, value } => (0..cards[0])
            .map(|s| {
                let (lo, hi) = numeric(0, s)?;
                Ok(match op {
                    BoundOp::AtMost => hi <= value,
                    BoundOp::AtLeast => lo >= value,
                })
            })
            .collect::<Result<_>>()?,
        SloKind::Range { lo, hi } => (0..cards[0])
            .map(|s| {
                let (a, b) = numeric(0, s)?;
                Ok(a >= lo && b <= hi)
            })
            .collect::<Result<_>>()?,
        SloKind::Composite {
            formula: Formula::WithinTime,
        } => {
            let mut mask = Vec::with_capacity(cards[0] * cards[1]);
            for d in 0..cards[0] {
                let (_, delay_hi) = numeric(0, d)?;
                for f in 0..cards[1] {
                    let (_, fps_hi) = numeric(1, f)?;
                    mask.push(delay_hi <= 1000.0 / fps_hi);
                }
            }
            mask
        }
        SloKind::Minimize => unreachable!(),
    };
    Ok(SloEvent {
        slo: slo.name.clone(),
        metrics,
        cards,
        satisfying,
    })
}
