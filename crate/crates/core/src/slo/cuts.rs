use std::collections::{BTreeMap, BTreeSet};

use crate::telemetry::{ColumnValues, RawDataset};

use super::spec::{Formula, SloKind, SloSpec};

/// Cut points that make binned metrics line up with the SLO thresholds:
/// bound values, range edges, and `1000 / fps` on the delay for every fps
/// value seen in `raw`. Keys are the raw column names.
pub fn threshold_cuts(slos: &[SloSpec], raw: &RawDataset) -> BTreeMap<String, Vec<f64>> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut add = |metric: &str, values: Vec<f64>| {
        if let Some(col) = raw.column(metric) {
            out.entry(col.name.clone()).or_default().extend(values);
        }
    };
    for slo in slos {
        match slo.kind {
            SloKind::Bound { value, .. } => add(&slo.metrics[0], vec![value]),
            SloKind::Range { lo, hi } => add(&slo.metrics[0], vec![lo, hi]),
            SloKind::Composite {
                formula: Formula::WithinTime,
            } => {
                let rates: BTreeSet<u64> = match raw.column(&slo.metrics[1]).map(|c| &c.values) {
                    Some(ColumnValues::Numeric(v)) => v
                        .iter()
                        .filter(|x| x.is_finite() && **x > 0.0)
                        .map(|x| x.to_bits())
                        .collect(),
                    _ => BTreeSet::new(),
                };
                if rates.len() <= 64 {
                    add(
                        &slo.metrics[0],
                        rates.into_iter().map(|b| 1000.0 / f64::from_bits(b)).collect(),
                    );
                }
            }
            SloKind::Rate | SloKind::Minimize => {}
        }
    }
    for cuts in out.values_mut() {
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
    }
    out
}
