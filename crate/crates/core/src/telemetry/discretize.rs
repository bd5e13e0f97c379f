use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::load::{parse_bool, ColumnValues, RawColumn, RawDataset, RawValue};
use super::VariableMeta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    EqualFrequency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscretizePolicy {
    /// Numeric columns with at most this many distinct values keep one state
    /// per value.
    pub max_categories: usize,
    pub bins: usize,
    pub strategy: Strategy,
}

impl Default for DiscretizePolicy {
    fn default() -> Self {
        DiscretizePolicy {
            max_categories: 12,
            bins: 8,
            strategy: Strategy::EqualFrequency,
        }
    }
}

/// How raw values of one column map onto discrete states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum ColumnEncoding {
    /// State 0 is `False`, state 1 is `True`.
    Boolean,
    /// One state per label, in the listed order.
    Nominal { labels: Vec<String> },
    /// One state per distinct numeric value (ascending). Values between
    /// levels map to the nearest level, ties to the lower one.
    Levels { values: Vec<f64> },
    /// Interval bins `(-inf, c1], (c1, c2], ..., (ck, inf)`. `min`/`max` record
    /// the observed (or declared) support and bound the tail bins when a
    /// finite range is needed.
    Binned { cuts: Vec<f64>, min: f64, max: f64 },
}

impl ColumnEncoding {
    pub fn cardinality(&self) -> usize {
        match self {
            ColumnEncoding::Boolean => 2,
            ColumnEncoding::Nominal { labels } => labels.len(),
            ColumnEncoding::Levels { values } => values.len(),
            ColumnEncoding::Binned { cuts, .. } => cuts.len() + 1,
        }
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            ColumnEncoding::Boolean => vec!["False".into(), "True".into()],
            ColumnEncoding::Nominal { labels } => labels.clone(),
            ColumnEncoding::Levels { values } => values.iter().map(|v| format!("{v}")).collect(),
            ColumnEncoding::Binned { cuts, .. } => {
                let mut edges = Vec::with_capacity(cuts.len() + 2);
                edges.push("-inf".to_string());
                edges.extend(cuts.iter().map(|c| format!("{c}")));
                edges.push("inf".to_string());
                edges
                    .windows(2)
                    .map(|w| {
                        if w[1] == "inf" {
                            format!("({},{})", w[0], w[1])
                        } else {
                            format!("({},{}]", w[0], w[1])
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn state_of_number(&self, v: f64) -> Option<usize> {
        match self {
            ColumnEncoding::Levels { values } => {
                let i = values.partition_point(|&x| x < v);
                Some(if i == 0 {
                    0
                } else if i == values.len() {
                    values.len() - 1
                } else if v - values[i - 1] <= values[i] - v {
                    i - 1
                } else {
                    i
                })
            }
            ColumnEncoding::Binned { cuts, .. } => Some(cuts.partition_point(|&c| c < v)),
            ColumnEncoding::Boolean => {
                if v == 0.0 {
                    Some(0)
                } else if v == 1.0 {
                    Some(1)
                } else {
                    None
                }
            }
            ColumnEncoding::Nominal { .. } => None,
        }
    }

    pub fn state_of(&self, value: RawValue<'_>) -> Option<usize> {
        match (self, value) {
            (ColumnEncoding::Boolean, RawValue::Bool(b)) => Some(b as usize),
            (_, RawValue::Num(v)) => self.state_of_number(v),
            (_, RawValue::Text(t)) => self.state_of_text(t),
            (_, RawValue::Bool(_)) => None,
        }
    }

    /// Resolves user-facing text: an exact state label, or a value of the
    /// column's kind.
    pub fn state_of_text(&self, text: &str) -> Option<usize> {
        let text = text.trim();
        if let ColumnEncoding::Boolean = self {
            return parse_bool(text).map(|b| b as usize);
        }
        if let Some(i) = self.labels().iter().position(|l| l == text) {
            return Some(i);
        }
        match self {
            ColumnEncoding::Nominal { .. } | ColumnEncoding::Boolean => None,
            _ => text.parse::<f64>().ok().and_then(|v| self.state_of_number(v)),
        }
    }

    /// The numeric region covered by a state as `(lower, upper)`; bins are
    /// open below and closed above, levels are single points. `None` for
    /// non-numeric encodings.
    pub fn interval(&self, state: usize) -> Option<(f64, f64)> {
        match self {
            ColumnEncoding::Levels { values } => values.get(state).map(|&v| (v, v)),
            ColumnEncoding::Binned { cuts, .. } => {
                if state > cuts.len() {
                    return None;
                }
                let lo = if state == 0 { f64::NEG_INFINITY } else { cuts[state - 1] };
                let hi = if state == cuts.len() { f64::INFINITY } else { cuts[state] };
                Some((lo, hi))
            }
            _ => None,
        }
    }

    /// Value standing in for a state when taking expectations: the level
    /// itself, a bin's midpoint, or the inner edge of an unbounded tail bin.
    pub fn representative(&self, state: usize) -> Option<f64> {
        match self {
            ColumnEncoding::Levels { values } => values.get(state).copied(),
            ColumnEncoding::Boolean => (state < 2).then_some(state as f64),
            ColumnEncoding::Binned { cuts, min, max } => {
                if cuts.is_empty() {
                    return (state == 0).then_some((min + max) / 2.0);
                }
                let (lo, hi) = self.interval(state)?;
                Some(match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => (lo + hi) / 2.0,
                    (false, _) => hi,
                    (_, false) => lo,
                })
            }
            ColumnEncoding::Nominal { .. } => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            ColumnEncoding::Levels { .. } | ColumnEncoding::Binned { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub name: String,
    pub encoding: ColumnEncoding,
}

/// Per-column raw-value → state mapping, in variable order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationMap {
    pub columns: Vec<ColumnMap>,
}

impl DiscretizationMap {
    pub fn get(&self, name: &str) -> Option<&ColumnEncoding> {
        super::find_name(self.columns.iter().map(|c| c.name.as_str()), name)
            .map(|i| &self.columns[i].encoding)
    }

    pub fn encoding(&self, index: usize) -> &ColumnEncoding {
        &self.columns[index].encoding
    }

    /// Re-applies the map to raw data. Columns of `raw` that the map does not
    /// know are ignored; every mapped column must be present.
    pub fn apply(&self, raw: &RawDataset) -> Result<DiscreteDataset> {
        let mut metas = Vec::with_capacity(self.columns.len());
        let mut columns = Vec::with_capacity(self.columns.len());
        for cm in &self.columns {
            let col = raw
                .column(&cm.name)
                .ok_or_else(|| Error::UnknownVariable(cm.name.clone()))?;
            metas.push(meta_for(col, &cm.encoding)?);
            columns.push(encode_column(col, &cm.encoding)?);
        }
        DiscreteDataset::new(metas, columns, self.clone())
    }
}

fn meta_for(col: &RawColumn, enc: &ColumnEncoding) -> Result<VariableMeta> {
    VariableMeta::new(
        col.name.clone(),
        col.kind,
        col.unit.clone(),
        col.parameterizable,
        enc.labels(),
    )
}

fn encode_column(col: &RawColumn, enc: &ColumnEncoding) -> Result<Vec<usize>> {
    (0..col.values.len())
        .map(|row| {
            let v = col.values.get(row);
            enc.state_of(v).ok_or_else(|| Error::UnknownState {
                variable: col.name.clone(),
                state: match v {
                    RawValue::Num(x) => format!("{x}"),
                    RawValue::Bool(b) => format!("{b}"),
                    RawValue::Text(t) => t.to_string(),
                },
            })
        })
        .collect()
}

/// Discrete states, stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDataset {
    metas: Vec<VariableMeta>,
    columns: Vec<Vec<usize>>,
    map: DiscretizationMap,
}

impl DiscreteDataset {
    pub fn new(
        metas: Vec<VariableMeta>,
        columns: Vec<Vec<usize>>,
        map: DiscretizationMap,
    ) -> Result<Self> {
        if metas.len() != columns.len() {
            return Err(Error::InvalidMeta {
                variable: String::new(),
                reason: format!("{} metas for {} columns", metas.len(), columns.len()),
            });
        }
        let rows = columns.first().map_or(0, Vec::len);
        let mut names = BTreeSet::new();
        for (meta, col) in metas.iter().zip(&columns) {
            meta.validate()?;
            if !names.insert(meta.name.as_str()) {
                return Err(Error::DuplicateColumn(meta.name.clone()));
            }
            if col.len() != rows {
                return Err(Error::ColumnLength {
                    name: meta.name.clone(),
                    expected: rows,
                    found: col.len(),
                });
            }
            if let Some(&bad) = col.iter().find(|&&s| s >= meta.cardinality()) {
                return Err(Error::StateOutOfRange {
                    variable: meta.name.clone(),
                    index: bad,
                    cardinality: meta.cardinality(),
                });
            }
        }
        Ok(DiscreteDataset { metas, columns, map })
    }

    pub fn metas(&self) -> &[VariableMeta] {
        &self.metas
    }

    pub fn map(&self) -> &DiscretizationMap {
        &self.map
    }

    pub fn row_count(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn var_count(&self) -> usize {
        self.metas.len()
    }

    pub fn column(&self, var: usize) -> &[usize] {
        &self.columns[var]
    }

    pub fn row(&self, row: usize) -> Vec<usize> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    pub fn cardinality(&self, var: usize) -> usize {
        self.metas[var].cardinality()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        super::find_name(self.metas.iter().map(|m| m.name.as_str()), name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiscretizationWarning {
    /// The column produced a single state (e.g. it was constant).
    SingleState { column: String },
    /// Tied quantiles left fewer bins than requested.
    FewerBins {
        column: String,
        requested: usize,
        produced: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Discretized {
    pub dataset: DiscreteDataset,
    pub warnings: Vec<DiscretizationWarning>,
}

impl Discretized {
    pub fn map(&self) -> &DiscretizationMap {
        self.dataset.map()
    }
}

/// Learns a discretization map from `raw` and applies it.
pub fn discretize(raw: &RawDataset, policy: DiscretizePolicy) -> Result<Discretized> {
    discretize_with_cuts(raw, policy, &BTreeMap::new())
}

/// Like [`discretize`], with extra cut points forced into binned columns
/// (for instance SLO thresholds, so that bins line up with them). Forced
/// cuts outside a column's observed range are ignored.
pub fn discretize_with_cuts(
    raw: &RawDataset,
    policy: DiscretizePolicy,
    forced: &BTreeMap<String, Vec<f64>>,
) -> Result<Discretized> {
    if policy.bins < 2 {
        return Err(Error::InvalidPolicy(format!(
            "bins must be at least 2, got {}",
            policy.bins
        )));
    }
    if raw.row_count() == 0 {
        return Err(Error::EmptyInput);
    }
    let mut warnings = Vec::new();
    let mut map = DiscretizationMap::default();
    for col in raw.columns() {
        let encoding = match &col.values {
            ColumnValues::Boolean(_) => ColumnEncoding::Boolean,
            ColumnValues::Text(values) => {
                let labels: BTreeSet<&str> = values.iter().map(String::as_str).collect();
                if labels.len() > policy.max_categories {
                    return Err(Error::TooManyCategories {
                        column: col.name.clone(),
                        found: labels.len(),
                        limit: policy.max_categories,
                    });
                }
                ColumnEncoding::Nominal {
                    labels: labels.into_iter().map(str::to_string).collect(),
                }
            }
            ColumnValues::Numeric(values) => {
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                let mut distinct = sorted.clone();
                distinct.dedup();
                if distinct.len() <= policy.max_categories {
                    ColumnEncoding::Levels { values: distinct }
                } else {
                    let mut cuts = equal_frequency_cuts(&sorted, policy.bins);
                    if cuts.len() + 1 < policy.bins {
                        warnings.push(DiscretizationWarning::FewerBins {
                            column: col.name.clone(),
                            requested: policy.bins,
                            produced: cuts.len() + 1,
                        });
                    }
                    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
                    if let Some(extra) = forced.get(&col.name) {
                        cuts.extend(extra.iter().copied().filter(|c| c.is_finite() && min <= *c && *c < max));
                        cuts.sort_by(f64::total_cmp);
                        cuts.dedup();
                    }
                    ColumnEncoding::Binned { cuts, min, max }
                }
            }
        };
        if encoding.cardinality() == 1 {
            warnings.push(DiscretizationWarning::SingleState {
                column: col.name.clone(),
            });
        }
        map.columns.push(ColumnMap {
            name: col.name.clone(),
            encoding,
        });
    }
    let dataset = map.apply(raw)?;
    Ok(Discretized { dataset, warnings })
}

/// Lower nearest-rank quantiles at `k / bins`, `k = 1..bins`; duplicates and
/// cut points at the maximum are dropped so no bin is empty on `sorted`.
fn equal_frequency_cuts(sorted: &[f64], bins: usize) -> Vec<f64> {
    let n = sorted.len();
    let max = sorted[n - 1];
    let mut cuts: Vec<f64> = Vec::with_capacity(bins - 1);
    for k in 1..bins {
        let rank = (k * n).div_ceil(bins).clamp(1, n);
        let c = sorted[rank - 1];
        if c < max && cuts.last().is_none_or(|&last| c > last) {
            cuts.push(c);
        }
    }
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::load::load_telemetry;
    use crate::telemetry::VariableKind;
    use proptest::prelude::*;

    fn numeric(name: &str, v: Vec<f64>) -> RawColumn {
        RawColumn {
            name: name.into(),
            kind: VariableKind::OrdinalNumeric,
            unit: String::new(),
            parameterizable: false,
            values: ColumnValues::Numeric(v),
        }
    }

    /// Sort, then split into `bins` blocks of equal size and read off each
    /// block's last value.
    fn sort_and_split(values: &[f64], bins: usize) -> Vec<f64> {
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        let block = s.len() / bins;
        (1..bins).map(|k| s[k * block - 1]).collect()
    }

    #[test]
    fn one_to_hundred_in_four_bins() {
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        let raw = RawDataset::new(vec![numeric("x", values.clone())]).unwrap();
        let policy = DiscretizePolicy {
            bins: 4,
            ..Default::default()
        };
        let d = discretize(&raw, policy).unwrap();
        let ColumnEncoding::Binned { cuts, .. } = d.map().encoding(0) else {
            panic!("expected bins");
        };
        assert_eq!(cuts, &sort_and_split(&values, 4));
        assert_eq!(cuts, &vec![25.0, 50.0, 75.0]);
        let mut counts = [0usize; 4];
        for &s in d.dataset.column(0) {
            counts[s] += 1;
        }
        assert_eq!(counts, [25; 4]);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn config_modes_stay_categorical() {
        let src = "config\n4C_15W\n6C_20W\n2C_10W\n4C_15W\n";
        let raw = load_telemetry(src.as_bytes(), &crate::telemetry::telemetry_schema()).unwrap();
        let d = discretize(&raw, DiscretizePolicy::default()).unwrap();
        let meta = &d.dataset.metas()[0];
        assert_eq!(meta.states, vec!["2C_10W", "4C_15W", "6C_20W"]);
        assert_eq!(d.dataset.column(0), &[1, 2, 0, 1]);
    }

    #[test]
    fn booleans_pass_through() {
        let raw = load_telemetry("t\nT\nF\nT\n".as_bytes(), &[]).unwrap();
        let d = discretize(&raw, DiscretizePolicy::default()).unwrap();
        assert_eq!(d.dataset.metas()[0].states, vec!["False", "True"]);
        assert_eq!(d.dataset.column(0), &[1, 0, 1]);
    }

    #[test]
    fn constant_column_collapses_with_warning() {
        let raw = RawDataset::new(vec![numeric("c", vec![3.0; 50])]).unwrap();
        let d = discretize(
            &raw,
            DiscretizePolicy {
                max_categories: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(d.dataset.cardinality(0), 1);
        assert!(d
            .warnings
            .contains(&DiscretizationWarning::SingleState { column: "c".into() }));
    }

    #[test]
    fn heavy_ties_collapse_cut_points() {
        let mut v = vec![1.0; 90];
        v.extend((0..20).map(|i| 10.0 + i as f64));
        let raw = RawDataset::new(vec![numeric("x", v)]).unwrap();
        let d = discretize(&raw, DiscretizePolicy::default()).unwrap();
        assert!(d.dataset.cardinality(0) < 8);
        assert!(matches!(
            d.warnings[0],
            DiscretizationWarning::FewerBins { .. }
        ));
    }

    #[test]
    fn bins_below_two_rejected() {
        let raw = RawDataset::new(vec![numeric("x", vec![1.0, 2.0])]).unwrap();
        let policy = DiscretizePolicy {
            bins: 1,
            ..Default::default()
        };
        assert!(matches!(
            discretize(&raw, policy),
            Err(Error::InvalidPolicy(_))
        ));
    }

    #[test]
    fn encoding_intervals_and_representatives() {
        let enc = ColumnEncoding::Binned {
            cuts: vec![10.0, 35.0, 90.0],
            min: 0.0,
            max: 200.0,
        };
        assert_eq!(enc.interval(0), Some((f64::NEG_INFINITY, 10.0)));
        assert_eq!(enc.interval(3), Some((90.0, f64::INFINITY)));
        assert_eq!(enc.representative(0), Some(10.0));
        assert_eq!(enc.representative(1), Some(22.5));
        assert_eq!(enc.representative(3), Some(90.0));
        assert_eq!(enc.state_of_number(10.0), Some(0));
        assert_eq!(enc.state_of_number(10.5), Some(1));
        assert_eq!(enc.labels()[3], "(90,inf)");
        assert_eq!(enc.state_of_text("(10,35]"), Some(1));
        assert_eq!(enc.state_of_text("36"), Some(2));

        let lv = ColumnEncoding::Levels {
            values: vec![12.0, 16.0, 20.0],
        };
        assert_eq!(lv.state_of_number(14.0), Some(0));
        assert_eq!(lv.state_of_number(14.1), Some(1));
        assert_eq!(lv.state_of_number(100.0), Some(2));
        assert_eq!(lv.state_of_text("20"), Some(2));
        assert_eq!(ColumnEncoding::Boolean.state_of_text("false"), Some(0));
    }

    #[test]
    fn forced_cuts_join_the_quantiles() {
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        let raw = RawDataset::new(vec![numeric("x", values)]).unwrap();
        let forced = BTreeMap::from([("x".to_string(), vec![33.5, 50.0, 500.0])]);
        let policy = DiscretizePolicy { bins: 4, ..Default::default() };
        let d = discretize_with_cuts(&raw, policy, &forced).unwrap();
        match d.map().encoding(0) {
            ColumnEncoding::Binned { cuts, .. } => assert_eq!(cuts, &vec![25.0, 33.5, 50.0, 75.0]),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn binning_is_order_preserving_and_deterministic(
            values in proptest::collection::vec(-1e3f64..1e3, 20..200),
            bins in 2usize..10,
        ) {
            let raw = RawDataset::new(vec![numeric("x", values.clone())]).unwrap();
            let policy = DiscretizePolicy { max_categories: 3, bins, ..Default::default() };
            let d = discretize(&raw, policy).unwrap();
            let states = d.dataset.column(0);
            for i in 0..values.len() {
                for j in 0..values.len() {
                    if values[i] <= values[j] {
                        prop_assert!(states[i] <= states[j]);
                    }
                }
            }
            let again = d.map().apply(&raw).unwrap();
            prop_assert_eq!(&again, &d.dataset);
        }
    }
}
