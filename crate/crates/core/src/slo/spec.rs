use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::telemetry::{find_name, parse_bool, RawValue, VariableMeta};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundOp {
    AtMost,
    AtLeast,
}

impl BoundOp {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundOp::AtMost => "<=",
            BoundOp::AtLeast => ">=",
        }
    }

    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            BoundOp::AtMost => value <= threshold,
            BoundOp::AtLeast => value >= threshold,
        }
    }
}

/// Named formulas over several metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formula {
    /// `delay <= 1000 / fps`: a frame is done before the next one arrives.
    /// Metrics are `[delay (ms), fps]`.
    WithinTime,
}

impl Formula {
    pub fn as_str(self) -> &'static str {
        match self {
            Formula::WithinTime => "within_time",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Formula::WithinTime => 2,
        }
    }

    fn parse(s: &str) -> Option<Formula> {
        match s {
            "within_time" => Some(Formula::WithinTime),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SloKind {
    /// A boolean metric must be true.
    Rate,
    Bound { op: BoundOp, value: f64 },
    Range { lo: f64, hi: f64 },
    Composite { formula: Formula },
    /// Rank configurations by the metric's expected value instead of
    /// limiting it.
    Minimize,
}

impl SloKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SloKind::Rate => "rate",
            SloKind::Bound { .. } => "bound",
            SloKind::Range { .. } => "range",
            SloKind::Composite { .. } => "composite",
            SloKind::Minimize => "minimize",
        }
    }
}

/// Required probability for bound and range SLOs that do not state one.
pub const DEFAULT_P_MIN: f64 = 0.95;

#[derive(Clone, Debug, PartialEq)]
pub struct SloSpec {
    pub name: String,
    pub kind: SloKind,
    pub metrics: Vec<String>,
    /// Required fulfillment probability; `None` exactly for minimize.
    pub p_min: Option<f64>,
    pub unit: Option<String>,
}

impl SloSpec {
    pub fn is_minimize(&self) -> bool {
        matches!(self.kind, SloKind::Minimize)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Error::InvalidSlo {
            slo: self.name.clone(),
            message,
        };
        if self.name.is_empty() {
            return Err(bad("empty name".into()));
        }
        if self.metrics.is_empty() {
            return Err(bad("no metrics".into()));
        }
        for (i, m) in self.metrics.iter().enumerate() {
            if self.metrics[..i].contains(m) {
                return Err(bad(format!("metric `{m}` listed twice")));
            }
        }
        let expected = match self.kind {
            SloKind::Composite { formula } => formula.arity(),
            _ => 1,
        };
        if self.metrics.len() != expected {
            return Err(bad(format!(
                "{} takes {expected} metric(s), got {}",
                self.kind.as_str(),
                self.metrics.len()
            )));
        }
        match (self.is_minimize(), self.p_min) {
            (true, Some(_)) => return Err(bad("minimize takes no p_min".into())),
            (false, None) => return Err(bad("p_min is required".into())),
            (false, Some(p)) if !(0.0..=1.0).contains(&p) => {
                return Err(bad(format!("p_min {p} outside [0, 1]")))
            }
            _ => {}
        }
        match self.kind {
            SloKind::Bound { value, .. } if !value.is_finite() => {
                Err(bad("threshold must be finite".into()))
            }
            SloKind::Range { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo <= hi) => {
                Err(bad(format!("bad range [{lo}, {hi}]")))
            }
            _ => Ok(()),
        }
    }

    /// Checks metric names and units against the network's variables.
    pub fn check_against(&self, metas: &[VariableMeta]) -> Result<()> {
        let bad = |message: String| Error::InvalidSlo {
            slo: self.name.clone(),
            message,
        };
        for m in &self.metrics {
            if find_name(metas.iter().map(|v| v.name.as_str()), m).is_none() {
                return Err(bad(format!("unknown metric `{m}`")));
            }
        }
        if let Some(unit) = &self.unit {
            let meta = &metas[find_name(metas.iter().map(|v| v.name.as_str()), &self.metrics[0])
                .expect("checked above")];
            if !meta.unit.is_empty() && !meta.unit.eq_ignore_ascii_case(unit) {
                return Err(bad(format!(
                    "unit `{unit}` does not match `{}` ({})",
                    meta.name, meta.unit
                )));
            }
        }
        Ok(())
    }

    /// Whether one row of raw values, in metric order, fulfils the SLO.
    /// `None` for minimize SLOs and for values of the wrong type.
    pub fn satisfied_by(&self, values: &[RawValue<'_>]) -> Option<bool> {
        let num = |v: &RawValue<'_>| match *v {
            RawValue::Num(x) => Some(x),
            RawValue::Bool(b) => Some(b as u8 as f64),
            RawValue::Text(t) => t.trim().parse().ok(),
        };
        match self.kind {
            SloKind::Rate => match values.first()? {
                RawValue::Bool(b) => Some(*b),
                RawValue::Text(t) => parse_bool(t),
                RawValue::Num(x) => Some(*x == 1.0),
            },
            SloKind::Bound { op, value } => Some(op.holds(num(values.first()?)?, value)),
            SloKind::Range { lo, hi } => {
                let x = num(values.first()?)?;
                Some(lo <= x && x <= hi)
            }
            SloKind::Composite {
                formula: Formula::WithinTime,
            } => {
                let delay = num(values.first()?)?;
                let fps = num(values.get(1)?)?;
                Some(delay <= 1000.0 / fps)
            }
            SloKind::Minimize => None,
        }
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::SloParse {
        line,
        message: message.into(),
    }
}

fn parse_probability(s: &str) -> Option<f64> {
    let p = match s.strip_suffix('%') {
        Some(pct) => pct.trim().parse::<f64>().ok()? / 100.0,
        None => s.parse::<f64>().ok()?,
    };
    p.is_finite().then_some(p)
}

fn parse_range(s: &str) -> Option<(f64, f64)> {
    let inner = s.strip_prefix('[')?.strip_suffix(']')?;
    let (lo, hi) = inner.split_once(',')?;
    Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?))
}

#[derive(Default)]
struct Stanza {
    name: String,
    line: usize,
    fields: Vec<(String, String, usize)>,
}

impl Stanza {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        let i = self.fields.iter().position(|(k, _, _)| k == key)?;
        let (_, v, l) = self.fields.remove(i);
        Some((v, l))
    }

    fn build(mut self) -> Result<SloSpec> {
        let line = self.line;
        let (kind_text, kind_line) = self
            .take("kind")
            .ok_or_else(|| parse_error(line, format!("`{}` has no kind", self.name)))?;
        let metrics = match (self.take("metric"), self.take("metrics")) {
            (Some(_), Some((_, l))) => {
                return Err(parse_error(l, "give either `metric` or `metrics`"))
            }
            (Some((m, _)), None) | (None, Some((m, _))) => m
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
            (None, None) => Vec::new(),
        };
        let op = self.take("op");
        let value = self.take("value");
        let formula = self.take("formula");
        let p_min = match self.take("p_min") {
            Some((text, l)) => Some(
                parse_probability(&text)
                    .ok_or_else(|| parse_error(l, format!("bad probability `{text}`")))?,
            ),
            None => None,
        };
        let unit = self.take("unit").map(|(u, _)| u);
        if let Some((key, _, l)) = self.fields.first() {
            return Err(parse_error(*l, format!("unknown key `{key}`")));
        }
        let number = |field: &Option<(String, usize)>| -> Result<f64> {
            let (text, l) = field
                .as_ref()
                .ok_or_else(|| parse_error(line, "missing `value`"))?;
            text.parse::<f64>()
                .map_err(|_| parse_error(*l, format!("bad number `{text}`")))
        };
        let kind = match kind_text.as_str() {
            "rate" => SloKind::Rate,
            "bound" => {
                let (op_text, l) = op.as_ref().ok_or_else(|| parse_error(line, "missing `op`"))?;
                let op = match op_text.as_str() {
                    "<=" => BoundOp::AtMost,
                    ">=" => BoundOp::AtLeast,
                    other => return Err(parse_error(*l, format!("bad bound operator `{other}`"))),
                };
                SloKind::Bound {
                    op,
                    value: number(&value)?,
                }
            }
            "range" => {
                if let Some((op_text, l)) = &op {
                    if op_text != "in" {
                        return Err(parse_error(*l, format!("range operator must be `in`, got `{op_text}`")));
                    }
                }
                let (text, l) = value.as_ref().ok_or_else(|| parse_error(line, "missing `value`"))?;
                let (lo, hi) = parse_range(text)
                    .ok_or_else(|| parse_error(*l, format!("bad range `{text}`")))?;
                SloKind::Range { lo, hi }
            }
            "composite" => {
                let (text, l) = formula
                    .as_ref()
                    .ok_or_else(|| parse_error(line, "missing `formula`"))?;
                SloKind::Composite {
                    formula: Formula::parse(text)
                        .ok_or_else(|| parse_error(*l, format!("unknown formula `{text}`")))?,
                }
            }
            "minimize" => SloKind::Minimize,
            other => return Err(parse_error(kind_line, format!("unknown kind `{other}`"))),
        };
        let p_min = match (&kind, p_min) {
            (SloKind::Bound { .. } | SloKind::Range { .. }, None) => Some(DEFAULT_P_MIN),
            (_, p) => p,
        };
        let spec = SloSpec {
            name: self.name,
            kind,
            metrics,
            p_min,
            unit,
        };
        spec.validate().map_err(|e| parse_error(line, e.to_string()))?;
        Ok(spec)
    }
}

/// Parses the stanza format:
///
/// ```text
/// # comment
/// [distance]
/// kind = bound
/// metric = distance
/// op = <=
/// value = 35
/// unit = px
/// p_min = 95%
/// ```
///
/// Kinds are `rate`, `bound` (`op` is `<=` or `>=`), `range` (`op = in`,
/// `value = [lo, hi]`), `composite` (`formula`, `metrics = a, b`) and
/// `minimize`. Bound and range SLOs default to `p_min = 0.95`.
pub fn parse_slos(source: &str) -> Result<Vec<SloSpec>> {
    let mut stanzas: Vec<Stanza> = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line, "unterminated `[`"))?
                .trim();
            if name.is_empty() {
                return Err(parse_error(line, "empty SLO name"));
            }
            if stanzas.iter().any(|s| s.name == name) {
                return Err(parse_error(line, format!("duplicate SLO `{name}`")));
            }
            stanzas.push(Stanza {
                name: name.to_string(),
                line,
                fields: Vec::new(),
            });
            continue;
        }
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| parse_error(line, format!("expected `key = value`, got `{text}`")))?;
        let stanza = stanzas
            .last_mut()
            .ok_or_else(|| parse_error(line, "field before the first `[name]`"))?;
        let key = key.trim().to_string();
        if stanza.fields.iter().any(|(k, _, _)| *k == key) {
            return Err(parse_error(line, format!("duplicate key `{key}`")));
        }
        stanza.fields.push((key, value.trim().to_string(), line));
    }
    stanzas.into_iter().map(Stanza::build).collect()
}

/// Parses and checks every SLO against `metas`; errors point at the
/// offending stanza.
pub fn parse_slos_for(source: &str, metas: &[VariableMeta]) -> Result<Vec<SloSpec>> {
    let specs = parse_slos(source)?;
    let lines: Vec<usize> = source
        .lines()
        .enumerate()
        .filter(|(_, l)| l.split('#').next().unwrap_or("").trim().starts_with('['))
        .map(|(i, _)| i + 1)
        .collect();
    for (spec, &line) in specs.iter().zip(&lines) {
        spec.check_against(metas)
            .map_err(|e| parse_error(line, e.to_string()))?;
    }
    Ok(specs)
}

/// Writes specs back in the stanza format; `parse_slos` reads it back
/// unchanged.
pub fn format_slos(specs: &[SloSpec]) -> String {
    let mut out = String::new();
    for (i, s) in specs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "[{}]", s.name);
        let _ = writeln!(out, "kind = {}", s.kind.as_str());
        if s.metrics.len() == 1 {
            let _ = writeln!(out, "metric = {}", s.metrics[0]);
        } else {
            let _ = writeln!(out, "metrics = {}", s.metrics.join(", "));
        }
        match s.kind {
            SloKind::Bound { op, value } => {
                let _ = writeln!(out, "op = {}\nvalue = {value:?}", op.as_str());
            }
            SloKind::Range { lo, hi } => {
                let _ = writeln!(out, "op = in\nvalue = [{lo:?}, {hi:?}]");
            }
            SloKind::Composite { formula } => {
                let _ = writeln!(out, "formula = {}", formula.as_str());
            }
            SloKind::Rate | SloKind::Minimize => {}
        }
        if let Some(p) = s.p_min {
            let _ = writeln!(out, "p_min = {p:?}");
        }
        if let Some(u) = &s.unit {
            let _ = writeln!(out, "unit = {u}");
        }
    }
    out
}
