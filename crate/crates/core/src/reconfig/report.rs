use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::telemetry::VariableMeta;

use super::score::{ConfigScore, Provenance, Ranking, SloScore};

fn param_names(metas: &[VariableMeta], ranking: &Ranking) -> Vec<String> {
    ranking
        .scores
        .first()
        .map(|s| {
            s.config
                .assignment
                .keys()
                .map(|&v| metas[v].name.clone())
                .collect()
        })
        .unwrap_or_default()
}

fn slo_cell(s: &SloScore) -> String {
    match (s.probability, s.expected) {
        (Some(p), _) => format!("{p:.6}"),
        (_, Some(e)) => format!("{e:.6}"),
        _ => "NA".into(),
    }
}

/// Comma-separated ranking: one row per configuration with the parameter
/// states, each SLO's probability (or expected value for minimize SLOs),
/// the objective and the feasible flag.
pub fn ranking_csv(metas: &[VariableMeta], ranking: &Ranking) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["rank".to_string()];
    header.extend(param_names(metas, ranking));
    if let Some(first) = ranking.scores.first() {
        header.extend(first.slos.iter().map(|s| s.name.clone()));
    }
    header.extend(["objective", "min_probability", "feasible"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for (i, s) in ranking.scores.iter().enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(s.config.pairs(metas).iter().map(|(_, v)| v.to_string()));
        row.extend(s.slos.iter().map(slo_cell));
        row.push(format!("{:.6}", s.objective));
        row.push(format!("{:.6}", s.min_probability));
        row.push(s.feasible.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}

#[derive(Serialize)]
struct ConfigRecord<'a> {
    rank: usize,
    provenance: Provenance,
    config: Vec<(&'a str, &'a str)>,
    feasible: bool,
    objective: f64,
    min_probability: f64,
    queries: usize,
    slos: &'a [SloScore],
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic: Option<&'a str>,
}

#[derive(Serialize)]
struct RankingRecord<'a> {
    none_feasible: bool,
    queries: usize,
    configs: Vec<ConfigRecord<'a>>,
}

fn record<'a>(metas: &'a [VariableMeta], rank: usize, s: &'a ConfigScore) -> ConfigRecord<'a> {
    ConfigRecord {
        rank,
        provenance: s.config.provenance,
        config: s.config.pairs(metas),
        feasible: s.feasible,
        objective: s.objective,
        min_probability: s.min_probability,
        queries: s.queries,
        slos: &s.slos,
        diagnostic: s.diagnostic.as_deref(),
    }
}

/// The ranking as pretty-printed JSON.
pub fn ranking_json(metas: &[VariableMeta], ranking: &Ranking) -> Result<String> {
    let rec = RankingRecord {
        none_feasible: ranking.none_feasible,
        queries: ranking.queries,
        configs: ranking
            .scores
            .iter()
            .enumerate()
            .map(|(i, s)| record(metas, i + 1, s))
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&rec)?;
    s.push('\n');
    Ok(s)
}

/// Aligned plain-text table of the first `limit` configurations.
pub fn ranking_table(metas: &[VariableMeta], ranking: &Ranking, limit: usize) -> String {
    let mut header = vec!["#".to_string()];
    header.extend(param_names(metas, ranking));
    if let Some(first) = ranking.scores.first() {
        header.extend(first.slos.iter().map(|s| s.name.clone()));
    }
    header.push("feasible".into());
    let mut rows = vec![header];
    for (i, s) in ranking.scores.iter().take(limit).enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(s.config.pairs(metas).iter().map(|(_, v)| v.to_string()));
        row.extend(s.slos.iter().map(|x| match (x.probability, x.expected) {
            (Some(p), _) => format!("{:.4}", p),
            (_, Some(e)) => format!("{:.3}", e),
            _ => "NA".into(),
        }));
        row.push(if s.feasible { "yes" } else { "no" }.into());
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &rows {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}
