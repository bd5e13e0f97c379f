use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::infer::Evidence;
use crate::learn::DiscreteBayesNet;

use super::ground_truth::{CONFIGS, FPS_LEVELS, PIXELS};

/// One stretch of rows with some variables held at fixed values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dwell {
    /// `(variable, value)` pairs, resolved against the network's states.
    pub set: Vec<(String, String)>,
    pub rows: usize,
}

impl Dwell {
    pub fn new(set: &[(&str, &str)], rows: usize) -> Self {
        Dwell {
            set: set.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            rows,
        }
    }
}

/// A sequence of dwells; sampling walks it in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepSchedule {
    pub dwells: Vec<Dwell>,
}

impl SweepSchedule {
    /// Every (config, pixel, fps) combination for each GPU setting in
    /// turn, config varying slowest.
    pub fn full_sweep(gpu_runs: &[bool], rows_per_dwell: usize) -> Self {
        let mut dwells = Vec::new();
        for &gpu in gpu_runs {
            let gpu = if gpu { "True" } else { "False" };
            for config in CONFIGS {
                for pixel in PIXELS {
                    for fps in FPS_LEVELS {
                        dwells.push(Dwell::new(
                            &[
                                ("pixel", &format!("{pixel}")),
                                ("fps", &format!("{fps}")),
                                ("config", config),
                                ("gpu", gpu),
                            ],
                            rows_per_dwell,
                        ));
                    }
                }
            }
        }
        SweepSchedule { dwells }
    }

    pub fn row_count(&self) -> usize {
        self.dwells.iter().map(|d| d.rows).sum()
    }

    /// Each dwell's assignments as network evidence.
    pub fn clamps(&self, net: &DiscreteBayesNet) -> Result<Vec<Evidence>> {
        self.dwells
            .iter()
            .map(|d| {
                d.set
                    .iter()
                    .map(|(k, v)| net.resolve_assignment(k, v))
                    .collect()
            })
            .collect()
    }

    /// Parses one dwell per line: `name=value ... rows=N`. Blank lines and
    /// `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dwells = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::ScheduleParse {
                line: line_no,
                message,
            };
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut set = Vec::new();
            let mut rows = None;
            for token in line.split_whitespace() {
                let (k, v) = token
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected name=value, got `{token}`")))?;
                if k.is_empty() || v.is_empty() {
                    return Err(err(format!("empty name or value in `{token}`")));
                }
                if k == "rows" {
                    if rows.is_some() {
                        return Err(err("rows given twice".into()));
                    }
                    rows = Some(v.parse::<usize>().map_err(|_| err(format!("bad row count `{v}`")))?);
                } else if set.iter().any(|(n, _): &(String, String)| n == k) {
                    return Err(err(format!("`{k}` given twice")));
                } else {
                    set.push((k.to_string(), v.to_string()));
                }
            }
            let rows = rows.ok_or_else(|| err("missing rows=N".into()))?;
            dwells.push(Dwell { set, rows });
        }
        Ok(SweepSchedule { dwells })
    }

    pub fn format(&self) -> String {
        let mut out = String::new();
        for d in &self.dwells {
            for (k, v) in &d.set {
                let _ = write!(out, "{k}={v} ");
            }
            let _ = writeln!(out, "rows={}", d.rows);
        }
        out
    }
}
