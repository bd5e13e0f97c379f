use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::infer::Evidence;
use crate::learn::DiscreteBayesNet;
use crate::telemetry::{
    ColumnEncoding, ColumnValues, DiscreteDataset, RawColumn, RawDataset,
};

use super::schedule::SweepSchedule;

/// Ancestral sampler over a network with precomputed cumulative rows.
#[derive(Clone, Debug)]
pub struct Sampler<'a> {
    net: &'a DiscreteBayesNet,
    order: Vec<usize>,
    cumulative: Vec<Vec<f64>>,
}

impl<'a> Sampler<'a> {
    pub fn new(net: &'a DiscreteBayesNet) -> Self {
        let cumulative = net
            .cpts()
            .iter()
            .map(|c| {
                let mut out = Vec::with_capacity(c.table.len());
                for row in c.table.chunks(c.child_card) {
                    let mut acc = 0.0;
                    for &p in row {
                        acc += p;
                        out.push(acc);
                    }
                }
                out
            })
            .collect();
        Sampler {
            net,
            order: net.dag().topological_order(),
            cumulative,
        }
    }

    pub fn net(&self) -> &DiscreteBayesNet {
        self.net
    }

    /// Draws one joint state into `out`, keeping clamped variables fixed.
    pub fn draw<R: Rng>(&self, rng: &mut R, clamp: &Evidence, out: &mut [usize]) {
        for &v in &self.order {
            if let Some(&s) = clamp.get(&v) {
                out[v] = s;
                continue;
            }
            let cpt = self.net.cpt(v);
            let mut ctx = 0;
            for (&p, &k) in cpt.parents.iter().zip(&cpt.parent_cards) {
                ctx = ctx * k + out[p];
            }
            let row = &self.cumulative[v][ctx * cpt.child_card..(ctx + 1) * cpt.child_card];
            let u = rng.random::<f64>() * row[row.len() - 1];
            out[v] = row.partition_point(|&c| c <= u).min(row.len() - 1);
        }
    }
}

fn check_clamp(net: &DiscreteBayesNet, clamp: &Evidence) -> Result<()> {
    for (&v, &s) in clamp {
        if v >= net.len() {
            return Err(Error::InvalidQuery(format!("variable #{v} is not in the network")));
        }
        if s >= net.cardinality(v) {
            return Err(Error::StateOutOfRange {
                variable: net.name(v).to_string(),
                index: s,
                cardinality: net.cardinality(v),
            });
        }
    }
    Ok(())
}

/// `n` joint samples as a discrete dataset, with `clamp` held fixed.
pub fn sample_discrete(
    net: &DiscreteBayesNet,
    clamp: &Evidence,
    n: usize,
    seed: u64,
) -> Result<DiscreteDataset> {
    check_clamp(net, clamp)?;
    let sampler = Sampler::new(net);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = vec![Vec::with_capacity(n); net.len()];
    let mut state = vec![0; net.len()];
    for _ in 0..n {
        sampler.draw(&mut rng, clamp, &mut state);
        for (col, &s) in columns.iter_mut().zip(&state) {
            col.push(s);
        }
    }
    DiscreteDataset::new(net.metas().to_vec(), columns, net.map().clone())
}

/// A raw value inside state `s`: bins are sampled uniformly over their
/// interval, with the tails bounded by the recorded support.
fn raw_number<R: Rng>(enc: &ColumnEncoding, s: usize, rng: &mut R) -> f64 {
    match enc {
        ColumnEncoding::Levels { values } => values[s],
        ColumnEncoding::Binned { cuts, min, max } => {
            let lo = if s == 0 { min.min(cuts.first().copied().unwrap_or(*min)) } else { cuts[s - 1] };
            let hi = if s == cuts.len() { max.max(cuts.last().copied().unwrap_or(*max)) } else { cuts[s] };
            let v = hi - (hi - lo) * rng.random::<f64>();
            if s > 0 && v <= lo {
                hi
            } else {
                v
            }
        }
        ColumnEncoding::Boolean => s as f64,
        ColumnEncoding::Nominal { .. } => unreachable!("nominal columns carry text"),
    }
}

enum Builder {
    Numeric(Vec<f64>),
    Boolean(Vec<bool>),
    Text(Vec<String>),
}

/// Samples raw telemetry: each dwell of the schedule clamps its variables
/// for its rows. Rows come out in schedule order.
pub fn sample_telemetry(net: &DiscreteBayesNet, schedule: &SweepSchedule, seed: u64) -> Result<RawDataset> {
    if schedule.dwells.is_empty() {
        return Err(Error::EmptyInput);
    }
    let clamps = schedule.clamps(net)?;
    let runs: Vec<(Evidence, usize)> = clamps.into_iter().zip(schedule.dwells.iter().map(|d| d.rows)).collect();
    sample_runs(net, &runs, seed)
}

/// `n` raw rows with `clamp` held fixed.
pub fn sample_clamped(net: &DiscreteBayesNet, clamp: &Evidence, n: usize, seed: u64) -> Result<RawDataset> {
    sample_runs(net, &[(clamp.clone(), n)], seed)
}

fn sample_runs(net: &DiscreteBayesNet, runs: &[(Evidence, usize)], seed: u64) -> Result<RawDataset> {
    for (clamp, _) in runs {
        check_clamp(net, clamp)?;
    }
    let sampler = Sampler::new(net);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: usize = runs.iter().map(|r| r.1).sum();
    let mut builders: Vec<Builder> = (0..net.len())
        .map(|v| match net.encoding(v) {
            ColumnEncoding::Boolean => Builder::Boolean(Vec::with_capacity(rows)),
            ColumnEncoding::Nominal { .. } => Builder::Text(Vec::with_capacity(rows)),
            _ => Builder::Numeric(Vec::with_capacity(rows)),
        })
        .collect();
    let mut state = vec![0; net.len()];
    for (clamp, n) in runs {
        for _ in 0..*n {
            sampler.draw(&mut rng, clamp, &mut state);
            for (v, b) in builders.iter_mut().enumerate() {
                match b {
                    Builder::Boolean(col) => col.push(state[v] == 1),
                    Builder::Text(col) => col.push(net.meta(v).states[state[v]].clone()),
                    Builder::Numeric(col) => col.push(raw_number(net.encoding(v), state[v], &mut rng)),
                }
            }
        }
    }
    let columns = builders
        .into_iter()
        .enumerate()
        .map(|(v, b)| {
            let meta = net.meta(v);
            RawColumn {
                name: meta.name.clone(),
                kind: meta.kind,
                unit: meta.unit.clone(),
                parameterizable: meta.parameterizable,
                values: match b {
                    Builder::Numeric(x) => ColumnValues::Numeric(x),
                    Builder::Boolean(x) => ColumnValues::Boolean(x),
                    Builder::Text(x) => ColumnValues::Text(x),
                },
            }
        })
        .collect();
    RawDataset::new(columns)
}
