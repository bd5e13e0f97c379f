use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::graph::Dag;
use crate::learn::{Cpt, DiscreteBayesNet};
use crate::telemetry::{telemetry_schema, ColumnEncoding, ColumnMap, DiscretizationMap, VariableMeta};

pub const DELAY: usize = 0;
pub const CPU: usize = 1;
pub const MEMORY: usize = 2;
pub const PIXEL: usize = 3;
pub const FPS: usize = 4;
pub const BITRATE: usize = 5;
pub const DISTANCE: usize = 6;
pub const TRANSFORMED: usize = 7;
pub const GPU: usize = 8;
pub const CONFIG: usize = 9;
pub const CONSUMPTION: usize = 10;

/// Frame sizes in pixels for 120p, 180p, 240p, 360p, 480p and 720p.
pub const PIXELS: [f64; 6] = [25_560.0, 57_600.0, 102_240.0, 230_400.0, 409_920.0, 921_600.0];
/// Frame heights matching [`PIXELS`].
pub const LINES: [f64; 6] = [120.0, 180.0, 240.0, 360.0, 480.0, 720.0];
pub const FPS_LEVELS: [f64; 5] = [12.0, 16.0, 20.0, 26.0, 30.0];
pub const CONFIGS: [&str; 3] = ["2C_10W", "4C_15W", "6C_20W"];
const CORES: [f64; 3] = [2.0, 4.0, 6.0];

/// Relative size of the multiplicative noise applied to every CPT entry.
pub const JITTER: f64 = 0.1;
/// Smallest CPT entry before normalization.
pub const FLOOR: f64 = 1e-4;

/// Edges of the ground-truth structure.
pub const EDGES: [(usize, usize); 15] = [
    (PIXEL, DELAY),
    (CONFIG, DELAY),
    (GPU, DELAY),
    (FPS, CPU),
    (CONFIG, CPU),
    (PIXEL, MEMORY),
    (GPU, MEMORY),
    (PIXEL, BITRATE),
    (FPS, BITRATE),
    (PIXEL, DISTANCE),
    (FPS, DISTANCE),
    (PIXEL, TRANSFORMED),
    (BITRATE, CONSUMPTION),
    (CONFIG, CONSUMPTION),
    (GPU, CONSUMPTION),
];

/// The simulator's reference model of the video transformation workload.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub net: DiscreteBayesNet,
    pub seed: u64,
}

fn binned(cuts: Vec<f64>, min: f64, max: f64) -> ColumnEncoding {
    ColumnEncoding::Binned { cuts, min, max }
}

/// Discretization of the ground truth, in the telemetry column order.
pub fn ground_truth_map() -> DiscretizationMap {
    let encodings = vec![
        binned(
            vec![10.0, 20.0, 1000.0 / 30.0, 1000.0 / 26.0, 50.0, 62.5, 1000.0 / 12.0, 120.0, 200.0],
            1.0,
            400.0,
        ),
        binned(vec![20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0], 2.0, 100.0),
        binned(vec![25.0, 30.0, 35.0, 40.0, 45.0, 50.0], 15.0, 70.0),
        ColumnEncoding::Levels { values: PIXELS.to_vec() },
        ColumnEncoding::Levels { values: FPS_LEVELS.to_vec() },
        binned(
            vec![0.4e6, 0.8e6, 1.6e6, 3e6, 5e6, 8.2e6, 12e6, 20e6, 40e6],
            1e5,
            6e7,
        ),
        binned(vec![5.0, 10.0, 15.0, 20.0, 25.0, 35.0, 45.0, 60.0, 90.0], 0.5, 250.0),
        ColumnEncoding::Boolean,
        ColumnEncoding::Boolean,
        ColumnEncoding::Nominal {
            labels: CONFIGS.iter().map(|s| s.to_string()).collect(),
        },
        binned(
            vec![4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 9.0, 10.0, 11.0],
            3.0,
            14.0,
        ),
    ];
    DiscretizationMap {
        columns: telemetry_schema()
            .into_iter()
            .zip(encodings)
            .map(|(c, encoding)| ColumnMap { name: c.name, encoding })
            .collect(),
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Probability of each bin of `enc` under a normal with the given mean and
/// standard deviation.
fn normal_bins(enc: &ColumnEncoding, mean: f64, sd: f64) -> Vec<f64> {
    let n = std_normal();
    (0..enc.cardinality())
        .map(|s| {
            let (lo, hi) = enc.interval(s).expect("binned");
            let cdf = |x: f64| {
                if x == f64::INFINITY {
                    1.0
                } else if x == f64::NEG_INFINITY {
                    0.0
                } else {
                    n.cdf((x - mean) / sd)
                }
            };
            cdf(hi) - cdf(lo)
        })
        .collect()
}

/// Same for a lognormal with the given median and log-scale spread.
fn lognormal_bins(enc: &ColumnEncoding, median: f64, sigma: f64) -> Vec<f64> {
    let n = std_normal();
    (0..enc.cardinality())
        .map(|s| {
            let (lo, hi) = enc.interval(s).expect("binned");
            let cdf = |x: f64| {
                if x <= 0.0 {
                    0.0
                } else if x == f64::INFINITY {
                    1.0
                } else {
                    n.cdf((x / median).ln() / sigma)
                }
            };
            cdf(hi) - cdf(lo)
        })
        .collect()
}

/// Unnormalized CPT row of `v` given its parents' states, in parent order.
fn row(map: &DiscretizationMap, v: usize, parents: &[usize]) -> Vec<f64> {
    let enc = map.encoding(v);
    match v {
        DELAY => {
            let (p, c, g) = (parents[0], parents[1], parents[2]);
            let core = [2.0, 1.0, 0.75][c];
            let accel = if g == 1 { 0.4 } else { 1.0 };
            let median = 30.0 * (PIXELS[p] / PIXELS[2]).powf(0.8) * core * accel;
            lognormal_bins(enc, median, 0.12)
        }
        CPU => {
            let (f, c) = (parents[0], parents[1]);
            let mean = 15.0 + 55.0 * (FPS_LEVELS[f] / 30.0) * (2.0 / CORES[c]).powf(0.7);
            normal_bins(enc, mean, 4.0)
        }
        MEMORY => {
            let (p, g) = (parents[0], parents[1]);
            normal_bins(enc, 22.0 + 3.0 * p as f64 + 10.0 * g as f64, 2.5)
        }
        BITRATE => {
            let (p, f) = (parents[0], parents[1]);
            lognormal_bins(enc, PIXELS[p] * FPS_LEVELS[f], 0.08)
        }
        DISTANCE => {
            let (p, f) = (parents[0], parents[1]);
            lognormal_bins(enc, 1.25 * LINES[p] / FPS_LEVELS[f], 0.3)
        }
        TRANSFORMED => {
            let t = [0.05, 0.55, 0.985, 0.99, 0.993, 0.996][parents[0]];
            vec![1.0 - t, t]
        }
        CONSUMPTION => {
            let (b, c, g) = (parents[0], parents[1], parents[2]);
            let rate = map.encoding(BITRATE).representative(b).expect("binned") / 1e6;
            let mean = [4.5, 5.5, 6.8][c] + 0.15 * rate + 1.2 * g as f64;
            normal_bins(enc, mean, 0.25)
        }
        _ => vec![1.0; enc.cardinality()],
    }
}

/// The ground-truth network. Parameters and `gpu` are uniform roots; every
/// other CPT follows a fixed parametric shape, perturbed by seeded jitter
/// and floored so that all entries are strictly positive.
pub fn ground_truth(seed: u64) -> GroundTruth {
    build(seed).expect("ground truth is well formed")
}

fn build(seed: u64) -> Result<GroundTruth> {
    let map = ground_truth_map();
    let metas: Vec<VariableMeta> = telemetry_schema()
        .iter()
        .zip(&map.columns)
        .map(|(c, m)| {
            VariableMeta::new(
                c.name.clone(),
                c.kind,
                c.unit.clone(),
                c.parameterizable,
                m.encoding.labels(),
            )
        })
        .collect::<Result<_>>()?;
    let names: Vec<String> = metas.iter().map(|m| m.name.clone()).collect();
    let dag = Dag::with_edges(names, &EDGES)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cpts = Vec::with_capacity(metas.len());
    for v in 0..metas.len() {
        let parents = dag.parents(v).to_vec();
        let parent_cards: Vec<usize> = parents.iter().map(|&p| metas[p].cardinality()).collect();
        let card = metas[v].cardinality();
        let contexts: usize = parent_cards.iter().product();
        let mut table = Vec::with_capacity(contexts * card);
        let mut states = vec![0usize; parents.len()];
        for _ in 0..contexts {
            let mut r = row(&map, v, &states);
            if !parents.is_empty() {
                for x in &mut r {
                    *x = (*x * (1.0 + JITTER * (2.0 * rng.random::<f64>() - 1.0))).max(FLOOR);
                }
            }
            let total: f64 = r.iter().sum();
            table.extend(r.iter().map(|x| x / total));
            for d in (0..states.len()).rev() {
                states[d] += 1;
                if states[d] < parent_cards[d] {
                    break;
                }
                states[d] = 0;
            }
        }
        cpts.push(Cpt::new(v, parents, parent_cards, card, table, 0.0)?);
    }
    Ok(GroundTruth {
        net: DiscreteBayesNet::new(metas, map, dag, cpts)?,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn parameters_are_roots_and_cpts_positive() {
        let gt = ground_truth(3);
        for v in gt.net.parameterizable() {
            assert!(gt.net.dag().parents(v).is_empty());
        }
        assert_eq!(gt.net.parameterizable(), vec![PIXEL, FPS, CONFIG]);
        for c in gt.net.cpts() {
            assert!(c.table.iter().all(|&p| p > 0.0));
        }
        let cards: Vec<usize> = [PIXEL, FPS, CONFIG, GPU].iter().map(|&v| gt.net.cardinality(v)).collect();
        assert_eq!(cards, vec![6, 5, 3, 2]);
    }

    #[test]
    fn consumption_blanket() {
        let gt = ground_truth(0);
        let b = gt.net.blanket(&[CONSUMPTION]).unwrap().blanket();
        assert_eq!(b, BTreeSet::from([BITRATE, GPU, CONFIG]));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(ground_truth(5), ground_truth(5));
        assert_ne!(ground_truth(5).net, ground_truth(6).net);
    }
}
