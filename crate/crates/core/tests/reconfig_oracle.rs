mod common;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use mbconf_core::graph::Dag;
use mbconf_core::infer::Evidence;
use mbconf_core::learn::{Cpt, DiscreteBayesNet};
use mbconf_core::reconfig::{infer_best_config, ConfigScore};
use mbconf_core::slo::parse_slos;
use mbconf_core::telemetry::{ColumnEncoding, ColumnMap, DiscretizationMap, VariableKind, VariableMeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{blanket_by_definition, brute_posterior};

const TOL: f64 = 1e-9;

const PIXEL: usize = 0;
const FPS: usize = 1;
const CONFIG: usize = 2;
const GPU: usize = 3;
const DELAY: usize = 4;
const TRANSFORMED: usize = 5;
const DISTANCE: usize = 6;
const BITRATE: usize = 7;
const CONSUMPTION: usize = 8;

const SLOS: &str = "\
[on_time]
kind = composite
formula = within_time
metrics = delay, fps
p_min = 0.45

[transformed]
kind = rate
metric = transformed
p_min = 0.4

[distance]
kind = bound
metric = distance
op = <=
value = 2
p_min = 0.5

[bitrate]
kind = bound
metric = bitrate
op = <=
value = 1
p_min = 0.2

[energy]
kind = minimize
metric = consumption
unit = W
";

fn toy_net(seed: u64) -> DiscreteBayesNet {
    let encodings = vec![
        ("pixel", VariableKind::Nominal, true, ColumnEncoding::Nominal { labels: vec!["low".into(), "mid".into(), "high".into()] }),
        ("fps", VariableKind::OrdinalNumeric, true, ColumnEncoding::Levels { values: vec![20.0, 30.0, 50.0] }),
        ("config", VariableKind::Nominal, true, ColumnEncoding::Nominal { labels: vec!["small".into(), "large".into()] }),
        ("gpu", VariableKind::Boolean, false, ColumnEncoding::Boolean),
        ("delay", VariableKind::OrdinalNumeric, false, ColumnEncoding::Binned { cuts: vec![20.0, 40.0], min: 0.0, max: 60.0 }),
        ("transformed", VariableKind::Boolean, false, ColumnEncoding::Boolean),
        ("distance", VariableKind::OrdinalNumeric, false, ColumnEncoding::Binned { cuts: vec![1.0, 2.0], min: 0.0, max: 3.0 }),
        ("bitrate", VariableKind::OrdinalNumeric, false, ColumnEncoding::Binned { cuts: vec![1.0, 2.0], min: 0.0, max: 3.0 }),
        ("consumption", VariableKind::OrdinalNumeric, false, ColumnEncoding::Binned { cuts: vec![5.0, 10.0], min: 0.0, max: 15.0 }),
    ];
    let names: Vec<&str> = encodings.iter().map(|e| e.0).collect();
    let dag = Dag::from_named_edges(
        &names,
        &[
            ("pixel", "delay"),
            ("fps", "delay"),
            ("config", "delay"),
            ("gpu", "delay"),
            ("delay", "transformed"),
            ("pixel", "transformed"),
            ("pixel", "distance"),
            ("pixel", "bitrate"),
            ("fps", "bitrate"),
            ("bitrate", "consumption"),
            ("config", "consumption"),
            ("gpu", "consumption"),
        ],
    )
    .unwrap();
    let mut metas = Vec::new();
    let mut columns = Vec::new();
    for (name, kind, param, enc) in encodings {
        metas.push(VariableMeta::new(name, kind, "", param, enc.labels()).unwrap());
        columns.push(ColumnMap { name: name.into(), encoding: enc });
    }
    let cards: Vec<usize> = metas.iter().map(|m| m.cardinality()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cpts = (0..dag.len())
        .map(|v| {
            let parents = dag.parents(v).to_vec();
            let parent_cards: Vec<usize> = parents.iter().map(|&p| cards[p]).collect();
            let mut table = Vec::new();
            for _ in 0..parent_cards.iter().product::<usize>() {
                let row: Vec<f64> = (0..cards[v]).map(|_| rng.random_range(0.02..1.0)).collect();
                let z: f64 = row.iter().sum();
                table.extend(row.iter().map(|x| x / z));
            }
            Cpt::new(v, parents, parent_cards, cards[v], table, 0.0).unwrap()
        })
        .collect();
    DiscreteBayesNet::new(metas, DiscretizationMap { columns }, dag, cpts).unwrap()
}

/// Evidence restricted to the metrics and their merged blanket, read off
/// the edge list.
fn restricted(bn: &DiscreteBayesNet, metrics: &[usize], ev: &Evidence) -> Evidence {
    let mut scope: BTreeSet<usize> = metrics.iter().copied().collect();
    for &m in metrics {
        scope.extend(blanket_by_definition(bn.dag(), m));
    }
    ev.iter().filter(|(v, _)| scope.contains(v)).map(|(&v, &s)| (v, s)).collect()
}

struct Oracle {
    probabilities: Vec<f64>,
    energy: f64,
    feasible: bool,
    min_probability: f64,
}

fn oracle(bn: &DiscreteBayesNet, ev: &Evidence) -> Oracle {
    let fps_levels = [20.0, 30.0, 50.0];
    let delay_upper = [20.0, 40.0, f64::INFINITY];
    let post = brute_posterior(bn, &[DELAY, FPS], &restricted(bn, &[DELAY, FPS], ev));
    let mut on_time = 0.0;
    for d in 0..3 {
        for f in 0..3 {
            if delay_upper[d] <= 1000.0 / fps_levels[f] {
                on_time += post[d * 3 + f];
            }
        }
    }
    let transformed = brute_posterior(bn, &[TRANSFORMED], &restricted(bn, &[TRANSFORMED], ev))[1];
    let distance = brute_posterior(bn, &[DISTANCE], &restricted(bn, &[DISTANCE], ev));
    let bitrate = brute_posterior(bn, &[BITRATE], &restricted(bn, &[BITRATE], ev));
    let consumption = brute_posterior(bn, &[CONSUMPTION], &restricted(bn, &[CONSUMPTION], ev));
    let probabilities = vec![on_time, transformed, distance[0] + distance[1], bitrate[0]];
    let p_min = [0.45, 0.4, 0.5, 0.2];
    Oracle {
        feasible: probabilities.iter().zip(p_min).all(|(&p, q)| p >= q),
        min_probability: probabilities.iter().copied().fold(1.0, f64::min),
        energy: consumption[0] * 5.0 + consumption[1] * 7.5 + consumption[2] * 10.0,
        probabilities,
    }
}

/// `Less` if `a` should rank strictly ahead of `b` by more than `TOL`.
fn strictly_ahead(a: &Oracle, b: &Oracle) -> bool {
    if a.feasible != b.feasible {
        return a.feasible;
    }
    let objective = if (a.energy - b.energy).abs() <= TOL {
        Ordering::Equal
    } else {
        a.energy.total_cmp(&b.energy)
    };
    let weakest = if (a.min_probability - b.min_probability).abs() <= TOL {
        Ordering::Equal
    } else {
        b.min_probability.total_cmp(&a.min_probability)
    };
    let order = if a.feasible { objective.then(weakest) } else { weakest.then(objective) };
    order == Ordering::Less
}

fn evidence_of(score: &ConfigScore, gpu: usize) -> Evidence {
    let mut ev = score.config.assignment.clone();
    ev.insert(GPU, gpu);
    ev
}

#[test]
fn ranking_matches_full_joint_scoring() {
    let slos = parse_slos(SLOS).unwrap();
    let mut feasible_seen = 0;
    for seed in 0..12u64 {
        let bn = toy_net(seed);
        for gpu in 0..2 {
            let ranking = infer_best_config(&bn, &slos, &Evidence::from([(GPU, gpu)])).unwrap();
            assert_eq!(ranking.scores.len(), 18);
            assert_eq!(ranking.queries, 18 * 5);
            let oracles: Vec<Oracle> = ranking.scores.iter().map(|s| oracle(&bn, &evidence_of(s, gpu))).collect();
            for (s, o) in ranking.scores.iter().zip(&oracles) {
                for (entry, &p) in s.slos.iter().zip(&o.probabilities) {
                    let got = entry.probability.unwrap();
                    assert!((got - p).abs() <= TOL, "seed {seed} `{}`: {got} vs {p}", entry.name);
                }
                assert!((s.objective - o.energy).abs() <= TOL);
                assert_eq!(s.feasible, o.feasible, "seed {seed}");
            }
            for i in 1..oracles.len() {
                assert!(!strictly_ahead(&oracles[i], &oracles[i - 1]), "seed {seed} gpu {gpu}: rank {i} beats rank {}: {:?} {} {} vs {:?} {} {}", i - 1, oracles[i].probabilities, oracles[i].energy, oracles[i].feasible, oracles[i-1].probabilities, oracles[i-1].energy, oracles[i-1].feasible);
            }
            for o in &oracles {
                assert!(!strictly_ahead(o, &oracles[0]));
            }
            assert_eq!(ranking.none_feasible, !oracles[0].feasible);
            feasible_seen += oracles[0].feasible as usize;
            let params: BTreeSet<usize> = ranking.best().config.assignment.keys().copied().collect();
            assert_eq!(params, BTreeSet::from([PIXEL, FPS, CONFIG]));
        }
    }
    assert!(feasible_seen > 0 && feasible_seen < 24, "{feasible_seen} of 24 cases had a feasible winner");
}
