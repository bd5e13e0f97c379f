use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::infer::Evidence;
use crate::learn::DiscreteBayesNet;
use crate::reconfig::{parameter_space, DeviceConfig, Provenance};
use crate::slo::{empirical_fulfillment, parse_slos, FulfillmentReport, SloSpec};
use crate::telemetry::VariableMeta;

use super::sample::sample_clamped;

/// Rows replayed per configuration: ten minutes at 20 frames per second.
pub const REPLAY_ROWS: usize = 12_000;

const SCENARIO_A: &str = include_str!("../../fixtures/scenario_a.slo");
const SCENARIO_B: &str = include_str!("../../fixtures/scenario_b.slo");

/// A named set of SLOs with its GPU setting and the hand-picked
/// configuration it is compared against.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub slos: Vec<SloSpec>,
    pub gpu: bool,
    pub naive: [(&'static str, &'static str); 3],
}

impl Scenario {
    pub fn a() -> Self {
        Scenario {
            name: "A",
            slos: parse_slos(SCENARIO_A).expect("bundled scenario parses"),
            gpu: false,
            naive: [("pixel", "230400"), ("fps", "30"), ("config", "6C_20W")],
        }
    }

    pub fn b() -> Self {
        Scenario {
            name: "B",
            slos: parse_slos(SCENARIO_B).expect("bundled scenario parses"),
            gpu: true,
            naive: [("pixel", "57600"), ("fps", "26"), ("config", "4C_15W")],
        }
    }

    /// `a` or `b`, case-insensitive.
    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "a" => Ok(Self::a()),
            "b" => Ok(Self::b()),
            _ => Err(Error::InvalidQuery(format!("unknown scenario `{name}`"))),
        }
    }

    /// The bundled SLO file text.
    pub fn source(&self) -> &'static str {
        if self.name == "A" {
            SCENARIO_A
        } else {
            SCENARIO_B
        }
    }

    /// `gpu` pinned to the scenario's setting.
    pub fn constraints(&self, net: &DiscreteBayesNet) -> Result<Evidence> {
        let (v, s) = net.resolve_assignment("gpu", if self.gpu { "True" } else { "False" })?;
        Ok(Evidence::from([(v, s)]))
    }

    pub fn naive_config(&self, net: &DiscreteBayesNet) -> Result<DeviceConfig> {
        config_from_pairs(net, &self.naive, Provenance::Naive)
    }
}

/// A configuration from `name=value` text pairs.
pub fn config_from_pairs(
    net: &DiscreteBayesNet,
    pairs: &[(&str, &str)],
    provenance: Provenance,
) -> Result<DeviceConfig> {
    let assignment = pairs
        .iter()
        .map(|(k, v)| net.resolve_assignment(k, v))
        .collect::<Result<Evidence>>()?;
    Ok(DeviceConfig::new(assignment, provenance))
}

/// Re-expresses an assignment made against `from` as evidence on `to`,
/// matching variables by name and states by label.
pub fn translate(assignment: &Evidence, from: &[VariableMeta], to: &DiscreteBayesNet) -> Result<Evidence> {
    assignment
        .iter()
        .map(|(&v, &s)| {
            let meta = from
                .get(v)
                .ok_or_else(|| Error::InvalidQuery(format!("variable #{v} is unknown")))?;
            let label = meta.states.get(s).ok_or_else(|| Error::StateOutOfRange {
                variable: meta.name.clone(),
                index: s,
                cardinality: meta.cardinality(),
            })?;
            to.resolve_assignment(&meta.name, label)
        })
        .collect()
}

/// Samples `n_rows` from `net` with `clamp` fixed and judges the SLOs on
/// the raw rows.
pub fn replay(
    net: &DiscreteBayesNet,
    slos: &[SloSpec],
    clamp: &Evidence,
    n_rows: usize,
    seed: u64,
) -> Result<FulfillmentReport> {
    let raw = sample_clamped(net, clamp, n_rows, seed)?;
    empirical_fulfillment(&raw, slos)
}

/// `k` distinct configurations drawn uniformly from the parameter space.
pub fn random_configs(
    metas: &[VariableMeta],
    constraints: &Evidence,
    k: usize,
    seed: u64,
) -> Vec<DeviceConfig> {
    let space = parameter_space(metas, constraints);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&mut rng, space.len(), k.min(space.len()))
        .into_iter()
        .map(|i| DeviceConfig::new(space[i].assignment.clone(), Provenance::Random))
        .collect()
}
