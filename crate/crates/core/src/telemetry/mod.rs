//! Telemetry ingestion: CSV loading, schema handling, discretization and
//! count tables.

mod contingency;
mod discretize;
mod load;

pub use contingency::{contingency, CountTable};
pub use discretize::{
    discretize, discretize_with_cuts, ColumnEncoding, ColumnMap, DiscreteDataset, Discretized, DiscretizationMap,
    DiscretizationWarning, DiscretizePolicy, Strategy,
};
pub use load::{
    load_telemetry, parse_bool, telemetry_schema, write_csv, ColumnSchema, ColumnValues, RawColumn,
    RawDataset, RawValue,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measurement scale of a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariableKind {
    Boolean,
    Nominal,
    OrdinalNumeric,
}

impl VariableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableKind::Boolean => "boolean",
            VariableKind::Nominal => "nominal",
            VariableKind::OrdinalNumeric => "ordinal-numeric",
        }
    }
}

/// A discrete variable as seen by the network: its name, scale, unit and the
/// ordered list of state labels produced by discretization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableMeta {
    pub name: String,
    pub kind: VariableKind,
    pub unit: String,
    pub parameterizable: bool,
    pub states: Vec<String>,
}

impl VariableMeta {
    pub fn new(
        name: impl Into<String>,
        kind: VariableKind,
        unit: impl Into<String>,
        parameterizable: bool,
        states: Vec<String>,
    ) -> Result<Self> {
        let meta = VariableMeta {
            name: name.into(),
            kind,
            unit: unit.into(),
            parameterizable,
            states,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidMeta {
            variable: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.states.is_empty() {
            return Err(invalid("no states"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.states {
            if !seen.insert(s.as_str()) {
                return Err(invalid(&format!("duplicate state `{s}`")));
            }
        }
        if self.kind == VariableKind::Boolean && self.states.len() != 2 {
            return Err(invalid("boolean variables need exactly two states"));
        }
        if self.parameterizable && self.kind == VariableKind::Boolean {
            return Err(invalid("parameterizable variables must be nominal or ordinal"));
        }
        Ok(())
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Case-sensitive lookup first, then a case-insensitive fallback so that
/// `GPU=False` resolves against a `gpu` column.
pub(crate) fn find_name<'a, I>(names: I, wanted: &str) -> Option<usize>
where
    I: IntoIterator<Item = &'a str> + Clone,
{
    names
        .clone()
        .into_iter()
        .position(|n| n == wanted)
        .or_else(|| {
            names
                .into_iter()
                .position(|n| n.eq_ignore_ascii_case(wanted))
        })
}
