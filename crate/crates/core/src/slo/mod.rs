//! Service level objectives: the spec format, their discrete events, and
//! empirical and model-based evaluation.

mod cuts;
mod eval;
mod event;
mod spec;

pub use cuts::threshold_cuts;
pub use eval::{
    empirical_fulfillment, expected_objective, slo_probability, FulfillmentReport, SloModel,
    SloOutcome, Window,
};
pub(crate) use event::resolve_metrics;
pub use event::{slo_event, SloEvent};
pub use spec::{
    format_slos, parse_slos, parse_slos_for, BoundOp, Formula, SloKind, SloSpec, DEFAULT_P_MIN,
};
