//! Discrete factors and exact inference by variable elimination.

mod elimination;
mod factor;
mod query;

pub use elimination::{eliminate, elimination_order, plan_width, product_all, EliminationPlan, Heuristic};
pub use factor::{factor_from_cpt, factor_product, marginalize, reduce, Factor};
pub use query::{query, query_with_order, BlanketModel, Evidence};
