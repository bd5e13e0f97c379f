use crate::error::{Error, Result};
use crate::telemetry::CountTable;

const ROW_TOLERANCE: f64 = 1e-9;

/// Conditional probability table of one variable given its parents.
///
/// `table` is row-major: one row per parent context (mixed radix, first
/// parent most significant), one column per child state.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpt {
    pub variable: usize,
    pub parents: Vec<usize>,
    pub parent_cards: Vec<usize>,
    pub child_card: usize,
    pub table: Vec<f64>,
    pub alpha: f64,
}

impl Cpt {
    pub fn new(
        variable: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        child_card: usize,
        table: Vec<f64>,
        alpha: f64,
    ) -> Result<Self> {
        let cpt = Cpt {
            variable,
            parents,
            parent_cards,
            child_card,
            table,
            alpha,
        };
        cpt.validate()?;
        Ok(cpt)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Error::InvalidNetwork(format!("CPT of #{}: {m}", self.variable));
        if self.parents.len() != self.parent_cards.len() {
            return Err(bad("parent cardinalities do not match parents".into()));
        }
        if self.child_card == 0 {
            return Err(bad("child has no states".into()));
        }
        if self.table.len() != self.contexts() * self.child_card {
            return Err(bad(format!(
                "table has {} entries, expected {}",
                self.table.len(),
                self.contexts() * self.child_card
            )));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(bad(format!("invalid smoothing {}", self.alpha)));
        }
        for ctx in 0..self.contexts() {
            let row = self.row(ctx);
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(bad(format!("row {ctx} has entries outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOLERANCE {
                return Err(bad(format!("row {ctx} sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn contexts(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn row(&self, context: usize) -> &[f64] {
        &self.table[context * self.child_card..(context + 1) * self.child_card]
    }

    /// Parent context index for a full assignment over all variables.
    pub fn context_of(&self, assignment: &[usize]) -> usize {
        self.parents
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |ctx, (&p, &card)| ctx * card + assignment[p])
    }

    /// `P(child = assignment[child] | parents = assignment[parents])`.
    pub fn prob(&self, assignment: &[usize]) -> f64 {
        self.row(self.context_of(assignment))[assignment[self.variable]]
    }

    /// Smoothed maximum-likelihood estimate from counts. With `alpha == 0`,
    /// contexts that were never observed get a uniform row.
    pub fn from_counts(counts: &CountTable, alpha: f64) -> Result<Self> {
        let r = counts.child_card;
        let mut table = Vec::with_capacity(counts.counts.len());
        for ctx in 0..counts.contexts() {
            let row = counts.row(ctx);
            let total: f64 = row.iter().map(|&c| c as f64).sum::<f64>() + alpha * r as f64;
            if total > 0.0 {
                table.extend(row.iter().map(|&c| (c as f64 + alpha) / total));
            } else {
                table.extend(std::iter::repeat_n(1.0 / r as f64, r));
            }
        }
        Cpt::new(
            counts.child,
            counts.parents.clone(),
            counts.parent_cards.clone(),
            r,
            table,
            alpha,
        )
    }
}
