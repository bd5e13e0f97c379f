use crate::error::{Error, Result};

use super::DiscreteDataset;

/// Joint counts of a child variable against every parent-state combination.
///
/// Rows are parent contexts in mixed-radix order (first parent most
/// significant), columns are child states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    pub child: usize,
    pub parents: Vec<usize>,
    pub parent_cards: Vec<usize>,
    pub child_card: usize,
    pub counts: Vec<u64>,
}

impl CountTable {
    pub fn contexts(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn row(&self, context: usize) -> &[u64] {
        &self.counts[context * self.child_card..(context + 1) * self.child_card]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn check_var(data: &DiscreteDataset, v: usize) -> Result<()> {
    if v >= data.var_count() {
        return Err(Error::UnknownVariable(format!("#{v}")));
    }
    Ok(())
}

pub fn contingency(data: &DiscreteDataset, child: usize, parents: &[usize]) -> Result<CountTable> {
    check_var(data, child)?;
    for &p in parents {
        check_var(data, p)?;
        if p == child {
            return Err(Error::InvalidQuery(format!(
                "`{}` cannot be its own parent",
                data.metas()[child].name
            )));
        }
    }
    let parent_cards: Vec<usize> = parents.iter().map(|&p| data.cardinality(p)).collect();
    let child_card = data.cardinality(child);
    let contexts: usize = parent_cards.iter().product();
    let mut counts = vec![0u64; contexts * child_card];

    let child_col = data.column(child);
    let parent_cols: Vec<&[usize]> = parents.iter().map(|&p| data.column(p)).collect();
    for (row, &c) in child_col.iter().enumerate() {
        let mut ctx = 0usize;
        for (col, &card) in parent_cols.iter().zip(&parent_cards) {
            ctx = ctx * card + col[row];
        }
        counts[ctx * child_card + c] += 1;
    }
    Ok(CountTable {
        child,
        parents: parents.to_vec(),
        parent_cards,
        child_card,
        counts,
    })
}
