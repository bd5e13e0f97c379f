use crate::error::{Error, Result};
use crate::learn::Cpt;

/// Dense nonnegative table over an ordered scope, row-major with the last
/// scope variable varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if scope.len() != cards.len() {
            return Err(Error::InvalidQuery(format!(
                "{} variables but {} cardinalities",
                scope.len(),
                cards.len()
            )));
        }
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].contains(v) {
                return Err(Error::InvalidQuery(format!("variable #{v} repeated in scope")));
            }
        }
        if cards.contains(&0) {
            return Err(Error::InvalidQuery("zero cardinality".into()));
        }
        let size: usize = cards.iter().product();
        if values.len() != size {
            return Err(Error::InvalidQuery(format!(
                "{} values for {size} cells",
                values.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidQuery("factor values must be finite and nonnegative".into()));
        }
        Ok(Factor {
            scope,
            cards,
            values,
        })
    }

    pub fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn ones(scope: Vec<usize>, cards: Vec<usize>) -> Self {
        let size = cards.iter().product();
        Factor {
            scope,
            cards,
            values: vec![1.0; size],
        }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn position(&self, var: usize) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }

    pub fn contains(&self, var: usize) -> bool {
        self.scope.contains(&var)
    }

    /// Cell for an assignment given in scope order.
    pub fn get(&self, states: &[usize]) -> f64 {
        self.values[self.offset(states)]
    }

    fn offset(&self, states: &[usize]) -> usize {
        debug_assert_eq!(states.len(), self.scope.len());
        states
            .iter()
            .zip(&self.cards)
            .fold(0, |off, (&s, &k)| off * k + s)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.scope.len()];
        for i in (0..self.scope.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.cards[i + 1];
        }
        strides
    }

    /// Scales the table to sum to one. A table without mass means the
    /// evidence that produced it is impossible.
    pub fn normalized(mut self) -> Result<Factor> {
        let total = self.total();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::InconsistentEvidence);
        }
        for x in &mut self.values {
            *x /= total;
        }
        Ok(self)
    }

    /// The same table with its axes rearranged to `order`, which must be a
    /// permutation of the scope.
    pub fn permuted(&self, order: &[usize]) -> Result<Factor> {
        if order.len() != self.scope.len() {
            return Err(Error::InvalidQuery("permutation does not match the scope".into()));
        }
        let positions: Vec<usize> = order
            .iter()
            .map(|&v| self.position(v).ok_or_else(|| Error::NotInScope(format!("#{v}"))))
            .collect::<Result<_>>()?;
        if order == self.scope.as_slice() {
            return Ok(self.clone());
        }
        let strides = self.strides();
        let cards: Vec<usize> = positions.iter().map(|&p| self.cards[p]).collect();
        let src_strides: Vec<usize> = positions.iter().map(|&p| strides[p]).collect();
        let values = gather(&cards, &src_strides, &self.values);
        Ok(Factor {
            scope: order.to_vec(),
            cards,
            values,
        })
    }
}

/// Reads `src` through `src_strides` in odometer order over `cards`.
fn gather(cards: &[usize], src_strides: &[usize], src: &[f64]) -> Vec<f64> {
    let size: usize = cards.iter().product();
    let mut out = Vec::with_capacity(size);
    let mut states = vec![0usize; cards.len()];
    let mut idx = 0usize;
    for _ in 0..size {
        out.push(src[idx]);
        for d in (0..cards.len()).rev() {
            states[d] += 1;
            idx += src_strides[d];
            if states[d] < cards[d] {
                break;
            }
            idx -= src_strides[d] * cards[d];
            states[d] = 0;
        }
    }
    out
}

/// Scope `[parents.., child]`, one cell per CPT entry.
pub fn factor_from_cpt(cpt: &Cpt) -> Factor {
    let mut scope = cpt.parents.clone();
    scope.push(cpt.variable);
    let mut cards = cpt.parent_cards.clone();
    cards.push(cpt.child_card);
    Factor {
        scope,
        cards,
        values: cpt.table.clone(),
    }
}

/// Pointwise product over the union of both scopes (`a`'s variables first).
pub fn factor_product(a: &Factor, b: &Factor) -> Result<Factor> {
    let mut scope = a.scope.clone();
    let mut cards = a.cards.clone();
    for (&v, &k) in b.scope.iter().zip(&b.cards) {
        match a.position(v) {
            Some(p) if a.cards[p] != k => {
                return Err(Error::CardinalityClash {
                    variable: format!("#{v}"),
                    left: a.cards[p],
                    right: k,
                })
            }
            Some(_) => {}
            None => {
                scope.push(v);
                cards.push(k);
            }
        }
    }
    let sa = a.strides();
    let sb = b.strides();
    let stride_a: Vec<usize> = scope
        .iter()
        .map(|&v| a.position(v).map_or(0, |p| sa[p]))
        .collect();
    let stride_b: Vec<usize> = scope
        .iter()
        .map(|&v| b.position(v).map_or(0, |p| sb[p]))
        .collect();
    let size: usize = cards.iter().product();
    let mut values = Vec::with_capacity(size);
    let mut states = vec![0usize; scope.len()];
    let (mut ia, mut ib) = (0usize, 0usize);
    for _ in 0..size {
        values.push(a.values[ia] * b.values[ib]);
        for d in (0..scope.len()).rev() {
            states[d] += 1;
            ia += stride_a[d];
            ib += stride_b[d];
            if states[d] < cards[d] {
                break;
            }
            ia -= stride_a[d] * cards[d];
            ib -= stride_b[d] * cards[d];
            states[d] = 0;
        }
    }
    Ok(Factor {
        scope,
        cards,
        values,
    })
}

/// Sums `var` out of the table.
pub fn marginalize(f: &Factor, var: usize) -> Result<Factor> {
    let p = f
        .position(var)
        .ok_or_else(|| Error::NotInScope(format!("#{var}")))?;
    let k = f.cards[p];
    let inner: usize = f.cards[p + 1..].iter().product();
    let outer: usize = f.cards[..p].iter().product();
    let mut values = vec![0.0; outer * inner];
    for o in 0..outer {
        for s in 0..k {
            let src = &f.values[(o * k + s) * inner..(o * k + s + 1) * inner];
            for (dst, x) in values[o * inner..(o + 1) * inner].iter_mut().zip(src) {
                *dst += x;
            }
        }
    }
    let mut scope = f.scope.clone();
    let mut cards = f.cards.clone();
    scope.remove(p);
    cards.remove(p);
    Ok(Factor {
        scope,
        cards,
        values,
    })
}

/// Slices every evidence variable present in the scope at its observed
/// state. Evidence on other variables is ignored.
pub fn reduce(f: &Factor, evidence: &[(usize, usize)]) -> Result<Factor> {
    let mut out = f.clone();
    for &(var, state) in evidence {
        let Some(p) = out.position(var) else { continue };
        let k = out.cards[p];
        if state >= k {
            return Err(Error::StateOutOfRange {
                variable: format!("#{var}"),
                index: state,
                cardinality: k,
            });
        }
        let inner: usize = out.cards[p + 1..].iter().product();
        let outer: usize = out.cards[..p].iter().product();
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let start = (o * k + state) * inner;
            values.extend_from_slice(&out.values[start..start + inner]);
        }
        out.scope.remove(p);
        out.cards.remove(p);
        out.values = values;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn f(scope: &[usize], cards: &[usize], values: &[f64]) -> Factor {
        Factor::new(scope.to_vec(), cards.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn from_cpt_layout() {
        let root = Cpt::new(0, vec![], vec![], 2, vec![0.3, 0.7], 0.0).unwrap();
        assert_eq!(factor_from_cpt(&root), f(&[0], &[2], &[0.3, 0.7]));
        let child = Cpt::new(1, vec![0], vec![2], 2, vec![0.9, 0.1, 0.4, 0.6], 0.0).unwrap();
        let fc = factor_from_cpt(&child);
        assert_eq!(fc.scope(), &[0, 1]);
        assert_eq!(fc.get(&[1, 0]), 0.4);
        let summed = marginalize(&fc, 1).unwrap();
        assert_eq!(summed.values(), &[1.0, 1.0]);
    }

    #[test]
    fn product_by_hand() {
        let a = f(&[0], &[2], &[0.2, 0.8]);
        let g = f(&[0, 1], &[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        let p = factor_product(&a, &g).unwrap();
        assert_eq!(p.scope(), &[0, 1]);
        let expected = [0.2, 0.4, 2.4, 3.2];
        for (x, e) in p.values().iter().zip(expected) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn product_with_ones_is_identity() {
        let g = f(&[3, 1], &[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let one = Factor::ones(vec![1, 3], vec![3, 2]);
        assert_eq!(factor_product(&g, &one).unwrap(), g);
    }

    #[test]
    fn product_rejects_clash() {
        let a = f(&[0], &[2], &[1.0, 1.0]);
        let b = f(&[0], &[3], &[1.0, 1.0, 1.0]);
        assert!(matches!(
            factor_product(&a, &b),
            Err(Error::CardinalityClash { left: 2, right: 3, .. })
        ));
    }

    #[test]
    fn marginalize_by_hand() {
        let g = f(&[0, 1], &[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(marginalize(&g, 0).unwrap(), f(&[1], &[2], &[4.0, 6.0]));
        assert_eq!(marginalize(&g, 1).unwrap(), f(&[0], &[2], &[3.0, 7.0]));
        let all = marginalize(&marginalize(&g, 0).unwrap(), 1).unwrap();
        assert_eq!(all.scope(), &[] as &[usize]);
        assert_eq!(all.values(), &[10.0]);
        assert!(matches!(marginalize(&g, 7), Err(Error::NotInScope(_))));
    }

    #[test]
    fn reduce_by_hand() {
        let g = f(&[0, 1], &[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(reduce(&g, &[(1, 1)]).unwrap(), f(&[0], &[2], &[2.0, 4.0]));
        assert_eq!(reduce(&g, &[]).unwrap(), g);
        assert!(matches!(
            reduce(&g, &[(0, 2)]),
            Err(Error::StateOutOfRange { index: 2, cardinality: 2, .. })
        ));
    }

    #[test]
    fn normalizing_empty_mass_is_inconsistent() {
        let z = f(&[0], &[2], &[0.0, 0.0]);
        assert!(matches!(z.normalized(), Err(Error::InconsistentEvidence)));
    }

    fn arb_factor(scope: Vec<usize>) -> impl Strategy<Value = Factor> {
        let cards = prop::collection::vec(1usize..4, scope.len());
        cards.prop_flat_map(move |cards| {
            let size: usize = cards.iter().product();
            let scope = scope.clone();
            prop::collection::vec(0.0f64..5.0, size)
                .prop_map(move |values| Factor::new(scope.clone(), cards.clone(), values).unwrap())
        })
    }

    proptest! {
        #[test]
        fn product_commutes_up_to_axis_order(
            a in arb_factor(vec![0, 1]),
            extra in prop::collection::vec(0.0f64..5.0, 1..4),
        ) {
            // b shares variable 1 with a and adds variable 2
            let k1 = a.cards()[1];
            let k2 = extra.len();
            let values: Vec<f64> = (0..k2 * k1).map(|i| extra[i % k2] + i as f64 * 0.25).collect();
            let b = Factor::new(vec![2, 1], vec![k2, k1], values).unwrap();
            let ab = factor_product(&a, &b).unwrap();
            let ba = factor_product(&b, &a).unwrap().permuted(ab.scope()).unwrap();
            for (x, y) in ab.values().iter().zip(ba.values()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
            // cell-by-cell against the definition
            for s0 in 0..a.cards()[0] {
                for s1 in 0..k1 {
                    for s2 in 0..k2 {
                        let want = a.get(&[s0, s1]) * b.get(&[s2, s1]);
                        prop_assert_eq!(ab.get(&[s0, s1, s2]), want);
                    }
                }
            }
        }

        #[test]
        fn marginalize_conserves_mass(a in arb_factor(vec![4, 2, 9])) {
            for v in [4, 2, 9] {
                let m = marginalize(&a, v).unwrap();
                prop_assert!((m.total() - a.total()).abs() <= 1e-9 * a.total().max(1.0));
            }
        }

        #[test]
        fn reduce_then_marginalize_is_a_slice_sum(a in arb_factor(vec![0, 1, 2])) {
            let state = a.cards()[1] - 1;
            let r = reduce(&a, &[(1, state)]).unwrap();
            let got = marginalize(&r, 2).unwrap();
            for s0 in 0..a.cards()[0] {
                let want: f64 = (0..a.cards()[2]).map(|s2| a.get(&[s0, state, s2])).sum();
                prop_assert!((got.get(&[s0]) - want).abs() <= 1e-12 * want.max(1.0));
            }
        }
    }
}
