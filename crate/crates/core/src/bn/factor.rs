//! Dense factors over discrete variables.

/// A nonnegative table over `vars`, row-major with the last variable fastest.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(vars.len(), cards.len());
        debug_assert_eq!(cards.iter().product::<usize>(), values.len());
        Self { vars, cards, values }
    }

    pub fn scalar(value: f64) -> Self {
        Self::new(Vec::new(), Vec::new(), vec![value])
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, var: usize) -> bool {
        self.vars.contains(&var)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.cards[i + 1];
        }
        strides
    }

    /// Restricts `var` to `state` and drops it from the scope.
    pub fn reduce(&self, var: usize, state: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let strides = self.strides();
        let outer: usize = self.cards[..pos].iter().product();
        let inner = strides[pos];
        let block = inner * self.cards[pos];
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let start = o * block + state * inner;
            values.extend_from_slice(&self.values[start..start + inner]);
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        Factor::new(vars, cards, values)
    }

    /// Pointwise product over the union of both scopes.
    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(&v) {
                vars.push(v);
                cards.push(c);
            }
        }
        let left = aligned_strides(self, &vars);
        let right = aligned_strides(other, &vars);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0usize; vars.len()];
        let (mut li, mut ri) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[li] * other.values[ri]);
            // odometer increment, last variable fastest
            for d in (0..vars.len()).rev() {
                assignment[d] += 1;
                li += left[d];
                ri += right[d];
                if assignment[d] < cards[d] {
                    break;
                }
                li -= left[d] * cards[d];
                ri -= right[d] * cards[d];
                assignment[d] = 0;
            }
        }
        Factor::new(vars, cards, values)
    }

    /// Sums `var` out of the factor.
    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let strides = self.strides();
        let outer: usize = self.cards[..pos].iter().product();
        let inner = strides[pos];
        let card = self.cards[pos];
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let src = o * inner * card + s * inner;
                let dst = o * inner;
                for i in 0..inner {
                    values[dst + i] += self.values[src + i];
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        Factor::new(vars, cards, values)
    }
}

/// Strides of `factor`'s entries when walking the assignments of `scope`.
fn aligned_strides(factor: &Factor, scope: &[usize]) -> Vec<usize> {
    let own = factor.strides();
    scope
        .iter()
        .map(|v| {
            factor
                .vars
                .iter()
                .position(|u| u == v)
                .map_or(0, |p| own[p])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_matches_hand_computation() {
        // f(A,B) * g(B,C)
        let f = Factor::new(vec![0, 1], vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]);
        let g = Factor::new(vec![1, 2], vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let h = f.product(&g);
        assert_eq!(h.vars(), &[0, 1, 2]);
        let mut expected = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..3 {
                    expected.push(f.values[a * 2 + b] * g.values[b * 3 + c]);
                }
            }
        }
        assert_eq!(h.values(), expected.as_slice());
    }

    #[test]
    fn product_with_disjoint_scopes_is_outer_product() {
        let f = Factor::new(vec![3], vec![2], vec![0.25, 0.75]);
        let g = Factor::new(vec![1], vec![3], vec![1.0, 2.0, 4.0]);
        let h = f.product(&g);
        assert_eq!(h.values(), &[0.25, 0.5, 1.0, 0.75, 1.5, 3.0]);
    }

    #[test]
    fn sum_out_and_reduce() {
        let f = Factor::new(vec![0, 1], vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(f.sum_out(0).values(), &[5.0, 7.0, 9.0]);
        assert_eq!(f.sum_out(1).values(), &[6.0, 15.0]);
        assert_eq!(f.reduce(1, 2).values(), &[3.0, 6.0]);
        assert_eq!(f.reduce(0, 1).values(), &[4.0, 5.0, 6.0]);
        assert_eq!(f.reduce(7, 0), f);
        assert_eq!(Factor::scalar(1.0).product(&f).values(), f.values());
    }
}
