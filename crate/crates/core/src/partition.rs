use crate::error::{Error, Result};

/// Splits indices of `xs` into two sides each summing to at least N/3.
///
/// Greedy: visit items in descending order and put each on the currently
/// lighter side (ties go to A). Requires every item to be at most 2N/3.
pub fn balanced_integer_partition(xs: &[u64]) -> Result<(Vec<usize>, Vec<usize>)> {
    let total: u64 = xs.iter().sum();
    if let Some((i, &x)) = xs.iter().enumerate().find(|&(_, &x)| 3 * x > 2 * total) {
        return Err(Error::Precondition(format!("item {i} = {x} exceeds 2N/3 for N = {total}")));
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[b].cmp(&xs[a]).then(a.cmp(&b)));
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let (mut sa, mut sb) = (0u64, 0u64);
    for i in order {
        if sa <= sb {
            a.push(i);
            sa += xs[i];
        } else {
            b.push(i);
            sb += xs[i];
        }
    }
    Ok((a, b))
}
