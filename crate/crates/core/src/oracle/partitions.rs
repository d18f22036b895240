//! Brute-force enumeration of set partitions and of the sequential Polya-urn
//! law, independent of the closed-form partition ratio.

/// Call `f` once for every set partition of `0..n`, encoded as a restricted
/// growth string (`labels[0] = 0`, `labels[i] <= 1 + max(labels[..i])`).
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    fn rec(labels: &mut Vec<usize>, n: usize, blocks: usize, f: &mut dyn FnMut(&[usize])) {
        if labels.len() == n {
            f(labels);
            return;
        }
        for b in 0..=blocks {
            labels.push(b);
            rec(labels, n, blocks.max(b + 1), f);
            labels.pop();
        }
    }
    let mut labels = Vec::with_capacity(n);
    rec(&mut labels, n, 0, &mut f);
}

pub fn num_blocks(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

/// Probability that the Polya urn with concentration `alpha` seats customers
/// `0..n` in exactly the order given by `labels`: customer `i` joins block `j`
/// with probability `n_j / (alpha + i)` or opens a block with `alpha / (alpha + i)`.
pub fn sequential_urn_probability(labels: &[usize], alpha: f64) -> f64 {
    let mut counts: Vec<usize> = Vec::new();
    let mut p = 1.0;
    for (i, &b) in labels.iter().enumerate() {
        let denom = alpha + i as f64;
        if b == counts.len() {
            p *= alpha / denom;
            counts.push(1);
        } else {
            p *= counts[b] as f64 / denom;
            counts[b] += 1;
        }
    }
    p
}

/// Bell numbers, for sanity checks on the enumeration.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_bell_numbers() {
        for n in 1..=8 {
            let mut count = 0u64;
            for_each_partition(n, |_| count += 1);
            assert_eq!(count, bell(n), "n = {n}");
        }
        assert_eq!(bell(8), 4140);
    }

    #[test]
    fn urn_probabilities_sum_to_one() {
        for &a in &[0.3, 1.0, 7.5] {
            let mut total = 0.0;
            for_each_partition(6, |l| total += sequential_urn_probability(l, a));
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
