//! Integer partitions with their composition counts.

use crate::error::{Error, Result};

/// Largest `N` accepted by [`partitions_with_multiplicity`].
pub const MAX_PARTITION_N: usize = 64;

/// One partition of `N` and the number of distinct orderings of its parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTerm {
    /// Parts in non-increasing order.
    pub parts: Vec<usize>,
    pub multiplicity: u64,
}

impl PartitionTerm {
    /// `counts[k]` is the number of parts equal to `k` (index 0 unused).
    pub fn part_counts(&self) -> Vec<usize> {
        let max = self.parts.first().copied().unwrap_or(0);
        let mut counts = vec![0; max + 1];
        for &p in &self.parts {
            counts[p] += 1;
        }
        counts
    }
}

/// `J! / ∏ m_t!` for the repetition counts `m_t`, as a product of binomials.
fn multinomial(counts: &[usize]) -> u64 {
    let mut total: u128 = 0;
    let mut acc: u128 = 1;
    for &m in counts.iter().filter(|&&m| m > 0) {
        for i in 1..=m as u128 {
            total += 1;
            acc = acc * total / i;
        }
    }
    u64::try_from(acc).expect("multiplicity of a partition of N <= 64 fits in u64")
}

/// Every partition of `n` (parts non-increasing, generated in reverse
/// lexicographic order) with its multiplicity.
pub fn partitions_with_multiplicity(n: usize) -> Result<Vec<PartitionTerm>> {
    if n == 0 || n > MAX_PARTITION_N {
        return Err(Error::domain(format!(
            "partition size must be in 1..={MAX_PARTITION_N}, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut parts = vec![n];
    loop {
        let mut counts = vec![0usize; parts[0] + 1];
        for &p in &parts {
            counts[p] += 1;
        }
        out.push(PartitionTerm {
            parts: parts.clone(),
            multiplicity: multinomial(&counts),
        });

        // Next partition: strip trailing ones, decrement the last part > 1,
        // then refill greedily with parts no larger than it.
        let mut rem = 0;
        while parts.last() == Some(&1) {
            parts.pop();
            rem += 1;
        }
        let Some(last) = parts.pop() else { break };
        let k = last - 1;
        rem += 1;
        parts.push(k);
        while rem > 0 {
            let take = k.min(rem);
            parts.push(take);
            rem -= take;
        }
    }
    Ok(out)
}
