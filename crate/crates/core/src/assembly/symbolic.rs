//! Δ_N written out as a polynomial in the interaction terms.

use std::cmp::Ordering;
use std::fmt;

use super::partitions::{partitions_with_multiplicity, PartitionTerm};
use crate::error::Result;

/// One monomial `coefficient · ∏ I_k^{powers[k]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: u64,
    /// `powers[k]` is the exponent of `I_k`; index 0 is unused.
    pub powers: Vec<usize>,
}

impl Monomial {
    fn from_partition(t: &PartitionTerm) -> Self {
        Self {
            coefficient: t.multiplicity,
            powers: t.part_counts(),
        }
    }

    /// Ordering by the exponent of the highest term first, then downward.
    fn cmp_powers(&self, other: &Self) -> Ordering {
        let n = self.powers.len().max(other.powers.len());
        for k in (1..n).rev() {
            let a = self.powers.get(k).copied().unwrap_or(0);
            let b = other.powers.get(k).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if self.coefficient != 1 {
            write!(f, "{}", self.coefficient)?;
            first = false;
        }
        for (k, &p) in self
            .powers
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &p)| p > 0)
        {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "I{k}")?;
            if p > 1 {
                write!(f, "^{p}")?;
            }
        }
        Ok(())
    }
}

/// Δ_N as a sum of monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaPolynomial {
    pub n: usize,
    pub terms: Vec<Monomial>,
}

impl DeltaPolynomial {
    /// Evaluate with `i[k - 1] = I_k`.
    pub fn eval(&self, i: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|m| {
                m.powers
                    .iter()
                    .enumerate()
                    .skip(1)
                    .fold(m.coefficient as f64, |acc, (k, &p)| {
                        acc * i[k - 1].powi(p as i32)
                    })
            })
            .sum()
    }
}

impl fmt::Display for DeltaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Delta{} =", self.n)?;
        for (idx, m) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " +")?;
            }
            write!(f, " {m}")?;
        }
        Ok(())
    }
}

/// Symbolic expansion of Δ_N, grouped
/// by the largest interaction term, lowest powers first.
pub fn expand_delta(n: usize) -> Result<DeltaPolynomial> {
    let mut terms: Vec<Monomial> = partitions_with_multiplicity(n)?
        .iter()
        .map(Monomial::from_partition)
        .collect();
    terms.sort_by(|a, b| a.cmp_powers(b));
    Ok(DeltaPolynomial { n, terms })
}
