use std::collections::BTreeMap;

use casimir_stack::assembly::{expand_delta, partitions_with_multiplicity};

const GOLDEN: &str = include_str!("data/delta_expansions.txt");

/// Monomial text (without coefficient) to coefficient.
fn parse_polynomial(rhs: &str) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for term in rhs.split(" + ") {
        let (coef, mono) = match term.split_once(' ') {
            Some((c, rest)) if c.chars().all(|ch| ch.is_ascii_digit()) => {
                (c.parse().unwrap(), rest)
            }
            _ => (1, term),
        };
        let mut factors: Vec<&str> = mono.split(' ').collect();
        factors.sort();
        assert!(
            out.insert(factors.join(" "), coef).is_none(),
            "duplicate monomial {mono}"
        );
    }
    out
}

fn golden() -> Vec<(usize, String)> {
    GOLDEN
        .lines()
        .map(|line| {
            let (lhs, rhs) = line.split_once(" = ").unwrap();
            (
                lhs.trim_start_matches("Delta").parse().unwrap(),
                rhs.to_string(),
            )
        })
        .collect()
}

#[test]
fn expansions_match_golden_terms() {
    let cases = golden();
    assert_eq!(
        cases.iter().map(|c| c.0).collect::<Vec<_>>(),
        [1, 2, 3, 4, 10]
    );
    for (n, rhs) in cases {
        let ours = expand_delta(n).unwrap().to_string();
        let ours_rhs = ours.split_once(" = ").unwrap().1;
        assert_eq!(
            parse_polynomial(ours_rhs),
            parse_polynomial(&rhs),
            "N = {n}"
        );
    }
}

#[test]
fn ten_cavity_expansion_keeps_golden_order() {
    let (_, rhs) = golden().pop().unwrap();
    assert_eq!(
        expand_delta(10).unwrap().to_string(),
        format!("Delta10 = {rhs}")
    );
}

/// Number of partitions of `n` from Euler's pentagonal recurrence.
fn partition_count(n: usize) -> usize {
    let mut p = vec![0i64; n + 1];
    p[0] = 1;
    for m in 1..=n {
        let mut k = 1i64;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > m {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            p[m] += sign * p[m - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= m {
                p[m] += sign * p[m - g2];
            }
            k += 1;
        }
    }
    p[n] as usize
}

#[test]
fn multiplicities_count_compositions() {
    for n in 1..=20 {
        let terms = partitions_with_multiplicity(n).unwrap();
        assert_eq!(terms.len(), partition_count(n), "N = {n}");
        let total: u64 = terms.iter().map(|t| t.multiplicity).sum();
        assert_eq!(total, 1u64 << (n - 1), "N = {n}");
    }
}
